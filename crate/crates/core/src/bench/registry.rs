//! Benchmark instance metadata.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub f_bkv: Option<u64>,
    /// `f_bkv` is a proven optimum.
    pub optimal: bool,
}

impl InstanceMeta {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k >= self.n {
            return Err(Error::domain(format!(
                "{}: k = {} must lie in [1, n) with n = {}",
                self.name, self.k, self.n
            )));
        }
        if self.optimal && self.f_bkv.is_none() {
            return Err(Error::domain(format!(
                "{}: flagged optimal without a best-known value",
                self.name
            )));
        }
        Ok(())
    }

    /// Whether a result matches or beats the best-known value.
    pub fn is_success(&self, f: u64) -> bool {
        self.f_bkv.is_some_and(|b| f <= b)
    }
}

// (name, n, m, k, f_bkv, optimal)
const BUILTIN: [(&str, usize, usize, usize, u64, bool); 42] = [
    ("BA500", 500, 499, 50, 195, true),
    ("BA1000", 1000, 999, 75, 558, true),
    ("BA2500", 2500, 2499, 100, 3704, true),
    ("BA5000", 5000, 4999, 150, 10196, true),
    ("ER235", 235, 350, 50, 295, true),
    ("ER466", 466, 700, 80, 1524, false),
    ("ER941", 941, 1400, 140, 5012, false),
    ("ER2344", 2344, 3500, 200, 902498, false),
    ("FF250", 250, 514, 50, 194, true),
    ("FF500", 500, 828, 110, 257, true),
    ("FF1000", 1000, 1817, 150, 1260, true),
    ("FF2000", 2000, 3413, 200, 4545, true),
    ("WS250", 250, 1246, 70, 3083, false),
    ("WS500", 500, 1496, 125, 2072, false),
    ("WS1000", 1000, 4996, 200, 109807, false),
    ("WS1500", 1500, 4498, 265, 13098, false),
    ("Bovine", 121, 190, 3, 268, false),
    ("Circuit", 252, 399, 25, 2099, false),
    ("E.coli", 328, 456, 15, 806, false),
    ("USAir97", 332, 2126, 33, 4336, false),
    ("humanDisea", 516, 1188, 52, 1115, false),
    ("Treni_Roma", 255, 272, 26, 918, false),
    ("EU_flights", 1191, 31610, 119, 348268, false),
    ("openflights", 1858, 13900, 186, 26842, false),
    ("yeast1", 2018, 2705, 202, 1412, false),
    ("Ham1000", 1000, 1998, 100, 306349, false),
    ("Ham2000", 2000, 3996, 200, 1243859, false),
    ("Ham3000a", 3000, 5999, 300, 2844393, false),
    ("Ham3000b", 3000, 5997, 300, 2841270, false),
    ("Ham3000c", 3000, 5996, 300, 2838429, false),
    ("Ham3000d", 3000, 5993, 300, 2831311, false),
    ("Ham3000e", 3000, 5996, 300, 2847909, false),
    ("Ham4000", 4000, 7997, 400, 5044357, false),
    ("Ham5000", 5000, 9999, 500, 7972525, false),
    ("powergrid", 4941, 6594, 494, 15862, false),
    ("Oclinks", 1899, 13838, 190, 611326, false),
    ("facebook", 4039, 88234, 404, 420334, false),
    ("grqc", 5242, 14484, 524, 13596, false),
    ("hepth", 9877, 25973, 988, 106397, false),
    ("hepph", 12008, 118489, 1201, 6156536, false),
    ("astroph", 18772, 198050, 1877, 53963375, false),
    ("condmat", 23133, 93439, 2313, 2298596, false),
];

/// Lowercase alphanumeric form of an instance name, so that `E.coli`,
/// `Ecoli` and `ecoli.txt`'s stem all compare equal.
pub fn normalize_name(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registry {
    entries: Vec<InstanceMeta>,
}

impl Registry {
    /// The 42 standard benchmark instances.
    pub fn builtin() -> Registry {
        let entries = BUILTIN
            .iter()
            .map(|&(name, n, m, k, f, optimal)| InstanceMeta {
                name: name.to_string(),
                n,
                m,
                k,
                f_bkv: Some(f),
                optimal,
            })
            .collect();
        Registry { entries }
    }

    pub fn new(entries: Vec<InstanceMeta>) -> Result<Registry> {
        let mut seen = std::collections::HashSet::new();
        for e in &entries {
            e.validate()?;
            if !seen.insert(normalize_name(&e.name)) {
                return Err(Error::domain(format!("duplicate instance `{}`", e.name)));
            }
        }
        Ok(Registry { entries })
    }

    /// Reads a CSV with header `name,n,m,k,f_bkv,optimal`; `f_bkv` may be empty.
    pub fn from_csv(path: &Path) -> Result<Registry> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(file);
        let entries = reader
            .deserialize()
            .collect::<std::result::Result<Vec<InstanceMeta>, _>>()?;
        Registry::new(entries)
    }

    pub fn entries(&self) -> &[InstanceMeta] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&InstanceMeta> {
        let key = normalize_name(name);
        self.entries.iter().find(|e| normalize_name(&e.name) == key)
    }

    pub fn optimal(&self) -> impl Iterator<Item = &InstanceMeta> {
        self.entries.iter().filter(|e| e.optimal)
    }
}
