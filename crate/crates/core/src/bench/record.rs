//! Per-run results, per-instance aggregates and their CSV/JSON forms.
//!
//! The runs CSV has the fixed header
//! `instance,seed,mode,f_best,t_to_best,gens,succ`; `t_to_best` is empty for
//! runs under a generation budget. The aggregate file sits next to it as
//! `<stem>.summary.csv` with one row per instance.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::registry::{InstanceMeta, Registry};
use crate::error::{Error, Result};
use crate::solver::{Budget, Mode, SolverConfig};

pub const RUNS_HEADER: [&str; 7] = [
    "instance",
    "seed",
    "mode",
    "f_best",
    "t_to_best",
    "gens",
    "succ",
];

pub const SUMMARY_HEADER: [&str; 10] = [
    "instance", "runs", "f_bkv", "f_best", "f_avg", "t_avg", "gens_avg", "succ", "gap_best",
    "gap_avg",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub seed: u64,
    pub mode: Mode,
    pub f_best: u64,
    /// Seconds until `f_best` was first reached. Left out under a generation
    /// budget so that records are reproducible byte for byte.
    pub t_to_best: Option<f64>,
    /// Generation in which `f_best` was reached.
    pub gens: u64,
    pub succ: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_gens: Option<u64>,
    /// Removal set in the instance file's node ids.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub best_nodes: Vec<u64>,
}

/// Relative gap to the best-known value; negative means the bound improved.
pub fn gap(f: f64, f_bkv: u64) -> Option<f64> {
    (f_bkv > 0).then(|| (f - f_bkv as f64) / f_bkv as f64)
}

/// Aggregates over all runs of one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub instance: String,
    pub runs: usize,
    pub f_bkv: Option<u64>,
    pub f_best: u64,
    pub f_avg: f64,
    pub t_avg: Option<f64>,
    pub gens_avg: f64,
    pub succ: usize,
    pub gap_best: Option<f64>,
    pub gap_avg: Option<f64>,
}

/// Groups records by instance (sorted by name) and aggregates each group.
/// `f_bkv` comes from the registry when the instance is known there.
pub fn summarize(records: &[RunRecord], registry: Option<&Registry>) -> Vec<InstanceSummary> {
    let mut groups: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(&r.instance).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(name, runs)| {
            let count = runs.len() as f64;
            let f_best = runs.iter().map(|r| r.f_best).min().unwrap_or(0);
            let f_avg = runs.iter().map(|r| r.f_best as f64).sum::<f64>() / count;
            let times: Option<Vec<f64>> = runs.iter().map(|r| r.t_to_best).collect();
            let t_avg = times.map(|t| t.iter().sum::<f64>() / count);
            let gens_avg = runs.iter().map(|r| r.gens as f64).sum::<f64>() / count;
            let f_bkv = registry.and_then(|reg| reg.get(name)).and_then(|m| m.f_bkv);
            InstanceSummary {
                instance: name.to_string(),
                runs: runs.len(),
                f_bkv,
                f_best,
                f_avg,
                t_avg,
                gens_avg,
                succ: runs.iter().filter(|r| r.succ).count(),
                gap_best: f_bkv.and_then(|b| gap(f_best as f64, b)),
                gap_avg: f_bkv.and_then(|b| gap(f_avg, b)),
            }
        })
        .collect()
}

/// Records that beat a proven optimum. Any hit means the objective or the
/// instance file is wrong; each one is also logged at error level.
pub fn red_flags<'a>(records: &'a [RunRecord], registry: &Registry) -> Vec<&'a RunRecord> {
    records
        .iter()
        .filter(|r| match registry.get(&r.instance) {
            Some(InstanceMeta {
                optimal: true,
                f_bkv: Some(opt),
                ..
            }) if r.f_best < *opt => {
                log::error!(
                    "{} seed {}: f = {} is below the proven optimum {}",
                    r.instance,
                    r.seed,
                    r.f_best,
                    opt
                );
                true
            }
            _ => false,
        })
        .collect()
}

/// Settings shared by every run in a batch, stored alongside JSON results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub budget: Budget,
    pub repeats: usize,
    pub base_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub config: Option<RunConfig>,
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<InstanceSummary>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` means JSON; anything else is read and written as CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Format> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::domain(format!("unknown format `{other}`"))),
        }
    }
}

/// Path of the aggregate file written next to a runs CSV.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("results");
    path.with_file_name(format!("{stem}.summary.csv"))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

pub fn write_runs_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(RUNS_HEADER)?;
    for r in records {
        w.write_record([
            r.instance.clone(),
            r.seed.to_string(),
            r.mode.to_string(),
            r.f_best.to_string(),
            opt(r.t_to_best),
            r.gens.to_string(),
            r.succ.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_summary_csv(summaries: &[InstanceSummary], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        w.write_record([
            s.instance.clone(),
            s.runs.to_string(),
            opt(s.f_bkv),
            s.f_best.to_string(),
            s.f_avg.to_string(),
            opt(s.t_avg),
            s.gens_avg.to_string(),
            s.succ.to_string(),
            opt(s.gap_best),
            opt(s.gap_avg),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes records plus aggregates. CSV output produces two files (see
/// [`summary_path`]); JSON output is a single [`ResultsDocument`].
pub fn export_results(
    records: &[RunRecord],
    config: Option<&RunConfig>,
    registry: Option<&Registry>,
    format: Format,
    path: &Path,
) -> Result<()> {
    let aggregates = summarize(records, registry);
    match format {
        Format::Csv => {
            write_runs_csv(records, path)?;
            write_summary_csv(&aggregates, &summary_path(path))
        }
        Format::Json => {
            let doc = ResultsDocument {
                config: config.cloned(),
                records: records.to_vec(),
                aggregates,
            };
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(file);
            serde_json::to_writer_pretty(&mut w, &doc)?;
            w.flush().map_err(|e| Error::io(path, e))
        }
    }
}

#[derive(Deserialize)]
struct CsvRun {
    instance: String,
    seed: u64,
    mode: Mode,
    f_best: u64,
    t_to_best: Option<f64>,
    gens: u64,
    succ: bool,
}

/// Reads records written by [`export_results`], choosing the format from
/// the file extension.
pub fn read_results(path: &Path) -> Result<Vec<RunRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match Format::from_path(path) {
        Format::Json => {
            let doc: ResultsDocument = serde_json::from_reader(BufReader::new(file))?;
            Ok(doc.records)
        }
        Format::Csv => {
            let mut reader = csv::Reader::from_reader(BufReader::new(file));
            let headers = reader.headers()?.clone();
            if headers.iter().ne(RUNS_HEADER) {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header {}", RUNS_HEADER.join(",")),
                });
            }
            reader
                .deserialize::<CsvRun>()
                .map(|row| {
                    let r = row?;
                    Ok(RunRecord {
                        instance: r.instance,
                        seed: r.seed,
                        mode: r.mode,
                        f_best: r.f_best,
                        t_to_best: r.t_to_best,
                        gens: r.gens,
                        succ: r.succ,
                        total_gens: None,
                        best_nodes: Vec::new(),
                    })
                })
                .collect()
        }
    }
}
