//! Seeded multi-run orchestration over registry instances.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::record::{RunConfig, RunRecord};
use super::registry::{normalize_name, InstanceMeta};
use crate::error::{Error, Result};
use crate::graph::{read_instance, Graph, ParseOptions};
use crate::solver::{solve, SolveOptions, SolverConfig};
use crate::Budget;

/// Locates `<name>.<ext>` (or an extensionless `<name>`) in `dir`, comparing
/// names in normalized form.
pub fn find_instance_file(dir: &Path, name: &str) -> Option<PathBuf> {
    let key = normalize_name(name);
    let mut hits: Vec<PathBuf> = std::fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| {
            p.file_stem()
                .and_then(|s| s.to_str())
                .is_some_and(|s| normalize_name(s) == key)
        })
        .collect();
    hits.sort();
    hits.into_iter().next()
}

/// Reads an instance file and checks it against the registry's `n` and `m`.
pub fn load_instance(path: &Path, meta: &InstanceMeta, options: ParseOptions) -> Result<Graph> {
    let parsed = read_instance(path, options)?;
    let g = parsed.graph;
    if g.node_count() != meta.n || g.edge_count() != meta.m {
        return Err(Error::Instance {
            instance: meta.name.clone(),
            message: format!(
                "{} has n = {}, m = {}; registry expects n = {}, m = {}",
                path.display(),
                g.node_count(),
                g.edge_count(),
                meta.n,
                meta.m
            ),
        });
    }
    Ok(g)
}

/// One seeded run on a loaded instance.
pub fn run_once(
    graph: &Graph,
    meta: &InstanceMeta,
    seed: u64,
    config: &SolverConfig,
    options: &SolveOptions,
) -> Result<RunRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = solve(graph, meta.k, config, options, &mut rng)?;
    let f = out.best.objective();
    Ok(RunRecord {
        instance: meta.name.clone(),
        seed,
        mode: config.mode,
        f_best: f,
        t_to_best: (!options.budget.is_deterministic()).then_some(out.time_to_best.as_secs_f64()),
        gens: out.gens_to_best,
        succ: meta.is_success(f),
        total_gens: Some(out.generations),
        best_nodes: out.best.external_nodes(graph),
    })
}

#[derive(Clone, Debug)]
pub struct BatchSpec {
    pub instances: Vec<InstanceMeta>,
    pub data_dir: PathBuf,
    pub repeats: usize,
    pub base_seed: u64,
    pub budget: Budget,
    pub config: SolverConfig,
    /// Stop a run once it matches the instance's best-known value.
    pub stop_at_bkv: bool,
    pub parse: ParseOptions,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
}

impl BatchSpec {
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            solver: self.config,
            budget: self.budget,
            repeats: self.repeats,
            base_seed: self.base_seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFailure {
    pub instance: String,
    pub seed: Option<u64>,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct BatchResult {
    /// Sorted by (instance, seed).
    pub records: Vec<RunRecord>,
    pub failures: Vec<InstanceFailure>,
}

/// Runs `repeats` seeds per instance. A missing or mismatched instance file
/// is recorded as a failure and the remaining instances still run.
pub fn run_batch(spec: &BatchSpec) -> Result<BatchResult> {
    spec.config.validate()?;
    spec.budget.validate()?;
    let mut result = BatchResult::default();
    if spec.repeats == 0 {
        return Ok(result);
    }

    let mut loaded = Vec::new();
    for meta in &spec.instances {
        let graph = find_instance_file(&spec.data_dir, &meta.name)
            .ok_or_else(|| Error::Instance {
                instance: meta.name.clone(),
                message: format!("no instance file in {}", spec.data_dir.display()),
            })
            .and_then(|path| load_instance(&path, meta, spec.parse));
        match graph {
            Ok(g) => loaded.push((meta, g)),
            Err(e) => {
                log::warn!("skipping {}: {e}", meta.name);
                result.failures.push(InstanceFailure {
                    instance: meta.name.clone(),
                    seed: None,
                    message: e.to_string(),
                });
            }
        }
    }

    let jobs: Vec<(usize, u64)> = (0..loaded.len())
        .flat_map(|i| (0..spec.repeats as u64).map(move |r| (i, spec.base_seed + r)))
        .collect();
    let work = || {
        jobs.par_iter()
            .map(|&(i, seed)| {
                let (meta, graph) = &loaded[i];
                let options = SolveOptions {
                    budget: spec.budget,
                    target: if spec.stop_at_bkv { meta.f_bkv } else { None },
                    record_trace: false,
                };
                let r = run_once(graph, meta, seed, &spec.config, &options);
                if let Ok(rec) = &r {
                    log::info!("{} seed {}: f = {}", rec.instance, seed, rec.f_best);
                }
                (meta.name.clone(), seed, r)
            })
            .collect::<Vec<_>>()
    };
    let outcomes = match spec.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::domain(e.to_string()))?
            .install(work),
        None => work(),
    };

    for (instance, seed, r) in outcomes {
        match r {
            Ok(rec) => result.records.push(rec),
            Err(e) => result.failures.push(InstanceFailure {
                instance,
                seed: Some(seed),
                message: e.to_string(),
            }),
        }
    }
    result
        .records
        .sort_by(|a, b| a.instance.cmp(&b.instance).then(a.seed.cmp(&b.seed)));
    Ok(result)
}
