use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cnp_core::bench::{self, Format, Indicator, Registry};
use cnp_core::graph::{read_instance, ParseOptions};
use cnp_core::population::SizingParams;
use cnp_core::search::ThresholdRule;
use cnp_core::solver::{solve_observed, Budget, Mode, SolveOptions, SolverConfig};

#[derive(Parser)]
#[command(
    name = "cnp",
    version,
    about = "Critical node problem solver and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print the result as JSON.
    Solve(SolveArgs),
    /// Run seeded repeats over registry instances and write result files.
    Bench(BenchArgs),
    /// Two-tailed sign test between two result files.
    Compare(CompareArgs),
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value = "vpms")]
    mode: Mode,
    #[arg(long, default_value_t = 20)]
    ps_max: usize,
    #[arg(long, default_value_t = 2)]
    ps_inc: usize,
    #[arg(long, default_value_t = 100)]
    max_idle_gens: u64,
    #[arg(long, default_value_t = 1000)]
    max_idle_iters: u64,
    #[arg(long, default_value_t = 50)]
    history_length: usize,
    #[arg(long, default_value_t = 0.6)]
    beta: f64,
    #[arg(long, default_value_t = 0.5)]
    crossover_p: f64,
    /// Fixed large-component threshold; adaptive when omitted.
    #[arg(long)]
    threshold: Option<usize>,
}

impl SearchArgs {
    fn config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig {
            mode: self.mode,
            sizing: SizingParams {
                ps_max: self.ps_max,
                ps_inc: self.ps_inc,
                max_idle_gens: self.max_idle_gens,
                max_idle_iters: self.max_idle_iters,
            },
            history_length: self.history_length,
            beta: self.beta,
            ..SolverConfig::default()
        };
        cfg.crossover.exclusive_probability = self.crossover_p;
        if let Some(t) = self.threshold {
            cfg.threshold = ThresholdRule::Fixed(t);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Number of nodes to remove; looked up in the built-in registry by
    /// file name when omitted.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, conflicts_with = "max_generations")]
    time_limit: Option<f64>,
    #[arg(long)]
    max_generations: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stop once the objective reaches this value.
    #[arg(long)]
    target: Option<u64>,
    /// Write one JSON line per generation to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Treat a consistent leading `n m` line as a header.
    #[arg(long)]
    skip_header: bool,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Registry CSV (`name,n,m,k,f_bkv,optimal`); the built-in table when omitted.
    #[arg(long)]
    registry: Option<PathBuf>,
    #[arg(long)]
    data_dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    /// Seconds per run.
    #[arg(long, conflicts_with = "max_generations")]
    budget: Option<f64>,
    #[arg(long)]
    max_generations: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Output format; inferred from the `--out` extension when omitted.
    #[arg(long)]
    format: Option<Format>,
    #[arg(long, default_value_t = 1)]
    base_seed: u64,
    /// Comma-separated instance names; every registry entry when omitted.
    #[arg(long, value_delimiter = ',')]
    instances: Vec<String>,
    #[arg(long)]
    threads: Option<usize>,
    /// End a run as soon as it reaches the best-known value.
    #[arg(long)]
    stop_at_bkv: bool,
    #[arg(long)]
    skip_header: bool,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, default_value = "f_best")]
    indicator: Indicator,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

fn budget(seconds: Option<f64>, generations: Option<u64>) -> Result<Budget> {
    let b = match (seconds, generations) {
        (Some(s), None) => Budget::Seconds(s),
        (None, Some(g)) => Budget::Generations(g),
        (None, None) => bail!("give a time limit or --max-generations"),
        (Some(_), Some(_)) => unreachable!("clap rejects both"),
    };
    b.validate()?;
    Ok(b)
}

fn run_solve(args: SolveArgs) -> Result<()> {
    let config = args.search.config()?;
    let budget = budget(args.time_limit, args.max_generations)?;
    let parsed = read_instance(
        &args.instance,
        ParseOptions {
            skip_header: args.skip_header,
        },
    )?;
    let graph = parsed.graph;
    let name = args
        .instance
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string();
    let meta = Registry::builtin().get(&name).cloned();
    let k = match (args.k, &meta) {
        (Some(k), _) => k,
        (None, Some(m)) => m.k,
        (None, None) => bail!("--k is required for `{name}`, which is not a registry instance"),
    };
    log::info!(
        "{name}: n = {}, m = {}, k = {k}, {} duplicate edges, {} self loops dropped",
        graph.node_count(),
        graph.edge_count(),
        parsed.duplicate_edges,
        parsed.self_loops
    );

    let mut trace = match &args.trace {
        Some(p) => Some(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => None,
    };
    let mut trace_err = None;
    let options = SolveOptions {
        budget,
        target: args.target,
        record_trace: false,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let out = solve_observed(&graph, k, &config, &options, &mut rng, |rec, _| {
        if let (Some(w), None) = (trace.as_mut(), &trace_err) {
            let line = serde_json::to_string(rec).map_err(anyhow::Error::from);
            if let Err(e) = line.and_then(|l| writeln!(w, "{l}").map_err(Into::into)) {
                trace_err = Some(e);
            }
        }
    })?;
    if let Some(e) = trace_err {
        return Err(e.context("writing trace"));
    }
    if let Some(mut w) = trace {
        w.flush()?;
    }

    let f = out.best.objective();
    let report = serde_json::json!({
        "instance": name,
        "n": graph.node_count(),
        "m": graph.edge_count(),
        "k": k,
        "seed": args.seed,
        "mode": config.mode,
        "f_best": f,
        "succ": meta.as_ref().and_then(|m| m.f_bkv).map(|b| f <= b),
        "t_to_best": out.time_to_best.as_secs_f64(),
        "gens_to_best": out.gens_to_best,
        "generations": out.generations,
        "elapsed": out.elapsed.as_secs_f64(),
        "nodes": out.best.external_nodes(&graph),
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<bool> {
    let registry = match &args.registry {
        Some(p) => Registry::from_csv(p)?,
        None => Registry::builtin(),
    };
    let instances = if args.instances.is_empty() {
        registry.entries().to_vec()
    } else {
        args.instances
            .iter()
            .map(|name| {
                registry
                    .get(name)
                    .cloned()
                    .with_context(|| format!("`{name}` is not in the registry"))
            })
            .collect::<Result<_>>()?
    };
    let spec = bench::BatchSpec {
        instances,
        data_dir: args.data_dir,
        repeats: args.repeats,
        base_seed: args.base_seed,
        budget: budget(args.budget, args.max_generations)?,
        config: args.search.config()?,
        stop_at_bkv: args.stop_at_bkv,
        parse: ParseOptions {
            skip_header: args.skip_header,
        },
        threads: args.threads,
    };
    let result = bench::run_batch(&spec)?;
    let format = args.format.unwrap_or_else(|| Format::from_path(&args.out));
    bench::export_results(
        &result.records,
        Some(&spec.run_config()),
        Some(&registry),
        format,
        &args.out,
    )?;
    for s in bench::summarize(&result.records, Some(&registry)) {
        println!(
            "{:<12} runs {:>3}  f_best {:>10}  f_avg {:>12.1}  succ {:>3}",
            s.instance, s.runs, s.f_best, s.f_avg, s.succ
        );
    }
    let flagged = bench::record::red_flags(&result.records, &registry);
    for f in &result.failures {
        eprintln!("failed: {}: {}", f.instance, f.message);
    }
    if !flagged.is_empty() {
        eprintln!(
            "{} run(s) beat a proven optimum; check the instance files",
            flagged.len()
        );
    }
    Ok(result.failures.is_empty() && flagged.is_empty())
}

fn run_compare(args: CompareArgs) -> Result<()> {
    let load =
        |p: &Path| bench::read_results(p).with_context(|| format!("reading {}", p.display()));
    let a = load(&args.a)?;
    let b = load(&args.b)?;
    let r = bench::sign_test(&a, &b, args.indicator, args.alpha)?;
    println!("{}", serde_json::to_string_pretty(&r)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => run_solve(a).map(|_| true),
        Command::Bench(a) => run_bench(a),
        Command::Compare(a) => run_compare(a).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
