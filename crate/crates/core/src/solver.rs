//! The memetic search driver, in variable-population (`vpms`) and
//! fixed-population (`fpms`) modes.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::construction::{double_backbone_crossover, CrossoverConfig, LocalSearch};
use crate::dlas::{dlas, DlasParams};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::population::{
    build_population, resize_population, update_population, GenerationState, Population,
    SizingEvent, SizingParams, UpdateOutcome,
};
use crate::search::{Solution, ThresholdRule};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Population starts at two members and is resized on stagnation.
    #[default]
    Vpms,
    /// Population fixed at `ps_max` members.
    Fpms,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Vpms => "vpms",
            Mode::Fpms => "fpms",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s.to_ascii_lowercase().as_str() {
            "vpms" => Ok(Mode::Vpms),
            "fpms" => Ok(Mode::Fpms),
            other => Err(Error::domain(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    /// Wall-clock limit.
    Seconds(f64),
    /// Number of generations; runs are reproducible under this budget.
    Generations(u64),
}

impl Budget {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Budget::Seconds(s) if !(s.is_finite() && s > 0.0) => Err(Error::domain(format!(
                "time budget must be positive, got {s}"
            ))),
            Budget::Generations(0) => Err(Error::domain("generation budget must be positive")),
            _ => Ok(()),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, Budget::Generations(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: Mode,
    pub sizing: SizingParams,
    pub history_length: usize,
    /// Weight of the objective rank in pool updating.
    pub beta: f64,
    pub crossover: CrossoverConfig,
    pub threshold: ThresholdRule,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: Mode::Vpms,
            sizing: SizingParams::default(),
            history_length: DlasParams::default().history_length,
            beta: 0.6,
            crossover: CrossoverConfig::default(),
            threshold: ThresholdRule::Adaptive,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.sizing.validate()?;
        self.crossover.validate()?;
        self.local_search().dlas.validate()?;
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::domain(format!(
                "beta {} is outside [0, 1]",
                self.beta
            )));
        }
        if let ThresholdRule::Fixed(0) = self.threshold {
            return Err(Error::domain("component threshold must be positive"));
        }
        Ok(())
    }

    pub fn local_search(&self) -> LocalSearch {
        LocalSearch {
            dlas: DlasParams {
                max_idle_iters: self.sizing.max_idle_iters,
                history_length: self.history_length,
            },
            threshold: self.threshold,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub budget: Budget,
    /// Stop as soon as `f(S*)` reaches this value.
    pub target: Option<u64>,
    pub record_trace: bool,
}

impl SolveOptions {
    pub fn new(budget: Budget) -> Self {
        SolveOptions {
            budget,
            target: None,
            record_trace: false,
        }
    }
}

/// State after one generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    /// 1-based index of the generation just completed.
    pub gen: u64,
    /// Population size `ps` after sizing.
    pub ps: usize,
    pub members: usize,
    /// Idle counter at the moment sizing was evaluated.
    pub idle_at_sizing: u64,
    pub idle_gens: u64,
    pub best: u64,
    pub offspring: u64,
    pub update: UpdateOutcome,
    pub sizing: SizingEvent,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub best: Solution,
    pub generations: u64,
    /// Generation in which `S*` was last improved (0 = during building).
    pub gens_to_best: u64,
    pub time_to_best: Duration,
    pub elapsed: Duration,
    pub trace: Vec<GenerationRecord>,
}

pub fn solve<R: Rng + ?Sized>(
    graph: &Graph,
    k: usize,
    config: &SolverConfig,
    options: &SolveOptions,
    rng: &mut R,
) -> Result<SolveOutcome> {
    solve_observed(graph, k, config, options, rng, |_, _| {})
}

/// Runs the search, calling `observer` after every generation.
pub fn solve_observed<R, F>(
    graph: &Graph,
    k: usize,
    config: &SolverConfig,
    options: &SolveOptions,
    rng: &mut R,
    mut observer: F,
) -> Result<SolveOutcome>
where
    R: Rng + ?Sized,
    F: FnMut(&GenerationRecord, &Population),
{
    config.validate()?;
    options.budget.validate()?;
    let start = Instant::now();
    let ls = config.local_search();
    let initial_size = match config.mode {
        Mode::Vpms => 2,
        Mode::Fpms => config.sizing.ps_max,
    };
    let mut population = build_population(graph, k, initial_size, &ls, rng)?;
    let mut time_to_best = start.elapsed();
    let mut gens_to_best = 0u64;
    let mut state = GenerationState::default();
    let mut trace = Vec::new();

    loop {
        let done = match options.budget {
            Budget::Seconds(s) => start.elapsed().as_secs_f64() >= s,
            Budget::Generations(g) => state.gens >= g,
        };
        let hit = options
            .target
            .is_some_and(|t| population.best().objective() <= t);
        if done || hit {
            break;
        }

        let size = population.len();
        let first = rng.random_range(0..size);
        let second = {
            let j = rng.random_range(0..size - 1);
            if j >= first {
                j + 1
            } else {
                j
            }
        };
        let members = population.members();
        let child = double_backbone_crossover(
            graph,
            &members[first],
            &members[second],
            &config.crossover,
            rng,
        )?
        .offspring;
        let improved = dlas(graph, child, &ls.dlas, ls.threshold, rng)?.best;
        let offspring_cost = improved.objective();

        if population.offer_best(&improved) {
            state.idle_gens = 0;
            time_to_best = start.elapsed();
            gens_to_best = state.gens + 1;
        } else {
            state.idle_gens += 1;
        }
        let update = update_population(&mut population, improved, config.beta, rng);

        let idle_at_sizing = state.idle_gens;
        let sizing = match config.mode {
            Mode::Vpms => {
                let before = population.best().objective();
                let event = resize_population(
                    graph,
                    &mut population,
                    &mut state,
                    &config.sizing,
                    &ls,
                    rng,
                )?;
                if population.best().objective() < before {
                    time_to_best = start.elapsed();
                    gens_to_best = state.gens + 1;
                }
                event
            }
            Mode::Fpms => SizingEvent::None,
        };
        state.gens += 1;

        let record = GenerationRecord {
            gen: state.gens,
            ps: population.target_size(),
            members: population.len(),
            idle_at_sizing,
            idle_gens: state.idle_gens,
            best: population.best().objective(),
            offspring: offspring_cost,
            update,
            sizing,
        };
        observer(&record, &population);
        if options.record_trace {
            trace.push(record);
        }
    }

    Ok(SolveOutcome {
        best: population.best().clone(),
        generations: state.gens,
        gens_to_best,
        time_to_best,
        elapsed: start.elapsed(),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn star_reaches_zero() {
        let g = Graph::from_edge_list(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let out = solve(
            &g,
            1,
            &SolverConfig::default(),
            &SolveOptions::new(Budget::Seconds(1.0)),
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert_eq!(out.best.objective(), 0);
        assert_eq!(out.best.nodes(), &[0]);
    }

    #[test]
    fn budgets_are_validated() {
        let g = Graph::from_edge_list(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cfg = SolverConfig::default();
        for b in [
            Budget::Seconds(0.0),
            Budget::Seconds(-1.0),
            Budget::Generations(0),
        ] {
            assert!(solve(&g, 1, &cfg, &SolveOptions::new(b), &mut rng).is_err());
        }
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("VPMS".parse::<Mode>().unwrap(), Mode::Vpms);
        assert_eq!("fpms".parse::<Mode>().unwrap(), Mode::Fpms);
        assert!("ga".parse::<Mode>().is_err());
        assert_eq!(Mode::Fpms.to_string(), "fpms");
    }
}
