//! Elite population: building, rank-based quality-and-distance updating and
//! the expand/rebuild sizing mechanism.

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::construction::{build_solution, LocalSearch};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::search::{search_space_size, Solution};

/// Fresh builds tried before a duplicate is perturbed instead.
const BUILD_RETRIES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizingParams {
    pub ps_max: usize,
    pub ps_inc: usize,
    pub max_idle_gens: u64,
    pub max_idle_iters: u64,
}

impl Default for SizingParams {
    fn default() -> Self {
        SizingParams {
            ps_max: 20,
            ps_inc: 2,
            max_idle_gens: 100,
            max_idle_iters: 1000,
        }
    }
}

impl SizingParams {
    pub fn validate(&self) -> Result<()> {
        if self.ps_max < 2 {
            return Err(Error::domain("ps_max must be at least 2"));
        }
        if self.ps_inc == 0 {
            return Err(Error::domain("ps_inc must be at least 1"));
        }
        if self.max_idle_gens == 0 || self.max_idle_iters == 0 {
            return Err(Error::domain("idle counters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationState {
    pub gens: u64,
    pub idle_gens: u64,
}

#[derive(Clone, Debug)]
pub struct Population {
    members: Vec<Solution>,
    target_size: usize,
    best: Solution,
}

impl Population {
    /// Population over `members`, which must be pairwise distinct.
    pub fn from_members(members: Vec<Solution>) -> Result<Population> {
        if members.len() < 2 {
            return Err(Error::domain("a population needs at least two members"));
        }
        for (i, a) in members.iter().enumerate() {
            if members[..i].contains(a) {
                return Err(Error::contract("population members must be distinct"));
            }
        }
        let best = best_of(&members).clone();
        Ok(Population {
            target_size: members.len(),
            members,
            best,
        })
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Current population size `ps`.
    pub fn target_size(&self) -> usize {
        self.target_size
    }

    /// Best solution recorded so far, `S*`.
    pub fn best(&self) -> &Solution {
        &self.best
    }

    pub fn contains(&self, s: &Solution) -> bool {
        self.members.iter().any(|m| m == s)
    }

    /// Records `candidate` as `S*` if strictly better. Returns whether it was.
    pub fn offer_best(&mut self, candidate: &Solution) -> bool {
        if candidate.objective() < self.best.objective() {
            self.best = candidate.clone();
            true
        } else {
            false
        }
    }

    pub fn pairwise_distinct(&self) -> bool {
        self.members
            .iter()
            .enumerate()
            .all(|(i, a)| !self.members[..i].contains(a))
    }
}

fn best_of(members: &[Solution]) -> &Solution {
    // first member wins ties
    members
        .iter()
        .reduce(|a, b| if b.objective() < a.objective() { b } else { a })
        .expect("non-empty")
}

/// Largest population that can hold distinct `k`-subsets.
fn capacity(graph: &Graph, k: usize, wanted: usize) -> usize {
    match search_space_size(graph.node_count(), k) {
        Ok(total) if total < BigUint::from(wanted) => {
            total.to_u64_digits().first().copied().unwrap_or(0) as usize
        }
        _ => wanted,
    }
}

/// Replaces one random critical node by a random non-critical node until
/// the solution differs from every solution in `existing`.
fn perturb_until_distinct<R: Rng + ?Sized>(
    graph: &Graph,
    mut s: Solution,
    existing: &[Solution],
    rng: &mut R,
) -> Result<Solution> {
    let n = graph.node_count();
    let mut attempts = 0usize;
    while existing.contains(&s) {
        attempts += 1;
        if attempts > 100 * n.max(16) {
            return Err(Error::domain(
                "could not find a solution distinct from the population",
            ));
        }
        let out = s.nodes()[rng.random_range(0..s.k())];
        let into = loop {
            let v = rng.random_range(0..n);
            if !s.contains(v) {
                break v;
            }
        };
        s.exchange(graph, out, into)?;
    }
    Ok(s)
}

/// A freshly built solution distinct from `existing`.
pub fn fresh_distinct<R: Rng + ?Sized>(
    graph: &Graph,
    k: usize,
    local_search: &LocalSearch,
    existing: &[Solution],
    rng: &mut R,
) -> Result<Solution> {
    let mut last = None;
    for _ in 0..BUILD_RETRIES {
        let s = build_solution(graph, k, local_search, rng)?;
        if !existing.contains(&s) {
            return Ok(s);
        }
        last = Some(s);
    }
    perturb_until_distinct(graph, last.expect("at least one build"), existing, rng)
}

/// Builds `size` distinct members (2 for variable-size search). The size is
/// capped at the number of distinct `k`-subsets.
pub fn build_population<R: Rng + ?Sized>(
    graph: &Graph,
    k: usize,
    size: usize,
    local_search: &LocalSearch,
    rng: &mut R,
) -> Result<Population> {
    let size = capacity(graph, k, size.max(2));
    if size < 2 {
        return Err(Error::domain(
            "instance has fewer than two distinct k-subsets",
        ));
    }
    let mut members: Vec<Solution> = Vec::with_capacity(size);
    while members.len() < size {
        let s = fresh_distinct(graph, k, local_search, &members, rng)?;
        members.push(s);
    }
    Population::from_members(members)
}

/// Ranks with ties sharing the smallest rank (1, 2, 2, 4, ...), where
/// `better(a, b)` means `a` ranks ahead of `b`.
fn competition_ranks<T: Copy>(values: &[T], better: impl Fn(T, T) -> bool) -> Vec<usize> {
    values
        .iter()
        .map(|&x| 1 + values.iter().filter(|&&y| better(y, x)).count())
        .collect()
}

/// Quality-and-distance score of every pool member; larger is worse.
///
/// `score = beta * rank_f + (1 - beta) * rank_d` where `rank_f` orders by
/// ascending objective and `rank_d` by descending mean set distance to the
/// other pool members.
pub fn pool_scores(objectives: &[u64], mean_distances: &[f64], beta: f64) -> Vec<f64> {
    let rank_f = competition_ranks(objectives, |a, b| a < b);
    let rank_d = competition_ranks(mean_distances, |a, b| a > b);
    rank_f
        .iter()
        .zip(&rank_d)
        .map(|(&rf, &rd)| beta * rf as f64 + (1.0 - beta) * rd as f64)
        .collect()
}

/// Mean set distance of each solution to the others.
pub fn mean_distances(pool: &[&Solution]) -> Vec<f64> {
    let p = pool.len();
    pool.iter()
        .enumerate()
        .map(|(i, a)| {
            let total: usize = pool
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, b)| a.distance(b))
                .sum();
            total as f64 / (p - 1) as f64
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateOutcome {
    /// Offspring equals a member; population unchanged.
    Duplicate,
    /// Offspring scored worst and was discarded.
    OffspringDiscarded,
    /// Offspring replaced the member at this index.
    Replaced(usize),
}

/// Inserts `offspring` and evicts the worst-scored solution of the pool.
pub fn update_population<R: Rng + ?Sized>(
    population: &mut Population,
    offspring: Solution,
    beta: f64,
    rng: &mut R,
) -> UpdateOutcome {
    if population.contains(&offspring) {
        return UpdateOutcome::Duplicate;
    }
    let pool: Vec<&Solution> = population.members.iter().chain([&offspring]).collect();
    let objectives: Vec<u64> = pool.iter().map(|s| s.objective()).collect();
    let scores = pool_scores(&objectives, &mean_distances(&pool), beta);
    let worst_score = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let worst: Vec<usize> = (0..scores.len())
        .filter(|&i| (scores[i] - worst_score).abs() < 1e-9)
        .collect();
    let evict = worst[rng.random_range(0..worst.len())];
    if evict == population.members.len() {
        UpdateOutcome::OffspringDiscarded
    } else {
        population.members[evict] = offspring;
        UpdateOutcome::Replaced(evict)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SizingEvent {
    None,
    Expanded { from: usize, to: usize },
    Rebuilt { from: usize },
}

/// Expands the population by `ps_inc` fresh members on stagnation, or
/// shrinks it to `{S*, fresh}` once `ps_max` is reached. No-op unless
/// `idle_gens > max_idle_gens`; resets `idle_gens` when it fires.
pub fn resize_population<R: Rng + ?Sized>(
    graph: &Graph,
    population: &mut Population,
    state: &mut GenerationState,
    params: &SizingParams,
    local_search: &LocalSearch,
    rng: &mut R,
) -> Result<SizingEvent> {
    if state.idle_gens <= params.max_idle_gens {
        return Ok(SizingEvent::None);
    }
    let k = population.best.k();
    let from = population.target_size;
    let event = if from < params.ps_max {
        let to = capacity(graph, k, (from + params.ps_inc).min(params.ps_max));
        population.target_size = to;
        while population.members.len() < to {
            let s = fresh_distinct(graph, k, local_search, &population.members, rng)?;
            population.members.push(s);
        }
        SizingEvent::Expanded { from, to }
    } else {
        let best = population.best.clone();
        let fresh = fresh_distinct(graph, k, local_search, std::slice::from_ref(&best), rng)?;
        population.members = vec![best, fresh];
        population.target_size = 2;
        SizingEvent::Rebuilt { from }
    };
    let candidate = best_of(&population.members).clone();
    population.offer_best(&candidate);
    state.idle_gens = 0;
    Ok(event)
}
