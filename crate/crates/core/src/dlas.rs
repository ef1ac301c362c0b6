//! Diversified late acceptance search.
//!
//! A candidate is accepted when its cost equals the current cost or is
//! below the maximum of a fitness history array of length `HL`. The array
//! slot at the virtual beginning `iters mod HL` is raised to the current
//! cost when the current cost is higher, and lowered only when the current
//! cost improved on both the slot and the previous iteration's cost.
//!
//! The search is generic over a [`Neighborhood`] so that the acceptance and
//! replacement bookkeeping can be driven by scripted candidate streams.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::search::{sample_candidate, Exchange, Solution, SwapEvaluator, ThresholdRule};

/// History buffer with a cached maximum and its multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FitnessArray {
    values: Vec<u64>,
    max: u64,
    max_count: usize,
}

/// What the replacement step did to the slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Replacement {
    Unchanged,
    Raised,
    Lowered { rescanned: bool },
}

impl FitnessArray {
    pub fn new(history_length: usize, initial: u64) -> FitnessArray {
        assert!(history_length >= 1, "history length must be positive");
        FitnessArray {
            values: vec![initial; history_length],
            max: initial,
            max_count: history_length,
        }
    }

    /// Array with arbitrary contents; the cache is computed by a scan.
    pub fn from_values(values: Vec<u64>) -> FitnessArray {
        assert!(!values.is_empty(), "history length must be positive");
        let mut array = FitnessArray {
            values,
            max: 0,
            max_count: 0,
        };
        array.rescan();
        array
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn max(&self) -> u64 {
        self.max
    }

    pub fn max_count(&self) -> usize {
        self.max_count
    }

    #[inline]
    pub fn accepts(&self, current: u64, candidate: u64) -> bool {
        candidate == current || candidate < self.max
    }

    /// Replacement step for slot `slot` after the acceptance decision.
    pub fn replace(&mut self, slot: usize, current: u64, previous: u64) -> Replacement {
        let entry = self.values[slot];
        if current > entry {
            self.values[slot] = current;
            // Keeps the multiplicity exact when a slot is raised to the
            // maximum; the maximum itself is unaffected.
            if current == self.max {
                self.max_count += 1;
            } else if current > self.max {
                self.max = current;
                self.max_count = 1;
            }
            Replacement::Raised
        } else if current < entry && current < previous {
            if entry == self.max {
                self.max_count -= 1;
            }
            self.values[slot] = current;
            let rescanned = self.max_count == 0;
            if rescanned {
                self.rescan();
            }
            Replacement::Lowered { rescanned }
        } else {
            Replacement::Unchanged
        }
    }

    fn rescan(&mut self) {
        self.max = *self.values.iter().max().expect("non-empty");
        self.max_count = self.values.iter().filter(|&&x| x == self.max).count();
    }

    /// Whether the cached maximum and multiplicity match a full scan.
    pub fn is_consistent(&self) -> bool {
        let max = *self.values.iter().max().expect("non-empty");
        let count = self.values.iter().filter(|&&x| x == max).count();
        max == self.max && count == self.max_count
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DlasParams {
    /// Stop after this many consecutive iterations without improving the
    /// best solution (rejected candidates count as idle).
    pub max_idle_iters: u64,
    pub history_length: usize,
}

impl Default for DlasParams {
    fn default() -> Self {
        DlasParams {
            max_idle_iters: 1000,
            history_length: 50,
        }
    }
}

impl DlasParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_idle_iters == 0 {
            return Err(Error::domain("max_idle_iters must be at least 1"));
        }
        if self.history_length == 0 {
            return Err(Error::domain("history length must be at least 1"));
        }
        Ok(())
    }
}

/// Move generator driving the search.
pub trait Neighborhood {
    type State: Clone;
    type Move;

    fn cost(&self, state: &Self::State) -> u64;

    /// A candidate move and the cost it would lead to, or `None` when the
    /// state has no neighbour (counted as a rejected iteration).
    fn propose<R: Rng + ?Sized>(
        &mut self,
        state: &Self::State,
        rng: &mut R,
    ) -> Option<(Self::Move, u64)>;

    fn apply(&mut self, state: &mut Self::State, mv: Self::Move);
}

/// One iteration as seen by the acceptance and replacement logic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub iteration: u64,
    pub slot: usize,
    pub previous: u64,
    pub candidate: Option<u64>,
    pub accepted: bool,
    pub current: u64,
    pub replacement: Replacement,
    pub f_max: u64,
    pub nbr_max: usize,
    pub best: u64,
    pub idle_iters: u64,
}

#[derive(Clone, Debug)]
pub struct DlasOutcome<S> {
    pub best: S,
    pub best_cost: u64,
    pub iterations: u64,
    pub accepted_moves: u64,
}

/// Runs the search from `initial` until `max_idle_iters` consecutive
/// iterations pass without a strict improvement of the best state.
pub fn run_dlas<N, R>(
    neighborhood: &mut N,
    initial: N::State,
    params: &DlasParams,
    rng: &mut R,
    mut trace: Option<&mut Vec<TraceStep>>,
) -> DlasOutcome<N::State>
where
    N: Neighborhood,
    R: Rng + ?Sized,
{
    let hl = params.history_length;
    let mut current = initial;
    let mut current_cost = neighborhood.cost(&current);
    let mut best = current.clone();
    let mut best_cost = current_cost;
    let mut history = FitnessArray::new(hl, current_cost);
    let mut iterations = 0u64;
    let mut idle = 0u64;
    let mut accepted_moves = 0u64;

    while idle < params.max_idle_iters {
        let previous = current_cost;
        let proposal = neighborhood.propose(&current, rng);
        let slot = (iterations % hl as u64) as usize;
        let candidate = proposal.as_ref().map(|(_, c)| *c);
        let mut accepted = false;
        if let Some((mv, cost)) = proposal {
            if history.accepts(current_cost, cost) {
                neighborhood.apply(&mut current, mv);
                current_cost = cost;
                accepted = true;
                accepted_moves += 1;
                if current_cost < best_cost {
                    best = current.clone();
                    best_cost = current_cost;
                    idle = 0;
                } else {
                    idle += 1;
                }
            }
        }
        if !accepted {
            idle += 1;
        }
        let replacement = history.replace(slot, current_cost, previous);
        debug_assert!(history.is_consistent());
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(TraceStep {
                iteration: iterations,
                slot,
                previous,
                candidate,
                accepted,
                current: current_cost,
                replacement,
                f_max: history.max(),
                nbr_max: history.max_count(),
                best: best_cost,
                idle_iters: idle,
            });
        }
        iterations += 1;
    }

    DlasOutcome {
        best,
        best_cost,
        iterations,
        accepted_moves,
    }
}

/// The component-based swap neighbourhood on a fixed graph.
pub struct SwapNeighborhood<'g> {
    graph: &'g Graph,
    evaluator: SwapEvaluator,
    threshold: ThresholdRule,
}

impl<'g> SwapNeighborhood<'g> {
    pub fn new(graph: &'g Graph, threshold: ThresholdRule) -> Self {
        SwapNeighborhood {
            graph,
            evaluator: SwapEvaluator::new(graph.node_count()),
            threshold,
        }
    }
}

impl Neighborhood for SwapNeighborhood<'_> {
    type State = Solution;
    type Move = Exchange;

    fn cost(&self, state: &Solution) -> u64 {
        state.objective()
    }

    fn propose<R: Rng + ?Sized>(
        &mut self,
        state: &Solution,
        rng: &mut R,
    ) -> Option<(Exchange, u64)> {
        let l = self.threshold.resolve(state.decomposition());
        let v = sample_candidate(state, l, rng)?;
        let ex = self
            .evaluator
            .best_exchange(self.graph, state, v, rng)
            .ok()?;
        Some((ex, ex.objective))
    }

    fn apply(&mut self, state: &mut Solution, mv: Exchange) {
        state
            .exchange(self.graph, mv.remove, mv.insert)
            .expect("proposed exchange is valid for the state it was scored on");
        debug_assert_eq!(state.objective(), mv.objective);
    }
}

/// DLAS with the swap neighbourhood.
pub fn dlas<R: Rng + ?Sized>(
    graph: &Graph,
    initial: Solution,
    params: &DlasParams,
    threshold: ThresholdRule,
    rng: &mut R,
) -> Result<DlasOutcome<Solution>> {
    params.validate()?;
    let mut nb = SwapNeighborhood::new(graph, threshold);
    Ok(run_dlas(&mut nb, initial, params, rng, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Emits a fixed list of candidate costs, then repeats the last one.
    struct Scripted {
        costs: Vec<u64>,
        next: usize,
    }

    impl Neighborhood for Scripted {
        type State = u64;
        type Move = u64;
        fn cost(&self, s: &u64) -> u64 {
            *s
        }
        fn propose<R: Rng + ?Sized>(&mut self, _: &u64, _: &mut R) -> Option<(u64, u64)> {
            let c = self.costs[self.next.min(self.costs.len() - 1)];
            self.next += 1;
            Some((c, c))
        }
        fn apply(&mut self, s: &mut u64, mv: u64) {
            *s = mv;
        }
    }

    #[test]
    fn fill_and_cache() {
        let a = FitnessArray::new(4, 7);
        assert_eq!(a.values(), &[7, 7, 7, 7]);
        assert_eq!((a.max(), a.max_count()), (7, 4));
    }

    #[test]
    fn acceptance_rule() {
        let a = FitnessArray::from_values(vec![10, 10]);
        assert!(!a.accepts(10, 12));
        assert!(a.accepts(10, 9));
        assert!(a.accepts(10, 10));
        let b = FitnessArray::from_values(vec![10, 8]);
        // worsening move below the maximum is accepted
        assert!(b.accepts(8, 9));
        assert!(!b.accepts(8, 10));
    }

    #[test]
    fn lowering_the_last_maximum_rescans() {
        let mut a = FitnessArray::from_values(vec![10, 7]);
        assert_eq!((a.max(), a.max_count()), (10, 1));
        let r = a.replace(0, 8, 10);
        assert_eq!(r, Replacement::Lowered { rescanned: true });
        assert_eq!(a.values(), &[8, 7]);
        assert_eq!((a.max(), a.max_count()), (8, 1));
    }

    #[test]
    fn raise_and_unchanged_cases() {
        let mut a = FitnessArray::from_values(vec![10, 7]);
        assert_eq!(a.replace(1, 9, 9), Replacement::Raised);
        assert_eq!(a.values(), &[10, 9]);
        // not below previous: unchanged
        assert_eq!(a.replace(0, 9, 9), Replacement::Unchanged);
        // raising a slot to the maximum bumps the count
        let mut b = FitnessArray::from_values(vec![10, 7]);
        b.replace(1, 10, 10);
        assert_eq!((b.max(), b.max_count()), (10, 2));
        assert!(b.is_consistent());
    }

    #[test]
    fn terminates_at_floor() {
        let mut nb = Scripted {
            costs: vec![0],
            next: 0,
        };
        let params = DlasParams {
            max_idle_iters: 25,
            history_length: 3,
        };
        let out = run_dlas(&mut nb, 0, &params, &mut ChaCha8Rng::seed_from_u64(0), None);
        assert_eq!(out.best_cost, 0);
        assert_eq!(out.iterations, 25);
    }

    #[test]
    fn rejected_iterations_count_as_idle() {
        // every candidate is worse than anything in the history
        let mut nb = Scripted {
            costs: vec![50],
            next: 0,
        };
        let params = DlasParams {
            max_idle_iters: 10,
            history_length: 2,
        };
        let mut trace = Vec::new();
        let out = run_dlas(
            &mut nb,
            10,
            &params,
            &mut ChaCha8Rng::seed_from_u64(0),
            Some(&mut trace),
        );
        assert_eq!(out.iterations, 10);
        assert_eq!(out.accepted_moves, 0);
        assert!(trace.iter().all(|s| !s.accepted));
    }
}
