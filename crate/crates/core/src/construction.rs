//! Initial solutions and the double-backbone crossover.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dlas::{dlas, DlasParams};
use crate::error::{Error, Result};
use crate::generators::random_subset;
use crate::graph::{
    decompose_masked, pairs, removal_gains, ComponentDecomposition, Graph, REMOVED,
};
use crate::search::{Solution, ThresholdRule};

/// Local improvement settings shared by every DLAS call of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalSearch {
    pub dlas: DlasParams,
    pub threshold: ThresholdRule,
}

fn check_k(graph: &Graph, k: usize) -> Result<()> {
    let n = graph.node_count();
    if k == 0 || k >= n {
        return Err(Error::domain(format!(
            "k must satisfy 1 <= k < n, got k = {k}, n = {n}"
        )));
    }
    Ok(())
}

/// Uniform random `k`-subset of `V`.
pub fn random_solution<R: Rng + ?Sized>(graph: &Graph, k: usize, rng: &mut R) -> Result<Solution> {
    check_k(graph, k)?;
    Solution::new(graph, random_subset(graph.node_count(), k, rng))
}

/// Random construction followed by DLAS.
pub fn build_solution<R: Rng + ?Sized>(
    graph: &Graph,
    k: usize,
    local_search: &LocalSearch,
    rng: &mut R,
) -> Result<Solution> {
    let initial = random_solution(graph, k, rng)?;
    Ok(dlas(
        graph,
        initial,
        &local_search.dlas,
        local_search.threshold,
        rng,
    )?
    .best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossoverConfig {
    /// Probability that a node owned by exactly one parent is inherited.
    pub exclusive_probability: f64,
}

impl Default for CrossoverConfig {
    fn default() -> Self {
        CrossoverConfig {
            exclusive_probability: 0.5,
        }
    }
}

impl CrossoverConfig {
    pub fn new(exclusive_probability: f64) -> Result<Self> {
        let cfg = CrossoverConfig {
            exclusive_probability,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.exclusive_probability) {
            return Err(Error::domain(format!(
                "crossover probability {} is outside [0, 1]",
                self.exclusive_probability
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepairAction {
    Remove,
    Add,
}

/// One greedy repair step and the partial solution's objective after it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RepairStep {
    pub action: RepairAction,
    pub node: usize,
    pub objective: u64,
}

#[derive(Clone, Debug)]
pub struct CrossoverOutcome {
    pub offspring: Solution,
    /// `|S1 ∩ S2|`.
    pub backbone: usize,
    /// Exclusive nodes that joined the partial solution.
    pub inherited: usize,
    pub repair: Vec<RepairStep>,
}

impl CrossoverOutcome {
    pub fn removals(&self) -> usize {
        self.repair
            .iter()
            .filter(|s| s.action == RepairAction::Remove)
            .count()
    }
}

/// Objective after putting each of `nodes` (all removed) back into the
/// residual graph described by `d`.
pub(crate) fn reinsertion_objectives(
    graph: &Graph,
    d: &ComponentDecomposition,
    nodes: &[usize],
) -> Vec<u64> {
    let base = d.pairwise_connectivity();
    let mut mark = vec![usize::MAX; d.component_count()];
    nodes
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            let mut merged = 1usize;
            let mut absorbed = 0u64;
            for &w in graph.neighbors(u) {
                let label = d.labels()[w];
                if label == REMOVED || mark[label as usize] == i {
                    continue;
                }
                mark[label as usize] = i;
                let s = d.component_size(label as usize);
                merged += s;
                absorbed += pairs(s);
            }
            base - absorbed + pairs(merged)
        })
        .collect()
}

/// Index of the extreme value under `better`, ties uniform at random.
fn pick<R: Rng + ?Sized>(
    values: impl Iterator<Item = (usize, u64)>,
    better: impl Fn(u64, u64) -> bool,
    rng: &mut R,
) -> Option<(usize, u64)> {
    let mut best: Option<(usize, u64)> = None;
    let mut ties = 0u32;
    for (node, value) in values {
        match best {
            Some((_, b)) if value == b => {
                ties += 1;
                if rng.random_range(0..ties) == 0 {
                    best = Some((node, value));
                }
            }
            Some((_, b)) if !better(value, b) => {}
            _ => {
                best = Some((node, value));
                ties = 1;
            }
        }
    }
    best
}

/// Builds an offspring from two parents: keep the shared nodes, inherit
/// each exclusive node with probability `p`, then greedily repair to `k`
/// nodes. Surplus nodes are dropped cheapest-first (smallest objective
/// increase when re-inserted); missing nodes are taken from outside both
/// parents by largest objective decrease.
pub fn double_backbone_crossover<R: Rng + ?Sized>(
    graph: &Graph,
    first: &Solution,
    second: &Solution,
    config: &CrossoverConfig,
    rng: &mut R,
) -> Result<CrossoverOutcome> {
    config.validate()?;
    let k = first.k();
    if second.k() != k {
        return Err(Error::contract(format!(
            "parents have different sizes {} and {}",
            k,
            second.k()
        )));
    }
    if first == second {
        return Err(Error::IdenticalParents);
    }
    let n = graph.node_count();
    let mut partial = vec![false; n];
    let mut in_union = vec![false; n];
    let mut size = 0usize;
    let mut backbone = 0usize;
    let mut inherited = 0usize;

    let mut exclusive = Vec::new();
    for &u in first.nodes() {
        in_union[u] = true;
        if second.contains(u) {
            partial[u] = true;
            size += 1;
            backbone += 1;
        } else {
            exclusive.push(u);
        }
    }
    for &u in second.nodes() {
        in_union[u] = true;
        if !first.contains(u) {
            exclusive.push(u);
        }
    }
    exclusive.sort_unstable();
    for u in exclusive {
        if rng.random_bool(config.exclusive_probability) {
            partial[u] = true;
            size += 1;
            inherited += 1;
        }
    }

    let mut repair = Vec::new();
    while size > k {
        let d = decompose_masked(graph, &partial);
        let members: Vec<usize> = (0..n).filter(|&u| partial[u]).collect();
        let costs = reinsertion_objectives(graph, &d, &members);
        let (node, objective) = pick(members.iter().copied().zip(costs), |a, b| a < b, rng)
            .expect("partial solution is non-empty");
        partial[node] = false;
        size -= 1;
        repair.push(RepairStep {
            action: RepairAction::Remove,
            node,
            objective,
        });
    }
    while size < k {
        let d = decompose_masked(graph, &partial);
        let gains = removal_gains(graph, &d);
        let base = d.pairwise_connectivity();
        let outside = |u: &usize| !partial[*u] && !in_union[*u];
        let pool: Vec<usize> = if (0..n).any(|u| outside(&u)) {
            (0..n).filter(outside).collect()
        } else {
            // every node outside the parents is used up
            (0..n).filter(|&u| !partial[u]).collect()
        };
        let (node, gain) = pick(pool.iter().map(|&u| (u, gains[u])), |a, b| a > b, rng)
            .ok_or_else(|| Error::domain("no node left to complete the offspring"))?;
        partial[node] = true;
        size += 1;
        repair.push(RepairStep {
            action: RepairAction::Add,
            node,
            objective: base - gain,
        });
    }

    let offspring = Solution::new(graph, (0..n).filter(|&u| partial[u]))?;
    Ok(CrossoverOutcome {
        offspring,
        backbone,
        inherited,
        repair,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gnp;
    use crate::graph::decompose;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn star() -> Graph {
        Graph::from_edge_list(5, &[(0, 1), (0, 2), (0, 3), (0, 4)])
    }

    #[test]
    fn build_finds_star_center() {
        let g = star();
        let ls = LocalSearch::default();
        for seed in 0..10 {
            let s = build_solution(&g, 1, &ls, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(s.nodes(), &[0]);
            assert_eq!(s.objective(), 0);
        }
    }

    #[test]
    fn k_bounds() {
        let g = star();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(random_solution(&g, 5, &mut rng).is_err());
        assert!(random_solution(&g, 0, &mut rng).is_err());
        let s = build_solution(&g, 4, &LocalSearch::default(), &mut rng).unwrap();
        assert_eq!(s.objective(), 0);
    }

    #[test]
    fn probability_is_validated() {
        assert!(CrossoverConfig::new(1.5).is_err());
        assert!(CrossoverConfig::new(-0.1).is_err());
        assert!(CrossoverConfig::new(0.3).is_ok());
    }

    #[test]
    fn identical_parents_are_signalled() {
        let g = star();
        let a = Solution::new(&g, [1, 2]).unwrap();
        let err = double_backbone_crossover(
            &g,
            &a,
            &a.clone(),
            &CrossoverConfig::default(),
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::IdenticalParents));
    }

    #[test]
    fn full_inheritance_removes_exactly_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = gnp(30, 0.12, &mut rng);
        let s2 = Solution::new(&g, [1, 5, 9, 14]).unwrap();
        let s1 = Solution::new(&g, [1, 5, 9, 20]).unwrap();
        let out =
            double_backbone_crossover(&g, &s1, &s2, &CrossoverConfig::new(1.0).unwrap(), &mut rng)
                .unwrap();
        assert_eq!(out.inherited, 2);
        assert_eq!(out.repair.len(), 1);
        assert_eq!(out.removals(), 1);
        assert_eq!(out.offspring.k(), 4);
    }

    #[test]
    fn zero_probability_adds_from_outside_parents() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = gnp(30, 0.12, &mut rng);
        let s1 = Solution::new(&g, [0, 2, 4, 6, 8]).unwrap();
        let s2 = Solution::new(&g, [0, 2, 5, 7, 9]).unwrap();
        let out =
            double_backbone_crossover(&g, &s1, &s2, &CrossoverConfig::new(0.0).unwrap(), &mut rng)
                .unwrap();
        assert_eq!(out.backbone, 2);
        assert_eq!(out.inherited, 0);
        assert_eq!(out.repair.len(), 3);
        for step in &out.repair {
            assert_eq!(step.action, RepairAction::Add);
            assert!(!s1.contains(step.node) && !s2.contains(step.node));
        }
        assert!(out.offspring.contains(0) && out.offspring.contains(2));
    }

    #[test]
    fn repair_steps_are_greedy_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let g = gnp(18, 0.2, &mut rng);
            let s1 = random_solution(&g, 5, &mut rng).unwrap();
            let s2 = random_solution(&g, 5, &mut rng).unwrap();
            if s1 == s2 {
                continue;
            }
            let p = rng.random_range(0.0..=1.0);
            let out = double_backbone_crossover(
                &g,
                &s1,
                &s2,
                &CrossoverConfig::new(p).unwrap(),
                &mut rng,
            )
            .unwrap();
            // replay the repair against brute-force scoring
            let mut set: Vec<usize> = out.offspring.nodes().to_vec();
            let mut partials = Vec::new();
            for step in out.repair.iter().rev() {
                match step.action {
                    RepairAction::Remove => set.push(step.node),
                    RepairAction::Add => set.retain(|&x| x != step.node),
                }
                partials.push(set.clone());
            }
            partials.reverse();
            for (step, before) in out.repair.iter().zip(&partials) {
                let f = |s: &[usize]| decompose(&g, s).unwrap().pairwise_connectivity();
                match step.action {
                    RepairAction::Remove => {
                        let best = before
                            .iter()
                            .map(|&u| {
                                let s: Vec<_> =
                                    before.iter().copied().filter(|&x| x != u).collect();
                                f(&s)
                            })
                            .min()
                            .unwrap();
                        assert_eq!(step.objective, best);
                    }
                    RepairAction::Add => {
                        let best = (0..18)
                            .filter(|u| !before.contains(u) && !s1.contains(*u) && !s2.contains(*u))
                            .map(|u| {
                                let mut s = before.clone();
                                s.push(u);
                                f(&s)
                            })
                            .min()
                            .unwrap();
                        assert_eq!(step.objective, best);
                    }
                }
            }
            assert_eq!(out.offspring.k(), 5);
        }
    }

    #[test]
    fn reinsertion_matches_recompute() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = gnp(25, 0.15, &mut rng);
        let removed = [1usize, 4, 7, 12, 20];
        let d = decompose(&g, &removed).unwrap();
        let got = reinsertion_objectives(&g, &d, &removed);
        for (i, &u) in removed.iter().enumerate() {
            let rest: Vec<_> = removed.iter().copied().filter(|&x| x != u).collect();
            assert_eq!(
                got[i],
                decompose(&g, &rest).unwrap().pairwise_connectivity()
            );
        }
    }
}
