//! Critical-node solutions, the large-component candidate set and the
//! component-based swap move.
//!
//! Scoring a swap `S ∪ {v} \ {u}` is split in two phases. Removing `v`
//! splits its component once (one DFS over that component). Re-inserting a
//! candidate `u` then only merges the components adjacent to `u`, which is
//! pure size bookkeeping. Scoring every `u ∈ S` for a fixed `v` therefore
//! costs one component traversal plus the degrees of the critical nodes.

use std::hash::{Hash, Hasher};

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{decompose_masked, pairs, ComponentDecomposition, Graph, REMOVED};

/// A set of `k` critical nodes with its cached residual decomposition and
/// objective. Equality and hashing consider only the node set.
#[derive(Clone, Debug)]
pub struct Solution {
    nodes: Vec<usize>,
    in_set: Vec<bool>,
    decomposition: ComponentDecomposition,
    objective: u64,
}

impl Solution {
    pub fn new<I: IntoIterator<Item = usize>>(graph: &Graph, nodes: I) -> Result<Solution> {
        let n = graph.node_count();
        let mut in_set = vec![false; n];
        let mut list = Vec::new();
        for node in nodes {
            if node >= n {
                return Err(Error::NodeOutOfRange {
                    node,
                    node_count: n,
                });
            }
            if in_set[node] {
                return Err(Error::contract(format!("node {node} listed twice")));
            }
            in_set[node] = true;
            list.push(node);
        }
        list.sort_unstable();
        let decomposition = decompose_masked(graph, &in_set);
        let objective = decomposition.pairwise_connectivity();
        Ok(Solution {
            nodes: list,
            in_set,
            decomposition,
            objective,
        })
    }

    /// Critical nodes in increasing order.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn k(&self) -> usize {
        self.nodes.len()
    }

    pub fn objective(&self) -> u64 {
        self.objective
    }

    pub fn decomposition(&self) -> &ComponentDecomposition {
        &self.decomposition
    }

    #[inline]
    pub fn contains(&self, node: usize) -> bool {
        self.in_set[node]
    }

    pub fn mask(&self) -> &[bool] {
        &self.in_set
    }

    /// `|S_a ∩ S_b|`.
    pub fn shared_count(&self, other: &Solution) -> usize {
        let (mut i, mut j, mut shared) = (0, 0, 0);
        while i < self.nodes.len() && j < other.nodes.len() {
            match self.nodes[i].cmp(&other.nodes[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    shared += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        shared
    }

    /// Set distance `k - |S_a ∩ S_b|`.
    pub fn distance(&self, other: &Solution) -> usize {
        self.k() - self.shared_count(other)
    }

    /// Replaces `remove` by `insert` and recomputes the cached state.
    pub fn exchange(&mut self, graph: &Graph, remove: usize, insert: usize) -> Result<()> {
        if remove >= self.in_set.len() || !self.in_set[remove] {
            return Err(Error::contract(format!("node {remove} is not critical")));
        }
        if insert >= self.in_set.len() {
            return Err(Error::NodeOutOfRange {
                node: insert,
                node_count: self.in_set.len(),
            });
        }
        if self.in_set[insert] {
            return Err(Error::contract(format!(
                "node {insert} is already critical"
            )));
        }
        self.in_set[remove] = false;
        self.in_set[insert] = true;
        let at = self
            .nodes
            .binary_search(&remove)
            .expect("critical node listed");
        self.nodes.remove(at);
        let at = self.nodes.binary_search(&insert).unwrap_err();
        self.nodes.insert(at, insert);
        self.refresh(graph);
        Ok(())
    }

    pub(crate) fn refresh(&mut self, graph: &Graph) {
        self.decomposition = decompose_masked(graph, &self.in_set);
        self.objective = self.decomposition.pairwise_connectivity();
    }

    /// Checks the cached decomposition and objective against a recomputation.
    pub fn is_coherent(&self, graph: &Graph) -> bool {
        let fresh = decompose_masked(graph, &self.in_set);
        fresh == self.decomposition
            && fresh.pairwise_connectivity() == self.objective
            && self.nodes.iter().all(|&u| self.in_set[u])
            && self.in_set.iter().filter(|&&b| b).count() == self.nodes.len()
    }

    pub fn external_nodes(&self, graph: &Graph) -> Vec<u64> {
        self.nodes.iter().map(|&u| graph.external_id(u)).collect()
    }
}

impl PartialEq for Solution {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
    }
}

impl Eq for Solution {}

impl Hash for Solution {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.nodes.hash(state);
    }
}

/// `C(n, k)`, the number of `k`-node subsets.
pub fn search_space_size(n: usize, k: usize) -> Result<BigUint> {
    if k > n {
        return Err(Error::domain(format!("k = {k} exceeds n = {n}")));
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    Ok(acc)
}

/// How the large-component threshold `L` is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// `max(2, ceil(mean component size))` of the current residual graph.
    #[default]
    Adaptive,
    Fixed(usize),
}

impl ThresholdRule {
    pub fn resolve(self, decomposition: &ComponentDecomposition) -> usize {
        match self {
            ThresholdRule::Fixed(l) => l,
            ThresholdRule::Adaptive => {
                let t = decomposition.component_count();
                if t == 0 {
                    return 2;
                }
                let residual = decomposition.residual_node_count();
                residual.div_ceil(t).max(2)
            }
        }
    }
}

/// Nodes of all residual components of size at least `threshold`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSet {
    pub nodes: Vec<usize>,
    pub threshold: usize,
    /// Set when no component reached the threshold and the largest
    /// component was used instead.
    pub fallback: bool,
}

fn large_components(d: &ComponentDecomposition, threshold: usize) -> (Vec<usize>, bool) {
    let comps: Vec<usize> = (0..d.component_count())
        .filter(|&c| d.component_size(c) >= threshold)
        .collect();
    if comps.is_empty() {
        (d.largest_component().into_iter().collect(), true)
    } else {
        (comps, false)
    }
}

pub fn candidate_set(solution: &Solution, threshold: usize) -> CandidateSet {
    let d = solution.decomposition();
    let (comps, fallback) = large_components(d, threshold);
    let nodes = comps
        .iter()
        .flat_map(|&c| d.component_nodes(c).iter().copied())
        .collect();
    CandidateSet {
        nodes,
        threshold,
        fallback,
    }
}

/// Draws `v` uniformly from the candidate set without materializing it.
pub fn sample_candidate<R: Rng + ?Sized>(
    solution: &Solution,
    threshold: usize,
    rng: &mut R,
) -> Option<usize> {
    let d = solution.decomposition();
    let (comps, _) = large_components(d, threshold);
    let total: usize = comps.iter().map(|&c| d.component_size(c)).sum();
    if total == 0 {
        return None;
    }
    let mut r = rng.random_range(0..total);
    for c in comps {
        let size = d.component_size(c);
        if r < size {
            return Some(d.component_nodes(c)[r]);
        }
        r -= size;
    }
    unreachable!("r < total")
}

/// A scored exchange `S ∪ {insert} \ {remove}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exchange {
    pub remove: usize,
    pub insert: usize,
    pub objective: u64,
}

/// Reusable scratch space for swap scoring on one graph.
#[derive(Clone, Debug)]
pub struct SwapEvaluator {
    overlay: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
    mark: Vec<u32>,
    mark_epoch: u32,
    split_sizes: Vec<usize>,
    first_split_label: usize,
    base_objective: u64,
    stack: Vec<usize>,
}

impl SwapEvaluator {
    pub fn new(node_count: usize) -> SwapEvaluator {
        SwapEvaluator {
            overlay: vec![REMOVED; node_count],
            stamp: vec![0; node_count],
            epoch: 0,
            mark: vec![0; 2 * node_count + 1],
            mark_epoch: 0,
            split_sizes: Vec::new(),
            first_split_label: 0,
            base_objective: 0,
            stack: Vec::new(),
        }
    }

    fn check_insert(graph: &Graph, solution: &Solution, insert: usize) -> Result<()> {
        if insert >= graph.node_count() {
            return Err(Error::NodeOutOfRange {
                node: insert,
                node_count: graph.node_count(),
            });
        }
        if solution.contains(insert) {
            return Err(Error::contract(format!(
                "swap target {insert} is already a critical node"
            )));
        }
        Ok(())
    }

    /// Phase one: remove `insert` from the residual graph and relabel the
    /// pieces of its component. Returns `f(S ∪ {insert})`.
    fn split(&mut self, graph: &Graph, solution: &Solution, insert: usize) -> u64 {
        if self.epoch == u32::MAX {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 0;
        }
        self.epoch += 1;
        let epoch = self.epoch;
        let d = solution.decomposition();
        let comp = d.component_of(insert).expect("insert is not critical");
        self.first_split_label = d.component_count();
        self.split_sizes.clear();
        self.stamp[insert] = epoch;
        self.overlay[insert] = REMOVED;

        for &start in d.component_nodes(comp) {
            if self.stamp[start] == epoch {
                continue;
            }
            let label = (self.first_split_label + self.split_sizes.len()) as u32;
            self.stamp[start] = epoch;
            self.overlay[start] = label;
            self.stack.push(start);
            let mut size = 0;
            while let Some(u) = self.stack.pop() {
                size += 1;
                for &w in graph.neighbors(u) {
                    if self.stamp[w] != epoch && !solution.contains(w) {
                        self.stamp[w] = epoch;
                        self.overlay[w] = label;
                        self.stack.push(w);
                    }
                }
            }
            self.split_sizes.push(size);
        }
        let pieces: u64 = self.split_sizes.iter().map(|&s| pairs(s)).sum();
        self.base_objective = solution.objective() - pairs(d.component_size(comp)) + pieces;
        self.base_objective
    }

    #[inline]
    fn label_of(&self, solution: &Solution, node: usize) -> u32 {
        if self.stamp[node] == self.epoch {
            self.overlay[node]
        } else {
            solution.decomposition().labels()[node]
        }
    }

    #[inline]
    fn size_of(&self, solution: &Solution, label: u32) -> usize {
        let label = label as usize;
        if label >= self.first_split_label {
            self.split_sizes[label - self.first_split_label]
        } else {
            solution.decomposition().component_size(label)
        }
    }

    /// Phase two: objective after putting `remove` back, given the split
    /// computed by the last call to `split`.
    fn reinsert(&mut self, graph: &Graph, solution: &Solution, remove: usize) -> u64 {
        if self.mark_epoch == u32::MAX {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.mark_epoch = 0;
        }
        self.mark_epoch += 1;
        let mut merged = 1usize;
        let mut absorbed = 0u64;
        for &w in graph.neighbors(remove) {
            let label = self.label_of(solution, w);
            if label == REMOVED || self.mark[label as usize] == self.mark_epoch {
                continue;
            }
            self.mark[label as usize] = self.mark_epoch;
            let size = self.size_of(solution, label);
            merged += size;
            absorbed += pairs(size);
        }
        self.base_objective - absorbed + pairs(merged)
    }

    /// `f(S ∪ {insert} \ {remove})` without touching `solution`.
    pub fn evaluate(
        &mut self,
        graph: &Graph,
        solution: &Solution,
        insert: usize,
        remove: usize,
    ) -> Result<u64> {
        Self::check_insert(graph, solution, insert)?;
        if remove >= graph.node_count() || !solution.contains(remove) {
            return Err(Error::contract(format!(
                "node {remove} is not a critical node"
            )));
        }
        self.split(graph, solution, insert);
        Ok(self.reinsert(graph, solution, remove))
    }

    /// Scores every `u ∈ S` against `insert` and returns the best exchange,
    /// ties broken uniformly at random.
    pub fn best_exchange<R: Rng + ?Sized>(
        &mut self,
        graph: &Graph,
        solution: &Solution,
        insert: usize,
        rng: &mut R,
    ) -> Result<Exchange> {
        Self::check_insert(graph, solution, insert)?;
        if solution.k() == 0 {
            return Err(Error::contract("swap on an empty critical set"));
        }
        self.split(graph, solution, insert);
        let mut best = Exchange {
            remove: usize::MAX,
            insert,
            objective: u64::MAX,
        };
        let mut ties = 0u32;
        for &u in solution.nodes() {
            let value = self.reinsert(graph, solution, u);
            if value < best.objective {
                best.objective = value;
                best.remove = u;
                ties = 1;
            } else if value == best.objective {
                ties += 1;
                if rng.random_range(0..ties) == 0 {
                    best.remove = u;
                }
            }
        }
        Ok(best)
    }
}

/// `f(S ∪ {insert} \ {remove})`, recomputed incrementally.
pub fn evaluate_swap(
    graph: &Graph,
    solution: &Solution,
    insert: usize,
    remove: usize,
) -> Result<u64> {
    SwapEvaluator::new(graph.node_count()).evaluate(graph, solution, insert, remove)
}

/// Applies the best exchange for `insert` and returns the new solution.
pub fn swap<R: Rng + ?Sized>(
    graph: &Graph,
    solution: &Solution,
    insert: usize,
    rng: &mut R,
) -> Result<Solution> {
    let ex = SwapEvaluator::new(graph.node_count()).best_exchange(graph, solution, insert, rng)?;
    let mut next = solution.clone();
    next.exchange(graph, ex.remove, ex.insert)?;
    debug_assert_eq!(next.objective(), ex.objective);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gnp, random_subset};
    use crate::graph::decompose;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edge_list(n, &edges)
    }

    fn star() -> Graph {
        Graph::from_edge_list(5, &[(0, 1), (0, 2), (0, 3), (0, 4)])
    }

    fn brute(graph: &Graph, set: &[usize]) -> u64 {
        decompose(graph, set).unwrap().pairwise_connectivity()
    }

    #[test]
    fn binomials() {
        assert_eq!(search_space_size(5, 2).unwrap(), BigUint::from(10u32));
        assert_eq!(search_space_size(7, 0).unwrap(), BigUint::from(1u32));
        assert!(search_space_size(3, 4).is_err());
        // brute-force enumeration of 3-subsets of a 10-set
        let mut count = 0u32;
        for a in 0..10 {
            for b in a + 1..10 {
                for _c in b + 1..10 {
                    count += 1;
                }
            }
        }
        assert_eq!(search_space_size(10, 3).unwrap(), BigUint::from(count));
        assert_eq!(count, 120);
    }

    #[test]
    fn solution_rejects_bad_sets() {
        let g = path(4);
        assert!(Solution::new(&g, [0, 0]).is_err());
        assert!(Solution::new(&g, [4]).is_err());
    }

    #[test]
    fn candidate_set_definition_and_fallback() {
        // sizes [5, 3, 1] after removing node 5 (and 9)
        let g = Graph::from_edge_list(
            11,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (6, 7),
                (7, 8),
                (9, 10),
            ],
        );
        let s = Solution::new(&g, [5, 9]).unwrap();
        let mut sizes: Vec<_> = s.decomposition().sizes().collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 3, 5]);
        let w = candidate_set(&s, 3);
        let mut nodes = w.nodes.clone();
        nodes.sort_unstable();
        assert_eq!(nodes, vec![0, 1, 2, 3, 4, 6, 7, 8]);
        assert!(!w.fallback);

        // sizes [1, 1, 1] with L = 2: one singleton via fallback
        let g = Graph::from_edge_list(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let s = Solution::new(&g, [1, 3]).unwrap();
        let w = candidate_set(&s, 2);
        assert!(w.fallback);
        assert_eq!(w.nodes.len(), 1);
        assert!(!s.contains(w.nodes[0]));
    }

    #[test]
    fn adaptive_threshold() {
        let g = Graph::from_edge_list(
            11,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 5),
                (5, 6),
                (6, 7),
                (7, 8),
                (9, 10),
            ],
        );
        let s = Solution::new(&g, [5, 9]).unwrap();
        // 9 residual nodes in 3 components
        assert_eq!(ThresholdRule::Adaptive.resolve(s.decomposition()), 3);
        assert_eq!(ThresholdRule::Fixed(7).resolve(s.decomposition()), 7);
        let s = Solution::new(&g, [1, 3, 5, 7, 9]).unwrap();
        assert_eq!(ThresholdRule::Adaptive.resolve(s.decomposition()), 2);
    }

    #[test]
    fn swap_on_path() {
        let g = path(5);
        let s = Solution::new(&g, [0]).unwrap();
        assert_eq!(s.objective(), 6);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let next = swap(&g, &s, 2, &mut rng).unwrap();
        assert_eq!(next.nodes(), &[2]);
        assert_eq!(next.objective(), 2);
        assert_eq!(evaluate_swap(&g, &s, 2, 0).unwrap(), 2);
    }

    #[test]
    fn swap_to_star_center() {
        let g = star();
        let s = Solution::new(&g, [3]).unwrap();
        let next = swap(&g, &s, 0, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(next.nodes(), &[0]);
        assert_eq!(next.objective(), 0);
    }

    #[test]
    fn contract_violations() {
        let g = path(5);
        let s = Solution::new(&g, [0, 2]).unwrap();
        // u = v is impossible: v must be outside S and u inside
        assert!(matches!(
            evaluate_swap(&g, &s, 2, 2),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            evaluate_swap(&g, &s, 1, 3),
            Err(Error::Contract(_))
        ));
        assert!(swap(&g, &s, 0, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn swap_picks_oracle_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let g = gnp(20, 0.15, &mut rng);
            let s = Solution::new(&g, random_subset(20, 3, &mut rng)).unwrap();
            let v = loop {
                let v = rng.random_range(0..20);
                if !s.contains(v) {
                    break v;
                }
            };
            let oracle: Vec<u64> = s
                .nodes()
                .iter()
                .map(|&u| {
                    let set: Vec<usize> = s
                        .nodes()
                        .iter()
                        .copied()
                        .filter(|&x| x != u)
                        .chain([v])
                        .collect();
                    brute(&g, &set)
                })
                .collect();
            let next = swap(&g, &s, v, &mut rng).unwrap();
            assert_eq!(next.k(), 3);
            assert!(next.is_coherent(&g));
            assert_eq!(next.objective(), *oracle.iter().min().unwrap());
            assert!(next.objective() <= *oracle.iter().max().unwrap());
        }
    }

    #[test]
    fn exchange_keeps_cache_coherent() {
        let g = path(6);
        let mut s = Solution::new(&g, [1, 4]).unwrap();
        s.exchange(&g, 1, 2).unwrap();
        assert_eq!(s.nodes(), &[2, 4]);
        assert!(s.is_coherent(&g));
        assert_eq!(s.objective(), brute(&g, &[2, 4]));
        assert!(s.exchange(&g, 1, 3).is_err());
        assert!(s.exchange(&g, 2, 4).is_err());
    }

    #[test]
    fn distance_and_equality() {
        let g = path(6);
        let a = Solution::new(&g, [3, 1, 5]).unwrap();
        let b = Solution::new(&g, [1, 2, 5]).unwrap();
        assert_eq!(a.shared_count(&b), 2);
        assert_eq!(a.distance(&b), 1);
        assert_eq!(a, Solution::new(&g, [5, 3, 1]).unwrap());
        assert_ne!(a, b);
    }
}
