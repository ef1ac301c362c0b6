//! Seeded random graph models, used for synthetic stand-ins of benchmark
//! families and throughout the tests.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::Graph;

/// `G(n, p)`: every pair is an edge independently with probability `p`.
pub fn gnp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Graph::from_edge_list(n, &edges)
}

/// `G(n, m)`: `m` distinct edges drawn uniformly.
pub fn gnm<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Graph {
    let max = n * n.saturating_sub(1) / 2;
    assert!(
        m <= max,
        "{m} edges do not fit in a simple graph on {n} nodes"
    );
    let mut set = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a == b {
            continue;
        }
        let e = (a.min(b), a.max(b));
        if set.insert(e) {
            edges.push(e);
        }
    }
    Graph::from_edge_list(n, &edges)
}

/// Preferential-attachment graph where each new node attaches to `links`
/// existing nodes. With `links == 1` this is a tree with `n - 1` edges.
pub fn barabasi_albert<R: Rng + ?Sized>(n: usize, links: usize, rng: &mut R) -> Graph {
    assert!(links >= 1 && n > links);
    let mut edges = Vec::new();
    // endpoint multiset: sampling from it is degree-proportional
    let mut ends: Vec<usize> = Vec::new();
    // seed clique on nodes 0..=links
    for a in 0..=links {
        for b in a + 1..=links {
            edges.push((a, b));
            ends.push(a);
            ends.push(b);
        }
    }
    for v in links + 1..n {
        let mut targets = HashSet::new();
        while targets.len() < links {
            targets.insert(ends[rng.random_range(0..ends.len())]);
        }
        let mut targets: Vec<_> = targets.into_iter().collect();
        targets.sort_unstable();
        for t in targets {
            edges.push((t, v));
            ends.push(t);
            ends.push(v);
        }
    }
    Graph::from_edge_list(n, &edges)
}

/// Small-world graph: ring lattice with `ring_degree` neighbours per node
/// (rounded down to even), each edge rewired with probability `rewire`.
pub fn watts_strogatz<R: Rng + ?Sized>(
    n: usize,
    ring_degree: usize,
    rewire: f64,
    rng: &mut R,
) -> Graph {
    let half = ring_degree / 2;
    assert!(n > 2 * half);
    let mut set: HashSet<(usize, usize)> = HashSet::new();
    let mut edges = Vec::new();
    for a in 0..n {
        for j in 1..=half {
            let b = (a + j) % n;
            let e = (a.min(b), a.max(b));
            set.insert(e);
            edges.push(e);
        }
    }
    for e in edges.iter_mut() {
        if !rng.random_bool(rewire) {
            continue;
        }
        let a = e.0;
        for _ in 0..32 {
            let c = rng.random_range(0..n);
            let cand = (a.min(c), a.max(c));
            if c != a && !set.contains(&cand) {
                set.remove(e);
                set.insert(cand);
                *e = cand;
                break;
            }
        }
    }
    Graph::from_edge_list(n, &edges)
}

/// Removes uniformly chosen edges (or adds uniformly chosen non-edges) until
/// the graph has exactly `m` edges.
pub fn with_edge_count<R: Rng + ?Sized>(graph: &Graph, m: usize, rng: &mut R) -> Graph {
    let n = graph.node_count();
    let mut edges: Vec<(usize, usize)> = graph.edges().collect();
    if edges.len() > m {
        edges.shuffle(rng);
        edges.truncate(m);
    } else {
        let mut set: HashSet<_> = edges.iter().copied().collect();
        while edges.len() < m {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            let e = (a.min(b), a.max(b));
            if a != b && set.insert(e) {
                edges.push(e);
            }
        }
    }
    Graph::from_edge_list(n, &edges)
}

/// Random `k`-subset of `0..n`, sorted.
pub fn random_subset<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut s = rand::seq::index::sample(rng, n, k).into_vec();
    s.sort_unstable();
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn models_hit_requested_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = gnm(235, 350, &mut rng);
        assert_eq!((g.node_count(), g.edge_count()), (235, 350));

        let g = barabasi_albert(500, 1, &mut rng);
        assert_eq!((g.node_count(), g.edge_count()), (500, 499));

        let ws = watts_strogatz(250, 10, 0.3, &mut rng);
        let ws = with_edge_count(&ws, 1246, &mut rng);
        assert_eq!((ws.node_count(), ws.edge_count()), (250, 1246));
    }

    #[test]
    fn same_seed_same_graph() {
        let a = gnp(40, 0.1, &mut ChaCha8Rng::seed_from_u64(9));
        let b = gnp(40, 0.1, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
    }
}
