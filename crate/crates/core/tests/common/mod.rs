//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use cnp_core::Graph;

/// Counts connected pairs of non-removed nodes with one BFS per node.
pub fn reachable_pairs(g: &Graph, removed: &[usize]) -> u64 {
    let n = g.node_count();
    let mut gone = vec![false; n];
    for &r in removed {
        gone[r] = true;
    }
    let mut total = 0u64;
    let mut seen = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        if gone[s] {
            continue;
        }
        seen[s] = s;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if !gone[w] && seen[w] != s {
                    seen[w] = s;
                    queue.push_back(w);
                    if w > s {
                        total += 1;
                    }
                }
            }
        }
    }
    total
}

/// Calls `f` for every sorted `k`-subset of `0..n`.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact optimum by enumeration.
pub fn brute_force_optimum(g: &Graph, k: usize) -> u64 {
    let mut best = u64::MAX;
    for_each_subset(g.node_count(), k, |s| {
        best = best.min(reachable_pairs(g, s))
    });
    best
}
