//! Small-graph enumeration for exhaustive checks.

use crate::error::{Error, Result};
use crate::instances::Graph;

/// One representative per isomorphism class of simple undirected graphs on
/// `n ≤ 6` vertices, in increasing order of canonical code.
pub fn nonisomorphic_graphs(n: usize) -> Result<Vec<Graph>> {
    if n > 6 {
        return Err(Error::SizeCap(format!("graph enumeration is limited to 6 vertices, got {n}")));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let index = |u: usize, v: usize| {
        let (a, b) = (u.min(v), u.max(v));
        pairs.iter().position(|&p| p == (a, b)).expect("pair exists")
    };
    let perms = permutations(n);
    let mut codes = Vec::new();
    for mask in 0u32..1 << pairs.len() {
        let canonical = perms
            .iter()
            .map(|p| {
                pairs
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| mask >> j & 1 == 1)
                    .fold(0u32, |acc, (_, &(u, v))| acc | 1 << index(p[u], p[v]))
            })
            .min()
            .unwrap_or(0);
        if canonical == mask {
            codes.push(mask);
        }
    }
    codes
        .into_iter()
        .map(|mask| {
            let edges: Vec<(usize, usize)> =
                pairs.iter().enumerate().filter(|&(j, _)| mask >> j & 1 == 1).map(|(_, &e)| e).collect();
            Graph::undirected(n, &edges)
        })
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_counts() {
        let counts: Vec<usize> = (1..=5).map(|n| nonisomorphic_graphs(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 11, 34]);
    }
}
