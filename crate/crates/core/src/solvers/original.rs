//! Brute-force deciders over each problem's native search space.
//!
//! Witnesses have exactly the requested size `k`. For in-range `k` this
//! decides the usual at-most (cover, dominating set) or at-least (clique,
//! independent set, matching, packing) question, because those solution
//! families are closed under growing or shrinking by one element.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::{CnfFormula, Graph, SetSystem};
use crate::radical::Radical;
use crate::reductions::{Color, ProblemKind, Solution, Source, SourceInstance};

use super::OracleMode;

pub const MAX_VERTICES: usize = 10;
pub const MAX_VARIABLES: usize = 20;
pub const MAX_SUBSETS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OriginalResult {
    pub feasible: bool,
    pub witnesses: Vec<Solution>,
    pub explored: u64,
}

struct Collector {
    mode: OracleMode,
    witnesses: Vec<Solution>,
    explored: u64,
}

impl Collector {
    /// Records a witness; returns true when the search should stop.
    fn push(&mut self, s: Solution) -> bool {
        self.witnesses.push(s);
        self.mode == OracleMode::First
    }
}

fn too_large(what: &str, have: usize, limit: usize) -> Error {
    Error::SizeCap(format!("{have} {what} exceeds the brute-force limit of {limit}"))
}

fn need_k(source: &Source) -> Result<usize> {
    source
        .k
        .ok_or_else(|| Error::Precondition(format!("{} needs k", source.kind)))
}

pub fn oracle_original(source: &Source, mode: OracleMode) -> Result<OriginalResult> {
    let mut c = Collector {
        mode,
        witnesses: Vec::new(),
        explored: 0,
    };
    match (&source.instance, source.kind) {
        (SourceInstance::Cnf(f), ProblemKind::Sat3) => sat(f, &mut c)?,
        (SourceInstance::Graph(g), kind) if kind.takes_graph() => {
            if g.num_vertices > MAX_VERTICES {
                return Err(too_large("vertices", g.num_vertices, MAX_VERTICES));
            }
            match kind {
                ProblemKind::Coloring3 => coloring(g, &mut c),
                ProblemKind::Matching => matching(g, need_k(source)?, &mut c),
                _ => vertex_sets(g, kind, need_k(source)?, &mut c),
            }
        }
        (SourceInstance::Sets(s), kind @ (ProblemKind::ExactCover | ProblemKind::SetPacking)) => {
            if s.subsets.len() > MAX_SUBSETS {
                return Err(too_large("subsets", s.subsets.len(), MAX_SUBSETS));
            }
            let k = if kind == ProblemKind::SetPacking { Some(need_k(source)?) } else { None };
            sets(s, k, &mut c);
        }
        (SourceInstance::Raw(r), ProblemKind::SubsetSum) => {
            let n = r.weights.len();
            if n > MAX_SUBSETS {
                return Err(too_large("items", n, MAX_SUBSETS));
            }
            for mask in 1u64..1 << n {
                c.explored += 1;
                let items: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                let sum: Radical = items.iter().map(|&i| r.weights[i].clone()).sum();
                if sum == r.target && c.push(Solution::Items(items.iter().map(|i| i + 1).collect())) {
                    break;
                }
            }
        }
        (_, kind) => return Err(Error::Domain(format!("instance does not match problem {kind}"))),
    }
    Ok(OriginalResult {
        feasible: !c.witnesses.is_empty(),
        witnesses: c.witnesses,
        explored: c.explored,
    })
}

fn sat(f: &CnfFormula, c: &mut Collector) -> Result<()> {
    if f.num_vars > MAX_VARIABLES {
        return Err(too_large("variables", f.num_vars, MAX_VARIABLES));
    }
    for mask in 0u64..1 << f.num_vars {
        c.explored += 1;
        let x: Vec<bool> = (0..f.num_vars).map(|i| mask >> i & 1 == 1).collect();
        let ok = f
            .clauses
            .iter()
            .all(|cl| cl.iter().any(|&l| x[l.unsigned_abs() as usize - 1] == (l > 0)));
        if ok && c.push(Solution::Assignment(x)) {
            break;
        }
    }
    Ok(())
}

fn vertex_sets(g: &Graph, kind: ProblemKind, k: usize, c: &mut Collector) {
    let n = g.num_vertices;
    let adj = |u: usize, v: usize| g.edges.iter().any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u));
    for mask in 0u32..1 << n {
        c.explored += 1;
        let inside = |v: usize| mask >> v & 1 == 1;
        let ok = match kind {
            ProblemKind::VertexCover => mask.count_ones() as usize == k && g.edges.iter().all(|&(u, v)| inside(u) || inside(v)),
            ProblemKind::Mis => mask.count_ones() as usize == k && g.edges.iter().all(|&(u, v)| !(inside(u) && inside(v))),
            ProblemKind::Clique => {
                mask.count_ones() as usize == k
                    && (0..n).all(|u| (u + 1..n).all(|v| !(inside(u) && inside(v)) || adj(u, v)))
            }
            ProblemKind::DominatingSet => {
                mask.count_ones() as usize == k && (0..n).all(|v| inside(v) || (0..n).any(|u| inside(u) && adj(u, v)))
            }
            ProblemKind::MaxCut => g.edges.iter().filter(|&&(u, v)| inside(u) != inside(v)).count() == k,
            _ => unreachable!("not a vertex-set problem"),
        };
        if ok {
            let vs: Vec<usize> = (0..n).filter(|&v| inside(v)).map(|v| v + 1).collect();
            let sol = if kind == ProblemKind::MaxCut { Solution::Cut(vs) } else { Solution::Vertices(vs) };
            if c.push(sol) {
                return;
            }
        }
    }
}

fn matching(g: &Graph, k: usize, c: &mut Collector) {
    fn go(g: &Graph, k: usize, from: usize, used: &mut Vec<bool>, picked: &mut Vec<(usize, usize)>, c: &mut Collector) -> bool {
        c.explored += 1;
        if picked.len() == k {
            return c.push(Solution::Edges(picked.iter().map(|&(u, v)| (u + 1, v + 1)).collect()));
        }
        for j in from..g.edges.len() {
            let (u, v) = g.edges[j];
            if used[u] || used[v] {
                continue;
            }
            used[u] = true;
            used[v] = true;
            picked.push((u, v));
            let stop = go(g, k, j + 1, used, picked, c);
            picked.pop();
            used[u] = false;
            used[v] = false;
            if stop {
                return true;
            }
        }
        false
    }
    go(g, k, 0, &mut vec![false; g.num_vertices], &mut Vec::new(), c);
}

fn coloring(g: &Graph, c: &mut Collector) {
    let n = g.num_vertices;
    let total = 3u64.pow(n as u32);
    for code in 0..total {
        c.explored += 1;
        let mut rest = code;
        let colors: Vec<Color> = (0..n)
            .map(|_| {
                let col = Color::from_index((rest % 3) as usize);
                rest /= 3;
                col
            })
            .collect();
        if g.edges.iter().all(|&(u, v)| colors[u] != colors[v]) && c.push(Solution::Coloring(colors)) {
            return;
        }
    }
}

fn sets(s: &SetSystem, k: Option<usize>, c: &mut Collector) {
    let n = s.subsets.len();
    for mask in 0u32..1 << n {
        c.explored += 1;
        if k.is_some_and(|k| mask.count_ones() as usize != k) {
            continue;
        }
        let mut count = vec![0usize; s.universe_size];
        for (i, sub) in s.subsets.iter().enumerate() {
            if mask >> i & 1 == 1 {
                for &e in sub {
                    count[e] += 1;
                }
            }
        }
        let ok = match k {
            None => count.iter().all(|&x| x == 1),
            Some(_) => count.iter().all(|&x| x <= 1),
        };
        if ok && c.push(Solution::Subsets((0..n).filter(|&i| mask >> i & 1 == 1).map(|i| i + 1).collect())) {
            return;
        }
    }
}
