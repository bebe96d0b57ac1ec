use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::{CnfFormula, Graph, SetSystem};
use crate::radical::Radical;

use super::{Color, ProblemKind, RoleTag, Source, SourceInstance, SubsetSumInstance};

/// A solution in the vocabulary of the original problem. All labels are
/// 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "kebab-case")]
pub enum Solution {
    /// `assignment[i]` is the value of variable `i + 1`.
    Assignment(Vec<bool>),
    Vertices(Vec<usize>),
    Edges(Vec<(usize, usize)>),
    Subsets(Vec<usize>),
    /// One side of the cut.
    Cut(Vec<usize>),
    /// Color of each vertex, in vertex order.
    Coloring(Vec<Color>),
    Items(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecodedSolution {
    pub problem: ProblemKind,
    pub k: Option<usize>,
    pub solution: Solution,
    /// One line per checked constraint of the original problem.
    pub certificate: Vec<String>,
}

/// Reads the original-problem solution off a subset achieving the target.
pub fn decode(inst: &SubsetSumInstance, chosen: &[bool]) -> Result<DecodedSolution> {
    if chosen.len() != inst.len() {
        return Err(Error::Precondition(format!(
            "choice vector has length {}, instance has {} weights",
            chosen.len(),
            inst.len()
        )));
    }
    if !inst.is_witness(chosen) {
        return Err(Error::Precondition("chosen subset does not sum to the target".into()));
    }
    let picked = || inst.roles.iter().zip(chosen).filter(|(_, &c)| c).map(|(r, _)| *r);
    let kind = inst.source.kind;
    let solution = match kind {
        ProblemKind::Sat3 => {
            let SourceInstance::Cnf(f) = &inst.source.instance else {
                return Err(mismatch(kind));
            };
            let mut value = vec![None; f.num_vars];
            for role in picked() {
                let (i, v) = match role {
                    RoleTag::VarTrue(i) => (i, true),
                    RoleTag::VarFalse(i) => (i, false),
                    _ => continue,
                };
                if value[i - 1].replace(v).is_some() {
                    return Err(Error::Invariant(format!("both literals of x{i} chosen")));
                }
            }
            let mut assignment = Vec::with_capacity(f.num_vars);
            for (i, v) in value.into_iter().enumerate() {
                assignment.push(v.ok_or_else(|| Error::Invariant(format!("neither literal of x{} chosen", i + 1)))?);
            }
            Solution::Assignment(assignment)
        }
        ProblemKind::VertexCover | ProblemKind::Mis | ProblemKind::Clique | ProblemKind::DominatingSet => {
            Solution::Vertices(
                picked()
                    .filter_map(|r| match r {
                        RoleTag::VertexPick(v) => Some(v),
                        _ => None,
                    })
                    .collect(),
            )
        }
        ProblemKind::MaxCut => Solution::Cut(
            picked()
                .filter_map(|r| match r {
                    RoleTag::VertexPick(v) => Some(v),
                    _ => None,
                })
                .collect(),
        ),
        ProblemKind::Matching => Solution::Edges(
            picked()
                .filter_map(|r| match r {
                    RoleTag::EdgePick(u, v) => Some((u, v)),
                    _ => None,
                })
                .collect(),
        ),
        ProblemKind::ExactCover | ProblemKind::SetPacking => Solution::Subsets(
            picked()
                .filter_map(|r| match r {
                    RoleTag::SubsetPick(i) => Some(i),
                    _ => None,
                })
                .collect(),
        ),
        ProblemKind::Coloring3 => {
            let SourceInstance::Graph(g) = &inst.source.instance else {
                return Err(mismatch(kind));
            };
            let mut colors = vec![None; g.num_vertices];
            for role in picked() {
                if let RoleTag::ColorPick(v, c) = role {
                    if colors[v - 1].replace(c).is_some() {
                        return Err(Error::Invariant(format!("vertex {v} received two colors")));
                    }
                }
            }
            let mut out = Vec::with_capacity(colors.len());
            for (v, c) in colors.into_iter().enumerate() {
                out.push(c.ok_or_else(|| Error::Invariant(format!("vertex {} received no color", v + 1)))?);
            }
            Solution::Coloring(out)
        }
        ProblemKind::SubsetSum => Solution::Items(
            picked()
                .filter_map(|r| match r {
                    RoleTag::Item(i) => Some(i),
                    _ => None,
                })
                .collect(),
        ),
    };
    let certificate = native_check(&inst.source, &solution)
        .map_err(|why| Error::Invariant(format!("decoded {kind} solution is invalid: {why}")))?;
    Ok(DecodedSolution {
        problem: kind,
        k: inst.source.k,
        solution,
        certificate,
    })
}

/// Builds the subset that the equivalence proof associates with a native
/// solution.
pub fn forward_map(inst: &SubsetSumInstance, solution: &Solution) -> Result<Vec<bool>> {
    native_check(&inst.source, solution).map_err(|why| Error::Precondition(format!("not a solution: {why}")))?;
    let chosen = match (&inst.source.instance, solution) {
        (SourceInstance::Cnf(f), Solution::Assignment(x)) => {
            let slack: Vec<usize> = (0..f.num_clauses()).map(|j| 3 - f.true_literals(j, x)).collect();
            inst.roles
                .iter()
                .map(|r| match *r {
                    RoleTag::VarTrue(i) => x[i - 1],
                    RoleTag::VarFalse(i) => !x[i - 1],
                    RoleTag::ClauseSlack(j, level) => slack[j - 1] >= level as usize,
                    _ => false,
                })
                .collect()
        }
        (SourceInstance::Graph(g), _) => forward_graph(inst, g, solution)?,
        (SourceInstance::Sets(s), Solution::Subsets(picked)) => {
            let picked: BTreeSet<usize> = picked.iter().copied().collect();
            let covered: BTreeSet<usize> = picked.iter().flat_map(|&i| s.subsets[i - 1].iter().map(|e| e + 1)).collect();
            inst.roles
                .iter()
                .map(|r| match *r {
                    RoleTag::SubsetPick(i) => picked.contains(&i),
                    RoleTag::ElementUnit(e) => !covered.contains(&e),
                    _ => false,
                })
                .collect()
        }
        (SourceInstance::Raw(_), Solution::Items(items)) => {
            let items: BTreeSet<usize> = items.iter().copied().collect();
            (1..=inst.len()).map(|i| items.contains(&i)).collect()
        }
        _ => return Err(Error::Precondition("solution type does not match the problem".into())),
    };
    if !inst.is_witness(&chosen) {
        return Err(Error::Invariant(format!(
            "forward map of a valid {} solution misses the target",
            inst.source.kind
        )));
    }
    Ok(chosen)
}

fn forward_graph(inst: &SubsetSumInstance, g: &Graph, solution: &Solution) -> Result<Vec<bool>> {
    let n = g.num_vertices;
    let mut in_set = vec![false; n + 1];
    let mut colors = vec![None; n + 1];
    let mut matched = BTreeSet::new();
    match solution {
        Solution::Vertices(vs) | Solution::Cut(vs) => vs.iter().for_each(|&v| in_set[v] = true),
        Solution::Coloring(cs) => cs.iter().enumerate().for_each(|(v, &c)| colors[v + 1] = Some(c)),
        Solution::Edges(es) => matched.extend(es.iter().map(|&(u, v)| (u.min(v), u.max(v)))),
        _ => return Err(Error::Precondition("solution type does not match the problem".into())),
    }
    // Endpoints of edge j (1-based) that lie in the chosen vertex set.
    let inside = |j: usize| {
        let (u, v) = g.edges[j - 1];
        in_set[u + 1] as usize + in_set[v + 1] as usize
    };
    let covered_vertex: BTreeSet<usize> = matched.iter().flat_map(|&(u, v)| [u, v]).collect();
    let surplus = |v: usize| -> usize {
        let deg = g.degree(v - 1);
        let d_neighbors = g
            .incident(v - 1)
            .filter(|&j| {
                let (a, b) = g.edges[j];
                let other = if a == v - 1 { b } else { a };
                in_set[other + 1]
            })
            .count();
        if in_set[v] {
            deg - d_neighbors
        } else {
            d_neighbors - 1
        }
    };
    let mut surplus_levels: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n + 1];
    if inst.source.kind == ProblemKind::DominatingSet {
        for v in 1..=n {
            // Greedy from the largest level represents any r in 0..=deg.
            let mut r = surplus(v);
            for level in (1..=g.degree(v - 1)).rev() {
                if level <= r {
                    surplus_levels[v].insert(level);
                    r -= level;
                }
            }
        }
    }
    let kind = inst.source.kind;
    Ok(inst
        .roles
        .iter()
        .map(|r| match *r {
            RoleTag::VertexPick(v) => in_set[v],
            RoleTag::EdgeSlack(j) => match kind {
                ProblemKind::VertexCover => inside(j) == 1,
                _ => inside(j) == 0,
            },
            RoleTag::PairPick(u, v) => in_set[u] && in_set[v],
            RoleTag::EdgePick(u, v) => matched.contains(&(u, v)),
            RoleTag::ElementUnit(v) => !covered_vertex.contains(&v),
            RoleTag::CutBoth(j) | RoleTag::DomEdgeBoth(j) => inside(j) == 2,
            RoleTag::CutOne(j) | RoleTag::DomEdgeOne(j) => inside(j) == 1,
            RoleTag::DomSurplus(v, level) => surplus_levels[v].contains(&level),
            RoleTag::ColorPick(v, c) => colors[v] == Some(c),
            RoleTag::EdgeColorSlack(j, c) => {
                let (u, v) = g.edges[j - 1];
                colors[u + 1] != Some(c) && colors[v + 1] != Some(c)
            }
            _ => false,
        })
        .collect())
}

fn mismatch(kind: ProblemKind) -> Error {
    Error::Invariant(format!("{kind} instance carries a foreign source"))
}

/// Checks a native solution against the source problem, returning one
/// certificate line per constraint or the first violation found.
pub fn native_check(source: &Source, solution: &Solution) -> std::result::Result<Vec<String>, String> {
    let k = source.k;
    let size = |len: usize, what: &str| -> std::result::Result<String, String> {
        match k {
            Some(k) if len != k => Err(format!("{what} has size {len}, expected {k}")),
            Some(k) => Ok(format!("{what} has size {k}")),
            None => Ok(format!("{what} has size {len}")),
        }
    };
    match (source.kind, &source.instance, solution) {
        (ProblemKind::Sat3, SourceInstance::Cnf(f), Solution::Assignment(x)) => check_sat(f, x),
        (kind, SourceInstance::Graph(g), sol) if kind.takes_graph() => {
            let vertex_set = |vs: &[usize]| -> std::result::Result<BTreeSet<usize>, String> {
                let set: BTreeSet<usize> = vs.iter().copied().collect();
                if set.len() != vs.len() {
                    return Err("repeated vertex".into());
                }
                if let Some(&v) = set.iter().find(|&&v| v == 0 || v > g.num_vertices) {
                    return Err(format!("vertex {v} out of range"));
                }
                Ok(set)
            };
            let mut cert = Vec::new();
            match (kind, sol) {
                (ProblemKind::VertexCover, Solution::Vertices(vs)) => {
                    let s = vertex_set(vs)?;
                    cert.push(size(s.len(), "cover")?);
                    for &(u, v) in &g.edges {
                        if !s.contains(&(u + 1)) && !s.contains(&(v + 1)) {
                            return Err(format!("edge ({}, {}) uncovered", u + 1, v + 1));
                        }
                        cert.push(format!("edge ({}, {}) covered", u + 1, v + 1));
                    }
                }
                (ProblemKind::Mis, Solution::Vertices(vs)) => {
                    let s = vertex_set(vs)?;
                    cert.push(size(s.len(), "independent set")?);
                    for &(u, v) in &g.edges {
                        if s.contains(&(u + 1)) && s.contains(&(v + 1)) {
                            return Err(format!("edge ({}, {}) inside the set", u + 1, v + 1));
                        }
                        cert.push(format!("edge ({}, {}) has at most one endpoint inside", u + 1, v + 1));
                    }
                }
                (ProblemKind::Clique, Solution::Vertices(vs)) => {
                    let s: Vec<usize> = vertex_set(vs)?.into_iter().collect();
                    cert.push(size(s.len(), "clique")?);
                    for (a, &u) in s.iter().enumerate() {
                        for &v in &s[a + 1..] {
                            if !g.has_edge(u - 1, v - 1) {
                                return Err(format!("vertices {u} and {v} not adjacent"));
                            }
                            cert.push(format!("vertices {u} and {v} adjacent"));
                        }
                    }
                }
                (ProblemKind::DominatingSet, Solution::Vertices(vs)) => {
                    let s = vertex_set(vs)?;
                    cert.push(size(s.len(), "dominating set")?);
                    for v in 1..=g.num_vertices {
                        if s.contains(&v) {
                            cert.push(format!("vertex {v} in the set"));
                            continue;
                        }
                        let by = g.incident(v - 1).map(|j| g.edges[j]).find_map(|(a, b)| {
                            let other = if a + 1 == v { b + 1 } else { a + 1 };
                            s.contains(&other).then_some(other)
                        });
                        match by {
                            Some(w) => cert.push(format!("vertex {v} dominated by {w}")),
                            None => return Err(format!("vertex {v} not dominated")),
                        }
                    }
                }
                (ProblemKind::MaxCut, Solution::Cut(vs)) => {
                    let s = vertex_set(vs)?;
                    let cut: Vec<_> = g
                        .edges
                        .iter()
                        .filter(|&&(u, v)| s.contains(&(u + 1)) != s.contains(&(v + 1)))
                        .collect();
                    cert.push(size(cut.len(), "cut")?);
                    cert.extend(cut.iter().map(|&&(u, v)| format!("edge ({}, {}) crosses", u + 1, v + 1)));
                }
                (ProblemKind::Matching, Solution::Edges(es)) => {
                    cert.push(size(es.len(), "matching")?);
                    let mut used = BTreeSet::new();
                    for &(u, v) in es {
                        if u == 0 || v == 0 || !g.has_edge(u - 1, v - 1) {
                            return Err(format!("({u}, {v}) is not an edge"));
                        }
                        if !used.insert(u) || !used.insert(v) {
                            return Err(format!("edge ({u}, {v}) shares a vertex"));
                        }
                        cert.push(format!("edge ({u}, {v}) disjoint from the others"));
                    }
                }
                (ProblemKind::Coloring3, Solution::Coloring(cs)) => {
                    if cs.len() != g.num_vertices {
                        return Err("coloring length differs from vertex count".into());
                    }
                    for &(u, v) in &g.edges {
                        if cs[u] == cs[v] {
                            return Err(format!("edge ({}, {}) is monochromatic", u + 1, v + 1));
                        }
                        cert.push(format!("edge ({}, {}) properly colored", u + 1, v + 1));
                    }
                }
                _ => return Err("solution type does not match the problem".into()),
            }
            Ok(cert)
        }
        (kind @ (ProblemKind::ExactCover | ProblemKind::SetPacking), SourceInstance::Sets(s), Solution::Subsets(ids)) => {
            check_sets(kind, s, ids, k)
        }
        (ProblemKind::SubsetSum, SourceInstance::Raw(r), Solution::Items(items)) => {
            let mut sum = Radical::zero();
            for &i in items {
                let w = r.weights.get(i.wrapping_sub(1)).ok_or_else(|| format!("item {i} out of range"))?;
                sum += w;
            }
            if sum == r.target {
                Ok(vec![format!("chosen items sum to {}", r.target)])
            } else {
                Err("chosen items miss the target".into())
            }
        }
        _ => Err("solution type does not match the problem".into()),
    }
}

fn check_sat(f: &CnfFormula, x: &[bool]) -> std::result::Result<Vec<String>, String> {
    if x.len() != f.num_vars {
        return Err("assignment length differs from variable count".into());
    }
    let mut cert = Vec::with_capacity(f.num_clauses());
    for (j, clause) in f.clauses.iter().enumerate() {
        match clause.iter().find(|&&l| CnfFormula::literal_value(l, x)) {
            Some(l) => cert.push(format!("clause {} satisfied by literal {l}", j + 1)),
            None => return Err(format!("clause {} unsatisfied", j + 1)),
        }
    }
    Ok(cert)
}

fn check_sets(
    kind: ProblemKind,
    s: &SetSystem,
    ids: &[usize],
    k: Option<usize>,
) -> std::result::Result<Vec<String>, String> {
    let mut count = vec![0usize; s.universe_size];
    let mut seen = BTreeSet::new();
    for &i in ids {
        if i == 0 || i > s.subsets.len() || !seen.insert(i) {
            return Err(format!("subset index {i} invalid or repeated"));
        }
        for &e in &s.subsets[i - 1] {
            count[e] += 1;
        }
    }
    let mut cert = Vec::new();
    if kind == ProblemKind::SetPacking {
        let k = k.unwrap_or(ids.len());
        if ids.len() != k {
            return Err(format!("packing has {} subsets, expected {k}", ids.len()));
        }
        cert.push(format!("packing has {k} subsets"));
    }
    for (e, &c) in count.iter().enumerate() {
        match kind {
            ProblemKind::ExactCover if c != 1 => return Err(format!("element {} covered {c} times", e + 1)),
            ProblemKind::SetPacking if c > 1 => return Err(format!("element {} covered {c} times", e + 1)),
            _ => cert.push(format!("element {} covered {c} time(s)", e + 1)),
        }
    }
    Ok(cert)
}
