use crate::error::{Error, Result};
use crate::instances::{CnfFormula, Graph, SetSystem};
use crate::radical::Radical;

use super::{Color, ProblemKind, RoleTag, Source, SourceInstance, SubsetSumInstance};

fn rank(i: usize) -> u32 {
    u32::try_from(i).expect("rank fits in u32")
}

fn check_k(kind: ProblemKind, k: usize, max: usize, what: &str) -> Result<()> {
    if k > max {
        return Err(Error::Domain(format!("{kind}: k = {k} exceeds {what} = {max}")));
    }
    Ok(())
}

fn undirected(kind: ProblemKind, g: &Graph) -> Result<()> {
    if g.directed {
        return Err(Error::Domain(format!("{kind} expects an undirected graph")));
    }
    Ok(())
}

/// Dispatches on `kind`. `k` is required exactly when `kind.needs_k()`.
pub fn encode(kind: ProblemKind, instance: &SourceInstance, k: Option<usize>) -> Result<SubsetSumInstance> {
    let need = |k: Option<usize>| k.ok_or_else(|| Error::Domain(format!("{kind} requires a size parameter k")));
    match (kind, instance) {
        (ProblemKind::Sat3, SourceInstance::Cnf(f)) => encode_3sat(f),
        (ProblemKind::VertexCover, SourceInstance::Graph(g)) => encode_vertex_cover(g, need(k)?),
        (ProblemKind::Mis, SourceInstance::Graph(g)) => encode_mis(g, need(k)?),
        (ProblemKind::Clique, SourceInstance::Graph(g)) => encode_clique(g, need(k)?),
        (ProblemKind::Matching, SourceInstance::Graph(g)) => encode_matching(g, need(k)?),
        (ProblemKind::ExactCover, SourceInstance::Sets(s)) => encode_exact_cover(s),
        (ProblemKind::SetPacking, SourceInstance::Sets(s)) => encode_set_packing(s, need(k)?),
        (ProblemKind::MaxCut, SourceInstance::Graph(g)) => encode_maxcut(g, need(k)?),
        (ProblemKind::DominatingSet, SourceInstance::Graph(g)) => encode_dominating_set(g, need(k)?),
        (ProblemKind::Coloring3, SourceInstance::Graph(g)) => encode_3coloring(g),
        (ProblemKind::SubsetSum, SourceInstance::Raw(r)) => SubsetSumInstance::from_raw(r.clone()),
        _ => Err(Error::Domain(format!("{kind} cannot be built from this instance type"))),
    }
}

/// Clause `j` owns rank `j`; variable `i` owns rank `m + i`.
pub fn encode_3sat(f: &CnfFormula) -> Result<SubsetSumInstance> {
    if f.clauses.is_empty() {
        return Err(Error::Domain("3sat: formula has no clauses".into()));
    }
    encode_3sat_allow_empty(f)
}

/// As [`encode_3sat`] but accepts a clause-free formula, whose instance is
/// one variable-pick pair per variable.
pub(crate) fn encode_3sat_allow_empty(f: &CnfFormula) -> Result<SubsetSumInstance> {
    let (n, m) = (f.num_vars, f.num_clauses());
    let mut weights = Vec::with_capacity(2 * (n + m));
    let mut roles = Vec::with_capacity(2 * (n + m));
    for i in 1..=n {
        let mut pos = Radical::basis(rank(m + i));
        let mut neg = Radical::basis(rank(m + i));
        for (j, clause) in f.clauses.iter().enumerate() {
            for &lit in clause {
                if lit == i as i32 {
                    pos.add_term(rank(j + 1), 1);
                } else if lit == -(i as i32) {
                    neg.add_term(rank(j + 1), 1);
                }
            }
        }
        weights.push(pos);
        roles.push(RoleTag::VarTrue(i));
        weights.push(neg);
        roles.push(RoleTag::VarFalse(i));
    }
    for j in 1..=m {
        for level in 1..=2 {
            weights.push(Radical::basis(rank(j)));
            roles.push(RoleTag::ClauseSlack(j, level));
        }
    }
    let mut target = Radical::zero();
    for i in 1..=n {
        target.add_term(rank(m + i), 1);
    }
    for j in 1..=m {
        target.add_term(rank(j), 3);
    }
    let source = Source {
        kind: ProblemKind::Sat3,
        k: None,
        instance: SourceInstance::Cnf(f.clone()),
    };
    SubsetSumInstance::new(weights, target, roles, source, (n, m), rank(m + n).max(1))
}

/// Weights shared by vertex cover and independent set: edge `j` owns rank
/// `j`, the size counter owns rank `m + 1`.
fn vertex_edge_weights(g: &Graph) -> (Vec<Radical>, Vec<RoleTag>) {
    let m = g.num_edges();
    let mut weights = Vec::new();
    let mut roles = Vec::new();
    for v in 0..g.num_vertices {
        let mut a = Radical::basis(rank(m + 1));
        for j in g.incident(v) {
            a.add_term(rank(j + 1), 1);
        }
        weights.push(a);
        roles.push(RoleTag::VertexPick(v + 1));
    }
    for j in 0..m {
        weights.push(Radical::basis(rank(j + 1)));
        roles.push(RoleTag::EdgeSlack(j + 1));
    }
    (weights, roles)
}

fn graph_source(kind: ProblemKind, g: &Graph, k: Option<usize>) -> Source {
    Source {
        kind,
        k,
        instance: SourceInstance::Graph(g.clone()),
    }
}

pub fn encode_vertex_cover(g: &Graph, k: usize) -> Result<SubsetSumInstance> {
    let kind = ProblemKind::VertexCover;
    undirected(kind, g)?;
    check_k(kind, k, g.num_vertices, "vertex count")?;
    let m = g.num_edges();
    let (weights, roles) = vertex_edge_weights(g);
    let mut target = Radical::term(rank(m + 1), k as i64);
    for j in 1..=m {
        target.add_term(rank(j), 2);
    }
    SubsetSumInstance::new(weights, target, roles, graph_source(kind, g, Some(k)), (g.num_vertices, m), rank(m + 1))
}

pub fn encode_mis(g: &Graph, k: usize) -> Result<SubsetSumInstance> {
    let kind = ProblemKind::Mis;
    undirected(kind, g)?;
    check_k(kind, k, g.num_vertices, "vertex count")?;
    let m = g.num_edges();
    let (weights, roles) = vertex_edge_weights(g);
    let mut target = Radical::term(rank(m + 1), k as i64);
    for j in 1..=m {
        target.add_term(rank(j), 1);
    }
    SubsetSumInstance::new(weights, target, roles, graph_source(kind, g, Some(k)), (g.num_vertices, m), rank(m + 1))
}

/// Vertex `i` owns rank `i`; the pair counter owns rank `n + 1`.
pub fn encode_clique(g: &Graph, k: usize) -> Result<SubsetSumInstance> {
    let kind = ProblemKind::Clique;
    undirected(kind, g)?;
    let n = g.num_vertices;
    check_k(kind, k, n, "vertex count")?;
    let top = rank(n + 1);
    let mut weights = Vec::new();
    let mut roles = Vec::new();
    for v in 1..=n {
        let mut a = Radical::basis(top);
        a.add_term(rank(v), k as i64 - 1);
        weights.push(a);
        roles.push(RoleTag::VertexPick(v));
    }
    for &(u, v) in &g.edges {
        let mut b = Radical::term(top, 2);
        b.add_term(rank(u + 1), -1);
        b.add_term(rank(v + 1), -1);
        weights.push(b);
        roles.push(RoleTag::PairPick(u + 1, v + 1));
    }
    let target = Radical::term(top, (k * k) as i64);
    SubsetSumInstance::new(weights, target, roles, graph_source(kind, g, Some(k)), (n, g.num_edges()), top)
}

pub fn encode_matching(g: &Graph, k: usize) -> Result<SubsetSumInstance> {
    let kind = ProblemKind::Matching;
    undirected(kind, g)?;
    let (n, m) = (g.num_vertices, g.num_edges());
    check_k(kind, k, m, "edge count")?;
    let top = rank(n + 1);
    let mut weights = Vec::new();
    let mut roles = Vec::new();
    for v in 1..=n {
        weights.push(Radical::basis(rank(v)));
        roles.push(RoleTag::ElementUnit(v));
    }
    for &(u, v) in &g.edges {
        let mut b = Radical::basis(top);
        b.add_term(rank(u + 1), 1);
        b.add_term(rank(v + 1), 1);
        weights.push(b);
        roles.push(RoleTag::EdgePick(u + 1, v + 1));
    }
    let mut target = Radical::term(top, k as i64);
    for v in 1..=n {
        target.add_term(rank(v), 1);
    }
    SubsetSumInstance::new(weights, target, roles, graph_source(kind, g, Some(k)), (n, m), top)
}

/// Element `j` owns rank `j`. The cost formula counts subsets.
pub fn encode_exact_cover(s: &SetSystem) -> Result<SubsetSumInstance> {
    let mut weights = Vec::new();
    let mut roles = Vec::new();
    for (i, subset) in s.subsets.iter().enumerate() {
        let mut a = Radical::zero();
        for &e in subset {
            a.add_term(rank(e + 1), 1);
        }
        weights.push(a);
        roles.push(RoleTag::SubsetPick(i + 1));
    }
    let mut target = Radical::zero();
    for e in 1..=s.universe_size {
        target.add_term(rank(e), 1);
    }
    let source = Source {
        kind: ProblemKind::ExactCover,
        k: None,
        instance: SourceInstance::Sets(s.clone()),
    };
    SubsetSumInstance::new(
        weights,
        target,
        roles,
        source,
        (s.subsets.len(), s.universe_size),
        rank(s.universe_size).max(1),
    )
}

/// Element `j` owns rank `j`; the packing counter owns rank `n + 1` where
/// `n` is the universe size.
pub fn encode_set_packing(s: &SetSystem, k: usize) -> Result<SubsetSumInstance> {
    let kind = ProblemKind::SetPacking;
    let n = s.universe_size;
    check_k(kind, k, s.subsets.len(), "subset count")?;
    let top = rank(n + 1);
    let mut weights = Vec::new();
    let mut roles = Vec::new();
    for e in 1..=n {
        weights.push(Radical::basis(rank(e)));
        roles.push(RoleTag::ElementUnit(e));
    }
    for (i, subset) in s.subsets.iter().enumerate() {
        let mut a = Radical::basis(top);
        for &e in subset {
            a.add_term(rank(e + 1), 1);
        }
        weights.push(a);
        roles.push(RoleTag::SubsetPick(i + 1));
    }
    let mut target = Radical::term(top, k as i64);
    for e in 1..=n {
        target.add_term(rank(e), 1);
    }
    let source = Source {
        kind,
        k: Some(k),
        instance: SourceInstance::Sets(s.clone()),
    };
    SubsetSumInstance::new(weights, target, roles, source, (n, s.subsets.len()), top)
}

/// Decides whether some cut has exactly `k` edges. Edge `j` owns rank `j`;
/// the cut counter owns rank `m + 1`.
pub fn encode_maxcut(g: &Graph, k: usize) -> Result<SubsetSumInstance> {
    let kind = ProblemKind::MaxCut;
    undirected(kind, g)?;
    let (n, m) = (g.num_vertices, g.num_edges());
    check_k(kind, k, m, "edge count")?;
    let top = rank(m + 1);
    let mut weights = Vec::new();
    let mut roles = Vec::new();
    for v in 0..n {
        let mut a = Radical::term(top, g.degree(v) as i64);
        for j in g.incident(v) {
            a.add_term(rank(j + 1), 1);
        }
        weights.push(a);
        roles.push(RoleTag::VertexPick(v + 1));
    }
    for j in 1..=m {
        let mut b = Radical::term(rank(j), -2);
        b.add_term(top, -2);
        weights.push(b);
        roles.push(RoleTag::CutBoth(j));
    }
    for j in 1..=m {
        weights.push(Radical::term(rank(j), -1));
        roles.push(RoleTag::CutOne(j));
    }
    let target = Radical::term(top, k as i64);
    SubsetSumInstance::new(weights, target, roles, graph_source(kind, g, Some(k)), (n, m), top)
}

/// Whether some cut has at least `k` edges, with the smallest achieving
/// `k' >= k` and its encoding.
pub fn maxcut_at_least(
    g: &Graph,
    k: usize,
    mut feasible: impl FnMut(&SubsetSumInstance) -> Result<bool>,
) -> Result<Option<(usize, SubsetSumInstance)>> {
    check_k(ProblemKind::MaxCut, k, g.num_edges(), "edge count")?;
    for kk in k..=g.num_edges() {
        let inst = encode_maxcut(g, kk)?;
        if feasible(&inst)? {
            return Ok(Some((kk, inst)));
        }
    }
    Ok(None)
}

/// Vertex `i` owns rank `i`, edge `j` owns rank `n + j`, the size counter
/// owns rank `n + m + 1`.
pub fn encode_dominating_set(g: &Graph, k: usize) -> Result<SubsetSumInstance> {
    let kind = ProblemKind::DominatingSet;
    undirected(kind, g)?;
    let (n, m) = (g.num_vertices, g.num_edges());
    check_k(kind, k, n, "vertex count")?;
    let top = rank(n + m + 1);
    let mut weights = Vec::new();
    let mut roles = Vec::new();
    for v in 0..n {
        let mut a = Radical::basis(rank(v + 1));
        for j in g.incident(v) {
            a.add_term(rank(n + j + 1), 1);
        }
        a.add_term(top, 1);
        weights.push(a);
        roles.push(RoleTag::VertexPick(v + 1));
    }
    for j in 1..=m {
        weights.push(Radical::term(rank(n + j), -2));
        roles.push(RoleTag::DomEdgeBoth(j));
    }
    for (j, &(u, v)) in g.edges.iter().enumerate() {
        let mut c = Radical::term(rank(n + j + 1), -1);
        c.add_term(rank(u + 1), 1);
        c.add_term(rank(v + 1), 1);
        weights.push(c);
        roles.push(RoleTag::DomEdgeOne(j + 1));
    }
    for v in 0..n {
        for level in 1..=g.degree(v) {
            weights.push(Radical::term(rank(v + 1), -(level as i64)));
            roles.push(RoleTag::DomSurplus(v + 1, level));
        }
    }
    let mut target = Radical::term(top, k as i64);
    for v in 1..=n {
        target.add_term(rank(v), 1);
    }
    SubsetSumInstance::new(weights, target, roles, graph_source(kind, g, Some(k)), (n, m), top)
}

/// Vertex `i` owns rank `i`; edge `j` owns ranks `n + 3j − 2 ..= n + 3j`,
/// one per color.
pub fn encode_3coloring(g: &Graph) -> Result<SubsetSumInstance> {
    let kind = ProblemKind::Coloring3;
    undirected(kind, g)?;
    let (n, m) = (g.num_vertices, g.num_edges());
    let edge_rank = |j: usize, c: Color| rank(n + 3 * j + c.index() + 1);
    let mut weights = Vec::new();
    let mut roles = Vec::new();
    for v in 0..n {
        for c in Color::ALL {
            let mut p = Radical::basis(rank(v + 1));
            for j in g.incident(v) {
                p.add_term(edge_rank(j, c), 1);
            }
            weights.push(p);
            roles.push(RoleTag::ColorPick(v + 1, c));
        }
    }
    for j in 0..m {
        for c in Color::ALL {
            weights.push(Radical::basis(edge_rank(j, c)));
            roles.push(RoleTag::EdgeColorSlack(j + 1, c));
        }
    }
    let mut target = Radical::zero();
    for p in 1..=(n + 3 * m) {
        target.add_term(rank(p), 1);
    }
    SubsetSumInstance::new(weights, target, roles, graph_source(kind, g, None), (n, m), rank(n + 3 * m).max(1))
}
