//! Source-problem instances and their text formats.
//!
//! Graph vertices, set elements and job indices are stored 0-based. Every
//! external format (DIMACS, JSON) is 1-based; conversion happens only at the
//! parse and serialize boundary.
//!
//! JSON documents may carry a `"schema": "cavity/v1/<kind>"` field. When it
//! is present it must match the requested kind.

use std::collections::BTreeSet;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::radical::Radical;

pub const SCHEMA_PREFIX: &str = "cavity/v1/";

// ---------------------------------------------------------------------------
// CNF
// ---------------------------------------------------------------------------

/// Conjunction of exactly-three-literal clauses over variables `1..=num_vars`.
/// Literals use the DIMACS sign convention; repeated literals are allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<[i32; 3]>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<[i32; 3]>) -> Result<Self> {
        for (j, clause) in clauses.iter().enumerate() {
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > num_vars {
                    return Err(Error::format(
                        format!("clause {}", j + 1),
                        format!("literal {lit} outside variables 1..={num_vars}"),
                    ));
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// `assignment[i]` is the value of variable `i + 1`.
    pub fn literal_value(lit: i32, assignment: &[bool]) -> bool {
        let v = assignment[lit.unsigned_abs() as usize - 1];
        if lit > 0 {
            v
        } else {
            !v
        }
    }

    /// Number of true literal occurrences in clause `j`.
    pub fn true_literals(&self, j: usize, assignment: &[bool]) -> usize {
        self.clauses[j]
            .iter()
            .filter(|&&l| Self::literal_value(l, assignment))
            .count()
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        (0..self.clauses.len()).all(|j| self.true_literals(j, assignment) > 0)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            out.push_str(&format!("{} {} {} 0\n", c[0], c[1], c[2]));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CnfOptions {
    /// Pad 1- and 2-literal clauses to three literals by repeating the last
    /// literal. Satisfiability is unchanged.
    pub pad_to_3sat: bool,
}

pub fn parse_cnf(text: &str) -> Result<CnfFormula> {
    parse_cnf_with(text, CnfOptions::default())
}

pub fn parse_cnf_with(text: &str, opts: CnfOptions) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut pending: Vec<i32> = Vec::new();
    let mut pending_line = 0;

    let finish = |lits: &mut Vec<i32>, line: usize, clauses: &mut Vec<[i32; 3]>| -> Result<()> {
        let idx = clauses.len() + 1;
        let mut lits = std::mem::take(lits);
        if opts.pad_to_3sat && (lits.len() == 1 || lits.len() == 2) {
            while lits.len() < 3 {
                lits.push(*lits.last().unwrap());
            }
        }
        if lits.len() != 3 {
            return Err(Error::format(
                format!("line {line}"),
                format!("clause {idx} has arity {}, expected exactly 3", lits.len()),
            ));
        }
        clauses.push([lits[0], lits[1], lits[2]]);
        Ok(())
    };

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(Error::format(format!("line {lineno}"), "expected 'p cnf <vars> <clauses>'"));
            }
            let n = parts[2]
                .parse()
                .map_err(|_| Error::format(format!("line {lineno}"), "invalid variable count"))?;
            let m = parts[3]
                .parse()
                .map_err(|_| Error::format(format!("line {lineno}"), "invalid clause count"))?;
            if header.replace((n, m)).is_some() {
                return Err(Error::format(format!("line {lineno}"), "duplicate problem line"));
            }
            continue;
        }
        let Some((n, _)) = header else {
            return Err(Error::format(format!("line {lineno}"), "clause before problem line"));
        };
        for tok in line.split_whitespace() {
            let lit: i32 = tok
                .parse()
                .map_err(|_| Error::format(format!("line {lineno}"), format!("invalid literal {tok:?}")))?;
            if lit == 0 {
                finish(&mut pending, pending_line, &mut clauses)?;
                continue;
            }
            if lit.unsigned_abs() as usize > n {
                return Err(Error::format(
                    format!("line {lineno}"),
                    format!("variable index {} out of range 1..={n}", lit.unsigned_abs()),
                ));
            }
            if pending.is_empty() {
                pending_line = lineno;
            }
            pending.push(lit);
        }
    }
    if !pending.is_empty() {
        finish(&mut pending, pending_line, &mut clauses)?;
    }
    let (n, m) = header.ok_or_else(|| Error::format("line 1", "missing 'p cnf' problem line"))?;
    if clauses.len() != m {
        return Err(Error::format(
            "end of input",
            format!("problem line declares {m} clauses, found {}", clauses.len()),
        ));
    }
    CnfFormula::new(n, clauses)
}

// ---------------------------------------------------------------------------
// Graphs
// ---------------------------------------------------------------------------

/// Simple graph on vertices `0..num_vertices`. Undirected edges are stored
/// with `u < v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub directed: bool,
    /// One weight per edge, when present.
    pub weights: Option<Vec<BigRational>>,
}

impl Graph {
    pub fn new(
        num_vertices: usize,
        edges: Vec<(usize, usize)>,
        directed: bool,
        weights: Option<Vec<BigRational>>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut norm = Vec::with_capacity(edges.len());
        for (j, &(u, v)) in edges.iter().enumerate() {
            let loc = format!("edge {}", j + 1);
            if u >= num_vertices || v >= num_vertices {
                return Err(Error::format(loc, format!("vertex outside 1..={num_vertices}")));
            }
            if u == v {
                return Err(Error::format(loc, format!("self-loop on vertex {}", u + 1)));
            }
            let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
            if !seen.insert(key) {
                return Err(Error::format(
                    loc,
                    format!("duplicate edge ({}, {})", key.0 + 1, key.1 + 1),
                ));
            }
            norm.push(key);
        }
        if let Some(w) = &weights {
            if w.len() != norm.len() {
                return Err(Error::format("weights", "one weight per edge required"));
            }
        }
        Ok(Graph {
            num_vertices,
            edges: norm,
            directed,
            weights,
        })
    }

    pub fn undirected(num_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Graph::new(num_vertices, edges.to_vec(), false, None)
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    /// Indices of edges incident to `v`.
    pub fn incident(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, &(a, b))| a == v || b == v)
            .map(|(j, _)| j)
    }

    /// Arc `u → v` (or edge `{u, v}` when undirected).
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if self.directed {
            self.edges.contains(&(u, v))
        } else {
            self.edges.contains(&(u.min(v), u.max(v)))
        }
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let key = if self.directed { (u, v) } else { (u.min(v), u.max(v)) };
        self.edges.iter().position(|&e| e == key)
    }

    /// Every unordered pair joined (undirected) or every ordered pair (directed).
    pub fn is_complete(&self) -> bool {
        let n = self.num_vertices;
        let pairs = n * n.saturating_sub(1);
        if self.directed {
            self.edges.len() == pairs
        } else {
            self.edges.len() == pairs / 2
        }
    }

    pub fn weight(&self, j: usize) -> BigRational {
        self.weights
            .as_ref()
            .map(|w| w[j].clone())
            .unwrap_or_else(BigRational::one)
    }

    pub fn to_dimacs(&self) -> String {
        let tag = if self.directed { 'a' } else { 'e' };
        let mut out = format!("p edge {} {}\n", self.num_vertices, self.edges.len());
        for (j, &(u, v)) in self.edges.iter().enumerate() {
            match &self.weights {
                Some(w) => out.push_str(&format!("{tag} {} {} {}\n", u + 1, v + 1, w[j])),
                None => out.push_str(&format!("{tag} {} {}\n", u + 1, v + 1)),
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("schema".into(), json!(format!("{SCHEMA_PREFIX}graph")));
        obj.insert("n".into(), json!(self.num_vertices));
        obj.insert(
            "edges".into(),
            json!(self.edges.iter().map(|&(u, v)| [u + 1, v + 1]).collect::<Vec<_>>()),
        );
        obj.insert("directed".into(), json!(self.directed));
        if let Some(w) = &self.weights {
            obj.insert("weights".into(), Value::Array(w.iter().map(rational_to_json).collect()));
        }
        Value::Object(obj)
    }
}

/// Parses DIMACS edge format (`p edge n m`, `e u v [w]`, or `a u v [w]` for
/// arcs) or the JSON graph schema, detected by a leading `{`.
pub fn parse_graph(text: &str) -> Result<Graph> {
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::format("", e.to_string()))?;
        return graph_from_json(&v);
    }
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut weights: Vec<BigRational> = Vec::new();
    let mut directed: Option<bool> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let loc = || format!("line {lineno}");
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts[0] {
            "p" => {
                if parts.len() != 4 || !matches!(parts[1], "edge" | "col" | "sp") {
                    return Err(Error::format(loc(), "expected 'p edge <vertices> <edges>'"));
                }
                let n = parts[2].parse().map_err(|_| Error::format(loc(), "invalid vertex count"))?;
                let m = parts[3].parse().map_err(|_| Error::format(loc(), "invalid edge count"))?;
                if header.replace((n, m)).is_some() {
                    return Err(Error::format(loc(), "duplicate problem line"));
                }
            }
            tag @ ("e" | "a") => {
                let (n, _) = header.ok_or_else(|| Error::format(loc(), "edge before problem line"))?;
                let arc = tag == "a";
                if *directed.get_or_insert(arc) != arc {
                    return Err(Error::format(loc(), "cannot mix 'e' edges and 'a' arcs"));
                }
                if parts.len() != 3 && parts.len() != 4 {
                    return Err(Error::format(loc(), "expected '<e|a> u v [weight]'"));
                }
                let vertex = |s: &str| -> Result<usize> {
                    let v: usize = s.parse().map_err(|_| Error::format(loc(), format!("invalid vertex {s:?}")))?;
                    if v == 0 || v > n {
                        return Err(Error::format(loc(), format!("vertex {v} outside 1..={n}")));
                    }
                    Ok(v - 1)
                };
                let (u, v) = (vertex(parts[1])?, vertex(parts[2])?);
                if u == v {
                    return Err(Error::format(loc(), format!("self-loop on vertex {}", u + 1)));
                }
                if parts.len() == 4 {
                    if weights.len() != edges.len() {
                        return Err(Error::format(loc(), "either all edges carry weights or none do"));
                    }
                    let w = parse_rational_text(parts[3])
                        .ok_or_else(|| Error::format(loc(), format!("invalid weight {:?}", parts[3])))?;
                    weights.push(w);
                } else if !weights.is_empty() {
                    return Err(Error::format(loc(), "either all edges carry weights or none do"));
                }
                edges.push(((u, v), lineno));
            }
            other => return Err(Error::format(loc(), format!("unknown line type {other:?}"))),
        }
    }
    let (n, m) = header.ok_or_else(|| Error::format("line 1", "missing 'p edge' problem line"))?;
    if edges.len() != m {
        return Err(Error::format(
            "end of input",
            format!("problem line declares {m} edges, found {}", edges.len()),
        ));
    }
    // Re-run validation with line numbers for duplicate detection.
    let directed = directed.unwrap_or(false);
    let mut seen = BTreeSet::new();
    for &((u, v), lineno) in &edges {
        let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
        if !seen.insert(key) {
            return Err(Error::format(
                format!("line {lineno}"),
                format!("duplicate edge ({}, {})", key.0 + 1, key.1 + 1),
            ));
        }
    }
    let weights = if weights.is_empty() { None } else { Some(weights) };
    Graph::new(n, edges.into_iter().map(|(e, _)| e).collect(), directed, weights)
}

fn graph_from_json(v: &Value) -> Result<Graph> {
    let obj = as_object(v, "")?;
    check_schema(obj, "graph")?;
    let n = get_usize(obj, "", "n")?;
    let edges_v = get_array(obj, "", "edges")?;
    let mut edges = Vec::with_capacity(edges_v.len());
    for (j, e) in edges_v.iter().enumerate() {
        let path = format!("/edges/{j}");
        let pair = e
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::format(path.clone(), "expected [u, v]"))?;
        let mut ends = [0usize; 2];
        for (t, x) in pair.iter().enumerate() {
            let p = format!("{path}/{t}");
            let val = x.as_u64().ok_or_else(|| Error::format(p.clone(), "expected positive integer"))? as usize;
            if val == 0 || val > n {
                return Err(Error::format(p, format!("vertex {val} outside 1..={n}")));
            }
            ends[t] = val - 1;
        }
        if ends[0] == ends[1] {
            return Err(Error::format(path, format!("self-loop on vertex {}", ends[0] + 1)));
        }
        edges.push((ends[0], ends[1]));
    }
    let directed = match obj.get("directed") {
        None => false,
        Some(b) => b.as_bool().ok_or_else(|| Error::format("/directed", "expected boolean"))?,
    };
    let weights = match obj.get("weights") {
        None | Some(Value::Null) => None,
        Some(w) => {
            let arr = w.as_array().ok_or_else(|| Error::format("/weights", "expected array"))?;
            if arr.len() != edges.len() {
                return Err(Error::format("/weights", "one weight per edge required"));
            }
            Some(
                arr.iter()
                    .enumerate()
                    .map(|(j, x)| rational_from_json(x, &format!("/weights/{j}")))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
    };
    let mut seen = BTreeSet::new();
    for (j, &(u, v)) in edges.iter().enumerate() {
        let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
        if !seen.insert(key) {
            return Err(Error::format(
                format!("/edges/{j}"),
                format!("duplicate edge ({}, {})", key.0 + 1, key.1 + 1),
            ));
        }
    }
    Graph::new(n, edges, directed, weights)
}

// ---------------------------------------------------------------------------
// Set systems, knapsack, BILP, job sequencing
// ---------------------------------------------------------------------------

/// Collection of subsets of the universe `0..universe_size`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetSystem {
    pub universe_size: usize,
    pub subsets: Vec<Vec<usize>>,
}

impl SetSystem {
    /// Elements within a subset are sorted; a repeated element is rejected.
    pub fn new(universe_size: usize, subsets: Vec<Vec<usize>>) -> Result<Self> {
        let mut out = Vec::with_capacity(subsets.len());
        for (i, s) in subsets.into_iter().enumerate() {
            let mut sorted = s.clone();
            sorted.sort_unstable();
            for (t, &e) in sorted.iter().enumerate() {
                if e >= universe_size {
                    return Err(Error::format(
                        format!("/subsets/{i}"),
                        format!("element {} outside 1..={universe_size}", e + 1),
                    ));
                }
                if t > 0 && sorted[t - 1] == e {
                    return Err(Error::format(
                        format!("/subsets/{i}"),
                        format!("element {} repeated", e + 1),
                    ));
                }
            }
            out.push(sorted);
        }
        Ok(SetSystem {
            universe_size,
            subsets: out,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": format!("{SCHEMA_PREFIX}set-system"),
            "universe": self.universe_size,
            "subsets": self.subsets.iter().map(|s| s.iter().map(|e| e + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackInstance {
    pub weights: Vec<u64>,
    pub values: Vec<u64>,
    pub capacity: u64,
}

impl KnapsackInstance {
    pub fn new(weights: Vec<u64>, values: Vec<u64>, capacity: u64) -> Result<Self> {
        if weights.len() != values.len() {
            return Err(Error::format("/values", "weights and values differ in length"));
        }
        if capacity == 0 {
            return Err(Error::format("/capacity", "capacity must be >= 1"));
        }
        for (i, &w) in weights.iter().enumerate() {
            if w == 0 {
                return Err(Error::format(format!("/weights/{i}"), "weights must be positive"));
            }
        }
        for (i, &v) in values.iter().enumerate() {
            if v == 0 {
                return Err(Error::format(format!("/values/{i}"), "values must be positive"));
            }
        }
        Ok(KnapsackInstance {
            weights,
            values,
            capacity,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": format!("{SCHEMA_PREFIX}knapsack"),
            "weights": self.weights,
            "values": self.values,
            "capacity": self.capacity,
        })
    }
}

/// Binary integer linear program: optimize `c·x` subject to `A x = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilpInstance {
    pub a: Vec<Vec<i64>>,
    pub b: Vec<i64>,
    pub c: Vec<i64>,
}

impl BilpInstance {
    pub fn new(a: Vec<Vec<i64>>, b: Vec<i64>, c: Vec<i64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::format("/b", format!("expected {} entries, one per row of A", a.len())));
        }
        for (j, row) in a.iter().enumerate() {
            if row.len() != c.len() {
                return Err(Error::format(
                    format!("/A/{j}"),
                    format!("expected {} columns to match c", c.len()),
                ));
            }
        }
        Ok(BilpInstance { a, b, c })
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    pub fn is_feasible(&self, x: &[bool]) -> bool {
        self.a.iter().zip(&self.b).all(|(row, &bj)| {
            row.iter().zip(x).map(|(&a, &xi)| if xi { a } else { 0 }).sum::<i64>() == bj
        })
    }

    pub fn objective(&self, x: &[bool]) -> i64 {
        self.c.iter().zip(x).map(|(&c, &xi)| if xi { c } else { 0 }).sum()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": format!("{SCHEMA_PREFIX}bilp"),
            "A": self.a,
            "b": self.b,
            "c": self.c,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobSequencingInstance {
    pub durations: Vec<u64>,
    pub machines: usize,
    pub deadline: u64,
}

impl JobSequencingInstance {
    pub fn new(durations: Vec<u64>, machines: usize, deadline: u64) -> Result<Self> {
        if machines == 0 {
            return Err(Error::format("/machines", "at least one machine required"));
        }
        if deadline == 0 {
            return Err(Error::format("/deadline", "deadline must be positive"));
        }
        for (i, &t) in durations.iter().enumerate() {
            if t == 0 {
                return Err(Error::format(format!("/durations/{i}"), "durations must be positive"));
            }
            if t > deadline {
                return Err(Error::format(
                    format!("/durations/{i}"),
                    format!("job {} alone exceeds the deadline {deadline}", i + 1),
                ));
            }
        }
        Ok(JobSequencingInstance {
            durations,
            machines,
            deadline,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": format!("{SCHEMA_PREFIX}jobseq"),
            "durations": self.durations,
            "machines": self.machines,
            "deadline": self.deadline,
        })
    }
}

// ---------------------------------------------------------------------------
// QUBO
// ---------------------------------------------------------------------------

/// `f(x) = Σ_{i≠j} Q_ij x_i x_j + Σ_i l_i x_i + offset` over binary `x`.
///
/// `quadratic` is symmetric with a zero diagonal: diagonal entries are folded
/// into `linear` at construction because `x_i² = x_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuboInstance {
    pub n: usize,
    pub quadratic: Vec<Vec<BigRational>>,
    pub linear: Vec<BigRational>,
    pub offset: BigRational,
}

impl QuboInstance {
    pub fn new(quadratic: Vec<Vec<BigRational>>, linear: Option<Vec<BigRational>>) -> Result<Self> {
        let n = quadratic.len();
        for (i, row) in quadratic.iter().enumerate() {
            if row.len() != n {
                return Err(Error::format(format!("/Q/{i}"), format!("expected {n} entries")));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if quadratic[i][j] != quadratic[j][i] {
                    return Err(Error::format(format!("/Q/{i}/{j}"), "matrix is not symmetric"));
                }
            }
        }
        let mut linear = linear.unwrap_or_else(|| vec![BigRational::zero(); n]);
        if linear.len() != n {
            return Err(Error::format("/linear", format!("expected {n} entries")));
        }
        let mut q = quadratic;
        for i in 0..n {
            let d = std::mem::replace(&mut q[i][i], BigRational::zero());
            linear[i] += d;
        }
        Ok(QuboInstance {
            n,
            quadratic: q,
            linear,
            offset: BigRational::zero(),
        })
    }

    pub fn zeros(n: usize) -> Self {
        QuboInstance {
            n,
            quadratic: vec![vec![BigRational::zero(); n]; n],
            linear: vec![BigRational::zero(); n],
            offset: BigRational::zero(),
        }
    }

    /// Adds `c·x_i·x_j`; for `i == j` the term is linear.
    pub fn add_pair(&mut self, i: usize, j: usize, c: &BigRational) {
        if i == j {
            self.linear[i] += c;
        } else {
            let half = c / BigRational::from_integer(2.into());
            self.quadratic[i][j] += &half;
            self.quadratic[j][i] += &half;
        }
    }

    /// Adds `scale · (constant + Σ coeffs_k x_k)²`.
    pub fn add_squared(&mut self, scale: &BigRational, constant: &BigRational, coeffs: &[(usize, BigRational)]) {
        self.offset += scale * constant * constant;
        for (a, (i, ci)) in coeffs.iter().enumerate() {
            self.linear[*i] += scale * BigRational::from_integer(2.into()) * constant * ci;
            for (j, cj) in coeffs.iter().skip(a) {
                if i == j {
                    self.linear[*i] += scale * ci * cj;
                } else {
                    let t = scale * ci * cj * BigRational::from_integer(2.into());
                    self.add_pair(*i, *j, &t);
                }
            }
        }
    }

    pub fn evaluate(&self, x: &[bool]) -> BigRational {
        let mut e = self.offset.clone();
        for i in 0..self.n {
            if !x[i] {
                continue;
            }
            e += &self.linear[i];
            for j in 0..self.n {
                if x[j] && j != i {
                    e += &self.quadratic[i][j];
                }
            }
        }
        e
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("schema".into(), json!(format!("{SCHEMA_PREFIX}qubo")));
        obj.insert("n".into(), json!(self.n));
        obj.insert(
            "Q".into(),
            Value::Array(
                self.quadratic
                    .iter()
                    .map(|row| Value::Array(row.iter().map(rational_to_json).collect()))
                    .collect(),
            ),
        );
        obj.insert("linear".into(), Value::Array(self.linear.iter().map(rational_to_json).collect()));
        if !self.offset.is_zero() {
            obj.insert("offset".into(), rational_to_json(&self.offset));
        }
        Value::Object(obj)
    }
}

// ---------------------------------------------------------------------------
// Raw subset sum
// ---------------------------------------------------------------------------

/// A subset-sum problem given directly as radical weights and a target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawSubsetSum {
    pub weights: Vec<Radical>,
    pub target: Radical,
}

impl RawSubsetSum {
    pub fn to_json(&self) -> Value {
        json!({
            "schema": format!("{SCHEMA_PREFIX}subset-sum"),
            "weights": self.weights.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "target": self.target.to_string(),
        })
    }
}

// ---------------------------------------------------------------------------
// JSON dispatch
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    SetSystem,
    Knapsack,
    Bilp,
    JobSeq,
    Qubo,
    SubsetSum,
}

impl InstanceKind {
    pub fn tag(self) -> &'static str {
        match self {
            InstanceKind::SetSystem => "set-system",
            InstanceKind::Knapsack => "knapsack",
            InstanceKind::Bilp => "bilp",
            InstanceKind::JobSeq => "jobseq",
            InstanceKind::Qubo => "qubo",
            InstanceKind::SubsetSum => "subset-sum",
        }
    }
}

impl FromStr for InstanceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "set-system" => InstanceKind::SetSystem,
            "knapsack" => InstanceKind::Knapsack,
            "bilp" => InstanceKind::Bilp,
            "jobseq" => InstanceKind::JobSeq,
            "qubo" => InstanceKind::Qubo,
            "subset-sum" => InstanceKind::SubsetSum,
            other => return Err(Error::Domain(format!("unknown instance kind {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    SetSystem(SetSystem),
    Knapsack(KnapsackInstance),
    Bilp(BilpInstance),
    JobSeq(JobSequencingInstance),
    Qubo(QuboInstance),
    SubsetSum(RawSubsetSum),
}

impl Instance {
    pub fn to_json(&self) -> Value {
        match self {
            Instance::SetSystem(x) => x.to_json(),
            Instance::Knapsack(x) => x.to_json(),
            Instance::Bilp(x) => x.to_json(),
            Instance::JobSeq(x) => x.to_json(),
            Instance::Qubo(x) => x.to_json(),
            Instance::SubsetSum(x) => x.to_json(),
        }
    }
}

pub fn parse_json_instance(text: &str, kind: InstanceKind) -> Result<Instance> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::format("", e.to_string()))?;
    instance_from_json(&v, kind)
}

pub fn instance_from_json(v: &Value, kind: InstanceKind) -> Result<Instance> {
    let obj = as_object(v, "")?;
    check_schema(obj, kind.tag())?;
    Ok(match kind {
        InstanceKind::SetSystem => {
            let universe = get_usize(obj, "", "universe")?;
            let subsets = get_array(obj, "", "subsets")?;
            let mut out = Vec::with_capacity(subsets.len());
            for (i, s) in subsets.iter().enumerate() {
                let path = format!("/subsets/{i}");
                let arr = s.as_array().ok_or_else(|| Error::format(path.clone(), "expected array"))?;
                let mut elems = Vec::with_capacity(arr.len());
                for (t, e) in arr.iter().enumerate() {
                    let p = format!("{path}/{t}");
                    let e = e.as_u64().ok_or_else(|| Error::format(p.clone(), "expected positive integer"))? as usize;
                    if e == 0 || e > universe {
                        return Err(Error::format(p, format!("element {e} outside 1..={universe}")));
                    }
                    elems.push(e - 1);
                }
                out.push(elems);
            }
            Instance::SetSystem(SetSystem::new(universe, out)?)
        }
        InstanceKind::Knapsack => Instance::Knapsack(KnapsackInstance::new(
            get_u64_vec(obj, "weights")?,
            get_u64_vec(obj, "values")?,
            get_usize(obj, "", "capacity")? as u64,
        )?),
        InstanceKind::Bilp => {
            let rows = get_array(obj, "", "A")?;
            let a = rows
                .iter()
                .enumerate()
                .map(|(j, r)| i64_vec(r, &format!("/A/{j}")))
                .collect::<Result<Vec<_>>>()?;
            let b = i64_vec(obj.get("b").ok_or_else(|| Error::format("/b", "missing field"))?, "/b")?;
            let c = i64_vec(obj.get("c").ok_or_else(|| Error::format("/c", "missing field"))?, "/c")?;
            Instance::Bilp(BilpInstance::new(a, b, c)?)
        }
        InstanceKind::JobSeq => Instance::JobSeq(JobSequencingInstance::new(
            get_u64_vec(obj, "durations")?,
            get_usize(obj, "", "machines")?,
            get_usize(obj, "", "deadline")? as u64,
        )?),
        InstanceKind::Qubo => {
            let n = get_usize(obj, "", "n")?;
            let rows = get_array(obj, "", "Q")?;
            if rows.len() != n {
                return Err(Error::format("/Q", format!("expected {n} rows")));
            }
            let mut q = Vec::with_capacity(n);
            for (i, r) in rows.iter().enumerate() {
                let path = format!("/Q/{i}");
                let arr = r.as_array().ok_or_else(|| Error::format(path.clone(), "expected array"))?;
                if arr.len() != n {
                    return Err(Error::format(path, format!("expected {n} entries")));
                }
                q.push(
                    arr.iter()
                        .enumerate()
                        .map(|(j, x)| rational_from_json(x, &format!("/Q/{i}/{j}")))
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            let linear = match obj.get("linear") {
                None | Some(Value::Null) => None,
                Some(l) => {
                    let arr = l.as_array().ok_or_else(|| Error::format("/linear", "expected array"))?;
                    Some(
                        arr.iter()
                            .enumerate()
                            .map(|(j, x)| rational_from_json(x, &format!("/linear/{j}")))
                            .collect::<Result<Vec<_>>>()?,
                    )
                }
            };
            let mut inst = QuboInstance::new(q, linear)?;
            if let Some(off) = obj.get("offset") {
                inst.offset = rational_from_json(off, "/offset")?;
            }
            Instance::Qubo(inst)
        }
        InstanceKind::SubsetSum => {
            let ws = get_array(obj, "", "weights")?;
            let weights = ws
                .iter()
                .enumerate()
                .map(|(k, w)| radical_from_json(w, &format!("/weights/{k}")))
                .collect::<Result<Vec<_>>>()?;
            let target = radical_from_json(
                obj.get("target").ok_or_else(|| Error::format("/target", "missing field"))?,
                "/target",
            )?;
            Instance::SubsetSum(RawSubsetSum { weights, target })
        }
    })
}

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::format(path, "expected object"))
}

fn check_schema(obj: &Map<String, Value>, kind: &str) -> Result<()> {
    if let Some(s) = obj.get("schema") {
        let expected = format!("{SCHEMA_PREFIX}{kind}");
        if s.as_str() != Some(expected.as_str()) {
            return Err(Error::format("/schema", format!("expected {expected:?}")));
        }
    }
    Ok(())
}

fn get_usize(obj: &Map<String, Value>, base: &str, key: &str) -> Result<usize> {
    let path = format!("{base}/{key}");
    obj.get(key)
        .ok_or_else(|| Error::format(path.clone(), "missing field"))?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::format(path, "expected nonnegative integer"))
}

fn get_array<'a>(obj: &'a Map<String, Value>, base: &str, key: &str) -> Result<&'a Vec<Value>> {
    let path = format!("{base}/{key}");
    obj.get(key)
        .ok_or_else(|| Error::format(path.clone(), "missing field"))?
        .as_array()
        .ok_or_else(|| Error::format(path, "expected array"))
}

fn get_u64_vec(obj: &Map<String, Value>, key: &str) -> Result<Vec<u64>> {
    get_array(obj, "", key)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_u64()
                .ok_or_else(|| Error::format(format!("/{key}/{i}"), "expected nonnegative integer"))
        })
        .collect()
}

fn i64_vec(v: &Value, path: &str) -> Result<Vec<i64>> {
    v.as_array()
        .ok_or_else(|| Error::format(path, "expected array"))?
        .iter()
        .enumerate()
        .map(|(i, x)| x.as_i64().ok_or_else(|| Error::format(format!("{path}/{i}"), "expected integer")))
        .collect()
}

fn radical_from_json(v: &Value, path: &str) -> Result<Radical> {
    let s = v.as_str().ok_or_else(|| Error::format(path, "expected radical string like \"[(1,3),(4,-2)]\""))?;
    s.parse().map_err(|e: Error| Error::format(path, e.to_string()))
}

/// Rationals are JSON integers, decimal numbers (converted exactly), or
/// strings `"p/q"`.
pub fn rational_from_json(v: &Value, path: &str) -> Result<BigRational> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return Err(Error::format(path, "expected number or \"p/q\" string")),
    };
    parse_rational_text(&text).ok_or_else(|| Error::format(path, format!("invalid rational {text:?}")))
}

pub fn rational_to_json(r: &BigRational) -> Value {
    if r.is_integer() {
        if let Some(i) = r.to_integer().to_i64() {
            return json!(i);
        }
    }
    Value::String(r.to_string())
}

/// Parses `"p/q"`, an integer, or a decimal such as `"0.25"` or `"1e-3"`.
pub fn parse_rational_text(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(all * ten.pow(scale as u32))
    } else {
        BigRational::new(all, ten.pow((-scale) as u32))
    };
    if neg {
        r = -r;
    }
    Some(r)
}
