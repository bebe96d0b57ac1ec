//! Linear-overhead encodings of NP-complete decision problems as subset sum
//! over radicals.
//!
//! Every encoder tags each constructed weight with a [`RoleTag`] naming the
//! object it stands for (a literal, a vertex, a slack unit …). Decoding a
//! feasible subset and forward-mapping a native solution are both driven by
//! those tags.

mod decode;
mod encode;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::instances::{instance_from_json, parse_cnf, parse_graph, CnfFormula, Graph, Instance, InstanceKind, RawSubsetSum, SetSystem};
use crate::radical::Radical;

pub use decode::{decode, forward_map, native_check, DecodedSolution, Solution};
pub use encode::{
    encode, encode_3coloring, encode_3sat, encode_clique, encode_dominating_set, encode_exact_cover,
    encode_matching, encode_maxcut, encode_mis, encode_set_packing, encode_vertex_cover, maxcut_at_least,
};
pub(crate) use encode::encode_3sat_allow_empty;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Green,
    Blue,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::Red, Color::Green, Color::Blue];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(c: usize) -> Color {
        Color::ALL[c]
    }
}

/// Semantic identity of one subset-sum weight. Indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RoleTag {
    VarTrue(usize),
    VarFalse(usize),
    ClauseSlack(usize, u8),
    VertexPick(usize),
    EdgeSlack(usize),
    EdgePick(usize, usize),
    PairPick(usize, usize),
    SubsetPick(usize),
    ElementUnit(usize),
    CutBoth(usize),
    CutOne(usize),
    DomEdgeBoth(usize),
    DomEdgeOne(usize),
    DomSurplus(usize, usize),
    ColorPick(usize, Color),
    EdgeColorSlack(usize, Color),
    /// A weight of a subset-sum instance given directly.
    Item(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    #[serde(rename = "3sat")]
    Sat3,
    #[serde(rename = "vertex-cover")]
    VertexCover,
    #[serde(rename = "mis")]
    Mis,
    #[serde(rename = "clique")]
    Clique,
    #[serde(rename = "matching")]
    Matching,
    #[serde(rename = "exact-cover")]
    ExactCover,
    #[serde(rename = "set-packing")]
    SetPacking,
    #[serde(rename = "maxcut")]
    MaxCut,
    #[serde(rename = "dominating-set")]
    DominatingSet,
    #[serde(rename = "3coloring")]
    Coloring3,
    #[serde(rename = "subset-sum")]
    SubsetSum,
}

impl ProblemKind {
    pub const ENCODERS: [ProblemKind; 10] = [
        ProblemKind::Sat3,
        ProblemKind::VertexCover,
        ProblemKind::Mis,
        ProblemKind::Clique,
        ProblemKind::Matching,
        ProblemKind::ExactCover,
        ProblemKind::SetPacking,
        ProblemKind::MaxCut,
        ProblemKind::DominatingSet,
        ProblemKind::Coloring3,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ProblemKind::Sat3 => "3sat",
            ProblemKind::VertexCover => "vertex-cover",
            ProblemKind::Mis => "mis",
            ProblemKind::Clique => "clique",
            ProblemKind::Matching => "matching",
            ProblemKind::ExactCover => "exact-cover",
            ProblemKind::SetPacking => "set-packing",
            ProblemKind::MaxCut => "maxcut",
            ProblemKind::DominatingSet => "dominating-set",
            ProblemKind::Coloring3 => "3coloring",
            ProblemKind::SubsetSum => "subset-sum",
        }
    }

    /// Whether the decision form takes a size parameter `k`.
    pub fn needs_k(self) -> bool {
        !matches!(
            self,
            ProblemKind::Sat3 | ProblemKind::ExactCover | ProblemKind::Coloring3 | ProblemKind::SubsetSum
        )
    }

    pub fn takes_graph(self) -> bool {
        matches!(
            self,
            ProblemKind::VertexCover
                | ProblemKind::Mis
                | ProblemKind::Clique
                | ProblemKind::Matching
                | ProblemKind::MaxCut
                | ProblemKind::DominatingSet
                | ProblemKind::Coloring3
        )
    }

    /// Encoding-cost formula, in terms of the instance's own `n` and `m`.
    pub fn cost_formula(self) -> &'static str {
        match self {
            ProblemKind::Sat3 => "2(n+m)",
            ProblemKind::VertexCover
            | ProblemKind::Mis
            | ProblemKind::Clique
            | ProblemKind::Matching
            | ProblemKind::SetPacking => "n+m",
            ProblemKind::ExactCover => "n",
            ProblemKind::MaxCut => "n+2m",
            ProblemKind::DominatingSet => "n+4m",
            ProblemKind::Coloring3 => "3(n+m)",
            ProblemKind::SubsetSum => "n",
        }
    }

    pub fn cost(self, n: usize, m: usize) -> usize {
        match self {
            ProblemKind::Sat3 => 2 * (n + m),
            ProblemKind::VertexCover
            | ProblemKind::Mis
            | ProblemKind::Clique
            | ProblemKind::Matching
            | ProblemKind::SetPacking => n + m,
            ProblemKind::ExactCover | ProblemKind::SubsetSum => n,
            ProblemKind::MaxCut => n + 2 * m,
            ProblemKind::DominatingSet => n + 4 * m,
            ProblemKind::Coloring3 => 3 * (n + m),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "3sat" => ProblemKind::Sat3,
            "vertex-cover" | "vc" => ProblemKind::VertexCover,
            "mis" | "independent-set" => ProblemKind::Mis,
            "clique" => ProblemKind::Clique,
            "matching" => ProblemKind::Matching,
            "exact-cover" => ProblemKind::ExactCover,
            "set-packing" => ProblemKind::SetPacking,
            "maxcut" => ProblemKind::MaxCut,
            "dominating-set" => ProblemKind::DominatingSet,
            "3coloring" | "3-coloring" => ProblemKind::Coloring3,
            "subset-sum" => ProblemKind::SubsetSum,
            other => return Err(Error::Domain(format!("unknown problem kind {other:?}"))),
        })
    }
}

/// The original instance an encoding was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SourceInstance {
    Cnf(CnfFormula),
    Graph(Graph),
    Sets(SetSystem),
    Raw(RawSubsetSum),
}

impl SourceInstance {
    pub fn to_json(&self) -> Value {
        match self {
            SourceInstance::Cnf(f) => json!({ "dimacs": f.to_dimacs() }),
            SourceInstance::Graph(g) => g.to_json(),
            SourceInstance::Sets(s) => s.to_json(),
            SourceInstance::Raw(r) => r.to_json(),
        }
    }
}

impl SourceInstance {
    /// Inverse of [`SourceInstance::to_json`] for an instance of `kind`.
    pub fn from_json(kind: ProblemKind, v: &Value) -> Result<Self> {
        Ok(match kind {
            ProblemKind::Sat3 => {
                let text = v
                    .get("dimacs")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::format("/source/dimacs", "missing DIMACS text"))?;
                SourceInstance::Cnf(parse_cnf(text)?)
            }
            k if k.takes_graph() => SourceInstance::Graph(parse_graph(&v.to_string())?),
            ProblemKind::ExactCover | ProblemKind::SetPacking => match instance_from_json(v, InstanceKind::SetSystem)? {
                Instance::SetSystem(s) => SourceInstance::Sets(s),
                _ => unreachable!("kind selects the variant"),
            },
            _ => match instance_from_json(v, InstanceKind::SubsetSum)? {
                Instance::SubsetSum(r) => SourceInstance::Raw(r),
                _ => unreachable!("kind selects the variant"),
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Source {
    pub kind: ProblemKind,
    pub k: Option<usize>,
    pub instance: SourceInstance,
}

/// Expected versus emitted weight count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CostAudit {
    pub formula: &'static str,
    pub n: usize,
    pub m: usize,
    pub expected: usize,
    pub actual: usize,
}

impl CostAudit {
    pub fn holds(&self) -> bool {
        self.expected == self.actual
    }
}

impl fmt::Display for CostAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={} (n={}, m={}), emitted {}", self.formula, self.expected, self.n, self.m, self.actual)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetSumInstance {
    pub weights: Vec<Radical>,
    pub target: Radical,
    pub roles: Vec<RoleTag>,
    pub source: Source,
    pub audit: CostAudit,
    /// Every rank used by a weight or the target lies in `1..=rank_bound`.
    pub rank_bound: u32,
}

impl SubsetSumInstance {
    /// Checks the structural invariants: one role per weight, the cost
    /// formula and the rank window.
    pub fn new(
        weights: Vec<Radical>,
        target: Radical,
        roles: Vec<RoleTag>,
        source: Source,
        (n, m): (usize, usize),
        rank_bound: u32,
    ) -> Result<Self> {
        if weights.len() != roles.len() {
            return Err(Error::Invariant(format!(
                "{} weights but {} role tags",
                weights.len(),
                roles.len()
            )));
        }
        let kind = source.kind;
        let audit = CostAudit {
            formula: kind.cost_formula(),
            n,
            m,
            expected: kind.cost(n, m),
            actual: weights.len(),
        };
        if !audit.holds() {
            return Err(Error::Invariant(format!("{kind}: cost audit failed: {audit}")));
        }
        for (w, role) in weights.iter().zip(&roles) {
            if let Some(p) = w.ranks().find(|&p| p > rank_bound) {
                return Err(Error::Invariant(format!("{role:?} uses rank {p} beyond window {rank_bound}")));
            }
        }
        // A target rank carried by no weight is legal: it arises for exact
        // cover with an element no subset contains, and means infeasible.
        if let Some(p) = target.ranks().find(|&p| p > rank_bound) {
            return Err(Error::Invariant(format!("target uses rank {p} beyond window {rank_bound}")));
        }
        Ok(SubsetSumInstance {
            weights,
            target,
            roles,
            source,
            audit,
            rank_bound,
        })
    }

    /// Wraps a directly supplied subset-sum problem.
    pub fn from_raw(raw: RawSubsetSum) -> Result<Self> {
        if raw.weights.is_empty() {
            return Err(Error::Domain("subset sum needs at least one weight".into()));
        }
        let n = raw.weights.len();
        let roles = (1..=n).map(RoleTag::Item).collect();
        let bound = raw
            .weights
            .iter()
            .chain(std::iter::once(&raw.target))
            .filter_map(Radical::max_rank)
            .max()
            .unwrap_or(1);
        // A target rank missing from every weight just makes a raw instance
        // infeasible, so the span check of `new` is skipped here.
        let source = Source {
            kind: ProblemKind::SubsetSum,
            k: None,
            instance: SourceInstance::Raw(raw.clone()),
        };
        Ok(SubsetSumInstance {
            audit: CostAudit {
                formula: "n",
                n,
                m: 0,
                expected: n,
                actual: n,
            },
            weights: raw.weights,
            target: raw.target,
            roles,
            source,
            rank_bound: bound,
        })
    }

    /// Rebuilds an instance from [`SubsetSumInstance::to_json`] output by
    /// re-encoding its source, and checks the stored weights and target.
    pub fn from_json(v: &Value) -> Result<Self> {
        let kind: ProblemKind = v
            .get("problem")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::format("/problem", "missing problem kind"))?
            .parse()?;
        let k = match v.get("k") {
            None | Some(Value::Null) => None,
            Some(k) => Some(k.as_u64().ok_or_else(|| Error::format("/k", "expected nonnegative integer"))? as usize),
        };
        let src = v.get("source").ok_or_else(|| Error::format("/source", "missing field"))?;
        let instance = SourceInstance::from_json(kind, src)?;
        let inst = match instance {
            SourceInstance::Raw(r) => SubsetSumInstance::from_raw(r)?,
            other => encode(kind, &other, k)?,
        };
        let stored: Vec<Radical> = match v.get("weights") {
            Some(w) => serde_json::from_value(w.clone()).map_err(|e| Error::format("/weights", e.to_string()))?,
            None => inst.weights.clone(),
        };
        let target: Radical = match v.get("target") {
            Some(t) => serde_json::from_value(t.clone()).map_err(|e| Error::format("/target", e.to_string()))?,
            None => inst.target.clone(),
        };
        if stored != inst.weights || target != inst.target {
            return Err(Error::format("/weights", "stored weights disagree with the re-encoded source"));
        }
        Ok(inst)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn subset_sum(&self, chosen: &[bool]) -> Radical {
        let mut acc = Radical::zero();
        for (w, &c) in self.weights.iter().zip(chosen) {
            if c {
                acc += w;
            }
        }
        acc
    }

    /// Exact target equality by coefficient comparison.
    pub fn is_witness(&self, chosen: &[bool]) -> bool {
        chosen.len() == self.weights.len() && self.subset_sum(chosen) == self.target
    }

    /// `(Σ x_i a_i − T)` for a choice vector.
    pub fn residual(&self, chosen: &[bool]) -> Radical {
        &self.subset_sum(chosen) - &self.target
    }

    pub fn role_index(&self, role: &RoleTag) -> Option<usize> {
        self.roles.iter().position(|r| r == role)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "problem": self.source.kind.tag(),
            "k": self.source.k,
            "weights": self.weights.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "target": self.target.to_string(),
            "roles": self.roles,
            "rank_bound": self.rank_bound,
            "cost_audit": {
                "formula": self.audit.formula,
                "n": self.audit.n,
                "m": self.audit.m,
                "expected": self.audit.expected,
                "actual": self.audit.actual,
                "holds": self.audit.holds(),
            },
            "source": self.source.instance.to_json(),
        })
    }
}
