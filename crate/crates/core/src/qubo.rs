//! QUBO pipeline: Ising form, parity code, plaquette CNF, penalized
//! subset-sum objective; plus QUBO formulations of five constrained
//! problems.
//!
//! All arithmetic here is exact rational.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::instances::{
    rational_to_json, BilpInstance, CnfFormula, Graph, JobSequencingInstance, KnapsackInstance, QuboInstance,
};
use crate::radical::Radical;
use crate::reductions::{encode_3sat_allow_empty, forward_map, RoleTag, Solution, SubsetSumInstance};

fn int(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

// ---------------------------------------------------------------------------
// Ising form
// ---------------------------------------------------------------------------

/// `H(s) = −Σ_{i<j} J_ij s_i s_j − Σ_j h_j s_j`; the source objective equals
/// `H(s) + offset` under `x = (1 + s)/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsingModel {
    pub n: usize,
    /// Dense, symmetric, zero diagonal.
    pub couplings: Vec<Vec<BigRational>>,
    pub fields: Vec<BigRational>,
    pub offset: BigRational,
}

impl IsingModel {
    pub fn energy(&self, s: &[i8]) -> BigRational {
        let mut e = BigRational::zero();
        for i in 0..self.n {
            e -= &self.fields[i] * int(s[i] as i64);
            for j in (i + 1)..self.n {
                e -= &self.couplings[i][j] * int((s[i] * s[j]) as i64);
            }
        }
        e
    }

    pub fn has_fields(&self) -> bool {
        self.fields.iter().any(|h| !h.is_zero())
    }
}

pub fn qubo_to_ising(q: &QuboInstance) -> IsingModel {
    let n = q.n;
    let mut couplings = vec![vec![BigRational::zero(); n]; n];
    let mut fields = vec![BigRational::zero(); n];
    let mut offset = q.offset.clone();
    for i in 0..n {
        let mut row = q.linear[i].clone();
        for j in 0..n {
            if j != i {
                row += &q.quadratic[i][j];
            }
            if j > i {
                couplings[i][j] = -&q.quadratic[i][j] * half();
                couplings[j][i] = couplings[i][j].clone();
                offset += &q.quadratic[i][j] * half();
            }
        }
        fields[i] = -row * half();
        offset += &q.linear[i] * half();
    }
    IsingModel {
        n,
        couplings,
        fields,
        offset,
    }
}

// ---------------------------------------------------------------------------
// Parity code
// ---------------------------------------------------------------------------

/// A closed loop of parity bits whose spin product is identically `+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Plaquette {
    /// `z_{i,i'} z_{i,i'+1} z_{i+1,i'+1} z_{i+1,i'}`.
    Square([usize; 4]),
    /// `z_{i,i+1} z_{i,i+2} z_{i+1,i+2}`, the boundary row where the
    /// diagonal bit `z_{i+1,i+1}` is identically 1.
    Triangle([usize; 3]),
}

impl Plaquette {
    pub fn bits(&self) -> &[usize] {
        match self {
            Plaquette::Square(b) => b,
            Plaquette::Triangle(b) => b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityProgram {
    /// Logical spin count; includes the reference spin when present.
    pub spins: usize,
    /// Whether the last spin is a reference spin that carries the fields.
    pub reference_spin: bool,
    /// `pairs[k] = (i, i')`, `i < i'`, for parity bit `k`.
    pub pairs: Vec<(usize, usize)>,
    pub plaquettes: Vec<Plaquette>,
    /// Coupling on each parity bit: the energy is `−Σ_k J_k z_k`.
    pub costs: Vec<BigRational>,
    /// Constant such that source objective = `−Σ J_k z_k + offset`.
    pub offset: BigRational,
}

impl ParityProgram {
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        let (a, b) = (i.min(j), i.max(j));
        pair_index(self.spins, a, b)
    }

    /// Parity bits `z_{ii'} = s_i s_{i'}` of a spin configuration.
    pub fn parity_of(&self, s: &[i8]) -> Vec<i8> {
        self.pairs.iter().map(|&(i, j)| s[i] * s[j]).collect()
    }

    /// Spins of a constraint-satisfying parity configuration, gauge fixed
    /// by `s_last = +1`.
    pub fn spins_of(&self, z: &[i8]) -> Vec<i8> {
        let last = self.spins - 1;
        let mut s: Vec<i8> = (0..last).map(|i| z[self.pair_index(i, last)]).collect();
        s.push(1);
        s
    }

    pub fn satisfies_constraints(&self, z: &[i8]) -> bool {
        self.plaquettes
            .iter()
            .all(|p| p.bits().iter().map(|&k| z[k]).product::<i8>() == 1)
    }

    pub fn energy(&self, z: &[i8]) -> BigRational {
        let mut e = self.offset.clone();
        for (c, &zk) in self.costs.iter().zip(z) {
            e -= c * int(zk as i64);
        }
        e
    }
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    // Row-major over the strict upper triangle.
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Replaces every coupling by a parity bit. Fields, if present, are carried
/// by an extra reference spin coupled to every spin with strength `h_j`.
pub fn parity_transform(m: &IsingModel) -> ParityProgram {
    let reference = m.has_fields();
    let n = m.n + reference as usize;
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut costs = Vec::with_capacity(pairs.capacity());
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
            costs.push(if j < m.n {
                m.couplings[i][j].clone()
            } else {
                m.fields[i].clone()
            });
        }
    }
    let mut plaquettes = Vec::new();
    for i in 0..n.saturating_sub(2) {
        plaquettes.push(Plaquette::Triangle([
            pair_index(n, i, i + 1),
            pair_index(n, i, i + 2),
            pair_index(n, i + 1, i + 2),
        ]));
        for ip in (i + 2)..(n - 1) {
            plaquettes.push(Plaquette::Square([
                pair_index(n, i, ip),
                pair_index(n, i, ip + 1),
                pair_index(n, i + 1, ip + 1),
                pair_index(n, i + 1, ip),
            ]));
        }
    }
    ParityProgram {
        spins: n,
        reference_spin: reference,
        pairs,
        plaquettes,
        costs,
        offset: m.offset.clone(),
    }
}

/// Eight clauses per plaquette over its parity bits and one fresh auxiliary
/// `β`. Variable `k + 1` is parity bit `k` (true ⟺ `z = +1`); auxiliaries
/// follow in plaquette order.
pub fn plaquette_to_3sat(p: &ParityProgram) -> CnfFormula {
    let bits = p.pairs.len();
    let mut clauses = Vec::with_capacity(8 * p.plaquettes.len());
    for (c, plaq) in p.plaquettes.iter().enumerate() {
        let beta = (bits + c + 1) as i32;
        let v = |k: usize| (k + 1) as i32;
        match *plaq {
            Plaquette::Square([a, b, c, d]) => {
                let (a, b, c, d) = (v(a), v(b), v(c), v(d));
                clauses.extend([
                    [beta, a, b],
                    [beta, -a, -b],
                    [beta, c, d],
                    [beta, -c, -d],
                    [-beta, -a, b],
                    [-beta, a, -b],
                    [-beta, -c, d],
                    [-beta, c, -d],
                ]);
            }
            Plaquette::Triangle([a, b, c]) => {
                let (a, b, c) = (v(a), v(b), v(c));
                // β ⟺ (a = b) and β ⟺ c.
                clauses.extend([
                    [beta, a, b],
                    [beta, -a, -b],
                    [-beta, -a, b],
                    [-beta, a, -b],
                    [-beta, c, a],
                    [-beta, c, -a],
                    [beta, -c, a],
                    [beta, -c, -a],
                ]);
            }
        }
    }
    CnfFormula::new(bits + p.plaquettes.len(), clauses).expect("plaquette literals are in range")
}

// ---------------------------------------------------------------------------
// Penalized objective
// ---------------------------------------------------------------------------

/// `Σ_k cost_k y_k + Δ·(Σ_k y_k r_k − T)² + constant` over the weights `r_k`
/// of the plaquette CNF's subset-sum encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PenalizedObjective {
    pub parity: ParityProgram,
    pub cnf: CnfFormula,
    pub constraint: SubsetSumInstance,
    /// One linear cost per weight of `constraint`.
    pub costs: Vec<BigRational>,
    pub delta: BigRational,
    pub constant: BigRational,
    /// `parity_weight[k]` is the weight index standing for parity bit `k`.
    pub parity_weight: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledQubo {
    pub source: QuboInstance,
    pub ising: IsingModel,
    pub objective: PenalizedObjective,
}

impl PenalizedObjective {
    pub fn num_variables(&self) -> usize {
        self.constraint.len()
    }

    pub fn linear_value(&self, y: &[bool]) -> BigRational {
        let mut e = self.constant.clone();
        for (c, &yk) in self.costs.iter().zip(y) {
            if yk {
                e += c;
            }
        }
        e
    }

    /// Objective value with the penalty measured as the squared coefficient
    /// norm of the residual radical. This is zero exactly on witnesses and
    /// at least 1 elsewhere.
    pub fn value_rankwise(&self, y: &[bool]) -> BigRational {
        let r = self.constraint.residual(y);
        self.linear_value(y) + &self.delta * BigRational::from_integer(radical_norm_sq(&r))
    }

    /// Objective value with the residual evaluated as a real number.
    pub fn value_real(&self, y: &[bool]) -> f64 {
        let r = self.constraint.residual(y).to_float_default();
        self.linear_value(y).to_f64().unwrap_or(f64::NAN) + self.delta.to_f64().unwrap_or(f64::NAN) * r * r
    }

    /// The witness the equivalence proof assigns to a spin configuration.
    pub fn forward(&self, spins: &[i8]) -> Result<Vec<bool>> {
        let z = self.parity.parity_of(spins);
        let mut x: Vec<bool> = z.iter().map(|&zk| zk == 1).collect();
        for plaq in &self.parity.plaquettes {
            let beta = match *plaq {
                Plaquette::Square([a, b, ..]) => x[a] == x[b],
                Plaquette::Triangle([_, _, c]) => x[c],
            };
            x.push(beta);
        }
        forward_map(&self.constraint, &Solution::Assignment(x))
    }

    /// Parity bits read off `y`, or `None` when they violate a plaquette.
    pub fn decode_spins(&self, y: &[bool]) -> Option<Vec<i8>> {
        let z: Vec<i8> = self.parity_weight.iter().map(|&w| if y[w] { 1 } else { -1 }).collect();
        self.parity.satisfies_constraints(&z).then(|| self.parity.spins_of(&z))
    }

    /// Binary QUBO assignment for the logical spins (reference spin removed).
    pub fn decode_qubo(&self, y: &[bool]) -> Option<Vec<bool>> {
        let s = self.decode_spins(y)?;
        let logical = self.parity.spins - self.parity.reference_spin as usize;
        Some(s[..logical].iter().map(|&si| si == 1).collect())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "delta": rational_to_json(&self.delta),
            "constant": rational_to_json(&self.constant),
            "spins": self.parity.spins,
            "reference_spin": self.parity.reference_spin,
            "parity_bits": self.parity.pairs.len(),
            "plaquettes": self.parity.plaquettes.len(),
            "layout": self.parity.pairs.iter().zip(&self.parity_weight).map(|(&(i, j), &w)| json!({
                "pair": [i + 1, j + 1],
                "weight": w,
            })).collect::<Vec<_>>(),
            "costs": self.costs.iter().map(rational_to_json).collect::<Vec<_>>(),
            "cnf": {
                "variables": self.cnf.num_vars,
                "clauses": self.cnf.num_clauses(),
                "dimacs": self.cnf.to_dimacs(),
            },
            "subset_sum": self.constraint.to_json(),
        })
    }
}

/// Compiles a QUBO into a penalized subset-sum objective.
///
/// `Δ = 1 + Σ_k |cost_k|`: any residual with a nonzero coefficient costs at
/// least `Δ` in the rank-wise norm, more than the whole linear range.
pub fn qubo_compile(q: &QuboInstance) -> Result<CompiledQubo> {
    qubo_compile_with(q, None)
}

/// As [`qubo_compile`], with `Δ` replaced when given. A replacement below the
/// default is refused.
pub fn qubo_compile_with(q: &QuboInstance, delta: Option<BigRational>) -> Result<CompiledQubo> {
    if q.n < 2 {
        return Err(Error::Domain("qubo_compile needs at least 2 variables".into()));
    }
    let ising = qubo_to_ising(q);
    let parity = parity_transform(&ising);
    let cnf = plaquette_to_3sat(&parity);
    let constraint = encode_3sat_allow_empty(&cnf)?;
    let mut costs = vec![BigRational::zero(); constraint.len()];
    let mut constant = parity.offset.clone();
    let mut parity_weight = Vec::with_capacity(parity.pairs.len());
    for (k, jk) in parity.costs.iter().enumerate() {
        let w = constraint
            .role_index(&RoleTag::VarTrue(k + 1))
            .ok_or_else(|| Error::Invariant(format!("parity bit {} has no weight", k + 1)))?;
        // −J z = −2J x + J with x = (1 + z)/2.
        costs[w] = -jk * int(2);
        constant += jk;
        parity_weight.push(w);
    }
    let safe = BigRational::one() + costs.iter().map(|c| c.abs()).sum::<BigRational>();
    let delta = match delta {
        Some(d) if d < safe => {
            return Err(Error::Domain(format!("Δ = {d} is below the safe bound {safe}")));
        }
        Some(d) => d,
        None => safe,
    };
    Ok(CompiledQubo {
        source: q.clone(),
        ising,
        objective: PenalizedObjective {
            parity,
            cnf,
            constraint,
            costs,
            delta,
            constant,
            parity_weight,
        },
    })
}

// ---------------------------------------------------------------------------
// Formulations
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormulationSource {
    Bilp(BilpInstance),
    Knapsack(KnapsackInstance),
    JobSeq(JobSequencingInstance),
    HamCycle(Graph),
    Tsp(Graph),
}

impl FormulationSource {
    pub fn tag(&self) -> &'static str {
        match self {
            FormulationSource::Bilp(_) => "bilp",
            FormulationSource::Knapsack(_) => "knapsack",
            FormulationSource::JobSeq(_) => "jobseq",
            FormulationSource::HamCycle(_) => "hamcycle",
            FormulationSource::Tsp(_) => "tsp",
        }
    }
}

/// A QUBO together with the layout needed to read its variables back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formulation {
    pub source: FormulationSource,
    pub qubo: QuboInstance,
    /// Δ for knapsack/TSP, α (with β = 1) for BILP, 1 otherwise.
    pub penalty: BigRational,
    /// TSP only: weights were multiplied by this to make them integers.
    pub weight_scale: BigInt,
    pub labels: Vec<String>,
}

impl Formulation {
    pub fn to_json(&self) -> Value {
        json!({
            "formulation": self.source.tag(),
            "penalty": rational_to_json(&self.penalty),
            "weight_scale": self.weight_scale.to_string(),
            "variables": self.labels,
            "qubo": self.qubo.to_json(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum NativeSolution {
    Bilp { x: Vec<bool>, objective: i64 },
    Knapsack { items: Vec<usize>, weight: u64, value: u64 },
    Schedule { machine_of: Vec<Option<usize>>, loads: Vec<u64> },
    /// Vertices (1-based) in visiting order; `None` where a position is
    /// empty or doubly occupied.
    Tour { order: Vec<Option<usize>>, weight: Option<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuboDecoded {
    pub solution: NativeSolution,
    pub feasible: bool,
    /// Empty exactly when `feasible`.
    pub violations: Vec<String>,
}

/// `H = α Σ_j (b_j − Σ_i A_ji x_i)² − Σ_i c_i x_i` with `α = 1 + Σ|c_i|`.
pub fn bilp_to_qubo(b: &BilpInstance) -> Result<Formulation> {
    let n = b.num_vars();
    for i in 0..n {
        if b.a.iter().all(|row| row[i] == 0) {
            return Err(Error::Domain(format!("column {} of A is all zero", i + 1)));
        }
    }
    let alpha = int(1 + b.c.iter().map(|c| c.abs()).sum::<i64>());
    let mut q = QuboInstance::zeros(n);
    for (row, &bj) in b.a.iter().zip(&b.b) {
        let coeffs: Vec<(usize, BigRational)> = row.iter().enumerate().map(|(i, &a)| (i, int(-a))).collect();
        q.add_squared(&alpha, &int(bj), &coeffs);
    }
    for (i, &c) in b.c.iter().enumerate() {
        q.linear[i] -= int(c);
    }
    Ok(Formulation {
        source: FormulationSource::Bilp(b.clone()),
        qubo: q,
        penalty: alpha,
        weight_scale: BigInt::one(),
        labels: (1..=n).map(|i| format!("x{i}")).collect(),
    })
}

/// `H = (1 − Σ y_k)² + (Σ k y_k − Σ w_i x_i)² − Δ Σ v_i x_i`, variables
/// `x_1..x_n` then `y_1..y_W`, with `Δ = 1/(Σ v_i + 1)`.
pub fn knapsack_to_qubo(k: &KnapsackInstance) -> Result<Formulation> {
    if k.weights.iter().all(|&w| w > k.capacity) {
        return Err(Error::Domain("no item fits within the capacity".into()));
    }
    let n = k.len();
    let cap = usize::try_from(k.capacity).map_err(|_| Error::SizeCap("capacity too large".into()))?;
    let total: u64 = k.values.iter().sum();
    let delta = BigRational::new(1.into(), BigInt::from(total) + 1);
    let mut q = QuboInstance::zeros(n + cap);
    let one_hot: Vec<_> = (0..cap).map(|t| (n + t, int(-1))).collect();
    q.add_squared(&BigRational::one(), &BigRational::one(), &one_hot);
    let mut balance: Vec<_> = (0..cap).map(|t| (n + t, int(t as i64 + 1))).collect();
    balance.extend(k.weights.iter().enumerate().map(|(i, &w)| (i, int(-(w as i64)))));
    q.add_squared(&BigRational::one(), &BigRational::zero(), &balance);
    for (i, &v) in k.values.iter().enumerate() {
        q.linear[i] -= &delta * int(v as i64);
    }
    let mut labels: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    labels.extend((1..=cap).map(|t| format!("y{t}")));
    Ok(Formulation {
        source: FormulationSource::Knapsack(k.clone()),
        qubo: q,
        penalty: delta,
        weight_scale: BigInt::one(),
        labels,
    })
}

/// Variable `x_{i,j}` (job `i` on machine `j`) sits at `i·m + j`; `y_{t,j}`
/// (machine `j` finishes at time `t`) at `n·m + (t−1)·m + j`.
pub fn jobseq_to_qubo(j: &JobSequencingInstance) -> Result<Formulation> {
    let (n, m) = (j.durations.len(), j.machines);
    if n < m {
        return Err(Error::Domain(format!(
            "{n} jobs cannot occupy all {m} machines; an idle machine always costs energy"
        )));
    }
    let t0 = usize::try_from(j.deadline).map_err(|_| Error::SizeCap("deadline too large".into()))?;
    let x = |i: usize, mm: usize| i * m + mm;
    let y = |t: usize, mm: usize| n * m + (t - 1) * m + mm;
    let mut q = QuboInstance::zeros(m * (n + t0));
    let one = BigRational::one();
    for i in 0..n {
        let c: Vec<_> = (0..m).map(|mm| (x(i, mm), int(-1))).collect();
        q.add_squared(&one, &one, &c);
    }
    for mm in 0..m {
        let c: Vec<_> = (1..=t0).map(|t| (y(t, mm), int(-1))).collect();
        q.add_squared(&one, &one, &c);
        let mut c: Vec<_> = (1..=t0).map(|t| (y(t, mm), int(t as i64))).collect();
        c.extend((0..n).map(|i| (x(i, mm), int(-(j.durations[i] as i64)))));
        q.add_squared(&one, &BigRational::zero(), &c);
    }
    let mut labels = Vec::new();
    for i in 1..=n {
        labels.extend((1..=m).map(|mm| format!("x{i},{mm}")));
    }
    for t in 1..=t0 {
        labels.extend((1..=m).map(|mm| format!("y{t},{mm}")));
    }
    Ok(Formulation {
        source: FormulationSource::JobSeq(j.clone()),
        qubo: q,
        penalty: one,
        weight_scale: BigInt::one(),
        labels,
    })
}

fn position_constraints(q: &mut QuboInstance, n: usize) {
    let one = BigRational::one();
    for v in 0..n {
        let c: Vec<_> = (0..n).map(|i| (v * n + i, int(-1))).collect();
        q.add_squared(&one, &one, &c);
    }
    for i in 0..n {
        let c: Vec<_> = (0..n).map(|v| (v * n + i, int(-1))).collect();
        q.add_squared(&one, &one, &c);
    }
}

fn position_labels(n: usize) -> Vec<String> {
    (1..=n).flat_map(|v| (1..=n).map(move |i| format!("x{v},{i}"))).collect()
}

/// Variable `x_{v,i}` (vertex `v` at position `i`) sits at `v·n + i`;
/// positions wrap. Undirected edges count as arcs both ways.
pub fn hamcycle_to_qubo(g: &Graph) -> Result<Formulation> {
    let n = g.num_vertices;
    if n < 2 {
        return Err(Error::Domain("Hamiltonian cycle needs at least 2 vertices".into()));
    }
    let mut q = QuboInstance::zeros(n * n);
    position_constraints(&mut q, n);
    for u in 0..n {
        for v in 0..n {
            if u == v || g.has_edge(u, v) {
                continue;
            }
            for i in 0..n {
                q.add_pair(u * n + i, v * n + (i + 1) % n, &BigRational::one());
            }
        }
    }
    Ok(Formulation {
        source: FormulationSource::HamCycle(g.clone()),
        qubo: q,
        penalty: BigRational::one(),
        weight_scale: BigInt::one(),
        labels: position_labels(n),
    })
}

/// Complete graph with positive weights. Weights are scaled by the lcm of
/// their denominators; `Δ = 1/(max W + 1)` on the scaled weights.
pub fn tsp_to_qubo(g: &Graph) -> Result<Formulation> {
    let n = g.num_vertices;
    if n < 2 {
        return Err(Error::Domain("TSP needs at least 2 cities".into()));
    }
    if !g.is_complete() {
        return Err(Error::Domain("TSP requires a complete graph".into()));
    }
    let weights: Vec<BigRational> = (0..g.num_edges()).map(|j| g.weight(j)).collect();
    if let Some(j) = weights.iter().position(|w| !w.is_positive()) {
        return Err(Error::Domain(format!("edge {} has a nonpositive weight", j + 1)));
    }
    let scale = weights.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let scaled: Vec<BigInt> = weights.iter().map(|w| (w * BigRational::from_integer(scale.clone())).to_integer()).collect();
    let max_w = scaled.iter().max().cloned().unwrap_or_else(BigInt::one);
    let delta = BigRational::new(1.into(), max_w + 1);
    let mut q = QuboInstance::zeros(n * n);
    position_constraints(&mut q, n);
    for u in 0..n {
        for v in 0..n {
            let Some(j) = (u != v).then(|| g.edge_index(u, v)).flatten() else {
                continue;
            };
            let c = &delta * BigRational::from_integer(scaled[j].clone());
            for i in 0..n {
                q.add_pair(u * n + i, v * n + (i + 1) % n, &c);
            }
        }
    }
    Ok(Formulation {
        source: FormulationSource::Tsp(g.clone()),
        qubo: q,
        penalty: delta,
        weight_scale: scale,
        labels: position_labels(n),
    })
}

/// Reads a QUBO assignment back into the source problem's vocabulary.
pub fn qubo_decode(f: &Formulation, x: &[bool]) -> Result<QuboDecoded> {
    if x.len() != f.qubo.n {
        return Err(Error::Precondition(format!(
            "assignment has length {}, formulation has {} variables",
            x.len(),
            f.qubo.n
        )));
    }
    let mut violations = Vec::new();
    let solution = match &f.source {
        FormulationSource::Bilp(b) => {
            for (j, (row, &bj)) in b.a.iter().zip(&b.b).enumerate() {
                let lhs: i64 = row.iter().zip(x).map(|(&a, &xi)| if xi { a } else { 0 }).sum();
                if lhs != bj {
                    violations.push(format!("row {}: A x = {lhs}, b = {bj}", j + 1));
                }
            }
            NativeSolution::Bilp {
                x: x.to_vec(),
                objective: b.objective(x),
            }
        }
        FormulationSource::Knapsack(k) => {
            let n = k.len();
            let items: Vec<usize> = (0..n).filter(|&i| x[i]).collect();
            let weight: u64 = items.iter().map(|&i| k.weights[i]).sum();
            let value: u64 = items.iter().map(|&i| k.values[i]).sum();
            let ys: Vec<usize> = (0..k.capacity as usize).filter(|&t| x[n + t]).map(|t| t + 1).collect();
            if weight > k.capacity {
                violations.push(format!("weight {weight} exceeds capacity {}", k.capacity));
            }
            if ys.len() != 1 {
                violations.push(format!("{} weight indicators set, expected 1", ys.len()));
            } else if ys[0] as u64 != weight {
                violations.push(format!("weight indicator {} disagrees with weight {weight}", ys[0]));
            }
            NativeSolution::Knapsack {
                items: items.into_iter().map(|i| i + 1).collect(),
                weight,
                value,
            }
        }
        FormulationSource::JobSeq(j) => {
            let (n, m) = (j.durations.len(), j.machines);
            let mut machine_of = Vec::with_capacity(n);
            let mut loads = vec![0u64; m];
            for i in 0..n {
                let on: Vec<usize> = (0..m).filter(|&mm| x[i * m + mm]).collect();
                if on.len() != 1 {
                    violations.push(format!("job {} assigned to {} machines", i + 1, on.len()));
                }
                for &mm in &on {
                    loads[mm] += j.durations[i];
                }
                machine_of.push((on.len() == 1).then(|| on[0] + 1));
            }
            for (mm, &load) in loads.iter().enumerate() {
                let ts: Vec<u64> = (1..=j.deadline as usize)
                    .filter(|&t| x[n * m + (t - 1) * m + mm])
                    .map(|t| t as u64)
                    .collect();
                if load > j.deadline {
                    violations.push(format!("machine {} load {load} exceeds deadline {}", mm + 1, j.deadline));
                }
                if ts.len() != 1 || ts[0] != load {
                    violations.push(format!("machine {} time indicators {ts:?} disagree with load {load}", mm + 1));
                }
            }
            NativeSolution::Schedule { machine_of, loads }
        }
        FormulationSource::HamCycle(g) | FormulationSource::Tsp(g) => {
            let n = g.num_vertices;
            for v in 0..n {
                let c = (0..n).filter(|&i| x[v * n + i]).count();
                if c != 1 {
                    violations.push(format!("vertex {} occupies {c} positions", v + 1));
                }
            }
            let order: Vec<Option<usize>> = (0..n)
                .map(|i| {
                    let at: Vec<usize> = (0..n).filter(|&v| x[v * n + i]).collect();
                    (at.len() == 1).then(|| at[0] + 1)
                })
                .collect();
            for (i, o) in order.iter().enumerate() {
                if o.is_none() {
                    violations.push(format!("position {} is not occupied by exactly one vertex", i + 1));
                }
            }
            let mut weight = Some(BigRational::zero());
            if violations.is_empty() {
                for i in 0..n {
                    let (u, v) = (order[i].unwrap() - 1, order[(i + 1) % n].unwrap() - 1);
                    match g.edge_index(u, v) {
                        Some(e) => {
                            if let Some(w) = weight.as_mut() {
                                *w += g.weight(e);
                            }
                        }
                        None => {
                            violations.push(format!("step {} → {} is not an arc", u + 1, v + 1));
                            weight = None;
                        }
                    }
                }
            } else {
                weight = None;
            }
            let weight = match &f.source {
                FormulationSource::Tsp(_) => weight.map(|w| w.to_string()),
                _ => None,
            };
            NativeSolution::Tour { order, weight }
        }
    };
    Ok(QuboDecoded {
        feasible: violations.is_empty(),
        solution,
        violations,
    })
}

/// Sum of integer radical coefficients squared; the rank-wise penalty unit.
pub fn radical_norm_sq(r: &Radical) -> BigInt {
    r.terms().map(|(_, c)| c * c).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qubo(entries: &[&[i64]]) -> QuboInstance {
        let q = entries.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
        QuboInstance::new(q, None).unwrap()
    }

    fn bits(mask: u64, n: usize) -> Vec<bool> {
        (0..n).map(|i| mask >> i & 1 == 1).collect()
    }

    fn spins(x: &[bool]) -> Vec<i8> {
        x.iter().map(|&b| if b { 1 } else { -1 }).collect()
    }

    fn brute_min(q: &QuboInstance) -> (BigRational, Vec<Vec<bool>>) {
        let mut best: Option<BigRational> = None;
        let mut arg = Vec::new();
        for mask in 0..1u64 << q.n {
            let x = bits(mask, q.n);
            let e = q.evaluate(&x);
            match &best {
                Some(b) if &e > b => {}
                Some(b) if &e == b => arg.push(x),
                _ => {
                    best = Some(e);
                    arg = vec![x];
                }
            }
        }
        (best.unwrap(), arg)
    }

    #[test]
    fn ising_example() {
        let m = qubo_to_ising(&qubo(&[&[0, 1], &[1, 0]]));
        assert_eq!(m.couplings[0][1], -half());
        assert_eq!(m.fields, vec![-half(), -half()]);
        assert_eq!(m.offset, half());
        let zero = qubo_to_ising(&qubo(&[&[0, 0], &[0, 0]]));
        assert!(zero.couplings.iter().flatten().all(Zero::is_zero) && !zero.has_fields() && zero.offset.is_zero());
        let one = qubo_to_ising(&qubo(&[&[3]]));
        assert_eq!(one.n, 1);
        assert_eq!(one.fields[0], BigRational::new((-3).into(), 2.into()));
    }

    #[test]
    fn parity_counts() {
        for (n, bits, plaq) in [(2, 1, 0), (3, 3, 1), (4, 6, 3), (5, 10, 6)] {
            let mut q = QuboInstance::zeros(n);
            // A field-free model: linear terms cancel the row sums.
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        q.quadratic[i][j] = int(1);
                    }
                }
                q.linear[i] = int(-(n as i64 - 1));
            }
            let m = qubo_to_ising(&q);
            assert!(!m.has_fields());
            let p = parity_transform(&m);
            assert_eq!((p.pairs.len(), p.plaquettes.len()), (bits, plaq));
            let cnf = plaquette_to_3sat(&p);
            assert_eq!(cnf.num_vars, (n - 1) * (n - 1));
            assert_eq!(cnf.num_clauses(), 4 * (n - 1) * (n - 2));
            let c = qubo_compile(&q).unwrap();
            assert_eq!(c.objective.num_variables(), 2 * (n - 1) * (5 * n - 9));
        }
    }

    #[test]
    fn plaquette_blocks_enforce_parity() {
        let q = QuboInstance::zeros(5);
        let p = parity_transform(&qubo_to_ising(&q));
        let cnf = plaquette_to_3sat(&p);
        let bits = p.pairs.len();
        for (c, plaq) in p.plaquettes.iter().enumerate() {
            let block = &cnf.clauses[8 * c..8 * c + 8];
            let vars = plaq.bits();
            for mask in 0u32..1 << vars.len() {
                let mut sat_any = false;
                for beta in [false, true] {
                    let mut a = vec![false; cnf.num_vars];
                    for (t, &k) in vars.iter().enumerate() {
                        a[k] = mask >> t & 1 == 1;
                    }
                    a[bits + c] = beta;
                    sat_any |= block.iter().all(|cl| cl.iter().any(|&l| CnfFormula::literal_value(l, &a)));
                }
                let product: i32 = (0..vars.len()).map(|t| if mask >> t & 1 == 1 { 1 } else { -1 }).product();
                assert_eq!(sat_any, product == 1, "plaquette {c} mask {mask:b}");
            }
        }
    }

    #[test]
    fn bilp_examples() {
        let f = bilp_to_qubo(&BilpInstance::new(vec![vec![1, 1]], vec![1], vec![1, 2]).unwrap()).unwrap();
        let (_, arg) = brute_min(&f.qubo);
        assert_eq!(arg, vec![vec![false, true]]);
        let d = qubo_decode(&f, &arg[0]).unwrap();
        assert!(d.feasible);
        assert_eq!(d.solution, NativeSolution::Bilp { x: vec![false, true], objective: 2 });

        let bad = bilp_to_qubo(&BilpInstance::new(vec![vec![2]], vec![1], vec![0]).unwrap()).unwrap();
        let (e, arg) = brute_min(&bad.qubo);
        assert!(e.is_positive());
        assert!(!qubo_decode(&bad, &arg[0]).unwrap().feasible);
        assert!(bilp_to_qubo(&BilpInstance::new(vec![vec![0, 1]], vec![1], vec![1, 1]).unwrap()).is_err());
    }

    #[test]
    fn knapsack_examples() {
        let k = KnapsackInstance::new(vec![1, 2], vec![1, 1], 2).unwrap();
        let f = knapsack_to_qubo(&k).unwrap();
        assert_eq!(f.qubo.n, 4);
        let (_, arg) = brute_min(&f.qubo);
        for x in &arg {
            let d = qubo_decode(&f, x).unwrap();
            assert!(d.feasible);
            let NativeSolution::Knapsack { value, .. } = d.solution else { panic!() };
            assert_eq!(value, 1);
        }
        // x = (0, 1), y_2 = 1.
        let d = qubo_decode(&f, &[false, true, false, true]).unwrap();
        assert_eq!(d.solution, NativeSolution::Knapsack { items: vec![2], weight: 2, value: 1 });
        assert!(d.feasible);

        let roomy = KnapsackInstance::new(vec![1, 1], vec![2, 3], 3).unwrap();
        let (_, arg) = brute_min(&knapsack_to_qubo(&roomy).unwrap().qubo);
        assert!(arg.iter().all(|x| x[0] && x[1]));
        assert!(knapsack_to_qubo(&KnapsackInstance::new(vec![5], vec![1], 2).unwrap()).is_err());
    }

    #[test]
    fn jobseq_examples() {
        let ok = jobseq_to_qubo(&JobSequencingInstance::new(vec![1, 1], 2, 1).unwrap()).unwrap();
        assert_eq!(ok.qubo.n, 2 * (2 + 1));
        let (e, arg) = brute_min(&ok.qubo);
        assert!(e.is_zero());
        assert!(qubo_decode(&ok, &arg[0]).unwrap().feasible);
        let tight = jobseq_to_qubo(&JobSequencingInstance::new(vec![1, 1], 1, 1).unwrap()).unwrap();
        let (e, _) = brute_min(&tight.qubo);
        assert!(e >= int(1));
        // Job 1 on both machines.
        let mut x = vec![false; ok.qubo.n];
        x[0] = true;
        x[1] = true;
        let d = qubo_decode(&ok, &x).unwrap();
        assert!(d.violations.iter().any(|v| v.contains("job 1 assigned to 2 machines")));
        assert!(jobseq_to_qubo(&JobSequencingInstance::new(vec![1], 2, 1).unwrap()).is_err());
    }

    #[test]
    fn hamcycle_examples() {
        let both = Graph::undirected(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let f = hamcycle_to_qubo(&both).unwrap();
        assert_eq!(f.qubo.n, 9);
        let (e, _) = brute_min(&f.qubo);
        assert!(e.is_zero());
        let path = Graph::new(3, vec![(0, 1), (1, 2)], true, None).unwrap();
        let (e, _) = brute_min(&hamcycle_to_qubo(&path).unwrap().qubo);
        assert!(e >= int(1));
        let identity: Vec<bool> = (0..9).map(|k| k / 3 == k % 3).collect();
        let d = qubo_decode(&f, &identity).unwrap();
        assert_eq!(d.solution, NativeSolution::Tour { order: vec![Some(1), Some(2), Some(3)], weight: None });
    }

    #[test]
    fn tsp_examples() {
        let w = |x: i64| int(x);
        let g = Graph::new(3, vec![(0, 1), (1, 2), (0, 2)], false, Some(vec![w(1), w(1), w(2)])).unwrap();
        let f = tsp_to_qubo(&g).unwrap();
        let (_, arg) = brute_min(&f.qubo);
        for x in &arg {
            let d = qubo_decode(&f, x).unwrap();
            assert!(d.feasible);
            let NativeSolution::Tour { weight, .. } = d.solution else { panic!() };
            assert_eq!(weight.as_deref(), Some("4"));
        }
        let half_w = Graph::new(2, vec![(0, 1)], false, Some(vec![BigRational::new(1.into(), 2.into())])).unwrap();
        assert_eq!(tsp_to_qubo(&half_w).unwrap().weight_scale, BigInt::from(2));
        assert!(tsp_to_qubo(&Graph::undirected(3, &[(0, 1), (1, 2)]).unwrap()).is_err());
    }

    #[test]
    fn compile_zero_qubo_has_zero_costs() {
        let c = qubo_compile(&QuboInstance::zeros(3)).unwrap();
        assert!(c.objective.costs.iter().all(Zero::is_zero));
        assert_eq!(c.objective.delta, int(1));
        assert_eq!(c.objective.num_variables(), 24);
    }

    fn small_qubo(n: usize) -> impl Strategy<Value = QuboInstance> {
        prop::collection::vec(-2i64..=2, n * n + n).prop_map(move |v| {
            let mut q = vec![vec![BigRational::zero(); n]; n];
            for i in 0..n {
                for j in i..n {
                    q[i][j] = int(v[i * n + j]);
                    q[j][i] = int(v[i * n + j]);
                }
            }
            QuboInstance::new(q, Some(v[n * n..].iter().map(|&x| int(x)).collect())).unwrap()
        })
    }

    proptest! {
        #[test]
        fn ising_matches_qubo(q in (1usize..5).prop_flat_map(small_qubo)) {
            let m = qubo_to_ising(&q);
            for mask in 0..1u64 << q.n {
                let x = bits(mask, q.n);
                prop_assert_eq!(q.evaluate(&x), m.energy(&spins(&x)) + &m.offset);
            }
        }

        #[test]
        fn parity_energy_matches_ising(q in (2usize..5).prop_flat_map(small_qubo)) {
            let m = qubo_to_ising(&q);
            let p = parity_transform(&m);
            for mask in 0..1u64 << q.n {
                let mut s = spins(&bits(mask, q.n));
                if p.reference_spin { s.push(1); }
                let z = p.parity_of(&s);
                prop_assert!(p.satisfies_constraints(&z));
                let gauge = *s.last().unwrap();
                let fixed: Vec<i8> = s.iter().map(|&si| si * gauge).collect();
                prop_assert_eq!(p.spins_of(&z), fixed);
                prop_assert_eq!(p.energy(&z), m.energy(&s[..q.n]) + &m.offset);
            }
        }

        #[test]
        fn pipeline_minimum_matches_brute_force(q in (2usize..5).prop_flat_map(small_qubo)) {
            let c = qubo_compile(&q).unwrap();
            let obj = &c.objective;
            let (best, arg) = brute_min(&q);
            let mut pipe_best: Option<(BigRational, Vec<bool>)> = None;
            for mask in 0..1u64 << q.n {
                let mut s = spins(&bits(mask, q.n));
                if obj.parity.reference_spin { s.push(1); }
                let y = obj.forward(&s).unwrap();
                prop_assert!(obj.constraint.is_witness(&y));
                let v = obj.value_rankwise(&y);
                prop_assert_eq!(&v, &q.evaluate(&bits(mask, q.n)));
                if pipe_best.as_ref().is_none_or(|(b, _)| &v < b) {
                    pipe_best = Some((v, y));
                }
            }
            let (v, y) = pipe_best.unwrap();
            prop_assert_eq!(&v, &best);
            let x = obj.decode_qubo(&y).unwrap();
            let flipped: Vec<bool> = x.iter().map(|b| !b).collect();
            prop_assert!(arg.contains(&x) || (!obj.parity.reference_spin && arg.contains(&flipped)));
        }
    }
}
