//! Exact subset-sum oracle.
//!
//! Weights are flattened to dense integer coordinate vectors over the
//! squarefree ranks, so a subset hits the target exactly when every
//! coordinate of the running residual is zero. Small instances are swept in
//! Gray-code order (one add or subtract per step); larger ones use a
//! depth-first search that prunes on per-rank reachable ranges.

use std::sync::atomic::{AtomicU64, Ordering};

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::reductions::SubsetSumInstance;

pub const DEFAULT_CAP: u64 = 1 << 26;

/// Largest weight count swept exhaustively in Gray-code order.
pub const GRAY_LIMIT: usize = 20;

/// The cap from `CAVITY_ORACLE_CAP` when set and valid, else `2^26`.
pub fn default_cap() -> u64 {
    std::env::var("CAVITY_ORACLE_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&c| c > 0)
        .unwrap_or(DEFAULT_CAP)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    First,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMethod {
    Gray,
    Search,
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub mode: OracleMode,
    /// Gray sweeps refuse more than `cap` subsets; searches refuse to visit
    /// more than `cap` nodes.
    pub cap: u64,
    /// Count the empty subset as a witness when `T = 0`.
    pub allow_empty: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            mode: OracleMode::First,
            cap: default_cap(),
            allow_empty: false,
        }
    }
}

impl OracleOptions {
    pub fn all() -> Self {
        OracleOptions {
            mode: OracleMode::All,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub feasible: bool,
    pub witnesses: Vec<Vec<bool>>,
    /// Subsets swept (Gray) or search nodes visited. In `first` mode a Gray
    /// sweep reports the witness's position in the canonical order.
    pub explored: u64,
    pub method: OracleMethod,
}

struct Dense {
    /// Nonzero `(coordinate, coefficient)` pairs per weight.
    weights: Vec<Vec<(usize, i64)>>,
    /// `−T` as a dense vector.
    start: Vec<i64>,
}

fn densify(inst: &SubsetSumInstance) -> Result<Dense> {
    let dims = inst
        .weights
        .iter()
        .chain([&inst.target])
        .filter_map(|r| r.max_rank())
        .max()
        .unwrap_or(0) as usize;
    let small = |c: &num_bigint::BigInt| {
        c.to_i64()
            .filter(|v| v.unsigned_abs() < 1 << 40)
            .ok_or_else(|| Error::SizeCap("radical coefficient too large for the oracle".into()))
    };
    let weights = inst
        .weights
        .iter()
        .map(|w| w.terms().map(|(p, c)| Ok((p as usize - 1, small(c)?))).collect())
        .collect::<Result<Vec<_>>>()?;
    let mut start = vec![0i64; dims];
    for (p, c) in inst.target.terms() {
        start[p as usize - 1] = -small(c)?;
    }
    Ok(Dense { weights, start })
}

pub fn oracle_subset_sum(inst: &SubsetSumInstance, opts: OracleOptions) -> Result<OracleResult> {
    let k = inst.len();
    let d = densify(inst)?;
    let (masks, explored, method) = if k <= GRAY_LIMIT {
        if (1u64 << k) > opts.cap {
            return Err(Error::SizeCap(format!(
                "instance too large for oracle: 2^{k} subsets exceeds the cap of {}",
                opts.cap
            )));
        }
        let (m, e) = gray(&d, k, opts);
        (m, e, OracleMethod::Gray)
    } else {
        let (m, e) = search(&d, k, opts)?;
        (m, e, OracleMethod::Search)
    };
    let witnesses = masks;
    for w in &witnesses {
        if !inst.is_witness(w) {
            return Err(Error::Invariant(format!("oracle witness {w:?} does not reach the target")));
        }
    }
    Ok(OracleResult {
        feasible: !witnesses.is_empty(),
        witnesses,
        explored,
        method,
    })
}

struct Residual {
    r: Vec<i64>,
    nonzero: usize,
}

impl Residual {
    fn new(start: &[i64]) -> Self {
        Residual {
            nonzero: start.iter().filter(|&&v| v != 0).count(),
            r: start.to_vec(),
        }
    }

    fn apply(&mut self, w: &[(usize, i64)], sign: i64) {
        for &(p, c) in w {
            let before = self.r[p] != 0;
            self.r[p] += sign * c;
            let after = self.r[p] != 0;
            if before != after {
                if after {
                    self.nonzero += 1;
                } else {
                    self.nonzero -= 1;
                }
            }
        }
    }
}

fn bits_of(mask: u64, k: usize) -> Vec<bool> {
    (0..k).map(|i| mask >> i & 1 == 1).collect()
}

fn gray(d: &Dense, k: usize, opts: OracleOptions) -> (Vec<Vec<bool>>, u64) {
    let high = if k >= 12 { 6 } else { 0 };
    let low = k - high;
    let found = AtomicU64::new(u64::MAX);
    let chunks: Vec<(u64, Vec<u64>, u64)> = (0..1u64 << high)
        .into_par_iter()
        .map(|chunk| {
            let mut res = Residual::new(&d.start);
            for b in 0..high {
                if chunk >> b & 1 == 1 {
                    res.apply(&d.weights[low + b], 1);
                }
            }
            let mut x = chunk << low;
            let mut hits = Vec::new();
            let mut steps = 0u64;
            for step in 0..1u64 << low {
                if opts.mode == OracleMode::First && found.load(Ordering::Relaxed) < chunk {
                    break;
                }
                if step > 0 {
                    let i = step.trailing_zeros() as usize;
                    x ^= 1 << i;
                    res.apply(&d.weights[i], if x >> i & 1 == 1 { 1 } else { -1 });
                }
                steps = step + 1;
                if res.nonzero == 0 && (x != 0 || opts.allow_empty) {
                    hits.push(x);
                    if opts.mode == OracleMode::First {
                        found.fetch_min(chunk, Ordering::Relaxed);
                        break;
                    }
                }
            }
            (chunk, hits, steps)
        })
        .collect();
    match opts.mode {
        OracleMode::All => {
            let masks = chunks.iter().flat_map(|(_, h, _)| h.iter().map(|&m| bits_of(m, k))).collect();
            (masks, 1 << k)
        }
        OracleMode::First => match chunks.iter().find(|(_, h, _)| !h.is_empty()) {
            Some((chunk, h, steps)) => (vec![bits_of(h[0], k)], (chunk << low) + steps),
            None => (Vec::new(), 1 << k),
        },
    }
}

struct Search<'a> {
    d: &'a Dense,
    order: Vec<usize>,
    /// `lo[t][p]`, `hi[t][p]`: reachable change of coordinate `p` from the
    /// weights at positions `t..`.
    lo: Vec<Vec<i64>>,
    hi: Vec<Vec<i64>>,
    /// Running `Σ chosen − T`.
    res: Vec<i64>,
    chosen: Vec<bool>,
    picked: usize,
    nodes: u64,
    cap: u64,
    opts: OracleOptions,
    out: Vec<Vec<bool>>,
}

impl Search<'_> {
    fn viable(&self, t: usize) -> bool {
        self.res
            .iter()
            .zip(self.lo[t].iter().zip(&self.hi[t]))
            .all(|(&r, (&lo, &hi))| -r >= lo && -r <= hi)
    }

    fn run(&mut self, t: usize) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(Error::SizeCap(format!(
                "instance too large for oracle: search exceeded {} nodes",
                self.cap
            )));
        }
        if !self.viable(t) {
            return Ok(false);
        }
        if t == self.order.len() {
            if self.picked > 0 || self.opts.allow_empty {
                self.out.push(self.chosen.clone());
                return Ok(self.opts.mode == OracleMode::First);
            }
            return Ok(false);
        }
        let i = self.order[t];
        if self.run(t + 1)? {
            return Ok(true);
        }
        for &(p, c) in &self.d.weights[i] {
            self.res[p] += c;
        }
        self.chosen[i] = true;
        self.picked += 1;
        let stop = self.run(t + 1)?;
        self.picked -= 1;
        self.chosen[i] = false;
        for &(p, c) in &self.d.weights[i] {
            self.res[p] -= c;
        }
        Ok(stop)
    }
}

fn search(d: &Dense, k: usize, opts: OracleOptions) -> Result<(Vec<Vec<bool>>, u64)> {
    let dims = d.start.len();
    let mut order: Vec<usize> = (0..k).collect();
    // Deciding weights in order of their highest coordinate closes low
    // coordinates early, where the range check becomes an equality.
    order.sort_by_key(|&i| (d.weights[i].iter().map(|&(p, _)| p).max(), i));
    let mut lo = vec![vec![0i64; dims]; k + 1];
    let mut hi = vec![vec![0i64; dims]; k + 1];
    for t in (0..k).rev() {
        let (mut l, mut h) = (lo[t + 1].clone(), hi[t + 1].clone());
        for &(p, c) in &d.weights[order[t]] {
            if c < 0 {
                l[p] += c;
            } else {
                h[p] += c;
            }
        }
        lo[t] = l;
        hi[t] = h;
    }
    let mut s = Search {
        d,
        order,
        lo,
        hi,
        res: d.start.clone(),
        chosen: vec![false; k],
        picked: 0,
        nodes: 0,
        cap: opts.cap,
        opts,
        out: Vec::new(),
    };
    s.run(0)?;
    Ok((s.out, s.nodes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{Graph, RawSubsetSum};
    use crate::radical::Radical;
    use crate::reductions::{encode_dominating_set, encode_vertex_cover};
    use proptest::prelude::*;

    fn raw(weights: Vec<Radical>, target: Radical) -> SubsetSumInstance {
        SubsetSumInstance::from_raw(RawSubsetSum { weights, target }).unwrap()
    }

    #[test]
    fn examples() {
        let w = vec![Radical::basis(1), Radical::basis(2)];
        let r = oracle_subset_sum(&raw(w.clone(), &w[0] + &w[1]), OracleOptions::default()).unwrap();
        assert!(r.feasible);
        assert_eq!(r.witnesses, vec![vec![true, true]]);
        // √5 is rank 4.
        let r = oracle_subset_sum(&raw(w, Radical::basis(4)), OracleOptions::all()).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.explored, 4);
        let k3 = Graph::undirected(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(oracle_subset_sum(&encode_vertex_cover(&k3, 2).unwrap(), OracleOptions::default()).unwrap().feasible);
    }

    #[test]
    fn empty_subset_toggle() {
        let inst = raw(vec![Radical::basis(1), -Radical::basis(1)], Radical::zero());
        let strict = oracle_subset_sum(&inst, OracleOptions::all()).unwrap();
        assert_eq!(strict.witnesses, vec![vec![true, true]]);
        let loose = oracle_subset_sum(&inst, OracleOptions { allow_empty: true, ..OracleOptions::all() }).unwrap();
        assert_eq!(loose.witnesses.len(), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let inst = raw((1..=12).map(Radical::basis).collect(), Radical::basis(20));
        let opts = OracleOptions { cap: 1 << 10, ..Default::default() };
        assert!(matches!(oracle_subset_sum(&inst, opts), Err(Error::SizeCap(_))));
        let big = raw((1..=30).map(|_| Radical::basis(1)).collect(), Radical::integer(15));
        let opts = OracleOptions { cap: 1 << 10, ..OracleOptions::all() };
        assert!(matches!(oracle_subset_sum(&big, opts), Err(Error::SizeCap(_))));
    }

    #[test]
    fn search_agrees_with_gray_on_large_encodings() {
        // K4 dominating set: 4 + 4·6 = 28 weights.
        let k4 = Graph::undirected(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        for k in 0..=4 {
            let r = oracle_subset_sum(&encode_dominating_set(&k4, k).unwrap(), OracleOptions::all()).unwrap();
            assert_eq!(r.method, OracleMethod::Search);
            assert_eq!(r.feasible, k >= 1);
        }
    }

    fn brute(inst: &SubsetSumInstance, allow_empty: bool) -> Vec<Vec<bool>> {
        (0..1u64 << inst.len())
            .map(|m| bits_of(m, inst.len()))
            .filter(|x| inst.is_witness(x) && (allow_empty || x.iter().any(|&b| b)))
            .collect()
    }

    proptest! {
        #[test]
        fn gray_and_search_match_brute_force(
            ws in prop::collection::vec(prop::collection::vec((1u32..5, -2i64..=2), 1..3), 1..11),
            pick in prop::collection::vec(any::<bool>(), 11),
            allow_empty in any::<bool>(),
        ) {
            let weights: Vec<Radical> = ws.iter().map(|t| {
                let mut r = Radical::zero();
                for &(p, c) in t { r.add_term(p, c); }
                r
            }).collect();
            let target: Radical = weights.iter().zip(&pick).filter(|(_, &b)| b).map(|(w, _)| w.clone()).sum();
            let inst = raw(weights, target);
            let mut expect = brute(&inst, allow_empty);
            expect.sort();
            let opts = OracleOptions { allow_empty, ..OracleOptions::all() };
            let mut g = gray(&densify(&inst).unwrap(), inst.len(), opts).0;
            g.sort();
            prop_assert_eq!(&g, &expect);
            let mut s = search(&densify(&inst).unwrap(), inst.len(), opts).unwrap().0;
            s.sort();
            prop_assert_eq!(&s, &expect);
            let first = oracle_subset_sum(&inst, OracleOptions { allow_empty, ..Default::default() }).unwrap();
            prop_assert_eq!(first.feasible, !expect.is_empty());
        }
    }
}
