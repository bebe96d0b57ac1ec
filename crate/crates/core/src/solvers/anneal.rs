use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::MattisProgram;

pub const DEFAULT_SWEEPS: usize = 200;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnealOptions {
    pub sweeps: usize,
    pub seed: u64,
    /// Start temperature; defaults to the largest single-flip energy change.
    pub t0: Option<f64>,
    /// Final temperature; defaults to `10⁻³ · t0`.
    pub t1: Option<f64>,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        AnnealOptions {
            sweeps: DEFAULT_SWEEPS,
            seed: DEFAULT_SEED,
            t0: None,
            t1: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnealResult {
    pub best: Vec<bool>,
    /// Program energy of `best`, re-evaluated from scratch.
    pub best_energy: f64,
    /// Energy after each sweep.
    pub trace: Vec<f64>,
    pub seed: u64,
    pub sweeps: usize,
    pub t0: f64,
    pub t1: f64,
}

/// Metropolis single-spin-flip annealing on the program energy with a
/// geometric temperature schedule.
pub fn anneal(p: &MattisProgram, opts: AnnealOptions) -> Result<AnnealResult> {
    if opts.sweeps == 0 {
        return Err(Error::Domain("annealing needs at least one sweep".into()));
    }
    let n = p.atoms;
    let l1: f64 = p.lambdas.iter().map(|l| l.abs()).sum();
    let bound = (0..n)
        .map(|i| p.g4 * 4.0 * p.lambdas[i].abs() * l1 + 2.0 * p.fields[i].abs())
        .fold(0.0f64, f64::max);
    let t0 = opts.t0.unwrap_or(if bound > 0.0 { bound } else { 1.0 });
    let t1 = opts.t1.unwrap_or(1e-3 * t0);
    if !(t0 > 0.0 && t1 > 0.0) {
        return Err(Error::Domain("temperatures must be positive".into()));
    }
    let ratio = if opts.sweeps > 1 { (t1 / t0).powf(1.0 / (opts.sweeps - 1) as f64) } else { 1.0 };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut s: Vec<i8> = (0..n).map(|_| if rng.gen() { 1 } else { -1 }).collect();
    let mut m: f64 = s.iter().zip(&p.lambdas).map(|(&si, l)| si as f64 * l).sum();
    let mut e = p.raw_energy(&s);
    let mut best = s.clone();
    let mut best_e = e;
    let mut trace = Vec::with_capacity(opts.sweeps);
    let mut temp = t0;
    for _ in 0..opts.sweeps {
        for i in 0..n {
            let si = s[i] as f64;
            let m_new = m - 2.0 * p.lambdas[i] * si;
            let de = p.g4 * (m_new * m_new - m * m) - 2.0 * p.fields[i] * si;
            if de <= 0.0 || rng.gen::<f64>() < (-de / temp).exp() {
                s[i] = -s[i];
                m = m_new;
                e += de;
                if e < best_e {
                    best_e = e;
                    best.clone_from(&s);
                }
            }
        }
        trace.push(e);
        temp *= ratio;
    }
    let best: Vec<bool> = best.iter().map(|&si| si == 1).collect();
    Ok(AnnealResult {
        best_energy: p.energy(&best),
        best,
        trace,
        seed: opts.seed,
        sweeps: opts.sweeps,
        t0,
        t1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{mask_to_bits, to_mattis};
    use crate::instances::{CnfFormula, RawSubsetSum};
    use crate::radical::Radical;
    use crate::reductions::{encode_3sat, SubsetSumInstance};

    #[test]
    fn single_atom() {
        let inst = SubsetSumInstance::from_raw(RawSubsetSum {
            weights: vec![Radical::basis(3)],
            target: Radical::basis(3),
        })
        .unwrap();
        let p = to_mattis(&inst).unwrap();
        let r = anneal(&p, AnnealOptions { sweeps: 2, ..Default::default() }).unwrap();
        assert_eq!(r.best, vec![true]);
    }

    #[test]
    fn satisfiable_three_sat_reaches_offset() {
        let f = CnfFormula::new(2, vec![[1, -2, 2]]).unwrap();
        let inst = encode_3sat(&f).unwrap();
        assert_eq!(inst.len(), 6);
        let p = to_mattis(&inst).unwrap();
        let hits = (0..20)
            .filter(|&seed| {
                let r = anneal(&p, AnnealOptions { seed, ..Default::default() }).unwrap();
                (r.best_energy - p.offset).abs() < 1e-9
            })
            .count();
        assert!(hits >= 19, "{hits}/20");
    }

    #[test]
    fn infeasible_stays_above_gap_and_is_deterministic() {
        let inst = SubsetSumInstance::from_raw(RawSubsetSum {
            weights: vec![Radical::basis(1), Radical::basis(2)],
            target: Radical::basis(4),
        })
        .unwrap();
        let p = to_mattis(&inst).unwrap();
        let gap = (0..4u64).map(|m| p.energy(&mask_to_bits(m, 2)) - p.offset).fold(f64::INFINITY, f64::min);
        assert!(gap > 0.0);
        let a = anneal(&p, AnnealOptions::default()).unwrap();
        assert!(a.best_energy - p.offset >= gap - 1e-12);
        let b = anneal(&p, AnnealOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
