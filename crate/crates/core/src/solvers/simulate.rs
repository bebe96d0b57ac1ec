//! State-vector integration of the ramped atom-cavity Hamiltonian
//! `H(t) = Σ (δ_m(t)/2) σᶻ_i + s(t) [g₄ (Σ λ_i σˣ_i)² + Σ h_i σˣ_i]`.
//!
//! Amplitudes are indexed by σˣ eigenvalues (bit `i` set ⟺ `s_i = +1`), so
//! the problem term is diagonal and each σᶻ_i acts as a bit flip.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{MattisProgram, RampSchedule};

pub const MAX_ATOMS: usize = 12;
pub const MIN_STEPS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationResult {
    /// Probability of each σˣ outcome; bit `i` of the index is `x_i`.
    pub probabilities: Vec<f64>,
    /// Largest `|‖ψ‖² − 1|` seen over the run.
    pub max_norm_drift: f64,
    /// `⟨ψ| H_problem |ψ⟩` at the end, in program energy units.
    pub final_energy: f64,
    pub ground_energy: f64,
    /// Probability mass on the program's ground states.
    pub success_probability: f64,
    pub ground_states: Vec<usize>,
}

/// Ground state of `Σ σᶻ_i`: every atom in `|↓⟩`, which has σˣ amplitudes
/// `±2^{-N/2}` with the sign set by the number of `−1` spins.
pub fn initial_state(n: usize) -> Vec<Complex64> {
    let amp = (0.5f64).powf(n as f64 / 2.0);
    (0..1usize << n)
        .map(|b| {
            let minus = n - b.count_ones() as usize;
            Complex64::new(if minus % 2 == 0 { amp } else { -amp }, 0.0)
        })
        .collect()
}

pub fn adiabatic_simulate(
    p: &MattisProgram,
    schedule: &RampSchedule,
    total_time: f64,
    steps: usize,
) -> Result<SimulationResult> {
    let n = p.atoms;
    if n > MAX_ATOMS {
        return Err(Error::SizeCap(format!("{n} atoms exceeds the simulator limit of {MAX_ATOMS}")));
    }
    if steps < MIN_STEPS {
        return Err(Error::Domain(format!("at least {MIN_STEPS} steps are required")));
    }
    if !(total_time >= 0.0) {
        return Err(Error::Domain("total time must be nonnegative".into()));
    }
    let dim = 1usize << n;
    let diag: Vec<f64> = (0..dim)
        .map(|b| {
            let s: Vec<i8> = (0..n).map(|i| if b >> i & 1 == 1 { 1 } else { -1 }).collect();
            p.raw_energy(&s)
        })
        .collect();
    let mut psi = initial_state(n);
    let dt = total_time / steps as f64;
    let mut drift = 0.0f64;
    if dt > 0.0 {
        for k in 0..steps {
            let s = schedule.at((k as f64 + 0.5) / steps as f64);
            for (a, &e) in psi.iter_mut().zip(&diag) {
                *a *= Complex64::from_polar(1.0, -dt * s * e);
            }
            let theta = dt * (1.0 - s) * p.delta_m0 / 2.0;
            let (c, sn) = (theta.cos(), theta.sin());
            let off = Complex64::new(0.0, -sn);
            for i in 0..n {
                let bit = 1usize << i;
                for b in 0..dim {
                    if b & bit == 0 {
                        let (u, v) = (psi[b], psi[b | bit]);
                        psi[b] = u * c + v * off;
                        psi[b | bit] = v * c + u * off;
                    }
                }
            }
            let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
            drift = drift.max((norm - 1.0).abs());
        }
    }
    let probabilities: Vec<f64> = psi.iter().map(|a| a.norm_sqr()).collect();
    let ground_energy = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * ground_energy.abs().max(1.0);
    let ground_states: Vec<usize> = (0..dim).filter(|&b| diag[b] <= ground_energy + tol).collect();
    Ok(SimulationResult {
        final_energy: probabilities.iter().zip(&diag).map(|(pr, e)| pr * e).sum(),
        success_probability: ground_states.iter().map(|&b| probabilities[b]).sum(),
        ground_states,
        ground_energy,
        max_norm_drift: drift,
        probabilities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{ramp, to_mattis, RampShape};
    use crate::instances::RawSubsetSum;
    use crate::radical::Radical;
    use crate::reductions::SubsetSumInstance;

    fn program(weights: Vec<Radical>, target: Radical) -> MattisProgram {
        to_mattis(&SubsetSumInstance::from_raw(RawSubsetSum { weights, target }).unwrap()).unwrap()
    }

    #[test]
    fn zero_time_keeps_initial_distribution() {
        let p = program(vec![Radical::basis(1), Radical::basis(2)], Radical::basis(1));
        let r = adiabatic_simulate(&p, &ramp(RampShape::Linear, 2).unwrap(), 0.0, 100).unwrap();
        assert!(r.probabilities.iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn single_atom_pins() {
        let p = program(vec![Radical::basis(2)], Radical::basis(2));
        let sched = ramp(RampShape::Smoothstep, 2).unwrap();
        let slow = adiabatic_simulate(&p, &sched, 200.0, 4000).unwrap();
        assert_eq!(slow.ground_states, vec![1]);
        assert!(slow.success_probability > 0.99);
        assert!(slow.max_norm_drift < 1e-9);
    }

    #[test]
    fn two_atom_slow_ramp() {
        let p = program(vec![Radical::basis(1), Radical::basis(2)], Radical::basis(1));
        let sched = ramp(RampShape::Smoothstep, 2).unwrap();
        let r = adiabatic_simulate(&p, &sched, 200.0, 4000).unwrap();
        assert_eq!(r.ground_states, vec![0b01]);
        assert!(r.probabilities[0b01] >= 0.9, "{}", r.probabilities[0b01]);
        assert!(r.max_norm_drift < 1e-9);
        assert!(r.final_energy >= r.ground_energy - 1e-6);
    }

    #[test]
    fn limits() {
        let p = program((1..=13).map(Radical::basis).collect(), Radical::basis(1));
        let sched = ramp(RampShape::Linear, 2).unwrap();
        assert!(matches!(adiabatic_simulate(&p, &sched, 1.0, 100), Err(Error::SizeCap(_))));
        let q = program(vec![Radical::basis(1)], Radical::basis(1));
        assert!(adiabatic_simulate(&q, &sched, 1.0, 99).is_err());
    }
}
