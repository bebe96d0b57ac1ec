//! Mattis program emission.
//!
//! A program is the collective atom-cavity energy
//! `E(s) = g₄ (Σ λ_i s_i)² + Σ h_i s_i` over spins `s_i = ±1`, read as binary
//! `x_i = (1 + s_i)/2`. The objective it encodes is recovered as
//! `scale · (E(s) − offset)`, so a zero-objective state sits exactly at
//! `offset`.

use num_rational::BigRational;
use std::collections::HashMap;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::parse_rational_text;
use crate::qubo::PenalizedObjective;
use crate::radical::{Radical, RadicalEvaluator};
use crate::reductions::{RoleTag, SubsetSumInstance};

/// Digits used when floating exact radicals.
pub const EMIT_PRECISION: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampShape {
    Linear,
    Smoothstep,
}

impl RampShape {
    pub fn eval(self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            RampShape::Linear => t,
            RampShape::Smoothstep => t * t * (3.0 - 2.0 * t),
        }
    }
}

impl std::str::FromStr for RampShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(RampShape::Linear),
            "smoothstep" => Ok(RampShape::Smoothstep),
            _ => Err(Error::Domain(format!("unknown ramp shape '{s}' (expected linear or smoothstep)"))),
        }
    }
}

/// `δ_m(t) = (1 − s(t)) δ_m(0)`, `g₄(t) = s(t) g₄`, `B_i(t) = s(t) B_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampSchedule {
    pub shape: RampShape,
    pub steps: usize,
    /// `s` at `t = k/(steps−1)`.
    pub samples: Vec<f64>,
}

impl RampSchedule {
    pub fn at(&self, t: f64) -> f64 {
        self.shape.eval(t)
    }
}

pub fn ramp(shape: RampShape, steps: usize) -> Result<RampSchedule> {
    if steps < 2 {
        return Err(Error::Domain("a ramp needs at least 2 samples".into()));
    }
    let samples = (0..steps)
        .map(|k| match k {
            0 => 0.0,
            k if k == steps - 1 => 1.0,
            k => shape.eval(k as f64 / (steps - 1) as f64),
        })
        .collect();
    Ok(RampSchedule { shape, steps, samples })
}

pub fn atom_positions(lambdas: &[f64], q: f64) -> Result<Vec<f64>> {
    if !(q > 0.0) {
        return Err(Error::Domain("wave vector Q must be positive".into()));
    }
    lambdas
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            if l.abs() > 1.0 || l.is_nan() {
                Err(Error::Domain(format!("λ_{} = {l} is outside [−1, 1]", i + 1)))
            } else {
                Ok(l.asin() / q)
            }
        })
        .collect()
}

/// Penalty bookkeeping of a program emitted from a penalized objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyTerms {
    pub delta: String,
    pub constant: String,
    pub costs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MattisProgram {
    pub atoms: usize,
    #[serde(rename = "lambda")]
    pub lambdas: Vec<f64>,
    #[serde(rename = "h")]
    pub fields: Vec<f64>,
    pub g4: f64,
    pub delta_m0: f64,
    pub positions: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: f64,
    pub scale: f64,
    pub offset: f64,
    pub a_max: f64,
    pub schedule: RampSchedule,
    pub exact_weights: Vec<Radical>,
    pub target: Radical,
    pub roles: Vec<RoleTag>,
    /// `−2 T a_i / a_max²`, the field formula written for `x = s`; kept for
    /// reference only.
    pub reference_h: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<PenaltyTerms>,
}

struct Floats {
    a: Vec<f64>,
    a_max: f64,
    /// `Σ a_i / 2 − T`.
    c: f64,
    t: f64,
}

fn float_weights(weights: &[Radical], target: &Radical) -> Result<Floats> {
    let bound = weights.iter().chain([target]).filter_map(Radical::max_rank).max().unwrap_or(1);
    let ev = RadicalEvaluator::new(bound, EMIT_PRECISION);
    let a: Vec<f64> = weights.iter().map(|w| ev.eval(w)).collect();
    let a_max = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if a_max == 0.0 {
        return Err(Error::Domain("all weights are zero".into()));
    }
    let twice_c = &weights.iter().cloned().sum::<Radical>() - &target.scaled(&2.into());
    Ok(Floats {
        a,
        a_max,
        c: ev.eval(&twice_c) / 2.0,
        t: ev.eval(target),
    })
}

fn assemble(
    inst: &SubsetSumInstance,
    f: &Floats,
    fields: Vec<f64>,
    scale: f64,
    offset: f64,
    penalty: Option<PenaltyTerms>,
) -> Result<MattisProgram> {
    let lambdas: Vec<f64> = f.a.iter().map(|a| a / f.a_max).collect();
    let q = 1.0;
    let positions = atom_positions(&lambdas, q)?;
    let max_h = fields.iter().fold(0.0f64, |m, h| m.max(h.abs()));
    let delta_m0 = 2.0 * (max_h + lambdas.iter().map(|l| l * l).sum::<f64>());
    Ok(MattisProgram {
        atoms: lambdas.len(),
        reference_h: f.a.iter().map(|a| -2.0 * f.t * a / (f.a_max * f.a_max)).collect(),
        lambdas,
        fields,
        g4: 1.0,
        delta_m0,
        positions,
        q,
        scale,
        offset,
        a_max: f.a_max,
        schedule: ramp(RampShape::Linear, 101)?,
        exact_weights: inst.weights.clone(),
        target: inst.target.clone(),
        roles: inst.roles.clone(),
        penalty,
    })
}

/// `(Σ x_i a_i − T)² / a_max² = ¼ ((Σλ s)² + Σ h s − offset)` with
/// `h_i = 4 c a_i / a_max²`, `offset = −4c²/a_max²`, `c = Σa/2 − T`.
pub fn to_mattis(inst: &SubsetSumInstance) -> Result<MattisProgram> {
    let f = float_weights(&inst.weights, &inst.target)?;
    let a2 = f.a_max * f.a_max;
    let fields = f.a.iter().map(|a| 4.0 * f.c * a / a2).collect();
    assemble(inst, &f, fields, 0.25, -4.0 * f.c * f.c / a2, None)
}

/// `Σ L_k y_k + Δ (Σ y_k r_k − T)² + C`, with the linear costs carried by the
/// field channel: `h_k = 4cλ_k/a_max + 2L_k/(Δ a_max²)`, `scale = Δ a_max²/4`.
pub fn to_mattis_penalized(p: &PenalizedObjective) -> Result<MattisProgram> {
    let inst = &p.constraint;
    let f = float_weights(&inst.weights, &inst.target)?;
    let delta = p.delta.to_f64().unwrap_or(f64::NAN);
    let costs: Vec<f64> = p.costs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    let da2 = delta * f.a_max * f.a_max;
    let fields = f
        .a
        .iter()
        .zip(&costs)
        .map(|(a, l)| 4.0 * f.c * a / (f.a_max * f.a_max) + 2.0 * l / da2)
        .collect();
    let half_costs = p.costs.iter().sum::<BigRational>() / BigRational::from_integer(2.into());
    let lin = (half_costs + &p.constant).to_f64().unwrap_or(f64::NAN);
    let offset = -4.0 * (delta * f.c * f.c + lin) / da2;
    let terms = PenaltyTerms {
        delta: p.delta.to_string(),
        constant: p.constant.to_string(),
        costs: p.costs.iter().map(ToString::to_string).collect(),
    };
    assemble(inst, &f, fields, da2 / 4.0, offset, Some(terms))
}

impl MattisProgram {
    /// `(Σ λ_i s_i)² + Σ h_i s_i` in units of `g₄`.
    pub fn raw_energy(&self, s: &[i8]) -> f64 {
        let mut m = 0.0;
        let mut lin = 0.0;
        for ((&l, &h), &si) in self.lambdas.iter().zip(&self.fields).zip(s) {
            let si = si as f64;
            m += l * si;
            lin += h * si;
        }
        self.g4 * m * m + lin
    }

    pub fn energy(&self, x: &[bool]) -> f64 {
        self.raw_energy(&to_spins(x))
    }

    /// The encoded objective: `scale · (energy − offset)`.
    pub fn objective(&self, x: &[bool]) -> f64 {
        self.scale * (self.energy(x) - self.offset)
    }

    /// The encoded objective from exact weights, floated only at the end.
    pub fn exact_objective(&self, x: &[bool]) -> Result<f64> {
        let mut r = -&self.target;
        for (w, &xi) in self.exact_weights.iter().zip(x) {
            if xi {
                r += w;
            }
        }
        let res = r.to_float(EMIT_PRECISION);
        match &self.penalty {
            None => Ok(res * res / (self.a_max * self.a_max)),
            Some(p) => {
                let rat = |s: &str| {
                    parse_rational_text(s).ok_or_else(|| Error::Invariant(format!("bad rational '{s}' in penalty terms")))
                };
                let mut lin = rat(&p.constant)?;
                for (c, &xi) in p.costs.iter().zip(x) {
                    if xi {
                        lin += rat(c)?;
                    }
                }
                let delta = rat(&p.delta)?.to_f64().unwrap_or(f64::NAN);
                Ok(lin.to_f64().unwrap_or(f64::NAN) + delta * res * res)
            }
        }
    }

    /// Checks the structural invariants of a loaded program.
    pub fn validate(&self) -> Result<()> {
        let n = self.atoms;
        if [self.lambdas.len(), self.fields.len(), self.positions.len(), self.exact_weights.len(), self.roles.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(Error::Invariant("program arrays disagree with the atom count".into()));
        }
        for (i, (&l, &x)) in self.lambdas.iter().zip(&self.positions).enumerate() {
            if l.abs() > 1.0 || ((self.q * x).sin() - l).abs() > 1e-12 {
                return Err(Error::Invariant(format!("atom {}: sin(Q·X) does not reproduce λ", i + 1)));
            }
        }
        if !(self.g4 > 0.0 && self.q > 0.0) {
            return Err(Error::Invariant("g4 and Q must be positive".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("program serializes")
    }
}

pub fn to_spins(x: &[bool]) -> Vec<i8> {
    x.iter().map(|&b| if b { 1 } else { -1 }).collect()
}

/// Exact residual classes of a bare program: assignments grouped by
/// `|Σ x_i a_i − T|`, smallest first.
#[derive(Clone, Debug)]
pub struct Landscape {
    /// `(exact objective as float, assignments)` per distinct exact value.
    pub levels: Vec<(f64, Vec<u64>)>,
}

impl Landscape {
    pub fn argmin(&self) -> &[u64] {
        self.levels.first().map(|(_, a)| a.as_slice()).unwrap_or(&[])
    }
}

/// Enumerates all `2^N` assignments of a bare program (N ≤ 20) and groups
/// them by exact objective value.
pub fn exact_landscape(p: &MattisProgram) -> Result<Landscape> {
    if p.penalty.is_some() {
        return Err(Error::Domain("exact landscape is defined for bare programs only".into()));
    }
    let n = p.atoms;
    if n > 20 {
        return Err(Error::SizeCap(format!("{n} atoms exceeds the 20-atom exhaustive limit")));
    }
    let mut groups: HashMap<Radical, Vec<u64>> = Default::default();
    let mut r = -&p.target;
    let mut x = vec![false; n];
    let key = |r: &Radical, mask: u64, groups: &mut HashMap<Radical, Vec<u64>>| {
        let negative = r.terms().next().is_some_and(|(_, c)| c.is_negative());
        let canon = if negative { -r } else { r.clone() };
        groups.entry(canon).or_default().push(mask);
    };
    key(&r, 0, &mut groups);
    let mut mask = 0u64;
    for step in 1u64..(1 << n) {
        let i = step.trailing_zeros() as usize;
        x[i] = !x[i];
        mask ^= 1 << i;
        if x[i] {
            r += &p.exact_weights[i];
        } else {
            r -= &p.exact_weights[i];
        }
        key(&r, mask, &mut groups);
    }
    let a2 = p.a_max * p.a_max;
    let mut levels: Vec<(f64, Vec<u64>)> = groups
        .into_iter()
        .map(|(res, mut masks)| {
            masks.sort_unstable();
            let f = res.to_float(EMIT_PRECISION);
            (f * f / a2, masks)
        })
        .collect();
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(Landscape { levels })
}

/// Errors when the two lowest distinct exact levels are closer than `1e-8`
/// in floating point, where the float argmin could disagree with the exact one.
pub fn check_separation(l: &Landscape) -> Result<()> {
    if let [(e0, _), (e1, _), ..] = l.levels.as_slice() {
        if e1 - e0 < 1e-8 {
            return Err(Error::Precondition(format!(
                "lowest exact levels {e0:e} and {e1:e} are closer than 1e-8"
            )));
        }
    }
    Ok(())
}

pub fn mask_to_bits(mask: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

/// Assignments whose program objective lies within `tol` of the minimum.
pub fn program_argmin(p: &MattisProgram, tol: f64) -> Vec<u64> {
    let n = p.atoms;
    let e: Vec<f64> = (0..1u64 << n).map(|m| p.objective(&mask_to_bits(m, n))).collect();
    let min = e.iter().cloned().fold(f64::INFINITY, f64::min);
    (0..1u64 << n).filter(|&m| e[m as usize] <= min + tol).collect()
}

impl PenaltyTerms {
    pub fn delta(&self) -> Option<BigRational> {
        parse_rational_text(&self.delta)
    }

    pub fn is_trivial(&self) -> bool {
        self.costs.iter().all(|c| parse_rational_text(c).is_some_and(|r| r.is_zero()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{CnfFormula, Graph, QuboInstance, RawSubsetSum};
    use crate::qubo::qubo_compile;
    use crate::reductions::{encode_3sat, encode_maxcut, encode_vertex_cover};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn raw(weights: Vec<Radical>, target: Radical) -> SubsetSumInstance {
        SubsetSumInstance::from_raw(RawSubsetSum { weights, target }).unwrap()
    }

    fn assert_fidelity(inst: &SubsetSumInstance) {
        let p = to_mattis(inst).unwrap();
        for m in 0..1u64 << p.atoms {
            let x = mask_to_bits(m, p.atoms);
            let exact = p.exact_objective(&x).unwrap();
            assert!((p.objective(&x) - exact).abs() < 1e-9, "mask {m:b}");
        }
    }

    #[test]
    fn single_atom() {
        let p = to_mattis(&raw(vec![Radical::basis(2)], Radical::basis(2))).unwrap();
        assert_eq!(p.lambdas, vec![1.0]);
        assert_abs_diff_eq!(p.objective(&[true]), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.energy(&[true]), p.offset, epsilon = 1e-12);
        assert!(p.objective(&[false]) > 0.5);
    }

    #[test]
    fn three_sat_witness_sits_at_offset() {
        let f = CnfFormula::new(3, vec![[1, 2, 3], [-1, 2, -3], [1, -2, 3]]).unwrap();
        let inst = encode_3sat(&f).unwrap();
        let p = to_mattis(&inst).unwrap();
        let l = exact_landscape(&p).unwrap();
        check_separation(&l).unwrap();
        for m in 0..1u64 << p.atoms {
            let x = mask_to_bits(m, p.atoms);
            if inst.is_witness(&x) {
                assert_abs_diff_eq!(p.energy(&x), p.offset, epsilon = 1e-9);
            } else {
                assert!(p.energy(&x) > p.offset + 1e-6);
            }
        }
        let mut a: Vec<u64> = program_argmin(&p, 1e-9);
        a.sort_unstable();
        assert_eq!(a, l.argmin());
    }

    #[test]
    fn signed_weights_stay_normalized() {
        let k3 = Graph::undirected(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let p = to_mattis(&encode_maxcut(&k3, 2).unwrap()).unwrap();
        assert!(p.lambdas.iter().all(|l| l.abs() <= 1.0));
        assert!(p.lambdas.iter().any(|l| (l.abs() - 1.0).abs() < 1e-15));
        p.validate().unwrap();
        assert_fidelity(&encode_maxcut(&k3, 2).unwrap());
    }

    #[test]
    fn all_zero_rejected() {
        assert!(to_mattis(&raw(vec![Radical::zero()], Radical::basis(1))).is_err());
    }

    #[test]
    fn positions_and_ramps() {
        assert_eq!(atom_positions(&[0.0], 1.0).unwrap(), vec![0.0]);
        assert_abs_diff_eq!(atom_positions(&[1.0], 1.0).unwrap()[0], std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(atom_positions(&[0.5], 2.0).unwrap()[0], std::f64::consts::PI / 12.0, epsilon = 1e-15);
        assert!(atom_positions(&[1.5], 1.0).is_err());
        assert_eq!(RampShape::Linear.eval(0.5), 0.5);
        assert_eq!(RampShape::Smoothstep.eval(0.5), 0.5);
        assert_eq!(RampShape::Smoothstep.eval(0.25), 0.15625);
        let r = ramp(RampShape::Smoothstep, 11).unwrap();
        assert_eq!((r.samples[0], r.samples[10]), (0.0, 1.0));
        assert!(r.samples.windows(2).all(|w| w[0] <= w[1]));
        assert!(ramp(RampShape::Linear, 1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let k3 = Graph::undirected(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let p = to_mattis(&encode_vertex_cover(&k3, 2).unwrap()).unwrap();
        let back: MattisProgram = serde_json::from_value(p.to_json()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn zero_qubo_matches_bare_program() {
        let c = qubo_compile(&QuboInstance::zeros(3)).unwrap();
        let pen = to_mattis_penalized(&c.objective).unwrap();
        let bare = to_mattis(&c.objective.constraint).unwrap();
        assert_eq!(pen.lambdas, bare.lambdas);
        for (a, b) in pen.fields.iter().zip(&bare.fields) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(pen.offset, bare.offset, epsilon = 1e-12);
    }

    #[test]
    fn penalized_program_decodes_qubo_optimum() {
        let mut q = QuboInstance::zeros(3);
        q.add_pair(0, 1, &BigRational::from_integer(2.into()));
        q.add_pair(1, 2, &BigRational::from_integer((-3).into()));
        q.linear[0] = BigRational::from_integer((-1).into());
        let c = qubo_compile(&q).unwrap();
        let obj = &c.objective;
        let p = to_mattis_penalized(obj).unwrap();
        let n = p.atoms;
        let mut feasible = Vec::new();
        for m in 0..8u64 {
            let mut s = to_spins(&mask_to_bits(m, 3));
            if obj.parity.reference_spin {
                s.push(1);
            }
            let y = obj.forward(&s).unwrap();
            let e = p.objective(&y);
            assert_abs_diff_eq!(e, obj.value_real(&y), epsilon = 1e-8);
            assert_abs_diff_eq!(e, q.evaluate(&mask_to_bits(m, 3)).to_f64().unwrap(), epsilon = 1e-8);
            feasible.push((e, y));
        }
        let (best, y) = feasible.iter().min_by(|a, b| a.0.total_cmp(&b.0)).unwrap();
        let x = obj.decode_qubo(y).unwrap();
        let brute = (0..8u64).map(|m| q.evaluate(&mask_to_bits(m, 3))).min().unwrap();
        assert_eq!(q.evaluate(&x), brute);
        let worst = feasible.iter().map(|f| f.0).fold(f64::MIN, f64::max);
        let worst_exact = (0..8u64).map(|m| q.evaluate(&mask_to_bits(m, 3))).max().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let y: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            if !obj.constraint.is_witness(&y) {
                assert!(obj.value_rankwise(&y) > worst_exact);
            }
        }
        assert!(*best <= worst);
        // Scale audit at a few assignments.
        for _ in 0..3 {
            let y: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
            let v = obj.value_real(&y);
            assert!((p.objective(&y) - v).abs() <= 1e-9 * v.abs().max(1.0));
            assert!((p.exact_objective(&y).unwrap() - v).abs() <= 1e-9 * v.abs().max(1.0));
        }
    }

    proptest! {
        #[test]
        fn fidelity_on_random_radicals(
            ws in prop::collection::vec(prop::collection::vec((1u32..8, -3i64..=3), 1..3), 1..9),
            pick in prop::collection::vec(any::<bool>(), 9),
        ) {
            let weights: Vec<Radical> = ws.iter().map(|t| {
                let mut r = Radical::zero();
                for &(p, c) in t { r.add_term(p, c); }
                r
            }).collect();
            prop_assume!(weights.iter().any(|w| !w.is_zero()));
            let target = weights.iter().zip(&pick).filter(|(_, &b)| b).map(|(w, _)| w.clone()).sum();
            let inst = raw(weights, target);
            let p = to_mattis(&inst).unwrap();
            for (l, x) in p.lambdas.iter().zip(&p.positions) {
                prop_assert!(((p.q * x).sin() - l).abs() < 1e-12);
            }
            for m in 0..1u64 << p.atoms {
                let x = mask_to_bits(m, p.atoms);
                prop_assert!((p.objective(&x) - p.exact_objective(&x).unwrap()).abs() < 1e-9);
            }
        }
    }
}
