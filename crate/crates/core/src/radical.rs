//! Exact arithmetic over integer combinations of square roots of squarefree
//! integers.
//!
//! A [`Radical`] is an element of the free abelian group generated by
//! `√α_p`, where `α_p` is the `p`-th squarefree integer. The square roots of
//! distinct squarefree integers are linearly independent over the
//! rationals, so two radicals denote the same real number exactly when their
//! coefficient maps coincide. Every encoder in this crate relies on that:
//! target equality is decided on coefficients, never on floats.
//!
//! Terms are keyed by rank `p` rather than by the integer `α_p`; the integer
//! is only materialized when a float value is requested.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default number of decimal digits used by [`Radical::to_float_default`].
pub const DEFAULT_PRECISION: u32 = 30;

/// Returns the `p`-th squarefree integer, counting from `squarefree(1) = 1`.
pub fn squarefree(p: u64) -> Result<u64> {
    if p == 0 {
        return Err(Error::Domain("squarefree rank must be >= 1".into()));
    }
    let table = squarefree_table(p as usize);
    Ok(table[p as usize - 1])
}

/// The first `count` squarefree integers in ascending order.
pub fn squarefree_table(count: usize) -> Vec<u64> {
    if count == 0 {
        return Vec::new();
    }
    // Squarefree density is 6/π² ≈ 0.61, so 2·count + 16 almost always suffices.
    let mut bound = 2 * count as u64 + 16;
    loop {
        let mut sieve = vec![true; bound as usize + 1];
        let mut k = 2u64;
        while k * k <= bound {
            let sq = k * k;
            let mut m = sq;
            while m <= bound {
                sieve[m as usize] = false;
                m += sq;
            }
            k += 1;
        }
        let out: Vec<u64> = (1..=bound)
            .filter(|&v| sieve[v as usize])
            .take(count)
            .collect();
        if out.len() == count {
            return out;
        }
        bound *= 2;
    }
}

/// Rank `p ≥ 1` in the ascending sequence of squarefree integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct SquarefreeIndex(u32);

impl SquarefreeIndex {
    pub fn new(p: u32) -> Result<Self> {
        if p == 0 {
            Err(Error::Domain("squarefree rank must be >= 1".into()))
        } else {
            Ok(SquarefreeIndex(p))
        }
    }

    pub fn rank(self) -> u32 {
        self.0
    }

    /// The squarefree integer `α_p` this rank denotes.
    pub fn value(self) -> u64 {
        squarefree(self.0 as u64).expect("rank is nonzero by construction")
    }
}

impl TryFrom<u32> for SquarefreeIndex {
    type Error = Error;
    fn try_from(p: u32) -> Result<Self> {
        SquarefreeIndex::new(p)
    }
}

impl From<SquarefreeIndex> for u32 {
    fn from(p: SquarefreeIndex) -> u32 {
        p.0
    }
}

/// Integer combination `Σ c_p √α_p`, stored sparsely in canonical form
/// (no zero coefficients).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Radical {
    terms: BTreeMap<SquarefreeIndex, BigInt>,
}

impl Radical {
    pub fn zero() -> Self {
        Radical::default()
    }

    /// The integer `n`, i.e. `n·√α_1`.
    pub fn integer(n: impl Into<BigInt>) -> Self {
        Radical::term(1, n)
    }

    /// `√α_p`.
    pub fn basis(p: u32) -> Self {
        Radical::term(p, 1)
    }

    /// `c·√α_p`. Panics if `p == 0`; encoders only ever pass literal ranks.
    pub fn term(p: u32, c: impl Into<BigInt>) -> Self {
        let mut r = Radical::zero();
        r.add_term(p, c);
        r
    }

    /// Adds `c·√α_p` in place.
    pub fn add_term(&mut self, p: u32, c: impl Into<BigInt>) {
        let idx = SquarefreeIndex::new(p).expect("squarefree rank must be >= 1");
        let c = c.into();
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(idx).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&idx);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: u32) -> BigInt {
        SquarefreeIndex::new(p)
            .ok()
            .and_then(|idx| self.terms.get(&idx).cloned())
            .unwrap_or_else(BigInt::zero)
    }

    /// `(rank, coefficient)` pairs in ascending rank order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &BigInt)> + '_ {
        self.terms.iter().map(|(p, c)| (p.rank(), c))
    }

    pub fn ranks(&self) -> impl Iterator<Item = u32> + '_ {
        self.terms.keys().map(|p| p.rank())
    }

    pub fn max_rank(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|p| p.rank())
    }

    pub fn scaled(&self, k: &BigInt) -> Radical {
        if k.is_zero() {
            return Radical::zero();
        }
        Radical {
            terms: self.terms.iter().map(|(p, c)| (*p, c * k)).collect(),
        }
    }

    /// Sum of absolute coefficients.
    pub fn l1_norm(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).sum()
    }

    /// Float value with at least `precision` correct decimal digits before
    /// the final rounding to `f64`. Precision below 15 is raised to 15.
    ///
    /// Each `√α_p` is evaluated in fixed point; the working precision doubles
    /// until the accumulated truncation error is provably below
    /// `10^-precision` relative to the result, so catastrophic cancellation
    /// between terms cannot leak into the returned value.
    pub fn to_float(&self, precision: u32) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let precision = precision.max(15);
        let table = squarefree_table(self.max_rank().unwrap_or(1) as usize);
        let l1 = self.l1_norm();
        let mut digits = precision + 8 + l1.to_string().len() as u32;
        loop {
            let scale = BigInt::from(10u32).pow(digits);
            let scale_sq = &scale * &scale;
            let mut acc = BigInt::zero();
            for (p, c) in &self.terms {
                let v = BigInt::from(table[p.rank() as usize - 1]);
                acc += c * (v * &scale_sq).sqrt();
            }
            // Each truncated root is off by less than one unit in the last
            // place, so |error| < l1 units.
            let threshold = &l1 * BigInt::from(10u32).pow(precision);
            if acc.abs() > threshold || digits > 4000 {
                return fixed_to_f64(&acc, digits);
            }
            digits *= 2;
        }
    }

    pub fn to_float_default(&self) -> f64 {
        self.to_float(DEFAULT_PRECISION)
    }
}

fn fixed_to_f64(mantissa: &BigInt, digits: u32) -> f64 {
    format!("{mantissa}e-{digits}")
        .parse::<f64>()
        .expect("decimal literal always parses")
}

/// Fast repeated evaluation of many radicals over a fixed rank window.
///
/// Roots are computed once in fixed point; a result whose magnitude does not
/// clear the truncation bound is recomputed with [`Radical::to_float`].
#[derive(Clone, Debug)]
pub struct RadicalEvaluator {
    roots: Vec<BigInt>,
    digits: u32,
    precision: u32,
}

impl RadicalEvaluator {
    pub fn new(max_rank: u32, precision: u32) -> Self {
        let precision = precision.max(15);
        let digits = precision + 24;
        let scale_sq = BigInt::from(10u32).pow(2 * digits);
        let roots = squarefree_table(max_rank as usize)
            .into_iter()
            .map(|v| (BigInt::from(v) * &scale_sq).sqrt())
            .collect();
        RadicalEvaluator {
            roots,
            digits,
            precision,
        }
    }

    pub fn eval(&self, x: &Radical) -> f64 {
        self.eval_pairs(x.terms().map(|(p, c)| (p, c.clone())), || x.clone())
    }

    /// Evaluates `Σ c_p √α_p` given as `(rank, coefficient)` pairs.
    pub fn eval_sparse(&self, pairs: &[(u32, i64)]) -> f64 {
        self.eval_pairs(pairs.iter().map(|&(p, c)| (p, BigInt::from(c))), || {
            let mut r = Radical::zero();
            for &(p, c) in pairs {
                r.add_term(p, c);
            }
            r
        })
    }

    fn eval_pairs(
        &self,
        pairs: impl Iterator<Item = (u32, BigInt)>,
        fallback: impl FnOnce() -> Radical,
    ) -> f64 {
        let mut acc = BigInt::zero();
        let mut l1 = BigInt::zero();
        for (p, c) in pairs {
            if c.is_zero() {
                continue;
            }
            let Some(root) = self.roots.get(p as usize - 1) else {
                return fallback().to_float(self.precision);
            };
            l1 += c.abs();
            acc += &c * root;
        }
        if l1.is_zero() {
            return 0.0;
        }
        let threshold = &l1 * BigInt::from(10u32).pow(self.precision);
        if acc.abs() > threshold {
            fixed_to_f64(&acc, self.digits)
        } else {
            fallback().to_float(self.precision)
        }
    }
}

impl Neg for Radical {
    type Output = Radical;
    fn neg(mut self) -> Radical {
        for c in self.terms.values_mut() {
            *c = -std::mem::take(c);
        }
        self
    }
}

impl Neg for &Radical {
    type Output = Radical;
    fn neg(self) -> Radical {
        -self.clone()
    }
}

impl AddAssign<&Radical> for Radical {
    fn add_assign(&mut self, rhs: &Radical) {
        for (p, c) in &rhs.terms {
            self.add_term(p.rank(), c.clone());
        }
    }
}

impl SubAssign<&Radical> for Radical {
    fn sub_assign(&mut self, rhs: &Radical) {
        for (p, c) in &rhs.terms {
            self.add_term(p.rank(), -c);
        }
    }
}

impl Add<&Radical> for &Radical {
    type Output = Radical;
    fn add(self, rhs: &Radical) -> Radical {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Radical {
    type Output = Radical;
    fn add(mut self, rhs: Radical) -> Radical {
        self += &rhs;
        self
    }
}

impl Sub<&Radical> for &Radical {
    type Output = Radical;
    fn sub(self, rhs: &Radical) -> Radical {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Radical {
    type Output = Radical;
    fn sub(mut self, rhs: Radical) -> Radical {
        self -= &rhs;
        self
    }
}

impl<'a> std::iter::Sum<&'a Radical> for Radical {
    fn sum<I: Iterator<Item = &'a Radical>>(iter: I) -> Radical {
        let mut acc = Radical::zero();
        for r in iter {
            acc += r;
        }
        acc
    }
}

impl std::iter::Sum for Radical {
    fn sum<I: Iterator<Item = Radical>>(iter: I) -> Radical {
        let mut acc = Radical::zero();
        for r in iter {
            acc += &r;
        }
        acc
    }
}

/// Canonical text form: `[(p,c),...]` sorted by rank, e.g. `[(1,3),(4,-2)]`
/// for `3√1 − 2√5`.
impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (p, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "({},{})", p.rank(), c)?;
        }
        f.write_str("]")
    }
}

impl FromStr for Radical {
    type Err = Error;

    /// Parses the canonical text form. Whitespace is ignored; repeated ranks
    /// are summed.
    fn from_str(s: &str) -> Result<Radical> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = |msg: &str| Error::format("radical", format!("{msg} in {s:?}"));
        let inner = compact
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| bad("expected surrounding brackets"))?;
        let mut out = Radical::zero();
        if inner.is_empty() {
            return Ok(out);
        }
        let mut rest = inner;
        loop {
            let body_start = rest.strip_prefix('(').ok_or_else(|| bad("expected '('"))?;
            let close = body_start.find(')').ok_or_else(|| bad("unterminated pair"))?;
            let (body, tail) = body_start.split_at(close);
            let (p, c) = body.split_once(',').ok_or_else(|| bad("expected 'rank,coefficient'"))?;
            let p: u32 = p.parse().map_err(|_| bad("invalid rank"))?;
            if p == 0 {
                return Err(bad("rank must be >= 1"));
            }
            let c: BigInt = c.parse().map_err(|_| bad("invalid coefficient"))?;
            out.add_term(p, c);
            let tail = &tail[1..];
            if tail.is_empty() {
                break;
            }
            rest = tail.strip_prefix(',').ok_or_else(|| bad("expected ','"))?;
        }
        Ok(out)
    }
}

impl Serialize for Radical {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Radical {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Radical {
    fn from(n: i64) -> Radical {
        Radical::integer(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sieve_oracle(limit: u64) -> Vec<u64> {
        (1..=limit)
            .filter(|&v| (2..=v).take_while(|k| k * k <= v).all(|k| v % (k * k) != 0))
            .collect()
    }

    #[test]
    fn squarefree_examples() {
        assert_eq!(squarefree(1).unwrap(), 1);
        assert_eq!(squarefree(4).unwrap(), 5);
        assert_eq!(squarefree(7).unwrap(), 10);
        assert!(matches!(squarefree(0), Err(Error::Domain(_))));
    }

    #[test]
    fn squarefree_matches_trial_division() {
        let oracle = sieve_oracle(2000);
        let table = squarefree_table(oracle.len());
        assert_eq!(table, oracle);
        assert!(table.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn addition_examples() {
        let x = Radical::basis(2) + Radical::basis(3);
        assert_eq!(x + -Radical::basis(3), Radical::basis(2));
        let y = Radical::term(4, 7);
        assert_eq!(Radical::zero() + y.clone(), y);
        let s = Radical::term(4, 2) + Radical::term(4, 3);
        assert_eq!(s, Radical::term(4, 5));
        // 2√5 + 3√5 = 5√5 ≈ 11.1803398874989...
        assert!((s.to_float(30) - 11.180339887498949).abs() < 1e-12);
    }

    #[test]
    fn equality_examples() {
        // √2 + √3 ≈ 3.146 vs √5 ≈ 2.236
        let lhs = Radical::basis(2) + Radical::basis(3);
        assert_ne!(lhs, Radical::basis(4));
        assert_eq!(lhs, lhs.clone());
        assert_eq!(Radical::basis(1), Radical::integer(1));
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn to_float_examples() {
        assert_eq!(Radical::basis(2).to_float(16), 1.4142135623730951);
        assert_eq!(Radical::zero().to_float(30), 0.0);
        assert_eq!(Radical::term(1, 3).to_float(30), 3.0);
    }

    #[test]
    fn to_float_survives_cancellation() {
        // √2 + √3 − √10 ≈ −0.01601... ; 1e6·(√2) − 1e6·(√2) + √3 exercises large l1.
        let x = Radical::basis(2) + Radical::basis(3) - Radical::basis(7);
        let expected = 2f64.sqrt() + 3f64.sqrt() - 10f64.sqrt();
        assert!((x.to_float(30) - expected).abs() < 1e-15);
        let big = Radical::term(2, 1_000_000) + Radical::basis(3) - Radical::term(2, 1_000_000);
        assert_eq!(big.to_float(30), 3f64.sqrt());
    }

    #[test]
    fn canonical_text() {
        let x = Radical::term(1, 3) + Radical::term(4, -2);
        assert_eq!(x.to_string(), "[(1,3),(4,-2)]");
        assert_eq!("[(4,-2), (1,3)]".parse::<Radical>().unwrap(), x);
        assert_eq!("[]".parse::<Radical>().unwrap(), Radical::zero());
        assert!("[(0,1)]".parse::<Radical>().is_err());
        assert!("(1,1)".parse::<Radical>().is_err());
        assert!("[(1,1)(2,2)]".parse::<Radical>().is_err());
    }

    #[test]
    fn evaluator_agrees_with_to_float() {
        let ev = RadicalEvaluator::new(40, 30);
        let x = Radical::basis(2) + Radical::basis(3) - Radical::basis(7) + Radical::term(39, -4);
        assert_eq!(ev.eval(&x), x.to_float(30));
        assert_eq!(ev.eval_sparse(&[(2, 1), (3, 1), (7, -1)]), (Radical::basis(2) + Radical::basis(3) - Radical::basis(7)).to_float(30));
        // Falls back for ranks outside the window.
        assert_eq!(ev.eval(&Radical::basis(100)), Radical::basis(100).to_float(30));
    }

    fn arb_radical() -> impl Strategy<Value = Radical> {
        prop::collection::vec((1u32..40, -1_000_000i64..=1_000_000), 0..20).prop_map(|pairs| {
            let mut r = Radical::zero();
            for (p, c) in pairs {
                r.add_term(p, c);
            }
            r
        })
    }

    proptest! {
        #[test]
        fn no_zero_coefficients(x in arb_radical(), y in arb_radical()) {
            let s = &x + &y;
            prop_assert!(s.terms().all(|(_, c)| !c.is_zero()));
        }

        #[test]
        fn abelian_group(x in arb_radical(), y in arb_radical(), z in arb_radical()) {
            prop_assert!((&x + &(-&x)).is_zero());
            prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
            prop_assert_eq!(&x + &y, &y + &x);
        }

        #[test]
        fn equality_agrees_with_numeric_oracle(x in arb_radical(), y in arb_radical()) {
            let close = (x.to_float(30) - y.to_float(30)).abs() < 1e-20;
            prop_assert_eq!(x == y, close);
        }

        #[test]
        fn equality_of_near_copies(x in arb_radical(), p in 1u32..40) {
            let y = &x + &Radical::basis(p);
            let close = (x.to_float(30) - y.to_float(30)).abs() < 1e-20;
            prop_assert!(!close);
            prop_assert_ne!(x, y);
        }

        #[test]
        fn text_round_trip(x in arb_radical()) {
            prop_assert_eq!(x.to_string().parse::<Radical>().unwrap(), x);
        }
    }
}
