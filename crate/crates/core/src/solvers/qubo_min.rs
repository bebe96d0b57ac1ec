//! Exhaustive QUBO minimization in exact integer arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::QuboInstance;

pub const MAX_QUBO_VARIABLES: usize = 30;

/// Argmins kept per run; the count is always exact.
pub const ARGMIN_LIMIT: usize = 1024;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuboMinimum {
    #[serde(serialize_with = "ser_rational")]
    pub value: BigRational,
    pub argmins: Vec<Vec<bool>>,
    pub argmin_count: u64,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

pub fn minimize_qubo(q: &QuboInstance) -> Result<QuboMinimum> {
    let n = q.n;
    if n > MAX_QUBO_VARIABLES {
        return Err(Error::SizeCap(format!("{n} variables exceeds the exhaustive limit of {MAX_QUBO_VARIABLES}")));
    }
    // x_i x_j appears twice in the symmetric sum, so the pair coefficient is
    // 2 Q_ij; scale everything to integers.
    let denom = q
        .quadratic
        .iter()
        .flatten()
        .chain(&q.linear)
        .chain([&q.offset])
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let scale = BigRational::from_integer(denom.clone());
    let to_i64 = |r: &BigRational| -> Result<i64> {
        (r * &scale)
            .to_integer()
            .to_i64()
            .filter(|v| v.unsigned_abs() < 1 << 52)
            .ok_or_else(|| Error::SizeCap("QUBO coefficients too large for exhaustive search".into()))
    };
    let pair: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| to_i64(&q.quadratic[i][j]).map(|v| 2 * v)).collect())
        .collect::<Result<_>>()?;
    let lin: Vec<i64> = q.linear.iter().map(to_i64).collect::<Result<_>>()?;
    let bound: u64 = pair.iter().flatten().chain(&lin).map(|v| v.unsigned_abs()).sum();
    if bound >= 1 << 60 {
        return Err(Error::SizeCap("QUBO coefficients too large for exhaustive search".into()));
    }

    let high = if n >= 14 { 6.min(n) } else { 0 };
    let low = n - high;
    let chunks: Vec<(i64, Vec<u64>, u64)> = (0..1u64 << high)
        .into_par_iter()
        .map(|chunk| {
            let mut x = chunk << low;
            // field[i] = energy change from setting x_i with the rest fixed.
            let mut field = lin.clone();
            let mut e = 0i64;
            for i in 0..n {
                if x >> i & 1 == 1 {
                    e += field[i];
                    for j in 0..n {
                        field[j] += pair[i][j];
                    }
                }
            }
            let mut best = e;
            let mut args = vec![x];
            let mut count = 1u64;
            for step in 1..1u64 << low {
                let i = step.trailing_zeros() as usize;
                let sign = if x >> i & 1 == 1 { -1 } else { 1 };
                e += sign * field[i];
                x ^= 1 << i;
                for j in 0..n {
                    field[j] += sign * pair[i][j];
                }
                if e < best {
                    best = e;
                    args.clear();
                    args.push(x);
                    count = 1;
                } else if e == best {
                    count += 1;
                    if args.len() < ARGMIN_LIMIT {
                        args.push(x);
                    }
                }
            }
            (best, args, count)
        })
        .collect();
    let best = chunks.iter().map(|c| c.0).min().expect("at least one chunk");
    let mut argmins = Vec::new();
    let mut argmin_count = 0;
    for (e, args, count) in &chunks {
        if *e == best {
            argmin_count += count;
            for &m in args {
                if argmins.len() < ARGMIN_LIMIT {
                    argmins.push(m);
                }
            }
        }
    }
    argmins.sort_unstable();
    let argmins: Vec<Vec<bool>> = argmins.iter().map(|&m| (0..n).map(|i| m >> i & 1 == 1).collect()).collect();
    let value = BigRational::new(best.into(), denom) + &q.offset;
    if let Some(x) = argmins.first() {
        let check = q.evaluate(x);
        if check != value {
            return Err(Error::Invariant(format!("minimizer value {value} disagrees with re-evaluation {check}")));
        }
    }
    Ok(QuboMinimum {
        value,
        argmins,
        argmin_count,
    })
}

/// True when `value` is a nonnegative integer-valued ground energy of zero.
pub fn is_zero_ground(m: &QuboMinimum) -> bool {
    m.value.is_integer() && !m.value.is_negative() && m.value.to_integer() == BigInt::from(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matches_direct_evaluation(n in 1usize..7, v in prop::collection::vec(-5i64..=5, 49), d in 1i64..4) {
            let r = |x: i64| BigRational::new(x.into(), d.into());
            let mut q = vec![vec![BigRational::from_integer(0.into()); n]; n];
            for i in 0..n {
                for j in i..n {
                    q[i][j] = r(v[i * 7 + j]);
                    q[j][i] = r(v[i * 7 + j]);
                }
            }
            let q = QuboInstance::new(q, None).unwrap();
            let all: Vec<BigRational> = (0..1u64 << n)
                .map(|m| q.evaluate(&(0..n).map(|i| m >> i & 1 == 1).collect::<Vec<_>>()))
                .collect();
            let min = all.iter().min().unwrap().clone();
            let got = minimize_qubo(&q).unwrap();
            prop_assert_eq!(&got.value, &min);
            prop_assert_eq!(got.argmin_count as usize, all.iter().filter(|e| **e == min).count());
            for x in &got.argmins {
                prop_assert_eq!(q.evaluate(x), min.clone());
            }
        }
    }
}
