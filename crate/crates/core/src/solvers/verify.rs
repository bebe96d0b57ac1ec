use serde::Serialize;

use crate::error::{Error, Result};
use crate::reductions::{decode, encode, forward_map, ProblemKind, Source};

use super::{oracle_original, oracle_subset_sum, OracleMethod, OracleMode, OracleOptions};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub problem: ProblemKind,
    pub k: Option<usize>,
    pub weights: usize,
    pub agreement: bool,
    pub original_feasible: bool,
    pub subset_feasible: bool,
    pub original_witnesses: usize,
    pub subset_witnesses: usize,
    /// Subset witnesses that decoded to a valid original solution.
    pub decoded: usize,
    /// Original witnesses whose forward image reaches the target.
    pub forward_mapped: usize,
    pub subset_method: OracleMethod,
    pub subset_explored: u64,
}

/// Dual brute force: decides the source natively and through its subset-sum
/// encoding, then checks both witness directions. Any disagreement is an
/// [`Error::Invariant`] naming the counterexample.
pub fn verify_equivalence(source: &Source, cap: u64) -> Result<VerifyReport> {
    let inst = encode(source.kind, &source.instance, source.k)?;
    // Targets such as a cut or cover of size 0 on an edgeless graph are
    // zero, and the empty subset is then the honest witness.
    let subset = oracle_subset_sum(
        &inst,
        OracleOptions {
            mode: OracleMode::All,
            cap,
            allow_empty: true,
        },
    )?;
    let original = oracle_original(source, OracleMode::All)?;
    let bug = |what: String| Error::Invariant(format!("{} k={:?}: {what}", source.kind, source.k));
    for w in &subset.witnesses {
        decode(&inst, w).map_err(|e| bug(format!("subset witness {:?} does not decode: {e}", bits(w))))?;
    }
    for s in &original.witnesses {
        forward_map(&inst, s).map_err(|e| bug(format!("native witness {s:?} does not map forward: {e}")))?;
    }
    if subset.feasible != original.feasible {
        return Err(bug(format!(
            "native decision {} but subset-sum decision {}",
            original.feasible, subset.feasible
        )));
    }
    Ok(VerifyReport {
        problem: source.kind,
        k: source.k,
        weights: inst.len(),
        agreement: true,
        original_feasible: original.feasible,
        subset_feasible: subset.feasible,
        original_witnesses: original.witnesses.len(),
        subset_witnesses: subset.witnesses.len(),
        decoded: subset.witnesses.len(),
        forward_mapped: original.witnesses.len(),
        subset_method: subset.method,
        subset_explored: subset.explored,
    })
}

fn bits(w: &[bool]) -> String {
    w.iter().map(|&b| if b { '1' } else { '0' }).collect()
}
