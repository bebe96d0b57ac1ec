//! Ground-truth oracles and desk-scale solvers.

mod anneal;
mod graphs;
mod oracle;
mod original;
mod qubo_min;
mod simulate;
mod verify;

pub use anneal::{anneal, AnnealOptions, AnnealResult, DEFAULT_SEED, DEFAULT_SWEEPS};
pub use graphs::nonisomorphic_graphs;
pub use oracle::{
    default_cap, oracle_subset_sum, OracleMethod, OracleMode, OracleOptions, OracleResult, DEFAULT_CAP, GRAY_LIMIT,
};
pub use original::{oracle_original, OriginalResult, MAX_SUBSETS, MAX_VARIABLES, MAX_VERTICES};
pub use qubo_min::{is_zero_ground, minimize_qubo, QuboMinimum, ARGMIN_LIMIT, MAX_QUBO_VARIABLES};
pub use simulate::{adiabatic_simulate, initial_state, SimulationResult, MAX_ATOMS, MIN_STEPS};
pub use verify::{verify_equivalence, VerifyReport};
