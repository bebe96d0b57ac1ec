//! Compile NP-complete decision problems into subset-sum instances over
//! square roots of squarefree integers, and from there into Mattis-type
//! spin Hamiltonians realizable in a multimode atom-cavity system.

pub mod error;
pub mod hamiltonian;
pub mod instances;
pub mod qubo;
pub mod radical;
pub mod reductions;
pub mod solvers;

pub use error::{Error, Result};
pub use radical::{Radical, SquarefreeIndex};
