//! Exact simulation of states that stay sparse in the computational basis.

mod basis;
mod dense;
mod gate;
mod layout;
mod sparse;

pub use basis::BasisState;
pub use dense::{DenseState, DENSE_MAX_QUBITS};
pub use gate::{Gate, Permutation, EXHAUSTIVE_BIJECTION_LIMIT};
pub use layout::{Register, RegisterLayout};
pub use sparse::{Amplitude, Sign, SparseState, PRUNE_THRESHOLD};

pub(crate) use basis::mask;
