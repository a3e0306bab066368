//! Simulation of a phase-encoded quantum protocol for deciding whether two
//! private circles intersect, with adversary models and a reporting harness.
//!
//! The quantum state is kept as a sparse map from basis labels to
//! amplitudes; the honest protocol never holds more than two terms per pair,
//! so runs scale to large precisions.

pub mod adversary;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod oracle;
pub mod protocol;
pub mod qarith;
pub mod sim;

pub use adversary::{run_attack_trials, AttackStats, AttackStrategy, Target};
pub use error::{Error, Result};
pub use geometry::{intersects, Circle, ProblemParams};
pub use oracle::OracleOperator;
pub use protocol::{run_protocol, ProtocolOutcome, ProtocolRun, Transcript};
