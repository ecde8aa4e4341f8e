//! Classical-shadow estimation with random Clifford, Haar and
//! T-doped ("homeopathic") circuits, including the thrifty scheme in which
//! each sampled circuit is reused for several measurement shots.
//!
//! The crate is organised bottom-up:
//!
//! * [`dense`], [`pauli`], [`tableau`], [`clifford`]: linear algebra and
//!   stabilizer simulation.
//! * [`ensemble`]: circuit ensembles and frame operators.
//! * [`shadow`]: data acquisition and median-of-means estimation.
//! * [`moments`]: exact commutant and Weingarten calculus for `t <= 4`.
//! * [`tails`]: exact moment tables and tail bounds.
//! * [`harness`]: configuration-driven experiments and output writers.

pub mod clifford;
pub mod dense;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod moments;
pub mod par;
pub mod pauli;
pub mod rng;
pub mod shadow;
pub mod stats;
pub mod tableau;
pub mod tails;

pub use error::{Error, Result};

/// Largest qubit count for which dense state vectors and unitaries are built.
pub const MAX_DENSE_QUBITS: usize = 10;

/// Largest qubit count supported by the bit-packed Pauli representation.
pub const MAX_QUBITS: usize = 63;
