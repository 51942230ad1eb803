//! Quantum error correction for metrology.
//!
//! The crate checks whether a code protects a sensing generator from a noise
//! channel, builds the corresponding recovery, simulates QEC-enhanced Ramsey
//! interrogation (single detector plus ancilla, or an N-qubit GHZ code) and
//! compares the outcome against closed-form error estimates.
//!
//! The matrix kernel and the code/channel layers are generic over [`Scalar`]
//! (`f32` or `f64`); the aliases below fix `f64`, which is what the simulators
//! use.

pub mod analytics;
pub mod channels;
pub mod codes;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod pauli;
pub mod protocols;
pub mod scalar;
pub mod tolerances;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tolerances::Tolerances;

pub type Operator = linalg::OperatorMatrix<f64>;
pub type Operator32 = linalg::OperatorMatrix<f32>;
pub type State = linalg::StateVector<f64>;
pub type Density = linalg::DensityOperator<f64>;
pub type Channel = channels::QuantumChannel<f64>;
pub type Code = codes::CodeSpace<f64>;
pub type Recovery = codes::RecoveryOperation<f64>;
pub type Report = codes::ConditionReport<f64>;
pub type Expr = pauli::PauliExpr<f64>;
