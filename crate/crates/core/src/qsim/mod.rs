//! Exact small-n statevector engine.
//!
//! Amplitudes are Gaussian integers over a shared power of `√2`, which covers
//! every state reachable by preparing a GHZ state and measuring qubits in the
//! computational, diagonal and circular bases. No floating point is involved,
//! so statements like "this outcome has probability zero" are decided exactly.

mod amplitude;
mod state;

pub use amplitude::ExactAmplitude;
pub use state::{
    basis_state, inner_product, make_ghz, make_ghz_with_cap, MeasBasis, Measurement, MeasurementRecord, StateVector,
    DEFAULT_QUBIT_CAP,
};

use thiserror::Error;

use crate::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QsimError {
    #[error("qubit count {n} outside the supported range 1..={cap}")]
    SizeOutOfRange { n: usize, cap: usize },
    #[error("qubit index {qubit} outside 1..={num_qubits}")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),
    #[error("state has squared norm {0}, expected 1")]
    NotNormalized(Rational),
    #[error("not exactly representable: {0}")]
    Inexact(String),
    #[error("integer overflow in exact arithmetic")]
    Overflow,
}
