//! Exact simulator and verification toolkit for GHZ-based pseudo-telepathy
//! games with group-broadcast communication accounting.
//!
//! * [`qsim`]: exact statevector engine (GHZ preparation, single-qubit
//!   projective measurements, exact outcome probabilities).
//! * [`games`]: the step-based game model, the two concrete game
//!   distributions, prefix-decodable broadcast framing and bit accounting.
//! * [`strategies`]: classical and GHZ-based strategies.
//! * [`bounds`]: exhaustive searches behind the classical lower bounds.
//! * [`harness`]: experiment runner and report emission used by the CLI.

pub mod bounds;
pub mod games;
pub mod harness;
pub mod qsim;
pub mod strategies;

/// Exact rational used for probabilities and losses.
pub type Rational = num_rational::Ratio<i128>;

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
