//! Numerical kernel: matrices, seeded RNG, symmetric eigensolver, and
//! optimal assignment. All algorithms are implemented here; nothing is
//! delegated to external linear-algebra backends.

mod assignment;
mod eigen;
mod matrix;
mod rng;

pub use assignment::{assignment_cost, hungarian};
pub use eigen::sym_eigen;
pub use matrix::Matrix;
pub use rng::{derive_seed, SeededRng};

use thiserror::Error;

/// Complex vector backing statevectors.
pub type ComplexVector<S> = Vec<num_complex::Complex<S>>;

/// Errors from the numerical kernel.
#[derive(Debug, Error)]
pub enum NumericsError {
    /// A caller violated an operation's contract.
    #[error("contract violation: {0}")]
    Contract(String),
    /// An iteration failed to converge within its fixed budget.
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}
