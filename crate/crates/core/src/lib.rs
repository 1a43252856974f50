//! Classical-to-hybrid self-training workflow.
//!
//! The crate implements a three-stage pipeline on the Iris dataset: a PLS
//! self-training baseline, a minimal two-qubit hybrid model, and a refined
//! hybrid model produced by a diagnostics-driven rule engine. The numeric
//! kernels ([`numerics`], [`qsim`], [`pls`]) are generic over the scalar
//! type; the aliases below pin the pipeline to `f64`.

pub mod config;
pub mod data;
pub mod diagnostics;
pub mod evalmetrics;
pub mod hybrid;
pub mod numerics;
pub mod pls;
pub mod qsim;
pub mod scalar;
pub mod selftrain;
pub mod workflow;

/// Pipeline scalar type.
pub type Real = f64;
/// Dense real matrix used throughout the pipeline.
pub type RealMatrix = numerics::Matrix<Real>;
/// Complex amplitude vector.
pub type ComplexVector = numerics::ComplexVector<Real>;
/// Pure statevector over [`Real`] amplitudes.
pub type StateVector = qsim::StateVector<Real>;
/// Reduced density matrix over [`Real`] entries.
pub type DensityMatrix = qsim::DensityMatrix<Real>;
/// PLS regression model over [`Real`] entries.
pub type PlsModel = pls::PlsModel<Real>;
