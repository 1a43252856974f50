//! Exact statevector simulation for small qubit counts: circuit
//! descriptions, gate evolution, Pauli-Z expectations, shift-rule
//! gradients, reduced density matrices, and entanglement entropies.

mod circuit;
mod density;
mod state;

pub use circuit::{
    build_minimal_circuit, build_refined_circuit, AngleSource, CircuitSpec, Entanglement, GateOp,
};
pub use density::{mutual_information, reduced_density, von_neumann_entropy, DensityMatrix};
pub use state::{
    expectation, feature_shift_grad, feature_shift_table, param_shift_grad, param_shift_table,
    run_circuit, Observable, StateVector,
};

use thiserror::Error;

/// Errors from circuit validation and evaluation.
#[derive(Debug, Error)]
pub enum QsimError {
    #[error("{kind} vector length {found} does not match declared {expected} slots")]
    SlotMismatch {
        kind: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("gate {gate}: {kind} slot {slot} out of range (bound {bound})")]
    SlotOutOfRange {
        gate: usize,
        slot: usize,
        bound: usize,
        kind: &'static str,
    },
    #[error("gate {gate}: qubit {qubit} out of range for {n_qubits} qubits")]
    InvalidQubit {
        gate: usize,
        qubit: usize,
        n_qubits: usize,
    },
    #[error("gate {gate}: CX control and target must differ")]
    InvalidCx { gate: usize },
    #[error("observable over {expected} qubits applied to a {found}-qubit state")]
    DimensionMismatch { expected: usize, found: usize },
}
