//! Reduced density matrices and entanglement entropies.

use num_complex::Complex;

use crate::qsim::{QsimError, StateVector};
use crate::scalar::Scalar;

/// Small dense density matrix (row-major complex entries).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<S> {
    dim: usize,
    entries: Vec<Complex<S>>,
}

impl<S: Scalar> DensityMatrix<S> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, r: usize, c: usize) -> Complex<S> {
        self.entries[r * self.dim + c]
    }

    pub fn trace(&self) -> Complex<S> {
        (0..self.dim)
            .map(|i| self.entry(i, i))
            .fold(Complex::new(S::zero(), S::zero()), |a, b| a + b)
    }

    /// Eigenvalues of a Hermitian 2x2 matrix in closed form, descending.
    pub fn eigenvalues_2x2(&self) -> (S, S) {
        assert_eq!(self.dim, 2, "closed form only covers 2x2 reductions");
        let a = self.entry(0, 0).re;
        let d = self.entry(1, 1).re;
        let off = self.entry(0, 1).norm();
        let mean = (a + d) / S::real(2.0);
        let half_gap = ((a - d) / S::real(2.0)).powi(2) + off * off;
        let delta = half_gap.sqrt();
        (mean + delta, mean - delta)
    }
}

/// Traces out every qubit except `keep`, yielding its 2x2 reduced state.
///
/// # Errors
///
/// `keep` must index a qubit of the state.
pub fn reduced_density<S: Scalar>(
    state: &StateVector<S>,
    keep: usize,
) -> Result<DensityMatrix<S>, QsimError> {
    let n = state.n_qubits();
    if keep >= n {
        return Err(QsimError::InvalidQubit {
            gate: 0,
            qubit: keep,
            n_qubits: n,
        });
    }
    let amps = state.amplitudes();
    let bit = 1usize << keep;
    let zero = Complex::new(S::zero(), S::zero());
    let mut entries = vec![zero; 4];
    for (idx, amp) in amps.iter().enumerate() {
        if idx & bit != 0 {
            continue;
        }
        let lo = *amp;
        let hi = amps[idx | bit];
        entries[0] += lo * lo.conj();
        entries[1] += lo * hi.conj();
        entries[2] += hi * lo.conj();
        entries[3] += hi * hi.conj();
    }
    Ok(DensityMatrix { dim: 2, entries })
}

/// Von Neumann entropy in bits of a single-qubit density matrix.
///
/// Eigenvalues are clamped to `[0, 1]` and `0 log 0` is taken as zero, so
/// product states come out exactly zero.
pub fn von_neumann_entropy<S: Scalar>(rho: &DensityMatrix<S>) -> S {
    let (a, b) = rho.eigenvalues_2x2();
    entropy_term(a) + entropy_term(b)
}

fn entropy_term<S: Scalar>(lambda: S) -> S {
    let clamped = lambda.max(S::zero()).min(S::one());
    if clamped <= S::zero() {
        S::zero()
    } else {
        -clamped * clamped.log2()
    }
}

/// Quantum mutual information `I(A:B) = S(A) + S(B) - S(AB)` in bits for
/// the `(qubit_a | qubit_b)` bipartition of a pure two-qubit state, where
/// `S(AB) = 0`.
pub fn mutual_information<S: Scalar>(
    state: &StateVector<S>,
    qubit_a: usize,
    qubit_b: usize,
) -> Result<S, QsimError> {
    let s_a = von_neumann_entropy(&reduced_density(state, qubit_a)?);
    let s_b = von_neumann_entropy(&reduced_density(state, qubit_b)?);
    Ok(s_a + s_b)
}
