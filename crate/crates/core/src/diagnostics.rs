//! Training and circuit diagnostics computed from traces, quantum feature
//! sets, and circuit states.
//!
//! The seven quantities are this crate's own documented formulations
//! (printed by [`formulas`]); they are validated through orderings and
//! invariants rather than externally fixed values.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hybrid::{HybridModel, TrainingTrace};
use crate::numerics::{sym_eigen, NumericsError, SeededRng};
use crate::qsim::{
    mutual_information, param_shift_grad, reduced_density, von_neumann_entropy, CircuitSpec,
    Observable, QsimError,
};
use crate::{Real, RealMatrix};

/// Cap returned by [`qos`] when the within-class scatter vanishes.
pub const QOS_CAP: Real = 1e6;

/// Loss increases up to this relative factor still count as stable.
const TSI_SLACK: Real = 1e-3;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("trace needs at least {needed} epochs, found {found}")]
    TraceTooShort { needed: usize, found: usize },
    #[error("feature set needs at least two samples")]
    TooFewSamples,
    #[error("need at least two classes present, found {found}")]
    TooFewClasses { found: usize },
    #[error("init count must be at least 2, got {got}")]
    TooFewInits { got: usize },
    #[error("missing run artifact: {0}")]
    MissingArtifact(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Hybrid(#[from] crate::hybrid::HybridError),
}

/// The seven diagnostics; entropy-valued fields are in bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub tsi: Real,
    pub qgn: Real,
    pub bpi: Real,
    pub edqfs: Real,
    pub qos: Real,
    pub eee: Real,
    pub qmi: Real,
}

/// One-line definition of each diagnostic, printed into reports for
/// auditability.
pub fn formulas() -> &'static [(&'static str, &'static str)] {
    &[
        (
            "tsi",
            "fraction of consecutive epochs with loss[t+1] <= loss[t] * (1 + 1e-3)",
        ),
        ("qgn", "mean over epochs of the quantum-parameter gradient L2 norm"),
        (
            "bpi",
            "variance over R random uniform(-pi, pi) initializations of d<ZZ>/d(theta_0) at a fixed input",
        ),
        (
            "edqfs",
            "participation ratio (sum lambda)^2 / sum lambda^2 of the quantum-feature covariance eigenvalues",
        ),
        (
            "qos",
            "trace(between-class scatter) / trace(within-class scatter) of the quantum features under current labels",
        ),
        (
            "eee",
            "mean over samples of the qubit-0 von Neumann entropy (bits) of the final circuit state",
        ),
        (
            "qmi",
            "mean over samples of the (q0|q1) quantum mutual information (bits); 2x eee for pure states",
        ),
    ]
}

/// Training stability: the fraction of consecutive epoch pairs where the
/// loss did not increase beyond a 1e-3 relative slack.
pub fn tsi(trace: &TrainingTrace) -> Result<Real, DiagnosticsError> {
    let losses = &trace.loss;
    if losses.len() < 2 {
        return Err(DiagnosticsError::TraceTooShort {
            needed: 2,
            found: losses.len(),
        });
    }
    let stable = losses
        .windows(2)
        .filter(|w| w[1] <= w[0] * (1.0 + TSI_SLACK))
        .count();
    Ok(stable as Real / (losses.len() - 1) as Real)
}

/// Mean quantum-parameter gradient norm over the recorded epochs.
pub fn qgn(trace: &TrainingTrace) -> Real {
    if trace.quantum_grad_norm.is_empty() {
        return 0.0;
    }
    trace.quantum_grad_norm.iter().sum::<Real>() / trace.quantum_grad_norm.len() as Real
}

/// Barren-plateau indicator: population variance across `r` random
/// uniform(-pi, pi) parameter initializations of the shift-rule gradient
/// of `<Z x Z>` with respect to the first parameter slot, at a fixed input.
///
/// The draw order is fixed (each initialization consumes `n_params`
/// uniforms from `SeededRng::new(seed)` in slot order), so the value is
/// reproducible from the seed alone.
pub fn bpi(
    circuit: &CircuitSpec,
    sample: &[Real],
    r: usize,
    seed: u64,
) -> Result<Real, DiagnosticsError> {
    if r < 2 {
        return Err(DiagnosticsError::TooFewInits { got: r });
    }
    if circuit.n_params == 0 {
        return Ok(0.0);
    }
    let obs = Observable::zz(circuit.n_qubits, 0, 1);
    let mut rng = SeededRng::new(seed);
    let pi = std::f64::consts::PI;
    // Welford accumulation; the test oracle recomputes two-pass.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..r {
        let params: Vec<Real> = (0..circuit.n_params)
            .map(|_| rng.uniform_in(-pi, pi))
            .collect();
        let grad = param_shift_grad(circuit, sample, &params, &obs, 0)?;
        let delta = grad - mean;
        mean += delta / (i + 1) as Real;
        m2 += delta * (grad - mean);
    }
    Ok(m2 / r as Real)
}

/// Effective dimension of the quantum feature cloud: participation ratio
/// of the covariance eigenvalues, with eigenvalues below 1e-12 clamped to
/// zero. Returns 1 when all variance vanishes.
pub fn edqfs(features: &RealMatrix) -> Result<Real, DiagnosticsError> {
    if features.rows() < 2 {
        return Err(DiagnosticsError::TooFewSamples);
    }
    let cov = features.sample_covariance();
    let (values, _) = sym_eigen(&cov)?;
    let clamped: Vec<Real> = values
        .into_iter()
        .map(|v| if v < 1e-12 { 0.0 } else { v })
        .collect();
    let sum: Real = clamped.iter().sum();
    let sum_sq: Real = clamped.iter().map(|v| v * v).sum();
    if sum_sq <= 0.0 {
        return Ok(1.0);
    }
    Ok(sum * sum / sum_sq)
}

/// Output decisiveness: trace of the between-class scatter over the trace
/// of the within-class scatter under the given labels. Degenerate
/// within-class scatter returns the documented cap of `1e6`.
pub fn qos(features: &RealMatrix, labels: &[usize]) -> Result<Real, DiagnosticsError> {
    let n = features.rows();
    assert_eq!(n, labels.len(), "features and labels disagree on samples");
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(DiagnosticsError::TooFewClasses {
            found: classes.len(),
        });
    }
    let d = features.cols();
    let grand_mean = features.column_means();
    let mut within = 0.0;
    let mut between = 0.0;
    for &class in &classes {
        let members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        let count = members.len() as Real;
        let mut class_mean = vec![0.0; d];
        for &i in &members {
            for c in 0..d {
                class_mean[c] += features[(i, c)];
            }
        }
        for m in &mut class_mean {
            *m /= count;
        }
        for &i in &members {
            for c in 0..d {
                let diff = features[(i, c)] - class_mean[c];
                within += diff * diff;
            }
        }
        for c in 0..d {
            let diff = class_mean[c] - grand_mean[c];
            between += count * diff * diff;
        }
    }
    if within < 1e-12 {
        return Ok(QOS_CAP);
    }
    Ok(between / within)
}

/// Mean qubit-0 entanglement entropy (bits) of the circuit states over the
/// dataset.
pub fn eee(model: &HybridModel, x: &RealMatrix) -> Result<Real, DiagnosticsError> {
    let mut total = 0.0;
    for r in 0..x.rows() {
        let state = model.circuit_state(x.row(r))?;
        total += von_neumann_entropy(&reduced_density(&state, 0)?);
    }
    Ok(total / x.rows() as Real)
}

/// Mean quantum mutual information (bits) across the (q0 | q1) bipartition
/// over the dataset; equals `2 * eee` for the pure states this simulator
/// produces.
pub fn qmi(model: &HybridModel, x: &RealMatrix) -> Result<Real, DiagnosticsError> {
    let mut total = 0.0;
    for r in 0..x.rows() {
        let state = model.circuit_state(x.row(r))?;
        total += mutual_information(&state, 0, 1)?;
    }
    Ok(total / x.rows() as Real)
}

/// Assembles the full report from a completed run's artifacts: the trained
/// model, the model-space inputs, the final labels, and the final fit
/// trace. BPI probes the architecture's parameter landscape (not the
/// trained parameters) at the first sample's encoded input.
pub fn diagnose(
    model: &HybridModel,
    x: &RealMatrix,
    labels: &[usize],
    trace: &TrainingTrace,
    bpi_inits: usize,
    seed: u64,
) -> Result<DiagnosticsReport, DiagnosticsError> {
    if x.rows() == 0 {
        return Err(DiagnosticsError::MissingArtifact("input features".into()));
    }
    let features = model.quantum_feature_matrix(x)?;
    let first_input = model.encode_inputs(x.row(0));
    Ok(DiagnosticsReport {
        tsi: tsi(trace)?,
        qgn: qgn(trace),
        bpi: bpi(&model.circuit, &first_input, bpi_inits, seed)?,
        edqfs: edqfs(&features)?,
        qos: qos(&features, labels)?,
        eee: eee(model, x)?,
        qmi: qmi(model, x)?,
    })
}
