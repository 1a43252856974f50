//! Model parameters and the forward mapping.

use serde::{Deserialize, Serialize};

use crate::hybrid::HybridError;
use crate::numerics::SeededRng;
use crate::qsim::{
    build_minimal_circuit, build_refined_circuit, expectation, run_circuit, CircuitSpec,
    Observable,
};
use crate::StateVector;
use crate::{Real, RealMatrix};

/// Number of observables read out of the circuit: Z on each qubit plus the
/// ZZ correlator.
pub const N_QUANTUM_FEATURES: usize = 3;

/// The fixed readout set.
pub fn quantum_observables() -> [Observable; N_QUANTUM_FEATURES] {
    [
        Observable::z(2, 0),
        Observable::z(2, 1),
        Observable::zz(2, 0, 1),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Minimal,
    Refined,
}

/// Which circuit family the model runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitKind {
    Minimal,
    Refined { reps: usize },
}

/// Architecture-level description, the unit the refinement rules modify.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub circuit: CircuitKind,
    pub adapter: bool,
    pub head_width: usize,
}

impl Architecture {
    pub fn minimal(head_width: usize) -> Self {
        Self {
            circuit: CircuitKind::Minimal,
            adapter: false,
            head_width,
        }
    }

    pub fn refined(reps: usize, head_width: usize) -> Self {
        Self {
            circuit: CircuitKind::Refined { reps },
            adapter: true,
            head_width,
        }
    }

    pub fn variant(&self) -> Variant {
        if self.adapter || !matches!(self.circuit, CircuitKind::Minimal) {
            Variant::Refined
        } else {
            Variant::Minimal
        }
    }

    pub fn build_circuit(&self) -> CircuitSpec {
        match self.circuit {
            CircuitKind::Minimal => build_minimal_circuit(),
            CircuitKind::Refined { reps } => build_refined_circuit(reps),
        }
    }
}

/// Adapter activation; `Identity` exists as a test hook so the refined
/// forward pass can be checked against the minimal one with the
/// nonlinearity removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    pub(crate) fn apply(self, v: Real) -> Real {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
        }
    }

    /// Derivative expressed through the activation output.
    pub(crate) fn derivative_from_output(self, out: Real) -> Real {
        match self {
            Activation::Tanh => 1.0 - out * out,
            Activation::Identity => 1.0,
        }
    }
}

/// Classical adapter in front of the circuit (4 -> 4).
#[derive(Clone, Debug)]
pub struct AdapterParams {
    pub weights: RealMatrix,
    pub bias: Vec<Real>,
    pub activation: Activation,
}

impl AdapterParams {
    pub fn identity() -> Self {
        Self {
            weights: RealMatrix::identity(4),
            bias: vec![0.0; 4],
            activation: Activation::Tanh,
        }
    }

    pub(crate) fn forward(&self, x: &[Real]) -> Vec<Real> {
        let mut out = self.weights.matvec(x);
        for (o, b) in out.iter_mut().zip(&self.bias) {
            *o = self.activation.apply(*o + b);
        }
        out
    }
}

/// Two-layer classical head: `tanh` hidden layer over the quantum features,
/// softmax output over the label vocabulary.
#[derive(Clone, Debug)]
pub struct HeadParams {
    /// `3 x H`.
    pub w1: RealMatrix,
    pub b1: Vec<Real>,
    /// `H x L`.
    pub w2: RealMatrix,
    pub b2: Vec<Real>,
}

impl HeadParams {
    pub fn width(&self) -> usize {
        self.w1.cols()
    }

    pub fn n_outputs(&self) -> usize {
        self.w2.cols()
    }
}

/// Full hybrid model: circuit, quantum parameters, optional adapter, head,
/// the label vocabulary the head decodes into, and the per-column input
/// scale applied before encoding.
#[derive(Clone, Debug)]
pub struct HybridModel {
    pub variant: Variant,
    pub circuit: CircuitSpec,
    pub theta: Vec<Real>,
    pub adapter: Option<AdapterParams>,
    pub head: HeadParams,
    pub vocab: Vec<usize>,
    pub feature_scale: Vec<Real>,
    pub seed: u64,
}

/// Head init keyed by the label vocabulary: the hidden layer depends only
/// on the seed, and each output column depends only on (seed, label id).
/// Vocabularies sharing labels therefore share those columns, which keeps
/// cross-validation comparisons between nearby label vectors paired.
pub(crate) fn init_head_for_vocab(seed: u64, width: usize, vocab: &[usize]) -> HeadParams {
    let mut hidden_rng = SeededRng::new(crate::numerics::derive_seed(seed, "hidden"));
    let mut w1 = RealMatrix::zeros(N_QUANTUM_FEATURES, width);
    let scale1 = 1.0 / (N_QUANTUM_FEATURES as Real).sqrt();
    for r in 0..N_QUANTUM_FEATURES {
        for c in 0..width {
            w1[(r, c)] = scale1 * hidden_rng.gaussian::<Real>();
        }
    }
    let mut w2 = RealMatrix::zeros(width, vocab.len());
    let scale2 = 1.0 / (width as Real).sqrt();
    for (col, &label) in vocab.iter().enumerate() {
        let mut col_rng = SeededRng::new(
            crate::numerics::derive_seed(seed, "output").wrapping_add(label as u64),
        );
        for row in 0..width {
            w2[(row, col)] = scale2 * col_rng.gaussian::<Real>();
        }
    }
    HeadParams {
        w1,
        b1: vec![0.0; width],
        w2,
        b2: vec![0.0; vocab.len()],
    }
}

pub(crate) fn init_head(rng: &mut SeededRng, width: usize, n_outputs: usize) -> HeadParams {
    let mut w1 = RealMatrix::zeros(N_QUANTUM_FEATURES, width);
    let scale1 = 1.0 / (N_QUANTUM_FEATURES as Real).sqrt();
    for r in 0..N_QUANTUM_FEATURES {
        for c in 0..width {
            w1[(r, c)] = scale1 * rng.gaussian::<Real>();
        }
    }
    let mut w2 = RealMatrix::zeros(width, n_outputs);
    let scale2 = 1.0 / (width as Real).sqrt();
    for r in 0..width {
        for c in 0..n_outputs {
            w2[(r, c)] = scale2 * rng.gaussian::<Real>();
        }
    }
    HeadParams {
        w1,
        b1: vec![0.0; width],
        w2,
        b2: vec![0.0; n_outputs],
    }
}

// The adapter starts as a small perturbation of the identity, mirroring
// the near-identity rationale of the small-theta circuit init: a random
// dense adapter would scramble the input encoding from the first step and
// destabilize the self-training votes.
fn init_adapter(rng: &mut SeededRng) -> AdapterParams {
    let mut weights = RealMatrix::identity(4);
    let scale = 0.05;
    for r in 0..4 {
        for c in 0..4 {
            weights[(r, c)] += scale * rng.gaussian::<Real>();
        }
    }
    AdapterParams {
        weights,
        bias: vec![0.0; 4],
        activation: Activation::Tanh,
    }
}

impl HybridModel {
    /// Fresh model with small quantum angles (uniform in `[-pi/8, pi/8)`)
    /// and fan-in-scaled Gaussian classical weights. Draw order is fixed:
    /// theta, adapter, head.
    pub fn init(
        arch: &Architecture,
        vocab: Vec<usize>,
        feature_scale: Vec<Real>,
        seed: u64,
        rng: &mut SeededRng,
    ) -> Self {
        let circuit = arch.build_circuit();
        let bound = std::env::var("C2H_THETA_INIT")
            .ok()
            .and_then(|v| v.parse::<f64>().ok())
            .unwrap_or(std::f64::consts::PI / 8.0);
        let theta: Vec<Real> = (0..circuit.n_params)
            .map(|_| rng.uniform_in(-bound, bound))
            .collect();
        let adapter = arch.adapter.then(|| init_adapter(rng));
        let head = init_head(rng, arch.head_width, vocab.len());
        Self {
            variant: arch.variant(),
            circuit,
            theta,
            adapter,
            head,
            vocab,
            feature_scale,
            seed,
        }
    }

    /// Scales the raw input and runs it through the adapter when present.
    pub fn encode_inputs(&self, x: &[Real]) -> Vec<Real> {
        let scaled: Vec<Real> = x
            .iter()
            .zip(&self.feature_scale)
            .map(|(v, s)| v / s)
            .collect();
        match &self.adapter {
            Some(adapter) => adapter.forward(&scaled),
            None => scaled,
        }
    }

    /// Circuit state on one sample.
    pub fn circuit_state(&self, x: &[Real]) -> Result<StateVector, HybridError> {
        let inputs = self.encode_inputs(x);
        Ok(run_circuit(&self.circuit, &inputs, &self.theta)?)
    }

    /// The three observable expectations on one sample, each in `[-1, 1]`.
    pub fn quantum_features(&self, x: &[Real]) -> Result<[Real; N_QUANTUM_FEATURES], HybridError> {
        let state = self.circuit_state(x)?;
        let obs = quantum_observables();
        Ok([
            expectation(&state, &obs[0])?,
            expectation(&state, &obs[1])?,
            expectation(&state, &obs[2])?,
        ])
    }

    /// Quantum feature matrix (`N x 3`) over a dataset.
    pub fn quantum_feature_matrix(&self, x: &RealMatrix) -> Result<RealMatrix, HybridError> {
        let mut out = RealMatrix::zeros(x.rows(), N_QUANTUM_FEATURES);
        for r in 0..x.rows() {
            let q = self.quantum_features(x.row(r))?;
            out.row_mut(r).copy_from_slice(&q);
        }
        Ok(out)
    }

    pub(crate) fn head_forward(&self, q: &[Real]) -> (Vec<Real>, Vec<Real>) {
        let width = self.head.width();
        let outputs = self.head.n_outputs();
        let mut hidden = self.head.b1.clone();
        for i in 0..N_QUANTUM_FEATURES {
            for j in 0..width {
                hidden[j] += q[i] * self.head.w1[(i, j)];
            }
        }
        for h in &mut hidden {
            *h = h.tanh();
        }
        let mut logits = self.head.b2.clone();
        for j in 0..width {
            for l in 0..outputs {
                logits[l] += hidden[j] * self.head.w2[(j, l)];
            }
        }
        (hidden, logits)
    }

    /// Class probabilities over the label vocabulary.
    pub fn forward(&self, x: &[Real]) -> Result<Vec<Real>, HybridError> {
        if x.len() != self.feature_scale.len() {
            return Err(HybridError::Dimension(format!(
                "input length {} but model expects {}",
                x.len(),
                self.feature_scale.len()
            )));
        }
        let q = self.quantum_features(x)?;
        let (_, logits) = self.head_forward(&q);
        Ok(softmax(&logits))
    }

    /// Argmax-decoded label ids; ties go to the lowest vocabulary position.
    pub fn predict_labels(&self, x: &RealMatrix) -> Result<Vec<usize>, HybridError> {
        let mut labels = Vec::with_capacity(x.rows());
        for r in 0..x.rows() {
            let probs = self.forward(x.row(r))?;
            let mut best = 0;
            for (i, &p) in probs.iter().enumerate().skip(1) {
                if p > probs[best] {
                    best = i;
                }
            }
            labels.push(self.vocab[best]);
        }
        Ok(labels)
    }
}

pub(crate) fn softmax(logits: &[Real]) -> Vec<Real> {
    let max = logits.iter().cloned().fold(Real::NEG_INFINITY, Real::max);
    let exps: Vec<Real> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: Real = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Log-probabilities computed stably in log space.
pub(crate) fn log_softmax(logits: &[Real]) -> Vec<Real> {
    let max = logits.iter().cloned().fold(Real::NEG_INFINITY, Real::max);
    let log_sum: Real = logits
        .iter()
        .map(|&z| (z - max).exp())
        .sum::<Real>()
        .ln();
    logits.iter().map(|&z| z - max - log_sum).collect()
}
