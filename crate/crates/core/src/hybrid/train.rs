//! Full-batch training: cross-entropy loss, exact gradients (shift rule
//! through the circuit, backprop through adapter and head), global norm
//! clipping, and adaptive moment updates with early stopping.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hybrid::model::{log_softmax, quantum_observables, softmax, N_QUANTUM_FEATURES};
use crate::hybrid::{HybridError, HybridModel};
use crate::qsim::{expectation, feature_shift_table, param_shift_table, run_circuit, Observable};
use crate::{Real, RealMatrix};

/// Training hyperparameters for one fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr_quantum: Real,
    pub lr_classical: Real,
    /// Learning rate of the adapter, kept below the head's so the encoding
    /// geometry the self-training votes rely on moves slowly.
    pub lr_adapter: Real,
    pub epochs: usize,
    pub patience: usize,
    /// Global L2 clip applied to the concatenated gradient.
    pub clip_norm: Real,
    /// L2 penalty on adapter weights (refined models only).
    pub adapter_l2: Real,
    pub beta1: Real,
    pub beta2: Real,
    /// Minimum loss improvement that resets the early-stop counter.
    pub min_improvement: Real,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr_quantum: 0.05,
            lr_classical: 0.01,
            lr_adapter: 0.005,
            epochs: 60,
            patience: 10,
            clip_norm: 1.0,
            adapter_l2: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            min_improvement: 1e-5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), HybridError> {
        let positives = [
            ("lr_quantum", self.lr_quantum),
            ("lr_classical", self.lr_classical),
            ("lr_adapter", self.lr_adapter),
            ("clip_norm", self.clip_norm),
            ("min_improvement", self.min_improvement),
        ];
        for (name, v) in positives {
            if !(v > 0.0 && v.is_finite()) {
                return Err(HybridError::Config(format!("{name} must be positive")));
            }
        }
        if self.adapter_l2 < 0.0 || !self.adapter_l2.is_finite() {
            return Err(HybridError::Config("adapter_l2 must be nonnegative".into()));
        }
        if self.epochs == 0 {
            return Err(HybridError::Config("epochs must be positive".into()));
        }
        if self.patience == 0 || self.patience > self.epochs {
            return Err(HybridError::Config(
                "patience must lie in 1..=epochs".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(HybridError::Config("betas must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Per-epoch record of the fit.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub loss: Vec<Real>,
    pub quantum_grad_norm: Vec<Real>,
    pub classical_grad_norm: Vec<Real>,
    pub stopped_early: bool,
}

/// Flat gradient container mirroring the trainable parameters.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub theta: Vec<Real>,
    pub adapter_w: Option<RealMatrix>,
    pub adapter_b: Option<Vec<Real>>,
    pub w1: RealMatrix,
    pub b1: Vec<Real>,
    pub w2: RealMatrix,
    pub b2: Vec<Real>,
}

impl Gradients {
    fn zeros(model: &HybridModel) -> Self {
        Self {
            theta: vec![0.0; model.theta.len()],
            adapter_w: model.adapter.as_ref().map(|_| RealMatrix::zeros(4, 4)),
            adapter_b: model.adapter.as_ref().map(|_| vec![0.0; 4]),
            w1: RealMatrix::zeros(N_QUANTUM_FEATURES, model.head.width()),
            b1: vec![0.0; model.head.width()],
            w2: RealMatrix::zeros(model.head.width(), model.head.n_outputs()),
            b2: vec![0.0; model.head.n_outputs()],
        }
    }

    pub fn quantum_norm(&self) -> Real {
        self.theta.iter().map(|g| g * g).sum::<Real>().sqrt()
    }

    pub fn classical_norm(&self) -> Real {
        self.classical_sq_sum().sqrt()
    }

    fn classical_sq_sum(&self) -> Real {
        let mut acc = 0.0;
        if let Some(w) = &self.adapter_w {
            acc += w.as_slice().iter().map(|g| g * g).sum::<Real>();
        }
        if let Some(b) = &self.adapter_b {
            acc += b.iter().map(|g| g * g).sum::<Real>();
        }
        acc += self.w1.as_slice().iter().map(|g| g * g).sum::<Real>();
        acc += self.b1.iter().map(|g| g * g).sum::<Real>();
        acc += self.w2.as_slice().iter().map(|g| g * g).sum::<Real>();
        acc += self.b2.iter().map(|g| g * g).sum::<Real>();
        acc
    }

    pub fn global_norm(&self) -> Real {
        (self.theta.iter().map(|g| g * g).sum::<Real>() + self.classical_sq_sum()).sqrt()
    }

    /// Scales every gradient entry, the clipping primitive.
    pub fn scale(&mut self, factor: Real) {
        for g in &mut self.theta {
            *g *= factor;
        }
        if let Some(w) = &mut self.adapter_w {
            scale_matrix(w, factor);
        }
        if let Some(b) = &mut self.adapter_b {
            for g in b {
                *g *= factor;
            }
        }
        scale_matrix(&mut self.w1, factor);
        for g in &mut self.b1 {
            *g *= factor;
        }
        scale_matrix(&mut self.w2, factor);
        for g in &mut self.b2 {
            *g *= factor;
        }
    }
}

fn scale_matrix(m: &mut RealMatrix, factor: Real) {
    for r in 0..m.rows() {
        for v in m.row_mut(r) {
            *v *= factor;
        }
    }
}

/// Which parameter groups a fit trains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainScope {
    /// Quantum parameters, adapter, and head.
    Full,
    /// Head only, on the frozen embedding; circuit gradients are skipped
    /// entirely.
    HeadOnly,
}

/// Expensive per-sample circuit work, evaluated in parallel.
struct SampleEval {
    q: [Real; N_QUANTUM_FEATURES],
    /// `dq_dtheta[p][k]` = d<obs_k>/d(theta_p).
    dq_dtheta: Vec<Vec<Real>>,
    /// Adapter-path extras when the model has an adapter.
    adapter: Option<AdapterEval>,
}

struct AdapterEval {
    /// `dq_dinput[i][k]` = d<obs_k>/d(encoded input_i).
    dq_dinput: Vec<Vec<Real>>,
    /// Post-activation adapter outputs.
    outputs: Vec<Real>,
    /// Scaled raw inputs feeding the adapter.
    scaled: Vec<Real>,
}

fn evaluate_sample(
    model: &HybridModel,
    x: &[Real],
    scope: TrainScope,
) -> Result<SampleEval, HybridError> {
    let observables = quantum_observables();
    let obs_refs: Vec<&Observable> = observables.iter().collect();
    let scaled: Vec<Real> = x
        .iter()
        .zip(&model.feature_scale)
        .map(|(v, s)| v / s)
        .collect();
    let inputs = match &model.adapter {
        Some(adapter) => adapter.forward(&scaled),
        None => scaled.clone(),
    };
    let state = run_circuit(&model.circuit, &inputs, &model.theta)?;
    let q = [
        expectation(&state, &observables[0])?,
        expectation(&state, &observables[1])?,
        expectation(&state, &observables[2])?,
    ];
    if scope == TrainScope::HeadOnly {
        return Ok(SampleEval {
            q,
            dq_dtheta: vec![vec![0.0; N_QUANTUM_FEATURES]; model.theta.len()],
            adapter: None,
        });
    }
    let dq_dtheta = param_shift_table(&model.circuit, &inputs, &model.theta, &obs_refs)?;
    let adapter = match &model.adapter {
        Some(_) => Some(AdapterEval {
            dq_dinput: feature_shift_table(&model.circuit, &inputs, &model.theta, &obs_refs)?,
            outputs: inputs,
            scaled,
        }),
        None => None,
    };
    Ok(SampleEval {
        q,
        dq_dtheta,
        adapter,
    })
}

/// Mean cross-entropy (natural log) over the batch plus the adapter L2
/// penalty, with exact gradients for every parameter group.
///
/// `targets` are positions into the model's vocabulary.
pub fn loss_and_gradients(
    model: &HybridModel,
    x: &RealMatrix,
    targets: &[usize],
    cfg: &TrainConfig,
) -> Result<(Real, Gradients), HybridError> {
    loss_and_gradients_scoped(model, x, targets, cfg, TrainScope::Full)
}

pub(crate) fn loss_and_gradients_scoped(
    model: &HybridModel,
    x: &RealMatrix,
    targets: &[usize],
    cfg: &TrainConfig,
    scope: TrainScope,
) -> Result<(Real, Gradients), HybridError> {
    let n = x.rows();
    if targets.len() != n {
        return Err(HybridError::Dimension(format!(
            "{n} samples but {} targets",
            targets.len()
        )));
    }
    let outputs = model.head.n_outputs();
    let width = model.head.width();

    // Quantum work per sample in parallel; everything downstream is cheap
    // and accumulated sequentially in sample order for determinism.
    let evals: Vec<SampleEval> = (0..n)
        .into_par_iter()
        .map(|r| evaluate_sample(model, x.row(r), scope))
        .collect::<Result<_, _>>()?;

    let mut loss = 0.0;
    let mut grads = Gradients::zeros(model);
    let inv_n = 1.0 / n as Real;
    let activation = model.adapter.as_ref().map(|a| a.activation);

    for (eval, &target) in evals.iter().zip(targets) {
        let (hidden, logits) = model.head_forward(&eval.q);
        let log_probs = log_softmax(&logits);
        loss -= log_probs[target] * inv_n;
        let probs = softmax(&logits);

        // d(loss)/d(logit_l) for the mean cross-entropy.
        let mut dlogits = probs;
        dlogits[target] -= 1.0;
        for d in &mut dlogits {
            *d *= inv_n;
        }

        for l in 0..outputs {
            grads.b2[l] += dlogits[l];
        }
        let mut dhidden = vec![0.0; width];
        for j in 0..width {
            for l in 0..outputs {
                grads.w2[(j, l)] += hidden[j] * dlogits[l];
                dhidden[j] += model.head.w2[(j, l)] * dlogits[l];
            }
        }
        // Through the hidden tanh.
        for (dh, h) in dhidden.iter_mut().zip(&hidden) {
            *dh *= 1.0 - h * h;
        }
        let mut dq = [0.0; N_QUANTUM_FEATURES];
        for i in 0..N_QUANTUM_FEATURES {
            for j in 0..width {
                grads.w1[(i, j)] += eval.q[i] * dhidden[j];
                dq[i] += model.head.w1[(i, j)] * dhidden[j];
            }
        }
        for j in 0..width {
            grads.b1[j] += dhidden[j];
        }

        for (p, row) in eval.dq_dtheta.iter().enumerate() {
            let mut acc = 0.0;
            for k in 0..N_QUANTUM_FEATURES {
                acc += dq[k] * row[k];
            }
            grads.theta[p] += acc;
        }

        if let (Some(adapter_eval), Some(activation)) = (&eval.adapter, activation) {
            let mut dinputs = vec![0.0; 4];
            for (i, row) in adapter_eval.dq_dinput.iter().enumerate() {
                for k in 0..N_QUANTUM_FEATURES {
                    dinputs[i] += dq[k] * row[k];
                }
            }
            let grad_w = grads.adapter_w.as_mut().expect("adapter gradients");
            let grad_b = grads.adapter_b.as_mut().expect("adapter gradients");
            for i in 0..4 {
                let dpre = dinputs[i] * activation.derivative_from_output(adapter_eval.outputs[i]);
                grad_b[i] += dpre;
                for j in 0..4 {
                    grad_w[(i, j)] += dpre * adapter_eval.scaled[j];
                }
            }
        }
    }

    // Adapter weight decay.
    if let (Some(adapter), Some(grad_w)) = (&model.adapter, grads.adapter_w.as_mut()) {
        let lambda = cfg.adapter_l2;
        for r in 0..4 {
            for c in 0..4 {
                let w = adapter.weights[(r, c)];
                loss += lambda * w * w;
                grad_w[(r, c)] += 2.0 * lambda * w;
            }
        }
    }

    Ok((loss, grads))
}

/// Adam state over one flat parameter group.
struct Adam {
    m: Vec<Real>,
    v: Vec<Real>,
}

impl Adam {
    fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }

    fn update(
        &mut self,
        params: &mut [Real],
        grads: &[Real],
        lr: Real,
        beta1: Real,
        beta2: Real,
        t: usize,
    ) {
        let eps = 1e-8;
        let bc1 = 1.0 - beta1.powi(t as i32);
        let bc2 = 1.0 - beta2.powi(t as i32);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(&mut self.v))
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

fn flatten_adapter_grads(grads: &Gradients) -> Vec<Real> {
    let mut flat = Vec::new();
    if let Some(w) = &grads.adapter_w {
        flat.extend_from_slice(w.as_slice());
    }
    if let Some(b) = &grads.adapter_b {
        flat.extend_from_slice(b);
    }
    flat
}

fn adapter_params(model: &HybridModel) -> Vec<Real> {
    let mut flat = Vec::new();
    if let Some(adapter) = &model.adapter {
        flat.extend_from_slice(adapter.weights.as_slice());
        flat.extend_from_slice(&adapter.bias);
    }
    flat
}

fn write_adapter_params(model: &mut HybridModel, flat: &[Real]) {
    if let Some(adapter) = &mut model.adapter {
        for r in 0..4 {
            for c in 0..4 {
                adapter.weights[(r, c)] = flat[r * 4 + c];
            }
        }
        adapter.bias = flat[16..20].to_vec();
    }
}

fn flatten_classical(grads: &Gradients) -> Vec<Real> {
    let mut flat = Vec::new();
    flat.extend_from_slice(grads.w1.as_slice());
    flat.extend_from_slice(&grads.b1);
    flat.extend_from_slice(grads.w2.as_slice());
    flat.extend_from_slice(&grads.b2);
    flat
}

fn classical_params(model: &HybridModel) -> Vec<Real> {
    let mut flat = Vec::new();
    flat.extend_from_slice(model.head.w1.as_slice());
    flat.extend_from_slice(&model.head.b1);
    flat.extend_from_slice(model.head.w2.as_slice());
    flat.extend_from_slice(&model.head.b2);
    flat
}

fn write_classical_params(model: &mut HybridModel, flat: &[Real]) {
    let mut offset = 0;
    let mut take = |len: usize, offset: &mut usize| -> Vec<Real> {
        let out = flat[*offset..*offset + len].to_vec();
        *offset += len;
        out
    };
    let width = model.head.width();
    let outputs = model.head.n_outputs();
    let w1 = take(N_QUANTUM_FEATURES * width, &mut offset);
    for r in 0..N_QUANTUM_FEATURES {
        for c in 0..width {
            model.head.w1[(r, c)] = w1[r * width + c];
        }
    }
    model.head.b1 = take(width, &mut offset);
    let w2 = take(width * outputs, &mut offset);
    for r in 0..width {
        for c in 0..outputs {
            model.head.w2[(r, c)] = w2[r * outputs + c];
        }
    }
    model.head.b2 = take(outputs, &mut offset);
    debug_assert_eq!(offset, flat.len());
}

/// Trains the model in place and returns the per-epoch trace.
///
/// Gradient norms are recorded before clipping; the update uses the
/// clipped gradient. Training stops early once the loss has failed to
/// improve by at least `min_improvement` for `patience` consecutive
/// epochs.
pub fn train(
    model: &mut HybridModel,
    x: &RealMatrix,
    targets: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainingTrace, HybridError> {
    train_scoped(model, x, targets, cfg, TrainScope::Full)
}

pub(crate) fn train_scoped(
    model: &mut HybridModel,
    x: &RealMatrix,
    targets: &[usize],
    cfg: &TrainConfig,
    scope: TrainScope,
) -> Result<TrainingTrace, HybridError> {
    cfg.validate()?;
    let mut trace = TrainingTrace::default();
    let mut adam_quantum = Adam::new(model.theta.len());
    let mut adam_adapter = Adam::new(adapter_params(model).len());
    let mut adam_classical = Adam::new(classical_params(model).len());
    let mut best_loss = Real::INFINITY;
    let mut epochs_without_improvement = 0;

    for epoch in 0..cfg.epochs {
        let (loss, mut grads) = loss_and_gradients_scoped(model, x, targets, cfg, scope)?;
        if !loss.is_finite() {
            return Err(HybridError::NonFiniteLoss { epoch });
        }
        trace.loss.push(loss);
        trace.quantum_grad_norm.push(grads.quantum_norm());
        trace.classical_grad_norm.push(grads.classical_norm());

        let global = grads.global_norm();
        if global > cfg.clip_norm {
            grads.scale(cfg.clip_norm / global);
        }

        let t = epoch + 1;
        if scope == TrainScope::Full {
            adam_quantum.update(
                &mut model.theta,
                &grads.theta,
                cfg.lr_quantum,
                cfg.beta1,
                cfg.beta2,
                t,
            );
        }
        if scope == TrainScope::Full && model.adapter.is_some() {
            let mut adapter = adapter_params(model);
            let adapter_grads = flatten_adapter_grads(&grads);
            adam_adapter.update(
                &mut adapter,
                &adapter_grads,
                cfg.lr_adapter,
                cfg.beta1,
                cfg.beta2,
                t,
            );
            write_adapter_params(model, &adapter);
        }
        let mut classical = classical_params(model);
        let classical_grads = flatten_classical(&grads);
        adam_classical.update(
            &mut classical,
            &classical_grads,
            cfg.lr_classical,
            cfg.beta1,
            cfg.beta2,
            t,
        );
        write_classical_params(model, &classical);

        if best_loss - loss >= cfg.min_improvement {
            best_loss = loss;
            epochs_without_improvement = 0;
        } else {
            epochs_without_improvement += 1;
            if epochs_without_improvement >= cfg.patience {
                trace.stopped_early = true;
                break;
            }
        }
    }
    Ok(trace)
}
