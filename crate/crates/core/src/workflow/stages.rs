//! Stage execution shared by the CLI's `run` command and the workflow
//! loop.

use crate::config::RunConfig;
use crate::data::{load_iris, load_iris_bundled, pca_fit, pca_transform, standardize, Dataset};
use crate::diagnostics::{diagnose, DiagnosticsReport};
use crate::evalmetrics::{evaluate, EvaluationReport};
use crate::hybrid::{Architecture, CircuitKind, HybridModel, HybridPredictor, TrainConfig};
use crate::numerics::derive_seed;
use crate::pls::{PlsModel, PlsPredictor};
use crate::selftrain::{init_labels, run as selftrain_run, LabelState, Predictor, SelfTrainOptions};
use crate::workflow::rules::Change;
use crate::workflow::WorkflowError;
use crate::{Real, RealMatrix};

/// Prepared model inputs: the standardized dataset for the classical
/// stage and its four-component PCA scores for the hybrid stages.
pub struct StageData {
    pub dataset: Dataset,
    pub classical_inputs: RealMatrix,
    pub hybrid_inputs: RealMatrix,
    pub pca: crate::data::PcaModel,
}

/// Seed for a named stage, derived from the master seed.
pub fn stage_seed(seed: u64, tag: &str) -> u64 {
    derive_seed(seed, tag)
}

/// Loads (or reuses the bundled) dataset, applies the optional row filter,
/// standardizes, and fits the PCA used by the hybrid stages.
pub fn prepare_data(cfg: &RunConfig) -> Result<StageData, WorkflowError> {
    let raw = match &cfg.data_path {
        Some(path) => load_iris(path)?,
        None => load_iris_bundled()?,
    };
    let raw = match &cfg.data_rows {
        Some(rows) => raw.select_rows(rows)?,
        None => raw,
    };
    let standardized = standardize(&raw.features)?;
    let dataset = Dataset {
        features: standardized.clone(),
        ..raw
    };
    let pca = pca_fit(&standardized, standardized.cols().min(4))?;
    let scores = pca_transform(&pca, &standardized);
    // Hybrid input slot order: the leading component drives qubit 1's RY
    // (a direct, monotone readout), the smallest component drives qubit
    // 0's RY. Qubit 0 is the control of the minimal circuit's single CX,
    // so starving it keeps that entangler near-inert and the minimal
    // model's representation local; the refined adapter is free to remix
    // all four inputs.
    let slot_order: Vec<usize> = match scores.cols() {
        4 => vec![3, 1, 0, 2],
        n => (0..n).collect(),
    };
    let mut hybrid_inputs = RealMatrix::zeros(scores.rows(), scores.cols());
    for r in 0..scores.rows() {
        for (slot, &component) in slot_order.iter().enumerate() {
            hybrid_inputs[(r, slot)] = scores[(r, component)];
        }
    }
    Ok(StageData {
        dataset,
        classical_inputs: standardized,
        hybrid_inputs,
        pca,
    })
}

/// Model side of a stage output, kept for artifact serialization.
pub enum StageModel {
    Pls {
        model: PlsModel<Real>,
        vocab: Vec<usize>,
    },
    Hybrid(HybridModel),
}

/// Everything one stage produces.
pub struct StageOutput {
    pub name: String,
    pub seed: u64,
    pub labels: LabelState,
    pub predictions: Vec<usize>,
    pub evaluation: EvaluationReport,
    pub model: StageModel,
    pub trace: Option<crate::hybrid::TrainingTrace>,
    pub diagnostics: Option<DiagnosticsReport>,
}

fn stage_error(stage: &str, e: impl std::fmt::Display) -> WorkflowError {
    WorkflowError::Stage {
        stage: stage.to_string(),
        message: e.to_string(),
    }
}

fn initial_state(
    n: usize,
    inherited: Option<&[usize]>,
    stage: &str,
) -> Result<LabelState, WorkflowError> {
    match inherited {
        Some(labels) => Ok(LabelState {
            labels: labels.to_vec(),
            iteration: 0,
            history: Vec::new(),
            last_predictions: None,
        }),
        None => init_labels(n).map_err(|e| stage_error(stage, e)),
    }
}

/// PLS self-training baseline on the standardized features.
pub fn run_classical_stage(
    data: &StageData,
    cfg: &RunConfig,
) -> Result<StageOutput, WorkflowError> {
    let stage = "classical";
    let x = &data.classical_inputs;
    let seed = stage_seed(cfg.seed, stage);
    let mut predictor = PlsPredictor::new(cfg.pls_components, cfg.cv_folds, seed);
    let opts = SelfTrainOptions {
        batch_fraction: cfg.selftrain_batch_fraction,
    };
    let state = initial_state(x.rows(), None, stage)?;
    let state = selftrain_run(
        &state,
        &mut predictor,
        x,
        cfg.selftrain_max_iterations,
        &opts,
    )
    .map_err(|e| stage_error(stage, e))?;
    predictor
        .fit(x, &state.labels)
        .map_err(|e| stage_error(stage, e))?;
    let predictions = predictor.predict(x).map_err(|e| stage_error(stage, e))?;
    let evaluation = evaluate(&state.labels, &data.dataset.true_labels, &predictions)
        .map_err(|e| stage_error(stage, e))?;
    let (model, vocab) = predictor
        .fitted()
        .map(|(m, v)| (m.clone(), v.to_vec()))
        .expect("fit just ran");
    Ok(StageOutput {
        name: stage.to_string(),
        seed,
        labels: state,
        predictions,
        evaluation,
        model: StageModel::Pls { model, vocab },
        trace: None,
        diagnostics: None,
    })
}

/// Hybrid self-training stage on the PCA inputs, diagnosed after the final
/// fit.
pub fn run_hybrid_stage(
    data: &StageData,
    cfg: &RunConfig,
    arch: &Architecture,
    train_cfg: &TrainConfig,
    name: &str,
    seed: u64,
    inherited: Option<&[usize]>,
) -> Result<StageOutput, WorkflowError> {
    let x = &data.hybrid_inputs;
    let n = x.rows();
    let state = initial_state(n, inherited, name)?;
    let mut vocab = state.labels.clone();
    vocab.sort_unstable();
    vocab.dedup();
    let feature_scale = crate::hybrid::predictor::encoding_scale(x);
    let mut predictor = HybridPredictor::new(
        arch,
        *train_cfg,
        cfg.cv_folds,
        vocab,
        feature_scale,
        seed,
    )
    .with_embedding_vocab_cap(cfg.embedding_vocab_cap);
    let opts = SelfTrainOptions {
        batch_fraction: cfg.selftrain_batch_fraction,
    };
    let state = selftrain_run(
        &state,
        &mut predictor,
        x,
        cfg.selftrain_max_iterations,
        &opts,
    )
    .map_err(|e| stage_error(name, e))?;
    predictor
        .fit(x, &state.labels)
        .map_err(|e| stage_error(name, e))?;
    let predictions = predictor.predict(x).map_err(|e| stage_error(name, e))?;
    let evaluation = evaluate(&state.labels, &data.dataset.true_labels, &predictions)
        .map_err(|e| stage_error(name, e))?;
    let trace = predictor
        .last_trace()
        .cloned()
        .expect("fit just ran");
    let model = predictor.into_model();
    let diagnostics = diagnose(
        &model,
        x,
        &state.labels,
        &trace,
        cfg.bpi_inits,
        derive_seed(seed, "bpi"),
    )
    .map_err(|e| stage_error(name, e))?;
    Ok(StageOutput {
        name: name.to_string(),
        seed,
        labels: state,
        predictions,
        evaluation,
        model: StageModel::Hybrid(model),
        trace: Some(trace),
        diagnostics: Some(diagnostics),
    })
}

/// Applies a change set to an architecture and training config. Applying
/// the same set twice is a no-op the second time.
pub fn apply_changes(
    arch: &Architecture,
    train_cfg: &TrainConfig,
    changes: &[Change],
) -> (Architecture, TrainConfig) {
    let mut arch = *arch;
    let mut train_cfg = *train_cfg;
    for change in changes {
        match change {
            Change::SetEntanglingReps { reps } => {
                arch.circuit = CircuitKind::Refined { reps: *reps };
            }
            Change::EnableAdapter { l2 } => {
                arch.adapter = true;
                train_cfg.adapter_l2 = *l2;
            }
            Change::SetHeadWidth { width } => {
                arch.head_width = *width;
            }
        }
    }
    (arch, train_cfg)
}
