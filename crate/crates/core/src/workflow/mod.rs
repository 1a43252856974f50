//! The refinement engine: run stages, diagnose, apply rule-driven
//! architecture modifications, iterate until satisfactory.

pub mod artifacts;
mod rules;
mod stages;

pub use rules::{
    default_rules, evaluate_rules, Change, ChangeKind, Comparator, MetricKey, RefinementRule,
};
pub use stages::{
    apply_changes, prepare_data, run_classical_stage, run_hybrid_stage, stage_seed, StageData,
    StageModel, StageOutput,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RunConfig;
use crate::diagnostics::DiagnosticsReport;
use crate::evalmetrics::EvaluationReport;
use crate::hybrid::Architecture;
use crate::Real;

#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error("{stage} stage failed: {message}")]
    Stage { stage: String, message: String },
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
    #[error("artifact error: {0}")]
    Artifact(String),
    #[error("io error at {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// One refinement round: the changes that produced this round's
/// architecture, the trained model's diagnostics and evaluation, and the
/// rules that fired on it afterwards.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub changes_applied: Vec<Change>,
    pub arch: Architecture,
    pub diagnostics: DiagnosticsReport,
    pub evaluation: EvaluationReport,
    pub fired_after: Vec<Change>,
    pub satisfied: bool,
}

/// Summary of a whole workflow run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorkflowState {
    pub seed: u64,
    pub max_rounds: usize,
    pub classical_evaluation: EvaluationReport,
    pub minimal_evaluation: EvaluationReport,
    pub minimal_diagnostics: DiagnosticsReport,
    pub rounds: Vec<RoundRecord>,
    pub satisfied: bool,
}

/// Satisfaction predicate: mapped accuracy against ground truth meets the
/// target and no refinement rule fires. Without ground truth the internal
/// consistency stands in for accuracy.
pub fn is_satisfied(
    evaluation: &EvaluationReport,
    fired: &[Change],
    target: Real,
    has_ground_truth: bool,
) -> bool {
    let score = if has_ground_truth {
        evaluation.accuracy
    } else {
        evaluation.a_internal
    };
    score >= target && fired.is_empty()
}

/// Outcome of [`run_workflow`]: the summary plus every stage output in
/// execution order, for persistence.
pub struct WorkflowRun {
    pub state: WorkflowState,
    pub classical: StageOutput,
    pub minimal: StageOutput,
    pub refined: Vec<StageOutput>,
}

/// Executes the full loop: classical baseline, minimal hybrid, then up to
/// `max_rounds` diagnose-modify-retrain rounds, stopping early when the
/// satisfaction predicate holds.
pub fn run_workflow(cfg: &RunConfig) -> Result<WorkflowRun, WorkflowError> {
    let data = prepare_data(cfg)?;
    let rules = default_rules(cfg);

    let classical = run_classical_stage(&data, cfg)?;
    let inherited = cfg
        .inherit_labels
        .then(|| classical.labels.labels.clone());

    let minimal_arch = Architecture::minimal(cfg.head_width_minimal);
    let minimal = run_hybrid_stage(
        &data,
        cfg,
        &minimal_arch,
        &cfg.train,
        "quantum-fast",
        stage_seed(cfg.seed, "minimal"),
        inherited.as_deref(),
    )?;

    let minimal_diag = minimal
        .diagnostics
        .clone()
        .expect("hybrid stages always diagnose");
    let mut fired = evaluate_rules(&minimal_diag, &rules);
    let mut satisfied = is_satisfied(&minimal.evaluation, &fired, cfg.accuracy_target, true);

    let mut arch = minimal_arch;
    let mut train_cfg = cfg.train;
    let mut rounds = Vec::new();
    let mut refined_outputs = Vec::new();
    let mut round = 0;
    while !satisfied && round < cfg.workflow_max_rounds {
        round += 1;
        let changes = fired.clone();
        let (next_arch, next_train) = apply_changes(&arch, &train_cfg, &changes);
        arch = next_arch;
        train_cfg = next_train;
        let stage = run_hybrid_stage(
            &data,
            cfg,
            &arch,
            &train_cfg,
            "hybrid-plus",
            stage_seed(cfg.seed, &format!("refined-{round}")),
            inherited.as_deref(),
        )?;
        let diagnostics = stage
            .diagnostics
            .clone()
            .expect("hybrid stages always diagnose");
        fired = evaluate_rules(&diagnostics, &rules);
        satisfied = is_satisfied(&stage.evaluation, &fired, cfg.accuracy_target, true);
        rounds.push(RoundRecord {
            round,
            changes_applied: changes,
            arch,
            diagnostics,
            evaluation: stage.evaluation.clone(),
            fired_after: fired.clone(),
            satisfied,
        });
        refined_outputs.push(stage);
    }

    let state = WorkflowState {
        seed: cfg.seed,
        max_rounds: cfg.workflow_max_rounds,
        classical_evaluation: classical.evaluation.clone(),
        minimal_evaluation: minimal.evaluation.clone(),
        minimal_diagnostics: minimal_diag,
        rounds,
        satisfied,
    };
    Ok(WorkflowRun {
        state,
        classical,
        minimal,
        refined: refined_outputs,
    })
}
