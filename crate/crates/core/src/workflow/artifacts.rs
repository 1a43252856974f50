//! Run-directory persistence: every stage writes a fixed set of JSON/CSV
//! artifacts, deterministic given config and seed. Timestamps live only in
//! `run.json`'s `meta` block so determinism checks can exclude them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;
use crate::hybrid::{
    Activation, AdapterParams, HeadParams, HybridModel, TrainingTrace, Variant,
};
use crate::qsim::CircuitSpec;
use crate::selftrain::LabelState;
use crate::workflow::{StageModel, StageOutput, WorkflowError, WorkflowRun};
use crate::{Real, RealMatrix};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelArtifact {
    Pls(PlsArtifact),
    Hybrid(HybridArtifact),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlsArtifact {
    pub n_components: usize,
    pub x_mean: Vec<Real>,
    pub y_mean: Vec<Real>,
    pub x_weights: Vec<Vec<Real>>,
    pub x_loadings: Vec<Vec<Real>>,
    pub y_loadings: Vec<Vec<Real>>,
    pub vocab: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdapterArtifact {
    pub weights: Vec<Vec<Real>>,
    pub bias: Vec<Real>,
    pub activation: Activation,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeadArtifact {
    pub w1: Vec<Vec<Real>>,
    pub b1: Vec<Real>,
    pub w2: Vec<Vec<Real>>,
    pub b2: Vec<Real>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HybridArtifact {
    pub variant: Variant,
    pub seed: u64,
    pub circuit: CircuitSpec,
    pub theta: Vec<Real>,
    pub adapter: Option<AdapterArtifact>,
    pub head: HeadArtifact,
    pub vocab: Vec<usize>,
    pub feature_scale: Vec<Real>,
}

impl From<&HybridModel> for HybridArtifact {
    fn from(model: &HybridModel) -> Self {
        Self {
            variant: model.variant,
            seed: model.seed,
            circuit: model.circuit.clone(),
            theta: model.theta.clone(),
            adapter: model.adapter.as_ref().map(|a| AdapterArtifact {
                weights: a.weights.to_rows(),
                bias: a.bias.clone(),
                activation: a.activation,
            }),
            head: HeadArtifact {
                w1: model.head.w1.to_rows(),
                b1: model.head.b1.clone(),
                w2: model.head.w2.to_rows(),
                b2: model.head.b2.clone(),
            },
            vocab: model.vocab.clone(),
            feature_scale: model.feature_scale.clone(),
        }
    }
}

impl HybridArtifact {
    pub fn to_model(&self) -> Result<HybridModel, WorkflowError> {
        let matrix = |rows: &Vec<Vec<Real>>| {
            RealMatrix::from_rows(rows).map_err(|e| WorkflowError::Artifact(e.to_string()))
        };
        Ok(HybridModel {
            variant: self.variant,
            circuit: self.circuit.clone(),
            theta: self.theta.clone(),
            adapter: match &self.adapter {
                Some(a) => Some(AdapterParams {
                    weights: matrix(&a.weights)?,
                    bias: a.bias.clone(),
                    activation: a.activation,
                }),
                None => None,
            },
            head: HeadParams {
                w1: matrix(&self.head.w1)?,
                b1: self.head.b1.clone(),
                w2: matrix(&self.head.w2)?,
                b2: self.head.b2.clone(),
            },
            vocab: self.vocab.clone(),
            feature_scale: self.feature_scale.clone(),
            seed: self.seed,
        })
    }
}

impl From<&StageModel> for ModelArtifact {
    fn from(model: &StageModel) -> Self {
        match model {
            StageModel::Pls { model, vocab } => ModelArtifact::Pls(PlsArtifact {
                n_components: model.components(),
                x_mean: model.x_mean().to_vec(),
                y_mean: model.y_mean().to_vec(),
                x_weights: model.x_weights().to_rows(),
                x_loadings: model.x_loadings().to_rows(),
                y_loadings: model.y_loadings().to_rows(),
                vocab: vocab.clone(),
            }),
            StageModel::Hybrid(model) => ModelArtifact::Hybrid(model.into()),
        }
    }
}

/// Top-level run summary; the only artifact carrying a timestamp.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub meta: RunMeta,
    pub model: String,
    pub seed: u64,
    pub config: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMeta {
    pub unix_time: u64,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> WorkflowError + '_ {
    move |source| WorkflowError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), WorkflowError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| WorkflowError::Artifact(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, WorkflowError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| WorkflowError::Artifact(format!(
        "{}: {e}",
        path.display()
    )))
}

fn write_labels_csv(
    path: &Path,
    labels: &[usize],
    truth: &[usize],
) -> Result<(), WorkflowError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| WorkflowError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    })?;
    writer
        .write_record(["index", "label", "true_label"])
        .map_err(|e| WorkflowError::Artifact(e.to_string()))?;
    for (i, (l, t)) in labels.iter().zip(truth).enumerate() {
        writer
            .write_record([i.to_string(), l.to_string(), t.to_string()])
            .map_err(|e| WorkflowError::Artifact(e.to_string()))?;
    }
    writer
        .flush()
        .map_err(|e| WorkflowError::Artifact(e.to_string()))?;
    Ok(())
}

pub fn read_labels_csv(path: &Path) -> Result<Vec<usize>, WorkflowError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| WorkflowError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    })?;
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| WorkflowError::Artifact(e.to_string()))?;
        let label: usize = record
            .get(1)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| WorkflowError::Artifact(format!("bad labels row in {}", path.display())))?;
        labels.push(label);
    }
    Ok(labels)
}

/// Writes one stage's artifact set into `dir`: `model.json`,
/// `history.json`, `labels.csv`, `evaluation.json`, and for hybrid stages
/// `trace.json` and `diagnostics.json`.
pub fn write_stage(
    dir: &Path,
    stage: &StageOutput,
    truth: &[usize],
) -> Result<(), WorkflowError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_json(&dir.join("model.json"), &ModelArtifact::from(&stage.model))?;
    write_json(&dir.join("history.json"), &stage.labels)?;
    write_json(&dir.join("evaluation.json"), &stage.evaluation)?;
    write_labels_csv(&dir.join("labels.csv"), &stage.labels.labels, truth)?;
    if let Some(trace) = &stage.trace {
        write_json(&dir.join("trace.json"), trace)?;
    }
    if let Some(diagnostics) = &stage.diagnostics {
        write_json(&dir.join("diagnostics.json"), diagnostics)?;
    }
    Ok(())
}

fn unix_time() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Writes `run.json` (the timestamped summary) for a single-stage run.
pub fn write_run_summary(
    dir: &Path,
    model: &str,
    cfg: &RunConfig,
) -> Result<(), WorkflowError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_json(
        &dir.join("run.json"),
        &RunSummary {
            meta: RunMeta {
                unix_time: unix_time(),
            },
            model: model.to_string(),
            seed: cfg.seed,
            config: cfg.to_flat_json(),
        },
    )
}

/// Persists a whole workflow run:
/// `classical/`, `minimal/`, `round_<i>/` stage directories plus
/// `workflow.json` and the timestamped `run.json`.
pub fn write_workflow(
    dir: &Path,
    run: &WorkflowRun,
    truth: &[usize],
    cfg: &RunConfig,
) -> Result<(), WorkflowError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_stage(&dir.join("classical"), &run.classical, truth)?;
    write_stage(&dir.join("minimal"), &run.minimal, truth)?;
    for (record, stage) in run.state.rounds.iter().zip(&run.refined) {
        write_stage(&dir.join(format!("round_{}", record.round)), stage, truth)?;
    }
    write_json(&dir.join("workflow.json"), &run.state)?;
    write_run_summary(dir, "workflow", cfg)
}

/// Artifacts needed to recompute diagnostics for an existing hybrid run.
pub struct DiagnoseInputs {
    pub model: HybridModel,
    pub trace: TrainingTrace,
    pub labels: Vec<usize>,
}

/// Loads `model.json`, `trace.json`, and `labels.csv` from a run
/// directory, naming the missing piece on failure.
pub fn read_diagnose_inputs(dir: &Path) -> Result<DiagnoseInputs, WorkflowError> {
    let require = |name: &str| -> Result<PathBuf, WorkflowError> {
        let path = dir.join(name);
        if !path.exists() {
            return Err(WorkflowError::Artifact(format!(
                "missing run artifact: {}",
                path.display()
            )));
        }
        Ok(path)
    };
    let model: ModelArtifact = read_json(&require("model.json")?)?;
    let model = match model {
        ModelArtifact::Hybrid(artifact) => artifact.to_model()?,
        ModelArtifact::Pls(_) => {
            return Err(WorkflowError::Artifact(
                "diagnostics need a hybrid run; found a PLS model".into(),
            ))
        }
    };
    let trace: TrainingTrace = read_json(&require("trace.json")?)?;
    let labels = read_labels_csv(&require("labels.csv")?)?;
    Ok(DiagnoseInputs {
        model,
        trace,
        labels,
    })
}

/// Reads a stage's label history back.
pub fn read_history(dir: &Path) -> Result<LabelState, WorkflowError> {
    read_json(&dir.join("history.json"))
}
