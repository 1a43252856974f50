//! Run configuration: documented defaults, flat JSON config files with
//! module-namespaced keys, and strict rejection of unknown keys.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::Value;
use thiserror::Error;

use crate::hybrid::TrainConfig;
use crate::Real;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config {path} is not valid JSON: {message}")]
    Parse { path: String, message: String },
    #[error("config must be a flat JSON object")]
    NotAnObject,
    #[error("unknown config key: {0}")]
    UnknownKey(String),
    #[error("config key {key}: expected {expected}")]
    BadValue { key: String, expected: &'static str },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Resolved configuration for every stage. Each field corresponds to one
/// flat config key; see [`RunConfig::to_flat_json`] for the key names.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    /// Dataset CSV; the bundled Iris copy when absent.
    pub data_path: Option<PathBuf>,
    /// Optional row filter (indices into the loaded dataset).
    pub data_rows: Option<Vec<usize>>,
    pub pls_components: usize,
    /// Fold count shared by the classical and hybrid cross-validation.
    pub cv_folds: usize,
    pub selftrain_max_iterations: usize,
    pub selftrain_batch_fraction: Real,
    /// Hybrid stages inherit the classical stage's final labels instead of
    /// restarting from index labels (workflow command only).
    pub inherit_labels: bool,
    pub train: TrainConfig,
    /// Vocabulary size below which hybrid full fits train the embedding.
    pub embedding_vocab_cap: usize,
    pub head_width_minimal: usize,
    pub head_width_refined: usize,
    pub refined_reps: usize,
    pub bpi_inits: usize,
    pub workflow_max_rounds: usize,
    pub accuracy_target: Real,
    pub rule_eee_threshold: Real,
    pub rule_edqfs_threshold: Real,
    pub rule_qos_threshold: Real,
    pub rule_reps: usize,
    pub rule_adapter_l2: Real,
    pub rule_head_width: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            data_path: None,
            data_rows: None,
            pls_components: 2,
            cv_folds: 5,
            selftrain_max_iterations: 20,
            selftrain_batch_fraction: 0.1,
            inherit_labels: false,
            train: TrainConfig::default(),
            embedding_vocab_cap: 10,
            head_width_minimal: 8,
            head_width_refined: 16,
            refined_reps: 3,
            bpi_inits: 32,
            workflow_max_rounds: 3,
            accuracy_target: 0.80,
            rule_eee_threshold: 0.3,
            rule_edqfs_threshold: 1.2,
            rule_qos_threshold: 10.0,
            rule_reps: 3,
            rule_adapter_l2: 1e-3,
            rule_head_width: 16,
        }
    }
}

impl RunConfig {
    /// Applies a flat JSON config file on top of the current values.
    /// Unknown keys are fatal.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let value: Value = serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let object = value.as_object().ok_or(ConfigError::NotAnObject)?;
        for (key, val) in object {
            self.apply_key(key, val)?;
        }
        self.validate()
    }

    fn apply_key(&mut self, key: &str, value: &Value) -> Result<(), ConfigError> {
        fn as_u64(key: &str, v: &Value) -> Result<u64, ConfigError> {
            v.as_u64().ok_or(ConfigError::BadValue {
                key: key.to_string(),
                expected: "a nonnegative integer",
            })
        }
        fn as_usize(key: &str, v: &Value) -> Result<usize, ConfigError> {
            Ok(as_u64(key, v)? as usize)
        }
        fn as_real(key: &str, v: &Value) -> Result<Real, ConfigError> {
            v.as_f64().ok_or(ConfigError::BadValue {
                key: key.to_string(),
                expected: "a number",
            })
        }
        fn as_bool(key: &str, v: &Value) -> Result<bool, ConfigError> {
            v.as_bool().ok_or(ConfigError::BadValue {
                key: key.to_string(),
                expected: "a boolean",
            })
        }

        match key {
            "seed" => self.seed = as_u64(key, value)?,
            "data.path" => {
                self.data_path = match value {
                    Value::Null => None,
                    Value::String(s) => Some(PathBuf::from(s)),
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: key.to_string(),
                            expected: "a path string or null",
                        })
                    }
                }
            }
            "data.rows" => {
                self.data_rows = match value {
                    Value::Null => None,
                    Value::Array(items) => {
                        let mut rows = Vec::with_capacity(items.len());
                        for item in items {
                            rows.push(as_usize(key, item)?);
                        }
                        Some(rows)
                    }
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: key.to_string(),
                            expected: "an array of row indices or null",
                        })
                    }
                }
            }
            "pls.n_components" => self.pls_components = as_usize(key, value)?,
            "pls.k_folds" => self.cv_folds = as_usize(key, value)?,
            "selftrain.n_maxit" => self.selftrain_max_iterations = as_usize(key, value)?,
            "selftrain.batch_fraction" => self.selftrain_batch_fraction = as_real(key, value)?,
            "selftrain.inherit_labels" => self.inherit_labels = as_bool(key, value)?,
            "hybrid.lr_quantum" => self.train.lr_quantum = as_real(key, value)?,
            "hybrid.lr_classical" => self.train.lr_classical = as_real(key, value)?,
            "hybrid.lr_adapter" => self.train.lr_adapter = as_real(key, value)?,
            "hybrid.epochs" => self.train.epochs = as_usize(key, value)?,
            "hybrid.patience" => self.train.patience = as_usize(key, value)?,
            "hybrid.clip_norm" => self.train.clip_norm = as_real(key, value)?,
            "hybrid.adapter_l2" => self.train.adapter_l2 = as_real(key, value)?,
            "hybrid.beta1" => self.train.beta1 = as_real(key, value)?,
            "hybrid.beta2" => self.train.beta2 = as_real(key, value)?,
            "hybrid.min_improvement" => self.train.min_improvement = as_real(key, value)?,
            "hybrid.embedding_vocab_cap" => self.embedding_vocab_cap = as_usize(key, value)?,
            "hybrid.head_width_minimal" => self.head_width_minimal = as_usize(key, value)?,
            "hybrid.head_width_refined" => self.head_width_refined = as_usize(key, value)?,
            "hybrid.reps" => self.refined_reps = as_usize(key, value)?,
            "diagnostics.bpi_inits" => self.bpi_inits = as_usize(key, value)?,
            "workflow.max_rounds" => self.workflow_max_rounds = as_usize(key, value)?,
            "workflow.accuracy_target" => self.accuracy_target = as_real(key, value)?,
            "workflow.rule_eee_threshold" => self.rule_eee_threshold = as_real(key, value)?,
            "workflow.rule_edqfs_threshold" => self.rule_edqfs_threshold = as_real(key, value)?,
            "workflow.rule_qos_threshold" => self.rule_qos_threshold = as_real(key, value)?,
            "workflow.rule_reps" => self.rule_reps = as_usize(key, value)?,
            "workflow.rule_adapter_l2" => self.rule_adapter_l2 = as_real(key, value)?,
            "workflow.rule_head_width" => self.rule_head_width = as_usize(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.pls_components == 0 {
            return Err(ConfigError::Invalid("pls.n_components must be >= 1".into()));
        }
        if self.cv_folds < 2 {
            return Err(ConfigError::Invalid("pls.k_folds must be >= 2".into()));
        }
        if self.selftrain_max_iterations == 0 {
            return Err(ConfigError::Invalid("selftrain.n_maxit must be >= 1".into()));
        }
        if !(self.selftrain_batch_fraction > 0.0 && self.selftrain_batch_fraction <= 1.0) {
            return Err(ConfigError::Invalid(
                "selftrain.batch_fraction must lie in (0, 1]".into(),
            ));
        }
        if self.refined_reps == 0 || self.rule_reps == 0 {
            return Err(ConfigError::Invalid("entangling reps must be >= 1".into()));
        }
        if self.head_width_minimal == 0 || self.head_width_refined == 0 || self.rule_head_width == 0
        {
            return Err(ConfigError::Invalid("head widths must be >= 1".into()));
        }
        if self.bpi_inits < 2 {
            return Err(ConfigError::Invalid(
                "diagnostics.bpi_inits must be >= 2".into(),
            ));
        }
        if self.workflow_max_rounds == 0 {
            return Err(ConfigError::Invalid(
                "workflow.max_rounds must be >= 1".into(),
            ));
        }
        self.train
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    /// Flat key/value echo of the resolved configuration; BTreeMap keeps
    /// the serialization deterministic.
    pub fn to_flat_json(&self) -> BTreeMap<String, Value> {
        let mut map = BTreeMap::new();
        let mut put = |k: &str, v: Value| {
            map.insert(k.to_string(), v);
        };
        put("seed", Value::from(self.seed));
        put(
            "data.path",
            match &self.data_path {
                Some(p) => Value::from(p.display().to_string()),
                None => Value::Null,
            },
        );
        put(
            "data.rows",
            match &self.data_rows {
                Some(rows) => Value::from(rows.clone()),
                None => Value::Null,
            },
        );
        put("pls.n_components", Value::from(self.pls_components));
        put("pls.k_folds", Value::from(self.cv_folds));
        put(
            "selftrain.n_maxit",
            Value::from(self.selftrain_max_iterations),
        );
        put(
            "selftrain.batch_fraction",
            Value::from(self.selftrain_batch_fraction),
        );
        put("selftrain.inherit_labels", Value::from(self.inherit_labels));
        put("hybrid.lr_quantum", Value::from(self.train.lr_quantum));
        put("hybrid.lr_classical", Value::from(self.train.lr_classical));
        put("hybrid.lr_adapter", Value::from(self.train.lr_adapter));
        put("hybrid.epochs", Value::from(self.train.epochs));
        put("hybrid.patience", Value::from(self.train.patience));
        put("hybrid.clip_norm", Value::from(self.train.clip_norm));
        put("hybrid.adapter_l2", Value::from(self.train.adapter_l2));
        put("hybrid.beta1", Value::from(self.train.beta1));
        put("hybrid.beta2", Value::from(self.train.beta2));
        put(
            "hybrid.min_improvement",
            Value::from(self.train.min_improvement),
        );
        put(
            "hybrid.embedding_vocab_cap",
            Value::from(self.embedding_vocab_cap),
        );
        put(
            "hybrid.head_width_minimal",
            Value::from(self.head_width_minimal),
        );
        put(
            "hybrid.head_width_refined",
            Value::from(self.head_width_refined),
        );
        put("hybrid.reps", Value::from(self.refined_reps));
        put("diagnostics.bpi_inits", Value::from(self.bpi_inits));
        put("workflow.max_rounds", Value::from(self.workflow_max_rounds));
        put(
            "workflow.accuracy_target",
            Value::from(self.accuracy_target),
        );
        put(
            "workflow.rule_eee_threshold",
            Value::from(self.rule_eee_threshold),
        );
        put(
            "workflow.rule_edqfs_threshold",
            Value::from(self.rule_edqfs_threshold),
        );
        put(
            "workflow.rule_qos_threshold",
            Value::from(self.rule_qos_threshold),
        );
        put("workflow.rule_reps", Value::from(self.rule_reps));
        put(
            "workflow.rule_adapter_l2",
            Value::from(self.rule_adapter_l2),
        );
        put("workflow.rule_head_width", Value::from(self.rule_head_width));
        map
    }
}
