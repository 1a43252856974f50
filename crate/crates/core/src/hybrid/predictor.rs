//! Adapter plugging the hybrid model into the self-training loop.
//!
//! Quantum parameters and the adapter persist across self-training
//! iterations; the head is re-instantiated (from this predictor's seed
//! stream) whenever the label vocabulary changes. Cross-validated
//! predictions train one fold model per fold, warm-started from the
//! persistent parameters, on the same fixed fold plan style as the
//! classical baseline.

use crate::hybrid::model::{init_head, init_head_for_vocab};
use crate::hybrid::{Architecture, HybridError, HybridModel, TrainConfig, TrainingTrace};
use crate::numerics::SeededRng;
use crate::pls::CvPlan;
use crate::selftrain::{CvPrediction, Predictor, PredictorError};
use crate::{Real, RealMatrix};

pub struct HybridPredictor {
    model: HybridModel,
    cfg: TrainConfig,
    k_folds: usize,
    plan: Option<CvPlan>,
    rng: SeededRng,
    last_trace: Option<TrainingTrace>,
    fitted: bool,
    /// Largest label vocabulary for which full fits train the embedding;
    /// above it only the head trains. Training the circuit and adapter
    /// against hundreds of singleton pseudo-labels injects noise without
    /// signal, so embedding training is deferred until the labels have
    /// consolidated into a real classification problem.
    embedding_vocab_cap: usize,
}

impl HybridPredictor {
    /// Builds the untrained model. `initial_vocab` is usually the index
    /// labels `0..N`; `feature_scale` the per-column scale of the input
    /// space (see [`encoding_scale`]).
    pub fn new(
        arch: &Architecture,
        cfg: TrainConfig,
        k_folds: usize,
        initial_vocab: Vec<usize>,
        feature_scale: Vec<Real>,
        seed: u64,
    ) -> Self {
        let mut rng = SeededRng::new(seed);
        let model = HybridModel::init(arch, initial_vocab, feature_scale, seed, &mut rng);
        Self {
            model,
            cfg,
            k_folds,
            plan: None,
            rng,
            last_trace: None,
            fitted: false,
            embedding_vocab_cap: std::env::var("C2H_VOCAB_CAP")
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(10),
        }
    }

    /// Overrides the vocabulary size below which full fits train the
    /// embedding.
    pub fn with_embedding_vocab_cap(mut self, cap: usize) -> Self {
        self.embedding_vocab_cap = cap;
        self
    }

    pub fn model(&self) -> &HybridModel {
        &self.model
    }

    pub fn into_model(self) -> HybridModel {
        self.model
    }

    /// Trace of the most recent full-data fit.
    pub fn last_trace(&self) -> Option<&TrainingTrace> {
        self.last_trace.as_ref()
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    fn sync_vocab(model: &mut HybridModel, vocab: &[usize], rng: &mut SeededRng) {
        if model.vocab != vocab {
            let width = model.head.width();
            model.head = init_head(rng, width, vocab.len());
            model.vocab = vocab.to_vec();
        }
    }

    fn positions(vocab: &[usize], labels: &[usize]) -> Vec<usize> {
        labels
            .iter()
            .map(|l| vocab.binary_search(l).expect("label in vocabulary"))
            .collect()
    }

    fn ensure_plan(&mut self, n: usize) -> Result<CvPlan, HybridError> {
        if self.plan.is_none() {
            let seed = self.model.seed;
            self.plan = Some(
                CvPlan::new(n, self.k_folds, seed)
                    .map_err(|e| HybridError::Config(e.to_string()))?,
            );
        }
        Ok(self.plan.clone().expect("plan just created"))
    }
}

fn sorted_vocab(labels: &[usize]) -> Vec<usize> {
    let mut vocab = labels.to_vec();
    vocab.sort_unstable();
    vocab.dedup();
    vocab
}

/// Uniform input scale bringing the whole matrix into `[-1/2, 1/2]`
/// before angle encoding (one divisor, twice the largest absolute entry).
///
/// Two properties matter here. Keeping encoded angles inside
/// `[-pi/2, pi/2]` keeps the Z response monotone in each input; scaling a
/// column to the full `[-1, 1]` range folds its two extremes onto the same
/// expectation value and scrambles the class axis. And scaling globally
/// rather than per column preserves the variance hierarchy of the
/// projected data; per-column scaling blows the low-variance noise
/// directions up to the same range as the leading component.
pub fn encoding_scale(x: &RealMatrix) -> Vec<Real> {
    let m = x.max_abs();
    let divisor = if m > 0.0 { 2.0 * m } else { 1.0 };
    vec![divisor; x.cols()]
}

impl Predictor for HybridPredictor {
    fn fit(&mut self, x: &RealMatrix, labels: &[usize]) -> Result<(), PredictorError> {
        let vocab = sorted_vocab(labels);
        Self::sync_vocab(&mut self.model, &vocab, &mut self.rng);
        let targets = Self::positions(&vocab, labels);
        let scope = if vocab.len() <= self.embedding_vocab_cap {
            crate::hybrid::TrainScope::Full
        } else {
            crate::hybrid::TrainScope::HeadOnly
        };
        let trace =
            crate::hybrid::train::train_scoped(&mut self.model, x, &targets, &self.cfg, scope)?;
        self.last_trace = Some(trace);
        self.fitted = true;
        Ok(())
    }

    fn cross_val_predict(
        &mut self,
        x: &RealMatrix,
        labels: &[usize],
    ) -> Result<CvPrediction, PredictorError> {
        let n = x.rows();
        let vocab = sorted_vocab(labels);
        let targets = Self::positions(&vocab, labels);
        let plan = self.ensure_plan(n)?;

        let mut out_labels = vec![0usize; n];
        let mut confidence = vec![0.0; n];
        for fold in 0..plan.k {
            let (train_rows, test_rows) = plan.train_test(fold);
            if test_rows.is_empty() {
                continue;
            }
            // Fold models warm-start theta and adapter from the persistent
            // parameters but always take a fresh head that is a pure
            // function of (predictor seed, fold, vocabulary): step
            // acceptance compares two cross-validation passes on slightly
            // different label vectors, so output columns belonging to the
            // same label id must start identical in both passes.
            let mut fold_model = self.model.clone();
            let width = fold_model.head.width();
            let head_seed = crate::numerics::derive_seed(self.model.seed, "fold")
                .wrapping_add(fold as u64);
            fold_model.head = init_head_for_vocab(head_seed, width, &vocab);
            fold_model.vocab = vocab.clone();
            let x_train = crate::pls::take_rows(x, &train_rows);
            let fold_targets: Vec<usize> = train_rows.iter().map(|&r| targets[r]).collect();
            // Fold models cross-validate the head on the frozen persistent
            // embedding; retraining the embedding per fold made the votes
            // chaotic under label perturbations.
            let fold_scope = if std::env::var("C2H_FOLD_FULL").is_ok() {
                crate::hybrid::TrainScope::Full
            } else {
                crate::hybrid::TrainScope::HeadOnly
            };
            crate::hybrid::train::train_scoped(
                &mut fold_model,
                &x_train,
                &fold_targets,
                &self.cfg,
                fold_scope,
            )?;
            for &r in &test_rows {
                let probs = fold_model.forward(x.row(r))?;
                let mut best = 0;
                for (i, &p) in probs.iter().enumerate().skip(1) {
                    if p > probs[best] {
                        best = i;
                    }
                }
                out_labels[r] = vocab[best];
                confidence[r] = probs[best];
            }
        }
        Ok(CvPrediction {
            labels: out_labels,
            confidence,
        })
    }

    fn predict(&self, x: &RealMatrix) -> Result<Vec<usize>, PredictorError> {
        if !self.fitted {
            return Err(Box::new(HybridError::NotFitted));
        }
        Ok(self.model.predict_labels(x)?)
    }
}
