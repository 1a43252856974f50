//! Partial Least Squares regression (PLS2 via NIPALS) with k-fold
//! cross-validated prediction. Serves as the classical baseline predictor.

use thiserror::Error;

use crate::numerics::{Matrix, SeededRng};
use crate::scalar::Scalar;

const NIPALS_MAX_ITER: usize = 500;
const NIPALS_TOL: f64 = 1e-10;
const DEGENERATE_NORM: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum PlsError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("dimension mismatch: expected {expected} columns, found {found}")]
    Dimension { expected: usize, found: usize },
}

/// Fitted PLS2 model. `components()` can be smaller than requested when
/// deflation ran out of signal.
#[derive(Clone, Debug)]
pub struct PlsModel<S> {
    n_components: usize,
    x_mean: Vec<S>,
    y_mean: Vec<S>,
    /// `d x c`, unit columns.
    x_weights: Matrix<S>,
    /// `d x c`.
    x_loadings: Matrix<S>,
    /// `L x c`.
    y_loadings: Matrix<S>,
}

impl<S: Scalar> PlsModel<S> {
    pub fn components(&self) -> usize {
        self.n_components
    }

    pub fn x_weights(&self) -> &Matrix<S> {
        &self.x_weights
    }

    pub fn x_loadings(&self) -> &Matrix<S> {
        &self.x_loadings
    }

    pub fn y_loadings(&self) -> &Matrix<S> {
        &self.y_loadings
    }

    pub fn x_mean(&self) -> &[S] {
        &self.x_mean
    }

    pub fn y_mean(&self) -> &[S] {
        &self.y_mean
    }
}

/// Fits PLS2 with up to `c` components by NIPALS deflation.
///
/// # Errors
///
/// `c` must lie in `1..=min(d, N-1)` and the inputs must agree on the
/// sample count.
pub fn pls_fit<S: Scalar>(
    x: &Matrix<S>,
    y: &Matrix<S>,
    c: usize,
) -> Result<PlsModel<S>, PlsError> {
    let n = x.rows();
    let d = x.cols();
    let l = y.cols();
    if y.rows() != n {
        return Err(PlsError::Contract(format!(
            "X has {n} rows but Y has {}",
            y.rows()
        )));
    }
    if n < 2 {
        return Err(PlsError::Contract("need at least two samples".into()));
    }
    let bound = d.min(n - 1);
    if c == 0 || c > bound {
        return Err(PlsError::Contract(format!(
            "component count {c} out of range 1..={bound}"
        )));
    }

    let x_mean = x.column_means();
    let y_mean = y.column_means();
    let mut xc = centered(x, &x_mean);
    let mut yc = centered(y, &y_mean);

    let tol = S::real(NIPALS_TOL);
    let tiny = S::real(DEGENERATE_NORM);
    let mut weights: Vec<Vec<S>> = Vec::new();
    let mut x_loads: Vec<Vec<S>> = Vec::new();
    let mut y_loads: Vec<Vec<S>> = Vec::new();

    for _ in 0..c {
        // Start from the Y column with the largest remaining norm.
        let start = (0..l)
            .max_by(|&a, &b| {
                col_norm_sqr(&yc, a)
                    .partial_cmp(&col_norm_sqr(&yc, b))
                    .expect("finite norms")
            })
            .expect("at least one target column");
        if col_norm_sqr(&yc, start) < tiny * tiny {
            break;
        }
        let mut u = yc.col(start);
        let mut w: Vec<S> = vec![S::zero(); d];
        let mut t: Vec<S> = vec![S::zero(); n];
        let mut q: Vec<S> = vec![S::zero(); l];
        let mut degenerate = false;
        for _ in 0..NIPALS_MAX_ITER {
            let mut w_new = mat_t_vec(&xc, &u);
            let w_norm = norm(&w_new);
            if w_norm < tiny {
                degenerate = true;
                break;
            }
            for v in &mut w_new {
                *v /= w_norm;
            }
            t = xc.matvec(&w_new);
            let tt = dot(&t, &t);
            if tt < tiny {
                degenerate = true;
                break;
            }
            q = mat_t_vec(&yc, &t);
            for v in &mut q {
                *v /= tt;
            }
            let qq = dot(&q, &q);
            if qq > tiny {
                u = yc.matvec(&q);
                for v in &mut u {
                    *v /= qq;
                }
            }
            let delta = w_new
                .iter()
                .zip(&w)
                .map(|(&a, &b)| (a - b) * (a - b))
                .fold(S::zero(), |acc, v| acc + v)
                .sqrt();
            w = w_new;
            if delta < tol {
                break;
            }
        }
        if degenerate || dot(&t, &t).sqrt() < tiny {
            break;
        }
        let tt = dot(&t, &t);
        let mut p = mat_t_vec(&xc, &t);
        for v in &mut p {
            *v /= tt;
        }
        // Deflate both blocks by the rank-one score contribution.
        deflate(&mut xc, &t, &p);
        deflate(&mut yc, &t, &q);
        weights.push(w);
        x_loads.push(p);
        y_loads.push(q);
    }

    let c_actual = weights.len();
    Ok(PlsModel {
        n_components: c_actual,
        x_mean,
        y_mean,
        x_weights: cols_to_matrix(d, &weights),
        x_loadings: cols_to_matrix(d, &x_loads),
        y_loadings: cols_to_matrix(l, &y_loads),
    })
}

/// Predicts regression scores (`N x L`) by the sequential NIPALS forward
/// pass: center, project on each weight, deflate, accumulate loadings.
pub fn pls_predict<S: Scalar>(model: &PlsModel<S>, x: &Matrix<S>) -> Result<Matrix<S>, PlsError> {
    if x.cols() != model.x_mean.len() {
        return Err(PlsError::Dimension {
            expected: model.x_mean.len(),
            found: x.cols(),
        });
    }
    let n = x.rows();
    let l = model.y_mean.len();
    let mut xc = centered(x, &model.x_mean);
    let mut scores = Matrix::zeros(n, l);
    for r in 0..n {
        for c in 0..l {
            scores[(r, c)] = model.y_mean[c];
        }
    }
    for k in 0..model.n_components {
        let w = model.x_weights.col(k);
        let p = model.x_loadings.col(k);
        let q = model.y_loadings.col(k);
        let t = xc.matvec(&w);
        deflate(&mut xc, &t, &p);
        for r in 0..n {
            for c in 0..l {
                scores[(r, c)] += t[r] * q[c];
            }
        }
    }
    Ok(scores)
}

/// Argmax-decodes score rows to column indices; ties go to the lowest
/// index.
pub fn decode_argmax<S: Scalar>(scores: &Matrix<S>) -> Vec<usize> {
    (0..scores.rows())
        .map(|r| {
            let row = scores.row(r);
            let mut best = 0;
            for (i, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// Shuffled k-fold partition of `0..n`, assigned round-robin so fold sizes
/// differ by at most one.
#[derive(Clone, Debug)]
pub struct CvPlan {
    pub k: usize,
    pub fold_of: Vec<usize>,
    pub seed: u64,
}

impl CvPlan {
    pub fn new(n: usize, k: usize, seed: u64) -> Result<Self, PlsError> {
        if k < 2 {
            return Err(PlsError::Contract("fold count must be at least 2".into()));
        }
        if k > n {
            return Err(PlsError::Contract(format!(
                "fold count {k} exceeds sample count {n}"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = SeededRng::new(seed);
        rng.shuffle(&mut order);
        let mut fold_of = vec![0usize; n];
        for (position, &sample) in order.iter().enumerate() {
            fold_of[sample] = position % k;
        }
        Ok(Self { k, fold_of, seed })
    }

    pub fn train_test(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (sample, &f) in self.fold_of.iter().enumerate() {
            if f == fold {
                test.push(sample);
            } else {
                train.push(sample);
            }
        }
        (train, test)
    }
}

/// Out-of-fold prediction scores: each sample is scored by the one model
/// that never saw its fold.
pub fn cross_val_scores<S: Scalar>(
    x: &Matrix<S>,
    y: &Matrix<S>,
    plan: &CvPlan,
    c: usize,
) -> Result<Matrix<S>, PlsError> {
    let n = x.rows();
    if plan.fold_of.len() != n {
        return Err(PlsError::Contract(format!(
            "plan covers {} samples, data has {n}",
            plan.fold_of.len()
        )));
    }
    let mut scores = Matrix::zeros(n, y.cols());
    for fold in 0..plan.k {
        let (train, test) = plan.train_test(fold);
        if test.is_empty() {
            continue;
        }
        if train.is_empty() {
            return Err(PlsError::Contract(format!("fold {fold} has no train set")));
        }
        let x_train = take_rows(x, &train);
        let y_train = take_rows(y, &train);
        let model = pls_fit(&x_train, &y_train, c.min(x_train.rows() - 1).max(1))?;
        let x_test = take_rows(x, &test);
        let predicted = pls_predict(&model, &x_test)?;
        for (local, &sample) in test.iter().enumerate() {
            for col in 0..y.cols() {
                scores[(sample, col)] = predicted[(local, col)];
            }
        }
    }
    Ok(scores)
}

/// Out-of-fold predictions decoded to score-column indices.
pub fn cross_val_predict<S: Scalar>(
    x: &Matrix<S>,
    y: &Matrix<S>,
    plan: &CvPlan,
    c: usize,
) -> Result<Vec<usize>, PlsError> {
    Ok(decode_argmax(&cross_val_scores(x, y, plan, c)?))
}

/// Classical baseline predictor for the self-training loop: PLS2 on one-hot
/// targets over the current label vocabulary, confidence taken as the top
/// predicted score. The fold plan is built once per predictor from its seed
/// and reused across iterations.
pub struct PlsPredictor {
    n_components: usize,
    k_folds: usize,
    seed: u64,
    plan: Option<CvPlan>,
    fitted: Option<(PlsModel<crate::Real>, Vec<usize>)>,
}

impl PlsPredictor {
    pub fn new(n_components: usize, k_folds: usize, seed: u64) -> Self {
        Self {
            n_components,
            k_folds,
            seed,
            plan: None,
            fitted: None,
        }
    }

    /// Model and vocabulary from the most recent fit.
    pub fn fitted(&self) -> Option<(&PlsModel<crate::Real>, &[usize])> {
        self.fitted.as_ref().map(|(m, v)| (m, v.as_slice()))
    }
}

fn sorted_vocab(labels: &[usize]) -> Vec<usize> {
    let mut vocab = labels.to_vec();
    vocab.sort_unstable();
    vocab.dedup();
    vocab
}

impl crate::selftrain::Predictor for PlsPredictor {
    fn fit(
        &mut self,
        x: &crate::RealMatrix,
        labels: &[usize],
    ) -> Result<(), crate::selftrain::PredictorError> {
        let vocab = sorted_vocab(labels);
        let y = crate::data::one_hot(labels, &vocab)?;
        let c = self.n_components.min(x.cols()).min(x.rows() - 1).max(1);
        let model = pls_fit(x, &y, c)?;
        self.fitted = Some((model, vocab));
        Ok(())
    }

    fn cross_val_predict(
        &mut self,
        x: &crate::RealMatrix,
        labels: &[usize],
    ) -> Result<crate::selftrain::CvPrediction, crate::selftrain::PredictorError> {
        let vocab = sorted_vocab(labels);
        let y = crate::data::one_hot(labels, &vocab)?;
        if self.plan.is_none() {
            self.plan = Some(CvPlan::new(x.rows(), self.k_folds, self.seed)?);
        }
        let plan = self.plan.as_ref().expect("plan just created");
        let scores = cross_val_scores(x, &y, plan, self.n_components)?;
        let positions = decode_argmax(&scores);
        let confidence = (0..scores.rows())
            .map(|r| {
                scores
                    .row(r)
                    .iter()
                    .cloned()
                    .fold(crate::Real::NEG_INFINITY, crate::Real::max)
            })
            .collect();
        Ok(crate::selftrain::CvPrediction {
            labels: positions.iter().map(|&p| vocab[p]).collect(),
            confidence,
        })
    }

    fn predict(
        &self,
        x: &crate::RealMatrix,
    ) -> Result<Vec<usize>, crate::selftrain::PredictorError> {
        let (model, vocab) = self
            .fitted
            .as_ref()
            .ok_or("predict called before fit")?;
        let positions = decode_argmax(&pls_predict(model, x)?);
        Ok(positions.iter().map(|&p| vocab[p]).collect())
    }
}

pub(crate) fn take_rows<S: Scalar>(m: &Matrix<S>, rows: &[usize]) -> Matrix<S> {
    let mut out = Matrix::zeros(rows.len(), m.cols());
    for (r, &src) in rows.iter().enumerate() {
        out.row_mut(r).copy_from_slice(m.row(src));
    }
    out
}

fn centered<S: Scalar>(m: &Matrix<S>, means: &[S]) -> Matrix<S> {
    let mut out = m.clone();
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            out[(r, c)] -= means[c];
        }
    }
    out
}

fn col_norm_sqr<S: Scalar>(m: &Matrix<S>, c: usize) -> S {
    (0..m.rows())
        .map(|r| m[(r, c)] * m[(r, c)])
        .fold(S::zero(), |a, b| a + b)
}

fn mat_t_vec<S: Scalar>(m: &Matrix<S>, v: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); m.cols()];
    for r in 0..m.rows() {
        let row = m.row(r);
        let vr = v[r];
        for (o, &x) in out.iter_mut().zip(row) {
            *o += x * vr;
        }
    }
    out
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x * y)
        .fold(S::zero(), |acc, v| acc + v)
}

fn norm<S: Scalar>(v: &[S]) -> S {
    dot(v, v).sqrt()
}

fn deflate<S: Scalar>(m: &mut Matrix<S>, scores: &[S], loadings: &[S]) {
    for r in 0..m.rows() {
        let t = scores[r];
        let row = m.row_mut(r);
        for (entry, &p) in row.iter_mut().zip(loadings) {
            *entry -= t * p;
        }
    }
}

fn cols_to_matrix<S: Scalar>(dim: usize, cols: &[Vec<S>]) -> Matrix<S> {
    let mut m = Matrix::zeros(dim, cols.len());
    for (c, col) in cols.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            m[(r, c)] = v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RealMatrix;

    fn r_squared(y: &RealMatrix, predicted: &RealMatrix) -> f64 {
        let mean: f64 = y.as_slice().iter().sum::<f64>() / (y.rows() * y.cols()) as f64;
        let ss_tot: f64 = y.as_slice().iter().map(|v| (v - mean).powi(2)).sum();
        let ss_res: f64 = y
            .as_slice()
            .iter()
            .zip(predicted.as_slice())
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        1.0 - ss_res / ss_tot
    }

    #[test]
    fn exact_linear_rank_one_case_has_unit_r_squared() {
        let mut rng = SeededRng::new(1);
        let n = 30;
        let direction = [0.5, -1.0, 2.0, 0.25];
        let mut rows = Vec::new();
        let mut targets = Vec::new();
        for _ in 0..n {
            let t: f64 = rng.uniform_in(-2.0, 2.0);
            rows.push(direction.iter().map(|&d| t * d).collect::<Vec<_>>());
            targets.push(vec![3.0 * t + 1.0]);
        }
        let x = RealMatrix::from_rows(&rows).unwrap();
        let y = RealMatrix::from_rows(&targets).unwrap();
        let model = pls_fit(&x, &y, 1).unwrap();
        let predicted = pls_predict(&model, &x).unwrap();
        assert!((r_squared(&y, &predicted) - 1.0).abs() < 1e-8);
        for (want, got) in y.as_slice().iter().zip(predicted.as_slice()) {
            assert!((want - got).abs() < 1e-8);
        }
    }

    // Least-squares oracle on the same draw: Y lies exactly in a rank-2
    // column space of X, so the best linear fit has zero residual. PLS with
    // two components must match that residual.
    #[test]
    fn two_informative_directions_leave_no_residual_variance() {
        let mut rng = SeededRng::new(2);
        let n = 40;
        let b = [[1.0, 1.0, 0.0, -1.0], [0.0, 1.0, -1.0, 1.0]];
        let mut rows = Vec::new();
        let mut targets = Vec::new();
        for _ in 0..n {
            let t1: f64 = rng.uniform_in(-1.0, 1.0);
            let t2: f64 = rng.uniform_in(-1.0, 1.0);
            rows.push(
                (0..4)
                    .map(|j| t1 * b[0][j] + t2 * b[1][j])
                    .collect::<Vec<_>>(),
            );
            targets.push(vec![2.0 * t1 - t2, t1 + 0.5 * t2]);
        }
        let x = RealMatrix::from_rows(&rows).unwrap();
        let y = RealMatrix::from_rows(&targets).unwrap();
        let model = pls_fit(&x, &y, 2).unwrap();
        let predicted = pls_predict(&model, &x).unwrap();
        let residual_var: f64 = y
            .as_slice()
            .iter()
            .zip(predicted.as_slice())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / (n as f64);
        assert!(residual_var < 1e-8, "residual variance {residual_var}");
    }

    #[test]
    fn permutation_equivariance() {
        let mut rng = SeededRng::new(3);
        let n = 20;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..4).map(|_| rng.uniform_in(-1.0, 1.0)).collect())
            .collect();
        let targets: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| vec![r[0] + r[1], r[2] - r[3], r[0] * 0.5])
            .collect();
        let x = RealMatrix::from_rows(&rows).unwrap();
        let y = RealMatrix::from_rows(&targets).unwrap();
        let baseline = pls_predict(&pls_fit(&x, &y, 2).unwrap(), &x).unwrap();

        let mut perm: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut perm);
        let xp = take_rows(&x, &perm);
        let yp = take_rows(&y, &perm);
        let permuted = pls_predict(&pls_fit(&xp, &yp, 2).unwrap(), &xp).unwrap();
        for (local, &orig) in perm.iter().enumerate() {
            for c in 0..y.cols() {
                assert!((permuted[(local, c)] - baseline[(orig, c)]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_x_predicts_the_target_mean() {
        let x = RealMatrix::from_rows(&vec![vec![1.0, 2.0, 3.0, 4.0]; 6]).unwrap();
        let y = crate::data::one_hot(&[0, 0, 0, 0, 1, 1], &[0, 1]).unwrap();
        let model = pls_fit(&x, &y, 2).unwrap();
        assert_eq!(model.components(), 0);
        let predicted = pls_predict(&model, &x).unwrap();
        for r in 0..6 {
            assert!((predicted[(r, 0)] - 4.0 / 6.0).abs() < 1e-12);
            assert!((predicted[(r, 1)] - 2.0 / 6.0).abs() < 1e-12);
        }
        assert_eq!(decode_argmax(&predicted), vec![0; 6]);
    }

    fn three_cluster_draw(
        rng: &mut SeededRng,
        per_cluster: usize,
    ) -> (RealMatrix, RealMatrix, Vec<usize>) {
        let centers = [
            [3.0, 0.0, 0.0, 0.0],
            [0.0, 3.0, 0.0, 0.0],
            [0.0, 0.0, 3.0, 0.0],
        ];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (class, center) in centers.iter().enumerate() {
            for _ in 0..per_cluster {
                rows.push(
                    center
                        .iter()
                        .map(|&c| c + 0.5 * rng.gaussian::<f64>())
                        .collect::<Vec<_>>(),
                );
                labels.push(class);
            }
        }
        let x = RealMatrix::from_rows(&rows).unwrap();
        let y = crate::data::one_hot(&labels, &[0, 1, 2]).unwrap();
        (x, y, labels)
    }

    /// Nearest-centroid oracle fitted on the training split.
    fn centroid_accuracy(
        x_train: &RealMatrix,
        labels_train: &[usize],
        x_test: &RealMatrix,
        labels_test: &[usize],
    ) -> f64 {
        let mut centroids = vec![[0.0f64; 4]; 3];
        let mut counts = [0usize; 3];
        for (r, &label) in labels_train.iter().enumerate() {
            counts[label] += 1;
            for c in 0..4 {
                centroids[label][c] += x_train[(r, c)];
            }
        }
        for (centroid, &count) in centroids.iter_mut().zip(&counts) {
            for v in centroid.iter_mut() {
                *v /= count as f64;
            }
        }
        let mut hits = 0usize;
        for (r, &label) in labels_test.iter().enumerate() {
            let best = (0..3)
                .min_by(|&a, &b| {
                    let da: f64 = (0..4)
                        .map(|c| (x_test[(r, c)] - centroids[a][c]).powi(2))
                        .sum();
                    let db: f64 = (0..4)
                        .map(|c| (x_test[(r, c)] - centroids[b][c]).powi(2))
                        .sum();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            if best == label {
                hits += 1;
            }
        }
        hits as f64 / labels_test.len() as f64
    }

    #[test]
    fn held_out_accuracy_beats_point_nine_on_separable_clusters() {
        let mut rng = SeededRng::new(5);
        let (x, y, labels) = three_cluster_draw(&mut rng, 30);
        let train: Vec<usize> = (0..90).filter(|i| i % 3 != 0).collect();
        let test: Vec<usize> = (0..90).filter(|i| i % 3 == 0).collect();
        let x_train = take_rows(&x, &train);
        let y_train = take_rows(&y, &train);
        let x_test = take_rows(&x, &test);
        let labels_train: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
        let labels_test: Vec<usize> = test.iter().map(|&i| labels[i]).collect();

        let oracle = centroid_accuracy(&x_train, &labels_train, &x_test, &labels_test);
        assert!(oracle >= 0.9, "oracle accuracy {oracle}");

        let model = pls_fit(&x_train, &y_train, 2).unwrap();
        let predicted = decode_argmax(&pls_predict(&model, &x_test).unwrap());
        let hits = predicted
            .iter()
            .zip(&labels_test)
            .filter(|(a, b)| a == b)
            .count();
        let accuracy = hits as f64 / labels_test.len() as f64;
        assert!(accuracy > 0.9, "pls accuracy {accuracy}");
    }

    #[test]
    fn leave_one_out_scores_every_sample_once() {
        let x = RealMatrix::from_rows(&[
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.1, 0.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0, 0.0],
            vec![1.1, 1.0, 0.0, 0.0],
        ])
        .unwrap();
        let y = crate::data::one_hot(&[0, 0, 1, 1], &[0, 1]).unwrap();
        let plan = CvPlan::new(4, 4, 9).unwrap();
        let predictions = cross_val_predict(&x, &y, &plan, 1).unwrap();
        assert_eq!(predictions.len(), 4);
        // Each fold holds exactly one sample.
        let mut sizes = vec![0usize; 4];
        for &f in &plan.fold_of {
            sizes[f] += 1;
        }
        assert_eq!(sizes, vec![1; 4]);
    }

    #[test]
    fn cross_validation_is_deterministic_given_seed() {
        let mut rng = SeededRng::new(8);
        let (x, y, _) = three_cluster_draw(&mut rng, 10);
        let plan_a = CvPlan::new(30, 5, 77).unwrap();
        let plan_b = CvPlan::new(30, 5, 77).unwrap();
        assert_eq!(plan_a.fold_of, plan_b.fold_of);
        let a = cross_val_predict(&x, &y, &plan_a, 2).unwrap();
        let b = cross_val_predict(&x, &y, &plan_b, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cv_accuracy_tracks_full_fit_accuracy_on_separable_data() {
        let mut rng = SeededRng::new(13);
        let (x, y, labels) = three_cluster_draw(&mut rng, 20);
        let plan = CvPlan::new(60, 5, 3).unwrap();
        let cv_labels = cross_val_predict(&x, &y, &plan, 2).unwrap();
        let full_model = pls_fit(&x, &y, 2).unwrap();
        let full_labels = decode_argmax(&pls_predict(&full_model, &x).unwrap());
        let acc = |got: &[usize]| {
            got.iter().zip(&labels).filter(|(a, b)| a == b).count() as f64 / labels.len() as f64
        };
        let cv_acc = acc(&cv_labels);
        let full_acc = acc(&full_labels);
        assert!(
            (cv_acc - full_acc).abs() <= 0.1,
            "cv {cv_acc}, full {full_acc}"
        );
        // Centroid oracle sanity on the same draw.
        let oracle = centroid_accuracy(&x, &labels, &x, &labels);
        assert!(oracle >= 0.9);
    }

    #[test]
    fn nipals_scores_are_mutually_orthogonal() {
        let mut rng = SeededRng::new(21);
        let rows: Vec<Vec<f64>> = (0..25)
            .map(|_| (0..4).map(|_| rng.uniform_in(-1.0, 1.0)).collect())
            .collect();
        let targets: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| vec![r[0] - r[1], r[1] + r[2], r[3], r[0] * 0.3 + r[3]])
            .collect();
        let x = RealMatrix::from_rows(&rows).unwrap();
        let y = RealMatrix::from_rows(&targets).unwrap();
        let model = pls_fit(&x, &y, 3).unwrap();
        // Recompute the training scores from the stored weights/loadings.
        let mut xc = centered(&x, &model.x_mean);
        let mut score_cols: Vec<Vec<f64>> = Vec::new();
        for k in 0..model.components() {
            let t = xc.matvec(&model.x_weights.col(k));
            deflate(&mut xc, &t, &model.x_loadings.col(k));
            score_cols.push(t);
        }
        for i in 0..score_cols.len() {
            for j in (i + 1)..score_cols.len() {
                let inner = dot(&score_cols[i], &score_cols[j]);
                assert!(inner.abs() < 1e-8, "scores {i} and {j}: {inner}");
            }
        }
    }

    #[test]
    fn scaling_targets_scales_scores_but_not_labels() {
        let mut rng = SeededRng::new(34);
        let (x, y, _) = three_cluster_draw(&mut rng, 10);
        let alpha = 2.5;
        let mut y_scaled = y.clone();
        for r in 0..y.rows() {
            for c in 0..y.cols() {
                y_scaled[(r, c)] *= alpha;
            }
        }
        let base = pls_predict(&pls_fit(&x, &y, 2).unwrap(), &x).unwrap();
        let scaled = pls_predict(&pls_fit(&x, &y_scaled, 2).unwrap(), &x).unwrap();
        for (a, b) in base.as_slice().iter().zip(scaled.as_slice()) {
            assert!((alpha * a - b).abs() < 1e-9);
        }
        assert_eq!(decode_argmax(&base), decode_argmax(&scaled));
    }

    #[test]
    fn contract_violations_are_rejected() {
        let x = RealMatrix::zeros(5, 4);
        let y = RealMatrix::zeros(5, 2);
        assert!(pls_fit(&x, &y, 0).is_err());
        assert!(pls_fit(&x, &y, 5).is_err());
        assert!(CvPlan::new(10, 1, 0).is_err());
        assert!(CvPlan::new(3, 4, 0).is_err());
        let model = pls_fit(
            &RealMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.2]]).unwrap(),
            &RealMatrix::from_rows(&[vec![1.0], vec![0.0], vec![0.5]]).unwrap(),
            1,
        )
        .unwrap();
        assert!(pls_predict(&model, &RealMatrix::zeros(2, 3)).is_err());
    }
}
