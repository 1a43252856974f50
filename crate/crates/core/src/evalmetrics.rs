//! External-agreement and self-consistency metrics for label assignments:
//! mapped accuracy, adjusted Rand index, normalized mutual information,
//! and internal consistency.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{hungarian, NumericsError};
use crate::{Real, RealMatrix};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("label vectors differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("labelings must be non-empty")]
    Empty,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Contingency table between two labelings, with sorted distinct ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contingency {
    pub learned_ids: Vec<usize>,
    pub true_ids: Vec<usize>,
    /// `counts[i][j]` = samples with learned id `learned_ids[i]` and true
    /// id `true_ids[j]`.
    pub counts: Vec<Vec<usize>>,
}

impl Contingency {
    pub fn build(learned: &[usize], truth: &[usize]) -> Result<Self, MetricsError> {
        check_lengths(learned, truth)?;
        let learned_ids = sorted_distinct(learned);
        let true_ids = sorted_distinct(truth);
        let mut counts = vec![vec![0usize; true_ids.len()]; learned_ids.len()];
        for (&l, &t) in learned.iter().zip(truth) {
            let i = learned_ids.binary_search(&l).expect("id present");
            let j = true_ids.binary_search(&t).expect("id present");
            counts[i][j] += 1;
        }
        Ok(Self {
            learned_ids,
            true_ids,
            counts,
        })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<usize> {
        let cols = self.true_ids.len();
        let mut sums = vec![0usize; cols];
        for row in &self.counts {
            for (s, &v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }
}

/// Evaluation quartet plus the contingency it was computed from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub a_internal: Real,
    pub accuracy: Real,
    pub ari: Real,
    pub nmi: Real,
    pub contingency: Contingency,
}

fn check_lengths(a: &[usize], b: &[usize]) -> Result<(), MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

fn sorted_distinct(labels: &[usize]) -> Vec<usize> {
    let mut ids = labels.to_vec();
    ids.sort_unstable();
    ids.dedup();
    ids
}

fn comb2(n: usize) -> Real {
    let n = n as Real;
    n * (n - 1.0) / 2.0
}

/// Pair-counting adjusted Rand index.
///
/// 1 for identical partitions up to relabeling; expectation roughly 0 under
/// independent random labelings.
pub fn ari(a: &[usize], b: &[usize]) -> Result<Real, MetricsError> {
    let table = Contingency::build(a, b)?;
    let n = table.total();
    if n < 2 {
        return Ok(1.0);
    }
    let sum_cells: Real = table.counts.iter().flatten().map(|&v| comb2(v)).sum();
    let sum_rows: Real = table.row_sums().iter().map(|&v| comb2(v)).sum();
    let sum_cols: Real = table.col_sums().iter().map(|&v| comb2(v)).sum();
    let total_pairs = comb2(n);
    let expected = sum_rows * sum_cols / total_pairs;
    let max_index = 0.5 * (sum_rows + sum_cols);
    let denom = max_index - expected;
    if denom.abs() < 1e-15 {
        return Ok(1.0);
    }
    Ok((sum_cells - expected) / denom)
}

/// Normalized mutual information with arithmetic-mean normalization.
///
/// Entropies are taken in natural log (the ratio is base-invariant) and a
/// zero mean entropy yields 0.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<Real, MetricsError> {
    let table = Contingency::build(a, b)?;
    let n = table.total() as Real;
    let rows = table.row_sums();
    let cols = table.col_sums();
    let mut mutual = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &count) in row.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let c = count as Real;
            mutual += (c / n) * ((c * n) / (rows[i] as Real * cols[j] as Real)).ln();
        }
    }
    let entropy = |sums: &[usize]| -> Real {
        sums.iter()
            .filter(|&&v| v > 0)
            .map(|&v| {
                let p = v as Real / n;
                -p * p.ln()
            })
            .sum()
    };
    let mean_entropy = 0.5 * (entropy(&rows) + entropy(&cols));
    if mean_entropy <= 0.0 {
        return Ok(0.0);
    }
    // Mutual information is nonnegative; clamp away rounding.
    Ok((mutual / mean_entropy).max(0.0))
}

/// Accuracy after optimally matching learned label ids one-to-one onto true
/// classes (Hungarian assignment on the negated contingency). Samples under
/// unmapped learned ids count as errors. Returns the accuracy and the
/// `(learned_id, true_id)` mapping.
pub fn mapped_accuracy(
    learned: &[usize],
    truth: &[usize],
) -> Result<(Real, Vec<(usize, usize)>), MetricsError> {
    let table = Contingency::build(learned, truth)?;
    let rows = table.learned_ids.len();
    let cols = table.true_ids.len();
    let mut cost = RealMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            cost[(i, j)] = -(table.counts[i][j] as Real);
        }
    }
    let assignment = hungarian(&cost)?;
    let mut matched = 0usize;
    let mut mapping = Vec::new();
    for (i, col) in assignment.iter().enumerate() {
        if let Some(j) = col {
            matched += table.counts[i][*j];
            mapping.push((table.learned_ids[i], table.true_ids[*j]));
        }
    }
    Ok((matched as Real / learned.len() as Real, mapping))
}

/// Fraction of samples whose label equals the model's own prediction.
pub fn internal_consistency(labels: &[usize], predictions: &[usize]) -> Result<Real, MetricsError> {
    check_lengths(labels, predictions)?;
    let hits = labels
        .iter()
        .zip(predictions)
        .filter(|(a, b)| a == b)
        .count();
    Ok(hits as Real / labels.len() as Real)
}

/// Assembles the full evaluation quartet.
pub fn evaluate(
    final_labels: &[usize],
    truth: &[usize],
    model_predictions: &[usize],
) -> Result<EvaluationReport, MetricsError> {
    let (accuracy, _) = mapped_accuracy(final_labels, truth)?;
    Ok(EvaluationReport {
        a_internal: internal_consistency(final_labels, model_predictions)?,
        accuracy,
        ari: ari(final_labels, truth)?,
        nmi: nmi(final_labels, truth)?,
        contingency: Contingency::build(final_labels, truth)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    /// Pair-enumeration oracle: the adjusted Rand index from the four pair
    /// categories (together/apart in each labeling) over all sample pairs.
    fn ari_pair_oracle(a: &[usize], b: &[usize]) -> Real {
        let n = a.len();
        let (mut both, mut only_a, mut only_b, mut neither) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let same_a = a[i] == a[j];
                let same_b = b[i] == b[j];
                match (same_a, same_b) {
                    (true, true) => both += 1.0,
                    (true, false) => only_a += 1.0,
                    (false, true) => only_b += 1.0,
                    (false, false) => neither += 1.0,
                }
            }
        }
        let num = 2.0 * (both * neither - only_a * only_b);
        let den = (both + only_a) * (only_a + neither) + (both + only_b) * (only_b + neither);
        if den == 0.0 {
            1.0
        } else {
            num / den
        }
    }

    /// Entropy-table oracle: NMI computed directly from an explicitly
    /// constructed contingency table.
    fn nmi_entropy_oracle(a: &[usize], b: &[usize]) -> Real {
        let n = a.len() as Real;
        let ids_a = sorted_distinct(a);
        let ids_b = sorted_distinct(b);
        let mut table = vec![vec![0.0; ids_b.len()]; ids_a.len()];
        for (&x, &y) in a.iter().zip(b) {
            let i = ids_a.iter().position(|&v| v == x).unwrap();
            let j = ids_b.iter().position(|&v| v == y).unwrap();
            table[i][j] += 1.0;
        }
        let pa: Vec<Real> = table.iter().map(|r| r.iter().sum::<Real>() / n).collect();
        let pb: Vec<Real> = (0..ids_b.len())
            .map(|j| table.iter().map(|r| r[j]).sum::<Real>() / n)
            .collect();
        let mut mi = 0.0;
        for (i, row) in table.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c > 0.0 {
                    let p = c / n;
                    mi += p * (p / (pa[i] * pb[j])).ln();
                }
            }
        }
        let h =
            |ps: &[Real]| -> Real { ps.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum() };
        let mean = 0.5 * (h(&pa) + h(&pb));
        if mean <= 0.0 {
            0.0
        } else {
            mi / mean
        }
    }

    /// Exhaustive mapping oracle: best accuracy over every injective map
    /// from learned ids to true ids.
    fn mapped_accuracy_oracle(learned: &[usize], truth: &[usize]) -> Real {
        let ids_l = sorted_distinct(learned);
        let ids_t = sorted_distinct(truth);
        let mut best = 0usize;
        let mut chosen: Vec<Option<usize>> = vec![None; ids_l.len()];
        fn recurse(
            row: usize,
            ids_l: &[usize],
            ids_t: &[usize],
            learned: &[usize],
            truth: &[usize],
            chosen: &mut Vec<Option<usize>>,
            best: &mut usize,
        ) {
            if row == ids_l.len() {
                let hits = learned
                    .iter()
                    .zip(truth)
                    .filter(|(l, t)| {
                        let i = ids_l.iter().position(|v| v == *l).unwrap();
                        chosen[i].map(|j| ids_t[j] == **t).unwrap_or(false)
                    })
                    .count();
                *best = (*best).max(hits);
                return;
            }
            // Leave this learned id unmapped.
            chosen[row] = None;
            recurse(row + 1, ids_l, ids_t, learned, truth, chosen, best);
            for j in 0..ids_t.len() {
                if chosen[..row].contains(&Some(j)) {
                    continue;
                }
                chosen[row] = Some(j);
                recurse(row + 1, ids_l, ids_t, learned, truth, chosen, best);
                chosen[row] = None;
            }
        }
        recurse(0, &ids_l, &ids_t, learned, truth, &mut chosen, &mut best);
        best as Real / learned.len() as Real
    }

    #[test]
    fn ari_is_relabeling_invariant_at_one() {
        assert_eq!(ari(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
    }

    #[test]
    fn ari_of_singletons_vs_one_block_is_zero() {
        assert_eq!(ari(&[0, 1, 2, 3], &[0, 0, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn ari_reference_case_matches_pair_oracle() {
        let a = [0, 0, 1, 1, 2, 2];
        let b = [0, 0, 1, 2, 2, 2];
        let got = ari(&a, &b).unwrap();
        let oracle = ari_pair_oracle(&a, &b);
        assert!((got - oracle).abs() < 1e-12);
        // Frozen value computed from the pair-enumeration oracle: 4/9.
        assert!((got - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn nmi_identical_partitions_is_one() {
        assert!((nmi(&[0, 0, 1, 1, 2, 2], &[0, 0, 1, 1, 2, 2]).unwrap() - 1.0).abs() < 1e-12);
        assert!((nmi(&[5, 5, 9, 9], &[1, 1, 0, 0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nmi_independent_balanced_contingency_is_zero() {
        let got = nmi(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
        assert!(got.abs() < 1e-12);
    }

    #[test]
    fn nmi_reference_case_matches_entropy_oracle() {
        let a = [0, 0, 1, 1, 2, 2];
        let b = [0, 0, 1, 2, 2, 2];
        let got = nmi(&a, &b).unwrap();
        let oracle = nmi_entropy_oracle(&a, &b);
        assert!((got - oracle).abs() < 1e-12);
        // Frozen closed form: MI = ln(3)/2 + ln(2)/3, mean entropy
        // = (ln 3 + ln(3)/3 + ln(6)/6 + ln(2)/2) / 2.
        let mi = 3.0_f64.ln() / 2.0 + 2.0_f64.ln() / 3.0;
        let mean =
            0.5 * (3.0_f64.ln() + 3.0_f64.ln() / 3.0 + 6.0_f64.ln() / 6.0 + 2.0_f64.ln() / 2.0);
        assert!((got - mi / mean).abs() < 1e-12);
    }

    #[test]
    fn mapped_accuracy_identity_is_one() {
        let labels = [0, 1, 2, 0, 1, 2];
        let (acc, mapping) = mapped_accuracy(&labels, &labels).unwrap();
        assert_eq!(acc, 1.0);
        assert_eq!(mapping, vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn index_labels_cap_at_three_out_of_150() {
        let learned: Vec<usize> = (0..150).collect();
        let truth: Vec<usize> = (0..150).map(|i| i / 50).collect();
        let (acc, mapping) = mapped_accuracy(&learned, &truth).unwrap();
        assert!(acc <= 3.0 / 150.0 + 1e-15);
        assert_eq!(mapping.len(), 3);
    }

    #[test]
    fn six_sample_case_matches_exhaustive_mapping_oracle() {
        let learned = [0, 1, 2, 3, 0, 1];
        let truth = [0, 0, 1, 1, 0, 1];
        let (acc, _) = mapped_accuracy(&learned, &truth).unwrap();
        let oracle = mapped_accuracy_oracle(&learned, &truth);
        assert!((acc - oracle).abs() < 1e-12, "got {acc}, oracle {oracle}");
    }

    #[test]
    fn random_labelings_match_oracles() {
        let mut rng = SeededRng::new(42);
        for _ in 0..200 {
            let n = 6;
            let a: Vec<usize> = (0..n).map(|_| rng.index(3)).collect();
            let b: Vec<usize> = (0..n).map(|_| rng.index(3)).collect();
            let ari_got = ari(&a, &b).unwrap();
            let ari_want = ari_pair_oracle(&a, &b);
            assert!((ari_got - ari_want).abs() < 1e-12);
            let nmi_got = nmi(&a, &b).unwrap();
            let nmi_want = nmi_entropy_oracle(&a, &b);
            assert!((nmi_got - nmi_want).abs() < 1e-12);
            let (acc_got, _) = mapped_accuracy(&a, &b).unwrap();
            let acc_want = mapped_accuracy_oracle(&a, &b);
            assert!((acc_got - acc_want).abs() < 1e-12);
        }
    }

    #[test]
    fn metrics_are_invariant_under_bijective_relabeling() {
        let mut rng = SeededRng::new(7);
        let n = 40;
        let a: Vec<usize> = (0..n).map(|_| rng.index(4)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.index(3)).collect();
        // Random bijection of a's ids onto fresh ids.
        let mut renames: Vec<usize> = (10..14).collect();
        rng.shuffle(&mut renames);
        let a_renamed: Vec<usize> = a.iter().map(|&l| renames[l]).collect();
        assert!((ari(&a, &b).unwrap() - ari(&a_renamed, &b).unwrap()).abs() < 1e-12);
        assert!((nmi(&a, &b).unwrap() - nmi(&a_renamed, &b).unwrap()).abs() < 1e-12);
        let (acc, _) = mapped_accuracy(&a, &b).unwrap();
        let (acc_renamed, _) = mapped_accuracy(&a_renamed, &b).unwrap();
        assert!((acc - acc_renamed).abs() < 1e-12);
    }

    #[test]
    fn internal_consistency_counts_agreement() {
        assert_eq!(internal_consistency(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(internal_consistency(&[1, 2, 3], &[0, 0, 0]).unwrap(), 0.0);
        assert_eq!(
            internal_consistency(&[1, 2, 3, 4], &[1, 0, 3, 0]).unwrap(),
            0.5
        );
    }

    #[test]
    fn length_mismatch_is_rejected_everywhere() {
        assert!(ari(&[0, 1], &[0]).is_err());
        assert!(nmi(&[0, 1], &[0]).is_err());
        assert!(mapped_accuracy(&[0, 1], &[0]).is_err());
        assert!(internal_consistency(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn report_serializes_with_documented_keys() {
        let report = evaluate(&[0, 0, 1, 1], &[0, 0, 1, 1], &[0, 0, 1, 0]).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        for key in ["a_internal", "accuracy", "ari", "nmi", "contingency"] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
        assert_eq!(json["a_internal"], 0.75);
        assert_eq!(json["accuracy"], 1.0);
    }
}
