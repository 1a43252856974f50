//! Minimum-cost assignment (Hungarian algorithm, potentials formulation).

use crate::numerics::{Matrix, NumericsError};
use crate::scalar::Scalar;

/// Minimum-cost row-to-column assignment.
///
/// Requires finite entries. When the matrix has more rows than columns it is
/// padded internally with a large constant column block; rows landing on a
/// padding column come back as `None`. The returned assignment is injective
/// and attains the minimum total cost over all assignments of the same shape.
///
/// # Errors
///
/// Empty or non-finite cost matrices are contract violations.
pub fn hungarian<S: Scalar>(cost: &Matrix<S>) -> Result<Vec<Option<usize>>, NumericsError> {
    let rows = cost.rows();
    let cols = cost.cols();
    if rows == 0 || cols == 0 {
        return Err(NumericsError::Contract(
            "assignment on empty cost matrix".into(),
        ));
    }
    if cost.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::Contract(
            "assignment cost entries must be finite".into(),
        ));
    }

    let padded_cols = cols.max(rows);
    let pad_value = cost.max_abs() * S::count(padded_cols) + S::one();
    let entry = |r: usize, c: usize| -> S {
        if c < cols {
            cost[(r, c)]
        } else {
            pad_value
        }
    };

    // Potentials formulation over rows 1..=n, columns 1..=m (0 = virtual).
    let n = rows;
    let m = padded_cols;
    let inf = S::infinity();
    let mut u = vec![S::zero(); n + 1];
    let mut v = vec![S::zero(); m + 1];
    let mut col_row = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        col_row[0] = i;
        let mut j0 = 0usize;
        let mut min_to = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = entry(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < min_to[j] {
                    min_to[j] = cur;
                    way[j] = j0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![None; rows];
    for j in 1..=m {
        let i = col_row[j];
        if i > 0 && j - 1 < cols {
            assignment[i - 1] = Some(j - 1);
        }
    }
    Ok(assignment)
}

/// Total cost of an assignment over the real (unpadded) columns.
pub fn assignment_cost<S: Scalar>(cost: &Matrix<S>, assignment: &[Option<usize>]) -> S {
    assignment
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| cost[(r, c)]))
        .fold(S::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    /// Exhaustive oracle: minimum assignment cost over every injective
    /// row-to-column map, enumerated by permutation.
    fn brute_force_min_cost(cost: &Matrix<f64>) -> f64 {
        let rows = cost.rows();
        let cols = cost.cols();
        let mut columns: Vec<usize> = (0..cols).collect();
        let mut best = f64::INFINITY;
        permute(&mut columns, 0, &mut |perm| {
            let total: f64 = (0..rows).map(|r| cost[(r, perm[r])]).sum();
            if total < best {
                best = total;
            }
        });
        best
    }

    fn permute(xs: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == xs.len() {
            visit(xs);
            return;
        }
        for i in k..xs.len() {
            xs.swap(k, i);
            permute(xs, k + 1, visit);
            xs.swap(k, i);
        }
    }

    #[test]
    fn two_by_two_prefers_diagonal() {
        let cost = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let assignment = hungarian(&cost).unwrap();
        assert_eq!(assignment, vec![Some(0), Some(1)]);
        assert_eq!(assignment_cost(&cost, &assignment), 2.0);
    }

    #[test]
    fn zero_diagonal_pattern_is_identity() {
        let n = 4;
        let mut cost = Matrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                cost[(r, c)] = if r == c { 0.0 } else { 1.0 };
            }
        }
        let assignment = hungarian(&cost).unwrap();
        assert_eq!(assignment, (0..n).map(Some).collect::<Vec<_>>());
    }

    #[test]
    fn random_5x5_matches_permutation_enumeration() {
        let mut rng = SeededRng::new(5);
        for _ in 0..20 {
            let data: Vec<f64> = (0..25).map(|_| rng.uniform_in(0.0, 10.0)).collect();
            let cost = Matrix::from_vec(5, 5, data).unwrap();
            let assignment = hungarian(&cost).unwrap();
            let got = assignment_cost(&cost, &assignment);
            let want = brute_force_min_cost(&cost);
            assert!((got - want).abs() < 1e-12, "got {got}, oracle {want}");
        }
    }

    #[test]
    fn optimal_for_all_shapes_up_to_six() {
        let mut rng = SeededRng::new(6);
        for n in 1..=6 {
            for m in n..=6 {
                for _ in 0..5 {
                    let data: Vec<f64> =
                        (0..n * m).map(|_| rng.uniform_in(-5.0, 5.0)).collect();
                    let cost = Matrix::from_vec(n, m, data).unwrap();
                    let assignment = hungarian(&cost).unwrap();
                    let cols: Vec<usize> = assignment.iter().map(|c| c.unwrap()).collect();
                    let mut distinct = cols.clone();
                    distinct.sort_unstable();
                    distinct.dedup();
                    assert_eq!(distinct.len(), cols.len(), "assignment must be injective");
                    let got = assignment_cost(&cost, &assignment);
                    let want = brute_force_min_cost(&cost);
                    assert!((got - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn more_rows_than_columns_leaves_rows_unassigned() {
        // 3 rows, 2 columns: exactly one row stays unassigned and the two
        // assigned rows minimize cost over every injective choice. The
        // unique optimum here is 1->1 (2) plus 2->0 (3).
        let cost =
            Matrix::from_rows(&[vec![9.0, 6.0], vec![1.0, 2.0], vec![3.0, 8.0]]).unwrap();
        let assignment = hungarian(&cost).unwrap();
        assert_eq!(assignment, vec![None, Some(1), Some(0)]);
        assert_eq!(assignment_cost(&cost, &assignment), 5.0);
    }

    #[test]
    fn empty_matrix_is_rejected() {
        let cost = Matrix::<f64>::zeros(0, 3);
        assert!(hungarian(&cost).is_err());
    }
}
