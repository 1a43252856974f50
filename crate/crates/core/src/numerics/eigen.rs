//! Symmetric eigendecomposition via cyclic Jacobi rotations.

use crate::numerics::{Matrix, NumericsError};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a real symmetric matrix.
///
/// Returns eigenvalues sorted descending (ties keep original index order)
/// and the matching orthonormal eigenvectors as matrix columns.
///
/// # Errors
///
/// Non-square input, asymmetry beyond `1e-10`, or failure to converge
/// within 100 sweeps.
pub fn sym_eigen<S: Scalar>(m: &Matrix<S>) -> Result<(Vec<S>, Matrix<S>), NumericsError> {
    let n = m.rows();
    if n != m.cols() {
        return Err(NumericsError::Contract(format!(
            "sym_eigen needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_symmetric(S::real(1e-10)) {
        return Err(NumericsError::Contract(
            "sym_eigen needs a symmetric matrix".into(),
        ));
    }
    if n == 0 {
        return Err(NumericsError::Contract("sym_eigen on empty matrix".into()));
    }

    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let off_tol = S::real(1e-12);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < off_tol {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                // Rotations on entries that cannot move the result are skipped;
                // this also terminates the sweep loop at machine precision.
                let scale = a[(p, p)].abs() + a[(q, q)].abs();
                if apq.abs() <= S::epsilon() * scale {
                    a[(p, q)] = S::zero();
                    a[(q, p)] = S::zero();
                    continue;
                }
                rotated = true;
                let (c, s) = rotation(a[(p, p)], a[(q, q)], apq);
                apply_rotation(&mut a, p, q, c, s);
                // Accumulate V := V * G so columns stay eigenvectors.
                for r in 0..n {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    if off_diagonal_norm(&a) >= off_tol && {
        // A no-progress sweep also counts as converged (entries at machine
        // precision relative to the diagonal).
        let mut movable = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let scale = a[(p, p)].abs() + a[(q, q)].abs();
                if a[(p, q)].abs() > S::epsilon() * scale {
                    movable = true;
                }
            }
        }
        movable
    } {
        return Err(NumericsError::NoConvergence("jacobi eigensolver"));
    }

    // Sort descending; stable sort keeps original index order on ties.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .partial_cmp(&a[(i, i)])
            .expect("finite eigenvalues")
    });
    let values: Vec<S> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, new_col)] = v[(r, old_col)];
        }
    }
    Ok((values, vectors))
}

fn off_diagonal_norm<S: Scalar>(a: &Matrix<S>) -> S {
    let n = a.rows();
    let mut acc = S::zero();
    for p in 0..n {
        for q in 0..n {
            if p != q {
                acc += a[(p, q)] * a[(p, q)];
            }
        }
    }
    acc.sqrt()
}

/// Classic Jacobi rotation choosing the smaller angle root.
fn rotation<S: Scalar>(app: S, aqq: S, apq: S) -> (S, S) {
    let theta = (aqq - app) / (S::real(2.0) * apq);
    let t = if theta >= S::zero() {
        S::one() / (theta + (S::one() + theta * theta).sqrt())
    } else {
        -S::one() / (-theta + (S::one() + theta * theta).sqrt())
    };
    let c = S::one() / (S::one() + t * t).sqrt();
    (c, t * c)
}

fn apply_rotation<S: Scalar>(a: &mut Matrix<S>, p: usize, q: usize, c: S, s: S) {
    let n = a.rows();
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let apq = a[(p, q)];
    let two = S::real(2.0);
    a[(p, p)] = c * c * app - two * s * c * apq + s * s * aqq;
    a[(q, q)] = s * s * app + two * s * c * apq + c * c * aqq;
    a[(p, q)] = S::zero();
    a[(q, p)] = S::zero();
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        a[(r, p)] = c * arp - s * arq;
        a[(p, r)] = a[(r, p)];
        a[(r, q)] = s * arp + c * arq;
        a[(q, r)] = a[(r, q)];
    }
}
