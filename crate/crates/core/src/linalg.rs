//! Dense linear-algebra helpers: rank-revealing least squares and a
//! jittered Cholesky factorization.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen, SVD};

use crate::error::{Error, Result};

/// Relative jitter rungs (multiples of the mean diagonal) tried after a
/// plain factorization fails.
pub const JITTER_LADDER: [f64; 7] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4];

#[derive(Debug, Clone)]
pub struct LstsqSolution {
    pub solution: DVector<f64>,
    /// Numerical rank at the requested cutoff.
    pub rank: usize,
    pub singular_values: DVector<f64>,
}

/// Minimum-norm solution of `min ||A x - b||` with singular values below
/// `rcond * sigma_max` treated as zero.
///
/// Tall systems are first reduced by a Householder QR so the SVD only runs
/// on the square triangular factor.
pub fn lstsq_min_norm(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> Result<LstsqSolution> {
    let b = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let sol = lstsq_min_norm_multi(a, &b, rcond)?;
    Ok(LstsqSolution {
        solution: sol.solution.column(0).into_owned(),
        rank: sol.rank,
        singular_values: sol.singular_values,
    })
}

/// [`lstsq_min_norm`] for several right-hand sides sharing one factorization.
#[derive(Debug, Clone)]
pub struct LstsqMultiSolution {
    pub solution: DMatrix<f64>,
    pub rank: usize,
    pub singular_values: DVector<f64>,
}

pub fn lstsq_min_norm_multi(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    rcond: f64,
) -> Result<LstsqMultiSolution> {
    let (m, n) = a.shape();
    if b.nrows() != m {
        return Err(Error::invalid(format!(
            "lstsq: A has {m} rows, b has {}",
            b.nrows()
        )));
    }
    if m == 0 || n == 0 || b.ncols() == 0 {
        return Err(Error::invalid("lstsq: empty system"));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("lstsq: non-finite entries"));
    }
    let (square, rhs) = if m > n {
        let qr = a.clone().qr();
        let mut qtb = b.clone();
        qr.q_tr_mul(&mut qtb);
        (qr.r(), qtb.rows(0, n).into_owned())
    } else {
        (a.clone(), b.clone())
    };
    let svd = SVD::new(square, true, true);
    let sigma_max = svd.singular_values.max();
    let eps = (rcond * sigma_max).max(f64::MIN_POSITIVE);
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let solution = svd
        .solve(&rhs, eps)
        .map_err(|e| Error::numerical(format!("lstsq: {e}")))?;
    Ok(LstsqMultiSolution {
        solution,
        rank,
        singular_values: svd.singular_values,
    })
}

/// Numerical rank of `a` at relative cutoff `rcond`.
pub fn numerical_rank(a: &DMatrix<f64>, rcond: f64) -> usize {
    let sv = a.clone().singular_values();
    let cut = rcond * sv.max();
    sv.iter().filter(|&&s| s > cut).count()
}

pub fn min_eigenvalue(sym: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(sym.clone()).eigenvalues.min()
}

fn try_cholesky(m: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let n = m.nrows();
    let max_diag = m.diagonal().max();
    let chol = Cholesky::new(m)?;
    let l = chol.l_dirty();
    // Pivots at round-off level mean the matrix is singular in practice.
    let floor = n as f64 * f64::EPSILON * max_diag;
    let ok = (0..n).all(|i| l[(i, i)].is_finite() && l[(i, i)] * l[(i, i)] > floor)
        && l.iter().all(|v| v.is_finite());
    ok.then_some(chol)
}

/// Cholesky of a symmetric matrix, escalating a diagonal jitter of
/// `rung * mean(diag)` through [`JITTER_LADDER`] on failure. Returns the
/// factor and the absolute jitter that was added (zero if none).
pub fn cholesky_with_jitter(mat: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
        return Err(Error::invalid(
            "cholesky: matrix must be square and nonempty",
        ));
    }
    if let Some(chol) = try_cholesky(mat.clone()) {
        return Ok((chol, 0.0));
    }
    let n = mat.nrows();
    let mean_diag = (mat.trace() / n as f64).abs();
    let scale = if mean_diag > 0.0 && mean_diag.is_finite() {
        mean_diag
    } else {
        1.0
    };
    let mut tried = vec![0.0];
    for rung in JITTER_LADDER {
        let jitter = rung * scale;
        tried.push(jitter);
        let mut m = mat.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        if let Some(chol) = try_cholesky(m) {
            return Ok((chol, jitter));
        }
    }
    Err(Error::NumericalFailure {
        message: "matrix is not positive definite even after maximum jitter".into(),
        jitter_ladder: tried,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_norm_on_rank_deficient_system() {
        // Two identical columns: min-norm solution splits the weight.
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let b = DVector::from_vec(vec![2.0, 4.0, 6.0]);
        let sol = lstsq_min_norm(&a, &b, 1e-10).unwrap();
        assert_eq!(sol.rank, 1);
        assert!((sol.solution[0] - 1.0).abs() < 1e-12);
        assert!((sol.solution[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn underdetermined_system() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 2.0]);
        let b = DVector::from_vec(vec![9.0]);
        let sol = lstsq_min_norm(&a, &b, 1e-10).unwrap();
        assert!((sol.solution - DVector::from_vec(vec![1.0, 2.0, 2.0])).amax() < 1e-12);
    }

    #[test]
    fn jitter_rescues_singular_psd() {
        let m = DMatrix::from_element(3, 3, 2.0);
        let (_, jitter) = cholesky_with_jitter(&m).unwrap();
        assert!(jitter > 0.0);
    }

    #[test]
    fn indefinite_matrix_fails_with_ladder() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        match cholesky_with_jitter(&m) {
            Err(Error::NumericalFailure { jitter_ladder, .. }) => {
                assert_eq!(jitter_ladder.len(), JITTER_LADDER.len() + 1)
            }
            other => panic!("expected numerical failure, got {other:?}"),
        }
    }
}
