//! Factorizations `V = L Lᵀ` of positive semidefinite covariance matrices.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{PricingError, Result};

const REL_TOL: f64 = 1e-12;

fn matrix_scale(v: &DMatrix<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn smallest_eigenvalue(v: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(v.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Lower-triangular Cholesky factor tolerant of semidefinite input.
///
/// A pivot below `1e-12·‖V‖` zeroes its column, provided the remaining
/// entries of that column are numerically zero too. Anything else that is
/// not PSD is rejected with the smallest eigenvalue in the error.
pub fn factor_psd(v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = v.nrows();
    assert_eq!(n, v.ncols(), "factor_psd needs a square matrix");
    let scale = matrix_scale(v);
    let mut l = DMatrix::<f64>::zeros(n, n);
    if scale == 0.0 {
        return Ok(l);
    }
    let tol = REL_TOL * scale;
    let offdiag_tol = (tol * scale).sqrt();

    for j in 0..n {
        let mut d = v[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d < -tol {
            return Err(PricingError::NotPositiveSemidefinite { eigenvalue: smallest_eigenvalue(v) });
        }
        if d <= tol {
            for i in j + 1..n {
                let mut r = v[(i, j)];
                for k in 0..j {
                    r -= l[(i, k)] * l[(j, k)];
                }
                if r.abs() > offdiag_tol {
                    return Err(PricingError::NotPositiveSemidefinite { eigenvalue: smallest_eigenvalue(v) });
                }
            }
            continue;
        }
        let pivot = d.sqrt();
        l[(j, j)] = pivot;
        for i in j + 1..n {
            let mut r = v[(i, j)];
            for k in 0..j {
                r -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = r / pivot;
        }
    }
    Ok(l)
}

/// Spectral factor `U·diag(√λ)` with columns in descending eigenvalue order
/// and numerically zero eigenvalues dropped, so it may be rectangular.
pub fn spectral_factor(v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = v.nrows();
    let scale = matrix_scale(v);
    if scale == 0.0 {
        return Ok(DMatrix::zeros(n, 0));
    }
    let eig = SymmetricEigen::new(v.clone());
    let tol = REL_TOL * scale;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    if let Some(&last) = order.last() {
        let lowest = eig.eigenvalues[last];
        if lowest < -tol {
            return Err(PricingError::NotPositiveSemidefinite { eigenvalue: lowest });
        }
    }
    let kept: Vec<usize> = order.into_iter().filter(|&k| eig.eigenvalues[k] > tol).collect();
    Ok(DMatrix::from_fn(n, kept.len(), |i, c| {
        let k = kept[c];
        eig.eigenvectors[(i, k)] * eig.eigenvalues[k].sqrt()
    }))
}
