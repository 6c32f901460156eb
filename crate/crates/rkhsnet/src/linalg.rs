// Copyright 2026 rkhsnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Shared dense linear-algebra helpers: sorted symmetric eigendecomposition,
//! truncated pseudo-inverses, and refined Cholesky inversion.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance under which a matrix counts as positive semidefinite:
/// the smallest eigenvalue may be as low as `-PSD_TOL * max(1, lambda_max)`.
pub const PSD_TOL: f64 = 1e-9;

/// Relative residual tolerance for linear solves and inverse contracts.
pub const SOLVE_TOL: f64 = 1e-10;

/// Eigenvalues below `EIG_TRUNC_REL * lambda_max` are treated as zero when
/// pseudo-inverting a singular Gram matrix.
pub const EIG_TRUNC_REL: f64 = 1e-12;

/// Symmetric eigendecomposition with eigenvalues sorted ascending and
/// eigenvector columns permuted to match.
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn eig_extrema(m: &DMatrix<f64>) -> (f64, f64) {
    let (vals, _) = sym_eigen(m);
    match (vals.first(), vals.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0.0, 0.0),
    }
}

/// Whether a symmetric matrix is PSD under the crate tolerance.
pub fn is_psd(min_eig: f64, max_eig: f64) -> bool {
    min_eig >= -PSD_TOL * max_eig.max(1.0)
}

/// Apply the eigen-truncated pseudo-inverse of a symmetric matrix to a
/// one-hot vector and return both the coefficient vector `K^+ e_x` and the
/// quadratic value `(K^+ e_x)(x)`.
///
/// Eigenvalues at or below `EIG_TRUNC_REL * lambda_max` (including negative
/// ones from rounding) contribute nothing.
pub fn pseudo_inverse_one_hot(m: &DMatrix<f64>, x: usize) -> (Vec<f64>, f64) {
    let n = m.nrows();
    let (vals, vecs) = sym_eigen(m);
    let lambda_max = vals.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let cutoff = EIG_TRUNC_REL * lambda_max.max(f64::MIN_POSITIVE);
    let mut coeffs = vec![0.0; n];
    let mut value = 0.0;
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= cutoff {
            continue;
        }
        let ux = vecs[(x, k)];
        let w = ux / lam;
        value += ux * w;
        for i in 0..n {
            coeffs[i] += vecs[(i, k)] * w;
        }
    }
    (coeffs, value)
}

/// Inverse of a symmetric positive definite matrix: Cholesky inverse
/// followed by one Newton refinement step `X <- X (2 I - K X)` and
/// symmetrization. Returns `SingularGram` when the factorization fails or
/// the refined residual `max |K X - I|` stays above 1e-6.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let chol = m.clone().cholesky().ok_or(Error::SingularGram)?;
    let x0 = chol.inverse();
    let two_i_minus = DMatrix::identity(n, n) * 2.0 - m * &x0;
    let x1 = &x0 * two_i_minus;
    let x = (&x1 + x1.transpose()) * 0.5;
    let resid = (m * &x - DMatrix::identity(n, n)).abs().max();
    if resid > 1e-6 {
        return Err(Error::SingularGram);
    }
    Ok(x)
}

/// Solve `A x = b` for symmetric positive definite `A` with one step of
/// iterative refinement.
pub fn spd_solve_refined(
    chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
) -> DVector<f64> {
    let mut x = chol.solve(b);
    let r = b - a * &x;
    x += chol.solve(&r);
    x
}

/// Max-norm of the elementwise difference of two matrices.
pub fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}
