// Copyright 2026 rkhsnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Gram-matrix machinery for positive definite kernels on finite (and
//! exhaustively truncated countable) point sets.
//!
//! The central object is [`FiniteKernel`]: an ordered list of point labels
//! together with the symmetric matrix of kernel values over them. On top of
//! it this module provides
//!
//! | Operation | Meaning |
//! |-----------|---------|
//! | [`gram_assemble`] | build a `FiniteKernel` from a kernel function |
//! | [`psd_check`] | eigenvalue-based positive-semidefiniteness report |
//! | [`rkhs_inner`] | the bilinear form `a' G b` of coefficient vectors |
//! | [`membership_value`] | `(K^+ e_x)(x)`, the squared norm of the projected Dirac mass |
//! | [`membership_diagnostic`] | the monotone value sequence over an exhaustion, with verdict |
//! | [`projection_coeffs`] | coefficients of the projected Dirac mass |
//! | [`finite_laplacian`] | the inverse Gram matrix `L = K^-1` |
//! | [`max_diagonal_perturbation`] | largest `eps` keeping `K - eps e_x e_x'` PSD (bisection) |
//! | [`restriction_min_norm`] | minimal extension norm of values prescribed on a subset |
//!
//! Numerical conventions (tolerances are crate-wide constants in `linalg`):
//! PSD means min eigenvalue `>= -1e-9 * max(1, lambda_max)`; singular Grams
//! are pseudo-inverted with eigenvalues below `1e-12 * lambda_max` truncated
//! to zero; inverse contracts are verified to a relative residual of 1e-10.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{
    self, eig_extrema, pseudo_inverse_one_hot, spd_inverse, PSD_TOL,
};

/// Absolute slack allowed when asserting that membership values are
/// nondecreasing along an exhaustion (solver noise).
pub const MONO_TOL: f64 = 1e-9;

/// Relative Cauchy tolerance for declaring an exhaustion converged.
pub const CAUCHY_TOL: f64 = 1e-8;

/// Membership values above this are declared divergent outright.
pub const DIVERGENCE_CAP: f64 = 1e12;

// ===========================================================================
// Point labels
// ===========================================================================

/// Types usable as kernel points. A point's identity is its label string;
/// labels must be pairwise distinct within one kernel.
pub trait PointId {
    /// Stable textual identifier of the point.
    fn point_id(&self) -> String;
}

impl PointId for String {
    fn point_id(&self) -> String {
        self.clone()
    }
}

impl PointId for &str {
    fn point_id(&self) -> String {
        (*self).to_string()
    }
}

impl PointId for usize {
    fn point_id(&self) -> String {
        self.to_string()
    }
}

impl PointId for f64 {
    fn point_id(&self) -> String {
        // Rust's Display prints the shortest representation that parses back
        // to the same f64, so distinct values get distinct labels.
        format!("{self}")
    }
}

impl PointId for Vec<f64> {
    fn point_id(&self) -> String {
        let coords: Vec<String> = self.iter().map(|c| format!("{c}")).collect();
        format!("({})", coords.join(","))
    }
}

// ===========================================================================
// FiniteKernel
// ===========================================================================

/// An ordered finite point list with the symmetric real matrix of kernel
/// values over it.
///
/// Construction enforces squareness, label distinctness, and exact symmetry
/// (the input matrix is symmetrized as `(A + A') / 2` before storage). It
/// deliberately does NOT enforce positive semidefiniteness: indefinite
/// matrices must be constructible so that [`psd_check`] can report on them.
#[derive(Debug, Clone)]
pub struct FiniteKernel {
    labels: Vec<String>,
    gram: DMatrix<f64>,
}

impl FiniteKernel {
    /// Build from labels and a square matrix of kernel values.
    pub fn new(labels: Vec<String>, gram: DMatrix<f64>) -> Result<Self> {
        let n = labels.len();
        if gram.nrows() != n || gram.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: gram.nrows().max(gram.ncols()),
            });
        }
        for i in 0..n {
            for j in 0..n {
                if !gram[(i, j)].is_finite() {
                    return Err(Error::NonFiniteKernelValue(
                        labels[i].clone(),
                        labels[j].clone(),
                    ));
                }
            }
        }
        if let Some(dup) = first_duplicate(&labels) {
            return Err(Error::DuplicatePoint(dup));
        }
        let sym = (&gram + gram.transpose()) * 0.5;
        Ok(FiniteKernel { labels, gram: sym })
    }

    /// Point labels in storage order.
    pub fn points(&self) -> &[String] {
        &self.labels
    }

    /// The stored (exactly symmetric) Gram matrix.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Whether the kernel has no points.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Index of a point by label.
    pub fn index_of(&self, x: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == x)
            .ok_or_else(|| Error::UnknownPoint(x.to_string()))
    }

    /// Principal submatrix kernel over a list of member labels.
    pub fn submatrix(&self, subset: &[String]) -> Result<FiniteKernel> {
        let idx: Vec<usize> = subset
            .iter()
            .map(|l| self.index_of(l))
            .collect::<Result<_>>()?;
        let m = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.gram[(idx[i], idx[j])]);
        FiniteKernel::new(subset.to_vec(), m)
    }
}

fn first_duplicate(labels: &[String]) -> Option<String> {
    let mut seen = std::collections::HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Some(l.clone());
        }
    }
    None
}

/// Assemble the Gram matrix of `kernel` over an ordered point list.
///
/// The matrix is symmetrized as `(A + A') / 2` before storage; a NaN or
/// infinite kernel value is rejected with the offending pair's labels.
pub fn gram_assemble<P: PointId>(
    kernel: impl Fn(&P, &P) -> f64,
    points: &[P],
) -> Result<FiniteKernel> {
    let labels: Vec<String> = points.iter().map(|p| p.point_id()).collect();
    if let Some(dup) = first_duplicate(&labels) {
        return Err(Error::DuplicatePoint(dup));
    }
    let n = points.len();
    let mut gram = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = kernel(&points[i], &points[j]);
            if !v.is_finite() {
                return Err(Error::NonFiniteKernelValue(
                    labels[i].clone(),
                    labels[j].clone(),
                ));
            }
            gram[(i, j)] = v;
        }
    }
    FiniteKernel::new(labels, gram)
}

// ===========================================================================
// PSD check and inner products
// ===========================================================================

/// Result of an eigenvalue positive-semidefiniteness check.
#[derive(Debug, Clone, Copy)]
pub struct PsdReport {
    /// Smallest eigenvalue of the Gram matrix.
    pub min_eigenvalue: f64,
    /// Whether the matrix is PSD within the crate tolerance.
    pub is_psd: bool,
}

/// Eigenvalue check: PSD means the smallest eigenvalue is at least
/// `-1e-9 * max(1, largest eigenvalue)`.
pub fn psd_check(k: &FiniteKernel) -> PsdReport {
    if k.is_empty() {
        return PsdReport {
            min_eigenvalue: 0.0,
            is_psd: true,
        };
    }
    let (lo, hi) = eig_extrema(k.gram());
    PsdReport {
        min_eigenvalue: lo,
        is_psd: linalg::is_psd(lo, hi),
    }
}

/// The RKHS inner product of two functions given by coefficient vectors:
/// `<sum_x a_x k_x, sum_y b_y k_y> = sum_{x,y} a_x b_y k(x,y)`.
pub fn rkhs_inner(k: &FiniteKernel, a: &[f64], b: &[f64]) -> Result<f64> {
    let n = k.len();
    if a.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.len(),
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let av = DVector::from_column_slice(a);
    let bv = DVector::from_column_slice(b);
    Ok((av.transpose() * k.gram() * bv)[(0, 0)])
}

// ===========================================================================
// Dirac-mass membership
// ===========================================================================

/// `(K^+ e_x)(x)`: the squared RKHS norm of the projection of the Dirac mass
/// at `x` onto the span of the kernel functions over this point set. Equals
/// the `(x,x)` entry of the inverse Gram matrix when the Gram is invertible;
/// singular Grams use the truncated pseudo-inverse.
pub fn membership_value(k: &FiniteKernel, x: &str) -> Result<f64> {
    let i = k.index_of(x)?;
    let (_, value) = pseudo_inverse_one_hot(k.gram(), i);
    Ok(value)
}

/// Coefficients `zeta = K^+ e_x` of the projected Dirac mass: the function
/// `h = sum_y zeta(y) k_y` agrees with the Dirac mass on the point set
/// (within solver tolerance when the Gram is invertible).
pub fn projection_coeffs(k: &FiniteKernel, x: &str) -> Result<Vec<f64>> {
    let i = k.index_of(x)?;
    let (coeffs, _) = pseudo_inverse_one_hot(k.gram(), i);
    Ok(coeffs)
}

/// The inverse Gram matrix `L = K^-1`, satisfying `L K = I` within the
/// solve tolerance; `L` is returned exactly symmetric.
///
/// This is the finite-rank Laplace operator of the kernel: applying `L` to
/// a kernel column reproduces the corresponding Dirac mass.
pub fn finite_laplacian(k: &FiniteKernel) -> Result<DMatrix<f64>> {
    spd_inverse(k.gram())
}

/// Largest `eps >= 0` such that `K - eps * e_x e_x'` stays positive
/// semidefinite, found by bisection on the smallest eigenvalue's sign.
///
/// The exact answer is `1 / membership_value(K, x)`; this routine
/// deliberately does not use that identity so it can serve as an
/// independent oracle for it.
pub fn max_diagonal_perturbation(k: &FiniteKernel, x: &str) -> Result<f64> {
    let i = k.index_of(x)?;
    // Strict positive definiteness required: a singular Gram admits eps = 0
    // only, and the bisection bracket below would be meaningless.
    k.gram().clone().cholesky().ok_or(Error::SingularGram)?;
    let (_, lambda_max) = eig_extrema(k.gram());
    let floor = -PSD_TOL * lambda_max.max(1.0);
    let psd_at = |eps: f64| -> bool {
        let mut m = k.gram().clone();
        m[(i, i)] -= eps;
        let (lo, _) = eig_extrema(&m);
        lo >= floor
    };
    // eps can never exceed the diagonal entry: the perturbed (x,x) entry
    // must stay nonnegative.
    let mut hi = k.gram()[(i, i)];
    if psd_at(hi) {
        return Ok(hi);
    }
    let mut lo = 0.0;
    while hi - lo > 1e-13 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if psd_at(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

// ===========================================================================
// Exhaustions and the membership diagnostic
// ===========================================================================

/// An increasing sequence of finite subsets of a (possibly infinite) point
/// set, the computational stand-in for the filter of all finite subsets.
///
/// Generated prefix exhaustions grow strictly until they saturate their
/// ground set; user-supplied sequences may repeat a subset (the diagnostic
/// treats a non-growing level as carrying no new information).
#[derive(Debug, Clone)]
pub struct Exhaustion<P> {
    subsets: Vec<Vec<P>>,
    complete: bool,
}

impl<P: PointId + Clone> Exhaustion<P> {
    /// User-supplied subsets. Each subset must contain every label of its
    /// predecessor (nesting may be non-strict). `complete` is false: nothing
    /// is known about the ground set beyond the final subset.
    pub fn from_subsets(subsets: Vec<Vec<P>>) -> Result<Self> {
        if subsets.is_empty() {
            return Err(Error::BadParameter("exhaustion has no subsets".into()));
        }
        for w in subsets.windows(2) {
            let prev: std::collections::HashSet<String> =
                w[0].iter().map(|p| p.point_id()).collect();
            let next: std::collections::HashSet<String> =
                w[1].iter().map(|p| p.point_id()).collect();
            if !prev.is_subset(&next) {
                return Err(Error::BadParameter(
                    "exhaustion subsets are not nested".into(),
                ));
            }
        }
        Ok(Exhaustion {
            subsets,
            complete: false,
        })
    }

    /// Prefix rule: subsets of sizes 2, 4, 8, ... (capped at the ground-set
    /// size) over `ground` in its given order, at most `max_levels` of them.
    /// The exhaustion is complete when the final subset is the whole ground
    /// set, in which case the supremum over all finite subsets is attained
    /// there.
    pub fn prefix(ground: &[P], max_levels: usize) -> Result<Self> {
        Self::prefix_with(ground, None, max_levels)
    }

    /// Prefix rule with a target point unioned into every subset, so that
    /// the diagnostic's requirement `x` in `subsets[0]` holds regardless of
    /// the target's position in the ground order.
    pub fn prefix_with_target(ground: &[P], target: &str, max_levels: usize) -> Result<Self> {
        Self::prefix_with(ground, Some(target), max_levels)
    }

    fn prefix_with(ground: &[P], target: Option<&str>, max_levels: usize) -> Result<Self> {
        if ground.is_empty() {
            return Err(Error::BadParameter("empty ground set".into()));
        }
        let labels: Vec<String> = ground.iter().map(|p| p.point_id()).collect();
        if let Some(dup) = first_duplicate(&labels) {
            return Err(Error::DuplicatePoint(dup));
        }
        let target_idx = match target {
            None => None,
            Some(t) => Some(
                labels
                    .iter()
                    .position(|l| l == t)
                    .ok_or_else(|| Error::UnknownPoint(t.to_string()))?,
            ),
        };
        let mut subsets = Vec::new();
        let mut size = 2usize;
        let mut complete = false;
        for _ in 0..max_levels.max(1) {
            let take = size.min(ground.len());
            let mut subset: Vec<P> = ground[..take].to_vec();
            if let Some(ti) = target_idx {
                if ti >= take {
                    subset.push(ground[ti].clone());
                }
            }
            subsets.push(subset);
            if take == ground.len() {
                complete = true;
                break;
            }
            size = size.saturating_mul(2);
        }
        Ok(Exhaustion { subsets, complete })
    }

    /// The subset sequence.
    pub fn subsets(&self) -> &[Vec<P>] {
        &self.subsets
    }

    /// Whether the final subset is known to be the entire ground set.
    pub fn is_complete(&self) -> bool {
        self.complete
    }
}

/// Outcome of a membership diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// The value sequence settled; `limit` is the last computed value.
    Converged { limit: f64 },
    /// The sequence blew past the cap, grew geometrically, or revealed a
    /// degenerate (rank-deficient) Gram by decreasing.
    Diverged,
    /// Levels ran out before any rule fired.
    Undecided,
}

/// Monotone sequence of membership values over an exhaustion, with verdict.
#[derive(Debug, Clone)]
pub struct MembershipDiagnostic {
    /// Point whose Dirac mass is being tested.
    pub target: String,
    /// One membership value per exhaustion level.
    pub values: Vec<f64>,
    /// Subset size at each level.
    pub subset_sizes: Vec<usize>,
    /// Convergence verdict.
    pub verdict: Verdict,
}

/// Evaluate [`membership_value`] level by level along an exhaustion.
///
/// Decision rules:
/// - converged: `|v[n] - v[n-1]| <= 1e-8 * max(1, v[n])` on three
///   consecutive strictly-grown levels, or the exhaustion saturates a known
///   finite ground set (the supremum over the subset filter is attained at
///   its maximal element);
/// - diverged: a value exceeds 1e12; or values grow by a factor >= 1.01 on
///   ten consecutive grown levels past level 20; or a value DECREASES beyond
///   the monotonicity slack, which is impossible for a strictly positive
///   definite kernel and signals a rank-deficient Gram whose Dirac mass
///   lies outside the span (the truncated pseudo-inverse sheds mass);
/// - undecided otherwise.
///
/// Levels whose subset did not grow contribute a value but no evidence.
pub fn membership_diagnostic<P: PointId + Clone>(
    kernel: impl Fn(&P, &P) -> f64,
    exhaustion: &Exhaustion<P>,
    x: &str,
    max_levels: usize,
) -> Result<MembershipDiagnostic> {
    let first = &exhaustion.subsets[0];
    if !first.iter().any(|p| p.point_id() == x) {
        return Err(Error::UnknownPoint(x.to_string()));
    }
    let levels = exhaustion.subsets.len().min(max_levels.max(1));
    let mut values = Vec::with_capacity(levels);
    let mut sizes = Vec::with_capacity(levels);
    let mut verdict = None;
    let mut cauchy_streak = 0usize;
    let mut growth_streak = 0usize;
    for (n, subset) in exhaustion.subsets.iter().take(levels).enumerate() {
        let k = gram_assemble(&kernel, subset)?;
        let value = membership_value(&k, x)?;
        let grew = n == 0 || subset.len() > sizes[n - 1];
        values.push(value);
        sizes.push(subset.len());
        if value > DIVERGENCE_CAP {
            verdict = Some(Verdict::Diverged);
            break;
        }
        if n > 0 && grew {
            let prev = values[n - 1];
            if value < prev - MONO_TOL * prev.abs().max(1.0) {
                verdict = Some(Verdict::Diverged);
                break;
            }
            if (value - prev).abs() <= CAUCHY_TOL * value.abs().max(1.0) {
                cauchy_streak += 1;
                growth_streak = 0;
            } else {
                cauchy_streak = 0;
                if prev > 0.0 && value >= 1.01 * prev {
                    growth_streak += 1;
                } else {
                    growth_streak = 0;
                }
            }
            if cauchy_streak >= 3 {
                verdict = Some(Verdict::Converged { limit: value });
                break;
            }
            if n >= 20 && growth_streak >= 10 {
                verdict = Some(Verdict::Diverged);
                break;
            }
        }
    }
    let verdict = verdict.unwrap_or_else(|| {
        if exhaustion.complete && values.len() == exhaustion.subsets.len() {
            Verdict::Converged {
                limit: *values.last().expect("at least one level"),
            }
        } else {
            Verdict::Undecided
        }
    });
    Ok(MembershipDiagnostic {
        target: x.to_string(),
        values,
        subset_sizes: sizes,
        verdict,
    })
}

/// [`membership_diagnostic`] over label subsets of an already-assembled
/// Gram matrix, for kernels whose entries depend on the whole point
/// configuration (mollified diagonals): each level takes a principal
/// submatrix instead of re-evaluating the kernel.
pub fn membership_diagnostic_gram(
    k: &FiniteKernel,
    exhaustion: &Exhaustion<String>,
    x: &str,
    max_levels: usize,
) -> Result<MembershipDiagnostic> {
    let index: std::collections::HashMap<&str, usize> = k
        .points()
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    for subset in exhaustion.subsets() {
        for label in subset {
            if !index.contains_key(label.as_str()) {
                return Err(Error::UnknownPoint(label.clone()));
            }
        }
    }
    membership_diagnostic(
        |a: &String, b: &String| k.gram()[(index[a.as_str()], index[b.as_str()])],
        exhaustion,
        x,
        max_levels,
    )
}

// ===========================================================================
// Minimal-norm restriction
// ===========================================================================

/// Squared RKHS norm of the minimal-norm extension of values `phi`
/// prescribed on a subset of the points.
///
/// Two numerically independent routes are computed: the closed form
/// `phi' (K_sub)^-1 phi` over the principal submatrix (Cholesky), and the
/// constrained quadratic minimum of `zeta' K zeta` over the full space
/// subject to `(K zeta)|_subset = phi` via an LU-factored KKT system.
///
/// # Panics
///
/// Panics if the two routes disagree beyond 1e-9 relative: that would be an
/// internal consistency violation, not a user error.
pub fn restriction_min_norm(
    k_full: &FiniteKernel,
    subset: &[String],
    phi: &[f64],
) -> Result<f64> {
    let s = subset.len();
    if phi.len() != s {
        return Err(Error::DimensionMismatch {
            expected: s,
            got: phi.len(),
        });
    }
    let idx: Vec<usize> = subset
        .iter()
        .map(|l| k_full.index_of(l))
        .collect::<Result<_>>()?;
    // Route A: principal submatrix inverse.
    let sub = DMatrix::from_fn(s, s, |i, j| k_full.gram()[(idx[i], idx[j])]);
    let phiv = DVector::from_column_slice(phi);
    let chol = sub.clone().cholesky().ok_or(Error::SingularGram)?;
    let alpha = chol.solve(&phiv);
    let value_direct = phiv.dot(&alpha);
    // Route B: KKT system for min zeta' K zeta s.t. C zeta = phi, where C
    // is the subset rows of K (the evaluation map of the kernel expansion).
    let n = k_full.len();
    let mut kkt = DMatrix::zeros(n + s, n + s);
    for i in 0..n {
        for j in 0..n {
            kkt[(i, j)] = 2.0 * k_full.gram()[(i, j)];
        }
    }
    for (r, &pi) in idx.iter().enumerate() {
        for j in 0..n {
            kkt[(n + r, j)] = k_full.gram()[(pi, j)];
            kkt[(j, n + r)] = k_full.gram()[(pi, j)];
        }
    }
    let mut rhs = DVector::zeros(n + s);
    for r in 0..s {
        rhs[n + r] = phi[r];
    }
    let sol = kkt.full_piv_lu().solve(&rhs).ok_or(Error::SingularGram)?;
    let zeta = sol.rows(0, n).into_owned();
    let value_kkt = (zeta.transpose() * k_full.gram() * &zeta)[(0, 0)];
    let rel = (value_direct - value_kkt).abs() / value_direct.abs().max(1.0);
    assert!(
        rel <= 1e-9,
        "min-norm routes disagree: direct {value_direct}, constrained {value_kkt}"
    );
    Ok(value_direct)
}

// ===========================================================================
// Tests
// ===========================================================================
