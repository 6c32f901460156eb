// Copyright 2026 rkhsnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form continuous kernels and their restrictions to finite point
//! sets: Brownian motion `min(s,t)`, the Brownian bridge `min(s,t) - st`,
//! the Dirichlet Green's kernel of the unit ball, and the Newton potential.
//!
//! Restriction to a finite set turns each kernel into a [`FiniteKernel`]
//! that plugs into the Gram machinery of [`crate::gram`]. The singular
//! kernels (ball Green / Newton) have infinite diagonals; restriction
//! replaces each diagonal entry by the exact self-energy of a uniform
//! small-ball measure centered at the point. The ball radius is one global
//! `rho` per configuration, small enough that the balls are pairwise
//! disjoint and stay inside the domain, so the mean-value property of
//! harmonic functions keeps every off-diagonal entry exactly equal to the
//! point evaluation. The mollified Gram is therefore the true Gram of the
//! ball measures and inherits positive semidefiniteness whenever the
//! kernel is positive definite on measures (ball Green's kernel in both
//! implemented dimensions, Newton potential in dimension 3; the planar
//! logarithmic potential is only conditionally positive definite, and its
//! restricted Grams are not PSD-guaranteed).
//!
//! The module also hosts the weak-form second-derivative check for the
//! bridge kernel, its sine eigen-expansion, closed-form resistance
//! metrics, a seeded Brownian-bridge path sampler, and grid checks of the
//! ball kernel's boundary values and harmonicity.

use nalgebra::DMatrix;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gram::FiniteKernel;
use crate::linalg::spd_inverse;
use crate::network::ResistanceMatrix;

/// Points of a singular kernel closer than this are rejected rather than
/// clamped.
pub const SEP_TOL: f64 = 1e-8;

/// Brownian-motion evaluations are truncated to `(0, BM_MAX]` so that
/// products in downstream identities stay far from overflow.
pub const BM_MAX: f64 = 1e6;

const TWO_PI: f64 = std::f64::consts::TAU;

// ===========================================================================
// Kernels and evaluation
// ===========================================================================

/// A closed-form positive definite kernel on an interval or the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuousKernel {
    /// `k(s,t) = min(s,t)` on `(0, 10^6]`.
    BrownianMotion,
    /// `k(s,t) = min(s,t) - st` on `(0,1)`.
    BrownianBridge,
    /// Dirichlet Green's kernel of the open unit ball in dimension
    /// `dim >= 2`; singular on the diagonal.
    DiskGreen { dim: u32 },
    /// Newton potential in dimension `dim >= 2` (logarithmic for 2),
    /// evaluated on the closed unit ball; singular on the diagonal.
    NewtonPotential { dim: u32 },
}

impl ContinuousKernel {
    /// Coordinate dimension of kernel arguments.
    pub fn dim(&self) -> usize {
        match self {
            ContinuousKernel::BrownianMotion | ContinuousKernel::BrownianBridge => 1,
            ContinuousKernel::DiskGreen { dim } | ContinuousKernel::NewtonPotential { dim } => {
                *dim as usize
            }
        }
    }

    /// Whether the kernel blows up on the diagonal.
    pub fn is_singular(&self) -> bool {
        matches!(
            self,
            ContinuousKernel::DiskGreen { .. } | ContinuousKernel::NewtonPotential { .. }
        )
    }

    fn validate(&self) -> Result<()> {
        match self {
            ContinuousKernel::DiskGreen { dim } | ContinuousKernel::NewtonPotential { dim }
                if *dim < 2 =>
            {
                Err(Error::BadParameter(format!(
                    "ball kernels need dimension >= 2, got {dim}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Canonical label of a kernel point: bare decimal for interval kernels,
/// parenthesized coordinates for ball kernels.
pub fn point_label(p: &[f64]) -> String {
    if p.len() == 1 {
        format!("{}", p[0])
    } else {
        let coords: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
        format!("({})", coords.join(","))
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// The reflected distance `|x| |x* - y|` with `x* = x / |x|^2`, computed
/// from the symmetric expansion `sqrt(1 - 2 x.y + |x|^2 |y|^2)`, which is
/// finite at `x = 0` (value 1, the `x* = infinity` limit) and manifestly
/// symmetric in its arguments.
fn reflected_distance(x: &[f64], y: &[f64]) -> f64 {
    let nx2: f64 = x.iter().map(|c| c * c).sum();
    let ny2: f64 = y.iter().map(|c| c * c).sum();
    (1.0 - 2.0 * dot(x, y) + nx2 * ny2).max(0.0).sqrt()
}

/// Normalizing constant of the Newton potential,
/// `C_nu = Gamma(nu/2 - 1) / (4 pi^(nu/2))`; `C_3 = 1/(4 pi)`.
fn newton_constant(dim: u32) -> f64 {
    // Gamma at integer or half-integer arguments by upward recursion.
    let z2 = dim as i64 - 2; // argument as a multiple of 1/2
    let mut g;
    let mut k;
    if z2 % 2 == 0 {
        g = 1.0; // Gamma(1)
        k = 2i64; // current argument in halves
    } else {
        g = std::f64::consts::PI.sqrt(); // Gamma(1/2)
        k = 1i64;
    }
    while k < z2 {
        g *= k as f64 / 2.0;
        k += 2;
    }
    g / (4.0 * std::f64::consts::PI.powf(dim as f64 / 2.0))
}

fn check_point(kernel: &ContinuousKernel, p: &[f64], interior_only: bool) -> Result<()> {
    let d = kernel.dim();
    if p.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: p.len(),
        });
    }
    if p.iter().any(|c| !c.is_finite()) {
        return Err(Error::OutOfDomain(point_label(p)));
    }
    let ok = match kernel {
        ContinuousKernel::BrownianMotion => p[0] > 0.0 && p[0] <= BM_MAX,
        ContinuousKernel::BrownianBridge => p[0] > 0.0 && p[0] < 1.0,
        ContinuousKernel::DiskGreen { .. } => {
            let r = norm(p);
            if interior_only {
                r < 1.0
            } else {
                r <= 1.0
            }
        }
        ContinuousKernel::NewtonPotential { .. } => norm(p) <= 1.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfDomain(point_label(p)))
    }
}

/// Evaluate a kernel at a pair of points.
///
/// Ball kernels accept boundary points (the Green's kernel vanishes
/// there); exactly coincident points of a singular kernel are rejected
/// with [`Error::SingularPair`].
pub fn kernel_eval(kernel: &ContinuousKernel, x: &[f64], y: &[f64]) -> Result<f64> {
    kernel.validate()?;
    check_point(kernel, x, false)?;
    check_point(kernel, y, false)?;
    match kernel {
        ContinuousKernel::BrownianMotion => Ok(x[0].min(y[0])),
        ContinuousKernel::BrownianBridge => Ok(x[0].min(y[0]) - x[0] * y[0]),
        ContinuousKernel::DiskGreen { dim } => {
            let r = dist(x, y);
            if r == 0.0 {
                return Err(Error::SingularPair);
            }
            let a = reflected_distance(x, y);
            if *dim == 2 {
                Ok((a / r).ln() / TWO_PI)
            } else {
                let p = 2.0 - *dim as f64;
                Ok(newton_constant(*dim) * (r.powf(p) - a.powf(p)))
            }
        }
        ContinuousKernel::NewtonPotential { dim } => {
            let r = dist(x, y);
            if r == 0.0 {
                return Err(Error::SingularPair);
            }
            if *dim == 2 {
                Ok(-r.ln() / TWO_PI)
            } else {
                Ok(newton_constant(*dim) * r.powf(2.0 - *dim as f64))
            }
        }
    }
}

// ===========================================================================
// Restriction to finite point sets
// ===========================================================================

/// Exact self-energy of the uniform ball measure of radius `rho` at `x`
/// under a singular kernel; the mollified diagonal entry.
fn mollified_diagonal(kernel: &ContinuousKernel, x: &[f64], rho: f64) -> Result<f64> {
    let c3 = newton_constant(3);
    match kernel {
        // Planar log self-energy of a uniform disk of radius rho is
        // -ln(rho) + 1/4; the reflected term is harmonic and averages to
        // its center value ln(1 - |x|^2).
        ContinuousKernel::DiskGreen { dim: 2 } => {
            let nx2: f64 = x.iter().map(|c| c * c).sum();
            Ok((((1.0 - nx2) / rho).ln() + 0.25) / TWO_PI)
        }
        // Coulomb self-energy of the uniform ball is (6/5) / rho.
        ContinuousKernel::DiskGreen { dim: 3 } => {
            let nx2: f64 = x.iter().map(|c| c * c).sum();
            Ok(c3 * (6.0 / (5.0 * rho) - 1.0 / (1.0 - nx2)))
        }
        ContinuousKernel::NewtonPotential { dim: 2 } => Ok(((1.0 / rho).ln() + 0.25) / TWO_PI),
        ContinuousKernel::NewtonPotential { dim: 3 } => Ok(c3 * 6.0 / (5.0 * rho)),
        ContinuousKernel::DiskGreen { dim } | ContinuousKernel::NewtonPotential { dim } => {
            Err(Error::BadParameter(format!(
                "mollified diagonal implemented for dimensions 2 and 3 only, got {dim}"
            )))
        }
        _ => unreachable!("only singular kernels are mollified"),
    }
}

/// Gram matrix of a kernel over an ordered point list.
///
/// Interval kernels evaluate everywhere, diagonal included. Singular ball
/// kernels require pairwise separation of at least [`SEP_TOL`] and
/// strictly interior points (Green's kernel); their diagonal entries use
/// the uniform-ball mollification described in the module docs with the
/// global radius `rho = 0.49 * min(separation, boundary distance)`
/// (boundary distance entering for the Green's kernel only).
pub fn restrict(kernel: &ContinuousKernel, points: &[Vec<f64>]) -> Result<FiniteKernel> {
    kernel.validate()?;
    if points.is_empty() {
        return Err(Error::BadParameter("no points to restrict to".into()));
    }
    let interior_only = matches!(kernel, ContinuousKernel::DiskGreen { .. });
    for p in points {
        check_point(kernel, p, interior_only)?;
    }
    let labels: Vec<String> = points.iter().map(|p| point_label(p)).collect();
    let n = points.len();
    let mut gram = DMatrix::zeros(n, n);
    if kernel.is_singular() {
        let mut min_sep = f64::INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                min_sep = min_sep.min(dist(&points[i], &points[j]));
            }
        }
        if n > 1 && min_sep < SEP_TOL {
            return Err(Error::TooClose);
        }
        let mut limit = min_sep;
        if interior_only {
            for p in points {
                limit = limit.min(1.0 - norm(p));
            }
        }
        if !limit.is_finite() {
            // single point: only the boundary distance (Green) or a unit
            // default (Newton) constrains the ball
            limit = 1.0;
            if interior_only {
                limit = 1.0 - norm(&points[0]);
            }
        }
        // 0.49 keeps the balls pairwise disjoint (2 rho < separation) and
        // strictly inside the domain.
        let rho = 0.49 * limit;
        for i in 0..n {
            gram[(i, i)] = mollified_diagonal(kernel, &points[i], rho)?;
            for j in (i + 1)..n {
                let v = kernel_eval(kernel, &points[i], &points[j])?;
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
    } else {
        for i in 0..n {
            for j in i..n {
                let v = kernel_eval(kernel, &points[i], &points[j])?;
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
    }
    FiniteKernel::new(labels, gram)
}

/// Restriction structure of the Brownian-motion kernel over increasing
/// points: its inverse Gram is the Laplacian of a path network.
#[derive(Debug, Clone)]
pub struct BmStructure {
    /// Inverse of the restricted Gram matrix.
    pub inverse: DMatrix<f64>,
    /// Path conductances `c_(i,i+1) = -(K^-1)_(i,i+1) = 1/(x_(i+1) - x_i)`.
    pub conductances: Vec<f64>,
}

/// Invert the Brownian-motion Gram over strictly increasing points and
/// extract the induced path-network conductances.
///
/// # Panics
///
/// Panics if the inverse fails to be tridiagonal or the conductances
/// deviate from the reciprocal gaps beyond solver tolerance; both are
/// identities, so a violation is an internal error.
pub fn bm_restriction_structure(points: &[f64]) -> Result<BmStructure> {
    for w in points.windows(2) {
        // partial_cmp keeps NaN on the rejecting branch.
        if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::BadParameter(
                "points must be strictly increasing".into(),
            ));
        }
    }
    let pts: Vec<Vec<f64>> = points.iter().map(|&x| vec![x]).collect();
    let k = restrict(&ContinuousKernel::BrownianMotion, &pts)?;
    let inverse = spd_inverse(k.gram())?;
    let n = points.len();
    let linf = inverse.amax();
    for i in 0..n {
        for j in 0..n {
            if j + 1 < i || j > i + 1 {
                assert!(
                    inverse[(i, j)].abs() <= 1e-9 * linf.max(1.0),
                    "inverse Gram not tridiagonal at ({i},{j})"
                );
            }
        }
    }
    let mut conductances = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n.saturating_sub(1) {
        let c = -inverse[(i, i + 1)];
        let expect = 1.0 / (points[i + 1] - points[i]);
        assert!(
            (c - expect).abs() <= 1e-9 * expect.abs().max(1.0),
            "conductance {c} differs from reciprocal gap {expect}"
        );
        conductances.push(c);
    }
    Ok(BmStructure {
        inverse,
        conductances,
    })
}

/// Resistance metric of a restricted kernel:
/// `R(x,y) = k(x,x) + k(y,y) - 2 k(x,y)`.
///
/// For Brownian motion the values are asserted against `|x - y|` and for
/// the bridge against `|x - y| (1 - |x - y|)`, both within 1e-12 relative
/// to scale.
pub fn restriction_resistance(
    kernel: &ContinuousKernel,
    points: &[Vec<f64>],
) -> Result<ResistanceMatrix> {
    let k = restrict(kernel, points)?;
    let n = points.len();
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = k.gram()[(i, i)] + k.gram()[(j, j)] - 2.0 * k.gram()[(i, j)];
            let closed = match kernel {
                ContinuousKernel::BrownianMotion => Some((points[i][0] - points[j][0]).abs()),
                ContinuousKernel::BrownianBridge => {
                    let d = (points[i][0] - points[j][0]).abs();
                    Some(d * (1.0 - d))
                }
                _ => None,
            };
            if let Some(expect) = closed {
                assert!(
                    (r - expect).abs() <= 1e-12 * expect.abs().max(1.0),
                    "resistance {r} differs from closed form {expect}"
                );
            }
            values[(i, j)] = r;
            values[(j, i)] = r;
        }
    }
    Ok(ResistanceMatrix::from_parts(
        k.points().to_vec(),
        values,
    ))
}

// ===========================================================================
// Bridge kernel analysis
// ===========================================================================

/// Partial sine expansion of the bridge kernel:
/// `2 sum_(n=1..N) sin(n pi s) sin(n pi t) / (n pi)^2`.
///
/// The factor 2 normalizes the sine system to an orthonormal basis of the
/// Cameron-Martin space, making the series converge to `min(s,t) - st`;
/// the tail is bounded by `2/(pi^2 N)`.
pub fn eigen_expansion_partial(s: f64, t: f64, n: usize) -> Result<f64> {
    if !(s > 0.0 && s < 1.0 && t > 0.0 && t < 1.0) {
        return Err(Error::BadParameter(format!(
            "expansion arguments must lie in (0,1), got ({s},{t})"
        )));
    }
    if n < 1 {
        return Err(Error::BadParameter("expansion needs N >= 1".into()));
    }
    let pi = std::f64::consts::PI;
    let mut sum = 0.0;
    for m in 1..=n {
        let f = m as f64 * pi;
        sum += (f * s).sin() * (f * t).sin() / (f * f);
    }
    Ok(2.0 * sum)
}

/// Gauss-Legendre nodes and weights for the 5-point rule on `[-1, 1]`.
const GL5_NODES: [f64; 5] = [
    -0.906179845938664,
    -0.5384693101056831,
    0.0,
    0.5384693101056831,
    0.906179845938664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.23692688505618908,
    0.47862867049936647,
    0.5688888888888889,
    0.47862867049936647,
    0.23692688505618908,
];

/// Weak second-derivative check for the bridge kernel at `s`: evaluates
/// `integral of k_s'(t) phi'(t) dt` using the piecewise-constant
/// derivative `(1-s)` on `(0,s)` and `-s` on `(s,1)`, so the result is
/// `(1-s) integral_0^s phi' - s integral_s^1 phi'`.
///
/// For any smooth `phi` vanishing at the endpoints this reproduces
/// `phi(s)`, the weak form of `-k_s'' = delta_s`. The derivative of the
/// test function is taken by fourth-order central differences and each
/// piece is integrated by a composite 5-point Gauss rule on
/// `quadrature_n` panels.
pub fn bridge_second_derivative_check(
    s: f64,
    test_fn: impl Fn(f64) -> f64,
    quadrature_n: usize,
) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::OutOfDomain(format!("{s}")));
    }
    if quadrature_n < 100 {
        return Err(Error::BadParameter(
            "second-derivative check needs at least 100 quadrature panels".into(),
        ));
    }
    let dphi = |t: f64| -> f64 {
        let h = 1e-4f64.min(t / 2.0).min((1.0 - t) / 2.0);
        (test_fn(t - 2.0 * h) - 8.0 * test_fn(t - h) + 8.0 * test_fn(t + h)
            - test_fn(t + 2.0 * h))
            / (12.0 * h)
    };
    let integrate = |lo: f64, hi: f64| -> f64 {
        let width = (hi - lo) / quadrature_n as f64;
        let mut acc = 0.0;
        for p in 0..quadrature_n {
            let a = lo + p as f64 * width;
            let mid = a + width / 2.0;
            let half = width / 2.0;
            for (node, weight) in GL5_NODES.iter().zip(&GL5_WEIGHTS) {
                acc += weight * half * dphi(mid + half * node);
            }
        }
        acc
    };
    Ok((1.0 - s) * integrate(0.0, s) - s * integrate(s, 1.0))
}

// ===========================================================================
// Bridge path sampler
// ===========================================================================

/// A batch of Brownian-bridge paths sampled on a common grid.
#[derive(Debug, Clone)]
pub struct PathSample {
    /// Strictly increasing sample times in `(0,1)`.
    pub grid: Vec<f64>,
    /// One row per path, `paths[p][i]` at `grid[i]`.
    pub paths: Vec<Vec<f64>>,
    /// Seed the batch was drawn from.
    pub seed: u64,
}

/// Standard normal generator: Marsaglia polar transform over 53-bit
/// uniforms from a counter-based stream cipher. Implemented in-crate so
/// the seed-to-path map is frozen by this crate alone, independent of
/// distribution-crate internals.
struct PolarGaussian {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl PolarGaussian {
    fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        PolarGaussian { rng, spare: None }
    }

    fn uniform(&mut self) -> f64 {
        // top 53 bits -> [0, 1)
        (self.rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

/// Sample Brownian-bridge paths at the grid times.
///
/// Construction: the bridge is the time-changed, scaled Brownian motion
/// `B_bri(t) = (1-t) B(t/(1-t))`; each path accumulates independent
/// Gaussian increments of `B` over the transformed grid. Determinism
/// contract: path `p` is drawn from stream `p` of an 8-round ChaCha
/// generator seeded with `seed`, two 53-bit uniforms per polar-method
/// acceptance; this seed-to-path map is stable across releases, and
/// sharding paths across threads cannot change it.
pub fn sample_bridge_paths(grid: &[f64], n_paths: usize, seed: u64) -> Result<PathSample> {
    if grid.is_empty() {
        return Err(Error::BadParameter("empty sampling grid".into()));
    }
    for &t in grid {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::BadParameter(format!(
                "grid time {t} outside (0,1)"
            )));
        }
    }
    for w in grid.windows(2) {
        // partial_cmp keeps NaN on the rejecting branch.
        if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::BadParameter(
                "grid times must be strictly increasing".into(),
            ));
        }
    }
    if n_paths < 1 {
        return Err(Error::BadParameter("need at least one path".into()));
    }
    let tau: Vec<f64> = grid.iter().map(|&t| t / (1.0 - t)).collect();
    let paths: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut gauss = PolarGaussian::new(seed, p as u64);
            let mut b = 0.0;
            let mut prev_tau = 0.0;
            grid.iter()
                .zip(&tau)
                .map(|(&t, &tau_i)| {
                    b += (tau_i - prev_tau).sqrt() * gauss.next_normal();
                    prev_tau = tau_i;
                    (1.0 - t) * b
                })
                .collect()
        })
        .collect();
    Ok(PathSample {
        grid: grid.to_vec(),
        paths,
        seed,
    })
}

/// One covariance comparison entry of a sampled batch.
#[derive(Debug, Clone)]
pub struct CovEntry {
    /// Grid times of the entry.
    pub s: f64,
    /// Grid times of the entry.
    pub t: f64,
    /// Known-zero-mean empirical second moment.
    pub empirical: f64,
    /// Bridge covariance `min(s,t) - st`.
    pub expected: f64,
    /// Gaussian standard error
    /// `sqrt((k(s,s) k(t,t) + k(s,t)^2) / n_paths)`.
    pub standard_error: f64,
}

/// Compare the empirical covariance of a sample against the bridge
/// kernel, entry by entry, with per-entry Gaussian standard errors.
pub fn bridge_covariance_check(sample: &PathSample) -> Vec<CovEntry> {
    let g = &sample.grid;
    let m = sample.paths.len() as f64;
    let mut out = Vec::new();
    for i in 0..g.len() {
        for j in i..g.len() {
            let mut acc = 0.0;
            for path in &sample.paths {
                acc += path[i] * path[j];
            }
            let (s, t) = (g[i], g[j]);
            let k_st = s.min(t) - s * t;
            let k_ss = s - s * s;
            let k_tt = t - t * t;
            out.push(CovEntry {
                s,
                t,
                empirical: acc / m,
                expected: k_st,
                standard_error: ((k_ss * k_tt + k_st * k_st) / m).sqrt(),
            });
        }
    }
    out
}

// ===========================================================================
// Ball-kernel grid checks
// ===========================================================================

/// Result of the boundary and harmonicity checks of the ball Green's
/// kernel.
#[derive(Debug, Clone, Copy)]
pub struct DirichletReport {
    /// Largest kernel magnitude over boundary probes at distance `1e-6`
    /// inside the sphere.
    pub boundary_max: f64,
    /// Largest discrete-Laplacian residual of the harmonic difference
    /// `K(x,.) - G(x,.)` over the interior lattice, normalized by
    /// `grid_h^2`.
    pub harmonic_residual: f64,
}

fn boundary_probes(dim: u32, count: usize) -> Vec<Vec<f64>> {
    match dim {
        2 => (0..count)
            .map(|k| {
                let a = TWO_PI * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            // spherical Fibonacci lattice
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let a = TWO_PI * (k as f64 / golden).fract();
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => unreachable!("checks cover dimensions 2 and 3"),
    }
}

/// Verify the defining properties of the ball Green's kernel on a grid.
///
/// `boundary_max` probes `|K(x, b (1 - 1e-6))|` over boundary directions
/// `b`; the kernel vanishes on the sphere, so the probe is small in
/// proportion to the probe depth. `harmonic_residual` applies the 5-point
/// (dimension 2) or 7-point (dimension 3) discrete Laplacian to
/// `y -> K(x,y) - G(x,y)` (G the Newton potential) on a lattice of pitch
/// `grid_h` kept `5 grid_h` away from `x` and `2 grid_h` inside the
/// sphere, normalized by `grid_h^2`; the difference is harmonic, so the
/// residual decays at second order in the pitch.
pub fn dirichlet_kernel_checks(dim: u32, x: &[f64], grid_h: f64) -> Result<DirichletReport> {
    if dim != 2 && dim != 3 {
        return Err(Error::BadParameter(format!(
            "grid checks cover dimensions 2 and 3, got {dim}"
        )));
    }
    if !(grid_h > 0.0 && grid_h < 0.25) {
        return Err(Error::BadParameter(format!("bad grid pitch {grid_h}")));
    }
    let green = ContinuousKernel::DiskGreen { dim };
    let newton = ContinuousKernel::NewtonPotential { dim };
    check_point(&green, x, true)?;
    if norm(x) >= 1.0 - 2.0 * grid_h {
        return Err(Error::BadParameter(
            "source point too close to the boundary for the stencil".into(),
        ));
    }
    let depth = 1e-6;
    let mut boundary_max = 0.0f64;
    for b in boundary_probes(dim, 400) {
        let probe: Vec<f64> = b.iter().map(|c| c * (1.0 - depth)).collect();
        boundary_max = boundary_max.max(kernel_eval(&green, x, &probe)?.abs());
    }

    let diff = |y: &[f64]| -> Result<f64> {
        Ok(kernel_eval(&green, x, y)? - kernel_eval(&newton, x, y)?)
    };
    let d = dim as usize;
    let span = (1.0 / grid_h).floor() as i64;
    let mut idx = vec![-span; d];
    let mut harmonic_residual = 0.0f64;
    loop {
        let y: Vec<f64> = idx.iter().map(|&i| i as f64 * grid_h).collect();
        let mut usable = norm(&y) <= 1.0 - 2.0 * grid_h && dist(&y, x) >= 5.0 * grid_h;
        if usable {
            let mut acc = -2.0 * d as f64 * diff(&y)?;
            'stencil: for axis in 0..d {
                for dir in [-1.0, 1.0] {
                    let mut yy = y.clone();
                    yy[axis] += dir * grid_h;
                    if dist(&yy, x) == 0.0 {
                        usable = false;
                        break 'stencil;
                    }
                    acc += diff(&yy)?;
                }
            }
            if usable {
                harmonic_residual = harmonic_residual.max((acc / (grid_h * grid_h)).abs());
            }
        }
        // odometer over the lattice cube
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] <= span {
                break;
            }
            idx[k] = -span;
            k += 1;
            if k == d {
                return Ok(DirichletReport {
                    boundary_max,
                    harmonic_residual,
                });
            }
        }
    }
}

// ===========================================================================
// Tests
// ===========================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::psd_check;
    use crate::linalg::max_diff;

    const BRIDGE: ContinuousKernel = ContinuousKernel::BrownianBridge;
    const BM: ContinuousKernel = ContinuousKernel::BrownianMotion;
    const DISK2: ContinuousKernel = ContinuousKernel::DiskGreen { dim: 2 };
    const DISK3: ContinuousKernel = ContinuousKernel::DiskGreen { dim: 3 };

    #[test]
    fn kernel_eval_interval_kernels() {
        assert_eq!(kernel_eval(&BRIDGE, &[0.25], &[0.5]).unwrap(), 0.125);
        assert_eq!(kernel_eval(&BM, &[3.0], &[2.0]).unwrap(), 2.0);
        assert!(matches!(
            kernel_eval(&BRIDGE, &[1.0], &[0.5]),
            Err(Error::OutOfDomain(_))
        ));
        assert!(matches!(
            kernel_eval(&BM, &[0.0], &[0.5]),
            Err(Error::OutOfDomain(_))
        ));
        assert!(matches!(
            kernel_eval(&BM, &[2e6], &[0.5]),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn disk_kernel_boundary_and_center() {
        // vanishes on the sphere
        let v = kernel_eval(&DISK2, &[0.3, 0.0], &[1.0, 0.0]).unwrap();
        assert!(v.abs() < 1e-12, "boundary value {v}");
        let v = kernel_eval(&DISK2, &[0.3, 0.4], &[-0.6, 0.8]).unwrap();
        assert!(v.abs() < 1e-12, "boundary value {v}");
        // center value (1/2pi) ln(1/|y|) via the finite reflected form
        let v0 = kernel_eval(&DISK2, &[0.0, 0.0], &[0.5, 0.0]).unwrap();
        let expect = (2f64).ln() / TWO_PI;
        assert!((v0 - expect).abs() < 1e-15, "{v0} vs {expect}");
        // continuity of the x = 0 limit
        let v_eps = kernel_eval(&DISK2, &[1e-6, 0.0], &[0.5, 0.0]).unwrap();
        assert!((v_eps - expect).abs() < 1e-6);
        // dimension-3 center value C3 (|y|^-1 - 1)
        let v3 = kernel_eval(&DISK3, &[0.0; 3], &[0.5, 0.0, 0.0]).unwrap();
        let c3 = 1.0 / (4.0 * std::f64::consts::PI);
        assert!((v3 - c3).abs() < 1e-15);
    }

    #[test]
    fn kernel_eval_rejects_singular_and_out_of_domain() {
        assert!(matches!(
            kernel_eval(&DISK2, &[0.3, 0.1], &[0.3, 0.1]),
            Err(Error::SingularPair)
        ));
        assert!(matches!(
            kernel_eval(&DISK2, &[1.2, 0.0], &[0.0, 0.0]),
            Err(Error::OutOfDomain(_))
        ));
        assert!(matches!(
            kernel_eval(&DISK2, &[0.1], &[0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let newton2 = ContinuousKernel::NewtonPotential { dim: 2 };
        assert!(matches!(
            kernel_eval(&newton2, &[0.5, 0.5], &[0.5, 0.5]),
            Err(Error::SingularPair)
        ));
    }

    #[test]
    fn newton_values() {
        let newton2 = ContinuousKernel::NewtonPotential { dim: 2 };
        let v = kernel_eval(&newton2, &[0.0, 0.0], &[0.5, 0.0]).unwrap();
        assert!((v - (2f64).ln() / TWO_PI).abs() < 1e-15);
        let newton3 = ContinuousKernel::NewtonPotential { dim: 3 };
        let v = kernel_eval(&newton3, &[0.0; 3], &[0.0, 0.25, 0.0]).unwrap();
        assert!((v - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        // C_4 = Gamma(1) / (4 pi^2)
        let c4 = newton_constant(4);
        assert!((c4 - 1.0 / (4.0 * std::f64::consts::PI.powi(2))).abs() < 1e-16);
        let c5 = newton_constant(5);
        let expect5 = std::f64::consts::PI.sqrt() / 2.0
            / (4.0 * std::f64::consts::PI.powf(2.5));
        assert!((c5 - expect5).abs() < 1e-16);
    }

    #[test]
    fn restrict_interval_examples() {
        let k = restrict(&BM, &[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let expect = [[1.0, 1.0, 1.0], [1.0, 2.0, 2.0], [1.0, 2.0, 3.0]];
        for (i, row) in expect.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                assert_eq!(k.gram()[(i, j)], *want);
            }
        }
        assert_eq!(k.points(), &["1", "2", "3"]);

        let k = restrict(&BRIDGE, &[vec![0.25], vec![0.5], vec![0.75]]).unwrap();
        let expect = [
            [0.1875, 0.125, 0.0625],
            [0.125, 0.25, 0.125],
            [0.0625, 0.125, 0.1875],
        ];
        for (i, row) in expect.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                assert!((k.gram()[(i, j)] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn restrict_disk_grams_are_psd() {
        // deterministic scattered interior points, separation >= 0.05
        let pts2: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                let a = 0.61 * i as f64;
                let r = 0.15 + 0.07 * i as f64;
                vec![r * a.cos(), r * a.sin()]
            })
            .collect();
        let k = restrict(&DISK2, &pts2).unwrap();
        let rep = psd_check(&k);
        assert!(rep.is_psd, "min eig {}", rep.min_eigenvalue);

        let pts3: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                let a = 0.61 * i as f64;
                let r = 0.12 + 0.06 * i as f64;
                let z = 0.08 * (i as f64 - 4.5);
                vec![r * a.cos(), r * a.sin(), z]
            })
            .collect();
        let k = restrict(&DISK3, &pts3).unwrap();
        let rep = psd_check(&k);
        assert!(rep.is_psd, "min eig {}", rep.min_eigenvalue);

        let newton3 = ContinuousKernel::NewtonPotential { dim: 3 };
        let k = restrict(&newton3, &pts3).unwrap();
        assert!(psd_check(&k).is_psd);
    }

    #[test]
    fn restrict_rejects_bad_configurations() {
        assert!(matches!(
            restrict(&DISK2, &[vec![0.1, 0.0], vec![0.1 + 1e-9, 0.0]]),
            Err(Error::TooClose)
        ));
        assert!(matches!(
            restrict(&DISK2, &[vec![1.0, 0.0], vec![0.1, 0.0]]),
            Err(Error::OutOfDomain(_))
        ));
        assert!(matches!(
            restrict(
                &ContinuousKernel::DiskGreen { dim: 4 },
                &[vec![0.1, 0.0, 0.0, 0.0], vec![0.3, 0.0, 0.0, 0.0]]
            ),
            Err(Error::BadParameter(_))
        ));
    }

    #[test]
    fn bm_structure_examples() {
        let s = bm_restriction_structure(&[1.0, 2.0, 3.0]).unwrap();
        let expect =
            DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        assert!(max_diff(&s.inverse, &expect) < 1e-10);
        assert_eq!(s.conductances.len(), 2);
        assert!((s.conductances[0] - 1.0).abs() < 1e-10);
        assert!((s.conductances[1] - 1.0).abs() < 1e-10);

        let s = bm_restriction_structure(&[1.0, 3.0]).unwrap();
        assert!((s.conductances[0] - 0.5).abs() < 1e-10);

        let s = bm_restriction_structure(&[4.0]).unwrap();
        assert!((s.inverse[(0, 0)] - 0.25).abs() < 1e-12);
        assert!(s.conductances.is_empty());

        assert!(matches!(
            bm_restriction_structure(&[2.0, 1.0]),
            Err(Error::BadParameter(_))
        ));
    }

    #[test]
    fn resistance_closed_forms() {
        let r = restriction_resistance(&BM, &[vec![1.0], vec![2.5]]).unwrap();
        assert!((r.value("1", "2.5").unwrap() - 1.5).abs() < 1e-12);
        let r = restriction_resistance(&BRIDGE, &[vec![0.2], vec![0.6]]).unwrap();
        assert!((r.value("0.2", "0.6").unwrap() - 0.24).abs() < 1e-12);
        assert_eq!(r.value("0.2", "0.2").unwrap(), 0.0);
    }

    #[test]
    fn eigen_expansion_values() {
        // single term at s = t
        let v = eigen_expansion_partial(0.5, 0.5, 1).unwrap();
        let pi = std::f64::consts::PI;
        assert!((v - 2.0 / (pi * pi)).abs() < 1e-15);
        // convergence to the bridge kernel with the factor-2 normalization
        let v = eigen_expansion_partial(0.5, 0.5, 4000).unwrap();
        assert!((v - 0.25).abs() < 2.0 / (pi * pi * 4000.0) + 1e-12);
        let v = eigen_expansion_partial(0.25, 0.75, 2000).unwrap();
        assert!((v - 0.0625).abs() < 5e-4);
        assert!(matches!(
            eigen_expansion_partial(0.0, 0.5, 10),
            Err(Error::BadParameter(_))
        ));
    }

    #[test]
    fn weak_form_reproduces_test_functions() {
        let v = bridge_second_derivative_check(0.5, |t| t * (1.0 - t), 200).unwrap();
        assert!((v - 0.25).abs() < 1e-8, "{v}");
        let v = bridge_second_derivative_check(0.3, |_| 0.0, 200).unwrap();
        assert!(v.abs() < 1e-12);
        let v =
            bridge_second_derivative_check(0.25, |t| (std::f64::consts::PI * t).sin(), 200)
                .unwrap();
        let expect = (std::f64::consts::PI * 0.25).sin();
        assert!((v - expect).abs() < 1e-8, "{v} vs {expect}");
        assert!(matches!(
            bridge_second_derivative_check(0.0, |t| t, 200),
            Err(Error::OutOfDomain(_))
        ));
        assert!(matches!(
            bridge_second_derivative_check(0.5, |t| t, 10),
            Err(Error::BadParameter(_))
        ));
    }

    #[test]
    fn sampler_is_deterministic_and_centered() {
        let grid = [0.2, 0.4, 0.6, 0.8];
        let a = sample_bridge_paths(&grid, 64, 7).unwrap();
        let b = sample_bridge_paths(&grid, 64, 7).unwrap();
        assert_eq!(a.paths, b.paths);
        let c = sample_bridge_paths(&grid, 64, 8).unwrap();
        assert_ne!(a.paths, c.paths);
        // prefix stability: more paths extend, not reshuffle
        let d = sample_bridge_paths(&grid, 32, 7).unwrap();
        assert_eq!(&a.paths[..32], &d.paths[..]);

        let big = sample_bridge_paths(&grid, 4000, 7).unwrap();
        for entry in bridge_covariance_check(&big) {
            let z = (entry.empirical - entry.expected) / entry.standard_error;
            assert!(z.abs() < 6.0, "covariance z-score {z} at ({}, {})", entry.s, entry.t);
        }
    }

    #[test]
    fn sampler_rejects_bad_grids() {
        assert!(matches!(
            sample_bridge_paths(&[], 4, 0),
            Err(Error::BadParameter(_))
        ));
        assert!(matches!(
            sample_bridge_paths(&[0.5, 0.5], 4, 0),
            Err(Error::BadParameter(_))
        ));
        assert!(matches!(
            sample_bridge_paths(&[0.0, 0.5], 4, 0),
            Err(Error::BadParameter(_))
        ));
        assert!(matches!(
            sample_bridge_paths(&[0.5], 0, 0),
            Err(Error::BadParameter(_))
        ));
    }

    #[test]
    fn dirichlet_checks_center_cancellation() {
        // at x = 0 the image term is constant zero: K(0,y) - G(0,y) = 0
        let rep = dirichlet_kernel_checks(2, &[0.0, 0.0], 0.05).unwrap();
        assert!(rep.harmonic_residual < 1e-9, "{}", rep.harmonic_residual);
        assert!(rep.boundary_max < 1e-5);
    }

    #[test]
    fn dirichlet_checks_second_order_decay() {
        let x = [0.3, 0.0];
        let coarse = dirichlet_kernel_checks(2, &x, 0.02).unwrap();
        let fine = dirichlet_kernel_checks(2, &x, 0.01).unwrap();
        let ratio = coarse.harmonic_residual / fine.harmonic_residual;
        assert!(ratio >= 3.5, "dimension-2 refinement ratio {ratio}");
        assert!(coarse.boundary_max <= 1e-5);

        let x3 = [0.25, 0.1, -0.2];
        let coarse = dirichlet_kernel_checks(3, &x3, 0.04).unwrap();
        let fine = dirichlet_kernel_checks(3, &x3, 0.02).unwrap();
        let ratio = coarse.harmonic_residual / fine.harmonic_residual;
        assert!(ratio >= 3.2, "dimension-3 refinement ratio {ratio}");
    }

    #[test]
    fn dirichlet_checks_validate_inputs() {
        assert!(matches!(
            dirichlet_kernel_checks(4, &[0.0; 4], 0.05),
            Err(Error::BadParameter(_))
        ));
        assert!(matches!(
            dirichlet_kernel_checks(2, &[0.98, 0.0], 0.05),
            Err(Error::BadParameter(_))
        ));
    }
}
