// Copyright 2026 rkhsnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Property-based invariants across the public API.
//!
//! Each property states a mathematical identity the library promises and
//! checks it on randomized inputs. Tolerances are the documented contract
//! values, not retuned per test.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rkhsnet::continuum::{
    bm_restriction_structure, eigen_expansion_partial, kernel_eval, point_label, restrict,
    restriction_resistance, sample_bridge_paths, ContinuousKernel,
};
use rkhsnet::gram::{
    finite_laplacian, max_diagonal_perturbation, membership_diagnostic, membership_value,
    restriction_min_norm, Exhaustion, FiniteKernel, Verdict, CAUCHY_TOL,
};
use rkhsnet::linalg::{eig_extrema, max_diff};
use rkhsnet::network::{
    delta_expansion, energy_inner, expansion_reconstruct, grounded_laplacian, network_kernel,
    resistance_metric, DipoleSystem, WeightedGraph,
};
use rkhsnet::semigroup::{
    green_by_quadrature, green_from_semigroup, heat_kernel, semigroup_defect, spectral_decompose,
};

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

/// Connected weighted graph: a random spanning tree over `n` vertices plus a
/// few extra edges, conductances in [0.1, 10].
fn graph_strategy(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2usize..=max_n)
        .prop_flat_map(|n| {
            let parents: Vec<BoxedStrategy<usize>> = (1..n).map(|i| (0..i).boxed()).collect();
            let tree_c = proptest::collection::vec(0.1f64..10.0, n - 1);
            let extras = proptest::collection::vec((0usize..n, 0usize..n, 0.1f64..10.0), 0..4);
            (Just(n), parents, tree_c, extras)
        })
        .prop_map(|(n, parents, tree_c, extras)| build_graph(n, &parents, &tree_c, &extras))
}

fn build_graph(
    n: usize,
    parents: &[usize],
    tree_c: &[f64],
    extras: &[(usize, usize, f64)],
) -> WeightedGraph {
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut edges: Vec<(String, String, f64)> = Vec::new();
    for (i, (&p, &c)) in parents.iter().zip(tree_c).enumerate() {
        let u = i + 1;
        seen.insert((p.min(u), p.max(u)));
        edges.push((names[p].clone(), names[u].clone(), c));
    }
    for &(u, v, c) in extras {
        if u == v || !seen.insert((u.min(v), u.max(v))) {
            continue;
        }
        edges.push((names[u].clone(), names[v].clone(), c));
    }
    let refs: Vec<(&str, &str, f64)> = edges
        .iter()
        .map(|(u, v, c)| (u.as_str(), v.as_str(), *c))
        .collect();
    WeightedGraph::from_edges(&refs).expect("construction yields a valid connected graph")
}

/// Strictly positive definite Gram on `p0..p{n-1}`: B^T B plus a ridge.
fn pd_gram(max_n: usize) -> impl Strategy<Value = FiniteKernel> {
    (2usize..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |data| {
            let b = DMatrix::from_row_slice(n, n, &data);
            let gram = b.transpose() * &b + DMatrix::identity(n, n) * 0.1;
            let labels = (0..n).map(|i| format!("p{i}")).collect();
            FiniteKernel::new(labels, gram).expect("ridge makes the Gram admissible")
        })
    })
}

/// Distinct points in (0, 1) for bridge restrictions, sorted ascending.
fn bridge_points(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::btree_set(1u32..1000, 2..=max_n)
        .prop_map(|s| s.into_iter().map(|k| f64::from(k) / 1000.0).collect())
}

/// Distinct points in (0, 2) for Brownian motion restrictions.
fn bm_points(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::btree_set(1u32..2000, 2..=max_n)
        .prop_map(|s| s.into_iter().map(|k| f64::from(k) / 1000.0).collect())
}

/// Points in the open unit disk with pairwise separation and a boundary
/// margin, so restrictions are well conditioned.
fn disk_points(max_n: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
    proptest::collection::vec((0.0f64..0.85, 0.0f64..std::f64::consts::TAU), 2..=max_n).prop_map(
        |polar| {
            let mut pts: Vec<[f64; 2]> = Vec::new();
            for (r, th) in polar {
                let p = [r * th.cos(), r * th.sin()];
                if pts
                    .iter()
                    .all(|q| ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt() > 0.05)
                {
                    pts.push(p);
                }
            }
            pts
        },
    )
}

fn mean_zero(mut v: Vec<f64>) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in &mut v {
        *x -= mean;
    }
    v
}

// ---------------------------------------------------------------------------
// Membership and Gram properties
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Membership values over nested prefix subsets never decrease.
    #[test]
    fn membership_monotone_under_growth(kernel in pd_gram(10)) {
        let labels = kernel.points().to_vec();
        let n = labels.len();
        let mut prev = f64::NEG_INFINITY;
        for m in 1..=n {
            let sub = kernel.submatrix(&labels[..m]).unwrap();
            let v = membership_value(&sub, &labels[0]).unwrap();
            prop_assert!(v + 1e-9 >= prev, "membership dropped: {} -> {} at size {}", prev, v, m);
            prev = v;
        }
    }

    /// The target component of any coefficient vector obeys the duality
    /// bound |xi_x|^2 <= membership(x) * xi^T K xi.
    #[test]
    fn membership_dominates_coefficients(
        kernel in pd_gram(10),
        raw in proptest::collection::vec(-2.0f64..2.0, 10),
    ) {
        let n = kernel.points().len();
        let xi = DVector::from_column_slice(&raw[..n]);
        let target = &kernel.points()[0];
        let mv = membership_value(&kernel, target).unwrap();
        let quad = xi.dot(&(kernel.gram() * &xi));
        prop_assert!(
            xi[0] * xi[0] <= mv * quad * (1.0 + 1e-9) + 1e-9,
            "coefficient bound violated: {} > {} * {}",
            xi[0] * xi[0], mv, quad
        );
    }

    /// The induced Laplacian inverts the Gram matrix.
    #[test]
    fn laplacian_inverts_gram(kernel in pd_gram(12)) {
        let lap = finite_laplacian(&kernel).unwrap();
        let n = kernel.points().len();
        let defect = max_diff(&(&lap * kernel.gram()), &DMatrix::identity(n, n));
        prop_assert!(defect <= 1e-8, "L*K deviates from identity by {}", defect);
    }

    /// The maximal diagonal perturbation is the reciprocal of the membership
    /// value.
    #[test]
    fn perturbation_reciprocal_of_membership(kernel in pd_gram(8)) {
        for target in kernel.points() {
            let eps = max_diagonal_perturbation(&kernel, target).unwrap();
            let mv = membership_value(&kernel, target).unwrap();
            prop_assert!(
                (eps * mv - 1.0).abs() <= 1e-6,
                "eps * membership = {} for {}",
                eps * mv, target
            );
        }
    }

    /// Minimum-norm interpolation agrees with the submatrix quadratic form.
    #[test]
    fn min_norm_matches_submatrix_form(
        kernel in pd_gram(12),
        raw in proptest::collection::vec(-2.0f64..2.0, 12),
        keep in proptest::collection::vec(any::<bool>(), 12),
    ) {
        let labels = kernel.points().to_vec();
        let subset: Vec<String> = labels
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(l, _)| l.clone())
            .collect();
        prop_assume!(!subset.is_empty());
        let values: Vec<f64> = raw[..subset.len()].to_vec();
        let got = restriction_min_norm(&kernel, &subset, &values).unwrap();

        let sub = kernel.submatrix(&subset).unwrap();
        let phi = DVector::from_column_slice(&values);
        let chol = sub.gram().clone().cholesky().unwrap();
        let direct = phi.dot(&chol.solve(&phi));
        let scale = direct.abs().max(1.0);
        prop_assert!(
            (got - direct).abs() <= 1e-9 * scale,
            "min-norm {} vs direct {}",
            got, direct
        );
    }
}

// ---------------------------------------------------------------------------
// Network properties
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Dipole potentials reproduce increments: <v_x, f>_E = f(x) - f(base).
    #[test]
    fn dipoles_reproduce_increments(
        graph in graph_strategy(12),
        raw in proptest::collection::vec(-1.0f64..1.0, 12),
    ) {
        let base = graph.vertices()[0].clone();
        let system = DipoleSystem::new(&graph, &base).unwrap();
        let f = &raw[..graph.vertex_count()];
        for (i, x) in graph.vertices().iter().enumerate() {
            if *x == base {
                continue;
            }
            let v = system.potential(x).unwrap();
            let inner = energy_inner(&graph, v, f).unwrap();
            let increment = f[i] - f[0];
            prop_assert!(
                (inner - increment).abs() <= 1e-9 * increment.abs().max(1.0),
                "<v_{}, f> = {}, increment = {}",
                x, inner, increment
            );
        }
    }

    /// Kernel entries are energy inner products of dipole potentials.
    #[test]
    fn kernel_entries_are_dipole_inners(graph in graph_strategy(10)) {
        let base = graph.vertices()[0].clone();
        let system = DipoleSystem::new(&graph, &base).unwrap();
        let kernel = network_kernel(&graph, &base).unwrap();
        let points = kernel.points().to_vec();
        for (i, x) in points.iter().enumerate() {
            for (j, y) in points.iter().enumerate() {
                let vx = system.potential(x).unwrap();
                let vy = system.potential(y).unwrap();
                let inner = energy_inner(&graph, vx, vy).unwrap();
                let k = kernel.gram()[(i, j)];
                prop_assert!(
                    (inner - k).abs() <= 1e-9 * k.abs().max(1.0),
                    "entry ({},{}): inner {} vs kernel {}",
                    x, y, inner, k
                );
            }
        }
    }

    /// The induced Laplacian of the network kernel is the grounded Laplacian.
    #[test]
    fn network_kernel_inverts_to_grounded_laplacian(graph in graph_strategy(12)) {
        let base = graph.vertices()[0].clone();
        let kernel = network_kernel(&graph, &base).unwrap();
        let lap = finite_laplacian(&kernel).unwrap();
        let grounded = grounded_laplacian(&graph, &base).unwrap();
        let defect = max_diff(&lap, &grounded);
        prop_assert!(defect <= 1e-8, "Laplacian mismatch {}", defect);
    }

    /// The unit-current expansion of delta_x carries energy c(x).
    #[test]
    fn delta_expansion_energy_is_degree(graph in graph_strategy(12)) {
        let base = graph.vertices()[0].clone();
        let system = DipoleSystem::new(&graph, &base).unwrap();
        for (u, x) in graph.vertices().iter().enumerate() {
            if *x == base {
                continue;
            }
            let expansion = delta_expansion(&graph, &base, x).unwrap();
            let f = expansion_reconstruct(&graph, &system, &expansion).unwrap();
            let energy = energy_inner(&graph, &f, &f).unwrap();
            let degree = graph.weighted_degree(u);
            prop_assert!(
                (energy - degree).abs() <= 1e-9 * degree.max(1.0),
                "energy {} vs degree {} at {}",
                energy, degree, x
            );
        }
    }

    /// Effective resistance is a metric, vanishes on the diagonal, satisfies
    /// the kernel reconstruction identity, and is conditionally negative
    /// definite.
    #[test]
    fn resistance_is_a_cnd_metric(
        graph in graph_strategy(12),
        raw in proptest::collection::vec(-1.0f64..1.0, 12),
    ) {
        let base = graph.vertices()[0].clone();
        let resistance = resistance_metric(&graph, &base).unwrap();
        let kernel = network_kernel(&graph, &base).unwrap();
        let n = graph.vertex_count();

        prop_assert!(resistance.triangle_defect() <= 1e-9);
        let entry = |x: &str, y: &str| -> f64 {
            let ix = kernel.points().iter().position(|p| p == x);
            let iy = kernel.points().iter().position(|p| p == y);
            match (ix, iy) {
                (Some(i), Some(j)) => kernel.gram()[(i, j)],
                _ => 0.0,
            }
        };
        for x in graph.vertices() {
            prop_assert_eq!(resistance.value(x, x).unwrap(), 0.0);
            for y in graph.vertices() {
                let r = resistance.value(x, y).unwrap();
                let recon = entry(x, x) + entry(y, y) - 2.0 * entry(x, y);
                prop_assert!(
                    (r - recon).abs() <= 1e-10 * r.abs().max(1.0),
                    "reconstruction defect at ({},{}): {} vs {}",
                    x, y, r, recon
                );
                prop_assert!((r - resistance.value(y, x).unwrap()).abs() <= 1e-12);
            }
        }

        let xi = mean_zero(raw[..n].to_vec());
        let quad = resistance.quadratic_form(&xi).unwrap();
        prop_assert!(quad <= 1e-9, "mean-zero quadratic form positive: {}", quad);
    }
}

// ---------------------------------------------------------------------------
// Continuum properties
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Brownian motion restrictions invert to a tridiagonal chain whose
    /// conductances are reciprocal gaps, grounded at the origin through the
    /// first diagonal entry.
    #[test]
    fn bm_inverse_is_reciprocal_gap_chain(points in bm_points(10)) {
        let structure = bm_restriction_structure(&points).unwrap();
        prop_assert_eq!(structure.conductances.len(), points.len() - 1);
        for (i, w) in points.windows(2).enumerate() {
            let gap = w[1] - w[0];
            let c = structure.conductances[i];
            prop_assert!(
                (c - 1.0 / gap).abs() <= 1e-9 / gap,
                "conductance {} vs reciprocal gap {}",
                c, 1.0 / gap
            );
        }
        let boundary = 1.0 / points[0];
        let expected_head = boundary
            + structure.conductances.first().copied().unwrap_or(0.0);
        let head = structure.inverse[(0, 0)];
        prop_assert!(
            (head - expected_head).abs() <= 1e-9 * expected_head,
            "grounded head diagonal {} vs {}",
            head, expected_head
        );
    }

    /// Interval resistances match the closed forms |x - y| and d(1 - d).
    #[test]
    fn interval_resistances_match_closed_forms(
        bm in bm_points(8),
        bri in bridge_points(8),
    ) {
        let lift = |pts: &[f64]| -> Vec<Vec<f64>> { pts.iter().map(|&x| vec![x]).collect() };
        let r_bm = restriction_resistance(&ContinuousKernel::BrownianMotion, &lift(&bm)).unwrap();
        for (i, &x) in bm.iter().enumerate() {
            for &y in &bm[i + 1..] {
                let r = r_bm.value(&point_label(&[x]), &point_label(&[y])).unwrap();
                let exact = (x - y).abs();
                prop_assert!((r - exact).abs() <= 1e-12 * exact.max(1.0));
            }
        }
        let r_bri =
            restriction_resistance(&ContinuousKernel::BrownianBridge, &lift(&bri)).unwrap();
        for (i, &x) in bri.iter().enumerate() {
            for &y in &bri[i + 1..] {
                let d = (x - y).abs();
                let r = r_bri.value(&point_label(&[x]), &point_label(&[y])).unwrap();
                let exact = d * (1.0 - d);
                prop_assert!((r - exact).abs() <= 1e-12 * exact.max(1.0));
            }
        }
    }

    /// Eigen-expansion partial sums stay within the analytic tail bound.
    #[test]
    fn eigen_expansion_within_tail_bound(
        s in 0.01f64..0.99,
        t in 0.01f64..0.99,
        n in 1usize..3000,
    ) {
        let partial = eigen_expansion_partial(s, t, n).unwrap();
        let exact = s.min(t) - s * t;
        let bound = 2.0 / (std::f64::consts::PI.powi(2) * n as f64) + 1e-12;
        prop_assert!(
            (partial - exact).abs() <= bound,
            "partial sum error {} exceeds bound {} at N = {}",
            (partial - exact).abs(), bound, n
        );
    }

    /// Disk Green restrictions are positive semidefinite.
    #[test]
    fn disk_green_restrictions_are_psd(points in disk_points(6)) {
        prop_assume!(points.len() >= 2);
        for dim in [2u32, 3] {
            let lifted: Vec<Vec<f64>> = points
                .iter()
                .map(|p| {
                    if dim == 2 {
                        vec![p[0], p[1]]
                    } else {
                        vec![p[0], p[1], 0.0]
                    }
                })
                .collect();
            let kernel = restrict(&ContinuousKernel::DiskGreen { dim }, &lifted).unwrap();
            let (lo, hi) = eig_extrema(kernel.gram());
            prop_assert!(
                lo >= -1e-9 * hi.max(1.0),
                "dim {}: minimum eigenvalue {} against maximum {}",
                dim, lo, hi
            );
        }
    }

    /// Path sampling is deterministic in the seed and prefix-stable in the
    /// path count.
    #[test]
    fn sampler_deterministic_and_prefix_stable(
        grid in bridge_points(6),
        n_paths in 1usize..16,
        seed in any::<u64>(),
    ) {
        let a = sample_bridge_paths(&grid, n_paths, seed).unwrap();
        let b = sample_bridge_paths(&grid, n_paths, seed).unwrap();
        prop_assert_eq!(&a.paths, &b.paths);
        let longer = sample_bridge_paths(&grid, n_paths + 3, seed).unwrap();
        prop_assert_eq!(&longer.paths[..n_paths], &a.paths[..]);
        for path in &a.paths {
            prop_assert_eq!(path.len(), grid.len());
            prop_assert!(path.iter().all(|v| v.is_finite()));
        }
    }
}

// ---------------------------------------------------------------------------
// Semigroup properties
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Heat kernels satisfy Chapman-Kolmogorov and stay positive definite.
    #[test]
    fn heat_kernels_compose_and_stay_positive(
        graph in graph_strategy(10),
        s in 0.01f64..3.0,
        t in 0.01f64..3.0,
    ) {
        let base = graph.vertices()[0].clone();
        let lap = grounded_laplacian(&graph, &base).unwrap();
        let decomposition = spectral_decompose(&lap).unwrap();
        let defect = semigroup_defect(&decomposition, s, t).unwrap();
        prop_assert!(defect <= 1e-10, "composition defect {}", defect);
        // e^(-lambda t) can underflow below rounding noise of the larger
        // spectral components, so positivity is certified up to that noise.
        let (lo, hi) = eig_extrema(&heat_kernel(&decomposition, s).unwrap());
        prop_assert!(
            lo >= -1e-12 * hi.max(1.0),
            "heat kernel lost positivity: {}",
            lo
        );
    }

    /// The spectral Green matrix inverts the grounded Laplacian and agrees
    /// with time quadrature after normalizing the spectral floor.
    #[test]
    fn green_matrix_consistency(graph in graph_strategy(10)) {
        let base = graph.vertices()[0].clone();
        let mut lap = grounded_laplacian(&graph, &base).unwrap();
        let (lo, _) = eig_extrema(&lap);
        lap *= 0.5 / lo;
        let decomposition = spectral_decompose(&lap).unwrap();
        let green = green_from_semigroup(&decomposition).unwrap();
        let n = lap.nrows();
        let inv_defect = max_diff(&(&green * &lap), &DMatrix::identity(n, n));
        prop_assert!(inv_defect <= 1e-8, "K*L defect {}", inv_defect);
        let quad = green_by_quadrature(&decomposition, 10_000).unwrap();
        let q_defect = max_diff(&green, &quad);
        prop_assert!(q_defect <= 1e-6, "quadrature defect {}", q_defect);
    }
}

// ---------------------------------------------------------------------------
// Deterministic schedule behavior
// ---------------------------------------------------------------------------

/// Membership of an isolated point under dyadic refinement of a far cluster:
/// the value is pinned by the nearest neighbors, so every schedule converges
/// to the same limit 1/0.1 + 1/0.5 = 12.
#[test]
fn membership_refinement_schedules_agree() {
    let kernel = ContinuousKernel::BrownianBridge;
    let eval = |a: &f64, b: &f64| kernel_eval(&kernel, &[*a], &[*b]).unwrap();
    let schedule = |depths: &[u32]| -> Vec<Vec<f64>> {
        depths
            .iter()
            .map(|&k| {
                let mut pts = vec![0.5];
                for j in 0..=(1u32 << k) {
                    pts.push(0.6 + 0.3 * f64::from(j) / f64::from(1u32 << k));
                }
                pts
            })
            .collect()
    };
    let mut limits = Vec::new();
    for depths in [
        vec![0, 1, 2, 3, 4],
        vec![1, 3, 5, 6],
        vec![0, 2, 4, 6],
        vec![2, 3, 4, 5],
    ] {
        let exhaustion = Exhaustion::from_subsets(schedule(&depths)).unwrap();
        let diag = membership_diagnostic(eval, &exhaustion, "0.5", 16).unwrap();
        match diag.verdict {
            Verdict::Converged { limit } => limits.push(limit),
            other => panic!("schedule {depths:?} gave {other:?}"),
        }
    }
    for &limit in &limits {
        assert!(
            (limit - 12.0).abs() <= 1e-9,
            "limit {limit} deviates from 12"
        );
        assert!((limit - limits[0]).abs() <= CAUCHY_TOL);
    }
}

/// Points accumulating geometrically at the target drive the membership
/// values beyond the divergence cap.
#[test]
fn membership_diverges_on_accumulating_points() {
    let kernel = ContinuousKernel::BrownianBridge;
    let eval = |a: &f64, b: &f64| kernel_eval(&kernel, &[*a], &[*b]).unwrap();
    let mut subsets = Vec::new();
    let mut pts = vec![0.5, 0.75];
    subsets.push(pts.clone());
    for k in 2..=23 {
        pts.push(0.5 + 4.0f64.powi(-k));
        subsets.push(pts.clone());
    }
    let exhaustion = Exhaustion::from_subsets(subsets).unwrap();
    let diag = membership_diagnostic(eval, &exhaustion, "0.5", 30).unwrap();
    assert_eq!(diag.verdict, Verdict::Diverged, "values: {:?}", diag.values);
}
