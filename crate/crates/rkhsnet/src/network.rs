// Copyright 2026 rkhsnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Electrical networks: weighted graphs, the graph Laplacian and energy
//! form, dipole potentials, the induced network kernel, and the effective
//! resistance metric.
//!
//! A network is a connected graph with positive edge conductances. Grounding
//! a base vertex `o` makes the energy form an inner product on functions
//! vanishing at `o`; the dipole `v_x` (unit current in at `x`, out at `o`)
//! is the reproducing element of evaluation at `x`, and the Gram matrix of
//! the dipoles is the network kernel. This module is also the brute-force
//! oracle for the Gram machinery in [`crate::gram`] on network-induced
//! kernels: `finite_laplacian` of the network kernel must reproduce the
//! grounded graph Laplacian.
//!
//! The half-line ladder (conductances `R^-i` on edge `(i, i+1)`, `0<R<1`)
//! gets closed forms: its grounded kernel is geometric-series exact,
//! `k(i,j) = (1 - R^(i and j)) / (1 - R)` with the minimum in the exponent,
//! so truncation at any `n >= max(i,j)` is already exact (the dipole
//! potential only depends on edges below the meeting index).

use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gram::FiniteKernel;
use crate::linalg::{spd_solve_refined, SOLVE_TOL};

// ===========================================================================
// WeightedGraph
// ===========================================================================

/// A finite connected graph with positive symmetric edge conductances.
///
/// Vertices are identifier strings ordered by first appearance; all vector
/// and matrix views use that order. Self-loops and duplicate edges are
/// rejected at construction, as are nonpositive or non-finite conductances.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    /// One entry per undirected edge, endpoints in first-seen order.
    edges: Vec<(usize, usize, f64)>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    /// Build from undirected edges; vertex order is first appearance.
    pub fn from_edges(edges: &[(&str, &str, f64)]) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::BadParameter("graph has no edges".into()));
        }
        let mut vertices: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut intern = |name: &str, vertices: &mut Vec<String>| -> usize {
            if let Some(&i) = index.get(name) {
                i
            } else {
                let i = vertices.len();
                vertices.push(name.to_string());
                index.insert(name.to_string(), i);
                i
            }
        };
        let mut resolved = Vec::with_capacity(edges.len());
        let mut seen_pairs = std::collections::HashSet::new();
        for &(u, v, c) in edges {
            if u == v {
                return Err(Error::SelfLoop(u.to_string()));
            }
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::BadConductance(format!("{u} {v} {c}")));
            }
            let ui = intern(u, &mut vertices);
            let vi = intern(v, &mut vertices);
            if !seen_pairs.insert((ui.min(vi), ui.max(vi))) {
                return Err(Error::BadParameter(format!("duplicate edge {u} {v}")));
            }
            resolved.push((ui, vi, c));
        }
        let n = vertices.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v, c) in &resolved {
            adj[u].push((v, c));
            adj[v].push((u, c));
        }
        let g = WeightedGraph {
            vertices,
            index,
            edges: resolved,
            adj,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Vertex labels in storage (first-appearance) order.
    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edges as index triples `(u, v, conductance)`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Neighbors of a vertex with edge conductances.
    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adj[u]
    }

    /// Index of a vertex by label.
    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownPoint(name.to_string()))
    }

    /// Weighted degree `c(x) = sum of incident conductances`.
    pub fn weighted_degree(&self, u: usize) -> f64 {
        self.adj[u].iter().map(|&(_, c)| c).sum()
    }

    /// The graph is a tree exactly when it has `|V| - 1` edges (it is
    /// connected by construction).
    pub fn is_tree(&self) -> bool {
        self.edges.len() == self.vertices.len() - 1
    }
}

/// Parse a graph from edge-list text: one edge per line, three
/// whitespace-separated fields `u v c` with positive decimal conductance.
/// Lines starting with `#` and blank lines are ignored. Connectedness and
/// conductance positivity are checked; duplicate edges are parse errors.
pub fn load_graph(source: &str) -> Result<WeightedGraph> {
    let mut edges: Vec<(String, String, f64)> = Vec::new();
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    for (lineno, raw) in source.lines().enumerate() {
        let line = lineno + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::ParseError {
                line,
                msg: format!("expected 'u v c', got {} fields", fields.len()),
            });
        }
        let (u, v) = (fields[0], fields[1]);
        let c: f64 = fields[2].parse().map_err(|_| Error::ParseError {
            line,
            msg: format!("bad conductance '{}'", fields[2]),
        })?;
        if u == v {
            return Err(Error::SelfLoop(u.to_string()));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::BadConductance(format!("line {line}: {u} {v} {c}")));
        }
        let key = if u <= v {
            (u.to_string(), v.to_string())
        } else {
            (v.to_string(), u.to_string())
        };
        if seen.insert(key, line).is_some() {
            return Err(Error::ParseError {
                line,
                msg: format!("duplicate edge {u} {v}"),
            });
        }
        edges.push((u.to_string(), v.to_string(), c));
    }
    if edges.is_empty() {
        return Err(Error::ParseError {
            line: 0,
            msg: "no edges in input".into(),
        });
    }
    let borrowed: Vec<(&str, &str, f64)> =
        edges.iter().map(|(u, v, c)| (u.as_str(), v.as_str(), *c)).collect();
    WeightedGraph::from_edges(&borrowed)
}

// ===========================================================================
// Laplacian and energy form
// ===========================================================================

/// Apply the graph Laplacian: `(Lf)(x) = sum over y ~ x of c_xy (f(x) - f(y))`.
pub fn laplacian_apply(g: &WeightedGraph, f: &[f64]) -> Result<Vec<f64>> {
    let n = g.vertex_count();
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.len(),
        });
    }
    let mut out = vec![0.0; n];
    for (x, row) in g.adj.iter().enumerate() {
        out[x] = row.iter().map(|&(y, c)| c * (f[x] - f[y])).sum();
    }
    Ok(out)
}

/// The energy inner product `<h, f> = sum over undirected edges of
/// c_xy (h(x) - h(y)) (f(x) - f(y))`; half the double directed sum.
pub fn energy_inner(g: &WeightedGraph, h: &[f64], f: &[f64]) -> Result<f64> {
    let n = g.vertex_count();
    if h.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: h.len(),
        });
    }
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.len(),
        });
    }
    Ok(g.edges
        .iter()
        .map(|&(u, v, c)| c * (h[u] - h[v]) * (f[u] - f[v]))
        .sum())
}

/// Dense Laplacian matrix in vertex order.
pub fn laplacian_matrix(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.vertex_count();
    let mut m = DMatrix::zeros(n, n);
    for &(u, v, c) in &g.edges {
        m[(u, u)] += c;
        m[(v, v)] += c;
        m[(u, v)] -= c;
        m[(v, u)] -= c;
    }
    m
}

/// Laplacian with the base row and column deleted; strictly positive
/// definite on a connected graph. Row/column order is vertex order with
/// the base skipped.
pub fn grounded_laplacian(g: &WeightedGraph, base: &str) -> Result<DMatrix<f64>> {
    let o = g.index_of(base)?;
    let full = laplacian_matrix(g);
    let keep: Vec<usize> = (0..g.vertex_count()).filter(|&i| i != o).collect();
    let n = keep.len();
    Ok(DMatrix::from_fn(n, n, |i, j| full[(keep[i], keep[j])]))
}

// ===========================================================================
// Dipoles
// ===========================================================================

/// All dipole potentials of a network with a fixed base vertex.
///
/// The dipole `v_x` solves `L v_x = delta_x - delta_o` with `v_x(o) = 0`
/// (grounded representative: solutions are unique only up to constants).
/// Trees are solved by flow routing, which stays exact where factored
/// solves lose all digits on ladder-type conductance ranges; cyclic graphs
/// use a Cholesky factorization of the grounded Laplacian with one step of
/// iterative refinement.
#[derive(Debug, Clone)]
pub struct DipoleSystem {
    base: String,
    base_idx: usize,
    vertices: Vec<String>,
    /// `potentials[i]` is `v_x` for `x = non_base[i]`, as a full vertex
    /// vector including the zero at the base.
    potentials: Vec<Vec<f64>>,
    non_base: Vec<usize>,
}

impl DipoleSystem {
    /// Solve every dipole of `g` with base `o`.
    pub fn new(g: &WeightedGraph, base: &str) -> Result<Self> {
        let o = g.index_of(base)?;
        let non_base: Vec<usize> = (0..g.vertex_count()).filter(|&i| i != o).collect();
        let potentials: Vec<Vec<f64>> = if g.is_tree() {
            let tree = TreeData::new(g, o);
            non_base
                .par_iter()
                .map(|&x| tree.dipole(g, x))
                .collect()
        } else {
            let grounded = grounded_laplacian(g, base)?;
            let chol = grounded
                .clone()
                .cholesky()
                .expect("grounded Laplacian of a connected graph is positive definite");
            non_base
                .par_iter()
                .map(|&x| cholesky_dipole(g, &grounded, &chol, o, x))
                .collect()
        };
        for (&x, v) in non_base.iter().zip(&potentials) {
            verify_dipole_residual(g, v, x, o);
        }
        Ok(DipoleSystem {
            base: base.to_string(),
            base_idx: o,
            vertices: g.vertices().to_vec(),
            potentials,
            non_base,
        })
    }

    /// The base (grounded) vertex.
    pub fn base(&self) -> &str {
        &self.base
    }

    /// Non-base vertex labels in vertex order; the index set of the
    /// network kernel.
    pub fn points(&self) -> Vec<String> {
        self.non_base
            .iter()
            .map(|&i| self.vertices[i].clone())
            .collect()
    }

    /// The dipole potential of `x` as a full vertex vector (zero at base).
    pub fn potential(&self, x: &str) -> Result<&[f64]> {
        let xi = self
            .vertices
            .iter()
            .position(|l| l == x)
            .ok_or_else(|| Error::UnknownPoint(x.to_string()))?;
        if xi == self.base_idx {
            return Err(Error::DegenerateDipole);
        }
        let row = self
            .non_base
            .iter()
            .position(|&i| i == xi)
            .expect("non-base vertex is indexed");
        Ok(&self.potentials[row])
    }

    fn potential_by_row(&self, row: usize) -> &[f64] {
        &self.potentials[row]
    }
}

/// Rooted-tree scaffolding: parents, depths, and cumulative resistance
/// from the root, plus a root-first traversal order.
struct TreeData {
    parent: Vec<usize>,
    order: Vec<usize>,
    dist: Vec<f64>,
    on_path: Vec<bool>,
}

impl TreeData {
    fn new(g: &WeightedGraph, root: usize) -> Self {
        let n = g.vertex_count();
        let mut parent = vec![usize::MAX; n];
        let mut dist = vec![0.0; n];
        let mut order = Vec::with_capacity(n);
        parent[root] = root;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(v, c) in g.neighbors(u) {
                if parent[v] == usize::MAX && v != root {
                    parent[v] = u;
                    dist[v] = dist[u] + 1.0 / c;
                    queue.push_back(v);
                }
            }
        }
        TreeData {
            parent,
            order,
            dist,
            on_path: vec![false; n],
        }
    }

    /// `v_x(y)` is the cumulative resistance from the root to the deepest
    /// common ancestor of `x` and `y`: current flows only along the
    /// root-to-x path, so potentials are constant off it.
    fn dipole(&self, g: &WeightedGraph, x: usize) -> Vec<f64> {
        let n = g.vertex_count();
        let mut on_path = self.on_path.clone();
        let mut u = x;
        loop {
            on_path[u] = true;
            if self.parent[u] == u {
                break;
            }
            u = self.parent[u];
        }
        let mut v = vec![0.0; n];
        // Root-first order guarantees parents are finished before children.
        for &w in &self.order {
            v[w] = if on_path[w] {
                self.dist[w]
            } else {
                v[self.parent[w]]
            };
        }
        v
    }
}

fn cholesky_dipole(
    g: &WeightedGraph,
    grounded: &DMatrix<f64>,
    chol: &Cholesky<f64, Dyn>,
    o: usize,
    x: usize,
) -> Vec<f64> {
    let n = g.vertex_count();
    let pos = if x < o { x } else { x - 1 };
    let mut rhs = DVector::zeros(n - 1);
    rhs[pos] = 1.0;
    let sol = spd_solve_refined(chol, grounded, &rhs);
    let mut v = vec![0.0; n];
    let mut r = 0;
    for (i, vi) in v.iter_mut().enumerate() {
        if i != o {
            *vi = sol[r];
            r += 1;
        }
    }
    v
}

/// Componentwise backward-error check of `L v = delta_x - delta_o`. The
/// natural scale at vertex `y` is `c(y) * max|v|`: evaluating the Laplacian
/// in floating point already incurs errors of that order times machine
/// epsilon. Failure here is an internal error, not a user error.
fn verify_dipole_residual(g: &WeightedGraph, v: &[f64], x: usize, o: usize) {
    let vmax = v.iter().fold(0.0f64, |m, &a| m.max(a.abs()));
    let lv = laplacian_apply(g, v).expect("dipole has full dimension");
    for (y, &got) in lv.iter().enumerate() {
        let want = if y == x {
            1.0
        } else if y == o {
            -1.0
        } else {
            0.0
        };
        let scale = (g.weighted_degree(y) * vmax).max(1.0);
        assert!(
            (got - want).abs() <= SOLVE_TOL * scale,
            "dipole residual {} at vertex {} exceeds tolerance",
            (got - want).abs(),
            g.vertices()[y]
        );
    }
}

/// One dipole potential `v_x` with base `o`, as a full vertex vector.
pub fn dipole(g: &WeightedGraph, base: &str, x: &str) -> Result<Vec<f64>> {
    let o = g.index_of(base)?;
    let xi = g.index_of(x)?;
    if o == xi {
        return Err(Error::DegenerateDipole);
    }
    if g.is_tree() {
        let tree = TreeData::new(g, o);
        let v = tree.dipole(g, xi);
        verify_dipole_residual(g, &v, xi, o);
        return Ok(v);
    }
    let grounded = grounded_laplacian(g, base)?;
    let chol = grounded
        .clone()
        .cholesky()
        .expect("grounded Laplacian of a connected graph is positive definite");
    let v = cholesky_dipole(g, &grounded, &chol, o, xi);
    verify_dipole_residual(g, &v, xi, o);
    Ok(v)
}

// ===========================================================================
// Network kernel, delta expansion, resistance metric
// ===========================================================================

/// Gram matrix of the dipoles over the non-base vertices:
/// `k(x,y) = <v_x, v_y>` in the energy form. Each entry is cross-checked
/// against the reproducing shortcut `k(x,y) = v_x(y)` within the solve
/// tolerance; the two must agree or the solver is broken.
pub fn network_kernel(g: &WeightedGraph, base: &str) -> Result<FiniteKernel> {
    let sys = DipoleSystem::new(g, base)?;
    network_kernel_from(g, &sys)
}

/// As [`network_kernel`], reusing an already-solved dipole system.
pub fn network_kernel_from(g: &WeightedGraph, sys: &DipoleSystem) -> Result<FiniteKernel> {
    let points = sys.points();
    let m = points.len();
    let mut gram = DMatrix::zeros(m, m);
    for i in 0..m {
        let vi = sys.potential_by_row(i);
        for j in i..m {
            let vj = sys.potential_by_row(j);
            let by_energy = energy_inner(g, vi, vj)?;
            let by_eval = vi[sys.non_base[j]];
            assert!(
                (by_energy - by_eval).abs() <= SOLVE_TOL * by_eval.abs().max(1.0),
                "kernel entry ({i},{j}): energy {by_energy} vs evaluation {by_eval}"
            );
            gram[(i, j)] = by_energy;
            gram[(j, i)] = by_energy;
        }
    }
    FiniteKernel::new(points, gram)
}

/// Expansion of a Dirac mass over the dipole basis.
#[derive(Debug, Clone)]
pub struct DeltaExpansion {
    /// `(vertex label, coefficient)` pairs; terms on the base dipole are
    /// omitted since `v_o` is identically zero.
    pub coefficients: Vec<(String, f64)>,
    /// The weighted degree `c(x)`, which is also the squared energy norm
    /// of the Dirac mass.
    pub c_of_x: f64,
}

/// Finite expansion `delta_x = c(x) v_x - sum over y ~ x of c_xy v_y`.
///
/// For `x = o` the right-hand side (with `v_o = 0` dropping the leading
/// term) reconstructs `delta_o - 1` instead: the two differ by a constant,
/// which the energy form cannot see, so the energy identity
/// `||reconstruction||^2 = c(x)` holds at the base too.
pub fn delta_expansion(g: &WeightedGraph, base: &str, x: &str) -> Result<DeltaExpansion> {
    let o = g.index_of(base)?;
    let xi = g.index_of(x)?;
    let mut coefficients = Vec::new();
    if xi != o {
        coefficients.push((g.vertices()[xi].clone(), g.weighted_degree(xi)));
    }
    for &(y, c) in g.neighbors(xi) {
        if y != o {
            coefficients.push((g.vertices()[y].clone(), -c));
        }
    }
    Ok(DeltaExpansion {
        coefficients,
        c_of_x: g.weighted_degree(xi),
    })
}

/// Reconstruct the vertex function `sum coeff_y v_y` of an expansion.
pub fn expansion_reconstruct(
    g: &WeightedGraph,
    sys: &DipoleSystem,
    expansion: &DeltaExpansion,
) -> Result<Vec<f64>> {
    let mut f = vec![0.0; g.vertex_count()];
    for (label, coeff) in &expansion.coefficients {
        let v = sys.potential(label)?;
        for (fi, &vi) in f.iter_mut().zip(v) {
            *fi += coeff * vi;
        }
    }
    Ok(f)
}

/// Effective-resistance matrix over all vertices.
#[derive(Debug, Clone)]
pub struct ResistanceMatrix {
    vertices: Vec<String>,
    values: DMatrix<f64>,
}

impl ResistanceMatrix {
    /// Crate-internal constructor for resistance matrices computed from
    /// other kernel sources (continuum restrictions).
    pub(crate) fn from_parts(vertices: Vec<String>, values: DMatrix<f64>) -> Self {
        ResistanceMatrix { vertices, values }
    }

    /// Vertex labels indexing the matrix.
    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    /// The symmetric zero-diagonal matrix of resistances.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Resistance between two labeled vertices.
    pub fn value(&self, x: &str, y: &str) -> Result<f64> {
        let i = self
            .vertices
            .iter()
            .position(|l| l == x)
            .ok_or_else(|| Error::UnknownPoint(x.to_string()))?;
        let j = self
            .vertices
            .iter()
            .position(|l| l == y)
            .ok_or_else(|| Error::UnknownPoint(y.to_string()))?;
        Ok(self.values[(i, j)])
    }

    /// Worst triangle-inequality violation `R(x,z) - R(x,y) - R(y,z)` over
    /// all ordered triples; nonpositive (within tolerance) for a metric.
    pub fn triangle_defect(&self) -> f64 {
        let n = self.vertices.len();
        let mut worst = f64::NEG_INFINITY;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if x != y && y != z && x != z {
                        let d = self.values[(x, z)]
                            - self.values[(x, y)]
                            - self.values[(y, z)];
                        worst = worst.max(d);
                    }
                }
            }
        }
        worst
    }

    /// Quadratic form `sum_ij xi_i xi_j R(i,j)`; nonpositive on mean-zero
    /// vectors when the metric is conditionally negative definite.
    pub fn quadratic_form(&self, xi: &[f64]) -> Result<f64> {
        let n = self.vertices.len();
        if xi.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: xi.len(),
            });
        }
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += xi[i] * xi[j] * self.values[(i, j)];
            }
        }
        Ok(s)
    }
}

/// Effective resistance `R(x,y) = ||v_x - v_y||^2` in the energy form, with
/// `v_o` identically zero.
///
/// Asserts two reconstruction identities against the network kernel within
/// the solve tolerance: `k(x,y) = (R(o,x) + R(o,y) - R(x,y)) / 2` and
/// `R(x,y) = k(x,x) + k(y,y) - 2 k(x,y)`.
pub fn resistance_metric(g: &WeightedGraph, base: &str) -> Result<ResistanceMatrix> {
    let sys = DipoleSystem::new(g, base)?;
    let kernel = network_kernel_from(g, &sys)?;
    let n = g.vertex_count();
    let o = g.index_of(base)?;
    let zero = vec![0.0; n];
    let pots: Vec<&[f64]> = (0..n)
        .map(|i| {
            if i == o {
                zero.as_slice()
            } else {
                let row = sys.non_base.iter().position(|&v| v == i).expect("indexed");
                sys.potential_by_row(row)
            }
        })
        .collect();
    let mut values = DMatrix::zeros(n, n);
    let mut diff = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (vi, vj) = (pots[i], pots[j]);
            for k in 0..n {
                diff[k] = vi[k] - vj[k];
            }
            let r = energy_inner(g, &diff, &diff)?;
            values[(i, j)] = r;
            values[(j, i)] = r;
        }
    }
    // Reconstruction identities bind the metric to the kernel.
    let kidx = |i: usize| if i < o { i } else { i - 1 };
    for i in 0..n {
        for j in 0..n {
            if i == o || j == o || i == j {
                continue;
            }
            let k_ij = kernel.gram()[(kidx(i), kidx(j))];
            let lhs = 0.5 * (values[(o, i)] + values[(o, j)] - values[(i, j)]);
            assert!(
                (lhs - k_ij).abs() <= SOLVE_TOL * k_ij.abs().max(1.0),
                "polarization identity violated at ({i},{j})"
            );
            let r_form =
                kernel.gram()[(kidx(i), kidx(i))] + kernel.gram()[(kidx(j), kidx(j))] - 2.0 * k_ij;
            assert!(
                (r_form - values[(i, j)]).abs() <= SOLVE_TOL * values[(i, j)].abs().max(1.0),
                "kernel-difference identity violated at ({i},{j})"
            );
        }
    }
    Ok(ResistanceMatrix {
        vertices: g.vertices().to_vec(),
        values,
    })
}

// ===========================================================================
// Ladder closed forms
// ===========================================================================

/// The truncated half-line ladder on vertices `0..=n` with conductances
/// `c_(i,i+1) = r^-i`, so edge resistances form the geometric sequence
/// `r^i`.
pub fn ladder_graph(r: f64, n: usize) -> Result<WeightedGraph> {
    check_ladder_ratio(r)?;
    if n < 1 {
        return Err(Error::BadParameter("ladder needs n >= 1".into()));
    }
    let labels: Vec<String> = (0..=n).map(|i| i.to_string()).collect();
    let edges: Vec<(&str, &str, f64)> = (0..n)
        .map(|i| (labels[i].as_str(), labels[i + 1].as_str(), r.powi(-(i as i32))))
        .collect();
    WeightedGraph::from_edges(&edges)
}

/// Closed-form grounded ladder kernel on `{1, ..., n}` with base 0:
/// `k(i,j) = sum of edge resistances below the meeting index
/// = (1 - r^(i and j)) / (1 - r)` (minimum in the exponent).
///
/// Truncation is exact: the dipole `v_i` is constant beyond vertex `i`, so
/// entries with `max(i,j) <= n` never see the cut edge.
pub fn ladder_kernel(r: f64, n: usize) -> Result<FiniteKernel> {
    check_ladder_ratio(r)?;
    if n < 1 {
        return Err(Error::BadParameter("ladder kernel needs n >= 1".into()));
    }
    let labels: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    let gram = DMatrix::from_fn(n, n, |i, j| {
        let m = (i.min(j) + 1) as i32;
        (1.0 - r.powi(m)) / (1.0 - r)
    });
    FiniteKernel::new(labels, gram)
}

/// Ladder Laplacian in closed form on a function over `{0, ..., n}`:
/// `(Lf)(i) = r^(-i+1) (f(i) - f(i-1)) + r^(-i) (f(i) - f(i+1))` with the
/// boundary rows keeping only the existing neighbor.
pub fn ladder_laplacian_apply(r: f64, f: &[f64]) -> Result<Vec<f64>> {
    check_ladder_ratio(r)?;
    if f.is_empty() {
        return Err(Error::BadParameter("empty vertex function".into()));
    }
    let n = f.len() - 1;
    let mut out = vec![0.0; f.len()];
    for i in 0..=n {
        let mut acc = 0.0;
        if i > 0 {
            acc += r.powi(-(i as i32) + 1) * (f[i] - f[i - 1]);
        }
        if i < n {
            acc += r.powi(-(i as i32)) * (f[i] - f[i + 1]);
        }
        out[i] = acc;
    }
    Ok(out)
}

fn check_ladder_ratio(r: f64) -> Result<()> {
    if !(r.is_finite() && 0.0 < r && r < 1.0) {
        return Err(Error::BadParameter(format!(
            "ladder ratio must lie in (0,1), got {r}"
        )));
    }
    Ok(())
}

// ===========================================================================
// Tests
// ===========================================================================
