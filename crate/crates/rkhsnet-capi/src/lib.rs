// Copyright 2026 rkhsnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! C ABI for the rkhsnet toolkit.
//!
//! Conventions:
//! - Every fallible call returns an [`RkStatus`]; `RK_STATUS_OK` is zero.
//! - On failure a thread-local message is set; fetch it with
//!   [`rkhsnet_last_error_message`]. The pointer stays valid until the
//!   next failing call on the same thread.
//! - Graphs and kernels are opaque handles created and destroyed by this
//!   library; `*_free` accepts null as a no-op.
//! - Name pointers returned by the `*_name` accessors borrow from the
//!   handle and die with it.
//! - Matrix buffers are caller-allocated, row-major, with an explicit
//!   length parameter that must match exactly.
//! - Panics never unwind across the boundary; they surface as
//!   `RK_STATUS_INTERNAL_ERROR`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rkhsnet::continuum::{restrict, sample_bridge_paths, ContinuousKernel};
use rkhsnet::error::Error;
use rkhsnet::gram::{max_diagonal_perturbation, membership_value, psd_check, FiniteKernel};
use rkhsnet::network::{ladder_kernel, load_graph, network_kernel, resistance_metric, WeightedGraph};
use rkhsnet::semigroup::{green_from_semigroup, heat_kernel, spectral_decompose};

/// Result of every fallible call in this ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RkStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    Utf8Error = 2,
    /// An argument value was rejected (bad dimension, unknown point,
    /// out-of-domain coordinate, bad buffer length, ...).
    InvalidArgument = 3,
    /// Text input could not be parsed.
    ParseError = 4,
    /// The graph is not connected.
    Disconnected = 5,
    /// A numeric precondition failed (singular or indefinite matrix,
    /// coincident points of a singular kernel, ...).
    NumericError = 6,
    /// An I/O operation failed.
    IoError = 7,
    /// An internal invariant was violated; please report.
    InternalError = 8,
}

/// Opaque weighted-graph handle.
pub struct RkGraph {
    graph: WeightedGraph,
    names: Vec<CString>,
}

/// Opaque finite-kernel handle (points plus Gram matrix).
pub struct RkKernel {
    kernel: FiniteKernel,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs stripped");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: RkStatus, msg: &str) -> RkStatus {
    set_error(msg);
    status
}

fn map_error(e: &Error) -> RkStatus {
    match e {
        Error::ParseError { .. } => RkStatus::ParseError,
        Error::Disconnected => RkStatus::Disconnected,
        Error::Io(_) => RkStatus::IoError,
        Error::SingularGram
        | Error::SingularPair
        | Error::NotSymmetric
        | Error::NotPositive
        | Error::NotInvertible
        | Error::DegenerateDipole => RkStatus::NumericError,
        _ => RkStatus::InvalidArgument,
    }
}

fn fail_with(e: Error) -> RkStatus {
    fail(map_error(&e), &e.to_string())
}

/// Run an ABI body, translating panics into `InternalError`.
fn guarded(f: impl FnOnce() -> RkStatus) -> RkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(RkStatus::InternalError, "internal invariant violated"),
    }
}

unsafe fn cstr_arg<'a>(p: *const c_char) -> Result<&'a str, RkStatus> {
    if p.is_null() {
        return Err(fail(RkStatus::NullArgument, "string argument is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(RkStatus::Utf8Error, "string argument is not UTF-8"))
}

unsafe fn graph_arg<'a>(p: *const RkGraph) -> Result<&'a RkGraph, RkStatus> {
    p.as_ref()
        .ok_or_else(|| fail(RkStatus::NullArgument, "graph handle is null"))
}

unsafe fn kernel_arg<'a>(p: *const RkKernel) -> Result<&'a RkKernel, RkStatus> {
    p.as_ref()
        .ok_or_else(|| fail(RkStatus::NullArgument, "kernel handle is null"))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), RkStatus> {
    if p.is_null() {
        Err(fail(RkStatus::NullArgument, &format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn names_of(labels: &[String]) -> Vec<CString> {
    labels
        .iter()
        .map(|l| CString::new(l.replace('\0', " ")).expect("NULs stripped"))
        .collect()
}

fn kernel_handle_out(k: FiniteKernel, out: *mut *mut RkKernel) -> RkStatus {
    let names = names_of(k.points());
    let h = Box::new(RkKernel { kernel: k, names });
    unsafe { *out = Box::into_raw(h) };
    RkStatus::Ok
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn rkhsnet_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent failure on this thread, or null if none.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rkhsnet_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parse an edge-list graph ("u v conductance" per line, '#' comments).
///
/// # Safety
///
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
/// On `Ok` the caller owns the handle and must release it with
/// [`rkhsnet_graph_free`].
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_graph_parse(
    text: *const c_char,
    out: *mut *mut RkGraph,
) -> RkStatus {
    guarded(|| {
        let text = match cstr_arg(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        if let Err(s) = out_ptr(out, "output handle") {
            return s;
        }
        match load_graph(text) {
            Ok(graph) => {
                let names = names_of(graph.vertices());
                *out = Box::into_raw(Box::new(RkGraph { graph, names }));
                RkStatus::Ok
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Release a graph handle; null is a no-op.
///
/// # Safety
///
/// `g` must be null or a handle from [`rkhsnet_graph_parse`] not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_graph_free(g: *mut RkGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of vertices.
///
/// # Safety
///
/// `g` must be a live graph handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_graph_vertex_count(
    g: *const RkGraph,
    out: *mut usize,
) -> RkStatus {
    guarded(|| {
        let h = match graph_arg(g) {
            Ok(h) => h,
            Err(s) => return s,
        };
        if let Err(s) = out_ptr(out, "output count") {
            return s;
        }
        *out = h.graph.vertex_count();
        RkStatus::Ok
    })
}

/// Name of the vertex at `index`, or null if out of range. The pointer
/// borrows from the handle.
///
/// # Safety
///
/// `g` must be a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_graph_vertex_name(
    g: *const RkGraph,
    index: usize,
) -> *const c_char {
    let Ok(h) = graph_arg(g) else {
        return ptr::null();
    };
    match h.names.get(index) {
        Some(n) => n.as_ptr(),
        None => {
            set_error("vertex index out of range");
            ptr::null()
        }
    }
}

/// Resistance metric of the graph into a caller buffer of exactly
/// `vertex_count * vertex_count` doubles, row-major in vertex order.
///
/// # Safety
///
/// `g` must be a live graph handle, `base` a NUL-terminated string, and
/// `out` a buffer of at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_graph_resistance(
    g: *const RkGraph,
    base: *const c_char,
    out: *mut f64,
    len: usize,
) -> RkStatus {
    guarded(|| {
        let h = match graph_arg(g) {
            Ok(h) => h,
            Err(s) => return s,
        };
        let base = match cstr_arg(base) {
            Ok(b) => b,
            Err(s) => return s,
        };
        if let Err(s) = out_ptr(out, "output buffer") {
            return s;
        }
        let n = h.graph.vertex_count();
        if len != n * n {
            return fail(
                RkStatus::InvalidArgument,
                &format!("buffer holds {len} doubles, need {}", n * n),
            );
        }
        match resistance_metric(&h.graph, base) {
            Ok(r) => {
                let m = r.matrix();
                for i in 0..n {
                    for j in 0..n {
                        *out.add(i * n + j) = m[(i, j)];
                    }
                }
                RkStatus::Ok
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Kernel of the graph grounded at `base`: one point per non-base vertex.
///
/// # Safety
///
/// `g` must be a live graph handle, `base` a NUL-terminated string, and
/// `out` a valid pointer; on `Ok` the caller owns the kernel handle.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_network_kernel(
    g: *const RkGraph,
    base: *const c_char,
    out: *mut *mut RkKernel,
) -> RkStatus {
    guarded(|| {
        let h = match graph_arg(g) {
            Ok(h) => h,
            Err(s) => return s,
        };
        let base = match cstr_arg(base) {
            Ok(b) => b,
            Err(s) => return s,
        };
        if let Err(s) = out_ptr(out, "output handle") {
            return s;
        }
        match network_kernel(&h.graph, base) {
            Ok(k) => kernel_handle_out(k, out),
            Err(e) => fail_with(e),
        }
    })
}

fn parse_kernel_name(name: &str) -> Result<ContinuousKernel, RkStatus> {
    match name {
        "bm" => return Ok(ContinuousKernel::BrownianMotion),
        "bridge" => return Ok(ContinuousKernel::BrownianBridge),
        "disk2" => return Ok(ContinuousKernel::DiskGreen { dim: 2 }),
        "disk3" => return Ok(ContinuousKernel::DiskGreen { dim: 3 }),
        _ => {}
    }
    if let Some(nu) = name.strip_prefix("newton:") {
        if let Ok(nu) = nu.parse::<u32>() {
            if nu >= 2 {
                return Ok(ContinuousKernel::NewtonPotential { dim: nu });
            }
        }
    }
    Err(fail(
        RkStatus::InvalidArgument,
        &format!("unknown kernel {name:?}"),
    ))
}

/// Restrict a built-in continuous kernel
/// (bm|bridge|disk2|disk3|newton:NU) to `n_points` points of `dim`
/// coordinates each, laid out row-major.
///
/// # Safety
///
/// `name` must be NUL-terminated, `points` must hold
/// `n_points * dim` doubles, and `out` must be valid; on `Ok` the caller
/// owns the kernel handle.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_kernel_restrict(
    name: *const c_char,
    points: *const f64,
    n_points: usize,
    dim: usize,
    out: *mut *mut RkKernel,
) -> RkStatus {
    guarded(|| {
        let name = match cstr_arg(name) {
            Ok(n) => n,
            Err(s) => return s,
        };
        if points.is_null() {
            return fail(RkStatus::NullArgument, "points buffer is null");
        }
        if let Err(s) = out_ptr(out, "output handle") {
            return s;
        }
        let kernel = match parse_kernel_name(name) {
            Ok(k) => k,
            Err(s) => return s,
        };
        if dim != kernel.dim() {
            return fail(
                RkStatus::InvalidArgument,
                &format!("kernel {name:?} takes {}-coordinate points, got {dim}", kernel.dim()),
            );
        }
        if n_points == 0 {
            return fail(RkStatus::InvalidArgument, "no points");
        }
        let flat = std::slice::from_raw_parts(points, n_points * dim);
        let pts: Vec<Vec<f64>> = flat.chunks(dim).map(|c| c.to_vec()).collect();
        match restrict(&kernel, &pts) {
            Ok(k) => kernel_handle_out(k, out),
            Err(e) => fail_with(e),
        }
    })
}

/// Kernel of the geometric-conductance half-line truncated to `n`
/// vertices; conductance between vertices i-1 and i is `ratio^-(i-1)`.
///
/// # Safety
///
/// `out` must be a valid pointer; on `Ok` the caller owns the handle.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_ladder_kernel(
    ratio: f64,
    n: usize,
    out: *mut *mut RkKernel,
) -> RkStatus {
    guarded(|| {
        if let Err(s) = out_ptr(out, "output handle") {
            return s;
        }
        match ladder_kernel(ratio, n) {
            Ok(k) => kernel_handle_out(k, out),
            Err(e) => fail_with(e),
        }
    })
}

/// Release a kernel handle; null is a no-op.
///
/// # Safety
///
/// `k` must be null or an unfreed handle from this library.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_kernel_free(k: *mut RkKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Number of kernel points.
///
/// # Safety
///
/// `k` must be a live kernel handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_kernel_size(k: *const RkKernel, out: *mut usize) -> RkStatus {
    guarded(|| {
        let h = match kernel_arg(k) {
            Ok(h) => h,
            Err(s) => return s,
        };
        if let Err(s) = out_ptr(out, "output count") {
            return s;
        }
        *out = h.kernel.len();
        RkStatus::Ok
    })
}

/// Label of the point at `index`, or null if out of range. The pointer
/// borrows from the handle.
///
/// # Safety
///
/// `k` must be a live kernel handle.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_kernel_point_name(
    k: *const RkKernel,
    index: usize,
) -> *const c_char {
    let Ok(h) = kernel_arg(k) else {
        return ptr::null();
    };
    match h.names.get(index) {
        Some(n) => n.as_ptr(),
        None => {
            set_error("point index out of range");
            ptr::null()
        }
    }
}

/// Copy the Gram matrix into a caller buffer of exactly `size * size`
/// doubles, row-major in point order.
///
/// # Safety
///
/// `k` must be a live kernel handle and `out` a buffer of at least `len`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_kernel_gram(
    k: *const RkKernel,
    out: *mut f64,
    len: usize,
) -> RkStatus {
    guarded(|| {
        let h = match kernel_arg(k) {
            Ok(h) => h,
            Err(s) => return s,
        };
        if let Err(s) = out_ptr(out, "output buffer") {
            return s;
        }
        let n = h.kernel.len();
        if len != n * n {
            return fail(
                RkStatus::InvalidArgument,
                &format!("buffer holds {len} doubles, need {}", n * n),
            );
        }
        let m = h.kernel.gram();
        for i in 0..n {
            for j in 0..n {
                *out.add(i * n + j) = m[(i, j)];
            }
        }
        RkStatus::Ok
    })
}

/// Membership value of the Dirac mass at the named point: the diagonal
/// entry of the inverse Gram.
///
/// # Safety
///
/// `k` must be a live kernel handle, `point` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_kernel_membership(
    k: *const RkKernel,
    point: *const c_char,
    out: *mut f64,
) -> RkStatus {
    guarded(|| {
        let h = match kernel_arg(k) {
            Ok(h) => h,
            Err(s) => return s,
        };
        let point = match cstr_arg(point) {
            Ok(p) => p,
            Err(s) => return s,
        };
        if let Err(s) = out_ptr(out, "output value") {
            return s;
        }
        match membership_value(&h.kernel, point) {
            Ok(v) => {
                *out = v;
                RkStatus::Ok
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Smallest eigenvalue of the Gram matrix.
///
/// # Safety
///
/// `k` must be a live kernel handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_kernel_min_eigenvalue(
    k: *const RkKernel,
    out: *mut f64,
) -> RkStatus {
    guarded(|| {
        let h = match kernel_arg(k) {
            Ok(h) => h,
            Err(s) => return s,
        };
        if let Err(s) = out_ptr(out, "output value") {
            return s;
        }
        *out = psd_check(&h.kernel).min_eigenvalue;
        RkStatus::Ok
    })
}

/// Largest diagonal decrease at the named point that keeps the Gram
/// positive semidefinite.
///
/// # Safety
///
/// `k` must be a live kernel handle, `point` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_kernel_max_diagonal_perturbation(
    k: *const RkKernel,
    point: *const c_char,
    out: *mut f64,
) -> RkStatus {
    guarded(|| {
        let h = match kernel_arg(k) {
            Ok(h) => h,
            Err(s) => return s,
        };
        let point = match cstr_arg(point) {
            Ok(p) => p,
            Err(s) => return s,
        };
        if let Err(s) = out_ptr(out, "output value") {
            return s;
        }
        match max_diagonal_perturbation(&h.kernel, point) {
            Ok(v) => {
                *out = v;
                RkStatus::Ok
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Sample Brownian-bridge paths: `n_paths * grid_len` doubles, one path
/// per row. Deterministic in (grid, n_paths, seed).
///
/// # Safety
///
/// `grid` must hold `grid_len` doubles and `out` at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_bridge_sample(
    grid: *const f64,
    grid_len: usize,
    n_paths: usize,
    seed: u64,
    out: *mut f64,
    len: usize,
) -> RkStatus {
    guarded(|| {
        if grid.is_null() {
            return fail(RkStatus::NullArgument, "grid buffer is null");
        }
        if let Err(s) = out_ptr(out, "output buffer") {
            return s;
        }
        if len != n_paths.saturating_mul(grid_len) {
            return fail(
                RkStatus::InvalidArgument,
                &format!("buffer holds {len} doubles, need {}", n_paths * grid_len),
            );
        }
        let grid = std::slice::from_raw_parts(grid, grid_len);
        match sample_bridge_paths(grid, n_paths, seed) {
            Ok(sample) => {
                for (p, path) in sample.paths.iter().enumerate() {
                    for (i, &v) in path.iter().enumerate() {
                        *out.add(p * grid_len + i) = v;
                    }
                }
                RkStatus::Ok
            }
            Err(e) => fail_with(e),
        }
    })
}

unsafe fn matrix_arg(
    matrix: *const f64,
    n: usize,
) -> Result<nalgebra::DMatrix<f64>, RkStatus> {
    if matrix.is_null() {
        return Err(fail(RkStatus::NullArgument, "matrix buffer is null"));
    }
    if n == 0 {
        return Err(fail(RkStatus::InvalidArgument, "matrix is empty"));
    }
    let flat = std::slice::from_raw_parts(matrix, n * n);
    Ok(nalgebra::DMatrix::from_row_slice(n, n, flat))
}

unsafe fn write_matrix(m: &nalgebra::DMatrix<f64>, out: *mut f64) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            *out.add(i * n + j) = m[(i, j)];
        }
    }
}

/// Heat kernel `exp(-t L)` of a symmetric PSD `n x n` matrix into a
/// caller buffer of `n * n` doubles.
///
/// # Safety
///
/// `matrix` must hold `n * n` doubles and `out` at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_heat_kernel(
    matrix: *const f64,
    n: usize,
    t: f64,
    out: *mut f64,
    len: usize,
) -> RkStatus {
    guarded(|| {
        let l = match matrix_arg(matrix, n) {
            Ok(l) => l,
            Err(s) => return s,
        };
        if let Err(s) = out_ptr(out, "output buffer") {
            return s;
        }
        if len != n * n {
            return fail(
                RkStatus::InvalidArgument,
                &format!("buffer holds {len} doubles, need {}", n * n),
            );
        }
        let d = match spectral_decompose(&l) {
            Ok(d) => d,
            Err(e) => return fail_with(e),
        };
        match heat_kernel(&d, t) {
            Ok(p) => {
                write_matrix(&p, out);
                RkStatus::Ok
            }
            Err(e) => fail_with(e),
        }
    })
}

/// Green matrix (inverse) of a symmetric positive definite `n x n`
/// matrix into a caller buffer of `n * n` doubles.
///
/// # Safety
///
/// `matrix` must hold `n * n` doubles and `out` at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rkhsnet_green_matrix(
    matrix: *const f64,
    n: usize,
    out: *mut f64,
    len: usize,
) -> RkStatus {
    guarded(|| {
        let l = match matrix_arg(matrix, n) {
            Ok(l) => l,
            Err(s) => return s,
        };
        if let Err(s) = out_ptr(out, "output buffer") {
            return s;
        }
        if len != n * n {
            return fail(
                RkStatus::InvalidArgument,
                &format!("buffer holds {len} doubles, need {}", n * n),
            );
        }
        let d = match spectral_decompose(&l) {
            Ok(d) => d,
            Err(e) => return fail_with(e),
        };
        match green_from_semigroup(&d) {
            Ok(k) => {
                write_matrix(&k, out);
                RkStatus::Ok
            }
            Err(e) => fail_with(e),
        }
    })
}
