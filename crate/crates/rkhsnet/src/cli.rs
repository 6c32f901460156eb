// Copyright 2026 rkhsnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line surface: every computation as a reproducible batch job.
//!
//! Four subcommands cover the library: `membership` (Dirac-mass
//! membership diagnostics along an exhaustion), `network` (dipoles,
//! kernel, resistance metric, Laplacian of an edge-list graph),
//! `bridge-sample` (seeded Brownian-bridge paths plus covariance
//! diagnostics), and `heat` (heat kernels of a grounded Laplacian with
//! semigroup or Green checks).
//!
//! Contract: exit 0 on success (even when a diagnostic reports
//! `passed: false`; the job itself succeeded), exit 1 on computation or
//! file-content errors (a JSON error object goes to stdout), exit 2 on
//! usage errors (message to stderr). Every command is deterministic given
//! its inputs and flags; `RKHS_THREADS` caps internal parallelism
//! (0 or unset = automatic) without affecting results.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use crate::continuum::{
    bridge_covariance_check, point_label, restrict, sample_bridge_paths, ContinuousKernel,
};
use crate::error::Error;
use crate::gram::{
    membership_diagnostic_gram, Exhaustion, FiniteKernel, MembershipDiagnostic, Verdict,
    CAUCHY_TOL,
};
use crate::job::{
    atomic_write, error_json, inputs_digest, matrix_json, parse_matrix_json, path_sample_csv,
    to_json_string, JobResult,
};
use crate::linalg::max_diff;
use crate::network::{
    ladder_kernel, laplacian_matrix, load_graph, network_kernel, resistance_metric, DipoleSystem,
    WeightedGraph,
};
use crate::semigroup::{
    green_by_quadrature, green_from_semigroup, heat_kernel, semigroup_defect, spectral_decompose,
};

/// Largest ladder truncation the CLI will materialize as a dense Gram.
const LADDER_CAP: usize = 1024;

/// Default maximum subset size of the `prefix` exhaustion schedule.
const DEFAULT_SCHEDULE_MAX: usize = 64;

const QUADRATURE_NODES: usize = 10_000;

#[derive(Parser)]
#[command(
    name = "rkhsnet",
    version,
    about = "Kernel Gram analysis, electrical networks, bridge sampling, heat semigroups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track the membership value of a Dirac mass along an exhaustion.
    Membership {
        /// Built-in kernel (bm|bridge|disk2|disk3|newton:NU|ladder:R) or
        /// an edge-list file.
        #[arg(long)]
        kernel: String,
        /// JSON point list for built-in continuous kernels (numbers, or
        /// coordinate arrays for ball kernels).
        #[arg(long)]
        points: Option<String>,
        /// Exhaustion schedule: "prefix" (doubling subset sizes) or
        /// "prefix:N" (sizes capped at N).
        #[arg(long, default_value = "prefix")]
        exhaustion: String,
        /// Point whose Dirac mass is tested: a number, a coordinate
        /// array, a vertex name, or a ladder vertex index.
        #[arg(long)]
        target: String,
    },
    /// Dipole potentials, kernel, resistance metric, or Laplacian of an
    /// edge-list graph.
    Network {
        /// Edge-list file: one "u v conductance" triple per line.
        #[arg(long)]
        graph: PathBuf,
        /// Base (grounded) vertex; defaults to the first vertex of the
        /// file.
        #[arg(long)]
        base: Option<String>,
        /// Which object to emit.
        #[arg(long, value_enum)]
        emit: EmitKind,
    },
    /// Sample Brownian-bridge paths on a grid and check their covariance.
    BridgeSample {
        /// JSON array of strictly increasing times in (0,1).
        #[arg(long)]
        grid: String,
        /// Number of paths.
        #[arg(long)]
        paths: usize,
        /// Seed of the path generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination (first row the grid, then one row per path);
        /// written atomically.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Heat kernels of a symmetric PSD matrix, with optional semigroup or
    /// Green diagnostics.
    Heat {
        /// The matrix: inline JSON rows, or a path to a JSON file.
        #[arg(long)]
        laplacian: String,
        /// JSON array of nonnegative times.
        #[arg(long)]
        times: String,
        /// Diagnostic to run alongside the computation.
        #[arg(long, value_enum)]
        check: Option<CheckKind>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmitKind {
    Dipoles,
    Kernel,
    Resistance,
    Laplacian,
}

impl EmitKind {
    fn as_str(self) -> &'static str {
        match self {
            EmitKind::Dipoles => "dipoles",
            EmitKind::Kernel => "kernel",
            EmitKind::Resistance => "resistance",
            EmitKind::Laplacian => "laplacian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Semigroup,
    Green,
}

/// How a command failed: bad invocation (exit 2, message on stderr) or a
/// failed computation (exit 1, JSON error object on stdout).
#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

type CmdResult = std::result::Result<JobResult, Failure>;

/// Entry point used by the binary.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let (name, result) = match &cli.command {
        Command::Membership {
            kernel,
            points,
            exhaustion,
            target,
        } => (
            "membership",
            cmd_membership(kernel, points.as_deref(), exhaustion, target),
        ),
        Command::Network { graph, base, emit } => {
            ("network", cmd_network(graph, base.as_deref(), *emit))
        }
        Command::BridgeSample {
            grid,
            paths,
            seed,
            out,
        } => (
            "bridge-sample",
            cmd_bridge_sample(grid, *paths, *seed, out.as_deref()),
        ),
        Command::Heat {
            laplacian,
            times,
            check,
        } => ("heat", cmd_heat(laplacian, times, *check)),
    };
    match result {
        Ok(job) => {
            println!("{}", to_json_string(&job));
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            println!("{}", error_json(name, &e));
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    match std::env::var("RKHS_THREADS") {
        Err(_) => Ok(()),
        Ok(s) => {
            let n: usize = s
                .parse()
                .map_err(|_| format!("RKHS_THREADS must be a nonnegative integer, got {s:?}"))?;
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Ok(())
        }
    }
}

// ===========================================================================
// membership
// ===========================================================================

enum KernelSpec {
    Builtin(ContinuousKernel),
    Ladder(f64),
    GraphFile(PathBuf),
}

fn parse_kernel(s: &str) -> std::result::Result<KernelSpec, Failure> {
    match s {
        "bm" => return Ok(KernelSpec::Builtin(ContinuousKernel::BrownianMotion)),
        "bridge" => return Ok(KernelSpec::Builtin(ContinuousKernel::BrownianBridge)),
        "disk2" => return Ok(KernelSpec::Builtin(ContinuousKernel::DiskGreen { dim: 2 })),
        "disk3" => return Ok(KernelSpec::Builtin(ContinuousKernel::DiskGreen { dim: 3 })),
        _ => {}
    }
    if let Some(nu) = s.strip_prefix("newton:") {
        let nu: u32 = nu
            .parse()
            .map_err(|_| usage(format!("bad dimension in kernel {s:?}")))?;
        if nu < 2 {
            return Err(usage("newton kernel needs dimension >= 2"));
        }
        return Ok(KernelSpec::Builtin(ContinuousKernel::NewtonPotential {
            dim: nu,
        }));
    }
    if let Some(r) = s.strip_prefix("ladder:") {
        let r: f64 = r
            .parse()
            .map_err(|_| usage(format!("bad ratio in kernel {s:?}")))?;
        if !(r > 0.0 && r < 1.0) {
            return Err(usage("ladder ratio must lie in (0,1)"));
        }
        return Ok(KernelSpec::Ladder(r));
    }
    let p = PathBuf::from(s);
    if p.exists() {
        return Ok(KernelSpec::GraphFile(p));
    }
    Err(usage(format!(
        "unknown kernel {s:?}: expected bm|bridge|disk2|disk3|newton:NU|ladder:R or an edge-list file"
    )))
}

/// Parse "prefix" or "prefix:N" into the maximum subset size.
fn parse_schedule(s: &str) -> std::result::Result<usize, Failure> {
    if s == "prefix" {
        return Ok(DEFAULT_SCHEDULE_MAX);
    }
    if let Some(n) = s.strip_prefix("prefix:") {
        let n: usize = n
            .parse()
            .map_err(|_| usage(format!("bad exhaustion schedule {s:?}")))?;
        if n < 2 {
            return Err(usage("exhaustion schedule needs sizes >= 2"));
        }
        return Ok(n);
    }
    Err(usage(format!(
        "unknown exhaustion schedule {s:?}: expected prefix or prefix:N"
    )))
}

fn parse_points(dim: usize, s: &str) -> std::result::Result<Vec<Vec<f64>>, Failure> {
    let v: serde_json::Value =
        serde_json::from_str(s).map_err(|e| usage(format!("bad points JSON: {e}")))?;
    let arr = v
        .as_array()
        .ok_or_else(|| usage("points must be a JSON array"))?;
    if arr.is_empty() {
        return Err(usage("points list is empty"));
    }
    arr.iter().map(|e| parse_point_value(dim, e)).collect()
}

fn parse_point_value(dim: usize, v: &serde_json::Value) -> std::result::Result<Vec<f64>, Failure> {
    if dim == 1 {
        let x = v
            .as_f64()
            .ok_or_else(|| usage("each point of an interval kernel must be a number"))?;
        return Ok(vec![x]);
    }
    let a = v
        .as_array()
        .ok_or_else(|| usage("each point of a ball kernel must be a coordinate array"))?;
    if a.len() != dim {
        return Err(usage(format!(
            "point has {} coordinates, kernel needs {dim}",
            a.len()
        )));
    }
    a.iter()
        .map(|c| {
            c.as_f64()
                .ok_or_else(|| usage("point coordinates must be numbers"))
        })
        .collect()
}

fn parse_target_point(dim: usize, s: &str) -> std::result::Result<Vec<f64>, Failure> {
    let v: serde_json::Value =
        serde_json::from_str(s).map_err(|e| usage(format!("bad target {s:?}: {e}")))?;
    parse_point_value(dim, &v)
}

/// Number of doubling levels whose subset size stays within `max_size`
/// (sizes 2, 4, ..., 2^levels).
fn levels_for(max_size: usize) -> usize {
    let mut levels = 0;
    let mut size = 2usize;
    while size <= max_size {
        levels += 1;
        match size.checked_mul(2) {
            Some(next) => size = next,
            None => break,
        }
    }
    levels.max(1)
}

fn verdict_parts(d: &MembershipDiagnostic) -> (&'static str, Option<f64>) {
    match d.verdict {
        Verdict::Converged { limit } => ("converged", Some(limit)),
        Verdict::Diverged => ("diverged", None),
        Verdict::Undecided => ("undecided", None),
    }
}

fn membership_job(
    kernel_desc: &str,
    digest: String,
    base: Option<&str>,
    diag: &MembershipDiagnostic,
) -> JobResult {
    let (verdict, limit) = verdict_parts(diag);
    let mut outputs = serde_json::json!({
        "kernel": kernel_desc,
        "target": diag.target,
        "subset_sizes": diag.subset_sizes,
        "values": diag.values,
        "verdict": verdict,
        "limit": limit,
    });
    if let Some(b) = base {
        outputs["base"] = serde_json::json!(b);
    }
    let mut job = JobResult::new("membership", digest, outputs);
    let last = diag.values.last().copied().unwrap_or(0.0);
    job.push_diagnostic(
        "membership_converged",
        matches!(diag.verdict, Verdict::Converged { .. }),
        limit.unwrap_or(last),
        CAUCHY_TOL,
    );
    job
}

fn cmd_membership(
    kernel: &str,
    points: Option<&str>,
    exhaustion: &str,
    target: &str,
) -> CmdResult {
    let spec = parse_kernel(kernel)?;
    let max_size = parse_schedule(exhaustion)?;
    match spec {
        KernelSpec::Ladder(r) => {
            let k: usize = target
                .parse()
                .map_err(|_| usage(format!("ladder target must be a vertex index, got {target:?}")))?;
            if k < 1 {
                return Err(usage("ladder vertex indices start at 1"));
            }
            if k > LADDER_CAP || max_size > LADDER_CAP {
                return Err(usage(format!(
                    "ladder truncation capped at {LADDER_CAP} vertices"
                )));
            }
            // The ladder's ground set is infinite, so no truncation is ever
            // marked complete; the verdict must come from the value
            // sequence itself.
            let mut subsets = Vec::new();
            let mut m = 2usize;
            loop {
                let mut labels: Vec<String> = (1..=m).map(|i| i.to_string()).collect();
                if k > m {
                    labels.push(k.to_string());
                }
                subsets.push(labels);
                if m * 2 > max_size {
                    break;
                }
                m *= 2;
            }
            let exh = Exhaustion::from_subsets(subsets).map_err(Failure::Compute)?;
            let fk = ladder_kernel(r, k.max(max_size))?;
            let diag =
                membership_diagnostic_gram(&fk, &exh, &k.to_string(), exh.subsets().len())?;
            let digest = inputs_digest(&["membership", kernel, exhaustion, target]);
            Ok(membership_job(kernel, digest, None, &diag))
        }
        KernelSpec::Builtin(ck) => {
            let points_str =
                points.ok_or_else(|| usage("built-in continuous kernels need --points"))?;
            let pts = parse_points(ck.dim(), points_str)?;
            let target_pt = parse_target_point(ck.dim(), target)?;
            let target_label = point_label(&target_pt);
            let labels: Vec<String> = pts.iter().map(|p| point_label(p)).collect();
            if !labels.contains(&target_label) {
                return Err(usage(format!(
                    "target {target_label} is not among the points"
                )));
            }
            let fk = restrict(&ck, &pts).map_err(|e| match e {
                e @ Error::Io(_) => Failure::Compute(e),
                e => usage(format!("bad point configuration: {e}")),
            })?;
            let exh =
                Exhaustion::prefix_with_target(fk.points(), &target_label, levels_for(max_size))?;
            let diag =
                membership_diagnostic_gram(&fk, &exh, &target_label, exh.subsets().len())?;
            let digest =
                inputs_digest(&["membership", kernel, points_str, exhaustion, target]);
            Ok(membership_job(kernel, digest, None, &diag))
        }
        KernelSpec::GraphFile(path) => {
            let content = std::fs::read_to_string(&path).map_err(Error::from)?;
            let g = load_graph(&content)?;
            let base = g.vertices()[0].clone();
            if g.index_of(target).is_err() {
                return Err(usage(format!("target {target:?} is not a graph vertex")));
            }
            if target == base {
                return Err(usage(format!(
                    "target {target:?} is the base vertex; its Dirac mass is grounded out"
                )));
            }
            let fk = network_kernel(&g, &base)?;
            let exh = Exhaustion::prefix_with_target(fk.points(), target, levels_for(max_size))?;
            let diag = membership_diagnostic_gram(&fk, &exh, target, exh.subsets().len())?;
            let digest = inputs_digest(&["membership", &content, exhaustion, target]);
            Ok(membership_job(kernel, digest, Some(&base), &diag))
        }
    }
}

// ===========================================================================
// network
// ===========================================================================

fn resolve_base<'a>(
    g: &'a WeightedGraph,
    base: Option<&'a str>,
) -> std::result::Result<&'a str, Failure> {
    match base {
        None => Ok(g.vertices()[0].as_str()),
        Some(b) => {
            g.index_of(b)
                .map_err(|_| usage(format!("base {b:?} is not a graph vertex")))?;
            Ok(b)
        }
    }
}

/// Largest deviation of `R(x,y) = k(x,x) + k(y,y) - 2 k(x,y)` over all
/// pairs, with the base row of `k` extended by zero, normalized by the
/// kernel scale.
fn resistance_identity_defect(k: &FiniteKernel, r: &crate::network::ResistanceMatrix) -> f64 {
    let kv = |x: &str, y: &str| -> f64 {
        match (k.index_of(x), k.index_of(y)) {
            (Ok(i), Ok(j)) => k.gram()[(i, j)],
            _ => 0.0, // dipole at the base vanishes identically
        }
    };
    let verts = r.vertices();
    let mut defect = 0.0f64;
    for (i, x) in verts.iter().enumerate() {
        for y in verts.iter().skip(i + 1) {
            let want = kv(x, x) + kv(y, y) - 2.0 * kv(x, y);
            defect = defect.max((r.value(x, y).unwrap() - want).abs());
        }
    }
    defect / k.gram().amax().max(1.0)
}

fn cmd_network(graph: &Path, base: Option<&str>, emit: EmitKind) -> CmdResult {
    let content = std::fs::read_to_string(graph).map_err(Error::from)?;
    let g = load_graph(&content)?;
    let base = resolve_base(&g, base)?;
    let digest = inputs_digest(&["network", &content, base, emit.as_str()]);
    let mut job_outputs = serde_json::json!({
        "vertices": g.vertices(),
        "base": base,
    });
    let mut diagnostics = Vec::new();
    match emit {
        EmitKind::Dipoles => {
            let sys = DipoleSystem::new(&g, base)?;
            let dipoles: Vec<serde_json::Value> = sys
                .points()
                .iter()
                .map(|x| {
                    serde_json::json!({
                        "vertex": x,
                        "potentials": sys.potential(x).expect("non-base point"),
                    })
                })
                .collect();
            job_outputs["dipoles"] = serde_json::Value::Array(dipoles);
        }
        EmitKind::Kernel => {
            let k = network_kernel(&g, base)?;
            job_outputs["points"] = serde_json::json!(k.points());
            job_outputs["gram"] = matrix_json(k.gram());
        }
        EmitKind::Resistance => {
            let r = resistance_metric(&g, base)?;
            let k = network_kernel(&g, base)?;
            let defect = resistance_identity_defect(&k, &r);
            job_outputs["matrix"] = matrix_json(r.matrix());
            job_outputs["triangle_defect"] = serde_json::json!(r.triangle_defect());
            diagnostics.push(("resistance_kernel_identity", defect, 1e-10));
        }
        EmitKind::Laplacian => {
            job_outputs["matrix"] = matrix_json(&laplacian_matrix(&g));
        }
    }
    let mut job = JobResult::new("network", digest, job_outputs);
    for (name, value, tol) in diagnostics {
        job.push_diagnostic(name, value <= tol, value, tol);
    }
    Ok(job)
}

// ===========================================================================
// bridge-sample
// ===========================================================================

fn cmd_bridge_sample(grid: &str, paths: usize, seed: u64, out: Option<&Path>) -> CmdResult {
    let v: serde_json::Value =
        serde_json::from_str(grid).map_err(|e| usage(format!("bad grid JSON: {e}")))?;
    let grid_vals = crate::job::parse_vector_json(&v)
        .map_err(|e| usage(format!("bad grid: {e}")))?;
    if paths == 0 {
        return Err(usage("need at least one path"));
    }
    let sample = sample_bridge_paths(&grid_vals, paths, seed).map_err(|e| match e {
        Error::BadParameter(m) => usage(m),
        e => Failure::Compute(e),
    })?;
    if let Some(path) = out {
        atomic_write(path, path_sample_csv(&sample).as_bytes())?;
    }
    let entries = bridge_covariance_check(&sample);
    let mut z_max = 0.0f64;
    let cov: Vec<serde_json::Value> = entries
        .iter()
        .map(|e| {
            z_max = z_max.max((e.empirical - e.expected).abs() / e.standard_error);
            serde_json::json!({
                "s": e.s,
                "t": e.t,
                "empirical": e.empirical,
                "expected": e.expected,
                "standard_error": e.standard_error,
            })
        })
        .collect();
    let digest = inputs_digest(&[
        "bridge-sample",
        grid,
        &paths.to_string(),
        &seed.to_string(),
    ]);
    let mut job = JobResult::new(
        "bridge-sample",
        digest,
        serde_json::json!({
            "grid": sample.grid,
            "paths": paths,
            "seed": seed,
            "out": out.map(|p| p.display().to_string()),
            "covariance": cov,
        }),
    );
    job.push_diagnostic("covariance_z_max", z_max <= 4.0, z_max, 4.0);
    Ok(job)
}

// ===========================================================================
// heat
// ===========================================================================

/// Inline JSON (leading '[') or a file path; returns the resolved text
/// and whether it came from a file.
fn resolve_matrix_arg(arg: &str) -> std::result::Result<(String, bool), Failure> {
    if arg.trim_start().starts_with('[') {
        Ok((arg.to_string(), false))
    } else {
        let content = std::fs::read_to_string(arg).map_err(Error::from)?;
        Ok((content, true))
    }
}

fn cmd_heat(laplacian: &str, times: &str, check: Option<CheckKind>) -> CmdResult {
    let (text, from_file) = resolve_matrix_arg(laplacian)?;
    let value: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) if from_file => {
            return Err(Failure::Compute(Error::ParseError {
                line: 0,
                msg: e.to_string(),
            }))
        }
        Err(e) => return Err(usage(format!("bad matrix JSON: {e}"))),
    };
    let l = match parse_matrix_json(&value) {
        Ok(m) => m,
        Err(e) if from_file => return Err(Failure::Compute(e)),
        Err(e) => return Err(usage(format!("bad matrix: {e}"))),
    };
    let tv: serde_json::Value =
        serde_json::from_str(times).map_err(|e| usage(format!("bad times JSON: {e}")))?;
    let time_vals =
        crate::job::parse_vector_json(&tv).map_err(|e| usage(format!("bad times: {e}")))?;
    if time_vals.is_empty() {
        return Err(usage("need at least one time"));
    }
    if time_vals.iter().any(|&t| t < 0.0) {
        return Err(usage("times must be nonnegative"));
    }
    let d = spectral_decompose(&l)?;
    let kernels: Vec<serde_json::Value> = time_vals
        .iter()
        .map(|&t| heat_kernel(&d, t).map(|p| matrix_json(&p)))
        .collect::<crate::error::Result<_>>()?;
    let check_name = match check {
        None => "none",
        Some(CheckKind::Semigroup) => "semigroup",
        Some(CheckKind::Green) => "green",
    };
    let digest = inputs_digest(&["heat", &text, times, check_name]);
    let mut outputs = serde_json::json!({
        "times": time_vals,
        "heat_kernels": kernels,
    });
    let mut job = JobResult::new("heat", digest, serde_json::json!(null));
    match check {
        None => {}
        Some(CheckKind::Semigroup) => {
            let mut defect = 0.0f64;
            for (i, &s) in time_vals.iter().enumerate() {
                for &t in &time_vals[i..] {
                    defect = defect.max(semigroup_defect(&d, s, t)?);
                }
            }
            job.push_diagnostic("semigroup_law", defect <= 1e-10, defect, 1e-10);
        }
        Some(CheckKind::Green) => {
            let k = green_from_semigroup(&d)?;
            let scale = k.amax().max(1.0);
            let eye = DMatrix::identity(l.nrows(), l.ncols());
            let inv_defect = max_diff(&(&k * &l), &eye) / scale;
            let q = green_by_quadrature(&d, QUADRATURE_NODES)?;
            let q_defect = max_diff(&k, &q) / scale;
            outputs["green"] = matrix_json(&k);
            job.push_diagnostic("green_inverse", inv_defect <= 1e-9, inv_defect, 1e-9);
            job.push_diagnostic(
                "green_quadrature_crosscheck",
                q_defect <= 1e-6,
                q_defect,
                1e-6,
            );
        }
    }
    job.outputs = outputs;
    Ok(job)
}
