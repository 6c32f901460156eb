// Copyright 2026 rkhsnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Batch-job plumbing shared by the CLI: the versioned [`JobResult`]
//! envelope, full-precision JSON serialization, content digests of job
//! inputs, atomic file writes, and the CSV layout for sampled paths.

use std::io;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::continuum::PathSample;
use crate::error::{Error, Result};

/// Schema version stamped into every JSON envelope.
pub const SCHEMA_VERSION: &str = "1";

/// Decimal representation with 17 significant digits; parses back to the
/// identical bit pattern for every finite double.
pub fn float_repr(v: f64) -> String {
    format!("{v:.16e}")
}

/// One named check attached to a job's output.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub check_name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

/// Envelope for every CLI command's output.
#[derive(Debug, Clone, Serialize)]
pub struct JobResult {
    /// Output schema version, [`SCHEMA_VERSION`].
    pub version: String,
    /// Subcommand that produced the result.
    pub command: String,
    /// Content hash of the command's inputs; identical inputs give an
    /// identical digest across runs.
    pub inputs_digest: String,
    /// Command-specific payload.
    pub outputs: serde_json::Value,
    /// Checks the command ran alongside the computation.
    pub diagnostics: Vec<Diagnostic>,
}

impl JobResult {
    pub fn new(command: &str, inputs_digest: String, outputs: serde_json::Value) -> Self {
        JobResult {
            version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            inputs_digest,
            outputs,
            diagnostics: Vec::new(),
        }
    }

    pub fn push_diagnostic(&mut self, check_name: &str, passed: bool, value: f64, tolerance: f64) {
        self.diagnostics.push(Diagnostic {
            check_name: check_name.to_string(),
            passed,
            value,
            tolerance,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.diagnostics.iter().all(|d| d.passed)
    }
}

/// SHA-256 over the parts, each prefixed by its length so that part
/// boundaries cannot alias, as a lowercase hex string.
pub fn inputs_digest<S: AsRef<str>>(parts: &[S]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        let b = p.as_ref().as_bytes();
        h.update((b.len() as u64).to_be_bytes());
        h.update(b);
    }
    hex::encode(h.finalize())
}

/// JSON formatter that writes every double via [`float_repr`]; all other
/// tokens use the compact default.
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        writer.write_all(float_repr(value).as_bytes())
    }
}

/// Serialize any value as compact JSON with full-precision doubles.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// The error envelope printed when a command fails after argument
/// parsing: version, command, and the stable error kind with a message.
pub fn error_json(command: &str, err: &Error) -> String {
    let v = serde_json::json!({
        "version": SCHEMA_VERSION,
        "command": command,
        "error": {
            "kind": err.kind(),
            "message": err.to_string(),
        }
    });
    to_json_string(&v)
}

/// Row-major nested-array JSON form of a matrix.
pub fn matrix_json(m: &DMatrix<f64>) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = (0..m.nrows())
        .map(|i| {
            serde_json::Value::Array(
                (0..m.ncols())
                    .map(|j| serde_json::json!(m[(i, j)]))
                    .collect(),
            )
        })
        .collect();
    serde_json::Value::Array(rows)
}

fn bad_matrix(msg: &str) -> Error {
    Error::ParseError {
        line: 0,
        msg: msg.to_string(),
    }
}

/// Parse a row-major nested-array JSON matrix; rejects ragged or empty
/// rows and non-numeric entries. Parse errors carry line 0 (the failure
/// is structural, not line-oriented).
pub fn parse_matrix_json(v: &serde_json::Value) -> Result<DMatrix<f64>> {
    let rows = v.as_array().ok_or_else(|| bad_matrix("expected an array of rows"))?;
    if rows.is_empty() {
        return Err(bad_matrix("matrix has no rows"));
    }
    let mut data = Vec::new();
    let mut ncols = None;
    for row in rows {
        let cells = row
            .as_array()
            .ok_or_else(|| bad_matrix("expected each row to be an array"))?;
        match ncols {
            None => {
                if cells.is_empty() {
                    return Err(bad_matrix("matrix has an empty row"));
                }
                ncols = Some(cells.len());
            }
            Some(n) if n != cells.len() => {
                return Err(bad_matrix("ragged rows in matrix"));
            }
            _ => {}
        }
        for c in cells {
            data.push(
                c.as_f64()
                    .ok_or_else(|| bad_matrix("non-numeric matrix entry"))?,
            );
        }
    }
    Ok(DMatrix::from_row_slice(rows.len(), ncols.unwrap(), &data))
}

/// Parse a JSON array of finite numbers.
pub fn parse_vector_json(v: &serde_json::Value) -> Result<Vec<f64>> {
    let cells = v.as_array().ok_or_else(|| bad_matrix("expected an array"))?;
    let mut out = Vec::with_capacity(cells.len());
    for c in cells {
        let x = c.as_f64().ok_or_else(|| bad_matrix("non-numeric entry"))?;
        if !x.is_finite() {
            return Err(bad_matrix("non-finite entry"));
        }
        out.push(x);
    }
    Ok(out)
}

/// Write bytes to `path` atomically: a uniquely named temp file in the
/// destination directory, then a rename over the target. Readers never
/// observe a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// CSV form of a path sample: the first row is the grid, then one row per
/// path, all entries in [`float_repr`] form.
pub fn path_sample_csv(sample: &PathSample) -> String {
    let mut out = String::new();
    let row = |vals: &[f64], out: &mut String| {
        let mut first = true;
        for &v in vals {
            if !first {
                out.push(',');
            }
            out.push_str(&float_repr(v));
            first = false;
        }
        out.push('\n');
    };
    row(&sample.grid, &mut out);
    for p in &sample.paths {
        row(p, &mut out);
    }
    out
}
