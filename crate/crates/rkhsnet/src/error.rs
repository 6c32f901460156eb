// Copyright 2026 rkhsnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error vocabulary shared by every module of the crate.
//!
//! One flat enum keeps error handling uniform across the Gram-matrix,
//! network, continuum, and semigroup layers; the CLI maps variants onto
//! its exit-code contract (see the `cli` module).

use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Two points in an ordered point list carry the same identifier.
    #[error("duplicate point identifier `{0}`")]
    DuplicatePoint(String),

    /// A kernel function returned NaN or an infinity.
    #[error("kernel returned a non-finite value at ({0}, {1})")]
    NonFiniteKernelValue(String, String),

    /// Vector or matrix sizes do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A point identifier is not part of the kernel / graph at hand.
    #[error("unknown point `{0}`")]
    UnknownPoint(String),

    /// A Gram matrix is numerically singular where an inverse is required.
    #[error("Gram matrix is numerically singular")]
    SingularGram,

    /// An edge conductance is zero, negative, or non-finite.
    #[error("bad conductance: {0}")]
    BadConductance(String),

    /// The graph does not consist of a single connected component.
    #[error("graph is not connected")]
    Disconnected,

    /// An edge joins a vertex to itself.
    #[error("self-loop at vertex `{0}`")]
    SelfLoop(String),

    /// The edge-list text could not be parsed.
    #[error("parse error on line {line}: {msg}")]
    ParseError { line: usize, msg: String },

    /// A dipole was requested with source equal to the base point.
    #[error("dipole source coincides with the base vertex")]
    DegenerateDipole,

    /// A scalar argument is outside its legal range.
    #[error("bad parameter: {0}")]
    BadParameter(String),

    /// A point lies outside the kernel's domain.
    #[error("point outside kernel domain: {0}")]
    OutOfDomain(String),

    /// A singular kernel was evaluated at coincident points.
    #[error("kernel is singular at coincident points")]
    SingularPair,

    /// Points fall below the minimum separation required for a singular
    /// kernel restriction.
    #[error("points closer than the minimum separation")]
    TooClose,

    /// A matrix expected to be symmetric is not.
    #[error("matrix is not symmetric")]
    NotSymmetric,

    /// A matrix expected to be positive semidefinite has a negative
    /// eigenvalue beyond tolerance.
    #[error("matrix has a negative eigenvalue")]
    NotPositive,

    /// An operator expected to be invertible has a (numerically) zero
    /// eigenvalue; for graph Laplacians this means constants were not
    /// grounded.
    #[error("operator has a zero eigenvalue (constants not grounded)")]
    NotInvertible,

    /// Reading or writing a file failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag for each variant, used in CLI error
    /// objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DuplicatePoint(_) => "DuplicatePoint",
            Error::NonFiniteKernelValue(_, _) => "NonFiniteKernelValue",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::UnknownPoint(_) => "UnknownPoint",
            Error::SingularGram => "SingularGram",
            Error::BadConductance(_) => "BadConductance",
            Error::Disconnected => "Disconnected",
            Error::SelfLoop(_) => "SelfLoop",
            Error::ParseError { .. } => "ParseError",
            Error::DegenerateDipole => "DegenerateDipole",
            Error::BadParameter(_) => "BadParameter",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::SingularPair => "SingularPair",
            Error::TooClose => "TooClose",
            Error::NotSymmetric => "NotSymmetric",
            Error::NotPositive => "NotPositive",
            Error::NotInvertible => "NotInvertible",
            Error::Io(_) => "Io",
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
