// Copyright 2026 rkhsnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Reproducing-kernel Hilbert space toolkit for weighted graphs and
//! classical Gaussian kernels.

pub mod cli;
pub mod continuum;
pub mod error;
pub mod gram;
pub mod job;
pub mod linalg;
pub mod network;
pub mod semigroup;

pub use error::{Error, Result};
