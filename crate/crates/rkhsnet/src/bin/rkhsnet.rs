// Copyright 2026 rkhsnet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

fn main() -> ExitCode {
    rkhsnet::cli::main_entry()
}
