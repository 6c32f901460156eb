// Copyright 2026 rkhsnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Regenerates include/rkhsnet.h from the extern "C" surface. The header
//! is committed so C consumers do not need the Rust toolchain.

use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("cbindgen.toml is valid");
    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
    {
        Ok(bindings) => {
            bindings.write_to_file(crate_dir.join("include/rkhsnet.h"));
        }
        // Parse errors abort the build; RustUnsupported would only hide a
        // header drift.
        Err(e) => panic!("header generation failed: {e}"),
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
