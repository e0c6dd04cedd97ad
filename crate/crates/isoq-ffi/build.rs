//! Generates the C header for the library with cbindgen into
//! `include/isoq.h` next to this crate's manifest.

use std::env;
use std::path::PathBuf;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("isoq.h");
    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        include_guard: Some("ISOQ_FFI_H".into()),
        cpp_compat: true,
        documentation: true,
        ..Default::default()
    };
    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
    {
        Ok(bindings) => {
            bindings.write_to_file(header);
        }
        Err(e) => {
            // Header generation must not break library builds (for example
            // when the nightly toolchain cbindgen wants is unavailable).
            println!("cargo:warning=cbindgen failed: {e}");
        }
    }
}
