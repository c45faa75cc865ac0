use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = env::var("CARGO_MANIFEST_DIR").unwrap();
    let header = PathBuf::from(env::var("OUT_DIR").unwrap()).join("cifar_ensemble.h");
    cbindgen::generate(&crate_dir)
        .expect("cbindgen generates the C header")
        .write_to_file(&header);
    // Let the crate's tests compare this fresh header against the committed
    // include/cifar_ensemble.h.
    println!("cargo:rustc-env=CE_GENERATED_HEADER={}", header.display());
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
