fn main() {
    // Header generation is opt-in so ordinary builds don't pull cbindgen:
    //   cargo build -p readout-ffi --features header-gen
    #[cfg(feature = "header-gen")]
    {
        let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
        cbindgen::Builder::new()
            .with_crate(&crate_dir)
            .with_config(cbindgen::Config::from_file("cbindgen.toml").unwrap())
            .generate()
            .expect("cbindgen failed")
            .write_to_file(std::path::Path::new(&crate_dir).join("include/readout.h"));
    }
}
