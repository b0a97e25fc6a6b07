fn main() {
    // BLAS + LAPACK provided by the system OpenBLAS (zgemm, zgesv, zgeev, zheev).
    println!("cargo:rustc-link-lib=dylib=openblas");
}
