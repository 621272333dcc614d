fn main() {
    // LAPACK symbols (zheevd) come from the system OpenBLAS.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
