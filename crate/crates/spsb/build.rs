//! Links the system OpenBLAS (which bundles BLAS, CBLAS, and LAPACK) for
//! `ndarray-linalg`, which is used without its source-build backend features.
//! libgfortran is required by the Fortran-compiled LAPACK routines inside
//! libopenblas.

fn main() {
    println!("cargo:rustc-link-lib=dylib=openblas");
    println!("cargo:rustc-link-lib=dylib=gfortran");
}
