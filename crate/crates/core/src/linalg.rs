// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Thin wrappers over system BLAS/LAPACK (OpenBLAS) for dense complex
//! matrices stored as row-major `ndarray::Array2<Complex64>`.
//!
//! Row-major buffers are handed to Fortran routines through the usual
//! transpose identities; `solve` and `eig` copy into column-major scratch.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use std::sync::Once;

use crate::error::{Error, Result};

#[allow(clippy::too_many_arguments)]
extern "C" {
    fn openblas_set_num_threads(n: i32);

    fn zgemm_(
        transa: *const u8,
        transb: *const u8,
        m: *const i32,
        n: *const i32,
        k: *const i32,
        alpha: *const C64,
        a: *const C64,
        lda: *const i32,
        b: *const C64,
        ldb: *const i32,
        beta: *const C64,
        c: *mut C64,
        ldc: *const i32,
    );

    fn zgesv_(
        n: *const i32,
        nrhs: *const i32,
        a: *mut C64,
        lda: *const i32,
        ipiv: *mut i32,
        b: *mut C64,
        ldb: *const i32,
        info: *mut i32,
    );

    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        w: *mut C64,
        vl: *mut C64,
        ldvl: *const i32,
        vr: *mut C64,
        ldvr: *const i32,
        work: *mut C64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );

    fn zheev_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        w: *mut f64,
        work: *mut C64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

static BLAS_INIT: Once = Once::new();

/// Pin OpenBLAS to one thread: sweep-level parallelism lives in rayon and
/// per-call thread pools would oversubscribe the cores.
fn init_blas() {
    BLAS_INIT.call_once(|| unsafe {
        openblas_set_num_threads(1);
    });
}

fn as_i32(n: usize) -> i32 {
    i32::try_from(n).expect("matrix dimension exceeds i32")
}

/// Row-major transposed copy into a column-major buffer.
fn to_col_major(a: &Array2<C64>) -> Vec<C64> {
    let (rows, cols) = a.dim();
    let mut out = vec![C64::new(0.0, 0.0); rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            out[i + j * rows] = a[[i, j]];
        }
    }
    out
}

fn from_col_major(buf: &[C64], rows: usize, cols: usize) -> Array2<C64> {
    let mut out = Array2::zeros((rows, cols));
    for i in 0..rows {
        for j in 0..cols {
            out[[i, j]] = buf[i + j * rows];
        }
    }
    out
}

/// C = A * B via zgemm.
pub fn matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    init_blas();
    let (m, ka) = a.dim();
    let (kb, n) = b.dim();
    assert_eq!(ka, kb, "matmul inner dimensions must agree");
    let mut c = Array2::<C64>::zeros((m, n));
    if m == 0 || n == 0 || ka == 0 {
        return c;
    }
    // zgemm reads raw buffers; force row-major contiguous storage.
    let a_std = a.as_standard_layout();
    let b_std = b.as_standard_layout();
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    // Row-major C = A*B is column-major C^T = B^T * A^T; the raw buffers of
    // row-major A, B, C are exactly those transposes.
    let (mi, ni, ki) = (as_i32(n), as_i32(m), as_i32(ka));
    unsafe {
        zgemm_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &mi,
            &ni,
            &ki,
            &one,
            b_std.as_ptr(),
            &mi,
            a_std.as_ptr(),
            &ki,
            &zero,
            c.as_mut_ptr(),
            &mi,
        );
    }
    c
}

/// Matrix-vector product y = A * x.
pub fn matvec(a: &Array2<C64>, x: &[C64]) -> Vec<C64> {
    init_blas();
    let (m, n) = a.dim();
    assert_eq!(n, x.len(), "matvec dimensions must agree");
    let a_std = a.as_standard_layout();
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut y = vec![C64::new(0.0, 0.0); m];
    // y = A x with row-major A: treat buffer as col-major A^T and ask for
    // the transposed product.
    let (rows, cols) = (as_i32(n), as_i32(m));
    let inc = 1i32;
    extern "C" {
        fn zgemv_(
            trans: *const u8,
            m: *const i32,
            n: *const i32,
            alpha: *const C64,
            a: *const C64,
            lda: *const i32,
            x: *const C64,
            incx: *const i32,
            beta: *const C64,
            y: *mut C64,
            incy: *const i32,
        );
    }
    unsafe {
        zgemv_(
            b"T".as_ptr(),
            &rows,
            &cols,
            &one,
            a_std.as_ptr(),
            &rows,
            x.as_ptr(),
            &inc,
            &zero,
            y.as_mut_ptr(),
            &inc,
        );
    }
    y
}

/// Solve A X = B for X (A square, full rank).
pub fn solve(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    init_blas();
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "solve expects a square matrix");
    assert_eq!(b.nrows(), n, "solve RHS row count must match");
    let nrhs = b.ncols();
    let mut a_cm = to_col_major(a);
    let mut b_cm = to_col_major(b);
    let mut ipiv = vec![0i32; n];
    let (ni, nrhsi) = (as_i32(n), as_i32(nrhs));
    let mut info = 0i32;
    unsafe {
        zgesv_(
            &ni,
            &nrhsi,
            a_cm.as_mut_ptr(),
            &ni,
            ipiv.as_mut_ptr(),
            b_cm.as_mut_ptr(),
            &ni,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::SolveFailure(info));
    }
    Ok(from_col_major(&b_cm, n, nrhs))
}

/// Right eigenpairs of a general complex matrix.
pub struct Eigen {
    /// Eigenvalues, in LAPACK order.
    pub values: Array1<C64>,
    /// Right eigenvectors; column `j` belongs to `values[j]`.
    pub vectors: Array2<C64>,
}

/// Full eigendecomposition via zgeev.
pub fn eig(a: &Array2<C64>) -> Result<Eigen> {
    init_blas();
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "eig expects a square matrix");
    let mut a_cm = to_col_major(a);
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut vr = vec![C64::new(0.0, 0.0); n * n];
    let mut rwork = vec![0.0f64; 2 * n];
    let ni = as_i32(n);
    let mut info = 0i32;
    // workspace query
    let mut wkopt = C64::new(0.0, 0.0);
    let m1 = -1i32;
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"V".as_ptr(),
            &ni,
            a_cm.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            vr.as_mut_ptr(),
            &ni,
            &mut wkopt,
            &m1,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    let lwork = wkopt.re as i32;
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"V".as_ptr(),
            &ni,
            a_cm.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            vr.as_mut_ptr(),
            &ni,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::EigFailure(info));
    }
    Ok(Eigen {
        values: Array1::from_vec(w),
        vectors: from_col_major(&vr, n, n),
    })
}

/// Eigenvalues (ascending) of a Hermitian matrix via zheev.
pub fn eigvalsh(a: &Array2<C64>) -> Result<Vec<f64>> {
    init_blas();
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "eigvalsh expects a square matrix");
    let mut a_cm = to_col_major(a);
    let mut w = vec![0.0f64; n];
    let mut rwork = vec![0.0f64; (3 * n).max(1)];
    let ni = as_i32(n);
    let mut info = 0i32;
    let mut wkopt = C64::new(0.0, 0.0);
    let m1 = -1i32;
    unsafe {
        zheev_(
            b"N".as_ptr(),
            b"L".as_ptr(),
            &ni,
            a_cm.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            &mut wkopt,
            &m1,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    let lwork = wkopt.re as i32;
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
    unsafe {
        zheev_(
            b"N".as_ptr(),
            b"L".as_ptr(),
            &ni,
            a_cm.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::EigFailure(info));
    }
    Ok(w)
}

/// Conjugate transpose (standard-layout output).
pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    let (rows, cols) = a.dim();
    Array2::from_shape_fn((cols, rows), |(i, j)| a[[j, i]].conj())
}

/// Largest elementwise modulus.
pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Induced 1-norm (max column abs sum).
pub fn norm_one(a: &Array2<C64>) -> f64 {
    let (rows, cols) = a.dim();
    let mut best = 0.0f64;
    for j in 0..cols {
        let mut s = 0.0;
        for i in 0..rows {
            s += a[[i, j]].norm();
        }
        best = best.max(s);
    }
    best
}

/// Kronecker product (row-major index convention: out[(i1*r+i2),(j1*s+j2)]).
pub fn kron(x: &Array2<C64>, y: &Array2<C64>) -> Array2<C64> {
    let (p, q) = x.dim();
    let (r, s) = y.dim();
    let mut out = Array2::zeros((p * r, q * s));
    for i1 in 0..p {
        for j1 in 0..q {
            let xv = x[[i1, j1]];
            if xv == C64::new(0.0, 0.0) {
                continue;
            }
            for i2 in 0..r {
                for j2 in 0..s {
                    out[[i1 * r + i2, j1 * s + j2]] = xv * y[[i2, j2]];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn naive_matmul(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
        let (m, k) = a.dim();
        let n = b.ncols();
        let mut out = Array2::zeros((m, n));
        for i in 0..m {
            for j in 0..n {
                let mut s = C64::new(0.0, 0.0);
                for l in 0..k {
                    s += a[[i, l]] * b[[l, j]];
                }
                out[[i, j]] = s;
            }
        }
        out
    }

    fn test_matrix(n: usize, seed: u64) -> Array2<C64> {
        // deterministic pseudo-random entries from a splitmix stream
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z = z ^ (z >> 31);
            (z as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        Array2::from_shape_fn((n, n), |_| C64::new(next(), next()))
    }

    #[test]
    fn matmul_matches_naive() {
        let a = test_matrix(7, 1);
        let b = test_matrix(7, 2);
        let fast = matmul(&a, &b);
        let slow = naive_matmul(&a, &b);
        assert!(max_abs(&(&fast - &slow)) < 1e-12);
    }

    #[test]
    fn matvec_matches_matmul() {
        let a = test_matrix(6, 3);
        let x: Vec<C64> = (0..6).map(|i| c(i as f64, -(i as f64) / 2.0)).collect();
        let xm = Array2::from_shape_fn((6, 1), |(i, _)| x[i]);
        let want = matmul(&a, &xm);
        let got = matvec(&a, &x);
        for i in 0..6 {
            assert_abs_diff_eq!(got[i].re, want[[i, 0]].re, epsilon = 1e-12);
            assert_abs_diff_eq!(got[i].im, want[[i, 0]].im, epsilon = 1e-12);
        }
    }

    #[test]
    fn solve_recovers_rhs() {
        let a = test_matrix(9, 4);
        let x = test_matrix(9, 5);
        let b = matmul(&a, &x);
        let got = solve(&a, &b).unwrap();
        assert!(max_abs(&(&got - &x)) < 1e-9);
    }

    #[test]
    fn eig_residual_small() {
        let a = test_matrix(8, 6);
        let e = eig(&a).unwrap();
        let av = matmul(&a, &e.vectors);
        for j in 0..8 {
            for i in 0..8 {
                let r = av[[i, j]] - e.values[j] * e.vectors[[i, j]];
                assert!(r.norm() < 1e-10, "residual {} at ({},{})", r.norm(), i, j);
            }
        }
    }

    #[test]
    fn eigvalsh_on_known_matrix() {
        // [[1, 2i],[-2i, 3]] has eigenvalues 2 +- sqrt(5)
        let mut a = Array2::zeros((2, 2));
        a[[0, 0]] = c(1.0, 0.0);
        a[[0, 1]] = c(0.0, 2.0);
        a[[1, 0]] = c(0.0, -2.0);
        a[[1, 1]] = c(3.0, 0.0);
        let w = eigvalsh(&a).unwrap();
        assert_abs_diff_eq!(w[0], 2.0 - 5.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], 2.0 + 5.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn kron_identity_blocks() {
        let i2 = Array2::eye(2).mapv(|x: f64| c(x, 0.0));
        let a = test_matrix(3, 7);
        let k = kron(&i2, &a);
        assert_eq!(k.dim(), (6, 6));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(k[[i, j]], a[[i, j]]);
                assert_eq!(k[[3 + i, 3 + j]], a[[i, j]]);
                assert_eq!(k[[i, 3 + j]], c(0.0, 0.0));
            }
        }
    }
}
