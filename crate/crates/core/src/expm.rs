// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex matrix exponential by scaling-and-squaring with a degree-13
//! Pade approximant (Higham 2005). For arguments scaled below the theta_13
//! threshold the approximant is accurate to f64 roundoff, comfortably inside
//! the 1e-12 budget the propagation layer assumes.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::linalg::{matmul, norm_one, solve};

const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// exp(A) for a square complex matrix.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "expm expects a square matrix");

    let norm = norm_one(a);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scale = C64::new(0.5f64.powi(squarings as i32), 0.0);
    let a_s = a.mapv(|z| z * scale);

    let eye = Array2::eye(n).mapv(|x: f64| C64::new(x, 0.0));
    let a2 = matmul(&a_s, &a_s);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a2, &a4);

    let b = |k: usize| C64::new(PADE_13[k], 0.0);
    let w1 = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let w2 = &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &eye * b(1);
    let u = matmul(&a_s, &(matmul(&a6, &w1) + w2));

    let z1 = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = matmul(&a6, &z1) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &eye * b(0);

    // r = (V - U)^{-1} (V + U)
    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        r = matmul(&r, &r);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, max_abs};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = Array2::<C64>::zeros((5, 5));
        let e = expm(&z).unwrap();
        let eye = Array2::eye(5).mapv(|x: f64| c(x, 0.0));
        assert!(max_abs(&(&e - &eye)) < 1e-14);
    }

    #[test]
    fn exp_of_diagonal_is_elementwise() {
        let mut d = Array2::<C64>::zeros((3, 3));
        d[[0, 0]] = c(-2.5, 0.0);
        d[[1, 1]] = c(0.0, 3.0);
        d[[2, 2]] = c(1.0, -1.0);
        let e = expm(&d).unwrap();
        for i in 0..3 {
            let want = d[[i, i]].exp();
            assert_relative_eq!(e[[i, i]].re, want.re, max_relative = 1e-13);
            assert_relative_eq!(e[[i, i]].im, want.im, max_relative = 1e-13);
        }
    }

    #[test]
    fn exp_of_nilpotent_is_exact() {
        let mut a = Array2::<C64>::zeros((2, 2));
        a[[0, 1]] = c(1.0, 0.0);
        let e = expm(&a).unwrap();
        assert_relative_eq!(e[[0, 0]].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(e[[0, 1]].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(e[[1, 0]].re, 0.0, epsilon = 1e-14);
        assert_relative_eq!(e[[1, 1]].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn exp_of_skew_hermitian_is_unitary() {
        let mut state = 42u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let m = Array2::from_shape_fn((6, 6), |_| c(next(), next()));
        let h = (&m + &linalg::dagger(&m)).mapv(|z| z * 0.5);
        let a = h.mapv(|z| z * c(0.0, -1.0) * 20.0); // large norm forces squaring
        let u = expm(&a).unwrap();
        let udu = matmul(&linalg::dagger(&u), &u);
        let eye = Array2::eye(6).mapv(|x: f64| c(x, 0.0));
        assert!(max_abs(&(&udu - &eye)) < 1e-11);
    }

    #[test]
    fn exp_inverse_property() {
        let mut a = Array2::<C64>::zeros((3, 3));
        a[[0, 0]] = c(0.3, 0.1);
        a[[0, 1]] = c(-1.0, 0.4);
        a[[1, 0]] = c(0.2, 0.0);
        a[[1, 2]] = c(0.9, -0.3);
        a[[2, 2]] = c(-0.5, 0.7);
        let e = expm(&a).unwrap();
        let em = expm(&a.mapv(|z| -z)).unwrap();
        let prod = matmul(&e, &em);
        let eye = Array2::eye(3).mapv(|x: f64| c(x, 0.0));
        assert!(max_abs(&(&prod - &eye)) < 1e-13);
    }

    #[test]
    fn matches_spectral_exponential() {
        // diagonalizable test matrix: compare against V exp(D) V^{-1}
        let mut state = 7u64;
        let mut next = move || {
            state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let a = Array2::from_shape_fn((8, 8), |_| c(next(), next()));
        let e = expm(&a).unwrap();

        let eig = linalg::eig(&a).unwrap();
        let n = 8;
        let mut exp_d_vinv = {
            // rows scale: exp(D) V^{-1}; get V^{-1} by solving V X = I
            let eye = Array2::eye(n).mapv(|x: f64| c(x, 0.0));
            let vinv = linalg::solve(&eig.vectors, &eye).unwrap();
            vinv
        };
        for i in 0..n {
            let f = eig.values[i].exp();
            for j in 0..n {
                exp_d_vinv[[i, j]] *= f;
            }
        }
        let spectral = matmul(&eig.vectors, &exp_d_vinv);
        assert!(max_abs(&(&e - &spectral)) < 1e-9);
    }
}
