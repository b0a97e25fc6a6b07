// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex operator algebra on the composite Hilbert space
//! `atom (4 levels) x cavity mode (truncated Fock space)`.
//!
//! Basis ordering is atom-major and fixed globally:
//! `index = atom_level * fock_dim + photon_number`.
//!
//! Atomic levels follow the readout convention
//! `0 = spin-down ground, 1 = spin-up ground, 2 = spin-down excited,
//! 3 = spin-up excited`; `sigma(i, j)` maps level `i` to level `j`,
//! i.e. it embeds `|j><i|`.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;

pub const ATOM_DIM: usize = 4;

/// Ground spin-down level `|0>`.
pub const LVL_DOWN_G: usize = 0;
/// Ground spin-up level `|1>`.
pub const LVL_UP_G: usize = 1;
/// Excited spin-down level `|2>`.
pub const LVL_DOWN_E: usize = 2;
/// Excited spin-up level `|3>`.
pub const LVL_UP_E: usize = 3;

/// Dimensions of the composite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertLayout {
    pub fock_dim: usize,
}

impl HilbertLayout {
    pub fn new(fock_dim: usize) -> Self {
        assert!(fock_dim >= 2, "Fock truncation needs at least two levels");
        Self { fock_dim }
    }

    pub fn total_dim(&self) -> usize {
        ATOM_DIM * self.fock_dim
    }

    /// Composite basis index for `|atom_level> (x) |photons>`.
    pub fn index(&self, atom_level: usize, photons: usize) -> usize {
        debug_assert!(atom_level < ATOM_DIM && photons < self.fock_dim);
        atom_level * self.fock_dim + photons
    }
}

/// A dense operator on the composite space.
#[derive(Debug, Clone)]
pub struct QOperator {
    pub layout: HilbertLayout,
    pub matrix: Array2<C64>,
}

impl QOperator {
    pub fn new(layout: HilbertLayout, matrix: Array2<C64>) -> Result<Self> {
        let n = layout.total_dim();
        if matrix.dim() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.nrows(),
            });
        }
        Ok(Self { layout, matrix })
    }

    pub fn zeros(layout: HilbertLayout) -> Self {
        let n = layout.total_dim();
        Self {
            layout,
            matrix: Array2::zeros((n, n)),
        }
    }

    pub fn identity(layout: HilbertLayout) -> Self {
        let n = layout.total_dim();
        Self {
            layout,
            matrix: Array2::eye(n).mapv(|x: f64| C64::new(x, 0.0)),
        }
    }

    pub fn dag(&self) -> Self {
        Self {
            layout: self.layout,
            matrix: linalg::dagger(&self.matrix),
        }
    }

    pub fn dot(&self, other: &Self) -> Self {
        assert_eq!(self.layout, other.layout, "operator layouts must match");
        Self {
            layout: self.layout,
            matrix: linalg::matmul(&self.matrix, &other.matrix),
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            layout: self.layout,
            matrix: self.matrix.mapv(|z| z * s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.layout, other.layout, "operator layouts must match");
        Self {
            layout: self.layout,
            matrix: &self.matrix + &other.matrix,
        }
    }

    /// max |A - A^dag| over all elements; 0 for exactly Hermitian operators.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = &self.matrix - &linalg::dagger(&self.matrix);
        linalg::max_abs(&d)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().iter().sum()
    }
}

/// Embed `atom_op (x) fock_op` under the atom-major index ordering.
pub fn tensor(
    layout: HilbertLayout,
    atom_op: &Array2<C64>,
    fock_op: &Array2<C64>,
) -> Result<QOperator> {
    if atom_op.dim() != (ATOM_DIM, ATOM_DIM) {
        return Err(Error::DimensionMismatch {
            expected: ATOM_DIM,
            got: atom_op.nrows(),
        });
    }
    if fock_op.dim() != (layout.fock_dim, layout.fock_dim) {
        return Err(Error::DimensionMismatch {
            expected: layout.fock_dim,
            got: fock_op.nrows(),
        });
    }
    QOperator::new(layout, linalg::kron(atom_op, fock_op))
}

/// Bare-mode annihilation operator embedded as `I_4 (x) a`.
pub fn annihilation(layout: HilbertLayout) -> QOperator {
    let nf = layout.fock_dim;
    let mut a = Array2::zeros((nf, nf));
    for n in 1..nf {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    let eye4 = Array2::eye(ATOM_DIM).mapv(|x: f64| C64::new(x, 0.0));
    tensor(layout, &eye4, &a).expect("dimensions are consistent by construction")
}

/// Atomic transition operator `sigma(i, j) = |j><i| (x) I_fock`
/// (maps level `i` to level `j`).
pub fn atomic_sigma(layout: HilbertLayout, i: usize, j: usize) -> Result<QOperator> {
    if i >= ATOM_DIM {
        return Err(Error::LevelIndex(i));
    }
    if j >= ATOM_DIM {
        return Err(Error::LevelIndex(j));
    }
    let mut atom = Array2::zeros((ATOM_DIM, ATOM_DIM));
    atom[[j, i]] = C64::new(1.0, 0.0);
    let eye = Array2::eye(layout.fock_dim).mapv(|x: f64| C64::new(x, 0.0));
    tensor(layout, &atom, &eye)
}

/// System density matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub layout: HilbertLayout,
    pub matrix: Array2<C64>,
}

impl DensityMatrix {
    pub fn new(layout: HilbertLayout, matrix: Array2<C64>) -> Result<Self> {
        let n = layout.total_dim();
        if matrix.dim() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: matrix.nrows(),
            });
        }
        Ok(Self { layout, matrix })
    }

    /// Pure state `|atom_level> (x) |photons>`.
    pub fn pure(layout: HilbertLayout, atom_level: usize, photons: usize) -> Self {
        let n = layout.total_dim();
        let mut m = Array2::zeros((n, n));
        let k = layout.index(atom_level, photons);
        m[[k, k]] = C64::new(1.0, 0.0);
        Self { layout, matrix: m }
    }

    /// Maximally mixed state.
    pub fn maximally_mixed(layout: HilbertLayout) -> Self {
        let n = layout.total_dim();
        let m = Array2::eye(n).mapv(|x: f64| C64::new(x / n as f64, 0.0));
        Self { layout, matrix: m }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().iter().sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = &self.matrix - &linalg::dagger(&self.matrix);
        linalg::max_abs(&d)
    }

    /// Smallest eigenvalue of the Hermitian part (negative values flag
    /// numerical positivity loss).
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let herm = (&self.matrix + &linalg::dagger(&self.matrix)).mapv(|z| z * 0.5);
        let w = linalg::eigvalsh(&herm)?;
        Ok(w.first().copied().unwrap_or(0.0))
    }

    /// Population of one atomic level (traced over the cavity mode).
    pub fn atom_population(&self, level: usize) -> f64 {
        let nf = self.layout.fock_dim;
        (0..nf)
            .map(|n| self.matrix[[self.layout.index(level, n), self.layout.index(level, n)]].re)
            .sum()
    }
}

/// `Tr(rho * op)`; real to within roundoff when `op` is Hermitian.
pub fn expectation(op: &QOperator, rho: &DensityMatrix) -> Result<C64> {
    if op.layout != rho.layout {
        return Err(Error::LayoutMismatch(
            op.layout.total_dim(),
            rho.layout.total_dim(),
        ));
    }
    let n = op.layout.total_dim();
    let mut s = C64::new(0.0, 0.0);
    // Tr(rho op) = sum_ij rho[i,j] op[j,i]
    for i in 0..n {
        for j in 0..n {
            s += rho.matrix[[i, j]] * op.matrix[[j, i]];
        }
    }
    Ok(s)
}
