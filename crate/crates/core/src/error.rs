// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error types shared across the engine.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator layouts differ: {0} vs {1}")]
    LayoutMismatch(usize, usize),

    #[error("atomic level index {0} out of range (0..=3)")]
    LevelIndex(usize),

    #[error("total linewidth must satisfy gamma >= gamma0 (gamma = {gamma:.6e}, gamma0 = {gamma0:.6e})")]
    InvalidLinewidth { gamma: f64, gamma0: f64 },

    #[error("Hamiltonian is not Hermitian (max |H - H^dag| = {0:.3e})")]
    NonHermitian(f64),

    #[error("density matrix lost positivity: min eigenvalue {min_eig:.3e} at t = {t:.3e} s (trace {trace:.12})")]
    PositivityLoss { min_eig: f64, t: f64, trace: f64 },

    #[error("decay fit rejected: R^2 = {r_squared:.6} below 0.999 over {points} points")]
    FitQuality { r_squared: f64, points: usize },

    #[error("no quasi-steady state within {0:.1} cavity lifetimes")]
    NoSteadyState(f64),

    #[error("observable `{0}` not present in trajectory")]
    UnknownObservable(String),

    #[error("no Fock-space convergence by dimension {0}; drive too strong for dense truncation")]
    NoFockConvergence(usize),

    #[error("output-grid refinement failed: relative change {0:.3e} after doubling twice")]
    GridRefinement(f64),

    #[error("mixture weights must sum to 1 (got {0:.12})")]
    WeightSum(f64),

    #[error("eigendecomposition failed: LAPACK zgeev info = {0}")]
    EigFailure(i32),

    #[error("linear solve failed: LAPACK zgesv info = {0}")]
    SolveFailure(i32),

    #[error("config error: {0}")]
    Config(String),

    #[error("optimizer returned a boundary point (|detuning| at the +-5 kappa box edge); widen the search box")]
    BoundaryOptimum,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code category: 1 for configuration problems, 2 for engine failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            _ => 2,
        }
    }
}
