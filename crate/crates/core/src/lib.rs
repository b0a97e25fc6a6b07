// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Simulation engine for single-shot optical readout of a cavity-coupled
//! four-level emitter spin (e.g. a T center in silicon).
//!
//! The engine models the emitter + single cavity mode as an open quantum
//! system (Lindblad master equation on a dense, truncated Hilbert space)
//! and evaluates two readout protocols:
//!
//! * fluorescence readout — repeated excite-collect cycles on the
//!   cavity-enhanced spin-conserving transition ([`fluorescence`]);
//! * reflection readout — spin-dependent cavity reflection of a probe
//!   pulse ([`reflection`]).
//!
//! Photon-count statistics and the thresholded readout fidelity live in
//! [`counts`]; slow spectral wandering of the optical transition in
//! [`diffusion`]. Everything is deterministic: no RNG is used anywhere.

pub mod cache;
pub mod config;
pub mod counts;
pub mod diffusion;
pub mod error;
pub mod expm;
pub mod figures;
pub mod fluorescence;
pub mod linalg;
pub mod lindblad;
pub mod model;
pub mod operators;
pub mod reflection;
pub mod report;
pub mod simplex;

pub use error::{Error, Result};
pub use operators::{DensityMatrix, HilbertLayout, QOperator};

/// Engine version recorded in cached result records.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
