// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Slow spectral wandering of the optical transition and its effect on both
//! readout protocols.
//!
//! The transition frequency is frozen per measurement shot at
//! `omega_a = omega_a0 + delta_omega`, with the offset Gaussian-distributed:
//! `G(dw) = (1/Gamma_sd) sqrt(ln2/pi) exp[-ln2 (dw/Gamma_sd)^2]`
//! (FWHM `2 Gamma_sd`). The detected-count distribution becomes a Gaussian-
//! weighted mixture of Poissonians over the quadrature grid, thresholded the
//! usual way. All readout parameters (detunings, collection windows, pulse
//! repetition) stay at their zero-offset values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counts::{fidelity, fidelity_at, mixture, poisson, CountDistribution, ReadoutResult};
use crate::error::Result;
use crate::fluorescence::{self, FluorescenceOutcome, FluorescenceScenario};
use crate::model::DriveParams;
use crate::reflection::{self, ReflectionOutcome, ReflectionScenario};

/// Which protocol the diffusion study drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    Fluorescence,
    Reflection,
}

pub const QUADRATURE_POINTS: usize = 41;
pub const QUADRATURE_SPAN_SIGMA: f64 = 3.0;

/// Gaussian quadrature grid over the frozen-offset distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffusionModel {
    /// Half-FWHM of the diffusion broadening, rad/s.
    pub gamma_sd: f64,
    /// `(delta_omega, weight)` pairs; weights sum to 1.
    pub quadrature: Vec<(f64, f64)>,
}

impl DiffusionModel {
    /// Uniform grid over `+-3 Gamma_sd` with renormalized Gaussian weights.
    pub fn new(gamma_sd: f64) -> Self {
        Self::with_points(gamma_sd, QUADRATURE_POINTS)
    }

    pub fn with_points(gamma_sd: f64, n_points: usize) -> Self {
        assert!(gamma_sd >= 0.0);
        if gamma_sd == 0.0 {
            return Self {
                gamma_sd,
                quadrature: vec![(0.0, 1.0)],
            };
        }
        assert!(n_points >= 3, "quadrature needs at least 3 points");
        let ln2 = std::f64::consts::LN_2;
        let span = QUADRATURE_SPAN_SIGMA * gamma_sd;
        let mut pts = Vec::with_capacity(n_points);
        let mut norm = 0.0;
        for k in 0..n_points {
            let dw = -span + 2.0 * span * k as f64 / (n_points - 1) as f64;
            let w = (-ln2 * (dw / gamma_sd).powi(2)).exp();
            norm += w;
            pts.push((dw, w));
        }
        for p in pts.iter_mut() {
            p.1 /= norm;
        }
        Self {
            gamma_sd,
            quadrature: pts,
        }
    }

    pub fn weight_sum(&self) -> f64 {
        self.quadrature.iter().map(|(_, w)| w).sum()
    }
}

/// Readout parameters frozen at their zero-offset values, reused at every
/// quadrature node.
pub struct FrozenReadout {
    pub protocol: Protocol,
    fluor: Option<(FluorescenceScenario, f64, u64)>,
    refl: Option<(ReflectionScenario, DriveParams)>,
    /// Zero-offset outcome (threshold, role assignment, baseline fidelity).
    pub baseline_up: f64,
    pub baseline_down: f64,
    pub baseline: ReadoutResult,
}

/// Evaluate the zero-offset scenario once and freeze every readout
/// parameter for the detuning studies.
pub fn freeze_fluorescence(scn: &FluorescenceScenario) -> Result<(FrozenReadout, FluorescenceOutcome)> {
    let out = fluorescence::fluorescence_fidelity(scn)?;
    Ok((
        FrozenReadout {
            protocol: Protocol::Fluorescence,
            fluor: Some((scn.clone(), out.t_wait, out.n_cyc)),
            refl: None,
            baseline_up: out.n_ph_up,
            baseline_down: out.n_ph_down,
            baseline: out.result,
        },
        out,
    ))
}

pub fn freeze_reflection(scn: &ReflectionScenario) -> Result<(FrozenReadout, ReflectionOutcome)> {
    let out = reflection::reflection_fidelity(scn)?;
    let drive = DriveParams {
        p_in: scn.p_in,
        delta_a: out.delta_a,
        delta_c: out.delta_c,
        t_pulse: scn.t_pulse,
    };
    let mut fixed = scn.clone();
    fixed.detunings = reflection::DetuningChoice::Explicit {
        delta_a: out.delta_a,
        delta_c: out.delta_c,
    };
    Ok((
        FrozenReadout {
            protocol: Protocol::Reflection,
            fluor: None,
            refl: Some((fixed, drive)),
            baseline_up: out.n_ph_up,
            baseline_down: out.n_ph_down,
            baseline: out.result,
        },
        out,
    ))
}

impl FrozenReadout {
    /// Count means `(up, down)` with the transition shifted by `delta_omega`.
    pub fn means_at(&self, delta_omega: f64) -> Result<(f64, f64)> {
        match self.protocol {
            Protocol::Fluorescence => {
                let (scn, t_wait, n_cyc) = self.fluor.as_ref().expect("fluorescence scenario");
                fluorescence::means_at_detuning(scn, *t_wait, *n_cyc, delta_omega)
            }
            Protocol::Reflection => {
                let (scn, drive) = self.refl.as_ref().expect("reflection scenario");
                reflection::means_at_detuning(&scn.system, drive, delta_omega, scn.fock_dim)
            }
        }
    }

    /// Readout infidelity at one frozen offset: threshold and bright/dark
    /// roles stay at their zero-offset optimum (the experimenter cannot
    /// track the wandering transition).
    pub fn infidelity_at(&self, delta_omega: f64) -> Result<f64> {
        let (up, down) = self.means_at(delta_omega)?;
        let m = self.baseline.threshold_m as usize;
        let (dark, bright) = if self.baseline.mean_down >= self.baseline.mean_up {
            (poisson(up), poisson(down))
        } else {
            (poisson(down), poisson(up))
        };
        Ok(1.0 - fidelity_at(&dark, &bright, m))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetuningCurvePoint {
    pub delta_omega: f64,
    pub infidelity: f64,
}

/// Readout infidelity across a grid of frozen transition offsets.
pub fn infidelity_vs_detuning(
    frozen: &FrozenReadout,
    grid: &[f64],
) -> Result<Vec<DetuningCurvePoint>> {
    grid.par_iter()
        .map(|&dw| {
            Ok(DetuningCurvePoint {
                delta_omega: dw,
                infidelity: frozen.infidelity_at(dw)?,
            })
        })
        .collect()
}

/// Mixed count distribution for one spin over the quadrature grid.
fn mixed_distribution(
    means: &[(f64, f64)],
    weights: &[f64],
    pick_up: bool,
) -> Result<CountDistribution> {
    let comps: Vec<(f64, CountDistribution)> = means
        .iter()
        .zip(weights)
        .map(|(&(up, down), &w)| (w, poisson(if pick_up { up } else { down })))
        .collect();
    mixture(&comps)
}

/// Diffusion-averaged readout: Gaussian-weighted mixtures of the per-offset
/// Poissonians for each spin, thresholded afresh on the mixtures.
pub fn diffused_fidelity(frozen: &FrozenReadout, model: &DiffusionModel) -> Result<ReadoutResult> {
    let means: Vec<(f64, f64)> = frozen
        .quadrature_means(model)?
        .into_iter()
        .map(|(_, up, down)| (up, down))
        .collect();
    let weights: Vec<f64> = model.quadrature.iter().map(|&(_, w)| w).collect();
    let dist_up = mixed_distribution(&means, &weights, true)?;
    let dist_down = mixed_distribution(&means, &weights, false)?;
    Ok(fidelity(&dist_up, &dist_down).with_duration(frozen.baseline.duration))
}

impl FrozenReadout {
    /// Per-node count means over the quadrature grid (parallel).
    pub fn quadrature_means(&self, model: &DiffusionModel) -> Result<Vec<(f64, f64, f64)>> {
        model
            .quadrature
            .par_iter()
            .map(|&(dw, _)| {
                let (up, down) = self.means_at(dw)?;
                Ok((dw, up, down))
            })
            .collect()
    }
}

/// Convergence check: doubling the quadrature density must leave the
/// diffused fidelity unchanged to better than 1e-5.
pub fn quadrature_doubling_delta(frozen: &FrozenReadout, gamma_sd: f64) -> Result<f64> {
    let base = diffused_fidelity(frozen, &DiffusionModel::with_points(gamma_sd, QUADRATURE_POINTS))?;
    let fine = diffused_fidelity(
        frozen,
        &DiffusionModel::with_points(gamma_sd, 2 * QUADRATURE_POINTS - 1),
    )?;
    Ok((fine.fidelity - base.fidelity).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn gaussian_weights_normalized_and_symmetric() {
        let m = DiffusionModel::new(1e9);
        assert_eq!(m.quadrature.len(), QUADRATURE_POINTS);
        assert_abs_diff_eq!(m.weight_sum(), 1.0, epsilon = 1e-12);
        let n = m.quadrature.len();
        for k in 0..n / 2 {
            assert_relative_eq!(
                m.quadrature[k].1,
                m.quadrature[n - 1 - k].1,
                max_relative = 1e-12
            );
            assert_abs_diff_eq!(
                m.quadrature[k].0,
                -m.quadrature[n - 1 - k].0,
                epsilon = 1.0
            );
        }
        // center weight is the largest and the ratio to the edge follows
        // exp(-ln2 * 9) for the 3-sigma span
        let center = m.quadrature[n / 2].1;
        let edge = m.quadrature[0].1;
        assert_relative_eq!(
            edge / center,
            (-std::f64::consts::LN_2 * 9.0f64).exp(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn zero_width_collapses_to_delta() {
        let m = DiffusionModel::new(0.0);
        assert_eq!(m.quadrature.len(), 1);
        assert_eq!(m.quadrature[0], (0.0, 1.0));
    }

    #[test]
    fn grid_spans_three_sigma() {
        let gamma_sd = 2.7e8;
        let m = DiffusionModel::new(gamma_sd);
        let lo = m.quadrature.first().unwrap().0;
        let hi = m.quadrature.last().unwrap().0;
        assert_abs_diff_eq!(lo, -3.0 * gamma_sd, epsilon = 1e-3);
        assert_abs_diff_eq!(hi, 3.0 * gamma_sd, epsilon = 1e-3);
    }
}
