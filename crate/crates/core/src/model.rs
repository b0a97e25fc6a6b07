// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Experimental parameters and their translation into the cavity-QED model:
//! derived rates, the driven four-level Hamiltonian and the collapse
//! operator set.
//!
//! All frequencies are stored as angular frequencies in rad/s. Config and
//! CLI I/O use ordinary frequencies (GHz, MHz, kHz), powers in pW and times
//! in ns; the conversion happens at the `config` boundary.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    annihilation, atomic_sigma, HilbertLayout, QOperator, LVL_DOWN_E, LVL_DOWN_G, LVL_UP_E,
    LVL_UP_G,
};

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Initialized electron-spin state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Spin {
    /// `|up_g>`, level 1. Dark under transition-A readout.
    Up,
    /// `|down_g>`, level 0. Bright under transition-A readout.
    Down,
}

impl Spin {
    pub fn ground_level(self) -> usize {
        match self {
            Spin::Up => LVL_UP_G,
            Spin::Down => LVL_DOWN_G,
        }
    }

    pub fn excited_level(self) -> usize {
        match self {
            Spin::Up => LVL_UP_E,
            Spin::Down => LVL_DOWN_E,
        }
    }
}

/// Static system parameters (cavity, emitter, efficiencies).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Cavity quality factor.
    pub q: f64,
    /// Optical wavelength, m.
    pub lambda: f64,
    /// Radiative (lifetime-limited) linewidth, rad/s.
    pub gamma0: f64,
    /// Total optical linewidth gamma = gamma0 + 2*gamma_d, rad/s.
    pub gamma: f64,
    /// Coupling ratio g_par / g_perp.
    pub r_g: f64,
    /// Simulated bare coupling, rad/s.
    pub g_sim: f64,
    /// Quantum efficiency entering g = g_sim * sqrt(eta_qe).
    pub eta_qe: f64,
    /// Cavity-waveguide efficiency kappa_wg / kappa.
    pub eta_cav: f64,
    /// Downstream detection efficiency.
    pub eta_det: f64,
    /// Half ground-state Zeeman splitting, rad/s.
    pub delta_g: f64,
    /// Half excited-state Zeeman splitting, rad/s.
    pub delta_e: f64,
    /// Relative phase between parallel and perpendicular couplings.
    pub phi: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::table3()
    }
}

impl SystemParams {
    /// Near-term target parameter set: Q = 2e5, gamma/2pi = 0.1 GHz, r_g = 10.
    pub fn table3() -> Self {
        Self {
            q: 2e5,
            lambda: 1326e-9,
            gamma0: TWO_PI * 169.3e3,
            gamma: TWO_PI * 0.1e9,
            r_g: 10.0,
            g_sim: TWO_PI * 376e6,
            eta_qe: 0.234,
            eta_cav: 0.5,
            eta_det: 0.275,
            // Individual Zeeman splittings are only constrained through the
            // 4 GHz gap between the spin-conserving transitions,
            // 2|delta_e - delta_g|. These defaults keep the spin-flipping
            // transitions C and D at least 5 GHz away from the cavity
            // (g_e ~ 2.0, g_h ~ 1.1 at B ~ 0.32 T).
            delta_g: TWO_PI * 4.5e9,
            delta_e: TWO_PI * 2.5e9,
            phi: std::f64::consts::FRAC_PI_2,
        }
    }

    /// Lower-Q, broader-line variant used in the fluorescence dynamics study.
    pub fn fig2a() -> Self {
        Self {
            q: 1e5,
            gamma: TWO_PI * 1e9,
            ..Self::table3()
        }
    }

    /// Pure dephasing rate gamma_d = (gamma - gamma0) / 2.
    pub fn gamma_d(&self) -> f64 {
        (self.gamma - self.gamma0) / 2.0
    }

    /// Total system efficiency for detected fluorescence.
    pub fn eta_sys(&self) -> f64 {
        self.eta_cav * self.eta_det
    }

    /// Human-readable invariant violations (empty when valid).
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.q > 0.0) {
            v.push(format!("Q must be positive (got {})", self.q));
        }
        if !(self.lambda > 0.0) {
            v.push(format!("lambda must be positive (got {})", self.lambda));
        }
        if !(self.gamma0 > 0.0) {
            v.push(format!("gamma0 must be positive (got {:e})", self.gamma0));
        }
        if self.gamma < self.gamma0 {
            v.push(format!(
                "gamma ({:.6e}) must be >= gamma0 ({:.6e})",
                self.gamma, self.gamma0
            ));
        }
        for (name, eta) in [
            ("eta_QE", self.eta_qe),
            ("eta_cav", self.eta_cav),
            ("eta_det", self.eta_det),
        ] {
            if !(eta > 0.0 && eta <= 1.0) {
                v.push(format!("{name} must lie in (0, 1] (got {eta})"));
            }
        }
        if !(self.r_g > 0.0) {
            v.push(format!("r_g must be positive (got {})", self.r_g));
        }
        if !(self.g_sim >= 0.0) {
            v.push(format!("g_sim must be non-negative (got {:e})", self.g_sim));
        }
        v
    }

    pub fn check(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v.join("; ")))
        }
    }
}

/// Rates derived from [`SystemParams`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DerivedRates {
    /// Bare optical carrier 2 pi c / lambda, rad/s.
    pub omega_c0: f64,
    /// Total cavity decay omega_c0 / Q, rad/s.
    pub kappa: f64,
    /// Waveguide-coupled cavity decay, rad/s.
    pub kappa_wg: f64,
    /// Scattering cavity decay, rad/s.
    pub kappa_sc: f64,
    /// Effective atom-cavity coupling g = g_sim sqrt(eta_QE), rad/s.
    pub g: f64,
    /// Spin-conserving coupling g r_g / sqrt(1 + r_g^2), rad/s.
    pub g_par: f64,
    /// Spin-flipping coupling g / sqrt(1 + r_g^2), rad/s.
    pub g_perp: f64,
    /// Cooperativity 4 g^2 / (kappa gamma).
    pub cooperativity: f64,
}

pub fn derive_rates(params: &SystemParams) -> DerivedRates {
    let omega_c0 = TWO_PI * SPEED_OF_LIGHT / params.lambda;
    let kappa = omega_c0 / params.q;
    let kappa_wg = params.eta_cav * kappa;
    let g = params.g_sim * params.eta_qe.sqrt();
    let denom = (1.0 + params.r_g * params.r_g).sqrt();
    DerivedRates {
        omega_c0,
        kappa,
        kappa_wg,
        kappa_sc: kappa - kappa_wg,
        g,
        g_par: g * params.r_g / denom,
        g_perp: g / denom,
        cooperativity: 4.0 * g * g / (kappa * params.gamma),
    }
}

/// Laser drive and frame parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Input optical power right before the cavity, W.
    pub p_in: f64,
    /// Atomic detuning omega_a - omega_L, rad/s.
    pub delta_a: f64,
    /// Cavity detuning omega_c - omega_L, rad/s.
    pub delta_c: f64,
    /// Square-pulse width, s.
    pub t_pulse: f64,
}

impl DriveParams {
    /// Input photon flux P_in / (hbar omega_L), 1/s. The carrier frequency
    /// in this conversion is the bare 2 pi c / lambda: detunings are many
    /// orders of magnitude smaller and would otherwise make the flux depend
    /// circularly on the detuning.
    pub fn photon_flux(&self, rates: &DerivedRates) -> f64 {
        self.p_in / (HBAR * rates.omega_c0)
    }

    pub fn with_power(self, p_in: f64) -> Self {
        Self { p_in, ..self }
    }

    pub fn undriven(self) -> Self {
        Self { p_in: 0.0, ..self }
    }
}

/// Detunings of the four optical transitions from the laser, rad/s.
///
/// A, B conserve the spin; C, D flip it.
#[derive(Debug, Clone, Copy)]
pub struct TransitionDetunings {
    /// `|0> <-> |2>` (spin-down conserving).
    pub a: f64,
    /// `|1> <-> |3>` (spin-up conserving).
    pub b: f64,
    /// `|0> <-> |3>` (flip).
    pub c: f64,
    /// `|1> <-> |2>` (flip).
    pub d: f64,
}

pub fn transition_detunings(params: &SystemParams, drive: &DriveParams) -> TransitionDetunings {
    TransitionDetunings {
        a: drive.delta_a + params.delta_g - params.delta_e,
        b: drive.delta_a - params.delta_g + params.delta_e,
        c: drive.delta_a + params.delta_g + params.delta_e,
        d: drive.delta_a - params.delta_g - params.delta_e,
    }
}

/// Atomic detuning that puts the laser exactly on transition A.
pub fn delta_a_resonant_with_a(params: &SystemParams) -> f64 {
    params.delta_e - params.delta_g
}

/// Spin-conserving branch detuning seen by a given initialized spin.
pub fn branch_detuning(params: &SystemParams, drive: &DriveParams, spin: Spin) -> f64 {
    let t = transition_detunings(params, drive);
    match spin {
        Spin::Down => t.a,
        Spin::Up => t.b,
    }
}

/// Assemble the driven four-level Hamiltonian (units of rad/s, frame of the
/// incident laser):
///
/// `H = dc a'a + dg (s11 - s00) + (da - de) s22 + (da + de) s33`
/// `  + [g_par (s31 + s20) a' + g_perp e^{i phi} (s30 + s21) a' + h.c.]`
/// `  + sqrt(kappa eta_cav eps) (a' + a)`
pub fn build_hamiltonian(
    params: &SystemParams,
    rates: &DerivedRates,
    drive: &DriveParams,
    layout: HilbertLayout,
) -> Result<QOperator> {
    let eps = drive.photon_flux(rates);
    let drive_amp = (rates.kappa * params.eta_cav * eps).sqrt();
    hamiltonian_with_couplings(
        params,
        rates.g_par,
        rates.g_perp,
        drive.delta_a,
        drive.delta_c,
        drive_amp,
        layout,
    )
}

/// Hamiltonian assembly with explicit couplings; lets tests pin exact
/// zero couplings and keeps the drive-amplitude scaling visible.
pub fn hamiltonian_with_couplings(
    params: &SystemParams,
    g_par: f64,
    g_perp: f64,
    delta_a: f64,
    delta_c: f64,
    drive_amp: f64,
    layout: HilbertLayout,
) -> Result<QOperator> {
    let a = annihilation(layout);
    let ad = a.dag();
    let sig = |i, j| atomic_sigma(layout, i, j);

    let n = layout.total_dim();
    let mut h = Array2::<C64>::zeros((n, n));

    let re = |x: f64| C64::new(x, 0.0);

    // detuning terms
    h = h + &ad.dot(&a).matrix * re(delta_c);
    h = h + &sig(1, 1)?.matrix * re(params.delta_g) - &sig(0, 0)?.matrix * re(params.delta_g);
    h = h + &sig(2, 2)?.matrix * re(delta_a - params.delta_e);
    h = h + &sig(3, 3)?.matrix * re(delta_a + params.delta_e);

    // atom-cavity couplings: lowering operators paired with photon creation
    let par = sig(3, 1)?.add(&sig(2, 0)?).dot(&ad);
    let phase = C64::from_polar(1.0, params.phi);
    let perp = sig(3, 0)?.add(&sig(2, 1)?).dot(&ad);
    let coupling = &par.matrix * re(g_par) + &perp.matrix * (phase * g_perp);
    h = h + &coupling + &crate::linalg::dagger(&coupling);

    // coherent drive on the cavity
    h = h + (&ad.matrix + &a.matrix) * re(drive_amp);

    QOperator::new(layout, h)
}

/// Collapse operators of the dissipative channels:
/// cavity decay `sqrt(kappa) a`; excited-state dephasing
/// `sqrt(gamma_d/2) (s22 - s00)` and `sqrt(gamma_d/2) (s33 - s11)`;
/// balanced spontaneous emission `sqrt(gamma0/2)` on each of the four
/// optical transitions.
pub fn build_collapse_ops(
    params: &SystemParams,
    rates: &DerivedRates,
    layout: HilbertLayout,
) -> Result<Vec<QOperator>> {
    if params.gamma < params.gamma0 {
        return Err(Error::InvalidLinewidth {
            gamma: params.gamma,
            gamma0: params.gamma0,
        });
    }
    let gamma_d = params.gamma_d();
    let sig = |i, j| atomic_sigma(layout, i, j);

    let re = |x: f64| C64::new(x, 0.0);
    let cavity = annihilation(layout).scaled(re(rates.kappa.sqrt()));

    let deph = re((gamma_d / 2.0).sqrt());
    let sz1 = sig(2, 2)?.add(&sig(0, 0)?.scaled(re(-1.0))).scaled(deph);
    let sz2 = sig(3, 3)?.add(&sig(1, 1)?.scaled(re(-1.0))).scaled(deph);

    let spe = re((params.gamma0 / 2.0).sqrt());
    let s31 = sig(3, 1)?.scaled(spe);
    let s20 = sig(2, 0)?.scaled(spe);
    let s30 = sig(3, 0)?.scaled(spe);
    let s21 = sig(2, 1)?.scaled(spe);

    Ok(vec![cavity, sz1, sz2, s31, s20, s30, s21])
}
