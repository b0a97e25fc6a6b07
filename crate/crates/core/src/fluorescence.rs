// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Fluorescence readout: repeated excite-collect cycles on the
//! cavity-enhanced spin-conserving transition A.
//!
//! One sequence is a square laser pulse of width `t_pulse` followed by a
//! collection window `t_wait = 7 tau_cav` (the off-resonant lifetime by
//! default, the cavity-enhanced one in the fast variant). The sequence is
//! repeated `N_cyc = round(1/(1 - P_g))` times and the detected counts are
//!
//! `N_ph = beta_cav * eta_sys * sum_{n=0}^{N_cyc-1} P_e * P_g^n`
//!
//! with `P_e` the excited population of the initialized spin manifold at the
//! end of the pulse and `P_g` its ground population at the end of the first
//! sequence. Fluorescence from population already pumped to the other spin
//! state is neglected (the two manifolds are split by far more than the
//! cavity linewidth).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counts::{fidelity, poisson, ReadoutResult};
use crate::error::Result;
use crate::lindblad::{evolve_observed, fit_decay_rate, Liouvillian};
use crate::model::{
    build_collapse_ops, build_hamiltonian, delta_a_resonant_with_a, derive_rates, DriveParams,
    Spin, SystemParams,
};
use crate::operators::{atomic_sigma, DensityMatrix, HilbertLayout};

/// Which fluorescence lifetime sets the collection window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WaitMode {
    /// `t_wait = 7 tau_cav_off`: full decay regardless of the spin state.
    SevenTauOff,
    /// `t_wait = 7 tau_cav_on`: fast variant gated on the resonant lifetime.
    SevenTauOn,
}

pub const DEFAULT_FOCK_DIM: usize = 4;
pub const N_CYC_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FluorescenceScenario {
    pub system: SystemParams,
    pub drive: DriveParams,
    pub wait_mode: WaitMode,
    pub fock_dim: usize,
}

impl FluorescenceScenario {
    /// Cavity and laser resonant with transition A, default truncation.
    pub fn resonant(system: SystemParams, p_in: f64, t_pulse: f64, wait_mode: WaitMode) -> Self {
        let delta_a = delta_a_resonant_with_a(&system);
        Self {
            system,
            drive: DriveParams {
                p_in,
                delta_a,
                delta_c: 0.0,
                t_pulse,
            },
            wait_mode,
            fock_dim: DEFAULT_FOCK_DIM,
        }
    }

    pub fn with_fock_dim(self, fock_dim: usize) -> Self {
        Self { fock_dim, ..self }
    }
}

/// Cavity-modified decay rates of the two spin-conserving transitions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PurcellRates {
    /// Fitted decay rate of the cavity-resonant transition (A), rad/s.
    pub gamma_cav_on: f64,
    /// Fitted decay rate of the detuned transition (B), rad/s.
    pub gamma_cav_off: f64,
    /// Cavity-coupled emission fraction of the resonant transition.
    pub beta_cav: f64,
}

impl PurcellRates {
    pub fn tau_on(&self) -> f64 {
        1.0 / self.gamma_cav_on
    }

    pub fn tau_off(&self) -> f64 {
        1.0 / self.gamma_cav_off
    }

    pub fn beta_off(&self, gamma0: f64) -> f64 {
        (self.gamma_cav_off - gamma0) / self.gamma_cav_off
    }
}

/// Weak-coupling estimate of the cavity-added decay rate of one transition,
/// used only to size fit windows: `2 g^2 p / (p^2 + delta^2)` with
/// `p = kappa/2 + gamma/2`.
pub fn purcell_estimate(g: f64, detuning: f64, kappa: f64, gamma: f64) -> f64 {
    let p = 0.5 * (kappa + gamma);
    2.0 * g * g * p / (p * p + detuning * detuning)
}

fn undriven_liouvillian(scn: &FluorescenceScenario, layout: HilbertLayout) -> Result<Liouvillian> {
    let rates = derive_rates(&scn.system);
    let h = build_hamiltonian(&scn.system, &rates, &scn.drive.undriven(), layout)?;
    let collapse = build_collapse_ops(&scn.system, &rates, layout)?;
    Liouvillian::build(&h, &collapse)
}

/// Fit the undriven decay rate of the excited level populated at `t = 0`.
fn fit_excited_decay(
    l: &Liouvillian,
    layout: HilbertLayout,
    excited_level: usize,
    rate_estimate: f64,
    kappa: f64,
    gamma: f64,
) -> Result<f64> {
    let pop = atomic_sigma(layout, excited_level, excited_level)?;
    let rho0 = DensityMatrix::pure(layout, excited_level, 0);
    let mut rate = rate_estimate;
    for _ in 0..2 {
        // skip the polarization/cavity settling transient, then fit over
        // six e-foldings
        let t_skip = 10.0 / (kappa + gamma);
        let t_end = t_skip + 6.0 / rate;
        let n_pts = 300;
        let dt = (t_end - t_skip) / n_pts as f64;
        let times: Vec<f64> = (0..=n_pts).map(|k| t_skip + k as f64 * dt).collect();
        let traj = evolve_observed(l, &rho0, &times, &[("pop", &pop)])?;
        let fitted = fit_decay_rate(&traj, "pop")?;
        let close_enough = (fitted - rate).abs() <= 0.2 * fitted;
        rate = fitted;
        if close_enough {
            break;
        }
    }
    Ok(rate)
}

/// Cavity-enhanced decay rates from undriven decay of `|2>` (transition A)
/// and `|3>` (transition B), plus the resonant emission fraction.
pub fn purcell_rates(scn: &FluorescenceScenario) -> Result<PurcellRates> {
    let layout = HilbertLayout::new(scn.fock_dim);
    let rates = derive_rates(&scn.system);
    let l = undriven_liouvillian(scn, layout)?;
    let t = crate::model::transition_detunings(&scn.system, &scn.drive);
    let gamma0 = scn.system.gamma0;

    let est_on = gamma0
        + purcell_estimate(
            rates.g_par,
            t.a - scn.drive.delta_c,
            rates.kappa,
            scn.system.gamma,
        );
    let est_off = gamma0
        + purcell_estimate(
            rates.g_par,
            t.b - scn.drive.delta_c,
            rates.kappa,
            scn.system.gamma,
        );

    let gamma_cav_on = fit_excited_decay(&l, layout, 2, est_on, rates.kappa, scn.system.gamma)?;
    let gamma_cav_off = fit_excited_decay(&l, layout, 3, est_off, rates.kappa, scn.system.gamma)?;

    Ok(PurcellRates {
        gamma_cav_on,
        gamma_cav_off,
        beta_cav: (gamma_cav_on - gamma0) / gamma_cav_on,
    })
}

/// Populations extracted from one excite-collect sequence:
/// the excited population of the initialized manifold at the end of the
/// pulse and its ground population at the end of the wait.
pub fn run_sequence(
    scn: &FluorescenceScenario,
    t_wait: f64,
    initial_spin: Spin,
) -> Result<(f64, f64)> {
    let layout = HilbertLayout::new(scn.fock_dim);
    let rates = derive_rates(&scn.system);
    let collapse = build_collapse_ops(&scn.system, &rates, layout)?;
    let h_on = build_hamiltonian(&scn.system, &rates, &scn.drive, layout)?;
    let h_off = build_hamiltonian(&scn.system, &rates, &scn.drive.undriven(), layout)?;
    let l_on = Liouvillian::build(&h_on, &collapse)?;
    let l_off = Liouvillian::build(&h_off, &collapse)?;

    let rho0 = DensityMatrix::pure(layout, initial_spin.ground_level(), 0);
    let after_pulse = l_on.propagate(&rho0, scn.drive.t_pulse)?;
    let p_e = after_pulse.atom_population(initial_spin.excited_level());
    let after_wait = l_off.propagate(&after_pulse, t_wait)?;
    let p_g = after_wait.atom_population(initial_spin.ground_level());
    Ok((p_e, p_g))
}

/// `sum_{n=0}^{n_cyc-1} p^n`, stable for p arbitrarily close to 1.
pub fn geometric_sum(p: f64, n_cyc: u64) -> f64 {
    let n = n_cyc as f64;
    if (1.0 - p).abs() < 1e-15 {
        return n;
    }
    (1.0 - (n * p.ln()).exp()) / (1.0 - p)
}

/// Sequence repetition count `round(1/(1 - P_g))`, at least 1, capped at
/// 1e6 when optical pumping is effectively absent.
pub fn cyclicity(p_g: f64) -> u64 {
    if p_g >= 1.0 {
        log::warn!("P_g = {p_g} >= 1: capping N_cyc at {N_CYC_CAP}");
        return N_CYC_CAP;
    }
    let n = (1.0 / (1.0 - p_g)).round() as u64;
    n.clamp(1, N_CYC_CAP)
}

/// Mean detected photons for one spin over the full readout.
pub fn mean_counts(p_e: f64, p_g: f64, beta_cav: f64, eta_sys: f64, n_cyc: u64) -> f64 {
    beta_cav * eta_sys * p_e * geometric_sum(p_g, n_cyc)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FluorescenceOutcome {
    /// Bright-manifold excited population at the end of the pulse.
    pub p_e: f64,
    /// Bright-manifold ground population at the end of the first sequence.
    pub p_g: f64,
    pub beta_cav: f64,
    /// Cavity-enhanced decay rate of the resonant transition, rad/s.
    pub gamma_cav: f64,
    pub gamma_cav_off: f64,
    pub t_wait: f64,
    pub t_seq: f64,
    pub n_cyc: u64,
    /// Mean detected photons with the spin initialized up (dark here).
    pub n_ph_up: f64,
    /// Mean detected photons with the spin initialized down (bright here).
    pub n_ph_down: f64,
    pub result: ReadoutResult,
    /// `N_cyc * t_seq`, seconds.
    pub total_time: f64,
    pub fock_dim: usize,
}

/// Full fluorescence-readout evaluation for one scenario.
pub fn fluorescence_fidelity(scn: &FluorescenceScenario) -> Result<FluorescenceOutcome> {
    let purcell = purcell_rates(scn)?;
    let t_wait = match scn.wait_mode {
        WaitMode::SevenTauOff => 7.0 * purcell.tau_off(),
        WaitMode::SevenTauOn => 7.0 * purcell.tau_on(),
    };
    let t_seq = scn.drive.t_pulse + t_wait;

    let (p_e_bright, p_g_bright) = run_sequence(scn, t_wait, Spin::Down)?;
    let (p_e_dark, p_g_dark) = run_sequence(scn, t_wait, Spin::Up)?;

    let n_cyc = cyclicity(p_g_bright);
    let eta_sys = scn.system.eta_sys();
    let beta_off = purcell.beta_off(scn.system.gamma0);

    let n_ph_down = mean_counts(p_e_bright, p_g_bright, purcell.beta_cav, eta_sys, n_cyc);
    let n_ph_up = mean_counts(p_e_dark, p_g_dark, beta_off, eta_sys, n_cyc);

    let total_time = n_cyc as f64 * t_seq;
    let result = fidelity(&poisson(n_ph_up), &poisson(n_ph_down)).with_duration(total_time);

    Ok(FluorescenceOutcome {
        p_e: p_e_bright,
        p_g: p_g_bright,
        beta_cav: purcell.beta_cav,
        gamma_cav: purcell.gamma_cav_on,
        gamma_cav_off: purcell.gamma_cav_off,
        t_wait,
        t_seq,
        n_cyc,
        n_ph_up,
        n_ph_down,
        result,
        total_time,
        fock_dim: scn.fock_dim,
    })
}

/// Mean counts per spin with the optical transition shifted by `delta_omega`
/// while every readout parameter (collection window, repetition count) stays
/// frozen at its unshifted value. The emission fractions follow the shifted
/// physics: detuning the emitter from the cavity is exactly what degrades
/// them.
pub fn means_at_detuning(
    scn: &FluorescenceScenario,
    t_wait: f64,
    n_cyc: u64,
    delta_omega: f64,
) -> Result<(f64, f64)> {
    let mut shifted = scn.clone();
    shifted.drive.delta_a += delta_omega;

    let purcell = purcell_rates(&shifted)?;
    let beta_off = purcell.beta_off(scn.system.gamma0);
    let eta_sys = scn.system.eta_sys();

    let (p_e_bright, p_g_bright) = run_sequence(&shifted, t_wait, Spin::Down)?;
    let (p_e_dark, p_g_dark) = run_sequence(&shifted, t_wait, Spin::Up)?;

    let n_down = mean_counts(p_e_bright, p_g_bright, purcell.beta_cav, eta_sys, n_cyc);
    let n_up = mean_counts(p_e_dark, p_g_dark, beta_off, eta_sys, n_cyc);
    Ok((n_up, n_down))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RgSweepRow {
    pub r_g: f64,
    pub t_pulse: f64,
    pub q: f64,
    pub gamma: f64,
    pub infidelity: f64,
}

/// Infidelity grid over `(r_g, t_pulse)` at fixed cavity and linewidth.
pub fn sweep_rg(
    system: &SystemParams,
    t_pulse_list: &[f64],
    rg_list: &[f64],
    p_in: f64,
    wait_mode: WaitMode,
) -> Result<Vec<RgSweepRow>> {
    assert!(!t_pulse_list.is_empty() && !rg_list.is_empty());
    let cells: Vec<(f64, f64)> = rg_list
        .iter()
        .flat_map(|&rg| t_pulse_list.iter().map(move |&tp| (rg, tp)))
        .collect();
    cells
        .par_iter()
        .map(|&(r_g, t_pulse)| {
            let sys = SystemParams { r_g, ..*system };
            let scn = FluorescenceScenario::resonant(sys, p_in, t_pulse, wait_mode);
            let out = fluorescence_fidelity(&scn)?;
            Ok(RgSweepRow {
                r_g,
                t_pulse,
                q: system.q,
                gamma: system.gamma,
                infidelity: out.result.infidelity(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TWO_PI;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn fig2a_scenario() -> FluorescenceScenario {
        FluorescenceScenario::resonant(
            SystemParams::fig2a(),
            100e-12,
            10e-9,
            WaitMode::SevenTauOff,
        )
    }

    #[test]
    fn uncoupled_emitter_has_no_purcell_enhancement() {
        let system = SystemParams {
            g_sim: 0.0,
            ..SystemParams::table3()
        };
        let scn = FluorescenceScenario::resonant(system, 100e-12, 10e-9, WaitMode::SevenTauOff);
        let p = purcell_rates(&scn).unwrap();
        assert_relative_eq!(p.gamma_cav_on, scn.system.gamma0, max_relative = 1e-6);
        assert_abs_diff_eq!(p.beta_cav, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn resonant_transition_decays_faster_than_detuned() {
        let p = purcell_rates(&fig2a_scenario()).unwrap();
        assert!(
            p.gamma_cav_on > 3.0 * p.gamma_cav_off,
            "on = {:e}, off = {:e}",
            p.gamma_cav_on,
            p.gamma_cav_off
        );
        assert!(p.beta_cav > 0.9);
    }

    #[test]
    fn purcell_rate_matches_bad_cavity_formula() {
        // kappa >> gamma regime where gamma0 + 4 g_par^2 / kappa holds to 5%
        let system = SystemParams {
            q: 1e5,
            gamma: TWO_PI * 0.02e9,
            ..SystemParams::table3()
        };
        let scn = FluorescenceScenario::resonant(system, 100e-12, 10e-9, WaitMode::SevenTauOff);
        let rates = derive_rates(&scn.system);
        let p = purcell_rates(&scn).unwrap();
        let analytic = scn.system.gamma0 + 4.0 * rates.g_par * rates.g_par / rates.kappa;
        assert_relative_eq!(p.gamma_cav_on, analytic, max_relative = 0.05);
    }

    #[test]
    fn no_excitation_without_power() {
        let mut scn = fig2a_scenario();
        scn.drive.p_in = 0.0;
        let (p_e, p_g) = run_sequence(&scn, 60e-9, Spin::Down).unwrap();
        assert_abs_diff_eq!(p_e, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p_g, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn bright_state_excites_more_than_dark() {
        let scn = fig2a_scenario();
        let purcell = purcell_rates(&scn).unwrap();
        let t_wait = 7.0 * purcell.tau_off();
        let (p_e_bright, p_g_bright) = run_sequence(&scn, t_wait, Spin::Down).unwrap();
        let (p_e_dark, _) = run_sequence(&scn, t_wait, Spin::Up).unwrap();
        assert!(
            p_e_bright > 10.0 * p_e_dark,
            "bright {p_e_bright}, dark {p_e_dark}"
        );
        // finite r_g leaks population out of the bright manifold
        assert!(p_g_bright < 1.0);
        assert!(p_g_bright > 0.9);
    }

    #[test]
    fn geometric_sum_matches_direct_sum() {
        let p: f64 = 0.9973;
        let direct: f64 = (0..1000).map(|n| p.powi(n)).sum();
        assert_relative_eq!(geometric_sum(p, 1000), direct, max_relative = 1e-12);
        assert_abs_diff_eq!(geometric_sum(1.0, 42), 42.0);
    }

    #[test]
    fn counts_vanish_without_excitation() {
        assert_eq!(mean_counts(0.0, 0.99, 0.9, 0.14, 100), 0.0);
    }

    #[test]
    fn system_efficiency_value() {
        // eta_sys = eta_cav * eta_det = 0.5 * 0.275 = 13.75%
        let p = SystemParams::table3();
        assert_abs_diff_eq!(p.eta_sys(), 0.13750, epsilon = 1e-12);
    }

    #[test]
    fn cyclicity_rounds_and_caps() {
        assert_eq!(cyclicity(0.0), 1);
        assert_eq!(cyclicity(0.5), 2);
        assert_eq!(cyclicity(0.9975), 400);
        assert_eq!(cyclicity(1.0), N_CYC_CAP);
        assert_eq!(cyclicity(1.0 - 1e-9), N_CYC_CAP);
    }
}
