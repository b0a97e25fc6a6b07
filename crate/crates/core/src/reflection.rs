// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Reflection readout: spin-dependent cavity reflection of a probe pulse.
//!
//! The one-sided cavity output obeys `a_out = a_in + sqrt(kappa_wg) a` with
//! `a_in = i sqrt(eps)`, giving the reflectivity `R = |<a_out>/<a_in>|^2`
//! and the detected count mean
//!
//! `N_ph = eta_det * integral_0^t_pulse |<a_in> + sqrt(kappa_wg) Tr[rho(t) a]|^2 dt`.
//!
//! Reflectivities are quasi-steady-state quantities evaluated under a weak
//! probe; counts always integrate the full transient including optical
//! pumping over the pulse. Detunings maximizing the spin contrast are found
//! by a coarse grid followed by simplex refinement (deterministic multistart,
//! probed at 0.1 pW).

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counts::{fidelity, poisson, ReadoutResult};
use crate::error::{Error, Result};
use crate::lindblad::{quasi_steady, Liouvillian, Spectral, SpectralState};
use crate::model::{
    branch_detuning, build_collapse_ops, build_hamiltonian, derive_rates, DerivedRates,
    DriveParams, Spin, SystemParams,
};
use crate::operators::{annihilation, expectation, DensityMatrix, HilbertLayout};
use crate::simplex::nelder_mead;

pub const DEFAULT_FOCK_DIM: usize = 4;
/// Truncation for weak-probe reflectivity spectra.
pub const PROBE_FOCK_DIM: usize = 3;
/// Truncation inside the contrast optimizer; the 0.1 pW probe populates the
/// cavity at the 1e-4 photon level, so two Fock levels resolve the contrast
/// far below the optimizer's own refinement stability.
pub const OPTIMIZER_FOCK_DIM: usize = 2;
/// Probe power for reflectivity spectra and detuning optimization, W.
pub const WEAK_PROBE_POWER: f64 = 0.1e-12;
/// Detuning search box half-width in units of kappa.
pub const SEARCH_BOX_KAPPA: f64 = 5.0;
/// Points per pulse for the reflected-counts integral before refinement.
pub const BASE_GRID_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DetuningChoice {
    /// Use the given `(delta_a, delta_c)` in rad/s.
    Explicit { delta_a: f64, delta_c: f64 },
    /// Maximize the weak-probe reflection contrast first.
    Optimize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReflectionScenario {
    pub system: SystemParams,
    /// Probe power during readout, W.
    pub p_in: f64,
    /// Pulse width, s.
    pub t_pulse: f64,
    pub detunings: DetuningChoice,
    pub fock_dim: usize,
}

impl ReflectionScenario {
    pub fn optimized(system: SystemParams, p_in: f64, t_pulse: f64) -> Self {
        Self {
            system,
            p_in,
            t_pulse,
            detunings: DetuningChoice::Optimize,
            fock_dim: DEFAULT_FOCK_DIM,
        }
    }

    pub fn with_fock_dim(self, fock_dim: usize) -> Self {
        Self { fock_dim, ..self }
    }
}

fn liouvillian_for(
    system: &SystemParams,
    rates: &DerivedRates,
    drive: &DriveParams,
    layout: HilbertLayout,
) -> Result<Liouvillian> {
    let h = build_hamiltonian(system, rates, drive, layout)?;
    let collapse = build_collapse_ops(system, rates, layout)?;
    Liouvillian::build(&h, &collapse)
}

fn steady_interval(system: &SystemParams, rates: &DerivedRates) -> f64 {
    if rates.g > 0.0 {
        10.0 * (1.0 / rates.kappa).max(1.0 / system.gamma)
    } else {
        10.0 / rates.kappa
    }
}

/// Quasi-steady reflectivity `R = |<a_out>/<a_in>|^2` for one spin.
pub fn reflectivity_numeric(
    system: &SystemParams,
    drive: &DriveParams,
    spin: Spin,
    fock_dim: usize,
) -> Result<f64> {
    assert!(drive.p_in > 0.0, "reflectivity needs a nonzero probe");
    let rates = derive_rates(system);
    let layout = HilbertLayout::new(fock_dim);
    let l = liouvillian_for(system, &rates, drive, layout)?;
    let rho0 = DensityMatrix::pure(layout, spin.ground_level(), 0);
    let a = annihilation(layout);
    let rho = quasi_steady(
        &l,
        &rho0,
        &a,
        steady_interval(system, &rates),
        1e-8,
        1e4 / rates.kappa,
    )?;
    let eps = drive.photon_flux(&rates);
    let a_in = C64::new(0.0, eps.sqrt());
    let a_out = a_in + C64::new(rates.kappa_wg.sqrt(), 0.0) * expectation(&a, &rho)?;
    Ok(a_out.norm_sqr() / eps)
}

/// Weak-excitation analytic reflection amplitude for a single transition
/// with coupling `g_par` and detuning `delta_a_eff` from the laser:
/// `r = 1 - kappa eta_cav / (kappa/2 + i delta_c + g^2/(i delta_a + gamma/2))`.
pub fn reflectivity_analytic(
    system: &SystemParams,
    rates: &DerivedRates,
    delta_a_eff: f64,
    delta_c: f64,
) -> C64 {
    let g2 = C64::new(rates.g_par * rates.g_par, 0.0);
    let atom = C64::new(system.gamma / 2.0, delta_a_eff);
    let cavity = C64::new(rates.kappa / 2.0, delta_c);
    C64::new(1.0, 0.0) - C64::new(rates.kappa * system.eta_cav, 0.0) / (cavity + g2 / atom)
}

/// Analytic amplitude for the spin-conserving branch seen by `spin`.
pub fn analytic_r_for_spin(system: &SystemParams, drive: &DriveParams, spin: Spin) -> C64 {
    let rates = derive_rates(system);
    reflectivity_analytic(
        system,
        &rates,
        branch_detuning(system, drive, spin),
        drive.delta_c,
    )
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OptimizedDetunings {
    pub delta_a: f64,
    pub delta_c: f64,
    pub contrast: f64,
    /// Set when the optimum sits on the search-box edge.
    pub on_boundary: bool,
}

fn contrast_at(
    system: &SystemParams,
    p_probe: f64,
    fock_dim: usize,
    delta_a: f64,
    delta_c: f64,
) -> Result<f64> {
    let drive = DriveParams {
        p_in: p_probe,
        delta_a,
        delta_c,
        t_pulse: 0.0,
    };
    let r_up = reflectivity_numeric(system, &drive, Spin::Up, fock_dim)?;
    let r_down = reflectivity_numeric(system, &drive, Spin::Down, fock_dim)?;
    Ok((r_up - r_down).abs())
}

/// Locate `(delta_a, delta_c)` maximizing the weak-probe reflection contrast
/// over the `+-5 kappa` box: coarse grid, then simplex refinement from the
/// best cells.
pub const OPTIMIZER_GRID_N: usize = 41;

pub fn optimize_detunings(
    system: &SystemParams,
    p_probe: f64,
    grid_n: usize,
) -> Result<OptimizedDetunings> {
    assert!(
        p_probe <= 1.0e-12,
        "contrast optimization assumes a weak probe"
    );
    let rates = derive_rates(system);
    let half = SEARCH_BOX_KAPPA * rates.kappa;
    let coord = |i: usize| -half + 2.0 * half * i as f64 / (grid_n - 1) as f64;

    let cells: Vec<(usize, usize)> = (0..grid_n)
        .flat_map(|i| (0..grid_n).map(move |j| (i, j)))
        .collect();
    let scored: Vec<(f64, f64, f64)> = cells
        .par_iter()
        .map(|&(i, j)| {
            let (da, dc) = (coord(i), coord(j));
            let c = contrast_at(system, p_probe, OPTIMIZER_FOCK_DIM, da, dc)?;
            Ok((c, da, dc))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut ranked = scored;
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let step = 2.0 * half / (grid_n - 1) as f64;

    let starts: Vec<(f64, f64, f64)> = ranked.iter().take(5).copied().collect();
    let refined: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .map(|&(_, da, dc)| {
            nelder_mead(
                |p| {
                    contrast_at(system, p_probe, OPTIMIZER_FOCK_DIM, p[0], p[1])
                        .map(|c| -c)
                        .unwrap_or(f64::INFINITY)
                },
                &[da, dc],
                &[step, step],
                &[-half, -half],
                &[half, half],
                80,
                1e-10,
            )
        })
        .collect();

    let mut best = (&refined[0].0, refined[0].1);
    for r in &refined[1..] {
        if r.1 < best.1 {
            best = (&r.0, r.1);
        }
    }
    let (delta_a, delta_c, contrast) = (best.0[0], best.0[1], -best.1);
    let edge = 1e-6 * rates.kappa;
    let on_boundary = delta_a.abs() >= half - edge || delta_c.abs() >= half - edge;
    if on_boundary {
        log::warn!(
            "contrast optimum on the search boundary (delta_a = {:.3e}, delta_c = {:.3e}); box may be too small",
            delta_a,
            delta_c
        );
    }
    Ok(OptimizedDetunings {
        delta_a,
        delta_c,
        contrast,
        on_boundary,
    })
}

/// Contrast with the cavity pinned to transition A (`delta_c` equals the
/// branch-A detuning); the laser placement is the remaining free parameter.
pub fn aligned_contrast(system: &SystemParams, p_probe: f64, grid_n: usize) -> Result<f64> {
    let rates = derive_rates(system);
    let half = SEARCH_BOX_KAPPA * rates.kappa;
    // delta_a tied so that the cavity sits exactly on transition A:
    // delta_c = delta_a + delta_g - delta_e
    let tied = |dc: f64| dc - system.delta_g + system.delta_e;

    let xs: Vec<f64> = (0..grid_n)
        .map(|i| -half + 2.0 * half * i as f64 / (grid_n - 1) as f64)
        .collect();
    let scored: Vec<(f64, f64)> = xs
        .par_iter()
        .map(|&dc| {
            let c = contrast_at(system, p_probe, OPTIMIZER_FOCK_DIM, tied(dc), dc)?;
            Ok((c, dc))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ranked = scored;
    ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let step = 2.0 * half / (grid_n - 1) as f64;

    let mut best = -f64::INFINITY;
    for &(_, dc0) in ranked.iter().take(3) {
        let (_, v) = nelder_mead(
            |p| {
                contrast_at(system, p_probe, OPTIMIZER_FOCK_DIM, tied(p[0]), p[0])
                    .map(|c| -c)
                    .unwrap_or(f64::INFINITY)
            },
            &[dc0],
            &[step],
            &[-half],
            &[half],
            60,
            1e-10,
        );
        best = best.max(-v);
    }
    Ok(best)
}

/// Cached evolution of one spin under one drive: the cavity amplitude
/// `<a>(t)` at arbitrary times from a single eigendecomposition (stepwise
/// matrix exponentials if the eigenbasis is unusable).
pub struct PulseEvaluator {
    eps: f64,
    kappa_wg: f64,
    eta_det: f64,
    kappa: f64,
    layout: HilbertLayout,
    rho0: DensityMatrix,
    mode: EvalMode,
}

enum EvalMode {
    Spectral {
        spectral: Spectral,
        state: SpectralState,
        /// Per-eigenmode weights of the `<a>` functional.
        weights: Vec<C64>,
        values: Vec<C64>,
    },
    Stepwise {
        l: Liouvillian,
    },
}

impl PulseEvaluator {
    pub fn new(
        system: &SystemParams,
        drive: &DriveParams,
        spin: Spin,
        fock_dim: usize,
    ) -> Result<Self> {
        let rates = derive_rates(system);
        let layout = HilbertLayout::new(fock_dim);
        let l = liouvillian_for(system, &rates, drive, layout)?;
        let rho0 = DensityMatrix::pure(layout, spin.ground_level(), 0);
        let a = annihilation(layout);

        let mode = match l.spectral().and_then(|sp| {
            let st = sp.prepare(&rho0)?;
            Ok((sp, st))
        }) {
            Ok((spectral, state)) => {
                // <a>(t) = sum_j w_j exp(lambda_j t): project the functional
                // Tr(a .) onto each eigenmode once
                let (values, weights) = spectral.functional_weights(&state, &a);
                EvalMode::Spectral {
                    spectral,
                    state,
                    weights,
                    values,
                }
            }
            Err(Error::EigFailure(_)) => EvalMode::Stepwise { l },
            Err(e) => return Err(e),
        };

        Ok(Self {
            eps: drive.photon_flux(&rates),
            kappa_wg: rates.kappa_wg,
            eta_det: system.eta_det,
            kappa: rates.kappa,
            layout,
            rho0,
            mode,
        })
    }

    /// `<a>` at each time of a strictly increasing grid.
    fn a_series(&self, times: &[f64]) -> Result<Vec<C64>> {
        match &self.mode {
            EvalMode::Spectral {
                weights, values, ..
            } => Ok(times
                .iter()
                .map(|&t| {
                    let mut acc = C64::new(0.0, 0.0);
                    for (w, v) in weights.iter().zip(values) {
                        acc += w * (v * t).exp();
                    }
                    acc
                })
                .collect()),
            EvalMode::Stepwise { l } => {
                let a = annihilation(self.layout);
                let mut out = Vec::with_capacity(times.len());
                let mut rho = self.rho0.clone();
                let mut t_prev = 0.0;
                for &t in times {
                    rho = l.propagate(&rho, t - t_prev)?;
                    t_prev = t;
                    out.push(expectation(&a, &rho)?);
                }
                Ok(out)
            }
        }
    }

    /// Full state at one time point (used for physicality spot checks).
    pub fn state_at(&self, t: f64) -> Result<DensityMatrix> {
        match &self.mode {
            EvalMode::Spectral {
                spectral, state, ..
            } => spectral.state_at(state, t),
            EvalMode::Stepwise { l } => l.propagate(&self.rho0, t),
        }
    }

    fn output_flux(&self, a_mean: C64) -> f64 {
        let a_in = C64::new(0.0, self.eps.sqrt());
        (a_in + C64::new(self.kappa_wg.sqrt(), 0.0) * a_mean).norm_sqr()
    }

    fn counts_on_grid(&self, t_pulse: f64, n_points: usize) -> Result<f64> {
        let t_min = (0.1 / self.kappa).min(t_pulse / 100.0);
        let ratio = t_pulse / t_min;
        let q = ratio.powf(1.0 / (n_points - 1) as f64);
        let mut times = Vec::with_capacity(n_points + 1);
        times.push(0.0);
        let mut t = t_min;
        for _ in 0..n_points {
            times.push(t.min(t_pulse));
            t *= q;
        }
        *times.last_mut().unwrap() = t_pulse;

        let series = self.a_series(&times[1..])?;
        let mut flux = Vec::with_capacity(times.len());
        flux.push(self.eps); // rho(0) is vacuum: prompt mirror reflection
        for a_mean in series {
            flux.push(self.output_flux(a_mean));
        }
        let mut integral = 0.0;
        for k in 1..times.len() {
            integral += 0.5 * (flux[k] + flux[k - 1]) * (times[k] - times[k - 1]);
        }
        Ok(self.eta_det * integral)
    }

    /// Detected reflected photons over the pulse: trapezoidal integral on a
    /// geometric grid, accepted only when doubling the grid moves the result
    /// by less than 1e-4 relative.
    pub fn counts(&self, t_pulse: f64) -> Result<f64> {
        assert!(t_pulse > 0.0);
        let floor = self.eta_det * self.eps * t_pulse * 1e-9 + 1e-300;
        let mut prev = self.counts_on_grid(t_pulse, BASE_GRID_POINTS)?;
        let mut delta = f64::INFINITY;
        for refine in 1..=4 {
            let next = self.counts_on_grid(t_pulse, BASE_GRID_POINTS << refine)?;
            delta = (next - prev).abs() / next.abs().max(floor);
            if delta < 1e-4 {
                // physicality spot check at the pulse end
                let rho_end = self.state_at(t_pulse)?;
                let min_eig = rho_end.min_eigenvalue()?;
                if min_eig < crate::lindblad::POSITIVITY_FAILURE {
                    return Err(Error::PositivityLoss {
                        min_eig,
                        t: t_pulse,
                        trace: rho_end.trace().re,
                    });
                }
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::GridRefinement(delta))
    }

    /// Hard upper bound on detectable photons (all incident light reflected).
    pub fn incident_counts(&self, t_pulse: f64) -> f64 {
        self.eta_det * self.eps * t_pulse
    }
}

/// Mean reflected counts for one spin at explicit detunings.
pub fn reflected_counts(
    system: &SystemParams,
    drive: &DriveParams,
    spin: Spin,
    fock_dim: usize,
) -> Result<f64> {
    PulseEvaluator::new(system, drive, spin, fock_dim)?.counts(drive.t_pulse)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReflectionOutcome {
    /// Weak-probe steady reflectivities at the operating detunings.
    pub r_up: f64,
    pub r_down: f64,
    pub contrast: f64,
    pub n_ph_up: f64,
    pub n_ph_down: f64,
    pub delta_a: f64,
    pub delta_c: f64,
    pub result: ReadoutResult,
    pub fock_dim: usize,
}

/// Resolve the scenario's detunings (optimizing if requested).
pub fn resolve_detunings(scn: &ReflectionScenario) -> Result<(f64, f64)> {
    match scn.detunings {
        DetuningChoice::Explicit { delta_a, delta_c } => Ok((delta_a, delta_c)),
        DetuningChoice::Optimize => {
            let opt = optimize_detunings(&scn.system, WEAK_PROBE_POWER, OPTIMIZER_GRID_N)?;
            Ok((opt.delta_a, opt.delta_c))
        }
    }
}

/// Full reflection-readout evaluation for one scenario.
pub fn reflection_fidelity(scn: &ReflectionScenario) -> Result<ReflectionOutcome> {
    let (delta_a, delta_c) = resolve_detunings(scn)?;
    let drive = DriveParams {
        p_in: scn.p_in,
        delta_a,
        delta_c,
        t_pulse: scn.t_pulse,
    };
    let n_ph_up = reflected_counts(&scn.system, &drive, Spin::Up, scn.fock_dim)?;
    let n_ph_down = reflected_counts(&scn.system, &drive, Spin::Down, scn.fock_dim)?;
    let result = fidelity(&poisson(n_ph_up), &poisson(n_ph_down)).with_duration(scn.t_pulse);

    let probe = DriveParams {
        p_in: WEAK_PROBE_POWER,
        ..drive
    };
    let r_up = reflectivity_numeric(&scn.system, &probe, Spin::Up, PROBE_FOCK_DIM)?;
    let r_down = reflectivity_numeric(&scn.system, &probe, Spin::Down, PROBE_FOCK_DIM)?;

    Ok(ReflectionOutcome {
        r_up,
        r_down,
        contrast: (r_up - r_down).abs(),
        n_ph_up,
        n_ph_down,
        delta_a,
        delta_c,
        result,
        fock_dim: scn.fock_dim,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerPulseRow {
    pub p_in: f64,
    pub t_pulse: f64,
    pub infidelity: f64,
}

/// Infidelity surface over a power and pulse-width box at fixed detunings.
/// One eigendecomposition per power and spin serves the whole pulse row.
pub fn sweep_power_pulse(
    system: &SystemParams,
    delta_a: f64,
    delta_c: f64,
    p_grid: &[f64],
    t_grid: &[f64],
    fock_dim: usize,
) -> Result<Vec<PowerPulseRow>> {
    assert!(!p_grid.is_empty() && !t_grid.is_empty());
    let rows: Vec<Vec<PowerPulseRow>> = p_grid
        .par_iter()
        .map(|&p_in| {
            let drive = DriveParams {
                p_in,
                delta_a,
                delta_c,
                t_pulse: 0.0,
            };
            let up = PulseEvaluator::new(system, &drive, Spin::Up, fock_dim)?;
            let down = PulseEvaluator::new(system, &drive, Spin::Down, fock_dim)?;
            t_grid
                .iter()
                .map(|&t_pulse| {
                    let n_up = up.counts(t_pulse)?;
                    let n_down = down.counts(t_pulse)?;
                    let r = fidelity(&poisson(n_up), &poisson(n_down));
                    Ok(PowerPulseRow {
                        p_in,
                        t_pulse,
                        infidelity: r.infidelity(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Per-power minimum of an infidelity surface (the optimal-pulse curve).
pub fn per_power_minimum(rows: &[PowerPulseRow]) -> Vec<PowerPulseRow> {
    let mut powers: Vec<f64> = Vec::new();
    for r in rows {
        if !powers.iter().any(|&p| p == r.p_in) {
            powers.push(r.p_in);
        }
    }
    powers
        .iter()
        .map(|&p| {
            rows.iter()
                .filter(|r| r.p_in == p)
                .min_by(|a, b| {
                    a.infidelity
                        .partial_cmp(&b.infidelity)
                        .unwrap()
                        .then(a.t_pulse.partial_cmp(&b.t_pulse).unwrap())
                })
                .cloned()
                .unwrap()
        })
        .collect()
}

/// Best fidelity over the power/pulse box: grid scan plus a log-space
/// simplex refinement from the best cell.
pub fn max_fidelity_over_box(
    system: &SystemParams,
    delta_a: f64,
    delta_c: f64,
    p_grid: &[f64],
    t_grid: &[f64],
    fock_dim: usize,
) -> Result<f64> {
    let rows = sweep_power_pulse(system, delta_a, delta_c, p_grid, t_grid, fock_dim)?;
    let best = rows
        .iter()
        .min_by(|a, b| a.infidelity.partial_cmp(&b.infidelity).unwrap())
        .expect("non-empty grid");

    let (p_lo, p_hi) = (p_grid[0].ln(), p_grid[p_grid.len() - 1].ln());
    let (t_lo, t_hi) = (t_grid[0].ln(), t_grid[t_grid.len() - 1].ln());
    let cell = |p: &[f64]| -> f64 {
        let drive = DriveParams {
            p_in: p[0].exp(),
            delta_a,
            delta_c,
            t_pulse: p[1].exp(),
        };
        let eval = || -> Result<f64> {
            let n_up = reflected_counts(system, &drive, Spin::Up, fock_dim)?;
            let n_down = reflected_counts(system, &drive, Spin::Down, fock_dim)?;
            Ok(fidelity(&poisson(n_up), &poisson(n_down)).infidelity())
        };
        eval().unwrap_or(f64::INFINITY)
    };
    let step_p = (p_hi - p_lo) / (p_grid.len().max(2) - 1) as f64;
    let step_t = (t_hi - t_lo) / (t_grid.len().max(2) - 1) as f64;
    let (_, best_inf) = nelder_mead(
        cell,
        &[best.p_in.ln(), best.t_pulse.ln()],
        &[step_p, step_t],
        &[p_lo, t_lo],
        &[p_hi, t_hi],
        40,
        1e-9,
    );
    Ok(1.0 - best_inf.min(best.infidelity))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RgReflectionRow {
    pub r_g: f64,
    pub min_infidelity: f64,
}

/// Minimum infidelity over the power/pulse box for each coupling ratio,
/// re-optimizing the detunings per ratio.
pub fn sweep_rg_reflection(
    system: &SystemParams,
    rg_list: &[f64],
    p_grid: &[f64],
    t_grid: &[f64],
) -> Result<Vec<RgReflectionRow>> {
    rg_list
        .iter()
        .map(|&r_g| {
            let sys = SystemParams { r_g, ..*system };
            let opt = optimize_detunings(&sys, WEAK_PROBE_POWER, OPTIMIZER_GRID_N)?;
            let best_f = max_fidelity_over_box(
                &sys,
                opt.delta_a,
                opt.delta_c,
                p_grid,
                t_grid,
                DEFAULT_FOCK_DIM,
            )?;
            Ok(RgReflectionRow {
                r_g,
                min_infidelity: 1.0 - best_f,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QGammaRow {
    pub q: f64,
    pub gamma: f64,
    pub cooperativity: f64,
    pub max_fidelity: f64,
}

/// Best reflection fidelity per `(Q, gamma)` cell.
pub fn sweep_q_gamma(
    system: &SystemParams,
    q_list: &[f64],
    gamma_list: &[f64],
    p_grid: &[f64],
    t_grid: &[f64],
) -> Result<Vec<QGammaRow>> {
    let mut out = Vec::with_capacity(q_list.len() * gamma_list.len());
    for &q in q_list {
        for &gamma in gamma_list {
            let sys = SystemParams {
                q,
                gamma,
                ..system.clone()
            };
            let opt = optimize_detunings(&sys, WEAK_PROBE_POWER, OPTIMIZER_GRID_N)?;
            let best_f = max_fidelity_over_box(
                &sys,
                opt.delta_a,
                opt.delta_c,
                p_grid,
                t_grid,
                DEFAULT_FOCK_DIM,
            )?;
            out.push(QGammaRow {
                q,
                gamma,
                cooperativity: derive_rates(&sys).cooperativity,
                max_fidelity: best_f,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EtaCavRow {
    pub eta_cav: f64,
    pub contrast_optimized: f64,
    pub contrast_aligned: f64,
}

/// Globally optimized vs transition-A-aligned contrast across cavity
/// efficiencies.
pub fn eta_cav_study(system: &SystemParams, eta_list: &[f64]) -> Result<Vec<EtaCavRow>> {
    eta_list
        .iter()
        .map(|&eta_cav| {
            let sys = SystemParams {
                eta_cav,
                ..system.clone()
            };
            let opt = optimize_detunings(&sys, WEAK_PROBE_POWER, OPTIMIZER_GRID_N)?;
            let aligned = aligned_contrast(&sys, WEAK_PROBE_POWER, 41)?;
            Ok(EtaCavRow {
                eta_cav,
                contrast_optimized: opt.contrast,
                contrast_aligned: aligned,
            })
        })
        .collect()
}

/// Reflection spectra `R(spin)` while scanning the laser across the
/// optimized operating point (`x` shifts both detunings).
pub fn reflection_spectra(
    system: &SystemParams,
    delta_a: f64,
    delta_c: f64,
    scan: &[f64],
) -> Result<Vec<(f64, f64, f64)>> {
    scan.par_iter()
        .map(|&x| {
            let drive = DriveParams {
                p_in: WEAK_PROBE_POWER,
                delta_a: delta_a - x,
                delta_c: delta_c - x,
                t_pulse: 0.0,
            };
            let r_up = reflectivity_numeric(system, &drive, Spin::Up, PROBE_FOCK_DIM)?;
            let r_down = reflectivity_numeric(system, &drive, Spin::Down, PROBE_FOCK_DIM)?;
            Ok((x, r_up, r_down))
        })
        .collect()
}

/// Reflected-count means per spin with the optical transition shifted by
/// `delta_omega`, all readout parameters frozen.
pub fn means_at_detuning(
    system: &SystemParams,
    drive: &DriveParams,
    delta_omega: f64,
    fock_dim: usize,
) -> Result<(f64, f64)> {
    let shifted = DriveParams {
        delta_a: drive.delta_a + delta_omega,
        ..*drive
    };
    let n_up = reflected_counts(system, &shifted, Spin::Up, fock_dim)?;
    let n_down = reflected_counts(system, &shifted, Spin::Down, fock_dim)?;
    Ok((n_up, n_down))
}
