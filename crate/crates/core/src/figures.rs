// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Named figure-reproduction presets: parameter grids baked in, per-cell
//! caching, CSV-ready tables. `coarse` halves grid densities for CI-speed
//! runs while keeping the headline cells pinned.

use rayon::prelude::*;
use serde_json::json;

use crate::cache::{Cache, KeyBuilder};
use crate::counts::{fidelity, poisson};
use crate::diffusion::{self, DiffusionModel, FrozenReadout};
use crate::error::{Error, Result};
use crate::fluorescence::{self, FluorescenceScenario, WaitMode};
use crate::model::{DriveParams, Spin, SystemParams, TWO_PI};
use crate::reflection::{self, DetuningChoice, PulseEvaluator, ReflectionScenario};

/// One CSV table ready to be written.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub filename: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    fn new(filename: &str, header: &[&str]) -> Self {
        Self {
            filename: filename.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

pub const FIGURE_NAMES: &[&str] = &[
    "fig2c", "fig2d", "fig3a", "fig3b", "fig3c", "fig4a", "fig4b", "fig5a", "fig5b", "fig6",
];

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

fn lin_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Generate the tables for one named figure.
pub fn generate(name: &str, coarse: bool, cache: &Cache) -> Result<Vec<CsvTable>> {
    match name {
        "fig2c" => fig2(1e5, "fig2c.csv", coarse, cache),
        "fig2d" => fig2(2e5, "fig2d.csv", coarse, cache),
        "fig3a" => fig3a(coarse, cache),
        "fig3b" => fig3b(coarse, cache),
        "fig3c" => fig3c(coarse, cache),
        "fig4a" => fig4a(coarse, cache),
        "fig4b" => fig4b(coarse, cache),
        "fig5a" => fig5a(coarse, cache),
        "fig5b" => fig5b(coarse, cache),
        "fig6" => fig6(coarse, cache),
        other => Err(Error::Config(format!(
            "unknown figure `{other}` (expected one of {})",
            FIGURE_NAMES.join(", ")
        ))),
    }
}

/// Cached fluorescence infidelity for one cell.
fn fluor_cell(cache: &Cache, scn: &FluorescenceScenario) -> Result<f64> {
    let hash = KeyBuilder::new("fluor_cell")
        .system(&scn.system)
        .f64("p_in", scn.drive.p_in)
        .f64("delta_a", scn.drive.delta_a)
        .f64("delta_c", scn.drive.delta_c)
        .f64("t_pulse", scn.drive.t_pulse)
        .str(
            "wait",
            match scn.wait_mode {
                WaitMode::SevenTauOff => "off",
                WaitMode::SevenTauOn => "on",
            },
        )
        .usize("fock", scn.fock_dim)
        .finish();
    cache.get_or_compute(&hash, json!({"fock_dim": scn.fock_dim}), || {
        Ok(fluorescence::fluorescence_fidelity(scn)?.result.infidelity())
    })
}

fn fig2(q: f64, filename: &str, coarse: bool, cache: &Cache) -> Result<Vec<CsvTable>> {
    let rg_list: Vec<f64> = if coarse {
        vec![1.0, 3.0, 10.0, 30.0, 100.0]
    } else {
        vec![1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0, 50.0, 100.0]
    };
    let tp_list: Vec<f64> = if coarse {
        vec![10e-9, 100e-9, 1000e-9]
    } else {
        vec![10e-9, 30e-9, 100e-9, 300e-9, 1000e-9]
    };
    let gamma_list = [0.1e9, 1e9];

    let mut table = CsvTable::new(filename, &["r_g", "t_pulse_ns", "Q", "gamma_GHz", "infidelity"]);
    let mut cells: Vec<(f64, f64, f64)> = Vec::new();
    for &g in &gamma_list {
        for &rg in &rg_list {
            for &tp in &tp_list {
                cells.push((g, rg, tp));
            }
        }
    }
    let rows: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(gamma, r_g, t_pulse)| {
            let system = SystemParams {
                q,
                gamma: TWO_PI * gamma,
                r_g,
                ..SystemParams::table3()
            };
            let scn =
                FluorescenceScenario::resonant(system, 100e-12, t_pulse, WaitMode::SevenTauOff);
            let infid = fluor_cell(cache, &scn)?;
            log::info!("fig2 cell Q={q:.0} gamma={gamma:.1e} rg={r_g} tp={t_pulse:.1e}: 1-F = {infid:.3e}");
            Ok(vec![r_g, t_pulse * 1e9, q, gamma / 1e9, infid])
        })
        .collect::<Result<Vec<_>>>()?;
    table.rows = rows;
    Ok(vec![table])
}

/// Cached contrast-optimal detunings for a system.
fn cached_optimum(cache: &Cache, system: &SystemParams) -> Result<(f64, f64)> {
    let hash = KeyBuilder::new("opt_detunings")
        .system(system)
        .f64("p_probe", reflection::WEAK_PROBE_POWER)
        .usize("grid", reflection::OPTIMIZER_GRID_N)
        .finish();
    let opt: reflection::OptimizedDetunings =
        cache.get_or_compute(&hash, json!({"grid": reflection::OPTIMIZER_GRID_N}), || {
            reflection::optimize_detunings(
                system,
                reflection::WEAK_PROBE_POWER,
                reflection::OPTIMIZER_GRID_N,
            )
        })?;
    Ok((opt.delta_a, opt.delta_c))
}

/// Cached infidelity row over pulse widths for one power.
fn reflection_row(
    cache: &Cache,
    system: &SystemParams,
    delta_a: f64,
    delta_c: f64,
    p_in: f64,
    t_grid: &[f64],
    kind: &str,
) -> Result<Vec<f64>> {
    let hash = KeyBuilder::new(kind)
        .system(system)
        .f64("delta_a", delta_a)
        .f64("delta_c", delta_c)
        .f64("p_in", p_in)
        .f64_slice("t_grid", t_grid)
        .finish();
    cache.get_or_compute(&hash, json!({"fock_dim": reflection::DEFAULT_FOCK_DIM}), || {
        let drive = DriveParams {
            p_in,
            delta_a,
            delta_c,
            t_pulse: 0.0,
        };
        let up = PulseEvaluator::new(system, &drive, Spin::Up, reflection::DEFAULT_FOCK_DIM)?;
        let down = PulseEvaluator::new(system, &drive, Spin::Down, reflection::DEFAULT_FOCK_DIM)?;
        t_grid
            .iter()
            .map(|&t| {
                let f = fidelity(&poisson(up.counts(t)?), &poisson(down.counts(t)?));
                Ok(f.infidelity())
            })
            .collect()
    })
}

fn fig3a(coarse: bool, cache: &Cache) -> Result<Vec<CsvTable>> {
    let system = SystemParams::table3();
    let (da, dc) = cached_optimum(cache, &system)?;
    let n = if coarse { 9 } else { 25 };
    let p_grid = log_grid(0.1e-12, 100e-12, n);
    let t_grid = log_grid(0.5e-6, 50e-6, n);

    let mut table = CsvTable::new("fig3a.csv", &["P_in_pW", "t_pulse_us", "infidelity"]);
    let rows: Vec<Vec<Vec<f64>>> = p_grid
        .par_iter()
        .map(|&p_in| {
            let infids = reflection_row(cache, &system, da, dc, p_in, &t_grid, "fig3a_row")?;
            log::info!("fig3a row P = {:.3} pW done", p_in * 1e12);
            Ok(t_grid
                .iter()
                .zip(infids)
                .map(|(&t, infid)| vec![p_in * 1e12, t * 1e6, infid])
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    table.rows = rows.into_iter().flatten().collect();
    Ok(vec![table])
}

fn fig3b(coarse: bool, cache: &Cache) -> Result<Vec<CsvTable>> {
    let rg_list: Vec<f64> = if coarse {
        vec![1.0, 2.0, 5.0, 10.0]
    } else {
        vec![1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0]
    };
    let n = if coarse { 7 } else { 13 };
    let p_grid = log_grid(0.1e-12, 100e-12, n);
    let t_grid = log_grid(0.5e-6, 50e-6, n);

    let mut table = CsvTable::new("fig3b.csv", &["r_g", "min_infidelity"]);
    for &r_g in &rg_list {
        let system = SystemParams {
            r_g,
            ..SystemParams::table3()
        };
        let hash = KeyBuilder::new("fig3b_cell")
            .system(&system)
            .f64_slice("p_grid", &p_grid)
            .f64_slice("t_grid", &t_grid)
            .finish();
        let min_infid: f64 = cache.get_or_compute(&hash, json!({}), || {
            let (da, dc) = cached_optimum(cache, &system)?;
            let best = reflection::max_fidelity_over_box(
                &system,
                da,
                dc,
                &p_grid,
                &t_grid,
                reflection::DEFAULT_FOCK_DIM,
            )?;
            Ok(1.0 - best)
        })?;
        log::info!("fig3b r_g = {r_g}: min infidelity = {min_infid:.3e}");
        table.rows.push(vec![r_g, min_infid]);
    }
    Ok(vec![table])
}

fn fig3c(coarse: bool, cache: &Cache) -> Result<Vec<CsvTable>> {
    let q_list: Vec<f64> = if coarse {
        vec![2.5e4, 1e5, 2e5]
    } else {
        vec![2.5e4, 5e4, 1e5, 2e5, 4e5]
    };
    let gamma_list: Vec<f64> = if coarse {
        vec![0.1e9, 1e9]
    } else {
        vec![0.1e9, 0.2e9, 0.5e9, 1e9]
    };
    let n = if coarse { 7 } else { 9 };
    let p_grid = log_grid(0.1e-12, 100e-12, n);
    let t_grid = log_grid(0.5e-6, 50e-6, n);

    let mut table = CsvTable::new(
        "fig3c.csv",
        &["Q", "gamma_GHz", "cooperativity", "max_fidelity"],
    );
    for &q in &q_list {
        for &gamma in &gamma_list {
            let system = SystemParams {
                q,
                gamma: TWO_PI * gamma,
                ..SystemParams::table3()
            };
            let hash = KeyBuilder::new("fig3c_cell")
                .system(&system)
                .f64_slice("p_grid", &p_grid)
                .f64_slice("t_grid", &t_grid)
                .finish();
            let best: f64 = cache.get_or_compute(&hash, json!({}), || {
                let (da, dc) = cached_optimum(cache, &system)?;
                reflection::max_fidelity_over_box(
                    &system,
                    da,
                    dc,
                    &p_grid,
                    &t_grid,
                    reflection::DEFAULT_FOCK_DIM,
                )
            })?;
            let coop = crate::model::derive_rates(&system).cooperativity;
            log::info!("fig3c Q = {q:.1e} gamma = {gamma:.1e}: C = {coop:.3}, F = {best:.5}");
            table.rows.push(vec![q, gamma / 1e9, coop, best]);
        }
    }
    Ok(vec![table])
}

/// The two frozen headline scenarios used by the diffusion studies.
fn frozen_pair(cache: &Cache) -> Result<(FrozenReadout, FrozenReadout)> {
    let system = SystemParams::table3();
    let fluor_scn =
        FluorescenceScenario::resonant(system.clone(), 100e-12, 10e-9, WaitMode::SevenTauOff);
    let (frozen_fluor, _) = diffusion::freeze_fluorescence(&fluor_scn)?;

    let (da, dc) = cached_optimum(cache, &system)?;
    let refl_scn = ReflectionScenario {
        system,
        p_in: 3.8e-12,
        t_pulse: 47e-6,
        detunings: DetuningChoice::Explicit {
            delta_a: da,
            delta_c: dc,
        },
        fock_dim: reflection::DEFAULT_FOCK_DIM,
    };
    let (frozen_refl, _) = diffusion::freeze_reflection(&refl_scn)?;
    Ok((frozen_fluor, frozen_refl))
}

fn fig4a(coarse: bool, cache: &Cache) -> Result<Vec<CsvTable>> {
    let gamma = SystemParams::table3().gamma;
    let n = if coarse { 13 } else { 25 };
    let grid = lin_grid(-3.0, 3.0, n);
    let (fluor, refl) = frozen_pair(cache)?;

    let mut table = CsvTable::new(
        "fig4a.csv",
        &["delta_omega_over_gamma", "infid_fluor", "infid_refl"],
    );
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&x| {
            let dw = x * gamma;
            let inf_f = fluor.infidelity_at(dw)?;
            let inf_r = refl.infidelity_at(dw)?;
            Ok(vec![x, inf_f, inf_r])
        })
        .collect::<Result<Vec<_>>>()?;
    table.rows = rows;
    Ok(vec![table])
}

fn fig4b(coarse: bool, cache: &Cache) -> Result<Vec<CsvTable>> {
    let gamma = SystemParams::table3().gamma;
    let ratios: Vec<f64> = if coarse {
        vec![0.5, 1.0, 2.0]
    } else {
        vec![0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]
    };
    let (fluor, refl) = frozen_pair(cache)?;

    let mut table = CsvTable::new(
        "fig4b.csv",
        &["two_gamma_sd_over_gamma", "infid_fluor", "infid_refl"],
    );
    for &ratio in &ratios {
        let model = DiffusionModel::new(0.5 * ratio * gamma);
        let inf_f = diffusion::diffused_fidelity(&fluor, &model)?.infidelity();
        let inf_r = diffusion::diffused_fidelity(&refl, &model)?.infidelity();
        log::info!("fig4b 2G_sd/G = {ratio}: fluor {inf_f:.3e}, refl {inf_r:.3e}");
        table.rows.push(vec![ratio, inf_f, inf_r]);
    }
    Ok(vec![table])
}

fn fig5a(coarse: bool, cache: &Cache) -> Result<Vec<CsvTable>> {
    let eta_list: Vec<f64> = if coarse {
        vec![0.3, 0.4, 0.45, 0.5, 0.55, 0.6, 0.7, 0.8]
    } else {
        lin_grid(0.05, 0.95, 19)
    };
    let mut table = CsvTable::new("fig5a.csv", &["eta_cav", "contrast_opt", "contrast_aligned"]);
    for &eta_cav in &eta_list {
        let system = SystemParams {
            eta_cav,
            ..SystemParams::table3()
        };
        let hash = KeyBuilder::new("fig5a_cell").system(&system).finish();
        let pair: (f64, f64) = cache.get_or_compute(&hash, json!({}), || {
            let opt = reflection::optimize_detunings(
                &system,
                reflection::WEAK_PROBE_POWER,
                reflection::OPTIMIZER_GRID_N,
            )?;
            let aligned = reflection::aligned_contrast(&system, reflection::WEAK_PROBE_POWER, 41)?;
            Ok((opt.contrast, aligned))
        })?;
        log::info!("fig5a eta = {eta_cav}: opt {:.4}, aligned {:.4}", pair.0, pair.1);
        table.rows.push(vec![eta_cav, pair.0, pair.1]);
    }
    Ok(vec![table])
}

fn fig5b(coarse: bool, cache: &Cache) -> Result<Vec<CsvTable>> {
    let n = if coarse { 81 } else { 161 };
    let mut tables = Vec::new();
    for eta_cav in [0.3, 0.5, 0.8] {
        let system = SystemParams {
            eta_cav,
            ..SystemParams::table3()
        };
        let (da, dc) = cached_optimum(cache, &system)?;
        let kappa = crate::model::derive_rates(&system).kappa;
        let scan = lin_grid(-3.0 * kappa, 3.0 * kappa, n);
        let spectra = reflection::reflection_spectra(&system, da, dc, &scan)?;
        let mut table = CsvTable::new(
            &format!("fig5b_{eta_cav}.csv"),
            &["scan_offset_GHz", "R_up", "R_down"],
        );
        table.rows = spectra
            .into_iter()
            .map(|(x, r_up, r_down)| vec![x / TWO_PI / 1e9, r_up, r_down])
            .collect();
        tables.push(table);
    }
    Ok(tables)
}

fn fig6(coarse: bool, cache: &Cache) -> Result<Vec<CsvTable>> {
    let system = SystemParams::table3();
    let (da, dc) = cached_optimum(cache, &system)?;
    let p_grid: Vec<f64> = if coarse {
        vec![1.0e-12, 3.8e-12, 10e-12, 23.4e-12, 60e-12]
    } else {
        vec![
            0.5e-12, 1.0e-12, 2.0e-12, 3.8e-12, 7.0e-12, 13e-12, 23.4e-12, 43e-12, 80e-12,
        ]
    };
    let t_grid = log_grid(1e-6, 200e-6, if coarse { 9 } else { 17 });

    let mut surface = CsvTable::new("fig6.csv", &["P_in_pW", "t_pulse_us", "infidelity"]);
    let mut minima = CsvTable::new("fig6_min.csv", &["P_in_pW", "t_pulse_us", "min_infidelity"]);
    let per_power: Vec<(f64, Vec<f64>)> = p_grid
        .par_iter()
        .map(|&p_in| {
            let infids = reflection_row(cache, &system, da, dc, p_in, &t_grid, "fig6_row")?;
            Ok((p_in, infids))
        })
        .collect::<Result<Vec<_>>>()?;
    for (p_in, infids) in per_power {
        let mut best = (f64::INFINITY, 0.0);
        for (&t, &infid) in t_grid.iter().zip(&infids) {
            surface.rows.push(vec![p_in * 1e12, t * 1e6, infid]);
            if infid < best.0 {
                best = (infid, t);
            }
        }
        minima.rows.push(vec![p_in * 1e12, best.1 * 1e6, best.0]);
    }
    Ok(vec![surface, minima])
}
