// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! `readout` — command-line front end for the spin-readout simulation
//! engine: single-scenario runs, spectral-diffusion studies, figure
//! reproduction sweeps and config validation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use readout_core::cache::Cache;
use readout_core::config::{parse_config_text, Overrides, Preset, Resolved};
use readout_core::diffusion::{self, DiffusionModel, Protocol};
use readout_core::error::{Error, Result};
use readout_core::fluorescence::{self, FluorescenceScenario, WaitMode};
use readout_core::lindblad::{evolve_observed, Liouvillian};
use readout_core::model::{self, Spin, TWO_PI};
use readout_core::operators::{annihilation, DensityMatrix, HilbertLayout, QOperator};
use readout_core::reflection::{self, DetuningChoice, ReflectionScenario};
use readout_core::report::{write_csv, write_trajectory_csv};
use readout_core::{figures, ENGINE_VERSION};

#[derive(Parser)]
#[command(name = "readout", version = ENGINE_VERSION, about = "Cavity-QED single-shot spin-readout simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fluorescence readout of one scenario (excite-collect cycles).
    Fluorescence(FluorescenceArgs),
    /// Reflection readout of one scenario (spin-dependent cavity reflection).
    Reflection(ReflectionArgs),
    /// Spectral-diffusion-averaged readout fidelity.
    Diffusion(DiffusionArgs),
    /// Reproduce a named figure's data as CSV.
    Figure(FigureArgs),
    /// Dry-run schema and physical-range validation.
    Validate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Named parameter preset (`table3` or `fig2a`).
    #[arg(long, default_value = "table3")]
    preset: String,
    /// Flat `key = value` config file (CLI flags win).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for CSV artifacts and the default cache.
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    /// Disable the result cache.
    #[arg(long)]
    no_cache: bool,
    /// Worker-thread count (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,

    #[arg(long, help = "Cavity quality factor")]
    q: Option<f64>,
    #[arg(long)]
    lambda_nm: Option<f64>,
    #[arg(long)]
    gamma0_khz: Option<f64>,
    #[arg(long)]
    gamma_ghz: Option<f64>,
    #[arg(long)]
    r_g: Option<f64>,
    #[arg(long)]
    g_sim_mhz: Option<f64>,
    #[arg(long)]
    eta_qe: Option<f64>,
    #[arg(long)]
    eta_cav: Option<f64>,
    #[arg(long)]
    eta_det: Option<f64>,
    #[arg(long)]
    delta_g_ghz: Option<f64>,
    #[arg(long)]
    delta_e_ghz: Option<f64>,
    #[arg(long)]
    phi_rad: Option<f64>,
    #[arg(long)]
    p_in_pw: Option<f64>,
    #[arg(long)]
    delta_a_ghz: Option<f64>,
    #[arg(long)]
    delta_c_ghz: Option<f64>,
    #[arg(long)]
    t_pulse_ns: Option<f64>,
}

impl CommonArgs {
    fn overrides(&self) -> Result<Overrides> {
        let mut from_file = Overrides::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            from_file = parse_config_text(&text)?;
        }
        let mut flags = Overrides::default();
        let pairs: [(&str, Option<f64>); 16] = [
            ("Q", self.q),
            ("lambda_nm", self.lambda_nm),
            ("gamma0_kHz", self.gamma0_khz),
            ("gamma_GHz", self.gamma_ghz),
            ("r_g", self.r_g),
            ("g_sim_MHz", self.g_sim_mhz),
            ("eta_QE", self.eta_qe),
            ("eta_cav", self.eta_cav),
            ("eta_det", self.eta_det),
            ("delta_g_GHz", self.delta_g_ghz),
            ("delta_e_GHz", self.delta_e_ghz),
            ("phi_rad", self.phi_rad),
            ("P_in_pW", self.p_in_pw),
            ("delta_a_GHz", self.delta_a_ghz),
            ("delta_c_GHz", self.delta_c_ghz),
            ("t_pulse_ns", self.t_pulse_ns),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                flags.set(key, v)?;
            }
        }
        from_file.merge(&flags);
        Ok(from_file)
    }

    fn resolve(&self, p_in_default: f64, t_pulse_default: f64) -> Result<Resolved> {
        let preset = Preset::parse(&self.preset)?;
        let ov = self.overrides()?;
        Ok(Resolved::from_overrides(
            preset,
            &ov,
            p_in_default,
            t_pulse_default,
        ))
    }

    fn check_valid(&self, resolved: &Resolved) -> Result<()> {
        let report = resolved.validation_report();
        if report.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(report.join("; ")))
        }
    }

    fn init_threads(&self) {
        if let Some(jobs) = self.jobs {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global();
        }
    }
}

#[derive(Args)]
struct FluorescenceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Collection window: `7tau-off` (full decay) or `7tau-on` (fast).
    #[arg(long, default_value = "7tau-off")]
    wait_mode: String,
    /// Also dump the first excite-collect sequence dynamics to CSV
    /// (`<stem>_bright.csv` / `<stem>_dark.csv`).
    #[arg(long)]
    dynamics_csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReflectionArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct DiffusionArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// `fluorescence` or `reflection`.
    #[arg(long)]
    protocol: String,
    /// Diffusion FWHM over the optical linewidth, `2 Gamma_sd / Gamma`.
    #[arg(long)]
    two_gamma_sd_over_gamma: Option<f64>,
    /// Diffusion half-FWHM in GHz (alternative to the ratio form).
    #[arg(long)]
    gamma_sd_ghz: Option<f64>,
}

#[derive(Args)]
struct FigureArgs {
    /// One of fig2c, fig2d, fig3a, fig3b, fig3c, fig4a, fig4b, fig5a,
    /// fig5b, fig6.
    name: String,
    /// Coarsened grids (headline cells stay pinned).
    #[arg(long)]
    coarse: bool,
    #[arg(long, default_value = "results")]
    out_dir: PathBuf,
    #[arg(long)]
    no_cache: bool,
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_wait_mode(s: &str) -> Result<WaitMode> {
    match s.to_ascii_lowercase().as_str() {
        "7tau-off" | "seven-tau-off" | "off" => Ok(WaitMode::SevenTauOff),
        "7tau-on" | "seven-tau-on" | "on" => Ok(WaitMode::SevenTauOn),
        other => Err(Error::Config(format!(
            "unknown wait mode `{other}` (expected `7tau-off` or `7tau-on`)"
        ))),
    }
}

fn run_fluorescence(args: &FluorescenceArgs) -> Result<()> {
    args.common.init_threads();
    let resolved = args.common.resolve(100e-12, 10e-9)?;
    args.common.check_valid(&resolved)?;
    let wait_mode = parse_wait_mode(&args.wait_mode)?;

    let drive = resolved.drive_or(model::delta_a_resonant_with_a(&resolved.system), 0.0);
    let scn = FluorescenceScenario {
        system: resolved.system.clone(),
        drive,
        wait_mode,
        fock_dim: fluorescence::DEFAULT_FOCK_DIM,
    };
    let out = fluorescence::fluorescence_fidelity(&scn)?;

    if let Some(stem) = &args.dynamics_csv {
        dump_sequence_dynamics(&scn, out.t_wait, stem)?;
    }

    let csv = args.common.out_dir.join("fluor_point.csv");
    write_csv(
        &csv,
        &[
            "fidelity",
            "threshold_M",
            "n_ph_up",
            "n_ph_down",
            "P_e",
            "P_g",
            "beta_cav",
            "gamma_cav_MHz",
            "gamma_cav_off_MHz",
            "t_wait_ns",
            "t_seq_ns",
            "N_cyc",
            "total_time_us",
            "fock_dim",
        ],
        &[vec![
            out.result.fidelity,
            out.result.threshold_m as f64,
            out.n_ph_up,
            out.n_ph_down,
            out.p_e,
            out.p_g,
            out.beta_cav,
            out.gamma_cav / TWO_PI / 1e6,
            out.gamma_cav_off / TWO_PI / 1e6,
            out.t_wait * 1e9,
            out.t_seq * 1e9,
            out.n_cyc as f64,
            out.total_time * 1e6,
            out.fock_dim as f64,
        ]],
    )?;

    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "protocol": "fluorescence",
            "fidelity": out.result.fidelity,
            "infidelity": out.result.infidelity(),
            "threshold_M": out.result.threshold_m,
            "n_ph_up": out.n_ph_up,
            "n_ph_down": out.n_ph_down,
            "P_e": out.p_e,
            "P_g": out.p_g,
            "beta_cav": out.beta_cav,
            "N_cyc": out.n_cyc,
            "t_seq_ns": out.t_seq * 1e9,
            "total_time_us": out.total_time * 1e6,
            "csv": csv.display().to_string(),
        }))?
    );
    Ok(())
}

/// Excite-collect dynamics of the first sequence for both spins.
fn dump_sequence_dynamics(scn: &FluorescenceScenario, t_wait: f64, stem: &Path) -> Result<()> {
    let layout = HilbertLayout::new(scn.fock_dim);
    let rates = model::derive_rates(&scn.system);
    let collapse = model::build_collapse_ops(&scn.system, &rates, layout)?;
    let a = annihilation(layout);
    let n_cav = a.dag().dot(&a);
    let h_on = model::build_hamiltonian(&scn.system, &rates, &scn.drive, layout)?;
    let l_on = Liouvillian::build(&h_on, &collapse)?;
    let h_off = model::build_hamiltonian(&scn.system, &rates, &scn.drive.undriven(), layout)?;
    let l_off = Liouvillian::build(&h_off, &collapse)?;

    for (spin, suffix) in [(Spin::Down, "bright"), (Spin::Up, "dark")] {
        let rho0 = DensityMatrix::pure(layout, spin.ground_level(), 0);
        let obs: [(&str, &QOperator); 2] = [("a", &a), ("n_cav", &n_cav)];

        let n_pulse = 160;
        let dt_on = scn.drive.t_pulse / n_pulse as f64;
        let times_on: Vec<f64> = (1..=n_pulse).map(|k| k as f64 * dt_on).collect();
        let traj_on = evolve_observed(&l_on, &rho0, &times_on, &obs)?;

        let rho_pulse_end = traj_on.states.last().unwrap().clone();
        let n_wait = 320;
        let dt_off = t_wait / n_wait as f64;
        let times_off: Vec<f64> = (1..=n_wait).map(|k| k as f64 * dt_off).collect();
        let mut traj_off = evolve_observed(&l_off, &rho_pulse_end, &times_off, &obs)?;

        // stitch both segments onto one sequence-time axis
        let mut traj = traj_on;
        for (name, series) in traj_off.observables.iter_mut() {
            traj.observables
                .get_mut(name)
                .expect("same observables")
                .append(series);
        }
        traj.states.append(&mut traj_off.states);
        traj.times
            .extend(times_off.iter().map(|t| t + scn.drive.t_pulse));

        let file_stem = stem
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("dynamics");
        let path = stem.with_file_name(format!("{file_stem}_{suffix}.csv"));
        write_trajectory_csv(&path, &traj)?;
    }
    Ok(())
}

fn run_reflection(args: &ReflectionArgs) -> Result<()> {
    args.common.init_threads();
    let resolved = args.common.resolve(3.8e-12, 47e-6)?;
    args.common.check_valid(&resolved)?;

    let detunings = match (resolved.delta_a, resolved.delta_c) {
        (Some(delta_a), Some(delta_c)) => DetuningChoice::Explicit { delta_a, delta_c },
        (None, None) => DetuningChoice::Optimize,
        _ => {
            return Err(Error::Config(
                "reflection needs either both delta_a_GHz and delta_c_GHz or neither (optimized)"
                    .into(),
            ))
        }
    };
    let scn = ReflectionScenario {
        system: resolved.system.clone(),
        p_in: resolved.p_in,
        t_pulse: resolved.t_pulse,
        detunings,
        fock_dim: reflection::DEFAULT_FOCK_DIM,
    };
    let out = reflection::reflection_fidelity(&scn)?;

    let csv = args.common.out_dir.join("refl_point.csv");
    write_csv(
        &csv,
        &[
            "fidelity",
            "threshold_M",
            "n_ph_up",
            "n_ph_down",
            "R_up",
            "R_down",
            "contrast",
            "delta_a_GHz",
            "delta_c_GHz",
            "P_in_pW",
            "t_pulse_us",
            "fock_dim",
        ],
        &[vec![
            out.result.fidelity,
            out.result.threshold_m as f64,
            out.n_ph_up,
            out.n_ph_down,
            out.r_up,
            out.r_down,
            out.contrast,
            out.delta_a / TWO_PI / 1e9,
            out.delta_c / TWO_PI / 1e9,
            scn.p_in * 1e12,
            scn.t_pulse * 1e6,
            out.fock_dim as f64,
        ]],
    )?;

    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "protocol": "reflection",
            "fidelity": out.result.fidelity,
            "infidelity": out.result.infidelity(),
            "threshold_M": out.result.threshold_m,
            "n_ph_up": out.n_ph_up,
            "n_ph_down": out.n_ph_down,
            "R_up": out.r_up,
            "R_down": out.r_down,
            "contrast": out.contrast,
            "delta_a_GHz": out.delta_a / TWO_PI / 1e9,
            "delta_c_GHz": out.delta_c / TWO_PI / 1e9,
            "t_pulse_us": scn.t_pulse * 1e6,
            "csv": csv.display().to_string(),
        }))?
    );
    Ok(())
}

fn run_diffusion(args: &DiffusionArgs) -> Result<()> {
    args.common.init_threads();
    let protocol = match args.protocol.to_ascii_lowercase().as_str() {
        "fluorescence" => Protocol::Fluorescence,
        "reflection" => Protocol::Reflection,
        other => {
            return Err(Error::Config(format!(
                "unknown protocol `{other}` (expected `fluorescence` or `reflection`)"
            )))
        }
    };

    let (frozen, gamma, baseline) = match protocol {
        Protocol::Fluorescence => {
            let resolved = args.common.resolve(100e-12, 10e-9)?;
            args.common.check_valid(&resolved)?;
            let drive = resolved.drive_or(model::delta_a_resonant_with_a(&resolved.system), 0.0);
            let gamma = resolved.system.gamma;
            let scn = FluorescenceScenario {
                system: resolved.system,
                drive,
                wait_mode: WaitMode::SevenTauOff,
                fock_dim: fluorescence::DEFAULT_FOCK_DIM,
            };
            let (frozen, out) = diffusion::freeze_fluorescence(&scn)?;
            (frozen, gamma, out.result.fidelity)
        }
        Protocol::Reflection => {
            let resolved = args.common.resolve(3.8e-12, 47e-6)?;
            args.common.check_valid(&resolved)?;
            let detunings = match (resolved.delta_a, resolved.delta_c) {
                (Some(delta_a), Some(delta_c)) => DetuningChoice::Explicit { delta_a, delta_c },
                _ => DetuningChoice::Optimize,
            };
            let gamma = resolved.system.gamma;
            let scn = ReflectionScenario {
                system: resolved.system,
                p_in: resolved.p_in,
                t_pulse: resolved.t_pulse,
                detunings,
                fock_dim: reflection::DEFAULT_FOCK_DIM,
            };
            let (frozen, out) = diffusion::freeze_reflection(&scn)?;
            (frozen, gamma, out.result.fidelity)
        }
    };

    let gamma_sd = match (args.two_gamma_sd_over_gamma, args.gamma_sd_ghz) {
        (Some(ratio), None) => 0.5 * ratio * gamma,
        (None, Some(ghz)) => TWO_PI * ghz * 1e9,
        (None, None) => 0.5 * gamma,
        _ => {
            return Err(Error::Config(
                "pass either --two-gamma-sd-over-gamma or --gamma-sd-ghz, not both".into(),
            ))
        }
    };
    let model = DiffusionModel::new(gamma_sd);
    let result = diffusion::diffused_fidelity(&frozen, &model)?;

    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "protocol": args.protocol,
            "gamma_sd_GHz": gamma_sd / TWO_PI / 1e9,
            "two_gamma_sd_over_gamma": 2.0 * gamma_sd / gamma,
            "baseline_fidelity": baseline,
            "diffused_fidelity": result.fidelity,
            "diffused_infidelity": result.infidelity(),
            "threshold_M": result.threshold_m,
        }))?
    );
    Ok(())
}

fn run_figure(args: &FigureArgs) -> Result<()> {
    if let Some(jobs) = args.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let cache = Cache::new(!args.no_cache, &args.out_dir);
    let tables = figures::generate(&args.name, args.coarse, &cache)?;
    let mut written = Vec::new();
    for table in &tables {
        let path = args.out_dir.join(&table.filename);
        let header: Vec<&str> = table.header.iter().map(|s| s.as_str()).collect();
        write_csv(&path, &header, &table.rows)?;
        written.push(path.display().to_string());
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "figure": args.name,
            "coarse": args.coarse,
            "files": written,
        }))?
    );
    Ok(())
}

fn run_validate(common: &CommonArgs) -> Result<()> {
    let resolved = common.resolve(100e-12, 10e-9)?;
    let mut report = resolved.validation_report();
    let gap = 2.0 * (resolved.system.delta_e - resolved.system.delta_g).abs();
    if (gap - TWO_PI * 4e9).abs() > 1e-3 * TWO_PI * 4e9 {
        report.push(format!(
            "note: transition A-B splitting 2|delta_e - delta_g| = {:.4} GHz differs from the 4 GHz default",
            gap / TWO_PI / 1e9
        ));
    }
    let valid = report.iter().all(|line| line.starts_with("note:"));
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "valid": valid,
            "report": report,
        }))?
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fluorescence(args) => run_fluorescence(args),
        Command::Reflection(args) => run_reflection(args),
        Command::Diffusion(args) => run_diffusion(args),
        Command::Figure(args) => run_figure(args),
        Command::Validate(common) => run_validate(common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
