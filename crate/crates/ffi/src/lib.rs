// Copyright 2026 ReadoutSim Contributors
// SPDX-License-Identifier: Apache-2.0

//! C ABI for the spin-readout simulation engine.
//!
//! The surface is deliberately small: an opaque parameter handle mutated
//! through the flat config schema (`Q`, `gamma_GHz`, `P_in_pW`, ...), one
//! entry point per protocol returning plain `repr(C)` result structs, and
//! integer status codes with a thread-local error message.
//!
//! ```c
//! ReadoutParams *p = readout_params_new("table3");
//! readout_params_set(p, "t_pulse_ns", 10.0);
//! readout_params_set(p, "P_in_pW", 100.0);
//! FluorescenceResult r;
//! if (readout_fluorescence_run(p, 0, &r) == READOUT_STATUS_OK)
//!     printf("F = %f\n", r.fidelity);
//! readout_params_free(p);
//! ```

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};

use readout_core::config::{Overrides, Preset, Resolved};
use readout_core::fluorescence::{self, FluorescenceScenario, WaitMode};
use readout_core::model;
use readout_core::reflection::{self, DetuningChoice, ReflectionScenario};

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl AsRef<str>) {
    let sanitized: String = msg.as_ref().chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap_or_default());
}

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    EngineFailure = 3,
}

/// Opaque simulation-parameter handle.
pub struct ReadoutParams {
    preset: Preset,
    overrides: Overrides,
}

impl ReadoutParams {
    fn resolve(&self, p_in_default: f64, t_pulse_default: f64) -> Resolved {
        Resolved::from_overrides(self.preset, &self.overrides, p_in_default, t_pulse_default)
    }
}

/// Fluorescence-readout result.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FluorescenceResult {
    /// Single-shot assignment fidelity.
    pub fidelity: f64,
    /// Optimal photon-count threshold.
    pub threshold_m: u32,
    /// Mean detected photons, spin up (dark).
    pub n_ph_up: f64,
    /// Mean detected photons, spin down (bright).
    pub n_ph_down: f64,
    /// Excited population of the bright manifold at the end of the pulse.
    pub p_e: f64,
    /// Bright ground population after the first sequence.
    pub p_g: f64,
    /// Cavity-coupled emission fraction of the resonant transition.
    pub beta_cav: f64,
    /// Number of excite-collect repetitions.
    pub n_cyc: u64,
    /// Total readout duration, seconds.
    pub total_time_s: f64,
}

/// Reflection-readout result.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ReflectionResult {
    pub fidelity: f64,
    pub threshold_m: u32,
    pub n_ph_up: f64,
    pub n_ph_down: f64,
    /// Weak-probe steady reflectivities at the operating point.
    pub r_up: f64,
    pub r_down: f64,
    pub contrast: f64,
    /// Operating detunings, rad/s.
    pub delta_a: f64,
    pub delta_c: f64,
    /// Pulse width = readout duration, seconds.
    pub duration_s: f64,
}

/// Allocate a parameter handle from a named preset (`"table3"` or
/// `"fig2a"`); NULL on unknown names. Free with `readout_params_free`.
#[no_mangle]
pub extern "C" fn readout_params_new(preset: *const c_char) -> *mut ReadoutParams {
    let name = if preset.is_null() {
        "table3".to_string()
    } else {
        match unsafe { CStr::from_ptr(preset) }.to_str() {
            Ok(s) => s.to_string(),
            Err(_) => {
                set_last_error("preset name is not valid UTF-8");
                return std::ptr::null_mut();
            }
        }
    };
    match Preset::parse(&name) {
        Ok(preset) => Box::into_raw(Box::new(ReadoutParams {
            preset,
            overrides: Overrides::default(),
        })),
        Err(e) => {
            set_last_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Release a parameter handle. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn readout_params_free(params: *mut ReadoutParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Set one parameter by schema key (e.g. `"Q"`, `"gamma_GHz"`,
/// `"P_in_pW"`, `"t_pulse_ns"`); rejects unknown keys.
#[no_mangle]
pub unsafe extern "C" fn readout_params_set(
    params: *mut ReadoutParams,
    key: *const c_char,
    value: f64,
) -> ReadoutStatus {
    if params.is_null() || key.is_null() {
        set_last_error("null pointer argument");
        return ReadoutStatus::NullPointer;
    }
    let key = match CStr::from_ptr(key).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_last_error("key is not valid UTF-8");
            return ReadoutStatus::InvalidArgument;
        }
    };
    match (*params).overrides.set(key, value) {
        Ok(()) => ReadoutStatus::Ok,
        Err(e) => {
            set_last_error(e.to_string());
            ReadoutStatus::InvalidArgument
        }
    }
}

/// Run the fluorescence protocol. `fast_wait != 0` selects the
/// `7 tau_cav_on` collection window instead of `7 tau_cav_off`.
#[no_mangle]
pub unsafe extern "C" fn readout_fluorescence_run(
    params: *const ReadoutParams,
    fast_wait: c_int,
    out: *mut FluorescenceResult,
) -> ReadoutStatus {
    if params.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return ReadoutStatus::NullPointer;
    }
    let resolved = (*params).resolve(100e-12, 10e-9);
    if let Err(e) = resolved.system.check() {
        set_last_error(e.to_string());
        return ReadoutStatus::InvalidArgument;
    }
    let scn = FluorescenceScenario {
        drive: resolved.drive_or(model::delta_a_resonant_with_a(&resolved.system), 0.0),
        system: resolved.system,
        wait_mode: if fast_wait != 0 {
            WaitMode::SevenTauOn
        } else {
            WaitMode::SevenTauOff
        },
        fock_dim: fluorescence::DEFAULT_FOCK_DIM,
    };
    match fluorescence::fluorescence_fidelity(&scn) {
        Ok(o) => {
            *out = FluorescenceResult {
                fidelity: o.result.fidelity,
                threshold_m: o.result.threshold_m,
                n_ph_up: o.n_ph_up,
                n_ph_down: o.n_ph_down,
                p_e: o.p_e,
                p_g: o.p_g,
                beta_cav: o.beta_cav,
                n_cyc: o.n_cyc,
                total_time_s: o.total_time,
            };
            ReadoutStatus::Ok
        }
        Err(e) => {
            set_last_error(e.to_string());
            ReadoutStatus::EngineFailure
        }
    }
}

/// Run the reflection protocol. With `optimize != 0` (or when no explicit
/// detunings were set) the operating detunings maximize the weak-probe
/// contrast first.
#[no_mangle]
pub unsafe extern "C" fn readout_reflection_run(
    params: *const ReadoutParams,
    optimize: c_int,
    out: *mut ReflectionResult,
) -> ReadoutStatus {
    if params.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return ReadoutStatus::NullPointer;
    }
    let resolved = (*params).resolve(3.8e-12, 47e-6);
    if let Err(e) = resolved.system.check() {
        set_last_error(e.to_string());
        return ReadoutStatus::InvalidArgument;
    }
    let detunings = match (optimize != 0, resolved.delta_a, resolved.delta_c) {
        (false, Some(delta_a), Some(delta_c)) => DetuningChoice::Explicit { delta_a, delta_c },
        (false, None, None) | (true, _, _) => DetuningChoice::Optimize,
        _ => {
            set_last_error("set both delta_a_GHz and delta_c_GHz, or request optimization");
            return ReadoutStatus::InvalidArgument;
        }
    };
    let scn = ReflectionScenario {
        system: resolved.system,
        p_in: resolved.p_in,
        t_pulse: resolved.t_pulse,
        detunings,
        fock_dim: reflection::DEFAULT_FOCK_DIM,
    };
    match reflection::reflection_fidelity(&scn) {
        Ok(o) => {
            *out = ReflectionResult {
                fidelity: o.result.fidelity,
                threshold_m: o.result.threshold_m,
                n_ph_up: o.n_ph_up,
                n_ph_down: o.n_ph_down,
                r_up: o.r_up,
                r_down: o.r_down,
                contrast: o.contrast,
                delta_a: o.delta_a,
                delta_c: o.delta_c,
                duration_s: scn.t_pulse,
            };
            ReadoutStatus::Ok
        }
        Err(e) => {
            set_last_error(e.to_string());
            ReadoutStatus::EngineFailure
        }
    }
}

/// Copy the last error message (UTF-8, NUL-terminated) into `buf`,
/// truncating to `len` bytes. Returns the full message length.
#[no_mangle]
pub unsafe extern "C" fn readout_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            // always NUL-terminate
            *buf.add(n - 1) = 0;
        }
        bytes.len() - 1
    })
}

/// Engine version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn readout_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cstr(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn version_is_non_null() {
        let v = readout_version();
        assert!(!v.is_null());
        let s = unsafe { CStr::from_ptr(v) }.to_str().unwrap();
        assert_eq!(s, env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn unknown_preset_yields_null_and_message() {
        let p = readout_params_new(cstr("tableX").as_ptr());
        assert!(p.is_null());
        let mut buf = [0i8; 256];
        let n = unsafe { readout_last_error(buf.as_mut_ptr(), buf.len()) };
        assert!(n > 0);
        let msg = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
        assert!(msg.contains("tableX"), "{msg}");
    }

    #[test]
    fn set_rejects_unknown_key() {
        let p = readout_params_new(std::ptr::null());
        assert!(!p.is_null());
        let st = unsafe { readout_params_set(p, cstr("kappa_GHz").as_ptr(), 1.0) };
        assert_eq!(st, ReadoutStatus::InvalidArgument);
        let st = unsafe { readout_params_set(p, cstr("Q").as_ptr(), 1e5) };
        assert_eq!(st, ReadoutStatus::Ok);
        unsafe { readout_params_free(p) };
    }

    #[test]
    fn null_arguments_are_rejected() {
        let mut out = FluorescenceResult {
            fidelity: 0.0,
            threshold_m: 0,
            n_ph_up: 0.0,
            n_ph_down: 0.0,
            p_e: 0.0,
            p_g: 0.0,
            beta_cav: 0.0,
            n_cyc: 0,
            total_time_s: 0.0,
        };
        let st = unsafe { readout_fluorescence_run(std::ptr::null(), 0, &mut out) };
        assert_eq!(st, ReadoutStatus::NullPointer);
    }

    #[test]
    fn invalid_physics_reported_as_invalid_argument() {
        let p = readout_params_new(std::ptr::null());
        unsafe {
            // gamma below the radiative linewidth
            assert_eq!(
                readout_params_set(p, cstr("gamma_GHz").as_ptr(), 1e-5),
                ReadoutStatus::Ok
            );
            let mut out = std::mem::zeroed::<FluorescenceResult>();
            let st = readout_fluorescence_run(p, 0, &mut out);
            assert_eq!(st, ReadoutStatus::InvalidArgument);
            readout_params_free(p);
        }
    }

    #[test]
    fn fluorescence_roundtrip_through_the_c_surface() {
        let p = readout_params_new(cstr("table3").as_ptr());
        unsafe {
            readout_params_set(p, cstr("t_pulse_ns").as_ptr(), 10.0);
            readout_params_set(p, cstr("P_in_pW").as_ptr(), 100.0);
            let mut out = std::mem::zeroed::<FluorescenceResult>();
            let st = readout_fluorescence_run(p, 0, &mut out);
            assert_eq!(st, ReadoutStatus::Ok);
            assert!(out.fidelity > 0.995 && out.fidelity <= 1.0);
            assert!(out.n_ph_down > out.n_ph_up);
            assert!(out.n_cyc > 1);
            readout_params_free(p);
        }
    }

    #[test]
    fn reflection_roundtrip_with_explicit_detunings() {
        let p = readout_params_new(cstr("table3").as_ptr());
        unsafe {
            readout_params_set(p, cstr("P_in_pW").as_ptr(), 16.0);
            readout_params_set(p, cstr("t_pulse_ns").as_ptr(), 2000.0);
            readout_params_set(p, cstr("delta_a_GHz").as_ptr(), 1.94);
            readout_params_set(p, cstr("delta_c_GHz").as_ptr(), -0.70);
            let mut out = std::mem::zeroed::<ReflectionResult>();
            let st = readout_reflection_run(p, 0, &mut out);
            assert_eq!(st, ReadoutStatus::Ok);
            assert!(out.fidelity > 0.5);
            assert!(out.contrast > 0.0);
            assert!((out.duration_s - 2e-6).abs() < 1e-12);
            readout_params_free(p);
        }
    }
}
