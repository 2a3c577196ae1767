//! C ABI over the polsource simulator.
//!
//! Handles are opaque and owned by the caller until passed to the matching
//! `*_free`. Every fallible call returns a [`PsStatus`]; on failure the
//! message is available from [`ps_last_error`] on the same thread until the
//! next failing call. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use polsource::config::{ExperimentConfig, DEFAULT_PRESET};
use polsource::detection::hom_visibility;
use polsource::model::units::{cavity_kappa, mhz_to_rad, zeeman_splitting};
use polsource::source::{conditional_probabilities, run_sequence, PhotonEnvelope};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    RuntimeError = 4,
    OutOfRange = 5,
    Panic = 6,
}

/// Validated experiment configuration.
pub struct PsConfig(ExperimentConfig);

/// Photon flux envelope of one pulse program.
pub struct PsEnvelope(PhotonEnvelope);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: PsStatus, message: impl Into<String>) -> PsStatus {
    let text = CString::new(message.into().replace('\0', " ")).expect("nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
    status
}

fn guard<F: FnOnce() -> PsStatus>(f: F) -> PsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(PsStatus::Panic, "internal panic"),
    }
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn ps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New handle holding the built-in parameter set.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn ps_config_default(out: *mut *mut PsConfig) -> PsStatus {
    guard(|| {
        if out.is_null() {
            return fail(PsStatus::NullPointer, "out is null");
        }
        let cfg = ExperimentConfig::preset(DEFAULT_PRESET).expect("built-in preset");
        *out = Box::into_raw(Box::new(PsConfig(cfg)));
        PsStatus::Ok
    })
}

/// Parses and validates a TOML document.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_config_from_toml(toml: *const c_char, out: *mut *mut PsConfig) -> PsStatus {
    guard(|| {
        if toml.is_null() || out.is_null() {
            return fail(PsStatus::NullPointer, "argument is null");
        }
        let text = match CStr::from_ptr(toml).to_str() {
            Ok(t) => t,
            Err(e) => return fail(PsStatus::InvalidUtf8, e.to_string()),
        };
        let cfg = match ExperimentConfig::from_toml(text).and_then(|c| c.validate().map(|_| c)) {
            Ok(c) => c,
            Err(e) => return fail(PsStatus::ConfigError, e.to_string()),
        };
        *out = Box::into_raw(Box::new(PsConfig(cfg)));
        PsStatus::Ok
    })
}

/// # Safety
/// `config` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_config_free(config: *mut PsConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_config_set_seed(config: *mut PsConfig, seed: u64) -> PsStatus {
    guard(|| match config.as_mut() {
        Some(c) => {
            c.0.run.seed = seed;
            PsStatus::Ok
        }
        None => fail(PsStatus::NullPointer, "config is null"),
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_config_set_trajectories(config: *mut PsConfig, trajectories: usize) -> PsStatus {
    guard(|| match config.as_mut() {
        Some(c) => {
            c.0.run.trajectories = trajectories;
            PsStatus::Ok
        }
        None => fail(PsStatus::NullPointer, "config is null"),
    })
}

/// Runs the configured pulse program through the master equation.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_envelope_run(config: *const PsConfig, out: *mut *mut PsEnvelope) -> PsStatus {
    guard(|| {
        let (Some(cfg), false) = (config.as_ref(), out.is_null()) else {
            return fail(PsStatus::NullPointer, "argument is null");
        };
        let cfg = &cfg.0;
        let result = (|| {
            let model = cfg.model()?;
            let program = cfg.program(&model)?;
            Ok::<_, polsource::error::ConfigError>((model, program, cfg.transit()?, cfg.initial()?))
        })();
        let (model, program, transit, initial) = match result {
            Ok(v) => v,
            Err(e) => return fail(PsStatus::ConfigError, e.to_string()),
        };
        match run_sequence(&model, &program, &transit, &initial) {
            Ok(env) => {
                *out = Box::into_raw(Box::new(PsEnvelope(env)));
                PsStatus::Ok
            }
            Err(e) => fail(PsStatus::RuntimeError, e.to_string()),
        }
    })
}

/// # Safety
/// `envelope` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_envelope_free(envelope: *mut PsEnvelope) {
    if !envelope.is_null() {
        drop(Box::from_raw(envelope));
    }
}

/// Number of time samples; 0 for NULL.
///
/// # Safety
/// `envelope` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_envelope_len(envelope: *const PsEnvelope) -> usize {
    envelope.as_ref().map_or(0, |e| e.0.times.len())
}

/// Sample `index`: time (s) and σ⁺/σ⁻ output flux (1/s).
///
/// # Safety
/// `envelope` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_envelope_sample(
    envelope: *const PsEnvelope,
    index: usize,
    time: *mut f64,
    flux_plus: *mut f64,
    flux_minus: *mut f64,
) -> PsStatus {
    guard(|| {
        let Some(e) = envelope.as_ref() else {
            return fail(PsStatus::NullPointer, "envelope is null");
        };
        if time.is_null() || flux_plus.is_null() || flux_minus.is_null() {
            return fail(PsStatus::NullPointer, "output is null");
        }
        let e = &e.0;
        if index >= e.times.len() {
            return fail(PsStatus::OutOfRange, format!("index {index} >= {}", e.times.len()));
        }
        *time = e.times[index];
        *flux_plus = e.flux_plus[index];
        *flux_minus = e.flux_minus[index];
        PsStatus::Ok
    })
}

/// Number of pulse slots; 0 for NULL.
///
/// # Safety
/// `envelope` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_envelope_slot_count(envelope: *const PsEnvelope) -> usize {
    envelope.as_ref().map_or(0, |e| e.0.slots.len())
}

/// Integrated photons of slot `index` and whether its pump is ω₊ (1) or ω₋ (0).
///
/// # Safety
/// `envelope` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_envelope_slot(
    envelope: *const PsEnvelope,
    index: usize,
    photons_plus: *mut f64,
    photons_minus: *mut f64,
    omega_plus: *mut c_int,
) -> PsStatus {
    guard(|| {
        let Some(e) = envelope.as_ref() else {
            return fail(PsStatus::NullPointer, "envelope is null");
        };
        if photons_plus.is_null() || photons_minus.is_null() || omega_plus.is_null() {
            return fail(PsStatus::NullPointer, "output is null");
        }
        let Some(s) = e.0.slots.get(index) else {
            return fail(PsStatus::OutOfRange, format!("slot {index} >= {}", e.0.slots.len()));
        };
        *photons_plus = s.plus;
        *photons_minus = s.minus;
        *omega_plus = c_int::from(s.generates_plus);
        PsStatus::Ok
    })
}

/// Two-photon interference visibility at the configured Ω₀ and t_p.
///
/// # Safety
/// `config` must be a live handle; `visibility` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_hom_visibility(config: *const PsConfig, visibility: *mut f64) -> PsStatus {
    guard(|| {
        let (Some(cfg), false) = (config.as_ref(), visibility.is_null()) else {
            return fail(PsStatus::NullPointer, "argument is null");
        };
        let cfg = &cfg.0;
        let (model, transit) = match cfg.model().and_then(|m| Ok((m, cfg.transit()?))) {
            Ok(v) => v,
            Err(e) => return fail(PsStatus::ConfigError, e.to_string()),
        };
        match hom_visibility(
            &model,
            mhz_to_rad(cfg.pulses.omega0_mhz),
            cfg.pulses.tp_us * 1e-6,
            &transit,
            cfg.detection.bs_overlap,
            cfg.run.hom_grid_points,
        ) {
            Ok(h) => {
                *visibility = h.visibility;
                PsStatus::Ok
            }
            Err(e) => fail(PsStatus::RuntimeError, e.to_string()),
        }
    })
}

/// Conditional generation probabilities and their standard errors.
///
/// # Safety
/// `config` must be a live handle; `out` must point to 4 writable doubles,
/// filled as p(σ⁺|σ⁻), its error, p(σ⁻|σ⁺), its error.
#[no_mangle]
pub unsafe extern "C" fn ps_conditional(config: *const PsConfig, out: *mut f64) -> PsStatus {
    guard(|| {
        let (Some(cfg), false) = (config.as_ref(), out.is_null()) else {
            return fail(PsStatus::NullPointer, "argument is null");
        };
        let cfg = &cfg.0;
        let setup = (|| {
            let model = cfg.model()?;
            let program = cfg.program(&model)?;
            Ok::<_, polsource::error::ConfigError>((model, program, cfg.transit()?, cfg.initial()?))
        })();
        let (model, program, transit, initial) = match setup {
            Ok(v) => v,
            Err(e) => return fail(PsStatus::ConfigError, e.to_string()),
        };
        match conditional_probabilities(&model, &program, &transit, &initial, cfg.run.trajectories, cfg.run.seed) {
            Ok(c) => {
                let values = [
                    c.plus_given_minus.probability,
                    c.plus_given_minus.std_error,
                    c.minus_given_plus.probability,
                    c.minus_given_plus.std_error,
                ];
                std::ptr::copy_nonoverlapping(values.as_ptr(), out, 4);
                PsStatus::Ok
            }
            Err(e) => fail(PsStatus::RuntimeError, e.to_string()),
        }
    })
}

/// Cavity field decay rate κ (rad/s) from length (m) and finesse.
///
/// # Safety
/// `kappa` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_cavity_kappa(length: f64, finesse: f64, kappa: *mut f64) -> PsStatus {
    guard(|| {
        if kappa.is_null() {
            return fail(PsStatus::NullPointer, "kappa is null");
        }
        match cavity_kappa(length, finesse) {
            Ok(k) => {
                *kappa = k;
                PsStatus::Ok
            }
            Err(e) => fail(PsStatus::ConfigError, e.to_string()),
        }
    })
}

/// Ground-state Zeeman splitting Δ_B (rad/s) for a field in gauss.
///
/// # Safety
/// `splitting` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_zeeman_splitting(b_gauss: f64, g_factor: f64, splitting: *mut f64) -> PsStatus {
    guard(|| {
        if splitting.is_null() {
            return fail(PsStatus::NullPointer, "splitting is null");
        }
        match zeeman_splitting(b_gauss, g_factor) {
            Ok(z) => {
                *splitting = z;
                PsStatus::Ok
            }
            Err(e) => fail(PsStatus::ConfigError, e.to_string()),
        }
    })
}
