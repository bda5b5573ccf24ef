//! C ABI over the core crate: opaque handles, integer status codes, and a
//! thread-local last-error message. The header is generated at build time
//! into include/axibouss.h.

use std::cell::RefCell;
use std::ffi::{CStr, CString};

use libc::{c_char, size_t};

use axibouss::config::ExperimentConfig;
use axibouss::error::Error;
use axibouss::evolve::{SimState, Simulation, StepConfig};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    Numeric = 4,
    BlowUp = 5,
    Io = 6,
    Internal = 7,
}

/// Field selector for norm queries.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxbField {
    Rho = 0,
    Zeta = 1,
}

pub struct AxbConfig {
    inner: ExperimentConfig,
}

pub struct AxbSim {
    sim: Simulation,
    state: SimState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap());
}

fn status_of(err: &Error) -> AxbStatus {
    match err {
        Error::Config(_) | Error::ConfigMismatch(_) => AxbStatus::InvalidConfig,
        Error::BlowUp { .. } => AxbStatus::BlowUp,
        Error::Io(_) => AxbStatus::Io,
        Error::SolverNonConvergence { .. } | Error::DegenerateInput(_) => AxbStatus::Numeric,
        _ => AxbStatus::Internal,
    }
}

fn fail(err: &Error) -> AxbStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Copies the last error message into `buf` (NUL terminated, truncating) and
/// returns the full message length in bytes, excluding the terminator.
/// Passing a null or empty buffer just queries the length.
#[no_mangle]
pub unsafe extern "C" fn axb_last_error(buf: *mut c_char, cap: size_t) -> size_t {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Returns a handle holding the built-in default configuration.
#[no_mangle]
pub extern "C" fn axb_config_default() -> *mut AxbConfig {
    Box::into_raw(Box::new(AxbConfig {
        inner: ExperimentConfig::default(),
    }))
}

/// Parses a TOML configuration; returns null and sets the error on failure.
#[no_mangle]
pub unsafe extern "C" fn axb_config_parse(text: *const c_char) -> *mut AxbConfig {
    if text.is_null() {
        set_error("axb_config_parse: null text");
        return std::ptr::null_mut();
    }
    let text = match CStr::from_ptr(text).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("axb_config_parse: text is not valid UTF-8");
            return std::ptr::null_mut();
        }
    };
    match axibouss::config::parse_config(text) {
        Ok(inner) => Box::into_raw(Box::new(AxbConfig { inner })),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn axb_config_free(cfg: *mut AxbConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Builds a simulation from the configured grid, scheme, and initial preset,
/// at the given diffusivity (which overrides the configured one).
#[no_mangle]
pub unsafe extern "C" fn axb_sim_new(cfg: *const AxbConfig, kappa: f64) -> *mut AxbSim {
    if cfg.is_null() {
        set_error("axb_sim_new: null config");
        return std::ptr::null_mut();
    }
    let cfg = &(*cfg).inner;
    let built = (|| -> axibouss::error::Result<AxbSim> {
        if kappa < 0.0 {
            return Err(Error::Config(format!("kappa must be >= 0, got {kappa}")));
        }
        let g = cfg.grid_spec()?;
        let mut step_cfg = StepConfig::new(cfg.time.dt, kappa, cfg.time.scheme);
        step_cfg.cfl_max = cfg.time.cfl_max;
        let sim = Simulation::new(g, step_cfg)?;
        let state = match cfg.init.preset.as_str() {
            "zero" => axibouss::presets::zero(g)?,
            "gaussian" => axibouss::presets::gaussian_blob(g, cfg.init.rho_amp)?,
            "vortex_ring" => {
                axibouss::presets::vortex_ring(g, cfg.init.zeta_amp, cfg.init.rho_amp)?
            }
            other => return Err(Error::Config(format!("unknown preset '{other}'"))),
        };
        Ok(AxbSim { sim, state })
    })();
    match built {
        Ok(s) => Box::into_raw(Box::new(s)),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

#[no_mangle]
pub unsafe extern "C" fn axb_sim_free(sim: *mut AxbSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances one step, capped at `dt_cap` (pass a large value for no cap).
#[no_mangle]
pub unsafe extern "C" fn axb_sim_step(sim: *mut AxbSim, dt_cap: f64) -> AxbStatus {
    if sim.is_null() {
        set_error("axb_sim_step: null simulation");
        return AxbStatus::NullPointer;
    }
    let s = &mut *sim;
    match s.sim.step(&mut s.state, dt_cap) {
        Ok(_) => AxbStatus::Ok,
        Err(e) => fail(&e),
    }
}

/// Advances to `t_end` under the configured time step and CFL cap.
#[no_mangle]
pub unsafe extern "C" fn axb_sim_run(sim: *mut AxbSim, t_end: f64) -> AxbStatus {
    if sim.is_null() {
        set_error("axb_sim_run: null simulation");
        return AxbStatus::NullPointer;
    }
    let s = &mut *sim;
    match s.sim.run(&mut s.state, t_end, |_, _, _| Ok(())) {
        Ok(()) => AxbStatus::Ok,
        Err(e) => fail(&e),
    }
}

/// Current simulation time; NaN on a null handle.
#[no_mangle]
pub unsafe extern "C" fn axb_sim_time(sim: *const AxbSim) -> f64 {
    if sim.is_null() {
        return f64::NAN;
    }
    (*sim).state.t
}

/// Writes the L^p norm (cylindrical measure; p = inf for the sup norm) of
/// the selected field into `out`.
#[no_mangle]
pub unsafe extern "C" fn axb_sim_norm(
    sim: *const AxbSim,
    field: AxbField,
    p: f64,
    out: *mut f64,
) -> AxbStatus {
    if sim.is_null() || out.is_null() {
        set_error("axb_sim_norm: null argument");
        return AxbStatus::NullPointer;
    }
    if !(p >= 1.0) && !p.is_infinite() {
        set_error(&format!("axb_sim_norm: p must be >= 1 or inf, got {p}"));
        return AxbStatus::Numeric;
    }
    let s = &*sim;
    let f = match field {
        AxbField::Rho => &s.state.rho,
        AxbField::Zeta => &s.state.zeta,
    };
    *out = f.lp_norm(p);
    AxbStatus::Ok
}
