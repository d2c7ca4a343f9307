//! C interface to the layerflow simulator.
//!
//! A simulation is created from the text of a scenario config and advanced
//! step by step. Every fallible call returns an [`LfStatus`]; the message of
//! the last failure on the calling thread is available from
//! [`lf_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use layerflow::energy::sample;
use layerflow::scenario::SolverKind;
use layerflow::time_loop::{stable_dt, step, StepContext};
use layerflow::{parse_config, Error, LayerState, Solver, TimeControls};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    InvalidInput = 4,
    SolverAbort = 5,
    BufferTooSmall = 6,
    Io = 7,
    Panic = 8,
}

/// Integrated diagnostics of the current state.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LfEnergy {
    pub time: f64,
    /// Total mechanical energy.
    pub total: f64,
    /// Exchange dissipation, never positive.
    pub exchange: f64,
    /// Viscous dissipation, never positive.
    pub viscous: f64,
    pub friction: f64,
    /// Integrated depth.
    pub mass: f64,
}

/// Opaque simulation handle.
pub struct LfSimulation {
    solver: Solver,
    state: LayerState,
    controls: TimeControls,
    time: f64,
    steps: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> LfStatus {
    match e {
        Error::Config { .. } | Error::ConfigMissing(_) => LfStatus::Config,
        Error::SolverAbort { .. } | Error::NonFiniteTrace { .. } => LfStatus::SolverAbort,
        Error::Io(_) => LfStatus::Io,
        Error::Partition(_) | Error::Input(_) | Error::LayerMismatch { .. } => LfStatus::InvalidInput,
    }
}

fn guard<F: FnOnce() -> Result<(), (LfStatus, String)>>(f: F) -> LfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LfStatus::Panic
        }
    }
}

fn fail(e: Error) -> (LfStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (LfStatus, String) {
    (LfStatus::NullPointer, format!("{what} is null"))
}

impl LfSimulation {
    fn from_config(text: &str) -> Result<Self, Error> {
        let scenario = parse_config(text)?;
        if scenario.solver != SolverKind::Multilayer {
            return Err(Error::Input("only the multilayer solver is exposed through the C interface".into()));
        }
        let solver = scenario.solver()?;
        let state = scenario.initial_state()?;
        state.check_layers(&solver.partition)?;
        scenario.controls.validate()?;
        Ok(Self {
            solver,
            state,
            controls: scenario.controls,
            time: 0.0,
            steps: 0,
        })
    }

    /// One stable step, shortened to land on `until` when given.
    fn advance(&mut self, until: Option<f64>) -> Result<f64, Error> {
        let mut dt = stable_dt(&self.solver, &self.state, &self.controls);
        let mut landed = None;
        if let Some(t) = until {
            if self.time + dt >= t {
                dt = t - self.time;
                landed = Some(t);
            }
        }
        let ctx = StepContext {
            step: self.steps + 1,
            time: self.time,
        };
        let solver = &self.solver;
        self.state = step(&self.state, dt, &solver.partition, self.controls.integrator, ctx, |s| solver.rhs(s))?;
        self.steps += 1;
        self.time = landed.unwrap_or(self.time + dt);
        Ok(dt)
    }
}

/// Creates a simulation from a NUL-terminated config text. On success
/// `*out` owns a handle to release with [`lf_simulation_free`].
///
/// # Safety
/// `config` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lf_simulation_new(config: *const c_char, out: *mut *mut LfSimulation) -> LfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if config.is_null() {
            return Err(null("config"));
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|e| (LfStatus::InvalidUtf8, format!("config is not UTF-8: {e}")))?;
        let sim = LfSimulation::from_config(text).map_err(fail)?;
        *out = Box::into_raw(Box::new(sim));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must be null or a handle from [`lf_simulation_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lf_simulation_free(sim: *mut LfSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Takes one step of the stable size. The step used is written to `dt`
/// when it is not null.
///
/// # Safety
/// `sim` must be a live handle; `dt` null or valid.
#[no_mangle]
pub unsafe extern "C" fn lf_simulation_step(sim: *mut LfSimulation, dt: *mut f64) -> LfStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| null("sim"))?;
        let used = sim.advance(None).map_err(fail)?;
        if !dt.is_null() {
            *dt = used;
        }
        Ok(())
    })
}

/// Steps until the simulation time equals `t_end` exactly. The number of
/// steps taken is written to `steps` when it is not null.
///
/// # Safety
/// `sim` must be a live handle; `steps` null or valid.
#[no_mangle]
pub unsafe extern "C" fn lf_simulation_run_until(sim: *mut LfSimulation, t_end: f64, steps: *mut usize) -> LfStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| null("sim"))?;
        if !t_end.is_finite() {
            return Err((LfStatus::InvalidInput, format!("t_end must be finite, got {t_end}")));
        }
        let start = sim.steps;
        while sim.time < t_end {
            sim.advance(Some(t_end)).map_err(fail)?;
        }
        if !steps.is_null() {
            *steps = sim.steps - start;
        }
        Ok(())
    })
}

/// Current simulation time; NaN for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_simulation_time(sim: *const LfSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.time)
}

/// Final time from the config.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_simulation_t_end(sim: *const LfSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.controls.t_end)
}

/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_simulation_n_cells(sim: *const LfSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.state.n_cells())
}

/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_simulation_n_layers(sim: *const LfSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.state.n_layers())
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), (LfStatus, String)> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < src.len() {
        return Err((
            LfStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Copies the total depth of every cell into `buf` (at least n_cells long).
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn lf_simulation_depth(sim: *const LfSimulation, buf: *mut f64, len: usize) -> LfStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        copy_out(&sim.state.depth, buf, len)
    })
}

/// Copies the velocity of `layer` (0 is the bottom layer) into `buf`.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn lf_simulation_velocity(
    sim: *const LfSimulation,
    layer: usize,
    buf: *mut f64,
    len: usize,
) -> LfStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        let u = sim.state.velocity.get(layer).ok_or_else(|| {
            (
                LfStatus::InvalidInput,
                format!("layer {layer} out of range (0..{})", sim.state.n_layers()),
            )
        })?;
        copy_out(u, buf, len)
    })
}

/// Evaluates the energy diagnostics of the current state.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lf_simulation_energy(sim: *const LfSimulation, out: *mut LfEnergy) -> LfStatus {
    guard(|| {
        let sim = sim.as_ref().ok_or_else(|| null("sim"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let eval = sim.solver.evaluate(&sim.state).map_err(fail)?;
        let e = sample(&sim.solver, &sim.state, &eval, sim.time);
        *out = LfEnergy {
            time: e.time,
            total: e.total,
            exchange: e.exchange,
            viscous: e.viscous,
            friction: e.friction,
            mass: e.mass,
        };
        Ok(())
    })
}

/// Message of the last failure on this thread, empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static description of a status code; "unknown status" for other values.
#[no_mangle]
pub extern "C" fn lf_status_name(code: i32) -> *const c_char {
    let s: &'static CStr = match code {
        0 => c"ok",
        1 => c"null pointer",
        2 => c"invalid UTF-8",
        3 => c"config error",
        4 => c"invalid input",
        5 => c"solver abort",
        6 => c"buffer too small",
        7 => c"I/O error",
        8 => c"internal panic",
        _ => c"unknown status",
    };
    s.as_ptr()
}
