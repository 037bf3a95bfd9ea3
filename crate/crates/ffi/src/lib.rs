//! C interface to `pme_absorb`.
//!
//! Every function returns a [`PmeStatus`]; on failure the message is available from
//! [`pme_last_error`] on the same thread. Handles are created by `*_new`/`pme_shoot`
//! and must be released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use pme_absorb::config::{RunConfig, Task};
use pme_absorb::radial::{self, DtPolicy, RadialGrid, RadialState, Solver, TimeScheme};
use pme_absorb::shooting::{self, ShootingOptions, ShootingResult};
use pme_absorb::{tasks, Error, Exponents, Params};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Numerical = 4,
    Config = 5,
    Io = 6,
    /// A check ran but did not pass (see `pme_run_config`).
    CheckFailed = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmeParams {
    pub m: f64,
    pub q: f64,
    pub sigma: f64,
    pub dim: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PmeExponents {
    pub alpha: f64,
    pub beta: f64,
    pub k1: f64,
    pub k3: f64,
    pub a_stat: f64,
    pub interface_exponent: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmeScheme {
    BackwardEuler = 0,
    Bdf2 = 1,
}

/// Opaque shooting result.
pub struct PmeShot {
    exponents: Exponents,
    result: ShootingResult,
}

/// Opaque radial simulation.
pub struct PmeSimulation {
    solver: Solver,
    state: RadialState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PmeStatus {
    match e {
        Error::OutOfRange(_) => PmeStatus::OutOfRange,
        Error::InvalidArgument(_) | Error::NegativeData { .. } => PmeStatus::InvalidArgument,
        Error::ConfigError { .. } => PmeStatus::Config,
        Error::Io(_) => PmeStatus::Io,
        _ => PmeStatus::Numerical,
    }
}

/// Runs `f`, converting errors and panics to a status.
fn guard(f: impl FnOnce() -> Result<PmeStatus, (PmeStatus, String)>) -> PmeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            PmeStatus::Panic
        }
    }
}

fn lift<T>(r: pme_absorb::Result<T>) -> Result<T, (PmeStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PmeStatus, String) {
    (PmeStatus::NullPointer, format!("{what} is null"))
}

fn params(p: PmeParams) -> Result<Params, (PmeStatus, String)> {
    lift(Params::new(p.m, p.q, p.sigma, p.dim))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, (PmeStatus, String)> {
    ptr.as_mut().ok_or_else(|| null(what))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to
/// `len`). Returns the full message length without the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn pme_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pme_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// `Ok` if the parameters are admissible, `OutOfRange` otherwise.
#[no_mangle]
pub extern "C" fn pme_params_validate(p: PmeParams) -> PmeStatus {
    guard(|| params(p).map(|_| PmeStatus::Ok))
}

/// # Safety
/// `out` must be null or point to writable memory for one `PmeExponents`.
#[no_mangle]
pub unsafe extern "C" fn pme_exponents(p: PmeParams, out_exponents: *mut PmeExponents) -> PmeStatus {
    guard(|| {
        let e = params(p)?.exponents();
        *out(out_exponents, "out_exponents")? = PmeExponents {
            alpha: e.alpha,
            beta: e.beta,
            k1: e.k1,
            k3: e.k3,
            a_stat: e.a_stat,
            interface_exponent: e.interface_exponent(),
        };
        Ok(PmeStatus::Ok)
    })
}

/// Shoots for `a*`. `precise != 0` selects the tight tolerances.
///
/// # Safety
/// `out_shot` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn pme_shoot(p: PmeParams, precise: i32, out_shot: *mut *mut PmeShot) -> PmeStatus {
    guard(|| {
        let slot = out(out_shot, "out_shot")?;
        *slot = std::ptr::null_mut();
        let e = params(p)?.exponents();
        let opts = if precise != 0 { ShootingOptions::precise() } else { ShootingOptions::default() };
        let result = lift(shooting::solve(&e, &opts))?;
        *slot = Box::into_raw(Box::new(PmeShot { exponents: e, result }));
        Ok(PmeStatus::Ok)
    })
}

/// # Safety
/// `shot` must come from `pme_shoot` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pme_shot_free(shot: *mut PmeShot) {
    if !shot.is_null() {
        drop(Box::from_raw(shot));
    }
}

unsafe fn shot_ref<'a>(shot: *const PmeShot) -> Result<&'a PmeShot, (PmeStatus, String)> {
    shot.as_ref().ok_or_else(|| null("shot"))
}

/// `a*`, `ξ0*` and the relative bracket width.
///
/// # Safety
/// `shot` must be a live handle; each output must be null (skipped) or writable.
#[no_mangle]
pub unsafe extern "C" fn pme_shot_summary(shot: *const PmeShot, a_star: *mut f64, xi0_star: *mut f64, width: *mut f64) -> PmeStatus {
    guard(|| {
        let s = shot_ref(shot)?;
        for (ptr, v) in [(a_star, s.result.a_star), (xi0_star, s.result.xi0_star), (width, s.result.relative_width())] {
            if let Some(p) = ptr.as_mut() {
                *p = v;
            }
        }
        Ok(PmeStatus::Ok)
    })
}

/// Number of profile samples.
///
/// # Safety
/// `shot` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn pme_shot_len(shot: *const PmeShot, len: *mut usize) -> PmeStatus {
    guard(|| {
        *out(len, "len")? = shot_ref(shot)?.result.profile.samples.len();
        Ok(PmeStatus::Ok)
    })
}

/// Copies up to `cap` samples `(ξ, f)`; `written` receives the count.
///
/// # Safety
/// `xi` and `f` must be valid for `cap` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn pme_shot_samples(shot: *const PmeShot, xi: *mut f64, f: *mut f64, cap: usize, written: *mut usize) -> PmeStatus {
    guard(|| {
        let s = shot_ref(shot)?;
        if xi.is_null() || f.is_null() {
            return Err(null("output buffer"));
        }
        let prof = &s.result.profile;
        let n = prof.samples.len().min(cap);
        let (xs, fs) = (std::slice::from_raw_parts_mut(xi, n), std::slice::from_raw_parts_mut(f, n));
        for (k, smp) in prof.samples.iter().take(n).enumerate() {
            xs[k] = smp.xi;
            fs[k] = prof.f(smp);
        }
        if let Some(w) = written.as_mut() {
            *w = n;
        }
        Ok(PmeStatus::Ok)
    })
}

/// Self-similar solution `t^{-α} f*(r t^β)` (linear interpolation, zero past the edge).
///
/// # Safety
/// `shot` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn pme_shot_self_similar(shot: *const PmeShot, t: f64, r: f64, value: *mut f64) -> PmeStatus {
    guard(|| {
        let s = shot_ref(shot)?;
        if !(t > 0.0 && r >= 0.0) {
            return Err((PmeStatus::InvalidArgument, format!("need t > 0 and r >= 0, got t = {t}, r = {r}")));
        }
        *out(value, "value")? = radial::self_similar_value(&s.exponents, &s.result.profile, Default::default(), t, r);
        Ok(PmeStatus::Ok)
    })
}

/// New simulation on `[0, r_max]` with `n_cells` cells, starting at `t0` from the
/// `n_cells + 1` nodal values `u0` (the last one is replaced by the boundary value 0).
///
/// # Safety
/// `u0` must be valid for `len` doubles and `out_sim` writable.
#[no_mangle]
pub unsafe extern "C" fn pme_sim_new(
    p: PmeParams,
    r_max: f64,
    n_cells: usize,
    t0: f64,
    u0: *const f64,
    len: usize,
    out_sim: *mut *mut PmeSimulation,
) -> PmeStatus {
    guard(|| {
        let slot = out(out_sim, "out_sim")?;
        *slot = std::ptr::null_mut();
        let p = params(p)?;
        if u0.is_null() {
            return Err(null("u0"));
        }
        let grid = lift(RadialGrid::new(r_max, n_cells))?;
        if len != grid.len() {
            return Err((PmeStatus::InvalidArgument, format!("u0 has {len} values, the grid has {} nodes", grid.len())));
        }
        let data = std::slice::from_raw_parts(u0, len);
        let state = lift(radial::init_state(grid, p.m, t0, |r| data[((r / grid.dr).round() as usize).min(len - 1)]))?;
        *slot = Box::into_raw(Box::new(PmeSimulation { solver: Solver::new(p, grid), state }));
        Ok(PmeStatus::Ok)
    })
}

/// # Safety
/// `sim` must come from `pme_sim_new` and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pme_sim_free(sim: *mut PmeSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pme_sim_set_scheme(sim: *mut PmeSimulation, scheme: PmeScheme) -> PmeStatus {
    guard(|| {
        let s = out(sim, "sim")?;
        s.solver.scheme = match scheme {
            PmeScheme::BackwardEuler => TimeScheme::BackwardEuler,
            PmeScheme::Bdf2 => TimeScheme::Bdf2,
        };
        Ok(PmeStatus::Ok)
    })
}

/// Advances to `t_end` with fixed steps `dt` (the last one shortened).
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pme_sim_advance(sim: *mut PmeSimulation, t_end: f64, dt: f64) -> PmeStatus {
    guard(|| {
        let s = out(sim, "sim")?;
        let state = s.state.clone();
        let summary = lift(s.solver.run(state, t_end, &DtPolicy::Fixed { dt }, &[], &mut |_| {}))?;
        s.state = summary.state;
        Ok(PmeStatus::Ok)
    })
}

/// Current time, `sup u` and support radius (`u > eps_supp`).
///
/// # Safety
/// `sim` must be a live handle; each output must be null (skipped) or writable.
#[no_mangle]
pub unsafe extern "C" fn pme_sim_observe(sim: *const PmeSimulation, eps_supp: f64, t: *mut f64, sup_u: *mut f64, support: *mut f64) -> PmeStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        let st = &s.state;
        for (ptr, v) in [(t, st.t), (sup_u, st.sup_norm()), (support, radial::support_radius(st, eps_supp))] {
            if let Some(p) = ptr.as_mut() {
                *p = v;
            }
        }
        Ok(PmeStatus::Ok)
    })
}

/// Copies the nodal values; `cap` must be at least `n_cells + 1`.
///
/// # Safety
/// `u` must be valid for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn pme_sim_copy_u(sim: *const PmeSimulation, u: *mut f64, cap: usize) -> PmeStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        if u.is_null() {
            return Err(null("u"));
        }
        let n = s.state.u.len();
        if cap < n {
            return Err((PmeStatus::InvalidArgument, format!("buffer holds {cap} values, need {n}")));
        }
        std::slice::from_raw_parts_mut(u, n).copy_from_slice(&s.state.u);
        Ok(PmeStatus::Ok)
    })
}

/// Runs a task from a TOML file as the command line does. `task` is one of `shoot`,
/// `verify-profile`, `simulate`, `sweep`, `acceptance`; `out_dir` may be null to use the
/// file's `output_dir`. Returns `CheckFailed` when a verification did not pass.
///
/// # Safety
/// `config_path` and `task` must be NUL-terminated strings; `out_dir` null or one.
#[no_mangle]
pub unsafe extern "C" fn pme_run_config(config_path: *const c_char, task: *const c_char, out_dir: *const c_char) -> PmeStatus {
    guard(|| {
        let text = |p: *const c_char, what: &str| -> Result<String, (PmeStatus, String)> {
            if p.is_null() {
                return Err(null(what));
            }
            CStr::from_ptr(p).to_str().map(str::to_owned).map_err(|_| (PmeStatus::InvalidArgument, format!("{what} is not UTF-8")))
        };
        let path = PathBuf::from(text(config_path, "config_path")?);
        let task = match text(task, "task")?.as_str() {
            "shoot" => Task::Shoot,
            "verify-profile" => Task::VerifyProfile,
            "simulate" => Task::Simulate,
            "sweep" => Task::Sweep,
            "acceptance" => Task::Acceptance,
            other => return Err((PmeStatus::InvalidArgument, format!("unknown task `{other}`"))),
        };
        let cfg = lift(RunConfig::from_file(&path))?;
        let dir = if out_dir.is_null() { None } else { Some(PathBuf::from(text(out_dir, "out_dir")?)) };
        let env_root = std::env::var_os(pme_absorb::config::OUTPUT_ENV).map(PathBuf::from);
        let target = cfg.output_path(dir.as_deref(), env_root.as_deref());
        let resolved = lift(cfg.resolve(Some(task)))?;
        let outcome = lift(tasks::run(&resolved, &target))?;
        Ok(if outcome.passed { PmeStatus::Ok } else { PmeStatus::CheckFailed })
    })
}
