//! C interface to the oscillator-basis solver.
//!
//! Tables and results are opaque handles released with the matching
//! `_free` function. Every fallible
//! call returns an [`ObeStatus`]; on failure `obe_last_error` yields a
//! message owned by the library and valid until the next call on the same
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use obe_core::basis::{Exchange, SectorSpec};
use obe_core::coeffs::store::{load_tables, save_tables, CoefficientTables};
use obe_core::config::RunConfig;
use obe_core::solver::{optimize_scale, ScaleMode, SpectrumResult, VariationalProtocol};
use obe_core::ObeError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    Table = 5,
    MissingCoefficients = 6,
    Numerical = 7,
    Panic = 8,
}

/// Coefficient tables.
pub struct ObeTables(CoefficientTables);

/// Spectrum of one sector.
pub struct ObeResult(SpectrumResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &ObeError) -> ObeStatus {
    match e {
        ObeError::Config(_) | ObeError::Optimizer(_) => ObeStatus::Config,
        ObeError::Domain(_) => ObeStatus::InvalidArgument,
        ObeError::Io { .. } => ObeStatus::Io,
        ObeError::Table(_) => ObeStatus::Table,
        ObeError::MissingCoefficients(_) => ObeStatus::MissingCoefficients,
        ObeError::Quadrature(_) | ObeError::Eigen(_) | ObeError::Symmetry(_) => ObeStatus::Numerical,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (ObeStatus, String)>) -> ObeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ObeStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            ObeStatus::Panic
        }
    }
}

fn core_err(e: ObeError) -> (ObeStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (ObeStatus, String) {
    (ObeStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (ObeStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (ObeStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

/// Message describing the last failure on this thread; empty after success.
#[no_mangle]
pub extern "C" fn obe_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Build coefficient tables up to `qmax` quanta.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn obe_tables_build(qmax: u32, out: *mut *mut ObeTables) -> ObeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if qmax > 80 {
            return Err((ObeStatus::InvalidArgument, format!("qmax {qmax} exceeds 80")));
        }
        *out = Box::into_raw(Box::new(ObeTables(CoefficientTables::build(qmax))));
        Ok(())
    })
}

/// Load tables written by `obe_tables_save` or the `obe precompute` command.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn obe_tables_load(path: *const c_char, out: *mut *mut ObeTables) -> ObeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        let t = load_tables(Path::new(path)).map_err(core_err)?;
        *out = Box::into_raw(Box::new(ObeTables(t)));
        Ok(())
    })
}

/// # Safety
/// `tables` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn obe_tables_save(tables: *const ObeTables, path: *const c_char) -> ObeStatus {
    guard(|| {
        let t = tables.as_ref().ok_or_else(|| null("tables"))?;
        let path = str_arg(path, "path")?;
        save_tables(&t.0, Path::new(path)).map_err(core_err)
    })
}

/// Largest quanta cutoff the tables cover.
///
/// # Safety
/// `tables` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn obe_tables_qmax(tables: *const ObeTables, out: *mut u32) -> ObeStatus {
    guard(|| {
        let t = tables.as_ref().ok_or_else(|| null("tables"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = t.0.qmax;
        Ok(())
    })
}

/// # Safety
/// `tables` must come from this library or be NULL; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn obe_tables_free(tables: *mut ObeTables) {
    if !tables.is_null() {
        drop(Box::from_raw(tables));
    }
}

fn run(cfg: &obe_core::matel::SystemConfig, sector: &SectorSpec, p: &VariationalProtocol, t: &CoefficientTables, states: usize) -> Result<SpectrumResult, (ObeStatus, String)> {
    if t.qmax < sector.qmax {
        return Err((
            ObeStatus::MissingCoefficients,
            format!("tables cover Q <= {} but the basis needs Q <= {}", t.qmax, sector.qmax),
        ));
    }
    t.install();
    optimize_scale(cfg, sector, p, t, states).map_err(core_err)
}

/// Solve the sector described by a TOML run configuration.
///
/// # Safety
/// `toml` must be NUL-terminated; `tables` from this library; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn obe_solve_toml(toml: *const c_char, tables: *const ObeTables, out: *mut *mut ObeResult) -> ObeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(toml, "toml")?;
        let t = tables.as_ref().ok_or_else(|| null("tables"))?;
        let cfg = RunConfig::from_toml(text).map_err(core_err)?;
        let r = run(
            &cfg.system().map_err(core_err)?,
            &cfg.sector().map_err(core_err)?,
            &cfg.protocol().map_err(core_err)?,
            &t.0,
            cfg.output.states,
        )?;
        *out = Box::into_raw(Box::new(ObeResult(r)));
        Ok(())
    })
}

/// Lowest `states` levels of a built-in system of three identical bosons at
/// fixed scale `a`.
///
/// # Safety
/// `name` must be NUL-terminated; `tables` from this library; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn obe_solve_builtin(
    name: *const c_char,
    l: u32,
    parity: i32,
    qmax: u32,
    a: f64,
    states: usize,
    tables: *const ObeTables,
    out: *mut *mut ObeResult,
) -> ObeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = str_arg(name, "name")?;
        let t = tables.as_ref().ok_or_else(|| null("tables"))?;
        let cfg = obe_core::systems::builtin(name)
            .ok_or_else(|| (ObeStatus::InvalidArgument, format!("unknown builtin system {name:?}")))?;
        let parity = match parity {
            1 => 1,
            -1 => -1,
            p => return Err((ObeStatus::InvalidArgument, format!("parity must be +1 or -1, got {p}"))),
        };
        let sector = SectorSpec {
            l,
            parity,
            exchange: Exchange::ThreeIdentical(1),
            qmax,
        };
        let p = VariationalProtocol {
            mode: ScaleMode::FixedA,
            a: Some(a),
            ..Default::default()
        };
        let r = run(&cfg, &sector, &p, &t.0, states)?;
        *out = Box::into_raw(Box::new(ObeResult(r)));
        Ok(())
    })
}

/// Number of eigenvalues held.
///
/// # Safety
/// `result` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn obe_result_len(result: *const ObeResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.eigenvalues.len())
}

/// Basis size of the solved sector.
///
/// # Safety
/// `result` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn obe_result_basis_size(result: *const ObeResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.basis_size)
}

/// Energy and ⟨r12⟩ of state `index`. Either output may be NULL.
///
/// # Safety
/// `result` from this library; outputs NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn obe_result_state(result: *const ObeResult, index: usize, energy: *mut f64, mean_r12: *mut f64) -> ObeStatus {
    guard(|| {
        let r = &result.as_ref().ok_or_else(|| null("result"))?.0;
        let e = *r
            .eigenvalues
            .get(index)
            .ok_or_else(|| (ObeStatus::InvalidArgument, format!("state {index} out of range (have {})", r.eigenvalues.len())))?;
        if let Some(o) = energy.as_mut() {
            *o = e;
        }
        if let Some(o) = mean_r12.as_mut() {
            *o = r.observables["mean_r12"][index];
        }
        Ok(())
    })
}

/// Frozen oscillator scales.
///
/// # Safety
/// `result` from this library; outputs NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn obe_result_scales(result: *const ObeResult, a: *mut f64, b: *mut f64) -> ObeStatus {
    guard(|| {
        let r = &result.as_ref().ok_or_else(|| null("result"))?.0;
        if let Some(o) = a.as_mut() {
            *o = r.a_star;
        }
        if let Some(o) = b.as_mut() {
            *o = r.b_star;
        }
        Ok(())
    })
}

/// Whole result as JSON; release with `obe_string_free`.
///
/// # Safety
/// `result` from this library; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn obe_result_json(result: *const ObeResult, out: *mut *mut c_char) -> ObeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let r = &result.as_ref().ok_or_else(|| null("result"))?.0;
        let s = serde_json::to_string(r).map_err(|e| (ObeStatus::Numerical, e.to_string()))?;
        *out = CString::new(s).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `result` must come from this library or be NULL; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn obe_result_free(result: *mut ObeResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn obe_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
