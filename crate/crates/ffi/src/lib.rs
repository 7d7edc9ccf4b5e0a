//! C interface.
//!
//! Objects are opaque handles created by `*_load_*`, `*_from_*` or
//! `qrpca_fit` and released with the matching `*_free`. Every fallible
//! function returns a [`QrpcaStatus`]; on failure a description is
//! available from [`qrpca_last_error_message`] on the same thread.
//!
//! Matrices cross the boundary as column-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DMatrix;
use qrpca::estimate::{self, KRule};
use qrpca::panel::{self, Panel, Schema};
use qrpca::qreg::{self, QrProblem};
use qrpca::sieve::{Basis, BasisSpec};
use qrpca::{bootstrap, selectk, ErrorKind};

/// Result of every fallible call. The numeric values match the exit codes
/// of the command-line tool where they overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QrpcaStatus {
    Ok = 0,
    /// invalid argument or configuration
    Usage = 1,
    /// input data violates a precondition
    Data = 2,
    /// a numerical routine failed
    Numerical = 3,
    /// a required pointer was null
    NullPointer = 4,
    /// an internal error was caught at the boundary
    Internal = 5,
}

pub struct QrpcaPanel(Panel);

pub struct QrpcaBasis(Basis);

pub struct QrpcaFit(estimate::QrpcaFit);

/// Outcome of the zero-intercept test.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct QrpcaAlphaTest {
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    /// 1 if the null is rejected, 0 otherwise
    pub reject: c_int,
    /// number of factors used
    pub k: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Failure(QrpcaStatus, String);

impl From<qrpca::Error> for Failure {
    fn from(e: qrpca::Error) -> Self {
        let status = match e.kind() {
            ErrorKind::Usage => QrpcaStatus::Usage,
            ErrorKind::Data => QrpcaStatus::Data,
            ErrorKind::Numerical => QrpcaStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: QrpcaStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, recording any error or panic for [`qrpca_last_error_message`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QrpcaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            QrpcaStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            QrpcaStatus::Internal
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(QrpcaStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(QrpcaStatus::NullPointer, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn opt_str(p: *const c_char, what: &str) -> Result<Option<String>, Failure> {
    if p.is_null() {
        return Ok(None);
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(Some(s.to_string())),
        Err(_) => fail(QrpcaStatus::Usage, format!("{what} is not valid UTF-8")),
    }
}

unsafe fn out_ptr<T>(out: *mut *mut T) -> Result<&'static mut *mut T, Failure> {
    match out.as_mut() {
        Some(o) => {
            *o = ptr::null_mut();
            Ok(o)
        }
        None => fail(QrpcaStatus::NullPointer, "output pointer is null"),
    }
}

/// Message describing the last failure on this thread, or an empty string.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn qrpca_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qrpca_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a long-format CSV. Null column names select the defaults `unit`,
/// `time` and `y`; every other column is a characteristic.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qrpca_panel_load_csv(
    path: *const c_char,
    unit_col: *const c_char,
    time_col: *const c_char,
    y_col: *const c_char,
    out: *mut *mut QrpcaPanel,
) -> QrpcaStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let Some(path) = opt_str(path, "path")? else { return fail(QrpcaStatus::NullPointer, "path is null") };
        let d = Schema::default();
        let schema = Schema {
            unit: opt_str(unit_col, "unit_col")?.unwrap_or(d.unit),
            time: opt_str(time_col, "time_col")?.unwrap_or(d.time),
            y: opt_str(y_col, "y_col")?.unwrap_or(d.y),
            z: None,
        };
        let panel = panel::load_panel(path, &schema).map_err(qrpca::Error::from)?;
        *out = Box::into_raw(Box::new(QrpcaPanel(panel)));
        Ok(())
    })
}

/// Balanced panel from arrays: `y[i + n * t]` and `z[i + n * (t + n_periods * j)]`
/// for unit `i`, period `t` and characteristic `j`.
///
/// # Safety
/// `y` must hold `n_units * n_periods` values and `z` that many times `n_chars`.
#[no_mangle]
pub unsafe extern "C" fn qrpca_panel_from_arrays(
    n_units: usize,
    n_periods: usize,
    n_chars: usize,
    y: *const f64,
    z: *const f64,
    out: *mut *mut QrpcaPanel,
) -> QrpcaStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let nt = n_units.checked_mul(n_periods).ok_or_else(|| Failure(QrpcaStatus::Usage, "size overflow".into()))?;
        let y = slice(y, nt, "y")?;
        let z = slice(z, nt * n_chars, "z")?;
        let ym = DMatrix::from_column_slice(n_units, n_periods, y);
        let zs: Vec<DMatrix<f64>> = (0..n_chars).map(|j| DMatrix::from_column_slice(n_units, n_periods, &z[j * nt..(j + 1) * nt])).collect();
        let panel = Panel::from_balanced(&ym, &zs).map_err(qrpca::Error::from)?;
        *out = Box::into_raw(Box::new(QrpcaPanel(panel)));
        Ok(())
    })
}

/// # Safety
/// `panel` must come from this library; null outputs are skipped.
#[no_mangle]
pub unsafe extern "C" fn qrpca_panel_dims(panel: *const QrpcaPanel, n_units: *mut usize, n_periods: *mut usize, n_chars: *mut usize) -> QrpcaStatus {
    guard(|| {
        let p = &as_ref(panel, "panel")?.0;
        for (dst, v) in [(n_units, p.n_units()), (n_periods, p.n_periods()), (n_chars, p.n_chars())] {
            if let Some(d) = dst.as_mut() {
                *d = v;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `panel` must be null or come from this library, and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qrpca_panel_free(panel: *mut QrpcaPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}

/// Resolves a JSON basis specification against the characteristics of
/// `panel` (used for the number of characteristics and spline boundaries).
///
/// # Safety
/// `json` must be NUL-terminated; `panel` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn qrpca_basis_from_json(json: *const c_char, panel: *const QrpcaPanel, out: *mut *mut QrpcaBasis) -> QrpcaStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let Some(text) = opt_str(json, "json")? else { return fail(QrpcaStatus::NullPointer, "json is null") };
        let panel = &as_ref(panel, "panel")?.0;
        let spec: BasisSpec = serde_json::from_str(&text).map_err(|e| Failure(QrpcaStatus::Usage, format!("basis: {e}")))?;
        let basis = Basis::for_panel(&spec, panel).map_err(qrpca::Error::from)?;
        *out = Box::into_raw(Box::new(QrpcaBasis(basis)));
        Ok(())
    })
}

/// Number of basis functions `P`, or 0 for a null handle.
///
/// # Safety
/// `basis` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn qrpca_basis_dim(basis: *const QrpcaBasis) -> usize {
    basis.as_ref().map_or(0, |b| b.0.dim())
}

/// # Safety
/// `basis` must be null or come from this library, and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qrpca_basis_free(basis: *mut QrpcaBasis) {
    if !basis.is_null() {
        drop(Box::from_raw(basis));
    }
}

/// Fits intercepts, loadings and factors at quantile index `tau`. `k = 0`
/// selects the number of factors by the eigenvalue ratio with default tuning.
///
/// # Safety
/// Handles must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qrpca_fit(panel: *const QrpcaPanel, basis: *const QrpcaBasis, tau: f64, k: usize, out: *mut *mut QrpcaFit) -> QrpcaStatus {
    guard(|| {
        let out = out_ptr(out)?;
        let panel = &as_ref(panel, "panel")?.0;
        let basis = &as_ref(basis, "basis")?.0;
        let rule = if k == 0 { KRule::Ratio { kmax: None } } else { KRule::Fixed(k) };
        let mut fits = estimate::fit_quantile_path(panel, basis, &[tau], rule)?;
        *out = Box::into_raw(Box::new(QrpcaFit(fits.remove(0))));
        Ok(())
    })
}

/// `P`, `K`, `T` and the number of eigenvalues. Null outputs are skipped.
///
/// # Safety
/// `fit` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn qrpca_fit_dims(fit: *const QrpcaFit, p: *mut usize, k: *mut usize, t: *mut usize, n_eigvals: *mut usize) -> QrpcaStatus {
    guard(|| {
        let f = &as_ref(fit, "fit")?.0;
        for (dst, v) in [(p, f.a_hat.len()), (k, f.k), (t, f.f_hat.nrows()), (n_eigvals, f.eigvals.len())] {
            if let Some(d) = dst.as_mut() {
                *d = v;
            }
        }
        Ok(())
    })
}

unsafe fn copy_out(fit: *const QrpcaFit, out: *mut f64, len: usize, pick: impl Fn(&estimate::QrpcaFit) -> &[f64]) -> QrpcaStatus {
    guard(|| {
        let src = pick(&as_ref(fit, "fit")?.0);
        if len != src.len() {
            return fail(QrpcaStatus::Usage, format!("buffer holds {len} values, need {}", src.len()));
        }
        if out.is_null() {
            return fail(QrpcaStatus::NullPointer, "output buffer is null");
        }
        ptr::copy_nonoverlapping(src.as_ptr(), out, len);
        Ok(())
    })
}

/// Copies `a_hat` (length `P`).
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qrpca_fit_a_hat(fit: *const QrpcaFit, out: *mut f64, len: usize) -> QrpcaStatus {
    copy_out(fit, out, len, |f| f.a_hat.as_slice())
}

/// Copies `B_hat` (`P x K`, column-major).
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qrpca_fit_b_hat(fit: *const QrpcaFit, out: *mut f64, len: usize) -> QrpcaStatus {
    copy_out(fit, out, len, |f| f.b_hat.as_slice())
}

/// Copies `F_hat` (`T x K`, column-major).
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qrpca_fit_f_hat(fit: *const QrpcaFit, out: *mut f64, len: usize) -> QrpcaStatus {
    copy_out(fit, out, len, |f| f.f_hat.as_slice())
}

/// Copies the descending eigenvalues (length `min(P, T)`).
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qrpca_fit_eigvals(fit: *const QrpcaFit, out: *mut f64, len: usize) -> QrpcaStatus {
    copy_out(fit, out, len, |f| f.eigvals.as_slice())
}

/// # Safety
/// `fit` must be null or come from this library, and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qrpca_fit_free(fit: *mut QrpcaFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Eigenvalue-ratio and threshold estimates of the number of factors.
///
/// # Safety
/// `eigvals` must hold `len` doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn qrpca_select_k(eigvals: *const f64, len: usize, kmax: usize, lambda: f64, k_ratio: *mut usize, k_threshold: *mut usize) -> QrpcaStatus {
    guard(|| {
        let ev = slice(eigvals, len, "eigvals")?;
        let sel = selectk::select_k(ev, kmax, lambda).map_err(qrpca::Error::from)?;
        let (Some(kr), Some(kt)) = (k_ratio.as_mut(), k_threshold.as_mut()) else {
            return fail(QrpcaStatus::NullPointer, "output pointer is null");
        };
        *kr = sel.k_ratio;
        *kt = sel.k_threshold;
        Ok(())
    })
}

/// Weighted-bootstrap test of a zero intercept function. `k = 0` selects
/// the number of factors by the eigenvalue ratio.
///
/// # Safety
/// Handles must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qrpca_alpha_test(
    panel: *const QrpcaPanel,
    basis: *const QrpcaBasis,
    tau: f64,
    k: usize,
    n_draws: usize,
    level: f64,
    seed: u64,
    out: *mut QrpcaAlphaTest,
) -> QrpcaStatus {
    guard(|| {
        let panel = &as_ref(panel, "panel")?.0;
        let basis = &as_ref(basis, "basis")?.0;
        let Some(out) = out.as_mut() else { return fail(QrpcaStatus::NullPointer, "output pointer is null") };
        let k = if k == 0 {
            let stage = estimate::stage_one(panel, basis, tau)?;
            let ev = estimate::eigenvalues(&stage)?;
            estimate::select_for_stage(&stage, &ev, None, None)?.k_ratio
        } else {
            k
        };
        let t = bootstrap::alpha_zero_test(panel, basis, tau, k, n_draws, level, seed)?;
        *out = QrpcaAlphaTest { statistic: t.statistic, critical_value: t.critical_value, p_value: t.p_value, reject: c_int::from(t.reject), k };
        Ok(())
    })
}

/// Weighted linear quantile regression of `y` on `x` (`n x p`,
/// column-major). `weights` may be null for unit weights.
///
/// # Safety
/// `x` must hold `n * p` doubles, `y` and non-null `weights` `n`, `coef` `p`.
#[no_mangle]
pub unsafe extern "C" fn qrpca_solve_qr(
    x: *const f64,
    y: *const f64,
    weights: *const f64,
    n: usize,
    p: usize,
    tau: f64,
    coef: *mut f64,
    objective: *mut f64,
) -> QrpcaStatus {
    guard(|| {
        let xs = slice(x, n.saturating_mul(p), "x")?;
        let ys = slice(y, n, "y")?;
        if coef.is_null() {
            return fail(QrpcaStatus::NullPointer, "coef is null");
        }
        let xm = DMatrix::from_column_slice(n, p, xs);
        let mut prob = QrProblem::new(&xm, ys, tau).map_err(qrpca::Error::from)?;
        if !weights.is_null() {
            prob = prob.with_weights(slice(weights, n, "weights")?).map_err(qrpca::Error::from)?;
        }
        let sol = qreg::solve_qr(&prob).map_err(qrpca::Error::from)?;
        ptr::copy_nonoverlapping(sol.coef.as_ptr(), coef, p);
        if let Some(o) = objective.as_mut() {
            *o = sol.objective;
        }
        Ok(())
    })
}

/// The check function `(tau - 1{u <= 0}) u`.
#[no_mangle]
pub extern "C" fn qrpca_check_loss(tau: f64, u: f64) -> f64 {
    qreg::check_loss(tau, u)
}
