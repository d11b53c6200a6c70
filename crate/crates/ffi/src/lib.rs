//! C ABI for corrsurf.
//!
//! Every function returns a [`CsStatus`]. Results are written through out
//! pointers, and on failure a message is available from [`cs_last_error`]
//! on the calling thread. Models and surfaces are opaque heap handles that
//! the caller releases with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use corrsurf::error::LossBound;
use corrsurf::factor::{FactorKind, FactorModelSpec, Idiosyncratic};
use corrsurf::gaussian::{self, PConvention};
use corrsurf::surface::{self, CellStatus, CorrSurface, SurfaceConfig};
use corrsurf::tarch::{Innovation, TarchParams};
use corrsurf::Error;

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Numeric = 4,
    Panic = 5,
}

/// Hazard to default-probability convention.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsConvention {
    /// `p = 1 - exp(-h t)`
    Continuous = 0,
    /// `p = 1 - (1 - h)^t`
    Discrete = 1,
}

/// Status of one surface cell.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsCellStatus {
    Valid = 0,
    IndependenceBound = 1,
    ComonotoneBound = 2,
    Invalid = 3,
}

/// Opaque factor loss model.
pub struct CsLossModel {
    spec: FactorModelSpec,
}

/// Opaque correlation surface.
pub struct CsSurface {
    inner: CorrSurface,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CsStatus {
    match e {
        Error::OutOfRange { .. } => CsStatus::OutOfRange,
        Error::Domain(_) | Error::InvalidParams(_) | Error::Hypothesis(_) | Error::LengthMismatch { .. } => {
            CsStatus::InvalidArgument
        }
        _ => CsStatus::Numeric,
    }
}

fn guard<F>(f: F) -> CsStatus
where
    F: FnOnce() -> Result<(), (CsStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            CsStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (CsStatus, String)>;
}

impl<T> IntoFfi<T> for corrsurf::Result<T> {
    fn ffi(self) -> Result<T, (CsStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(name: &str) -> (CsStatus, String) {
    (CsStatus::NullPointer, format!("{name} is null"))
}

fn invalid(msg: impl Into<String>) -> (CsStatus, String) {
    (CsStatus::InvalidArgument, msg.into())
}

unsafe fn write<T>(out: *mut T, v: T, name: &str) -> Result<(), (CsStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(v);
    Ok(())
}

unsafe fn slice<'a>(data: *const f64, len: usize, name: &str) -> Result<&'a [f64], (CsStatus, String)> {
    if len == 0 {
        return Err(invalid(format!("{name} is empty")));
    }
    if data.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

/// Message of the last failed call on this thread, or null.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Gaussian-copula expected equity-tranche loss `E L_(0,K]`.
///
/// # Safety
/// `out` must be null or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn cs_expected_equity_loss(k: f64, p: f64, recovery: f64, rho: f64, out: *mut f64) -> CsStatus {
    guard(|| {
        let v = gaussian::expected_equity_loss_gauss(k, p, recovery, rho).ffi()?;
        write(out, v, "out")
    })
}

/// Large-portfolio Gaussian loss cdf `P(L <= x)`.
///
/// # Safety
/// `out` must be null or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn cs_vasicek_loss_cdf(x: f64, p: f64, recovery: f64, rho: f64, out: *mut f64) -> CsStatus {
    guard(|| {
        let v = gaussian::vasicek_loss_cdf(x, p, recovery, rho).ffi()?;
        write(out, v, "out")
    })
}

/// Gaussian correlation reproducing `target_el` for the equity tranche
/// `(0, K]`. A target on an admissible bound succeeds with `*out_bound`
/// set to 1 (independence) or 2 (comonotone); otherwise `*out_bound` is 0.
/// A target beyond a bound returns `CsStatus::OutOfRange`.
///
/// # Safety
/// `out_rho` and `out_bound` must be null or valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn cs_implied_corr(
    target_el: f64,
    k: f64,
    p: f64,
    recovery: f64,
    out_rho: *mut f64,
    out_bound: *mut i32,
) -> CsStatus {
    guard(|| {
        if out_rho.is_null() {
            return Err(null("out_rho"));
        }
        if out_bound.is_null() {
            return Err(null("out_bound"));
        }
        let ic = surface::implied_corr(target_el, k, p, recovery).ffi()?;
        let bound = match ic.boundary {
            None => 0,
            Some(LossBound::Independence) => 1,
            Some(LossBound::Comonotone) => 2,
        };
        write(out_rho, ic.rho, "out_rho")?;
        write(out_bound, bound, "out_bound")
    })
}

unsafe fn new_model(
    factor: FactorKind,
    rho: f64,
    idio: Idiosyncratic,
    recovery: f64,
    out: *mut *mut CsLossModel,
) -> Result<(), (CsStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let spec = FactorModelSpec::new(factor, rho, idio, recovery).ffi()?;
    spec.validate().ffi()?;
    out.write(Box::into_raw(Box::new(CsLossModel { spec })));
    Ok(())
}

/// One-period Gaussian factor model.
///
/// # Safety
/// `out` must be null or valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_loss_model_new_gaussian(rho: f64, recovery: f64, out: *mut *mut CsLossModel) -> CsStatus {
    guard(|| new_model(FactorKind::GaussianStatic, rho, Idiosyncratic::Gaussian, recovery, out))
}

/// TARCH market factor aggregated over the horizon, Gaussian
/// idiosyncratic terms. `shock_nu <= 0` selects Gaussian shocks, otherwise
/// unit-variance Student-t shocks with `shock_nu` degrees of freedom.
///
/// # Safety
/// `out` must be null or valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_loss_model_new_tarch(
    rho: f64,
    recovery: f64,
    alpha: f64,
    alpha_d: f64,
    beta: f64,
    shock_nu: f64,
    out: *mut *mut CsLossModel,
) -> CsStatus {
    guard(|| {
        let innovation = if shock_nu > 0.0 { Innovation::StudentT { nu: shock_nu } } else { Innovation::Gaussian };
        let params = TarchParams::unit_variance(alpha, alpha_d, beta, innovation).ffi()?;
        new_model(FactorKind::Tarch(params), rho, Idiosyncratic::Gaussian, recovery, out)
    })
}

/// Student-t copula with `nu` degrees of freedom.
///
/// # Safety
/// `out` must be null or valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_loss_model_new_t_copula(
    rho: f64,
    recovery: f64,
    nu: f64,
    out: *mut *mut CsLossModel,
) -> CsStatus {
    guard(|| new_model(FactorKind::StudentTMixing { nu }, rho, Idiosyncratic::Gaussian, recovery, out))
}

/// Double-t model with market and idiosyncratic degrees of freedom.
///
/// # Safety
/// `out` must be null or valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_loss_model_new_double_t(
    rho: f64,
    recovery: f64,
    nu_m: f64,
    nu_i: f64,
    out: *mut *mut CsLossModel,
) -> CsStatus {
    guard(|| new_model(FactorKind::DoubleT { nu_m }, rho, Idiosyncratic::StudentT { nu: nu_i }, recovery, out))
}

/// Release a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from a `cs_loss_model_new_*` call that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn cs_loss_model_free(model: *mut CsLossModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Monte Carlo implied correlation surface on `k_grid x t_grid`.
///
/// # Safety
/// `model` must be a live handle, the grids must point to `n_k` and `n_t`
/// doubles, and `out` must be null or valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn cs_surface_build(
    model: *const CsLossModel,
    k_grid: *const f64,
    n_k: usize,
    t_grid: *const f64,
    n_t: usize,
    hazard: f64,
    convention: CsConvention,
    steps_per_year: usize,
    n_paths: usize,
    seed: u64,
    out: *mut *mut CsSurface,
) -> CsStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if steps_per_year == 0 || n_paths == 0 {
            return Err(invalid("steps_per_year and n_paths must be positive"));
        }
        let mut cfg = SurfaceConfig::new(slice(t_grid, n_t, "t_grid")?.to_vec(), hazard, n_paths, seed);
        cfg.k_grid = slice(k_grid, n_k, "k_grid")?.to_vec();
        cfg.steps_per_year = steps_per_year;
        cfg.convention = match convention {
            CsConvention::Continuous => PConvention::Continuous,
            CsConvention::Discrete => PConvention::Discrete,
        };
        let inner = surface::build_surface(&model.spec, &cfg).ffi()?;
        out.write(Box::into_raw(Box::new(CsSurface { inner })));
        Ok(())
    })
}

/// Grid sizes of a surface.
///
/// # Safety
/// `s` must be a live handle; `n_k` and `n_t` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn cs_surface_dims(s: *const CsSurface, n_k: *mut usize, n_t: *mut usize) -> CsStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("surface"))?;
        write(n_k, s.inner.k_grid.len(), "n_k")?;
        write(n_t, s.inner.t_grid.len(), "n_t")
    })
}

/// Cell `(i_k, j_t)`: implied correlation (NaN for invalid cells) and status.
///
/// # Safety
/// `s` must be a live handle; `rho` and `status` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn cs_surface_cell(
    s: *const CsSurface,
    i_k: usize,
    j_t: usize,
    rho: *mut f64,
    status: *mut CsCellStatus,
) -> CsStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("surface"))?;
        let cell = s
            .inner
            .cells
            .get(i_k)
            .and_then(|row| row.get(j_t))
            .ok_or_else(|| invalid(format!("cell ({i_k}, {j_t}) is outside the grid")))?;
        let st = match cell.status {
            CellStatus::Valid => CsCellStatus::Valid,
            CellStatus::Boundary(LossBound::Independence) => CsCellStatus::IndependenceBound,
            CellStatus::Boundary(LossBound::Comonotone) => CsCellStatus::ComonotoneBound,
            CellStatus::Invalid => CsCellStatus::Invalid,
        };
        write(rho, cell.rho, "rho")?;
        write(status, st, "status")
    })
}

/// Release a surface. Null is ignored.
///
/// # Safety
/// `s` must be null or a handle from [`cs_surface_build`] that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn cs_surface_free(s: *mut CsSurface) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Delta adjustment factors `rho_h * Psi` at each detachment in `k_grid`,
/// written to `out[0..n_k]`.
///
/// # Safety
/// `model` must be a live handle, `k_grid` must point to `n_k` doubles and
/// `out` must be writable for `n_k` doubles.
#[no_mangle]
pub unsafe extern "C" fn cs_delta_adjustments(
    model: *const CsLossModel,
    k_grid: *const f64,
    n_k: usize,
    maturity: f64,
    hazard: f64,
    bump: f64,
    steps_per_year: usize,
    n_paths: usize,
    seed: u64,
    out: *mut f64,
) -> CsStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        let ks = slice(k_grid, n_k, "k_grid")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if steps_per_year == 0 || n_paths == 0 {
            return Err(invalid("steps_per_year and n_paths must be positive"));
        }
        let reps =
            surface::delta_adjustments(&model.spec, ks, maturity, hazard, bump, steps_per_year, n_paths, seed).ffi()?;
        let dst = std::slice::from_raw_parts_mut(out, n_k);
        for (d, r) in dst.iter_mut().zip(&reps) {
            *d = r.delta_adj;
        }
        Ok(())
    })
}
