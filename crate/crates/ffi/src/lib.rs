//! C ABI over `basket-expansion`.
//!
//! Instruments are built into an opaque [`BxBasket`] handle, priced with
//! [`bx_price_expansion`] or [`bx_price_mc`] and released with
//! [`bx_basket_free`]. Every fallible call returns a [`BxStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`bx_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use basket_expansion::reductions::{
    asian_to_basket, dividends_to_basket, dividends_to_spot_basket, AsianSpec, DividendOptionSpec,
};
use basket_expansion::{
    expand_price, price_mc, BasketSpec, ExpansionOrder, McConfig, OptionKind, PiecewiseCurve, PricingError, ProxyKind,
    Sampler,
};
use nalgebra::DMatrix;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BxStatus {
    Ok = 0,
    InvalidArgument = 1,
    Domain = 2,
    Degenerate = 3,
    Numerical = 4,
    NotPsd = 5,
    Reduction = 6,
    NullPointer = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BxProxy {
    Geometric = 0,
    Levy = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BxSampler {
    Pseudorandom = 0,
    Sobol = 1,
}

/// Opaque priced instrument.
pub struct BxBasket {
    spec: BasketSpec,
    /// Basket sampled by Monte Carlo; differs from `spec` for dividends.
    mc_spec: BasketSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

struct Failure(BxStatus, String);

type FfiResult<T> = Result<T, Failure>;

impl From<PricingError> for Failure {
    fn from(e: PricingError) -> Self {
        let status = match e {
            PricingError::InvalidArgument(_) | PricingError::Dimension { .. } => BxStatus::InvalidArgument,
            PricingError::Domain(_) | PricingError::DerivativeUndefined { .. } => BxStatus::Domain,
            PricingError::DegenerateProxy(_) => BxStatus::Degenerate,
            PricingError::NumericalFailure(_) => BxStatus::Numerical,
            PricingError::NotPositiveSemidefinite { .. } => BxStatus::NotPsd,
            PricingError::Reduction(_) => BxStatus::Reduction,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: &str) -> Failure {
    Failure(BxStatus::InvalidArgument, msg.to_string())
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> BxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BxStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BxStatus::Panic
        }
    }
}

/// Borrows `len` values, rejecting null data for a non-empty slice.
unsafe fn slice<'a>(data: *const f64, len: usize, name: &str) -> FfiResult<&'a [f64]> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(Failure(BxStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn out_ref<'a, T>(out: *mut T, name: &str) -> FfiResult<&'a mut T> {
    out.as_mut().ok_or_else(|| Failure(BxStatus::NullPointer, format!("{name} is null")))
}

unsafe fn handle_ref<'a>(handle: *const BxBasket) -> FfiResult<&'a BxBasket> {
    handle.as_ref().ok_or_else(|| Failure(BxStatus::NullPointer, "handle is null".into()))
}

fn kind(is_call: bool) -> OptionKind {
    if is_call {
        OptionKind::Call
    } else {
        OptionKind::Put
    }
}

fn emit(out: *mut *mut BxBasket, spec: BasketSpec, mc_spec: BasketSpec) {
    let boxed = Box::new(BxBasket { spec, mc_spec });
    unsafe { *out = Box::into_raw(boxed) };
}

/// Basket with an explicit row-major `n × n` log-covariance.
///
/// # Safety
/// `weights`, `forwards` must point to `n` values, `covariance` to `n * n`
/// values and `out` to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn bx_basket_new(
    n: usize,
    weights: *const f64,
    forwards: *const f64,
    covariance: *const f64,
    strike: f64,
    discount: f64,
    maturity: f64,
    is_call: bool,
    out: *mut *mut BxBasket,
) -> BxStatus {
    guard(|| {
        let out_slot = out_ref(out, "out")?;
        *out_slot = ptr::null_mut();
        if n == 0 {
            return Err(invalid("basket needs at least one asset"));
        }
        let size = n.checked_mul(n).ok_or_else(|| invalid("basket too large"))?;
        let w = slice(weights, n, "weights")?.to_vec();
        let f = slice(forwards, n, "forwards")?.to_vec();
        let v = DMatrix::from_row_slice(n, n, slice(covariance, size, "covariance")?);
        let spec = BasketSpec::new(w, f, v, strike, discount, maturity, kind(is_call))?;
        emit(out, spec.clone(), spec);
        Ok(())
    })
}

/// Asian option on one asset with flat rate, yield and volatility.
/// `weights` may be null for an equally weighted average.
///
/// # Safety
/// `times` (and `weights` when non-null) must point to `n_times` values and
/// `out` to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn bx_asian_new(
    spot: f64,
    rate: f64,
    dividend_yield: f64,
    vol: f64,
    n_times: usize,
    times: *const f64,
    weights: *const f64,
    strike: f64,
    is_call: bool,
    out: *mut *mut BxBasket,
) -> BxStatus {
    guard(|| {
        let out_slot = out_ref(out, "out")?;
        *out_slot = ptr::null_mut();
        if n_times == 0 {
            return Err(invalid("schedule is empty"));
        }
        let times = slice(times, n_times, "times")?.to_vec();
        let weights = if weights.is_null() {
            vec![1.0 / n_times as f64; n_times]
        } else {
            slice(weights, n_times, "weights")?.to_vec()
        };
        let spec = asian_to_basket(&AsianSpec {
            spot,
            rate: PiecewiseCurve::constant(rate),
            yield_curve: PiecewiseCurve::constant(dividend_yield),
            vol: PiecewiseCurve::constant(vol),
            times,
            weights,
            strike,
            kind: kind(is_call),
            discount: None,
            fixings: vec![],
        })?;
        emit(out, spec.clone(), spec);
        Ok(())
    })
}

/// Vanilla option paying cash dividends `amounts[i]` at `times[i]`, with
/// flat rate and volatility.
///
/// # Safety
/// `times` and `amounts` must point to `n_dividends` values and `out` to
/// writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn bx_dividend_new(
    spot: f64,
    rate: f64,
    vol: f64,
    n_dividends: usize,
    times: *const f64,
    amounts: *const f64,
    strike: f64,
    maturity: f64,
    is_call: bool,
    out: *mut *mut BxBasket,
) -> BxStatus {
    guard(|| {
        let out_slot = out_ref(out, "out")?;
        *out_slot = ptr::null_mut();
        let times = slice(times, n_dividends, "times")?;
        let amounts = slice(amounts, n_dividends, "amounts")?;
        let spec = DividendOptionSpec {
            spot,
            rate: PiecewiseCurve::constant(rate),
            vol: PiecewiseCurve::constant(vol),
            dividends: times.iter().copied().zip(amounts.iter().copied()).collect(),
            strike,
            maturity,
            kind: kind(is_call),
            discount: None,
        };
        emit(out, dividends_to_basket(&spec)?, dividends_to_spot_basket(&spec)?);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `handle` must come from a `bx_*_new` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bx_basket_free(handle: *mut BxBasket) {
    if !handle.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(handle))));
    }
}

/// Number of assets in the reduced basket.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bx_basket_len(handle: *const BxBasket, out: *mut usize) -> BxStatus {
    guard(|| {
        *out_ref(out, "out")? = handle_ref(handle)?.spec.len();
        Ok(())
    })
}

/// Basket forward `Σ wᵢFᵢ` of the reduced basket.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bx_basket_forward(handle: *const BxBasket, out: *mut f64) -> BxStatus {
    guard(|| {
        *out_ref(out, "out")? = handle_ref(handle)?.spec.basket_forward();
        Ok(())
    })
}

/// Expansion price of order 0 to 3 around the proxy given as a `BxProxy` value.
///
/// # Safety
/// `handle` must be a live handle and `out_price` writable.
#[no_mangle]
pub unsafe extern "C" fn bx_price_expansion(
    handle: *const BxBasket,
    proxy: u32,
    order: u32,
    out_price: *mut f64,
) -> BxStatus {
    guard(|| {
        let out = out_ref(out_price, "out_price")?;
        let h = handle_ref(handle)?;
        let order = u8::try_from(order).map_err(|_| invalid("order must be 0 to 3"))?;
        let order = ExpansionOrder::from_u8(order)?;
        let proxy = match proxy {
            p if p == BxProxy::Geometric as u32 => ProxyKind::VorstGeometric,
            p if p == BxProxy::Levy as u32 => ProxyKind::VorstLevy,
            _ => return Err(invalid("unknown proxy")),
        };
        *out = expand_price(&h.spec, proxy, order)?.price;
        Ok(())
    })
}

/// Monte Carlo price and standard error with a `BxSampler` value.
/// `out_std_error` may be null.
///
/// # Safety
/// `handle` must be a live handle, `out_price` writable and
/// `out_std_error` writable or null.
#[no_mangle]
pub unsafe extern "C" fn bx_price_mc(
    handle: *const BxBasket,
    paths: u64,
    seed: u64,
    sampler: u32,
    antithetic: bool,
    out_price: *mut f64,
    out_std_error: *mut f64,
) -> BxStatus {
    guard(|| {
        let out = out_ref(out_price, "out_price")?;
        let h = handle_ref(handle)?;
        let cfg = McConfig {
            paths: usize::try_from(paths).map_err(|_| invalid("too many paths"))?,
            seed,
            sampler: match sampler {
                s if s == BxSampler::Pseudorandom as u32 => Sampler::Pseudorandom,
                s if s == BxSampler::Sobol as u32 => Sampler::Sobol,
                _ => return Err(invalid("unknown sampler")),
            },
            antithetic,
            ..McConfig::default()
        };
        let result = price_mc(&h.mc_spec, &cfg)?;
        *out = result.price;
        if let Some(se) = out_std_error.as_mut() {
            *se = result.std_error.unwrap_or(0.0);
        }
        Ok(())
    })
}

/// Message of the last failed call on this thread, empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn bx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
