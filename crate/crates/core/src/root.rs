//! Bracketed bisection shared by the tail, top-knot and shrinkage solvers.

use crate::error::{Error, Result};

pub(crate) const MAX_ITERATIONS: usize = 200;
pub(crate) const PARAM_REL_TOL: f64 = 1e-9;

/// Bisects `f` on `[lo, hi]`, where `f(lo)` and `f(hi)` straddle zero.
/// Stops once the bracket is narrower than `rel_tol · |midpoint|`.
/// Returns the final bracket so callers can pick the side they need.
pub(crate) fn bisect<F>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    bisect_until(f, lo, hi, |a, b| (b - a).abs() <= rel_tol * (0.5 * (a + b)).abs().max(f64::MIN_POSITIVE))
}

/// As [`bisect`], stopping when `done(lo, hi)` holds.
pub(crate) fn bisect_until<F, D>(f: F, mut lo: f64, mut hi: f64, done: D) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
    D: Fn(f64, f64) -> bool,
{
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok((lo, lo));
    }
    if f_hi == 0.0 {
        return Ok((hi, hi));
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::RootNotFound(format!(
            "[{lo}, {hi}] does not bracket a root ({f_lo}, {f_hi})"
        )));
    }
    let lo_negative = f_lo < 0.0;
    for _ in 0..MAX_ITERATIONS {
        if done(lo, hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok((mid, mid));
        }
        if (f_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Doubles `x` (multiplicatively, by `factor`) until `pred(x)` holds.
pub(crate) fn expand<P>(mut x: f64, factor: f64, pred: P) -> Result<f64>
where
    P: Fn(f64) -> bool,
{
    for _ in 0..MAX_ITERATIONS {
        if pred(x) {
            return Ok(x);
        }
        x *= factor;
        if !x.is_finite() || x == 0.0 {
            break;
        }
    }
    Err(Error::RootNotFound("bracket expansion did not terminate".into()))
}
