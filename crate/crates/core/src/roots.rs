//! Safeguarded Newton iteration on a sign-change bracket.

use crate::error::{Error, Result};

/// Finds a root of `f` in `[a, b]` given `f(x) -> (value, derivative)`.
/// Newton steps that would leave the bracket are replaced by bisection.
/// Stops once `|f| < ftol` or the bracket collapses.
pub fn newton_bisect(f: impl Fn(f64) -> (f64, f64), a: f64, b: f64, ftol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let (flo, fhi) = (f(lo).0, f(hi).0);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::Bracket { a, b });
    }
    let lo_sign = flo.signum();
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx.abs() < ftol {
            return Ok(x);
        }
        if fx.signum() == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            return Ok(x);
        }
        let newton = x - fx / dfx;
        x = if dfx != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Ok(x)
}
