//! One-dimensional quadrature.

use crate::error::{Error, Result};

/// Adaptive Simpson rule with absolute tolerance and a cap on the
/// bisection depth.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64> {
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Integrand(format!("non-finite value {v} at z = {x}")))
        }
    };
    let (fa, fm, fb) = (eval(a)?, eval(0.5 * (a + b))?, eval(b)?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&eval, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?)
}

const GL_X: [f64; 7] = [
    0.0,
    0.405_845_151_377_397_2,
    -0.405_845_151_377_397_2,
    0.741_531_185_599_394_4,
    -0.741_531_185_599_394_4,
    0.949_107_912_342_758_5,
    -0.949_107_912_342_758_5,
];
const GL_W: [f64; 7] = [
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
    0.129_484_966_168_869_7,
];

fn gauss7(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    h * GL_X.iter().zip(GL_W).map(|(x, w)| w * f(c + h * x)).sum::<f64>()
}

/// Adaptive seven-point Gauss–Legendre rule. It never evaluates the
/// endpoints, so integrable endpoint singularities are tolerated.
pub fn adaptive_gauss(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = gauss7(&f, a, b);
    let floor = 16.0 * f64::EPSILON * whole.abs();
    let v = gauss_step(&f, a, b, whole, tol, floor, 48);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Integrand(format!("non-finite integral on [{a}, {b}]")))
    }
}

/// `floor` is a roundoff bound from the whole-interval estimate; it is not
/// halved, so tiny tolerances cannot split forever.
fn gauss_step(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, floor: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (l, r) = (gauss7(f, a, m), gauss7(f, m, b));
    if depth == 0 || (l + r - whole).abs() <= tol.max(floor) || !(l + r).is_finite() {
        return l + r;
    }
    gauss_step(f, a, m, l, tol / 2.0, floor, depth - 1) + gauss_step(f, m, b, r, tol / 2.0, floor, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_exponential() {
        let v = adaptive_simpson(|x| (-x).exp(), 0.0, 3.0, 1e-12, 40).unwrap();
        assert!((v - (1.0 - (-3f64).exp())).abs() < 1e-11);
    }

    #[test]
    fn simpson_reports_non_finite() {
        assert!(adaptive_simpson(|x| 1.0 / x, 0.0, 1.0, 1e-10, 40).is_err());
    }

    #[test]
    fn gauss_handles_inverse_sqrt() {
        let v = adaptive_gauss(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-6);
    }
}
