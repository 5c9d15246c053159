//! Dormand–Prince 5(4) integration of `y′ = f(z, y)`.

use crate::error::Result;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest step magnitude before the integration is abandoned.
    pub h_min: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions { rtol: tol, atol: tol, h_min: 1e-12, max_steps: 200_000 }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self::with_tol(1e-10)
    }
}

/// Values on the requested grid; shorter than the grid when truncated.
#[derive(Clone, Debug)]
pub struct OdeSolution<const N: usize> {
    pub z: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub accepted: usize,
    pub rejected: usize,
    /// Reason the integration stopped early, if it did.
    pub truncated: Option<String>,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[[f64; N]; 7], w: &[f64]) -> [f64; N] {
    let mut out = *y;
    for (j, wj) in w.iter().enumerate() {
        if *wj != 0.0 {
            for i in 0..N {
                out[i] += h * wj * k[j][i];
            }
        }
    }
    out
}

/// One Dormand–Prince step; returns the fifth-order update and the
/// embedded error estimate.
fn step<const N: usize, F>(f: &mut F, z: f64, y: &[f64; N], h: f64) -> Result<([f64; N], [f64; N])>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut k = [[0.0; N]; 7];
    k[0] = f(z, y)?;
    for s in 1..7 {
        let ys = axpy(y, h, &k, &A[s][..s]);
        k[s] = f(z + C[s] * h, &ys)?;
    }
    let y5 = axpy(y, h, &k, &B5);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (0..7).map(|j| (B5[j] - B4[j]) * k[j][i]).sum::<f64>();
    }
    Ok((y5, err))
}

/// Adaptive integration reporting the solution at each point of `grid`
/// (monotone, starting at the initial point).
pub fn integrate<const N: usize, F>(mut f: F, y0: [f64; N], grid: &[f64], opts: OdeOptions) -> OdeSolution<N>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut sol = OdeSolution { z: vec![grid[0]], y: vec![y0], accepted: 0, rejected: 0, truncated: None };
    let mut y = y0;
    let mut h = grid.get(1).map_or(0.0, |g| (g - grid[0]) * 0.1);
    let mut steps = 0usize;
    for pair in grid.windows(2) {
        let (mut z, target) = (pair[0], pair[1]);
        let dir = (target - z).signum();
        while (target - z) * dir > 0.0 {
            steps += 1;
            if steps > opts.max_steps {
                sol.truncated = Some(format!("step budget exhausted at z = {z}"));
                return sol;
            }
            let last = (target - z).abs() <= h.abs();
            let hh = if last { target - z } else { h };
            match step(&mut f, z, &y, hh) {
                Ok((ynew, err)) if ynew.iter().all(|v| v.is_finite()) => {
                    let norm = (0..N)
                        .map(|i| {
                            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
                            (err[i] / sc).powi(2)
                        })
                        .sum::<f64>()
                        / N as f64;
                    let norm = norm.sqrt();
                    let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                    if norm <= 1.0 {
                        sol.accepted += 1;
                        z = if last { target } else { z + hh };
                        y = ynew;
                        if !last {
                            h = hh * factor;
                        }
                    } else {
                        sol.rejected += 1;
                        h = hh * factor;
                    }
                }
                Ok(_) => {
                    sol.rejected += 1;
                    h = hh * 0.2;
                }
                Err(e) => {
                    sol.rejected += 1;
                    h = hh * 0.2;
                    if h.abs() < opts.h_min {
                        sol.truncated = Some(format!("{e} near z = {z}"));
                        return sol;
                    }
                }
            }
            if h.abs() < opts.h_min {
                sol.truncated = Some(format!("step size underflow at z = {z}"));
                return sol;
            }
        }
        sol.z.push(target);
        sol.y.push(y);
    }
    sol
}

/// Fixed-step fifth-order integration over `n` equal steps.
pub fn integrate_fixed<const N: usize, F>(mut f: F, y0: [f64; N], z0: f64, z1: f64, n: usize) -> OdeSolution<N>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let h = (z1 - z0) / n as f64;
    let mut sol = OdeSolution { z: vec![z0], y: vec![y0], accepted: 0, rejected: 0, truncated: None };
    let mut y = y0;
    for i in 0..n {
        let z = z0 + i as f64 * h;
        match step(&mut f, z, &y, h) {
            Ok((ynew, _)) if ynew.iter().all(|v| v.is_finite()) => y = ynew,
            Ok(_) => {
                sol.truncated = Some(format!("non-finite state at z = {z}"));
                return sol;
            }
            Err(e) => {
                sol.truncated = Some(format!("{e} near z = {z}"));
                return sol;
            }
        }
        sol.accepted += 1;
        sol.z.push(z0 + (i + 1) as f64 * h);
        sol.y.push(y);
    }
    sol
}

/// `n + 1` equally spaced points from `a` to `b`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}
