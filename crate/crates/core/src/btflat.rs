//! The `B^t`-flat equations (critical points of `∫|W|² + t∫s²`) as a
//! first-order flow in `(F, F′, F″, F‴, C, C′, s)` with `K = CFs′` carried
//! as a constant.

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Jet4;
use crate::ode::{integrate, integrate_fixed, linspace, OdeOptions, OdeSolution};
use crate::operators::{b_op, l_compose};
use crate::profiles::{canonical_poly, ConformalModel};
use crate::scalar::Coef;

/// A point of phase space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BtState {
    pub z: f64,
    pub f: f64,
    pub f1d: f64,
    pub f2d: f64,
    pub f3d: f64,
    pub c: f64,
    pub c1d: f64,
    pub s: f64,
    /// `C·F·s′`, constant along solutions.
    pub k: f64,
}

impl BtState {
    pub const FIELDS: [&'static str; 9] = ["z", "F", "F1d", "F2d", "F3d", "C", "C1d", "s", "K"];

    pub fn values(&self) -> [f64; 9] {
        [self.z, self.f, self.f1d, self.f2d, self.f3d, self.c, self.c1d, self.s, self.k]
    }

    pub fn from_values(v: [f64; 9]) -> Self {
        BtState { z: v[0], f: v[1], f1d: v[2], f2d: v[3], f3d: v[4], c: v[5], c1d: v[6], s: v[7], k: v[8] }
    }

    /// State of an actual metric at `z`, from jets of `F` and `C`.
    pub fn from_jets(z: f64, f: &Jet4<f64>, c: &Jet4<f64>) -> Self {
        let s = crate::curvature::scalar_jet(f, c);
        BtState {
            z,
            f: f.value(),
            f1d: f.d(1),
            f2d: f.d(2),
            f3d: f.d(3),
            c: c.value(),
            c1d: c.d(1),
            s: s.value(),
            k: c.value() * f.value() * s.d(1),
        }
    }

    fn y(&self) -> [f64; 7] {
        [self.f, self.f1d, self.f2d, self.f3d, self.c, self.c1d, self.s]
    }

    fn with_y(z: f64, y: &[f64; 7], k: f64) -> Self {
        BtState { z, f: y[0], f1d: y[1], f2d: y[2], f3d: y[3], c: y[4], c1d: y[5], s: y[6], k }
    }

    fn check(&self) -> Result<()> {
        if self.c.is_nan() || self.c <= 0.0 || !self.c.is_finite() {
            return Err(Error::SingularConformal { z: self.z, value: self.c });
        }
        if self.f == 0.0 || !self.f.is_finite() {
            return Err(Error::SingularProfile { z: self.z });
        }
        Ok(())
    }

    fn jets(&self, f4d: f64, c2d: f64) -> (Jet4<f64>, Jet4<f64>, Jet4<f64>) {
        let f = Jet4::new([self.f, self.f1d, self.f2d, self.f3d, f4d]);
        let c = Jet4::with_order([self.c, self.c1d, c2d, 0.0, 0.0], 2);
        let cf = c * f;
        let s1 = self.k / cf.value();
        let s2 = -self.k * cf.d(1) / (cf.value() * cf.value());
        let s = Jet4::with_order([self.s, s1, s2, 0.0, 0.0], 2);
        (f, c, s)
    }
}

/// The four quantities of the system, as jets.
#[derive(Clone, Copy, Debug)]
pub struct BtJets<T> {
    pub e0: Jet4<T>,
    pub f1res: Jet4<T>,
    pub f2res: Jet4<T>,
    pub tval: Jet4<T>,
}

/// `e0 = (CFs′)′`, the two field equations and the first integral `T`,
/// evaluated on arbitrary jets of `F`, `C` and `s`.
pub fn bt_operators<T: Float>(f: &Jet4<T>, c: &Jet4<T>, s: &Jet4<T>, t: T) -> BtJets<T> {
    let k = |v: f64| T::from(v).unwrap();
    let h = c.powf(k(0.5));
    let g = c.powf(k(-0.5));
    let c32 = c.powf(k(1.5));
    let (f1, c1, s1) = (f.derive(), c.derive(), s.derive());

    let f1res = (*f * h.derive()).derive().scale(k(24.0))
        + (h * (f1.derive() + f.scale(k(0.5))).add_scalar(k(-2.0))).scale(k(4.0))
        + *s * c32;

    let g2 = g.derive().derive();
    let f2res = l_compose(f).add_scalar(-T::one()).scale(k(8.0 / 3.0))
        + (*s * c32 * (g2 - g.scale(k(0.25)))).scale(t)
        + (*c / *f * f1 * s1).scale(t * k(0.5))
        + (c1 * s1).scale(t);

    let bracket = *c * *c * (f.scale(k(4.0)) + *c * *s).add_scalar(k(-16.0))
        + (*f * c1 * c1).scale(k(12.0))
        + (*c * c1 * f1).scale(k(8.0));
    let tval = b_op(f).scale(k(16.0))
        - (*f * c1 * s1).scale(k(18.0) * t)
        - (*c * f1 * s1).scale(k(6.0) * t)
        - (*s / *c * bracket).scale(k(0.75) * t);

    let e0 = (*c * *f * s1).derive();
    BtJets { e0, f1res, f2res, tval }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BtResiduals {
    pub e0: f64,
    pub f1res: f64,
    pub f2res: f64,
    pub tval: f64,
}

/// Residuals at a state, given the two highest derivatives `F⁗` and `C″`.
pub fn bt_residuals(state: &BtState, t: f64, f4d: f64, c2d: f64) -> Result<BtResiduals> {
    state.check()?;
    let (f, c, s) = state.jets(f4d, c2d);
    let j = bt_operators(&f, &c, &s, t);
    Ok(BtResiduals { e0: j.e0.value(), f1res: j.f1res.value(), f2res: j.f2res.value(), tval: j.tval.value() })
}

/// The highest derivatives `(F⁗, C″)` forced by the equations.
pub fn bt_solve(state: &BtState, t: f64) -> Result<(f64, f64)> {
    state.check()?;
    let coef_c = 12.0 * state.f / state.c.sqrt();
    if coef_c.abs() < 1e-12 {
        return Err(Error::SingularSystem { what: "C″ from the first field equation", coefficient: coef_c });
    }
    let c2d = -bt_residuals(state, t, 0.0, 0.0)?.f1res / coef_c;
    let coef_f = 2.0 / 3.0;
    let f4d = -bt_residuals(state, t, 0.0, c2d)?.f2res / coef_f;
    Ok((f4d, c2d))
}

/// Derivative of the state along the flow, in the order
/// `(F′, F″, F‴, F⁗, C′, C″, s′, K′ = 0)`.
pub fn bt_rhs(state: &BtState, t: f64) -> Result<[f64; 8]> {
    let (f4d, c2d) = bt_solve(state, t)?;
    Ok([
        state.f1d,
        state.f2d,
        state.f3d,
        f4d,
        state.c1d,
        c2d,
        state.k / (state.c * state.f),
        0.0,
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BtSample {
    pub state: BtState,
    pub f4d: f64,
    pub c2d: f64,
    pub residuals: BtResiduals,
}

#[derive(Clone, Debug, Serialize)]
pub struct BtTrajectory {
    pub t: f64,
    pub samples: Vec<BtSample>,
    /// `max |T − T(start)|`.
    pub t_drift: f64,
    /// `max |K − K(start)|`; zero because `K` is carried.
    pub k_drift: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub truncated: Option<String>,
}

impl BtTrajectory {
    /// `max |L⁺L⁻F − 1|` along the samples, using the carried `F⁗`.
    pub fn conformal_extremality_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|p| {
                let st = &p.state;
                (0.25 * p.f4d - 1.25 * st.f2d + st.f - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn flow(t: f64, k: f64) -> impl FnMut(f64, &[f64; 7]) -> Result<[f64; 7]> {
    move |z, y| {
        let d = bt_rhs(&BtState::with_y(z, y, k), t)?;
        Ok([d[0], d[1], d[2], d[3], d[4], d[5], d[6]])
    }
}

fn trajectory(init: &BtState, t: f64, sol: OdeSolution<7>) -> BtTrajectory {
    let mut samples = Vec::with_capacity(sol.z.len());
    let mut truncated = sol.truncated;
    for (z, y) in sol.z.iter().zip(&sol.y) {
        let state = BtState::with_y(*z, y, init.k);
        match bt_solve(&state, t).and_then(|(f4d, c2d)| Ok((f4d, c2d, bt_residuals(&state, t, f4d, c2d)?))) {
            Ok((f4d, c2d, residuals)) => samples.push(BtSample { state, f4d, c2d, residuals }),
            Err(e) => {
                truncated.get_or_insert_with(|| e.to_string());
                break;
            }
        }
    }
    let t0 = samples.first().map_or(0.0, |s| s.residuals.tval);
    let t_drift = samples.iter().map(|s| (s.residuals.tval - t0).abs()).fold(0.0, f64::max);
    BtTrajectory { t, samples, t_drift, k_drift: 0.0, accepted: sol.accepted, rejected: sol.rejected, truncated }
}

/// Adaptive integration reporting samples on the given monotone grid,
/// which must start at `init.z`.
pub fn bt_integrate_grid(init: &BtState, t: f64, grid: &[f64], tol: f64) -> Result<BtTrajectory> {
    init.check()?;
    if grid.first() != Some(&init.z) {
        return Err(Error::BadParameter { name: "span".into(), reason: "must start at the state's z".into() });
    }
    let sol = integrate(flow(t, init.k), init.y(), grid, OdeOptions::with_tol(tol));
    Ok(trajectory(init, t, sol))
}

/// Adaptive integration over `span`, sampled every 0.01 or finer.
pub fn bt_integrate(init: &BtState, t: f64, span: (f64, f64), tol: f64) -> Result<BtTrajectory> {
    let n = (((span.1 - span.0).abs() / 0.01).ceil() as usize).max(8);
    if span.0 != init.z {
        return Err(Error::BadParameter { name: "span".into(), reason: "must start at the state's z".into() });
    }
    bt_integrate_grid(init, t, &linspace(span.0, span.1, n), tol)
}

/// Fixed-step integration with `n` steps (used for convergence studies).
pub fn bt_integrate_fixed(init: &BtState, t: f64, end: f64, n: usize) -> Result<BtTrajectory> {
    init.check()?;
    let sol = integrate_fixed(flow(t, init.k), init.y(), init.z, end, n);
    Ok(trajectory(init, t, sol))
}

/// A constant-scalar-curvature state (`K = 0`) on the constraint `T = 0`,
/// obtained by solving for `F‴`; when `F′ = 0` the quadratic dependence
/// on `F″` is used instead.
#[allow(clippy::too_many_arguments)]
pub fn bt_csc_seed(f: f64, f1d: f64, f2d: f64, c: f64, c1d: f64, s: f64, t: f64, z0: f64) -> Result<BtState> {
    let base = BtState { z: z0, f, f1d, f2d, f3d: 0.0, c, c1d, s, k: 0.0 };
    base.check()?;
    let tval = |st: &BtState| -> Result<f64> {
        let (f4d, c2d) = bt_solve(st, t)?;
        Ok(bt_residuals(st, t, f4d, c2d)?.tval)
    };
    let coef = 8.0 * f1d;
    if coef.abs() >= 1e-12 {
        let f3d = -tval(&base)? / coef;
        return Ok(BtState { f3d, ..base });
    }
    // T = a·F″² + b·F″ + c0 when F′ = 0.
    let at = |x: f64| tval(&BtState { f2d: x, ..base });
    let (m, z, p) = (at(f2d - 1.0)?, at(f2d)?, at(f2d + 1.0)?);
    let a = 0.5 * (p + m) - z;
    let b = 0.5 * (p - m);
    let roots: Vec<f64> = if a.abs() < 1e-12 {
        if b.abs() < 1e-12 {
            if z.abs() < 1e-12 {
                vec![0.0]
            } else {
                vec![]
            }
        } else {
            vec![-z / b]
        }
    } else {
        let disc = b * b - 4.0 * a * z;
        if disc < 0.0 {
            vec![]
        } else {
            vec![(-b + disc.sqrt()) / (2.0 * a), (-b - disc.sqrt()) / (2.0 * a)]
        }
    };
    let shift = roots
        .into_iter()
        .min_by(|x, y| x.abs().total_cmp(&y.abs()))
        .ok_or(Error::SingularSystem { what: "F‴ or F″ from T = 0", coefficient: coef })?;
    Ok(BtState { f2d: f2d + shift, ..base })
}

/// How seeds are drawn in [`bt_search`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SeedKind {
    /// Random constant-scalar-curvature data with `s ≠ 0`.
    Random,
    /// Random Einstein data.
    Einstein,
    /// Random data with `s = 0`.
    ZeroScalar,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub trajectory: BtTrajectory,
    pub residual: f64,
    pub seed_state: BtState,
    pub trials_ok: usize,
    pub trials: usize,
}

fn draw_nonzero(rng: &mut ChaCha8Rng, lo: f64, hi: f64, floor: f64) -> f64 {
    loop {
        let v = rng.gen_range(lo..hi);
        if v.abs() >= floor {
            return v;
        }
    }
}

fn draw_seed(rng: &mut ChaCha8Rng, kind: SeedKind, t: f64) -> Result<BtState> {
    match kind {
        SeedKind::Einstein => loop {
            // Homothety fixes C(0) = 1, i.e. C5 + C6 = ±1.
            let c5 = rng.gen_range(-2.0..2.0);
            let c6 = rng.gen_range(-2.0..2.0);
            let norm = c5 + c6;
            if norm.abs() < 0.3 {
                continue;
            }
            let (c5, c6) = (c5 / norm.abs(), c6 / norm.abs());
            let (c2, c3) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let s = -24.0 * (c2 * c5 * c5 - 2.0 * c5 * c6 + c3 * c6 * c6);
            if c5.abs().min(c6.abs()) < 0.05 || c5.abs().max(c6.abs()) > 3.0 || s.abs() > 5.0 {
                continue;
            }
            let f = canonical_poly(&[c2 * c6 / c5, c2, c3, c3 * c5 / c6].map(Coef::real));
            let model = ConformalModel::einstein(Coef::real(c5), Coef::real(c6));
            let fj = f.jet(0.0);
            let Some(cj) = model.jet(0.0) else { continue };
            if fj.value().abs() < 0.05 {
                continue;
            }
            let mut st = BtState::from_jets(0.0, &fj, &cj);
            st.s = s;
            st.k = 0.0;
            return Ok(st);
        },
        SeedKind::Random | SeedKind::ZeroScalar => {
            let f = draw_nonzero(rng, -2.0, 2.0, 0.05);
            let f1 = draw_nonzero(rng, -2.0, 2.0, 0.05);
            let f2 = rng.gen_range(-2.0..2.0);
            let c = rng.gen_range(0.2..3.0);
            let c1 = rng.gen_range(-2.0..2.0);
            let s = if kind == SeedKind::Random { draw_nonzero(rng, -1.0, 1.0, 0.05) } else { 0.0 };
            bt_csc_seed(f, f1, f2, c, c1, s, t, 0.0)
        }
    }
}

/// Integrates `trials` random seeds over `[0, span]` and returns the
/// conserving trajectory with the largest conformal-extremality residual.
/// Trajectories along which `|F| < 0.1` or `C ∉ [0.01, 10]` are discarded.
pub fn bt_search(t: f64, trials: usize, span: f64, seed: u64, kind: SeedKind) -> Result<SearchResult> {
    if t == 0.0 && kind == SeedKind::Random {
        return Err(Error::BadParameter { name: "t".into(), reason: "must be nonzero".into() });
    }
    if trials == 0 {
        return Err(Error::BadParameter { name: "trials".into(), reason: "must be at least 1".into() });
    }
    let runs: Vec<Option<(BtState, BtTrajectory)>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let init = draw_seed(&mut rng, kind, t).ok()?;
            let traj = bt_integrate(&init, t, (0.0, span), 1e-12).ok()?;
            let bounded = traj.samples.iter().all(|p| p.state.f.abs() >= 0.1 && (0.01..=10.0).contains(&p.state.c));
            let ok = bounded
                && traj.truncated.is_none()
                && traj.t_drift < 1e-7 * (1.0 + traj.samples[0].residuals.tval.abs());
            ok.then_some((init, traj))
        })
        .collect();
    let trials_ok = runs.iter().flatten().count();
    let best = runs
        .into_iter()
        .flatten()
        .map(|(init, traj)| (traj.conformal_extremality_residual(), init, traj))
        .max_by(|a, b| a.0.total_cmp(&b.0));
    match best {
        Some((residual, seed_state, trajectory)) => {
            Ok(SearchResult { trajectory, residual, seed_state, trials_ok, trials })
        }
        None => Err(Error::SearchFailed(format!("all {trials} trials hit a singularity or lost conservation"))),
    }
}

/// Search for a constant-scalar-curvature `B^t`-flat solution that is not
/// conformal to an extremal metric.
pub fn bt_nonextremal_search(t: f64, trials: usize, span: f64, seed: u64) -> Result<SearchResult> {
    bt_search(t, trials, span, seed, SeedKind::Random)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{Domain, MetricSpec, Profile};

    fn taub_bolt() -> MetricSpec {
        MetricSpec::new(
            "taub-bolt",
            Profile::canonical(Coef::ratio(-1, 4), Coef::ratio(1, 4), Coef::ratio(-9, 4), Coef::ratio(9, 4)),
            ConformalModel::einstein(Coef::ratio(1, 4), Coef::ratio(-1, 4)),
            Domain::new(-(3f64.ln()), 0.0, true, false),
            None,
        )
        .unwrap()
    }

    fn state_of(m: &MetricSpec, z: f64) -> BtState {
        let (f, c) = m.jets_at(z).unwrap();
        BtState::from_jets(z, &f, &c)
    }

    #[test]
    fn flat_state_is_a_solution() {
        let st = BtState { z: 0.0, f: 1.0, f1d: 0.0, f2d: 0.0, f3d: 0.0, c: 1.0, c1d: -1.0, s: 0.0, k: 0.0 };
        for t in [0.0, 1.0, 7.5] {
            let r = bt_residuals(&st, t, 0.0, 1.0).unwrap();
            assert!(r.e0.abs() + r.f1res.abs() + r.f2res.abs() + r.tval.abs() < 1e-14);
            let d = bt_rhs(&st, t).unwrap();
            assert!((d[5] - 1.0).abs() < 1e-14 && d[3].abs() < 1e-14);
        }
    }

    #[test]
    fn taub_bolt_satisfies_the_system() {
        let m = taub_bolt();
        let st = state_of(&m, -0.5);
        assert!(st.s.abs() < 1e-12 && st.k.abs() < 1e-12);
        let (f, c) = m.jets_at(-0.5).unwrap();
        let r = bt_residuals(&st, 1.0, f.d(4), c.d(2)).unwrap();
        assert!(r.f1res.abs() < 1e-12 && r.f2res.abs() < 1e-12 && r.tval.abs() < 1e-12);
    }

    #[test]
    fn identity_for_dt() {
        // dT/dz equals a combination of the field equations on arbitrary jets.
        let fp = canonical_poly(&[1, -2, 3, 1].map(|v| Coef::ratio(v, 3)))
            + crate::ExpPoly::monomial(crate::Exponent::int(3), Coef::ratio(1, 5));
        let cp = ConformalModel::Ratio {
            num: crate::ExpPoly::monomial(crate::Exponent::int(1), Coef::int(2)),
            den: crate::ExpPoly::from_terms([
                (crate::Exponent::ZERO, Coef::int(3)),
                (crate::Exponent::int(2), Coef::int(1)),
            ]),
        };
        let sp = crate::ExpPoly::from_terms([
            (crate::Exponent::ZERO, Coef::ratio(1, 2)),
            (crate::Exponent::int(-1), Coef::ratio(2, 7)),
        ]);
        for z in [-0.4, 0.1, 0.6] {
            for t in [0.5, 2.0] {
                let (f, c, s) = (fp.jet(z), cp.jet(z).unwrap(), sp.jet(z));
                let j = bt_operators(&f, &c, &s, t);
                let lhs = j.tval.d(1);
                let logc3f = (c.powi(3) * f).d(1) / (c.powi(3) * f).value();
                let rhs = -3.0 * t / (2.0 * c.value().sqrt()) * (s * c).d(1) * j.f1res.value()
                    + 12.0 * f.d(1) * j.f2res.value()
                    - 6.0 * t * logc3f * j.e0.value();
                assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn csc_seed_satisfies_constraint() {
        let st = bt_csc_seed(1.3, 0.4, -0.2, 1.0, -0.9, 0.7, 1.0, 0.0).unwrap();
        let (f4, c2) = bt_solve(&st, 1.0).unwrap();
        assert!(bt_residuals(&st, 1.0, f4, c2).unwrap().tval.abs() < 1e-12);
        let flat = bt_csc_seed(1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 3.0, 0.0).unwrap();
        assert_eq!(flat.f3d, 0.0);
        assert_eq!(flat.f2d, 0.0);
    }

    #[test]
    fn taub_bolt_flow_reproduces_profile() {
        let m = taub_bolt();
        let init = state_of(&m, -0.8);
        let traj = bt_integrate(&init, 1.0, (-0.8, -0.1), 1e-10).unwrap();
        assert!(traj.truncated.is_none());
        let err = traj
            .samples
            .iter()
            .map(|p| (p.state.f - m.f_poly().eval(p.state.z).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        assert!(traj.t_drift < 1e-8);
    }
}
