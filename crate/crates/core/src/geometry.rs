//! Global structure: bolts, the behaviour of the two ends, radial
//! distance, the ambiKähler transform and transcription of metrics given
//! as `A dr² + B(η¹)² + C((η²)² + (η³)²)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::classify::{fit_exp_family, ExpFit};
use crate::curvature::weyl;
use crate::error::{Error, Result};
use crate::exppoly::Exponent;
use crate::profiles::{ConformalModel, Domain, MetricSpec, Profile, StructureTag};
use crate::quadrature::adaptive_gauss;
use crate::roots::newton_bisect;
use crate::scalar::{Coef, Scalar};
use crate::Poly;

const ZERO_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bolt {
    pub z0: f64,
    /// `F′(z0)`.
    pub k: f64,
    /// `|k|` is a nonzero integer (within 1e-9).
    pub smooth_quotient: bool,
    /// `F` and `F′` both vanish: a double zero, not a bolt.
    pub degenerate: bool,
}

fn f_scale(f: &Poly) -> f64 {
    1.0 + f.max_abs_coeff()
}

fn bolt_at(f: &Poly, z0: f64) -> Bolt {
    let j = f.jet(z0);
    let sc = f_scale(f) * (1.0 + z0.abs()).exp().min(1e12);
    let k = j.d(1);
    let degenerate = k.abs() < ZERO_TOL * sc;
    let smooth_quotient = !degenerate && (k.abs() - k.abs().round()).abs() < 1e-9 && k.abs().round() >= 1.0;
    Bolt { z0, k, smooth_quotient, degenerate }
}

fn refine(f: &Poly, z: f64) -> f64 {
    let mut x = z;
    for _ in 0..20 {
        let j = f.jet(x);
        if j.value() == 0.0 || j.d(1) == 0.0 {
            break;
        }
        let step = j.value() / j.d(1);
        if step.abs() > 1e-6 {
            break;
        }
        x -= step;
    }
    x
}

/// Zeros of `F` on the closure of the domain (infinite ends cut 8 units
/// out), with their slopes.
pub fn find_bolts(m: &MetricSpec) -> Vec<Bolt> {
    let f = m.f_poly();
    let d = m.domain();
    let (a, b) = d.window(8.0);
    let n = 4000;
    let zs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let vals: Vec<f64> = zs.iter().map(|&z| f.eval(z).unwrap_or(f64::NAN)).collect();
    let sc = f_scale(f);
    let mut out: Vec<Bolt> = Vec::new();
    let mut push = |b: Bolt| {
        if !out.iter().any(|o| (o.z0 - b.z0).abs() < 1e-7) {
            out.push(b);
        }
    };
    for (i, &z) in zs.iter().enumerate() {
        let at_end = (i == 0 && d.lo.is_finite()) || (i == n && d.hi.is_finite());
        if at_end && vals[i].abs() < ZERO_TOL * sc {
            push(bolt_at(f, refine(f, z)));
        }
    }
    for i in 0..n {
        let (v0, v1) = (vals[i], vals[i + 1]);
        if v0 != 0.0 && v1 != 0.0 && v0.signum() != v1.signum() && v0.is_finite() && v1.is_finite() {
            let jet = |z: f64| {
                let j = f.jet(z);
                (j.value(), j.d(1))
            };
            if let Ok(z0) = newton_bisect(jet, zs[i], zs[i + 1], 1e-13) {
                push(bolt_at(f, z0));
            }
        }
    }
    // Double zeros: |F| has a tiny local minimum without a sign change.
    for i in 1..n {
        let (l, c, r) = (vals[i - 1].abs(), vals[i].abs(), vals[i + 1].abs());
        if c <= l && c <= r && c < 1e-4 * sc && vals[i - 1].signum() == vals[i + 1].signum() {
            let df = |z: f64| {
                let j = f.jet(z);
                (j.d(1), j.d(2))
            };
            if let Ok(z0) = newton_bisect(df, zs[i - 1], zs[i + 1], 1e-14) {
                if f.eval(z0).is_ok_and(|v| v.abs() < ZERO_TOL * sc) {
                    push(bolt_at(f, z0));
                }
            }
        }
    }
    out.sort_by(|x, y| x.z0.total_cmp(&y.z0));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndKind {
    Nut,
    Bolt,
    Ale,
    Alf,
    Cusp,
    AsymptoticallyEinstein,
    CurvatureSingularity,
    Conical,
    Undetermined,
}

impl EndKind {
    pub fn name(self) -> &'static str {
        match self {
            EndKind::Nut => "nut",
            EndKind::Bolt => "bolt",
            EndKind::Ale => "ALE",
            EndKind::Alf => "ALF",
            EndKind::Cusp => "cusp",
            EndKind::AsymptoticallyEinstein => "asymptotically_einstein",
            EndKind::CurvatureSingularity => "curvature_singularity",
            EndKind::Conical => "conical",
            EndKind::Undetermined => "undetermined",
        }
    }
}

/// Leading behaviour of `F` and `C` at one end.
///
/// At a finite endpoint `e` the exponents are vanishing orders:
/// `F ~ (z − e)^f` and `C ~ (z − e)^c`. At an infinite end they are growth
/// rates: `F ~ e^{f|z|}` and `C ~ e^{c|z|}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EndOrders {
    pub endpoint: f64,
    pub f: f64,
    pub c: f64,
    /// Limit of `F` when it tends to a nonzero constant.
    pub f_limit: Option<f64>,
}

impl EndOrders {
    pub fn finite(&self) -> bool {
        self.endpoint.is_finite()
    }

    /// Whether `∫½√(C/F)dz` converges toward this end.
    pub fn finite_distance(&self) -> bool {
        if self.finite() {
            self.f - self.c < 2.0
        } else {
            self.c - self.f < 0.0
        }
    }
}

fn vanishing_order(derivs: &[f64], scale: f64) -> f64 {
    derivs.iter().position(|d| d.abs() > ZERO_TOL * scale).map_or(derivs.len() as f64, |n| n as f64)
}

/// Exponent of the dominant term of `p` toward the end, with its coefficient.
fn leading(p: &Poly, side: Side) -> Option<(Exponent, f64)> {
    let sc = p.max_abs_coeff();
    let mut terms: Vec<(Exponent, f64)> =
        p.terms().filter(|(_, c)| !c.is_negligible(1e-12, sc)).map(|(k, c)| (k, c.to_f64())).collect();
    if side == Side::Lower {
        terms.reverse();
    }
    terms.last().copied()
}

fn growth(k: Exponent, side: Side) -> f64 {
    match side {
        Side::Upper => k.to_f64(),
        Side::Lower => -k.to_f64(),
    }
}

pub fn end_orders(m: &MetricSpec, side: Side) -> EndOrders {
    let d = m.domain();
    let e = if side == Side::Lower { d.lo } else { d.hi };
    let f = m.f_poly();
    if e.is_finite() {
        let j = f.jet(e);
        let fo = vanishing_order(&j.derivs()[..4], f_scale(f));
        let co = match m.conformal() {
            ConformalModel::Exp { .. } => 0.0,
            ConformalModel::Einstein { c5, c6 } => {
                let dj = ConformalModel::einstein_denominator(c5, c6).jet(e);
                let sc = c5.to_f64().abs().max(c6.to_f64().abs());
                -2.0 * vanishing_order(&dj.derivs()[..3], sc) + 0.0
            }
            ConformalModel::Ratio { num, den } => {
                let (nj, dj) = (num.jet(e), den.jet(e));
                vanishing_order(&nj.derivs(), f_scale(num)) - vanishing_order(&dj.derivs(), f_scale(den))
            }
        };
        let f_limit = (fo == 0.0).then(|| j.value());
        return EndOrders { endpoint: e, f: fo, c: co, f_limit };
    }
    let (fk, fc) = leading(f, side).unwrap_or((Exponent::ZERO, 0.0));
    let fg = growth(fk, side);
    let cg = match m.conformal() {
        ConformalModel::Exp { eps, .. } => growth(Exponent::int(*eps as i32), side),
        ConformalModel::Einstein { c5, c6 } => {
            let sc = c5.to_f64().abs().max(c6.to_f64().abs());
            let dominant_zero = match side {
                Side::Upper => c5.to_f64().abs() <= 1e-12 * sc,
                Side::Lower => c6.to_f64().abs() <= 1e-12 * sc,
            };
            if dominant_zero {
                1.0
            } else {
                -1.0
            }
        }
        ConformalModel::Ratio { num, den } => {
            let nk = leading(num, side).map_or(0.0, |(k, _)| growth(k, side));
            let dk = leading(den, side).map_or(0.0, |(k, _)| growth(k, side));
            nk - dk
        }
    };
    EndOrders { endpoint: e, f: fg, c: cg, f_limit: (fg == 0.0).then_some(fc) }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndReport {
    pub side: Side,
    pub kind: EndKind,
    pub complete: bool,
    /// Rounded `F′` at a bolt; its sign follows the orientation of `z`.
    pub self_intersection: Option<i64>,
    /// `|F′|` at a bolt or conical end.
    pub bolt_multiplicity: Option<f64>,
    pub cone_angle: Option<f64>,
    pub orders: EndOrders,
    pub finite_distance: bool,
    /// `|W⁺|² + |W⁻|²` grows without bound toward the end.
    pub curvature_blowup: bool,
    /// At ALE ends: `L±F − 1` decays toward the end.
    pub weyl_decay: Option<bool>,
    pub diagnostics: Vec<String>,
}

/// Points approaching the end, from the inside outward.
fn approach(m: &MetricSpec, side: Side) -> Vec<f64> {
    let d = m.domain();
    let dir = if side == Side::Upper { 1.0 } else { -1.0 };
    let e = if side == Side::Lower { d.lo } else { d.hi };
    if e.is_finite() {
        (1..=6).map(|j| e - dir * 10f64.powi(-j)).filter(|z| d.is_interior(*z)).collect()
    } else {
        let other = if side == Side::Lower { d.hi } else { d.lo };
        let base = if other.is_finite() { other - -dir } else { 0.0 };
        (1..=6).map(|j| base + dir * 2.0 * j as f64).filter(|z| d.is_interior(*z)).collect()
    }
}

fn weyl_profile(m: &MetricSpec, zs: &[f64]) -> Vec<f64> {
    zs.iter()
        .map(|&z| weyl(m, z).map_or(f64::NAN, |(_, _, p, q)| p + q))
        .collect()
}

pub fn classify_end(m: &MetricSpec, side: Side) -> EndReport {
    let o = end_orders(m, side);
    let mut diagnostics = Vec::new();
    let mut self_intersection = None;
    let mut bolt_multiplicity = None;
    let mut cone_angle = None;
    let kind = if o.finite() {
        diagnostics.push(format!("F ~ (z-e)^{}, C ~ (z-e)^{}", o.f, o.c));
        match (o.f as i64, o.c as i64) {
            (1, 0) => {
                let k = m.f_poly().jet(o.endpoint).d(1);
                bolt_multiplicity = Some(k.abs());
                let round = k.abs().round();
                if (k.abs() - round).abs() < 1e-9 && round >= 1.0 {
                    self_intersection = Some(k.round() as i64);
                    EndKind::Bolt
                } else {
                    cone_angle = Some(2.0 * PI * k.abs());
                    EndKind::Conical
                }
            }
            (2, 0) => EndKind::Cusp,
            (2, -2) => EndKind::Alf,
            _ => EndKind::Undetermined,
        }
    } else {
        diagnostics.push(format!("F ~ e^({}|z|), C ~ e^({}|z|)", o.f, o.c));
        let unit_limit = o.f_limit.is_some_and(|l| (l - 1.0).abs() < ZERO_TOL);
        if o.f == 0.0 && unit_limit && o.c == -1.0 {
            EndKind::Nut
        } else if o.f == 0.0 && unit_limit && o.c == 1.0 {
            EndKind::Ale
        } else if o.f > 0.0 && o.f == o.c {
            EndKind::AsymptoticallyEinstein
        } else if o.f >= o.c + 1.0 {
            EndKind::CurvatureSingularity
        } else {
            if o.f == 0.0 && !unit_limit {
                diagnostics.push(format!("F tends to {:?}, not 1", o.f_limit));
            }
            EndKind::Undetermined
        }
    };
    let finite_distance = o.finite_distance();
    let zs = approach(m, side);
    let w = weyl_profile(m, &zs);
    let curvature_blowup = match (w.first(), w.last()) {
        (Some(a), Some(b)) if a.is_finite() => !b.is_finite() || *b > 1e6 * (1.0 + a),
        _ => false,
    };
    let weyl_decay = (kind == EndKind::Ale).then(|| match (w.first(), w.last()) {
        (Some(a), Some(b)) => *b <= 1e-3 * a || *b < 1e-20,
        _ => false,
    });
    let complete = match kind {
        EndKind::Bolt | EndKind::Nut => true,
        EndKind::Conical => false,
        EndKind::CurvatureSingularity => !finite_distance,
        _ => !finite_distance,
    };
    EndReport {
        side,
        kind,
        complete,
        self_intersection,
        bolt_multiplicity,
        cone_angle,
        orders: o,
        finite_distance,
        curvature_blowup,
        weyl_decay,
        diagnostics,
    }
}

/// `∫ ½√(C/F) dz` from `z1` to `z2` (either order); `+∞` when an end at
/// infinite distance is reached.
pub fn distance(m: &MetricSpec, z1: f64, z2: f64) -> Result<f64> {
    let d = m.domain();
    let (a, b) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
    let inside = |z: f64| d.is_interior(z) || z == d.lo || z == d.hi;
    if !inside(a) || !inside(b) {
        let bad = if inside(a) { b } else { a };
        return Err(Error::OutOfDomain { z: bad, domain: d.to_string() });
    }
    if a == b {
        return Ok(0.0);
    }
    let fp = m.f_poly().to_f64();
    let c_of = float_conformal(m.conformal());
    // Near a finite endpoint where F vanishes, F is summed from its Taylor
    // jet so the leading (z − e) factor carries no cancellation.
    let jets: Vec<(f64, [f64; 5])> = [d.lo, d.hi]
        .into_iter()
        .filter(|e| e.is_finite())
        .map(|e| (e, fp.jet(e).derivs()))
        .filter(|(_, j)| j[0].abs() < ZERO_TOL * f_scale(m.f_poly()))
        .collect();
    let f_of = |z: f64| -> f64 {
        for (e, j) in &jets {
            let h = z - e;
            if h.abs() < 1e-3 {
                return j[1] * h + j[2] * h * h / 2.0 + j[3] * h.powi(3) / 6.0 + j[4] * h.powi(4) / 24.0;
            }
        }
        fp.eval(z).unwrap_or(f64::NAN)
    };
    let integrand = |z: f64| -> f64 { 0.5 * (c_of(z) / f_of(z)).sqrt() };
    let (wa, wb) = (if a.is_finite() { a } else { b - 8.0 }, if b.is_finite() { b } else { a + 8.0 });
    for i in 1..200 {
        let z = wa + (wb - wa) * i as f64 / 200.0;
        let v = integrand(z);
        if !v.is_finite() {
            return Err(Error::Integrand(format!("F or C not positive at z = {z}")));
        }
    }
    let lower = (a == d.lo).then(|| end_orders(m, Side::Lower));
    let upper = (b == d.hi).then(|| end_orders(m, Side::Upper));
    if lower.iter().chain(upper.iter()).any(|o| !o.finite_distance()) {
        return Ok(f64::INFINITY);
    }
    let mid = match (a.is_finite(), b.is_finite()) {
        (true, true) => 0.5 * (a + b),
        (true, false) => a + 1.0,
        (false, true) => b - 1.0,
        (false, false) => 0.0,
    };
    let tol = 1e-12;
    let piece = |end: f64, orders: Option<EndOrders>, dir: f64| -> Result<f64> {
        match orders {
            Some(o) if !end.is_finite() => {
                // z = mid + dir·(−ln u)/μ, dz = du/(μu) in absolute value
                let mu = 0.5 * (o.f - o.c);
                adaptive_gauss(|u| integrand(mid - dir * u.ln() / mu) / (mu * u), 0.0, 1.0, tol)
            }
            Some(_) => {
                // z = end − dir·w², removing the square-root singularity at a zero of F
                let w_max = (dir * (end - mid)).sqrt();
                adaptive_gauss(|w| integrand(end - dir * w * w) * 2.0 * w, 0.0, w_max, tol)
            }
            None => adaptive_gauss(integrand, mid.min(end), mid.max(end), tol),
        }
    };
    Ok(piece(a, lower, -1.0)? + piece(b, upper, 1.0)?)
}

fn float_conformal(c: &ConformalModel) -> impl Fn(f64) -> f64 {
    let (num, den) = c.as_ratio();
    let (num, den) = (num.to_f64(), den.to_f64());
    move |z: f64| num.eval(z).unwrap_or(f64::NAN) / den.eval(z).unwrap_or(f64::NAN)
}

/// The Kähler partner under the conformal change by `e^{±2z}`: the same
/// `F` with `C0e^{∓z}` replaced by `C0e^{±z}` and the structure flipped.
pub fn ambikahler_transform(m: &MetricSpec) -> Result<MetricSpec> {
    let (tag, eps) = match (m.tag(), m.conformal()) {
        (Some(StructureTag::Jplus), ConformalModel::Exp { eps: -1, .. }) => (StructureTag::Jminus, 1),
        (Some(StructureTag::Jminus), ConformalModel::Exp { eps: 1, .. }) => (StructureTag::Jplus, -1),
        _ => {
            return Err(Error::NotKahler(format!(
                "{} is not tagged Jplus with C0·e^(-z) or Jminus with C0·e^(z)",
                m.name()
            )))
        }
    };
    let ConformalModel::Exp { c0, .. } = m.conformal() else { unreachable!() };
    MetricSpec::new(m.name(), m.profile().clone(), ConformalModel::exp(c0.clone(), eps), *m.domain(), Some(tag))
}

/// Result of [`transcribe_classic`].
#[derive(Clone, Debug)]
pub struct Transcription {
    pub metric: MetricSpec,
    pub fit: ExpFit,
    /// Relative rms misfit of the chosen conformal model.
    pub conformal_rms: f64,
    /// Samples `(r, z, F, C)`.
    pub samples: Vec<(f64, f64, f64, f64)>,
}

fn fit_conformal(zc: &[(f64, f64)]) -> (ConformalModel, f64) {
    let rms = |model: &ConformalModel| {
        let s: f64 = zc.iter().map(|&(z, c)| ((model.eval(z) - c) / c).powi(2)).sum();
        (s / zc.len() as f64).sqrt()
    };
    let mut best: Vec<(ConformalModel, f64)> = Vec::new();
    for eps in [1i8, -1] {
        let logs: Vec<f64> = zc.iter().map(|&(z, c)| c.ln() - eps as f64 * z).collect();
        let c0 = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
        let model = ConformalModel::exp(Coef::real(c0), eps);
        let r = rms(&model);
        best.push((model, r));
    }
    // √(e^{-z}/C) = |C5 + C6e^{-z}|, linear in (C5, C6) for a fixed sign.
    let pts: Vec<(f64, f64)> = zc.iter().map(|&(z, c)| ((-z).exp(), ((-z).exp() / c).sqrt())).collect();
    let n = pts.len() as f64;
    let (sx, sy) = (pts.iter().map(|p| p.0).sum::<f64>(), pts.iter().map(|p| p.1).sum::<f64>());
    let sxx = pts.iter().map(|p| p.0 * p.0).sum::<f64>();
    let sxy = pts.iter().map(|p| p.0 * p.1).sum::<f64>();
    let det = n * sxx - sx * sx;
    if det.abs() > 1e-300 {
        let c6 = (n * sxy - sx * sy) / det;
        let c5 = (sy - c6 * sx) / n;
        let model = ConformalModel::einstein(Coef::real(c5), Coef::real(c6));
        let r = rms(&model);
        best.push((model, r));
    }
    let min = best.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
    // Exponential models win ties with the Einstein family that contains them.
    best.into_iter().find(|b| b.1 <= min + 1e-9).expect("at least one model")
}

/// Transcribes `A dr² + B(η¹)² + C((η²)² + (η³)²)` on `r_range` by solving
/// `dz = orientation·2√(AB)/C dr`. The origin of `z` is `r = ∞` when the
/// integral converges there and `r = 1` otherwise.
pub fn transcribe_classic(
    a: impl Fn(f64) -> f64,
    b: impl Fn(f64) -> f64,
    c: impl Fn(f64) -> f64,
    r_range: (f64, f64),
    orientation: f64,
    samples: usize,
) -> Result<Transcription> {
    let (r0, r1) = r_range;
    let dz = |r: f64| orientation.signum() * 2.0 * (a(r) * b(r)).sqrt() / c(r);
    let check = |r: f64| -> Result<f64> {
        let v = dz(r);
        if v.is_finite() && v != 0.0 && a(r) > 0.0 && b(r) > 0.0 && c(r) > 0.0 {
            Ok(v)
        } else {
            Err(Error::Integrand(format!(
                "z(r) is not monotone at r = {r}; A, B, C must be positive (flip the orientation if z decreases)"
            )))
        }
    };
    let r_hi = if r1.is_finite() { r1 } else { 20.0 * r0.abs().max(1.0) };
    let rs: Vec<f64> = (0..samples)
        .map(|i| {
            let u = 0.01 * 100f64.powf(i as f64 / (samples.max(2) - 1) as f64) * 0.98;
            r0 + (r_hi - r0) * u
        })
        .collect();
    for &r in &rs {
        check(r)?;
    }
    // Convergence at r = ∞: ∫_R^{2R} must shrink with R.
    let tail = |big: f64| adaptive_gauss(dz, big, 2.0 * big, 1e-12);
    let anchor_inf = !r1.is_finite() && {
        let (t1, t2) = (tail(1e4)?, tail(1e5)?);
        t2.abs() < 0.5 * t1.abs()
    };
    let z_of = |r: f64| -> Result<f64> {
        if anchor_inf {
            // z(r) = −∫_r^∞ dz, with r = 1/u on the tail.
            Ok(-adaptive_gauss(|u| dz(1.0 / u) / (u * u), 0.0, 1.0 / r, 1e-14)?)
        } else {
            adaptive_gauss(dz, 1.0, r, 1e-14)
        }
    };
    let mut pts = Vec::with_capacity(rs.len());
    for &r in &rs {
        let z = z_of(r)?;
        pts.push((r, z, b(r) / c(r), c(r)));
    }
    let fit = fit_exp_family(&pts.iter().map(|p| (p.1, p.2)).collect::<Vec<_>>())?;
    let (model, conformal_rms) = fit_conformal(&pts.iter().map(|p| (p.1, p.3)).collect::<Vec<_>>());
    let z_start = z_of(r0 + 1e-9 * (1.0 + r0.abs())).unwrap_or(f64::NEG_INFINITY);
    let z_end = if r1.is_finite() {
        z_of(r1)?
    } else if anchor_inf {
        0.0
    } else {
        orientation.signum() * f64::INFINITY
    };
    let (lo, hi) = if z_start <= z_end { (z_start, z_end) } else { (z_end, z_start) };
    let profile = Profile::Canonical(fit.coeffs.map(Coef::real));
    let metric = MetricSpec::new("transcribed", profile, model, Domain::open(lo, hi), None)?;
    Ok(Transcription { metric, fit, conformal_rms, samples: pts })
}
