//! Special-geometry predicates.
//!
//! Every predicate has a grid residual. When `F` is an exponential
//! polynomial and `C` is of exponential or Einstein type the verdict is
//! instead decided from coefficient identities, which are exact for
//! rational data and tolerance-based for float data.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::btflat::bt_operators;
use crate::curvature::{scalar_curvature_poly, scalar_jet};
use crate::error::{Error, Result};
use crate::exppoly::Exponent;
use crate::jet::Jet4;
use crate::operators::{b_op, l_compose, l_op, Carrier, OperatorSign};
use crate::profiles::{as_canonical, ConformalModel, MetricSpec};
use crate::scalar::{Coef, Scalar};
use crate::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Indeterminate,
}

impl Verdict {
    fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }

    fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::No, _) | (_, Verdict::No) => Verdict::No,
            (Verdict::Yes, Verdict::Yes) => Verdict::Yes,
            _ => Verdict::Indeterminate,
        }
    }

    fn or(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Yes, _) | (_, Verdict::Yes) => Verdict::Yes,
            (Verdict::No, Verdict::No) => Verdict::No,
            _ => Verdict::Indeterminate,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Predicate {
    pub name: &'static str,
    pub verdict: Verdict,
    /// Largest relative grid residual of the defining equation.
    pub residual: f64,
    pub certificate: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Residual,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub metric: String,
    pub method: Method,
    pub predicates: Vec<Predicate>,
    pub diagnostics: Vec<String>,
}

impl ClassificationReport {
    pub fn get(&self, name: &str) -> Option<&Predicate> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn verdict(&self, name: &str) -> Verdict {
        self.get(name).map_or(Verdict::Indeterminate, |p| p.verdict)
    }

    pub fn holds(&self, name: &str) -> bool {
        self.verdict(name) == Verdict::Yes
    }

    /// `key value` text block, one predicate per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("metric {}\nmethod {}\n", self.metric, match self.method {
            Method::Exact => "exact",
            Method::Residual => "residual",
        });
        for p in &self.predicates {
            out.push_str(&format!("{} {} residual={:.3e}", p.name, p.verdict, p.residual));
            if let Some(c) = &p.certificate {
                out.push(' ');
                out.push_str(c);
            }
            out.push('\n');
        }
        for d in &self.diagnostics {
            out.push_str(&format!("diagnostic {d}\n"));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub tol: f64,
    pub grid_n: usize,
    /// Evaluate the `B^t`-flat predicate for this `t`.
    pub t: Option<f64>,
    /// Ignore the coefficient identities and decide from residuals only.
    pub force_residual: bool,
    /// How far into an infinite end the grid reaches.
    pub reach: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { tol: 1e-9, grid_n: 64, t: None, force_residual: false, reach: 4.0 }
    }
}

/// Predicate names in report order; `bt_flat` only appears when `t` is given.
pub const PREDICATES: [&str; 19] = [
    "kahler_plus",
    "kahler_minus",
    "extremal",
    "csc",
    "zsc",
    "einstein",
    "kahler_einstein",
    "ricci_flat",
    "bach_flat",
    "sd",
    "asd",
    "half_harmonic_plus",
    "half_harmonic_minus",
    "harmonic",
    "hyperkahler_Iminus",
    "hyperkahler_Iplus",
    "conformally_extremal",
    "conformally_ricci_flat",
    "bt_flat",
];

struct Sample {
    z: f64,
    f: Jet4<f64>,
    c: Jet4<f64>,
}

fn rel(x: f64, scale: f64) -> f64 {
    let r = x.abs() / (1.0 + scale.abs());
    if r.is_nan() {
        f64::INFINITY
    } else {
        r
    }
}

fn max_over(samples: &[Sample], g: impl Fn(&Sample) -> f64) -> f64 {
    samples.iter().map(g).fold(0.0, f64::max)
}

/// `max |x_i − x_ref| / (1 + scale_i)`, the reference being the sample
/// with the smallest scale (the most accurately evaluated one).
fn constancy(values: &[(f64, f64)]) -> (f64, f64) {
    let Some(&(x0, s0)) = values.iter().min_by(|a, b| a.1.total_cmp(&b.1)) else {
        return (f64::NAN, 0.0);
    };
    let r = values.iter().map(|&(x, s)| rel(x - x0, s)).fold(0.0, f64::max);
    (r, rel(x0, s0))
}

/// Grid residuals for every predicate.
struct Residuals {
    kahler_plus: f64,
    kahler_minus: f64,
    conf_extremal: f64,
    csc: f64,
    s0: f64,
    s0_rel: f64,
    tf_ricci: f64,
    bach: f64,
    sd: f64,
    asd: f64,
    hh_plus: f64,
    hh_minus: f64,
    hk_minus: f64,
    hk_plus: f64,
    bt: Option<f64>,
}

fn l_scale(f: &Jet4<f64>) -> f64 {
    1.0 + 0.5 * f.d(2).abs() + 1.5 * f.d(1).abs() + f.value().abs()
}

fn lc_scale(f: &Jet4<f64>) -> f64 {
    1.0 + 0.25 * f.d(4).abs() + 1.25 * f.d(2).abs() + f.value().abs()
}

fn scalar_scale(p: &Sample) -> f64 {
    let (f, c) = (&p.f, &p.c);
    let h = c.powf(0.5);
    let (h1, h2) = (h.d(1), h.d(2));
    4.0 / c.value() * (f.d(2).abs() + 0.5 * f.value().abs() + 2.0)
        + 24.0 * c.value().powf(-1.5) * (f.d(1) * h1).abs().max((f.value() * h2).abs()) * 2.0
}

fn residuals(samples: &[Sample], t: Option<f64>) -> Residuals {
    let kahler = |sign: f64| max_over(samples, |p| rel(p.c.d(1) / p.c.value() + sign, 0.0));
    let lres = |sign: OperatorSign| {
        max_over(samples, |p| rel(l_op(sign, &p.f).value() - 1.0, l_scale(&p.f)))
    };

    let svals: Vec<(f64, f64)> =
        samples.iter().map(|p| (scalar_jet(&p.f, &p.c).value(), scalar_scale(p))).collect();
    let (csc, s0_rel) = constancy(&svals);
    let s0 = svals.iter().min_by(|a, b| a.1.total_cmp(&b.1)).map_or(f64::NAN, |v| v.0);

    let tf_ricci = max_over(samples, |p| {
        let (f, c) = (&p.f, &p.c);
        let g = c.powf(-0.5);
        let (g1, g2) = (g.d(1), g.d(2));
        let a = 4.0 * f.value() * g.value() * (g2 - g.value() / 4.0);
        let a_scale = 4.0 * (f.value() * g.value()).abs() * (g2.abs() + g.value().abs() / 4.0);
        let fg = (*f * g.derive()).derive().value();
        let tail = (0.5 * f.d(2) - 0.75 * f.value() + 1.0) / c.value();
        let b = 2.0 * (g.value() * fg - tail);
        let b_scale = 2.0
            * (g.value().abs() * ((f.d(1) * g1).abs() + (f.value() * g2).abs())
                + (0.5 * f.d(2).abs() + 0.75 * f.value().abs() + 1.0) / c.value());
        rel(a, a_scale).max(rel(b, b_scale))
    });

    let bach = max_over(samples, |p| {
        let f = &p.f;
        let b1 = f.value() * (l_compose(f).value() - 1.0);
        let b2 = b_op(&f.truncate(3)).value();
        let lp = l_scale(f) + f.d(1).abs();
        let b2_scale = lp * lp + f.d(1).abs() * (0.5 * f.d(3).abs() + 1.5 * f.d(2).abs() + f.d(1).abs());
        rel(b1, f.value().abs() * lc_scale(f)).max(rel(b2, b2_scale))
    });

    let potential = |sign: OperatorSign| {
        let vals: Vec<(f64, f64)> = samples
            .iter()
            .map(|p| {
                let w = (1.5 * sign.sign() as f64 * p.z).exp() * p.c.value().sqrt();
                (w * (l_op(sign, &p.f).value() - 1.0), w * l_scale(&p.f))
            })
            .collect();
        constancy(&vals).0
    };

    // √F satisfies q′ = ±(q − 1) and (log C)′ = ∓1 ± 2/q on a hyperkähler metric.
    let hyperkahler = |orient: f64| {
        [1.0, -1.0]
            .into_iter()
            .map(|branch| {
                max_over(samples, |p| {
                    let fv = p.f.value();
                    if fv <= 0.0 {
                        return f64::INFINITY;
                    }
                    let q = branch * fv.sqrt();
                    let q1 = p.f.d(1) / (2.0 * q);
                    let lc = p.c.d(1) / p.c.value();
                    let r1 = rel(q1 - orient * (q - 1.0), q.abs() + q1.abs() + 1.0);
                    let r2 = rel(lc - orient * (-1.0 + 2.0 / q), 1.0 + 2.0 / q.abs() + lc.abs());
                    r1.max(r2)
                })
            })
            .fold(f64::INFINITY, f64::min)
    };

    let bt = t.map(|t| {
        max_over(samples, |p| {
            let (f, c) = (&p.f, &p.c);
            let s = scalar_jet(f, c);
            let j = bt_operators(f, c, &s, t);
            let h = c.powf(0.5);
            let g = c.powf(-0.5);
            let c32 = c.value().powf(1.5);
            let s1 = s.d(1);
            let f1_scale = 24.0 * ((f.d(1) * h.d(1)).abs() + (f.value() * h.d(2)).abs())
                + 4.0 * h.value() * (f.d(2).abs() + 0.5 * f.value().abs() + 2.0)
                + (s.value() * c32).abs();
            let f2_scale = 8.0 / 3.0 * lc_scale(f)
                + t.abs()
                    * ((s.value() * c32).abs() * (g.d(2).abs() + g.value() / 4.0)
                        + 0.5 * (c.value() / f.value() * f.d(1) * s1).abs()
                        + (c.d(1) * s1).abs());
            let cf = *c * *f;
            let e0_scale = (cf.d(1) * s1).abs() + (cf.value() * s.d(2)).abs();
            rel(j.f1res.value(), f1_scale).max(rel(j.f2res.value(), f2_scale)).max(rel(j.e0.value(), e0_scale))
        })
    });

    Residuals {
        kahler_plus: kahler(1.0),
        kahler_minus: kahler(-1.0),
        conf_extremal: max_over(samples, |p| rel(l_compose(&p.f).value() - 1.0, lc_scale(&p.f))),
        csc,
        s0,
        s0_rel,
        tf_ricci,
        bach,
        sd: lres(OperatorSign::Minus),
        asd: lres(OperatorSign::Plus),
        hh_plus: potential(OperatorSign::Plus),
        hh_minus: potential(OperatorSign::Minus),
        hk_minus: hyperkahler(1.0),
        hk_plus: hyperkahler(-1.0),
        bt,
    }
}

/// Coefficient identities available for closed-form conformal factors.
struct Exact {
    tol: f64,
    scale: f64,
    f: Poly,
    /// `(C5, C6)` with `C = e^{-z}/(C5 + C6e^{-z})²`.
    c56: (Coef, Coef),
    kahler_plus: bool,
    kahler_minus: bool,
    s: Poly,
}

impl Exact {
    fn new(m: &MetricSpec, tol: f64) -> Option<Exact> {
        let (c56, kahler_plus, kahler_minus) = match m.conformal() {
            ConformalModel::Exp { c0, eps } => {
                let r = Coef::int(1) / c0.sqrt();
                if *eps < 0 {
                    ((r, Coef::int(0)), true, false)
                } else {
                    ((Coef::int(0), r), false, true)
                }
            }
            ConformalModel::Einstein { c5, c6 } => {
                let sc = c5.to_f64().abs().max(c6.to_f64().abs());
                let kp = c6.is_negligible(tol, 0.0) || c6.to_f64().abs() <= tol * sc;
                let km = c5.is_negligible(tol, 0.0) || c5.to_f64().abs() <= tol * sc;
                ((c5.clone(), c6.clone()), kp, km)
            }
            ConformalModel::Ratio { .. } => return None,
        };
        let f = m.f_poly().clone();
        let cmax = c56.0.to_f64().abs().max(c56.1.to_f64().abs());
        let scale = (1.0 + f.max_abs_coeff()) * (1.0 + cmax * cmax + 1.0 / (cmax * cmax).clamp(1e-300, 1e300));
        let s = scalar_curvature_poly(m)?;
        Some(Exact { tol, scale, f, c56, kahler_plus, kahler_minus, s })
    }

    fn zero(&self, c: &Coef) -> bool {
        c.is_negligible(self.tol, self.scale * self.scale)
    }

    fn poly_zero(&self, p: &Poly) -> bool {
        p.terms().all(|(_, c)| self.zero(c))
    }

    fn canonical(&self) -> Option<[Coef; 4]> {
        as_canonical(&self.f, self.tol)
    }

    fn einstein(&self) -> bool {
        let (c5, c6) = &self.c56;
        self.canonical().is_some_and(|c| {
            self.zero(&(&(&c[0] * c5) - &(&c[1] * c6))) && self.zero(&(&(&c[2] * c5) - &(&c[3] * c6)))
        })
    }

    fn einstein_scalar(&self) -> Option<Coef> {
        let (c5, c6) = &self.c56;
        let c = self.canonical()?;
        let q = &(&(&c[1] * &(c5 * c5)) - &(&Coef::int(2) * &(c5 * c6))) + &(&c[2] * &(c6 * c6));
        Some(&Coef::int(-24) * &q)
    }

    /// `L±F − 1` proportional to `a·e^{∓z} + b·e^{∓2z}` (plus) or
    /// `a·e^{2z} + b·e^{z}` (minus), with `(a, b) = (C5, C6)`.
    fn half_harmonic(&self, sign: OperatorSign) -> bool {
        let g = l_op(sign, &self.f).shift_const(-1, 1);
        let (ka, kb) = match sign {
            OperatorSign::Plus => (Exponent::int(-1), Exponent::int(-2)),
            OperatorSign::Minus => (Exponent::int(2), Exponent::int(1)),
        };
        let outside = g.terms().all(|(k, c)| k == ka || k == kb || self.zero(c));
        let (a, b) = &self.c56;
        outside && self.zero(&(&(&g.coeff(ka) * b) - &(&g.coeff(kb) * a)))
    }

    /// `F = (1 + a·e^{±z})²` with `C5 = a·C6` (sign `+`) or `C6 = a·C5`.
    fn hyperkahler(&self, sign: i32) -> bool {
        let f = &self.f;
        let (k1, k2) = (Exponent::int(sign), Exponent::int(2 * sign));
        let support = f.terms().all(|(k, c)| k == Exponent::ZERO || k == k1 || k == k2 || self.zero(c));
        let a = &f.coeff(k1) * &Coef::ratio(1, 2);
        let shape = support
            && self.zero(&(&f.coeff(Exponent::ZERO) - &Coef::int(1)))
            && self.zero(&(&f.coeff(k2) - &(&a * &a)));
        let (c5, c6) = if sign > 0 { (&self.c56.0, &self.c56.1) } else { (&self.c56.1, &self.c56.0) };
        shape && !self.zero(c6) && self.zero(&(c5 - &(&a * c6)))
    }
}

/// Null direction `(v5, v6)` of `[[C1, −C2], [C3, −C4]]` with
/// `C2v5² − 2v5v6 + C3v6² = 0`, when one exists: the direction of an
/// Einstein-type factor making the metric Ricci-flat.
pub fn ricci_flat_direction(c: &[Coef; 4], tol: f64) -> Option<(Coef, Coef)> {
    let scale = c.iter().map(|x| x.to_f64().abs()).fold(1.0, f64::max);
    let zero = |x: &Coef| x.is_negligible(tol, scale * scale);
    let v = if !zero(&c[0]) || !zero(&c[1]) {
        (c[1].clone(), c[0].clone())
    } else if !zero(&c[2]) || !zero(&c[3]) {
        (c[3].clone(), c[2].clone())
    } else {
        (Coef::int(1), Coef::int(0))
    };
    let row = |a: &Coef, b: &Coef| &(a * &v.0) - &(b * &v.1);
    let q = &(&(&c[1] * &(&v.0 * &v.0)) - &(&Coef::int(2) * &(&v.0 * &v.1))) + &(&c[2] * &(&v.1 * &v.1));
    (zero(&row(&c[0], &c[1])) && zero(&row(&c[2], &c[3])) && zero(&q)).then_some(v)
}

/// `max |L⁺L⁻F − 1|` over `grid`; independent of the conformal factor.
pub fn conformally_extremal_residual(m: &MetricSpec, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&z| (l_compose(&m.f_poly().jet(z)).value() - 1.0).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpFit {
    /// `(C1, C2, C3, C4)` in `F = 1 + ½C1e^{-2z} + C2e^{-z} + C3e^{z} + ½C4e^{2z}`.
    pub coeffs: [f64; 4],
    pub rms: f64,
}

/// Least-squares fit of `F − 1` onto the canonical exponentials.
pub fn fit_exp_family(samples: &[(f64, f64)]) -> Result<ExpFit> {
    let n = samples.len();
    if n < 8 {
        return Err(Error::RankDeficient(format!("need at least 8 samples, got {n}")));
    }
    let basis = |z: f64| [0.5 * (-2.0 * z).exp(), (-z).exp(), z.exp(), 0.5 * (2.0 * z).exp()];
    let mut a = DMatrix::from_fn(n, 4, |i, j| basis(samples[i].0)[j]);
    let b = DVector::from_fn(n, |i, _| samples[i].1 - 1.0);
    let norms: Vec<f64> = (0..4).map(|j| a.column(j).norm()).collect();
    if norms.iter().any(|v| !v.is_finite() || *v == 0.0) {
        return Err(Error::RankDeficient("basis column overflowed or vanished".into()));
    }
    for (j, nj) in norms.iter().enumerate() {
        a.column_mut(j).scale_mut(1.0 / nj);
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if smin.is_nan() || smax.is_nan() || smin <= 1e-12 * smax {
        return Err(Error::RankDeficient(format!("condition {:.1e}", smax / smin)));
    }
    let x = svd.solve(&b, 0.0).map_err(|e| Error::RankDeficient(e.to_string()))?;
    let r = &a * &x - &b;
    let coeffs = [0, 1, 2, 3].map(|j| x[j] / norms[j]);
    Ok(ExpFit { coeffs, rms: (r.norm_squared() / n as f64).sqrt() })
}

fn gather(m: &MetricSpec, opts: &ClassifyOptions) -> (Vec<Sample>, Vec<String>) {
    let mut diagnostics = Vec::new();
    let mut samples = Vec::new();
    let fscale = 1.0 + m.f_poly().max_abs_coeff();
    for z in m.domain().sample_grid(opts.grid_n, opts.reach) {
        let f = m.f_poly().jet(z);
        match m.conformal().jet(z) {
            Some(c) if c.is_finite() && f.is_finite() && f.value().abs() > 1e-12 * fscale => {
                samples.push(Sample { z, f, c })
            }
            _ => diagnostics.push(format!("singular sample at z = {z}")),
        }
    }
    (samples, diagnostics)
}

pub fn classify(m: &MetricSpec, opts: &ClassifyOptions) -> Result<ClassificationReport> {
    if opts.grid_n < 16 {
        return Err(Error::BadParameter { name: "grid_n".into(), reason: "at least 16 samples are needed".into() });
    }
    let (samples, mut diagnostics) = gather(m, opts);
    let singular = !diagnostics.is_empty();
    let r = residuals(&samples, opts.t);
    let tol = opts.tol;
    let by_residual = |x: f64| {
        if singular {
            Verdict::Indeterminate
        } else {
            Verdict::from_bool(x <= tol)
        }
    };

    let exact = if opts.force_residual { None } else { Exact::new(m, tol) };
    let method = if exact.is_some() { Method::Exact } else { Method::Residual };
    let mut out: Vec<Predicate> = Vec::new();
    let mut push = |name: &'static str, verdict: Verdict, residual: f64, certificate: Option<String>| {
        out.push(Predicate { name, verdict, residual, certificate })
    };

    let fit = (exact.is_none()).then(|| {
        let pts: Vec<(f64, f64)> = samples.iter().map(|p| (p.z, p.f.value())).collect();
        fit_exp_family(&pts)
    });

    let (kp, km);
    let (ext, ce, csc, zsc, ein, rf, bf, sd, asd, hhp, hhm, hkm, hkp, crf);
    let mut s_cert = None;
    let mut e_cert = None;
    match &exact {
        Some(x) => {
            let lc_zero = x.poly_zero(&l_compose(&x.f).shift_const(-1, 1));
            kp = Verdict::from_bool(x.kahler_plus);
            km = Verdict::from_bool(x.kahler_minus);
            ce = Verdict::from_bool(lc_zero);
            ext = kp.or(km).and(ce);
            let s_const = x.s.terms().all(|(k, c)| k == Exponent::ZERO || x.zero(c));
            let s0 = x.s.coeff(Exponent::ZERO);
            csc = Verdict::from_bool(s_const);
            zsc = Verdict::from_bool(s_const && x.zero(&s0));
            if s_const {
                s_cert = Some(format!("s0={s0}"));
            }
            let is_einstein = x.einstein();
            ein = Verdict::from_bool(is_einstein);
            if is_einstein {
                let s = x.einstein_scalar().unwrap_or(s0);
                e_cert = Some(format!("s={s} lambda={}", s.to_f64() / 4.0));
            }
            rf = Verdict::from_bool(is_einstein && x.einstein_scalar().is_some_and(|s| x.zero(&s)));
            bf = Verdict::from_bool(lc_zero && x.poly_zero(&b_op(&x.f)));
            sd = Verdict::from_bool(x.poly_zero(&l_op(OperatorSign::Minus, &x.f).shift_const(-1, 1)));
            asd = Verdict::from_bool(x.poly_zero(&l_op(OperatorSign::Plus, &x.f).shift_const(-1, 1)));
            hhp = Verdict::from_bool(x.half_harmonic(OperatorSign::Plus));
            hhm = Verdict::from_bool(x.half_harmonic(OperatorSign::Minus));
            hkm = Verdict::from_bool(x.hyperkahler(1));
            hkp = Verdict::from_bool(x.hyperkahler(-1));
            crf = Verdict::from_bool(x.canonical().and_then(|c| ricci_flat_direction(&c, tol)).is_some());
        }
        None => {
            kp = by_residual(r.kahler_plus);
            km = by_residual(r.kahler_minus);
            ce = by_residual(r.conf_extremal);
            ext = kp.or(km).and(ce);
            csc = by_residual(r.csc);
            zsc = csc.and(by_residual(r.s0_rel));
            if csc == Verdict::Yes {
                s_cert = Some(format!("s0={:.12e}", r.s0));
            }
            ein = by_residual(r.tf_ricci).and(csc);
            if ein == Verdict::Yes {
                e_cert = Some(format!("s={:.12e} lambda={:.12e}", r.s0, r.s0 / 4.0));
            }
            rf = ein.and(zsc);
            bf = by_residual(r.bach);
            sd = by_residual(r.sd);
            asd = by_residual(r.asd);
            hhp = by_residual(r.hh_plus);
            hhm = by_residual(r.hh_minus);
            hkm = by_residual(r.hk_minus);
            hkp = by_residual(r.hk_plus);
            crf = match fit.as_ref() {
                Some(Ok(fit)) if fit.rms <= tol && !singular => {
                    let c = fit.coeffs.map(Coef::real);
                    Verdict::from_bool(ricci_flat_direction(&c, tol.sqrt()).is_some())
                }
                Some(Ok(_)) => by_residual(f64::INFINITY),
                _ => {
                    diagnostics.push("canonical fit failed".into());
                    Verdict::Indeterminate
                }
            };
        }
    }

    push("kahler_plus", kp, r.kahler_plus, None);
    push("kahler_minus", km, r.kahler_minus, None);
    push("extremal", ext, r.conf_extremal.max(r.kahler_plus.min(r.kahler_minus)), None);
    push("csc", csc, r.csc, s_cert);
    push("zsc", zsc, r.csc.max(r.s0_rel), None);
    push("einstein", ein, r.tf_ricci, e_cert);
    push("kahler_einstein", ein.and(kp.or(km)), r.tf_ricci.max(r.kahler_plus.min(r.kahler_minus)), None);
    push("ricci_flat", rf, r.tf_ricci.max(r.s0_rel), None);
    push("bach_flat", bf, r.bach, None);
    push("sd", sd, r.sd, Some("W-=0".into()));
    push("asd", asd, r.asd, Some("W+=0".into()));
    push("half_harmonic_plus", hhp, r.hh_plus, None);
    push("half_harmonic_minus", hhm, r.hh_minus, None);
    push("harmonic", hhp.and(hhm).and(csc), r.hh_plus.max(r.hh_minus).max(r.csc), None);
    push("hyperkahler_Iminus", hkm, r.hk_minus, None);
    push("hyperkahler_Iplus", hkp, r.hk_plus, None);
    push("conformally_extremal", ce, r.conf_extremal, None);
    let crf_res = match &fit {
        Some(Ok(fit)) => fit.rms,
        _ => r.bach,
    };
    push("conformally_ricci_flat", crf, crf_res, None);
    if let (Some(t), Some(bt)) = (opts.t, r.bt) {
        push("bt_flat", by_residual(bt), bt, Some(format!("t={t}")));
    }

    Ok(ClassificationReport { metric: m.name().to_string(), method, predicates: out, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{canonical_poly, Domain, Profile, StructureTag};
    use crate::ExpPoly;

    fn q(p: i64, d: i64) -> Coef {
        Coef::ratio(p, d)
    }

    fn taub_bolt() -> MetricSpec {
        MetricSpec::new(
            "taub-bolt",
            Profile::canonical(q(-1, 4), q(1, 4), q(-9, 4), q(9, 4)),
            ConformalModel::einstein(q(1, 4), q(-1, 4)),
            Domain::new(-(3f64.ln()), 0.0, true, false),
            None,
        )
        .unwrap()
    }

    fn both(m: &MetricSpec) -> [ClassificationReport; 2] {
        let o = ClassifyOptions::default();
        [classify(m, &o).unwrap(), classify(m, &ClassifyOptions { force_residual: true, ..o }).unwrap()]
    }

    #[test]
    fn taub_bolt_verdicts() {
        for r in both(&taub_bolt()) {
            for yes in ["einstein", "ricci_flat", "bach_flat", "harmonic", "csc", "zsc"] {
                assert!(r.holds(yes), "{yes}\n{}", r.to_text());
            }
            for no in ["sd", "asd", "kahler_plus", "kahler_minus", "extremal"] {
                assert_eq!(r.verdict(no), Verdict::No, "{no}\n{}", r.to_text());
            }
        }
    }

    #[test]
    fn modified_taub_nut_first_kind() {
        let sq = ExpPoly::from_terms([(Exponent::ZERO, q(1, 1)), (Exponent::int(-1), q(-1, 1))]);
        let m = MetricSpec::new(
            "mtn1",
            Profile::Squared(sq),
            ConformalModel::exp(q(1, 1), 1),
            Domain::open(0.0, f64::INFINITY),
            Some(StructureTag::Jminus),
        )
        .unwrap();
        for r in both(&m) {
            for yes in ["kahler_minus", "extremal", "zsc", "sd", "conformally_ricci_flat"] {
                assert!(r.holds(yes), "{yes}\n{}", r.to_text());
            }
            assert!(!r.holds("einstein"));
        }
    }

    #[test]
    fn cubic_profile_is_not_extremal() {
        let f = ExpPoly::from_terms([(Exponent::ZERO, q(1, 1)), (Exponent::int(3), q(1, 1))]);
        let m = MetricSpec::new("c", Profile::Poly(f), ConformalModel::exp(q(1, 1), -1), Domain::real_line(), None)
            .unwrap();
        for r in both(&m) {
            assert_eq!(r.verdict("extremal"), Verdict::No);
            assert_eq!(r.verdict("bach_flat"), Verdict::No);
            assert!(r.holds("kahler_plus"));
            assert!(r.get("extremal").unwrap().residual > 1e-3);
        }
    }

    #[test]
    fn bt_flat_predicate() {
        let o = ClassifyOptions { t: Some(1.0), ..Default::default() };
        assert!(classify(&taub_bolt(), &o).unwrap().holds("bt_flat"));
        let f = canonical_poly(&[q(1, 1), q(1, 2), q(0, 1), q(1, 3)]);
        let m = MetricSpec::new("x", Profile::Poly(f), ConformalModel::exp(q(1, 1), -1), Domain::open(-1.0, 1.0), None)
            .unwrap();
        assert_eq!(classify(&m, &o).unwrap().verdict("bt_flat"), Verdict::No);
    }

    #[test]
    fn ratio_model_uses_residuals() {
        let (num, den) = ConformalModel::einstein(q(1, 4), q(-1, 4)).as_ratio();
        let m = MetricSpec::new(
            "tb-ratio",
            Profile::canonical(q(-1, 4), q(1, 4), q(-9, 4), q(9, 4)),
            ConformalModel::Ratio { num, den },
            Domain::new(-(3f64.ln()), 0.0, true, false),
            None,
        )
        .unwrap();
        let r = classify(&m, &ClassifyOptions::default()).unwrap();
        assert_eq!(r.method, Method::Residual);
        assert!(r.holds("einstein") && r.holds("conformally_ricci_flat"));
    }

    #[test]
    fn singular_grid_is_indeterminate() {
        let bad = MetricSpec::new(
            "s",
            Profile::canonical(q(0, 1), q(0, 1), q(-1, 1), q(0, 1)),
            ConformalModel::Ratio { num: ExpPoly::one(), den: ExpPoly::one() },
            Domain::open(-1.0, 1.0),
            None,
        )
        .unwrap();
        // F = 1 − e^{z} vanishes at z = 0, the grid midpoint for odd n.
        let r = classify(&bad, &ClassifyOptions { grid_n: 65, ..Default::default() }).unwrap();
        assert!(!r.diagnostics.is_empty());
        assert_eq!(r.verdict("einstein"), Verdict::Indeterminate);
    }

    #[test]
    fn fit_recovers_taub_bolt() {
        let f = taub_bolt();
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let z = -1.0 + i as f64 * 0.025;
                (z, f.f_poly().eval(z).unwrap())
            })
            .collect();
        let fit = fit_exp_family(&pts).unwrap();
        for (a, b) in fit.coeffs.iter().zip([-0.25, 0.25, -2.25, 2.25]) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(fit.rms < 1e-12);
        let flat: Vec<(f64, f64)> = pts.iter().map(|&(z, _)| (z, 1.0)).collect();
        assert!(fit_exp_family(&flat).unwrap().coeffs.iter().all(|c| c.abs() < 1e-14));
        let cubic: Vec<(f64, f64)> = (0..41).map(|i| {
            let z = -1.0 + i as f64 * 0.05;
            (z, 1.0 + 0.01 * (3.0 * z).exp())
        }).collect();
        assert!(fit_exp_family(&cubic).unwrap().rms > 1e-4);
        let same: Vec<(f64, f64)> = (0..10).map(|_| (0.5, 1.0)).collect();
        assert!(matches!(fit_exp_family(&same), Err(Error::RankDeficient(_))));
    }
}
