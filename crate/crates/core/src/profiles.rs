//! Metric specifications `g = C(dz²/(4F) + F(η¹)² + (η²)² + (η³)²)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Float, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exppoly::{ExpPoly, Exponent};
use crate::jet::Jet4;
use crate::scalar::{Coef, Scalar};
use crate::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StructureTag {
    Jplus,
    Jminus,
    Iminus,
    Iplus,
}

impl StructureTag {
    pub fn name(self) -> &'static str {
        match self {
            StructureTag::Jplus => "Jplus",
            StructureTag::Jminus => "Jminus",
            StructureTag::Iminus => "Iminus",
            StructureTag::Iplus => "Iplus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Jplus" => Some(StructureTag::Jplus),
            "Jminus" => Some(StructureTag::Jminus),
            "Iminus" => Some(StructureTag::Iminus),
            "Iplus" => Some(StructureTag::Iplus),
            _ => None,
        }
    }

    /// The tag seen after `z ↦ -z`.
    pub fn reflected(self) -> Self {
        match self {
            StructureTag::Jplus => StructureTag::Jminus,
            StructureTag::Jminus => StructureTag::Jplus,
            StructureTag::Iminus => StructureTag::Iplus,
            StructureTag::Iplus => StructureTag::Iminus,
        }
    }
}

/// The profile `F`.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Poly(Poly),
    /// `1 + ½C1e^{-2z} + C2e^{-z} + C3e^z + ½C4e^{2z}`.
    Canonical([Coef; 4]),
    /// The square of the stored polynomial.
    Squared(Poly),
}

pub fn canonical_poly(c: &[Coef; 4]) -> Poly {
    let half = Coef::ratio(1, 2);
    ExpPoly::from_terms([
        (Exponent::ZERO, Coef::int(1)),
        (Exponent::int(-2), &c[0] * &half),
        (Exponent::int(-1), c[1].clone()),
        (Exponent::int(1), c[2].clone()),
        (Exponent::int(2), &c[3] * &half),
    ])
}

/// Recovers `(C1..C4)` when `p` lies in the canonical family. Float
/// coefficients are compared with `tol` relative to the largest coefficient.
pub fn as_canonical(p: &Poly, tol: f64) -> Option<[Coef; 4]> {
    let scale = p.max_abs_coeff();
    for (k, c) in p.terms() {
        let allowed = k.twice() % 2 == 0 && k.twice().abs() <= 4;
        if !allowed && !c.is_negligible(tol, scale) {
            return None;
        }
    }
    let one = &p.coeff(Exponent::ZERO) - &Coef::int(1);
    if !one.is_negligible(tol, scale) {
        return None;
    }
    let two = Coef::int(2);
    Some([
        &p.coeff(Exponent::int(-2)) * &two,
        p.coeff(Exponent::int(-1)),
        p.coeff(Exponent::int(1)),
        &p.coeff(Exponent::int(2)) * &two,
    ])
}

impl Profile {
    pub fn canonical(c1: Coef, c2: Coef, c3: Coef, c4: Coef) -> Self {
        Profile::Canonical([c1, c2, c3, c4])
    }

    pub fn expand(&self) -> Poly {
        match self {
            Profile::Poly(p) => p.clone(),
            Profile::Canonical(c) => canonical_poly(c),
            Profile::Squared(p) => p * p,
        }
    }

    fn translate(&self, a: f64) -> Profile {
        match self {
            Profile::Canonical(c) => {
                let s = |x: &Coef, k: f64| x * &Coef::real((k * a).exp());
                Profile::Canonical([s(&c[0], -2.0), s(&c[1], -1.0), s(&c[2], 1.0), s(&c[3], 2.0)])
            }
            Profile::Poly(p) => Profile::Poly(p.translate(a)),
            Profile::Squared(p) => Profile::Squared(p.translate(a)),
        }
    }

    fn reflect(&self) -> Profile {
        match self {
            Profile::Canonical(c) => {
                Profile::Canonical([c[3].clone(), c[2].clone(), c[1].clone(), c[0].clone()])
            }
            Profile::Poly(p) => Profile::Poly(p.reflect()),
            Profile::Squared(p) => Profile::Squared(p.reflect()),
        }
    }
}

/// The conformal factor `C`.
#[derive(Clone, Debug, PartialEq)]
pub enum ConformalModel {
    /// `C0·e^{εz}`.
    Exp { c0: Coef, eps: i8 },
    /// `e^{-z}/(C5 + C6e^{-z})²`.
    Einstein { c5: Coef, c6: Coef },
    /// `num/den`.
    Ratio { num: Poly, den: Poly },
}

impl ConformalModel {
    pub fn exp(c0: Coef, eps: i8) -> Self {
        ConformalModel::Exp { c0, eps }
    }

    pub fn einstein(c5: Coef, c6: Coef) -> Self {
        ConformalModel::Einstein { c5, c6 }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ConformalModel::Exp { c0, eps } => {
                if !(c0.to_f64() > 0.0 && c0.is_finite()) {
                    return Err(Error::InvalidMetric(format!("C0 must be positive, got {c0}")));
                }
                if *eps != 1 && *eps != -1 {
                    return Err(Error::InvalidMetric(format!("eps must be ±1, got {eps}")));
                }
            }
            ConformalModel::Einstein { c5, c6 } => {
                if c5.is_zero() && c6.is_zero() {
                    return Err(Error::InvalidMetric("(C5, C6) must not both vanish".into()));
                }
            }
            ConformalModel::Ratio { den, .. } => {
                if den.is_zero() {
                    return Err(Error::InvalidMetric("ratio denominator is zero".into()));
                }
            }
        }
        Ok(())
    }

    /// `D = C5 + C6e^{-z}` of the Einstein model.
    pub fn einstein_denominator(c5: &Coef, c6: &Coef) -> Poly {
        ExpPoly::from_terms([(Exponent::ZERO, c5.clone()), (Exponent::int(-1), c6.clone())])
    }

    /// `C` as an exact quotient of exponential polynomials.
    pub fn as_ratio(&self) -> (Poly, Poly) {
        match self {
            ConformalModel::Exp { c0, eps } => {
                (ExpPoly::monomial(Exponent::int(*eps as i32), c0.clone()), ExpPoly::one())
            }
            ConformalModel::Einstein { c5, c6 } => {
                let d = Self::einstein_denominator(c5, c6);
                (ExpPoly::monomial(Exponent::int(-1), Coef::int(1)), &d * &d)
            }
            ConformalModel::Ratio { num, den } => (num.clone(), den.clone()),
        }
    }

    /// Direction `(C5 : C6)` of an Einstein-type factor; `C0e^{-z}` is
    /// `(1 : 0)` and `C0e^{z}` is `(0 : 1)`.
    pub fn einstein_direction(&self) -> Option<(Coef, Coef)> {
        match self {
            ConformalModel::Exp { eps: -1, .. } => Some((Coef::int(1), Coef::int(0))),
            ConformalModel::Exp { .. } => Some((Coef::int(0), Coef::int(1))),
            ConformalModel::Einstein { c5, c6 } => Some((c5.clone(), c6.clone())),
            ConformalModel::Ratio { .. } => None,
        }
    }

    /// Jet of `C^α` at `z`; `None` when `C` is not positive there.
    pub fn pow_jet<T: Float>(&self, z: T, alpha: f64) -> Option<Jet4<T>> {
        let t = |v: f64| T::from(v).unwrap();
        match self {
            ConformalModel::Exp { c0, eps } => {
                let c0 = c0.to_f64();
                Some(Jet4::exp_linear(t(c0.powf(alpha)), t(*eps as f64 * alpha), z))
            }
            ConformalModel::Einstein { c5, c6 } => {
                let d = Jet4::constant(t(c5.to_f64())) + Jet4::exp_linear(t(c6.to_f64()), -T::one(), z);
                if d.value() == T::zero() || !d.value().is_finite() {
                    return None;
                }
                Some(Jet4::exp_linear(T::one(), t(-alpha), z) * (d * d).powf(t(-alpha)))
            }
            ConformalModel::Ratio { num, den } => {
                let c = num.jet(z) / den.jet(z);
                if c.value() > T::zero() && c.value().is_finite() {
                    Some(c.powf(t(alpha)))
                } else {
                    None
                }
            }
        }
    }

    pub fn jet<T: Float>(&self, z: T) -> Option<Jet4<T>> {
        match self {
            ConformalModel::Ratio { num, den } => {
                let c = num.jet(z) / den.jet(z);
                (c.value().is_finite() && c.value() > T::zero()).then_some(c)
            }
            _ => self.pow_jet(z, 1.0),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            ConformalModel::Exp { c0, eps } => c0.to_f64() * (*eps as f64 * z).exp(),
            ConformalModel::Einstein { c5, c6 } => {
                let d = c5.to_f64() + c6.to_f64() * (-z).exp();
                (-z).exp() / (d * d)
            }
            ConformalModel::Ratio { num, den } => {
                num.eval(z).unwrap_or(f64::NAN) / den.eval(z).unwrap_or(f64::NAN)
            }
        }
    }

    fn translate(&self, a: f64) -> ConformalModel {
        match self {
            ConformalModel::Exp { c0, eps } => {
                if a == 0.0 {
                    self.clone()
                } else {
                    ConformalModel::Exp { c0: c0 * &Coef::real((*eps as f64 * a).exp()), eps: *eps }
                }
            }
            ConformalModel::Einstein { c5, c6 } => {
                if a == 0.0 {
                    self.clone()
                } else {
                    ConformalModel::Einstein {
                        c5: c5 * &Coef::real((a / 2.0).exp()),
                        c6: c6 * &Coef::real((-a / 2.0).exp()),
                    }
                }
            }
            ConformalModel::Ratio { num, den } => {
                ConformalModel::Ratio { num: num.translate(a), den: den.translate(a) }
            }
        }
    }

    fn reflect(&self) -> ConformalModel {
        match self {
            ConformalModel::Exp { c0, eps } => ConformalModel::Exp { c0: c0.clone(), eps: -eps },
            ConformalModel::Einstein { c5, c6 } => {
                ConformalModel::Einstein { c5: c6.clone(), c6: c5.clone() }
            }
            ConformalModel::Ratio { num, den } => {
                ConformalModel::Ratio { num: num.reflect(), den: den.reflect() }
            }
        }
    }

    fn scale(&self, s: &Coef) -> ConformalModel {
        match self {
            ConformalModel::Exp { c0, eps } => ConformalModel::Exp { c0: c0 * s, eps: *eps },
            ConformalModel::Einstein { c5, c6 } => {
                let r = (&Coef::int(1) / s).sqrt();
                ConformalModel::Einstein { c5: c5 * &r, c6: c6 * &r }
            }
            ConformalModel::Ratio { num, den } => {
                ConformalModel::Ratio { num: num.scale(s), den: den.clone() }
            }
        }
    }
}

/// An interval of `z` values; infinite endpoints are always open.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Domain {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Domain { lo, hi, lo_closed: lo_closed && lo.is_finite(), hi_closed: hi_closed && hi.is_finite() }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Domain::new(lo, hi, false, false)
    }

    pub fn real_line() -> Self {
        Domain::open(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn is_interior(&self, z: f64) -> bool {
        z > self.lo && z < self.hi
    }

    pub fn contains(&self, z: f64) -> bool {
        (z > self.lo || (self.lo_closed && z == self.lo)) && (z < self.hi || (self.hi_closed && z == self.hi))
    }

    /// Finite sampling window; an infinite end is cut `reach` units beyond
    /// the other endpoint (or at `±reach` when both ends are infinite).
    pub fn window(&self, reach: f64) -> (f64, f64) {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => (self.lo, self.hi),
            (true, false) => (self.lo, self.lo + reach),
            (false, true) => (self.hi - reach, self.hi),
            (false, false) => (-reach, reach),
        }
    }

    /// `n` interior points, shrunk 1% from the window edges and spaced
    /// logarithmically toward both ends.
    pub fn sample_grid(&self, n: usize, reach: f64) -> Vec<f64> {
        let (a, b) = self.window(reach);
        let (a, b) = (a + 0.01 * (b - a), b - 0.01 * (b - a));
        if n <= 1 {
            return vec![0.5 * (a + b)];
        }
        let half = (b - a) / 2.0;
        let m = n / 2;
        let mut pts = Vec::with_capacity(n);
        for i in 0..m {
            // u grows geometrically from 0.01 toward 1
            let u = 0.01 * 100f64.powf(i as f64 / m as f64);
            pts.push(a + half * u);
            pts.push(b - half * u);
        }
        if n % 2 == 1 {
            pts.push(a + half);
        }
        pts.sort_by(|x, y| x.total_cmp(y));
        pts
    }

    pub fn uniform_grid(&self, n: usize, reach: f64) -> Vec<f64> {
        let (a, b) = self.window(reach);
        let (a, b) = (a + 0.01 * (b - a), b - 0.01 * (b - a));
        (0..n).map(|i| a + (b - a) * i as f64 / (n.max(2) - 1) as f64).collect()
    }

    fn translate(&self, a: f64) -> Domain {
        Domain::new(self.lo - a, self.hi - a, self.lo_closed, self.hi_closed)
    }

    fn reflect(&self) -> Domain {
        Domain::new(-self.hi, -self.lo, self.hi_closed, self.lo_closed)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// A U(2)-invariant metric.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpec {
    name: String,
    profile: Profile,
    conformal: ConformalModel,
    domain: Domain,
    tag: Option<StructureTag>,
    f: Poly,
}

impl MetricSpec {
    pub fn new(
        name: impl Into<String>,
        profile: Profile,
        conformal: ConformalModel,
        domain: Domain,
        tag: Option<StructureTag>,
    ) -> Result<Self> {
        if domain.lo.is_nan() || domain.hi.is_nan() || domain.lo >= domain.hi {
            return Err(Error::InvalidMetric(format!("empty domain {domain}")));
        }
        conformal.validate()?;
        match (tag, &conformal) {
            (Some(StructureTag::Jplus), ConformalModel::Exp { eps: -1, .. })
            | (Some(StructureTag::Jminus), ConformalModel::Exp { eps: 1, .. })
            | (None | Some(StructureTag::Iplus | StructureTag::Iminus), _) => {}
            (Some(t), _) => {
                return Err(Error::InvalidMetric(format!(
                    "tag {} requires C = C0·e^({}z)",
                    t.name(),
                    if t == StructureTag::Jplus { "-" } else { "+" }
                )))
            }
        }
        if let ConformalModel::Ratio { den, .. } = &conformal {
            let grid = domain.uniform_grid(201, 8.0);
            let vals: Vec<f64> = grid.iter().map(|&z| den.eval(z).unwrap_or(f64::NAN)).collect();
            let sign = vals[0].signum();
            if vals.iter().any(|v| !v.is_finite() || *v == 0.0 || v.signum() != sign) {
                return Err(Error::InvalidMetric("ratio denominator vanishes on the domain".into()));
            }
        }
        let f = profile.expand();
        Ok(MetricSpec { name: name.into(), profile, conformal, domain, tag, f })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn conformal(&self) -> &ConformalModel {
        &self.conformal
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn tag(&self) -> Option<StructureTag> {
        self.tag
    }

    /// The expanded profile.
    pub fn f_poly(&self) -> &Poly {
        &self.f
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_domain(self, domain: Domain) -> Result<Self> {
        MetricSpec::new(self.name, self.profile, self.conformal, domain, self.tag)
    }

    fn check_interior(&self, z: f64) -> Result<()> {
        if self.domain.is_interior(z) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { z, domain: self.domain.to_string() })
        }
    }

    /// `F` and four derivatives at an interior point.
    pub fn jet_f(&self, z: f64) -> Result<Jet4<f64>> {
        self.check_interior(z)?;
        Ok(self.f.jet(z))
    }

    /// Jets of the requested powers of `C` at an interior point.
    pub fn jet_c(&self, z: f64, powers: &[Exponent]) -> Result<BTreeMap<Exponent, Jet4<f64>>> {
        self.check_interior(z)?;
        powers
            .iter()
            .map(|&p| {
                self.conformal
                    .pow_jet(z, p.to_f64())
                    .filter(|j| j.is_finite())
                    .map(|j| (p, j))
                    .ok_or(Error::SingularConformal { z, value: self.conformal.eval(z) })
            })
            .collect()
    }

    /// Jets of `F` and `C` without the domain check, in any float type.
    pub fn jets_at<T: Float>(&self, z: T) -> Result<(Jet4<T>, Jet4<T>)> {
        let zf = z.to_f64().unwrap_or(f64::NAN);
        let c = self
            .conformal
            .jet(z)
            .ok_or(Error::SingularConformal { z: zf, value: self.conformal.eval(zf) })?;
        Ok((self.f.jet(z), c))
    }

    /// The metric pulled back by `z ↦ z + a`.
    pub fn translate(&self, a: f64) -> MetricSpec {
        MetricSpec {
            name: self.name.clone(),
            profile: self.profile.translate(a),
            conformal: self.conformal.translate(a),
            domain: self.domain.translate(a),
            tag: self.tag,
            f: self.f.translate(a),
        }
    }

    /// The metric pulled back by `z ↦ -z`.
    pub fn reflect(&self) -> MetricSpec {
        MetricSpec {
            name: self.name.clone(),
            profile: self.profile.reflect(),
            conformal: self.conformal.reflect(),
            domain: self.domain.reflect(),
            tag: self.tag.map(StructureTag::reflected),
            f: self.f.reflect(),
        }
    }

    /// Multiplies the metric by a positive constant.
    pub fn scale(&self, s: &Coef) -> MetricSpec {
        MetricSpec { conformal: self.conformal.scale(s), ..self.clone() }
    }

    /// Translates a canonical profile so that `|C1| = 1` when `C1 ≠ 0`.
    pub fn normalize(&self) -> MetricSpec {
        if let Profile::Canonical(c) = &self.profile {
            let c1 = c[0].to_f64().abs();
            if c1 > 0.0 && c1 != 1.0 {
                return self.translate(0.5 * c1.ln());
            }
        }
        self.clone()
    }
}
