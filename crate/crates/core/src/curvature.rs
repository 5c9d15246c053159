//! Pointwise curvature of `g = C(dz²/(4F) + F(η¹)² + (η²)² + (η³)²)`.
//!
//! Tensor components are reported as coefficient pairs in the fixed frame
//! `σ⁰ = ½C^{1/2}F^{-1/2}dz`, `σ¹ = C^{1/2}F^{1/2}η¹`, `σ^{2,3} = C^{1/2}η^{2,3}`:
//! the trace-free Ricci tensor is `a·((σ⁰)²−(σ¹)²) + b·((σ⁰)²+(σ¹)²−(σ²)²−(σ³)²)`
//! and the Bach tensor is `B1·(−2(σ¹)²+(σ²)²+(σ³)²) + B2·(−(σ⁰)²−(σ¹)²+(σ²)²+(σ³)²)`.

use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exppoly::{ExpPoly, Exponent};
use crate::jet::Jet4;
use crate::operators::{b_op, l_compose, l_op, Carrier, OperatorSign};
use crate::profiles::{ConformalModel, MetricSpec, StructureTag};
use crate::quadrature::adaptive_simpson;
use crate::scalar::Coef;
use crate::Poly;

fn k<T: Float>(v: f64) -> T {
    T::from(v).unwrap()
}

/// Scalar curvature as a jet (two derivatives fewer than the inputs).
pub fn scalar_jet<T: Float>(f: &Jet4<T>, c: &Jet4<T>) -> Jet4<T> {
    let h = c.powf(k(0.5));
    let inner = (*f * h.derive()).derive();
    let first = (f.derive().derive() + f.scale(k(0.5))).add_scalar(k(-2.0)) / *c;
    first.scale(k(-4.0)) - (c.powf(k(-1.5)) * inner).scale(k(24.0))
}

/// Trace-free Ricci coefficients `(a, b)`.
pub fn tf_ricci_kernel<T: Float>(f: &Jet4<T>, c: &Jet4<T>) -> (T, T) {
    let g = c.powf(k(-0.5));
    let g1 = g.derive();
    let g2 = g1.derive();
    let a = k::<T>(4.0) * f.value() * g.value() * (g2.value() - g.value() / k(4.0));
    let fg = (*f * g1).derive();
    let tail = (k::<T>(0.5) * f.d(2) - k::<T>(0.75) * f.value() + T::one()) / c.value();
    let b = k::<T>(2.0) * (g.value() * fg.value() - tail);
    (a, b)
}

/// `L±F − 1` as a jet.
pub fn weyl_factor<T: Float>(sign: OperatorSign, f: &Jet4<T>) -> Jet4<T> {
    l_op(sign, f).add_scalar(-T::one())
}

/// `P± = e^{±3z/2}(L±F − 1)√C` as a jet.
pub fn potential_jet<T: Float>(sign: OperatorSign, f: &Jet4<T>, c: &Jet4<T>, z: T) -> Jet4<T> {
    let e = Jet4::exp_linear(T::one(), k::<T>(1.5) * T::from(sign.sign()).unwrap(), z);
    e * weyl_factor(sign, f) * c.powf(k(0.5))
}

/// Bach coefficients `(B1, B2)`.
pub fn bach_kernel<T: Float>(f: &Jet4<T>, c: &Jet4<T>) -> (T, T) {
    let c2 = c.value() * c.value();
    let b1 = k::<T>(16.0 / 3.0) * f.value() * (l_compose(f).value() - T::one()) / c2;
    let b2 = k::<T>(8.0 / 3.0) * b_op(&f.truncate(3)).value() / c2;
    (b1, b2)
}

/// Kähler Ricci-form coefficients for `C = C0e^{-z}`.
pub fn ricci_form_kernel<T: Float>(f: &Jet4<T>, c: &Jet4<T>) -> (T, T) {
    let two_over_c = k::<T>(2.0) / c.value();
    let plus = -two_over_c * (weyl_factor(OperatorSign::Plus, f).value());
    let other = -k::<T>(0.5) * f.d(2) + k::<T>(0.5) * f.d(1) + f.value() - T::one();
    (plus, -two_over_c * other)
}

/// Every curvature quantity at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub z: f64,
    pub f: f64,
    pub c: f64,
    pub s: f64,
    pub ric0_a: f64,
    pub ric0_b: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub w_plus_norm2: f64,
    pub w_minus_norm2: f64,
    pub delw_plus_pot: f64,
    pub delw_minus_pot: f64,
    pub bach_b1: f64,
    pub bach_b2: f64,
    pub rho_plus: Option<f64>,
    pub rho_minus: Option<f64>,
}

/// Result of [`delta_w_potential`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaW {
    Potential(f64),
    /// The corresponding half of the Weyl tensor vanishes identically.
    WeylHalfZero,
}

fn jets(m: &MetricSpec, z: f64) -> Result<(Jet4<f64>, Jet4<f64>)> {
    let f = m.jet_f(z)?;
    if f.value() == 0.0 {
        return Err(Error::SingularProfile { z });
    }
    let c = m
        .conformal()
        .jet(z)
        .filter(|c| c.is_finite())
        .ok_or(Error::SingularConformal { z, value: m.conformal().eval(z) })?;
    Ok((f, c))
}

fn finite(v: f64, z: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::SingularProfile { z })
    }
}

pub fn scalar_curvature(m: &MetricSpec, z: f64) -> Result<f64> {
    let (f, c) = jets(m, z)?;
    finite(scalar_jet(&f, &c).value(), z)
}

pub fn tf_ricci(m: &MetricSpec, z: f64) -> Result<(f64, f64)> {
    let (f, c) = jets(m, z)?;
    let (a, b) = tf_ricci_kernel(&f, &c);
    Ok((finite(a, z)?, finite(b, z)?))
}

/// `(w⁺, w⁻, |W⁺|², |W⁻|²)`.
pub fn weyl(m: &MetricSpec, z: f64) -> Result<(f64, f64, f64, f64)> {
    let (f, c) = jets(m, z)?;
    let lp = weyl_factor(OperatorSign::Plus, &f).value();
    let lm = weyl_factor(OperatorSign::Minus, &f).value();
    let cv = c.value();
    let norm = |x: f64| 32.0 / 3.0 * x * x / (cv * cv);
    Ok((-lp / cv, -lm / cv, norm(lp), norm(lm)))
}

/// True when `L±F − 1` vanishes identically.
pub fn weyl_half_vanishes(m: &MetricSpec, sign: OperatorSign) -> bool {
    l_op(sign, m.f_poly()).shift_const(-1, 1).prune(1e-12).is_zero()
}

pub fn delta_w_potential(m: &MetricSpec, sign: OperatorSign, z: f64) -> Result<DeltaW> {
    if weyl_half_vanishes(m, sign) {
        return Ok(DeltaW::WeylHalfZero);
    }
    let (f, c) = jets(m, z)?;
    Ok(DeltaW::Potential(finite(potential_jet(sign, &f, &c, z).value(), z)?))
}

pub fn bach(m: &MetricSpec, z: f64) -> Result<(f64, f64)> {
    let (f, c) = jets(m, z)?;
    let (b1, b2) = bach_kernel(&f, &c);
    Ok((finite(b1, z)?, finite(b2, z)?))
}

/// Ricci-form coefficients of a Kähler metric. A `Jminus` metric is
/// evaluated through its mirror image under `z ↦ -z`.
pub fn ricci_form_kahler(m: &MetricSpec, z: f64) -> Result<(f64, f64)> {
    match (m.tag(), m.conformal()) {
        (Some(StructureTag::Jplus), ConformalModel::Exp { eps: -1, .. }) => {
            let (f, c) = jets(m, z)?;
            Ok(ricci_form_kernel(&f, &c))
        }
        (Some(StructureTag::Jminus), ConformalModel::Exp { eps: 1, .. }) => {
            ricci_form_kahler(&m.reflect(), -z)
        }
        _ => Err(Error::NotKahler(format!(
            "{} needs tag Jplus with C0·e^(-z) or Jminus with C0·e^(z)",
            m.name()
        ))),
    }
}

pub fn sample(m: &MetricSpec, z: f64) -> Result<CurvatureSample> {
    let (f, c) = jets(m, z)?;
    let s = scalar_jet(&f, &c).value();
    let (ric0_a, ric0_b) = tf_ricci_kernel(&f, &c);
    let (w_plus, w_minus, w_plus_norm2, w_minus_norm2) = weyl(m, z)?;
    let (bach_b1, bach_b2) = bach_kernel(&f, &c);
    let rho = ricci_form_kahler(m, z).ok();
    let out = CurvatureSample {
        z,
        f: f.value(),
        c: c.value(),
        s,
        ric0_a,
        ric0_b,
        w_plus,
        w_minus,
        w_plus_norm2,
        w_minus_norm2,
        delw_plus_pot: potential_jet(OperatorSign::Plus, &f, &c, z).value(),
        delw_minus_pot: potential_jet(OperatorSign::Minus, &f, &c, z).value(),
        bach_b1,
        bach_b2,
        rho_plus: rho.map(|r| r.0),
        rho_minus: rho.map(|r| r.1),
    };
    let all = [s, ric0_a, ric0_b, w_plus, w_minus, bach_b1, bach_b2];
    if all.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::SingularProfile { z })
    }
}

/// Scalar curvature as an exact exponential polynomial, available when `C`
/// is of exponential or Einstein type.
pub fn scalar_curvature_poly(m: &MetricSpec) -> Option<Poly> {
    let f = m.f_poly();
    let f1 = f.derive(1);
    let f2 = f.derive(2);
    let two = Coef::int(2);
    match m.conformal() {
        ConformalModel::Exp { c0, eps } => {
            // −(4/C0)e^{−εz}(F″ + 3εF′ + 2F − 2)
            let e = Coef::int(*eps as i64);
            let inner = &(&f2 + &f1.scale(&(&Coef::int(3) * &e))) + &f.scale(&two);
            let inner = &inner - &ExpPoly::constant(two);
            let factor = &Coef::int(-4) / c0;
            Some(inner.shift(Exponent::int(-(*eps as i32))).scale(&factor))
        }
        ConformalModel::Einstein { c5, c6 } => {
            // e^{z}[−4D²(F″ + ½F − 2) + 24((P′ − ½P)D − 2PD′)], P = F(½D + D′)
            let d = ConformalModel::einstein_denominator(c5, c6);
            let d1 = d.derive(1);
            let half = Coef::ratio(1, 2);
            let p = f * &(&d.scale(&half) + &d1);
            let p1 = p.derive(1);
            let shape = &(&f2 + &f.scale(&half)) - &ExpPoly::constant(two.clone());
            let a = (&(&d * &d) * &shape).scale(&Coef::int(-4));
            let b = &(&(&p1 - &p.scale(&half)) * &d) - &(&p * &d1).scale(&two);
            Some((&a + &b.scale(&Coef::int(24))).shift(Exponent::int(1)))
        }
        ConformalModel::Ratio { .. } => None,
    }
}

/// `∫ (16/3)(L⁺F − 1)² dz` over `[a, b]` for a profile given by its jets.
pub fn weyl_energy_with(f: impl Fn(f64) -> Jet4<f64>, a: f64, b: f64) -> Result<f64> {
    adaptive_simpson(
        |z| {
            let w = weyl_factor(OperatorSign::Plus, &f(z)).value();
            16.0 / 3.0 * w * w
        },
        a,
        b,
        1e-10,
        40,
    )
}

/// Weyl energy per unit volume of the η-frame 3-sphere.
pub fn weyl_energy(m: &MetricSpec, a: f64, b: f64) -> Result<f64> {
    let d = m.domain();
    if !(d.contains(a) || d.is_interior(a)) || !(d.contains(b) || d.is_interior(b)) || a > b {
        let bad = if d.contains(a) { b } else { a };
        return Err(Error::OutOfDomain { z: bad, domain: d.to_string() });
    }
    weyl_energy_with(|z| m.f_poly().jet(z), a, b)
}

/// `∫ (32/3)·f·(L⁻L⁺F − 1) dz`, the first variation of the Weyl energy in
/// the direction `f`.
pub fn weyl_energy_variation(
    profile: impl Fn(f64) -> Jet4<f64>,
    direction: impl Fn(f64) -> Jet4<f64>,
    a: f64,
    b: f64,
) -> Result<f64> {
    adaptive_simpson(
        |z| 32.0 / 3.0 * direction(z).value() * (l_compose(&profile(z)).value() - 1.0),
        a,
        b,
        1e-10,
        40,
    )
}

/// Smooth bump `exp(−1/(1 − x²))`, `x = (z − center)/half_width`,
/// supported on `|x| < 1`.
pub fn bump_jet(z: f64, center: f64, half_width: f64) -> Jet4<f64> {
    let x = Jet4::new([(z - center) / half_width, 1.0 / half_width, 0.0, 0.0, 0.0]);
    let u = Jet4::constant(1.0) - x * x;
    if u.value() <= 0.0 {
        return Jet4::constant(0.0);
    }
    (-u.recip()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{Domain, Profile};

    fn q(p: i64, d: i64) -> Coef {
        Coef::ratio(p, d)
    }

    fn tn_poly() -> Poly {
        ExpPoly::from_terms([
            (Exponent::ZERO, q(1, 1)),
            (Exponent::int(-1), q(-2, 1)),
            (Exponent::int(-2), q(1, 1)),
        ])
    }

    fn metric(f: Poly, c: ConformalModel, d: Domain, tag: Option<StructureTag>) -> MetricSpec {
        MetricSpec::new("t", Profile::Poly(f), c, d, tag).unwrap()
    }

    #[test]
    fn flat_space_is_flat() {
        let m = metric(ExpPoly::one(), ConformalModel::exp(q(1, 1), -1), Domain::real_line(), None);
        let s = sample(&m, 0.3).unwrap();
        for v in [s.s, s.ric0_a, s.ric0_b, s.w_plus, s.w_minus, s.bach_b1, s.bach_b2] {
            assert!(v.abs() < 1e-14);
        }
    }

    #[test]
    fn modified_taub_nut_second_kind() {
        let m = metric(tn_poly(), ConformalModel::exp(q(1, 1), -1), Domain::open(0.0, f64::INFINITY), None);
        for z in [0.2, 1.0, 3.0] {
            let want = 48.0 * (1.0 - (-z).exp());
            assert!((scalar_curvature(&m, z).unwrap() - want).abs() < 1e-11 * want.abs());
        }
        let (a, b) = tf_ricci(&m, 1.0).unwrap();
        assert!(a.abs() + b.abs() > 1e-3);
    }

    #[test]
    fn exact_scalar_matches_pointwise() {
        let f = tn_poly();
        let models = [
            ConformalModel::exp(q(3, 2), -1),
            ConformalModel::exp(q(2, 1), 1),
            ConformalModel::einstein(q(1, 2), q(-1, 2)),
            ConformalModel::einstein(q(2, 3), q(1, 5)),
        ];
        for c in models {
            let m = metric(f.clone(), c, Domain::open(0.0, f64::INFINITY), None);
            let s = scalar_curvature_poly(&m).unwrap();
            for z in [0.3, 0.9, 2.0] {
                let (a, b) = (s.eval(z).unwrap(), scalar_curvature(&m, z).unwrap());
                assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn taub_nut_is_ricci_flat_and_self_dual() {
        let m = metric(
            tn_poly(),
            ConformalModel::einstein(q(1, 2), q(-1, 2)),
            Domain::open(0.0, f64::INFINITY),
            None,
        );
        for z in [0.1, 0.7, 2.5] {
            let s = sample(&m, z).unwrap();
            assert!(s.s.abs() < 1e-10 && s.ric0_a.abs() < 1e-10 && s.ric0_b.abs() < 1e-10);
            assert!(s.w_minus.abs() < 1e-14);
            assert!((s.delw_plus_pot + 12.0).abs() < 1e-10);
        }
        assert_eq!(delta_w_potential(&m, OperatorSign::Minus, 1.0).unwrap(), DeltaW::WeylHalfZero);
    }

    #[test]
    fn super_taub_nut_weyl_halves() {
        let sq = ExpPoly::from_terms([(Exponent::ZERO, q(1, 1)), (Exponent::int(1), q(1, 1))]);
        let m = MetricSpec::new(
            "stn",
            Profile::Squared(sq),
            ConformalModel::einstein(q(1, 1), q(1, 1)),
            Domain::real_line(),
            None,
        )
        .unwrap();
        assert!(weyl_half_vanishes(&m, OperatorSign::Plus));
        for z in [-1.0, 0.0, 0.8] {
            let (wp, _, _, nm) = weyl(&m, z).unwrap();
            assert!(wp.abs() < 1e-14);
            let want = 384.0 * (1.0 + z.exp()).powi(6);
            assert!((nm - want).abs() < 1e-10 * want);
        }
    }

    #[test]
    fn kahler_potential_constant() {
        let f = crate::profiles::canonical_poly(&[q(0, 1), q(3, 5), q(-2, 1), q(7, 3)]);
        let c0 = 2.0f64;
        let m = metric(f, ConformalModel::exp(Coef::real(c0), -1), Domain::real_line(), Some(StructureTag::Jplus));
        for z in [-0.5, 0.4, 1.3] {
            let DeltaW::Potential(p) = delta_w_potential(&m, OperatorSign::Plus, z).unwrap() else {
                panic!()
            };
            assert!((p - 3.0 * 0.6 * c0.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn bach_of_cubic_profile() {
        let f = ExpPoly::from_terms([(Exponent::ZERO, q(1, 1)), (Exponent::int(3), q(1, 1))]);
        let m = metric(f.clone(), ConformalModel::exp(q(1, 1), -1), Domain::real_line(), None);
        let (b1, b2) = bach(&m, 0.0).unwrap();
        assert!((b1 - 320.0 / 3.0).abs() < 1e-10);
        let bf = crate::operators::b_op(&f).eval(0.0).unwrap();
        assert!((b2 - 8.0 / 3.0 * bf).abs() < 1e-10);
    }

    #[test]
    fn ricci_form_and_scalar_consistency() {
        let m = metric(tn_poly(), ConformalModel::exp(q(1, 1), -1), Domain::open(0.0, f64::INFINITY), Some(StructureTag::Jplus));
        for z in [0.5, 1.5] {
            let (rp, _) = ricci_form_kahler(&m, z).unwrap();
            let s = scalar_curvature(&m, z).unwrap();
            assert!((s - 4.0 * rp).abs() < 1e-10 * (1.0 + s.abs()));
        }
        let plain = metric(tn_poly(), ConformalModel::exp(q(1, 1), -1), Domain::real_line(), None);
        assert!(matches!(ricci_form_kahler(&plain, 0.5), Err(Error::NotKahler(_))));
    }

    #[test]
    fn weyl_energy_closed_form() {
        let m = metric(tn_poly(), ConformalModel::exp(q(1, 1), -1), Domain::open(0.0, f64::INFINITY), None);
        // (16/3)·36·∫(e^{-2z} − 2e^{-3z} + e^{-4z})
        let prim = |z: f64| -(-2.0 * z).exp() / 2.0 + 2.0 * (-3.0 * z).exp() / 3.0 - (-4.0 * z).exp() / 4.0;
        let want = 16.0 / 3.0 * 36.0 * (prim(1.0) - prim(0.5));
        assert!((weyl_energy(&m, 0.5, 1.0).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn bump_is_smooth_and_compact() {
        let b = bump_jet(0.0, 0.0, 1.0);
        assert!((b.value() - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(bump_jet(1.5, 0.0, 1.0).value(), 0.0);
        let h = 1e-5;
        let d = (bump_jet(0.3 + h, 0.0, 1.0).value() - bump_jet(0.3 - h, 0.0, 1.0).value()) / (2.0 * h);
        assert!((d - bump_jet(0.3, 0.0, 1.0).d(1)).abs() < 1e-8);
    }
}
