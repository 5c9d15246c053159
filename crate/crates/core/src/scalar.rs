//! Scalar types used as coefficients.
//!
//! [`Scalar`] is the bound for exponential-polynomial coefficients. It is
//! implemented for `f32`, `f64`, [`BigRational`] and [`Coef`], the last of
//! which carries either an exact rational or a float and degrades to a float
//! as soon as a float takes part in an operation.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::ParseError;

/// Coefficient ring for [`ExpPoly`](crate::ExpPoly).
pub trait Scalar:
    Clone + PartialEq + fmt::Debug + Num + Neg<Output = Self> + Send + Sync + 'static
{
    fn from_ratio(p: i64, q: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_finite(&self) -> bool;
    /// True when the value is represented without rounding.
    fn is_exact(&self) -> bool;

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    /// Zero test; floats compare against `tol` scaled by `1 + scale`.
    fn is_negligible(&self, tol: f64, scale: f64) -> bool {
        if self.is_exact() {
            self.is_zero()
        } else {
            self.to_f64().abs() <= tol * (1.0 + scale.abs())
        }
    }
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_ratio(p: i64, q: i64) -> Self {
                (p as f64 / q as f64) as $t
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn is_finite(&self) -> bool {
                <$t>::is_finite(*self)
            }
            fn is_exact(&self) -> bool {
                false
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for BigRational {
    fn from_ratio(p: i64, q: i64) -> Self {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn is_exact(&self) -> bool {
        true
    }
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = ToPrimitive::to_f64(r) {
        if v.is_finite() {
            return v;
        }
    }
    let (n, d) = (r.numer(), r.denom());
    let shift = n.bits() as i64 - d.bits() as i64;
    let scaled = if shift > 0 {
        BigRational::new(n.clone(), d.clone() << shift as u64)
    } else {
        BigRational::new(n.clone() << (-shift) as u64, d.clone())
    };
    ToPrimitive::to_f64(&scaled).unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

/// A coefficient that is exact until a float enters the computation.
#[derive(Clone, Debug)]
pub enum Coef {
    Exact(BigRational),
    Real(f64),
}

impl Coef {
    pub fn ratio(p: i64, q: i64) -> Self {
        Coef::Exact(BigRational::from_ratio(p, q))
    }

    pub fn int(n: i64) -> Self {
        Coef::ratio(n, 1)
    }

    pub fn real(v: f64) -> Self {
        Coef::Real(v)
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Coef::Exact(r) => Some(r),
            Coef::Real(_) => None,
        }
    }

    /// Square root, exact when the argument is a square of a rational.
    pub fn sqrt(&self) -> Coef {
        if let Coef::Exact(r) = self {
            if !r.is_negative() {
                let (n, d) = (r.numer(), r.denom());
                let (sn, sd) = (n.sqrt(), d.sqrt());
                if &(&sn * &sn) == n && &(&sd * &sd) == d {
                    return Coef::Exact(BigRational::new(sn, sd));
                }
            }
        }
        Coef::Real(self.to_f64().sqrt())
    }

    pub fn abs(&self) -> Coef {
        match self {
            Coef::Exact(r) => Coef::Exact(r.abs()),
            Coef::Real(v) => Coef::Real(v.abs()),
        }
    }

    /// Rounds to a float coefficient.
    pub fn to_real(&self) -> Coef {
        Coef::Real(self.to_f64())
    }

    fn combine(
        &self,
        other: &Coef,
        exact: impl FnOnce(&BigRational, &BigRational) -> BigRational,
        real: impl FnOnce(f64, f64) -> f64,
    ) -> Coef {
        match (self, other) {
            (Coef::Exact(a), Coef::Exact(b)) => Coef::Exact(exact(a, b)),
            _ => Coef::Real(real(self.to_f64(), other.to_f64())),
        }
    }
}

impl Default for Coef {
    fn default() -> Self {
        Coef::int(0)
    }
}

impl From<i64> for Coef {
    fn from(n: i64) -> Self {
        Coef::int(n)
    }
}

impl From<f64> for Coef {
    fn from(v: f64) -> Self {
        Coef::Real(v)
    }
}

impl From<BigRational> for Coef {
    fn from(r: BigRational) -> Self {
        Coef::Exact(r)
    }
}

impl PartialEq for Coef {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Coef::Exact(a), Coef::Exact(b)) => a == b,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Coef {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Coef::Exact(a), Coef::Exact(b)) => a.partial_cmp(b),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

macro_rules! coef_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Coef {
            type Output = Coef;
            fn $m(self, rhs: Coef) -> Coef {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Coef> for &'a Coef {
            type Output = Coef;
            fn $m(self, rhs: &'a Coef) -> Coef {
                self.combine(rhs, |a, b| a $op b, |a, b| a $op b)
            }
        }
    };
}

coef_binop!(Add, add, +);
coef_binop!(Sub, sub, -);
coef_binop!(Mul, mul, *);
coef_binop!(Div, div, /);
coef_binop!(Rem, rem, %);

impl Neg for Coef {
    type Output = Coef;
    fn neg(self) -> Coef {
        match self {
            Coef::Exact(r) => Coef::Exact(-r),
            Coef::Real(v) => Coef::Real(-v),
        }
    }
}

impl Zero for Coef {
    fn zero() -> Self {
        Coef::int(0)
    }
    fn is_zero(&self) -> bool {
        match self {
            Coef::Exact(r) => r.is_zero(),
            Coef::Real(v) => *v == 0.0,
        }
    }
}

impl One for Coef {
    fn one() -> Self {
        Coef::int(1)
    }
}

impl Num for Coef {
    type FromStrRadixErr = ParseError;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, ParseError> {
        if radix != 10 {
            return Err(ParseError::new(format!("unsupported radix {radix}")));
        }
        s.parse()
    }
}

impl Scalar for Coef {
    fn from_ratio(p: i64, q: i64) -> Self {
        Coef::ratio(p, q)
    }
    fn to_f64(&self) -> f64 {
        match self {
            Coef::Exact(r) => ratio_to_f64(r),
            Coef::Real(v) => *v,
        }
    }
    fn is_finite(&self) -> bool {
        match self {
            Coef::Exact(_) => true,
            Coef::Real(v) => v.is_finite(),
        }
    }
    fn is_exact(&self) -> bool {
        matches!(self, Coef::Exact(_))
    }
}

/// Exact values print as `p/q` (or `p`), floats in round-trip form.
impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coef::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Coef::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Coef::Real(v) => write!(f, "{:?}", v),
        }
    }
}

/// Integers and `p/q` parse exactly; anything else parses as a float.
impl FromStr for Coef {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        let s = s.trim();
        let bad = || ParseError::new(format!("invalid number `{s}`"));
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(ParseError::new(format!("zero denominator in `{s}`")));
            }
            return Ok(Coef::Exact(BigRational::new(p, q)));
        }
        if let Ok(n) = s.parse::<BigInt>() {
            return Ok(Coef::Exact(BigRational::from_integer(n)));
        }
        match s {
            "inf" | "+inf" => return Ok(Coef::Real(f64::INFINITY)),
            "-inf" => return Ok(Coef::Real(f64::NEG_INFINITY)),
            _ => {}
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        Ok(Coef::Real(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_stays_exact() {
        let a = Coef::ratio(1, 3);
        let b = Coef::ratio(2, 3);
        assert_eq!(&a + &b, Coef::int(1));
        assert!((&a * &b).is_exact());
    }

    #[test]
    fn float_is_contagious() {
        let c = &Coef::ratio(1, 2) + &Coef::real(0.25);
        assert!(!c.is_exact());
        assert_eq!(c.to_f64(), 0.75);
    }

    #[test]
    fn parse_and_print_round_trip() {
        for s in ["-9/4", "3", "0.125", "1e-7", "-2.0"] {
            let c: Coef = s.parse().unwrap();
            let again: Coef = c.to_string().parse().unwrap();
            assert_eq!(c, again);
            assert_eq!(c.is_exact(), again.is_exact());
        }
        assert!("1/0".parse::<Coef>().is_err());
        assert!("x".parse::<Coef>().is_err());
    }

    #[test]
    fn exact_sqrt_of_square() {
        assert_eq!(Coef::ratio(9, 4).sqrt(), Coef::ratio(3, 2));
        assert!(!Coef::int(2).sqrt().is_exact());
    }

    #[test]
    fn huge_rational_converts() {
        let big = BigRational::new(BigInt::from(10).pow(400), BigInt::from(10).pow(399));
        assert!((ratio_to_f64(&big) - 10.0).abs() < 1e-12);
    }
}
