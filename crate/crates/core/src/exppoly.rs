//! Exponential polynomials `Σ a_k e^{kz}` with half-integer exponents.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::Float;

use crate::error::{Error, ParseError, Result};
use crate::jet::Jet4;
use crate::scalar::{Coef, Scalar};

/// An exponent `k/2`, stored as the integer `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent(i32);

impl Exponent {
    pub const ZERO: Exponent = Exponent(0);

    pub fn int(k: i32) -> Self {
        Exponent(2 * k)
    }

    pub fn halves(h: i32) -> Self {
        Exponent(h)
    }

    /// Accepts `p/q` only when it reduces to a denominator of 1 or 2.
    pub fn from_ratio(p: i64, q: i64) -> std::result::Result<Self, ParseError> {
        if q == 0 {
            return Err(ParseError::new("exponent with zero denominator"));
        }
        let num = 2 * p;
        if num % q != 0 {
            return Err(ParseError::new(format!(
                "exponent {p}/{q} is not an integer or half-integer"
            )));
        }
        Ok(Exponent((num / q) as i32))
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn to_scalar<T: Scalar>(self) -> T {
        T::from_ratio(self.0 as i64, 2)
    }

    /// Reduced `(p, q)` with `q ∈ {1, 2}`.
    pub fn ratio(self) -> (i32, i32) {
        if self.0 % 2 == 0 {
            (self.0 / 2, 1)
        } else {
            (self.0, 2)
        }
    }
}

impl Add for Exponent {
    type Output = Exponent;
    fn add(self, rhs: Exponent) -> Exponent {
        Exponent(self.0 + rhs.0)
    }
}

impl Neg for Exponent {
    type Output = Exponent;
    fn neg(self) -> Exponent {
        Exponent(-self.0)
    }
}

/// Always written as `p/q`.
impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (p, q) = self.ratio();
        write!(f, "{p}/{q}")
    }
}

impl FromStr for Exponent {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        let bad = || ParseError::new(format!("invalid exponent `{s}`"));
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (
                p.trim().parse::<i64>().map_err(|_| bad())?,
                q.trim().parse::<i64>().map_err(|_| bad())?,
            ),
            None => (s.trim().parse::<i64>().map_err(|_| bad())?, 1),
        };
        Exponent::from_ratio(p, q)
    }
}

/// `Σ a_k e^{kz}`; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpPoly<T: Scalar> {
    terms: BTreeMap<Exponent, T>,
}

/// Arithmetic selector for [`ExpPoly::arith`].
#[derive(Clone, Debug)]
pub enum ArithOp<T> {
    Add,
    Sub,
    Mul,
    Scale(T),
}

impl<T: Scalar> Default for ExpPoly<T> {
    fn default() -> Self {
        ExpPoly::zero()
    }
}

impl<T: Scalar> ExpPoly<T> {
    pub fn zero() -> Self {
        ExpPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: T) -> Self {
        ExpPoly::monomial(Exponent::ZERO, c)
    }

    pub fn one() -> Self {
        ExpPoly::constant(T::one())
    }

    pub fn monomial(k: Exponent, c: T) -> Self {
        let mut p = ExpPoly::zero();
        p.accumulate(k, c);
        p
    }

    /// Sums repeated exponents and drops zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = (Exponent, T)>) -> Self {
        let mut p = ExpPoly::zero();
        for (k, c) in terms {
            p.accumulate(k, c);
        }
        p
    }

    fn accumulate(&mut self, k: Exponent, c: T) {
        let sum = match self.terms.remove(&k) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(k, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exponent, &T)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn coeff(&self, k: Exponent) -> T {
        self.terms.get(&k).cloned().unwrap_or_else(T::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_exponent(&self) -> Option<Exponent> {
        self.terms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<Exponent> {
        self.terms.keys().next_back().copied()
    }

    pub fn is_exact(&self) -> bool {
        self.terms.values().all(Scalar::is_exact)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: &T) -> Self {
        ExpPoly::from_terms(self.terms().map(|(k, c)| (k, c.clone() * s.clone())))
    }

    /// Multiplication by `e^{kz}`.
    pub fn shift(&self, k: Exponent) -> Self {
        ExpPoly { terms: self.terms().map(|(e, c)| (e + k, c.clone())).collect() }
    }

    /// The substitution `z ↦ -z`.
    pub fn reflect(&self) -> Self {
        ExpPoly { terms: self.terms().map(|(e, c)| (-e, c.clone())).collect() }
    }

    pub fn derive(&self, order: u32) -> Self {
        ExpPoly::from_terms(self.terms().map(|(k, c)| {
            let kk: T = k.to_scalar();
            let mut f = T::one();
            for _ in 0..order {
                f = f * kk.clone();
            }
            (k, c.clone() * f)
        }))
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(ExpPoly::one(), |acc, _| &acc * self)
    }

    /// Arithmetic that reports non-finite float coefficients as errors.
    pub fn arith(&self, other: &Self, op: ArithOp<T>) -> Result<Self> {
        let out = match op {
            ArithOp::Add => self + other,
            ArithOp::Sub => self - other,
            ArithOp::Mul => self * other,
            ArithOp::Scale(s) => self.scale(&s),
        };
        if out.terms.values().all(Scalar::is_finite) {
            Ok(out)
        } else {
            Err(Error::NonFinite("exponential-polynomial arithmetic"))
        }
    }

    /// Value at `z`, summing terms in increasing exponent order.
    pub fn eval(&self, z: f64) -> Result<f64> {
        let mut sum = 0.0;
        for (k, c) in self.terms() {
            let term = c.to_f64() * (k.to_f64() * z).exp();
            sum += term;
            if !term.is_finite() || !sum.is_finite() {
                return Err(Error::Overflow { exponent: k.to_string() });
            }
        }
        Ok(sum)
    }

    /// Value and four derivatives at `z`.
    pub fn jet<F: Float>(&self, z: F) -> Jet4<F> {
        let mut d = [F::zero(); 5];
        for (k, c) in self.terms() {
            let kf = F::from(k.to_f64()).unwrap();
            let mut v = F::from(c.to_f64()).unwrap() * (kf * z).exp();
            for x in d.iter_mut() {
                *x = *x + v;
                v = v * kf;
            }
        }
        Jet4::new(d)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> ExpPoly<U> {
        ExpPoly::from_terms(self.terms().map(|(k, c)| (k, f(c))))
    }

    pub fn to_f64(&self) -> ExpPoly<f64> {
        self.map(|c| c.to_f64())
    }

    /// Coefficients that are negligible relative to the largest one are
    /// dropped; exact coefficients are kept unless zero.
    pub fn prune(&self, tol: f64) -> Self {
        let scale = self.max_abs_coeff();
        ExpPoly::from_terms(
            self.terms().filter(|(_, c)| !c.is_negligible(tol, scale)).map(|(k, c)| (k, c.clone())),
        )
    }
}

impl ExpPoly<Coef> {
    /// `p(z + a)`; coefficients become floats unless `a = 0`.
    pub fn translate(&self, a: f64) -> Self {
        if a == 0.0 {
            return self.clone();
        }
        ExpPoly::from_terms(
            self.terms().map(|(k, c)| (k, c * &Coef::real((k.to_f64() * a).exp()))),
        )
    }

    /// Writes `term p/q c` lines.
    pub fn term_lines(&self, prefix: &str) -> Vec<String> {
        self.terms().map(|(k, c)| format!("{prefix}term {k} {c}")).collect()
    }

    /// Parses the `<p>/<q> <coefficient>` payload of a `term` line.
    pub fn parse_term(s: &str) -> std::result::Result<(Exponent, Coef), ParseError> {
        let mut it = s.split_whitespace();
        let (Some(k), Some(c), None) = (it.next(), it.next(), it.next()) else {
            return Err(ParseError::new(format!("expected `<p>/<q> <coefficient>`, got `{s}`")));
        };
        let c: Coef = c.parse()?;
        if !c.is_finite() {
            return Err(ParseError::new(format!("non-finite coefficient in `{s}`")));
        }
        Ok((k.parse()?, c))
    }
}

impl<'a, T: Scalar> Add<&'a ExpPoly<T>> for &'a ExpPoly<T> {
    type Output = ExpPoly<T>;
    fn add(self, rhs: &'a ExpPoly<T>) -> ExpPoly<T> {
        let mut out = self.clone();
        for (k, c) in rhs.terms() {
            out.accumulate(k, c.clone());
        }
        out
    }
}

impl<'a, T: Scalar> Sub<&'a ExpPoly<T>> for &'a ExpPoly<T> {
    type Output = ExpPoly<T>;
    fn sub(self, rhs: &'a ExpPoly<T>) -> ExpPoly<T> {
        let mut out = self.clone();
        for (k, c) in rhs.terms() {
            out.accumulate(k, -c.clone());
        }
        out
    }
}

impl<'a, T: Scalar> Mul<&'a ExpPoly<T>> for &'a ExpPoly<T> {
    type Output = ExpPoly<T>;
    fn mul(self, rhs: &'a ExpPoly<T>) -> ExpPoly<T> {
        let mut out = ExpPoly::zero();
        for (a, x) in self.terms() {
            for (b, y) in rhs.terms() {
                out.accumulate(a + b, x.clone() * y.clone());
            }
        }
        out
    }
}

impl<T: Scalar> Neg for &ExpPoly<T> {
    type Output = ExpPoly<T>;
    fn neg(self) -> ExpPoly<T> {
        ExpPoly { terms: self.terms().map(|(k, c)| (k, -c.clone())).collect() }
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl<T: Scalar> $tr for ExpPoly<T> {
            type Output = ExpPoly<T>;
            fn $m(self, rhs: ExpPoly<T>) -> ExpPoly<T> {
                (&self).$m(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl<T: Scalar> Neg for ExpPoly<T> {
    type Output = ExpPoly<T>;
    fn neg(self) -> ExpPoly<T> {
        -&self
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for ExpPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if k == Exponent::ZERO {
                write!(f, "{c}")?;
            } else {
                write!(f, "({c})·e^({}z)", k.to_f64())?;
            }
        }
        Ok(())
    }
}
