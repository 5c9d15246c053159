//! Truncated derivative arithmetic.
//!
//! A [`Jet4`] holds a value and its first four derivatives at a point. Each
//! jet also records how many derivatives are valid, so differentiating or
//! feeding a jet through an operator that consumes derivatives lowers the
//! order instead of silently inventing data.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::Float;

const BINOM: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];
const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet4<T> {
    d: [T; 5],
    order: usize,
}

fn c<T: Float>(v: f64) -> T {
    T::from(v).unwrap()
}

impl<T: Float> Jet4<T> {
    /// Full jet: value followed by derivatives of orders 1..4.
    pub fn new(d: [T; 5]) -> Self {
        Jet4 { d, order: 4 }
    }

    /// Jet whose derivatives above `order` are unknown.
    pub fn with_order(mut d: [T; 5], order: usize) -> Self {
        let order = order.min(4);
        for x in d.iter_mut().skip(order + 1) {
            *x = T::nan();
        }
        Jet4 { d, order }
    }

    pub fn constant(v: T) -> Self {
        let z = T::zero();
        Jet4::new([v, z, z, z, z])
    }

    /// The identity function evaluated at `z`.
    pub fn variable(z: T) -> Self {
        let o = T::zero();
        Jet4::new([z, T::one(), o, o, o])
    }

    /// `a·e^{kz}`.
    pub fn exp_linear(a: T, k: T, z: T) -> Self {
        let v = a * (k * z).exp();
        Jet4::new([v, v * k, v * k * k, v * k * k * k, v * k * k * k * k])
    }

    pub fn value(&self) -> T {
        self.d[0]
    }

    /// The `n`-th derivative; NaN when `n` exceeds the valid order.
    pub fn d(&self, n: usize) -> T {
        self.d[n]
    }

    pub fn derivs(&self) -> [T; 5] {
        self.d
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn truncate(self, order: usize) -> Self {
        Jet4::with_order(self.d, order.min(self.order))
    }

    pub fn derive(self) -> Self {
        assert!(self.order >= 1, "cannot differentiate a jet of order 0");
        let mut d = [T::nan(); 5];
        d[..4].copy_from_slice(&self.d[1..]);
        Jet4::with_order(d, self.order - 1)
    }

    pub fn scale(self, s: T) -> Self {
        self.map(|x| x * s)
    }

    pub fn add_scalar(mut self, s: T) -> Self {
        self.d[0] = self.d[0] + s;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.d[..=self.order].iter().all(|x| x.is_finite())
    }

    fn map(self, f: impl Fn(T) -> T) -> Self {
        let mut d = self.d;
        for x in d.iter_mut().take(self.order + 1) {
            *x = f(*x);
        }
        Jet4::with_order(d, self.order)
    }

    fn taylor(&self) -> [T; 5] {
        let mut t = self.d;
        for (k, x) in t.iter_mut().enumerate() {
            *x = *x / c(FACT[k]);
        }
        t
    }

    fn from_taylor(t: [T; 5], order: usize) -> Self {
        let mut d = t;
        for (k, x) in d.iter_mut().enumerate() {
            *x = *x * c(FACT[k]);
        }
        Jet4::with_order(d, order)
    }

    pub fn recip(self) -> Self {
        Jet4::constant(T::one()) / self
    }

    /// Real power of a jet with positive value.
    pub fn powf(self, alpha: T) -> Self {
        let a = self.taylor();
        let mut b = [T::zero(); 5];
        b[0] = a[0].powf(alpha);
        for k in 1..=self.order {
            let mut acc = T::zero();
            for j in 1..=k {
                let w = (alpha + T::one()) * c(j as f64) - c(k as f64);
                acc = acc + w * a[j] * b[k - j];
            }
            b[k] = acc / (c::<T>(k as f64) * a[0]);
        }
        Jet4::from_taylor(b, self.order)
    }

    /// Integer power; works for any sign of the value.
    pub fn powi(self, n: i32) -> Self {
        let mut out = Jet4::constant(T::one()).truncate(self.order);
        for _ in 0..n.unsigned_abs() {
            out = out * self;
        }
        if n < 0 {
            out.recip()
        } else {
            out
        }
    }

    pub fn exp(self) -> Self {
        let a = self.taylor();
        let mut b = [T::zero(); 5];
        b[0] = a[0].exp();
        for k in 1..=self.order {
            let mut acc = T::zero();
            for j in 1..=k {
                acc = acc + c::<T>(j as f64) * a[j] * b[k - j];
            }
            b[k] = acc / c(k as f64);
        }
        Jet4::from_taylor(b, self.order)
    }
}

impl<T: Float> Add for Jet4<T> {
    type Output = Jet4<T>;
    fn add(self, rhs: Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut d = self.d;
        for (x, y) in d.iter_mut().zip(rhs.d) {
            *x = *x + y;
        }
        Jet4::with_order(d, order)
    }
}

impl<T: Float> Sub for Jet4<T> {
    type Output = Jet4<T>;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Float> Neg for Jet4<T> {
    type Output = Jet4<T>;
    fn neg(self) -> Self {
        self.map(|x| -x)
    }
}

impl<T: Float> Mul for Jet4<T> {
    type Output = Jet4<T>;
    fn mul(self, rhs: Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut d = [T::zero(); 5];
        for (n, out) in d.iter_mut().enumerate().take(order + 1) {
            for k in 0..=n {
                *out = *out + c::<T>(BINOM[n][k]) * self.d[k] * rhs.d[n - k];
            }
        }
        Jet4::with_order(d, order)
    }
}

impl<T: Float> Div for Jet4<T> {
    type Output = Jet4<T>;
    fn div(self, rhs: Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut h = [T::zero(); 5];
        for n in 0..=order {
            let mut acc = self.d[n];
            for k in 1..=n {
                acc = acc - c::<T>(BINOM[n][k]) * rhs.d[k] * h[n - k];
            }
            h[n] = acc / rhs.d[0];
        }
        Jet4::with_order(h, order)
    }
}

impl<T: Float> Mul<T> for Jet4<T> {
    type Output = Jet4<T>;
    fn mul(self, rhs: T) -> Self {
        self.scale(rhs)
    }
}

impl<T: Float> Add<T> for Jet4<T> {
    type Output = Jet4<T>;
    fn add(self, rhs: T) -> Self {
        self.add_scalar(rhs)
    }
}

impl<T: Float> Sub<T> for Jet4<T> {
    type Output = Jet4<T>;
    fn sub(self, rhs: T) -> Self {
        self.add_scalar(-rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn product_and_quotient_match_closed_forms() {
        let z = 0.3;
        let x = Jet4::variable(z);
        let e = Jet4::exp_linear(1.0, 1.0, z);
        let p = x * e;
        // (z e^z)^(n) = (z + n) e^z
        for n in 0..5 {
            assert!(close(p.d(n), (z + n as f64) * z.exp()));
        }
        let q = p / e;
        assert!(close(q.value(), z) && close(q.d(1), 1.0) && q.d(2).abs() < 1e-12);
    }

    #[test]
    fn powf_matches_exponential() {
        let z = -0.7;
        let e = Jet4::exp_linear(2.0, -1.0, z);
        let h = e.powf(0.5);
        let want = Jet4::exp_linear(2f64.sqrt(), -0.5, z);
        for n in 0..5 {
            assert!(close(h.d(n), want.d(n)));
        }
        let m = e.powi(-3);
        let want = Jet4::exp_linear(0.125, 3.0, z);
        for n in 0..5 {
            assert!(close(m.d(n), want.d(n)));
        }
    }

    #[test]
    fn derive_drops_order() {
        let j = Jet4::exp_linear(1.0, 2.0, 0.0).derive().derive();
        assert_eq!(j.order(), 2);
        assert!(j.d(3).is_nan());
        let k = j * Jet4::constant(1.0);
        assert_eq!(k.order(), 2);
    }

    #[test]
    fn exp_of_linear_jet() {
        let z = 0.4;
        let j = (Jet4::variable(z) * 3.0).exp();
        let want = Jet4::exp_linear(1.0, 3.0, z);
        for n in 0..5 {
            assert!(close(j.d(n), want.d(n)));
        }
    }

    #[test]
    fn works_in_single_precision() {
        let j = Jet4::exp_linear(1.0f32, 1.0, 0.0).powf(2.0);
        assert!((j.d(4) - 16.0).abs() < 1e-4);
    }
}
