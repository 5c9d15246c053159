//! The linear operators `L±`, their composition, and the first-integral
//! operator `B(F,F)`.
//!
//! Every formula is written once against [`Carrier`], which is implemented
//! by exact [`ExpPoly`] values and by pointwise [`Jet4`] values.

use num_traits::Float;
use serde::Serialize;

use crate::exppoly::ExpPoly;
use crate::jet::Jet4;
use crate::profiles::Profile;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum OperatorSign {
    Plus,
    Minus,
}

impl OperatorSign {
    pub fn sign(self) -> i64 {
        match self {
            OperatorSign::Plus => 1,
            OperatorSign::Minus => -1,
        }
    }
}

/// Something that can be differentiated and combined linearly.
pub trait Carrier: Clone {
    fn dz(&self) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    /// Multiplication by `p/q`.
    fn ratio(&self, p: i64, q: i64) -> Self;
    /// Addition of the constant `p/q`.
    fn shift_const(&self, p: i64, q: i64) -> Self;

    fn minus(&self, other: &Self) -> Self {
        self.plus(&other.ratio(-1, 1))
    }
}

impl<T: Scalar> Carrier for ExpPoly<T> {
    fn dz(&self) -> Self {
        self.derive(1)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn ratio(&self, p: i64, q: i64) -> Self {
        self.scale(&T::from_ratio(p, q))
    }
    fn shift_const(&self, p: i64, q: i64) -> Self {
        self + &ExpPoly::constant(T::from_ratio(p, q))
    }
}

impl<T: Float> Carrier for Jet4<T> {
    fn dz(&self) -> Self {
        self.derive()
    }
    fn plus(&self, other: &Self) -> Self {
        *self + *other
    }
    fn times(&self, other: &Self) -> Self {
        *self * *other
    }
    fn ratio(&self, p: i64, q: i64) -> Self {
        self.scale(T::from(p).unwrap() / T::from(q).unwrap())
    }
    fn shift_const(&self, p: i64, q: i64) -> Self {
        self.add_scalar(T::from(p).unwrap() / T::from(q).unwrap())
    }
}

/// `L±F = ½F″ ∓ (3/2)F′ + F`.
pub fn l_op<C: Carrier>(sign: OperatorSign, f: &C) -> C {
    let d1 = f.dz();
    d1.dz().ratio(1, 2).plus(&d1.ratio(-3 * sign.sign(), 2)).plus(f)
}

/// `L⁺L⁻F = ¼F⁗ − (5/4)F″ + F`.
pub fn l_compose<C: Carrier>(f: &C) -> C {
    let d2 = f.dz().dz();
    d2.dz().dz().ratio(1, 4).plus(&d2.ratio(-5, 4)).plus(f)
}

/// `B(F,F) = (−½F″ + (3/2)F′ + F − 1)(L⁺F − 1) + F′·(L⁺F)′`.
pub fn b_op<C: Carrier>(f: &C) -> C {
    let d1 = f.dz();
    let d2 = d1.dz();
    let first = d2.ratio(-1, 2).plus(&d1.ratio(3, 2)).plus(f).shift_const(-1, 1);
    let lp = l_op(OperatorSign::Plus, f);
    first.times(&lp.shift_const(-1, 1)).plus(&d1.times(&lp.dz()))
}

/// `dB/dz − 2F′(L⁺L⁻F − 1)`, which vanishes identically.
pub fn first_integral_defect<C: Carrier>(f: &C) -> C {
    let rhs = f.dz().times(&l_compose(f).shift_const(-1, 1)).ratio(2, 1);
    b_op(f).dz().minus(&rhs)
}

/// Eigenvalue of `L±` on `e^{kz}`: `(k ∓ 1)(k ∓ 2)/2`.
pub fn l_eigenvalue<T: Scalar>(sign: OperatorSign, k: &T) -> T {
    let s = T::from_int(sign.sign());
    let two = T::from_int(2);
    (k.clone() - s.clone()) * (k.clone() - s * two.clone()) / two
}

/// Eigenvalue of `L⁺L⁻` on `e^{kz}`: `(k² − 1)(k² − 4)/4`.
pub fn l_compose_eigenvalue<T: Scalar>(k: &T) -> T {
    let k2 = k.clone() * k.clone();
    (k2.clone() - T::one()) * (k2 - T::from_int(4)) / T::from_int(4)
}

/// Largest `|dB/dz − 2F′(L⁺L⁻F − 1)|` over `grid`, computed from the
/// exact expansion of the profile.
pub fn first_integral_residual(profile: &Profile, grid: &[f64]) -> f64 {
    let defect = first_integral_defect(&profile.expand());
    grid.iter()
        .map(|&z| defect.eval(z).map(f64::abs).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

/// Five-point central derivative of uniformly spaced samples, with
/// one-sided five-point stencils at the two ends on each side.
pub fn five_point_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 5, "five-point differences need at least five samples");
    let v = values;
    let r = |i: usize| v[n - 1 - i];
    (0..n)
        .map(|i| {
            let d = match i {
                0 => -25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4],
                1 => -3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4],
                _ if i + 2 < n => v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2],
                _ if i + 1 < n => 3.0 * r(0) + 10.0 * r(1) - 18.0 * r(2) + 6.0 * r(3) - r(4),
                _ => 25.0 * r(0) - 48.0 * r(1) + 36.0 * r(2) - 16.0 * r(3) + 3.0 * r(4),
            };
            d / (12.0 * h)
        })
        .collect()
}

/// The first-integral defect along sampled jets (for example an ODE
/// trajectory); `dB/dz` comes from five-point differences on the uniform
/// grid `z0 + i·h`.
pub fn first_integral_residual_samples(jets: &[Jet4<f64>], h: f64) -> f64 {
    let b: Vec<f64> = jets.iter().map(|j| b_op(&j.truncate(3)).value()).collect();
    let db = five_point_derivative(&b, h);
    jets.iter()
        .zip(db)
        .map(|(j, d)| (d - 2.0 * j.d(1) * (l_compose(j).value() - 1.0)).abs())
        .fold(0.0, f64::max)
}
