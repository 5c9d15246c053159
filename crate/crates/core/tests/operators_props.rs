use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use u2metric::operators::{b_op, l_compose, l_eigenvalue, l_op, OperatorSign};
use u2metric::profiles::canonical_poly;
use u2metric::{Coef, ExpPoly, Exponent, RationalPoly};

fn rational() -> impl Strategy<Value = BigRational> {
    (-40i64..=40, 1i64..=12).prop_map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
}

fn rpoly() -> impl Strategy<Value = RationalPoly> {
    prop::collection::vec((-8i32..=8, rational()), 0..6)
        .prop_map(|t| ExpPoly::from_terms(t.into_iter().map(|(h, c)| (Exponent::halves(h), c))))
}

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

// ½F'' ∓ (3/2)F' + F written out term by term.
fn l_by_hand(sign: i64, f: &RationalPoly) -> RationalPoly {
    let d1 = f.derive(1);
    let d2 = f.derive(2);
    &(&d2.scale(&q(1, 2)) - &d1.scale(&q(3 * sign, 2))) + f
}

proptest! {
    #[test]
    fn canonical_profiles_solve_the_fourth_order_equation(c in prop::array::uniform4(rational())) {
        let f = canonical_poly(&c.clone().map(Coef::from)).map(|x| x.as_exact().unwrap().clone());
        prop_assert_eq!(l_compose(&f), RationalPoly::one());
    }

    #[test]
    fn first_integral_on_canonical_profiles(c in prop::array::uniform4(rational())) {
        let [c1, c2, c3, c4] = c.clone().map(Coef::from);
        let f = canonical_poly(&[c1.clone(), c2.clone(), c3.clone(), c4.clone()]);
        let want = &Coef::int(3) * &(&(&c2 * &c3) - &(&c1 * &c4));
        prop_assert_eq!(b_op(&f), ExpPoly::constant(want));
    }

    #[test]
    fn operators_match_hand_expansion(f in rpoly()) {
        prop_assert_eq!(l_op(OperatorSign::Plus, &f), l_by_hand(1, &f));
        prop_assert_eq!(l_op(OperatorSign::Minus, &f), l_by_hand(-1, &f));
    }

    #[test]
    fn operators_commute(f in rpoly()) {
        let pm = l_op(OperatorSign::Plus, &l_op(OperatorSign::Minus, &f));
        let mp = l_op(OperatorSign::Minus, &l_op(OperatorSign::Plus, &f));
        prop_assert_eq!(&pm, &mp);
        prop_assert_eq!(l_compose(&f), pm);
    }

    #[test]
    fn eigenvalue_law(p in -12i64..=12, d in 1i64..=6) {
        let k = q(p, d);
        for (sign, s) in [(OperatorSign::Plus, 1), (OperatorSign::Minus, -1)] {
            let want = (&k - q(s, 1)) * (&k - q(2 * s, 1)) / q(2, 1);
            prop_assert_eq!(l_eigenvalue(sign, &k), want);
        }
    }

    #[test]
    fn adjointness_under_quadrature(a in -2.0f64..2.0, b in -2.0f64..2.0, c in 0.3f64..0.8) {
        // Smooth compactly supported test functions on [-1, 1].
        let bump = |z: f64, center: f64| u2metric::curvature::bump_jet(z, center, 0.5);
        let lp = |j: u2metric::Jet4<f64>| 0.5 * j.d(2) - 1.5 * j.d(1) + j.value();
        let lm = |j: u2metric::Jet4<f64>| 0.5 * j.d(2) + 1.5 * j.d(1) + j.value();
        let f = |z: f64| bump(z, -0.2 * c).scale(a) + bump(z, 0.1);
        let g = |z: f64| bump(z, 0.2 * c).scale(b) + bump(z, -0.1);
        let n = 4000;
        let h = 2.0 / n as f64;
        let (mut lhs, mut rhs) = (0.0, 0.0);
        for i in 0..=n {
            let z = -1.0 + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 } * h;
            lhs += w * lp(f(z)) * g(z).value();
            rhs += w * f(z).value() * lm(g(z));
        }
        prop_assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + lhs.abs()));
    }
}
