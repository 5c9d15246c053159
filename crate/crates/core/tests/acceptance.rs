//! Acceptance suite: one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use u2metric::btflat::{bt_integrate, bt_nonextremal_search, bt_search, BtState, SeedKind};
use u2metric::catalog::{catalog_get, entries, hirzebruch, hirzebruch_bachflat_k, page_constants, tag_predicates, Params};
use u2metric::classify::{classify, ClassifyOptions};
use u2metric::curvature::{bach, bump_jet, scalar_curvature, tf_ricci, weyl_energy_variation, weyl_energy_with};
use u2metric::geometry::{classify_end, find_bolts, transcribe_classic, EndKind, Side};
use u2metric::operators::{b_op, first_integral_defect, l_compose, l_op, OperatorSign};
use u2metric::{Coef, ConformalModel, Domain, ExpPoly, Exponent, MetricSpec, Profile, RationalPoly, StructureTag};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn params(kv: &[(&str, Coef)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn metric(name: &str) -> MetricSpec {
    catalog_get(name, &Params::new()).unwrap()
}

fn rat(rng: &mut ChaCha8Rng) -> BigRational {
    BigRational::new(BigInt::from(rng.gen_range(-50i64..=50)), BigInt::from(rng.gen_range(1i64..=12)))
}

fn interior(m: &MetricSpec, n: usize) -> Vec<f64> {
    let d = m.domain();
    let (a, b) = d.window(4.0);
    let pad = 0.02 * (b - a);
    (0..n).map(|i| a + pad + (b - a - 2.0 * pad) * i as f64 / (n - 1) as f64).collect()
}

fn c1_operator_kernel() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let half = BigRational::new(1.into(), 2.into());
    for i in 0..100 {
        let c: Vec<BigRational> = (0..4).map(|_| rat(&mut rng)).collect();
        let f = RationalPoly::from_terms([
            (Exponent::ZERO, BigRational::from_integer(1.into())),
            (Exponent::int(-2), &c[0] * &half),
            (Exponent::int(-1), c[1].clone()),
            (Exponent::int(1), c[2].clone()),
            (Exponent::int(2), &c[3] * &half),
        ]);
        if l_compose(&f) != RationalPoly::one() {
            return Err(format!("input {i} violates L+L-F = 1"));
        }
    }
    Ok("100/100 exact".into())
}

fn c2_first_integral() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let c: Vec<Coef> = (0..4).map(|_| Coef::Exact(rat(&mut rng))).collect();
        let f = u2metric::profiles::canonical_poly(&[c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone()]);
        let want = &Coef::int(3) * &(&(&c[1] * &c[2]) - &(&c[0] * &c[3]));
        if b_op(&f) != ExpPoly::constant(want) {
            return Err("B(F,F) differs from 3(C2C3 - C1C4)".into());
        }
    }
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(2..6);
        let f = ExpPoly::<f64>::from_terms(
            (0..n).map(|_| (Exponent::halves(rng.gen_range(-8..=8)), rng.gen_range(-2.0..2.0))),
        );
        let defect = first_integral_defect(&f);
        let scale = 1.0 + f.max_abs_coeff().powi(2);
        for j in 0..11 {
            let z = -1.0 + 0.2 * j as f64;
            worst = worst.max(defect.eval(z).unwrap().abs() / scale);
        }
    }
    ensure(worst < 1e-9, format!("B exact on 50 canonical inputs; identity residual {worst:.2e}"))
}

fn c3_scalar_crosscheck() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let c: [Coef; 4] = [(); 4].map(|_| Coef::real(rng.gen_range(-0.5..0.5)));
        let c0 = rng.gen_range(0.5..3.0);
        let m = MetricSpec::new(
            "jplus",
            Profile::Canonical(c),
            ConformalModel::exp(Coef::real(c0), -1),
            Domain::open(-1.0, 1.0),
            Some(StructureTag::Jplus),
        )
        .unwrap();
        for j in 0..50 {
            let z = -0.95 + 1.9 * j as f64 / 49.0;
            if m.f_poly().eval(z).unwrap().abs() < 1e-3 {
                continue;
            }
            let s = scalar_curvature(&m, z).unwrap();
            let cz = c0 * (-z).exp();
            let lp = l_op(OperatorSign::Plus, &m.f_poly().jet(z)).value();
            let sk = -8.0 / cz * (lp - 1.0);
            worst = worst.max((s - sk).abs() / (1.0 + s.abs()));
        }
    }
    ensure(worst < 1e-10, format!("max relative gap {worst:.2e}"))
}

fn c4_modified_taub() -> Check {
    let mut worst: f64 = 0.0;
    let mut check = |m: &MetricSpec, reference: &dyn Fn(f64) -> f64| {
        let zs = interior(m, 50);
        let scale = zs.iter().map(|&z| reference(z).abs()).fold(0.0, f64::max);
        for z in zs {
            let s = scalar_curvature(m, z).unwrap();
            worst = worst.max((s - reference(z)).abs() / scale);
        }
    };
    check(&metric("modified-taub-nut-2"), &|z| 48.0 * (1.0 - (-z).exp()));
    for c0 in [1i64, 3] {
        let p = params(&[("C0", Coef::int(c0))]);
        let c0 = c0 as f64;
        check(&catalog_get("modified-taub-bolt-1", &p).unwrap(), &|z| 54.0 / c0 * (1.0 - z.exp()));
        check(&catalog_get("modified-taub-bolt-2", &p).unwrap(), &|z| 6.0 / c0 * (-1.0 + (-z).exp()));
    }
    ensure(worst < 1e-10, format!("max relative error {worst:.2e}"))
}

fn c5_einstein_suite() -> Check {
    let mut report = Vec::new();
    for name in ["taub-nut", "taub-bolt", "fubini-study", "page"] {
        let m = metric(name);
        let (mut ric, mut b): (f64, f64) = (0.0, 0.0);
        for z in interior(&m, 40) {
            let (a, bb) = tf_ricci(&m, z).unwrap();
            ric = ric.max(a.abs()).max(bb.abs());
            let (b1, b2) = bach(&m, z).unwrap();
            b = b.max(b1.abs()).max(b2.abs());
        }
        if ric >= 1e-8 || b >= 1e-8 {
            return Err(format!("{name}: tf_ricci {ric:.2e}, bach {b:.2e}"));
        }
        report.push(format!("{name} {:.1e}/{:.1e}", ric, b));
    }
    for name in ["super-taub-nut", "super-eguchi-hanson"] {
        let m = metric(name);
        let ric = interior(&m, 40)
            .into_iter()
            .map(|z| {
                let (a, b) = tf_ricci(&m, z).unwrap();
                a.abs().max(b.abs())
            })
            .fold(0.0, f64::max);
        let blowup = [Side::Lower, Side::Upper].into_iter().any(|s| {
            let e = classify_end(&m, s);
            e.curvature_blowup && e.kind == EndKind::CurvatureSingularity
        });
        if ric >= 1e-8 || !blowup {
            return Err(format!("{name}: tf_ricci {ric:.2e}, blow-up {blowup}"));
        }
        report.push(format!("{name} {ric:.1e}+blowup"));
    }
    Ok(report.join(", "))
}

fn c6_page_constants() -> Check {
    let pc = page_constants(1e-15).map_err(|e| e.to_string())?;
    let nu = pc.nu;
    let quartic = nu.powi(4) + 4.0 * nu.powi(3) - 6.0 * nu * nu + 12.0 * nu - 3.0;
    let zres = (4.0 * pc.z0).exp() - 4.0 * pc.z0.exp() - 3.0;
    let k = hirzebruch_bachflat_k(pc.z0);
    let ok = (nu - 0.28).abs() < 5e-3
        && quartic.abs() < 1e-12
        && (pc.z0 - 0.579).abs() < 1e-3
        && zres.abs() < 1e-12
        && (pc.coeff + 0.2442).abs() < 5e-4
        && (k - 1.0).abs() < 1e-10;
    ensure(
        ok,
        format!("nu={nu:.10} z0={:.10} coeff={:.10} k(z0)-1={:.1e} residuals {quartic:.1e}/{zres:.1e}", pc.z0, pc.coeff, k - 1.0),
    )
}

fn c7_variational() -> Check {
    let f = metric("taub-nut").f_poly().to_f64();
    let (a, b) = (0.3, 1.7);
    let base = |z: f64| f.jet(z) + bump_jet(z, 0.9, 0.4).scale(0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let (center, hw) = (rng.gen_range(0.7..1.3), rng.gen_range(0.2..0.35));
        let base = &base;
        let perturbed = move |eps: f64| move |z: f64| base(z) + bump_jet(z, center, hw).scale(eps);
        let h = 1e-4;
        let fd = (weyl_energy_with(perturbed(h), a, b).unwrap() - weyl_energy_with(perturbed(-h), a, b).unwrap()) / (2.0 * h);
        let exact = weyl_energy_variation(base, |z| bump_jet(z, center, hw), a, b).unwrap();
        if exact.abs() < 1e-6 {
            return Err(format!("degenerate direction: variation {exact:.1e}"));
        }
        worst = worst.max((fd - exact).abs() / exact.abs());
    }
    ensure(worst < 1e-4, format!("5 bump directions around Taub-NUT + bump, max rel {worst:.1e}"))
}

fn c8_conservation() -> Check {
    let m = metric("taub-bolt");
    let (z0, z1) = (-0.9, -0.1);
    let (f, c) = m.jets_at(z0).unwrap();
    let init = BtState::from_jets(z0, &f, &c);
    let tr = bt_integrate(&init, 1.0, (z0, z1), 1e-10).map_err(|e| e.to_string())?;
    let ferr = tr
        .samples
        .iter()
        .map(|p| (p.state.f - m.f_poly().eval(p.state.z).unwrap()).abs())
        .fold(0.0, f64::max);
    let end = tr.samples.last().map_or(z0, |p| p.state.z);
    let ok = tr.t_drift < 1e-8 && ferr < 1e-8 && (end - z1).abs() < 1e-12 && tr.truncated.is_none();
    ensure(ok, format!("T drift {:.1e}, F error {ferr:.1e}, reached z = {end}", tr.t_drift))
}

fn c9_nonextremal() -> Check {
    let span = 0.5;
    let w = bt_nonextremal_search(1.0, 32, span, 7).map_err(|e| e.to_string())?;
    let drift = w.trajectory.t_drift;
    let e = bt_search(1.0, 32, span, 7, SeedKind::Einstein).map_err(|e| e.to_string())?;
    let z = bt_search(1.0, 32, span, 7, SeedKind::ZeroScalar).map_err(|e| e.to_string())?;
    let ok = w.residual > 1e-3 && drift < 1e-7 && e.residual < 1e-8 && z.residual < 1e-8;
    ensure(
        ok,
        format!(
            "witness residual {:.3e} (drift {drift:.1e}, {}/{} trials); controls einstein {:.1e}, s=0 {:.1e}",
            w.residual, w.trials_ok, w.trials, e.residual, z.residual
        ),
    )
}

fn c10_end_taxonomy() -> Check {
    use EndKind::*;
    let table: [(&str, EndKind, EndKind); 18] = [
        ("flat", Ale, Nut),
        ("taub-nut", Alf, Nut),
        ("modified-taub-nut-1", Cusp, Ale),
        ("modified-taub-nut-2", Cusp, Nut),
        ("super-taub-nut", Nut, CurvatureSingularity),
        ("taub-bolt", Bolt, Alf),
        ("modified-taub-bolt-1", Bolt, Cusp),
        ("modified-taub-bolt-2", Bolt, Cusp),
        ("burns", Bolt, Ale),
        ("eguchi-hanson", Bolt, Ale),
        ("super-eguchi-hanson", CurvatureSingularity, Ale),
        ("lebrun", Bolt, Ale),
        ("modified-lebrun", Bolt, Nut),
        ("eguchi-hanson-lambda", Bolt, AsymptoticallyEinstein),
        ("fubini-study", Bolt, Nut),
        ("taub-nut-lambda", CurvatureSingularity, Conical),
        ("page", Bolt, Bolt),
        ("hirzebruch", Bolt, Bolt),
    ];
    for (name, lo, hi) in table {
        let m = metric(name);
        let (l, h) = (classify_end(&m, Side::Lower).kind, classify_end(&m, Side::Upper).kind);
        if (l, h) != (lo, hi) {
            return Err(format!("{name}: got {}+{}, want {}+{}", l.name(), h.name(), lo.name(), hi.name()));
        }
    }
    Ok(format!("{} metrics", table.len()))
}

fn c11_bolting() -> Check {
    for k in 1..=3u32 {
        for z0 in [0.5, 1.0] {
            let bolts: Vec<_> = find_bolts(&hirzebruch(k, z0, 1.0).unwrap()).into_iter().filter(|b| !b.degenerate).collect();
            let ok = bolts.len() == 2
                && (bolts[0].z0 + z0).abs() < 1e-10
                && (bolts[0].k - k as f64).abs() < 1e-10
                && (bolts[1].z0 - z0).abs() < 1e-10
                && (bolts[1].k + k as f64).abs() < 1e-10
                && bolts.iter().all(|b| b.smooth_quotient);
            if !ok {
                return Err(format!("hirzebruch({k}, {z0}): {bolts:?}"));
            }
        }
    }
    let tb: Vec<_> = find_bolts(&metric("taub-bolt")).into_iter().filter(|b| !b.degenerate).collect();
    let ok = tb.len() == 1 && (tb[0].z0 + 3f64.ln()).abs() < 1e-12 && (tb[0].k.abs() - 1.0).abs() < 1e-12;
    ensure(ok, format!("slopes ±k for 6 Hirzebruch metrics; taub-bolt zero {:?}", tb.first().map(|b| (b.z0, b.k))))
}

fn c12_transcription() -> Check {
    let m = 1.0;
    let t = transcribe_classic(
        |r| 0.25 * (r + m) / (r - m),
        |r| 4.0 * m * m * (r - m) / (r + m),
        |r| r * r - m * m,
        (m, f64::INFINITY),
        -1.0,
        64,
    )
    .map_err(|e| e.to_string())?;
    let want = |z: f64| (1.0 - (-z).exp()).powi(2);
    let sample_err = t.samples.iter().map(|&(_, z, f, _)| (f - want(z)).abs()).fold(0.0, f64::max);
    let coef_err = t.fit.coeffs.iter().zip([2.0, -2.0, 0.0, 0.0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let einstein = matches!(t.metric.conformal(), ConformalModel::Einstein { .. });
    let ok = t.fit.rms < 1e-9 && coef_err < 1e-9 && sample_err < 1e-9 && einstein;
    ensure(ok, format!("fit rms {:.1e}, coefficient error {coef_err:.1e}, conformal model Einstein: {einstein}", t.fit.rms))
}

fn c13_table_sweep() -> Check {
    let mut n = 0;
    for e in entries() {
        let m = e.build(&Params::new()).map_err(|err| err.to_string())?;
        let r = classify(&m, &ClassifyOptions::default()).map_err(|err| err.to_string())?;
        for tag in e.expected_tags(&Params::new()).unwrap() {
            for any in tag_predicates(tag).unwrap() {
                if !any.iter().any(|p| r.holds(p)) {
                    return Err(format!("{}: tag {tag} needs one of {any:?}", e.name));
                }
            }
            n += 1;
        }
    }
    for (k, tag) in [(2i64, "ricci_flat"), (1, "csc")] {
        let name = if tag == "csc" { "modified-lebrun" } else { "lebrun" };
        let m = catalog_get(name, &params(&[("k", Coef::int(k))])).unwrap();
        if !classify(&m, &ClassifyOptions::default()).unwrap().holds(tag) {
            return Err(format!("{name}(k={k}) lacks {tag}"));
        }
        n += 1;
    }
    Ok(format!("{n} tags across {} entries", entries().len()))
}

type Criterion = (&'static str, fn() -> Check, Duration);

fn main() {
    let criteria: [Criterion; 13] = [
        ("operator kernel L+L-F = 1 on canonical F", c1_operator_kernel, Duration::from_secs(1)),
        ("first integral B(F,F) and its identity", c2_first_integral, Duration::from_secs(60)),
        ("general vs Kahler scalar curvature", c3_scalar_crosscheck, Duration::from_secs(60)),
        ("modified Taub scalar curvatures", c4_modified_taub, Duration::from_secs(60)),
        ("Einstein suite and super metrics", c5_einstein_suite, Duration::from_secs(60)),
        ("Page constants", c6_page_constants, Duration::from_secs(1)),
        ("variational Bach check", c7_variational, Duration::from_secs(10)),
        ("B^t conservation on Taub-bolt", c8_conservation, Duration::from_secs(5)),
        ("non-conformally-extremal witness", c9_nonextremal, Duration::from_secs(60)),
        ("end taxonomy", c10_end_taxonomy, Duration::from_secs(10)),
        ("bolting slopes", c11_bolting, Duration::from_secs(60)),
        ("classic Taub-NUT transcription", c12_transcription, Duration::from_secs(5)),
        ("table sweep", c13_table_sweep, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if took <= *budget => (true, d),
            Ok(d) => (false, format!("{d}; took {took:.2?}, budget {budget:?}")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!("criterion {:2} {} {name}: {detail} [{took:.2?}]", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
