//! Closed-form constructors for the classic U(2)-invariant metrics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exppoly::{ExpPoly, Exponent};
use crate::profiles::{ConformalModel, Domain, MetricSpec, Profile, StructureTag};
use crate::roots::newton_bisect;
use crate::scalar::{Coef, Scalar};

pub type Params = BTreeMap<String, Coef>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    Positive,
    /// An integer no smaller than the bound.
    IntegerAtLeast(i64),
    /// Nonzero real.
    Nonzero,
}

impl Constraint {
    fn check(self, v: f64) -> std::result::Result<(), String> {
        match self {
            Constraint::Positive if v > 0.0 => Ok(()),
            Constraint::Positive => Err(format!("must be positive, got {v}")),
            Constraint::IntegerAtLeast(n) if v.fract() == 0.0 && v >= n as f64 => Ok(()),
            Constraint::IntegerAtLeast(n) => Err(format!("must be an integer ≥ {n}, got {v}")),
            Constraint::Nonzero if v != 0.0 && v.is_finite() => Ok(()),
            Constraint::Nonzero => Err("must be nonzero".into()),
        }
    }

    fn describe(self) -> String {
        match self {
            Constraint::Positive => ">0".into(),
            Constraint::IntegerAtLeast(n) => format!("int>={n}"),
            Constraint::Nonzero => "!=0".into(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: (i64, i64),
    pub constraint: Constraint,
}

const fn param(name: &'static str, default: i64, constraint: Constraint) -> ParamSpec {
    ParamSpec { name, default: (default, 1), constraint }
}

const M: ParamSpec = param("m", 1, Constraint::Positive);
const C0: ParamSpec = param("C0", 1, Constraint::Positive);
const LAMBDA: ParamSpec = param("Lambda", 6, Constraint::Positive);
const LEBRUN: [ParamSpec; 2] = [param("k", 1, Constraint::IntegerAtLeast(1)), M];
const EH_LAMBDA: [ParamSpec; 1] = [param("k", 3, Constraint::IntegerAtLeast(2))];
const TN_LAMBDA: [ParamSpec; 3] = [M, param("L", 1, Constraint::Nonzero), LAMBDA];
const HIRZEBRUCH: [ParamSpec; 3] = [
    param("k", 1, Constraint::IntegerAtLeast(1)),
    ParamSpec { name: "z0", default: (1, 2), constraint: Constraint::Positive },
    C0,
];

pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static [ParamSpec],
    /// Labels from the "special metric" column; see [`tag_predicates`].
    pub tags: fn(&Params) -> Vec<&'static str>,
    pub manifold: &'static str,
    build: fn(&Params) -> Result<MetricSpec>,
}

impl CatalogEntry {
    pub fn defaults(&self) -> Params {
        self.params.iter().map(|p| (p.name.to_string(), Coef::ratio(p.default.0, p.default.1))).collect()
    }

    /// Fills defaults and checks constraints and names.
    pub fn resolve(&self, given: &Params) -> Result<Params> {
        let mut out = self.defaults();
        for (k, v) in given {
            let Some(spec) = self.params.iter().find(|p| p.name == k.as_str()) else {
                return Err(Error::BadParameter {
                    name: k.clone(),
                    reason: format!("`{}` takes no such parameter", self.name),
                });
            };
            spec.constraint.check(v.to_f64()).map_err(|reason| Error::BadParameter { name: k.clone(), reason })?;
            out.insert(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn build(&self, given: &Params) -> Result<MetricSpec> {
        let p = self.resolve(given)?;
        (self.build)(&p)
    }

    pub fn expected_tags(&self, given: &Params) -> Result<Vec<&'static str>> {
        Ok((self.tags)(&self.resolve(given)?))
    }

    /// `name | params | tags | manifold`.
    pub fn listing(&self) -> String {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|p| format!("{}={} ({})", p.name, Coef::ratio(p.default.0, p.default.1), p.constraint.describe()))
            .collect();
        let tags = (self.tags)(&self.defaults()).join(",");
        format!("{} | {} | {} | {}", self.name, params.join(" "), tags, self.manifold)
    }
}

/// Predicates behind each table label: every inner list must contain at
/// least one predicate that holds.
pub fn tag_predicates(tag: &str) -> Option<&'static [&'static [&'static str]]> {
    Some(match tag {
        "RF" => &[&["ricci_flat"]],
        "HK" => &[&["hyperkahler_Iminus", "hyperkahler_Iplus"]],
        "HCF" => &[&["sd", "asd"]],
        "BF" => &[&["bach_flat"]],
        "C-Extr" => &[&["conformally_extremal"]],
        "C-RF" => &[&["conformally_ricci_flat"]],
        "SFK" => &[&["kahler_plus", "kahler_minus"], &["zsc"]],
        "Extr-K" => &[&["extremal"]],
        "CSC" => &[&["csc"]],
        "Einst-Λ" => &[&["einstein"]],
        _ => return None,
    })
}

fn get(p: &Params, k: &str) -> Coef {
    p[k].clone()
}

fn c(n: i64) -> Coef {
    Coef::int(n)
}

fn q(a: i64, b: i64) -> Coef {
    Coef::ratio(a, b)
}

fn poly(terms: &[(i32, Coef)]) -> ExpPoly<Coef> {
    ExpPoly::from_terms(terms.iter().map(|(k, v)| (Exponent::int(*k), v.clone())))
}

fn taub_nut_root() -> ExpPoly<Coef> {
    poly(&[(0, c(1)), (-1, c(-1))])
}

fn taub_bolt_profile() -> Profile {
    Profile::canonical(q(-1, 4), q(1, 4), q(-9, 4), q(9, 4))
}

fn upper_half() -> Domain {
    Domain::open(0.0, f64::INFINITY)
}

fn bolt_domain() -> Domain {
    Domain::new(-(3f64.ln()), 0.0, true, false)
}

fn build_flat(_: &Params) -> Result<MetricSpec> {
    MetricSpec::new("flat", Profile::Poly(ExpPoly::one()), ConformalModel::exp(c(1), -1), Domain::real_line(), Some(StructureTag::Jplus))
}

fn build_taub_nut(p: &Params) -> Result<MetricSpec> {
    let a = c(1) / (c(2) * get(p, "m"));
    MetricSpec::new(
        "taub-nut",
        Profile::Squared(taub_nut_root()),
        ConformalModel::einstein(a.clone(), -a),
        upper_half(),
        Some(StructureTag::Iplus),
    )
}

fn build_mtn1(p: &Params) -> Result<MetricSpec> {
    MetricSpec::new(
        "modified-taub-nut-1",
        Profile::Squared(taub_nut_root()),
        ConformalModel::exp(get(p, "C0"), 1),
        upper_half(),
        Some(StructureTag::Jminus),
    )
}

fn build_mtn2(p: &Params) -> Result<MetricSpec> {
    MetricSpec::new(
        "modified-taub-nut-2",
        Profile::Squared(taub_nut_root()),
        ConformalModel::exp(get(p, "C0"), -1),
        upper_half(),
        Some(StructureTag::Jplus),
    )
}

fn build_super_tn(_: &Params) -> Result<MetricSpec> {
    MetricSpec::new(
        "super-taub-nut",
        Profile::Squared(poly(&[(0, c(1)), (1, c(1))])),
        ConformalModel::einstein(c(1), c(1)),
        Domain::real_line(),
        Some(StructureTag::Iminus),
    )
}

fn build_taub_bolt(p: &Params) -> Result<MetricSpec> {
    let a = c(1) / (c(4) * get(p, "m"));
    MetricSpec::new("taub-bolt", taub_bolt_profile(), ConformalModel::einstein(a.clone(), -a), bolt_domain(), None)
}

fn build_mtb1(p: &Params) -> Result<MetricSpec> {
    MetricSpec::new(
        "modified-taub-bolt-1",
        taub_bolt_profile(),
        ConformalModel::exp(get(p, "C0"), 1),
        bolt_domain(),
        Some(StructureTag::Jminus),
    )
}

fn build_mtb2(p: &Params) -> Result<MetricSpec> {
    MetricSpec::new(
        "modified-taub-bolt-2",
        taub_bolt_profile(),
        ConformalModel::exp(get(p, "C0"), -1),
        bolt_domain(),
        Some(StructureTag::Jplus),
    )
}

fn two_log_m(m: &Coef) -> f64 {
    2.0 * m.to_f64().ln()
}

fn build_burns(p: &Params) -> Result<MetricSpec> {
    let m = get(p, "m");
    MetricSpec::new(
        "burns",
        Profile::Poly(poly(&[(0, c(1)), (-1, -(&m * &m))])),
        ConformalModel::exp(c(1), 1),
        Domain::new(two_log_m(&m), f64::INFINITY, true, false),
        Some(StructureTag::Jminus),
    )
}

fn build_eh(p: &Params) -> Result<MetricSpec> {
    let m = get(p, "m");
    let m2 = &m * &m;
    MetricSpec::new(
        "eguchi-hanson",
        Profile::Poly(poly(&[(0, c(1)), (-2, -(&m2 * &m2))])),
        ConformalModel::exp(c(1), 1),
        Domain::new(two_log_m(&m), f64::INFINITY, true, false),
        Some(StructureTag::Jminus),
    )
}

fn build_super_eh(_: &Params) -> Result<MetricSpec> {
    MetricSpec::new(
        "super-eguchi-hanson",
        Profile::Poly(poly(&[(0, c(1)), (-2, c(1))])),
        ConformalModel::exp(c(1), 1),
        Domain::real_line(),
        Some(StructureTag::Jminus),
    )
}

fn lebrun_profile(p: &Params) -> (Profile, f64) {
    let (k, m) = (get(p, "k"), get(p, "m"));
    let m2 = &m * &m;
    let f = poly(&[(0, c(1)), (-1, &(&k - &c(2)) * &m2), (-2, -(&(&k - &c(1)) * &(&m2 * &m2)))]);
    (Profile::Poly(f), two_log_m(&m))
}

fn build_lebrun(p: &Params) -> Result<MetricSpec> {
    let (f, z0) = lebrun_profile(p);
    let d = Domain::new(z0, f64::INFINITY, true, false);
    MetricSpec::new("lebrun", f, ConformalModel::exp(c(1), 1), d, Some(StructureTag::Jminus))
}

fn build_mod_lebrun(p: &Params) -> Result<MetricSpec> {
    let (f, z0) = lebrun_profile(p);
    let d = Domain::new(z0, f64::INFINITY, true, false);
    MetricSpec::new("modified-lebrun", f, ConformalModel::exp(c(1), -1), d, Some(StructureTag::Jplus))
}

fn build_eh_lambda(p: &Params) -> Result<MetricSpec> {
    let k = get(p, "k");
    let m4 = (&c(1) + &k) / c(3);
    let lambda = &c(4) - &(&c(2) * &k);
    let f = poly(&[(0, c(1)), (-2, -m4), (1, -(lambda / c(6)))]);
    MetricSpec::new(
        "eguchi-hanson-lambda",
        Profile::Poly(f),
        ConformalModel::exp(c(1), 1),
        Domain::new(0.0, f64::INFINITY, true, false),
        Some(StructureTag::Jminus),
    )
}

fn build_fubini_study(p: &Params) -> Result<MetricSpec> {
    let lambda = get(p, "Lambda");
    let lo = lambda.to_f64().ln();
    MetricSpec::new(
        "fubini-study",
        Profile::Poly(poly(&[(0, c(1)), (-1, -lambda)])),
        ConformalModel::exp(c(6), -1),
        Domain::new(lo, f64::INFINITY, true, false),
        Some(StructureTag::Jplus),
    )
}

/// The positive interval of `F` adjacent to the largest zero below `z = 0`.
fn rightmost_positive_interval(f: &ExpPoly<Coef>, hi: f64) -> Result<Domain> {
    let ff = f.to_f64();
    let val = |z: f64| ff.eval(z).unwrap_or(f64::NAN);
    let jet = |z: f64| {
        let j = ff.jet(z);
        (j.value(), j.d(1))
    };
    let n = 4000;
    let (a, b) = (-40.0, hi - 1e-9);
    let z = |i: usize| b + (a - b) * i as f64 / n as f64;
    let mut right = None;
    for i in 0..n {
        let (z1, z2) = (z(i), z(i + 1));
        let (v1, v2) = (val(z1), val(z2));
        match right {
            None if v1 <= 0.0 && v2 > 0.0 => right = Some(newton_bisect(jet, z2, z1, 1e-14)?),
            None if i == 0 && v1 > 0.0 => right = Some(hi),
            Some(r) if v1 > 0.0 && v2 <= 0.0 => {
                let l = newton_bisect(jet, z2, z1, 1e-14)?;
                return Ok(Domain::new(l, r, true, r < hi));
            }
            _ => {}
        }
    }
    match right {
        Some(r) => Ok(Domain::new(f64::NEG_INFINITY, r, false, r < hi)),
        None => Err(Error::InvalidMetric("F has no positive interval below z = 0".into())),
    }
}

fn build_tn_lambda(p: &Params) -> Result<MetricSpec> {
    let (m, l, lambda) = (get(p, "m"), get(p, "L"), get(p, "Lambda"));
    let cubic = &(&lambda * &(&m * &(&m * &m))) / &c(3);
    let c1 = &(&(&m - &l) + &cubic) / &m;
    let c3 = -(&(&(&m + &l) + &cubic) / &m);
    let profile = Profile::canonical(c1.clone(), -c1, c3.clone(), -c3);
    let domain = rightmost_positive_interval(&profile.expand(), 0.0)?;
    let a = c(1) / (c(2) * m);
    MetricSpec::new("taub-nut-lambda", profile, ConformalModel::einstein(a.clone(), -a), domain, None)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PageConstants {
    pub nu: f64,
    pub z0: f64,
    /// The common value of the four profile coefficients.
    pub coeff: f64,
    /// `C = κe^{-z}/(1 + e^{-z})²` with `κ = 12(1+ν²)/(Λν(3+ν²))` at `Λ = 1`.
    pub kappa: f64,
}

/// `ν` from `ν⁴ + 4ν³ − 6ν² + 12ν − 3 = 0` on `[0.1, 0.5]`, `z0` from
/// `e^{4z} − 4e^{z} − 3 = 0` on `[0.4, 0.8]`.
pub fn page_constants(tol: f64) -> Result<PageConstants> {
    let quartic = |v: f64| {
        (v.powi(4) + 4.0 * v.powi(3) - 6.0 * v * v + 12.0 * v - 3.0, 4.0 * v.powi(3) + 12.0 * v * v - 12.0 * v + 12.0)
    };
    let nu = newton_bisect(quartic, 0.1, 0.5, tol)?;
    let zeq = |z: f64| ((4.0 * z).exp() - 4.0 * z.exp() - 3.0, 4.0 * (4.0 * z).exp() - 4.0 * z.exp());
    let z0 = newton_bisect(zeq, 0.4, 0.8, tol)?;
    let norm = (-nu.powi(4) + 6.0 * nu * nu + 3.0) / (4.0 * nu * (3.0 + nu * nu));
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::SearchFailed(format!("normalization constant is {norm}, not 1")));
    }
    let coeff = (z0.sinh() - z0.cosh()) / ((2.0 + (2.0 * z0).cosh()) * z0.sinh());
    let kappa = 12.0 * (1.0 + nu * nu) / (nu * (3.0 + nu * nu));
    Ok(PageConstants { nu, z0, coeff, kappa })
}

fn build_page(p: &Params) -> Result<MetricSpec> {
    let pc = page_constants(1e-15)?;
    let lambda = get(p, "Lambda").to_f64();
    let a = Coef::real((pc.kappa / lambda).powf(-0.5));
    let k = Coef::real(pc.coeff);
    MetricSpec::new(
        "page",
        Profile::canonical(k.clone(), k.clone(), k.clone(), k),
        ConformalModel::einstein(a.clone(), a),
        Domain::new(-pc.z0, pc.z0, true, true),
        None,
    )
}

/// `(C1′, C2′)` of `F = 1 + C1′cosh 2z + 2C2′cosh z`.
pub fn hirzebruch_coefficients(k: f64, z0: f64) -> (f64, f64) {
    let den = (2.0 + (2.0 * z0).cosh()) * z0.sinh();
    let c1 = (z0.sinh() - k * z0.cosh()) / den;
    let c2 = (-2.0 * (2.0 * z0).sinh() + k * (2.0 * z0).cosh()) / (2.0 * den);
    (c1, c2)
}

pub fn hirzebruch(k: u32, z0: f64, c0: f64) -> Result<MetricSpec> {
    if k == 0 || z0.is_nan() || z0 <= 0.0 || c0.is_nan() || c0 <= 0.0 {
        return Err(Error::BadParameter {
            name: "hirzebruch".into(),
            reason: format!("needs k ≥ 1, z0 > 0, C0 > 0 (got {k}, {z0}, {c0})"),
        });
    }
    let (c1, c2) = hirzebruch_coefficients(k as f64, z0);
    let (c1, c2) = (Coef::real(c1), Coef::real(c2));
    MetricSpec::new(
        "hirzebruch",
        Profile::canonical(c1.clone(), c2.clone(), c2, c1),
        ConformalModel::exp(Coef::real(c0), -1),
        Domain::new(-z0, z0, true, true),
        Some(StructureTag::Jplus),
    )
}

/// The `k` for which the Hirzebruch metric on `[−z0, z0]` is Bach-flat.
pub fn hirzebruch_bachflat_k(z0: f64) -> f64 {
    2.0 * (1.0 + 2.0 * z0.cosh()) * z0.sinh() / (2.0 * z0.cosh() + (2.0 * z0).cosh())
}

fn build_hirzebruch(p: &Params) -> Result<MetricSpec> {
    hirzebruch(get(p, "k").to_f64() as u32, get(p, "z0").to_f64(), get(p, "C0").to_f64())
}

macro_rules! tags {
    ($($t:literal),*) => {
        |_: &Params| vec![$($t),*]
    };
}

pub fn entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry { name: "flat", params: &[], tags: tags!["RF"], manifold: "R^4", build: build_flat },
        CatalogEntry {
            name: "taub-nut",
            params: &[M],
            tags: tags!["RF", "HK", "HCF", "C-Extr"],
            manifold: "R^4",
            build: build_taub_nut,
        },
        CatalogEntry {
            name: "modified-taub-nut-1",
            params: &[C0],
            tags: tags!["SFK", "HCF", "C-RF"],
            manifold: "R^4 minus a point",
            build: build_mtn1,
        },
        CatalogEntry {
            name: "modified-taub-nut-2",
            params: &[C0],
            tags: tags!["Extr-K", "HCF", "C-RF"],
            manifold: "R^4",
            build: build_mtn2,
        },
        CatalogEntry {
            name: "super-taub-nut",
            params: &[],
            tags: tags!["RF", "HK", "HCF"],
            manifold: "R^4, singular at one end",
            build: build_super_tn,
        },
        CatalogEntry { name: "taub-bolt", params: &[M], tags: tags!["BF", "RF"], manifold: "CP^2 minus a point", build: build_taub_bolt },
        CatalogEntry {
            name: "modified-taub-bolt-1",
            params: &[C0],
            tags: tags!["Extr-K", "BF", "C-RF"],
            manifold: "CP^2 minus a point",
            build: build_mtb1,
        },
        CatalogEntry {
            name: "modified-taub-bolt-2",
            params: &[C0],
            tags: tags!["Extr-K", "BF", "C-RF"],
            manifold: "CP^2 minus a point",
            build: build_mtb2,
        },
        CatalogEntry { name: "burns", params: &[M], tags: tags!["SFK"], manifold: "O(-1) over CP^1", build: build_burns },
        CatalogEntry {
            name: "eguchi-hanson",
            params: &[M],
            tags: tags!["RF"],
            manifold: "O(-2) over CP^1",
            build: build_eh,
        },
        CatalogEntry {
            name: "super-eguchi-hanson",
            params: &[],
            tags: tags!["RF", "HCF"],
            manifold: "R^4 minus a point, singular at one end",
            build: build_super_eh,
        },
        CatalogEntry {
            name: "lebrun",
            params: &LEBRUN,
            tags: |p| {
                let mut t = vec!["SFK"];
                if get(p, "k").to_f64() == 2.0 {
                    t.push("RF");
                }
                t
            },
            manifold: "O(-k) over CP^1",
            build: build_lebrun,
        },
        CatalogEntry {
            name: "modified-lebrun",
            params: &LEBRUN,
            tags: |p| {
                let mut t = vec!["Extr-K"];
                if get(p, "k").to_f64() == 1.0 {
                    t.push("CSC");
                }
                t
            },
            manifold: "O(-k) over CP^1",
            build: build_mod_lebrun,
        },
        CatalogEntry {
            name: "eguchi-hanson-lambda",
            params: &EH_LAMBDA,
            tags: tags!["Einst-Λ"],
            manifold: "O(-k) over CP^1",
            build: build_eh_lambda,
        },
        CatalogEntry {
            name: "fubini-study",
            params: &[LAMBDA],
            tags: tags!["Einst-Λ"],
            manifold: "CP^2",
            build: build_fubini_study,
        },
        CatalogEntry {
            name: "taub-nut-lambda",
            params: &TN_LAMBDA,
            tags: tags!["Einst-Λ", "BF", "C-Extr"],
            manifold: "usually singular",
            build: build_tn_lambda,
        },
        CatalogEntry {
            name: "page",
            params: &[LAMBDA],
            tags: tags!["Einst-Λ", "BF", "C-Extr"],
            manifold: "CP^2 # -CP^2",
            build: build_page,
        },
        CatalogEntry {
            name: "hirzebruch",
            params: &HIRZEBRUCH,
            tags: tags!["Extr-K"],
            manifold: "Hirzebruch surface of degree k",
            build: build_hirzebruch,
        },
    ]
}

pub fn entry(name: &str) -> Result<CatalogEntry> {
    entries().into_iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownMetric(name.to_string()))
}

pub fn catalog_get(name: &str, params: &Params) -> Result<MetricSpec> {
    entry(name)?.build(params)
}

pub fn listing() -> String {
    entries().iter().map(|e| e.listing() + "\n").collect()
}
