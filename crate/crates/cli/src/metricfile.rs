//! The line-oriented metric file.
//!
//! ```text
//! # comment
//! name taub-bolt
//! domain -1.0986122886681098 0 closed open
//! F canonical -1/4 1/4 -9/4 9/4
//! C einstein C5=1/4 C6=-1/4
//! tag Jplus
//! ```
//!
//! `F` is either one `canonical` line or any number of `F term <p>/<q> <c>`
//! lines. `C` is `exp C0=<v> eps=<±1>`, `einstein C5=<v> C6=<v>`, or
//! `ratio` followed by `num term …` and `den term …` lines.

use u2metric::{Coef, ConformalModel, Domain, ExpPoly, MetricSpec, ParseError, Poly, Profile, Scalar, StructureTag};

fn err(line: usize, msg: impl std::fmt::Display) -> ParseError {
    ParseError::new(format!("line {line}: {msg}"))
}

fn number(line: usize, s: &str) -> Result<Coef, ParseError> {
    s.parse::<Coef>().map_err(|e| err(line, e))
}

fn real(line: usize, s: &str) -> Result<f64, ParseError> {
    Ok(number(line, s)?.to_f64())
}

fn keyed(line: usize, tok: Option<&str>, key: &str) -> Result<Coef, ParseError> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {key}=<value>")))?;
    match tok.split_once('=') {
        Some((k, v)) if k == key => number(line, v),
        _ => Err(err(line, format!("expected {key}=<value>, got `{tok}`"))),
    }
}

fn closedness(line: usize, s: Option<&str>) -> Result<bool, ParseError> {
    match s {
        None | Some("open") => Ok(false),
        Some("closed") => Ok(true),
        Some(o) => Err(err(line, format!("endpoint kind must be open or closed, got `{o}`"))),
    }
}

#[derive(Default)]
struct Draft {
    name: Option<String>,
    domain: Option<Domain>,
    canonical: Option<[Coef; 4]>,
    terms: Vec<(u2metric::Exponent, Coef)>,
    conformal: Option<String>,
    c_exp: Option<(Coef, i8)>,
    c_ein: Option<(Coef, Coef)>,
    num: Vec<(u2metric::Exponent, Coef)>,
    den: Vec<(u2metric::Exponent, Coef)>,
    tag: Option<StructureTag>,
}

pub fn parse(text: &str) -> Result<MetricSpec, ParseError> {
    let mut d = Draft::default();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        let mut toks = rest.split_whitespace();
        match head {
            "name" => d.name = Some(rest.to_string()),
            "domain" => {
                let (Some(a), Some(b)) = (toks.next(), toks.next()) else {
                    return Err(err(n, "expected `domain <a> <b> [open|closed] [open|closed]`"));
                };
                let (lo, hi) = (real(n, a)?, real(n, b)?);
                let (lc, hc) = (closedness(n, toks.next())?, closedness(n, toks.next())?);
                if toks.next().is_some() {
                    return Err(err(n, "trailing tokens after domain"));
                }
                d.domain = Some(Domain::new(lo, hi, lc, hc));
            }
            "F" => match toks.next() {
                Some("canonical") => {
                    let v: Vec<&str> = toks.collect();
                    if v.len() != 4 {
                        return Err(err(n, "`F canonical` takes four coefficients"));
                    }
                    let c: Vec<Coef> = v.iter().map(|s| number(n, s)).collect::<Result<_, _>>()?;
                    d.canonical = Some([c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone()]);
                }
                Some("term") => d.terms.push(ExpPoly::parse_term(&rest[4..]).map_err(|e| err(n, e))?),
                other => return Err(err(n, format!("expected `canonical` or `term` after F, got {other:?}"))),
            },
            "C" => match toks.next() {
                Some("exp") => {
                    let c0 = keyed(n, toks.next(), "C0")?;
                    let eps = keyed(n, toks.next(), "eps")?.to_f64();
                    if eps != 1.0 && eps != -1.0 {
                        return Err(err(n, "eps must be +1 or -1"));
                    }
                    d.c_exp = Some((c0, eps as i8));
                    d.conformal = Some("exp".into());
                }
                Some("einstein") => {
                    d.c_ein = Some((keyed(n, toks.next(), "C5")?, keyed(n, toks.next(), "C6")?));
                    d.conformal = Some("einstein".into());
                }
                Some("ratio") => d.conformal = Some("ratio".into()),
                other => return Err(err(n, format!("unknown conformal model {other:?}"))),
            },
            "num" | "den" => {
                let Some(payload) = rest.strip_prefix("term") else {
                    return Err(err(n, format!("expected `{head} term <p>/<q> <c>`")));
                };
                let t = ExpPoly::parse_term(payload).map_err(|e| err(n, e))?;
                if head == "num" { d.num.push(t) } else { d.den.push(t) }
            }
            "tag" => {
                d.tag = Some(StructureTag::parse(rest).ok_or_else(|| err(n, format!("unknown tag `{rest}`")))?);
            }
            other => return Err(err(n, format!("unknown keyword `{other}`"))),
        }
    }
    let profile = match (d.canonical, d.terms.is_empty()) {
        (Some(c), true) => Profile::Canonical(c),
        (None, false) => Profile::Poly(Poly::from_terms(d.terms)),
        (Some(_), false) => return Err(ParseError::new("F given both as canonical and as terms")),
        (None, true) => return Err(ParseError::new("missing F")),
    };
    let conformal = match d.conformal.as_deref() {
        Some("exp") => {
            let (c0, eps) = d.c_exp.unwrap();
            ConformalModel::exp(c0, eps)
        }
        Some("einstein") => {
            let (c5, c6) = d.c_ein.unwrap();
            ConformalModel::einstein(c5, c6)
        }
        Some(_) => {
            if d.num.is_empty() || d.den.is_empty() {
                return Err(ParseError::new("C ratio needs num and den terms"));
            }
            ConformalModel::Ratio { num: Poly::from_terms(d.num), den: Poly::from_terms(d.den) }
        }
        None => return Err(ParseError::new("missing C")),
    };
    let domain = d.domain.ok_or_else(|| ParseError::new("missing domain"))?;
    MetricSpec::new(d.name.unwrap_or_else(|| "unnamed".into()), profile, conformal, domain, d.tag)
        .map_err(|e| ParseError::new(e.to_string()))
}

fn endpoint(x: f64) -> String {
    Coef::real(x).to_string()
}

pub fn emit(m: &MetricSpec) -> String {
    let d = m.domain();
    let kind = |c: bool| if c { "closed" } else { "open" };
    let mut out = vec![
        format!("name {}", m.name()),
        format!("domain {} {} {} {}", endpoint(d.lo), endpoint(d.hi), kind(d.lo_closed), kind(d.hi_closed)),
    ];
    match m.profile() {
        Profile::Canonical(c) => out.push(format!("F canonical {} {} {} {}", c[0], c[1], c[2], c[3])),
        _ => out.extend(m.f_poly().term_lines("F ")),
    }
    match m.conformal() {
        ConformalModel::Exp { c0, eps } => out.push(format!("C exp C0={c0} eps={eps:+}")),
        ConformalModel::Einstein { c5, c6 } => out.push(format!("C einstein C5={c5} C6={c6}")),
        ConformalModel::Ratio { num, den } => {
            out.push("C ratio".into());
            out.extend(num.term_lines("num "));
            out.extend(den.term_lines("den "));
        }
    }
    if let Some(t) = m.tag() {
        out.push(format!("tag {}", t.name()));
    }
    out.join("\n") + "\n"
}
