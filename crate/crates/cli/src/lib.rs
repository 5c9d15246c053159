//! Command-line front end. `run` returns the process exit code:
//! 0 success, 1 usage, 2 parse error, 3 numeric failure.

pub mod metricfile;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use u2metric::btflat::{bt_integrate, bt_operators, bt_search, BtState, BtTrajectory, SeedKind};
use u2metric::catalog::{self, Params};
use u2metric::classify::{classify, ClassifyOptions};
use u2metric::curvature::{sample, scalar_jet, weyl_half_vanishes};
use u2metric::operators::OperatorSign;
use u2metric::geometry::{ambikahler_transform, classify_end, find_bolts, Side};
use u2metric::{Coef, Error, Jet4, MetricSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "u2metric", version, about = "U(2)-invariant 4-metrics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide the canonical-metric predicates.
    Classify {
        file: PathBuf,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Decide from grid residuals even when exact identities apply.
        #[arg(long)]
        residual: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Tabulate curvature quantities on a grid.
    Curvature {
        file: PathBuf,
        /// `a:b:n`, n points from a to b.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Describe both ends and the bolts.
    Ends { file: PathBuf },
    /// Write the ambiKähler partner.
    Transform {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Catalog {
        #[command(subcommand)]
        cmd: CatalogCmd,
    },
    Bt {
        #[command(subcommand)]
        cmd: BtCmd,
    },
    Roots {
        #[command(subcommand)]
        cmd: RootsCmd,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    List,
    Emit {
        name: String,
        /// `key=value`, repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Seeds {
    Random,
    Einstein,
    ZeroScalar,
}

#[derive(Subcommand)]
enum BtCmd {
    /// Residuals of the B^t system along a metric.
    Residuals {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        /// `const:<v>` replaces the scalar curvature by a constant.
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate from a state file.
    Integrate {
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long)]
        init: PathBuf,
        /// `a:b`; `a` must equal the state's z.
        #[arg(long, allow_hyphen_values = true)]
        span: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized search for non-conformally-extremal solutions.
    Search {
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 32)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        span: f64,
        #[arg(long, value_enum, default_value_t = Seeds::Random)]
        kind: Seeds,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RootsCmd {
    Page,
}

/// Failure with its exit code.
struct Fail(i32, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::UnknownMetric(_) | Error::BadParameter { .. } | Error::InvalidMetric(_) => {
                Fail(2, e.to_string())
            }
            _ => Fail(3, e.to_string()),
        }
    }
}

type Out = Result<(), Fail>;

fn usage(msg: impl Into<String>) -> Fail {
    Fail(1, msg.into())
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<MetricSpec, Fail> {
    metricfile::parse(&read(path)?).map_err(|e| Fail(2, format!("{}: {e}", path.display())))
}

/// Writes to `path` atomically, or to stdout.
fn write_out(path: Option<&Path>, text: &str) -> Out {
    let Some(path) = path else {
        print!("{text}");
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| Fail(3, format!("writing {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn parse_grid(s: &str) -> Result<Vec<f64>, Fail> {
    let bad = || usage(format!("grid must be a:b:n with n ≥ 2, got `{s}`"));
    let p: Vec<&str> = s.split(':').collect();
    let [a, b, n] = p[..] else { return Err(bad()) };
    let num = |x: &str| x.parse::<Coef>().map(|c| u2metric::Scalar::to_f64(&c)).map_err(|_| bad());
    let (a, b) = (num(a)?, num(b)?);
    let n: usize = n.parse().map_err(|_| bad())?;
    if n < 2 || !(a.is_finite() && b.is_finite()) {
        return Err(bad());
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

fn parse_span(s: &str) -> Result<(f64, f64), Fail> {
    let bad = || usage(format!("span must be a:b, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
}

fn fmt_num(v: f64) -> String {
    format!("{v:e}")
}

/// TSV with a one-line `#` header naming the tool version and columns.
fn tsv(columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = format!("# u2metric {VERSION} | {}\n", columns.join("\t"));
    for r in rows {
        out.push_str(&r.join("\t"));
        out.push('\n');
    }
    out
}

fn cmd_classify(file: &Path, t: Option<f64>, tol: f64, residual: bool, format: Format) -> Out {
    let m = load(file)?;
    let opts = ClassifyOptions { tol, t, force_residual: residual, ..ClassifyOptions::default() };
    let r = classify(&m, &opts)?;
    let text = match format {
        Format::Text => r.to_text(),
        Format::Json => serde_json::to_string_pretty(&r).map_err(|e| Fail(3, e.to_string()))? + "\n",
    };
    write_out(None, &text)
}

fn potential(p: f64, zero: bool) -> String {
    if zero {
        "weyl-half-zero".into()
    } else {
        fmt_num(p)
    }
}

fn cmd_curvature(file: &Path, grid: &str, out: Option<&Path>) -> Out {
    let m = load(file)?;
    let zs = parse_grid(grid)?;
    let plus_zero = weyl_half_vanishes(&m, OperatorSign::Plus);
    let minus_zero = weyl_half_vanishes(&m, OperatorSign::Minus);
    let mut rows = Vec::new();
    for z in zs {
        let s = sample(&m, z)?;
        let mut row: Vec<String> =
            [s.z, s.f, s.c, s.s, s.ric0_a, s.ric0_b, s.w_plus, s.w_minus, s.bach_b1, s.bach_b2]
                .iter()
                .map(|v| fmt_num(*v))
                .collect();
        row.push(potential(s.delw_plus_pot, plus_zero));
        row.push(potential(s.delw_minus_pot, minus_zero));
        rows.push(row);
    }
    let cols = ["z", "F", "C", "s", "ric0_a", "ric0_b", "w_plus", "w_minus", "B1", "B2", "P_plus", "P_minus"];
    write_out(out, &tsv(&cols, &rows))
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn cmd_ends(file: &Path) -> Out {
    let m = load(file)?;
    let mut out = format!("metric {}\ndomain {}\n", m.name(), m.domain());
    for side in [Side::Lower, Side::Upper] {
        let e = classify_end(&m, side);
        let _ = write!(
            out,
            "{} {} endpoint={} complete={} finite_distance={} curvature_blowup={}",
            side.name(),
            e.kind.name(),
            e.orders.endpoint,
            yes(e.complete),
            yes(e.finite_distance),
            yes(e.curvature_blowup)
        );
        if let Some(k) = e.self_intersection {
            let _ = write!(out, " self_intersection={k}");
        }
        if let Some(a) = e.cone_angle {
            let _ = write!(out, " cone_angle={a}");
        }
        if let Some(w) = e.weyl_decay {
            let _ = write!(out, " weyl_decay={}", yes(w));
        }
        out.push('\n');
        for d in &e.diagnostics {
            let _ = writeln!(out, "diagnostic {} {d}", side.name());
        }
    }
    for b in find_bolts(&m) {
        let _ = writeln!(
            out,
            "zero z0={} slope={} smooth_quotient={} degenerate={}",
            b.z0,
            b.k,
            yes(b.smooth_quotient),
            yes(b.degenerate)
        );
    }
    write_out(None, &out)
}

fn cmd_transform(file: &Path, out: Option<&Path>) -> Out {
    let m = load(file)?;
    let t = ambikahler_transform(&m)?;
    write_out(out, &metricfile::emit(&t))
}

fn parse_params(raw: &[String]) -> Result<Params, Fail> {
    let mut p = Params::new();
    for kv in raw {
        let (k, v) = kv.split_once('=').ok_or_else(|| usage(format!("--param expects key=value, got `{kv}`")))?;
        let v: Coef = v.parse().map_err(|e: u2metric::ParseError| Fail(2, format!("--param {k}: {e}")))?;
        p.insert(k.to_string(), v);
    }
    Ok(p)
}

fn cmd_catalog(cmd: CatalogCmd) -> Out {
    match cmd {
        CatalogCmd::List => write_out(None, &catalog::listing()),
        CatalogCmd::Emit { name, params, out } => {
            let m = catalog::catalog_get(&name, &parse_params(&params)?)?;
            write_out(out.as_deref(), &metricfile::emit(&m))
        }
    }
}

fn bt_rows(tr: &BtTrajectory) -> String {
    let mut cols: Vec<&str> = BtState::FIELDS.to_vec();
    cols.extend(["F4d", "C2d", "T", "e0", "F1res", "F2res"]);
    let rows: Vec<Vec<String>> = tr
        .samples
        .iter()
        .map(|s| {
            let mut r: Vec<String> = s.state.values().iter().map(|v| fmt_num(*v)).collect();
            let res = &s.residuals;
            r.extend([s.f4d, s.c2d, res.tval, res.e0, res.f1res, res.f2res].iter().map(|v| fmt_num(*v)));
            r
        })
        .collect();
    tsv(&cols, &rows)
}

fn bt_summary(tr: &BtTrajectory) -> String {
    let mut s = format!(
        "t {}\nsamples {}\nt_drift {:e}\nconformal_extremality_residual {:e}\naccepted {}\nrejected {}\n",
        tr.t,
        tr.samples.len(),
        tr.t_drift,
        tr.conformal_extremality_residual(),
        tr.accepted,
        tr.rejected
    );
    if let Some(why) = &tr.truncated {
        let _ = writeln!(s, "truncated {why}");
    }
    s
}

fn read_state(path: &Path) -> Result<BtState, Fail> {
    let text = read(path)?;
    let mut vals: [Option<f64>; 9] = [None; 9];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Fail(2, format!("{}: line {}: {msg}", path.display(), i + 1));
        let (k, v) = line.split_once(char::is_whitespace).ok_or_else(|| bad("expected `key value`".into()))?;
        let idx = BtState::FIELDS
            .iter()
            .position(|f| *f == k)
            .ok_or_else(|| bad(format!("unknown key `{k}`; expected one of {:?}", BtState::FIELDS)))?;
        let v: Coef = v.trim().parse().map_err(|e: u2metric::ParseError| bad(e.to_string()))?;
        vals[idx] = Some(u2metric::Scalar::to_f64(&v));
    }
    let mut out = [0.0; 9];
    for (i, v) in vals.iter().enumerate() {
        out[i] = v.ok_or_else(|| Fail(2, format!("{}: missing `{}`", path.display(), BtState::FIELDS[i])))?;
    }
    Ok(BtState::from_values(out))
}

fn cmd_bt(cmd: BtCmd) -> Out {
    match cmd {
        BtCmd::Residuals { file, t, s, grid, out } => {
            let m = load(&file)?;
            let s_const = match s.as_deref() {
                None => None,
                Some(spec) => {
                    let v = spec
                        .strip_prefix("const:")
                        .and_then(|v| v.parse::<f64>().ok())
                        .ok_or_else(|| usage(format!("--s expects const:<v>, got `{spec}`")))?;
                    Some(v)
                }
            };
            let mut rows = Vec::new();
            for z in parse_grid(&grid)? {
                let (f, c) = m.jets_at::<f64>(z)?;
                let sj = match s_const {
                    Some(v) => Jet4::constant(v),
                    None => scalar_jet(&f, &c),
                };
                let r = bt_operators(&f, &c, &sj, t);
                rows.push([z, r.e0.value(), r.f1res.value(), r.f2res.value(), r.tval.value()].map(fmt_num).to_vec());
            }
            write_out(out.as_deref(), &tsv(&["z", "e0", "F1res", "F2res", "T"], &rows))
        }
        BtCmd::Integrate { t, init, span, tol, out } => {
            let state = read_state(&init)?;
            let tr = bt_integrate(&state, t, parse_span(&span)?, tol)?;
            match out {
                Some(p) => {
                    write_out(Some(&p), &bt_rows(&tr))?;
                    write_out(None, &bt_summary(&tr))
                }
                None => write_out(None, &bt_rows(&tr)),
            }
        }
        BtCmd::Search { t, trials, seed, span, kind, out } => {
            let kind = match kind {
                Seeds::Random => SeedKind::Random,
                Seeds::Einstein => SeedKind::Einstein,
                Seeds::ZeroScalar => SeedKind::ZeroScalar,
            };
            let r = bt_search(t, trials, span, seed, kind)?;
            let mut text = format!("trials {}\naccepted_trials {}\nresidual {:e}\n", r.trials, r.trials_ok, r.residual);
            for (k, v) in BtState::FIELDS.iter().zip(r.seed_state.values()) {
                let _ = writeln!(text, "seed.{k} {v:e}");
            }
            text.push_str(&bt_summary(&r.trajectory));
            if let Some(p) = out {
                write_out(Some(&p), &bt_rows(&r.trajectory))?;
            }
            write_out(None, &text)
        }
    }
}

fn cmd_roots() -> Out {
    let pc = catalog::page_constants(1e-15)?;
    let text = format!("nu {}\nz0 {}\ncoeff {}\nkappa {}\n", pc.nu, pc.z0, pc.coeff, pc.kappa);
    write_out(None, &text)
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.cmd {
        Cmd::Classify { file, t, tol, residual, format } => cmd_classify(&file, t, tol, residual, format),
        Cmd::Curvature { file, grid, out } => cmd_curvature(&file, &grid, out.as_deref()),
        Cmd::Ends { file } => cmd_ends(&file),
        Cmd::Transform { file, out } => cmd_transform(&file, out.as_deref()),
        Cmd::Catalog { cmd } => cmd_catalog(cmd),
        Cmd::Bt { cmd } => cmd_bt(cmd),
        Cmd::Roots { cmd: RootsCmd::Page } => cmd_roots(),
    };
    match result {
        Ok(()) => 0,
        Err(Fail(code, msg)) => {
            eprintln!("u2metric: {msg}");
            code
        }
    }
}
