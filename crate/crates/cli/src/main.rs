use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};
use statrs::function::erf::erfc;

use posstable::cmlab::{self, SignDecision};
use posstable::density::{boundary_limits, PowerExponent, StableLaw, Verdict};
use posstable::frontier::{self, FrontierPoint, MAP_TOL};
use posstable::kanter::check_certificates_with;
use posstable::mc::{self, Identity};
use posstable::specfun::gamma;
use posstable::{Error, Exec, StabilityIndex};

const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

#[derive(Parser, Debug)]
#[command(
    name = "posstable",
    version,
    about = "Positive stable laws, their powers and the unimodality frontier"
)]
struct Cli {
    /// Worker threads for the parallel sweeps (default: all cores).
    #[arg(long, global = true, env = "POSSTABLE_THREADS")]
    threads: Option<usize>,
    /// Run every sweep on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate R, R_tilde and R_hat on an alpha grid.
    Frontier(FrontierArgs),
    /// Classify the modes of Z_alpha^r on an (alpha, r) grid.
    Modes(ModesArgs),
    /// Tabulate the density of Z_alpha or of its power Z_alpha^r.
    Density(DensityArgs),
    /// Exact complete-monotonicity check of (lambda^alpha + t) exp(-lambda^alpha).
    CmCheck(CmArgs),
    /// Monte Carlo checks of the distributional identities (JSON report).
    VerifyIdentities(VerifyArgs),
    /// Deterministic numerical checks; one line per check.
    Selftest(SelftestArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Write to this file instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Debug, Serialize)]
struct FrontierArgs {
    #[arg(long, default_value_t = 0.1)]
    alpha_min: f64,
    #[arg(long, default_value_t = 0.95)]
    alpha_max: f64,
    #[arg(long, default_value_t = 18)]
    steps: usize,
    #[arg(long, default_value_t = frontier::CURVE_TOL)]
    tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    out: Output,
}

#[derive(Args, Debug, Serialize)]
struct ModesArgs {
    /// Comma-separated alpha values (default 0.1, 0.2, ..., 0.9).
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Comma-separated r values (default -3, -2.375, ..., 2).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    r: Vec<f64>,
    #[arg(long, default_value_t = MAP_TOL)]
    tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    out: Output,
}

#[derive(Args, Debug, Serialize)]
struct DensityArgs {
    #[arg(long)]
    alpha: f64,
    /// Power exponent; the table is for the density of Z_alpha^r.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    r: f64,
    #[arg(long, default_value_t = 1e-2)]
    x_min: f64,
    #[arg(long, default_value_t = 1e2)]
    x_max: f64,
    /// Log-spaced points between x_min and x_max.
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[command(flatten)]
    #[serde(skip)]
    out: Output,
}

#[derive(Args, Debug)]
struct CmArgs {
    /// Rational alpha in (0, 1], e.g. 3/4.
    #[arg(long)]
    alpha: String,
    /// Rational t, e.g. 4/3.
    #[arg(long, allow_hyphen_values = true)]
    t: String,
    #[arg(long, default_value_t = 5)]
    max_order: u32,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Sample size for the KS and Mellin checks.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Sample size for the Laplace checks and the exponent calibration.
    #[arg(long, default_value_t = 1_000_000)]
    n_laplace: usize,
    #[arg(short, long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Print the results as JSON.
    #[arg(long)]
    json: bool,
}

enum Failure {
    Usage(String),
    Gate(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = posstable::par::configure_threads(n) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    let result = match cli.command {
        Command::Frontier(a) => cmd_frontier(a, exec),
        Command::Modes(a) => cmd_modes(a, exec),
        Command::Density(a) => cmd_density(a),
        Command::CmCheck(a) => cmd_cm_check(a),
        Command::VerifyIdentities(a) => cmd_verify(a, exec),
        Command::Selftest(a) => cmd_selftest(a, exec),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Gate(m)) => {
            eprintln!("gate failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Runtime(e.to_string()))
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialise")
}

fn json_doc(command: &str, config: Value, body: Value) -> String {
    let doc = json!({
        "version": VERSION,
        "command": command,
        "config": config,
        "result": body,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json");
    s.push('\n');
    s
}

fn cmd_frontier(a: FrontierArgs, exec: Exec) -> Result<(), Failure> {
    if !(a.tol > 0.0 && a.tol.is_finite()) {
        return Err(Failure::Usage(format!(
            "--tol must be positive, got {}",
            a.tol
        )));
    }
    frontier::alpha_grid(a.alpha_min, a.alpha_max, a.steps).map_err(usage)?;
    let rows = frontier::sweep(a.alpha_min, a.alpha_max, a.steps, a.tol, exec).map_err(usage)?;
    let failed: Vec<String> = rows
        .iter()
        .filter_map(|e| {
            e.result
                .as_ref()
                .err()
                .map(|err| format!("alpha={}: {err}", e.alpha))
        })
        .collect();
    let text = match a.out.format {
        Format::Csv => {
            let mut s = String::from("alpha,R,R_tilde,R_hat,lower,upper,tol");
            if !failed.is_empty() {
                s.push_str(",status");
            }
            s.push('\n');
            for e in &rows {
                match &e.result {
                    Ok(p) => {
                        let _ = write!(
                            s,
                            "{},{},{},{},{},{},{}",
                            num(p.alpha),
                            num(p.r),
                            num(p.r_tilde),
                            num(p.r_hat),
                            num(p.lower),
                            num(p.upper),
                            num(p.tol)
                        );
                        if !failed.is_empty() {
                            s.push_str(",ok");
                        }
                    }
                    Err(err) => {
                        let _ = write!(
                            s,
                            "{},,,,,,{},{}",
                            num(e.alpha),
                            num(a.tol),
                            csv_field(&err.to_string())
                        );
                    }
                }
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let body: Vec<Value> = rows
                .iter()
                .map(|e| match &e.result {
                    Ok(p) => to_json(p),
                    Err(err) => json!({"alpha": e.alpha, "error": err.to_string()}),
                })
                .collect();
            json_doc("frontier", to_json(&a), Value::Array(body))
        }
    };
    emit(&a.out.output, &text)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Gate(failed.join("; ")))
    }
}

fn cmd_modes(mut a: ModesArgs, exec: Exec) -> Result<(), Failure> {
    let (da, dr) = frontier::standard_map_axes();
    if a.alpha.is_empty() {
        a.alpha = da;
    }
    if a.r.is_empty() {
        a.r = dr;
    }
    for &x in &a.alpha {
        StabilityIndex::new(x).map_err(usage)?;
    }
    for &r in &a.r {
        PowerExponent::new(r).map_err(usage)?;
    }
    if !(a.tol > 0.0 && a.tol.is_finite()) {
        return Err(Failure::Usage(format!(
            "--tol must be positive, got {}",
            a.tol
        )));
    }
    let cells = frontier::mode_map(&a.alpha, &a.r, a.tol, exec).map_err(usage)?;
    let failed: Vec<String> = cells
        .iter()
        .filter_map(|c| {
            c.result
                .as_ref()
                .err()
                .map(|e| format!("({}, {}): {e}", c.alpha, c.r))
        })
        .collect();
    let text = match a.out.format {
        Format::Csv => {
            let mut s = String::from("alpha,r,boundary_class,interior_maxima,verdict");
            if !failed.is_empty() {
                s.push_str(",status");
            }
            s.push('\n');
            for c in &cells {
                match &c.result {
                    Ok(p) => {
                        let _ = write!(
                            s,
                            "{},{},{},{},{}",
                            num(c.alpha),
                            num(c.r),
                            p.boundary_class.as_str(),
                            p.interior_maxima,
                            p.verdict.as_str()
                        );
                        if !failed.is_empty() {
                            s.push_str(",ok");
                        }
                    }
                    Err(e) => {
                        let _ = write!(
                            s,
                            "{},{},,,,{}",
                            num(c.alpha),
                            num(c.r),
                            csv_field(&e.to_string())
                        );
                    }
                }
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let body: Vec<Value> = cells
                .iter()
                .map(|c| match &c.result {
                    Ok(p) => json!({
                        "alpha": c.alpha,
                        "r": c.r,
                        "boundary_class": p.boundary_class.as_str(),
                        "interior_maxima": p.interior_maxima,
                        "verdict": p.verdict.as_str(),
                    }),
                    Err(e) => json!({"alpha": c.alpha, "r": c.r, "error": e.to_string()}),
                })
                .collect();
            json_doc("modes", to_json(&a), Value::Array(body))
        }
    };
    emit(&a.out.output, &text)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Gate(failed.join("; ")))
    }
}

fn cmd_density(a: DensityArgs) -> Result<(), Failure> {
    let alpha = StabilityIndex::new(a.alpha).map_err(usage)?;
    let r = PowerExponent::new(a.r).map_err(usage)?;
    if !(a.x_min > 0.0 && a.x_max > a.x_min && a.x_max.is_finite()) {
        return Err(Failure::Usage(format!(
            "need 0 < x_min < x_max, got [{}, {}]",
            a.x_min, a.x_max
        )));
    }
    if a.points < 2 {
        return Err(Failure::Usage("--points must be at least 2".into()));
    }
    let law = StableLaw::new(alpha);
    let (l0, l1) = (a.x_min.ln(), a.x_max.ln());
    let mut xs: Vec<f64> = (0..a.points)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (a.points - 1) as f64).exp())
        .collect();
    xs[0] = a.x_min;
    xs[a.points - 1] = a.x_max;
    let plain = a.r == 1.0;
    let mut rows = vec![];
    for &x in &xs {
        if plain {
            let p = law.point(x)?;
            let (cdf, sf) = law.cdf_sf(x)?;
            rows.push(json!({
                "x": x, "f": p.f, "f_prime": p.f_prime(), "cdf": cdf, "sf": sf,
                "elasticity": p.elasticity, "f_abs_error": p.f_abs_error,
                "regime": format!("{:?}", p.regime).to_lowercase(),
            }));
        } else {
            rows.push(json!({"x": x, "f_r": law.power_density(r, x)?}));
        }
    }
    let text = match a.out.format {
        Format::Csv => {
            let mut s = if plain {
                String::from("x,f,f_prime,cdf,sf,elasticity,f_abs_error,regime\n")
            } else {
                String::from("x,f_r\n")
            };
            for row in &rows {
                let g = |k: &str| num(row[k].as_f64().unwrap_or(f64::NAN));
                if plain {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{}",
                        g("x"),
                        g("f"),
                        g("f_prime"),
                        g("cdf"),
                        g("sf"),
                        g("elasticity"),
                        g("f_abs_error"),
                        row["regime"].as_str().unwrap_or("")
                    );
                } else {
                    let _ = writeln!(s, "{},{}", g("x"), g("f_r"));
                }
            }
            s
        }
        Format::Json => json_doc("density", to_json(&a), Value::Array(rows)),
    };
    emit(&a.out.output, &text)
}

fn cmd_cm_check(a: CmArgs) -> Result<(), Failure> {
    let alpha = cmlab::parse_rational(&a.alpha).map_err(usage)?;
    let t = cmlab::parse_rational(&a.t).map_err(usage)?;
    if a.max_order < 1 {
        return Err(Failure::Usage("--max-order must be at least 1".into()));
    }
    let report = cmlab::cm_check(&alpha, &t, a.max_order).map_err(usage)?;
    let text = if a.json {
        json_doc(
            "cm-check",
            json!({"alpha": a.alpha, "t": a.t, "max_order": a.max_order}),
            to_json(&report),
        )
    } else {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "G(lambda) = (lambda^({alpha}) + {t}) exp(-lambda^({alpha})), mu = lambda^(-{alpha})"
        );
        for o in &report.orders {
            let _ = writeln!(
                s,
                "order {}: (-1)^n G^(n) = exp(-lambda^alpha) lambda^({}) Q(mu)",
                o.order, o.power
            );
            let _ = writeln!(
                s,
                "  Q coefficients (mu^0 upwards): {}",
                o.coefficients.join(" ")
            );
            let _ = writeln!(s, "  Q = {} * [{}]", o.content, o.normalized.join(" "));
            let decision = match &o.decision {
                SignDecision::NonNegative { method } => format!("nonnegative ({method})"),
                SignDecision::Negative { mu, value } => {
                    format!("negative at mu = {mu}, Q = {value}")
                }
                SignDecision::Inconclusive { hint } => format!("inconclusive: {hint}"),
            };
            let _ = writeln!(s, "  sign: {decision}");
        }
        match (report.first_failing_order, report.inconclusive_order) {
            (Some(n), _) => {
                let _ = writeln!(
                    s,
                    "first_failing_order={n} witness mu={} lambda={}",
                    report.witness_mu.as_deref().unwrap_or("?"),
                    num(report.witness_lambda.unwrap_or(f64::NAN))
                );
            }
            (None, Some(n)) => {
                let _ = writeln!(s, "inconclusive at order {n}");
            }
            (None, None) => {
                let _ = writeln!(s, "pass through order {}", report.max_order);
            }
        }
        s
    };
    emit(&None, &text)?;
    match report.inconclusive_order {
        Some(n) => Err(Failure::Gate(format!("sign undecided at order {n}"))),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct Gate {
    name: String,
    pass: bool,
    detail: String,
    #[serde(skip_serializing_if = "Value::is_null")]
    data: Value,
}

impl Gate {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Gate {
            name: name.into(),
            pass,
            detail: detail.into(),
            data: Value::Null,
        }
    }

    fn with(mut self, data: Value) -> Self {
        self.data = data;
        self
    }
}

fn gate_from(name: String, r: Result<Gate, Error>) -> Gate {
    r.unwrap_or_else(|e| Gate::new(name, false, format!("error: {e}")))
}

fn al(a: f64) -> StabilityIndex {
    StabilityIndex::new(a).expect("fixed alpha values are valid")
}

fn cm_counterexample_gate() -> Gate {
    let r = (|| -> Result<Gate, Error> {
        let three_quarters = cmlab::parse_rational("3/4")?;
        let four_thirds = cmlab::parse_rational("4/3")?;
        let rep = cmlab::cm_check(&three_quarters, &four_thirds, 5)?;
        let n = rep.first_failing_order;
        let (q5, _) = cmlab::q_polynomial(&three_quarters, &four_thirds, 5)?;
        let (_, prim) = q5.primitive();
        let want: Vec<num_bigint::BigInt> = [81, -27, -135, -150, 35, 195]
            .iter()
            .map(|&c| c.into())
            .collect();
        let at = q5.eval(&cmlab::parse_rational("4/5")?);
        let neg = at < BigRational::from_integer(0.into());
        let pass = n == Some(5) && prim == want && neg;
        let detail = match n {
            Some(n) => format!("first_failing_order={n}"),
            None => "first_failing_order=none".into(),
        };
        Ok(Gate::new("remark4a", pass, detail).with(json!({
            "witness_mu": rep.witness_mu,
            "q5_at_4_5": at.to_string(),
            "q5_normalized": prim.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })))
    })();
    gate_from("remark4a".into(), r)
}

fn cmd_verify(a: VerifyArgs, exec: Exec) -> Result<(), Failure> {
    if a.n < 2 || a.n_laplace < 2 {
        return Err(Failure::Usage("sample sizes must be at least 2".into()));
    }
    let mut gates = vec![];

    let cal = mc::calibrate_kanter_exponent(a.seed, a.n_laplace, exec);
    gates.push(match cal {
        Ok(c) => Gate::new(
            "kanter_exponent",
            c.chosen == posstable::kanter::KANTER_EXPONENT_LABEL,
            format!("chosen={}", c.chosen),
        )
        .with(to_json(&c)),
        Err(e) => Gate::new("kanter_exponent", false, format!("error: {e}")),
    });

    let lambdas = mc::CALIBRATION_LAMBDAS;
    for alpha in mc::CALIBRATION_ALPHAS {
        let name = format!("laplace_quadrature alpha={alpha}");
        gates.push(gate_from(
            name.clone(),
            (|| {
                let law = StableLaw::new(al(alpha));
                let mut worst: f64 = 0.0;
                for l in lambdas {
                    worst = worst.max((law.laplace(l)? - (-l.powf(alpha)).exp()).abs());
                }
                Ok(Gate::new(
                    name,
                    worst <= 1e-7,
                    format!("max_abs_error={worst:e} threshold=1e-7"),
                ))
            })(),
        ));
        let name = format!("laplace_mc alpha={alpha}");
        gates.push(gate_from(
            name.clone(),
            (|| {
                let z = mc::sample_z(al(alpha), a.seed, a.n_laplace, exec)?.values;
                let rep =
                    mc::laplace_report(name.clone(), &z, &lambdas, |l| Ok((-l.powf(alpha)).exp()))?;
                Ok(Gate::new(
                    name,
                    rep.pass,
                    format!("max_z={:.3} threshold={}", rep.discrepancy, rep.threshold),
                )
                .with(to_json(&rep)))
            })(),
        ));
    }

    let name = "z_ks alpha=0.5".to_string();
    gates.push(gate_from(
        name.clone(),
        (|| {
            let z = mc::sample_z(al(0.5), a.seed, a.n, exec)?.values;
            let rep = mc::ks_report(name.clone(), &z, |x| Ok(erfc(0.5 / x.sqrt())), exec)?;
            Ok(stat_gate(name, rep))
        })(),
    ));
    let name = "z_chi_squared alpha=0.7".to_string();
    gates.push(gate_from(
        name.clone(),
        (|| {
            let z = mc::sample_z(al(0.7), a.seed, a.n, exec)?.values;
            let rep = mc::chi_square_report(name.clone(), &z, &StableLaw::new(al(0.7)), 50)?;
            Ok(stat_gate(name, rep))
        })(),
    ));
    let name = "m_ks alpha=0.6".to_string();
    gates.push(gate_from(
        name.clone(),
        (|| {
            let m = mc::sample_m(al(0.6), a.seed, a.n, exec)?.values;
            let rep = mc::ks_report(name.clone(), &m, |x| mc::m_cdf(al(0.6), x), exec)?;
            Ok(stat_gate(name, rep))
        })(),
    ));

    for (which, alpha, r) in [
        (Identity::Additive, 0.4, 0.5),
        (Identity::Additive, 0.7, 3.0),
        (Identity::Multiplicative, 0.3, 0.3),
        (Identity::Multiplicative, 0.4, 0.5),
        (Identity::Multiplicative, 0.7, 3.0),
    ] {
        let name = format!("{} alpha={alpha} r={r}", which.as_str());
        gates.push(gate_from(
            name.clone(),
            (|| {
                let v = mc::verify_identity(which, al(alpha), r, a.seed, a.n, exec)?;
                let detail = v
                    .reports
                    .iter()
                    .map(|r| format!("{:?}={:.4}/{:.4}", r.statistic, r.discrepancy, r.threshold))
                    .collect::<Vec<_>>()
                    .join(" ");
                Ok(Gate::new(name, v.pass(), detail).with(to_json(&v)))
            })(),
        ));
    }

    for alpha in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        let name = format!("kanter_certificates alpha={alpha}");
        gates.push(gate_from(
            name.clone(),
            (|| {
                let rep = check_certificates_with(al(alpha), 10_000, exec)?;
                let v = rep.max_violation();
                Ok(Gate::new(name, v <= 1e-10, format!("max_violation={v:e}")))
            })(),
        ));
    }
    gates.push(cm_counterexample_gate());

    let failing: Vec<&str> = gates
        .iter()
        .filter(|g| !g.pass)
        .map(|g| g.name.as_str())
        .collect();
    let all_pass = failing.is_empty();
    let doc = json_doc(
        "verify-identities",
        to_json(&a),
        json!({
            "pass": all_pass,
            "entries": gates.iter().map(|g| format!("{}: {}", g.name, g.detail)).collect::<Vec<_>>(),
            "gates": gates,
        }),
    );
    emit(&a.output, &doc)?;
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Gate(failing.join(", ")))
    }
}

fn stat_gate(name: String, rep: mc::IdentityReport) -> Gate {
    Gate::new(
        name,
        rep.pass,
        format!(
            "{:?}={:.4} threshold={:.4}",
            rep.statistic, rep.discrepancy, rep.threshold
        ),
    )
}

fn cmd_selftest(a: SelftestArgs, exec: Exec) -> Result<(), Failure> {
    let mut gates: Vec<Gate> = vec![];

    gates.push(gate_from(
        "identity_zone".into(),
        (|| {
            let mut worst: f64 = 0.0;
            for alpha in [0.1, 0.2, 0.3, 0.4, 0.5] {
                let p = frontier::frontier_point(al(alpha), frontier::CURVE_TOL, exec)?;
                for v in [p.r, p.r_tilde, p.r_hat] {
                    worst = worst.max((v - alpha).abs());
                }
            }
            Ok(Gate::new(
                "identity_zone",
                worst <= 1e-3,
                format!("max |curve - alpha| = {worst:e}"),
            ))
        })(),
    ));

    for alpha in [0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95] {
        let name = format!("frontier alpha={alpha}");
        gates.push(gate_from(
            name.clone(),
            (|| {
                let p: FrontierPoint = frontier::frontier_point(al(alpha), 1e-8, exec)?;
                let sandwich = p.lower - 1e-3 <= p.r && p.r <= p.upper + 1e-3;
                let ordered = p.r < p.r_tilde && p.r_tilde < p.r_hat;
                Ok(Gate::new(
                    name,
                    sandwich && ordered,
                    format!(
                        "lower={:.6} R={:.6} upper={:.6} R_tilde-R={:.2e} R_hat-R_tilde={:.2e}",
                        p.lower,
                        p.r,
                        p.upper,
                        p.r_tilde - p.r,
                        p.r_hat - p.r_tilde
                    ),
                ))
            })(),
        ));
    }

    gates.push(gate_from(
        "cusp".into(),
        (|| {
            let r = frontier::compute_r(al(0.501), 1e-7)?;
            Ok(Gate::new(
                "cusp",
                r - 0.501 <= 5e-3,
                format!("R(0.501) - 0.501 = {:e}", r - 0.501),
            ))
        })(),
    ));

    gates.push(gate_from(
        "closed_form_half".into(),
        (|| {
            let law = StableLaw::new(al(0.5));
            let r = PowerExponent::new(-0.5)?;
            let mut worst: f64 = 0.0;
            for i in 0..=400 {
                let x = 0.05 + (20.0 - 0.05) * i as f64 / 400.0;
                let want = (-x * x / 4.0).exp() / std::f64::consts::PI.sqrt();
                worst = worst.max((law.power_density(r, x)? - want).abs());
            }
            Ok(Gate::new(
                "closed_form_half",
                worst <= 1e-10,
                format!("sup error = {worst:e}"),
            ))
        })(),
    ));

    for alpha in [0.3, 0.7] {
        let name = format!("boundary_limit alpha={alpha}");
        gates.push(gate_from(
            name.clone(),
            (|| {
                let law = StableLaw::new(al(alpha));
                let r = PowerExponent::new(-alpha)?;
                let lim = boundary_limits(al(alpha), r);
                let v = law.power_density(r, 1e-4)?;
                let err = (v - 1.0 / gamma(1.0 - alpha)).abs();
                let (h, x0) = (1e-3, 2e-3);
                let slope = (law.power_density(r, x0 + h)? - law.power_density(r, x0)?) / h;
                let d = lim.derivative.unwrap_or(f64::NAN);
                let sign_ok = slope.signum() == d.signum();
                Ok(Gate::new(
                    name,
                    err <= 1e-3 && sign_ok,
                    format!(
                        "|f(1e-4) - 1/Gamma(1-alpha)| = {err:e}, slope {slope:.4} vs limit {d:.4}"
                    ),
                ))
            })(),
        ));
    }

    gates.push(cm_counterexample_gate());

    gates.push(gate_from(
        "log_convexity".into(),
        (|| {
            let t = cmlab::log_convexity_threshold(&cmlab::parse_rational("3/4")?)?.t_threshold;
            let mut ok = t == cmlab::parse_rational("4/3")?;
            for i in 1..=9i64 {
                let alpha = BigRational::new(i.into(), 10.into());
                let bound = &alpha * cmlab::log_convexity_threshold(&alpha)?.t_threshold;
                let want = if i <= 5 {
                    alpha.clone()
                } else {
                    BigRational::from_integer(1.into())
                        / (BigRational::from_integer(4.into())
                            * (BigRational::from_integer(1.into()) - &alpha))
                };
                ok &= bound == want;
            }
            Ok(Gate::new(
                "log_convexity",
                ok,
                format!("threshold(3/4) = {t}"),
            ))
        })(),
    ));

    for (alpha, r, want) in [
        (0.9, -1.0, Verdict::NotUnimodal),
        (0.4, -0.4, Verdict::Monotone),
    ] {
        let name = format!("modes alpha={alpha} r={r}");
        gates.push(gate_from(
            name.clone(),
            (|| {
                let p = frontier::classify_point(al(alpha), PowerExponent::new(r)?, MAP_TOL)?;
                Ok(Gate::new(name, p.verdict == want, p.verdict.as_str()))
            })(),
        ));
    }

    for alpha in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
        let name = format!("kanter_certificates alpha={alpha}");
        gates.push(gate_from(
            name.clone(),
            (|| {
                let v = check_certificates_with(al(alpha), 10_000, exec)?.max_violation();
                Ok(Gate::new(name, v <= 1e-10, format!("max_violation={v:e}")))
            })(),
        ));
    }

    let failing: Vec<&str> = gates
        .iter()
        .filter(|g| !g.pass)
        .map(|g| g.name.as_str())
        .collect();
    let text = if a.json {
        json_doc(
            "selftest",
            Value::Null,
            json!({"pass": failing.is_empty(), "gates": gates}),
        )
    } else {
        let mut s = String::new();
        for g in &gates {
            let _ = writeln!(
                s,
                "{} {}: {}",
                if g.pass { "PASS" } else { "FAIL" },
                g.name,
                g.detail
            );
        }
        let _ = writeln!(
            s,
            "{} of {} checks passed",
            gates.len() - failing.len(),
            gates.len()
        );
        s
    };
    emit(&None, &text)?;
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Gate(failing.join(", ")))
    }
}
