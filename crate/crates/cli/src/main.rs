//! `ncaz`: randomized verification of operator martingale tail bounds and
//! direct evaluation of the bound formulas.
//!
//! Exit codes: 0 on success, 1 when a verification run records a
//! non-degenerate violation, 2 on usage errors.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncaz_core::bounds;
use ncaz_core::checkers::{run_suite_timed, summarize, Summary};
use ncaz_core::{CheckResult, SuiteConfig, SuiteKind, Tolerance};
use serde::Serialize;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "ncaz", version, about = "Noncommutative martingale concentration checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run randomized verification suites and write a report.
    Verify(VerifyArgs),
    /// Evaluate one bound formula.
    Bound {
        name: BoundName,
        #[command(flatten)]
        params: BoundParamsArgs,
    },
    /// Evaluate one bound formula over a grid of one parameter; CSV to stdout.
    Sweep {
        name: BoundName,
        /// Parameter to vary.
        #[arg(long)]
        vary: Scalar,
        /// Comma-separated values of the varied parameter.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        params: BoundParamsArgs,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = parse_suite)]
    suite: SuiteKind,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, env = "NCAZ_SEED", default_value_t = 0)]
    seed: u64,
    /// Factor dimensions, e.g. `2,2,2`; repeat or separate with `;` for
    /// several choices.
    #[arg(long)]
    dims: Vec<String>,
    /// Number of steps (factors). Without --dims, uses qubit factors.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    /// Relative acceptance tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Report path; standard output when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Record per-trial wall-clock durations (makes reports run-dependent).
    #[arg(long)]
    timings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoundName {
    H,
    Azuma,
    Hoeffding,
    Chernoff,
    Super,
    SuperTwoSided,
    Thm32,
    Mgf,
    Cor34,
    Lp,
    Bernstein,
    Cor36,
    Cor36Display,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Scalar {
    S,
    Lambda,
    N,
    #[value(name = "M")]
    M,
    #[value(name = "D")]
    D,
    #[value(name = "K2")]
    K2,
    #[value(name = "K")]
    K,
    #[value(name = "Mmax")]
    Mmax,
    P,
    B2,
}

impl Scalar {
    const ALL: [Scalar; 10] = [
        Scalar::S,
        Scalar::Lambda,
        Scalar::N,
        Scalar::M,
        Scalar::D,
        Scalar::K2,
        Scalar::K,
        Scalar::Mmax,
        Scalar::P,
        Scalar::B2,
    ];

    fn name(self) -> &'static str {
        match self {
            Scalar::S => "s",
            Scalar::Lambda => "lambda",
            Scalar::N => "n",
            Scalar::M => "M",
            Scalar::D => "D",
            Scalar::K2 => "K2",
            Scalar::K => "K",
            Scalar::Mmax => "Mmax",
            Scalar::P => "p",
            Scalar::B2 => "b2",
        }
    }
}

#[derive(Args, Clone, Default)]
struct BoundParamsArgs {
    /// Argument of h.
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Deviation threshold (alias --t).
    #[arg(long, alias = "t")]
    lambda: Option<f64>,
    /// Number of summands (scalar Chernoff).
    #[arg(long)]
    n: Option<f64>,
    #[arg(long = "M")]
    m: Option<f64>,
    /// Supermartingale drift constant (may be negative).
    #[arg(long = "D", allow_negative_numbers = true)]
    d: Option<f64>,
    #[arg(long = "K2")]
    k2: Option<f64>,
    #[arg(long = "K")]
    k: Option<f64>,
    #[arg(long = "Mmax")]
    m_max: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    b2: Option<f64>,
    /// Lipschitz constants c_j.
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,
    /// Conditional variances sigma_j^2.
    #[arg(long, value_delimiter = ',')]
    sigma2: Option<Vec<f64>>,
    /// Per-step slacks a_j (default zero).
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
    /// Per-step coefficients b_j (default zero).
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<f64>>,
    /// Per-step maxima M_j.
    #[arg(long = "Msteps", value_delimiter = ',')]
    m_steps: Option<Vec<f64>>,
}

impl BoundParamsArgs {
    fn scalar(&self, which: Scalar) -> Option<f64> {
        match which {
            Scalar::S => self.s,
            Scalar::Lambda => self.lambda,
            Scalar::N => self.n,
            Scalar::M => self.m,
            Scalar::D => self.d,
            Scalar::K2 => self.k2,
            Scalar::K => self.k,
            Scalar::Mmax => self.m_max,
            Scalar::P => self.p,
            Scalar::B2 => self.b2,
        }
    }

    fn set(&mut self, which: Scalar, v: f64) {
        let slot = match which {
            Scalar::S => &mut self.s,
            Scalar::Lambda => &mut self.lambda,
            Scalar::N => &mut self.n,
            Scalar::M => &mut self.m,
            Scalar::D => &mut self.d,
            Scalar::K2 => &mut self.k2,
            Scalar::K => &mut self.k,
            Scalar::Mmax => &mut self.m_max,
            Scalar::P => &mut self.p,
            Scalar::B2 => &mut self.b2,
        };
        *slot = Some(v);
    }
}

/// Missing inputs are usage errors; everything else comes from the formula.
enum BoundError {
    Usage(String),
    Invalid(ncaz_core::Error),
}

impl From<ncaz_core::Error> for BoundError {
    fn from(e: ncaz_core::Error) -> Self {
        BoundError::Invalid(e)
    }
}

impl std::fmt::Display for BoundError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundError::Usage(m) => f.write_str(m),
            BoundError::Invalid(e) => write!(f, "{e}"),
        }
    }
}

fn need_scalar(p: &BoundParamsArgs, which: Scalar) -> Result<f64, BoundError> {
    p.scalar(which)
        .ok_or_else(|| BoundError::Usage(format!("missing --{}", which.name())))
}

fn need_list<'a>(v: &'a Option<Vec<f64>>, flag: &str) -> Result<&'a [f64], BoundError> {
    v.as_deref().ok_or_else(|| BoundError::Usage(format!("missing --{flag}")))
}

fn zeros_or<'a>(v: &'a Option<Vec<f64>>, zeros: &'a [f64]) -> &'a [f64] {
    v.as_deref().unwrap_or(zeros)
}

fn evaluate(name: BoundName, p: &BoundParamsArgs) -> Result<f64, BoundError> {
    use Scalar::*;
    let value = match name {
        BoundName::H => bounds::h_eval(need_scalar(p, S)?),
        BoundName::Azuma => bounds::azuma_bound(need_scalar(p, Lambda)?, need_list(&p.c, "c")?)?,
        BoundName::Hoeffding => bounds::hoeffding_bound(need_scalar(p, Lambda)?, need_list(&p.c, "c")?)?,
        BoundName::Chernoff => {
            let n = need_scalar(p, N)?;
            if n.fract() != 0.0 || n < 1.0 {
                return Err(BoundError::Usage(format!("--n must be a positive integer, got {n}")));
            }
            bounds::scalar_chernoff_bound(need_scalar(p, Lambda)?, n as usize)?
        }
        BoundName::Super | BoundName::SuperTwoSided => {
            let sigma = need_list(&p.sigma2, "sigma2")?;
            let zeros = vec![0.0; sigma.len()];
            let args = (
                need_scalar(p, Lambda)?,
                sigma,
                zeros_or(&p.a, &zeros),
                zeros_or(&p.b, &zeros),
                need_scalar(p, M)?,
                p.d.unwrap_or(0.0),
            );
            if matches!(name, BoundName::Super) {
                bounds::supermartingale_bound(args.0, args.1, args.2, args.3, args.4, args.5)?
            } else {
                bounds::supermartingale_two_sided_bound(args.0, args.1, args.2, args.3, args.4, args.5)?
            }
        }
        BoundName::Thm32 => {
            let sigma = need_list(&p.sigma2, "sigma2")?;
            let zeros = vec![0.0; sigma.len()];
            bounds::martingale_variance_bound(need_scalar(p, Lambda)?, sigma, zeros_or(&p.a, &zeros), need_scalar(p, M)?)?
        }
        BoundName::Mgf => bounds::mgf_bound(need_scalar(p, Lambda)?, need_scalar(p, K2)?, need_scalar(p, M)?)?,
        BoundName::Cor34 => {
            bounds::cor34_tail_bound(need_scalar(p, Lambda)?, need_list(&p.sigma2, "sigma2")?, need_scalar(p, M)?)?
        }
        BoundName::Lp => bounds::lp_norm_bound(need_scalar(p, P)?, need_scalar(p, K)?, need_scalar(p, Mmax)?)?,
        BoundName::Bernstein => bounds::bernstein_bound(need_scalar(p, Lambda)?, need_scalar(p, B2)?, need_scalar(p, M)?)?,
        BoundName::Cor36 => bounds::cor36_bound(
            need_scalar(p, Lambda)?,
            need_list(&p.sigma2, "sigma2")?,
            need_list(&p.m_steps, "Msteps")?,
            need_scalar(p, M)?,
        )?,
        BoundName::Cor36Display => bounds::cor36_display_bound(
            need_scalar(p, Lambda)?,
            need_list(&p.sigma2, "sigma2")?,
            need_list(&p.m_steps, "Msteps")?,
            need_scalar(p, M)?,
        )?,
    };
    Ok(value)
}

/// 17 significant digits, trailing zeros trimmed.
fn format_real(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exponent = v.abs().log10().floor() as i32;
    if !(-5..17).contains(&exponent) {
        let s = format!("{v:.16e}");
        let (mantissa, exp) = s.split_once('e').unwrap_or((&s, "0"));
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{mantissa}e{exp}");
    }
    let decimals = (16 - exponent).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn parse_suite(s: &str) -> Result<SuiteKind, String> {
    s.parse().map_err(|e: ncaz_core::Error| e.to_string())
}

fn parse_dims(specs: &[String]) -> Result<Vec<Vec<usize>>, String> {
    let mut out = Vec::new();
    for spec in specs {
        for group in spec.split(';').filter(|g| !g.trim().is_empty()) {
            let dims = group
                .split(',')
                .map(|d| d.trim().parse::<usize>().map_err(|_| format!("invalid dimension {d:?} in --dims")))
                .collect::<Result<Vec<_>, _>>()?;
            out.push(dims);
        }
    }
    Ok(out)
}

fn build_config(args: &VerifyArgs) -> Result<SuiteConfig, String> {
    let mut cfg = SuiteConfig {
        suite: args.suite,
        trials: args.trials,
        seed: args.seed,
        ..SuiteConfig::default()
    };
    let dims = parse_dims(&args.dims)?;
    match (dims.is_empty(), args.steps) {
        (false, Some(n)) if dims.iter().any(|d| d.len() != n) => {
            return Err(format!("--steps {n} disagrees with the number of factors in --dims"));
        }
        (false, _) => cfg.dim_choices = dims,
        (true, Some(n)) => cfg.dim_choices = vec![vec![2; n]],
        (true, None) => {}
    }
    if let Some(grid) = &args.lambda_grid {
        cfg.lambda_grid = grid.clone();
    }
    if let Some(grid) = &args.p_grid {
        cfg.p_grid = grid.clone();
    }
    if let Some(eps) = args.tolerance {
        cfg.tolerance = Tolerance {
            relative: eps,
            ..Tolerance::default()
        };
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

#[derive(Serialize)]
struct ReportRecord<'a> {
    version: &'a str,
    #[serde(flatten)]
    record: &'a CheckResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    duration_ms: Option<f64>,
}

#[derive(Serialize)]
struct Report<'a> {
    version: &'a str,
    config: &'a SuiteConfig,
    records: Vec<ReportRecord<'a>>,
    summary: &'a Summary,
}

fn write_csv<W: Write>(out: W, records: &[ReportRecord<'_>]) -> Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "version", "theorem_id", "label", "seed", "trial", "grid_index", "dims", "n_steps", "lhs", "rhs", "ratio",
        "holds", "degenerate", "residual", "params", "extras", "note",
    ];
    let timed = records.iter().any(|r| r.duration_ms.is_some());
    if timed {
        header.push("duration_ms");
    }
    w.write_record(&header)?;
    for rr in records {
        let r = rr.record;
        let dims: Vec<String> = r.dims.iter().map(usize::to_string).collect();
        let mut row = vec![
            rr.version.to_string(),
            r.theorem_id.to_string(),
            r.label.clone(),
            r.seed.to_string(),
            r.trial.to_string(),
            r.grid_index.to_string(),
            dims.join("x"),
            r.n_steps.to_string(),
            serde_json::to_string(&r.lhs)?,
            serde_json::to_string(&r.rhs)?,
            serde_json::to_string(&r.ratio)?,
            r.holds.to_string(),
            r.degenerate.to_string(),
            serde_json::to_string(&r.residual)?,
            serde_json::to_string(&r.params)?,
            serde_json::to_string(&r.extras)?,
            r.note.clone(),
        ];
        if timed {
            row.push(rr.duration_ms.map(|d| d.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> ExitCode {
    let cfg = match build_config(args) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let timed = match run_suite_timed(&cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let records: Vec<CheckResult> = timed.iter().map(|(r, _)| r.clone()).collect();
    let summary = summarize(&records);
    let report_records: Vec<ReportRecord<'_>> = records
        .iter()
        .zip(&timed)
        .map(|(r, (_, ms))| ReportRecord {
            version: VERSION,
            record: r,
            duration_ms: args.timings.then_some(*ms),
        })
        .collect();

    let sink: Box<dyn Write> = match &args.report {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("error: cannot create {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let written: Result<(), Box<dyn std::error::Error>> = match args.format {
        Format::Json => {
            let report = Report {
                version: VERSION,
                config: &cfg,
                records: report_records,
                summary: &summary,
            };
            let mut sink = sink;
            serde_json::to_writer_pretty(&mut sink, &report)
                .map_err(Into::into)
                .and_then(|_| writeln!(sink).and_then(|_| sink.flush()).map_err(Into::into))
        }
        Format::Csv => write_csv(sink, &report_records),
    };
    if let Err(e) = written {
        eprintln!("error: writing report failed: {e}");
        return ExitCode::from(2);
    }

    eprintln!(
        "{} records: {} hold, {} violations, {} degenerate",
        summary.total, summary.holds, summary.violations, summary.degenerate
    );
    for (theorem, ratio) in &summary.max_ratio_per_theorem {
        eprintln!("  {theorem:<12} max ratio {}", format_real(*ratio));
    }
    if summary.violations > 0 {
        for r in records.iter().filter(|r| r.is_violation()).take(10) {
            eprintln!(
                "  VIOLATION {} trial {} {} lhs={} rhs={} {}",
                r.theorem_id, r.trial, r.label, r.lhs, r.rhs, r.note
            );
        }
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn cmd_bound(name: BoundName, params: &BoundParamsArgs) -> ExitCode {
    match evaluate(name, params) {
        Ok(v) => {
            println!("{}", format_real(v));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn cmd_sweep(name: BoundName, vary: Scalar, values: &[f64], params: &BoundParamsArgs) -> ExitCode {
    if values.iter().any(|v| !v.is_finite()) {
        eprintln!("error: sweep values must be finite");
        return ExitCode::from(2);
    }
    let columns: Vec<Scalar> = Scalar::ALL
        .into_iter()
        .filter(|&s| s == vary || params.scalar(s).is_some())
        .collect();
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let mut p = params.clone();
        p.set(vary, v);
        match evaluate(name, &p) {
            Ok(b) => rows.push((p, Some(b))),
            Err(BoundError::Invalid(_)) => rows.push((p, None)),
            Err(e @ BoundError::Usage(_)) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    let mut header: Vec<&str> = columns.iter().map(|s| s.name()).collect();
    header.extend(["bound", "valid"]);
    let result = (|| -> csv::Result<()> {
        w.write_record(&header)?;
        for (p, bound) in &rows {
            let mut row: Vec<String> = columns.iter().map(|&s| format_real(p.scalar(s).unwrap_or_default())).collect();
            row.push(bound.map(format_real).unwrap_or_default());
            row.push(bound.is_some().to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match &cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Bound { name, params } => cmd_bound(*name, params),
        Command::Sweep {
            name,
            vary,
            values,
            params,
        } => cmd_sweep(*name, *vary, values, params),
    }
}
