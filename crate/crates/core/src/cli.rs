//! Command-line front end. Tabular output is CSV behind a `#` metadata
//! header, reports are JSON.

use crate::analysis::{
    asymptotic_main_term, default_ladder, exact_mean, exact_mean_alternating, simulate_costs, CostKind, Method,
    ALTERNATING_RELATIVE_BUDGET, DYNAMICAL_TARGET, NODE_BUDGET,
};
use crate::dynamical::IntervalSystem;
use crate::error::Error;
use crate::source::{EnumOptions, SourceModel, DEFAULT_WORD_CAP, RNG_NAME};
use crate::tameness::{classify, error_regime, ClassifyBudget};
use crate::transfer::{dominant_eigenvalue, resolvent_norm_probe, DEFAULT_ORDER};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Probe norms above this are reported as divergent.
pub const DIVERGENCE_NORM: f64 = 1e6;

#[derive(Debug, Parser)]
#[command(
    name = "tamelab",
    version,
    about = "Exact, asymptotic and simulated costs of tries and BSTs on probabilistic sources"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report wall-clock times (makes output run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact expected costs by one or more methods.
    Exact(ExactArgs),
    /// Monte Carlo estimates of the three costs.
    Simulate(SimulateArgs),
    /// Exact values against the asymptotic main term on a ladder of n.
    Asymptote(AsymptoteArgs),
    /// Tameness classification as a JSON report.
    Classify(ClassifyArgs),
    /// Dominant eigenvalue of the transfer operator on a grid of s.
    Spectrum(SpectrumArgs),
    /// Resolvent norm proxy on the line Re s = 1.
    Probe(ProbeArgs),
}

#[derive(Debug, Args)]
pub struct SourceArg {
    /// Builtin name or path to a JSON source description.
    #[arg(long)]
    pub source: String,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(long, value_delimiter = ',', default_value = "R,C,B")]
    pub kind: Vec<CostKind>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "alternating")]
    pub method: Vec<Method>,
    /// Working precision of the alternating sum.
    #[arg(long)]
    pub precision_bits: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Longest word a trial may draw.
    #[arg(long, default_value_t = DEFAULT_WORD_CAP)]
    pub max_len: usize,
}

#[derive(Debug, Args)]
pub struct AsymptoteArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(long, default_value = "R")]
    pub kind: CostKind,
    /// Ladder of n; powers of two 16..4096 by default.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub source: SourceArg,
    /// Values of s, real or complex as 1+9.06i.
    #[arg(long, value_delimiter = ',', default_value = "1,1.5,2,3", allow_hyphen_values = true)]
    pub s: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub order: usize,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "2,4,8,16,32,64",
        allow_hyphen_values = true
    )]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 16)]
    pub order: usize,
}

/// A failure attributed to one stage of a command.
#[derive(Debug)]
pub struct Failure {
    pub stage: String,
    pub error: Error,
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        if self.error.is_config() {
            2
        } else {
            3
        }
    }
}

fn at(stage: impl Into<String>) -> impl FnOnce(Error) -> Failure {
    let stage = stage.into();
    move |error| Failure { stage, error }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    if let Err(f) = configure_threads() {
        let _ = writeln!(stderr, "error in stage {}: {}", f.stage, f.error);
        return f.exit_code();
    }
    match execute(&cli) {
        Ok(text) => {
            let written = match &cli.out {
                Some(path) => std::fs::write(path, text.as_bytes()).map_err(|e| e.to_string()),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => 0,
                Err(e) => {
                    let _ = writeln!(stderr, "error in stage output: {e}");
                    2
                }
            }
        }
        Err(f) => {
            let _ = writeln!(stderr, "error in stage {}: {}", f.stage, f.error);
            f.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("TAMELAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Failure {
        stage: "threads".into(),
        error: Error::InvalidConfig(format!("TAMELAB_THREADS must be a positive integer, got '{v}'")),
    })?;
    // a pool built earlier in the same process is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::Exact(a) => cmd_exact(a, cli.timing),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Asymptote(a) => cmd_asymptote(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Probe(a) => cmd_probe(a),
    }
}

fn load(spec: &str) -> Result<SourceModel, Failure> {
    SourceModel::resolve(spec).map_err(at("source"))
}

fn dynamical(source: &SourceModel) -> Result<&IntervalSystem, Failure> {
    match source {
        SourceModel::Dynamical(s) => Ok(s),
        _ => Err(Failure {
            stage: "source".into(),
            error: Error::UnsupportedSource("transfer operators need a dynamical source".into()),
        }),
    }
}

fn header(out: &mut String, command: &str, source: &SourceModel, fields: &[(&str, String)]) {
    let _ = writeln!(out, "# schema: tamelab.{command}/{SCHEMA_VERSION}");
    let _ = writeln!(out, "# tool: tamelab {TOOL_VERSION}");
    let _ = writeln!(out, "# source: {}", source.describe());
    for (k, v) in fields {
        let _ = writeln!(out, "# {k}: {v}");
    }
}

fn budgets() -> String {
    let e = EnumOptions::default();
    format!(
        "alternating_relative={ALTERNATING_RELATIVE_BUDGET:e} direct_nodes={NODE_BUDGET} direct_dynamical_target={DYNAMICAL_TARGET:e} enum_eps={:e} enum_prefixes={}",
        e.eps, e.budget
    )
}

fn cmd_exact(a: &ExactArgs, timing: bool) -> Result<String, Failure> {
    let source = load(&a.source.source)?;
    if a.precision_bits == Some(0) {
        return Err(at("config")(Error::InvalidConfig(
            "precision bits must be positive".into(),
        )));
    }
    let precision = match a.precision_bits {
        Some(p) => p.to_string(),
        None => "auto (ceil(1.1 n) + 64)".into(),
    };
    let mut out = String::new();
    header(
        &mut out,
        "exact",
        &source,
        &[
            ("seed", "-".into()),
            ("precision_bits", precision),
            ("budgets", budgets()),
        ],
    );
    out.push_str("kind,n,method,value,abs_error,runtime_ms\n");
    for &kind in &a.kind {
        for &n in &a.n {
            for &method in &a.method {
                let stage = format!("exact[{kind},n={n},{method}]");
                let start = Instant::now();
                let r = match (method, a.precision_bits) {
                    (Method::Alternating, Some(p)) => exact_mean_alternating(kind, &source, n, Some(p)),
                    _ => exact_mean(kind, &source, n, method),
                }
                .map_err(at(stage))?;
                let ms = if timing {
                    format!("{:.3}", start.elapsed().as_secs_f64() * 1e3)
                } else {
                    "-".into()
                };
                let _ = writeln!(out, "{kind},{n},{method},{},{:e},{ms}", r.value, r.certified_abs_error);
            }
        }
    }
    Ok(out)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<String, Failure> {
    let source = load(&a.source.source)?;
    let mut out = String::new();
    header(
        &mut out,
        "simulate",
        &source,
        &[
            ("seed", a.seed.to_string()),
            ("rng", RNG_NAME.into()),
            ("precision_bits", "-".into()),
            ("budgets", format!("max_word_len={}", a.max_len)),
        ],
    );
    out.push_str("kind,n,trials,mean,stddev,stderr,seed\n");
    let mut rows = vec![String::new(); 3];
    for &n in &a.n {
        let est = simulate_costs(&source, n, a.trials, a.max_len, a.seed).map_err(at(format!("simulate[n={n}]")))?;
        for (row, e) in rows.iter_mut().zip(&est) {
            let _ = writeln!(
                row,
                "{},{},{},{},{},{},{}",
                e.kind, e.n, e.trials, e.mean, e.stddev, e.stderr, e.seed
            );
        }
    }
    for r in rows {
        out.push_str(&r);
    }
    Ok(out)
}

fn cmd_asymptote(a: &AsymptoteArgs) -> Result<String, Failure> {
    let source = load(&a.source.source)?;
    let ladder = if a.n.is_empty() { default_ladder() } else { a.n.clone() };
    let mut pred = asymptotic_main_term(a.kind, &source, &ladder).map_err(at("asymptote"))?;
    let report = classify(&source, &ClassifyBudget::default());
    pred.regime = error_regime(&report);
    let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| v.to_string());
    let mut out = String::new();
    header(
        &mut out,
        "asymptote",
        &source,
        &[
            ("seed", "-".into()),
            ("precision_bits", "auto (ceil(1.1 n) + 64)".into()),
            ("budgets", budgets()),
            ("kind", a.kind.to_string()),
            ("entropy", pred.entropy.to_string()),
            ("leading_coefficient", pred.leading_coefficient.to_string()),
            ("a", opt(pred.a)),
            ("b", opt(pred.b)),
            ("c", opt(pred.c)),
            (
                "regime",
                serde_json::to_string(&pred.regime)
                    .unwrap_or_default()
                    .trim_matches('"')
                    .to_string(),
            ),
            ("verdict", report.verdict.to_string()),
            ("fit_rms", pred.fit_rms.to_string()),
        ],
    );
    out.push_str("kind,n,exact,main_term,residual,residual_over_n\n");
    for p in &pred.fit {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            a.kind,
            p.n,
            p.exact,
            p.main_term,
            p.residual,
            p.residual / p.n.max(1) as f64
        );
    }
    Ok(out)
}

fn cmd_classify(a: &ClassifyArgs) -> Result<String, Failure> {
    let source = load(&a.source.source)?;
    let budget = ClassifyBudget {
        seed: a.seed,
        ..Default::default()
    };
    let report = classify(&source, &budget);
    let mut value = report.to_json();
    if let Some(obj) = value.as_object_mut() {
        obj.insert("schema".into(), format!("tamelab.classify/{SCHEMA_VERSION}").into());
        obj.insert("tool".into(), format!("tamelab {TOOL_VERSION}").into());
        obj.insert("seed".into(), a.seed.into());
        obj.insert(
            "regime".into(),
            serde_json::to_value(error_regime(&report)).unwrap_or_default(),
        );
    }
    let mut text =
        serde_json::to_string_pretty(&value).map_err(|e| at("output")(Error::InvalidConfig(e.to_string())))?;
    text.push('\n');
    Ok(text)
}

/// Parses `x`, `x+yi` or `x-yi`.
pub fn parse_complex(s: &str) -> Result<C64, Error> {
    let bad = || Error::InvalidConfig(format!("cannot parse '{s}' as a complex number"));
    let t = s.trim();
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|x| C64::new(x, 0.0)).map_err(|_| bad());
    };
    let split = body
        .char_indices()
        .skip(1)
        .filter(|&(i, c)| (c == '+' || c == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E'))
        .map(|(i, _)| i)
        .last();
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.trim_start_matches('+').parse().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<String, Failure> {
    let source = load(&a.source.source)?;
    let sys = dynamical(&source)?;
    let grid =
        a.s.iter()
            .map(|s| parse_complex(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(at("config"))?;
    let mut out = String::new();
    header(
        &mut out,
        "spectrum",
        &source,
        &[
            ("seed", "-".into()),
            ("precision_bits", "53".into()),
            ("budgets", format!("order={}", a.order)),
        ],
    );
    out.push_str("s_re,s_im,order,lambda_re,lambda_im,pressure_re,pressure_im,second_modulus,error_estimate\n");
    for s in grid {
        let sp = dominant_eigenvalue(sys, s, a.order).map_err(at(format!("spectrum[s={s}]")))?;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{:e}",
            s.re,
            s.im,
            sp.order,
            sp.lambda.re,
            sp.lambda.im,
            sp.pressure.re,
            sp.pressure.im,
            sp.second_modulus,
            sp.error_estimate
        );
    }
    Ok(out)
}

fn cmd_probe(a: &ProbeArgs) -> Result<String, Failure> {
    let source = load(&a.source.source)?;
    let sys = dynamical(&source)?;
    let mut out = String::new();
    header(
        &mut out,
        "probe",
        &source,
        &[
            ("seed", "-".into()),
            ("precision_bits", "53".into()),
            (
                "budgets",
                format!("order={} divergence_norm={DIVERGENCE_NORM:e}", a.order),
            ),
            ("note", "discretized norm proxy, not a certified operator norm".into()),
        ],
    );
    out.push_str("t,order,norm,divergent\n");
    for &t in &a.t {
        match resolvent_norm_probe(sys, t, a.order) {
            Ok(p) => {
                let divergent = !p.norm.is_finite() || p.norm > DIVERGENCE_NORM;
                let _ = writeln!(out, "{t},{},{},{divergent}", p.order, p.norm);
            }
            Err(Error::QuasiInversePole(_)) => {
                let _ = writeln!(out, "{t},{},inf,true", a.order);
            }
            Err(e) => return Err(at(format!("probe[t={t}]"))(e)),
        }
    }
    Ok(out)
}
