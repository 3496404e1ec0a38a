//! Command-line front end: evaluate curves, dump samples, run the Monte
//! Carlo checks.
//!
//! Exit codes: 0 success, 2 usage or parameter error, 3 numerical
//! non-convergence, 4 a `verify` suite exceeded its threshold, 1 anything
//! else (I/O, internal faults).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use wishart_core::charpoly::recip_charpoly_avg;
use wishart_core::demmel::{
    demmel_cdf, demmel_pdf, demmel_pdf_alpha0_cfg, demmel_pdf_central, demmel_pdf_talbot, DemmelCdfTable,
    DemmelQuery,
};
use wishart_core::eigdist::{ln_joint_pdf, EigVector};
use wishart_core::grid::{eval_grid, linspace};
use wishart_core::mc::{ks_statistic, mean_estimate, recip_avg_of, sample_eigs, McConfig, TabulatedCdf};
use wishart_core::mineig::{mineig_cdf, mineig_cdf_alpha0_cfg, mineig_cdf_central, mineig_cdf_det, MinEigQuery};
use wishart_core::specfun;
use wishart_core::{EvalConfig, ModelParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

pub const THREADS_ENV: &str = "WISHART_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "wishart-lab", version, about = "Eigenvalue statistics of rank-1 non-central complex Wishart matrices")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Joint eigenvalue density at one or more eigenvalue vectors.
    JointPdf {
        #[command(flatten)]
        common: Common,
        /// Comma-separated eigenvalues; repeat for several vectors.
        #[arg(long, required = true, value_delimiter = ';')]
        lambdas: Vec<String>,
    },
    /// C.d.f. of the smallest eigenvalue.
    MineigCdf {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = MineigMethod::Auto)]
        method: MineigMethod,
    },
    /// Density of V = tr(W)/λ_min.
    DemmelPdf {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = DemmelMethod::Termwise)]
        method: DemmelMethod,
        /// Talbot contour order (with --method talbot).
        #[arg(long, default_value_t = 32)]
        talbot_order: usize,
    },
    /// C.d.f. of V = tr(W)/λ_min.
    DemmelCdf {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// E[1/det(zI + W)].
    CharpolyAvg {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// A single special-function value.
    Specfun {
        #[command(flatten)]
        common: Common,
        #[arg(value_enum)]
        name: SpecfunName,
        #[arg(allow_negative_numbers = true, num_args = 1..)]
        args: Vec<f64>,
    },
    /// Raw eigenvalue draws.
    Sample {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Monte Carlo check of an analytic quantity.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long, value_enum)]
        suite: Suite,
        /// Evaluation point for the charpoly suite.
        #[arg(long, default_value_t = 1.0)]
        z: f64,
        /// Replaces the suite's pass threshold.
        #[arg(long)]
        threshold: Option<f64>,
    },
}

#[derive(Debug, Clone, Args)]
struct Common {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    max_terms: Option<usize>,
    #[arg(long)]
    quad_order: Option<usize>,
    #[arg(long)]
    laplace_terms: Option<usize>,
    /// Flat key=value file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = THREADS_ENV)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Accept parameters beyond the double-precision accuracy envelope.
    #[arg(long)]
    allow_outside_envelope: bool,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Single evaluation point (same as a one-point grid).
    #[arg(long, visible_aliases = ["x", "v", "z"], allow_negative_numbers = true, conflicts_with_all = ["lo", "hi"])]
    at: Option<f64>,
    #[arg(long, visible_aliases = ["x-min", "v-min", "z-min"], allow_negative_numbers = true, requires = "hi")]
    lo: Option<f64>,
    #[arg(long, visible_aliases = ["x-max", "v-max", "z-max"], allow_negative_numbers = true, requires = "lo")]
    hi: Option<f64>,
    #[arg(long, default_value_t = 100)]
    points: usize,
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    streams: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MineigMethod {
    Auto,
    Det,
    Alpha0,
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DemmelMethod {
    Termwise,
    Alpha0,
    Central,
    Talbot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpecfunName {
    Pochhammer,
    Laguerre,
    Hyp0f1,
    Hyp1f1,
    Tricomi,
    Phi3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Mineig,
    Demmel,
    Charpoly,
    Trace,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(wishart_core::Error),
    Io(std::io::Error),
    VerifyFailed,
}

impl From<wishart_core::Error> for CliError {
    fn from(e: wishart_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn code(&self) -> i32 {
        use wishart_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(E::NonConvergence { .. } | E::EigenNonConvergence { .. }) => EXIT_NONCONVERGENCE,
            CliError::Core(E::Internal(_)) => EXIT_OTHER,
            CliError::Core(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_OTHER,
            CliError::VerifyFailed => EXIT_VERIFY_FAILED,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::VerifyFailed => write!(f, "verification threshold exceeded"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

const FILE_KEYS: &[&str] = &[
    "n", "m", "mu", "rel_tol", "abs_tol", "max_terms", "quad_order", "laplace_terms", "threads", "format",
    "seed", "samples", "streams",
];

/// Parses a flat `key = value` file. Blank lines and `#` comments are
/// skipped; unknown keys are rejected.
fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", no + 1)))?;
        let k = k.trim().replace('-', "_");
        if !FILE_KEYS.contains(&k.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{k}`", no + 1)));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

/// Flag value, else config-file value, else default.
fn pick<T: std::str::FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> CliResult<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{s}`"))),
        None => Ok(None),
    }
}

struct Settings {
    params: ModelParams,
    cfg: EvalConfig,
    threads: Option<usize>,
    format: Format,
    output: Option<PathBuf>,
    file: BTreeMap<String, String>,
}

impl Settings {
    fn resolve(c: &Common, default_format: Format) -> CliResult<Self> {
        let file = match &c.config {
            Some(path) => parse_config_text(&std::fs::read_to_string(path)?)?,
            None => BTreeMap::new(),
        };
        let n = pick(c.n, &file, "n")?.ok_or_else(|| CliError::Usage("--n is required".into()))?;
        let m = pick(c.m, &file, "m")?.unwrap_or(n);
        let mu = pick(c.mu, &file, "mu")?.unwrap_or(0.0);
        let params = if c.allow_outside_envelope {
            ModelParams::new_outside_envelope(n, m, mu)?
        } else {
            ModelParams::new(n, m, mu)?
        };
        let d = EvalConfig::default();
        let cfg = EvalConfig {
            rel_tol: pick(c.rel_tol, &file, "rel_tol")?.unwrap_or(d.rel_tol),
            abs_tol: pick(c.abs_tol, &file, "abs_tol")?.unwrap_or(d.abs_tol),
            max_terms: pick(c.max_terms, &file, "max_terms")?.unwrap_or(d.max_terms),
            quad_order: pick(c.quad_order, &file, "quad_order")?.unwrap_or(d.quad_order),
            laplace_terms: pick(c.laplace_terms, &file, "laplace_terms")?.unwrap_or(d.laplace_terms),
        };
        cfg.validate()?;
        let threads = pick(c.threads, &file, "threads")?;
        if threads == Some(0) {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        let format = match (c.format, file.get("format")) {
            (Some(f), _) => f,
            (None, Some(s)) => Format::from_str(s, true).map_err(|e| CliError::Usage(format!("config key `format`: {e}")))?,
            (None, None) => default_format,
        };
        Ok(Settings { params, cfg, threads, format, output: c.output.clone(), file })
    }

    fn mc_config(&self, a: &McArgs) -> CliResult<McConfig> {
        let seed = pick(a.seed, &self.file, "seed")?
            .ok_or_else(|| CliError::Usage("--seed is required for sampling".into()))?;
        let samples = pick(a.samples, &self.file, "samples")?.unwrap_or(100_000);
        let streams = pick(a.streams, &self.file, "streams")?.unwrap_or(64);
        Ok(McConfig::new(samples, seed, streams)?)
    }

    fn params_map(&self) -> BTreeMap<&'static str, Value> {
        let p = &self.params;
        BTreeMap::from([("n", json!(p.n())), ("m", json!(p.m())), ("mu", json!(p.mu()))])
    }

    fn config_map(&self) -> BTreeMap<&'static str, Value> {
        let c = &self.cfg;
        BTreeMap::from([
            ("rel_tol", json!(c.rel_tol)),
            ("abs_tol", json!(c.abs_tol)),
            ("max_terms", json!(c.max_terms)),
            ("quad_order", json!(c.quad_order)),
            ("laplace_terms", json!(c.laplace_terms)),
        ])
    }

    /// SHA-256 of the canonical `key=value` lines of parameters and config.
    fn config_hash(&self) -> String {
        let mut canon = String::new();
        for (k, v) in self.params_map().into_iter().chain(self.config_map()) {
            let _ = writeln!(canon, "{k}={v}");
        }
        Sha256::digest(canon.as_bytes()).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// A grid of results plus free-form metadata.
struct Report {
    grid: Vec<f64>,
    values: Vec<f64>,
    meta: BTreeMap<String, Value>,
}

fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn meta_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn render(s: &Settings, r: &Report) -> String {
    let mut out = String::new();
    match s.format {
        Format::Csv => {
            out.push_str("x,value\n");
            for (x, v) in r.grid.iter().zip(&r.values) {
                let _ = writeln!(out, "{},{}", fmt17(*x), fmt17(*v));
            }
            for (k, v) in s.params_map().into_iter().chain(s.config_map()) {
                let _ = writeln!(out, "# {k}={v}");
            }
            for (k, v) in &r.meta {
                let _ = writeln!(out, "# {k}={}", meta_text(v));
            }
            let _ = writeln!(out, "# config_hash={}", s.config_hash());
        }
        Format::Json => {
            let mut config: Map<String, Value> = s.config_map().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            config.insert("hash".into(), json!(s.config_hash()));
            let mut obj = json!({
                "params": s.params_map(),
                "config": config,
                "grid": r.grid,
                "values": r.values,
            });
            if !r.meta.is_empty() {
                obj["meta"] = json!(r.meta);
            }
            out = obj.to_string();
            out.push('\n');
        }
    }
    out
}

fn grid_of(g: &GridArgs) -> CliResult<Vec<f64>> {
    match (g.at, g.lo, g.hi) {
        (Some(x), _, _) => Ok(vec![x]),
        (None, Some(lo), Some(hi)) => Ok(linspace(lo, hi, g.points)?),
        _ => Err(CliError::Usage("give a single point or both ends of a grid".into())),
    }
}

fn emit(s: &Settings, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match &s.output {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_lambdas(spec: &str) -> CliResult<EigVector> {
    let vals = spec
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad eigenvalue `{t}`"))))
        .collect::<CliResult<Vec<f64>>>()?;
    Ok(EigVector::from_unsorted(vals)?)
}

fn specfun_value(name: SpecfunName, a: &[f64], cfg: &EvalConfig) -> CliResult<f64> {
    let want = match name {
        SpecfunName::Pochhammer | SpecfunName::Hyp0f1 => 2,
        SpecfunName::Laguerre | SpecfunName::Hyp1f1 | SpecfunName::Tricomi => 3,
        SpecfunName::Phi3 => 4,
    };
    if a.len() != want {
        return Err(CliError::Usage(format!("{name:?} takes {want} arguments, got {}", a.len())));
    }
    let count = |x: f64, what: &str| {
        if x >= 0.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            Err(CliError::Usage(format!("{what} must be a nonnegative integer")))
        }
    };
    Ok(match name {
        SpecfunName::Pochhammer => specfun::pochhammer(a[0], count(a[1], "k")?),
        SpecfunName::Laguerre => specfun::laguerre(count(a[0], "degree")?, a[1], a[2]),
        SpecfunName::Hyp0f1 => specfun::hyp0f1_cfg(a[0], a[1], cfg).check("0F1")?,
        SpecfunName::Hyp1f1 => specfun::hyp1f1_cfg(a[0], a[1], a[2], cfg).check("1F1")?,
        SpecfunName::Tricomi => specfun::tricomi_psi(a[0], a[1], a[2])?,
        SpecfunName::Phi3 => specfun::humbert_phi3_cfg(a[0], a[1], a[2], a[3], cfg).check("Phi3")?,
    })
}

fn demmel_n2(params: &ModelParams) -> CliResult<()> {
    if params.n() < 2 {
        return Err(CliError::Usage("V is only defined for n >= 2".into()));
    }
    Ok(())
}

fn verify(
    s: &Settings,
    suite: Suite,
    mc: McConfig,
    z: f64,
    threshold: Option<f64>,
) -> CliResult<(bool, BTreeMap<String, Value>)> {
    let p = s.params;
    let cfg = s.cfg;
    let batch = sample_eigs(&p, &mc)?;
    let mut meta = BTreeMap::new();
    let (stat, default_threshold) = match suite {
        Suite::Mineig => {
            let mins = batch.min_eigs();
            let hi = mins.iter().copied().fold(0.0, f64::max) * 1.01 + 1e-3;
            let table = TabulatedCdf::build(|x| mineig_cdf(&MinEigQuery::with_config(p, x, cfg)?), 0.0, hi, 4001)?;
            let ks = ks_statistic(&mins, |x| table.eval(x))?;
            (ks, 0.005)
        }
        Suite::Demmel => {
            demmel_n2(&p)?;
            let table = DemmelCdfTable::build(&p, 4000, &cfg)?;
            let ks = ks_statistic(&batch.demmel_values(), |v| table.eval(v))?;
            (ks, 0.01)
        }
        Suite::Charpoly => {
            let est = recip_avg_of(&batch, z)?;
            let exact = recip_charpoly_avg(&p, z, &cfg)?;
            meta.insert("z".into(), json!(z));
            meta.insert("analytic".into(), json!(exact.value));
            meta.insert("mc_mean".into(), json!(est.mean));
            meta.insert("mc_std_err".into(), json!(est.std_err));
            let zs = (est.mean - exact.value) / est.std_err;
            (zs.abs(), 3.0)
        }
        Suite::Trace => {
            let est = mean_estimate(&batch.traces())?;
            let exact = (p.m() * p.n()) as f64 + p.mu();
            meta.insert("analytic".into(), json!(exact));
            meta.insert("mc_mean".into(), json!(est.mean));
            meta.insert("mc_std_err".into(), json!(est.std_err));
            let zs = (est.mean - exact) / est.std_err;
            (zs.abs(), 4.0)
        }
    };
    let threshold = threshold.unwrap_or(default_threshold);
    let pass = stat < threshold;
    meta.insert("suite".into(), json!(format!("{suite:?}").to_lowercase()));
    meta.insert("statistic".into(), json!(stat));
    meta.insert("threshold".into(), json!(threshold));
    meta.insert("pass".into(), json!(pass));
    meta.insert("samples".into(), json!(mc.samples));
    meta.insert("seed".into(), json!(mc.seed));
    meta.insert("streams".into(), json!(mc.streams));
    Ok((pass, meta))
}

fn dispatch(cmd: Cmd, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let common = match &cmd {
        Cmd::JointPdf { common, .. }
        | Cmd::MineigCdf { common, .. }
        | Cmd::DemmelPdf { common, .. }
        | Cmd::DemmelCdf { common, .. }
        | Cmd::CharpolyAvg { common, .. }
        | Cmd::Specfun { common, .. }
        | Cmd::Sample { common, .. }
        | Cmd::Verify { common, .. } => common,
    };
    let default_format = match cmd {
        Cmd::MineigCdf { .. } | Cmd::DemmelPdf { .. } | Cmd::DemmelCdf { .. } => Format::Csv,
        _ => Format::Json,
    };
    let mut common_n = None;
    if let Cmd::Specfun { common, .. } = &cmd {
        // special functions do not need model parameters
        if common.n.is_none() {
            common_n = Some(1);
        }
    }
    let s = if let Some(n) = common_n {
        let mut c = Common { n: Some(n), ..common.clone() };
        c.m = c.m.or(Some(n));
        Settings::resolve(&c, default_format)?
    } else {
        Settings::resolve(common, default_format)?
    };
    let pool = match s.threads {
        Some(t) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {t} threads: {e}")))?,
        ),
        None => None,
    };
    let work = || run_command(cmd, &s);
    let done = match pool {
        Some(p) => p.install(work),
        None => work(),
    }?;
    for w in &done.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    emit(&s, &done.text, out)?;
    if done.failed {
        return Err(CliError::VerifyFailed);
    }
    Ok(())
}

/// Rendered output of one command.
struct Outcome {
    text: String,
    warnings: Vec<String>,
    failed: bool,
}


fn run_command(cmd: Cmd, s: &Settings) -> CliResult<Outcome> {
    let p = s.params;
    let cfg = s.cfg;
    let mut meta = BTreeMap::new();
    let mut warnings = Vec::new();
    let (grid, values) = match cmd {
        Cmd::JointPdf { lambdas, .. } => {
            let vecs = lambdas.iter().map(|l| parse_lambdas(l)).collect::<CliResult<Vec<_>>>()?;
            let values = vecs
                .iter()
                .map(|v| ln_joint_pdf(&p, v, &cfg).map(f64::exp))
                .collect::<wishart_core::Result<Vec<f64>>>()?;
            meta.insert("lambdas".into(), json!(vecs.iter().map(|v| v.as_slice().to_vec()).collect::<Vec<_>>()));
            ((0..vecs.len()).map(|i| i as f64).collect(), values)
        }
        Cmd::MineigCdf { grid, method, .. } => {
            let g = grid_of(&grid)?;
            meta.insert("method".into(), json!(format!("{method:?}").to_lowercase()));
            let v = eval_grid(&g, |x| {
                let q = MinEigQuery::with_config(p, x, cfg)?;
                match method {
                    MineigMethod::Auto => mineig_cdf(&q),
                    MineigMethod::Det => mineig_cdf_det(&q),
                    MineigMethod::Alpha0 => mineig_cdf_alpha0_cfg(&p, x, &cfg),
                    MineigMethod::Central => mineig_cdf_central(&p, x),
                }
            })?;
            (g, v)
        }
        Cmd::DemmelPdf { grid, method, talbot_order, .. } => {
            demmel_n2(&p)?;
            let g = grid_of(&grid)?;
            meta.insert("method".into(), json!(format!("{method:?}").to_lowercase()));
            let v = eval_grid(&g, |v| {
                let q = DemmelQuery::with_config(p, v, cfg)?;
                match method {
                    DemmelMethod::Termwise => demmel_pdf(&q),
                    DemmelMethod::Alpha0 => demmel_pdf_alpha0_cfg(&p, v, &cfg),
                    DemmelMethod::Central => demmel_pdf_central(&p, v),
                    DemmelMethod::Talbot => demmel_pdf_talbot(&q, talbot_order),
                }
            })?;
            (g, v)
        }
        Cmd::DemmelCdf { grid, .. } => {
            demmel_n2(&p)?;
            let g = grid_of(&grid)?;
            let v = eval_grid(&g, |v| demmel_cdf(&DemmelQuery::with_config(p, v, cfg)?))?;
            (g, v)
        }
        Cmd::CharpolyAvg { grid, .. } => {
            let g = grid_of(&grid)?;
            let res = g
                .iter()
                .map(|&z| recip_charpoly_avg(&p, z, &cfg))
                .collect::<wishart_core::Result<Vec<_>>>()?;
            if res.iter().any(|r| r.cancellation_warning) {
                let lost = res.iter().map(|r| r.digits_lost).fold(0.0, f64::max);
                warnings.push(format!("alternating series lost about {lost:.1} digits to cancellation"));
                meta.insert("cancellation_warning".into(), json!(true));
            }
            (g, res.iter().map(|r| r.value).collect())
        }
        Cmd::Specfun { name, args, .. } => {
            let v = specfun_value(name, &args, &cfg)?;
            meta.insert("function".into(), json!(format!("{name:?}").to_lowercase()));
            meta.insert("args".into(), json!(args));
            (vec![0.0], vec![v])
        }
        Cmd::Sample { mc, .. } => {
            let mcfg = s.mc_config(&mc)?;
            let batch = sample_eigs(&p, &mcfg)?;
            return Ok(Outcome { text: render_samples(s, &mcfg, &batch), warnings, failed: false });
        }
        Cmd::Verify { mc, suite, z, threshold, .. } => {
            let mcfg = s.mc_config(&mc)?;
            let (pass, meta) = verify(s, suite, mcfg, z, threshold)?;
            let stat = meta["statistic"].as_f64().unwrap_or(f64::NAN);
            let report = Report { grid: vec![0.0], values: vec![stat], meta };
            return Ok(Outcome { text: render(s, &report), warnings, failed: !pass });
        }
    };
    Ok(Outcome { text: render(s, &Report { grid, values, meta }), warnings, failed: false })
}

fn render_samples(s: &Settings, mc: &McConfig, batch: &wishart_core::mc::SampleBatch) -> String {
    let mut out = String::new();
    match s.format {
        Format::Csv => {
            let cols: Vec<String> = (1..=s.params.n()).map(|i| format!("lambda_{i}")).collect();
            let _ = writeln!(out, "draw,{}", cols.join(","));
            for (i, row) in batch.rows().enumerate() {
                let r: Vec<String> = row.iter().map(|x| fmt17(*x)).collect();
                let _ = writeln!(out, "{i},{}", r.join(","));
            }
            for (k, v) in s.params_map() {
                let _ = writeln!(out, "# {k}={v}");
            }
            let _ = writeln!(out, "# seed={}\n# samples={}\n# streams={}", mc.seed, mc.samples, mc.streams);
            let _ = writeln!(out, "# config_hash={}", s.config_hash());
        }
        Format::Json => {
            let rows: Vec<&[f64]> = batch.rows().collect();
            let obj = json!({
                "params": s.params_map(),
                "config": {"seed": mc.seed, "samples": mc.samples, "streams": mc.streams, "hash": s.config_hash()},
                "eigenvalues": rows,
            });
            out = obj.to_string();
            out.push('\n');
        }
    }
    out
}

/// Runs the command line `argv` (including the program name) with the given
/// output streams and returns the exit code.
pub fn run_with_io<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else {
                let _ = write!(out, "{}", e.render());
                EXIT_OK
            };
        }
    };
    match dispatch(cli.cmd, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_parsing() {
        let m = parse_config_text("# comment\nn = 3\nrel-tol=1e-10\n\nmu=0.5").unwrap();
        assert_eq!(m["n"], "3");
        assert_eq!(m["rel_tol"], "1e-10");
        assert!(parse_config_text("bogus=1").is_err());
        assert!(parse_config_text("n 3").is_err());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt17(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
