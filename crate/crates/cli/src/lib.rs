//! The `rmt` command line: argument parsing, configuration files, command
//! dispatch and report rendering.

pub mod config;
pub mod error;
pub mod render;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sminlab::experiments::{
    compressible_kernel_probe, kernel_complement_study, records_to_csv, run_experiment, ExperimentConfig,
    ExperimentReport, KernelStudyOptions, DEFAULT_MASTER_SEED, DEFAULT_MAX_N,
};
use sminlab::geometry::{build_sparse_net, check_pseudometric_net, net_cardinality_bound, CompressParams, DEFAULT_NET_CAP};
use sminlab::lcd::{lcd_vector, Alpha, LcdQuery, SearchMode, DEFAULT_ANGULAR_POINTS};
use sminlab::linalg::{generate_matrix, DenseMatrix};
use sminlab::smallball::{random_unit_vector, smallball_compare, CompareOptions};
use sminlab::witness::{verify_certificate, witness_certificate_for, CertificateSummary};
use sminlab::EntryDistribution;

pub use error::CliError;
pub use render::{render, render_report, render_svg, Format};

/// Seed used when `--seed` is absent.
pub const DEFAULT_SEED: u64 = DEFAULT_MASTER_SEED;

#[derive(Debug, Parser)]
#[command(name = "rmt", version, about = "Smallest singular value laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run Monte Carlo trials, fit the tail constant and report.
    Verify(VerifyArgs),
    /// Witness certificate of one matrix.
    Witness(WitnessArgs),
    /// Essential least common denominator of a vector.
    Lcd(LcdArgs),
    /// Empirical small-ball probabilities against the bound.
    Smallball(SmallballArgs),
    /// Build a net of sparse unit vectors and check its coverage.
    Nets(NetsArgs),
    /// Compressible-vector probe of the kernel and its complement.
    Probe(ProbeArgs),
    /// Re-render a saved JSON report.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Master seed; every random draw derives from it.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output file (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Leave wall-clock fields out of the output.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct LcdParams {
    #[arg(long, default_value_t = 0.1)]
    pub r: f64,
    /// A positive number or `auto` for `0.1 sqrt(n)`.
    #[arg(long, default_value = "auto")]
    pub alpha: Alpha,
    #[arg(long, default_value_t = 10.0)]
    pub tmax: f64,
    /// Grid pitch of the scan.
    #[arg(long)]
    pub step: Option<f64>,
}

impl LcdParams {
    fn query(&self) -> Result<LcdQuery, CliError> {
        let q = LcdQuery::new(self.alpha, self.r, self.tmax).map_err(usage)?;
        match self.step {
            Some(s) => q.with_step(s).map_err(usage),
            None => Ok(q),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CompressArgs {
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
}

impl CompressArgs {
    fn params(&self) -> Result<CompressParams, CliError> {
        CompressParams::new(self.delta, self.rho).map_err(usage)
    }
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct VerifyArgs {
    #[arg(long, value_delimiter = ',', default_value = "gaussian")]
    pub dist: Vec<EntryDistribution>,
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Exit with status 3 when the fitted constant exceeds this value.
    #[arg(long)]
    pub max_c: Option<f64>,
    /// Write the per-trial records as CSV to this file.
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    pub max_n: usize,
    /// Distinguish a random column instead of the first.
    #[arg(long)]
    pub random_column: bool,
    #[command(flatten)]
    pub compress: CompressArgs,
    #[command(flatten)]
    pub lcd: LcdParams,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct WitnessArgs {
    #[arg(long, default_value = "gaussian")]
    pub dist: EntryDistribution,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Matrix file (`# rows cols` header, then comma-separated rows).
    #[arg(long, conflicts_with_all = ["dist", "n"])]
    pub matrix: Option<PathBuf>,
    /// Distinguished column, 0-based.
    #[arg(long, default_value_t = 0)]
    pub column: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Fast,
    Oracle,
}

#[derive(Debug, Clone, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct VectorSource {
    /// Comma-separated coordinates.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, group = "source")]
    pub vector: Option<Vec<f64>>,
    /// Random unit vector of this dimension.
    #[arg(long, group = "source")]
    pub random_dim: Option<usize>,
    /// `(1, ..., 1) / sqrt(n)` of this dimension.
    #[arg(long, group = "source")]
    pub flat_dim: Option<usize>,
}

impl VectorSource {
    fn vector(&self, seed: u64) -> Result<Vec<f64>, CliError> {
        let positive = |n: usize| if n == 0 { Err(usage("dimension must be positive")) } else { Ok(n) };
        if let Some(v) = &self.vector {
            return Ok(v.clone());
        }
        if let Some(n) = self.random_dim {
            return Ok(random_unit_vector(positive(n)?, seed));
        }
        let n = positive(self.flat_dim.unwrap_or(0))?;
        Ok(vec![1.0 / (n as f64).sqrt(); n])
    }
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct LcdArgs {
    #[command(flatten)]
    pub source: VectorSource,
    #[arg(long, value_enum, default_value = "fast")]
    pub mode: Mode,
    #[command(flatten)]
    pub lcd: LcdParams,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct SmallballArgs {
    #[command(flatten)]
    pub source: VectorSource,
    #[arg(long, default_value = "rademacher")]
    pub dist: EntryDistribution,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.1")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Absolute constant of the bound.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Entry concentration at radius one; measured when absent.
    #[arg(long)]
    pub u: Option<f64>,
    #[command(flatten)]
    pub lcd: LcdParams,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct NetsArgs {
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value_t = 0.34)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Largest admissible cardinality bound.
    #[arg(long, default_value_t = DEFAULT_NET_CAP)]
    pub cap: f64,
    /// Random sparse probes for the coverage check.
    #[arg(long, default_value_t = 1000)]
    pub probes: usize,
    /// Write the net points as CSV to this file.
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct ProbeArgs {
    #[arg(long, default_value = "gaussian")]
    pub dist: EntryDistribution,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 1000)]
    pub probes: usize,
    /// Also classify the complement plane and estimate its LCD.
    #[arg(long)]
    pub kernel: bool,
    #[arg(long, default_value_t = DEFAULT_ANGULAR_POINTS)]
    pub angular_points: usize,
    #[command(flatten)]
    pub compress: CompressArgs,
    #[command(flatten)]
    pub lcd: LcdParams,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct ReportArgs {
    /// JSON report written by `verify`.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn json_text(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn emit(common: &CommonArgs, body: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => out.write_all(body.as_bytes()).map_err(CliError::from),
    }
}

fn pick_format(common: &CommonArgs, default: Format, allowed: &[Format]) -> Result<Format, CliError> {
    let f = common.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Usage(format!("format {f:?} not available here")))
    }
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let format = pick_format(&a.common, Format::Json, &[Format::Json, Format::Csv, Format::Svg])?;
    let mut cfg = ExperimentConfig::new(a.dist.clone(), a.n.clone(), a.trials, a.eps.clone());
    cfg.master_seed = a.common.seed;
    cfg.workers = a.workers;
    cfg.max_n = a.max_n;
    cfg.random_column = a.random_column;
    cfg.compress = a.compress.params()?;
    cfg.lcd = a.lcd.query()?;
    cfg.validate().map_err(usage)?;

    let start = Instant::now();
    let (records, mut report) = run_experiment(&cfg)?;
    if !a.common.no_timestamp {
        report = report.with_timing(start.elapsed().as_secs_f64());
    }
    if let Some(path) = &a.records {
        std::fs::write(path, records_to_csv(&records, !a.common.no_timestamp))
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    emit(&a.common, &render(&report, format)?, out)?;

    let violations = records.iter().filter(|r| !r.bound_holds()).count();
    if violations > 0 {
        return Err(CliError::Check(format!("{violations} trials violate s_n <= witness bound")));
    }
    if let Some(max_c) = a.max_c {
        if report.c_hat > max_c {
            return Err(CliError::Check(format!("C_hat = {} exceeds --max-c {max_c}", report.c_hat)));
        }
    }
    Ok(())
}

fn cmd_witness(a: &WitnessArgs, out: &mut dyn Write) -> Result<(), CliError> {
    pick_format(&a.common, Format::Json, &[Format::Json])?;
    let m = match &a.matrix {
        Some(path) => DenseMatrix::from_csv(&std::fs::read_to_string(path)?)?,
        None => {
            if a.n == 0 {
                return Err(usage("n must be positive"));
            }
            generate_matrix(&a.dist, a.n, a.n, a.common.seed)
        }
    };
    if a.column >= m.cols() {
        return Err(usage(format!("column {} out of range for {} columns", a.column, m.cols())));
    }
    let cert = witness_certificate_for(&m, a.column)?;
    let residuals = if cert.degenerate { None } else { Some(verify_certificate(&m, &cert)?) };
    emit(&a.common, &json_text(&CertificateSummary::new(&cert, residuals)), out)?;
    match residuals {
        Some(r) if !r.passes() => Err(CliError::Check("certificate residuals above tolerance".into())),
        _ => Ok(()),
    }
}

fn cmd_lcd(a: &LcdArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let format = pick_format(&a.common, Format::Text, &[Format::Text, Format::Json, Format::Csv])?;
    let x = a.source.vector(a.common.seed)?;
    let mode = match a.mode {
        Mode::Fast => SearchMode::Fast,
        Mode::Oracle => SearchMode::Oracle,
    };
    let res = lcd_vector(&x, &a.lcd.query()?, mode)?;
    let body = match format {
        Format::Json => json_text(&json!({
            "schema_version": 1,
            "value": res.value.to_string(),
            "censored": res.value.is_censored(),
            "witness_t": res.witness_t,
            "achieved_dist": res.achieved_dist,
            "certified": res.certified,
        })),
        Format::Csv => format!("value,witness_t,achieved_dist,certified\n{}\n", res.to_csv_line()),
        _ => format!("{}\n", res.value),
    };
    emit(&a.common, &body, out)
}

fn cmd_smallball(a: &SmallballArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let format = pick_format(&a.common, Format::Csv, &[Format::Csv, Format::Json])?;
    let x = a.source.vector(a.common.seed)?;
    let opts = CompareOptions { sample_count: a.samples, seed: a.common.seed, c: a.c, u: a.u };
    let table = smallball_compare(&x, &a.dist, &a.eps, &a.lcd.query()?, &opts)?;
    let body = match format {
        Format::Json => json_text(&json!({ "schema_version": 1, "table": table })),
        _ => table.to_csv(),
    };
    emit(&a.common, &body, out)
}

fn cmd_nets(a: &NetsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    pick_format(&a.common, Format::Json, &[Format::Json])?;
    if a.n == 0 {
        return Err(usage("n must be positive"));
    }
    let p = CompressParams::new(a.delta, a.rho).map_err(usage)?;
    let net = build_sparse_net(a.n, &p, a.common.seed, a.cap)?;
    let bound = net_cardinality_bound(a.n, &p);
    let coverage = if a.probes > 0 {
        Some(check_pseudometric_net(&net, &DenseMatrix::identity(a.n), a.probes, a.rho, a.common.seed)?)
    } else {
        None
    };
    if let Some(path) = &a.points {
        std::fs::write(path, net.to_csv())?;
    }
    let body = json_text(&json!({
        "schema_version": 1,
        "n": a.n,
        "delta": a.delta,
        "rho": a.rho,
        "sparsity": net.sparsity(),
        "cardinality": net.len(),
        "bound": bound,
        "coverage": coverage,
    }));
    emit(&a.common, &body, out)?;
    if net.len() as f64 > bound {
        return Err(CliError::Check(format!("net has {} points, bound {bound}", net.len())));
    }
    if coverage.is_some_and(|c| c < 1.0) {
        return Err(CliError::Check("some probes are not covered".into()));
    }
    Ok(())
}

fn cmd_probe(a: &ProbeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    pick_format(&a.common, Format::Json, &[Format::Json])?;
    let p = a.compress.params()?;
    let probe = compressible_kernel_probe(&a.dist, a.n, a.probes, &p, a.common.seed).map_err(usage)?;
    let kernel = if a.kernel {
        let opts = KernelStudyOptions {
            compress: p,
            lcd: a.lcd.query()?,
            samples: a.angular_points,
            angular_points: a.angular_points,
            gamma: 0.1,
        };
        Some(kernel_complement_study(&a.dist, a.n, a.common.seed, &opts)?)
    } else {
        None
    };
    let body = json_text(&json!({ "schema_version": 1, "probe": probe, "kernel": kernel }));
    emit(&a.common, &body, out)
}

fn cmd_report(a: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let format = pick_format(&a.common, Format::Svg, &[Format::Json, Format::Csv, Format::Svg])?;
    let text = std::fs::read_to_string(&a.input)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", a.input.display())))?;
    let mut report: ExperimentReport =
        serde_json::from_str(&text).map_err(|e| CliError::Runtime(format!("bad report: {e}")))?;
    if a.common.no_timestamp {
        report.timestamp = None;
        report.wall_time_s = None;
    }
    emit(&a.common, &render(&report, format)?, out)
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Verify(a) => cmd_verify(a, out),
        Command::Witness(a) => cmd_witness(a, out),
        Command::Lcd(a) => cmd_lcd(a, out),
        Command::Smallball(a) => cmd_smallball(a, out),
        Command::Nets(a) => cmd_nets(a, out),
        Command::Probe(a) => cmd_probe(a, out),
        Command::Report(a) => cmd_report(a, out),
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit status: 0 success, 1 usage error, 2 runtime failure, 3 failed check.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv = match config::expand_config(argv.into_iter().map(Into::into).collect()) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
