use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use cuboid_core::bounds::BoundError;
use cuboid_core::optimizer::{self, OptimalRecord, OptimizeError, OptimizerConfig};
use cuboid_core::report::{self, CountDoc, OptimizeRow, SpectrumDoc, TableDoc, VerifyRow};
use cuboid_core::verify::{self, Suite, VerifyError, VerifySummary};
use cuboid_core::{lattice, spectrum, Cuboid, GeometryError, SpectrumError};

/// Smallest accepted tolerance override.
const MIN_TOLERANCE: f64 = f64::EPSILON * 1e3;

/// Draws used for the remainder-constant commentary after `verify`.
const CALIBRATION_SAMPLES: usize = 1000;

#[derive(Debug, Parser)]
#[command(name = "cuboid", version, about = "Dirichlet eigenvalues of unit-volume boxes and their minimisers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for sampled suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format. Sweeps default to csv, single queries to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write data here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lowest k eigenvalues with their index triples.
    Spectrum(SpectrumArgs),
    /// Lattice counts at a threshold and the decomposition identity.
    Count(CountArgs),
    /// Minimise lambda_k over unit-volume boxes.
    Optimize(OptimizeArgs),
    /// Run a seeded inequality suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct Sides {
    #[arg(long, allow_negative_numbers = true)]
    a1: f64,
    #[arg(long, allow_negative_numbers = true)]
    a2: f64,
}

impl Sides {
    fn cuboid(&self) -> Result<Cuboid, GeometryError> {
        Cuboid::new(self.a1, self.a2)
    }
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    sides: Sides,
    #[arg(long, visible_alias = "k-max")]
    k: u64,
}

#[derive(Debug, Args)]
struct CountArgs {
    #[command(flatten)]
    sides: Sides,
    #[arg(long, allow_negative_numbers = true)]
    lambda: f64,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    /// A single rank.
    #[arg(long, conflicts_with_all = ["k_min", "k_max"], required_unless_present = "k_max")]
    k: Option<u64>,
    #[arg(long, requires = "k_max")]
    k_min: Option<u64>,
    #[arg(long)]
    k_max: Option<u64>,
    /// Only powers of two in the range.
    #[arg(long, requires = "k_max")]
    dyadic: bool,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    basins: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    side_tol: Option<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_suite)]
    suite: Suite,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: VerifyError| e.to_string())
}

/// An error paired with the process exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn bad_input(error: impl Into<anyhow::Error>) -> Self {
        Self { code: 2, error: error.into() }
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        Failure::bad_input(e)
    }
}

impl From<SpectrumError> for Failure {
    fn from(e: SpectrumError) -> Self {
        let code = if matches!(e, SpectrumError::ResourceCap { .. }) { 3 } else { 2 };
        Self { code, error: e.into() }
    }
}

impl From<OptimizeError> for Failure {
    fn from(e: OptimizeError) -> Self {
        match e {
            OptimizeError::Spectrum(s) => s.into(),
            e => Failure::bad_input(e),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Bound(BoundError::Spectrum(s)) => s.into(),
            e => Failure::bad_input(e),
        }
    }
}

impl From<report::ReportError> for Failure {
    fn from(e: report::ReportError) -> Self {
        Failure::bad_input(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure::bad_input(error)
    }
}

type Outcome = Result<u8, Failure>;

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            f.write_all(bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes).and_then(|_| stdout.flush()).context("writing standard output")?;
        }
    }
    Ok(())
}

fn run_spectrum(cli: &Cli, args: &SpectrumArgs) -> Outcome {
    let cuboid = args.sides.cuboid()?;
    let points = spectrum::lowest_eigenvalues(&cuboid, args.k)?;
    let doc = SpectrumDoc::new(cuboid, &points);
    let mut buf = Vec::new();
    match cli.format.unwrap_or(Format::Json) {
        Format::Csv => report::write_spectrum_csv(&mut buf, &doc)?,
        Format::Json => report::write_json(&mut buf, &doc)?,
    }
    emit(&cli.out, &buf)?;
    Ok(0)
}

fn run_count(cli: &Cli, args: &CountArgs) -> Outcome {
    let cuboid = args.sides.cuboid()?;
    let bundle = lattice::count_bundle(&cuboid, args.lambda)?;
    let doc = CountDoc::new(cuboid, bundle);
    let mut buf = Vec::new();
    match cli.format.unwrap_or(Format::Json) {
        Format::Csv => report::write_count_csv(&mut buf, &doc)?,
        Format::Json => report::write_json(&mut buf, &doc)?,
    }
    emit(&cli.out, &buf)?;
    eprintln!("identity {}", if doc.identity_ok { "OK" } else { "VIOLATED" });
    Ok(if doc.identity_ok { 0 } else { 1 })
}

fn optimizer_config(args: &OptimizeArgs) -> Result<OptimizerConfig, Failure> {
    let mut config = OptimizerConfig::default();
    if let Some(g) = args.grid {
        config.grid = g;
    }
    if let Some(b) = args.basins {
        config.basins = b;
    }
    if let Some(m) = args.max_iter {
        config.max_iter = m;
    }
    if let Some(t) = args.side_tol {
        if t.is_nan() || t < MIN_TOLERANCE {
            return Err(Failure::bad_input(anyhow!("--side-tol {t:e} is below {MIN_TOLERANCE:e}")));
        }
        config.side_tol = t;
    }
    config.validate()?;
    Ok(config)
}

fn rank_set(args: &OptimizeArgs) -> Result<Vec<u64>, Failure> {
    if let Some(k) = args.k {
        if k == 0 {
            return Err(OptimizeError::ZeroRank.into());
        }
        return Ok(vec![k]);
    }
    let k_max = args.k_max.expect("clap requires k or k-max");
    let k_min = args.k_min.unwrap_or(1);
    if k_min == 0 {
        return Err(OptimizeError::ZeroRank.into());
    }
    let ks = if args.dyadic {
        optimizer::dyadic_range(k_min, k_max)
    } else {
        (k_min..=k_max).collect()
    };
    if ks.is_empty() {
        return Err(OptimizeError::EmptySweep.into());
    }
    Ok(ks)
}

fn optimize_summary(records: &[OptimalRecord]) {
    let Some(max_a3) = records.iter().map(|r| r.cuboid.a3()).reduce(f64::max) else {
        return;
    };
    let min_a1 = records.iter().map(|r| r.cuboid.a1()).fold(f64::INFINITY, f64::min);
    eprintln!("max a3* {max_a3:.6}  min a1* {min_a1:.6}");
    match optimizer::rate_fit(records) {
        Ok(fit) => eprintln!(
            "fitted delta exponent {:.4} (r^2 {:.3}, {} points); asymptotic rate {:.4}",
            fit.exponent, fit.r_squared, fit.points, fit.theoretical
        ),
        Err(e) => eprintln!("no rate fit: {e}"),
    }
}

fn run_optimize(cli: &Cli, args: &OptimizeArgs) -> Outcome {
    let config = optimizer_config(args)?;
    let ks = rank_set(args)?;
    info!("optimizing {} ranks", ks.len());
    let entries = optimizer::sweep(&ks, &config)?;

    let mut rows = Vec::with_capacity(entries.len());
    let mut records = Vec::new();
    let mut last_error = None;
    for e in entries {
        match e.outcome {
            Ok(r) => {
                rows.push(OptimizeRow::from_record(&r));
                records.push(r);
            }
            Err(err) => {
                eprintln!("k={}: {err}", e.k);
                rows.push(OptimizeRow::failed(e.k, &err));
                last_error = Some(err);
            }
        }
    }
    let mut buf = Vec::new();
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => report::write_optimize_csv(&mut buf, &rows)?,
        Format::Json => report::write_json(&mut buf, &TableDoc::new(rows))?,
    }
    emit(&cli.out, &buf)?;
    optimize_summary(&records);
    match (records.is_empty(), last_error) {
        (true, Some(err)) => Err(err.into()),
        _ => Ok(0),
    }
}

fn run_verify(cli: &Cli, args: &VerifyArgs) -> Outcome {
    let rows = verify::run_suite(args.suite, args.samples, cli.seed)?;
    let summary = VerifySummary::of(&rows);
    let table: Vec<VerifyRow> = rows.iter().map(VerifyRow::from_suite_row).collect();
    let mut buf = Vec::new();
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => report::write_verify_csv(&mut buf, &table)?,
        Format::Json => report::write_json(&mut buf, &TableDoc::new(table))?,
    }
    emit(&cli.out, &buf)?;
    eprintln!(
        "{}: {} checks, {} hard failures, {} within float tolerance",
        args.suite, summary.total, summary.hard_failures, summary.float_artifacts
    );
    let est = verify::calibrate_remainders(args.samples.min(CALIBRATION_SAMPLES), cli.seed)?;
    eprintln!(
        "empirical remainder constants over {} draws: C ~ {:.4} (exponent {:.4}), D ~ {:.4} (exponent {:.4})",
        est.samples, est.c_full, est.exponents.beta, est.d_plane, est.exponents.theta
    );
    Ok(if summary.hard_failures == 0 { 0 } else { 1 })
}

fn run(cli: &Cli) -> Outcome {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::bad_input(anyhow!("--threads must be positive")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting the thread pool")?;
    }
    match &cli.command {
        Command::Spectrum(a) => run_spectrum(cli, a),
        Command::Count(a) => run_count(cli, a),
        Command::Optimize(a) => run_optimize(cli, a),
        Command::Verify(a) => run_verify(cli, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
