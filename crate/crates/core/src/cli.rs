//! `rssl` command-line front end: `simulate`, `detect` and `benchmark`.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 I/O, 4 estimation
//! failure, 5 malformed input. Every failure prints one line on stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, BenchmarkSpec, ExternalMethod, Grid, ReportFormat};
use crate::detector::{DetectorParams, DetectorRegistry, Mode};
use crate::error::{Error, Result};
use crate::rssl::ScanCriterion;
use crate::sim::{read_dataset_path, sample_dataset, write_dataset_path, ContaminationConfig};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_ESTIMATION: i32 = 4;
pub const EXIT_FORMAT: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "rssl", version, about = "Random subspace outlier detection")]
pub struct Cli {
    /// Worker threads for ensemble and replication loops. Output does not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a contaminated Gaussian dataset and write it as CSV.
    Simulate(SimulateArgs),
    /// Fit a detector on a CSV dataset and write per-row distances and labels.
    Detect(DetectArgs),
    /// Run a Monte-Carlo grid and write a report.
    Benchmark(Box<BenchmarkArgs>),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    /// Contamination fraction.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Outlier mean shift.
    #[arg(long, default_value_t = 5.0)]
    pub eta: f64,
    /// Outlier covariance inflation.
    #[arg(long, default_value_t = 5.0)]
    pub gamma: f64,
    /// Equicorrelation.
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Ld,
    Hd,
    Mcd,
    Auto,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Ld => Mode::Ld,
            ModeArg::Hd => Mode::Hd,
            ModeArg::Mcd => Mode::Mcd,
            ModeArg::Auto => Mode::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanArg {
    Raw,
    PerDimension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Markdown,
}

/// Estimator settings shared by `detect` and `benchmark`; unset flags keep the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct EstimatorArgs {
    /// Ensemble size.
    #[arg(long = "B", value_name = "B")]
    pub b: Option<usize>,
    /// Subspace dimension (default max(2, floor(min(n/5, sqrt p)))).
    #[arg(long)]
    pub d: Option<usize>,
    /// Fraction of lowest-determinant subsamples that vote on variables.
    #[arg(long = "k-fraction", value_name = "K")]
    pub k_fraction: Option<f64>,
    /// Largest dimension tried by the nested determinant scan.
    #[arg(long)]
    pub m: Option<usize>,
    /// Cutoff tail probability.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub scan: Option<ScanArg>,
    /// MCD random starts.
    #[arg(long = "n-starts", value_name = "N")]
    pub n_starts: Option<usize>,
    /// MCD subset size.
    #[arg(long)]
    pub h: Option<usize>,
    /// MCD concentration step limit.
    #[arg(long = "max-iter", value_name = "N")]
    pub max_iter: Option<usize>,
}

impl EstimatorArgs {
    fn apply(&self, params: &mut DetectorParams) {
        let r = &mut params.rssl;
        if let Some(b) = self.b {
            r.b = b;
        }
        if let Some(d) = self.d {
            r.d = d;
        }
        if let Some(k) = self.k_fraction {
            r.k_fraction = k;
        }
        if let Some(m) = self.m {
            r.m = m;
        }
        if let Some(scan) = self.scan {
            r.scan = match scan {
                ScanArg::Raw => ScanCriterion::Raw,
                ScanArg::PerDimension => ScanCriterion::PerDimension,
            };
        }
        if let Some(alpha) = self.alpha {
            params.alpha = alpha;
        }
        let mcd = &mut params.mcd;
        if self.h.is_some() {
            mcd.h = self.h;
        }
        if let Some(s) = self.n_starts {
            mcd.n_starts = s;
        }
        if let Some(i) = self.max_iter {
            mcd.max_iter = i;
        }
    }
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Labels CSV `index,distance,label`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print the zero-one error against the input's `label` column.
    #[arg(long)]
    pub score: bool,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// desk-ld, desk-hd, full-ld or full-hd; other flags override it.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub p: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub epsilon: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub eta: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub gamma: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub rho: Option<Vec<f64>>,
    /// Cross eta with gamma instead of pairing them position by position.
    #[arg(long)]
    pub cross: bool,
    /// Replications per cell.
    #[arg(long = "R", value_name = "R")]
    pub r: Option<usize>,
    /// Detector names (rssl-ld, rssl-hd, mcd).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub method: Option<Vec<String>>,
    /// Score predictions found in DIR/<dataset stem>.csv as method NAME.
    #[arg(long, value_name = "NAME=DIR", value_parser = parse_external)]
    pub external: Vec<ExternalMethod>,
    /// Also write every simulated dataset into DIR.
    #[arg(long = "emit-datasets", value_name = "DIR")]
    pub emit_datasets: Option<PathBuf>,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Write NA for runtimes so the report is byte-reproducible.
    #[arg(long = "no-timing")]
    pub no_timing: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
}

fn parse_external(s: &str) -> std::result::Result<ExternalMethod, String> {
    match s.split_once('=') {
        Some((name, dir)) if !name.is_empty() && !dir.is_empty() => {
            Ok(ExternalMethod { name: name.to_string(), dir: PathBuf::from(dir) })
        }
        _ => Err(format!("expected NAME=DIR, got {s:?}")),
    }
}

/// Parses argv (including the program name). `--help` and `--version`
/// come back as errors whose `exit_code()` is 0.
pub fn parse_args<I, T>(argv: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

/// Collapses a clap error into one line that still names the offending token.
pub fn usage_line(err: &clap::Error) -> String {
    let rendered = err.render().to_string();
    let parts: Vec<&str> = rendered
        .lines()
        .take_while(|l| !l.trim_start().starts_with("Usage:"))
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("tip:") && !l.starts_with("For more information"))
        .collect();
    parts.join(" ")
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) => EXIT_USAGE,
        Error::Io(_) => EXIT_IO,
        Error::DegenerateSample(_) | Error::NotPositiveDefinite { .. } | Error::EstimationFailed(_) => EXIT_ESTIMATION,
        Error::Format { .. } => EXIT_FORMAT,
    }
}

fn at_path(path: &Path) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        Error::Format { line, message } => Error::Format { line, message: format!("{}: {message}", path.display()) },
        other => other,
    }
}

/// Executes a parsed invocation; returns the text for standard output.
pub fn run(cli: &Cli) -> Result<String> {
    match cli.workers {
        Some(0) => Err(Error::Config("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?
            .install(|| dispatch(&cli.command)),
        None => dispatch(&cli.command),
    }
}

fn dispatch(command: &Command) -> Result<String> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Detect(a) => detect(a),
        Command::Benchmark(a) => benchmark(a),
    }
}

fn simulate(a: &SimulateArgs) -> Result<String> {
    let config = ContaminationConfig {
        n: a.n,
        p: a.p,
        epsilon: a.epsilon,
        eta: a.eta,
        gamma: a.gamma,
        rho: a.rho,
        seed: a.seed,
    };
    let dataset = sample_dataset(&config)?;
    write_dataset_path(&dataset, &a.out).map_err(at_path(&a.out))?;
    let outliers = dataset.labels.iter().filter(|&&l| l == 1).count();
    Ok(format!("wrote {} rows ({} outliers) to {}\n", a.n, outliers, a.out.display()))
}

fn detect(a: &DetectArgs) -> Result<String> {
    let input = read_dataset_path(&a.input).map_err(at_path(&a.input))?;
    let (n, p) = (input.data.nrows(), input.data.ncols());
    let mut params = DetectorParams::default();
    a.estimator.apply(&mut params);
    let name = Mode::from(a.mode).detector_name(n, p);
    let detector = DetectorRegistry::with_builtins().create(name, &params)?;
    let result = detector.detect(&input.data, a.seed)?;

    let write = || -> Result<()> {
        let mut out = BufWriter::new(File::create(&a.out)?);
        writeln!(out, "index,distance,label")?;
        for (i, (d, l)) in result.distances.iter().zip(&result.labels).enumerate() {
            writeln!(out, "{i},{d},{l}")?;
        }
        out.flush()?;
        Ok(())
    };
    write().map_err(at_path(&a.out))?;

    let mut summary = format!(
        "method={name} df={} cutoff={} flagged={}/{n}",
        result.estimate.df,
        bench::format_sig6(result.cutoff),
        result.flagged()
    );
    if a.score {
        let truth = input.labels.as_ref().ok_or_else(|| {
            at_path(&a.input)(Error::format("--score needs a `label` column in the input"))
        })?;
        let loss = bench::zero_one_loss(truth, &result.labels)?;
        summary.push_str(&format!(" zero_one_error={}", bench::format_sig6(loss)));
    }
    summary.push('\n');
    Ok(summary)
}

fn benchmark(a: &BenchmarkArgs) -> Result<String> {
    let mut spec = match &a.preset {
        Some(name) => bench::preset(name)?,
        None => {
            let n = a.n.ok_or_else(|| Error::Config("benchmark needs --preset or both --n and --p".into()))?;
            let p = a.p.clone().ok_or_else(|| Error::Config("benchmark needs --preset or both --n and --p".into()))?;
            let smallest = p.iter().copied().min().unwrap_or(0);
            BenchmarkSpec {
                grid: Grid {
                    p,
                    epsilon: vec![0.1],
                    eta: vec![5.0],
                    gamma: vec![5.0],
                    rho: vec![0.1],
                    pair_eta_gamma: true,
                },
                n,
                methods: vec![Mode::Auto.detector_name(n, smallest).to_string()],
                external: Vec::new(),
                replications: 20,
                params: DetectorParams::default(),
                master_seed: 0,
                timing: true,
            }
        }
    };
    if let Some(n) = a.n {
        spec.n = n;
    }
    let g = &mut spec.grid;
    for (target, value) in [
        (&mut g.epsilon, &a.epsilon),
        (&mut g.eta, &a.eta),
        (&mut g.gamma, &a.gamma),
        (&mut g.rho, &a.rho),
    ] {
        if let Some(v) = value {
            *target = v.clone();
        }
    }
    if let Some(p) = &a.p {
        g.p = p.clone();
    }
    if a.cross {
        g.pair_eta_gamma = false;
    }
    if let Some(r) = a.r {
        spec.replications = r;
    }
    if let Some(m) = &a.method {
        spec.methods = m.clone();
    }
    spec.external = a.external.clone();
    spec.master_seed = a.seed;
    spec.timing = !a.no_timing;
    a.estimator.apply(&mut spec.params);

    let registry = DetectorRegistry::with_builtins();
    spec.validate(&registry)?;
    let mut stdout = String::new();
    if let Some(dir) = &a.emit_datasets {
        let written = bench::emit_datasets(&spec, dir).map_err(at_path(dir))?;
        stdout.push_str(&format!("wrote {} datasets to {}\n", written.len(), dir.display()));
    }
    let report = bench::run_benchmark(&spec, &registry)?;
    let format = match a.format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Markdown => ReportFormat::Markdown,
    };
    bench::write_report(&report, format, &a.out)?;
    let failures: usize = report.rows.iter().map(|r| r.failures).sum();
    stdout.push_str(&format!(
        "wrote {} report rows ({} failed replications) to {}\n",
        report.rows.len(),
        failures,
        a.out.display()
    ));
    Ok(stdout)
}

/// Full process behaviour: parse, run, print, and return the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse_args(argv) {
        Ok(cli) => cli,
        Err(e) if e.exit_code() == 0 => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            eprintln!("rssl: {}", usage_line(&e));
            return EXIT_USAGE;
        }
    };
    match run(&cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("rssl: {}", e.to_string().replace('\n', " "));
            exit_code(&e)
        }
    }
}
