//! Monte-Carlo benchmark harness.
//!
//! For every grid cell and replication `r` a dataset is simulated from a seed
//! derived from `(master_seed, cell parameters, r)`, each requested detector
//! labels it, and the zero-one loss against the ground truth is recorded.
//! Replications run on the rayon pool in any order; aggregation afterwards is
//! a sequential fold in replication order, so reports are byte-stable.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::detector::{DetectorParams, DetectorRegistry, RSSL_HD, RSSL_LD};
use crate::error::{Error, Result};
use crate::seeding::derive_seed;
use crate::sim::{parse_label, sample_dataset, write_dataset_path, ContaminationConfig, SimulatedDataset};

/// Parameter lists; every combination becomes a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub p: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub eta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub rho: Vec<f64>,
    /// Zip `eta` with `gamma` instead of crossing them.
    pub pair_eta_gamma: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub p: usize,
    pub epsilon: f64,
    pub eta: f64,
    pub gamma: f64,
    pub rho: f64,
    pub n: usize,
}

impl Cell {
    fn seed(&self, master: u64, replication: usize) -> u64 {
        derive_seed(
            master,
            &[
                self.n as u64,
                self.p as u64,
                self.epsilon.to_bits(),
                self.eta.to_bits(),
                self.gamma.to_bits(),
                self.rho.to_bits(),
                replication as u64,
            ],
        )
    }

    pub fn contamination(&self, seed: u64) -> ContaminationConfig {
        ContaminationConfig {
            n: self.n,
            p: self.p,
            epsilon: self.epsilon,
            eta: self.eta,
            gamma: self.gamma,
            rho: self.rho,
            seed,
        }
    }

    /// File stem shared by emitted datasets and external prediction files.
    pub fn file_stem(&self, replication: usize) -> String {
        format!(
            "n{}_p{}_eps{}_eta{}_gamma{}_rho{}_r{}",
            self.n, self.p, self.epsilon, self.eta, self.gamma, self.rho, replication
        )
    }
}

impl Grid {
    pub fn cells(&self, n: usize) -> Vec<Cell> {
        let shapes: Vec<(f64, f64)> = if self.pair_eta_gamma {
            self.eta.iter().copied().zip(self.gamma.iter().copied()).collect()
        } else {
            self.eta.iter().flat_map(|&e| self.gamma.iter().map(move |&g| (e, g))).collect()
        };
        let mut cells = Vec::new();
        for &p in &self.p {
            for &epsilon in &self.epsilon {
                for &(eta, gamma) in &shapes {
                    for &rho in &self.rho {
                        cells.push(Cell { p, epsilon, eta, gamma, rho, n });
                    }
                }
            }
        }
        cells
    }
}

/// Predictions produced outside this crate, one file per replication named
/// `<dir>/<Cell::file_stem>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalMethod {
    pub name: String,
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub grid: Grid,
    pub n: usize,
    /// Registry names of the detectors to run.
    pub methods: Vec<String>,
    pub external: Vec<ExternalMethod>,
    pub replications: usize,
    pub params: DetectorParams,
    pub master_seed: u64,
    /// Record wall-clock runtime; disable for byte-identical reports.
    pub timing: bool,
}

impl BenchmarkSpec {
    pub fn validate(&self, registry: &DetectorRegistry) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replication count R must be at least 1".into()));
        }
        let g = &self.grid;
        if g.p.is_empty() || g.epsilon.is_empty() || g.eta.is_empty() || g.gamma.is_empty() || g.rho.is_empty() {
            return Err(Error::Config("every grid dimension needs at least one value".into()));
        }
        if g.pair_eta_gamma && g.eta.len() != g.gamma.len() {
            return Err(Error::Config(format!(
                "paired eta/gamma lists differ in length ({} vs {})",
                g.eta.len(),
                g.gamma.len()
            )));
        }
        if self.methods.is_empty() && self.external.is_empty() {
            return Err(Error::Config("no methods to benchmark".into()));
        }
        for method in &self.methods {
            if !registry.contains(method) {
                return Err(Error::Config(format!(
                    "unknown method {method:?}; available: {}",
                    registry.names().join(", ")
                )));
            }
        }
        for cell in g.cells(self.n) {
            cell.contamination(0).validate()?;
            for method in &self.methods {
                if method == RSSL_HD && self.n >= cell.p {
                    return Err(Error::Config(format!("{RSSL_HD} needs n < p, but n={} and p={}", self.n, cell.p)));
                }
                if method == RSSL_LD && 2 * cell.p >= self.n {
                    return Err(Error::Config(format!("{RSSL_LD} needs p < n/2, but n={} and p={}", self.n, cell.p)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub cell: Cell,
    pub method: String,
    /// Mean zero-one loss over successful replications; `None` if all failed.
    pub mean_ave: Option<f64>,
    /// Sample standard deviation of the per-replication losses.
    pub sd: Option<f64>,
    pub mean_runtime_s: Option<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

pub const REPORT_COLUMNS: [&str; 11] =
    ["p", "epsilon", "eta", "gamma", "rho", "n", "method", "mean_ave", "sd", "mean_runtime_s", "failures"];

/// Mean of `1{y_i != yhat_i}`.
pub fn zero_one_loss(y: &[u8], yhat: &[u8]) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(Error::Domain(format!("label vectors differ in length ({} vs {})", y.len(), yhat.len())));
    }
    if y.is_empty() {
        return Err(Error::Domain("zero-one loss of empty label vectors".into()));
    }
    let wrong = y.iter().zip(yhat).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / y.len() as f64)
}

/// Reads 0/1 labels: either one per line, or a CSV whose header has a
/// `label` column (as written by `rssl detect`).
pub fn ingest_predictions(path: &Path, n: usize) -> Result<Vec<u8>> {
    let text = fs::read_to_string(path)?;
    parse_predictions(&text, n)
}

pub fn parse_predictions(text: &str, n: usize) -> Result<Vec<u8>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let mut labels = Vec::with_capacity(n);
    let first = lines.next();
    let column = match first {
        Some((line, header)) if header.contains(',') || header == "label" => {
            let pos = header.split(',').map(str::trim).position(|h| h == "label");
            Some(pos.ok_or_else(|| Error::format_at(line, "CSV header has no `label` column"))?)
        }
        Some((line, value)) => {
            labels.push(parse_label(value, line)?);
            None
        }
        None => None,
    };
    for (line, text) in lines {
        let field = match column {
            Some(c) => text
                .split(',')
                .nth(c)
                .ok_or_else(|| Error::format_at(line, format!("missing field {} ", c + 1)))?,
            None => text,
        };
        labels.push(parse_label(field, line)?);
        if labels.len() > n {
            return Err(Error::format_at(line, format!("more than the expected {n} labels")));
        }
    }
    if labels.len() < n {
        return Err(Error::format(format!(
            "expected {n} labels, found {} ({} missing)",
            labels.len(),
            n - labels.len()
        )));
    }
    Ok(labels)
}

enum Outcome {
    Scored { loss: f64, seconds: Option<f64> },
    Failed,
}

fn simulate(cell: &Cell, spec: &BenchmarkSpec, r: usize) -> Result<SimulatedDataset> {
    sample_dataset(&cell.contamination(cell.seed(spec.master_seed, r)))
}

/// Writes every replication's dataset to `dir/<stem>.csv` so external tools
/// can produce predictions for [`ExternalMethod`].
pub fn emit_datasets(spec: &BenchmarkSpec, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let items: Vec<(Cell, usize)> = spec
        .grid
        .cells(spec.n)
        .into_iter()
        .flat_map(|c| (0..spec.replications).map(move |r| (c, r)))
        .collect();
    items
        .par_iter()
        .map(|(cell, r)| {
            let path = dir.join(format!("{}.csv", cell.file_stem(*r)));
            write_dataset_path(&simulate(cell, spec, *r)?, &path)?;
            Ok(path)
        })
        .collect()
}

pub fn run_benchmark(spec: &BenchmarkSpec, registry: &DetectorRegistry) -> Result<BenchmarkReport> {
    spec.validate(registry)?;
    let detectors = spec
        .methods
        .iter()
        .map(|m| registry.create(m, &spec.params))
        .collect::<Result<Vec<_>>>()?;
    let cells = spec.grid.cells(spec.n);
    let items: Vec<(usize, usize)> =
        (0..cells.len()).flat_map(|c| (0..spec.replications).map(move |r| (c, r))).collect();

    // outcomes[item][method], detectors first then external methods
    let outcomes: Vec<Vec<Outcome>> = items
        .par_iter()
        .map(|&(c, r)| -> Result<Vec<Outcome>> {
            let cell = &cells[c];
            let dataset = simulate(cell, spec, r)?;
            let method_seed = derive_seed(dataset.config.seed, &[0x5EED]);
            let mut row = Vec::with_capacity(detectors.len() + spec.external.len());
            for detector in &detectors {
                let start = Instant::now();
                let outcome = match detector.detect(&dataset.data, method_seed) {
                    Ok(result) => Outcome::Scored {
                        loss: zero_one_loss(&dataset.labels, &result.labels)?,
                        seconds: spec.timing.then(|| start.elapsed().as_secs_f64()),
                    },
                    Err(e) if e.is_estimation() => Outcome::Failed,
                    Err(e) => return Err(e),
                };
                row.push(outcome);
            }
            for ext in &spec.external {
                let path = ext.dir.join(format!("{}.csv", cell.file_stem(r)));
                let predicted = ingest_predictions(&path, dataset.labels.len()).map_err(|e| match e {
                    Error::Format { line, message } => {
                        Error::Format { line, message: format!("{}: {message}", path.display()) }
                    }
                    Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
                    other => other,
                })?;
                row.push(Outcome::Scored { loss: zero_one_loss(&dataset.labels, &predicted)?, seconds: None });
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let names: Vec<String> =
        spec.methods.iter().cloned().chain(spec.external.iter().map(|e| e.name.clone())).collect();
    let mut rows = Vec::new();
    for (c, cell) in cells.iter().enumerate() {
        for (m, name) in names.iter().enumerate() {
            let mut losses = Vec::new();
            let mut times = Vec::new();
            let mut failures = 0;
            for r in 0..spec.replications {
                match &outcomes[c * spec.replications + r][m] {
                    Outcome::Scored { loss, seconds } => {
                        losses.push(*loss);
                        times.extend(*seconds);
                    }
                    Outcome::Failed => failures += 1,
                }
            }
            let (mean_ave, sd) = mean_sd(&losses);
            let mean_runtime_s = (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64);
            rows.push(ReportRow { cell: *cell, method: name.clone(), mean_ave, sd, mean_runtime_s, failures });
        }
    }
    rows.sort_by(row_order);
    Ok(BenchmarkReport { rows })
}

fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (Some(mean), Some(sd))
}

fn row_order(a: &ReportRow, b: &ReportRow) -> Ordering {
    a.cell
        .p
        .cmp(&b.cell.p)
        .then(a.cell.epsilon.total_cmp(&b.cell.epsilon))
        .then(a.cell.eta.total_cmp(&b.cell.eta))
        .then(a.cell.gamma.total_cmp(&b.cell.gamma))
        .then(a.method.cmp(&b.method))
        .then(a.cell.rho.total_cmp(&b.cell.rho))
        .then(a.cell.n.cmp(&b.cell.n))
}

/// Six significant digits, fixed notation.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let mut exponent = x.abs().log10().floor() as i32;
    let rounded = {
        let scale = 10f64.powi(5 - exponent);
        (x * scale).round() / scale
    };
    // rounding can carry into the next decade (9.999999 -> 10.0000)
    if rounded != 0.0 {
        exponent = rounded.abs().log10().floor() as i32;
    }
    let decimals = (5 - exponent).max(0) as usize;
    format!("{rounded:.decimals$}")
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(format_sig6).unwrap_or_else(|| "NA".into())
}

fn row_fields(row: &ReportRow) -> [String; 11] {
    [
        row.cell.p.to_string(),
        row.cell.epsilon.to_string(),
        row.cell.eta.to_string(),
        row.cell.gamma.to_string(),
        row.cell.rho.to_string(),
        row.cell.n.to_string(),
        row.method.clone(),
        opt_cell(row.mean_ave),
        opt_cell(row.sd),
        opt_cell(row.mean_runtime_s),
        row.failures.to_string(),
    ]
}

pub fn emit_report(report: &BenchmarkReport, format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str(&REPORT_COLUMNS.join(","));
            out.push('\n');
            for row in &report.rows {
                out.push_str(&row_fields(row).join(","));
                out.push('\n');
            }
        }
        ReportFormat::Markdown => {
            let _ = writeln!(out, "| {} |", REPORT_COLUMNS.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(REPORT_COLUMNS.len()));
            for row in &report.rows {
                let _ = writeln!(out, "| {} |", row_fields(row).join(" | "));
            }
        }
    }
    out
}

pub fn write_report(report: &BenchmarkReport, format: ReportFormat, path: &Path) -> Result<()> {
    fs::write(path, emit_report(report, format))
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Inverse of [`emit_report`] (numeric columns come back at report precision).
pub fn parse_report(text: &str, format: ReportFormat) -> Result<BenchmarkReport> {
    let split = |line: &str| -> Vec<String> {
        match format {
            ReportFormat::Csv => line.split(',').map(|s| s.trim().to_string()).collect(),
            ReportFormat::Markdown => line
                .trim()
                .trim_start_matches('|')
                .trim_end_matches('|')
                .split('|')
                .map(|s| s.trim().to_string())
                .collect(),
        }
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::format("report is empty"))?;
    if split(header) != REPORT_COLUMNS {
        return Err(Error::format_at(1, "unexpected report header"));
    }
    if format == ReportFormat::Markdown {
        lines.next();
    }
    let mut rows = Vec::new();
    for (line, text) in lines {
        let f = split(text);
        if f.len() != REPORT_COLUMNS.len() {
            return Err(Error::format_at(line, format!("expected {} fields, found {}", REPORT_COLUMNS.len(), f.len())));
        }
        let num = |k: usize| -> Result<f64> {
            f[k].parse().map_err(|_| Error::format_at(line, format!("{} is not a number: {:?}", REPORT_COLUMNS[k], f[k])))
        };
        let int = |k: usize| -> Result<usize> {
            f[k].parse().map_err(|_| Error::format_at(line, format!("{} is not an integer: {:?}", REPORT_COLUMNS[k], f[k])))
        };
        let opt = |k: usize| -> Result<Option<f64>> { if f[k] == "NA" { Ok(None) } else { num(k).map(Some) } };
        rows.push(ReportRow {
            cell: Cell { p: int(0)?, epsilon: num(1)?, eta: num(2)?, gamma: num(3)?, rho: num(4)?, n: int(5)? },
            method: f[6].clone(),
            mean_ave: opt(7)?,
            sd: opt(8)?,
            mean_runtime_s: opt(9)?,
            failures: int(10)?,
        });
    }
    Ok(BenchmarkReport { rows })
}

/// Named grids. `desk-*` shrink replications to 20; `full-*` use 200.
pub fn preset(name: &str) -> Result<BenchmarkSpec> {
    let (ld, replications) = match name {
        "desk-ld" => (true, 20),
        "desk-hd" => (false, 20),
        "full-ld" => (true, 200),
        "full-hd" => (false, 200),
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other:?}; expected desk-ld, desk-hd, full-ld or full-hd"
            )))
        }
    };
    let (n, p, method) = if ld {
        (1500, vec![30, 40, 50, 60, 70], RSSL_LD)
    } else {
        (100, vec![1000, 2000, 3000, 4000, 5000], RSSL_HD)
    };
    Ok(BenchmarkSpec {
        grid: Grid {
            p,
            epsilon: vec![0.05, 0.1, 0.15],
            eta: vec![2.0, 5.0],
            gamma: vec![2.0, 5.0],
            rho: vec![0.1],
            pair_eta_gamma: true,
        },
        n,
        methods: vec![method.to_string()],
        external: Vec::new(),
        replications,
        params: DetectorParams::default(),
        master_seed: 0,
        timing: true,
    })
}
