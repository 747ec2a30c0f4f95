//! Benchmark harness: sweep sketch sizes for a set of methods, repeat over
//! regenerated matrices and reseeded methods, and aggregate medians.
//!
//! Each repetition times `sketch → approx_from_basis` only; loading data and
//! the exact reference are outside the clock. Repetitions run in parallel on
//! a worker pool (capped by `SKETCHLAB_THREADS`), each method call itself
//! single-threaded, so per-call wall times stay comparable.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{generate_synthetic, load_matrix_market, load_svmlight, SyntheticSpec};
use crate::error::{Error, Result};
use crate::lowrank::{approx_from_basis, error_report, exact_residual, ResidualNorms};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, tag};
use crate::sketch::Method;

pub const SCHEMA_VERSION: u32 = 1;

/// Largest `n·d` for which the exact reference `A_k` is computed.
pub const EXACT_REFERENCE_LIMIT: usize = 50_000_000;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "SKETCHLAB_THREADS";

/// Benchmark configuration, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub schema_version: u32,
    pub dataset: Dataset,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    pub k: usize,
    pub ell_sweep: EllSweep,
    pub repetitions: Repetitions,
    #[serde(default)]
    pub seed: u64,
    pub output: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    /// When false, `elapsed_seconds` is left empty so that output bytes
    /// depend only on the configuration.
    #[serde(default = "default_true")]
    pub timing: bool,
}

fn default_true() -> bool {
    true
}

/// NormSamp, DCT, SpEmb, FD and SpFD with q ∈ {5, 10, 50}.
pub fn default_methods() -> Vec<Method> {
    vec![
        Method::NormSamp,
        Method::Dct,
        Method::SpEmb,
        Method::Fd,
        Method::SpFd { q: 5 },
        Method::SpFd { q: 10 },
        Method::SpFd { q: 50 },
    ]
}

/// Where the benchmark matrix comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Dataset {
    /// Signal-plus-noise matrix, regenerated for every outer repetition.
    Synthetic {
        n: usize,
        d: usize,
        /// Signal rank; defaults to the benchmark `k`.
        #[serde(default)]
        rank: Option<usize>,
        /// `None` omits the noise.
        zeta: Option<f64>,
        #[serde(default)]
        m: Option<f64>,
    },
    /// A matrix file, loaded once.
    File { path: PathBuf, format: FileFormat },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Mtx,
    Svmlight,
}

/// Sketch sizes `start, start + step, …` up to and including `end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllSweep {
    pub start: usize,
    pub step: usize,
    pub end: usize,
}

impl EllSweep {
    pub fn values(&self) -> Vec<usize> {
        (self.start..=self.end).step_by(self.step.max(1)).collect()
    }
}

impl FromStr for EllSweep {
    type Err = Error;

    /// `start:step:end`, or a single size.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| Error::Config(format!("bad sketch-size sweep '{s}'")))
        };
        match parts.as_slice() {
            [one] => {
                let v = num(one)?;
                Ok(EllSweep { start: v, step: 1, end: v })
            }
            [a, b, c] => Ok(EllSweep {
                start: num(a)?,
                step: num(b)?,
                end: num(c)?,
            }),
            _ => Err(Error::Config(format!(
                "sketch-size sweep must be 'start:step:end', got '{s}'"
            ))),
        }
    }
}

/// `outer` matrices × `inner` method runs per matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Repetitions {
    pub outer: usize,
    pub inner: usize,
}

impl Repetitions {
    pub fn total(&self) -> usize {
        self.outer * self.inner
    }
}

impl FromStr for Repetitions {
    type Err = Error;

    /// `OUTERxINNER`, e.g. `3x5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("repetitions must look like '3x5', got '{s}'"));
        let (o, i) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        Ok(Repetitions {
            outer: o.trim().parse().map_err(|_| bad())?,
            inner: i.trim().parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown output format '{s}'"))),
        }
    }
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: BenchConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        let s = &self.ell_sweep;
        if s.step == 0 || s.start > s.end {
            return Err(Error::Config(format!(
                "sketch-size sweep {}:{}:{} is empty",
                s.start, s.step, s.end
            )));
        }
        if s.start < self.k {
            return Err(Error::Config(format!(
                "sketch sizes must be at least k={}, sweep starts at {}",
                self.k, s.start
            )));
        }
        if self.repetitions.outer == 0 || self.repetitions.inner == 0 {
            return Err(Error::Config("repetition counts must be at least 1".into()));
        }
        if let Dataset::Synthetic { n, d, rank, zeta, m } = &self.dataset {
            self.synthetic_spec(*n, *d, *rank, *zeta, *m, 0).validate()?;
        }
        Ok(())
    }

    fn synthetic_spec(
        &self,
        n: usize,
        d: usize,
        rank: Option<usize>,
        zeta: Option<f64>,
        m: Option<f64>,
        seed: u64,
    ) -> SyntheticSpec {
        SyntheticSpec {
            n,
            d,
            k: rank.unwrap_or(self.k),
            zeta,
            m,
            seed,
        }
    }
}

/// Median statistics for one `(method, ℓ)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub ell: usize,
    /// Absent when no exact reference was available.
    pub fro_ratio: Option<f64>,
    pub spec_ratio: Option<f64>,
    /// Absent when timing is disabled.
    pub elapsed_seconds: Option<f64>,
    /// Completed repetitions behind the medians.
    pub reps: usize,
}

/// Rows plus any warnings (skipped references, failed repetitions).
#[derive(Clone, Debug, PartialEq)]
pub struct BenchOutcome {
    pub rows: Vec<ResultRow>,
    pub warnings: Vec<String>,
}

/// Lower median: the `⌈len/2⌉`-th smallest value, so the result is always
/// one of the observations.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[(v.len() - 1) / 2])
}

/// Worker count from `SKETCHLAB_THREADS`, else the number of logical CPUs.
pub fn worker_threads() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

struct Sample {
    fro: Option<f64>,
    spec: Option<f64>,
    elapsed: f64,
}

fn run_one(
    a: &Matrix,
    exact: Option<&ResidualNorms>,
    method: Method,
    ell: usize,
    k: usize,
    seed: u64,
) -> Result<Sample> {
    let start = Instant::now();
    let sketch = method.sketch(a, ell, seed)?;
    let approx = approx_from_basis(a, &sketch.v, k)?;
    let elapsed = start.elapsed().as_secs_f64();
    let (fro, spec) = match exact {
        Some(exact) => {
            let r = error_report(a, &approx, exact, elapsed)?;
            (Some(r.fro_ratio), Some(r.spec_ratio))
        }
        None => (None, None),
    };
    Ok(Sample { fro, spec, elapsed })
}

/// Runs the configured sweep and returns one row per `(method, ℓ)`, sorted
/// by method (in [`Method`] order) and then ℓ.
///
/// Seeds: outer repetition `o` draws its matrix from
/// `derive_seed(seed, [o])`; the method run `(o, i, method, ℓ)` uses
/// `derive_seed(seed, [o, i, tag(method), ℓ])`.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchOutcome> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads()?)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let ells = cfg.ell_sweep.values();
    let mut warnings = Vec::new();
    let mut samples: BTreeMap<(Method, usize), Vec<Sample>> = BTreeMap::new();
    let mut failures: BTreeMap<(Method, usize), (usize, String)> = BTreeMap::new();

    let file_matrix = match &cfg.dataset {
        Dataset::File { path, format } => Some(match format {
            FileFormat::Mtx => load_matrix_market(path)?.matrix,
            FileFormat::Svmlight => Matrix::from(load_svmlight(path, None)?.matrix),
        }),
        Dataset::Synthetic { .. } => None,
    };

    for o in 0..cfg.repetitions.outer {
        let a = match (&cfg.dataset, &file_matrix) {
            (_, Some(m)) => m.clone(),
            (Dataset::Synthetic { n, d, rank, zeta, m }, None) => {
                let spec = cfg.synthetic_spec(*n, *d, *rank, *zeta, *m, derive_seed(cfg.seed, &[o as u64]));
                Matrix::from(generate_synthetic(&spec)?)
            }
            (Dataset::File { .. }, None) => unreachable!("file datasets are loaded up front"),
        };
        let (n, d) = a.shape();
        let exact = if n.saturating_mul(d) <= EXACT_REFERENCE_LIMIT {
            Some(exact_residual(&a.to_dense(), cfg.k)?)
        } else {
            if o == 0 {
                warnings.push(format!(
                    "{n}x{d} matrix exceeds the exact-reference limit of {EXACT_REFERENCE_LIMIT} entries; error ratios omitted"
                ));
            }
            None
        };

        let tasks: Vec<(Method, usize, usize)> = cfg
            .methods
            .iter()
            .flat_map(|&m| ells.iter().flat_map(move |&l| (0..cfg.repetitions.inner).map(move |i| (m, l, i))))
            .collect();
        let results: Vec<_> = pool.install(|| {
            tasks
                .par_iter()
                .map(|&(method, ell, i)| {
                    let seed = derive_seed(
                        cfg.seed,
                        &[o as u64, i as u64, tag(&method.to_string()), ell as u64],
                    );
                    (method, ell, run_one(&a, exact.as_ref(), method, ell, cfg.k, seed))
                })
                .collect()
        });
        for (method, ell, r) in results {
            match r {
                Ok(s) => samples.entry((method, ell)).or_default().push(s),
                Err(e) => {
                    let f = failures.entry((method, ell)).or_insert((0, e.to_string()));
                    f.0 += 1;
                }
            }
        }
    }

    for ((method, ell), (count, first)) in &failures {
        warnings.push(format!(
            "{method} at ell={ell}: {count} of {} repetitions failed ({first})",
            cfg.repetitions.total()
        ));
    }

    let mut rows = Vec::new();
    for &method in &cfg.methods {
        for &ell in &ells {
            let cell = samples.get(&(method, ell)).map(Vec::as_slice).unwrap_or(&[]);
            let fro: Vec<f64> = cell.iter().filter_map(|s| s.fro).collect();
            let spec: Vec<f64> = cell.iter().filter_map(|s| s.spec).collect();
            let elapsed: Vec<f64> = cell.iter().map(|s| s.elapsed).collect();
            rows.push(ResultRow {
                method,
                ell,
                fro_ratio: lower_median(&fro),
                spec_ratio: lower_median(&spec),
                elapsed_seconds: if cfg.timing { lower_median(&elapsed) } else { None },
                reps: cell.len(),
            });
        }
    }
    rows.sort_by_key(|r| (r.method, r.ell));
    rows.dedup_by_key(|r| (r.method, r.ell));
    Ok(BenchOutcome { rows, warnings })
}

pub const CSV_HEADER: &str = "method,ell,fro_ratio,spec_ratio,elapsed_seconds,reps";

/// Rounds to 10 significant digits.
fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.9e}").parse().expect("formatted float parses")
}

struct Num(f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = round_sig(self.0);
        if x == 0.0 || (1e-5..1e15).contains(&x.abs()) {
            write!(f, "{x}")
        } else {
            write!(f, "{x:e}")
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| Num(v).to_string()).unwrap_or_default()
}

/// Renders rows as CSV (empty fields for absent values) or as a JSON array
/// of objects with the CSV column names as keys (`null` for absent values).
pub fn render_results(rows: &[ResultRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.method,
                    r.ell,
                    opt(r.fro_ratio),
                    opt(r.spec_ratio),
                    opt(r.elapsed_seconds),
                    r.reps
                ));
            }
            out
        }
        OutputFormat::Json => {
            let rounded: Vec<ResultRow> = rows
                .iter()
                .map(|r| ResultRow {
                    fro_ratio: r.fro_ratio.map(round_sig),
                    spec_ratio: r.spec_ratio.map(round_sig),
                    elapsed_seconds: r.elapsed_seconds.map(round_sig),
                    ..r.clone()
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&rounded).expect("rows serialize");
            s.push('\n');
            s
        }
    }
}

pub fn emit_results(rows: &[ResultRow], path: impl AsRef<Path>, format: OutputFormat) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_results(rows, format)).map_err(|e| Error::io(path, e))
}

/// Parses CSV produced by [`render_results`].
pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Config("results CSV is missing its header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            let bad = || Error::Config(format!("malformed results line '{line}'"));
            if f.len() != 6 {
                return Err(bad());
            }
            let num = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad())
                }
            };
            Ok(ResultRow {
                method: f[0].parse()?,
                ell: f[1].parse().map_err(|_| bad())?,
                fro_ratio: num(f[2])?,
                spec_ratio: num(f[3])?,
                elapsed_seconds: num(f[4])?,
                reps: f[5].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}
