//! `sketchlab` command-line front end: synthetic data generation, one-off
//! sketches, benchmark sweeps and hub/authority ranking.
//!
//! Exit status: 0 on success, 1 on a usage error, 2 on a runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sketchlab::bench::{emit_results, run_benchmark, BenchConfig, EllSweep, OutputFormat, Repetitions};
use sketchlab::datagen::{
    generate_synthetic, load_edge_list, load_matrix_market, load_svmlight, write_matrix_market,
    write_svmlight, SyntheticSpec,
};
use sketchlab::matrix::{Matrix, SparseMatrix};
use sketchlab::netrank::{
    expm_scores_exact, expm_scores_sketched, hits, ranking_overlap, RankingResult, Role,
    DEFAULT_OVERSAMPLING, EXACT_MAX_NODES,
};
use sketchlab::rng::{derive_seed, seeded, tag};
use sketchlab::sketch::Method;

#[derive(Parser)]
#[command(name = "sketchlab", version, about = "Matrix sketching for low-rank approximation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic signal-plus-noise matrix.
    Gen(GenArgs),
    /// Sketch one matrix once and write B and V.
    Sketch(SketchArgs),
    /// Run a benchmark sweep from a JSON config.
    Bench(BenchArgs),
    /// Rank hubs and authorities of a directed graph.
    Network(NetworkArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixFormat {
    Mtx,
    Svmlight,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: usize,
    /// Noise divisor; omit for a noiseless rank-k matrix.
    #[arg(long)]
    zeta: Option<f64>,
    /// Signal decay divisor (defaults to k).
    #[arg(long)]
    m: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Mtx)]
    format: MatrixFormat,
}

#[derive(Args)]
struct SketchArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Mtx)]
    format: MatrixFormat,
    /// normsamp, dct, spemb, fd or spfd<q>.
    #[arg(long)]
    method: Method,
    #[arg(long)]
    ell: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination of the ℓ×d sketch (MatrixMarket).
    #[arg(long)]
    out_b: PathBuf,
    /// Destination of the d×ℓ row-space basis (MatrixMarket).
    #[arg(long)]
    out_v: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated method list, replacing the configured one.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    k: Option<usize>,
    /// Sketch sizes as start:step:end.
    #[arg(long)]
    ell: Option<EllSweep>,
    /// Repetitions as OUTERxINNER.
    #[arg(long)]
    reps: Option<Repetitions>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Leave elapsed times empty so output depends only on the config.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct NetworkArgs {
    /// Edge list, one `source target` pair per line.
    #[arg(long)]
    edges: PathBuf,
    /// Node ids in the file start at 1.
    #[arg(long)]
    one_indexed: bool,
    /// Number of top nodes to report.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// hits, expm, or any sketching method.
    #[arg(long, value_delimiter = ',', default_value = "hits,expm,fd,spfd50")]
    methods: Vec<NetMethod>,
    /// Oversampling: sketched methods use ℓ = k + p.
    #[arg(long, default_value_t = DEFAULT_OVERSAMPLING)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// HITS stopping tolerance on successive iterates.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn load_matrix(path: &Path, format: MatrixFormat) -> CliResult<Matrix> {
    Ok(match format {
        MatrixFormat::Mtx => load_matrix_market(path)?.matrix,
        MatrixFormat::Svmlight => Matrix::from(load_svmlight(path, None)?.matrix),
    })
}

fn gen(args: GenArgs) -> CliResult<()> {
    let spec = SyntheticSpec {
        n: args.n,
        d: args.d,
        k: args.k,
        zeta: args.zeta,
        m: args.m,
        seed: args.seed,
    };
    let a = generate_synthetic(&spec)?;
    match args.format {
        MatrixFormat::Mtx => write_matrix_market(&args.out, &Matrix::from(a))?,
        MatrixFormat::Svmlight => write_svmlight(&args.out, &SparseMatrix::from_dense(&a))?,
    }
    Ok(())
}

fn sketch(args: SketchArgs) -> CliResult<()> {
    let a = load_matrix(&args.input, args.format)?;
    let out = args.method.sketch(&a, args.ell, args.seed)?;
    write_matrix_market(&args.out_b, &Matrix::from(out.b))?;
    write_matrix_market(&args.out_v, &Matrix::from(out.v))?;
    println!(
        "{}",
        json!({
            "method": args.method.to_string(),
            "ell": args.ell,
            "iterations": out.deltas.len(),
            "delta_total": out.delta_total,
        })
    );
    Ok(())
}

fn bench(args: BenchArgs) -> CliResult<()> {
    let mut cfg = BenchConfig::load(&args.config)?;
    if let Some(m) = args.methods {
        cfg.methods = m;
    }
    if let Some(k) = args.k {
        cfg.k = k;
    }
    if let Some(e) = args.ell {
        cfg.ell_sweep = e;
    }
    if let Some(r) = args.reps {
        cfg.repetitions = r;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = args.output {
        cfg.output = o;
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    if args.no_timing {
        cfg.timing = false;
    }
    cfg.validate()?;
    let outcome = run_benchmark(&cfg)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    emit_results(&outcome.rows, &cfg.output, cfg.format)?;
    Ok(())
}

#[derive(Clone)]
enum NetMethod {
    Hits,
    Expm,
    Sketched(Method),
}

impl std::str::FromStr for NetMethod {
    type Err = sketchlab::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "hits" => NetMethod::Hits,
            "expm" => NetMethod::Expm,
            other => NetMethod::Sketched(other.parse()?),
        })
    }
}

fn network(args: NetworkArgs) -> CliResult<()> {
    let adj = load_edge_list(&args.edges, args.one_indexed)?.matrix;
    let n = adj.n_rows();
    if args.k == 0 || args.k > n {
        return Err(format!("k must be between 1 and the number of nodes ({n})").into());
    }
    let offset = usize::from(args.one_indexed);
    let label = |ids: &[usize]| -> Vec<usize> { ids[..args.k].iter().map(|i| i + offset).collect() };

    let reference = if n <= EXACT_MAX_NODES { Some(expm_scores_exact(&adj)?) } else { None };
    let mut records = Vec::new();
    for m in &args.methods {
        let r: RankingResult = match m {
            NetMethod::Hits => {
                let mut rng = seeded(derive_seed(args.seed, &[tag("hits")]));
                hits(&adj, args.tol, args.max_iter, &mut rng)?
            }
            NetMethod::Expm => match &reference {
                Some(r) => r.clone(),
                None => expm_scores_exact(&adj)?,
            },
            NetMethod::Sketched(method) => {
                let seed = derive_seed(args.seed, &[tag(&method.to_string())]);
                expm_scores_sketched(&adj, *method, args.k, args.p, seed)?
            }
        };
        let overlap = match &reference {
            Some(exact) => json!({
                "hubs": ranking_overlap(&r, exact, Role::Hub, args.k)?,
                "authorities": ranking_overlap(&r, exact, Role::Authority, args.k)?,
            }),
            None => serde_json::Value::Null,
        };
        records.push(json!({
            "method": r.method_tag,
            "top_hubs": label(&r.top_hubs),
            "top_authorities": label(&r.top_authorities),
            "elapsed_seconds": r.elapsed_seconds,
            "overlap_vs_exact": overlap,
            "converged": r.converged,
            "degenerate": r.degenerate,
        }));
    }
    let doc = json!({
        "nodes": n,
        "edges": adj.nnz(),
        "k": args.k,
        "records": records,
    });
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Sketch(a) => sketch(a),
        Command::Bench(a) => bench(a),
        Command::Network(a) => network(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
