//! Command-line front end: `predict`, `simulate`, `analyze` and `verify`.
//!
//! Exit codes are 0 on success, 1 when a verification check fails and 2 for
//! usage, configuration and I/O errors.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::cycles::{reconstruct_z, run_cycles, CycleRecord};
use crate::direct::{run_walker, CheckpointRecord};
use crate::error::{invalid, Error, Result};
use crate::model::{levy_cdf_unchecked, predict_regime, LimitLaw, Regime};
use crate::records::{
    read_run, Data, Engine, Format, Header, RecordWriter, RunConfig, RunFile, Schedule,
};
use crate::rng::{Domain, WalkRng};
use crate::stats::{
    estimate_nu, summarize, EnsembleSummary, EnsembleTable, NuEstimate, NuMethod, SummaryConfig,
};
use crate::verify::{run_suite, Budgets, Suite};

/// Walkers simulated per batch before their rows are written.
const BATCH: u64 = 256;

#[derive(Debug, Parser)]
#[command(
    name = "boldwalk",
    version,
    about = "Random walk with memory of its maximum distance"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the scaling exponent and limit law for a given gamma.
    Predict {
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
    },
    /// Simulate an ensemble and write its records.
    Simulate(SimulateArgs),
    /// Summarize simulation output.
    Analyze(AnalyzeArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, allow_hyphen_values = true, required_unless_present = "replay")]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value_t = Engine::Direct)]
    pub engine: Engine,
    #[arg(long)]
    pub t_max: Option<u64>,
    #[arg(long)]
    pub k_max: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub walkers: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `geometric:RATIO[,START]` or `list:T1,T2,...`
    #[arg(long)]
    pub checkpoints: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    pub format: Format,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Re-run the configuration stored in the header of an earlier output.
    #[arg(long, conflicts_with_all = ["gamma", "t_max", "k_max", "checkpoints"])]
    pub replay: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Run files written by `simulate`; they are pooled into one ensemble.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    pub lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.5, 2.0])]
    pub q: Vec<f64>,
    /// Summary file; plot data is written next to it.
    #[arg(long, default_value = "summary.jsonl")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::stats::DEFAULT_RESAMPLES)]
    pub resamples: usize,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub tolerance_scale: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Ensemble size of the regime checks.
    #[arg(long)]
    pub walkers: Option<u64>,
    /// Horizon of the regime checks.
    #[arg(long)]
    pub t_max: Option<u64>,
    /// Cycle count of the growth-law check.
    #[arg(long)]
    pub k_max: Option<u64>,
    /// Draws of the sampler and journey checks.
    #[arg(long)]
    pub draws: Option<u64>,
    /// Write the report as JSON lines.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Predict { gamma } => {
            predict(gamma, &mut io::stdout().lock())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate(args) => {
            simulate(&args)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze(args) => {
            analyze(&args)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => verify(&args),
    }
}

fn thread_pool(threads: Option<usize>) -> Result<Option<rayon::ThreadPool>> {
    match threads {
        None => Ok(None),
        Some(0) => Err(invalid("threads must be >= 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(Some)
            .map_err(|e| invalid(e.to_string())),
    }
}

fn install<T: Send>(pool: &Option<rayon::ThreadPool>, f: impl FnOnce() -> T + Send) -> T {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(install(&thread_pool(threads)?, f))
}

#[derive(Serialize)]
struct PredictRow {
    gamma: f64,
    nu: f64,
    regime: Regime,
    limit: String,
    law: LimitLaw,
}

pub fn predict(gamma: f64, out: &mut impl Write) -> Result<()> {
    let p = predict_regime(gamma)?;
    let row = PredictRow {
        gamma: p.gamma,
        nu: p.nu,
        regime: p.regime,
        limit: p.limit.to_string(),
        law: p.limit,
    };
    writeln!(out, "{}", serde_json::to_string(&row)?)?;
    Ok(())
}

fn simulate_config(args: &SimulateArgs) -> Result<RunConfig> {
    let mut cfg = if let Some(path) = &args.replay {
        let run = read_run(BufReader::new(File::open(path)?))?;
        RunConfig::from_header(&run.header)?
    } else {
        let schedule = match &args.checkpoints {
            Some(s) => s.parse()?,
            None => Schedule::default_geometric(),
        };
        RunConfig {
            gamma: args.gamma.ok_or_else(|| invalid("--gamma is required"))?,
            engine: args.engine,
            t_max: args.t_max,
            k_max: args.k_max,
            walkers: args.walkers,
            schedule,
            seed: args.seed,
            threads: None,
            format: args.format,
        }
    };
    cfg.threads = args.threads;
    cfg.validate()?;
    Ok(cfg)
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = simulate_config(args)?;
    match &args.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
            simulate_to(&cfg, BufWriter::new(file))?;
        }
        None => {
            simulate_to(&cfg, BufWriter::new(io::stdout().lock()))?;
        }
    }
    Ok(())
}

/// Runs `cfg` and streams its records to `out`. Walkers are simulated in
/// parallel batches and written in walker order.
pub fn simulate_to<W: Write>(cfg: &RunConfig, out: W) -> Result<W> {
    cfg.validate()?;
    let header = cfg.header();
    let mut writer = RecordWriter::new(out, &header)?;
    let checkpoints = header.checkpoints.clone();
    let stop = cfg.stop()?;
    let pool = thread_pool(cfg.threads)?;
    let mut first = 0;
    while first < cfg.walkers {
        let last = (first + BATCH).min(cfg.walkers);
        match (cfg.engine, cfg.t_max) {
            (Engine::Direct, Some(t_max)) => {
                let rows: Vec<Vec<CheckpointRecord>> = install(&pool, || {
                    (first..last)
                        .into_par_iter()
                        .map(|id| {
                            let mut rng = WalkRng::for_walker(cfg.seed, Domain::Direct, id);
                            run_walker(cfg.gamma, t_max, &checkpoints, id, &mut rng)
                        })
                        .collect::<Result<_>>()
                })?;
                for r in &rows {
                    writer.write_checkpoints(r)?;
                }
            }
            (Engine::Direct, None) => return Err(invalid("the direct engine needs t_max")),
            (Engine::Cycles, _) => {
                let rows: Vec<Vec<CycleRecord>> = install(&pool, || {
                    (first..last)
                        .into_par_iter()
                        .map(|id| {
                            let mut rng = WalkRng::for_walker(cfg.seed, Domain::Cycles, id);
                            run_cycles(cfg.gamma, stop, id, &mut rng)
                        })
                        .collect::<Result<_>>()
                })?;
                for r in &rows {
                    writer.write_cycles(r)?;
                }
            }
        }
        first = last;
    }
    writer.finish()
}

/// Per-walker maxima at the checkpoint times of a run, `out[w][c]`.
fn maxima_table(run: &RunFile) -> Result<(Vec<u64>, Vec<Vec<u64>>)> {
    let h = &run.header;
    if h.checkpoints.is_empty() {
        return Err(Error::Schema(
            "run has no checkpoint times; cycle runs must be time-bounded to be analyzed".into(),
        ));
    }
    let times = h.checkpoints.clone();
    match &run.data {
        Data::Checkpoints(rows) => {
            let mut by_walker: BTreeMap<u64, (Vec<u64>, Vec<u64>)> = BTreeMap::new();
            for r in rows {
                let e = by_walker.entry(r.walker_id).or_default();
                e.0.push(r.t);
                e.1.push(r.z);
            }
            by_walker
                .into_iter()
                .map(|(id, (ts, zs))| {
                    if ts == times {
                        Ok(zs)
                    } else {
                        Err(Error::Schema(format!(
                            "walker {id} does not match the header checkpoints"
                        )))
                    }
                })
                .collect::<Result<Vec<_>>>()
                .map(|table| (times, table))
        }
        Data::Cycles(rows) => {
            let mut grouped: BTreeMap<u64, Vec<CycleRecord>> = BTreeMap::new();
            for r in rows {
                grouped.entry(r.walker_id).or_default().push(*r);
            }
            let table = grouped
                .values()
                .map(|cycles| {
                    times
                        .iter()
                        .map(|&t| {
                            reconstruct_z(cycles, t).map_err(|e| Error::Schema(e.to_string()))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((times, table))
        }
    }
}

fn same_ensemble(a: &Header, b: &Header) -> bool {
    a.gamma == b.gamma && a.checkpoints == b.checkpoints
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    kind: &'static str,
    #[serde(flatten)]
    summary: &'a EnsembleSummary,
}

#[derive(Serialize)]
struct NuRow<'a> {
    kind: &'static str,
    #[serde(flatten)]
    estimate: &'a NuEstimate,
}

/// Everything `analyze` computes from a pooled ensemble.
pub struct Analysis {
    pub gamma: f64,
    pub summaries: Vec<EnsembleSummary>,
    pub nu: Option<NuEstimate>,
}

pub fn analyze_runs(runs: &[RunFile], config: &SummaryConfig) -> Result<Analysis> {
    let first = runs.first().ok_or_else(|| invalid("no input runs"))?;
    let mut times = Vec::new();
    let mut walkers: Vec<Vec<u64>> = Vec::new();
    for run in runs {
        if !same_ensemble(&first.header, &run.header) {
            return Err(Error::Schema(
                "inputs differ in gamma or checkpoint times".into(),
            ));
        }
        let (t, w) = maxima_table(run)?;
        times = t;
        walkers.extend(w);
    }
    if walkers.is_empty() {
        return Err(Error::InsufficientData("input has no records".into()));
    }
    let gamma = first.header.gamma;
    let summaries = times
        .par_iter()
        .enumerate()
        .map(|(c, &t)| {
            let zs: Vec<u64> = walkers.iter().map(|w| w[c]).collect();
            summarize(t, &zs, gamma, config)
        })
        .collect::<Result<Vec<_>>>()?;
    let table = EnsembleTable::new(
        times.clone(),
        (0..times.len())
            .map(|c| walkers.iter().map(|w| w[c] as f64).collect())
            .collect(),
    )?;
    let nu = match estimate_nu(&table, NuMethod::MedianSlope, config.resamples, config.seed) {
        Ok(est) => Some(est),
        Err(Error::InsufficientData(msg)) => {
            eprintln!("note: no scaling exponent estimate: {msg}");
            None
        }
        Err(Error::InvalidParameter(msg)) => {
            eprintln!("note: no scaling exponent estimate: {msg}");
            None
        }
        Err(e) => return Err(e),
    };
    Ok(Analysis {
        gamma,
        summaries,
        nu,
    })
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "summary".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.{suffix}.tsv"))
}

/// Writes the summary rows and the plot files `*.loglog.tsv`,
/// `*.laplace.tsv` and `*.ecdf.tsv` next to `out`.
pub fn write_analysis(a: &Analysis, out: &Path) -> Result<Vec<PathBuf>> {
    let mut written = vec![out.to_path_buf()];
    let mut w = BufWriter::new(File::create(out)?);
    for s in &a.summaries {
        writeln!(
            w,
            "{}",
            serde_json::to_string(&SummaryRow {
                kind: "summary",
                summary: s
            })?
        )?;
    }
    if let Some(nu) = &a.nu {
        writeln!(
            w,
            "{}",
            serde_json::to_string(&NuRow {
                kind: "nu",
                estimate: nu
            })?
        )?;
    }
    w.flush()?;

    let path = sibling(out, "loglog");
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "log_t\tlog_median_z")?;
    for s in &a.summaries {
        writeln!(w, "{}\t{}", (s.t as f64).ln(), s.median_z.ln())?;
    }
    w.flush()?;
    written.push(path);

    let last = a.summaries.last().ok_or_else(|| invalid("no summaries"))?;
    if !last.laplace.is_empty() {
        let path = sibling(out, "laplace");
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "lambda\tempirical\tse\treference")?;
        for p in &last.laplace {
            writeln!(w, "{}\t{}\t{}\t{}", p.lambda, p.value, p.se, p.reference)?;
        }
        w.flush()?;
        written.push(path);
    }
    if let Some(ecdf) = &last.ecdf {
        let path = sibling(out, "ecdf");
        let mut w = BufWriter::new(File::create(&path)?);
        let levy = a.gamma > 0.0;
        if levy {
            writeln!(w, "x\tecdf\tlevy_cdf")?;
        } else {
            writeln!(w, "x\tecdf")?;
        }
        let n = ecdf.len();
        let step = n.div_ceil(2000).max(1);
        let mut idx: Vec<usize> = (step - 1..n).step_by(step).collect();
        if idx.last() != Some(&(n - 1)) {
            idx.push(n - 1);
        }
        let xs = ecdf.samples();
        for i in idx {
            let (x, f) = (xs[i], (i + 1) as f64 / n as f64);
            if levy {
                writeln!(w, "{x}\t{f}\t{}", levy_cdf_unchecked(x))?;
            } else {
                writeln!(w, "{x}\t{f}")?;
            }
        }
        w.flush()?;
        written.push(path);
    }
    Ok(written)
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let runs = args
        .inputs
        .iter()
        .map(|p| read_run(BufReader::new(File::open(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let config = SummaryConfig {
        lambdas: args.lambdas.clone(),
        qs: args.q.clone(),
        resamples: args.resamples,
        seed: args.seed,
    };
    let analysis = with_threads(args.threads, || analyze_runs(&runs, &config))??;
    for p in write_analysis(&analysis, &args.out)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

pub fn budgets(args: &VerifyArgs) -> Budgets {
    let mut b = Budgets {
        tolerance_scale: args.tolerance_scale,
        ..Budgets::default()
    };
    if let Some(s) = args.seed {
        b.seed = s;
    }
    if let Some(w) = args.walkers {
        b.walkers = w;
    }
    if let Some(t) = args.t_max {
        b.t_max = t;
        b.superdiffusive_t_max = t;
    }
    if let Some(k) = args.k_max {
        b.k_cycles = k;
    }
    if let Some(d) = args.draws {
        b.draws = d;
        b.levy_draws = b.levy_draws.min(10 * d);
    }
    b
}

pub fn verify(args: &VerifyArgs) -> Result<ExitCode> {
    let b = budgets(args);
    let report = with_threads(args.threads, || run_suite(args.suite, args.gamma, &b))??;
    println!("{report}");
    if let Some(path) = &args.out {
        let mut w = BufWriter::new(File::create(path)?);
        for c in &report.checks {
            writeln!(w, "{}", serde_json::to_string(c)?)?;
        }
        w.flush()?;
    }
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
