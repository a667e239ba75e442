//! Command-line front end for stream generation, blind estimation, and
//! accuracy sweeps.
//!
//! Exit codes: 0 success, 2 usage error, 3 malformed stream file,
//! 4 insufficient data, 5 too few usable scales, 1 anything else.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use walkcensus::error::{EstimateError, StreamError};
use walkcensus::estimator::{estimate_k, read_stream, EstimatorConfig};
use walkcensus::graph::GraphModel;
use walkcensus::report::{ExperimentReport, RunConfig};
use walkcensus::sim::{simulate, write_stream, SimConfig, StreamMeta};

#[derive(Parser)]
#[command(name = "walkcensus", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphArg {
    Z1,
    Z2,
    Comb,
}

impl From<GraphArg> for GraphModel {
    fn from(g: GraphArg) -> Self {
        match g {
            GraphArg::Z1 => GraphModel::Z1,
            GraphArg::Z2 => GraphModel::Z2,
            GraphArg::Comb => GraphModel::Comb,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args, Clone, Copy)]
struct EstimatorArgs {
    /// Number of scales N in the ladder 2^1..2^N.
    #[arg(long, default_value_t = EstimatorConfig::default().scales)]
    scales: u32,

    /// Offsets 1..n_max estimated directly per quiet-interval sample.
    #[arg(long = "n-max", default_value_t = EstimatorConfig::default().n_max)]
    n_max: usize,

    /// Quiet-gap threshold exponent cap (sample i needs a gap >= 2^min(i, cap));
    /// 0 disables capping.
    #[arg(long, default_value_t = EstimatorConfig::default().cap)]
    cap: u32,

    /// Minimum quiet-interval samples before the profile is trusted.
    #[arg(long = "min-samples", default_value_t = EstimatorConfig::default().min_samples)]
    min_samples: usize,

    /// Minimum usable scales for an estimate.
    #[arg(long = "min-scales", default_value_t = EstimatorConfig::default().min_scales)]
    min_scales: usize,
}

impl From<EstimatorArgs> for EstimatorConfig {
    fn from(a: EstimatorArgs) -> Self {
        EstimatorConfig {
            n_max: a.n_max,
            cap: a.cap,
            scales: a.scales,
            min_samples: a.min_samples,
            min_scales: a.min_scales,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate walkers and write the occupancy stream file.
    Simulate {
        #[arg(long, value_enum)]
        graph: GraphArg,

        #[arg(long)]
        walkers: u32,

        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        horizon: u64,

        #[arg(long)]
        seed: u64,

        #[arg(long)]
        out: PathBuf,

        /// Strip the true walker count from the metadata record.
        #[arg(long)]
        blind: bool,
    },

    /// Run the blind estimator on a stream file; prints k_hat.
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,

        #[command(flatten)]
        estimator: EstimatorArgs,

        /// Write the report here (JSON record, or CSV per-scale table).
        #[arg(long)]
        out: Option<PathBuf>,

        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,

        /// Record wall time in the report (off by default so identical
        /// inputs give byte-identical reports).
        #[arg(long)]
        timing: bool,
    },

    /// Run a (k, horizon, seed) grid and write one report row per cell.
    Sweep {
        #[arg(long, value_enum)]
        graph: GraphArg,

        /// Walker counts, comma separated.
        #[arg(long = "k-values", value_delimiter = ',', required = true)]
        k_values: Vec<u32>,

        /// Horizons, comma separated.
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
        horizons: Vec<u64>,

        /// Seeds used are seed-base..seed-base+num-seeds.
        #[arg(long = "num-seeds", default_value_t = 1)]
        num_seeds: u64,

        #[arg(long = "seed-base", default_value_t = 0)]
        seed_base: u64,

        #[command(flatten)]
        estimator: EstimatorArgs,

        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    Stream(StreamError),
    Estimate(EstimateError),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Stream(e) => write!(f, "{e}"),
            CliError::Estimate(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Stream(_) => 3,
            CliError::Estimate(EstimateError::Stream(_)) => 3,
            CliError::Estimate(EstimateError::InsufficientData { .. }) => 4,
            CliError::Estimate(EstimateError::TooFewScales { .. }) => 5,
            CliError::Estimate(_) => 1,
            CliError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate {
            graph,
            walkers,
            horizon,
            seed,
            out,
            blind,
        } => cmd_simulate(graph.into(), walkers, horizon, seed, &out, blind),
        Command::Estimate {
            input,
            estimator,
            out,
            format,
            timing,
        } => cmd_estimate(&input, estimator.into(), out.as_deref(), format, timing),
        Command::Sweep {
            graph,
            k_values,
            horizons,
            num_seeds,
            seed_base,
            estimator,
            out,
        } => cmd_sweep(
            graph.into(),
            &k_values,
            &horizons,
            seed_base,
            num_seeds,
            estimator.into(),
            &out,
        ),
    }
}

fn cmd_simulate(
    model: GraphModel,
    walkers: u32,
    horizon: u64,
    seed: u64,
    out: &std::path::Path,
    blind: bool,
) -> Result<(), CliError> {
    let cfg = SimConfig {
        model,
        k: walkers,
        horizon,
        seed,
    };
    let (stream, _) = simulate(&cfg);
    let meta = StreamMeta {
        model: model.name().to_string(),
        horizon,
        seed,
        k: if blind { None } else { Some(walkers) },
    };
    write_stream(out, &stream, &meta)?;
    Ok(())
}

fn build_report(
    meta: &StreamMeta,
    cfg: EstimatorConfig,
    estimate: walkcensus::estimator::KEstimate,
    wall_ms: Option<u64>,
) -> ExperimentReport {
    ExperimentReport {
        config: RunConfig {
            model: meta.model.clone(),
            horizon: meta.horizon,
            seed: meta.seed,
            k_true: meta.k,
            estimator: cfg,
        },
        estimate,
        wall_ms,
    }
}

fn cmd_estimate(
    input: &std::path::Path,
    cfg: EstimatorConfig,
    out: Option<&std::path::Path>,
    format: OutputFormat,
    timing: bool,
) -> Result<(), CliError> {
    let started = Instant::now();
    let (stream, meta) = read_stream(input).map_err(CliError::Stream)?;
    let estimate = estimate_k(&stream, &cfg).map_err(CliError::Estimate)?;
    let wall_ms = timing.then(|| started.elapsed().as_millis() as u64);
    let report = build_report(&meta, cfg, estimate, wall_ms);

    println!("{}", report.estimate.k_hat);
    if let Some(path) = out {
        let body = match format {
            OutputFormat::Json => format!("{}\n", report.to_json_line()),
            OutputFormat::Csv => report.scale_table_csv(),
        };
        std::fs::write(path, body)?;
    }
    Ok(())
}

/// One sweep cell outcome: a full report, or the error that stopped it.
#[derive(Serialize)]
#[serde(untagged)]
enum SweepRow {
    Report(ExperimentReport),
    Failed {
        config: RunConfig,
        error: String,
    },
}

#[derive(Serialize)]
struct KAccuracy {
    k: u32,
    cells: usize,
    correct: usize,
    accuracy: f64,
}

#[derive(Serialize)]
struct SweepAggregate {
    cells: usize,
    correct: usize,
    accuracy: f64,
    per_k: Vec<KAccuracy>,
}

#[derive(Serialize)]
struct AggregateRow<'a> {
    aggregate: &'a SweepAggregate,
}

fn cmd_sweep(
    model: GraphModel,
    k_values: &[u32],
    horizons: &[u64],
    seed_base: u64,
    num_seeds: u64,
    cfg: EstimatorConfig,
    out: &std::path::Path,
) -> Result<(), CliError> {
    let mut grid = Vec::new();
    for &k in k_values {
        for &horizon in horizons {
            for i in 0..num_seeds {
                grid.push((k, horizon, seed_base + i));
            }
        }
    }

    // Cells are independent; report assembly keeps grid order.
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&(k, horizon, seed)| {
            let (stream, _) = simulate(&SimConfig {
                model,
                k,
                horizon,
                seed,
            });
            let meta = StreamMeta {
                model: model.name().to_string(),
                horizon,
                seed,
                k: Some(k),
            };
            match estimate_k(&stream, &cfg) {
                Ok(estimate) => SweepRow::Report(build_report(&meta, cfg, estimate, None)),
                Err(e) => SweepRow::Failed {
                    config: RunConfig {
                        model: meta.model.clone(),
                        horizon,
                        seed,
                        k_true: Some(k),
                        estimator: cfg,
                    },
                    error: e.to_string(),
                },
            }
        })
        .collect();

    let mut per_k: Vec<KAccuracy> = Vec::new();
    for &k in k_values {
        if per_k.iter().any(|a| a.k == k) {
            continue;
        }
        per_k.push(KAccuracy {
            k,
            cells: 0,
            correct: 0,
            accuracy: 0.0,
        });
    }
    let mut correct_total = 0usize;
    for (row, &(k, _, _)) in rows.iter().zip(&grid) {
        let correct = matches!(row, SweepRow::Report(r) if r.estimate.k_hat == k);
        let entry = per_k.iter_mut().find(|a| a.k == k).expect("k registered");
        entry.cells += 1;
        if correct {
            entry.correct += 1;
            correct_total += 1;
        }
    }
    for entry in &mut per_k {
        entry.accuracy = entry.correct as f64 / entry.cells.max(1) as f64;
    }
    let aggregate = SweepAggregate {
        cells: grid.len(),
        correct: correct_total,
        accuracy: correct_total as f64 / grid.len().max(1) as f64,
        per_k,
    };

    let file = std::fs::File::create(out)?;
    let mut w = std::io::BufWriter::new(file);
    for row in &rows {
        serde_json::to_writer(&mut w, row).map_err(|e| CliError::Io(e.into()))?;
        w.write_all(b"\n")?;
    }
    serde_json::to_writer(&mut w, &AggregateRow { aggregate: &aggregate })
        .map_err(|e| CliError::Io(e.into()))?;
    w.write_all(b"\n")?;
    w.flush()?;

    println!("accuracy {:.4} over {} cells", aggregate.accuracy, aggregate.cells);
    Ok(())
}
