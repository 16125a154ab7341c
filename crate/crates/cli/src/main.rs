mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use repday::extremes::ModificationMode;
use repday::lp::BundledSimplex;
use repday::pipeline::{
    compare_cluster_counts, run_aggregated, sweep_grid_limits, write_run_outputs, GridSpec, Method, PipelineError,
};
use repday::plot::{design_bar_chart, sweep_line_chart};
use repday::synthgen::{generate, SynthError};
use repday::timeseries::{load_csv, CsvSchema, Dataset, TimeSeriesError};
use thiserror::Error;

use config::CliConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("synthetic data: {0}")]
    Synth(#[from] SynthError),
    #[error("dataset: {0}")]
    Data(#[from] TimeSeriesError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Synth(_) | CliError::Pipeline(PipelineError::InvalidConfig(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "repday", version, about = "Representative-day design of a residential energy system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as CSV.
    Generate(Common),
    /// Cluster, select extreme days, design and operate over the full data.
    Run(Common),
    /// Run at several grid fractions.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated grid fractions.
        #[arg(long, value_delimiter = ',')]
        fractions: Option<Vec<f64>>,
        /// Fail if total cost rises with the grid limit.
        #[arg(long)]
        check_monotone: bool,
    },
    /// Compare cluster counts with and without extreme days.
    CompareK {
        #[command(flatten)]
        common: Common,
        /// Comma-separated cluster counts.
        #[arg(long, value_delimiter = ',')]
        ks: Option<Vec<usize>>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    None,
    Simple,
    Feasibility,
    Slack,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModificationArg {
    Steps,
    Append,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV, one row per hour.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, value_enum)]
    modification: Option<ModificationArg>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n_init: Option<usize>,
    /// Grid limit relative to the unconstrained peak draw.
    #[arg(long)]
    grid_fraction: Option<f64>,
    #[arg(long)]
    virtual_days: bool,
    /// Seed for both clustering and data generation.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_plots: bool,
}

impl Common {
    fn resolve(&self) -> Result<CliConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => CliConfig::load(path)?,
            None => CliConfig::default(),
        };
        if let Some(d) = &self.data {
            c.data = Some(d.clone());
        }
        if let Some(m) = self.method {
            c.run.method = match m {
                MethodArg::None => Method::None,
                MethodArg::Simple => Method::Simple,
                MethodArg::Feasibility => Method::Feasibility,
                MethodArg::Slack => Method::Slack,
            };
        }
        if let Some(m) = self.modification {
            c.run.modification = match m {
                ModificationArg::Steps => ModificationMode::FeasibilitySteps,
                ModificationArg::Append => ModificationMode::Append,
            };
        }
        if let Some(k) = self.k {
            c.run.k = k;
        }
        if let Some(n) = self.n_init {
            c.run.n_init = n;
        }
        if let Some(f) = self.grid_fraction {
            c.run.grid = GridSpec::Fraction(f);
        }
        if self.virtual_days {
            c.run.virtual_days = true;
        }
        if let Some(s) = self.seed {
            c.run.seed = s;
            c.synth.seed = s;
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        if self.no_plots {
            c.plots = false;
        }
        Ok(c)
    }
}

fn dataset(c: &CliConfig) -> Result<Dataset, CliError> {
    match &c.data {
        Some(path) => Ok(load_csv(path, &CsvSchema::default())?),
        None => Ok(generate(&c.synth)?),
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn cmd_generate(c: &CliConfig) -> Result<(), CliError> {
    let data = generate(&c.synth)?;
    std::fs::create_dir_all(&c.out)?;
    let path = c.out.join("data.csv");
    data.write_csv(&path)?;
    println!("wrote {} ({} days)", path.display(), data.n_days());
    Ok(())
}

fn cmd_run(c: &CliConfig) -> Result<(), CliError> {
    let data = dataset(c)?;
    let report = run_aggregated(&data, &c.run, None, &BundledSimplex::default())?;
    write_run_outputs(&report, &c.out)?;
    if c.plots {
        write(&c.out, "design.svg", &design_bar_chart(&report))?;
    }
    println!(
        "total cost {:.2}, extreme days {}, feasible over all days: {}",
        report.total_cost(),
        report.n_extremes,
        report.feasible_full_year
    );
    Ok(())
}

fn cmd_sweep(c: &CliConfig) -> Result<(), CliError> {
    let data = dataset(c)?;
    let sweep = sweep_grid_limits(&data, &c.run, &c.sweep.fractions, &BundledSimplex::default())?;
    write(&c.out, "sweep.csv", &sweep.to_csv())?;
    write(&c.out, "sweep.json", &(serde_json::to_string_pretty(&sweep)? + "\n"))?;
    if c.plots {
        write(&c.out, "sweep.svg", &sweep_line_chart(&sweep))?;
    }
    print!("{}", sweep.to_csv());
    if !sweep.all_ok() {
        let failed: Vec<String> = sweep
            .rows
            .iter()
            .filter(|r| r.report.is_none())
            .map(|r| format!("{}: {}", r.fraction, r.status))
            .collect();
        return Err(CliError::Failed(format!("sweep points failed: {}", failed.join("; "))));
    }
    if c.sweep.check_monotone {
        if !sweep.cost_monotone() {
            return Err(CliError::Failed("total cost rises with the grid limit".into()));
        }
        println!("cost monotone: pass");
    }
    Ok(())
}

fn cmd_compare(c: &CliConfig) -> Result<(), CliError> {
    let data = dataset(c)?;
    let cmp = compare_cluster_counts(&data, &c.run, &c.compare.ks, &BundledSimplex::default())?;
    write(&c.out, "compare.json", &(serde_json::to_string_pretty(&cmp)? + "\n"))?;
    for e in &cmp.entries {
        let r = &e.with_extremes;
        println!(
            "k = {}: X = {}, accuracy {}, feasible {}",
            e.k,
            r.n_extremes,
            r.accuracy.map_or("n/a".into(), |a| format!("{a:.4}")),
            r.feasible_full_year
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(common) => common.resolve().and_then(|c| cmd_generate(&c)),
        Command::Run(common) => common.resolve().and_then(|c| cmd_run(&c)),
        Command::Sweep {
            common,
            fractions,
            check_monotone,
        } => common.resolve().and_then(|mut c| {
            if let Some(f) = fractions {
                c.sweep.fractions = f.clone();
            }
            c.sweep.check_monotone |= check_monotone;
            cmd_sweep(&c)
        }),
        Command::CompareK { common, ks } => common.resolve().and_then(|mut c| {
            if let Some(k) = ks {
                c.compare.ks = k.clone();
            }
            cmd_compare(&c)
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
