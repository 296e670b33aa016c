//! `tnnsim`: simulate, train and cost TNN columns and networks.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use tnnsim_core::bench::{self, BenchError, Dataset, Suite};
use tnnsim_core::column::ColumnError;
use tnnsim_core::config::{self, Command, ConfigError, LoadedConfig, OutputFormat, RunConfig};
use tnnsim_core::ppa::{self, CalibrationConstants, PpaError, PpaReport};
use tnnsim_core::trace::{self, TraceError};
use tnnsim_core::{Execution, Network, NetworkError};

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 3;
const EXIT_DIMENSION: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Parser)]
#[command(
    name = "tnnsim",
    version,
    about = "Cycle-accurate TNN simulator and PPA estimator"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run frozen-weight inference and write the output spike trace.
    Simulate(RunArgs),
    /// Run with STDP learning enabled; optionally snapshot weights.
    Learn {
        #[command(flatten)]
        run: RunArgs,
        /// Write all weights after every K-th gamma cycle.
        #[arg(long, value_name = "K")]
        snapshot_every: Option<u64>,
    },
    /// Estimate power, computation time and area.
    Ppa {
        #[arg(long, value_name = "F")]
        config: PathBuf,
        /// aclk frequency for the dynamic power term.
        #[arg(long, value_name = "HZ")]
        freq: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long, value_name = "F2")]
        out: Option<PathBuf>,
    },
    /// Run a built-in desk-scale benchmark and print metrics as JSON.
    Bench {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, env = "TNNSIM_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, value_name = "F2")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_name = "F")]
    config: PathBuf,
    #[arg(long, value_name = "N")]
    cycles: u64,
    #[arg(long, value_name = "F2")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Overrides the seed in the config file.
    #[arg(long, env = "TNNSIM_SEED")]
    seed: Option<u64>,
    /// Dataset CSV (label, features...) presented in order, cycling.
    /// Random inputs are drawn from the seed when absent.
    #[arg(long, value_name = "CSV")]
    data: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Clustering,
    Classification,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Dimension(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Dimension(_) => EXIT_DIMENSION,
            CliError::Io(_) => EXIT_IO,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        match e {
            NetworkError::Dimension { .. }
            | NetworkError::Column {
                source: ColumnError::Dimension { .. },
                ..
            } => CliError::Dimension(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Dimension { .. } | BenchError::TooManyLabels { .. } => {
                CliError::Dimension(e.to_string())
            }
            BenchError::Io(_)
            | BenchError::Csv(_)
            | BenchError::Parse { .. }
            | BenchError::EmptyDataset => CliError::Io(e.to_string()),
            BenchError::Network(n) => n.into(),
            BenchError::Column(c @ ColumnError::Dimension { .. }) => {
                CliError::Dimension(c.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<TraceError> for CliError {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::Io { .. } => CliError::Io(e.to_string()),
            TraceError::Network(n) => n.into(),
            TraceError::NoInputs => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<PpaError> for CliError {
    fn from(e: PpaError) -> Self {
        match e {
            PpaError::Io(_) => CliError::Io(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tnnsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Simulate(args) => simulate(Command::Simulate, args, None),
        Cmd::Learn {
            run,
            snapshot_every,
        } => simulate(Command::Learn, run, snapshot_every),
        Cmd::Ppa {
            config,
            freq,
            format,
            out,
        } => estimate(&config, freq, format.into(), out.as_deref()),
        Cmd::Bench { suite, seed, out } => {
            let suite = match suite {
                SuiteArg::Clustering => Suite::Clustering,
                SuiteArg::Classification => Suite::Classification,
            };
            let report = bench::run_suite(suite, seed, Execution::default())?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            write_output(out.as_deref(), &format!("{json}\n"))
        }
    }
}

fn simulate(command: Command, args: RunArgs, snapshot_every: Option<u64>) -> Result<(), CliError> {
    let rc = RunConfig {
        command,
        config_path: Some(args.config.clone()),
        output_path: Some(args.out.clone()),
        seed: args.seed,
        cycles: Some(args.cycles),
        format: args.format.into(),
    };
    rc.validate()
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut spec = config::parse_config(&args.config)?.into_network();
    let file_seed = spec.layers.first().map_or(1, |l| l.column_config.seed);
    let seed = rc.effective_seed(file_seed);
    config::apply_seed(&mut spec, seed);

    let data = args
        .data
        .as_deref()
        .map(Dataset::from_csv_path)
        .transpose()?;
    let n = args.cycles.clamp(1, 4096) as usize;
    let inputs = bench::network_inputs(&spec, data.as_ref(), n, seed)?;

    let mut net = Network::new(spec)?;
    net.set_learning(command == Command::Learn);
    let recorded = trace::record_run(&mut net, &inputs, args.cycles, snapshot_every)?;
    trace::emit_trace(&recorded, rc.format, &args.out)?;
    if snapshot_every.is_some() {
        trace::emit_snapshots(
            &recorded,
            rc.format,
            &trace::snapshot_path(&args.out, rc.format),
        )?;
    }
    Ok(())
}

fn estimate(
    path: &Path,
    freq: Option<f64>,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let loaded = config::parse_config(path)?;
    let cal = CalibrationConstants::default();
    let stem = path
        .file_stem()
        .map_or("design".into(), |s| s.to_string_lossy().into_owned());
    let mut report = match &loaded {
        LoadedConfig::Network(spec) => {
            let mut r = ppa::estimate_network(spec, &cal);
            if spec.name.is_none() {
                r.design = stem;
            }
            r
        }
        LoadedConfig::Column(cfg) => PpaReport {
            design: stem,
            ..ppa::estimate_column(cfg, &cal)
        },
    };
    if let Some(f) = freq {
        report = ppa::scale_power_with_frequency(&report, f)?;
    }
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => {
            ppa::write_macro_table_csv(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(buf).map_err(|e| CliError::Io(e.to_string()))?;
            ppa::write_reports_csv(&mut buf, std::slice::from_ref(&report))
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
        OutputFormat::Json => {
            let doc = serde_json::json!({
                "macros": ppa::macro_table(),
                "report": report,
            });
            serde_json::to_writer_pretty(&mut buf, &doc)
                .map_err(|e| CliError::Io(e.to_string()))?;
            buf.push(b'\n');
        }
    }
    write_output(out, &String::from_utf8(buf).expect("utf-8 report"))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}
