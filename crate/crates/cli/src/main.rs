use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use apsched::harness::{
    run_gap_study, run_simulation, run_sweep, write_csv, CsvRow, ExperimentConfig, SetEnumeration,
    SweepAxis,
};
use apsched::policies::PolicyKind;
use apsched::stochastics::RunStreams;
use apsched::topology::{
    enumerate_maximal_sets_exhaustive, enumerate_transmission_sets, Topology,
};
use apsched::{Error, Result};
use clap::{Args, Parser, Subcommand};

/// Schedule interfering WLAN access points that also charge RF
/// energy-harvesting sensors.
#[derive(Parser)]
#[command(name = "apsched", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Four APs, 2000 slots, 5 runs.
    #[arg(long)]
    quick: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one run and print its metrics.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "maxweight")]
        policy: PolicyKind,
    },
    /// Sweep arrival probability or conflict-edge probability.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `arrival` or `interference`.
        #[arg(long)]
        axis: SweepAxis,
    },
    /// Compare sampled and exact values on an enumerable scenario.
    Gap {
        #[command(flatten)]
        common: Common,
    },
    /// Print the transmission sets of a topology, one per line.
    EnumSets {
        #[command(flatten)]
        common: Common,
        /// Topology JSON; the configured topology when absent.
        #[arg(long)]
        topology: Option<PathBuf>,
        /// Enumerate every maximal independent set instead of the greedy sets.
        #[arg(long)]
        exhaustive: bool,
    },
}

fn load_config(common: &Common, fallback: fn() -> ExperimentConfig) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => fallback(),
    };
    if common.quick {
        cfg.apply_quick();
    }
    if let Some(seed) = common.seed {
        cfg.experiment.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let io_err = |source| Error::Io {
                path: path.to_path_buf(),
                source,
            };
            let file = std::fs::File::create(path).map_err(io_err)?;
            let mut w = std::io::BufWriter::new(file);
            write(&mut w).map_err(io_err)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

fn emit_rows<R: CsvRow>(rows: &[R], out: Option<&Path>) -> Result<()> {
    emit(out, |w| write_csv(rows, w))
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { common, policy } => {
            let cfg = load_config(&common, ExperimentConfig::full)?;
            let metrics = run_simulation(&cfg, policy, cfg.experiment.seed)?;
            emit_rows(&[metrics], common.out.as_deref())
        }
        Command::Sweep { common, axis } => {
            let cfg = load_config(&common, ExperimentConfig::full)?;
            let rows = run_sweep(&cfg, axis)?;
            emit_rows(&rows, common.out.as_deref())
        }
        Command::Gap { common } => {
            let cfg = load_config(&common, ExperimentConfig::small_exact)?;
            let rows = run_gap_study(&cfg, &cfg.experiment.horizons)?;
            emit_rows(&rows, common.out.as_deref())
        }
        Command::EnumSets {
            common,
            topology,
            exhaustive,
        } => {
            let cfg = load_config(&common, ExperimentConfig::full)?;
            let topo = match &topology {
                Some(path) => Topology::load(path)?,
                None => {
                    let mut streams = RunStreams::from_seed(cfg.experiment.seed);
                    cfg.topology(cfg.topology.edge_prob, &mut streams.topology)?
                }
            };
            let sets = if exhaustive || cfg.topology.set_enumeration == SetEnumeration::Exhaustive {
                enumerate_maximal_sets_exhaustive(topo.graph())?
            } else {
                enumerate_transmission_sets(topo.graph())
            };
            emit(common.out.as_deref(), |w| {
                for set in &sets {
                    writeln!(w, "{set}")?;
                }
                w.flush()
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
