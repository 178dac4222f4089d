use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use rsrn::harness::{run_experiment, summarize, trace, ExperimentConfig, Overrides, OUTPUT_ROOT_VAR};
use rsrn::scalarize::Scalarization;

#[derive(Parser)]
#[command(name = "rsrn", version, about = "Train and compare agent teams under reward-sharing relational networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate every (network, seed) pair of a config file.
    Run {
        config: PathBuf,
        /// Replace the config's seed list (comma separated).
        #[arg(long, value_delimiter = ',')]
        seed_override: Option<Vec<u64>>,
        /// Number of training episodes.
        #[arg(long)]
        episodes: Option<usize>,
        /// Run only this network (preset or custom name).
        #[arg(long)]
        network: Option<String>,
        /// wpm or wsm.
        #[arg(long)]
        scalarization: Option<Scalarization>,
        /// Output directory; relative paths resolve against $RSRN_OUTPUT_ROOT.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the cross-seed comparison table for finished runs.
    Summarize {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Emit JSON instead of the text table.
        #[arg(long)]
        json: bool,
    },
    /// Render a trajectory trace step by step.
    Replay { trace: PathBuf },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            seed_override,
            episodes,
            network,
            scalarization,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.apply(&Overrides {
                seeds: seed_override,
                episodes,
                network,
                scalarization,
                output_dir: out,
            })?;
            let root = std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from);
            let out_dir = cfg.resolved_output_dir(root.as_deref());
            let table = run_experiment(&cfg, &out_dir)?;
            print!("{}", table.to_text());
            eprintln!("results written to {}", out_dir.display());
        }
        Command::Summarize { dirs, json } => {
            let table = summarize(&dirs)?;
            if json {
                print!("{}", table.to_json());
            } else {
                print!("{}", table.to_text());
            }
        }
        Command::Replay { trace: path } => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let steps = trace::parse_trace(&text).with_context(|| format!("parsing {}", path.display()))?;
            print!("{}", trace::render(&steps));
        }
    }
    Ok(())
}
