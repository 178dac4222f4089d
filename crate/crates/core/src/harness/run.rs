use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::summary::{summarize, SummaryTable};
use super::trace::write_trace;
use crate::error::Error;
use crate::graph::RelationalNetwork;
use crate::neuro::checkpoint;
use crate::trainer::{evaluate, stream_rng, train, EpisodeMetrics, EvalReport, Stream};

pub const SUMMARY_JSON: &str = "summary.json";
pub const METRICS_CSV: &str = "metrics.csv";
pub const EVAL_CSV: &str = "eval.csv";
pub const FAILED_MARKER: &str = "FAILED";

/// Machine-readable result of one (network, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub network: String,
    pub seed: u64,
    pub scalarization: String,
    pub weights: Vec<Vec<f64>>,
    pub n_episodes: usize,
    pub env_steps: usize,
    pub eval_episodes: usize,
    pub mean_individual: Vec<f64>,
    pub mean_relational: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("run {network}/seed {seed} failed: {source}")]
    Training {
        network: String,
        seed: u64,
        source: Error,
    },
    #[error(transparent)]
    Config(#[from] super::config::ConfigError),
    #[error(transparent)]
    Summary(#[from] super::summary::SummaryError),
}

fn io<T>(path: &Path, r: std::io::Result<T>) -> Result<T, RunError> {
    r.map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn run_dir(root: &Path, network: &str, seed: u64) -> PathBuf {
    root.join(network).join(format!("seed_{seed}"))
}

pub fn metrics_header(n: usize) -> String {
    let mut cols = vec!["episode".to_string()];
    cols.extend((0..n).map(|i| format!("individual_{i}")));
    cols.extend((0..n).map(|i| format!("relational_{i}")));
    cols.extend((0..n).map(|i| format!("critic_loss_{i}")));
    cols.push("updates".into());
    cols.push("noise_std".into());
    cols.join(",")
}

fn metrics_line(m: &EpisodeMetrics) -> String {
    let mut fields = vec![m.episode.to_string()];
    fields.extend(m.individual.iter().chain(&m.relational).chain(&m.critic_loss).map(f64::to_string));
    fields.push(m.updates.to_string());
    fields.push(m.noise_std.to_string());
    fields.join(",")
}

fn eval_csv(report: &EvalReport, n: usize) -> String {
    let mut cols = vec!["episode".to_string()];
    cols.extend((0..n).map(|i| format!("individual_{i}")));
    cols.extend((0..n).map(|i| format!("relational_{i}")));
    let mut out = cols.join(",");
    out.push('\n');
    for (k, (ind, rel)) in report.individual.iter().zip(&report.relational).enumerate() {
        let mut fields = vec![k.to_string()];
        fields.extend(ind.iter().chain(rel).map(f64::to_string));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn summary_text(s: &RunSummary) -> String {
    let mut out = format!(
        "network {}  seed {}  scalarization {}  episodes {}  eval episodes {}\n",
        s.network, s.seed, s.scalarization, s.n_episodes, s.eval_episodes
    );
    out.push_str(&format!("{:>6} {:>12} {:>12}\n", "agent", "individual", "relational"));
    for (i, (a, b)) in s.mean_individual.iter().zip(&s.mean_relational).enumerate() {
        out.push_str(&format!("{:>6} {a:>12.6} {b:>12.6}\n", i + 1));
    }
    out
}

/// Trains and evaluates a single (network, seed) pair into `dir`.
pub fn run_one(config: &ExperimentConfig, network: &str, net: &RelationalNetwork, seed: u64, dir: &Path) -> Result<RunSummary, RunError> {
    io(dir, fs::create_dir_all(dir))?;
    let marker = dir.join(FAILED_MARKER);
    if marker.exists() {
        io(&marker, fs::remove_file(&marker))?;
    }
    let n = config.world.n_agents;
    let mut train_cfg = config.train.clone();
    train_cfg.seed = seed;

    let metrics_path = dir.join(METRICS_CSV);
    let mut metrics = BufWriter::new(io(&metrics_path, File::create(&metrics_path))?);
    io(&metrics_path, writeln!(metrics, "{}", metrics_header(n)))?;
    let mut write_err = None;
    let started = Instant::now();
    let outcome = train(&train_cfg, &config.world, net, config.scalarization, |m| {
        if write_err.is_none() {
            if let Err(e) = writeln!(metrics, "{}", metrics_line(m)) {
                write_err = Some(e);
            }
        }
        if (m.episode + 1) % 1000 == 0 {
            eprintln!("[{network} seed {seed}] episode {} relational {:?}", m.episode + 1, m.relational);
        }
    });
    if let Some(e) = write_err {
        return Err(RunError::Io {
            path: metrics_path,
            source: e,
        });
    }
    io(&metrics_path, metrics.flush())?;
    let train_secs = started.elapsed().as_secs_f64();

    let fail = |source: Error| -> RunError {
        let _ = fs::write(&marker, format!("{source}\n"));
        RunError::Training {
            network: network.to_string(),
            seed,
            source,
        }
    };
    let outcome = outcome.map_err(fail)?;
    let mut eval_rng = stream_rng(seed, Stream::Eval);
    let report = evaluate(
        &outcome.learners,
        &config.world,
        net,
        config.scalarization,
        config.eval_episodes,
        config.trace_episodes,
        &mut eval_rng,
    )
    .map_err(fail)?;

    let summary = RunSummary {
        network: network.to_string(),
        seed,
        scalarization: config.scalarization.to_string(),
        weights: net.to_rows(),
        n_episodes: outcome.metrics.len(),
        env_steps: outcome.env_steps,
        eval_episodes: config.eval_episodes,
        mean_individual: report.mean_individual.clone(),
        mean_relational: report.mean_relational.clone(),
    };
    let write = |name: &str, text: String| -> Result<(), RunError> {
        let p = dir.join(name);
        io(&p, fs::write(&p, text))
    };
    write(EVAL_CSV, eval_csv(&report, n))?;
    write(SUMMARY_JSON, serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n")?;
    write("summary.txt", summary_text(&summary))?;
    write(
        "timing.txt",
        format!("train_seconds {train_secs:.3}\ntotal_seconds {:.3}\n", started.elapsed().as_secs_f64()),
    )?;

    let ckpt = dir.join("checkpoints");
    io(&ckpt, fs::create_dir_all(&ckpt))?;
    for (i, l) in outcome.learners.iter().enumerate() {
        for (kind, net) in [("actor", &l.actor), ("critic", &l.critic)] {
            let p = ckpt.join(format!("agent_{i}_{kind}.txt"));
            io(&p, fs::write(&p, checkpoint::to_text(net)))?;
        }
    }
    let traces = dir.join("traces");
    io(&traces, fs::create_dir_all(&traces))?;
    for (k, t) in report.traces.iter().enumerate() {
        let p = traces.join(format!("trace_{k}.csv"));
        io(&p, fs::write(&p, write_trace(t)))?;
    }
    Ok(summary)
}

/// Runs every (network, seed) pair of `config` under `root`, then writes
/// the cross-run summary there.
pub fn run_experiment(config: &ExperimentConfig, root: &Path) -> Result<SummaryTable, RunError> {
    config.validate()?;
    let nets = config
        .networks
        .iter()
        .map(|name| Ok((name.clone(), config.network(name)?)))
        .collect::<Result<Vec<_>, RunError>>()?;
    io(root, fs::create_dir_all(root))?;
    let cfg_path = root.join("config.toml");
    io(&cfg_path, fs::write(&cfg_path, config.to_toml()))?;
    let mut dirs = Vec::new();
    for (name, net) in &nets {
        for &seed in &config.seeds {
            let dir = run_dir(root, name, seed);
            run_one(config, name, net, seed, &dir)?;
            dirs.push(dir);
        }
    }
    let table = summarize(&dirs)?;
    let write = |name: &str, text: String| -> Result<(), RunError> {
        let p = root.join(name);
        io(&p, fs::write(&p, text))
    };
    write("summary.txt", table.to_text())?;
    write("summary.json", table.to_json())?;
    Ok(table)
}
