//! Cross-seed comparison tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::run::{RunSummary, METRICS_CSV, SUMMARY_JSON};
use crate::graph::Preset;

#[derive(Debug, thiserror::Error)]
pub enum SummaryError {
    #[error("no run directories given")]
    NoDirs,
    #[error("no completed runs found under {0}")]
    NoRuns(PathBuf),
    #[error("incomplete run in {0}: metrics present but no summary")]
    Incomplete(PathBuf),
    #[error("{path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

/// Mean and sample standard deviation across seeds, per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRow {
    pub network: String,
    pub seeds: Vec<u64>,
    pub individual: AgentStats,
    pub relational: AgentStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<NetworkRow>,
}

fn stats(values: &[&Vec<f64>]) -> AgentStats {
    let n = values[0].len();
    let k = values.len() as f64;
    let mean: Vec<f64> = (0..n).map(|i| values.iter().map(|v| v[i]).sum::<f64>() / k).collect();
    let std = (0..n)
        .map(|i| {
            if values.len() < 2 {
                0.0
            } else {
                (values.iter().map(|v| (v[i] - mean[i]).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
            }
        })
        .collect();
    AgentStats { mean, std }
}

fn network_order(name: &str) -> (usize, String) {
    let idx = Preset::ALL.iter().position(|p| p.name() == name).unwrap_or(Preset::ALL.len());
    (idx, name.to_string())
}

pub fn load_run(dir: &Path) -> Result<RunSummary, SummaryError> {
    let path = dir.join(SUMMARY_JSON);
    let text = std::fs::read_to_string(&path).map_err(|e| SummaryError::Corrupt {
        path: path.clone(),
        message: e.to_string(),
    })?;
    let s: RunSummary = serde_json::from_str(&text).map_err(|e| SummaryError::Corrupt {
        path: path.clone(),
        message: e.to_string(),
    })?;
    let n = s.weights.len();
    if s.mean_individual.len() != n || s.mean_relational.len() != n {
        return Err(SummaryError::Corrupt {
            path,
            message: "agent count mismatch".into(),
        });
    }
    Ok(s)
}

/// Collects every completed run below the given directories and averages
/// evaluation means across seeds, per network.
pub fn summarize(dirs: &[PathBuf]) -> Result<SummaryTable, SummaryError> {
    if dirs.is_empty() {
        return Err(SummaryError::NoDirs);
    }
    let mut runs = Vec::new();
    for root in dirs {
        let before = runs.len();
        let walker = WalkDir::new(root).sort_by_file_name().into_iter();
        for entry in walker {
            let entry = entry.map_err(|e| SummaryError::Corrupt {
                path: root.clone(),
                message: e.to_string(),
            })?;
            if !entry.file_type().is_dir() {
                continue;
            }
            let d = entry.path();
            // Run directories are recognised by their metrics file; the
            // experiment root carries a summary.json of a different shape.
            if !d.join(METRICS_CSV).is_file() {
                continue;
            }
            if !d.join(SUMMARY_JSON).is_file() {
                return Err(SummaryError::Incomplete(d.to_path_buf()));
            }
            runs.push(load_run(d)?);
        }
        if runs.len() == before {
            return Err(SummaryError::NoRuns(root.clone()));
        }
    }

    let mut grouped: BTreeMap<(usize, String), Vec<RunSummary>> = BTreeMap::new();
    for r in runs {
        grouped.entry(network_order(&r.network)).or_default().push(r);
    }
    let rows = grouped
        .into_values()
        .map(|mut group| {
            group.sort_by_key(|r| r.seed);
            group.dedup_by_key(|r| r.seed);
            let ind: Vec<&Vec<f64>> = group.iter().map(|r| &r.mean_individual).collect();
            let rel: Vec<&Vec<f64>> = group.iter().map(|r| &r.mean_relational).collect();
            NetworkRow {
                network: group[0].network.clone(),
                seeds: group.iter().map(|r| r.seed).collect(),
                individual: stats(&ind),
                relational: stats(&rel),
            }
        })
        .collect();
    Ok(SummaryTable { rows })
}

impl SummaryTable {
    pub fn row(&self, network: &str) -> Option<&NetworkRow> {
        self.rows.iter().find(|r| r.network == network)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<24} {:>5} {:>6} {:>22} {:>22}",
            "network", "seeds", "agent", "individual (mean±std)", "relational (mean±std)"
        )
        .unwrap();
        for r in &self.rows {
            for i in 0..r.individual.mean.len() {
                let name = if i == 0 { r.network.as_str() } else { "" };
                let seeds = if i == 0 { r.seeds.len().to_string() } else { String::new() };
                writeln!(
                    out,
                    "{name:<24} {seeds:>5} {:>6} {:>22} {:>22}",
                    i + 1,
                    format!("{:.4} ± {:.4}", r.individual.mean[i], r.individual.std[i]),
                    format!("{:.4} ± {:.4}", r.relational.mean[i], r.relational.std[i]),
                )
                .unwrap();
            }
        }
        out
    }
}
