//! Benchmark suites: generator configs in, per-instance reports plus a
//! flat CSV with stable column order out.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{parse_instance, ParsedInstance};
use crate::generate::{generate, GenKind, GenParams};
use crate::pipeline::{run_parsed, PipelineConfig, RunReport};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("suite syntax error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("entry {0:?}: need either a generator kind or a file")]
    NoSource(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub const CSV_HEADER: &str = "instance,n_docs,n_topics,n_users,lp_bound,half_bound,\
solver_cost,oracle_cost,prp_cost,greedy_cost,ratio,overflow_rate,seed,millis";

#[derive(Debug, Clone, Deserialize)]
pub struct ParamsSpec {
    #[serde(default)]
    pub docs: Option<usize>,
    #[serde(default)]
    pub topics: Option<usize>,
    #[serde(default)]
    pub users: Option<usize>,
    #[serde(default)]
    pub doc_density: Option<f64>,
    #[serde(default)]
    pub user_density: Option<f64>,
    #[serde(default)]
    pub k_min: Option<usize>,
    #[serde(default)]
    pub k_max: Option<usize>,
    #[serde(default)]
    pub max_frequency: Option<usize>,
}

impl ParamsSpec {
    fn to_params(&self) -> GenParams {
        let d = GenParams::default();
        GenParams {
            docs: self.docs.unwrap_or(d.docs),
            topics: self.topics.unwrap_or(d.topics),
            users: self.users.unwrap_or(d.users),
            doc_density: self.doc_density.unwrap_or(d.doc_density),
            user_density: self.user_density.unwrap_or(d.user_density),
            k_min: self.k_min.unwrap_or(d.k_min),
            k_max: self.k_max.unwrap_or(d.k_max),
            max_frequency: self.max_frequency.unwrap_or(d.max_frequency),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    /// Generator kind (random, disjoint, freq-bounded, example1) ...
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub params: Option<ParamsSpec>,
    #[serde(default)]
    pub gen_seed: u64,
    /// ... or an instance file path (relative to the suite file).
    #[serde(default)]
    pub file: Option<String>,
    /// Pipeline seed / trials overrides.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SuiteSpec {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub trials: Option<usize>,
    pub instances: Vec<SuiteEntry>,
}

impl SuiteSpec {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Serialize)]
pub struct EntryOutcome {
    pub name: String,
    /// Generator kind, or the instance kind for file entries.
    pub group: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<RunReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct GroupAggregate {
    pub group: String,
    pub count: usize,
    pub mean_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub mean_overflow_rate: Option<f64>,
    pub max_overflow_rate: Option<f64>,
    pub mean_failure_rate: Option<f64>,
    pub max_failure_rate: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct BenchOutcome {
    pub entries: Vec<EntryOutcome>,
    pub aggregates: Vec<GroupAggregate>,
    #[serde(skip)]
    pub csv: String,
}

impl BenchOutcome {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("bench outcome serializes");
        out.push('\n');
        out
    }
}

/// Run every suite entry (failures are recorded and the suite
/// continues), then compute per-group and overall aggregates.
pub fn bench(
    suite: &SuiteSpec,
    base: &PipelineConfig,
    suite_dir: &Path,
) -> Result<BenchOutcome, BenchError> {
    let mut entries = Vec::new();
    for entry in &suite.instances {
        let mut config = *base;
        // Determinism regardless of host load.
        config.timing = false;
        if let Some(seed) = entry.seed.or(suite.seed) {
            config.seed = seed;
        }
        if let Some(trials) = entry.trials.or(suite.trials) {
            config.trials = trials;
        }
        let (group, parsed) = match load_entry(entry, suite_dir) {
            Ok(pair) => pair,
            Err(err) => {
                entries.push(EntryOutcome {
                    name: entry.name.clone(),
                    group: entry.kind.clone().unwrap_or_else(|| "file".into()),
                    report: None,
                    error: Some(err),
                });
                continue;
            }
        };
        match run_parsed(&parsed, &config, &entry.name) {
            Ok(report) => entries.push(EntryOutcome {
                name: entry.name.clone(),
                group,
                report: Some(report),
                error: None,
            }),
            Err(err) => entries.push(EntryOutcome {
                name: entry.name.clone(),
                group,
                report: None,
                error: Some(err.to_string()),
            }),
        }
    }
    let aggregates = aggregate(&entries);
    let csv = render_csv(&entries, &aggregates);
    Ok(BenchOutcome {
        entries,
        aggregates,
        csv,
    })
}

fn load_entry(entry: &SuiteEntry, suite_dir: &Path) -> Result<(String, ParsedInstance), String> {
    if let Some(kind_name) = &entry.kind {
        let kind = GenKind::parse(kind_name).map_err(|e| e.to_string())?;
        let params = entry
            .params
            .as_ref()
            .map(|p| p.to_params())
            .unwrap_or_default();
        let instance = generate(kind, &params, entry.gen_seed).map_err(|e| e.to_string())?;
        Ok((kind.name().to_string(), ParsedInstance::Rdc(instance)))
    } else if let Some(file) = &entry.file {
        let path = suite_dir.join(file);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| format!("reading {}: {e}", path.display()))?;
        let parsed = parse_instance(&text).map_err(|e| e.to_string())?;
        Ok((parsed.kind().to_string(), parsed))
    } else {
        Err(BenchError::NoSource(entry.name.clone()).to_string())
    }
}

fn mean_max(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (Some(mean), Some(max))
}

fn aggregate(entries: &[EntryOutcome]) -> Vec<GroupAggregate> {
    let mut groups: Vec<String> = entries.iter().map(|e| e.group.clone()).collect();
    groups.sort();
    groups.dedup();
    groups.push("all".into());
    groups
        .into_iter()
        .map(|group| {
            let members: Vec<&EntryOutcome> = entries
                .iter()
                .filter(|e| group == "all" || e.group == group)
                .collect();
            let ratios: Vec<f64> = members
                .iter()
                .filter_map(|e| e.report.as_ref().and_then(|r| r.ratio))
                .collect();
            let overflow: Vec<f64> = members
                .iter()
                .filter_map(|e| e.report.as_ref().and_then(|r| r.overflow_rate))
                .collect();
            let failure: Vec<f64> = members
                .iter()
                .filter_map(|e| e.report.as_ref().and_then(|r| r.round_failure_rate))
                .collect();
            let (mean_ratio, max_ratio) = mean_max(&ratios);
            let (mean_overflow_rate, max_overflow_rate) = mean_max(&overflow);
            let (mean_failure_rate, max_failure_rate) = mean_max(&failure);
            GroupAggregate {
                group,
                count: members.len(),
                mean_ratio,
                max_ratio,
                mean_overflow_rate,
                max_overflow_rate,
                mean_failure_rate,
                max_failure_rate,
            }
        })
        .collect()
}

fn fmt_f64(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_default()
}

fn render_csv(entries: &[EntryOutcome], aggregates: &[GroupAggregate]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for entry in entries {
        match &entry.report {
            Some(r) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    entry.name,
                    r.instance.n_docs,
                    r.instance.n_topics,
                    r.instance.n_users,
                    format_args!("{:.6}", r.lp_bound),
                    format_args!("{:.6}", r.half_bound),
                    r.solver.cost,
                    r.oracle
                        .as_ref()
                        .map(|o| o.cost.to_string())
                        .unwrap_or_default(),
                    r.baselines
                        .as_ref()
                        .map(|b| b.prp_cost.to_string())
                        .unwrap_or_default(),
                    r.baselines
                        .as_ref()
                        .map(|b| b.greedy_satisfy_cost.to_string())
                        .unwrap_or_default(),
                    fmt_f64(r.ratio),
                    fmt_f64(r.overflow_rate),
                    r.seed,
                    r.millis,
                );
            }
            None => {
                let _ = writeln!(out, "{},,,,,,,,,,,,,", entry.name);
            }
        }
    }
    for agg in aggregates {
        let _ = writeln!(
            out,
            "mean:{},{},,,,,,,,,{},{},,",
            agg.group,
            agg.count,
            fmt_f64(agg.mean_ratio),
            fmt_f64(agg.mean_overflow_rate),
        );
        let _ = writeln!(
            out,
            "max:{},{},,,,,,,,,{},{},,",
            agg.group,
            agg.count,
            fmt_f64(agg.max_ratio),
            fmt_f64(agg.max_overflow_rate),
        );
    }
    out
}
