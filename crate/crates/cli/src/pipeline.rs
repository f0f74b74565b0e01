//! End-to-end pipeline: relaxation, rounding, baselines, oracle, and
//! the cross-method invariant checks, assembled into a reproducible
//! report.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use rdc_core::baselines::{
    brute_force, greedy_ranking, prp_ranking, BaselineError, GreedyVariant,
};
use rdc_core::extensions::{
    enumerate_optimum, evaluate_rgc, evaluate_rxos, solve_rgc, solve_rxos, ExtConfig, ExtError,
};
use rdc_core::model::ModelError;
use rdc_core::relaxation::{solve_relaxation, RelaxConfig, RelaxError};
use rdc_core::rounding::{BestOfResult, RoundingConfig, RoundingError};
use rdc_core::setcover::Strategy;
use rdc_core::Instance;

use crate::format::ParsedInstance;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Ext(#[from] ExtError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invariant breach: {0}")]
    InvariantBreach(String),
}

/// Pipeline parameters, mirroring the CLI flags.
#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    pub seed: u64,
    pub trials: usize,
    pub scale: f64,
    pub overflow_base: f64,
    pub setcover: Strategy,
    pub oracle_cap: usize,
    pub lp_tol: f64,
    /// Record wall-clock time in the report. Off by default so reports
    /// are byte-identical across runs with the same seed and config.
    pub timing: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            trials: 10,
            scale: 50.0,
            overflow_base: 70.0,
            setcover: Strategy::Auto,
            oracle_cap: 9,
            lp_tol: 1e-7,
            timing: false,
        }
    }
}

impl PipelineConfig {
    pub fn relax_config(&self) -> RelaxConfig<f64> {
        RelaxConfig {
            eps_feas: self.lp_tol,
            scale: self.scale,
            ..RelaxConfig::default()
        }
    }

    pub fn rounding_config(&self) -> RoundingConfig<f64> {
        RoundingConfig {
            scale: self.scale,
            overflow_base: self.overflow_base,
            trials: self.trials,
            rng_seed: self.seed,
            strategy: self.setcover,
            ..RoundingConfig::default()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceDescriptor {
    pub name: String,
    pub kind: String,
    pub n_docs: usize,
    pub n_topics: usize,
    pub n_users: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub trials: usize,
    pub scale: f64,
    pub overflow_base: f64,
    pub setcover: &'static str,
    pub oracle_cap: usize,
    pub lp_tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub cost: u64,
    pub best_trial: usize,
    pub trial_costs: Vec<u64>,
    pub order: Vec<String>,
    /// Round log lines of the best trial.
    pub round_logs: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub cost: u64,
    pub order: Vec<String>,
    pub nodes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineReport {
    pub prp_cost: u64,
    pub greedy_satisfy_cost: u64,
    pub greedy_coverage_cost: u64,
}

/// Self-contained run record; identical inputs produce identical bytes
/// (enable `timing` to trade that for wall-clock data).
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub instance: InstanceDescriptor,
    pub config: ConfigEcho,
    pub lp_bound: f64,
    /// `0.5 * sum_u t_u*`.
    pub half_bound: f64,
    pub t_star: Vec<usize>,
    pub solver: SolverReport,
    pub oracle: Option<OracleReport>,
    pub baselines: Option<BaselineReport>,
    /// solver cost / lp bound, when the bound is positive.
    pub ratio: Option<f64>,
    pub overflow_rate: Option<f64>,
    /// Non-satisfaction frequency over (trial, round, user) triples
    /// whose round horizon strictly exceeds the user's half-time.
    pub round_failure_rate: Option<f64>,
    pub millis: u64,
    pub seed: u64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}

fn config_echo(config: &PipelineConfig) -> ConfigEcho {
    ConfigEcho {
        seed: config.seed,
        trials: config.trials,
        scale: config.scale,
        overflow_base: config.overflow_base,
        setcover: config.setcover.name(),
        oracle_cap: config.oracle_cap,
        lp_tol: config.lp_tol,
    }
}

fn ids(order: &[usize], names: &[String]) -> Vec<String> {
    order.iter().map(|&s| names[s].clone()).collect()
}

/// Overflow and per-round non-satisfaction frequencies across all
/// trials of a best-of run.
fn round_statistics(
    instance: &Instance,
    t_star: &[usize],
    best: &BestOfResult<f64>,
) -> Result<(f64, f64), PipelineError> {
    let mut rounds_total = 0usize;
    let mut rounds_overflowed = 0usize;
    let mut eligible = 0usize;
    let mut failures = 0usize;
    for trial in &best.trials {
        for log in &trial.logs {
            rounds_total += 1;
            if log.overflowed {
                rounds_overflowed += 1;
                continue;
            }
            if !log.h_cert_ok {
                return Err(PipelineError::InvariantBreach(format!(
                    "cover certificate breached: {}",
                    log.line()
                )));
            }
            let horizon = 1usize << log.k;
            let selection = log.selection();
            for u in 0..instance.n_users() {
                if horizon <= t_star[u] {
                    continue;
                }
                eligible += 1;
                let covered = instance.coverage_count(u, &selection)?;
                if covered < instance.threshold(u) {
                    failures += 1;
                }
            }
        }
    }
    let overflow_rate = if rounds_total == 0 {
        0.0
    } else {
        rounds_overflowed as f64 / rounds_total as f64
    };
    let failure_rate = if eligible == 0 {
        0.0
    } else {
        failures as f64 / eligible as f64
    };
    Ok((overflow_rate, failure_rate))
}

/// Solve an RDC instance end to end and assemble the report. Any
/// cross-method invariant breach aborts with a diagnostic.
pub fn run_pipeline(
    instance: &Instance,
    config: &PipelineConfig,
    name: &str,
) -> Result<RunReport, PipelineError> {
    let started = Instant::now();
    let fractional = solve_relaxation(instance, &config.relax_config())?;
    let best = rdc_core::rounding::best_of(instance, &fractional, &config.rounding_config())?;
    let prp = prp_ranking(instance)?;
    let satisfy = greedy_ranking(instance, GreedyVariant::Satisfy)?;
    let coverage = greedy_ranking(instance, GreedyVariant::Coverage)?;
    let oracle = if instance.n_docs() <= config.oracle_cap {
        Some(brute_force(instance, config.oracle_cap)?)
    } else {
        None
    };

    let lp_bound = fractional.objective;
    let half_bound: f64 = fractional.t_star.iter().map(|&t| t as f64).sum::<f64>() * 0.5;
    let solver_cost = best.best.total_cost;
    let tol = 1e-6;
    if half_bound > lp_bound + tol {
        return Err(PipelineError::InvariantBreach(format!(
            "half-time bound {half_bound} exceeds lp bound {lp_bound}"
        )));
    }
    if (solver_cost as f64) < lp_bound - tol {
        return Err(PipelineError::InvariantBreach(format!(
            "solver cost {solver_cost} below lp bound {lp_bound}"
        )));
    }
    if let Some(oracle) = &oracle {
        let oc = oracle.ranking.total_cost;
        if (oc as f64) < lp_bound - tol {
            return Err(PipelineError::InvariantBreach(format!(
                "oracle cost {oc} below lp bound {lp_bound}"
            )));
        }
        for (label, cost) in [
            ("solver", solver_cost),
            ("prp", prp.total_cost),
            ("greedy-satisfy", satisfy.total_cost),
            ("greedy-coverage", coverage.total_cost),
        ] {
            if cost < oc {
                return Err(PipelineError::InvariantBreach(format!(
                    "{label} cost {cost} below oracle optimum {oc}"
                )));
            }
        }
    }
    let (overflow_rate, failure_rate) = round_statistics(instance, &fractional.t_star, &best)?;

    let doc_names = instance.doc_ids();
    Ok(RunReport {
        instance: InstanceDescriptor {
            name: name.to_string(),
            kind: "rdc".into(),
            n_docs: instance.n_docs(),
            n_topics: instance.n_topics(),
            n_users: instance.n_users(),
        },
        config: config_echo(config),
        lp_bound,
        half_bound,
        t_star: fractional.t_star.clone(),
        solver: SolverReport {
            cost: solver_cost,
            best_trial: best.best_trial,
            trial_costs: best.trial_costs.clone(),
            order: ids(&best.best.order, doc_names),
            round_logs: best.trials[best.best_trial]
                .logs
                .iter()
                .map(|l| l.line())
                .collect(),
        },
        oracle: oracle.map(|o| OracleReport {
            cost: o.ranking.total_cost,
            order: ids(&o.ranking.order, doc_names),
            nodes: o.nodes,
        }),
        baselines: Some(BaselineReport {
            prp_cost: prp.total_cost,
            greedy_satisfy_cost: satisfy.total_cost,
            greedy_coverage_cost: coverage.total_cost,
        }),
        ratio: (lp_bound > tol).then(|| solver_cost as f64 / lp_bound),
        overflow_rate: Some(overflow_rate),
        round_failure_rate: Some(failure_rate),
        millis: if config.timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
        seed: config.seed,
    })
}

fn ext_config(config: &PipelineConfig) -> ExtConfig<f64> {
    ExtConfig {
        relax: config.relax_config(),
        rounding: config.rounding_config(),
        ..ExtConfig::default()
    }
}

/// Dispatch a parsed instance of any kind through its pipeline.
pub fn run_parsed(
    parsed: &ParsedInstance,
    config: &PipelineConfig,
    name: &str,
) -> Result<RunReport, PipelineError> {
    match parsed {
        ParsedInstance::Rdc(instance) => run_pipeline(instance, config, name),
        ParsedInstance::Rgc(gi) => {
            let started = Instant::now();
            let outcome = solve_rgc(gi, &ext_config(config))?;
            let oracle = if gi.n_docs() <= config.oracle_cap {
                let (perm, cost) = enumerate_optimum(gi.n_docs(), |o| evaluate_rgc(gi, o))?;
                Some(OracleReport {
                    cost,
                    order: ids(&perm, gi.doc_ids()),
                    nodes: 0,
                })
            } else {
                None
            };
            assemble_ext(
                config,
                name,
                "rgc",
                gi.n_docs(),
                gi.n_topics(),
                gi.n_users(),
                gi.doc_ids(),
                outcome,
                oracle,
                started,
            )
        }
        ParsedInstance::Rxos(xi) => {
            let started = Instant::now();
            let outcome = solve_rxos(xi, &ext_config(config))?;
            let oracle = if xi.n_docs() <= config.oracle_cap {
                let (perm, cost) = enumerate_optimum(xi.n_docs(), |o| evaluate_rxos(xi, o))?;
                Some(OracleReport {
                    cost,
                    order: ids(&perm, xi.doc_ids()),
                    nodes: 0,
                })
            } else {
                None
            };
            assemble_ext(
                config,
                name,
                "rxos",
                xi.n_docs(),
                0,
                xi.n_users(),
                xi.doc_ids(),
                outcome,
                oracle,
                started,
            )
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble_ext(
    config: &PipelineConfig,
    name: &str,
    kind: &str,
    n_docs: usize,
    n_topics: usize,
    n_users: usize,
    doc_names: &[String],
    outcome: rdc_core::extensions::ExtOutcome<f64>,
    oracle: Option<OracleReport>,
    started: Instant,
) -> Result<RunReport, PipelineError> {
    let tol = 1e-6;
    let half_bound: f64 = outcome.t_star.iter().map(|&t| t as f64).sum::<f64>() * 0.5;
    if half_bound > outcome.lp_bound + tol {
        return Err(PipelineError::InvariantBreach(format!(
            "half-time bound {half_bound} exceeds lp bound {}",
            outcome.lp_bound
        )));
    }
    if let Some(oracle) = &oracle {
        if (oracle.cost as f64) < outcome.lp_bound - tol {
            return Err(PipelineError::InvariantBreach(format!(
                "oracle cost {} below lp bound {}",
                oracle.cost, outcome.lp_bound
            )));
        }
        if outcome.best.total_cost < oracle.cost {
            return Err(PipelineError::InvariantBreach(format!(
                "solver cost {} below oracle optimum {}",
                outcome.best.total_cost, oracle.cost
            )));
        }
    }
    Ok(RunReport {
        instance: InstanceDescriptor {
            name: name.to_string(),
            kind: kind.into(),
            n_docs,
            n_topics,
            n_users,
        },
        config: config_echo(config),
        lp_bound: outcome.lp_bound,
        half_bound,
        t_star: outcome.t_star.clone(),
        solver: SolverReport {
            cost: outcome.best.total_cost,
            best_trial: outcome.best_trial,
            trial_costs: outcome.trial_costs.clone(),
            order: ids(&outcome.best.order, doc_names),
            round_logs: Vec::new(),
        },
        oracle,
        baselines: None,
        ratio: (outcome.lp_bound > tol).then(|| outcome.best.total_cost as f64 / outcome.lp_bound),
        overflow_rate: None,
        round_failure_rate: None,
        millis: if config.timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
        seed: config.seed,
    })
}
