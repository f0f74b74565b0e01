use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rdc_cli::bench::{bench, SuiteSpec};
use rdc_cli::format::{parse_instance, serialize_instance, FormatError, ParsedInstance};
use rdc_cli::generate::{generate, GenKind, GenParams};
use rdc_cli::pipeline::{run_parsed, PipelineConfig, PipelineError};
use rdc_core::baselines::brute_force;
use rdc_core::extensions::{enumerate_optimum, evaluate_rgc, evaluate_rxos};
use rdc_core::model::evaluate;
use rdc_core::relaxation::{build_base, solve_relaxation};
use rdc_core::setcover::Strategy;

/// Document-ranking solver: knapsack-cover LP relaxation with
/// randomized doubling-round rounding, plus oracles and baselines.
#[derive(Parser)]
#[command(name = "rdc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Base RNG seed for rounding trials.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Rounding trials (best-of selection).
    #[arg(long, global = true, default_value_t = 10)]
    trials: usize,
    /// Sampling scale for the rounding probabilities.
    #[arg(long, global = true, default_value_t = 50.0)]
    scale: f64,
    /// Overflow threshold base: a round keeps at most
    /// (base + rho) * 2^k documents.
    #[arg(long, global = true, default_value_t = 70.0)]
    overflow_base: f64,
    /// Set-cover strategy: auto, greedy, primal-dual, exact, disjoint.
    #[arg(long, global = true, default_value = "auto")]
    setcover: String,
    /// Run the exact oracle only up to this many documents.
    #[arg(long, global = true, default_value_t = 9)]
    oracle_cap: usize,
    /// Absolute LP feasibility tolerance.
    #[arg(long, global = true, default_value_t = 1e-7)]
    lp_tol: f64,
    /// Write primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall-clock times in reports (breaks byte-for-byte
    /// reproducibility of the output).
    #[arg(long, global = true, default_value_t = false)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance end to end and emit a run report (JSON).
    Solve { instance: PathBuf },
    /// Evaluate a given document order on an instance.
    Eval {
        instance: PathBuf,
        /// Comma-separated document ids, e.g. s3,s1,s2.
        #[arg(long)]
        order: String,
    },
    /// Exact brute-force optimum (small instances).
    Oracle { instance: PathBuf },
    /// Generate an instance file.
    Gen {
        /// random | disjoint | freq-bounded | example1
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 8)]
        docs: usize,
        #[arg(long, default_value_t = 10)]
        topics: usize,
        #[arg(long, default_value_t = 5)]
        users: usize,
        #[arg(long, default_value_t = 0.3)]
        doc_density: f64,
        #[arg(long, default_value_t = 0.4)]
        user_density: f64,
        #[arg(long, default_value_t = 1)]
        k_min: usize,
        #[arg(long, default_value_t = 3)]
        k_max: usize,
        /// Max documents per topic (freq-bounded kind).
        #[arg(long, default_value_t = 2)]
        max_frequency: usize,
        /// Generator seed (separate from the pipeline seed).
        #[arg(long, default_value_t = 0)]
        gen_seed: u64,
    },
    /// Run a benchmark suite; writes CSV to --out (JSON to stderr-less
    /// --report-out if given).
    Bench {
        suite: PathBuf,
        /// Write the full JSON outcome here as well.
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Dump the base LP of an RDC instance in LP text format.
    Lpdump {
        instance: PathBuf,
        /// Also solve the relaxation and append the generated
        /// knapsack-cover rows.
        #[arg(long, default_value_t = false)]
        solved: bool,
    },
}

#[derive(Args)]
struct Nothing {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap's own help/version output is a success path.
            if err.use_stderr() {
                eprintln!("{err}");
                return ExitCode::from(1);
            }
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

/// Exit codes: 1 usage, 2 invalid instance, 3 invariant breach.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(fe) = cause.downcast_ref::<FormatError>() {
            return match fe {
                FormatError::Invalid(_) | FormatError::MissingUserField { .. } => 2,
                _ => 1,
            };
        }
        if let Some(pe) = cause.downcast_ref::<PipelineError>() {
            return match pe {
                PipelineError::InvariantBreach(_) => 3,
                PipelineError::Relax(rdc_core::relaxation::RelaxError::InvalidInstance(_)) => 2,
                _ => 3,
            };
        }
    }
    1
}

fn read_instance(path: &Path) -> anyhow::Result<ParsedInstance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
    Ok(parse_instance(&text)?)
}

fn emit(out: &Option<PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let strategy = Strategy::parse(&cli.setcover)
        .ok_or_else(|| anyhow::anyhow!("unknown set-cover strategy {:?}", cli.setcover))?;
    let config = PipelineConfig {
        seed: cli.seed,
        trials: cli.trials,
        scale: cli.scale,
        overflow_base: cli.overflow_base,
        setcover: strategy,
        oracle_cap: cli.oracle_cap,
        lp_tol: cli.lp_tol,
        timing: cli.timing,
    };
    match cli.command {
        Command::Solve { instance } => {
            let parsed = read_instance(&instance)?;
            let name = instance
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "instance".into());
            let report = run_parsed(&parsed, &config, &name)?;
            eprintln!(
                "{}: solver={} lp_bound={:.4} trials={:?}",
                name, report.solver.cost, report.lp_bound, report.solver.trial_costs
            );
            emit(&cli.out, &report.to_json())
        }
        Command::Eval { instance, order } => {
            let parsed = read_instance(&instance)?;
            let names: Vec<&str> = order.split(',').map(str::trim).collect();
            let mut indices = Vec::with_capacity(names.len());
            for name in &names {
                let idx = parsed
                    .doc_ids()
                    .iter()
                    .position(|d| d == name)
                    .ok_or_else(|| anyhow::anyhow!("unknown document id {name:?}"))?;
                indices.push(idx);
            }
            let ranking = match &parsed {
                ParsedInstance::Rdc(i) => evaluate(i, &indices)?,
                ParsedInstance::Rgc(i) => evaluate_rgc(i, &indices)?,
                ParsedInstance::Rxos(i) => evaluate_rxos(i, &indices)?,
            };
            let body = serde_json::json!({
                "order": names,
                "satisfy_times": ranking.satisfy_times,
                "total_cost": ranking.total_cost,
            });
            emit(&cli.out, &format!("{}\n", serde_json::to_string_pretty(&body)?))
        }
        Command::Oracle { instance } => {
            let parsed = read_instance(&instance)?;
            let (order, cost, nodes) = match &parsed {
                ParsedInstance::Rdc(i) => {
                    let r = brute_force(i, config.oracle_cap)?;
                    (r.ranking.order, r.ranking.total_cost, r.nodes)
                }
                ParsedInstance::Rgc(i) => {
                    anyhow::ensure!(
                        i.n_docs() <= config.oracle_cap,
                        "oracle limited to {} documents, instance has {}",
                        config.oracle_cap,
                        i.n_docs()
                    );
                    let (perm, cost) = enumerate_optimum(i.n_docs(), |o| evaluate_rgc(i, o))?;
                    (perm, cost, 0)
                }
                ParsedInstance::Rxos(i) => {
                    anyhow::ensure!(
                        i.n_docs() <= config.oracle_cap,
                        "oracle limited to {} documents, instance has {}",
                        config.oracle_cap,
                        i.n_docs()
                    );
                    let (perm, cost) = enumerate_optimum(i.n_docs(), |o| evaluate_rxos(i, o))?;
                    (perm, cost, 0)
                }
            };
            let ids: Vec<&String> = order.iter().map(|&s| &parsed.doc_ids()[s]).collect();
            let body = serde_json::json!({
                "optimal_order": ids,
                "optimal_cost": cost,
                "nodes": nodes,
            });
            emit(&cli.out, &format!("{}\n", serde_json::to_string_pretty(&body)?))
        }
        Command::Gen {
            kind,
            docs,
            topics,
            users,
            doc_density,
            user_density,
            k_min,
            k_max,
            max_frequency,
            gen_seed,
        } => {
            let kind = GenKind::parse(&kind)?;
            let params = GenParams {
                docs,
                topics,
                users,
                doc_density,
                user_density,
                k_min,
                k_max,
                max_frequency,
            };
            let instance = generate(kind, &params, gen_seed)?;
            emit(&cli.out, &serialize_instance(&ParsedInstance::Rdc(instance)))
        }
        Command::Bench { suite, report_out } => {
            let text = std::fs::read_to_string(&suite)
                .map_err(|e| anyhow::anyhow!("reading {}: {e}", suite.display()))?;
            let spec = SuiteSpec::parse(&text)?;
            let dir = suite
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from("."));
            let outcome = bench(&spec, &config, &dir)?;
            if let Some(path) = report_out {
                std::fs::write(&path, outcome.to_json())
                    .map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))?;
            }
            emit(&cli.out, &outcome.csv)
        }
        Command::Lpdump { instance, solved } => {
            let parsed = read_instance(&instance)?;
            let ParsedInstance::Rdc(inst) = &parsed else {
                anyhow::bail!("lpdump supports rdc instances (got {})", parsed.kind());
            };
            let (lp, _) = build_base::<f64>(inst);
            let mut text = lp.dump_lp_text();
            if solved {
                let fractional = solve_relaxation(inst, &config.relax_config())?;
                text.push_str("\n\\ generated knapsack-cover rows\n");
                text.push_str(&fractional.dump_generated_rows(inst));
                text.push_str(&format!("\\ objective {}\n", fractional.objective));
            }
            emit(&cli.out, &text)
        }
    }
}
