//! `musched` command-line front end.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use musched::harness::{
    self, baseline_rewards, evaluate_against_baseline, evaluation_pool, exhaustive_oracle, export_cdf,
    snr_ce_label, snr_ce_sweep, EvaluationReport, ExperimentConfig, Scenario, SNR_CE_SWEEP_DB,
};
use musched::nn::{load_checkpoint, save_checkpoint};
use musched::rng::tag;
use musched::Error;

#[derive(Parser)]
#[command(name = "musched", version, about = "MU-MIMO downlink scheduling lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Built-in profile the config file is layered on (tiny, desk, full).
    #[arg(long, default_value = "desk")]
    profile: String,
    /// TOML file overriding profile values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Self-play training; writes checkpoints and metrics.jsonl under --out.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Resume from this checkpoint's weights instead of a fresh init.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Greedy network versus PFTF on a fresh pool; writes report JSON and CDF files.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Run the channel-estimate SNR sweep (0, 5, 10, 20 dB, perfect).
        #[arg(long)]
        sweep: bool,
    },
    /// PFTF rewards on the evaluation pool.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive optimum versus PFTF (and optionally the network) on small scenarios.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-exports the normalized-ratio CDF of a saved evaluation report.
    ExportCdf {
        /// Report JSON written by `evaluate`.
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs the built-in invariant checks.
    Selfcheck {
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn load_config(c: &Common) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::profile(&c.profile)?;
    if let Some(path) = &c.config {
        cfg = ExperimentConfig::load(path, &cfg).map_err(|e| Failure::Config(e.to_string()))?;
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| runtime(Error::io(dir, e)))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let file = File::create(path).map_err(|e| runtime(Error::io(path, e)))?;
    serde_json::to_writer_pretty(BufWriter::new(file), value).map_err(runtime)
}

fn train(common: &Common, out: &Path, init: Option<&Path>) -> CliResult<()> {
    let cfg = load_config(common)?;
    create_dir(out)?;
    fs::write(out.join("config.toml"), cfg.to_toml()?).map_err(|e| runtime(Error::io(out, e)))?;
    let metrics_path = out.join("metrics.jsonl");
    let mut metrics = File::create(&metrics_path).map_err(|e| runtime(Error::io(&metrics_path, e)))?;
    let initial = match init {
        Some(p) => Some(load_checkpoint(p)?),
        None => None,
    };
    let outcome = harness::train::run_training_from(&cfg, initial, |m, params, adam| {
        let line = serde_json::to_string(m).map_err(|e| Error::config(e.to_string()))?;
        writeln!(metrics, "{line}").map_err(|e| Error::io(&metrics_path, e))?;
        eprintln!(
            "iteration {:>3}  holdout reward {:.5}  self-play reward {}  loss {}  {:.1} s",
            m.iteration,
            m.holdout_mean_reward,
            m.mean_self_play_reward.map_or("-".into(), |r| format!("{r:.5}")),
            m.final_epoch_loss.map_or("-".into(), |l| format!("{l:.4}")),
            m.elapsed_s
        );
        save_checkpoint(&out.join(format!("iter{:03}.ckpt", m.iteration)), params, Some(adam))
    })?;
    save_checkpoint(&out.join("final.ckpt"), &outcome.params, Some(&outcome.adam))?;
    let first = outcome.metrics.first().map_or(0.0, |m| m.holdout_mean_reward);
    let last = outcome.metrics.last().map_or(0.0, |m| m.holdout_mean_reward);
    println!(
        "holdout mean reward {first:.6} -> {last:.6} ({:+.2}%)",
        100.0 * (last / first - 1.0)
    );
    Ok(())
}

fn summarise(label: &str, r: &EvaluationReport) {
    println!(
        "{label}: median ratio {:.4}, mean ratio {:.4}, mean reward {:.5} vs PFTF {:.5}, {} env(s) with zero baseline",
        r.median_ratio, r.mean_ratio, r.mean_learned_reward, r.mean_baseline_reward, r.zero_baseline
    );
}

fn evaluate(common: &Common, checkpoint: &Path, out: &Path, sweep: bool) -> CliResult<()> {
    let cfg = load_config(common)?;
    let params = load_checkpoint(checkpoint)?.params;
    create_dir(out)?;
    let reports = if sweep {
        snr_ce_sweep(&cfg, &params, &SNR_CE_SWEEP_DB)?
    } else {
        let pool = evaluation_pool(&cfg)?;
        vec![(snr_ce_label(cfg.scenario.impairments.snr_ce_db), evaluate_against_baseline(&cfg, &params, &pool)?)]
    };
    for (label, report) in &reports {
        summarise(label, report);
        write_json(&out.join(format!("{label}.json")), report)?;
        export_cdf(&report.ratios(), &out.join(format!("{label}.csv")))?;
    }
    Ok(())
}

fn baseline(common: &Common, out: Option<&Path>) -> CliResult<()> {
    let cfg = load_config(common)?;
    let rewards = baseline_rewards(&cfg, &evaluation_pool(&cfg)?)?;
    let mut sorted = rewards.clone();
    sorted.sort_by(f64::total_cmp);
    println!(
        "PFTF over {} environments: mean reward {:.6}, median {:.6}",
        rewards.len(),
        rewards.iter().sum::<f64>() / rewards.len() as f64,
        harness::median(&sorted)
    );
    if let Some(path) = out {
        write_json(path, &rewards)?;
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct OracleRow {
    index: usize,
    oracle: f64,
    baseline: f64,
    learned: Option<f64>,
}

fn oracle(common: &Common, checkpoint: Option<&Path>, out: Option<&Path>) -> CliResult<()> {
    let cfg = load_config(common)?;
    let scenario = Scenario::new(&cfg)?;
    let params = match checkpoint {
        Some(p) => Some(load_checkpoint(p)?.params),
        None => None,
    };
    let envs = scenario.pool(cfg.seed, &[tag::ORACLE_ENV], cfg.evaluation.n_envs)?;
    let mut rows = Vec::with_capacity(envs.len());
    for (index, env) in envs.iter().enumerate() {
        let problem = scenario.problem(env);
        let best = exhaustive_oracle(&problem, cfg.evaluation.oracle_budget as u128)?;
        let base = musched::baseline::pftf_schedule(env, &scenario.model)?;
        let learned = match &params {
            Some(p) => Some(scenario.greedy(p, &cfg.features, env)?.1),
            None => None,
        };
        rows.push(OracleRow {
            index,
            oracle: best.reward,
            baseline: problem.reward(&base)?,
            learned,
        });
    }
    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&OracleRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    println!("environments: {}", rows.len());
    println!("mean oracle reward   {:.6}", mean(&|r| r.oracle));
    println!("mean PFTF reward     {:.6}  ({:.2}% of oracle)", mean(&|r| r.baseline), 100.0 * mean(&|r| r.baseline) / mean(&|r| r.oracle));
    if params.is_some() {
        let l = mean(&|r| r.learned.unwrap_or(0.0));
        println!("mean greedy reward   {l:.6}  ({:.2}% of oracle)", 100.0 * l / mean(&|r| r.oracle));
    }
    if let Some(path) = out {
        write_json(path, &rows)?;
    }
    Ok(())
}

fn export(report: &Path, out: &Path) -> CliResult<()> {
    let text = fs::read_to_string(report).map_err(|e| runtime(Error::io(report, e)))?;
    let report: EvaluationReport = serde_json::from_str(&text).map_err(|e| {
        runtime(Error::Format {
            what: "evaluation report",
            detail: e.to_string(),
        })
    })?;
    export_cdf(&report.ratios(), out)?;
    Ok(())
}

fn selfcheck(common: &Common) -> CliResult<()> {
    let cfg = load_config(common)?;
    let results = harness::selfcheck::run_selfcheck(&cfg);
    let mut failed = 0;
    for c in &results {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(Failure::Runtime(format!("{failed} of {} checks failed", results.len())));
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Train { common, out, checkpoint } => train(common, out, checkpoint.as_deref()),
        Command::Evaluate { common, checkpoint, out, sweep } => evaluate(common, checkpoint, out, *sweep),
        Command::Baseline { common, out } => baseline(common, out.as_deref()),
        Command::Oracle { common, checkpoint, out } => oracle(common, checkpoint.as_deref(), out.as_deref()),
        Command::ExportCdf { report, out } => export(report, out),
        Command::Selfcheck { common } => selfcheck(common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
