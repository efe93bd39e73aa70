//! `procforge <stage> [--config PATH] [--seed N] [--strict] [stage flags]`
//!
//! Flags override the config file, which overrides built-in defaults.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use procforge::pipeline::{run_stage, PipelineConfig, PipelineError, SampleSourceKind, Stage};

#[derive(Parser, Debug)]
#[command(name = "procforge", version, about = "Mine precedence rules from transition samples and repair step orders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Pipeline config, TOML or JSON (by extension).
    #[arg(long, global = true, default_value = "pipeline.toml")]
    config: PathBuf,
    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Turn skippable problems (rejected sample lines, inapplicable
    /// perturbations) into errors.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build one MDP template per object.
    Template,
    /// Produce transition samples per template.
    Sample(SampleArgs),
    /// Aggregate samples into tabular world models.
    Aggregate,
    /// Extract preconditions and causal rules.
    Extract(ExtractArgs),
    /// Instantiate causal rules on the draft procedure's steps.
    Map,
    /// Reorder the draft to satisfy its constraints.
    Repair(RepairArgs),
    /// Score draft and repaired orders against the ground truth.
    Evaluate,
    /// Build a draft by misordering the ground truth.
    Perturb(PerturbArgs),
    /// Rank repair weight settings over the configured grid.
    Tune,
    /// template, sample, aggregate, extract, perturb, map, repair, evaluate.
    All(AllArgs),
}

#[derive(Args, Debug, Default)]
struct SampleArgs {
    /// oracle, file or endpoint.
    #[arg(long)]
    source: Option<SampleSourceKind>,
    /// Samples per template.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reward_flip_rate: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct ExtractArgs {
    #[arg(long)]
    theta_hi: Option<f64>,
    #[arg(long)]
    theta_lo: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    epsilon0: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct RepairArgs {
    #[arg(long)]
    lambda_pos: Option<f64>,
    #[arg(long)]
    lambda_edge: Option<f64>,
    #[arg(long)]
    lambda_cluster: Option<f64>,
    #[arg(long)]
    lambda_raw: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct PerturbArgs {
    #[arg(long)]
    n_misorderings: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct AllArgs {
    #[command(flatten)]
    sample: SampleArgs,
    #[command(flatten)]
    extract: ExtractArgs,
    #[command(flatten)]
    repair: RepairArgs,
    #[command(flatten)]
    perturb: PerturbArgs,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl SampleArgs {
    fn apply(self, cfg: &mut PipelineConfig) {
        set(&mut cfg.sampling.source, self.source);
        set(&mut cfg.sampling.n, self.n);
        set(&mut cfg.sampling.reward_flip_rate, self.reward_flip_rate);
    }
}

impl ExtractArgs {
    fn apply(self, cfg: &mut PipelineConfig) {
        set(&mut cfg.extraction.theta_hi, self.theta_hi);
        set(&mut cfg.extraction.theta_lo, self.theta_lo);
        set(&mut cfg.extraction.gamma, self.gamma);
        set(&mut cfg.extraction.epsilon0, self.epsilon0);
    }
}

impl RepairArgs {
    fn apply(self, cfg: &mut PipelineConfig) {
        set(&mut cfg.repair.lambda_pos, self.lambda_pos);
        set(&mut cfg.repair.lambda_edge, self.lambda_edge);
        set(&mut cfg.repair.lambda_cluster, self.lambda_cluster);
        set(&mut cfg.repair.lambda_raw, self.lambda_raw);
        set(&mut cfg.search.restarts, self.restarts);
    }
}

impl PerturbArgs {
    fn apply(self, cfg: &mut PipelineConfig) {
        set(&mut cfg.perturb.n_misorderings, self.n_misorderings);
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let (mut cfg, mut bytes) = PipelineConfig::load(&cli.common.config)?;
    let stage = match cli.command {
        Command::Template => Stage::Template,
        Command::Sample(a) => {
            a.apply(&mut cfg);
            Stage::Sample
        }
        Command::Aggregate => Stage::Aggregate,
        Command::Extract(a) => {
            a.apply(&mut cfg);
            Stage::Extract
        }
        Command::Map => Stage::Map,
        Command::Repair(a) => {
            a.apply(&mut cfg);
            Stage::Repair
        }
        Command::Evaluate => Stage::Evaluate,
        Command::Perturb(a) => {
            a.apply(&mut cfg);
            Stage::Perturb
        }
        Command::Tune => Stage::Tune,
        Command::All(a) => {
            a.sample.apply(&mut cfg);
            a.extract.apply(&mut cfg);
            a.repair.apply(&mut cfg);
            a.perturb.apply(&mut cfg);
            Stage::All
        }
    };
    set(&mut cfg.seed, cli.common.seed);
    cfg.validate()
        .map_err(|m| PipelineError::invalid(&cli.common.config, m))?;
    // manifests hash the effective configuration, overrides included
    bytes.extend_from_slice(&serde_json::to_vec(&cfg).expect("config serializes"));
    let report = run_stage(stage, &cfg, &bytes, cli.common.strict)?;
    for a in &report.artifacts {
        println!("wrote {}", a.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
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
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
