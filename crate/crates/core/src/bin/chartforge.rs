use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use chartforge::config::{BackendKind, PipelineConfig};
use chartforge::dualpath::data_prompting_prompt;
use chartforge::manifest::Stage;
use chartforge::pipeline::{Pipeline, RunOptions};
use chartforge::{Error, Result};

#[derive(Parser)]
#[command(
    name = "chartforge",
    version,
    about = "Synthetic chart corpus and benchmark pipeline"
)]
struct Cli {
    /// Pipeline configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured backend.
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendArg>,
    /// Worker threads for rendering.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Offline,
    Remote,
}

#[derive(Subcommand)]
enum Cmd {
    /// Runs one stage, or `all` of them in order.
    Run {
        /// templates, data, code, compose, render, filter, assemble,
        /// benchmark, evaluate, stats, or all
        stage: String,
        /// Continue an interrupted render.
        #[arg(long)]
        resume: bool,
        /// Short-answer predictions (NDJSON) for `evaluate`.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Chart-to-table predictions (NDJSON) for `evaluate`.
        #[arg(long)]
        tables: Option<PathBuf>,
        /// Review decisions (NDJSON) for `benchmark`.
        #[arg(long)]
        decisions: Option<PathBuf>,
    },
    /// Shows which stage manifests exist and whether they are current.
    Status,
    /// Prints the effective configuration and its hash.
    Config,
    /// Prints the two-step data-prompting prompt for a question.
    Prompt { question: String },
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(b) = cli.backend {
        cfg.backend.kind = match b {
            BackendArg::Offline => BackendKind::Offline,
            BackendArg::Remote => BackendKind::Remote,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Cmd::Prompt { question } => {
            println!("{}", data_prompting_prompt(question)?);
        }
        Cmd::Config => {
            let cfg = load_config(&cli)?;
            println!("# config hash: {}", cfg.config_hash());
            print!("{}", cfg.to_toml_string());
        }
        Cmd::Status => {
            let cfg = load_config(&cli)?;
            let pipeline = Pipeline::new(cfg, RunOptions::new(&cli.out_dir))?;
            println!("config hash {}", pipeline.config_hash());
            for (stage, header) in pipeline.status() {
                let state = match header {
                    None => "missing".to_string(),
                    Some(Ok(h)) => format!("complete ({} records)", h.count),
                    Some(Err(e)) => format!("stale: {e}"),
                };
                println!("{stage:<10} {state}");
            }
        }
        Cmd::Run {
            stage,
            resume,
            predictions,
            tables,
            decisions,
        } => {
            let cfg = load_config(&cli)?;
            let mut opts = RunOptions::new(&cli.out_dir);
            if let Some(j) = cli.jobs {
                opts.jobs = j.max(1);
            }
            opts.resume = *resume;
            opts.predictions = predictions.clone();
            opts.tables = tables.clone();
            opts.decisions = decisions.clone();
            let pipeline = Pipeline::new(cfg, opts)?;
            if stage == "all" {
                for (s, outcome) in pipeline.run_all()? {
                    println!("{s}: {outcome}");
                }
            } else {
                let s: Stage = stage.parse().map_err(Error::Config)?;
                println!("{s}: {}", pipeline.run(s)?);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
