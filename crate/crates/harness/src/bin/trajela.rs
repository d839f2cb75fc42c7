use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use trajela_harness::config::{ExperimentConfig, Mode, TauPolicy};
use trajela_harness::pipeline::{self, configured_portfolios};
use trajela_harness::portfolio::{self, Portfolio};
use trajela_harness::{HarnessError, Result};

#[derive(Parser)]
#[command(name = "trajela", version, about = "Trajectory-based landscape features for CMA-ES performance regression")]
struct Cli {
    /// Experiment configuration (JSON); missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory shared by all stages.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Portfolio name or JSON file `{name: [features]}`; repeatable.
    #[arg(long, global = true)]
    portfolio: Vec<String>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Optimize the threshold inside each training fold.
    #[arg(long, global = true)]
    nested_tau: bool,
    /// Start from the reduced desk-scale configuration.
    #[arg(long, global = true)]
    desk_scale: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    AllRuns,
    Median,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeatureSource {
    Traj,
    Global,
}

#[derive(Subcommand)]
enum Command {
    /// Run CMA-ES on every instance and record trajectories and snapshots.
    RunTrajectories,
    /// Pick the median run per instance from the recorded precisions.
    SelectMedian,
    /// Compute trajectory or global-sample features.
    Features {
        #[arg(value_enum)]
        source: FeatureSource,
    },
    /// Select correlation-filter and elimination portfolios.
    SelectFeatures,
    /// Cross-validate the forest pair for each portfolio.
    Train {
        /// Also write every fitted forest as JSON.
        #[arg(long)]
        save_models: bool,
    },
    /// Write the summary table from stored predictions.
    Report,
    /// Print instance metadata as JSON.
    Instances {
        #[arg(long)]
        reveal_optimum: bool,
    },
    /// All stages in order.
    Pipeline {
        #[arg(long)]
        save_models: bool,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_json_file(p)?,
        None if cli.desk_scale => ExperimentConfig::desk_scale(),
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(m) = cli.mode {
        cfg.mode = match m {
            ModeArg::AllRuns => Mode::AllRuns,
            ModeArg::Median => Mode::Median,
        };
    }
    if cli.nested_tau {
        cfg.tau_policy = TauPolicy::Nested;
    }
    if !cli.portfolio.is_empty() {
        let named: Vec<String> = portfolio::resolve(&cli.portfolio)?
            .iter()
            .filter(|p| !matches!(p, Portfolio::Custom { .. }))
            .map(|p| p.name().to_string())
            .collect();
        if !named.is_empty() {
            cfg.portfolios = named;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// The configured portfolios, or those given with `--portfolio`.
fn portfolios(cli: &Cli, cfg: &ExperimentConfig) -> Result<Vec<Portfolio>> {
    if cli.portfolio.is_empty() {
        configured_portfolios(cfg)
    } else {
        portfolio::resolve(&cli.portfolio)
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    let out = &cli.out;
    match &cli.command {
        Command::RunTrajectories => {
            let runs = pipeline::stage_run_trajectories(&cfg, out)?;
            log::info!("{} runs written to {}", runs.len(), out.display());
        }
        Command::SelectMedian => {
            let p = pipeline::load_precisions(out)?;
            let m = pipeline::stage_select_median(out, &p)?;
            log::info!("{} median runs", m.len());
        }
        Command::Features { source } => match source {
            FeatureSource::Traj => {
                let runs = pipeline::load_runs(&cfg, out)?;
                pipeline::stage_trajectory_features(&cfg, out, &runs)?;
            }
            FeatureSource::Global => {
                let mut sizes = cfg.global_sample_sizes.clone();
                sizes.sort_unstable();
                pipeline::stage_global_features(&cfg, out, &sizes)?;
            }
        },
        Command::SelectFeatures => {
            let table = pipeline::load_table(out)?;
            let sel = pipeline::stage_select_features(&cfg, out, &table, &portfolios(cli, &cfg)?)?;
            for (name, f) in sel {
                println!("{name}: {}", f.join(", "));
            }
        }
        Command::Train { save_models } => {
            let table = pipeline::load_table(out)?;
            let ps = portfolios(cli, &cfg)?;
            let selected = {
                let p = out.join(trajela_harness::io::PORTFOLIOS);
                if p.exists() {
                    trajela_harness::io::read_json(&p)?
                } else {
                    Default::default()
                }
            };
            pipeline::stage_train(&cfg, out, &table, &ps, &selected, *save_models)?;
        }
        Command::Report => {
            let cols = pipeline::stage_report(&cfg, out, &portfolios(cli, &cfg)?)?;
            print_summary(&cols);
        }
        Command::Instances { reveal_optimum } => {
            let meta = pipeline::instance_metadata(&cfg, *reveal_optimum)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&meta).map_err(|e| HarnessError::Config(e.to_string()))?
            );
        }
        Command::Pipeline { save_models } => {
            let s = pipeline::run_pipeline(&cfg, out, *save_models)?;
            print_summary(&s.columns);
        }
    }
    Ok(())
}

fn print_summary(cols: &[trajela_harness::report::PortfolioSummary]) {
    println!("{:<12} {:>12} {:>12} {:>12} {:>12}", "portfolio", "tau", "combined", "unscaled", "log");
    for c in cols {
        match &c.scores {
            Some(s) => println!(
                "{:<12} {:>12} {:>12.4} {:>12.4} {:>12.4}",
                c.name,
                s.tau.display(),
                s.rmse_combined,
                s.rmse_unscaled,
                s.rmse_log
            ),
            None => println!("{:<12} {:>12}", c.name, "NA"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
