use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use hurry_core::constellation::STATION_PRESETS;
use hurry_core::report::{write_run, write_sweep, write_table};
use hurry_core::scenario::{
    compare, sweep, PreparedScenario, ScenarioConfig, ScenarioError, SchedulerKind, BANDWIDTH_GRID,
    PRESETS,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_INCOMPLETE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "hurry",
    version,
    about = "Plan and simulate constellation data downloads"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheduler on a scenario.
    Run(RunArgs),
    /// Run several schedulers on the same scenario.
    Compare {
        #[command(flatten)]
        common: RunArgs,
        /// Comma-separated scheduler list; all five by default.
        #[arg(long, value_delimiter = ',')]
        schedulers: Vec<String>,
    },
    /// Run a GSL x ISL bandwidth grid.
    Sweep {
        #[command(flatten)]
        common: RunArgs,
        #[arg(long, value_delimiter = ',')]
        schedulers: Vec<String>,
        /// GSL bandwidths in Gbps.
        #[arg(long, value_delimiter = ',', default_values_t = BANDWIDTH_GRID)]
        gsl: Vec<f64>,
        /// ISL bandwidths in Gbps.
        #[arg(long, value_delimiter = ',', default_values_t = BANDWIDTH_GRID)]
        isl: Vec<f64>,
    },
    /// List built-in scenarios, or print one as JSON.
    Presets {
        /// Print this preset's scenario file.
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, env = "HURRY_OUT_DIR", default_value = "hurry-out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    scheduler: Option<String>,
    #[arg(long)]
    slot_cap: Option<usize>,
    /// Exit with status 3 when the completion target is missed.
    #[arg(long)]
    require_completion: bool,
}

/// Errors that map to the configuration exit status.
#[derive(Debug)]
struct ConfigProblem(String);

impl std::fmt::Display for ConfigProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigProblem {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigProblem(msg.into()).into()
}

fn scenario_error(e: ScenarioError) -> anyhow::Error {
    match e {
        ScenarioError::Simulation(_) => e.into(),
        other => config_error(other.to_string()),
    }
}

fn parse_scheduler(name: &str) -> anyhow::Result<SchedulerKind> {
    SchedulerKind::parse(name).ok_or_else(|| {
        let known: Vec<&str> = SchedulerKind::ALL.iter().map(|k| k.as_str()).collect();
        config_error(format!(
            "unknown scheduler {name:?}; expected one of {known:?}"
        ))
    })
}

fn parse_schedulers(names: &[String]) -> anyhow::Result<Vec<SchedulerKind>> {
    if names.is_empty() {
        return Ok(SchedulerKind::ALL.to_vec());
    }
    names.iter().map(|n| parse_scheduler(n)).collect()
}

impl RunArgs {
    fn load(&self) -> anyhow::Result<ScenarioConfig> {
        let mut config = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
                ScenarioConfig::from_json(&text)
                    .map_err(|e| config_error(format!("{}: {e}", path.display())))?
            }
            (None, Some(name)) => ScenarioConfig::preset(name).map_err(scenario_error)?,
            (None, None) => ScenarioConfig::preset("desk").map_err(scenario_error)?,
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(name) = &self.scheduler {
            config.scheduler = parse_scheduler(name)?;
        }
        if let Some(cap) = self.slot_cap {
            config.slot_cap = Some(cap);
        }
        if self.require_completion {
            config.require_completion = true;
        }
        config.validate().map_err(scenario_error)?;
        Ok(config)
    }
}

fn save_config(out: &Path, config: &ScenarioConfig) -> anyhow::Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    std::fs::write(out.join("scenario.json"), config.to_json() + "\n")
        .with_context(|| format!("writing into {}", out.display()))
}

fn fmt_time(t: Option<f64>) -> String {
    t.map_or_else(|| "incomplete".to_string(), |s| format!("{s} s"))
}

/// Returns whether every run met its completion target.
fn execute(command: Command) -> anyhow::Result<bool> {
    match command {
        Command::Presets { show: Some(name) } => {
            let config = ScenarioConfig::preset(&name).map_err(scenario_error)?;
            println!("{}", config.to_json());
            Ok(true)
        }
        Command::Presets { show: None } => {
            println!("scenarios: {}", PRESETS.join(", "));
            println!("shells: shell1, desk");
            println!("stations: {}", STATION_PRESETS.join(", "));
            println!(
                "schedulers: {}",
                SchedulerKind::ALL.map(|k| k.as_str()).join(", ")
            );
            Ok(true)
        }
        Command::Run(args) => {
            let config = args.load()?;
            let prepared = PreparedScenario::new(&config).map_err(scenario_error)?;
            let outcome = prepared.run(config.scheduler).map_err(scenario_error)?;
            save_config(&args.out, &config)?;
            let summary = write_run(&args.out, &prepared, &outcome)
                .with_context(|| format!("writing results to {}", args.out.display()))?;
            println!(
                "{}: {:.2}% delivered, completion {}, written to {}",
                summary.scheduler,
                summary.completion * 100.0,
                fmt_time(summary.completion_time_s),
                args.out.display()
            );
            Ok(!config.require_completion || outcome.reached_target())
        }
        Command::Compare { common, schedulers } => {
            let config = common.load()?;
            let kinds = parse_schedulers(&schedulers)?;
            let (prepared, outcomes) = compare(&config, &kinds).map_err(scenario_error)?;
            save_config(&common.out, &config)?;
            let mut summaries = Vec::new();
            for outcome in &outcomes {
                let dir = common.out.join(outcome.scheduler.as_str());
                summaries.push(write_run(&dir, &prepared, outcome)?);
            }
            write_table(&common.out, "comparison", &summaries)?;
            for s in &summaries {
                println!("{:>14}  {}", s.scheduler, fmt_time(s.completion_time_s));
            }
            Ok(!config.require_completion || outcomes.iter().all(|o| o.reached_target()))
        }
        Command::Sweep {
            common,
            schedulers,
            gsl,
            isl,
        } => {
            let config = common.load()?;
            let kinds = if schedulers.is_empty() {
                vec![config.scheduler]
            } else {
                parse_schedulers(&schedulers)?
            };
            if gsl.iter().chain(&isl).any(|&b| !(b > 0.0)) {
                return Err(config_error("bandwidths must be positive"));
            }
            let result = sweep(&config, &gsl, &isl, &kinds).map_err(scenario_error)?;
            save_config(&common.out, &config)?;
            let summaries = write_sweep(&common.out, &result)?;
            for s in &summaries {
                println!(
                    "gsl {:>5} isl {:>5} {:>14}  {}",
                    s.gsl_bandwidth_gbps,
                    s.isl_bandwidth_gbps,
                    s.scheduler,
                    fmt_time(s.completion_time_s)
                );
            }
            Ok(!config.require_completion || result.runs.iter().all(|(_, o)| o.reached_target()))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("completion target not reached");
            ExitCode::from(EXIT_INCOMPLETE)
        }
        Err(e) if e.downcast_ref::<ConfigProblem>().is_some() => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            log::error!("{e:#}");
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
