//! Scenario files, presets, and the run / compare / sweep drivers.

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{CoDld, CoDldConfig, CoDldModify, GreedyIsl, GreedyNoIsl};
use crate::constellation::{
    build_contact_table, generate_walker_delta, station_preset, BandwidthProfile, ConfigError,
    ConstellationTopology, ContactTable, GroundStation, ShellConfig,
};
use crate::flowgraph::{GenerationSchedule, GraphOptions};
use crate::planner::{
    adaptive_horizon, HorizonOutcome, HurryScheduler, PlannerConfig, PlanningProblem,
};
use crate::simulator::{
    run, Environment, FaultModel, MetricsLog, Scheduler, SimError, StopCondition,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShellSpec {
    Preset(String),
    Custom(ShellConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StationSpec {
    Preset(String),
    Custom(Vec<GroundStation>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GenerationSpec {
    /// Every satellite produces `per_sat_gb` gigabytes spread over the
    /// first `window_s` seconds.
    FixedVolume { per_sat_gb: f64, window_s: f64 },
    /// Every satellite produces `rate_mbps` for `duration_s` seconds.
    Continuous { rate_mbps: f64, duration_s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerKind {
    Hurry,
    Codld,
    CodldModify,
    GreedyIsl,
    GreedyNoIsl,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 5] = [
        Self::Hurry,
        Self::CodldModify,
        Self::Codld,
        Self::GreedyIsl,
        Self::GreedyNoIsl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hurry => "hurry",
            Self::Codld => "codld",
            Self::CodldModify => "codld_modify",
            Self::GreedyIsl => "greedy_isl",
            Self::GreedyNoIsl => "greedy_no_isl",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub shell: ShellSpec,
    pub stations: StationSpec,
    pub slot_seconds: f64,
    pub gsl_bandwidth_gbps: f64,
    pub isl_bandwidth_gbps: f64,
    pub station_uplink_gbps: f64,
    pub generation: GenerationSpec,
    pub scheduler: SchedulerKind,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub faults: FaultModel,
    /// Seeds the fault injector.
    #[serde(default)]
    pub seed: u64,
    /// Shell rotation at slot 0, in seconds past the constellation epoch.
    #[serde(default)]
    pub epoch_s: f64,
    /// Simulation length limit. Defaults to ten times the planner's
    /// horizon for the scenario.
    #[serde(default)]
    pub slot_cap: Option<usize>,
    /// Delivered fraction reported as the completion time.
    #[serde(default = "one")]
    pub completion_fraction: f64,
    /// Treat a run that misses `completion_fraction` as a failure.
    #[serde(default)]
    pub require_completion: bool,
    /// CoDld contact-time lookahead in slots. Defaults to one orbital period.
    #[serde(default)]
    pub codld_lookahead: Option<usize>,
}

fn one() -> f64 {
    1.0
}

pub const PRESETS: &[&str] = &["desk", "table2-cell", "fig6-continuous", "shell1"];

impl ScenarioConfig {
    /// Built-in scenarios. `desk` is the 8x8 reference; `table2-cell` is
    /// the fixed-volume bandwidth-grid cell; `fig6-continuous` the
    /// continuous-generation run; `shell1` the full 72x22 geometry.
    pub fn preset(name: &str) -> Result<Self, ScenarioError> {
        let desk = Self {
            name: "desk".into(),
            shell: ShellSpec::Preset("desk".into()),
            stations: StationSpec::Preset("shanghai".into()),
            slot_seconds: 1.0,
            gsl_bandwidth_gbps: 1.0,
            isl_bandwidth_gbps: 1.0,
            station_uplink_gbps: 100.0,
            generation: GenerationSpec::FixedVolume {
                per_sat_gb: 0.25,
                window_s: 10.0,
            },
            scheduler: SchedulerKind::Hurry,
            planner: PlannerConfig::default(),
            faults: FaultModel::default(),
            seed: 0,
            epoch_s: 0.0,
            slot_cap: Some(60_000),
            completion_fraction: 1.0,
            require_completion: false,
            codld_lookahead: None,
        };
        match name {
            "desk" => Ok(desk),
            "table2-cell" => Ok(Self {
                name: "table2-cell".into(),
                completion_fraction: 0.99,
                ..desk
            }),
            "fig6-continuous" => Ok(Self {
                name: "fig6-continuous".into(),
                stations: StationSpec::Preset("cities4".into()),
                generation: GenerationSpec::Continuous {
                    rate_mbps: 400.0,
                    duration_s: 30.0,
                },
                slot_cap: Some(2_000),
                ..desk
            }),
            "shell1" => Ok(Self {
                name: "shell1".into(),
                shell: ShellSpec::Preset("shell1".into()),
                stations: StationSpec::Preset("cities4".into()),
                generation: GenerationSpec::FixedVolume {
                    per_sat_gb: 0.01,
                    window_s: 10.0,
                },
                planner: PlannerConfig {
                    horizon_cap: Some(300),
                    ..PlannerConfig::default()
                },
                slot_cap: Some(600),
                ..desk
            }),
            other => Err(ConfigError::UnknownPreset(other.to_string()).into()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn shell_config(&self) -> Result<ShellConfig, ScenarioError> {
        match &self.shell {
            ShellSpec::Preset(name) => Ok(ShellConfig::preset(name)?),
            ShellSpec::Custom(cfg) => Ok(*cfg),
        }
    }

    pub fn station_list(&self) -> Result<Vec<GroundStation>, ScenarioError> {
        let stations = match &self.stations {
            StationSpec::Preset(name) => {
                station_preset(name).ok_or_else(|| ConfigError::UnknownPreset(name.clone()))?
            }
            StationSpec::Custom(list) => list
                .iter()
                .map(|s| GroundStation::new(s.id, s.latitude_deg, s.longitude_deg))
                .collect::<Result<_, _>>()?,
        };
        let mut ids: Vec<usize> = stations.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        if ids.iter().enumerate().any(|(k, &id)| k != id) {
            return Err(ScenarioError::Invalid(
                "station ids must be 0..m-1 without gaps".into(),
            ));
        }
        Ok(stations)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |msg: String| Err(ScenarioError::Invalid(msg));
        self.shell_config()?.validate()?;
        if self.station_list()?.is_empty() {
            return bad("at least one ground station is required".into());
        }
        if !(self.slot_seconds > 0.0 && self.slot_seconds.is_finite()) {
            return bad(format!(
                "slot_seconds {} must be positive",
                self.slot_seconds
            ));
        }
        for (name, v) in [
            ("gsl_bandwidth_gbps", self.gsl_bandwidth_gbps),
            ("isl_bandwidth_gbps", self.isl_bandwidth_gbps),
            ("station_uplink_gbps", self.station_uplink_gbps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} {v} must be positive"));
            }
        }
        let (a, b) = match self.generation {
            GenerationSpec::FixedVolume {
                per_sat_gb,
                window_s,
            } => (per_sat_gb, window_s),
            GenerationSpec::Continuous {
                rate_mbps,
                duration_s,
            } => (rate_mbps, duration_s),
        };
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return bad("generation parameters must be positive".into());
        }
        if !(self.completion_fraction > 0.0 && self.completion_fraction <= 1.0) {
            return bad(format!(
                "completion_fraction {} outside (0, 1]",
                self.completion_fraction
            ));
        }
        if self.slot_cap == Some(0) {
            return bad("slot_cap must be positive".into());
        }
        self.faults.validate().map_err(ScenarioError::Invalid)?;
        self.planner
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn bandwidth(&self) -> BandwidthProfile {
        BandwidthProfile::from_gbps(
            self.gsl_bandwidth_gbps,
            self.isl_bandwidth_gbps,
            self.station_uplink_gbps,
            self.slot_seconds,
        )
    }

    pub fn generation_schedule(&self, sat_count: usize) -> GenerationSchedule {
        let slots = |secs: f64| ((secs / self.slot_seconds).ceil() as usize).max(1);
        match self.generation {
            GenerationSpec::FixedVolume {
                per_sat_gb,
                window_s,
            } => {
                let units = (per_sat_gb * 8000.0).round() as u64;
                GenerationSchedule::fixed_volume(sat_count, units, slots(window_s))
            }
            GenerationSpec::Continuous {
                rate_mbps,
                duration_s,
            } => {
                let per_slot = (rate_mbps * self.slot_seconds).round() as u64;
                GenerationSchedule::continuous(sat_count, per_slot, slots(duration_s))
            }
        }
    }

    /// Scenario with one bandwidth cell changed.
    pub fn with_bandwidths(&self, gsl_gbps: f64, isl_gbps: f64) -> Self {
        Self {
            gsl_bandwidth_gbps: gsl_gbps,
            isl_bandwidth_gbps: isl_gbps,
            ..self.clone()
        }
    }
}

/// Geometry, contacts and workload shared by every scheduler run on one
/// scenario.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    pub config: ScenarioConfig,
    pub topology: ConstellationTopology,
    pub contacts: ContactTable,
    pub generation: GenerationSchedule,
    pub slot_cap: usize,
    pub planned_horizon: HorizonOutcome,
}

impl PreparedScenario {
    pub fn new(config: &ScenarioConfig) -> Result<Self, ScenarioError> {
        config.validate()?;
        let shell = config.shell_config()?;
        let stations = config.station_list()?;
        let topology = generate_walker_delta(shell, config.epoch_s)?;
        let generation = config.generation_schedule(topology.len());
        let bandwidth = config.bandwidth();
        let search_cap = config
            .planner
            .horizon_cap
            .unwrap_or(16 * generation.window().max(1));
        let initial_len = search_cap.max(config.slot_cap.unwrap_or(0));
        let mut contacts = build_contact_table(
            &topology,
            &stations,
            initial_len,
            config.slot_seconds,
            bandwidth,
        );
        let zeros = vec![0; topology.len()];
        let problem = PlanningProblem {
            contacts: &contacts,
            start: 0,
            generation: &generation,
            initial_queues: &zeros,
            options: GraphOptions {
                storage_cap: config.planner.storage_cap,
            },
        };
        let planned_horizon = adaptive_horizon(&problem, search_cap)
            .map_err(|e| ScenarioError::Simulation(e.into()))?;
        let slot_cap = config
            .slot_cap
            .unwrap_or(10 * planned_horizon.horizon().max(1));
        if slot_cap > contacts.horizon() {
            contacts = build_contact_table(
                &topology,
                &stations,
                slot_cap,
                config.slot_seconds,
                bandwidth,
            );
        }
        info!(
            "{}: {} satellites, {} stations, {} units, horizon {:?}, cap {slot_cap}",
            config.name,
            topology.len(),
            stations.len(),
            generation.total(),
            planned_horizon
        );
        Ok(Self {
            config: config.clone(),
            topology,
            contacts,
            generation,
            slot_cap,
            planned_horizon,
        })
    }

    /// Same geometry under a different bandwidth cell.
    pub fn repriced(&self, gsl_gbps: f64, isl_gbps: f64) -> Result<Self, ScenarioError> {
        let config = self.config.with_bandwidths(gsl_gbps, isl_gbps);
        if config.slot_cap.is_none() {
            return Self::new(&config);
        }
        config.validate()?;
        let contacts = self.contacts.with_bandwidth(config.bandwidth());
        let zeros = vec![0; self.topology.len()];
        let problem = PlanningProblem {
            contacts: &contacts,
            start: 0,
            generation: &self.generation,
            initial_queues: &zeros,
            options: GraphOptions {
                storage_cap: config.planner.storage_cap,
            },
        };
        let cap = config
            .planner
            .horizon_cap
            .unwrap_or(16 * self.generation.window().max(1));
        let planned_horizon =
            adaptive_horizon(&problem, cap).map_err(|e| ScenarioError::Simulation(e.into()))?;
        Ok(Self {
            config,
            contacts,
            planned_horizon,
            ..self.clone()
        })
    }

    pub fn codld_config(&self) -> CoDldConfig {
        let lookahead = self.config.codld_lookahead.unwrap_or_else(|| {
            (self.topology.config().period_s() / self.config.slot_seconds).round() as usize
        });
        CoDldConfig {
            lookahead: lookahead.max(1),
        }
    }

    pub fn scheduler(&self, kind: SchedulerKind) -> Box<dyn Scheduler> {
        match kind {
            SchedulerKind::Hurry => Box::new(HurryScheduler::new(self.config.planner)),
            SchedulerKind::Codld => Box::new(CoDld::new(self.codld_config())),
            SchedulerKind::CodldModify => Box::new(CoDldModify::new(self.codld_config())),
            SchedulerKind::GreedyIsl => Box::new(GreedyIsl::new()),
            SchedulerKind::GreedyNoIsl => Box::new(GreedyNoIsl),
        }
    }

    pub fn environment(&self) -> Environment<'_> {
        Environment {
            contacts: &self.contacts,
            generation: &self.generation,
        }
    }

    pub fn run(&self, kind: SchedulerKind) -> Result<RunOutcome, ScenarioError> {
        let mut scheduler = self.scheduler(kind);
        self.run_with(scheduler.as_mut(), kind)
    }

    pub fn run_with(
        &self,
        scheduler: &mut dyn Scheduler,
        kind: SchedulerKind,
    ) -> Result<RunOutcome, ScenarioError> {
        let faults = FaultModel {
            rng_seed: self.config.seed,
            ..self.config.faults
        };
        let log = run(
            &self.environment(),
            scheduler,
            &faults,
            StopCondition {
                slot_cap: self.slot_cap,
            },
        )?;
        Ok(RunOutcome {
            scheduler: kind,
            completion_fraction: self.config.completion_fraction,
            log,
        })
    }
}

/// One scheduler's run on one scenario.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub scheduler: SchedulerKind,
    pub completion_fraction: f64,
    pub log: MetricsLog,
}

impl RunOutcome {
    /// Slots elapsed until the configured fraction had reached the ground.
    pub fn completion_slot(&self) -> Option<usize> {
        self.log
            .time_to_fraction(self.completion_fraction)
            .map(|s| s + 1)
    }

    pub fn reached_target(&self) -> bool {
        self.completion_slot().is_some()
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunOutcome, ScenarioError> {
    PreparedScenario::new(config)?.run(config.scheduler)
}

/// Runs each scheduler on one shared contact table.
pub fn compare(
    config: &ScenarioConfig,
    schedulers: &[SchedulerKind],
) -> Result<(PreparedScenario, Vec<RunOutcome>), ScenarioError> {
    let prepared = PreparedScenario::new(config)?;
    let outcomes = schedulers
        .par_iter()
        .map(|&kind| prepared.run(kind))
        .collect::<Result<_, _>>()?;
    Ok((prepared, outcomes))
}

/// Bandwidth-grid results: one prepared scenario per cell, and every
/// scheduler's run on it in grid order.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub cells: Vec<PreparedScenario>,
    /// (cell index, outcome)
    pub runs: Vec<(usize, RunOutcome)>,
}

pub const BANDWIDTH_GRID: [f64; 3] = [1.0, 5.0, 10.0];

/// Every (gsl, isl) pair of the grid for every scheduler, runs in
/// parallel, results in grid order.
pub fn sweep(
    config: &ScenarioConfig,
    gsl_grid: &[f64],
    isl_grid: &[f64],
    schedulers: &[SchedulerKind],
) -> Result<Sweep, ScenarioError> {
    let base = PreparedScenario::new(config)?;
    let pairs: Vec<(f64, f64)> = gsl_grid
        .iter()
        .flat_map(|&g| isl_grid.iter().map(move |&i| (g, i)))
        .collect();
    let cells: Vec<PreparedScenario> = pairs
        .par_iter()
        .map(|&(g, i)| base.repriced(g, i))
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, SchedulerKind)> = (0..cells.len())
        .flat_map(|c| schedulers.iter().map(move |&k| (c, k)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(c, kind)| Ok((c, cells[c].run(kind)?)))
        .collect::<Result<_, ScenarioError>>()?;
    Ok(Sweep { cells, runs })
}
