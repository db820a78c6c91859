//! CSV series and JSON summaries for runs, comparisons and sweeps.
//!
//! Times are in seconds, data in Mb, rates in Mbps.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::planner::HorizonOutcome;
use crate::scenario::{PreparedScenario, RunOutcome, Sweep};
use crate::simulator::{latency_cdf, quartile_times};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub scenario: String,
    pub scheduler: String,
    pub seed: u64,
    pub satellites: usize,
    pub stations: usize,
    pub slot_seconds: f64,
    pub gsl_bandwidth_gbps: f64,
    pub isl_bandwidth_gbps: f64,
    pub generated_mb: u64,
    pub delivered_mb: u64,
    pub dropped_mb: u64,
    pub retransmitted_mb: u64,
    pub left_on_satellites_mb: u64,
    pub completion: f64,
    pub completion_target: f64,
    /// Time until `completion_target` of the data reached the ground.
    pub completion_time_s: Option<f64>,
    /// First time with every satellite queue empty after generation ended.
    pub t_download_s: Option<f64>,
    pub planned_horizon_slots: usize,
    pub fully_plannable: bool,
    pub simulated_slots: usize,
    pub mean_throughput_mbps: f64,
    /// Mean throughput while data is still being generated.
    pub steady_throughput_mbps: f64,
    pub latency_mean_s: Option<f64>,
    pub latency_p50_s: Option<f64>,
    pub latency_p95_s: Option<f64>,
    pub quartile_durations_s: [Option<f64>; 4],
    pub replans: usize,
    pub plan_renewals: usize,
    pub rejected_actions: usize,
    pub voided_actions: usize,
}

pub fn summarize(prepared: &PreparedScenario, outcome: &RunOutcome) -> RunSummary {
    let log = &outcome.log;
    let cfg = &prepared.config;
    let secs = |slots: usize| slots as f64 * cfg.slot_seconds;
    let rate = |units_per_slot: f64| units_per_slot / cfg.slot_seconds;
    let quartiles = quartile_times(log);
    let window = prepared.generation.window().max(1);
    RunSummary {
        schema_version: SCHEMA_VERSION,
        scenario: cfg.name.clone(),
        scheduler: outcome.scheduler.as_str().to_string(),
        seed: cfg.seed,
        satellites: prepared.contacts.sat_count(),
        stations: prepared.contacts.station_count(),
        slot_seconds: cfg.slot_seconds,
        gsl_bandwidth_gbps: cfg.gsl_bandwidth_gbps,
        isl_bandwidth_gbps: cfg.isl_bandwidth_gbps,
        generated_mb: log.total_generated,
        delivered_mb: log.delivered,
        dropped_mb: log.dropped,
        retransmitted_mb: log.retransmitted,
        left_on_satellites_mb: log.left_on_satellites,
        completion: log.completion(),
        completion_target: outcome.completion_fraction,
        completion_time_s: outcome.completion_slot().map(secs),
        t_download_s: log.t_download.map(secs),
        planned_horizon_slots: prepared.planned_horizon.horizon(),
        fully_plannable: matches!(prepared.planned_horizon, HorizonOutcome::Deliverable(_)),
        simulated_slots: log.final_slot,
        mean_throughput_mbps: rate(log.mean_throughput(0, log.final_slot)),
        steady_throughput_mbps: rate(log.mean_throughput(0, window)),
        latency_mean_s: log.mean_latency().map(|l| l * cfg.slot_seconds),
        latency_p50_s: log.latency_quantile(0.5).map(secs),
        latency_p95_s: log.latency_quantile(0.95).map(secs),
        quartile_durations_s: quartiles.durations.map(|d| d.map(secs)),
        replans: log.replans,
        plan_renewals: log.plan_renewals,
        rejected_actions: log.rejected_actions,
        voided_actions: log.voided_actions,
    }
}

fn csv_error(e: csv::Error) -> io::Error {
    io::Error::new(io::ErrorKind::Other, e)
}

fn write_csv<R: Serialize>(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = R>,
) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_error)?;
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::from)?;
    text.push('\n');
    fs::write(path, text)
}

/// Writes throughput.csv, progress.csv, queues.csv, latency.csv and
/// summary.json into `dir`.
pub fn write_run(
    dir: &Path,
    prepared: &PreparedScenario,
    outcome: &RunOutcome,
) -> io::Result<RunSummary> {
    fs::create_dir_all(dir)?;
    let log = &outcome.log;
    let dt = prepared.config.slot_seconds;

    write_csv(
        &dir.join("throughput.csv"),
        &["slot", "time_s", "delivered_mb", "throughput_mbps"],
        log.throughput
            .iter()
            .enumerate()
            .map(|(t, &u)| (t, t as f64 * dt, u, u as f64 / dt)),
    )?;
    write_csv(
        &dir.join("progress.csv"),
        &["slot", "end_time_s", "cumulative_mb", "fraction"],
        log.cumulative_delivered()
            .into_iter()
            .zip(log.progress())
            .enumerate()
            .map(|(t, (c, f))| (t, (t + 1) as f64 * dt, c, f)),
    )?;
    let n = prepared.contacts.sat_count();
    let mut header = vec!["slot".to_string(), "time_s".to_string()];
    header.extend((0..n).map(|i| format!("sat_{i}_mb")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        &dir.join("queues.csv"),
        &header,
        log.queue_history.iter().enumerate().map(|(t, q)| {
            let mut row = vec![t.to_string(), (t as f64 * dt).to_string()];
            row.extend(q.iter().map(u64::to_string));
            row
        }),
    )?;
    let cdf = latency_cdf(log);
    write_csv(
        &dir.join("latency.csv"),
        &[
            "latency_slots",
            "latency_s",
            "units_mb",
            "cumulative_fraction",
        ],
        log.latency_histogram
            .iter()
            .zip(cdf)
            .map(|((&l, &count), (_, f))| (l, l as f64 * dt, count, f)),
    )?;
    let summary = summarize(prepared, outcome);
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

const TABLE_HEADER: &[&str] = &[
    "scheduler",
    "gsl_gbps",
    "isl_gbps",
    "completion",
    "completion_time_s",
    "t_download_s",
    "mean_throughput_mbps",
    "steady_throughput_mbps",
    "latency_p50_s",
    "latency_p95_s",
    "q1_s",
    "q2_s",
    "q3_s",
    "q4_s",
    "replans",
];

#[allow(clippy::type_complexity)]
fn table_row(
    s: &RunSummary,
) -> (
    &str,
    f64,
    f64,
    f64,
    Option<f64>,
    Option<f64>,
    f64,
    f64,
    Option<f64>,
    Option<f64>,
    Option<f64>,
    Option<f64>,
    Option<f64>,
    Option<f64>,
    usize,
) {
    let q = s.quartile_durations_s;
    (
        &s.scheduler,
        s.gsl_bandwidth_gbps,
        s.isl_bandwidth_gbps,
        s.completion,
        s.completion_time_s,
        s.t_download_s,
        s.mean_throughput_mbps,
        s.steady_throughput_mbps,
        s.latency_p50_s,
        s.latency_p95_s,
        q[0],
        q[1],
        q[2],
        q[3],
        s.replans,
    )
}

#[derive(Serialize)]
struct Table<'a> {
    schema_version: u32,
    rows: &'a [RunSummary],
}

/// comparison.csv / comparison.json with one row per scheduler.
pub fn write_table(dir: &Path, stem: &str, summaries: &[RunSummary]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(
        &dir.join(format!("{stem}.csv")),
        TABLE_HEADER,
        summaries.iter().map(table_row),
    )?;
    write_json(
        &dir.join(format!("{stem}.json")),
        &Table {
            schema_version: SCHEMA_VERSION,
            rows: summaries,
        },
    )
}

/// Per-cell run directories plus a merged sweep table.
pub fn write_sweep(dir: &Path, sweep: &Sweep) -> io::Result<Vec<RunSummary>> {
    let mut summaries = Vec::with_capacity(sweep.runs.len());
    for (c, outcome) in &sweep.runs {
        let cell = &sweep.cells[*c];
        let sub = dir.join(format!(
            "gsl{}_isl{}_{}",
            cell.config.gsl_bandwidth_gbps,
            cell.config.isl_bandwidth_gbps,
            outcome.scheduler.as_str()
        ));
        summaries.push(write_run(&sub, cell, outcome)?);
    }
    write_table(dir, "sweep", &summaries)?;
    Ok(summaries)
}
