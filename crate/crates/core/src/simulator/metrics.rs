use std::collections::BTreeMap;

use serde::Serialize;

use super::engine::StepReport;

/// Everything recorded during one run. Slots are the unit of time here;
/// exporters convert to seconds with `slot_seconds`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsLog {
    pub scheduler: String,
    pub slot_seconds: f64,
    pub total_generated: u64,
    pub last_generation_slot: Option<usize>,
    /// Units pushed to the data centre during each slot.
    pub throughput: Vec<u64>,
    /// Per-satellite queue at the start of each slot.
    pub queue_history: Vec<Vec<u64>>,
    /// Delivery latency in slots -> number of units.
    pub latency_histogram: BTreeMap<usize, u64>,
    /// (slot, SQDI) whenever the scheduler published a prediction.
    pub sqdi: Vec<(usize, f64)>,
    pub t_download: Option<usize>,
    pub final_slot: usize,
    pub delivered: u64,
    pub dropped: u64,
    pub retransmitted: u64,
    pub left_on_satellites: u64,
    pub rejected_actions: usize,
    pub voided_actions: usize,
    pub replans: usize,
    pub plan_renewals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuartileTimes {
    /// Slot by the end of which 25/50/75/100 % had been delivered.
    pub boundaries: [Option<usize>; 4],
    /// Slots spent in each quarter; `None` once a boundary is missed.
    pub durations: [Option<usize>; 4],
}

impl QuartileTimes {
    pub fn is_complete(&self) -> bool {
        self.durations.iter().all(Option::is_some)
    }

    /// Last-quarter over first-quarter duration.
    pub fn tail_ratio(&self) -> Option<f64> {
        match (self.durations[0], self.durations[3]) {
            (Some(first), Some(last)) if first > 0 => Some(last as f64 / first as f64),
            _ => None,
        }
    }
}

impl MetricsLog {
    pub fn new(
        scheduler: &str,
        slot_seconds: f64,
        total_generated: u64,
        last_generation_slot: Option<usize>,
    ) -> Self {
        Self {
            scheduler: scheduler.to_string(),
            slot_seconds,
            total_generated,
            last_generation_slot,
            throughput: Vec::new(),
            queue_history: Vec::new(),
            latency_histogram: BTreeMap::new(),
            sqdi: Vec::new(),
            t_download: None,
            final_slot: 0,
            delivered: 0,
            dropped: 0,
            retransmitted: 0,
            left_on_satellites: 0,
            rejected_actions: 0,
            voided_actions: 0,
            replans: 0,
            plan_renewals: 0,
        }
    }

    pub(crate) fn record_step(&mut self, report: &StepReport, slot: usize) {
        debug_assert_eq!(self.throughput.len(), slot);
        self.throughput.push(report.delivered_units());
        for &(generated_at, units) in &report.delivered {
            *self
                .latency_histogram
                .entry(slot - generated_at)
                .or_default() += units;
        }
        self.rejected_actions += report.rejected;
        self.voided_actions += report.voided;
    }

    pub fn cumulative_delivered(&self) -> Vec<u64> {
        self.throughput
            .iter()
            .scan(0u64, |acc, &u| {
                *acc += u;
                Some(*acc)
            })
            .collect()
    }

    /// Delivered fraction after each slot; 1 everywhere when nothing was
    /// generated.
    pub fn progress(&self) -> Vec<f64> {
        if self.total_generated == 0 {
            return vec![1.0; self.throughput.len()];
        }
        self.cumulative_delivered()
            .into_iter()
            .map(|c| c as f64 / self.total_generated as f64)
            .collect()
    }

    /// First slot by whose end at least `fraction` of the data was
    /// delivered.
    pub fn time_to_fraction(&self, fraction: f64) -> Option<usize> {
        if self.total_generated == 0 {
            return Some(0);
        }
        let target = (fraction * self.total_generated as f64).ceil().max(1.0) as u64;
        self.cumulative_delivered()
            .iter()
            .position(|&c| c >= target)
    }

    pub fn completion(&self) -> f64 {
        if self.total_generated == 0 {
            1.0
        } else {
            self.delivered as f64 / self.total_generated as f64
        }
    }

    pub fn is_complete(&self) -> bool {
        self.t_download.is_some()
    }

    pub fn latency_samples(&self) -> u64 {
        self.latency_histogram.values().sum()
    }

    /// Smallest latency `l` such that at least `q` of delivered units
    /// arrived within `l` slots.
    pub fn latency_quantile(&self, q: f64) -> Option<usize> {
        let total = self.latency_samples();
        if total == 0 {
            return None;
        }
        let target = ((q * total as f64).ceil() as u64).clamp(1, total);
        let mut acc = 0;
        for (&latency, &count) in &self.latency_histogram {
            acc += count;
            if acc >= target {
                return Some(latency);
            }
        }
        self.latency_histogram.keys().next_back().copied()
    }

    pub fn mean_latency(&self) -> Option<f64> {
        let total = self.latency_samples();
        (total > 0).then(|| {
            self.latency_histogram
                .iter()
                .map(|(&l, &c)| l as f64 * c as f64)
                .sum::<f64>()
                / total as f64
        })
    }

    /// Mean units per slot over `[from, to)`, clipped to the recorded run.
    pub fn mean_throughput(&self, from: usize, to: usize) -> f64 {
        let to = to.min(self.throughput.len());
        if from >= to {
            return 0.0;
        }
        self.throughput[from..to].iter().sum::<u64>() as f64 / (to - from) as f64
    }
}

/// Empirical CDF of per-unit delivery latency, as (latency in slots,
/// cumulative fraction) points.
pub fn latency_cdf(log: &MetricsLog) -> Vec<(usize, f64)> {
    let total = log.latency_samples();
    if total == 0 {
        return Vec::new();
    }
    let mut acc = 0u64;
    log.latency_histogram
        .iter()
        .map(|(&latency, &count)| {
            acc += count;
            (latency, acc as f64 / total as f64)
        })
        .collect()
}

/// Slots needed to move delivery progress through each quarter of the data.
pub fn quartile_times(log: &MetricsLog) -> QuartileTimes {
    let mut boundaries = [None; 4];
    for (k, b) in boundaries.iter_mut().enumerate() {
        *b = log.time_to_fraction((k + 1) as f64 / 4.0);
    }
    let mut durations = [None; 4];
    let mut previous = Some(0);
    for k in 0..4 {
        durations[k] = match (previous, boundaries[k]) {
            (Some(p), Some(b)) => Some(b - p),
            _ => None,
        };
        previous = boundaries[k];
    }
    QuartileTimes {
        boundaries,
        durations,
    }
}
