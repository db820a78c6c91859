use serde::{Deserialize, Serialize};

/// Data produced on board, `units[t][i]` = units satellite `i` makes
/// available for transmission starting at slot `t`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GenerationSchedule {
    sat_count: usize,
    units: Vec<Vec<u64>>,
}

impl GenerationSchedule {
    pub fn empty(sat_count: usize) -> Self {
        Self {
            sat_count,
            units: Vec::new(),
        }
    }

    /// Rows must all have `sat_count` entries.
    pub fn from_rows(sat_count: usize, units: Vec<Vec<u64>>) -> Self {
        assert!(
            units.iter().all(|row| row.len() == sat_count),
            "generation rows must match the satellite count"
        );
        let mut s = Self { sat_count, units };
        s.trim();
        s
    }

    /// Every satellite produces `per_sat` units spread evenly over
    /// `window` slots; the remainder lands in the earliest slots.
    pub fn fixed_volume(sat_count: usize, per_sat: u64, window: usize) -> Self {
        let window = window.max(1);
        let base = per_sat / window as u64;
        let extra = (per_sat % window as u64) as usize;
        let units = (0..window)
            .map(|t| vec![base + u64::from(t < extra); sat_count])
            .collect();
        Self::from_rows(sat_count, units)
    }

    /// Every satellite produces `per_slot` units in each of `duration` slots.
    pub fn continuous(sat_count: usize, per_slot: u64, duration: usize) -> Self {
        Self::from_rows(sat_count, vec![vec![per_slot; sat_count]; duration])
    }

    /// Single burst at slot 0 with per-satellite volumes.
    pub fn burst(volumes: &[u64]) -> Self {
        Self::from_rows(volumes.len(), vec![volumes.to_vec()])
    }

    fn trim(&mut self) {
        while self
            .units
            .last()
            .is_some_and(|row| row.iter().all(|&u| u == 0))
        {
            self.units.pop();
        }
    }

    pub fn sat_count(&self) -> usize {
        self.sat_count
    }

    pub fn at(&self, t: usize, sat: usize) -> u64 {
        self.units.get(t).map_or(0, |row| row[sat])
    }

    pub fn row(&self, t: usize) -> Option<&[u64]> {
        self.units.get(t).map(Vec::as_slice)
    }

    pub fn total(&self) -> u64 {
        self.units.iter().flatten().sum()
    }

    /// Last slot with any positive generation.
    pub fn last_slot(&self) -> Option<usize> {
        self.units.len().checked_sub(1)
    }

    /// Number of slots up to and including the last generating one.
    pub fn window(&self) -> usize {
        self.units.len()
    }

    pub fn total_until(&self, end: usize) -> u64 {
        self.units.iter().take(end).flatten().sum()
    }

    /// Schedule re-based so that absolute slot `from` becomes slot 0.
    pub fn shifted(&self, from: usize) -> Self {
        Self {
            sat_count: self.sat_count,
            units: self.units.iter().skip(from).cloned().collect(),
        }
    }

    pub fn per_satellite_totals(&self) -> Vec<u64> {
        let mut totals = vec![0; self.sat_count];
        for row in &self.units {
            for (acc, u) in totals.iter_mut().zip(row) {
                *acc += u;
            }
        }
        totals
    }
}
