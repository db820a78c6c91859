use std::collections::BTreeMap;

/// Units held somewhere, bucketed by the slot they were generated in.
/// Dispatch is oldest-first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnitQueue {
    buckets: BTreeMap<usize, u64>,
    total: u64,
}

impl UnitQueue {
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn push(&mut self, generated_at: usize, units: u64) {
        if units > 0 {
            *self.buckets.entry(generated_at).or_default() += units;
            self.total += units;
        }
    }

    pub fn extend(&mut self, batch: &[(usize, u64)]) {
        for &(slot, units) in batch {
            self.push(slot, units);
        }
    }

    /// Removes up to `units`, oldest generation first.
    pub fn take_oldest(&mut self, units: u64) -> Vec<(usize, u64)> {
        let mut remaining = units.min(self.total);
        let mut out = Vec::new();
        while remaining > 0 {
            let mut entry = self.buckets.first_entry().expect("total tracks buckets");
            let take = remaining.min(*entry.get());
            out.push((*entry.key(), take));
            *entry.get_mut() -= take;
            if *entry.get() == 0 {
                entry.remove();
            }
            remaining -= take;
            self.total -= take;
        }
        out
    }

    pub fn buckets(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.buckets.iter().map(|(&k, &v)| (k, v))
    }
}

/// Split a dispatched batch: the newest `units` are peeled off the tail.
pub(crate) fn split_tail(batch: &mut Vec<(usize, u64)>, mut units: u64) -> Vec<(usize, u64)> {
    let mut tail = Vec::new();
    while units > 0 {
        let Some(last) = batch.last_mut() else { break };
        let take = units.min(last.1);
        tail.push((last.0, take));
        last.1 -= take;
        if last.1 == 0 {
            batch.pop();
        }
        units -= take;
    }
    tail
}

/// Everything the simulator tracks between slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationState {
    pub slot: usize,
    pub sat_queues: Vec<UnitQueue>,
    /// Arrived at a station, waiting for the uplink to the data centre.
    pub station_buffers: Vec<UnitQueue>,
    /// Cumulative units each station has pushed to the data centre.
    pub ground_received: Vec<u64>,
    pub generated: u64,
    pub delivered: u64,
    /// Lost in transit and abandoned.
    pub dropped: u64,
    /// Lost in transit and kept at the sender for another try.
    pub retransmitted: u64,
}

impl SimulationState {
    pub fn new(sat_count: usize, station_count: usize) -> Self {
        Self {
            slot: 0,
            sat_queues: vec![UnitQueue::default(); sat_count],
            station_buffers: vec![UnitQueue::default(); station_count],
            ground_received: vec![0; station_count],
            generated: 0,
            delivered: 0,
            dropped: 0,
            retransmitted: 0,
        }
    }

    pub fn queue_lengths(&self) -> Vec<u64> {
        self.sat_queues.iter().map(UnitQueue::total).collect()
    }

    pub fn queued_on_satellites(&self) -> u64 {
        self.sat_queues.iter().map(UnitQueue::total).sum()
    }

    pub fn buffered_at_stations(&self) -> u64 {
        self.station_buffers.iter().map(UnitQueue::total).sum()
    }

    /// generated == queued + buffered + delivered + dropped
    pub fn is_conserved(&self) -> bool {
        self.generated
            == self.queued_on_satellites()
                + self.buffered_at_stations()
                + self.delivered
                + self.dropped
    }
}
