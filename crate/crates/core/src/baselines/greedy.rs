use super::hops::{bfs_hop_distances, floyd_hop_distances, live_adjacency, HopDistanceMap};
use crate::simulator::{Environment, Scheduler, SimError, SimulationState, Transfer};

/// Above this many satellites the hop map comes from breadth-first search;
/// the distances are identical, Floyd–Warshall is just too slow there.
const FLOYD_LIMIT: usize = 512;

/// Every satellite pushes as much as it can one hop closer to the nearest
/// satellite with a ground contact; contact satellites download.
#[derive(Debug, Clone, Default)]
pub struct GreedyIsl {
    cache_key: Option<(Vec<usize>, Vec<bool>)>,
    map: Option<HopDistanceMap>,
    recomputations: usize,
}

impl GreedyIsl {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn recomputations(&self) -> usize {
        self.recomputations
    }

    fn hop_map(&mut self, env: &Environment, t: usize) -> &HopDistanceMap {
        let slot = env.contacts.slot(t);
        let mut contact_sats: Vec<usize> = slot.gsl.iter().map(|c| c.sat).collect();
        contact_sats.sort_unstable();
        let key = (contact_sats, slot.isl_up.clone());
        if self.cache_key.as_ref() != Some(&key) || self.map.is_none() {
            let adjacency = live_adjacency(env.contacts, t);
            let map = if adjacency.len() <= FLOYD_LIMIT {
                floyd_hop_distances(&adjacency, &key.0)
            } else {
                bfs_hop_distances(&adjacency, &key.0)
            };
            self.map = Some(map);
            self.cache_key = Some(key);
            self.recomputations += 1;
        }
        self.map.as_ref().expect("set above")
    }
}

impl Scheduler for GreedyIsl {
    fn name(&self) -> &str {
        "greedy_isl"
    }

    fn actions(
        &mut self,
        state: &SimulationState,
        env: &Environment,
    ) -> Result<Vec<Transfer>, SimError> {
        let t = state.slot;
        if t >= env.contacts.horizon() {
            return Ok(Vec::new());
        }
        let bw = env.contacts.bandwidth();
        let available = env.available_all(state);
        let slot = env.contacts.slot(t);
        let map = self.hop_map(env, t).clone();
        let mut actions = Vec::new();
        for (sat, &avail) in available.iter().enumerate() {
            if avail == 0 {
                continue;
            }
            if map.distance[sat] == 0 {
                let station = slot.station_of(sat).expect("distance 0 means contact");
                actions.push(Transfer::gsl(sat, station, avail.min(bw.gsl_units)));
            } else if let Some(next) = map.next_hop[sat] {
                actions.push(Transfer::isl(sat, next, avail.min(bw.isl_units)));
            }
        }
        Ok(actions)
    }
}

/// Satellites only download while they see a station themselves.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyNoIsl;

impl Scheduler for GreedyNoIsl {
    fn name(&self) -> &str {
        "greedy_no_isl"
    }

    fn actions(
        &mut self,
        state: &SimulationState,
        env: &Environment,
    ) -> Result<Vec<Transfer>, SimError> {
        let t = state.slot;
        if t >= env.contacts.horizon() {
            return Ok(Vec::new());
        }
        let gsl = env.contacts.bandwidth().gsl_units;
        Ok(env
            .contacts
            .slot(t)
            .gsl
            .iter()
            .filter_map(|c| {
                let avail = env.available(state, c.sat);
                (avail > 0).then(|| Transfer::gsl(c.sat, c.station, avail.min(gsl)))
            })
            .collect())
    }
}
