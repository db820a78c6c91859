use std::collections::HashMap;

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::faults::{FaultInjector, FaultModel};
use super::metrics::MetricsLog;
use super::state::{split_tail, SimulationState};
use crate::constellation::ContactTable;
use crate::flowgraph::GenerationSchedule;
use crate::planner::{compute_sqdi, PlannerError, QueueSnapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Endpoint {
    Sat(usize),
    Station(usize),
}

/// One scheduler request: move `units` from satellite `from` during the
/// current slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transfer {
    pub from: usize,
    pub to: Endpoint,
    pub units: u64,
}

impl Transfer {
    pub fn isl(from: usize, to: usize, units: u64) -> Self {
        Self {
            from,
            to: Endpoint::Sat(to),
            units,
        }
    }

    pub fn gsl(from: usize, station: usize, units: u64) -> Self {
        Self {
            from,
            to: Endpoint::Station(station),
            units,
        }
    }
}

/// Static inputs of a run: who can talk to whom, and what gets generated.
#[derive(Debug, Clone, Copy)]
pub struct Environment<'a> {
    pub contacts: &'a ContactTable,
    pub generation: &'a GenerationSchedule,
}

impl Environment<'_> {
    /// Units satellite `sat` can send during the state's current slot.
    pub fn available(&self, state: &SimulationState, sat: usize) -> u64 {
        state.sat_queues[sat].total() + self.generation.at(state.slot, sat)
    }

    pub fn available_all(&self, state: &SimulationState) -> Vec<u64> {
        (0..state.sat_queues.len())
            .map(|i| self.available(state, i))
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("planner failed: {0}")]
    Planner(#[from] PlannerError),
}

/// Something that decides transfers slot by slot.
pub trait Scheduler {
    fn name(&self) -> &str;

    fn actions(
        &mut self,
        state: &SimulationState,
        env: &Environment,
    ) -> Result<Vec<Transfer>, SimError>;

    /// Queue lengths the scheduler expects at the start of slot `t`.
    fn predicted_queues(&self, _t: usize) -> Option<&[u64]> {
        None
    }

    /// Deviation above which the simulator asks for a new plan.
    fn sqdi_threshold(&self) -> Option<f64> {
        None
    }

    fn replan(&mut self, _state: &SimulationState, _env: &Environment) -> Result<(), SimError> {
        Ok(())
    }

    /// Plans started because the previous one ran out, not because of SQDI.
    fn plan_renewals(&self) -> usize {
        0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepReport {
    /// (generation slot, units) pushed to the data centre this slot.
    pub delivered: Vec<(usize, u64)>,
    /// Actions after clamping, before faults.
    pub executed: Vec<Transfer>,
    pub rejected: usize,
    pub voided: usize,
    pub lost: u64,
}

impl StepReport {
    pub fn delivered_units(&self) -> u64 {
        self.delivered.iter().map(|(_, u)| u).sum()
    }
}

/// Advances one slot:
/// 1. stations uplink buffered data, oldest first, up to their uplink rate;
/// 2. this slot's generation lands on board;
/// 3. actions on links that do not exist are rejected, the rest are clamped
///    to the sender's stock and the link capacity, in the order given;
/// 4. failed links void whole actions, then surviving actions lose units
///    per the loss rate (kept at the sender when retransmission is on);
/// 5. everything sent arrives at the receiver at the start of the next slot.
pub fn step(
    state: &mut SimulationState,
    actions: &[Transfer],
    env: &Environment,
    faults: &mut FaultInjector,
) -> StepReport {
    let t = state.slot;
    let contacts = env.contacts;
    let bw = contacts.bandwidth();
    let mut report = StepReport::default();

    for (station, buffer) in state.station_buffers.iter_mut().enumerate() {
        let batch = buffer.take_oldest(bw.uplink_units);
        let units: u64 = batch.iter().map(|(_, u)| u).sum();
        state.ground_received[station] += units;
        state.delivered += units;
        report.delivered.extend(batch);
    }

    for (sat, queue) in state.sat_queues.iter_mut().enumerate() {
        let p = env.generation.at(t, sat);
        queue.push(t, p);
        state.generated += p;
    }

    let slot = (t < contacts.horizon()).then(|| contacts.slot(t));
    let mut stock: Vec<u64> = state.sat_queues.iter().map(|q| q.total()).collect();
    let mut link_used: HashMap<(usize, Endpoint), u64> = HashMap::new();
    let mut link_down: HashMap<(usize, usize), bool> = HashMap::new();
    let mut arrivals: Vec<(Endpoint, Vec<(usize, u64)>)> = Vec::new();

    for action in actions {
        let Some(slot) = slot else {
            report.rejected += 1;
            continue;
        };
        let (exists, capacity, link_key) = match action.to {
            Endpoint::Station(g) => (
                action.from < stock.len() && slot.station_of(action.from) == Some(g),
                bw.gsl_units,
                (action.from, usize::MAX - g),
            ),
            Endpoint::Sat(b) => (
                action.from < stock.len()
                    && b < stock.len()
                    && action.from != b
                    && contacts.isl_up(t, action.from, b),
                bw.isl_units,
                (action.from.min(b), action.from.max(b)),
            ),
        };
        if !exists {
            warn!("slot {t}: rejecting {action:?}, no such link");
            report.rejected += 1;
            continue;
        }
        let used = link_used.entry((action.from, action.to)).or_default();
        let units = action
            .units
            .min(stock[action.from])
            .min(capacity.saturating_sub(*used));
        if units == 0 {
            continue;
        }
        *used += units;
        stock[action.from] -= units;
        report.executed.push(Transfer { units, ..*action });

        let failed = *link_down
            .entry(link_key)
            .or_insert_with(|| faults.link_fails());
        if failed {
            debug!("slot {t}: link failure voids {action:?}");
            stock[action.from] += units;
            report.voided += 1;
            continue;
        }
        let lost = faults.lost_units(units);
        report.lost += lost;
        let mut batch = state.sat_queues[action.from].take_oldest(units);
        if lost > 0 {
            let tail = split_tail(&mut batch, lost);
            if faults.model().retransmit_lost {
                state.sat_queues[action.from].extend(&tail);
                state.retransmitted += lost;
            } else {
                state.dropped += lost;
            }
        }
        arrivals.push((action.to, batch));
    }

    for (to, batch) in arrivals {
        match to {
            Endpoint::Sat(b) => state.sat_queues[b].extend(&batch),
            Endpoint::Station(g) => state.station_buffers[g].extend(&batch),
        }
    }
    state.slot += 1;
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopCondition {
    pub slot_cap: usize,
}

/// Drives `scheduler` over the environment until the download completes,
/// the slot cap is reached, or nothing can move any more.
pub fn run(
    env: &Environment,
    scheduler: &mut dyn Scheduler,
    faults: &FaultModel,
    stop: StopCondition,
) -> Result<MetricsLog, SimError> {
    let contacts = env.contacts;
    let n = contacts.sat_count();
    let mut state = SimulationState::new(n, contacts.station_count());
    let mut injector = faults.injector();
    let mut log = MetricsLog::new(
        scheduler.name(),
        contacts.slot_seconds(),
        env.generation.total(),
        env.generation.last_slot(),
    );
    let generation_end = env.generation.window();
    let last_contact = contacts.slots().iter().rposition(|s| !s.gsl.is_empty());
    let slot_cap = stop.slot_cap.min(contacts.horizon());

    loop {
        let t = state.slot;
        log.queue_history.push(state.queue_lengths());
        if log.t_download.is_none() && t >= generation_end && state.queued_on_satellites() == 0 {
            log.t_download = Some(t);
        }
        if log.t_download.is_some() && state.buffered_at_stations() == 0 {
            break;
        }
        if t >= slot_cap {
            break;
        }
        // satellites can no longer reach the ground and nothing is buffered
        let stranded = last_contact.map_or(true, |c| t > c);
        if stranded && t >= generation_end && state.buffered_at_stations() == 0 {
            break;
        }

        let actions = if log.t_download.is_some() {
            Vec::new()
        } else {
            scheduler.actions(&state, env)?
        };
        let report = step(&mut state, &actions, env, &mut injector);
        log.record_step(&report, t);
        debug_assert!(state.is_conserved());

        if let Some(predicted) = scheduler.predicted_queues(state.slot) {
            let snapshot = QueueSnapshot {
                slot: state.slot,
                predicted: predicted.to_vec(),
                observed: state.queue_lengths(),
            };
            let sqdi = compute_sqdi(&snapshot)?;
            log.sqdi.push((state.slot, sqdi));
            if scheduler.sqdi_threshold().is_some_and(|theta| sqdi > theta) {
                debug!(
                    "slot {}: SQDI {sqdi} over threshold, replanning",
                    state.slot
                );
                scheduler.replan(&state, env)?;
                log.replans += 1;
            }
        }
    }
    log.final_slot = state.slot;
    log.delivered = state.delivered;
    log.dropped = state.dropped;
    log.retransmitted = state.retransmitted;
    log.plan_renewals = scheduler.plan_renewals();
    log.left_on_satellites = state.queued_on_satellites();
    Ok(log)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::constellation::{BandwidthProfile, GslContact, SlotContacts};

    /// Two satellites linked to each other, satellite 1 over station 0.
    fn pair(horizon: usize, units: u64) -> ContactTable {
        let slot = SlotContacts {
            gsl: vec![GslContact { station: 0, sat: 1 }],
            isl_up: vec![true],
        };
        ContactTable::from_slots(
            2,
            1,
            &[(0, 1)],
            vec![slot; horizon],
            BandwidthProfile::uniform(units),
            1.0,
        )
        .unwrap()
    }

    fn seeded(state: &mut SimulationState, sat: usize, units: u64) {
        state.sat_queues[sat].push(0, units);
        state.generated += units;
    }

    #[test]
    fn identity_step() {
        let contacts = pair(4, 10);
        let gen = GenerationSchedule::empty(2);
        let env = Environment {
            contacts: &contacts,
            generation: &gen,
        };
        let mut state = SimulationState::new(2, 1);
        seeded(&mut state, 0, 3);
        let before = state.clone();
        step(&mut state, &[], &env, &mut FaultModel::none().injector());
        assert_eq!(state.slot, 1);
        assert_eq!(state.sat_queues, before.sat_queues);
        assert_eq!(state.delivered, 0);
    }

    #[test]
    fn gsl_action_moves_five_units() {
        let contacts = pair(4, 10);
        let gen = GenerationSchedule::empty(2);
        let env = Environment {
            contacts: &contacts,
            generation: &gen,
        };
        let mut state = SimulationState::new(2, 1);
        seeded(&mut state, 1, 8);
        let mut inj = FaultModel::none().injector();
        step(&mut state, &[Transfer::gsl(1, 0, 5)], &env, &mut inj);
        assert_eq!(state.sat_queues[1].total(), 3);
        assert_eq!(state.station_buffers[0].total(), 5);
        let report = step(&mut state, &[], &env, &mut inj);
        assert_eq!(report.delivered, vec![(0, 5)]);
        assert_eq!(state.ground_received[0], 5);
    }

    #[test]
    fn total_loss_requeues_and_shows_in_sqdi() {
        let contacts = pair(4, 10);
        let gen = GenerationSchedule::empty(2);
        let env = Environment {
            contacts: &contacts,
            generation: &gen,
        };
        let mut state = SimulationState::new(2, 1);
        seeded(&mut state, 1, 7);
        let mut inj = FaultModel {
            packet_loss_rate: 1.0,
            ..FaultModel::none()
        }
        .injector();
        let report = step(&mut state, &[Transfer::gsl(1, 0, 7)], &env, &mut inj);
        assert_eq!(report.lost, 7);
        assert_eq!(state.sat_queues[1].total(), 7);
        assert_eq!(state.station_buffers[0].total(), 0);
        assert_eq!(state.retransmitted, 7);
        let sqdi = compute_sqdi(&QueueSnapshot {
            slot: 1,
            predicted: vec![0],
            observed: vec![state.sat_queues[1].total()],
        })
        .unwrap();
        assert_eq!(sqdi, 14.0);
    }

    #[test]
    fn clamps_and_rejects() {
        let contacts = pair(4, 4);
        let gen = GenerationSchedule::empty(2);
        let env = Environment {
            contacts: &contacts,
            generation: &gen,
        };
        let mut state = SimulationState::new(2, 1);
        seeded(&mut state, 0, 9);
        let actions = [
            Transfer::isl(0, 1, 6),
            Transfer::isl(0, 1, 6),
            Transfer::gsl(0, 0, 1),
        ];
        let report = step(
            &mut state,
            &actions,
            &env,
            &mut FaultModel::none().injector(),
        );
        assert_eq!(report.rejected, 1);
        assert_eq!(report.executed, vec![Transfer::isl(0, 1, 4)]);
        assert_eq!(state.queue_lengths(), vec![5, 4]);
    }

    #[test]
    fn failed_link_voids_action() {
        let contacts = pair(4, 10);
        let gen = GenerationSchedule::empty(2);
        let env = Environment {
            contacts: &contacts,
            generation: &gen,
        };
        let mut state = SimulationState::new(2, 1);
        seeded(&mut state, 0, 5);
        let mut inj = FaultModel {
            link_failure_rate: 1.0,
            ..FaultModel::none()
        }
        .injector();
        let report = step(&mut state, &[Transfer::isl(0, 1, 5)], &env, &mut inj);
        assert_eq!(report.voided, 1);
        assert_eq!(state.queue_lengths(), vec![5, 0]);
    }

    proptest! {
        #[test]
        fn conservation_holds(
            volumes in prop::collection::vec(0u64..30, 2),
            actions in prop::collection::vec((0usize..2, 0usize..3, 0u64..20), 0..12),
            loss in 0.0f64..1.0,
            fail in 0.0f64..1.0,
            retransmit in any::<bool>(),
            seed in any::<u64>(),
        ) {
            let contacts = pair(8, 6);
            let gen = GenerationSchedule::from_rows(2, vec![volumes.clone(), volumes]);
            let env = Environment { contacts: &contacts, generation: &gen };
            let mut state = SimulationState::new(2, 1);
            let mut inj = FaultModel {
                packet_loss_rate: loss,
                link_failure_rate: fail,
                rng_seed: seed,
                retransmit_lost: retransmit,
            }
            .injector();
            for chunk in actions.chunks(3) {
                let batch: Vec<Transfer> = chunk
                    .iter()
                    .map(|&(from, to, u)| match to {
                        2 => Transfer::gsl(from, 0, u),
                        b => Transfer::isl(from, b, u),
                    })
                    .collect();
                let report = step(&mut state, &batch, &env, &mut inj);
                prop_assert!(state.is_conserved());
                prop_assert!(report.delivered_units() <= 6);
            }
        }
    }
}
