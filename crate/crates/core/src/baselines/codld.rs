use log::debug;
use serde::{Deserialize, Serialize};

use super::matching::hopcroft_karp;
use crate::constellation::ContactTable;
use crate::flowgraph::GenerationSchedule;
use crate::simulator::{
    step, Endpoint, Environment, FaultModel, Scheduler, SimError, SimulationState, Transfer,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoDldConfig {
    /// Slots ahead counted as a satellite's remaining contact time.
    pub lookahead: usize,
}

/// Per-satellite bookkeeping for one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CoDldState {
    /// Slots of ground contact needed to drain what is on board.
    pub remaining_download_time: usize,
    /// Contact slots in the lookahead window, including this one.
    pub remaining_contact_time: usize,
    /// No own data left; only relayed data on board.
    pub done: bool,
}

impl CoDldState {
    fn of(avail: u64, foreign: u64, contact: usize, gsl: u64) -> Self {
        let rdt = if gsl == 0 {
            if avail > 0 {
                usize::MAX
            } else {
                0
            }
        } else {
            avail.div_ceil(gsl) as usize
        };
        Self {
            remaining_download_time: rdt,
            remaining_contact_time: contact,
            done: avail <= foreign,
        }
    }

    fn overloaded(&self) -> bool {
        self.remaining_download_time > self.remaining_contact_time
    }

    fn spare_contact(&self) -> usize {
        if self.done {
            self.remaining_contact_time
                .saturating_sub(self.remaining_download_time)
        } else {
            0
        }
    }
}

/// One slot of CoDld given what each satellite can send right now and how
/// much of that it holds for others: satellites in contact download, then
/// satellites that cannot drain within their own contact time are matched
/// one-to-one with one-hop neighbours that carry no own data and still
/// have contact time to spare.
pub fn codld_slot(
    contacts: &ContactTable,
    t: usize,
    available: &[u64],
    foreign: &[u64],
    config: &CoDldConfig,
) -> Vec<Transfer> {
    if t >= contacts.horizon() {
        return Vec::new();
    }
    let bw = contacts.bandwidth();
    let slot = contacts.slot(t);
    let ahead = contacts.contact_slots(t, t + config.lookahead.max(1));
    let states: Vec<CoDldState> = (0..available.len())
        .map(|i| CoDldState::of(available[i], foreign[i], ahead[i], bw.gsl_units))
        .collect();

    let mut actions = Vec::new();
    let mut left = available.to_vec();
    for c in &slot.gsl {
        let units = left[c.sat].min(bw.gsl_units);
        if units > 0 {
            actions.push(Transfer::gsl(c.sat, c.station, units));
            left[c.sat] -= units;
        }
    }

    let offloaders: Vec<usize> = (0..states.len())
        .filter(|&i| !states[i].done && states[i].overloaded())
        .collect();
    let relays: Vec<usize> = (0..states.len())
        .filter(|&i| states[i].spare_contact() > 0)
        .collect();
    if offloaders.is_empty() || relays.is_empty() || bw.isl_units == 0 {
        return actions;
    }
    let mut relay_index = vec![usize::MAX; states.len()];
    for (k, &r) in relays.iter().enumerate() {
        relay_index[r] = k;
    }
    let adj: Vec<Vec<usize>> = offloaders
        .iter()
        .map(|&o| {
            contacts
                .live_neighbors(t, o)
                .filter(|&n| relay_index[n] != usize::MAX)
                .map(|n| relay_index[n])
                .collect()
        })
        .collect();
    let matching = hopcroft_karp(&adj, relays.len());
    for (k, pair) in matching.iter().enumerate() {
        let Some(r) = *pair else { continue };
        let (o, r) = (offloaders[k], relays[r]);
        let excess = available[o].saturating_sub(ahead[o] as u64 * bw.gsl_units);
        let spare = (ahead[r] as u64 * bw.gsl_units).saturating_sub(available[r]);
        let units = bw.isl_units.min(excess).min(spare).min(left[o]);
        if units > 0 {
            debug!("slot {t}: S{o} offloads {units} to S{r}");
            actions.push(Transfer::isl(o, r, units));
            left[o] -= units;
        }
    }
    actions
}

/// Tracks relayed data between slots and emits CoDld actions.
#[derive(Debug, Clone)]
pub struct CoDldCore {
    config: CoDldConfig,
    foreign: Vec<u64>,
    last: Vec<Transfer>,
}

impl CoDldCore {
    pub fn new(config: CoDldConfig) -> Self {
        Self {
            config,
            foreign: Vec::new(),
            last: Vec::new(),
        }
    }

    /// Relayed units each satellite holds, as of the last call.
    pub fn foreign(&self) -> &[u64] {
        &self.foreign
    }

    pub fn actions(&mut self, state: &SimulationState, env: &Environment) -> Vec<Transfer> {
        let queues = state.queue_lengths();
        self.foreign.resize(queues.len(), 0);
        for a in self.last.drain(..) {
            match a.to {
                Endpoint::Sat(r) => self.foreign[r] += a.units,
                Endpoint::Station(_) => {
                    let f = &mut self.foreign[a.from];
                    *f -= (*f).min(a.units);
                }
            }
        }
        // anything lost or diverted is no longer held for others
        for (f, q) in self.foreign.iter_mut().zip(&queues) {
            *f = (*f).min(*q);
        }
        let actions = codld_slot(
            env.contacts,
            state.slot,
            &env.available_all(state),
            &self.foreign,
            &self.config,
        );
        self.last = actions.clone();
        actions
    }
}

/// Original CoDld: waits for all data to exist, then rolls the schedule
/// forward on its own predicted queues. Returns actions per absolute slot.
pub fn codld_schedule(
    contacts: &ContactTable,
    generation: &GenerationSchedule,
    config: &CoDldConfig,
) -> Vec<Vec<Transfer>> {
    let start = generation.last_slot().unwrap_or(0);
    let env = Environment {
        contacts,
        generation,
    };
    let mut core = CoDldCore::new(*config);
    let mut state = SimulationState::new(contacts.sat_count(), contacts.station_count());
    let mut injector = FaultModel::none().injector();
    let mut out = Vec::new();
    while state.slot < contacts.horizon() {
        let t = state.slot;
        if t > start && state.queued_on_satellites() == 0 {
            break;
        }
        let actions = if t < start {
            Vec::new()
        } else {
            core.actions(&state, &env)
        };
        step(&mut state, &actions, &env, &mut injector);
        out.push(actions);
    }
    out
}

/// CoDld replaying its precomputed schedule.
#[derive(Debug, Clone)]
pub struct CoDld {
    config: CoDldConfig,
    schedule: Option<Vec<Vec<Transfer>>>,
}

impl CoDld {
    pub fn new(config: CoDldConfig) -> Self {
        Self {
            config,
            schedule: None,
        }
    }
}

impl Scheduler for CoDld {
    fn name(&self) -> &str {
        "codld"
    }

    fn actions(
        &mut self,
        state: &SimulationState,
        env: &Environment,
    ) -> Result<Vec<Transfer>, SimError> {
        let config = self.config;
        let schedule = self
            .schedule
            .get_or_insert_with(|| codld_schedule(env.contacts, env.generation, &config));
        Ok(schedule.get(state.slot).cloned().unwrap_or_default())
    }
}

/// CoDld re-run every slot on the observed queues, so offloading starts as
/// soon as data exists.
#[derive(Debug, Clone)]
pub struct CoDldModify {
    core: CoDldCore,
}

impl CoDldModify {
    pub fn new(config: CoDldConfig) -> Self {
        Self {
            core: CoDldCore::new(config),
        }
    }
}

impl Scheduler for CoDldModify {
    fn name(&self) -> &str {
        "codld_modify"
    }

    fn actions(
        &mut self,
        state: &SimulationState,
        env: &Environment,
    ) -> Result<Vec<Transfer>, SimError> {
        Ok(self.core.actions(state, env))
    }
}
