//! Flow planning: horizon search, plan construction, queue-deviation
//! monitoring and replanning from the current slot.

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constellation::ContactTable;
use crate::flowgraph::{
    build_time_expanded_graph, extract_plan, max_flow_value, min_cost_max_flow, BuildError,
    GenerationSchedule, GraphOptions, PlanError, TransmissionPlan,
};
use crate::simulator::{Environment, Scheduler, SimError, SimulationState, Transfer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlannerError {
    #[error("queue snapshot has {predicted} predicted and {observed} observed entries")]
    LengthMismatch { predicted: usize, observed: usize },
    #[error("queue snapshot is empty")]
    EmptySnapshot,
    #[error("negative SQDI threshold")]
    NegativeThreshold,
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplanPolicy {
    #[default]
    OnThreshold,
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonSearch {
    #[default]
    AdaptiveDoubling,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Replan when SQDI exceeds this many units. Defaults to 1% of the
    /// total generated volume.
    pub sqdi_threshold: Option<f64>,
    pub replan_policy: ReplanPolicy,
    pub horizon_search: HorizonSearch,
    /// Longest horizon the search may try. Defaults to 16 times the
    /// generation window.
    pub horizon_cap: Option<usize>,
    /// Per-slot on-board storage limit. Defaults to unbounded.
    pub storage_cap: Option<u64>,
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlannerError> {
        match self.sqdi_threshold {
            Some(theta) if theta < 0.0 || theta.is_nan() => Err(PlannerError::NegativeThreshold),
            _ => Ok(()),
        }
    }

    pub fn threshold_for(&self, total_generated: u64) -> f64 {
        self.sqdi_threshold.unwrap_or(0.01 * total_generated as f64)
    }

    fn cap_for(&self, generation_window: usize) -> usize {
        self.horizon_cap
            .unwrap_or(16 * generation_window.max(1))
            .max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueueSnapshot {
    pub slot: usize,
    pub predicted: Vec<u64>,
    pub observed: Vec<u64>,
}

/// Mean plus maximum absolute deviation between observed and predicted
/// queue lengths.
pub fn compute_sqdi(snapshot: &QueueSnapshot) -> Result<f64, PlannerError> {
    let (p, o) = (&snapshot.predicted, &snapshot.observed);
    if p.len() != o.len() {
        return Err(PlannerError::LengthMismatch {
            predicted: p.len(),
            observed: o.len(),
        });
    }
    if p.is_empty() {
        return Err(PlannerError::EmptySnapshot);
    }
    let deltas = p.iter().zip(o).map(|(&a, &b)| a.abs_diff(b));
    let (sum, max) = deltas.fold((0u128, 0u64), |(s, m), d| (s + d as u128, m.max(d)));
    Ok(sum as f64 / p.len() as f64 + max as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HorizonOutcome {
    Deliverable(usize),
    /// No horizon up to `cap` moves everything; `best_flow` is what `cap`
    /// slots manage.
    NotFullyDeliverable {
        cap: usize,
        best_flow: u64,
    },
}

impl HorizonOutcome {
    pub fn horizon(&self) -> usize {
        match *self {
            Self::Deliverable(h) => h,
            Self::NotFullyDeliverable { cap, .. } => cap,
        }
    }
}

/// Problem seen from one slot: where planning starts, what is on board,
/// what is still to come (slot 0 = `start`).
#[derive(Debug, Clone, Copy)]
pub struct PlanningProblem<'a> {
    pub contacts: &'a ContactTable,
    pub start: usize,
    pub generation: &'a GenerationSchedule,
    pub initial_queues: &'a [u64],
    pub options: GraphOptions,
}

impl PlanningProblem<'_> {
    pub fn total(&self) -> u64 {
        self.initial_queues.iter().sum::<u64>() + self.generation.total()
    }

    pub fn max_horizon(&self) -> usize {
        self.contacts.horizon().saturating_sub(self.start)
    }

    pub fn max_flow(&self, horizon: usize) -> Result<u64, PlannerError> {
        let graph = build_time_expanded_graph(
            self.contacts,
            self.start,
            self.generation,
            self.initial_queues,
            horizon,
            self.options,
        )?;
        Ok(max_flow_value(&graph.network))
    }

    pub fn solve(&self, horizon: usize) -> Result<TransmissionPlan, PlannerError> {
        let graph = build_time_expanded_graph(
            self.contacts,
            self.start,
            self.generation,
            self.initial_queues,
            horizon,
            self.options,
        )?;
        let flow = min_cost_max_flow(&graph.network);
        debug!(
            "slot {}: planned {} units over {horizon} slots at cost {}",
            self.start, flow.max_flow_value, flow.total_cost
        );
        Ok(extract_plan(&graph, &flow)?)
    }
}

/// Smallest horizon whose graph carries everything: double until the
/// volume fits, then binary-search between the last miss and first fit.
pub fn adaptive_horizon(
    problem: &PlanningProblem,
    cap: usize,
) -> Result<HorizonOutcome, PlannerError> {
    let total = problem.total();
    let cap = cap.min(problem.max_horizon());
    if cap == 0 {
        return Ok(HorizonOutcome::NotFullyDeliverable { cap, best_flow: 0 });
    }
    if total == 0 {
        return Ok(HorizonOutcome::Deliverable(1));
    }
    let mut miss = 0;
    let mut hit = 1;
    loop {
        let flow = problem.max_flow(hit)?;
        if flow == total {
            break;
        }
        if hit == cap {
            return Ok(HorizonOutcome::NotFullyDeliverable {
                cap,
                best_flow: flow,
            });
        }
        miss = hit;
        hit = (hit * 2).min(cap);
    }
    while hit - miss > 1 {
        let mid = miss + (hit - miss) / 2;
        if problem.max_flow(mid)? == total {
            hit = mid;
        } else {
            miss = mid;
        }
    }
    Ok(HorizonOutcome::Deliverable(hit))
}

/// Plans the whole problem. When the volume cannot be moved within the
/// cap, the plan moves as much as the capped horizon allows.
pub fn make_plan(
    problem: &PlanningProblem,
    config: &PlannerConfig,
) -> Result<TransmissionPlan, PlannerError> {
    let available = problem.max_horizon();
    let horizon = match config.horizon_search {
        HorizonSearch::Fixed(h) => h.max(1).min(available),
        HorizonSearch::AdaptiveDoubling => {
            let cap = config.cap_for(problem.generation.window());
            match adaptive_horizon(problem, cap)? {
                HorizonOutcome::Deliverable(h) => h,
                HorizonOutcome::NotFullyDeliverable { cap, best_flow } => {
                    warn!(
                        "slot {}: only {best_flow} of {} units deliverable within {cap} slots",
                        problem.start,
                        problem.total()
                    );
                    cap
                }
            }
        }
    };
    if horizon == 0 {
        return Ok(TransmissionPlan::empty(problem.start, 0));
    }
    if problem.total() == 0 {
        return Ok(TransmissionPlan::empty(problem.start, horizon));
    }
    problem.solve(horizon)
}

/// Rebuilds the plan from `current_slot`, seeding layer 0 with the
/// observed queues. `remaining_generation` is indexed from `current_slot`.
pub fn replan(
    current_slot: usize,
    observed_queues: &[u64],
    remaining_generation: &GenerationSchedule,
    contacts: &ContactTable,
    config: &PlannerConfig,
) -> Result<TransmissionPlan, PlannerError> {
    let problem = PlanningProblem {
        contacts,
        start: current_slot,
        generation: remaining_generation,
        initial_queues: observed_queues,
        options: GraphOptions {
            storage_cap: config.storage_cap,
        },
    };
    make_plan(&problem, config)
}

/// Executes flow plans slot by slot, replanning on deviation and starting
/// a fresh plan whenever the current one runs out with data still aboard.
#[derive(Debug, Clone)]
pub struct HurryScheduler {
    config: PlannerConfig,
    plan: Option<TransmissionPlan>,
    /// Predicted queues for absolute slots `plan.start_slot ..= plan.end_slot()`.
    predicted: Vec<Vec<u64>>,
    threshold: Option<f64>,
    renewals: usize,
    plans: Vec<TransmissionPlan>,
    keep_history: bool,
}

impl HurryScheduler {
    pub fn new(config: PlannerConfig) -> Self {
        Self {
            config,
            plan: None,
            predicted: Vec::new(),
            threshold: None,
            renewals: 0,
            plans: Vec::new(),
            keep_history: false,
        }
    }

    /// Keep every plan made during the run for later inspection.
    pub fn with_history(mut self) -> Self {
        self.keep_history = true;
        self
    }

    pub fn current_plan(&self) -> Option<&TransmissionPlan> {
        self.plan.as_ref()
    }

    pub fn plan_history(&self) -> &[TransmissionPlan] {
        &self.plans
    }

    fn install(&mut self, state: &SimulationState, env: &Environment) -> Result<(), SimError> {
        let mut config = self.config;
        // replans keep the cap derived from the original generation window
        config.horizon_cap = Some(config.cap_for(env.generation.window()));
        let remaining = env.generation.shifted(state.slot);
        let observed = state.queue_lengths();
        let plan = replan(state.slot, &observed, &remaining, env.contacts, &config)?;
        let predicted = plan
            .predicted_queues(&remaining, &observed)
            .expect("solver plans never overdraw");
        info!(
            "slot {}: plan over {} slots delivering {} units",
            state.slot,
            plan.horizon,
            plan.delivered()
        );
        if self.keep_history {
            self.plans.push(plan.clone());
        }
        self.predicted = predicted;
        self.plan = Some(plan);
        Ok(())
    }

    fn work_left(state: &SimulationState, env: &Environment) -> bool {
        state.queued_on_satellites() > 0 || env.generation.window() > state.slot
    }
}

impl Scheduler for HurryScheduler {
    fn name(&self) -> &str {
        "hurry"
    }

    fn actions(
        &mut self,
        state: &SimulationState,
        env: &Environment,
    ) -> Result<Vec<Transfer>, SimError> {
        if self.threshold.is_none() && self.config.replan_policy == ReplanPolicy::OnThreshold {
            self.threshold = Some(self.config.threshold_for(env.generation.total()));
        }
        let t = state.slot;
        let expired = self.plan.as_ref().map_or(true, |p| t >= p.end_slot());
        if expired {
            if !Self::work_left(state, env) || t >= env.contacts.horizon() {
                return Ok(Vec::new());
            }
            if self.plan.is_some() {
                self.renewals += 1;
            }
            self.install(state, env)?;
        }
        let plan = self.plan.as_ref().expect("installed above");
        let k = t - plan.start_slot;
        if k >= plan.horizon {
            return Ok(Vec::new());
        }
        let isl = plan.d_isl[k]
            .iter()
            .map(|(&(from, to), &u)| Transfer::isl(from, to, u));
        let gsl = plan.d_gsl[k]
            .iter()
            .map(|(&(sat, station), &u)| Transfer::gsl(sat, station, u));
        Ok(isl.chain(gsl).collect())
    }

    fn predicted_queues(&self, t: usize) -> Option<&[u64]> {
        let plan = self.plan.as_ref()?;
        let k = t.checked_sub(plan.start_slot)?;
        self.predicted.get(k).map(Vec::as_slice)
    }

    fn sqdi_threshold(&self) -> Option<f64> {
        self.threshold
    }

    fn replan(&mut self, state: &SimulationState, env: &Environment) -> Result<(), SimError> {
        if state.slot >= env.contacts.horizon() {
            self.plan = None;
            self.predicted.clear();
            return Ok(());
        }
        self.install(state, env)
    }

    fn plan_renewals(&self) -> usize {
        self.renewals
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{BandwidthProfile, GslContact, SlotContacts};

    fn snapshot(predicted: Vec<u64>, observed: Vec<u64>) -> QueueSnapshot {
        QueueSnapshot {
            slot: 0,
            predicted,
            observed,
        }
    }

    #[test]
    fn sqdi_examples() {
        assert_eq!(
            compute_sqdi(&snapshot(vec![3, 3], vec![3, 3])).unwrap(),
            0.0
        );
        assert_eq!(
            compute_sqdi(&snapshot(vec![0, 0], vec![0, 4])).unwrap(),
            6.0
        );
        assert_eq!(compute_sqdi(&snapshot(vec![10], vec![3])).unwrap(), 14.0);
        assert!(matches!(
            compute_sqdi(&snapshot(vec![1], vec![1, 2])),
            Err(PlannerError::LengthMismatch { .. })
        ));
        assert!(compute_sqdi(&snapshot(vec![], vec![])).is_err());
    }

    /// One satellite always over one station.
    fn single_contact(horizon: usize, gsl: u64) -> ContactTable {
        let slot = SlotContacts {
            gsl: vec![GslContact { station: 0, sat: 0 }],
            isl_up: vec![],
        };
        ContactTable::from_slots(
            1,
            1,
            &[],
            vec![slot; horizon],
            BandwidthProfile {
                gsl_units: gsl,
                isl_units: gsl,
                uplink_units: gsl,
            },
            1.0,
        )
        .unwrap()
    }

    fn problem<'a>(
        contacts: &'a ContactTable,
        generation: &'a GenerationSchedule,
        initial: &'a [u64],
    ) -> PlanningProblem<'a> {
        PlanningProblem {
            contacts,
            start: 0,
            generation,
            initial_queues: initial,
            options: GraphOptions::default(),
        }
    }

    #[test]
    fn one_slot_suffices_under_capacity() {
        let contacts = single_contact(8, 10);
        let gen = GenerationSchedule::burst(&[7]);
        let p = problem(&contacts, &gen, &[0]);
        assert_eq!(
            adaptive_horizon(&p, 8).unwrap(),
            HorizonOutcome::Deliverable(1)
        );
    }

    #[test]
    fn drains_in_three_slots() {
        let contacts = single_contact(8, 10);
        let gen = GenerationSchedule::burst(&[25]);
        let p = problem(&contacts, &gen, &[0]);
        assert_eq!(
            adaptive_horizon(&p, 8).unwrap(),
            HorizonOutcome::Deliverable(3)
        );
        let plan = make_plan(&p, &PlannerConfig::default()).unwrap();
        assert_eq!(plan.horizon, 3);
        assert_eq!(plan.delivered(), 25);
    }

    #[test]
    fn disconnected_satellite_is_reported() {
        let slot = SlotContacts::default();
        let contacts =
            ContactTable::from_slots(1, 1, &[], vec![slot; 6], BandwidthProfile::uniform(5), 1.0)
                .unwrap();
        let gen = GenerationSchedule::burst(&[3]);
        let p = problem(&contacts, &gen, &[0]);
        assert_eq!(
            adaptive_horizon(&p, 4).unwrap(),
            HorizonOutcome::NotFullyDeliverable {
                cap: 4,
                best_flow: 0
            }
        );
    }

    #[test]
    fn zero_data_gives_empty_plan() {
        let contacts = single_contact(4, 10);
        let gen = GenerationSchedule::empty(1);
        let p = problem(&contacts, &gen, &[0]);
        let plan = make_plan(&p, &PlannerConfig::default()).unwrap();
        assert!(plan.is_empty());
        assert_eq!(plan.horizon, 1);
        let fixed = PlannerConfig {
            horizon_search: HorizonSearch::Fixed(3),
            ..PlannerConfig::default()
        };
        assert_eq!(make_plan(&p, &fixed).unwrap().horizon, 3);
    }

    #[test]
    fn replan_from_inflated_queue_covers_everything() {
        let contacts = single_contact(10, 4);
        let gen = GenerationSchedule::empty(1);
        let plan = replan(2, &[11], &gen, &contacts, &PlannerConfig::default()).unwrap();
        assert_eq!(plan.start_slot, 2);
        assert_eq!(plan.horizon, 3);
        assert_eq!(plan.delivered(), 11);
        let empty = replan(2, &[0], &gen, &contacts, &PlannerConfig::default()).unwrap();
        assert!(empty.is_empty());
    }
}
