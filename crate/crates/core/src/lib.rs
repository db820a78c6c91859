//! Data-download planning for low-orbit mega-constellations.
//!
//! The crate models a Walker Delta shell with +Grid inter-satellite links,
//! plans downloads as min-cost max-flow over a time-expanded graph, runs the
//! CoDld and greedy baselines, and replays everything in a deterministic
//! discrete-time simulator.

pub mod baselines;
pub mod constellation;
pub mod flowgraph;
pub mod planner;
pub mod report;
pub mod scenario;
pub mod simulator;

pub use constellation::{
    build_contact_table, generate_walker_delta, BandwidthProfile, ContactTable, GroundStation,
    ShellConfig,
};
pub use flowgraph::{GenerationSchedule, TransmissionPlan};
pub use planner::{HurryScheduler, PlannerConfig};
pub use simulator::{run, Environment, FaultModel, MetricsLog, Scheduler, StopCondition};
