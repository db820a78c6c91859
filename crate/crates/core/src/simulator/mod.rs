//! Discrete-time execution of scheduler decisions, queue bookkeeping,
//! fault injection, deviation monitoring and metric collection.

mod engine;
mod faults;
mod metrics;
mod state;

pub use engine::{
    run, step, Endpoint, Environment, Scheduler, SimError, StepReport, StopCondition, Transfer,
};
pub use faults::{FaultInjector, FaultModel};
pub use metrics::{latency_cdf, quartile_times, MetricsLog, QuartileTimes};
pub use state::{SimulationState, UnitQueue};
