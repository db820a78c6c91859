//! Layered time-expanded flow network, its min-cost max-flow solution and
//! the transmission plan read off that solution.

mod graph;
mod network;
mod plan;
mod schedule;
mod solver;

pub use graph::{
    build_time_expanded_graph, parse_edge_list, BuildError, GraphOptions, NodeKey,
    TimeExpandedGraph, SINK, SOURCE,
};
pub use network::{Edge, EdgeTag, FeasibilityError, FlowNetwork, FlowResult};
pub use plan::{
    check_constraints, extract_plan, PlanDocument, PlanError, PlanSlot, PlanTransfer,
    TransmissionPlan, Violation,
};
pub use schedule::GenerationSchedule;
pub use solver::{max_flow_value, min_cost_max_flow};
