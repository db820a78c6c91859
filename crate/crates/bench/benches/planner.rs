use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use hurry_core::flowgraph::{build_time_expanded_graph, min_cost_max_flow, GraphOptions};
use hurry_core::planner::{adaptive_horizon, PlanningProblem};
use hurry_core::scenario::{PreparedScenario, ScenarioConfig, SchedulerKind};

fn desk() -> PreparedScenario {
    let mut config = ScenarioConfig::preset("desk").unwrap();
    config.slot_cap = Some(400);
    PreparedScenario::new(&config).unwrap()
}

fn planner(c: &mut Criterion) {
    let prepared = desk();
    let zeros = vec![0; prepared.contacts.sat_count()];
    let problem = PlanningProblem {
        contacts: &prepared.contacts,
        start: 0,
        generation: &prepared.generation,
        initial_queues: &zeros,
        options: GraphOptions::default(),
    };
    let horizon = prepared.planned_horizon.horizon();

    c.bench_function("desk/build_graph", |b| {
        b.iter(|| {
            build_time_expanded_graph(
                &prepared.contacts,
                0,
                &prepared.generation,
                &zeros,
                horizon,
                GraphOptions::default(),
            )
            .unwrap()
        })
    });
    let graph = build_time_expanded_graph(
        &prepared.contacts,
        0,
        &prepared.generation,
        &zeros,
        horizon,
        GraphOptions::default(),
    )
    .unwrap();
    c.bench_function("desk/min_cost_max_flow", |b| {
        b.iter(|| min_cost_max_flow(&graph.network))
    });
    c.bench_function("desk/adaptive_horizon", |b| {
        b.iter(|| adaptive_horizon(&problem, 400).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let prepared = desk();
    let mut group = c.benchmark_group("desk/run");
    group.sample_size(10);
    for kind in [SchedulerKind::Hurry, SchedulerKind::GreedyIsl] {
        group.bench_function(kind.as_str(), |b| {
            b.iter_batched(
                || prepared.scheduler(kind),
                |mut s| prepared.run_with(s.as_mut(), kind).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, planner, simulation);
criterion_main!(benches);
