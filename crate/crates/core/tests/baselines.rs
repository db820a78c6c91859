use hurry_core::baselines::{
    codld_schedule, codld_slot, CoDld, CoDldConfig, CoDldModify, GreedyIsl, GreedyNoIsl,
};
use hurry_core::constellation::{BandwidthProfile, ContactTable, GslContact, SlotContacts};
use hurry_core::simulator::{
    run, step, Endpoint, Environment, FaultModel, Scheduler, SimulationState, StopCondition,
    Transfer,
};
use hurry_core::GenerationSchedule;

/// `gsl[t]` lists (station, sat) contacts; every ISL pair is always up.
fn table(
    n: usize,
    pairs: &[(usize, usize)],
    gsl: &[Vec<(usize, usize)>],
    bw: BandwidthProfile,
) -> ContactTable {
    let stations = gsl.iter().flatten().map(|c| c.0 + 1).max().unwrap_or(1);
    let slots = gsl
        .iter()
        .map(|cs| SlotContacts {
            gsl: cs
                .iter()
                .map(|&(station, sat)| GslContact { station, sat })
                .collect(),
            isl_up: vec![true; pairs.len()],
        })
        .collect();
    ContactTable::from_slots(n, stations, pairs, slots, bw, 1.0).unwrap()
}

const LOOK: CoDldConfig = CoDldConfig { lookahead: 4 };

#[test]
fn codld_direct_download_without_isl() {
    let c = table(1, &[], &vec![vec![(0, 0)]; 4], BandwidthProfile::uniform(5));
    let actions = codld_slot(&c, 0, &[10], &[0], &LOOK);
    assert_eq!(actions, vec![Transfer::gsl(0, 0, 5)]);
}

#[test]
fn codld_relays_through_idle_neighbour() {
    // A = 0 never sees the station, B = 1 does every slot and is empty
    let c = table(
        2,
        &[(0, 1)],
        &vec![vec![(0, 1)]; 4],
        BandwidthProfile::uniform(5),
    );
    let actions = codld_slot(&c, 0, &[8, 0], &[0, 0], &LOOK);
    assert_eq!(actions, vec![Transfer::isl(0, 1, 5)]);
}

#[test]
fn codld_busy_satellite_accepts_nothing() {
    // 0 - 1 - 2 chain; 1 has its own data and plenty of contact time
    let c = table(
        3,
        &[(0, 1), (1, 2)],
        &vec![vec![(0, 1)]; 4],
        BandwidthProfile::uniform(5),
    );
    let actions = codld_slot(&c, 0, &[8, 3, 0], &[0; 3], &LOOK);
    assert!(actions.iter().all(|a| a.to != Endpoint::Sat(1)));
    assert_eq!(actions, vec![Transfer::gsl(1, 0, 3)]);
}

#[test]
fn codld_matching_is_one_to_one() {
    // two overloaded satellites share the only idle relay
    let c = table(
        3,
        &[(0, 2), (1, 2)],
        &vec![vec![(0, 2)]; 4],
        BandwidthProfile::uniform(5),
    );
    let actions = codld_slot(&c, 0, &[9, 9, 0], &[0; 3], &LOOK);
    let isl: Vec<_> = actions
        .iter()
        .filter(|a| matches!(a.to, Endpoint::Sat(_)))
        .collect();
    assert_eq!(isl.len(), 1);
}

fn ring_scenario() -> (ContactTable, GenerationSchedule) {
    // a ring of 6; the station sees satellite (t / 2) % 6
    let pairs: Vec<(usize, usize)> = (0..6)
        .map(|i| (i.min((i + 1) % 6), i.max((i + 1) % 6)))
        .collect();
    let gsl: Vec<Vec<(usize, usize)>> = (0..80).map(|t| vec![(0, (t / 2) % 6)]).collect();
    let c = table(
        6,
        &pairs,
        &gsl,
        BandwidthProfile {
            gsl_units: 6,
            isl_units: 4,
            uplink_units: 100,
        },
    );
    (c, GenerationSchedule::burst(&[10, 20, 5, 0, 15, 7]))
}

#[test]
fn codld_and_modify_agree_on_slot_zero_generation() {
    let (c, gen) = ring_scenario();
    let env = Environment {
        contacts: &c,
        generation: &gen,
    };
    let schedule = codld_schedule(&c, &gen, &LOOK);
    let mut modify = CoDldModify::new(LOOK);
    let mut state = SimulationState::new(6, 1);
    let mut inj = FaultModel::none().injector();
    for planned in &schedule {
        let actions = modify.actions(&state, &env).unwrap();
        assert_eq!(&actions, planned);
        step(&mut state, &actions, &env, &mut inj);
    }
    let stop = StopCondition { slot_cap: 80 };
    let a = run(&env, &mut CoDld::new(LOOK), &FaultModel::none(), stop).unwrap();
    let b = run(&env, &mut CoDldModify::new(LOOK), &FaultModel::none(), stop).unwrap();
    assert_eq!(a.throughput, b.throughput);
    assert_eq!(a.t_download, b.t_download);
    assert!(a.is_complete());
}

#[test]
fn codld_waits_for_all_generation() {
    let (c, _) = ring_scenario();
    let gen = GenerationSchedule::continuous(6, 2, 5);
    let schedule = codld_schedule(&c, &gen, &LOOK);
    assert!(schedule[..4].iter().all(Vec::is_empty));
    assert!(!schedule[4].is_empty());
}

#[test]
fn modify_without_contacts_only_accumulates() {
    let c = table(2, &[(0, 1)], &vec![vec![]; 6], BandwidthProfile::uniform(5));
    let gen = GenerationSchedule::continuous(2, 3, 6);
    let env = Environment {
        contacts: &c,
        generation: &gen,
    };
    let mut s = CoDldModify::new(LOOK);
    let mut state = SimulationState::new(2, 1);
    let mut inj = FaultModel::none().injector();
    for t in 0..5 {
        assert!(s.actions(&state, &env).unwrap().is_empty());
        step(&mut state, &[], &env, &mut inj);
        assert_eq!(state.queue_lengths(), vec![3 * (t as u64 + 1); 2]);
    }
}

#[test]
fn modify_keeps_up_with_slow_generation() {
    let c = table(
        1,
        &[],
        &vec![vec![(0, 0)]; 12],
        BandwidthProfile::uniform(5),
    );
    let gen = GenerationSchedule::continuous(1, 4, 10);
    let env = Environment {
        contacts: &c,
        generation: &gen,
    };
    let log = run(
        &env,
        &mut CoDldModify::new(LOOK),
        &FaultModel::none(),
        StopCondition { slot_cap: 12 },
    )
    .unwrap();
    assert!(log.queue_history.iter().all(|q| q[0] == 0));
    assert_eq!(log.t_download, Some(10));
}

#[test]
fn greedy_chain_forwards_in_parallel() {
    // 0 - 1 - 2, only 2 in contact
    let c = table(
        3,
        &[(0, 1), (1, 2)],
        &vec![vec![(0, 2)]; 4],
        BandwidthProfile {
            gsl_units: 10,
            isl_units: 3,
            uplink_units: 10,
        },
    );
    let gen = GenerationSchedule::burst(&[5, 5, 0]);
    let env = Environment {
        contacts: &c,
        generation: &gen,
    };
    let mut g = GreedyIsl::new();
    let mut state = SimulationState::new(3, 1);
    let actions = g.actions(&state, &env).unwrap();
    assert_eq!(
        actions,
        vec![Transfer::isl(0, 1, 3), Transfer::isl(1, 2, 3)]
    );
    step(
        &mut state,
        &actions,
        &env,
        &mut FaultModel::none().injector(),
    );
    assert_eq!(state.queue_lengths(), vec![2, 5, 3]);
}

#[test]
fn greedy_shared_next_hop_congests() {
    // 0 and 2 both forward through 1, which drains 2 units per slot
    let c = table(
        4,
        &[(0, 1), (1, 2), (1, 3)],
        &vec![vec![(0, 3)]; 6],
        BandwidthProfile {
            gsl_units: 2,
            isl_units: 2,
            uplink_units: 10,
        },
    );
    let gen = GenerationSchedule::burst(&[10, 0, 10, 0]);
    let env = Environment {
        contacts: &c,
        generation: &gen,
    };
    let mut g = GreedyIsl::new();
    let mut state = SimulationState::new(4, 1);
    let mut inj = FaultModel::none().injector();
    let mut relay = Vec::new();
    for _ in 0..4 {
        let actions = g.actions(&state, &env).unwrap();
        step(&mut state, &actions, &env, &mut inj);
        relay.push(state.sat_queues[1].total());
    }
    assert!(relay.windows(2).all(|w| w[1] > w[0]), "{relay:?}");
    assert_eq!(g.recomputations(), 1);
}

#[test]
fn no_isl_never_drains_disconnected_satellite() {
    let c = table(
        2,
        &[(0, 1)],
        &vec![vec![(0, 1)]; 10],
        BandwidthProfile::uniform(4),
    );
    let gen = GenerationSchedule::burst(&[5, 50]);
    let env = Environment {
        contacts: &c,
        generation: &gen,
    };
    let log = run(
        &env,
        &mut GreedyNoIsl,
        &FaultModel::none(),
        StopCondition { slot_cap: 10 },
    )
    .unwrap();
    assert_eq!(log.t_download, None);
    assert_eq!(log.left_on_satellites, 5 + 50 - 4 * 10);
    assert!(log.delivered <= 10 * 4);
}
