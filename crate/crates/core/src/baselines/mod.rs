//! Comparison schedulers: CoDld, CoDld re-run per slot, and greedy
//! forwarding with and without inter-satellite links.

mod codld;
mod greedy;
mod hops;
mod matching;

pub use codld::{
    codld_schedule, codld_slot, CoDld, CoDldConfig, CoDldCore, CoDldModify, CoDldState,
};
pub use greedy::{GreedyIsl, GreedyNoIsl};
pub use hops::{
    bfs_hop_distances, floyd_hop_distances, live_adjacency, HopDistanceMap, UNREACHABLE,
};
pub use matching::hopcroft_karp;
