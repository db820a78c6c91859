use std::fmt::Write as _;

use thiserror::Error;

use super::network::{Edge, EdgeTag, FlowNetwork};
use super::schedule::GenerationSchedule;
use crate::constellation::ContactTable;

pub const SOURCE: usize = 0;
pub const SINK: usize = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("horizon must be at least one slot")]
    ZeroHorizon,
    #[error("contact table covers {available} slots from slot {start}, {requested} requested")]
    HorizonMismatch {
        start: usize,
        requested: usize,
        available: usize,
    },
    #[error("{what}: expected {expected} satellites, got {got}")]
    SatelliteCount {
        what: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Node of the layered graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKey {
    Source,
    Sink,
    Sat { sat: usize, layer: usize },
    Station { station: usize, layer: usize },
}

/// Layered flow network over `horizon` slots: layers `0..=horizon`, with
/// transmissions during slot `t` running from layer `t` to layer `t + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeExpandedGraph {
    pub horizon: usize,
    pub sat_count: usize,
    pub station_count: usize,
    /// Absolute slot of layer 0.
    pub start_slot: usize,
    pub network: FlowNetwork,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GraphOptions {
    /// Capacity of storage edges; `None` means "enough for everything".
    pub storage_cap: Option<u64>,
}

impl TimeExpandedGraph {
    fn layer_width(&self) -> usize {
        self.sat_count + self.station_count
    }

    pub fn sat_node(&self, sat: usize, layer: usize) -> usize {
        2 + layer * self.layer_width() + sat
    }

    pub fn station_node(&self, station: usize, layer: usize) -> usize {
        2 + layer * self.layer_width() + self.sat_count + station
    }

    pub fn node_count(&self) -> usize {
        self.network.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.network.edges
    }

    pub fn key(&self, node: usize) -> NodeKey {
        match node {
            SOURCE => NodeKey::Source,
            SINK => NodeKey::Sink,
            _ => {
                let rel = node - 2;
                let layer = rel / self.layer_width();
                let idx = rel % self.layer_width();
                if idx < self.sat_count {
                    NodeKey::Sat { sat: idx, layer }
                } else {
                    NodeKey::Station {
                        station: idx - self.sat_count,
                        layer,
                    }
                }
            }
        }
    }

    pub fn label(&self, node: usize) -> String {
        match self.key(node) {
            NodeKey::Source => "source".into(),
            NodeKey::Sink => "sink".into(),
            NodeKey::Sat { sat, layer } => format!("S{sat}@{layer}"),
            NodeKey::Station { station, layer } => format!("G{station}@{layer}"),
        }
    }

    /// Plain-text edge list, one `from to capacity cost tag` line per edge.
    pub fn dump_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# horizon={} sats={} stations={} start={}",
            self.horizon, self.sat_count, self.station_count, self.start_slot
        );
        for e in &self.network.edges {
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                self.label(e.from),
                self.label(e.to),
                e.capacity,
                e.cost,
                e.tag.as_str()
            );
        }
        out
    }
}

/// Reads back a [`TimeExpandedGraph::dump_edge_list`] dump as a bare
/// network (node ids follow the same layout).
pub fn parse_edge_list(text: &str) -> Result<FlowNetwork, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty dump")?;
    let field = |name: &str| -> Result<usize, String> {
        header
            .split_whitespace()
            .find_map(|kv| kv.strip_prefix(&format!("{name}=")))
            .ok_or(format!("header lacks {name}"))?
            .parse()
            .map_err(|e| format!("{name}: {e}"))
    };
    let (horizon, sats, stations) = (field("horizon")?, field("sats")?, field("stations")?);
    let width = sats + stations;
    let node_count = 2 + (horizon + 1) * width;
    let node = |label: &str| -> Result<usize, String> {
        match label {
            "source" => return Ok(SOURCE),
            "sink" => return Ok(SINK),
            _ => {}
        }
        let (body, layer) = label.split_once('@').ok_or(format!("bad node {label}"))?;
        let layer: usize = layer.parse().map_err(|_| format!("bad layer in {label}"))?;
        let (offset, idx) = match body.split_at(1) {
            ("S", i) => (0, i),
            ("G", i) => (sats, i),
            _ => return Err(format!("bad node {label}")),
        };
        let idx: usize = idx.parse().map_err(|_| format!("bad index in {label}"))?;
        Ok(2 + layer * width + offset + idx)
    };
    let mut net = FlowNetwork::new(node_count, SOURCE, SINK);
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [from, to, cap, cost, tag] = parts[..] else {
            return Err(format!("line {}: expected 5 fields", lineno + 2));
        };
        let tag = EdgeTag::parse(tag).ok_or(format!("line {}: bad tag", lineno + 2))?;
        net.add_edge(
            node(from)?,
            node(to)?,
            cap.parse()
                .map_err(|e| format!("line {}: {e}", lineno + 2))?,
            cost.parse()
                .map_err(|e| format!("line {}: {e}", lineno + 2))?,
            tag,
        );
    }
    Ok(net)
}

/// Builds the layered graph for slots `start .. start + horizon` of the
/// contact table. `generation` and `initial_queues` are relative to `start`.
pub fn build_time_expanded_graph(
    contacts: &ContactTable,
    start: usize,
    generation: &GenerationSchedule,
    initial_queues: &[u64],
    horizon: usize,
    options: GraphOptions,
) -> Result<TimeExpandedGraph, BuildError> {
    if horizon == 0 {
        return Err(BuildError::ZeroHorizon);
    }
    let available = contacts.horizon().saturating_sub(start);
    if horizon > available {
        return Err(BuildError::HorizonMismatch {
            start,
            requested: horizon,
            available,
        });
    }
    let n = contacts.sat_count();
    let m = contacts.station_count();
    if initial_queues.len() != n {
        return Err(BuildError::SatelliteCount {
            what: "initial queues",
            expected: n,
            got: initial_queues.len(),
        });
    }
    if generation.sat_count() != n && generation.window() > 0 {
        return Err(BuildError::SatelliteCount {
            what: "generation schedule",
            expected: n,
            got: generation.sat_count(),
        });
    }

    let node_count = 2 + (horizon + 1) * (n + m);
    let mut g = TimeExpandedGraph {
        horizon,
        sat_count: n,
        station_count: m,
        start_slot: start,
        network: FlowNetwork::new(node_count, SOURCE, SINK),
    };
    let storage_cap = options
        .storage_cap
        .unwrap_or_else(|| initial_queues.iter().sum::<u64>() + generation.total_until(horizon));
    let bw = contacts.bandwidth();

    let mut edges = Vec::new();
    let mut add = |from: usize, to: usize, capacity: u64, tag: EdgeTag| {
        if capacity > 0 {
            edges.push((from, to, capacity, tag));
        }
    };

    for (sat, &q) in initial_queues.iter().enumerate() {
        add(SOURCE, g.sat_node(sat, 0), q, EdgeTag::Generation);
    }
    for t in 0..horizon {
        for sat in 0..n {
            add(
                SOURCE,
                g.sat_node(sat, t),
                generation.at(t, sat),
                EdgeTag::Generation,
            );
        }
    }
    for t in 0..horizon {
        let slot = contacts.slot(start + t);
        for c in &slot.gsl {
            add(
                g.sat_node(c.sat, t),
                g.station_node(c.station, t + 1),
                bw.gsl_units,
                EdgeTag::Gsl,
            );
        }
        for (link, up) in contacts.links().iter().zip(&slot.isl_up) {
            if *up {
                add(
                    g.sat_node(link.a, t),
                    g.sat_node(link.b, t + 1),
                    bw.isl_units,
                    EdgeTag::Isl,
                );
                add(
                    g.sat_node(link.b, t),
                    g.sat_node(link.a, t + 1),
                    bw.isl_units,
                    EdgeTag::Isl,
                );
            }
        }
        for sat in 0..n {
            add(
                g.sat_node(sat, t),
                g.sat_node(sat, t + 1),
                storage_cap,
                EdgeTag::Storage,
            );
        }
        for station in 0..m {
            add(
                g.station_node(station, t),
                g.station_node(station, t + 1),
                storage_cap,
                EdgeTag::Storage,
            );
        }
    }
    for t in 1..=horizon {
        for station in 0..m {
            add(
                g.station_node(station, t),
                SINK,
                bw.uplink_units,
                EdgeTag::Uplink,
            );
        }
    }
    for (from, to, capacity, tag) in edges {
        g.network.add_edge(from, to, capacity, 1, tag);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{BandwidthProfile, GslContact, SlotContacts};

    fn one_pair(slots: usize, contact_slots: &[usize]) -> ContactTable {
        let slots = (0..slots)
            .map(|t| SlotContacts {
                gsl: if contact_slots.contains(&t) {
                    vec![GslContact { station: 0, sat: 0 }]
                } else {
                    vec![]
                },
                isl_up: vec![],
            })
            .collect();
        ContactTable::from_slots(1, 1, &[], slots, BandwidthProfile::uniform(10), 1.0).unwrap()
    }

    #[test]
    fn layout_and_labels() {
        let table = one_pair(2, &[0]);
        let g = build_time_expanded_graph(
            &table,
            0,
            &GenerationSchedule::burst(&[5]),
            &[0],
            2,
            GraphOptions::default(),
        )
        .unwrap();
        assert_eq!(g.node_count(), 8);
        assert_eq!(g.label(g.sat_node(0, 1)), "S0@1");
        assert_eq!(g.label(g.station_node(0, 2)), "G0@2");
        assert!(g.edges().iter().all(|e| e.cost == 1));
        let gsl: Vec<_> = g.edges().iter().filter(|e| e.tag == EdgeTag::Gsl).collect();
        assert_eq!(gsl.len(), 1);
        assert_eq!(
            (gsl[0].from, gsl[0].to),
            (g.sat_node(0, 0), g.station_node(0, 1))
        );
    }

    #[test]
    fn structural_invariants() {
        let table = one_pair(4, &[1, 2]);
        let g = build_time_expanded_graph(
            &table,
            0,
            &GenerationSchedule::continuous(1, 3, 4),
            &[2],
            4,
            GraphOptions::default(),
        )
        .unwrap();
        for e in g.edges() {
            match (e.tag, g.key(e.from), g.key(e.to)) {
                (EdgeTag::Generation, NodeKey::Source, NodeKey::Sat { .. }) => {}
                (EdgeTag::Uplink, NodeKey::Station { .. }, NodeKey::Sink) => {}
                (
                    EdgeTag::Storage,
                    NodeKey::Sat { sat: a, layer: la },
                    NodeKey::Sat { sat: b, layer: lb },
                ) => {
                    assert_eq!((a, la + 1), (b, lb))
                }
                (
                    EdgeTag::Storage,
                    NodeKey::Station {
                        station: a,
                        layer: la,
                    },
                    NodeKey::Station {
                        station: b,
                        layer: lb,
                    },
                ) => assert_eq!((a, la + 1), (b, lb)),
                (
                    EdgeTag::Gsl,
                    NodeKey::Sat { layer: la, .. },
                    NodeKey::Station { layer: lb, .. },
                ) => {
                    assert_eq!(la + 1, lb)
                }
                other => panic!("unexpected edge {other:?}"),
            }
        }
        // storage bound = everything that could ever enter
        let storage = g
            .edges()
            .iter()
            .find(|e| e.tag == EdgeTag::Storage)
            .unwrap();
        assert_eq!(storage.capacity, 2 + 12);
    }

    #[test]
    fn horizon_errors() {
        let table = one_pair(2, &[0]);
        let gen = GenerationSchedule::empty(1);
        assert_eq!(
            build_time_expanded_graph(&table, 0, &gen, &[0], 0, GraphOptions::default()),
            Err(BuildError::ZeroHorizon)
        );
        assert!(matches!(
            build_time_expanded_graph(&table, 1, &gen, &[0], 2, GraphOptions::default()),
            Err(BuildError::HorizonMismatch { .. })
        ));
        assert!(matches!(
            build_time_expanded_graph(&table, 0, &gen, &[0, 0], 1, GraphOptions::default()),
            Err(BuildError::SatelliteCount { .. })
        ));
    }

    #[test]
    fn dump_parses_back() {
        let table = one_pair(3, &[0, 2]);
        let g = build_time_expanded_graph(
            &table,
            0,
            &GenerationSchedule::continuous(1, 4, 2),
            &[1],
            3,
            GraphOptions::default(),
        )
        .unwrap();
        let parsed = parse_edge_list(&g.dump_edge_list()).unwrap();
        assert_eq!(parsed, g.network);
    }
}
