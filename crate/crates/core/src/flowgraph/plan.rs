use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::graph::{NodeKey, TimeExpandedGraph};
use super::network::{EdgeTag, FeasibilityError, FlowResult};
use super::schedule::GenerationSchedule;
use crate::constellation::ContactTable;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("flow is not feasible for the graph: {0:?}")]
    Infeasible(FeasibilityError),
    #[error("malformed plan document: {0}")]
    Document(String),
}

/// Per-slot transfer volumes. Slot indices are relative to `start_slot`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransmissionPlan {
    pub start_slot: usize,
    pub horizon: usize,
    /// `d_isl[t][(from, to)]`
    pub d_isl: Vec<BTreeMap<(usize, usize), u64>>,
    /// `d_gsl[t][(sat, station)]`
    pub d_gsl: Vec<BTreeMap<(usize, usize), u64>>,
}

impl TransmissionPlan {
    pub fn empty(start_slot: usize, horizon: usize) -> Self {
        Self {
            start_slot,
            horizon,
            d_isl: vec![BTreeMap::new(); horizon],
            d_gsl: vec![BTreeMap::new(); horizon],
        }
    }

    pub fn end_slot(&self) -> usize {
        self.start_slot + self.horizon
    }

    pub fn is_empty(&self) -> bool {
        self.d_isl.iter().all(BTreeMap::is_empty) && self.d_gsl.iter().all(BTreeMap::is_empty)
    }

    /// Units handed to ground stations over the whole plan.
    pub fn delivered(&self) -> u64 {
        self.d_gsl.iter().flat_map(|m| m.values()).sum()
    }

    /// Units sent over ISLs over the whole plan.
    pub fn relayed(&self) -> u64 {
        self.d_isl.iter().flat_map(|m| m.values()).sum()
    }

    pub fn outflow(&self, t: usize, sat: usize) -> u64 {
        let isl: u64 = self.d_isl[t]
            .iter()
            .filter(|((from, _), _)| *from == sat)
            .map(|(_, u)| u)
            .sum();
        let gsl: u64 = self.d_gsl[t]
            .iter()
            .filter(|((from, _), _)| *from == sat)
            .map(|(_, u)| u)
            .sum();
        isl + gsl
    }

    /// Queue trajectory implied by the plan, `q[t][i]` for `t` in
    /// `0..=horizon`: data on board at the start of slot `t`, before that
    /// slot's generation arrives. Returns `None` if some satellite would be
    /// asked to send more than it holds.
    pub fn predicted_queues(
        &self,
        generation: &GenerationSchedule,
        initial: &[u64],
    ) -> Option<Vec<Vec<u64>>> {
        let n = initial.len();
        let mut out = Vec::with_capacity(self.horizon + 1);
        let mut q = initial.to_vec();
        out.push(q.clone());
        for t in 0..self.horizon {
            let mut next: Vec<i128> = (0..n)
                .map(|i| q[i] as i128 + generation.at(t, i) as i128)
                .collect();
            for (&(from, to), &u) in &self.d_isl[t] {
                next[from] -= u as i128;
                next[to] += u as i128;
            }
            for (&(from, _), &u) in &self.d_gsl[t] {
                next[from] -= u as i128;
            }
            // a send can only use what was there at the start of the slot
            for i in 0..n {
                let available = q[i] + generation.at(t, i);
                if self.outflow(t, i) > available {
                    return None;
                }
            }
            q = next.into_iter().map(|v| v as u64).collect();
            out.push(q.clone());
        }
        Some(out)
    }

    /// Slot-keyed transfer listing for replay and audit.
    pub fn to_document(&self) -> PlanDocument {
        let slots = (0..self.horizon)
            .filter_map(|t| {
                let mut transfers: Vec<PlanTransfer> = self.d_isl[t]
                    .iter()
                    .map(|(&(a, b), &units)| PlanTransfer {
                        from: format!("S{a}"),
                        to: format!("S{b}"),
                        units,
                    })
                    .collect();
                transfers.extend(self.d_gsl[t].iter().map(|(&(s, g), &units)| PlanTransfer {
                    from: format!("S{s}"),
                    to: format!("G{g}"),
                    units,
                }));
                (!transfers.is_empty()).then_some(PlanSlot {
                    slot: self.start_slot + t,
                    transfers,
                })
            })
            .collect();
        PlanDocument {
            start_slot: self.start_slot,
            horizon: self.horizon,
            slots,
        }
    }

    pub fn from_document(doc: &PlanDocument) -> Result<Self, PlanError> {
        let mut plan = Self::empty(doc.start_slot, doc.horizon);
        let bad = |m: String| PlanError::Document(m);
        let index = |s: &str, prefix: char| -> Option<usize> {
            s.strip_prefix(prefix).and_then(|rest| rest.parse().ok())
        };
        for slot in &doc.slots {
            let t = slot
                .slot
                .checked_sub(doc.start_slot)
                .filter(|t| *t < doc.horizon)
                .ok_or_else(|| bad(format!("slot {} outside plan", slot.slot)))?;
            for tr in &slot.transfers {
                let from =
                    index(&tr.from, 'S').ok_or_else(|| bad(format!("bad sender {}", tr.from)))?;
                if let Some(to) = index(&tr.to, 'S') {
                    *plan.d_isl[t].entry((from, to)).or_default() += tr.units;
                } else if let Some(to) = index(&tr.to, 'G') {
                    *plan.d_gsl[t].entry((from, to)).or_default() += tr.units;
                } else {
                    return Err(bad(format!("bad receiver {}", tr.to)));
                }
            }
        }
        Ok(plan)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanDocument {
    pub start_slot: usize,
    pub horizon: usize,
    pub slots: Vec<PlanSlot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanSlot {
    pub slot: usize,
    pub transfers: Vec<PlanTransfer>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanTransfer {
    pub from: String,
    pub to: String,
    pub units: u64,
}

/// Reads the D matrices off the flow on GSL and ISL edges.
pub fn extract_plan(
    graph: &TimeExpandedGraph,
    flow: &FlowResult,
) -> Result<TransmissionPlan, PlanError> {
    flow.check_feasible(&graph.network)
        .map_err(PlanError::Infeasible)?;
    let mut plan = TransmissionPlan::empty(graph.start_slot, graph.horizon);
    for (e, &f) in graph.edges().iter().zip(&flow.edge_flows) {
        if f == 0 {
            continue;
        }
        match (e.tag, graph.key(e.from), graph.key(e.to)) {
            (EdgeTag::Isl, NodeKey::Sat { sat: a, layer }, NodeKey::Sat { sat: b, .. }) => {
                *plan.d_isl[layer].entry((a, b)).or_default() += f;
            }
            (EdgeTag::Gsl, NodeKey::Sat { sat, layer }, NodeKey::Station { station, .. }) => {
                *plan.d_gsl[layer].entry((sat, station)).or_default() += f;
            }
            _ => {}
        }
    }
    Ok(plan)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SatelliteTwoStations {
        slot: usize,
        sat: usize,
    },
    StationTwoSatellites {
        slot: usize,
        station: usize,
    },
    GslOverCapacity {
        slot: usize,
        sat: usize,
        station: usize,
        units: u64,
        capacity: u64,
    },
    IslOverCapacity {
        slot: usize,
        from: usize,
        to: usize,
        units: u64,
        capacity: u64,
    },
    Overdraw {
        slot: usize,
        sat: usize,
        sent: u64,
        stored: u64,
    },
}

/// Checks the five plan constraints against the contact table: at most one
/// station per satellite and one satellite per station each slot, GSL and
/// ISL volumes within the slot's link capacity (zero where no link), and no
/// satellite sending more than it stores.
pub fn check_constraints(
    plan: &TransmissionPlan,
    contacts: &ContactTable,
    generation: &GenerationSchedule,
    initial: &[u64],
) -> Vec<Violation> {
    let mut out = Vec::new();
    let bw = contacts.bandwidth();
    let n = initial.len();
    let mut q = initial.to_vec();
    for t in 0..plan.horizon {
        let abs = plan.start_slot + t;
        let slot = (abs < contacts.horizon()).then(|| contacts.slot(abs));
        let mut per_sat: BTreeMap<usize, usize> = BTreeMap::new();
        let mut per_station: BTreeMap<usize, usize> = BTreeMap::new();
        for (&(sat, station), &units) in &plan.d_gsl[t] {
            if units == 0 {
                continue;
            }
            *per_sat.entry(sat).or_default() += 1;
            *per_station.entry(station).or_default() += 1;
            let linked = slot.is_some_and(|s| s.station_of(sat) == Some(station));
            let capacity = if linked { bw.gsl_units } else { 0 };
            if units > capacity {
                out.push(Violation::GslOverCapacity {
                    slot: abs,
                    sat,
                    station,
                    units,
                    capacity,
                });
            }
        }
        out.extend(
            per_sat
                .into_iter()
                .filter(|(_, c)| *c > 1)
                .map(|(sat, _)| Violation::SatelliteTwoStations { slot: abs, sat }),
        );
        out.extend(
            per_station
                .into_iter()
                .filter(|(_, c)| *c > 1)
                .map(|(station, _)| Violation::StationTwoSatellites { slot: abs, station }),
        );
        for (&(from, to), &units) in &plan.d_isl[t] {
            let up = slot.is_some() && from != to && contacts.isl_up(abs, from, to);
            let capacity = if up { bw.isl_units } else { 0 };
            if units > capacity {
                out.push(Violation::IslOverCapacity {
                    slot: abs,
                    from,
                    to,
                    units,
                    capacity,
                });
            }
        }
        let mut next: Vec<i128> = (0..n)
            .map(|i| (q[i] + generation.at(t, i)) as i128)
            .collect();
        for i in 0..n {
            let stored = q[i] + generation.at(t, i);
            let sent = plan.outflow(t, i);
            if sent > stored {
                out.push(Violation::Overdraw {
                    slot: abs,
                    sat: i,
                    sent,
                    stored,
                });
            }
        }
        for (&(from, to), &u) in &plan.d_isl[t] {
            next[from] -= u as i128;
            next[to] += u as i128;
        }
        for (&(from, _), &u) in &plan.d_gsl[t] {
            next[from] -= u as i128;
        }
        q = next.into_iter().map(|v| v.max(0) as u64).collect();
    }
    out
}
