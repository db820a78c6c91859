use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeTag {
    Generation,
    Gsl,
    Isl,
    Storage,
    Uplink,
    /// Edges of hand-built networks that carry no layered meaning.
    Plain,
}

impl EdgeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeTag::Generation => "generation",
            EdgeTag::Gsl => "gsl",
            EdgeTag::Isl => "isl",
            EdgeTag::Storage => "storage",
            EdgeTag::Uplink => "uplink",
            EdgeTag::Plain => "plain",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "generation" => EdgeTag::Generation,
            "gsl" => EdgeTag::Gsl,
            "isl" => EdgeTag::Isl,
            "storage" => EdgeTag::Storage,
            "uplink" => EdgeTag::Uplink,
            "plain" => EdgeTag::Plain,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub capacity: u64,
    pub cost: i64,
    pub tag: EdgeTag,
}

/// Directed capacitated network with a designated source and sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    pub node_count: usize,
    pub source: usize,
    pub sink: usize,
    pub edges: Vec<Edge>,
}

impl FlowNetwork {
    pub fn new(node_count: usize, source: usize, sink: usize) -> Self {
        assert!(source < node_count && sink < node_count);
        Self {
            node_count,
            source,
            sink,
            edges: Vec::new(),
        }
    }

    pub fn add_edge(
        &mut self,
        from: usize,
        to: usize,
        capacity: u64,
        cost: i64,
        tag: EdgeTag,
    ) -> usize {
        assert!(from < self.node_count && to < self.node_count);
        self.edges.push(Edge {
            from,
            to,
            capacity,
            cost,
            tag,
        });
        self.edges.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult {
    pub max_flow_value: u64,
    pub total_cost: i64,
    /// Indexed like the network's edge list.
    pub edge_flows: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityError {
    WrongLength {
        expected: usize,
        got: usize,
    },
    OverCapacity {
        edge: usize,
        flow: u64,
        capacity: u64,
    },
    Unbalanced {
        node: usize,
        inflow: u64,
        outflow: u64,
    },
    ValueMismatch {
        claimed: u64,
        source_net: i128,
        sink_net: i128,
    },
    CostMismatch {
        claimed: i64,
        actual: i64,
    },
}

impl FlowResult {
    /// Verifies capacity, conservation and the reported value and cost.
    pub fn check_feasible(&self, net: &FlowNetwork) -> Result<(), FeasibilityError> {
        if self.edge_flows.len() != net.edges.len() {
            return Err(FeasibilityError::WrongLength {
                expected: net.edges.len(),
                got: self.edge_flows.len(),
            });
        }
        let mut inflow = vec![0u64; net.node_count];
        let mut outflow = vec![0u64; net.node_count];
        let mut cost = 0i64;
        for (idx, (e, &f)) in net.edges.iter().zip(&self.edge_flows).enumerate() {
            if f > e.capacity {
                return Err(FeasibilityError::OverCapacity {
                    edge: idx,
                    flow: f,
                    capacity: e.capacity,
                });
            }
            outflow[e.from] += f;
            inflow[e.to] += f;
            cost += f as i64 * e.cost;
        }
        for node in 0..net.node_count {
            if node != net.source && node != net.sink && inflow[node] != outflow[node] {
                return Err(FeasibilityError::Unbalanced {
                    node,
                    inflow: inflow[node],
                    outflow: outflow[node],
                });
            }
        }
        let source_net = outflow[net.source] as i128 - inflow[net.source] as i128;
        let sink_net = inflow[net.sink] as i128 - outflow[net.sink] as i128;
        if source_net != self.max_flow_value as i128 || sink_net != self.max_flow_value as i128 {
            return Err(FeasibilityError::ValueMismatch {
                claimed: self.max_flow_value,
                source_net,
                sink_net,
            });
        }
        if cost != self.total_cost {
            return Err(FeasibilityError::CostMismatch {
                claimed: self.total_cost,
                actual: cost,
            });
        }
        Ok(())
    }
}
