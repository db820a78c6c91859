//! Integer min-cost max-flow by successive shortest augmenting paths.
//!
//! Potentials start from one label-correcting (Bellman-Ford style) pass,
//! after which every phase runs Dijkstra on reduced costs and then pushes a
//! blocking flow through the zero-reduced-cost subgraph. Pushing many paths
//! per Dijkstra keeps the phase count near the number of distinct path
//! lengths, which for the layered graphs here is bounded by the horizon.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use super::network::{FlowNetwork, FlowResult};

const INF: i64 = i64::MAX / 4;
const DEAD: u32 = u32::MAX;

struct Residual {
    source: usize,
    sink: usize,
    /// CSR offsets into `arcs`
    start: Vec<usize>,
    arcs: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<i64>,
}

impl Residual {
    /// Arc `2k` is edge `k`, arc `2k + 1` its reverse.
    fn new(net: &FlowNetwork) -> Self {
        let n = net.node_count;
        let m = net.edges.len();
        let mut to = Vec::with_capacity(2 * m);
        let mut cap = Vec::with_capacity(2 * m);
        let mut cost = Vec::with_capacity(2 * m);
        let mut degree = vec![0usize; n + 1];
        for e in &net.edges {
            to.extend([e.to, e.from]);
            cap.extend([e.capacity.min(i64::MAX as u64 / 4) as i64, 0]);
            cost.extend([e.cost, -e.cost]);
            degree[e.from] += 1;
            degree[e.to] += 1;
        }
        let mut start = vec![0usize; n + 1];
        for v in 0..n {
            start[v + 1] = start[v] + degree[v];
        }
        let mut fill = start.clone();
        let mut arcs = vec![0usize; 2 * m];
        for (k, e) in net.edges.iter().enumerate() {
            arcs[fill[e.from]] = 2 * k;
            fill[e.from] += 1;
            arcs[fill[e.to]] = 2 * k + 1;
            fill[e.to] += 1;
        }
        Self {
            source: net.source,
            sink: net.sink,
            start,
            arcs,
            to,
            cap,
            cost,
        }
    }

    fn node_count(&self) -> usize {
        self.start.len() - 1
    }

    fn out(&self, v: usize) -> &[usize] {
        &self.arcs[self.start[v]..self.start[v + 1]]
    }

    fn push(&mut self, arc: usize, amount: i64) {
        self.cap[arc] -= amount;
        self.cap[arc ^ 1] += amount;
    }

    /// Shortest distances from the source over arcs with residual capacity,
    /// by label correction. Works with negative arc costs as long as no
    /// negative cycle is reachable.
    fn label_correcting(&self) -> Vec<i64> {
        let n = self.node_count();
        let mut dist = vec![INF; n];
        let mut queued = vec![false; n];
        let mut queue = VecDeque::new();
        dist[self.source] = 0;
        queue.push_back(self.source);
        queued[self.source] = true;
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            for &a in self.out(u) {
                if self.cap[a] > 0 {
                    let v = self.to[a];
                    let nd = dist[u] + self.cost[a];
                    if nd < dist[v] {
                        dist[v] = nd;
                        if !queued[v] {
                            queued[v] = true;
                            queue.push_back(v);
                        }
                    }
                }
            }
        }
        dist
    }

    fn dijkstra(&self, potential: &[i64], dist: &mut [i64]) {
        dist.fill(INF);
        let mut heap = BinaryHeap::new();
        dist[self.source] = 0;
        heap.push(Reverse((0i64, self.source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &a in self.out(u) {
                if self.cap[a] <= 0 {
                    continue;
                }
                let v = self.to[a];
                let reduced = self.cost[a] + potential[u] - potential[v];
                debug_assert!(reduced >= 0, "negative reduced cost {reduced}");
                let nd = d + reduced;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
    }

    /// Dinic blocking flows restricted to arcs accepted by `admissible`,
    /// repeated until the sink is cut off. Returns the flow pushed.
    fn blocking_flows(&mut self, admissible: impl Fn(&Self, usize, usize) -> bool) -> i64 {
        let n = self.node_count();
        let mut level = vec![DEAD; n];
        let mut iter = vec![0usize; n];
        let mut total = 0i64;
        loop {
            level.fill(DEAD);
            level[self.source] = 0;
            let mut queue = VecDeque::from([self.source]);
            while let Some(u) = queue.pop_front() {
                for &a in self.out(u) {
                    let v = self.to[a];
                    if self.cap[a] > 0 && level[v] == DEAD && admissible(self, u, a) {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if level[self.sink] == DEAD {
                return total;
            }
            for v in 0..n {
                iter[v] = self.start[v];
            }
            // iterative DFS along level-increasing arcs
            let mut path: Vec<usize> = Vec::new();
            let mut u = self.source;
            loop {
                if u == self.sink {
                    let bottleneck = path.iter().map(|&a| self.cap[a]).min().unwrap_or(0);
                    for &a in &path {
                        self.push(a, bottleneck);
                    }
                    total += bottleneck;
                    // retreat to the tail of the first saturated arc
                    let cut = path
                        .iter()
                        .position(|&a| self.cap[a] == 0)
                        .expect("bottleneck arc saturates");
                    path.truncate(cut);
                    u = path.last().map_or(self.source, |&a| self.to[a]);
                    continue;
                }
                let mut advanced = false;
                while iter[u] < self.start[u + 1] {
                    let a = self.arcs[iter[u]];
                    let v = self.to[a];
                    if self.cap[a] > 0 && level[v] == level[u] + 1 && admissible(self, u, a) {
                        path.push(a);
                        u = v;
                        advanced = true;
                        break;
                    }
                    iter[u] += 1;
                }
                if advanced {
                    continue;
                }
                level[u] = DEAD;
                match path.pop() {
                    Some(a) => {
                        u = self.to[a ^ 1];
                        iter[u] += 1;
                    }
                    None => break,
                }
            }
        }
    }

    fn into_result(self, net: &FlowNetwork, value: i64) -> FlowResult {
        let edge_flows: Vec<u64> = (0..net.edges.len())
            .map(|k| self.cap[2 * k + 1] as u64)
            .collect();
        let total_cost = net
            .edges
            .iter()
            .zip(&edge_flows)
            .map(|(e, &f)| e.cost * f as i64)
            .sum();
        FlowResult {
            max_flow_value: value as u64,
            total_cost,
            edge_flows,
        }
    }
}

/// Maximum flow of minimum total cost. Costs must be non-negative.
pub fn min_cost_max_flow(net: &FlowNetwork) -> FlowResult {
    debug_assert!(net.edges.iter().all(|e| e.cost >= 0));
    let mut res = Residual::new(net);
    if net.source == net.sink {
        return res.into_result(net, 0);
    }
    let n = res.node_count();
    let mut potential = res.label_correcting();
    // unreachable nodes can never join later, any finite label works
    for p in potential.iter_mut() {
        if *p >= INF {
            *p = 0;
        }
    }
    let mut dist = vec![INF; n];
    let mut value = 0i64;
    loop {
        res.dijkstra(&potential, &mut dist);
        if dist[res.sink] >= INF {
            break;
        }
        for v in 0..n {
            if dist[v] < INF {
                potential[v] += dist[v];
            }
        }
        let pushed =
            res.blocking_flows(|r, u, a| r.cost[a] + potential[u] - potential[r.to[a]] == 0);
        debug_assert!(pushed > 0);
        value += pushed;
    }
    res.into_result(net, value)
}

/// Maximum flow value only (Dinic), ignoring costs.
pub fn max_flow_value(net: &FlowNetwork) -> u64 {
    if net.source == net.sink {
        return 0;
    }
    let mut res = Residual::new(net);
    res.blocking_flows(|_, _, _| true) as u64
}
