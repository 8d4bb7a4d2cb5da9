//! A small residual-graph flow network: maximum flow, and min-cost flow with
//! real costs by successive shortest paths.

use std::collections::VecDeque;

const COST_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i64,
    cost: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        FlowNetwork {
            arcs: Vec::new(),
            out: vec![Vec::new(); nodes],
        }
    }

    /// Adds `from → to` and its residual twin; returns the forward arc id.
    pub(crate) fn add_arc(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.out[from].push(id);
        self.out[to].push(id + 1);
        id
    }

    /// Flow currently carried by a forward arc.
    pub(crate) fn flow_on(&self, arc: usize) -> i64 {
        self.arcs[arc ^ 1].cap
    }

    fn push_along(&mut self, path: &[usize], amount: i64) {
        for &a in path {
            self.arcs[a].cap -= amount;
            self.arcs[a ^ 1].cap += amount;
        }
    }

    fn bottleneck(&self, path: &[usize]) -> i64 {
        path.iter().map(|&a| self.arcs[a].cap).min().unwrap_or(0)
    }

    fn path_to(&self, pred: &[Option<usize>], source: usize, sink: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut v = sink;
        while v != source {
            let a = pred[v].expect("sink is reachable");
            path.push(a);
            v = self.arcs[a ^ 1].to;
        }
        path.reverse();
        path
    }

    /// Maximum flow from `source` to `sink` (shortest augmenting paths).
    pub(crate) fn max_flow(&mut self, source: usize, sink: usize) -> i64 {
        let n = self.out.len();
        let mut total = 0;
        loop {
            let mut pred = vec![None; n];
            let mut seen = vec![false; n];
            seen[source] = true;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                for &a in &self.out[u] {
                    let v = self.arcs[a].to;
                    if self.arcs[a].cap > 0 && !seen[v] {
                        seen[v] = true;
                        pred[v] = Some(a);
                        queue.push_back(v);
                    }
                }
            }
            if !seen[sink] {
                return total;
            }
            let path = self.path_to(&pred, source, sink);
            let amount = self.bottleneck(&path);
            self.push_along(&path, amount);
            total += amount;
        }
    }

    /// Pushes flow along cheapest paths for as long as they have negative
    /// cost, which minimizes total cost over all flow values. Returns the
    /// total cost. The residual graph must start free of negative cycles.
    pub(crate) fn min_cost_flow(&mut self, source: usize, sink: usize) -> f64 {
        let n = self.out.len();
        let mut total = 0.0;
        loop {
            // Queue-based Bellman–Ford; relaxations need a strict margin so
            // rounding cannot cycle.
            let mut dist = vec![f64::INFINITY; n];
            let mut pred = vec![None; n];
            let mut queued = vec![false; n];
            let mut relaxations = vec![0usize; n];
            dist[source] = 0.0;
            let mut queue = VecDeque::from([source]);
            queued[source] = true;
            while let Some(u) = queue.pop_front() {
                queued[u] = false;
                for &a in &self.out[u] {
                    let arc = &self.arcs[a];
                    if arc.cap <= 0 {
                        continue;
                    }
                    let d = dist[u] + arc.cost;
                    if d < dist[arc.to] - COST_EPS {
                        dist[arc.to] = d;
                        pred[arc.to] = Some(a);
                        relaxations[arc.to] += 1;
                        if !queued[arc.to] && relaxations[arc.to] <= n {
                            queued[arc.to] = true;
                            queue.push_back(arc.to);
                        }
                    }
                }
            }
            if !(dist[sink] < -COST_EPS) {
                return total;
            }
            let path = self.path_to(&pred, source, sink);
            let amount = self.bottleneck(&path);
            self.push_along(&path, amount);
            total += amount as f64 * dist[sink];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_flow_diamond() {
        let mut g = FlowNetwork::new(4);
        g.add_arc(0, 1, 3, 0.0);
        g.add_arc(0, 2, 2, 0.0);
        g.add_arc(1, 2, 5, 0.0);
        g.add_arc(1, 3, 2, 0.0);
        g.add_arc(2, 3, 3, 0.0);
        assert_eq!(g.max_flow(0, 3), 5);
    }

    #[test]
    fn min_cost_flow_stops_at_nonnegative_paths() {
        // Two unit paths of cost −2 and +1: only the first is worth taking.
        let mut g = FlowNetwork::new(4);
        let a = g.add_arc(0, 1, 1, -2.0);
        let b = g.add_arc(0, 2, 1, 1.0);
        g.add_arc(1, 3, 1, 0.0);
        g.add_arc(2, 3, 1, 0.0);
        assert_eq!(g.min_cost_flow(0, 3), -2.0);
        assert_eq!(g.flow_on(a), 1);
        assert_eq!(g.flow_on(b), 0);
    }

    #[test]
    fn min_cost_flow_reroutes_through_residual_arcs() {
        // Agents 1, 2; localities 3, 4 each of cap 1. Greedy on the best
        // single edge (1→3, weight 5) must be undone to reach 4 + 4.
        let mut g = FlowNetwork::new(6);
        g.add_arc(0, 1, 1, 0.0);
        g.add_arc(0, 2, 1, 0.0);
        g.add_arc(1, 3, 1, -5.0);
        g.add_arc(1, 4, 1, -4.0);
        g.add_arc(2, 3, 1, -4.0);
        g.add_arc(3, 5, 1, 0.0);
        g.add_arc(4, 5, 1, 0.0);
        assert_eq!(g.min_cost_flow(0, 5), -8.0);
    }
}
