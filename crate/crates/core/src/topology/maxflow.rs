//! Edmonds–Karp augmenting-path max-flow on the link multigraph.

use std::collections::VecDeque;

use super::{NetworkTopology, TopologyError};

struct Arc {
    to: usize,
    residual: f64,
}

/// Residual network with one forward and one reverse arc per link; arcs
/// `2k` and `2k + 1` belong to link `k`.
struct Residual {
    arcs: Vec<Arc>,
    adjacency: Vec<Vec<usize>>,
}

impl Residual {
    fn new(topo: &NetworkTopology, capacities: &[f64]) -> Self {
        let mut arcs = Vec::with_capacity(2 * topo.link_count());
        let mut adjacency = vec![Vec::new(); topo.node_count()];
        for (k, link) in topo.links().iter().enumerate() {
            adjacency[link.tail.0].push(arcs.len());
            arcs.push(Arc { to: link.head.0, residual: capacities[k] });
            adjacency[link.head.0].push(arcs.len());
            arcs.push(Arc { to: link.tail.0, residual: 0.0 });
        }
        Self { arcs, adjacency }
    }

    /// Shortest augmenting path as a list of arc indices.
    fn bfs(&self, source: usize, sink: usize, eps: f64) -> Option<Vec<usize>> {
        let mut via = vec![usize::MAX; self.adjacency.len()];
        let mut seen = vec![false; self.adjacency.len()];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            if v == sink {
                break;
            }
            for &a in &self.adjacency[v] {
                let arc = &self.arcs[a];
                if !seen[arc.to] && arc.residual > eps {
                    seen[arc.to] = true;
                    via[arc.to] = a;
                    queue.push_back(arc.to);
                }
            }
        }
        if !seen[sink] {
            return None;
        }
        let mut path = Vec::new();
        let mut v = sink;
        while v != source {
            let a = via[v];
            path.push(a);
            v = self.arcs[a ^ 1].to;
        }
        path.reverse();
        Some(path)
    }

    fn reachable(&self, source: usize, eps: f64) -> Vec<bool> {
        let mut seen = vec![false; self.adjacency.len()];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &a in &self.adjacency[v] {
                let arc = &self.arcs[a];
                if !seen[arc.to] && arc.residual > eps {
                    seen[arc.to] = true;
                    queue.push_back(arc.to);
                }
            }
        }
        seen
    }
}

/// Max-flow value and the origin side of a minimum cut (nodes reachable from
/// the origin in the final residual network).
pub(crate) fn solve(
    topo: &NetworkTopology,
    capacities: &[f64],
) -> Result<(f64, Vec<bool>), TopologyError> {
    super::cuts::check_capacities(topo, capacities)?;
    topo.ensure_valid()?;
    let source = topo.origin().expect("valid topology").0;
    let sink = topo.destination().expect("valid topology").0;
    let scale = capacities.iter().cloned().fold(0.0, f64::max);
    let eps = scale * 1e-14;

    let mut net = Residual::new(topo, capacities);
    let mut value = 0.0;
    while let Some(path) = net.bfs(source, sink, eps) {
        let bottleneck = path.iter().map(|&a| net.arcs[a].residual).fold(f64::INFINITY, f64::min);
        for &a in &path {
            net.arcs[a].residual -= bottleneck;
            net.arcs[a ^ 1].residual += bottleneck;
        }
        value += bottleneck;
    }
    let origin_side = net.reachable(source, eps);
    Ok((value, origin_side))
}

/// Maximum feasible origin→destination flow under per-link capacities
/// (`capacities[k]` belongs to `topo.links()[k]`).
pub fn max_flow_value(topo: &NetworkTopology, capacities: &[f64]) -> Result<f64, TopologyError> {
    solve(topo, capacities).map(|(value, _)| value)
}
