//! Directed acyclic multigraphs with a single origin and a single destination.
//!
//! Links are kept as a multiset: two links with the same endpoints are distinct
//! objects with distinct ids and are never merged. Node labels are arbitrary
//! integers `0..node_count`; [`NetworkTopology::topological_order`] produces the
//! canonical relabeling (origin first, destination last, every link pointing
//! forward) when one is needed.

mod cuts;
mod maxflow;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cuts::{enumerate_od_cuts, min_cut_capacity, Cut, MinCut, MinCutMethod, DEFAULT_ENUMERATION_LIMIT};
pub use maxflow::max_flow_value;

/// Node label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Externally visible link identifier. Unique within a topology.
pub type LinkId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub tail: NodeId,
    pub head: NodeId,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("topology has no nodes")]
    Empty,
    #[error("link {id} references node {node}, but the topology has {node_count} nodes")]
    NodeOutOfRange { id: LinkId, node: usize, node_count: usize },
    #[error("link {0} is a self-loop")]
    SelfLoop(LinkId),
    #[error("duplicate link id {0}")]
    DuplicateLinkId(LinkId),
    #[error("unknown link id {0}")]
    UnknownLink(LinkId),
    #[error("topology violates structural assumptions: {0}")]
    Invalid(ValidationReport),
    #[error("cut enumeration refused: {nodes} nodes exceeds the limit of {limit}")]
    TooManyNodes { nodes: usize, limit: usize },
    #[error("capacity of link {id} must be finite and positive, got {value}")]
    BadCapacity { id: LinkId, value: f64 },
    #[error("expected {expected} capacities, got {got}")]
    CapacityCount { expected: usize, got: usize },
    #[error("min-cut by enumeration ({enumerated}) disagrees with max-flow ({max_flow})")]
    DualityMismatch { enumerated: f64, max_flow: f64 },
}

/// One violated structural condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The listed nodes form a directed cycle, in traversal order.
    Cycle { nodes: Vec<NodeId> },
    NoOrigin,
    MultipleOrigins { nodes: Vec<NodeId> },
    NoDestination,
    MultipleDestinations { nodes: Vec<NodeId> },
    /// No directed path from `node` to the destination.
    CannotReachDestination { node: NodeId, destination: NodeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |nodes: &[NodeId]| {
            nodes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ")
        };
        match self {
            Violation::Cycle { nodes } => write!(f, "cycle through nodes [{}]", list(nodes)),
            Violation::NoOrigin => write!(f, "no node without incoming links"),
            Violation::MultipleOrigins { nodes } => write!(f, "multiple origins [{}]", list(nodes)),
            Violation::NoDestination => write!(f, "no node without outgoing links"),
            Violation::MultipleDestinations { nodes } => {
                write!(f, "multiple destinations [{}]", list(nodes))
            }
            Violation::CannotReachDestination { node, destination } => {
                write!(f, "node {node} cannot reach destination {destination}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// A relabeling of nodes compatible with the link directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relabeling {
    /// `order[k]` is the original node placed at position `k`.
    pub order: Vec<NodeId>,
    /// `label[v]` is the new label of original node `v`.
    pub label: Vec<usize>,
}

impl Relabeling {
    pub fn is_identity(&self) -> bool {
        self.order.iter().enumerate().all(|(k, v)| v.0 == k)
    }
}

/// Immutable multigraph. Construction only rejects malformed input (dangling
/// endpoints, self-loops, duplicate ids); structural assumptions are checked
/// by [`NetworkTopology::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkTopology {
    node_count: usize,
    links: Vec<Link>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
    index_of: HashMap<LinkId, usize>,
}

impl NetworkTopology {
    pub fn new(node_count: usize, links: Vec<Link>) -> Result<Self, TopologyError> {
        if node_count == 0 {
            return Err(TopologyError::Empty);
        }
        let mut outgoing = vec![Vec::new(); node_count];
        let mut incoming = vec![Vec::new(); node_count];
        let mut index_of = HashMap::with_capacity(links.len());
        for (k, link) in links.iter().enumerate() {
            for node in [link.tail.0, link.head.0] {
                if node >= node_count {
                    return Err(TopologyError::NodeOutOfRange { id: link.id, node, node_count });
                }
            }
            if link.tail == link.head {
                return Err(TopologyError::SelfLoop(link.id));
            }
            if index_of.insert(link.id, k).is_some() {
                return Err(TopologyError::DuplicateLinkId(link.id));
            }
            outgoing[link.tail.0].push(k);
            incoming[link.head.0].push(k);
        }
        Ok(Self { node_count, links, outgoing, incoming, index_of })
    }

    /// Builds a topology from `(tail, head)` pairs, assigning ids `0, 1, ...`.
    pub fn from_pairs(node_count: usize, pairs: &[(usize, usize)]) -> Result<Self, TopologyError> {
        let links = pairs
            .iter()
            .enumerate()
            .map(|(k, &(t, h))| Link { id: k as LinkId, tail: NodeId(t), head: NodeId(h) })
            .collect();
        Self::new(node_count, links)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, index: usize) -> &Link {
        &self.links[index]
    }

    pub fn link_ids(&self) -> Vec<LinkId> {
        self.links.iter().map(|l| l.id).collect()
    }

    /// Position of a link id in [`NetworkTopology::links`].
    pub fn index_of(&self, id: LinkId) -> Result<usize, TopologyError> {
        self.index_of.get(&id).copied().ok_or(TopologyError::UnknownLink(id))
    }

    /// Outgoing link indices of `v`, in insertion order.
    pub fn outgoing(&self, v: NodeId) -> &[usize] {
        &self.outgoing[v.0]
    }

    pub fn incoming(&self, v: NodeId) -> &[usize] {
        &self.incoming[v.0]
    }

    pub fn outgoing_ids(&self, v: NodeId) -> Vec<LinkId> {
        self.outgoing[v.0].iter().map(|&k| self.links[k].id).collect()
    }

    pub fn incoming_ids(&self, v: NodeId) -> Vec<LinkId> {
        self.incoming[v.0].iter().map(|&k| self.links[k].id).collect()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.node_count).map(NodeId)
    }

    fn sources(&self) -> Vec<NodeId> {
        self.nodes().filter(|v| self.incoming[v.0].is_empty()).collect()
    }

    fn sinks(&self) -> Vec<NodeId> {
        self.nodes().filter(|v| self.outgoing[v.0].is_empty()).collect()
    }

    /// The unique node without incoming links, if there is exactly one.
    pub fn origin(&self) -> Option<NodeId> {
        match self.sources().as_slice() {
            [v] => Some(*v),
            _ => None,
        }
    }

    /// The unique node without outgoing links, if there is exactly one.
    pub fn destination(&self) -> Option<NodeId> {
        match self.sinks().as_slice() {
            [v] => Some(*v),
            _ => None,
        }
    }

    /// Nodes from which `target` is reachable (including `target`).
    fn reaching(&self, target: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([target]);
        seen[target.0] = true;
        while let Some(v) = queue.pop_front() {
            for &k in &self.incoming[v.0] {
                let u = self.links[k].tail;
                if !seen[u.0] {
                    seen[u.0] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }

    /// Kahn's algorithm, smallest ready label first. Returns the ordered
    /// prefix; nodes missing from it lie on or behind a cycle.
    fn kahn(&self) -> Vec<NodeId> {
        let mut indegree: Vec<usize> = self.incoming.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..self.node_count).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(self.node_count);
        while let Some(v) = ready.pop_first() {
            order.push(NodeId(v));
            for &k in &self.outgoing[v] {
                let h = self.links[k].head.0;
                indegree[h] -= 1;
                if indegree[h] == 0 {
                    ready.insert(h);
                }
            }
        }
        order
    }

    fn find_cycle(&self, ordered: &[NodeId]) -> Vec<NodeId> {
        let mut removed = vec![false; self.node_count];
        for v in ordered {
            removed[v.0] = true;
        }
        // Every remaining node keeps a remaining predecessor, so walking
        // predecessors must revisit a node.
        let Some(start) = (0..self.node_count).find(|&v| !removed[v]) else {
            return Vec::new();
        };
        let mut position = vec![usize::MAX; self.node_count];
        let mut path = Vec::new();
        let mut v = start;
        while position[v] == usize::MAX {
            position[v] = path.len();
            path.push(v);
            v = self.incoming[v]
                .iter()
                .map(|&k| self.links[k].tail.0)
                .filter(|&u| !removed[u])
                .min()
                .expect("node left by Kahn's algorithm has a remaining predecessor");
        }
        let mut cycle: Vec<NodeId> = path[position[v]..].iter().rev().map(|&u| NodeId(u)).collect();
        // rotate so the smallest label comes first
        if let Some(min_pos) = cycle.iter().enumerate().min_by_key(|(_, n)| **n).map(|(i, _)| i) {
            cycle.rotate_left(min_pos);
        }
        cycle
    }

    /// Checks acyclicity, unique origin, unique destination and reachability
    /// of the destination from every node. Violations are returned as data.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let ordered = self.kahn();
        if ordered.len() < self.node_count {
            violations.push(Violation::Cycle { nodes: self.find_cycle(&ordered) });
        }
        let sources = self.sources();
        match sources.len() {
            0 => violations.push(Violation::NoOrigin),
            1 => {}
            _ => violations.push(Violation::MultipleOrigins { nodes: sources }),
        }
        let sinks = self.sinks();
        let destination = match sinks.len() {
            0 => {
                violations.push(Violation::NoDestination);
                None
            }
            1 => Some(sinks[0]),
            _ => {
                violations.push(Violation::MultipleDestinations { nodes: sinks.clone() });
                // Treat the sink reached from the most nodes (ties: larger
                // label) as the intended destination for reachability.
                sinks
                    .iter()
                    .map(|&s| (self.reaching(s).iter().filter(|&&r| r).count(), s))
                    .max()
                    .map(|(_, s)| s)
            }
        };
        if let Some(dest) = destination {
            let reach = self.reaching(dest);
            for v in self.nodes() {
                if !reach[v.0] {
                    violations.push(Violation::CannotReachDestination { node: v, destination: dest });
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn ensure_valid(&self) -> Result<(), TopologyError> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(TopologyError::Invalid(report))
        }
    }

    /// Deterministic topological relabeling: origin gets 0, destination gets
    /// `n`, and every link's head label exceeds its tail label. Among ready
    /// nodes the smallest original label is placed first.
    pub fn topological_order(&self) -> Result<Relabeling, TopologyError> {
        self.ensure_valid()?;
        let order = self.kahn();
        let mut label = vec![0; self.node_count];
        for (k, v) in order.iter().enumerate() {
            label[v.0] = k;
        }
        Ok(Relabeling { order, label })
    }

    /// The same multigraph with nodes relabeled topologically. Link ids and
    /// link order are preserved.
    pub fn canonicalize(&self) -> Result<(NetworkTopology, Relabeling), TopologyError> {
        let relabel = self.topological_order()?;
        let links = self
            .links
            .iter()
            .map(|l| Link {
                id: l.id,
                tail: NodeId(relabel.label[l.tail.0]),
                head: NodeId(relabel.label[l.head.0]),
            })
            .collect();
        Ok((NetworkTopology::new(self.node_count, links)?, relabel))
    }

    /// Total outgoing capacity of `v` given per-link capacities.
    pub fn outgoing_capacity(&self, v: NodeId, capacities: &[f64]) -> f64 {
        self.outgoing[v.0].iter().map(|&k| capacities[k]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_links_are_valid() {
        let t = NetworkTopology::from_pairs(2, &[(0, 1), (0, 1)]).unwrap();
        assert!(t.validate().is_valid());
        assert_eq!(t.outgoing(NodeId(0)).len(), 2);
        assert_eq!(t.origin(), Some(NodeId(0)));
        assert_eq!(t.destination(), Some(NodeId(1)));
    }

    #[test]
    fn cycle_is_reported() {
        let t = NetworkTopology::from_pairs(3, &[(0, 1), (1, 2), (2, 1)]).unwrap();
        let report = t.validate();
        assert!(report
            .violations
            .contains(&Violation::Cycle { nodes: vec![NodeId(1), NodeId(2)] }));
        assert!(t.topological_order().is_err());
    }

    #[test]
    fn dead_end_node_cannot_reach_destination() {
        let t = NetworkTopology::from_pairs(4, &[(0, 1), (0, 3), (1, 3), (0, 2)]).unwrap();
        let report = t.validate();
        assert!(!report.is_valid());
        assert!(report.violations.contains(&Violation::CannotReachDestination {
            node: NodeId(2),
            destination: NodeId(3)
        }));
        // Oracle: plain reverse BFS from node 3.
        let mut reach = [false; 4];
        reach[3] = true;
        for _ in 0..4 {
            for &(u, v) in &[(0, 1), (0, 3), (1, 3), (0, 2)] {
                if reach[v] {
                    reach[u] = true;
                }
            }
        }
        assert_eq!(reach, [true, true, false, true]);
    }

    #[test]
    fn malformed_links_rejected() {
        assert_eq!(
            NetworkTopology::from_pairs(2, &[(0, 0)]).unwrap_err(),
            TopologyError::SelfLoop(0)
        );
        assert!(matches!(
            NetworkTopology::from_pairs(2, &[(0, 2)]),
            Err(TopologyError::NodeOutOfRange { .. })
        ));
        let dup = vec![
            Link { id: 7, tail: NodeId(0), head: NodeId(1) },
            Link { id: 7, tail: NodeId(0), head: NodeId(1) },
        ];
        assert_eq!(NetworkTopology::new(2, dup).unwrap_err(), TopologyError::DuplicateLinkId(7));
    }

    #[test]
    fn chain_order_is_identity() {
        let t = NetworkTopology::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(t.topological_order().unwrap().is_identity());
    }

    #[test]
    fn diamond_with_shuffled_labels() {
        // S=3, A=1, B=0, T=2; links S→A, S→B, A→T, B→T, A→B.
        let (s, a, b, tt) = (3, 1, 0, 2);
        let t = NetworkTopology::from_pairs(4, &[(s, a), (s, b), (a, tt), (b, tt), (a, b)]).unwrap();
        let r = t.topological_order().unwrap();
        assert_eq!(r.order, vec![NodeId(s), NodeId(a), NodeId(b), NodeId(tt)]);
        let (canon, _) = t.canonicalize().unwrap();
        for l in canon.links() {
            assert!(l.tail.0 < l.head.0);
        }
        assert_eq!(canon.origin(), Some(NodeId(0)));
        assert_eq!(canon.destination(), Some(NodeId(3)));
    }

    #[test]
    fn parallel_pair_order() {
        let t = NetworkTopology::from_pairs(2, &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(t.topological_order().unwrap().order, vec![NodeId(0), NodeId(1)]);
    }

    #[test]
    fn multiple_origins_reported() {
        let t = NetworkTopology::from_pairs(3, &[(0, 2), (1, 2)]).unwrap();
        assert!(t
            .validate()
            .violations
            .contains(&Violation::MultipleOrigins { nodes: vec![NodeId(0), NodeId(1)] }));
    }
}
