//! Origin–destination cuts and min-cut capacity.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{maxflow, LinkId, NetworkTopology, NodeId, TopologyError};

/// Largest node count accepted by [`enumerate_od_cuts`].
pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

/// A partition `(U, V \ U)` with the origin in `U` and the destination outside.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    /// Sorted node labels of `U`.
    pub origin_side: Vec<NodeId>,
    /// Ids of links from `U` to `V \ U`, in link order.
    pub cut_links: Vec<LinkId>,
}

impl Cut {
    fn from_membership(topo: &NetworkTopology, in_u: &[bool]) -> Self {
        let origin_side = (0..topo.node_count()).filter(|&v| in_u[v]).map(NodeId).collect();
        let cut_links = topo
            .links()
            .iter()
            .filter(|l| in_u[l.tail.0] && !in_u[l.head.0])
            .map(|l| l.id)
            .collect();
        Self { origin_side, cut_links }
    }

    pub fn capacity(&self, topo: &NetworkTopology, capacities: &[f64]) -> f64 {
        self.cut_links
            .iter()
            .map(|&id| capacities[topo.index_of(id).expect("cut link belongs to topology")])
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinCutMethod {
    /// Exhaustive enumeration, cross-checked against max-flow.
    Enumeration,
    /// Residual reachability after max-flow (graphs above the enumeration limit).
    MaxFlow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinCut {
    pub capacity: f64,
    pub cut: Cut,
    pub method: MinCutMethod,
    pub max_flow: f64,
}

pub(crate) fn check_capacities(topo: &NetworkTopology, capacities: &[f64]) -> Result<(), TopologyError> {
    if capacities.len() != topo.link_count() {
        return Err(TopologyError::CapacityCount { expected: topo.link_count(), got: capacities.len() });
    }
    for (link, &c) in topo.links().iter().zip(capacities) {
        if !(c.is_finite() && c > 0.0) {
            return Err(TopologyError::BadCapacity { id: link.id, value: c });
        }
    }
    Ok(())
}

/// All `2^(n-1)` origin–destination cuts of a valid topology with `n + 1`
/// nodes, refusing graphs with more than `limit` nodes.
pub fn enumerate_od_cuts(topo: &NetworkTopology, limit: usize) -> Result<Vec<Cut>, TopologyError> {
    topo.ensure_valid()?;
    if topo.node_count() > limit {
        return Err(TopologyError::TooManyNodes { nodes: topo.node_count(), limit });
    }
    let origin = topo.origin().expect("valid topology");
    let destination = topo.destination().expect("valid topology");
    let free: Vec<usize> = topo.nodes().map(|v| v.0).filter(|&v| v != origin.0 && v != destination.0).collect();
    let mut cuts = Vec::with_capacity(1 << free.len());
    let mut in_u = vec![false; topo.node_count()];
    for mask in 0u64..(1u64 << free.len()) {
        in_u.iter_mut().for_each(|x| *x = false);
        in_u[origin.0] = true;
        for (bit, &v) in free.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                in_u[v] = true;
            }
        }
        cuts.push(Cut::from_membership(topo, &in_u));
    }
    Ok(cuts)
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Minimum over origin–destination cuts of the summed capacity of cut links.
///
/// Up to [`DEFAULT_ENUMERATION_LIMIT`] nodes the minimum is found by
/// enumeration and must agree with the max-flow value to 1e-12 (relative);
/// among equal minima the lexicographically smallest origin side wins.
/// Larger graphs use the max-flow residual cut directly.
pub fn min_cut_capacity(topo: &NetworkTopology, capacities: &[f64]) -> Result<MinCut, TopologyError> {
    check_capacities(topo, capacities)?;
    let (max_flow, residual_side) = maxflow::solve(topo, capacities)?;
    if topo.node_count() > DEFAULT_ENUMERATION_LIMIT {
        let cut = Cut::from_membership(topo, &residual_side);
        return Ok(MinCut { capacity: cut.capacity(topo, capacities), cut, method: MinCutMethod::MaxFlow, max_flow });
    }

    let mut best: Option<(f64, Cut)> = None;
    for cut in enumerate_od_cuts(topo, DEFAULT_ENUMERATION_LIMIT)? {
        let c = cut.capacity(topo, capacities);
        let better = match &best {
            None => true,
            Some((bc, bcut)) => {
                if nearly_equal(c, *bc) {
                    cut.origin_side.cmp(&bcut.origin_side) == Ordering::Less
                } else {
                    c < *bc
                }
            }
        };
        if better {
            best = Some((c, cut));
        }
    }
    let (capacity, cut) = best.expect("at least one cut exists");
    if !nearly_equal(capacity, max_flow) {
        return Err(TopologyError::DualityMismatch { enumerated: capacity, max_flow });
    }
    Ok(MinCut { capacity, cut, method: MinCutMethod::Enumeration, max_flow })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diamond() -> NetworkTopology {
        // S=0, A=1, B=2, T=3: S→A, S→B, A→T, B→T, A→B
        NetworkTopology::from_pairs(4, &[(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)]).unwrap()
    }

    #[test]
    fn cut_counts() {
        let two = NetworkTopology::from_pairs(2, &[(0, 1)]).unwrap();
        let cuts = enumerate_od_cuts(&two, 20).unwrap();
        assert_eq!(cuts.len(), 1);
        assert_eq!(cuts[0].origin_side, vec![NodeId(0)]);

        let chain = NetworkTopology::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        let sides: Vec<_> = enumerate_od_cuts(&chain, 20).unwrap().into_iter().map(|c| c.origin_side).collect();
        assert_eq!(sides, vec![vec![NodeId(0)], vec![NodeId(0), NodeId(1)]]);

        assert_eq!(enumerate_od_cuts(&diamond(), 20).unwrap().len(), 4);
    }

    #[test]
    fn enumeration_limit() {
        let chain = NetworkTopology::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(
            enumerate_od_cuts(&chain, 2).unwrap_err(),
            TopologyError::TooManyNodes { nodes: 3, limit: 2 }
        );
    }

    #[test]
    fn cut_links_match_definition() {
        let t = diamond();
        for cut in enumerate_od_cuts(&t, 20).unwrap() {
            let expected: Vec<LinkId> = t
                .links()
                .iter()
                .filter(|l| cut.origin_side.contains(&l.tail) && !cut.origin_side.contains(&l.head))
                .map(|l| l.id)
                .collect();
            assert_eq!(cut.cut_links, expected);
        }
    }

    #[test]
    fn example_capacities() {
        let parallel = NetworkTopology::from_pairs(2, &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(min_cut_capacity(&parallel, &[0.75, 0.75]).unwrap().capacity, 1.5);

        let chain = NetworkTopology::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        let mc = min_cut_capacity(&chain, &[2.0, 1.0]).unwrap();
        assert_eq!(mc.capacity, 1.0);
        assert_eq!(mc.cut.cut_links, vec![1]);
    }

    #[test]
    fn diamond_min_cut_by_hand() {
        // Capacities S→A 3, S→B 2, A→T 1, B→T 4, A→B 1. The four cuts:
        // {S}: 3+2 = 5; {S,A}: 2+1+1 = 4; {S,B}: 3+4 = 7; {S,A,B}: 1+4 = 5.
        let mc = min_cut_capacity(&diamond(), &[3.0, 2.0, 1.0, 4.0, 1.0]).unwrap();
        assert_eq!(mc.capacity, 4.0);
        assert_eq!(mc.cut.origin_side, vec![NodeId(0), NodeId(1)]);
        assert_eq!(mc.max_flow, 4.0);
    }

    #[test]
    fn ties_pick_lexicographically_smallest_side() {
        // chain with equal capacities: {0} and {0,1} both cost 1.
        let chain = NetworkTopology::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        let mc = min_cut_capacity(&chain, &[1.0, 1.0]).unwrap();
        assert_eq!(mc.cut.origin_side, vec![NodeId(0)]);
    }

    #[test]
    fn bad_capacity_rejected() {
        let chain = NetworkTopology::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(min_cut_capacity(&chain, &[1.0, 0.0]), Err(TopologyError::BadCapacity { id: 1, .. })));
        assert!(matches!(min_cut_capacity(&chain, &[1.0]), Err(TopologyError::CapacityCount { .. })));
    }
}
