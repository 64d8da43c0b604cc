//! A validated topology together with one flow function per link.

use crate::flows::{FlowFunction, PerturbationSpec};
use crate::topology::{min_cut_capacity, MinCut, NetworkTopology, NodeId, TopologyError};

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    topology: NetworkTopology,
    flows: Vec<FlowFunction>,
    order: Vec<NodeId>,
    origin: NodeId,
    destination: NodeId,
}

impl FlowNetwork {
    /// `flows[k]` belongs to `topology.links()[k]`.
    pub fn new(topology: NetworkTopology, flows: Vec<FlowFunction>) -> Result<Self, TopologyError> {
        if flows.len() != topology.link_count() {
            return Err(TopologyError::CapacityCount { expected: topology.link_count(), got: flows.len() });
        }
        let order = topology.topological_order()?.order;
        let origin = order[0];
        let destination = *order.last().expect("nonempty topology");
        Ok(Self { topology, flows, order, origin, destination })
    }

    /// Same topology with a perturbation's flow functions.
    pub fn perturbed(&self, spec: &PerturbationSpec) -> Self {
        Self { flows: spec.perturbed().to_vec(), ..self.clone() }
    }

    pub fn with_flows(&self, flows: Vec<FlowFunction>) -> Result<Self, TopologyError> {
        if flows.len() != self.flows.len() {
            return Err(TopologyError::CapacityCount { expected: self.flows.len(), got: flows.len() });
        }
        Ok(Self { flows, ..self.clone() })
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn flows(&self) -> &[FlowFunction] {
        &self.flows
    }

    pub fn link_count(&self) -> usize {
        self.flows.len()
    }

    pub fn node_count(&self) -> usize {
        self.topology.node_count()
    }

    /// Nodes in topological order, origin first.
    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn origin(&self) -> NodeId {
        self.origin
    }

    pub fn destination(&self) -> NodeId {
        self.destination
    }

    pub fn capacities(&self) -> Vec<f64> {
        self.flows.iter().map(FlowFunction::f_max).collect()
    }

    /// Total capacity of the outgoing links of `v`.
    pub fn outgoing_capacity(&self, v: NodeId) -> f64 {
        self.topology.outgoing(v).iter().map(|&k| self.flows[k].f_max()).sum()
    }

    pub fn min_cut(&self) -> Result<MinCut, TopologyError> {
        min_cut_capacity(&self.topology, &self.capacities())
    }

    /// Flow vector for a density vector.
    pub fn flow_of(&self, rho: &[f64]) -> Vec<f64> {
        self.flows.iter().zip(rho).map(|(ff, &r)| ff.value(r)).collect()
    }

    /// `mu^{-1}(f)`; every component must lie strictly below its capacity.
    pub fn density_of(&self, flow: &[f64]) -> Result<Vec<f64>, crate::flows::FlowError> {
        self.flows.iter().zip(flow).map(|(ff, &f)| ff.inverse(f)).collect()
    }

    /// Fastest relaxation rate over links, `max_e mu_e'(0)` for the built-in families.
    pub fn max_rate(&self) -> f64 {
        self.flows.iter().map(FlowFunction::max_slope).fold(0.0, f64::max)
    }
}
