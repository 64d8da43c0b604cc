#![allow(dead_code)]

use std::path::Path;

use flownet::flows::FlowFunction;
use flownet::network::FlowNetwork;
use flownet::routing::RoutingPolicy;
use flownet::scenario::Scenario;
use flownet::topology::NetworkTopology;
use rand::Rng;

pub fn fixture(name: &str) -> Scenario {
    Scenario::from_path(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)).unwrap()
}

/// Acyclic multigraph on `n` nodes: the chain `0 -> 1 -> .. -> n-1` plus
/// random forward links, so every node reaches the destination.
pub fn random_dag(rng: &mut impl Rng, n: usize, extra: usize) -> NetworkTopology {
    let mut pairs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    for _ in 0..extra {
        let u = rng.gen_range(0..n - 1);
        let v = rng.gen_range(u + 1..n);
        pairs.push((u, v));
    }
    NetworkTopology::from_pairs(n, &pairs).unwrap()
}

pub fn random_network(rng: &mut impl Rng, n: usize, extra: usize) -> (FlowNetwork, RoutingPolicy) {
    let topo = random_dag(rng, n, extra);
    let flows: Vec<FlowFunction> = (0..topo.link_count())
        .map(|_| FlowFunction::exponential(rng.gen_range(0.3..3.0), rng.gen_range(0.1..5.0)).unwrap())
        .collect();
    let weights: Vec<f64> = (0..topo.link_count()).map(|_| rng.gen_range(0.2..5.0)).collect();
    let policy = RoutingPolicy::logit(&topo, rng.gen_range(0.3..3.0), &weights).unwrap();
    (FlowNetwork::new(topo, flows).unwrap(), policy)
}

/// Closed form of the two-link example's limit flow on link 1, from the
/// quadratic `12 f^2 + (11 - 12 l) f - l = 0`.
pub fn two_link_closed_form(lambda: f64) -> f64 {
    let b = 12.0 * lambda - 11.0;
    (b + (b * b + 48.0 * lambda).sqrt()) / 24.0
}
