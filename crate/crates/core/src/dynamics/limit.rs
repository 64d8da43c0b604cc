//! Limit flows without time integration.
//!
//! At a node with constant inflow `lambda` below the outgoing capacity, the
//! limit density is the unique zero of `H(rho) = lambda G(rho) - mu(rho)`.
//! `H` has nonnegative off-diagonal partials and a strictly dominant negative
//! diagonal, so each coordinate equation `mu_e(x) = lambda G_e(x, rho_-e)` has
//! exactly one root and the nonlinear Jacobi sweep started from `rho = 0`
//! (where `H >= 0`) increases monotonically to the zero. A Newton step on the
//! same system is tried once the residual is small.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::DynamicsError;
use crate::flows::FlowFunction;
use crate::network::FlowNetwork;
use crate::routing::{LocalRouting, RoutingPolicy};
use crate::topology::NodeId;

#[derive(Clone, Copy, Debug)]
pub struct FixedPointConfig {
    /// Weight of the new Jacobi iterate, in `(0, 1]`.
    pub damping: f64,
    pub max_iterations: usize,
    /// Target for `max_e |lambda G_e - mu_e|`.
    pub tolerance: f64,
    /// Continuation steps in `lambda` used when the direct solve stalls.
    pub homotopy_steps: usize,
    /// Residual below which Newton steps are attempted.
    pub newton_threshold: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self { damping: 0.5, max_iterations: 10_000, tolerance: 1e-10, homotopy_steps: 16, newton_threshold: 1e-4 }
    }
}

/// Limit of the local system at one node under constant inflow.
#[derive(Clone, Debug, Serialize)]
pub struct LocalLimit {
    pub flows: Vec<f64>,
    /// Limit densities; infinite on saturated links.
    pub densities: Vec<f64>,
    pub saturated: bool,
    pub iterations: usize,
    pub residual: f64,
}

/// Network-wide limit flow obtained by cascading local limits in
/// topological order.
#[derive(Clone, Debug, Serialize)]
pub struct LimitFlow {
    pub flows: Vec<f64>,
    /// `flows[k] == f_max[k]` (reached only through local saturation).
    pub saturated: Vec<bool>,
    /// Limit inflow of every node; the destination's entry is the outflow.
    pub node_inflows: Vec<f64>,
    pub densities: Vec<f64>,
}

impl LimitFlow {
    pub fn outflow(&self, net: &FlowNetwork) -> f64 {
        self.node_inflows[net.destination().0]
    }

    /// Saturation is all-or-none over the outgoing links of each node.
    pub fn saturation_is_blockwise(&self, net: &FlowNetwork) -> bool {
        net.order().iter().all(|&v| {
            let out = net.topology().outgoing(v);
            out.iter().all(|&k| self.saturated[k]) || out.iter().all(|&k| !self.saturated[k])
        })
    }
}

fn residual(policy: &dyn LocalRouting, flows: &[&FlowFunction], lambda: f64, rho: &[f64], split: &mut [f64]) -> f64 {
    policy.route_into(rho, split);
    flows
        .iter()
        .zip(rho)
        .zip(split.iter())
        .map(|((ff, &r), &g)| (lambda * g - ff.value(r)).abs())
        .fold(0.0, f64::max)
}

/// Root of `mu_e(x) = lambda G_e(x, rho_-e)`, which is increasing minus
/// nonincreasing in `x`.
fn coordinate_root(
    policy: &dyn LocalRouting,
    ff: &FlowFunction,
    lambda: f64,
    rho: &mut [f64],
    e: usize,
    split: &mut [f64],
) -> f64 {
    let saved = rho[e];
    let mut phi = |x: f64, rho: &mut [f64]| {
        rho[e] = x;
        policy.route_into(rho, split);
        ff.value(x) - lambda * split[e]
    };
    let mut lo = 0.0;
    let mut hi = saved.max(1e-3);
    while phi(hi, rho) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e15 {
            rho[e] = saved;
            return hi;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid, rho) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    rho[e] = saved;
    0.5 * (lo + hi)
}

fn newton_step(policy: &dyn LocalRouting, flows: &[&FlowFunction], lambda: f64, rho: &[f64], split: &mut [f64]) -> Option<Vec<f64>> {
    let k = rho.len();
    policy.route_into(rho, split);
    let jac = policy.jacobian(rho);
    // J[j][e] = dH_j/d rho_e
    let m = DMatrix::from_fn(k, k, |j, e| lambda * jac[e][j] - if j == e { flows[e].derivative(rho[e]) } else { 0.0 });
    let h = DVector::from_fn(k, |j, _| lambda * split[j] - flows[j].value(rho[j]));
    let delta = m.lu().solve(&(-h))?;
    let next: Vec<f64> = rho.iter().zip(delta.iter()).map(|(r, d)| r + d).collect();
    next.iter().all(|x| x.is_finite() && *x >= 0.0).then_some(next)
}

/// Damped Jacobi sweeps from `rho` until the residual reaches tolerance.
fn solve_from(
    policy: &dyn LocalRouting,
    flows: &[&FlowFunction],
    lambda: f64,
    rho: &mut Vec<f64>,
    cfg: &FixedPointConfig,
    budget: usize,
) -> (bool, usize, f64) {
    let k = rho.len();
    let mut split = vec![0.0; k];
    let mut scratch = rho.clone();
    let mut best = residual(policy, flows, lambda, rho, &mut split);
    for it in 0..budget {
        if best <= cfg.tolerance {
            return (true, it, best);
        }
        if best < cfg.newton_threshold {
            if let Some(next) = newton_step(policy, flows, lambda, rho, &mut split) {
                let r = residual(policy, flows, lambda, &next, &mut split);
                if r < best {
                    *rho = next;
                    best = r;
                    continue;
                }
            }
        }
        scratch.copy_from_slice(rho);
        let targets: Vec<f64> =
            (0..k).map(|e| coordinate_root(policy, flows[e], lambda, &mut scratch, e, &mut split)).collect();
        for (r, t) in rho.iter_mut().zip(targets) {
            *r += cfg.damping * (t - *r);
        }
        best = residual(policy, flows, lambda, rho, &mut split);
    }
    (best <= cfg.tolerance, budget, best)
}

/// Limit flow of the local system at one node with constant inflow `lambda`.
/// At or above the outgoing capacity every link saturates; below it the
/// equilibrium `lambda G(mu^{-1}(f)) = f` is solved to `cfg.tolerance`.
pub fn local_limit_flow(
    policy: &dyn LocalRouting,
    flows: &[&FlowFunction],
    lambda: f64,
    cfg: &FixedPointConfig,
) -> Result<LocalLimit, DynamicsError> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(DynamicsError::Config(format!("inflow must be finite and nonnegative, got {lambda}")));
    }
    if policy.arity() != flows.len() {
        return Err(DynamicsError::Config(format!(
            "policy splits over {} links but {} flow functions were given",
            policy.arity(),
            flows.len()
        )));
    }
    let k = flows.len();
    let capacity: f64 = flows.iter().map(|f| f.f_max()).sum();
    if lambda >= capacity {
        return Ok(LocalLimit {
            flows: flows.iter().map(|f| f.f_max()).collect(),
            densities: vec![f64::INFINITY; k],
            saturated: true,
            iterations: 0,
            residual: 0.0,
        });
    }
    if lambda == 0.0 {
        return Ok(LocalLimit { flows: vec![0.0; k], densities: vec![0.0; k], saturated: false, iterations: 0, residual: 0.0 });
    }

    let mut rho = vec![0.0; k];
    let (mut ok, mut iterations, mut res) = solve_from(policy, flows, lambda, &mut rho, cfg, cfg.max_iterations);
    if !ok {
        // continuation in lambda from zero, warm-starting each stage
        rho.iter_mut().for_each(|r| *r = 0.0);
        let per_stage = (cfg.max_iterations / cfg.homotopy_steps.max(1)).max(1);
        for s in 1..=cfg.homotopy_steps.max(1) {
            let stage_lambda = lambda * s as f64 / cfg.homotopy_steps.max(1) as f64;
            let (stage_ok, its, r) = solve_from(policy, flows, stage_lambda, &mut rho, cfg, per_stage);
            iterations += its;
            ok = stage_ok;
            res = r;
        }
        if !ok {
            let (final_ok, its, r) = solve_from(policy, flows, lambda, &mut rho, cfg, cfg.max_iterations);
            iterations += its;
            ok = final_ok;
            res = r;
        }
    }
    if !ok {
        return Err(DynamicsError::NonConvergence { lambda, residual: res, iterations });
    }
    Ok(LocalLimit {
        flows: flows.iter().zip(&rho).map(|(f, &r)| f.value(r)).collect(),
        densities: rho,
        saturated: false,
        iterations,
        residual: res,
    })
}

/// Cascades [`local_limit_flow`] through the nodes in topological order,
/// feeding each node the limit inflow `sum of f* over its incoming links`.
pub fn network_limit_flow(
    net: &FlowNetwork,
    policy: &RoutingPolicy,
    inflow: f64,
    cfg: &FixedPointConfig,
) -> Result<LimitFlow, DynamicsError> {
    let topo = net.topology();
    let mut flows = vec![0.0; net.link_count()];
    let mut saturated = vec![false; net.link_count()];
    let mut densities = vec![0.0; net.link_count()];
    let mut node_inflows = vec![0.0; net.node_count()];
    for &v in net.order() {
        let lambda = if v == net.origin() { inflow } else { topo.incoming(v).iter().map(|&k| flows[k]).sum() };
        node_inflows[v.0] = lambda;
        let out = topo.outgoing(v);
        if out.is_empty() {
            continue;
        }
        let local_policy = policy.node(v).ok_or(crate::routing::RoutingError::MissingPolicy(v))?;
        let local_flows: Vec<&FlowFunction> = out.iter().map(|&k| &net.flows()[k]).collect();
        let local = local_limit_flow(local_policy, &local_flows, lambda, cfg).map_err(|e| match e {
            DynamicsError::NonConvergence { lambda, residual, iterations } => {
                DynamicsError::NodeNonConvergence { node: v, lambda, residual, iterations }
            }
            other => other,
        })?;
        for (i, &k) in out.iter().enumerate() {
            flows[k] = local.flows[i];
            densities[k] = local.densities[i];
            saturated[k] = local.saturated;
        }
    }
    Ok(LimitFlow { flows, saturated, node_inflows, densities })
}

/// Outgoing-capacity of node `v`, `lambda_v^max`.
pub fn node_capacity(net: &FlowNetwork, v: NodeId) -> f64 {
    net.outgoing_capacity(v)
}
