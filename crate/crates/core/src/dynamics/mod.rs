//! Time evolution of link densities.
//!
//! ```text
//! d rho_e / dt = lambda_v(t) G^v_e(rho^v) - mu_e(rho_e),   e in E_v^+
//! lambda_0(t) = external inflow,  lambda_v(t) = sum of f over E_v^-
//! ```

mod limit;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use limit::{local_limit_flow, network_limit_flow, node_capacity, FixedPointConfig, LimitFlow, LocalLimit};

use crate::flows::{FlowError, FlowFunction};
use crate::network::FlowNetwork;
use crate::ode::Rk4;
use crate::routing::{LocalRouting, NodePolicy, RoutingError, RoutingPolicy};
use crate::topology::{Link, LinkId, NetworkTopology, NodeId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid simulation configuration: {0}")]
    Config(String),
    #[error("invalid initial state: {0}")]
    InitialState(String),
    #[error("routing policy does not fit the network: {0}")]
    Policy(#[from] RoutingError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("integration became unstable at t = {t}: link #{link_index} has density {value}")]
    Unstable { t: f64, link_index: usize, value: f64 },
    #[error("limit-flow iteration did not converge at inflow {lambda} (residual {residual:e} after {iterations} iterations)")]
    NonConvergence { lambda: f64, residual: f64, iterations: usize },
    #[error("limit-flow iteration at node {node} did not converge at inflow {lambda} (residual {residual:e} after {iterations} iterations)")]
    NodeNonConvergence { node: NodeId, lambda: f64, residual: f64, iterations: usize },
}

/// Clamping below this magnitude is silent; larger undershoots are counted.
pub const UNDERSHOOT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationConfig {
    /// Constant external inflow `lambda_0`.
    pub inflow: f64,
    /// Step size; `None` uses `0.01 / max_e mu_e'(0)`.
    pub dt: Option<f64>,
    pub horizon: f64,
    /// Largest flow change over the tail window still counted as converged.
    pub convergence_tol: f64,
    /// Fraction of the horizon treated as the tail.
    pub tail_window: f64,
    /// A link is reported saturated when `f > threshold * f_max` and its
    /// density is still growing.
    pub saturation_threshold: f64,
    /// Transfer check tolerance, relative to `lambda_0`.
    pub transfer_tol_rel: f64,
    /// Densities beyond this abort the run.
    pub density_ceiling: f64,
    /// Upper bound on recorded samples (the terminal state is always kept).
    pub max_samples: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            inflow: 1.0,
            dt: None,
            horizon: 200.0,
            convergence_tol: 1e-6,
            tail_window: 0.2,
            saturation_threshold: 0.999,
            transfer_tol_rel: 1e-3,
            density_ceiling: 1e12,
            max_samples: 20_001,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |msg: String| Err(DynamicsError::Config(msg));
        if !(self.inflow.is_finite() && self.inflow >= 0.0) {
            return bad(format!("inflow must be finite and nonnegative, got {}", self.inflow));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return bad(format!("dt must be positive, got {dt}"));
            }
        }
        if !(self.tail_window > 0.0 && self.tail_window <= 1.0) {
            return bad(format!("tail_window must lie in (0, 1], got {}", self.tail_window));
        }
        if !(self.saturation_threshold > 0.0 && self.saturation_threshold < 1.0) {
            return bad(format!("saturation_threshold must lie in (0, 1), got {}", self.saturation_threshold));
        }
        if !(self.convergence_tol > 0.0 && self.transfer_tol_rel >= 0.0 && self.density_ceiling > 0.0) {
            return bad("tolerances and density ceiling must be positive".into());
        }
        if self.max_samples < 2 {
            return bad("max_samples must be at least 2".into());
        }
        Ok(())
    }

    /// Step size actually used for `net`.
    pub fn step_for(&self, net: &FlowNetwork) -> f64 {
        self.dt.unwrap_or_else(|| 0.01 / net.max_rate())
    }
}

/// Run counters that do not affect the result.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub dt: f64,
    pub steps: usize,
    /// Steps after which some density was clamped from below
    /// `-UNDERSHOOT_TOLERANCE` back to zero.
    pub clamp_events: usize,
    pub max_undershoot: f64,
}

/// Recorded states at sampled times.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub link_ids: Vec<LinkId>,
    pub origin: NodeId,
    pub destination: NodeId,
    pub times: Vec<f64>,
    pub densities: Vec<Vec<f64>>,
    pub flows: Vec<Vec<f64>>,
    /// `lambda_v(t)` for every node; the destination's entry is the outflow.
    pub node_inflows: Vec<Vec<f64>>,
    /// `d rho / dt` at the terminal state.
    pub terminal_derivative: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn terminal_density(&self) -> &[f64] {
        self.densities.last().expect("trajectory has samples")
    }

    pub fn terminal_flow(&self) -> &[f64] {
        self.flows.last().expect("trajectory has samples")
    }

    pub fn outflow(&self) -> impl Iterator<Item = f64> + '_ {
        self.node_inflows.iter().map(|l| l[self.destination.0])
    }

    pub fn terminal_outflow(&self) -> f64 {
        self.node_inflows.last().expect("trajectory has samples")[self.destination.0]
    }

    /// First sample index of the last `window` fraction of the time span.
    pub fn tail_start(&self, window: f64) -> usize {
        let t_end = *self.times.last().expect("trajectory has samples");
        let cut = t_end * (1.0 - window);
        self.times.partition_point(|&t| t < cut).min(self.times.len() - 1)
    }

    /// `min` and `max - min` of the outflow over the tail window.
    pub fn tail_outflow_range(&self, window: f64) -> (f64, f64) {
        let start = self.tail_start(window);
        let (lo, hi) = self.node_inflows[start..]
            .iter()
            .map(|l| l[self.destination.0])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        (lo, hi - lo)
    }

    /// Largest change of any link flow over the tail window relative to the
    /// terminal flow.
    pub fn tail_flow_variation(&self, window: f64) -> f64 {
        let start = self.tail_start(window);
        let last = self.terminal_flow();
        self.flows[start..]
            .iter()
            .flat_map(|f| f.iter().zip(last).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationSummary {
    pub link_ids: Vec<LinkId>,
    pub inflow: f64,
    pub horizon: f64,
    pub terminal_density: Vec<f64>,
    pub terminal_flow: Vec<f64>,
    pub terminal_outflow: f64,
    pub tail_min_outflow: f64,
    pub tail_flow_variation: f64,
    pub converged: bool,
    pub saturated_links: Vec<LinkId>,
    pub diagnostics: Diagnostics,
}

impl SimulationSummary {
    pub fn from_trajectory(net: &FlowNetwork, traj: &Trajectory, config: &SimulationConfig) -> Self {
        let variation = traj.tail_flow_variation(config.tail_window);
        let (tail_min, _) = traj.tail_outflow_range(config.tail_window);
        Self {
            link_ids: traj.link_ids.clone(),
            inflow: config.inflow,
            horizon: config.horizon,
            terminal_density: traj.terminal_density().to_vec(),
            terminal_flow: traj.terminal_flow().to_vec(),
            terminal_outflow: traj.terminal_outflow(),
            tail_min_outflow: tail_min,
            tail_flow_variation: variation,
            converged: variation <= config.convergence_tol,
            saturated_links: saturated_links(net, traj, config.saturation_threshold),
            diagnostics: traj.diagnostics.clone(),
        }
    }
}

/// Links whose terminal flow exceeds `threshold * f_max` while their density
/// still grows.
pub fn saturated_links(net: &FlowNetwork, traj: &Trajectory, threshold: f64) -> Vec<LinkId> {
    let f = traj.terminal_flow();
    net.flows()
        .iter()
        .enumerate()
        .filter(|&(k, ff)| f[k] > threshold * ff.f_max() && traj.terminal_derivative[k] > 0.0)
        .map(|(k, _)| traj.link_ids[k])
        .collect()
}

/// Evaluates the right-hand side with reusable buffers.
pub struct VectorField<'a> {
    net: &'a FlowNetwork,
    policy: &'a RoutingPolicy,
    flow: Vec<f64>,
    local: Vec<f64>,
    split: Vec<f64>,
    node_inflow: Vec<f64>,
}

impl<'a> VectorField<'a> {
    pub fn new(net: &'a FlowNetwork, policy: &'a RoutingPolicy) -> Result<Self, DynamicsError> {
        let mut widest = 0;
        for &v in net.order() {
            let k = net.topology().outgoing(v).len();
            if k == 0 {
                continue;
            }
            let p = policy.node(v).ok_or(RoutingError::MissingPolicy(v))?;
            if p.arity() != k {
                return Err(RoutingError::Arity { node: v, expected: p.arity(), got: k }.into());
            }
            widest = widest.max(k);
        }
        Ok(Self {
            net,
            policy,
            flow: vec![0.0; net.link_count()],
            local: vec![0.0; widest],
            split: vec![0.0; widest],
            node_inflow: vec![0.0; net.node_count()],
        })
    }

    /// Writes `d rho / dt` into `out` given external inflow `lambda0`.
    /// Negative density entries (RK stages may dip slightly) are read as 0.
    pub fn eval(&mut self, lambda0: f64, rho: &[f64], out: &mut [f64]) {
        let topo = self.net.topology();
        for (k, ff) in self.net.flows().iter().enumerate() {
            self.flow[k] = ff.value(rho[k].max(0.0));
        }
        for &v in self.net.order() {
            let lambda = if v == self.net.origin() {
                lambda0
            } else {
                topo.incoming(v).iter().map(|&k| self.flow[k]).sum()
            };
            self.node_inflow[v.0] = lambda;
            let out_links = topo.outgoing(v);
            if out_links.is_empty() {
                continue;
            }
            let m = out_links.len();
            for (i, &k) in out_links.iter().enumerate() {
                self.local[i] = rho[k].max(0.0);
            }
            let p = self.policy.node(v).expect("checked in constructor");
            p.route_into(&self.local[..m], &mut self.split[..m]);
            for (i, &k) in out_links.iter().enumerate() {
                out[k] = lambda * self.split[i] - self.flow[k];
            }
        }
    }

    /// Flows and node inflows from the last [`eval`](Self::eval).
    pub fn last_flows(&self) -> (&[f64], &[f64]) {
        (&self.flow, &self.node_inflow)
    }
}

/// `d rho / dt` at `rho` for constant inflow.
pub fn rhs(net: &FlowNetwork, policy: &RoutingPolicy, inflow: f64, rho: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    check_state(net, rho)?;
    let mut field = VectorField::new(net, policy)?;
    let mut out = vec![0.0; net.link_count()];
    field.eval(inflow, rho, &mut out);
    Ok(out)
}

fn check_state(net: &FlowNetwork, rho: &[f64]) -> Result<(), DynamicsError> {
    if rho.len() != net.link_count() {
        return Err(DynamicsError::InitialState(format!(
            "expected {} densities, got {}",
            net.link_count(),
            rho.len()
        )));
    }
    if let Some((k, r)) = rho.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r >= 0.0)) {
        return Err(DynamicsError::InitialState(format!("density of link #{k} is {r}")));
    }
    Ok(())
}

/// Integrates from `rho0` with constant inflow `config.inflow`.
pub fn simulate(
    net: &FlowNetwork,
    policy: &RoutingPolicy,
    config: &SimulationConfig,
    rho0: &[f64],
) -> Result<Trajectory, DynamicsError> {
    let lambda = config.inflow;
    simulate_with_inflow(net, policy, config, rho0, |_| lambda)
}

/// Integrates from `rho0` with time-varying inflow `lambda0(t)`; the
/// configured constant inflow is ignored.
pub fn simulate_with_inflow<F>(
    net: &FlowNetwork,
    policy: &RoutingPolicy,
    config: &SimulationConfig,
    rho0: &[f64],
    inflow: F,
) -> Result<Trajectory, DynamicsError>
where
    F: Fn(f64) -> f64,
{
    config.validate()?;
    check_state(net, rho0)?;
    let mut field = VectorField::new(net, policy)?;
    let dt_target = config.step_for(net);
    if !(dt_target.is_finite() && dt_target > 0.0) {
        return Err(DynamicsError::Config(format!("step size {dt_target} is not positive")));
    }
    let steps = ((config.horizon / dt_target).ceil() as usize).max(1);
    let h = config.horizon / steps as f64;
    let stride = steps.div_ceil(config.max_samples - 1).max(1);

    let n = net.link_count();
    let mut rho = rho0.to_vec();
    let mut deriv = vec![0.0; n];
    let mut rk = Rk4::new(n);
    let mut diagnostics = Diagnostics { dt: h, steps, ..Default::default() };

    let mut traj = Trajectory {
        link_ids: net.topology().link_ids(),
        origin: net.origin(),
        destination: net.destination(),
        times: Vec::new(),
        densities: Vec::new(),
        flows: Vec::new(),
        node_inflows: Vec::new(),
        terminal_derivative: Vec::new(),
        diagnostics: Diagnostics::default(),
    };
    let record = |traj: &mut Trajectory, field: &mut VectorField, t: f64, rho: &[f64], deriv: &mut [f64]| {
        field.eval(inflow(t), rho, deriv);
        let (f, l) = field.last_flows();
        traj.times.push(t);
        traj.densities.push(rho.to_vec());
        traj.flows.push(f.to_vec());
        traj.node_inflows.push(l.to_vec());
    };
    record(&mut traj, &mut field, 0.0, &rho, &mut deriv);

    for i in 0..steps {
        let t = i as f64 * h;
        rk.step(t, h, &mut rho, |s, y, dy| field.eval(inflow(s), y, dy));
        let mut clamped = false;
        for (k, r) in rho.iter_mut().enumerate() {
            if !r.is_finite() || *r > config.density_ceiling {
                return Err(DynamicsError::Unstable { t: t + h, link_index: k, value: *r });
            }
            if *r < 0.0 {
                if -*r > UNDERSHOOT_TOLERANCE {
                    clamped = true;
                    diagnostics.max_undershoot = diagnostics.max_undershoot.max(-*r);
                }
                *r = 0.0;
            }
        }
        diagnostics.clamp_events += clamped as usize;
        if (i + 1) % stride == 0 || i + 1 == steps {
            let t_rec = if i + 1 == steps { config.horizon } else { (i + 1) as f64 * h };
            record(&mut traj, &mut field, t_rec, &rho, &mut deriv);
        }
    }
    traj.terminal_derivative = deriv;
    traj.diagnostics = diagnostics;
    Ok(traj)
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferEstimate {
    pub alpha: f64,
    pub inflow: f64,
    /// `min` of the outflow over the tail window.
    pub tail_min: f64,
    pub tail_variation: f64,
    pub transferring: bool,
    /// The tail still moves by more than 5% of the inflow.
    pub inconclusive: bool,
}

/// Tail-window test of `liminf lambda_n(t) >= alpha lambda_0`.
pub fn alpha_transfer_estimate(traj: &Trajectory, alpha: f64, inflow: f64, config: &SimulationConfig) -> TransferEstimate {
    let (tail_min, tail_variation) = traj.tail_outflow_range(config.tail_window);
    let tol = config.transfer_tol_rel * inflow;
    TransferEstimate {
        alpha,
        inflow,
        tail_min,
        tail_variation,
        transferring: tail_min >= alpha * inflow - tol,
        inconclusive: tail_variation > 0.05 * inflow,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub seed: u64,
    pub tolerance: f64,
    pub initial_densities: Vec<Vec<f64>>,
    pub terminal_flows: Vec<Vec<f64>>,
    pub limit_flow: Vec<f64>,
    /// Largest sup-norm distance between two runs.
    pub max_pairwise: f64,
    /// Largest sup-norm distance between a run and the limit flow.
    pub max_to_limit: f64,
    pub passed: bool,
}

/// Runs `runs` simulations from log-uniform initial densities in
/// `[1e-3, 1e2]` times each link's median density and compares their
/// terminal flows with each other and with [`network_limit_flow`].
pub fn convergence_check(
    net: &FlowNetwork,
    policy: &RoutingPolicy,
    config: &SimulationConfig,
    runs: usize,
    seed: u64,
    tolerance: f64,
) -> Result<ConvergenceReport, DynamicsError> {
    let limit = network_limit_flow(net, policy, config.inflow, &FixedPointConfig::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let medians: Vec<f64> = net.flows().iter().map(|f| f.median_density().0).collect();
    let initial: Vec<Vec<f64>> = (0..runs)
        .map(|_| medians.iter().map(|m| m * 10f64.powf(rng.gen_range(-3.0..=2.0))).collect())
        .collect();
    let terminal: Vec<Vec<f64>> = initial
        .par_iter()
        .map(|rho0| simulate(net, policy, config, rho0).map(|t| t.terminal_flow().to_vec()))
        .collect::<Result<_, _>>()?;
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let mut max_pairwise = 0.0f64;
    for i in 0..terminal.len() {
        for j in i + 1..terminal.len() {
            max_pairwise = max_pairwise.max(dist(&terminal[i], &terminal[j]));
        }
    }
    let max_to_limit = terminal.iter().map(|f| dist(f, &limit.flows)).fold(0.0, f64::max);
    Ok(ConvergenceReport {
        seed,
        tolerance,
        initial_densities: initial,
        terminal_flows: terminal,
        limit_flow: limit.flows,
        max_pairwise,
        max_to_limit,
        passed: max_pairwise <= tolerance && max_to_limit <= tolerance,
    })
}

/// Local system at a single node: a two-node network whose parallel links
/// are the node's outgoing links, driven by `inflow(t)`.
pub fn simulate_local<F>(
    policy: NodePolicy,
    flows: &[FlowFunction],
    config: &SimulationConfig,
    rho0: &[f64],
    inflow: F,
) -> Result<Trajectory, DynamicsError>
where
    F: Fn(f64) -> f64,
{
    let links: Vec<Link> =
        (0..flows.len()).map(|k| Link { id: k as LinkId, tail: NodeId(0), head: NodeId(1) }).collect();
    let topo = NetworkTopology::new(2, links).map_err(|e| DynamicsError::Config(e.to_string()))?;
    let net = FlowNetwork::new(topo.clone(), flows.to_vec()).map_err(|e| DynamicsError::Config(e.to_string()))?;
    let routing = RoutingPolicy::new(&topo, vec![Some(policy), None])?;
    simulate_with_inflow(&net, &routing, config, rho0, inflow)
}
