//! Capacity-reducing attacks and weak-resilience estimates.
//!
//! Only per-link scaling perturbations `mu_e -> eps_e mu_e` are searched. On
//! the built-in families these have unit stretching coefficient and magnitude
//! `sum_e (1 - eps_e) f_e^max`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{
    alpha_transfer_estimate, network_limit_flow, simulate, DynamicsError, FixedPointConfig, SimulationConfig,
};
use crate::flows::{FlowError, PerturbationSpec};
use crate::network::FlowNetwork;
use crate::routing::{check_property_a, check_property_b_all, LocalRouting, RoutingPolicy};
use crate::topology::{LinkId, MinCut, NodeId, TopologyError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResilienceError {
    #[error("invalid attack parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("perturbation stretches by {theta}, above the budget {theta_max}")]
    StretchBudget { theta: f64, theta_max: f64 },
    #[error("initial flow is invalid: {0}")]
    InitialFlow(String),
    #[error("policy at node {node} is not locally responsive: {reason}")]
    NotResponsive { node: NodeId, reason: String },
}

/// Scaling attack on a minimum cut.
#[derive(Clone, Debug)]
pub struct CutAttack {
    pub min_cut: MinCut,
    pub eps: f64,
    pub perturbation: PerturbationSpec,
}

impl CutAttack {
    pub fn magnitude(&self) -> f64 {
        self.perturbation.magnitude()
    }
}

fn check_alpha(alpha: f64) -> Result<(), ResilienceError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(ResilienceError::BadParameter(format!("alpha must lie in (0, 1], got {alpha}")))
    }
}

/// Scales every link of a minimum cut by `eps = alpha lambda_0 / (2 C)`.
/// The perturbed cut can carry at most `alpha lambda_0 / 2`, and the
/// magnitude is `C - alpha lambda_0 / 2`.
pub fn cut_attack(net: &FlowNetwork, alpha: f64, inflow: f64) -> Result<CutAttack, ResilienceError> {
    check_alpha(alpha)?;
    if !(inflow.is_finite() && inflow > 0.0) {
        return Err(ResilienceError::BadParameter(format!("inflow must be positive, got {inflow}")));
    }
    let min_cut = net.min_cut()?;
    let eps = alpha * inflow / (2.0 * min_cut.capacity);
    if eps > 1.0 {
        return Err(ResilienceError::BadParameter(format!(
            "scaling factor {eps} exceeds 1; the inflow {inflow} is above 2C/alpha"
        )));
    }
    let perturbation = uniform_cut_scaling(net, &min_cut, eps)?;
    Ok(CutAttack { min_cut, eps, perturbation })
}

fn uniform_cut_scaling(net: &FlowNetwork, min_cut: &MinCut, eps: f64) -> Result<PerturbationSpec, ResilienceError> {
    let factors: BTreeMap<usize, f64> = min_cut
        .cut
        .cut_links
        .iter()
        .map(|&id| Ok((net.topology().index_of(id)?, eps)))
        .collect::<Result<_, TopologyError>>()?;
    Ok(PerturbationSpec::scaling(net.flows(), &factors)?)
}

/// A perturbation together with the transfer target it is meant to defeat.
#[derive(Clone, Debug)]
pub struct AttackScenario<'a> {
    pub network: &'a FlowNetwork,
    pub policy: &'a RoutingPolicy,
    pub inflow: f64,
    pub perturbation: PerturbationSpec,
    pub alpha: f64,
    pub theta_max: f64,
}

impl<'a> AttackScenario<'a> {
    pub fn new(
        network: &'a FlowNetwork,
        policy: &'a RoutingPolicy,
        inflow: f64,
        perturbation: PerturbationSpec,
        alpha: f64,
        theta_max: f64,
    ) -> Result<Self, ResilienceError> {
        if alpha != 0.0 {
            check_alpha(alpha)?;
        }
        let theta = perturbation.stretching();
        if theta > theta_max {
            return Err(ResilienceError::StretchBudget { theta, theta_max });
        }
        if perturbation.perturbed().len() != network.link_count() {
            return Err(ResilienceError::BadParameter("perturbation does not match the network".into()));
        }
        Ok(Self { network, policy, inflow, perturbation, alpha, theta_max })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AttackOutcome {
    pub delta: f64,
    pub defeated: bool,
    pub tail_min: f64,
    pub tail_variation: f64,
    pub inconclusive: bool,
}

/// Densities `mu^{-1}(f0)` under the unperturbed flow functions.
pub fn initial_densities(net: &FlowNetwork, f0: &[f64]) -> Result<Vec<f64>, ResilienceError> {
    if f0.len() != net.link_count() {
        return Err(ResilienceError::InitialFlow(format!("expected {} flows, got {}", net.link_count(), f0.len())));
    }
    for (k, (&f, ff)) in f0.iter().zip(net.flows()).enumerate() {
        if !(f >= 0.0 && f < ff.f_max()) {
            return Err(ResilienceError::InitialFlow(format!(
                "flow {f} on link #{k} is outside [0, {})",
                ff.f_max()
            )));
        }
    }
    Ok(net.density_of(f0)?)
}

/// Default initial flow: the unperturbed limit flow when it lies strictly
/// inside the capacity box, otherwise zero.
pub fn default_initial_flow(net: &FlowNetwork, policy: &RoutingPolicy, inflow: f64) -> Vec<f64> {
    match network_limit_flow(net, policy, inflow, &FixedPointConfig::default()) {
        Ok(limit) if limit.saturated.iter().all(|s| !s) => {
            let interior = limit.flows.iter().zip(net.flows()).all(|(&f, ff)| f < ff.f_max());
            if interior {
                limit.flows
            } else {
                vec![0.0; net.link_count()]
            }
        }
        _ => vec![0.0; net.link_count()],
    }
}

/// Simulates the perturbed network under the unchanged policy from
/// `rho(0) = mu^{-1}(f0)` and applies the tail transfer test.
pub fn evaluate_attack(
    scenario: &AttackScenario<'_>,
    f0: &[f64],
    config: &SimulationConfig,
) -> Result<AttackOutcome, ResilienceError> {
    let rho0 = initial_densities(scenario.network, f0)?;
    let perturbed = scenario.network.perturbed(&scenario.perturbation);
    let cfg = SimulationConfig {
        inflow: scenario.inflow,
        dt: Some(config.step_for(scenario.network)),
        ..config.clone()
    };
    let traj = simulate(&perturbed, scenario.policy, &cfg, &rho0)?;
    let est = alpha_transfer_estimate(&traj, scenario.alpha, scenario.inflow, &cfg);
    Ok(AttackOutcome {
        delta: scenario.perturbation.magnitude(),
        defeated: !est.transferring,
        tail_min: est.tail_min,
        tail_variation: est.tail_variation,
        inconclusive: est.inconclusive,
    })
}

#[derive(Clone, Debug)]
pub struct ResilienceConfig {
    pub alphas: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    /// Lower-sweep budget is `(1 - margin) C`.
    pub margin: f64,
    pub alpha_floor: f64,
    /// Bisection stops once the magnitude bracket is below this fraction of `C`.
    pub bisection_tol_rel: f64,
    pub simulation: SimulationConfig,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Samples drawn for the cooperativity precondition.
    pub property_samples: usize,
}

impl Default for ResilienceConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.5, 0.2, 0.1, 0.05],
            samples: 50,
            seed: 0,
            margin: 0.1,
            alpha_floor: 1e-3,
            bisection_tol_rel: 0.01,
            simulation: SimulationConfig { horizon: 300.0, ..Default::default() },
            jobs: None,
            property_samples: 200,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaResult {
    pub alpha: f64,
    /// Smallest magnitude found to defeat `alpha`-transfer.
    pub defeating_delta: f64,
    /// Largest uniform-cut magnitude found not to defeat it.
    pub preserved_delta: f64,
    /// `C - alpha lambda_0 / 2`.
    pub upper_bound: f64,
    pub within_upper_bound: bool,
    pub evaluations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialVerdict {
    pub delta: f64,
    /// Scaling factor per link id; unlisted links are untouched.
    pub factors: BTreeMap<LinkId, f64>,
    pub tail_min: f64,
    pub preserved: bool,
    pub inconclusive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    /// `lower <= upper + tolerance`.
    pub ordered: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResilienceReport {
    pub schema_version: u32,
    pub min_cut: f64,
    pub cut_links: Vec<LinkId>,
    pub inflow: f64,
    pub initial_flow: Vec<f64>,
    pub alpha_sweep: Vec<AlphaResult>,
    pub preserved_delta_max: f64,
    pub lower_sweep_defeats: usize,
    pub alpha_floor: f64,
    pub margin: f64,
    pub bisection_tol: f64,
    pub bracket: Bracket,
    pub samples: usize,
    pub trials: Vec<TrialVerdict>,
    pub seed: u64,
}

/// Checks that every node's rule satisfies the cooperativity and
/// congestion-avoidance conditions with strictly positive splits.
pub fn check_responsive(policy: &RoutingPolicy, samples: usize, seed: u64) -> Result<(), ResilienceError> {
    for (node, p) in policy.nodes() {
        if !p.strictly_positive() {
            return Err(ResilienceError::NotResponsive { node, reason: "some split is not strictly positive".into() });
        }
        let a = check_property_a(p, samples, seed);
        if !a.passed {
            return Err(ResilienceError::NotResponsive {
                node,
                reason: format!("{} Jacobian samples have a negative off-diagonal entry", a.violation_count),
            });
        }
        if let Some(b) = check_property_b_all(p).into_iter().find(|b| !b.passed) {
            return Err(ResilienceError::NotResponsive {
                node,
                reason: format!("mass escapes from congested links {:?}", b.subset),
            });
        }
    }
    Ok(())
}

fn run_in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, ResilienceError> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| ResilienceError::BadParameter(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Upper sweep: bisection on the uniform cut scaling for each `alpha`.
/// Lower sweep: random scalings with magnitude at most `(1 - margin) C`
/// tested at `alpha_floor`. Both use the same simulation settings.
pub fn estimate_weak_resilience(
    net: &FlowNetwork,
    policy: &RoutingPolicy,
    inflow: f64,
    f0: Option<&[f64]>,
    config: &ResilienceConfig,
) -> Result<ResilienceReport, ResilienceError> {
    if !(inflow.is_finite() && inflow > 0.0) {
        return Err(ResilienceError::BadParameter(format!("inflow must be positive, got {inflow}")));
    }
    for &a in &config.alphas {
        check_alpha(a)?;
    }
    if !(config.margin > 0.0 && config.margin < 1.0) {
        return Err(ResilienceError::BadParameter(format!("margin must lie in (0, 1), got {}", config.margin)));
    }
    check_alpha(config.alpha_floor)?;
    check_responsive(policy, config.property_samples, config.seed)?;

    let f0 = match f0 {
        Some(f) => f.to_vec(),
        None => default_initial_flow(net, policy, inflow),
    };
    initial_densities(net, &f0)?;
    let min_cut = net.min_cut()?;
    let c = min_cut.capacity;
    let tol = config.bisection_tol_rel * c;
    let sim = SimulationConfig { inflow, dt: Some(config.simulation.step_for(net)), ..config.simulation.clone() };

    let trial_plans = plan_trials(net, &min_cut, config)?;

    let (alpha_sweep, trials) = run_in_pool(config.jobs, || {
        let sweep: Result<Vec<AlphaResult>, ResilienceError> = config
            .alphas
            .par_iter()
            .map(|&alpha| bisect_alpha(net, policy, inflow, &f0, &min_cut, alpha, tol, &sim))
            .collect();
        let trials: Result<Vec<TrialVerdict>, ResilienceError> = trial_plans
            .par_iter()
            .map(|factors| run_trial(net, policy, inflow, &f0, factors, config.alpha_floor, &sim))
            .collect();
        (sweep, trials)
    })?;
    let alpha_sweep = alpha_sweep?;
    let trials = trials?;

    let preserved_delta_max = trials.iter().filter(|t| t.preserved).map(|t| t.delta).fold(0.0, f64::max);
    let lower_sweep_defeats = trials.iter().filter(|t| !t.preserved).count();
    let upper = alpha_sweep
        .iter()
        .min_by(|a, b| a.alpha.total_cmp(&b.alpha))
        .map_or(c, |r| r.defeating_delta);
    Ok(ResilienceReport {
        schema_version: 1,
        min_cut: c,
        cut_links: min_cut.cut.cut_links.clone(),
        inflow,
        initial_flow: f0,
        alpha_sweep,
        preserved_delta_max,
        lower_sweep_defeats,
        alpha_floor: config.alpha_floor,
        margin: config.margin,
        bisection_tol: tol,
        bracket: Bracket {
            lower: preserved_delta_max,
            upper,
            width: upper - preserved_delta_max,
            ordered: preserved_delta_max <= upper + tol,
        },
        samples: trials.len(),
        trials,
        seed: config.seed,
    })
}

#[allow(clippy::too_many_arguments)]
fn bisect_alpha(
    net: &FlowNetwork,
    policy: &RoutingPolicy,
    inflow: f64,
    f0: &[f64],
    min_cut: &MinCut,
    alpha: f64,
    tol: f64,
    sim: &SimulationConfig,
) -> Result<AlphaResult, ResilienceError> {
    let c = min_cut.capacity;
    let mut evaluations = 0;
    let mut defeats = |eps: f64| -> Result<bool, ResilienceError> {
        evaluations += 1;
        let spec = uniform_cut_scaling(net, min_cut, eps)?;
        let scenario = AttackScenario::new(net, policy, inflow, spec, alpha, 1.0)?;
        Ok(evaluate_attack(&scenario, f0, sim)?.defeated)
    };
    // eps_def defeats, eps_ok does not; magnitude is (1 - eps) C
    let mut eps_def = (alpha * inflow / (2.0 * c)).min(1.0);
    let mut eps_ok = 1.0;
    if defeats(1.0)? {
        eps_def = 1.0;
        eps_ok = f64::NAN;
    } else if !defeats(eps_def)? {
        // the construction survived in simulation; search below it
        let mut e = eps_def;
        eps_def = 0.0;
        for _ in 0..20 {
            eps_ok = e;
            e *= 0.5;
            if defeats(e)? {
                eps_def = e;
                break;
            }
        }
    }
    if eps_ok.is_finite() {
        while (eps_ok - eps_def) * c > tol {
            let mid = 0.5 * (eps_def + eps_ok);
            if defeats(mid)? {
                eps_def = mid;
            } else {
                eps_ok = mid;
            }
        }
    }
    let defeating_delta = (1.0 - eps_def) * c;
    let upper_bound = c - 0.5 * alpha * inflow;
    Ok(AlphaResult {
        alpha,
        defeating_delta,
        preserved_delta: if eps_ok.is_finite() { (1.0 - eps_ok) * c } else { 0.0 },
        upper_bound,
        within_upper_bound: defeating_delta <= upper_bound + tol,
        evaluations,
    })
}

/// Per-link scaling factors for the lower sweep. The first trial spends the
/// whole budget uniformly on the minimum cut; the rest reduce a random
/// subset of links by random amounts with a random total below the budget.
fn plan_trials(
    net: &FlowNetwork,
    min_cut: &MinCut,
    config: &ResilienceConfig,
) -> Result<Vec<BTreeMap<usize, f64>>, ResilienceError> {
    let caps = net.capacities();
    let budget = (1.0 - config.margin) * min_cut.capacity;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut plans = Vec::with_capacity(config.samples);
    if config.samples > 0 {
        let mut first = BTreeMap::new();
        for &id in &min_cut.cut.cut_links {
            first.insert(net.topology().index_of(id)?, config.margin);
        }
        plans.push(first);
    }
    while plans.len() < config.samples {
        let target = budget * rng.gen_range(0.0..1.0f64).sqrt();
        let mut weights = Vec::new();
        for k in 0..caps.len() {
            if rng.gen_bool(0.6) {
                weights.push((k, rng.gen_range(0.05..1.0f64)));
            }
        }
        if weights.is_empty() {
            weights.push((rng.gen_range(0..caps.len()), 1.0));
        }
        let raw: f64 = weights.iter().map(|&(k, w)| w * caps[k]).sum();
        let scale = target / raw;
        let plan: BTreeMap<usize, f64> =
            weights.into_iter().map(|(k, w)| (k, (1.0 - (w * scale).min(0.999)).clamp(1e-3, 1.0))).collect();
        plans.push(plan);
    }
    Ok(plans)
}

fn run_trial(
    net: &FlowNetwork,
    policy: &RoutingPolicy,
    inflow: f64,
    f0: &[f64],
    factors: &BTreeMap<usize, f64>,
    alpha_floor: f64,
    sim: &SimulationConfig,
) -> Result<TrialVerdict, ResilienceError> {
    let spec = PerturbationSpec::scaling(net.flows(), factors)?;
    let scenario = AttackScenario::new(net, policy, inflow, spec, alpha_floor, 1.0)?;
    let outcome = evaluate_attack(&scenario, f0, sim)?;
    Ok(TrialVerdict {
        delta: outcome.delta,
        factors: factors.iter().map(|(&k, &e)| (net.topology().link(k).id, e)).collect(),
        tail_min: outcome.tail_min,
        // strict floor: the transfer tolerance would make this test vacuous
        preserved: outcome.tail_min >= alpha_floor * inflow,
        inconclusive: outcome.inconclusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::FlowFunction;
    use crate::topology::NetworkTopology;
    use approx::assert_abs_diff_eq;

    fn two_link() -> (FlowNetwork, RoutingPolicy) {
        let topo = NetworkTopology::from_pairs(2, &[(0, 1), (0, 1)]).unwrap();
        let policy = RoutingPolicy::logit(&topo, 1.0, &[0.6, 6.0]).unwrap();
        let flows = vec![FlowFunction::exponential(1.0, 0.75).unwrap(); 2];
        (FlowNetwork::new(topo, flows).unwrap(), policy)
    }

    fn chain() -> FlowNetwork {
        let topo = NetworkTopology::from_pairs(3, &[(0, 1), (1, 2)]).unwrap();
        let flows = vec![FlowFunction::exponential(1.0, 2.0).unwrap(), FlowFunction::exponential(1.0, 1.0).unwrap()];
        FlowNetwork::new(topo, flows).unwrap()
    }

    #[test]
    fn cut_attack_on_parallel_links() {
        let (net, _) = two_link();
        let atk = cut_attack(&net, 0.5, 1.0).unwrap();
        assert_abs_diff_eq!(atk.eps, 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(atk.magnitude(), 1.25, epsilon = 1e-15);
        assert_eq!(atk.perturbation.stretching(), 1.0);
    }

    #[test]
    fn cut_attack_on_chain() {
        let atk = cut_attack(&chain(), 1.0, 0.5).unwrap();
        assert_eq!(atk.min_cut.cut.cut_links, vec![1]);
        assert_abs_diff_eq!(atk.eps, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(atk.magnitude(), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn cut_attack_magnitude_tends_to_capacity() {
        let (net, _) = two_link();
        let atk = cut_attack(&net, 1e-9, 1.0).unwrap();
        assert_abs_diff_eq!(atk.magnitude(), 1.5, epsilon = 1e-9);
    }

    #[test]
    fn cut_attack_rejects_bad_input() {
        let (net, _) = two_link();
        assert!(cut_attack(&net, 0.5, 0.0).is_err());
        assert!(cut_attack(&net, 0.0, 1.0).is_err());
        assert!(cut_attack(&net, 1.0, 4.0).is_err());
    }

    #[test]
    fn attack_outcomes() {
        let (net, policy) = two_link();
        let f0 = default_initial_flow(&net, &policy, 1.0);
        assert_abs_diff_eq!(f0[0], 1.0 / 3.0, epsilon = 1e-9);
        let cfg = SimulationConfig { horizon: 200.0, ..Default::default() };

        let id = AttackScenario::new(&net, &policy, 1.0, PerturbationSpec::identity(net.flows()), 0.05, 1.0).unwrap();
        assert!(!evaluate_attack(&id, &f0, &cfg).unwrap().defeated);

        let atk = cut_attack(&net, 0.5, 1.0).unwrap();
        let sc = AttackScenario::new(&net, &policy, 1.0, atk.perturbation, 0.5, 1.0).unwrap();
        let out = evaluate_attack(&sc, &f0, &cfg).unwrap();
        assert!(out.defeated);
        assert!(out.tail_min < 0.5);

        let small = PerturbationSpec::scaling(net.flows(), &[(0, 0.99)].into_iter().collect()).unwrap();
        let sc = AttackScenario::new(&net, &policy, 1.0, small, 0.05, 1.0).unwrap();
        assert!(!evaluate_attack(&sc, &f0, &cfg).unwrap().defeated);
    }

    #[test]
    fn stretch_budget_enforced() {
        let (net, policy) = two_link();
        let mut repl = BTreeMap::new();
        repl.insert(0, FlowFunction::exponential(0.5, 0.7).unwrap());
        let spec = PerturbationSpec::certify(net.flows(), repl).unwrap();
        assert!(spec.stretching() > 1.0);
        assert!(matches!(
            AttackScenario::new(&net, &policy, 1.0, spec, 0.1, 1.0),
            Err(ResilienceError::StretchBudget { .. })
        ));
    }

    #[test]
    fn boundary_initial_flow_rejected() {
        let (net, _) = two_link();
        assert!(initial_densities(&net, &[0.75, 0.1]).is_err());
        assert!(initial_densities(&net, &[0.1]).is_err());
    }

    #[test]
    fn weak_resilience_report_is_deterministic() {
        let (net, policy) = two_link();
        let cfg = ResilienceConfig {
            alphas: vec![0.5, 0.05],
            samples: 4,
            seed: 11,
            simulation: SimulationConfig { horizon: 100.0, ..Default::default() },
            ..Default::default()
        };
        let a = estimate_weak_resilience(&net, &policy, 1.0, None, &cfg).unwrap();
        let b = estimate_weak_resilience(&net, &policy, 1.0, None, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let r = &a.alpha_sweep[0];
        assert!(r.within_upper_bound, "{r:?}");
        assert!(r.defeating_delta <= 1.25 + a.bisection_tol);
        assert!(a.bracket.ordered, "{:?}", a.bracket);
        assert!(a.alpha_sweep[1].defeating_delta > 1.35);
        assert_eq!(a.lower_sweep_defeats, 0);
        assert_abs_diff_eq!(a.trials[0].delta, 0.9 * 1.5, epsilon = 1e-12);
    }

    #[test]
    fn non_responsive_policy_rejected() {
        let (net, _) = two_link();
        let topo = net.topology().clone();
        let seeking = crate::routing::NodePolicy::Logit(crate::routing::LogitPolicy::congestion_seeking(1.0, vec![1.0, 1.0]).unwrap());
        let policy = RoutingPolicy::new(&topo, vec![Some(seeking), None]).unwrap();
        let err = estimate_weak_resilience(&net, &policy, 1.0, None, &ResilienceConfig::default()).unwrap_err();
        assert!(matches!(err, ResilienceError::NotResponsive { .. }));
    }
}
