//! Command implementations shared by the binary and the C interface.
//! Each one is a pure function of the scenario and its arguments.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    network_limit_flow, simulate, FixedPointConfig, SimulationConfig, SimulationSummary, Trajectory,
};
use crate::resilience::{estimate_weak_resilience, ResilienceConfig, ResilienceReport};
use crate::scenario::Scenario;
use crate::topology::{LinkId, MinCutMethod, NodeId};

pub const OUTPUT_SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub arguments: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, scenario: &Scenario, seed: u64) -> Self {
        Self {
            schema_version: OUTPUT_SCHEMA_VERSION,
            command: command.to_string(),
            scenario_hash: scenario.document.hash(),
            seed,
            tool_version: TOOL_VERSION.to_string(),
            arguments: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationInfo {
    pub magnitude: f64,
    pub stretching: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cut_attack_alpha: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulateReport {
    pub schema_version: u32,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(flatten)]
    pub summary: Option<SimulationSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationInfo>,
}

#[derive(Clone, Debug, Default)]
pub struct SimulateArgs {
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
}

impl SimulateArgs {
    pub fn config(&self, scenario: &Scenario) -> SimulationConfig {
        SimulationConfig {
            horizon: self.horizon.unwrap_or(scenario.simulation.horizon),
            dt: self.dt.or(scenario.simulation.dt),
            ..scenario.simulation.clone()
        }
    }
}

/// Simulates the (possibly perturbed) scenario. The step size defaults to
/// the unperturbed network's rule so that perturbations do not change it.
/// A failed run still yields a report with `ok = false`.
pub fn run_simulate(scenario: &Scenario, args: &SimulateArgs) -> (Option<Trajectory>, SimulateReport) {
    let mut config = args.config(scenario);
    config.dt = Some(config.step_for(&scenario.network));
    let net = scenario.effective_network();
    let perturbation = scenario.perturbation.as_ref().map(|p| PerturbationInfo {
        magnitude: p.spec.magnitude(),
        stretching: p.spec.stretching(),
        cut_attack_alpha: p.cut_attack_alpha,
    });
    let result = scenario
        .initial_densities()
        .map_err(|e| e.to_string())
        .and_then(|rho0| simulate(&net, &scenario.policy, &config, &rho0).map_err(|e| e.to_string()));
    match result {
        Ok(traj) => {
            let summary = SimulationSummary::from_trajectory(&net, &traj, &config);
            let report =
                SimulateReport { schema_version: OUTPUT_SCHEMA_VERSION, ok: true, error: None, summary: Some(summary), perturbation };
            (Some(traj), report)
        }
        Err(e) => (
            None,
            SimulateReport { schema_version: OUTPUT_SCHEMA_VERSION, ok: false, error: Some(e), summary: None, perturbation },
        ),
    }
}

/// `t, rho_<id>.., f_<id>.., lambda_<node>..` with one row per sample.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for id in &traj.link_ids {
        write!(out, ",rho_{id}").unwrap();
    }
    for id in &traj.link_ids {
        write!(out, ",f_{id}").unwrap();
    }
    let nodes = traj.node_inflows.first().map_or(0, Vec::len);
    for v in 0..nodes {
        write!(out, ",lambda_{v}").unwrap();
    }
    out.push('\n');
    for i in 0..traj.times.len() {
        write!(out, "{}", traj.times[i]).unwrap();
        for x in traj.densities[i].iter().chain(&traj.flows[i]).chain(&traj.node_inflows[i]) {
            write!(out, ",{x}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct MinCutReport {
    pub schema_version: u32,
    pub capacity: f64,
    pub cut: CutReport,
    pub method: MinCutMethod,
    pub max_flow: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CutReport {
    pub origin_side: Vec<NodeId>,
    pub links: Vec<LinkId>,
}

pub fn run_mincut(scenario: &Scenario) -> Result<MinCutReport, crate::topology::TopologyError> {
    let mc = scenario.network.min_cut()?;
    Ok(MinCutReport {
        schema_version: OUTPUT_SCHEMA_VERSION,
        capacity: mc.capacity,
        cut: CutReport { origin_side: mc.cut.origin_side, links: mc.cut.cut_links },
        method: mc.method,
        max_flow: mc.max_flow,
    })
}

#[derive(Clone, Debug)]
pub struct ResilienceArgs {
    pub alphas: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

pub fn resilience_config(scenario: &Scenario, args: &ResilienceArgs) -> ResilienceConfig {
    let defaults = ResilienceConfig::default();
    let mut simulation = scenario.simulation.clone();
    if scenario.document.simulation.as_ref().and_then(|s| s.horizon).is_none() {
        simulation.horizon = defaults.simulation.horizon;
    }
    ResilienceConfig {
        alphas: args.alphas.clone().unwrap_or(defaults.alphas.clone()),
        samples: args.samples.unwrap_or(defaults.samples),
        seed: args.seed.unwrap_or(scenario.document.seed),
        jobs: args.jobs,
        simulation,
        ..defaults
    }
}

pub fn run_resilience(
    scenario: &Scenario,
    args: &ResilienceArgs,
) -> Result<ResilienceReport, crate::resilience::ResilienceError> {
    let config = resilience_config(scenario, args);
    estimate_weak_resilience(&scenario.network, &scenario.policy, scenario.inflow(), scenario.initial_flow.as_deref(), &config)
}

/// Inclusive `start:stop:step` range.
pub fn parse_sweep(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(format!("expected start:stop:step, got {text:?}"));
    };
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("not a number: {s:?}"));
    let (start, stop, step) = (parse(a)?, parse(b)?, parse(c)?);
    if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0 && start >= 0.0 && stop >= start) {
        return Err(format!("need 0 <= start <= stop and step > 0, got {text:?}"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err("sweep has more than a million points".into());
    }
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitFlowRow {
    pub inflow: f64,
    pub flows: Vec<f64>,
    pub saturated: Vec<bool>,
    pub outflow: f64,
    pub error: Option<String>,
}

pub fn run_limitflow(scenario: &Scenario, inflows: &[f64], jobs: Option<usize>) -> Result<Vec<LimitFlowRow>, String> {
    let net = scenario.effective_network();
    let m = net.link_count();
    let work = || {
        inflows
            .par_iter()
            .map(|&lambda| match network_limit_flow(&net, &scenario.policy, lambda, &FixedPointConfig::default()) {
                Ok(l) => LimitFlowRow {
                    inflow: lambda,
                    outflow: l.outflow(&net),
                    flows: l.flows,
                    saturated: l.saturated,
                    error: None,
                },
                Err(e) => LimitFlowRow {
                    inflow: lambda,
                    flows: vec![f64::NAN; m],
                    saturated: vec![false; m],
                    outflow: f64::NAN,
                    error: Some(e.to_string()),
                },
            })
            .collect::<Vec<_>>()
    };
    match jobs {
        None => Ok(work()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map(|p| p.install(work))
            .map_err(|e| e.to_string()),
    }
}

/// `lambda0, f_<id>.., sat_<id>.., outflow, status`.
pub fn limitflow_csv(scenario: &Scenario, rows: &[LimitFlowRow]) -> String {
    let ids = scenario.network.topology().link_ids();
    let mut out = String::from("lambda0");
    for id in &ids {
        write!(out, ",f_{id}").unwrap();
    }
    for id in &ids {
        write!(out, ",sat_{id}").unwrap();
    }
    out.push_str(",outflow,status\n");
    for r in rows {
        write!(out, "{}", r.inflow).unwrap();
        for f in &r.flows {
            write!(out, ",{f}").unwrap();
        }
        for s in &r.saturated {
            write!(out, ",{}", *s as u8).unwrap();
        }
        let status = r.error.as_deref().map_or("ok".to_string(), |e| e.replace([',', '\n', '"'], " "));
        writeln!(out, ",{},{status}", r.outflow).unwrap();
    }
    out
}
