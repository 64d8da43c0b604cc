//! Scenario documents: one JSON object per experiment.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "nodes": 2,
//!   "links": [{"id": 1, "tail": 0, "head": 1}, {"id": 2, "tail": 0, "head": 1}],
//!   "flows": {"1": {"family": "exp", "a": 1.0, "f_max": 0.75},
//!             "2": {"family": "exp", "a": 1.0, "f_max": 0.75}},
//!   "policy": {"0": {"eta": 1.0, "weights": {"1": 0.6, "2": 6.0}}},
//!   "inflow": 1.0
//! }
//! ```
//!
//! Optional keys: `name`, `initial_flow` (`{link_id: f}`), `perturbation`
//! (`{link_id: {"type": "scale", "eps": ..}}`, `{link_id: {"type":
//! "replace", "flow": {..}}}` or `{"cut_attack": {"alpha": ..}}`),
//! `simulation` (overrides of the integrator settings) and `seed`.
//!
//! Canonical form: the document re-serialized with fixed key order and
//! numerically sorted ids. Its SHA-256 identifies the scenario in run
//! manifests.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dynamics::SimulationConfig;
use crate::flows::{FlowError, FlowFunction, FlowSpec, PerturbationSpec};
use crate::network::FlowNetwork;
use crate::resilience::{cut_attack, ResilienceError};
use crate::routing::{NodePolicy, PolicySpec, RoutingError, RoutingPolicy};
use crate::topology::{Link, LinkId, NetworkTopology, NodeId, TopologyError, ValidationReport};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at {field} (line {line}, column {column}): {message}")]
    Parse { field: String, line: usize, column: usize, message: String },
    #[error("unsupported schema_version {0} (expected {SCENARIO_SCHEMA_VERSION})")]
    Schema(u32),
    #[error("invalid topology: {0}")]
    Topology(#[from] TopologyError),
    #[error("{0}")]
    CrossReference(String),
    #[error("flow function of link {link}: {source}")]
    Flow { link: LinkId, source: FlowError },
    #[error("policy of node {node}: {source}")]
    Routing { node: usize, source: RoutingError },
    #[error("perturbation: {0}")]
    Perturbation(String),
    #[error("simulation settings: {0}")]
    Simulation(String),
}

impl ScenarioError {
    /// Problems with the document itself rather than with running it.
    pub fn is_validation(&self) -> bool {
        !matches!(self, ScenarioError::Io { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub nodes: usize,
    pub links: Vec<Link>,
    pub flows: BTreeMap<LinkId, FlowSpec>,
    pub policy: BTreeMap<usize, PolicySpec>,
    pub inflow: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_flow: Option<BTreeMap<LinkId, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationOverrides>,
    #[serde(default)]
    pub seed: u64,
}

fn default_schema() -> u32 {
    SCENARIO_SCHEMA_VERSION
}

/// Per-link replacement of a flow function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinkPerturbation {
    Scale { eps: f64 },
    Replace { flow: FlowSpec },
}

#[derive(Clone, Debug, PartialEq)]
pub enum PerturbationSection {
    /// Scale a minimum cut so that `alpha`-transfer fails.
    CutAttack { alpha: f64 },
    Links(BTreeMap<LinkId, LinkPerturbation>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CutAttackParams {
    alpha: f64,
}

impl Serialize for PerturbationSection {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PerturbationSection::CutAttack { alpha } => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("cut_attack", &CutAttackParams { alpha: *alpha })?;
                m.end()
            }
            PerturbationSection::Links(links) => links.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for PerturbationSection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct SectionVisitor;

        impl<'de> Visitor<'de> for SectionVisitor {
            type Value = PerturbationSection;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str(r#"a map of link ids to perturbations, or {"cut_attack": {"alpha": ..}}"#)
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut attack = None;
                let mut links = BTreeMap::new();
                while let Some(key) = map.next_key::<String>()? {
                    if key == "cut_attack" {
                        attack = Some(map.next_value::<CutAttackParams>()?.alpha);
                    } else {
                        let id: LinkId = key
                            .parse()
                            .map_err(|_| de::Error::custom(format!("expected a link id or \"cut_attack\", got {key:?}")))?;
                        links.insert(id, map.next_value::<LinkPerturbation>()?);
                    }
                }
                match attack {
                    Some(_) if !links.is_empty() => {
                        Err(de::Error::custom("cut_attack cannot be combined with per-link entries"))
                    }
                    Some(alpha) => Ok(PerturbationSection::CutAttack { alpha }),
                    None => Ok(PerturbationSection::Links(links)),
                }
            }
        }

        d.deserialize_map(SectionVisitor)
    }
}

/// Optional overrides of [`SimulationConfig`]; the inflow comes from the
/// document's top level.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturation_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer_tol_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_ceiling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_samples: Option<usize>,
}

impl SimulationOverrides {
    pub fn apply(&self, base: SimulationConfig) -> SimulationConfig {
        SimulationConfig {
            horizon: self.horizon.unwrap_or(base.horizon),
            dt: self.dt.or(base.dt),
            convergence_tol: self.convergence_tol.unwrap_or(base.convergence_tol),
            tail_window: self.tail_window.unwrap_or(base.tail_window),
            saturation_threshold: self.saturation_threshold.unwrap_or(base.saturation_threshold),
            transfer_tol_rel: self.transfer_tol_rel.unwrap_or(base.transfer_tol_rel),
            density_ceiling: self.density_ceiling.unwrap_or(base.density_ceiling),
            max_samples: self.max_samples.unwrap_or(base.max_samples),
            ..base
        }
    }
}

impl ScenarioDocument {
    /// Parses a document, reporting the failing field path and position.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            ScenarioError::Parse { field, line: inner.line(), column: inner.column(), message: inner.to_string() }
        })?;
        if doc.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(ScenarioError::Schema(doc.schema_version));
        }
        Ok(doc)
    }

    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_json(&text)
    }

    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario documents serialize")
    }

    /// Hex SHA-256 of the canonical form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(serde_json::to_vec(self).expect("scenario documents serialize"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn topology(&self) -> Result<NetworkTopology, TopologyError> {
        NetworkTopology::new(self.nodes, self.links.clone())
    }

    /// Every link has a flow function, every node with outgoing links has a
    /// policy whose weights name exactly those links, and no entry refers to
    /// an unknown link or node.
    pub fn cross_reference_issues(&self, topo: &NetworkTopology) -> Vec<String> {
        let mut issues = Vec::new();
        let ids: Vec<LinkId> = topo.link_ids();
        for id in &ids {
            if !self.flows.contains_key(id) {
                issues.push(format!("link {id} has no flow function"));
            }
        }
        for id in self.flows.keys() {
            if !ids.contains(id) {
                issues.push(format!("flows: unknown link {id}"));
            }
        }
        for v in topo.nodes() {
            let out = topo.outgoing_ids(v);
            match self.policy.get(&v.0) {
                None if !out.is_empty() => issues.push(format!("node {v} has outgoing links but no policy")),
                Some(_) if out.is_empty() => issues.push(format!("node {v} has no outgoing links but has a policy")),
                Some(p) => {
                    for id in &out {
                        if !p.weights.contains_key(id) {
                            issues.push(format!("policy of node {v} has no weight for link {id}"));
                        }
                    }
                    for id in p.weights.keys() {
                        if !out.contains(id) {
                            issues.push(format!("policy of node {v} weights link {id}, which does not leave it"));
                        }
                    }
                }
                None => {}
            }
        }
        for node in self.policy.keys() {
            if *node >= self.nodes {
                issues.push(format!("policy: unknown node {node}"));
            }
        }
        if let Some(f0) = &self.initial_flow {
            for id in &ids {
                if !f0.contains_key(id) {
                    issues.push(format!("initial_flow has no entry for link {id}"));
                }
            }
            for id in f0.keys() {
                if !ids.contains(id) {
                    issues.push(format!("initial_flow: unknown link {id}"));
                }
            }
        }
        if let Some(PerturbationSection::Links(links)) = &self.perturbation {
            for id in links.keys() {
                if !ids.contains(id) {
                    issues.push(format!("perturbation: unknown link {id}"));
                }
            }
        }
        if !(self.inflow.is_finite() && self.inflow >= 0.0) {
            issues.push(format!("inflow must be finite and nonnegative, got {}", self.inflow));
        }
        issues
    }

    pub fn simulation_config(&self) -> SimulationConfig {
        let base = SimulationConfig { inflow: self.inflow, ..Default::default() };
        match &self.simulation {
            Some(o) => o.apply(base),
            None => base,
        }
    }

    /// Flow functions ordered like the topology's links.
    pub fn flow_functions(&self, topo: &NetworkTopology) -> Result<Vec<FlowFunction>, ScenarioError> {
        topo.links()
            .iter()
            .map(|l| {
                let spec = self
                    .flows
                    .get(&l.id)
                    .ok_or_else(|| ScenarioError::CrossReference(format!("link {} has no flow function", l.id)))?;
                spec.build().map_err(|source| ScenarioError::Flow { link: l.id, source })
            })
            .collect()
    }

    pub fn routing_policy(&self, topo: &NetworkTopology) -> Result<RoutingPolicy, ScenarioError> {
        let nodes = topo
            .nodes()
            .map(|v| {
                let out = topo.outgoing_ids(v);
                if out.is_empty() {
                    return Ok(None);
                }
                let spec = self
                    .policy
                    .get(&v.0)
                    .ok_or_else(|| ScenarioError::CrossReference(format!("node {v} has outgoing links but no policy")))?;
                let weights = out
                    .iter()
                    .map(|id| {
                        spec.weights.get(id).copied().ok_or_else(|| {
                            ScenarioError::CrossReference(format!("policy of node {v} has no weight for link {id}"))
                        })
                    })
                    .collect::<Result<Vec<f64>, _>>()?;
                spec.build(weights).map(Some).map_err(|source| ScenarioError::Routing { node: v.0, source })
            })
            .collect::<Result<Vec<Option<NodePolicy>>, ScenarioError>>()?;
        RoutingPolicy::new(topo, nodes).map_err(|source| ScenarioError::Routing { node: usize::MAX, source })
    }

    /// Parses, cross-checks and builds every object the commands need.
    pub fn build(&self) -> Result<Scenario, ScenarioError> {
        let topo = self.topology()?;
        let report = topo.validate();
        if !report.is_valid() {
            return Err(ScenarioError::Topology(TopologyError::Invalid(report)));
        }
        let issues = self.cross_reference_issues(&topo);
        if !issues.is_empty() {
            return Err(ScenarioError::CrossReference(issues.join("; ")));
        }
        let flows = self.flow_functions(&topo)?;
        let policy = self.routing_policy(&topo)?;
        let network = FlowNetwork::new(topo.clone(), flows)?;
        let simulation = self.simulation_config();
        simulation.validate().map_err(|e| ScenarioError::Simulation(e.to_string()))?;
        let initial_flow = self
            .initial_flow
            .as_ref()
            .map(|m| topo.links().iter().map(|l| m[&l.id]).collect::<Vec<f64>>());
        let perturbation = match &self.perturbation {
            None => None,
            Some(section) => Some(self.build_perturbation(section, &network)?),
        };
        Ok(Scenario { document: self.clone(), network, policy, initial_flow, perturbation, simulation })
    }

    fn build_perturbation(
        &self,
        section: &PerturbationSection,
        net: &FlowNetwork,
    ) -> Result<BuiltPerturbation, ScenarioError> {
        let to_err = |e: FlowError| ScenarioError::Perturbation(e.to_string());
        match section {
            PerturbationSection::CutAttack { alpha } => {
                let atk = cut_attack(net, *alpha, self.inflow)
                    .map_err(|e: ResilienceError| ScenarioError::Perturbation(e.to_string()))?;
                Ok(BuiltPerturbation { spec: atk.perturbation, cut_attack_alpha: Some(*alpha) })
            }
            PerturbationSection::Links(links) => {
                let topo = net.topology();
                let mut scales = BTreeMap::new();
                let mut replacements = BTreeMap::new();
                for (id, entry) in links {
                    let k = topo.index_of(*id)?;
                    match entry {
                        LinkPerturbation::Scale { eps } => {
                            scales.insert(k, *eps);
                        }
                        LinkPerturbation::Replace { flow } => {
                            replacements.insert(k, flow.build().map_err(to_err)?);
                        }
                    }
                }
                let spec = if replacements.is_empty() {
                    PerturbationSpec::scaling(net.flows(), &scales).map_err(to_err)?
                } else {
                    for (k, eps) in scales {
                        let scaled = crate::flows::scale_perturbation(&net.flows()[k], eps).map_err(to_err)?;
                        replacements.insert(k, scaled);
                    }
                    PerturbationSpec::certify(net.flows(), replacements).map_err(to_err)?
                };
                Ok(BuiltPerturbation { spec, cut_attack_alpha: None })
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct BuiltPerturbation {
    pub spec: PerturbationSpec,
    /// Set when the section asked for a minimum-cut attack.
    pub cut_attack_alpha: Option<f64>,
}

/// A document together with the objects built from it.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub document: ScenarioDocument,
    pub network: FlowNetwork,
    pub policy: RoutingPolicy,
    /// Ordered like the topology's links.
    pub initial_flow: Option<Vec<f64>>,
    pub perturbation: Option<BuiltPerturbation>,
    pub simulation: SimulationConfig,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        ScenarioDocument::from_json(text)?.build()
    }

    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        ScenarioDocument::from_path(path)?.build()
    }

    pub fn inflow(&self) -> f64 {
        self.document.inflow
    }

    /// Network the simulation runs on: perturbed when a perturbation is given.
    pub fn effective_network(&self) -> FlowNetwork {
        match &self.perturbation {
            Some(p) => self.network.perturbed(&p.spec),
            None => self.network.clone(),
        }
    }

    /// `mu^{-1}(f0)` under the unperturbed flow functions, or zero.
    pub fn initial_densities(&self) -> Result<Vec<f64>, ScenarioError> {
        match &self.initial_flow {
            None => Ok(vec![0.0; self.network.link_count()]),
            Some(f0) => crate::resilience::initial_densities(&self.network, f0)
                .map_err(|e| ScenarioError::CrossReference(e.to_string())),
        }
    }
}

/// Collected findings of the validation command.
#[derive(Clone, Debug, Serialize)]
pub struct ScenarioValidation {
    pub schema_version: u32,
    pub valid: bool,
    pub topology: ValidationReport,
    pub cross_references: Vec<String>,
    pub flows: Vec<FlowCheck>,
    pub policies: Vec<PolicyCheck>,
    pub perturbation: Option<String>,
    pub simulation: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowCheck {
    pub link: LinkId,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolicyCheck {
    pub node: NodeId,
    pub ok: bool,
    pub strictly_positive: bool,
    pub property_a: bool,
    pub property_a_violations: usize,
    pub min_off_diagonal: f64,
    pub property_b: bool,
    /// Link-id subsets whose congestion does not drive the split onto the rest.
    pub property_b_failures: Vec<Vec<LinkId>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Runs every check that does not need a simulation and collects the
/// results instead of stopping at the first failure.
pub fn validate_document(doc: &ScenarioDocument, property_samples: usize) -> ScenarioValidation {
    use crate::routing::{check_property_a, check_property_b_all, LocalRouting};

    let empty = |reason: String| ScenarioValidation {
        schema_version: SCENARIO_SCHEMA_VERSION,
        valid: false,
        topology: ValidationReport::default(),
        cross_references: vec![reason],
        flows: vec![],
        policies: vec![],
        perturbation: None,
        simulation: None,
    };
    let topo = match doc.topology() {
        Ok(t) => t,
        Err(e) => return empty(e.to_string()),
    };
    let topology = topo.validate();
    let cross_references = doc.cross_reference_issues(&topo);
    let flows: Vec<FlowCheck> = topo
        .links()
        .iter()
        .filter_map(|l| doc.flows.get(&l.id).map(|s| (l.id, s)))
        .map(|(link, spec)| match spec.build() {
            Ok(_) => FlowCheck { link, ok: true, error: None },
            Err(e) => FlowCheck { link, ok: false, error: Some(e.to_string()) },
        })
        .collect();

    let mut policies = Vec::new();
    for v in topo.nodes() {
        let out = topo.outgoing_ids(v);
        let Some(spec) = doc.policy.get(&v.0) else { continue };
        if out.is_empty() || out.iter().any(|id| !spec.weights.contains_key(id)) {
            continue;
        }
        let weights: Vec<f64> = out.iter().map(|id| spec.weights[id]).collect();
        match spec.build(weights) {
            Err(e) => policies.push(PolicyCheck {
                node: v,
                ok: false,
                strictly_positive: false,
                property_a: false,
                property_a_violations: 0,
                min_off_diagonal: f64::NAN,
                property_b: false,
                property_b_failures: vec![],
                error: Some(e.to_string()),
            }),
            Ok(p) => {
                let a = check_property_a(&p, property_samples, doc.seed);
                let b_failures: Vec<Vec<LinkId>> = check_property_b_all(&p)
                    .into_iter()
                    .filter(|b| !b.passed)
                    .map(|b| b.subset.iter().map(|&i| out[i]).collect())
                    .collect();
                let positive = p.strictly_positive();
                policies.push(PolicyCheck {
                    node: v,
                    ok: a.passed && b_failures.is_empty() && positive,
                    strictly_positive: positive,
                    property_a: a.passed,
                    property_a_violations: a.violation_count,
                    min_off_diagonal: a.min_off_diagonal,
                    property_b: b_failures.is_empty(),
                    property_b_failures: b_failures,
                    error: None,
                })
            }
        }
    }

    let (perturbation, simulation) = if topology.is_valid() && cross_references.is_empty() && flows.iter().all(|f| f.ok)
    {
        let sim = doc.simulation_config().validate().err().map(|e| e.to_string());
        let pert = match (&doc.perturbation, doc.topology().and_then(|t| {
            let f = doc.flow_functions(&t).map_err(|_| TopologyError::Empty)?;
            FlowNetwork::new(t, f)
        })) {
            (Some(section), Ok(net)) => doc.build_perturbation(section, &net).err().map(|e| e.to_string()),
            _ => None,
        };
        (pert, sim)
    } else {
        (None, None)
    };

    let valid = topology.is_valid()
        && cross_references.is_empty()
        && flows.iter().all(|f| f.ok)
        && policies.iter().all(|p| p.ok)
        && perturbation.is_none()
        && simulation.is_none();
    ScenarioValidation { schema_version: SCENARIO_SCHEMA_VERSION, valid, topology, cross_references, flows, policies, perturbation, simulation }
}
