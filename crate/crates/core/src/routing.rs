//! Distributed routing policies: per-node maps from the densities on the
//! node's outgoing links to a split of its inflow over those links.
//!
//! The Jacobian convention throughout is `jac[e][j] = dG_j / d rho_e`, so
//! each row sums to zero because the outputs lie on the simplex.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{NetworkTopology, NodeId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error("node {0} has no outgoing links to route over")]
    NoOutgoingLinks(NodeId),
    #[error("node {0} has no routing policy")]
    MissingPolicy(NodeId),
    #[error("node {node}: policy expects {expected} links, got {got}")]
    Arity { node: NodeId, expected: usize, got: usize },
    #[error("invalid policy parameter: {0}")]
    BadParameter(String),
}

/// Probability vector over a node's outgoing links.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for SimplexVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Routing rule of a single node. Implementations must be pure.
pub trait LocalRouting: Send + Sync + fmt::Debug {
    /// Number of outgoing links the rule splits over.
    fn arity(&self) -> usize;

    /// Writes the split for local densities `rho` into `out`.
    fn route_into(&self, rho: &[f64], out: &mut [f64]);

    fn route(&self, rho: &[f64]) -> SimplexVector {
        let mut out = vec![0.0; self.arity()];
        self.route_into(rho, &mut out);
        SimplexVector(out)
    }

    /// `jac[e][j] = dG_j / d rho_e`. Defaults to finite differences.
    fn jacobian(&self, rho: &[f64]) -> Vec<Vec<f64>> {
        finite_difference_jacobian(self, rho)
    }

    /// True when every component is positive at every density.
    fn strictly_positive(&self) -> bool {
        false
    }
}

/// Central differences with relative step 1e-6; second-order one-sided
/// differences where the central stencil would leave the nonnegative orthant.
pub fn finite_difference_jacobian<R: LocalRouting + ?Sized>(policy: &R, rho: &[f64]) -> Vec<Vec<f64>> {
    let k = policy.arity();
    let mut x = rho.to_vec();
    let mut jac = vec![vec![0.0; k]; k];
    let (mut g1, mut g2, mut g0) = (vec![0.0; k], vec![0.0; k], vec![0.0; k]);
    for e in 0..k {
        let h = 1e-6 * rho[e].abs().max(1.0);
        if rho[e] >= h {
            x[e] = rho[e] + h;
            policy.route_into(&x, &mut g1);
            x[e] = rho[e] - h;
            policy.route_into(&x, &mut g2);
            for j in 0..k {
                jac[e][j] = (g1[j] - g2[j]) / (2.0 * h);
            }
        } else {
            x[e] = rho[e];
            policy.route_into(&x, &mut g0);
            x[e] = rho[e] + h;
            policy.route_into(&x, &mut g1);
            x[e] = rho[e] + 2.0 * h;
            policy.route_into(&x, &mut g2);
            for j in 0..k {
                jac[e][j] = (-3.0 * g0[j] + 4.0 * g1[j] - g2[j]) / (2.0 * h);
            }
        }
        x[e] = rho[e];
    }
    jac
}

/// `G_e = a_e exp(-eta rho_e) / sum_j a_j exp(-eta rho_j)`.
///
/// With `congestion_seeking` the sign of the exponent flips, producing a
/// policy that sends more flow to denser links (not locally responsive).
#[derive(Clone, Debug, PartialEq)]
pub struct LogitPolicy {
    eta: f64,
    weights: Vec<f64>,
    congestion_seeking: bool,
}

impl LogitPolicy {
    pub fn new(eta: f64, weights: Vec<f64>) -> Result<Self, RoutingError> {
        Self::build(eta, weights, false)
    }

    pub fn congestion_seeking(eta: f64, weights: Vec<f64>) -> Result<Self, RoutingError> {
        Self::build(eta, weights, true)
    }

    fn build(eta: f64, weights: Vec<f64>, congestion_seeking: bool) -> Result<Self, RoutingError> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(RoutingError::BadParameter(format!("eta must be finite and positive, got {eta}")));
        }
        if weights.is_empty() {
            return Err(RoutingError::BadParameter("logit policy needs at least one weight".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(RoutingError::BadParameter(format!("logit weights must be positive, got {w}")));
        }
        Ok(Self { eta, weights, congestion_seeking })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_congestion_seeking(&self) -> bool {
        self.congestion_seeking
    }

    fn slope(&self) -> f64 {
        if self.congestion_seeking {
            self.eta
        } else {
            -self.eta
        }
    }
}

impl LocalRouting for LogitPolicy {
    fn arity(&self) -> usize {
        self.weights.len()
    }

    fn route_into(&self, rho: &[f64], out: &mut [f64]) {
        let s = self.slope();
        // shift the exponent so the largest term is exp(0)
        let shift = rho.iter().map(|&r| s * r).fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for ((o, &a), &r) in out.iter_mut().zip(&self.weights).zip(rho) {
            *o = a * (s * r - shift).exp();
            total += *o;
        }
        for o in out.iter_mut() {
            *o /= total;
        }
    }

    fn jacobian(&self, rho: &[f64]) -> Vec<Vec<f64>> {
        let g = self.route(rho);
        let s = self.slope();
        let k = self.arity();
        let mut jac = vec![vec![0.0; k]; k];
        for e in 0..k {
            for j in 0..k {
                jac[e][j] = if j == e { s * g[e] * (1.0 - g[e]) } else { -s * g[e] * g[j] };
            }
        }
        jac
    }

    fn strictly_positive(&self) -> bool {
        true
    }
}

/// Density-independent split.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantPolicy {
    split: Vec<f64>,
}

impl ConstantPolicy {
    /// Normalizes nonnegative weights to a probability vector.
    pub fn new(weights: Vec<f64>) -> Result<Self, RoutingError> {
        let total: f64 = weights.iter().sum();
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || !(total > 0.0) {
            return Err(RoutingError::BadParameter("constant split needs nonnegative weights with positive sum".into()));
        }
        Ok(Self { split: weights.iter().map(|w| w / total).collect() })
    }
}

impl LocalRouting for ConstantPolicy {
    fn arity(&self) -> usize {
        self.split.len()
    }

    fn route_into(&self, _rho: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.split);
    }

    fn jacobian(&self, _rho: &[f64]) -> Vec<Vec<f64>> {
        vec![vec![0.0; self.split.len()]; self.split.len()]
    }

    fn strictly_positive(&self) -> bool {
        self.split.iter().all(|&p| p > 0.0)
    }
}

#[derive(Clone, Debug)]
pub enum NodePolicy {
    Logit(LogitPolicy),
    Constant(ConstantPolicy),
    Custom(Arc<dyn LocalRouting>),
}

impl LocalRouting for NodePolicy {
    fn arity(&self) -> usize {
        match self {
            NodePolicy::Logit(p) => p.arity(),
            NodePolicy::Constant(p) => p.arity(),
            NodePolicy::Custom(p) => p.arity(),
        }
    }

    #[inline]
    fn route_into(&self, rho: &[f64], out: &mut [f64]) {
        match self {
            NodePolicy::Logit(p) => p.route_into(rho, out),
            NodePolicy::Constant(p) => p.route_into(rho, out),
            NodePolicy::Custom(p) => p.route_into(rho, out),
        }
    }

    fn jacobian(&self, rho: &[f64]) -> Vec<Vec<f64>> {
        match self {
            NodePolicy::Logit(p) => p.jacobian(rho),
            NodePolicy::Constant(p) => p.jacobian(rho),
            NodePolicy::Custom(p) => p.jacobian(rho),
        }
    }

    fn strictly_positive(&self) -> bool {
        match self {
            NodePolicy::Logit(p) => p.strictly_positive(),
            NodePolicy::Constant(p) => p.strictly_positive(),
            NodePolicy::Custom(p) => p.strictly_positive(),
        }
    }
}

/// One local rule per non-destination node, indexed by node label.
#[derive(Clone, Debug)]
pub struct RoutingPolicy {
    nodes: Vec<Option<NodePolicy>>,
}

impl RoutingPolicy {
    /// Checks that every node with outgoing links has a rule of matching
    /// arity and that nodes without outgoing links have none.
    pub fn new(topo: &NetworkTopology, nodes: Vec<Option<NodePolicy>>) -> Result<Self, RoutingError> {
        if nodes.len() != topo.node_count() {
            return Err(RoutingError::BadParameter(format!(
                "expected {} node entries, got {}",
                topo.node_count(),
                nodes.len()
            )));
        }
        for v in topo.nodes() {
            let out = topo.outgoing(v).len();
            match (&nodes[v.0], out) {
                (None, 0) => {}
                (Some(_), 0) => return Err(RoutingError::NoOutgoingLinks(v)),
                (None, _) => return Err(RoutingError::MissingPolicy(v)),
                (Some(p), k) if p.arity() != k => {
                    return Err(RoutingError::Arity { node: v, expected: p.arity(), got: k })
                }
                _ => {}
            }
        }
        Ok(Self { nodes })
    }

    /// Logit rule at every non-destination node with a common `eta`,
    /// `weights[k]` belonging to link index `k`.
    pub fn logit(topo: &NetworkTopology, eta: f64, weights: &[f64]) -> Result<Self, RoutingError> {
        let nodes = topo
            .nodes()
            .map(|v| {
                let out = topo.outgoing(v);
                if out.is_empty() {
                    Ok(None)
                } else {
                    LogitPolicy::new(eta, out.iter().map(|&k| weights[k]).collect()).map(|p| Some(NodePolicy::Logit(p)))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(topo, nodes)
    }

    pub fn node(&self, v: NodeId) -> Option<&NodePolicy> {
        self.nodes.get(v.0).and_then(Option::as_ref)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &NodePolicy)> {
        self.nodes.iter().enumerate().filter_map(|(v, p)| p.as_ref().map(|p| (NodeId(v), p)))
    }

    /// Split at node `v` from its local densities (ordered as `topo.outgoing(v)`).
    pub fn route(&self, v: NodeId, rho_local: &[f64]) -> Result<SimplexVector, RoutingError> {
        let p = self.nodes.get(v.0).and_then(Option::as_ref).ok_or(RoutingError::NoOutgoingLinks(v))?;
        if rho_local.len() != p.arity() {
            return Err(RoutingError::Arity { node: v, expected: p.arity(), got: rho_local.len() });
        }
        Ok(p.route(rho_local))
    }

    /// Split at node `v` from the full density vector; only the coordinates
    /// of `v`'s outgoing links are read.
    pub fn route_global(&self, topo: &NetworkTopology, v: NodeId, rho: &[f64]) -> Result<SimplexVector, RoutingError> {
        let local: Vec<f64> = topo.outgoing(v).iter().map(|&k| rho[k]).collect();
        if local.is_empty() {
            return Err(RoutingError::NoOutgoingLinks(v));
        }
        self.route(v, &local)
    }

    pub fn jacobian(&self, v: NodeId, rho_local: &[f64]) -> Result<Vec<Vec<f64>>, RoutingError> {
        let p = self.nodes.get(v.0).and_then(Option::as_ref).ok_or(RoutingError::NoOutgoingLinks(v))?;
        Ok(p.jacobian(rho_local))
    }

    pub fn strictly_positive(&self) -> bool {
        self.nodes.iter().flatten().all(|p| p.strictly_positive())
    }
}

/// Off-diagonal entries more negative than this count as violations.
pub const PROPERTY_A_TOLERANCE: f64 = 1e-9;
const MAX_REPORTED: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct JacobianViolation {
    pub point: Vec<f64>,
    /// Perturbed coordinate.
    pub e: usize,
    /// Affected output.
    pub j: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyAReport {
    pub passed: bool,
    pub samples: usize,
    pub violation_count: usize,
    pub min_off_diagonal: f64,
    pub violations: Vec<JacobianViolation>,
}

/// Density vector with independent log-uniform coordinates in
/// `[10^lo_exp, 10^hi_exp]`, with occasional exact zeros.
pub(crate) fn sample_densities(rng: &mut impl Rng, k: usize, lo_exp: f64, hi_exp: f64) -> Vec<f64> {
    (0..k)
        .map(|_| if rng.gen_bool(0.1) { 0.0 } else { 10f64.powf(rng.gen_range(lo_exp..hi_exp)) })
        .collect()
}

/// Samples densities over 1e-2..1e2 and checks that every off-diagonal
/// Jacobian entry is nonnegative (within [`PROPERTY_A_TOLERANCE`]).
pub fn check_property_a(policy: &dyn LocalRouting, samples: usize, seed: u64) -> PropertyAReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = policy.arity();
    let mut violations = Vec::new();
    let mut violation_count = 0;
    let mut min_off = f64::INFINITY;
    for _ in 0..samples {
        let rho = sample_densities(&mut rng, k, -2.0, 2.0);
        let jac = policy.jacobian(&rho);
        for (e, row) in jac.iter().enumerate() {
            for (j, &value) in row.iter().enumerate().filter(|&(j, _)| j != e) {
                min_off = min_off.min(value);
                if value < -PROPERTY_A_TOLERANCE {
                    violation_count += 1;
                    if violations.len() < MAX_REPORTED {
                        violations.push(JacobianViolation { point: rho.clone(), e, j, value });
                    }
                }
            }
        }
    }
    PropertyAReport {
        passed: violation_count == 0,
        samples,
        violation_count,
        min_off_diagonal: if min_off.is_finite() { min_off } else { 0.0 },
        violations,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyBReport {
    pub passed: bool,
    pub subset: Vec<usize>,
    /// Mass on links outside the subset at the largest escalation, per base point.
    pub escaped_mass: Vec<f64>,
    /// Largest change of the restricted split between the last two escalations.
    pub cauchy_gap: f64,
    /// Restricted split at the largest escalation for the first base point.
    pub limit: Vec<f64>,
}

pub const PROPERTY_B_MASS_TOLERANCE: f64 = 1e-4;
pub const PROPERTY_B_CAUCHY_TOLERANCE: f64 = 1e-5;

/// Drives densities outside `subset` to `10^k` for `k = 2..=6` with the
/// subset's densities held at a few fixed base points, and checks that the
/// escaping mass vanishes and the split over the subset settles.
pub fn check_property_b(policy: &dyn LocalRouting, subset: &[usize]) -> Result<PropertyBReport, RoutingError> {
    let k = policy.arity();
    let mut inside = vec![false; k];
    for &j in subset {
        if j >= k || inside[j] {
            return Err(RoutingError::BadParameter(format!("invalid subset {subset:?} for {k} links")));
        }
        inside[j] = true;
    }
    if subset.is_empty() || subset.len() == k {
        return Err(RoutingError::BadParameter("subset must be nonempty and proper".into()));
    }
    let bases: Vec<Vec<f64>> = vec![vec![0.0; k], vec![1.0; k], (0..k).map(|i| 0.1 + 0.7 * i as f64).collect()];
    let mut escaped_mass = Vec::new();
    let mut cauchy_gap: f64 = 0.0;
    let mut limit = Vec::new();
    let mut out = vec![0.0; k];
    for (b, base) in bases.iter().enumerate() {
        let mut previous: Option<Vec<f64>> = None;
        let mut last_escape = 0.0;
        for exp in 2..=6 {
            let big = 10f64.powi(exp);
            let rho: Vec<f64> = (0..k).map(|i| if inside[i] { base[i] } else { big }).collect();
            policy.route_into(&rho, &mut out);
            last_escape = (0..k).filter(|&i| !inside[i]).map(|i| out[i]).sum();
            let restricted: Vec<f64> = subset.iter().map(|&j| out[j]).collect();
            if let Some(prev) = &previous {
                if exp == 6 {
                    let gap = prev.iter().zip(&restricted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    cauchy_gap = cauchy_gap.max(gap);
                }
            }
            previous = Some(restricted);
        }
        escaped_mass.push(last_escape);
        if b == 0 {
            limit = previous.unwrap_or_default();
        }
    }
    let passed = escaped_mass.iter().all(|&m| m < PROPERTY_B_MASS_TOLERANCE) && cauchy_gap < PROPERTY_B_CAUCHY_TOLERANCE;
    Ok(PropertyBReport { passed, subset: subset.to_vec(), escaped_mass, cauchy_gap, limit })
}

/// Runs [`check_property_b`] over every nonempty proper subset (arity ≤ 12).
pub fn check_property_b_all(policy: &dyn LocalRouting) -> Vec<PropertyBReport> {
    let k = policy.arity().min(12);
    (1u32..(1u32 << k).saturating_sub(1))
        .filter_map(|mask| {
            let subset: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
            check_property_b(policy, &subset).ok()
        })
        .collect()
}

/// `sum_e sgn(sigma_e - varsigma_e) (G_e(sigma) - G_e(varsigma))` with
/// `sgn(0) = 0`. Nonpositive for policies with nonnegative cross-partials.
pub fn cooperative_gap(policy: &dyn LocalRouting, sigma: &[f64], varsigma: &[f64]) -> f64 {
    let gs = policy.route(sigma);
    let gv = policy.route(varsigma);
    sigma
        .iter()
        .zip(varsigma)
        .enumerate()
        .map(|(e, (s, v))| {
            let sign = if s > v {
                1.0
            } else if s < v {
                -1.0
            } else {
                0.0
            };
            sign * (gs[e] - gv[e])
        })
        .sum()
}

/// Largest cooperative gap over `pairs` random density pairs.
pub fn max_cooperative_gap(policy: &dyn LocalRouting, pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = policy.arity();
    (0..pairs)
        .map(|_| {
            let s = sample_densities(&mut rng, k, -2.0, 1.0);
            let v = sample_densities(&mut rng, k, -2.0, 1.0);
            cooperative_gap(policy, &s, &v)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Serialized per-node policy, `{"eta": .., "weights": {link_id: a_e}}`.
/// `kind` defaults to `"logit"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    #[serde(default = "PolicySpec::default_kind", skip_serializing_if = "PolicySpec::is_default_kind")]
    pub kind: PolicyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub weights: std::collections::BTreeMap<crate::topology::LinkId, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Logit,
    CongestionSeeking,
    Constant,
}

impl PolicySpec {
    fn default_kind() -> PolicyKind {
        PolicyKind::Logit
    }

    fn is_default_kind(kind: &PolicyKind) -> bool {
        *kind == PolicyKind::Logit
    }

    /// Builds the rule given weights already ordered like the node's outgoing links.
    pub fn build(&self, ordered_weights: Vec<f64>) -> Result<NodePolicy, RoutingError> {
        let eta = || self.eta.ok_or_else(|| RoutingError::BadParameter("logit policy requires eta".into()));
        Ok(match self.kind {
            PolicyKind::Logit => NodePolicy::Logit(LogitPolicy::new(eta()?, ordered_weights)?),
            PolicyKind::CongestionSeeking => NodePolicy::Logit(LogitPolicy::congestion_seeking(eta()?, ordered_weights)?),
            PolicyKind::Constant => NodePolicy::Constant(ConstantPolicy::new(ordered_weights)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn example_policy() -> LogitPolicy {
        LogitPolicy::new(1.0, vec![0.6, 6.0]).unwrap()
    }

    #[test]
    fn symmetric_logit_is_uniform() {
        let p = LogitPolicy::new(2.0, vec![1.5; 4]).unwrap();
        for &x in &p.route(&[0.7; 4]).0 {
            assert_abs_diff_eq!(x, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn example_policy_at_zero() {
        let g = example_policy().route(&[0.0, 0.0]);
        assert_abs_diff_eq!(g[0], 1.0 / 11.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g[1], 10.0 / 11.0, epsilon = 1e-15);
    }

    #[test]
    fn congested_link_loses_mass() {
        let p = example_policy();
        let mut last = 1.0;
        for r in [1.0, 10.0, 100.0, 1e4] {
            let g = p.route(&[r, 0.5]);
            assert!(g[0] < last);
            last = g[0];
        }
        assert!(last < 1e-100);
    }

    #[test]
    fn huge_densities_do_not_underflow() {
        let g = example_policy().route(&[1e6, 1e6 + 1.0]);
        assert!(g.0.iter().all(|x| x.is_finite()));
        assert_abs_diff_eq!(g[0] + g[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn jacobian_structure() {
        let p = example_policy();
        let jac = p.jacobian(&[0.3, 1.2]);
        assert!(jac[0][1] >= 0.0 && jac[1][0] >= 0.0);
        for row in &jac {
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 0.0, epsilon = 1e-9);
        }
        let sym = LogitPolicy::new(1.3, vec![2.0, 2.0]).unwrap().jacobian(&[0.4, 0.4]);
        assert_abs_diff_eq!(sym[0][1], sym[1][0], epsilon = 1e-15);
    }

    #[test]
    fn property_a_verdicts() {
        assert!(check_property_a(&LogitPolicy::new(0.8, vec![1.0, 2.0, 0.5]).unwrap(), 1000, 1).passed);
        let bad = check_property_a(&LogitPolicy::congestion_seeking(1.0, vec![1.0, 1.0]).unwrap(), 100, 1);
        assert!(!bad.passed);
        assert!(bad.min_off_diagonal < 0.0);
        assert!(check_property_a(&ConstantPolicy::new(vec![1.0, 3.0]).unwrap(), 100, 1).passed);
    }

    #[test]
    fn property_b_verdicts() {
        assert!(check_property_b(&example_policy(), &[0]).unwrap().passed);
        assert!(!check_property_b(&ConstantPolicy::new(vec![1.0, 1.0]).unwrap(), &[0]).unwrap().passed);

        // Restricting a 3-link logit to J = {0, 1} leaves the 2-link logit on J.
        let p = LogitPolicy::new(1.0, vec![1.0, 2.0, 3.0]).unwrap();
        let report = check_property_b(&p, &[0, 1]).unwrap();
        assert!(report.passed);
        let restricted = LogitPolicy::new(1.0, vec![1.0, 2.0]).unwrap().route(&[0.0, 0.0]);
        assert_abs_diff_eq!(report.limit[0], restricted[0], epsilon = 1e-12);
        assert_abs_diff_eq!(report.limit[1], restricted[1], epsilon = 1e-12);

        assert!(check_property_b(&p, &[]).is_err());
        assert!(check_property_b(&p, &[0, 1, 2]).is_err());
        assert_eq!(check_property_b_all(&p).len(), 6);
    }

    #[test]
    fn cooperative_gap_examples() {
        let p = example_policy();
        assert_eq!(cooperative_gap(&p, &[0.2, 0.9], &[0.2, 0.9]), 0.0);
        assert!(max_cooperative_gap(&p, 1000, 3) <= 1e-12);
        let anti = LogitPolicy::congestion_seeking(1.0, vec![1.0, 1.0, 1.0]).unwrap();
        assert!(max_cooperative_gap(&anti, 1000, 3) > 0.0);
    }

    #[test]
    fn distributed_over_full_vector() {
        let topo = NetworkTopology::from_pairs(3, &[(0, 1), (0, 1), (1, 2), (0, 2)]).unwrap();
        let policy = RoutingPolicy::logit(&topo, 1.0, &[1.0, 2.0, 1.0, 0.5]).unwrap();
        let mut rho = vec![0.3, 0.1, 0.0, 2.0];
        let before = policy.route_global(&topo, NodeId(0), &rho).unwrap();
        rho[2] = 50.0; // link 2 leaves node 1, not node 0
        assert_eq!(policy.route_global(&topo, NodeId(0), &rho).unwrap(), before);
        assert_eq!(policy.route(NodeId(2), &[]), Err(RoutingError::NoOutgoingLinks(NodeId(2))));
    }

    proptest! {
        #[test]
        fn logit_outputs_on_simplex(
            eta in 0.01f64..10.0,
            weights in prop::collection::vec(0.01f64..100.0, 1..6),
            seed in any::<u64>(),
        ) {
            let p = LogitPolicy::new(eta, weights.clone()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = sample_densities(&mut rng, weights.len(), -3.0, 3.0);
            let g = p.route(&rho);
            prop_assert!((g.0.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(g.0.iter().all(|&x| x >= 0.0));
            // strictly positive while exponents stay in range
            if rho.iter().all(|&r| eta * r < 500.0) {
                prop_assert!(g.0.iter().all(|&x| x > 0.0));
            }
        }
    }
}
