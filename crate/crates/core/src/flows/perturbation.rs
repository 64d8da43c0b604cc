//! Admissible perturbations: per-link replacement of flow functions by
//! pointwise-smaller ones, with their magnitude and stretching coefficient.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{geometric_grid, FlowError, FlowFunction};

/// Points on the certification grid for `perturbed <= original`.
pub const CERTIFICATION_POINTS: usize = 10_000;
const SUP_GRID_POINTS: usize = 2_048;
const SUP_STABILITY: f64 = 1e-6;

/// Per-link certified data.
#[derive(Clone, Debug, Serialize)]
pub struct LinkPerturbation {
    pub link_index: usize,
    /// `sup_rho (mu(rho) - mu_tilde(rho))`.
    pub gap: f64,
    /// Whether `gap` came from the closed form of a scaling.
    pub analytic: bool,
    pub perturbed_f_max: f64,
    /// Perturbed over original median density.
    pub median_ratio: f64,
}

/// A certified admissible perturbation of a full flow-function vector.
#[derive(Clone, Debug)]
pub struct PerturbationSpec {
    perturbed: Vec<FlowFunction>,
    links: Vec<LinkPerturbation>,
    magnitude: f64,
    stretching: f64,
}

impl PerturbationSpec {
    /// Certifies `replacements` (keyed by link index) against `original`.
    /// Links without a replacement keep their original function.
    pub fn certify(
        original: &[FlowFunction],
        replacements: BTreeMap<usize, FlowFunction>,
    ) -> Result<Self, FlowError> {
        let mut perturbed = original.to_vec();
        let mut links = Vec::with_capacity(replacements.len());
        for (k, replacement) in replacements {
            let base = original.get(k).ok_or(FlowError::UnknownLinkIndex(k))?;
            links.push(certify_link(k, base, &replacement)?);
            perturbed[k] = replacement;
        }
        let magnitude = links.iter().map(|l| l.gap).sum();
        let stretching = links.iter().map(|l| l.median_ratio).fold(1.0, f64::max);
        Ok(Self { perturbed, links, magnitude, stretching })
    }

    /// Scales the listed links by their factors (keyed by link index).
    pub fn scaling(original: &[FlowFunction], factors: &BTreeMap<usize, f64>) -> Result<Self, FlowError> {
        let mut replacements = BTreeMap::new();
        for (&k, &eps) in factors {
            let base = original.get(k).ok_or(FlowError::UnknownLinkIndex(k))?;
            replacements.insert(k, super::scale_perturbation(base, eps)?);
        }
        Self::certify(original, replacements)
    }

    /// The identity perturbation.
    pub fn identity(original: &[FlowFunction]) -> Self {
        Self { perturbed: original.to_vec(), links: Vec::new(), magnitude: 0.0, stretching: 1.0 }
    }

    /// Full perturbed flow-function vector, aligned with the original.
    pub fn perturbed(&self) -> &[FlowFunction] {
        &self.perturbed
    }

    pub fn links(&self) -> &[LinkPerturbation] {
        &self.links
    }

    /// Summed per-link gaps.
    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    /// Largest perturbed/original median-density ratio (unperturbed links count as 1).
    pub fn stretching(&self) -> f64 {
        self.stretching
    }
}

/// Magnitude `delta` of a certified perturbation.
pub fn perturbation_magnitude(spec: &PerturbationSpec) -> f64 {
    spec.magnitude()
}

/// Stretching coefficient `theta` of a certified perturbation.
pub fn stretching_coefficient(spec: &PerturbationSpec) -> f64 {
    spec.stretching()
}

fn certify_link(k: usize, original: &FlowFunction, perturbed: &FlowFunction) -> Result<LinkPerturbation, FlowError> {
    let inadmissible = |reason: String| FlowError::Inadmissible { link_index: k, reason };

    if let FlowFunction::Scaled { eps, .. } = perturbed {
        if *eps == 0.0 {
            return Err(inadmissible("zero scaling is a limiting case, not a flow function".into()));
        }
    }
    if perturbed.value(0.0) != 0.0 {
        return Err(inadmissible("perturbed flow is nonzero at zero density".into()));
    }
    let median = original.median_density().0;
    let perturbed_median = perturbed.median_density().0;
    if !(median > 0.0) {
        return Err(inadmissible("original median density is zero".into()));
    }

    let hi = 50.0 * median.max(perturbed_median);
    let tol = 1e-12 * original.f_max();
    let mut prev = 0.0;
    for rho in geometric_grid(1e-4, hi, CERTIFICATION_POINTS) {
        let (m, mt) = (original.value(rho), perturbed.value(rho));
        if mt > m + tol {
            return Err(inadmissible(format!("perturbed flow {mt} exceeds original {m} at density {rho}")));
        }
        if mt < prev {
            return Err(inadmissible(format!("perturbed flow decreases near density {rho}")));
        }
        prev = mt;
    }

    let scaled_original = match perturbed {
        FlowFunction::Scaled { base, eps } if base.same_as(original) => Some(*eps),
        _ => None,
    };
    let (gap, analytic) = match scaled_original {
        Some(eps) => ((1.0 - eps) * original.f_max(), true),
        None => (numeric_sup_gap(original, perturbed, hi), false),
    };
    Ok(LinkPerturbation {
        link_index: k,
        gap,
        analytic,
        perturbed_f_max: perturbed.f_max(),
        median_ratio: perturbed_median / median,
    })
}

/// `sup_{rho >= 0} (mu(rho) - mu_tilde(rho))` over a geometric grid on
/// `[1e-4, hi]`, refined locally by golden-section search, with `hi` doubled
/// until the estimate moves by less than 1e-6. The tail limit
/// `f_max - f_max_tilde` is included since monotone saturation makes it the
/// value at infinity.
pub(crate) fn numeric_sup_gap(original: &FlowFunction, perturbed: &FlowFunction, initial_hi: f64) -> f64 {
    let gap = |rho: f64| original.value(rho) - perturbed.value(rho);
    let tail = (original.f_max() - perturbed.f_max()).max(0.0);
    let mut hi = initial_hi;
    let mut last = f64::NEG_INFINITY;
    for _ in 0..64 {
        let grid = geometric_grid(1e-4, hi, SUP_GRID_POINTS);
        let (best_i, best) = grid
            .iter()
            .enumerate()
            .map(|(i, &r)| (i, gap(r)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let lo_r = if best_i == 0 { 0.0 } else { grid[best_i - 1] };
        let hi_r = grid[(best_i + 1).min(grid.len() - 1)];
        let refined = golden_max(&gap, lo_r, hi_r).max(best).max(gap(0.0));
        let estimate = refined.max(tail).max(0.0);
        if (estimate - last).abs() < SUP_STABILITY {
            return estimate;
        }
        last = estimate;
        hi *= 2.0;
    }
    last
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    for _ in 0..100 {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - ratio * (b - a);
        d = a + ratio * (b - a);
        if (b - a).abs() < 1e-15 * b.abs().max(1.0) {
            break;
        }
    }
    f(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn exp(a: f64, f_max: f64) -> FlowFunction {
        FlowFunction::exponential(a, f_max).unwrap()
    }

    #[test]
    fn identity_scaling_has_zero_magnitude() {
        let flows = vec![exp(1.0, 0.75), exp(1.0, 0.75)];
        let spec = PerturbationSpec::scaling(&flows, &BTreeMap::from([(0, 1.0), (1, 1.0)])).unwrap();
        assert_eq!(perturbation_magnitude(&spec), 0.0);
        assert_eq!(stretching_coefficient(&spec), 1.0);
        assert_eq!(PerturbationSpec::identity(&flows).magnitude(), 0.0);
    }

    #[test]
    fn two_cut_links_scaled() {
        let flows = vec![exp(1.0, 0.75), exp(1.0, 0.75)];
        let eps = 1.0 / 6.0;
        let spec = PerturbationSpec::scaling(&flows, &BTreeMap::from([(0, eps), (1, eps)])).unwrap();
        // (1 - eps) * C with C = 3/2
        assert_abs_diff_eq!(spec.magnitude(), 1.25, epsilon = 1e-15);
        assert_eq!(spec.stretching(), 1.0);
        assert!(spec.links().iter().all(|l| l.analytic));
    }

    #[test]
    fn numeric_gap_matches_closed_form() {
        // mu = 1 - e^{-2 r}, mu~ = 1 - e^{-r}. Gap e^{-r} - e^{-2r} peaks at
        // r* = ln 2 with value 1/4.
        let flows = vec![exp(2.0, 1.0)];
        let spec = PerturbationSpec::certify(&flows, BTreeMap::from([(0, exp(1.0, 1.0))])).unwrap();
        let link = &spec.links()[0];
        assert!(!link.analytic);
        assert_abs_diff_eq!(link.gap, 0.25, epsilon = 1e-6);
        // the same slower link doubles the median
        assert_abs_diff_eq!(spec.stretching(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn numeric_gap_includes_tail() {
        // Scaled by 0.4 but built from a distinct (equal-valued) base so the
        // closed form is not used: the sup sits at infinity.
        let flows = [exp(1.0, 1.0)];
        let replacement = FlowFunction::Scaled { base: Box::new(exp(1.0, 1.0)), eps: 0.4 };
        let gap = numeric_sup_gap(&flows[0], &replacement, 50.0 * std::f64::consts::LN_2);
        assert_abs_diff_eq!(gap, 0.6, epsilon = 1e-6);
    }

    #[test]
    fn inadmissible_perturbations_rejected() {
        let flows = vec![exp(1.0, 1.0)];
        assert!(matches!(
            PerturbationSpec::certify(&flows, BTreeMap::from([(0, exp(2.0, 1.0))])),
            Err(FlowError::Inadmissible { link_index: 0, .. })
        ));
        assert!(matches!(
            PerturbationSpec::scaling(&flows, &BTreeMap::from([(0, 0.0)])),
            Err(FlowError::Inadmissible { .. })
        ));
        assert!(matches!(
            PerturbationSpec::scaling(&flows, &BTreeMap::from([(3, 0.5)])),
            Err(FlowError::UnknownLinkIndex(3))
        ));
    }
}
