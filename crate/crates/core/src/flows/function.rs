use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::FlowError;

type EvalFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Density at which a link carries half its capacity.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MedianDensity(pub f64);

/// Black-box flow function. Only obtainable through [`CustomFlow::certify`],
/// which checks the flow-function properties on a sampling grid.
#[derive(Clone)]
pub struct CustomFlow {
    name: String,
    f_max: f64,
    eval: Arc<EvalFn>,
    /// Largest observed slope on the certification grid.
    max_slope: f64,
}

impl fmt::Debug for CustomFlow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFlow").field("name", &self.name).field("f_max", &self.f_max).finish()
    }
}

impl CustomFlow {
    /// Samples `eval` on a geometric grid and rejects it unless it is zero at
    /// zero, strictly increasing, stays below `f_max`, reaches 99.9% of
    /// `f_max` somewhere below 1e9, and has a bounded difference quotient.
    pub fn certify(
        name: impl Into<String>,
        f_max: f64,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, FlowError> {
        let name = name.into();
        if !(f_max.is_finite() && f_max > 0.0) {
            return Err(FlowError::BadParameter(format!("{name}: f_max must be finite and positive")));
        }
        let fail = |why: String| Err(FlowError::Certification { name: name.clone(), reason: why });
        let at_zero = eval(0.0);
        if at_zero != 0.0 {
            return fail(format!("value at zero is {at_zero}"));
        }
        let grid = super::geometric_grid(1e-6, 1e9, 4000);
        let mut prev_rho = 0.0;
        let mut prev = 0.0;
        let mut max_slope: f64 = 0.0;
        let mut saturated = false;
        for &rho in &grid {
            let y = eval(rho);
            if !y.is_finite() {
                return fail(format!("non-finite value at density {rho}"));
            }
            if y >= f_max {
                return fail(format!("value {y} at density {rho} reaches f_max"));
            }
            // Strict increase is only checkable above rounding resolution.
            if y < prev || (y == prev && f_max - y > 1e-9 * f_max) {
                return fail(format!("not strictly increasing near density {rho}"));
            }
            max_slope = max_slope.max((y - prev) / (rho - prev_rho));
            saturated |= y >= 0.999 * f_max;
            prev_rho = rho;
            prev = y;
        }
        if !saturated {
            return fail("does not approach f_max".into());
        }
        if !max_slope.is_finite() {
            return fail("unbounded derivative".into());
        }
        Ok(Self { name, f_max, eval: Arc::new(eval), max_slope })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// Strictly increasing, saturating map from link density to link flow.
#[derive(Clone, Debug)]
pub enum FlowFunction {
    /// `f_max * (1 - exp(-a * rho))`.
    Exponential { a: f64, f_max: f64 },
    /// `eps * base(rho)`.
    Scaled { base: Box<FlowFunction>, eps: f64 },
    Custom(CustomFlow),
}

impl FlowFunction {
    pub fn exponential(a: f64, f_max: f64) -> Result<Self, FlowError> {
        if !(a.is_finite() && a > 0.0) {
            return Err(FlowError::BadParameter(format!("rate a must be finite and positive, got {a}")));
        }
        if !(f_max.is_finite() && f_max > 0.0) {
            return Err(FlowError::BadParameter(format!("f_max must be finite and positive, got {f_max}")));
        }
        Ok(FlowFunction::Exponential { a, f_max })
    }

    /// Flow capacity (supremum of the function).
    pub fn f_max(&self) -> f64 {
        match self {
            FlowFunction::Exponential { f_max, .. } => *f_max,
            FlowFunction::Scaled { base, eps } => eps * base.f_max(),
            FlowFunction::Custom(c) => c.f_max,
        }
    }

    /// Evaluates without the sign check. Negative input is treated as zero.
    #[inline]
    pub fn value(&self, rho: f64) -> f64 {
        let rho = rho.max(0.0);
        match self {
            FlowFunction::Exponential { a, f_max } => -f_max * (-a * rho).exp_m1(),
            FlowFunction::Scaled { base, eps } => eps * base.value(rho),
            FlowFunction::Custom(c) => (c.eval)(rho),
        }
    }

    pub fn eval(&self, rho: f64) -> Result<f64, FlowError> {
        if rho.is_nan() || rho < 0.0 {
            return Err(FlowError::NegativeDensity(rho));
        }
        Ok(self.value(rho))
    }

    /// Derivative with respect to density.
    pub fn derivative(&self, rho: f64) -> f64 {
        let rho = rho.max(0.0);
        match self {
            FlowFunction::Exponential { a, f_max } => a * f_max * (-a * rho).exp(),
            FlowFunction::Scaled { base, eps } => eps * base.derivative(rho),
            FlowFunction::Custom(c) => {
                let h = 1e-6 * rho.max(1e-3);
                if rho >= h {
                    ((c.eval)(rho + h) - (c.eval)(rho - h)) / (2.0 * h)
                } else {
                    (-3.0 * (c.eval)(rho) + 4.0 * (c.eval)(rho + h) - (c.eval)(rho + 2.0 * h)) / (2.0 * h)
                }
            }
        }
    }

    /// Upper bound on the slope; the fastest relaxation rate of the link.
    pub fn max_slope(&self) -> f64 {
        match self {
            FlowFunction::Exponential { a, f_max } => a * f_max,
            FlowFunction::Scaled { base, eps } => eps * base.max_slope(),
            FlowFunction::Custom(c) => c.max_slope,
        }
    }

    /// Density carrying flow `f`. Requires `0 <= f < f_max`.
    pub fn inverse(&self, f: f64) -> Result<f64, FlowError> {
        let cap = self.f_max();
        if f.is_nan() || f < 0.0 {
            return Err(FlowError::NegativeFlow(f));
        }
        if f >= cap {
            return Err(FlowError::AtCapacity { flow: f, f_max: cap });
        }
        Ok(match self {
            FlowFunction::Exponential { a, f_max } => -(-f / f_max).ln_1p() / a,
            FlowFunction::Scaled { base, eps } => base.inverse(f / eps)?,
            FlowFunction::Custom(_) => self.bisect_level(f),
        })
    }

    /// Bisection for `value(rho) = target` with `0 <= target < f_max`.
    fn bisect_level(&self, target: f64) -> f64 {
        if target == 0.0 {
            return 0.0;
        }
        let mut hi = 1.0;
        while self.value(hi) < target {
            hi *= 2.0;
            if hi > 1e300 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn median_density(&self) -> MedianDensity {
        MedianDensity(match self {
            FlowFunction::Exponential { a, .. } => std::f64::consts::LN_2 / a,
            FlowFunction::Scaled { base, .. } => base.median_density().0,
            FlowFunction::Custom(_) => self.bisect_level(0.5 * self.f_max()),
        })
    }

    /// Structural identity, used to recognise scalings of an original function.
    pub fn same_as(&self, other: &FlowFunction) -> bool {
        match (self, other) {
            (FlowFunction::Exponential { a, f_max }, FlowFunction::Exponential { a: b, f_max: g }) => {
                a == b && f_max == g
            }
            (FlowFunction::Scaled { base, eps }, FlowFunction::Scaled { base: b2, eps: e2 }) => {
                eps == e2 && base.same_as(b2)
            }
            (FlowFunction::Custom(x), FlowFunction::Custom(y)) => Arc::ptr_eq(&x.eval, &y.eval),
            _ => false,
        }
    }
}

/// `eps * ff`. Requires `0 <= eps <= 1`; `eps = 0` is constructible but is
/// rejected later by perturbation certification.
pub fn scale_perturbation(ff: &FlowFunction, eps: f64) -> Result<FlowFunction, FlowError> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(FlowError::BadParameter(format!("scale factor must lie in [0, 1], got {eps}")));
    }
    Ok(FlowFunction::Scaled { base: Box::new(ff.clone()), eps })
}

/// Serialized flow-function parameters, `{"family": "exp", "a": .., "f_max": ..}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum FlowSpec {
    #[serde(rename = "exp")]
    Exponential { a: f64, f_max: f64 },
}

impl FlowSpec {
    pub fn build(&self) -> Result<FlowFunction, FlowError> {
        match *self {
            FlowSpec::Exponential { a, f_max } => FlowFunction::exponential(a, f_max),
        }
    }
}
