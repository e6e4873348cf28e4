//! Deterministic quadrature over the open positive orthant.
//!
//! Each axis `(0, ∞)` is mapped onto `R` (by `x = e^t` or by the
//! double-exponential map `x = exp(π/2 · sinh t)`) and integrated with a
//! step-halving trapezoidal rule. Dimensions above one are iterated, the
//! inner result at each outer node being computed once and reused by all
//! finer levels.

mod derived;
pub(crate) mod line;

use serde::{Deserialize, Serialize};

use crate::cmcheck::Evaluation;
use crate::error::{Error, Result};
use line::{LineRule, Sample};

pub use derived::{
    derived_density, laplace_density, laplace_transform, product_density_value, DerivedKind,
};

/// Change of variables applied to every `(0, ∞)` axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    ExpSubstitution,
    DoubleExponential,
}

impl Transform {
    /// `(x(t), dx/dt)`.
    fn map(self, t: f64) -> (f64, f64) {
        match self {
            Transform::ExpSubstitution => {
                let x = t.exp();
                (x, x)
            }
            Transform::DoubleExponential => {
                let half_pi = std::f64::consts::FRAC_PI_2;
                let x = (half_pi * t.sinh()).exp();
                (x, x * half_pi * t.cosh())
            }
        }
    }

    fn extents(self) -> (f64, f64) {
        match self {
            Transform::ExpSubstitution => (16.0, 700.0),
            Transform::DoubleExponential => (3.0, 6.7),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    #[serde(rename = "depth")]
    pub max_refinement_depth: usize,
    pub transform: Transform,
    /// Trapezoid nodes per unit length of the transformed variable at the
    /// coarsest level.
    #[serde(rename = "nodes")]
    pub base_node_count: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-300,
            max_refinement_depth: 8,
            transform: Transform::DoubleExponential,
            base_node_count: 2,
        }
    }
}

impl QuadSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::BadParam(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_refinement_depth < 1 {
            return Err(Error::BadParam("quadrature depth must be >= 1".into()));
        }
        if self.base_node_count < 1 {
            return Err(Error::BadParam("quadrature nodes must be >= 1".into()));
        }
        Ok(())
    }

    fn rule(&self, rel_tol: f64, parallel: bool) -> LineRule {
        let (min_extent, max_extent) = self.transform.extents();
        LineRule {
            h0: 1.0 / self.base_node_count as f64,
            max_depth: self.max_refinement_depth,
            min_extent,
            max_extent,
            rel_tol,
            abs_tol: self.abs_tol,
            parallel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub converged: bool,
}

impl QuadResult {
    pub fn relative_error(&self) -> f64 {
        self.error_estimate / self.value.abs()
    }

    /// The value when converged, an [`Error::Evaluation`] otherwise.
    pub fn require_converged(self, what: impl std::fmt::Display) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Evaluation(format!(
                "{what}: quadrature did not converge (value {:e}, error estimate {:e})",
                self.value, self.error_estimate
            )))
        }
    }

    pub fn as_evaluation(&self) -> Evaluation {
        Evaluation {
            value: self.value,
            noise: self.error_estimate,
        }
    }
}

/// Inner integrals get a tighter tolerance so that their propagated error
/// stays below the outer budget.
const INNER_TIGHTENING: f64 = 0.25;

/// Integrate `f` over `(0, ∞)^dim`, `dim` in `1..=4`.
pub fn integrate<F>(f: F, dim: usize, spec: &QuadSpec) -> Result<QuadResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    integrate_eval(|x| Ok(Evaluation::exact(f(x))), dim, spec)
}

/// As [`integrate`], for integrands that carry their own noise or can fail.
pub fn integrate_eval<F>(f: F, dim: usize, spec: &QuadSpec) -> Result<QuadResult>
where
    F: Fn(&[f64]) -> Result<Evaluation> + Sync,
{
    if !(1..=4).contains(&dim) {
        return Err(Error::BadParam(format!(
            "integration dimension {dim} not in 1..=4"
        )));
    }
    spec.validate()?;
    nested(
        &f,
        dim,
        &[],
        spec,
        AxisMap::HalfLine(spec.transform),
        spec.rel_tol,
    )
}

/// How one axis of the integration domain is parameterized by `t ∈ R`.
#[derive(Clone, Copy)]
enum AxisMap {
    HalfLine(Transform),
    RealLine,
}

impl AxisMap {
    fn map(self, t: f64) -> (f64, f64) {
        match self {
            AxisMap::HalfLine(tr) => tr.map(t),
            AxisMap::RealLine => (t, 1.0),
        }
    }

    fn valid(self, x: f64, jac: f64) -> bool {
        match self {
            AxisMap::HalfLine(_) => jac != 0.0 && x != 0.0 && x.is_finite(),
            AxisMap::RealLine => true,
        }
    }
}

const REAL_LINE_EXTENTS: (f64, f64) = (6.0, 64.0);

fn nested<F>(
    f: &F,
    dim: usize,
    prefix: &[f64],
    spec: &QuadSpec,
    map: AxisMap,
    rel_tol: f64,
) -> Result<QuadResult>
where
    F: Fn(&[f64]) -> Result<Evaluation> + Sync,
{
    let depth = prefix.len();
    let innermost = depth + 1 == dim;
    let mut rule = spec.rule(rel_tol, depth == 0 && dim > 1);
    if let AxisMap::RealLine = map {
        (rule.min_extent, rule.max_extent) = REAL_LINE_EXTENTS;
    }
    let g = |t: f64| -> Result<Sample> {
        let (x, jac) = map.map(t);
        if !map.valid(x, jac) {
            return Ok(Sample::exact(0.0));
        }
        let mut p = Vec::with_capacity(dim);
        p.extend_from_slice(prefix);
        p.push(x);
        if innermost {
            let e = f(&p)?;
            if !e.value.is_finite() {
                return Err(Error::NonFinite(format!(
                    "integrand is {} at {p:?}",
                    e.value
                )));
            }
            Ok(Sample {
                value: e.value * jac,
                noise: e.noise * jac,
                evals: 1,
                converged: true,
            })
        } else {
            let r = nested(f, dim, &p, spec, map, rel_tol * INNER_TIGHTENING)?;
            Ok(Sample {
                value: r.value * jac,
                noise: r.error_estimate * jac,
                evals: r.evaluations,
                converged: r.converged,
            })
        }
    };
    line::trapezoid(&g, &rule)
}

/// Integrate `f` over `R^dim` with the plain trapezoidal rule, for
/// integrands already centred and scaled to unit width. The transform of
/// `spec` is ignored; `nodes` sets the coarsest step.
pub fn integrate_real_eval<F>(f: F, dim: usize, spec: &QuadSpec) -> Result<QuadResult>
where
    F: Fn(&[f64]) -> Result<Evaluation> + Sync,
{
    if !(1..=4).contains(&dim) {
        return Err(Error::BadParam(format!(
            "integration dimension {dim} not in 1..=4"
        )));
    }
    spec.validate()?;
    nested(&f, dim, &[], spec, AxisMap::RealLine, spec.rel_tol)
}

/// One-dimensional convenience wrapper.
pub fn integrate_1d<F>(f: F, spec: &QuadSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate(|x| f(x[0]), 1, spec)
}
