//! Hyperbolic products and w-coordinates.
//!
//! For a density `f` on `(0,∞)^n` and a base point `u`, the hyperbolic
//! product is `Φ_u(v) = f(u∘v) · f(u⊘v)`. `f` is hyperbolically completely
//! monotone when every `Φ_u` is a completely monotone function of
//! `w_i = v_i + 1/v_i` and `w_ij = v_i/v_j + v_j/v_i`.

mod catalog;
mod density;
mod transform;

use serde::{Deserialize, Serialize};

use crate::cmcheck::{cm_test, CmReport, CmSettings, FunctionHandle, GridSpec, Verdict};
use crate::error::{Error, Result};

pub use catalog::{
    catalog_density, catalog_wform, gamma_sum_laplace, potential_density, Params, WForm,
    DENSITY_NAMES, WFORM_NAMES,
};
pub(crate) use density::product_eval;
pub use density::Density;
pub use transform::{transform_density, TransformKind};

/// Hyperbolic coordinates of a point `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WPoint {
    /// `w_i = v_i + 1/v_i`
    pub w_single: Vec<f64>,
    /// `w_ij = v_i/v_j + v_j/v_i` for `i < j`, lexicographic.
    pub w_pair: Vec<f64>,
}

impl WPoint {
    /// Singles followed by pairs, the argument order of a [`WForm`].
    pub fn flatten(&self) -> Vec<f64> {
        self.w_single.iter().chain(&self.w_pair).copied().collect()
    }
}

/// Number of w-coordinates for an `n`-variate density.
pub fn w_arity(n: usize) -> usize {
    n + n * (n - 1) / 2
}

/// Base point `u` of a hyperbolic product; every component is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BasePoint(Vec<f64>);

impl BasePoint {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if u.is_empty() || u.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(Error::BadParam(format!(
                "base point {u:?} must be strictly positive"
            )));
        }
        Ok(Self(u))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }
}

pub fn v_to_w(v: &[f64]) -> Result<WPoint> {
    if v.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::Domain(format!(
            "v = {v:?} must be componentwise positive"
        )));
    }
    let w_single = v.iter().map(|&x| x + 1.0 / x).collect();
    let mut w_pair = Vec::new();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            w_pair.push(v[i] / v[j] + v[j] / v[i]);
        }
    }
    Ok(WPoint { w_single, w_pair })
}

/// Inverse of `v ↦ v + 1/v` on the branch `v >= 1`.
pub fn w_to_v_1d(w: f64) -> Result<f64> {
    if !(w >= 2.0) || !w.is_finite() {
        return Err(Error::Domain(format!("w = {w} is below 2")));
    }
    let disc = ((w - 2.0) * (w + 2.0)).sqrt();
    Ok(0.5 * (w + disc))
}

/// `Φ_u(v) = f(u∘v) · f(u⊘v)` as a handle over `v ∈ (0,∞)^n`.
pub fn hyperbolic_product(f: &Density, u: &BasePoint) -> Result<FunctionHandle> {
    if f.dimension() != u.dimension() {
        return Err(Error::DimensionMismatch {
            expected: f.dimension(),
            got: u.dimension(),
        });
    }
    let f = f.clone();
    let u = u.0.clone();
    let label = format!("Φ[{}]", f.label());
    Ok(FunctionHandle::from_evaluator(f.dimension(), move |v| {
        let a: Vec<f64> = u.iter().zip(v).map(|(ui, vi)| ui * vi).collect();
        let b: Vec<f64> = u.iter().zip(v).map(|(ui, vi)| ui / vi).collect();
        Ok(product_eval(f.evaluate(&a)?, f.evaluate(&b)?))
    })
    .with_label(label))
}

/// One-dimensional curves on the reachable surface `{w(v)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slice {
    /// Vary `v_i`, hold the other coordinates at 1.
    Axis(usize),
    /// All `v_i` equal.
    Diagonal,
}

/// The hyperbolic product restricted to a reachable slice, parameterized by
/// the varying `w` coordinate (domain `(2, ∞)`).
///
/// Along `Axis(i)` the coordinates that move are `w_i` and every `w_ij`,
/// all equal to the parameter; along `Diagonal` the singles move together
/// and the pairs stay at 2. Both are nonnegative directions in w-space, so
/// complete monotonicity along them is necessary for the full property.
pub fn reachable_slice(f: &Density, u: &BasePoint, slice: Slice) -> Result<FunctionHandle> {
    let n = f.dimension();
    if let Slice::Axis(i) = slice {
        if i >= n {
            return Err(Error::BadParam(format!(
                "slice axis {i} out of range for dimension {n}"
            )));
        }
    }
    let phi = hyperbolic_product(f, u)?;
    let label = format!("{}|{slice:?}", phi.label());
    Ok(FunctionHandle::from_evaluator(1, move |w| {
        let t = w_to_v_1d(w[0])?;
        let v: Vec<f64> = match slice {
            Slice::Axis(i) => (0..n).map(|j| if j == i { t } else { 1.0 }).collect(),
            Slice::Diagonal => vec![t; n],
        };
        phi.evaluate(&v)
    })
    .with_offset(2.0)
    .with_label(label))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcmUReport {
    pub u: f64,
    pub report: CmReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HcmReport {
    pub label: String,
    pub verdict: Verdict,
    pub per_u: Vec<HcmUReport>,
}

/// `φ_u(w) = f(u·v(w)) · f(u/v(w))` for a univariate `f`.
pub fn hyperbolic_profile_1d(f: &Density, u: f64) -> Result<FunctionHandle> {
    if f.dimension() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: f.dimension(),
        });
    }
    reachable_slice(f, &BasePoint::new(vec![u])?, Slice::Axis(0))
}

/// The HCM test of a univariate density: one CM test in `w` per `u`.
pub fn hcm_test_1d(
    f: &Density,
    u_grid: &[f64],
    w_grid: &GridSpec,
    settings: &CmSettings,
) -> Result<HcmReport> {
    if u_grid.is_empty() {
        return Err(Error::BadParam("empty u grid".into()));
    }
    let mut per_u = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        let phi = hyperbolic_profile_1d(f, u)?;
        let report = cm_test(&phi, w_grid, settings)
            .map_err(|e| e.context(format!("{} at u = {u}", f.label())))?;
        per_u.push(HcmUReport { u, report });
    }
    Ok(HcmReport {
        label: f.label().to_string(),
        verdict: Verdict::combine(per_u.iter().map(|r| r.report.verdict)),
        per_u,
    })
}
