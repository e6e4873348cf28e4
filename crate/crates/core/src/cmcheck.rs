//! Finite-difference tests of complete monotonicity.
//!
//! A smooth `f` on an open orthant is completely monotone iff every iterated
//! forward difference satisfies `(-1)^{|α|} Δ_h^α f(x) >= 0` for all `h > 0`.
//! The test scans a grid, a fixed step set and every multi-index up to a
//! maximum order, and reports the most informative sign violation.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A function value together with an absolute error bound on it.
///
/// Closed-form evaluators report `noise = 0`; quadrature-backed ones report
/// the quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub noise: f64,
}

impl Evaluation {
    pub fn exact(value: f64) -> Self {
        Self { value, noise: 0.0 }
    }

    /// Multiply by `c`; an exact zero stays zero even for infinite `c`.
    pub fn scale(self, c: f64) -> Self {
        let times = |v: f64, c: f64| if v == 0.0 { 0.0 } else { v * c };
        Self {
            value: times(self.value, c),
            noise: times(self.noise, c.abs()),
        }
    }
}

pub type EvalFn = dyn Fn(&[f64]) -> Result<Evaluation> + Send + Sync;
pub type PartialsFn = dyn Fn(&[f64], &[usize]) -> Result<f64> + Send + Sync;

/// A pure, thread-safe evaluator on `(offset_1, ∞) × … × (offset_n, ∞)`.
#[derive(Clone)]
pub struct FunctionHandle {
    dimension: usize,
    domain_offset: Vec<f64>,
    eval: Arc<EvalFn>,
    partials: Option<Arc<PartialsFn>>,
    label: String,
}

impl fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("label", &self.label)
            .field("dimension", &self.dimension)
            .field("domain_offset", &self.domain_offset)
            .field("analytic_partials", &self.partials.is_some())
            .finish()
    }
}

impl FunctionHandle {
    /// Wrap a closed-form evaluator (zero evaluation noise).
    pub fn new<F>(dimension: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::from_evaluator(dimension, move |x| Ok(Evaluation::exact(f(x))))
    }

    /// Wrap a closed-form evaluator that may reject points.
    pub fn new_fallible<F>(dimension: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        Self::from_evaluator(dimension, move |x| f(x).map(Evaluation::exact))
    }

    pub fn from_evaluator<F>(dimension: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Evaluation> + Send + Sync + 'static,
    {
        Self {
            dimension,
            domain_offset: vec![0.0; dimension],
            eval: Arc::new(f),
            partials: None,
            label: String::new(),
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.domain_offset = vec![offset; self.dimension];
        self
    }

    pub fn with_partials<P>(mut self, p: P) -> Self
    where
        P: Fn(&[f64], &[usize]) -> Result<f64> + Send + Sync + 'static,
    {
        self.partials = Some(Arc::new(p));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn domain_offset(&self) -> &[f64] {
        &self.domain_offset
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.dimension && x.iter().zip(&self.domain_offset).all(|(v, lo)| v > lo)
    }

    /// Evaluate with domain, finiteness and sign checks.
    pub fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        if !self.in_domain(x) {
            return Err(Error::Domain(format!(
                "{x:?} outside the open domain with lower bounds {:?}",
                self.domain_offset
            )));
        }
        let e = (self.eval)(x)?;
        if !e.value.is_finite() || !e.noise.is_finite() {
            return Err(Error::NonFinite(format!(
                "{} at {x:?} = {}",
                self.label, e.value
            )));
        }
        if e.value < 0.0 {
            return Err(Error::Domain(format!(
                "{} takes the negative value {} at {x:?}",
                self.label, e.value
            )));
        }
        Ok(e)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.evaluate(x).map(|e| e.value)
    }

    /// Analytic `D^α f(x)`, when the handle carries partials.
    pub fn partial(&self, x: &[f64], alpha: &[usize]) -> Option<Result<f64>> {
        self.partials.as_ref().map(|p| p(x, alpha))
    }

    /// `c · f` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        let mut out = Self::from_evaluator(self.dimension, move |x| inner(x).map(|e| e.scale(c)));
        out.domain_offset = self.domain_offset.clone();
        out.label = format!("{c}*{}", self.label);
        if let Some(p) = self.partials.clone() {
            out.partials = Some(Arc::new(move |x: &[f64], a: &[usize]| {
                p(x, a).map(|v| v * c)
            }));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    #[serde(alias = "log")]
    Logarithmic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn linear(min: f64, max: f64, count: usize) -> Self {
        Self {
            min,
            max,
            count,
            spacing: Spacing::Linear,
        }
    }

    pub fn log(min: f64, max: f64, count: usize) -> Self {
        Self {
            min,
            max,
            count,
            spacing: Spacing::Logarithmic,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if i + 1 == n {
                    return self.max;
                }
                match self.spacing {
                    Spacing::Linear => self.min + t * (self.max - self.min),
                    Spacing::Logarithmic => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }

    /// Mean gap between neighbouring grid points.
    pub fn pitch(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }
}

/// A tensor grid, one [`Axis`] per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Self {
        Self { axes }
    }

    /// The same axis repeated `dim` times.
    pub fn cube(axis: Axis, dim: usize) -> Self {
        Self {
            axes: vec![axis; dim],
        }
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self, offset: &[f64]) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::BadParam("grid has no axes".into()));
        }
        if offset.len() != self.axes.len() {
            return Err(Error::DimensionMismatch {
                expected: offset.len(),
                got: self.axes.len(),
            });
        }
        for (i, (a, lo)) in self.axes.iter().zip(offset).enumerate() {
            if a.count < 2 {
                return Err(Error::BadParam(format!(
                    "grid axis {i}: count must be >= 2"
                )));
            }
            if !(a.min < a.max) || !a.min.is_finite() || !a.max.is_finite() {
                return Err(Error::BadParam(format!("grid axis {i}: need min < max")));
            }
            if a.min <= *lo {
                return Err(Error::Domain(format!(
                    "grid axis {i}: min {} not above the domain bound {lo}",
                    a.min
                )));
            }
        }
        Ok(())
    }

    /// All grid points in lexicographic order (last axis fastest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let per_axis: Vec<Vec<f64>> = self.axes.iter().map(Axis::points).collect();
        let mut out = vec![Vec::with_capacity(self.axes.len())];
        for pts in &per_axis {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    pts.iter().map(move |&p| {
                        let mut q = prefix.clone();
                        q.push(p);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

/// Orders of differentiation, one per dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        Self(v)
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn orders(&self) -> &[usize] {
        &self.0
    }

    /// Every multi-index of total order `<= max_order`, graded by order and
    /// lexicographically decreasing inside each grade.
    pub fn all_up_to(dim: usize, max_order: usize) -> Vec<MultiIndex> {
        fn fill(out: &mut Vec<MultiIndex>, cur: &mut Vec<usize>, pos: usize, left: usize) {
            if pos + 1 == cur.len() {
                cur[pos] = left;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for take in (0..=left).rev() {
                cur[pos] = take;
                fill(out, cur, pos + 1, left - take);
            }
        }
        let mut out = Vec::new();
        for total in 0..=max_order {
            fill(&mut out, &mut vec![0; dim], 0, total);
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|o| o.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Iterated forward difference `Δ_{h_1}^{α_1} … Δ_{h_n}^{α_n} f(x)`.
pub fn forward_difference(
    f: &FunctionHandle,
    x: &[f64],
    alpha: &MultiIndex,
    h: &[f64],
) -> Result<f64> {
    let n = f.dimension();
    if x.len() != n || alpha.0.len() != n || h.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len().min(alpha.0.len()).min(h.len()),
        });
    }
    if h.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::BadParam(format!(
            "step vector {h:?} must be componentwise positive"
        )));
    }
    difference_rec(f, x, &alpha.0, h)
}

fn difference_rec(f: &FunctionHandle, x: &[f64], alpha: &[usize], h: &[f64]) -> Result<f64> {
    let Some(i) = alpha.iter().position(|&a| a > 0) else {
        return f.value(x);
    };
    let mut lower = alpha.to_vec();
    lower[i] -= 1;
    let mut shifted = x.to_vec();
    shifted[i] += h[i];
    Ok(difference_rec(f, &shifted, &lower, h)? - difference_rec(f, x, &lower, h)?)
}

/// How step vectors are chosen for [`cm_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSpec {
    /// Multiples of each axis' mean grid pitch.
    PitchMultiples(Vec<f64>),
    /// Absolute step vectors.
    Explicit(Vec<Vec<f64>>),
}

impl Default for StepSpec {
    fn default() -> Self {
        StepSpec::PitchMultiples(vec![0.25, 1.0])
    }
}

impl StepSpec {
    pub fn resolve(&self, grid: &GridSpec) -> Result<Vec<Vec<f64>>> {
        let steps: Vec<Vec<f64>> = match self {
            StepSpec::PitchMultiples(m) => m
                .iter()
                .map(|c| grid.axes.iter().map(|a| c * a.pitch()).collect())
                .collect(),
            StepSpec::Explicit(v) => v.clone(),
        };
        if steps.is_empty() {
            return Err(Error::BadParam("empty step set".into()));
        }
        for s in &steps {
            if s.len() != grid.dimension() {
                return Err(Error::DimensionMismatch {
                    expected: grid.dimension(),
                    got: s.len(),
                });
            }
            if s.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return Err(Error::BadParam(format!(
                    "step vector {s:?} must be positive"
                )));
            }
        }
        Ok(steps)
    }
}

/// Knobs of [`cm_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CmSettings {
    pub max_order: usize,
    pub steps: StepSpec,
    pub tol_rel: f64,
    /// Absolute noise floor declared by the caller, per evaluation.
    pub noise_floor: f64,
    /// Multiplier applied to the per-evaluation noise reported by the handle.
    pub noise_multiplier: f64,
    /// Keep one record per (grid point, multi-index) for tabular output.
    #[serde(default)]
    pub keep_records: bool,
}

impl Default for CmSettings {
    fn default() -> Self {
        Self {
            max_order: 4,
            steps: StepSpec::default(),
            tol_rel: 1e-9,
            noise_floor: 0.0,
            noise_multiplier: 10.0,
            keep_records: false,
        }
    }
}

impl CmSettings {
    pub fn with_max_order(mut self, n: usize) -> Self {
        self.max_order = n;
        self
    }

    /// Defaults for handles whose values come out of a quadrature.
    pub fn quadrature_backed() -> Self {
        Self {
            max_order: 2,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    ConsistentCM,
    ViolatedCM,
    Inconclusive,
}

impl Verdict {
    /// Violation dominates, then inconclusive.
    pub fn combine<I: IntoIterator<Item = Verdict>>(it: I) -> Verdict {
        let mut out = Verdict::ConsistentCM;
        for v in it {
            match v {
                Verdict::ViolatedCM => return Verdict::ViolatedCM,
                Verdict::Inconclusive => out = Verdict::Inconclusive,
                Verdict::ConsistentCM => {}
            }
        }
        out
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ConsistentCM => "ConsistentCM",
            Verdict::ViolatedCM => "ViolatedCM",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub alpha: MultiIndex,
    pub step: Vec<f64>,
    pub signed_value: f64,
    pub tolerance: f64,
}

/// Minimum of `(-1)^{|α|} Δ_h^α f(x)` over the step set, for one point and α.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmRecord {
    pub point: Vec<f64>,
    pub alpha: MultiIndex,
    pub signed_value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmReport {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub min_signed_value: f64,
    pub tolerance_used: f64,
    pub grid: GridSpec,
    pub max_order: usize,
    pub steps_tried: Vec<Vec<f64>>,
    pub checks: usize,
    pub evaluations: usize,
    #[serde(skip)]
    pub records: Vec<CmRecord>,
}

struct Check {
    alpha: usize,
    signed: f64,
    tol: f64,
    band: f64,
}

struct Stencil {
    offsets: Vec<Vec<usize>>,
    /// For each multi-index: (offset index, signed coefficient of (-1)^|α| Δ^α).
    terms: Vec<Vec<(usize, f64)>>,
}

impl Stencil {
    fn new(alphas: &[MultiIndex], dim: usize, max_order: usize) -> Self {
        let offsets: Vec<Vec<usize>> = MultiIndex::all_up_to(dim, max_order)
            .into_iter()
            .map(|m| m.0)
            .collect();
        let lookup: HashMap<&[usize], usize> = offsets
            .iter()
            .enumerate()
            .map(|(i, o)| (o.as_slice(), i))
            .collect();
        let terms = alphas
            .iter()
            .map(|alpha| {
                offsets
                    .iter()
                    .filter(|j| j.iter().zip(&alpha.0).all(|(a, b)| a <= b))
                    .map(|j| {
                        // (-1)^{|α|} Δ^α = Σ_j (-1)^{|j|} Π C(α_i, j_i) f(x + j h)
                        let mut c = if j.iter().sum::<usize>() % 2 == 0 {
                            1.0
                        } else {
                            -1.0
                        };
                        for (&ji, &ai) in j.iter().zip(&alpha.0) {
                            c *= binomial(ai, ji);
                        }
                        (lookup[j.as_slice()], c)
                    })
                    .collect()
            })
            .collect();
        Self { offsets, terms }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Scan `grid` for sign violations of `(-1)^{|α|} Δ_h^α f`.
///
/// A signed value counts as negative only below `-band`, where `band` bounds
/// rounding (including underflow) plus the declared evaluation noise
/// propagated through the difference. It is a violation below `-(tol_rel·|f(x)| + band)`.
pub fn cm_test(f: &FunctionHandle, grid: &GridSpec, settings: &CmSettings) -> Result<CmReport> {
    if settings.max_order < 1 {
        return Err(Error::BadParam("max_order must be >= 1".into()));
    }
    if !(settings.tol_rel > 0.0) {
        return Err(Error::BadParam("tol_rel must be positive".into()));
    }
    if grid.dimension() != f.dimension() {
        return Err(Error::DimensionMismatch {
            expected: f.dimension(),
            got: grid.dimension(),
        });
    }
    grid.validate(f.domain_offset())?;
    let steps = settings.steps.resolve(grid)?;
    let dim = f.dimension();
    let alphas = MultiIndex::all_up_to(dim, settings.max_order);
    let stencil = Stencil::new(&alphas, dim, settings.max_order);
    let points = grid.points();

    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..steps.len()).map(move |s| (p, s)))
        .collect();

    let outcomes: Vec<Result<Vec<Check>>> = tasks
        .par_iter()
        .map(|&(p, s)| check_point(f, &points[p], &steps[s], &stencil, settings))
        .collect();

    let mut min_signed = f64::INFINITY;
    let mut min_tol = 0.0;
    let mut witness: Option<(usize, f64, Witness)> = None;
    let mut any_negative = false;
    let mut best_negative = (f64::INFINITY, 0.0);
    let mut records: Vec<CmRecord> = Vec::new();
    let mut checks = 0;

    for (&(p, s), outcome) in tasks.iter().zip(outcomes) {
        let outcome = outcome?;
        for c in outcome {
            checks += 1;
            if c.signed < min_signed {
                min_signed = c.signed;
                min_tol = c.tol;
            }
            if c.signed < -c.band {
                any_negative = true;
                let ratio = c.signed / c.tol;
                if ratio < best_negative.0 {
                    best_negative = (ratio, c.tol);
                }
            }
            if c.signed < -c.tol {
                let order = alphas[c.alpha].total();
                let ratio = c.signed / c.tol;
                let better = match &witness {
                    None => true,
                    Some((o, r, _)) => order < *o || (order == *o && ratio < *r),
                };
                if better {
                    witness = Some((
                        order,
                        ratio,
                        Witness {
                            point: points[p].clone(),
                            alpha: alphas[c.alpha].clone(),
                            step: steps[s].clone(),
                            signed_value: c.signed,
                            tolerance: c.tol,
                        },
                    ));
                }
            }
            if settings.keep_records {
                let idx = p * alphas.len() + c.alpha;
                if records.len() <= idx {
                    records.resize(
                        idx + 1,
                        CmRecord {
                            point: Vec::new(),
                            alpha: MultiIndex::zeros(0),
                            signed_value: f64::INFINITY,
                            tolerance: 0.0,
                        },
                    );
                }
                let r = &mut records[idx];
                if r.point.is_empty() || c.signed < r.signed_value {
                    *r = CmRecord {
                        point: points[p].clone(),
                        alpha: alphas[c.alpha].clone(),
                        signed_value: c.signed,
                        tolerance: c.tol,
                    };
                }
            }
        }
    }

    let (verdict, witness, tolerance_used) = match witness {
        Some((_, _, w)) => {
            let t = w.tolerance;
            (Verdict::ViolatedCM, Some(w), t)
        }
        None if any_negative => (Verdict::Inconclusive, None, best_negative.1),
        None => (Verdict::ConsistentCM, None, min_tol),
    };
    let evaluations = tasks.len() * stencil.offsets.len();
    Ok(CmReport {
        verdict,
        witness,
        min_signed_value: min_signed,
        tolerance_used,
        grid: grid.clone(),
        max_order: settings.max_order,
        steps_tried: steps,
        checks,
        evaluations,
        records,
    })
}

fn check_point(
    f: &FunctionHandle,
    x: &[f64],
    h: &[f64],
    stencil: &Stencil,
    settings: &CmSettings,
) -> Result<Vec<Check>> {
    let values: Vec<Evaluation> = stencil
        .offsets
        .iter()
        .map(|j| {
            let y: Vec<f64> = x
                .iter()
                .zip(j)
                .zip(h)
                .map(|((xi, &ji), hi)| xi + ji as f64 * hi)
                .collect();
            f.evaluate(&y)
                .map_err(|e| e.context(format!("stencil point {y:?}")))
        })
        .collect::<Result<_>>()?;
    let fx = values[0].value;
    Ok(stencil
        .terms
        .iter()
        .enumerate()
        .map(|(a, terms)| {
            let mut signed = 0.0;
            let mut magnitude = 0.0;
            let mut noise = 0.0;
            let mut weight = 0.0;
            for &(i, c) in terms {
                signed += c * values[i].value;
                magnitude += c.abs() * values[i].value.abs();
                noise += c.abs() * values[i].noise;
                weight += c.abs();
            }
            // values below the smallest normal float carry no relative precision
            let band = 8.0 * f64::EPSILON * magnitude
                + f64::MIN_POSITIVE * weight
                + settings.noise_multiplier * noise
                + settings.noise_floor * weight;
            let tol = settings.tol_rel * fx.abs() + band;
            Check {
                alpha: a,
                signed,
                tol,
                band,
            }
        })
        .collect())
}

/// `f(w) = Σ weight_k · exp(-<rate_k, w>)`, completely monotone by
/// construction, with exact partial derivatives.
pub fn bernstein_mixture(atoms: &[(f64, Vec<f64>)]) -> Result<FunctionHandle> {
    let Some(first) = atoms.first() else {
        return Err(Error::EmptyMixture);
    };
    let dim = first.1.len();
    if dim == 0 {
        return Err(Error::BadParam(
            "mixture atoms need at least one rate".into(),
        ));
    }
    for (w, rate) in atoms {
        if !(*w > 0.0) || !w.is_finite() {
            return Err(Error::BadParam(format!(
                "mixture weight {w} must be positive"
            )));
        }
        if rate.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: rate.len(),
            });
        }
        if rate.iter().any(|&r| !(r >= 0.0) || !r.is_finite()) {
            return Err(Error::BadParam(format!(
                "mixture rates {rate:?} must be nonnegative"
            )));
        }
    }
    let atoms: Arc<Vec<(f64, Vec<f64>)>> = Arc::new(atoms.to_vec());
    let atoms2 = atoms.clone();
    Ok(FunctionHandle::new(dim, move |x| {
        atoms
            .iter()
            .map(|(w, rate)| w * (-rate.iter().zip(x).map(|(r, xi)| r * xi).sum::<f64>()).exp())
            .sum()
    })
    .with_partials(move |x, alpha| {
        Ok(atoms2
            .iter()
            .map(|(w, rate)| {
                let factor: f64 = rate
                    .iter()
                    .zip(alpha)
                    .map(|(r, &a)| (-r).powi(a as i32))
                    .product();
                w * factor * (-rate.iter().zip(x).map(|(r, xi)| r * xi).sum::<f64>()).exp()
            })
            .sum())
    })
    .with_label("bernstein_mixture"))
}

/// Atoms of a reproducible random mixture: 1 to 5 atoms, weights in
/// `[0.1, 2]`, rates uniform in `[0, rate_max]`.
pub fn seeded_mixture_atoms(seed: u64, dim: usize, rate_max: f64) -> Vec<(f64, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=5);
    (0..n)
        .map(|_| {
            let w = rng.gen_range(0.1..2.0);
            let rate = (0..dim).map(|_| rng.gen_range(0.0..=rate_max)).collect();
            (w, rate)
        })
        .collect()
}
