//! The four-dimensional representation of `J(w₁, w₃)` for the product of two
//! independent counterexample vectors, its mixed derivative, and the k-scan.
//!
//! In logarithmic coordinates `y = (ln x, ln z, ln ρ, ln δ)` the exponent
//! `E_total` is a posynomial `Σ c_i exp(ℓ_i · y)`, hence convex. Each
//! integral is computed around the minimizer `m` of `E` after the affine map
//! `y = m + A τ` with `A Aᵀ = (∇²E(m))⁻¹`, and reported relative to the
//! factor `exp(-E(m))`, which underflows for large `k`.

use std::sync::Arc;

use nalgebra::{Matrix4, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmcheck::{cm_test, CmReport, CmSettings, Evaluation, FunctionHandle, GridSpec};
use crate::error::{Error, Result};
use crate::hyper::{catalog_density, Params};
use crate::quad::{integrate_real_eval, product_density_value, QuadResult, QuadSpec};

use super::memo::Memo;

/// Coefficient of `ρ w₃` in the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kappa1 {
    /// `κ₁ = k²`, from expanding the substitutions term by term.
    KSquared,
    /// `κ₁ = k`, as in the collected display.
    K,
}

impl Kappa1 {
    pub fn value(self, k: f64) -> f64 {
        match self {
            Kappa1::KSquared => k * k,
            Kappa1::K => k,
        }
    }
}

/// Which derivative of `J` the integrand produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// `J`
    One,
    /// `∂J/∂w₁`, weight `-∂E/∂w₁`
    D1,
    /// `∂J/∂w₃`, weight `-∂E/∂w₃`
    D3,
    /// `∂²J/∂w₁∂w₃`, weight `∂E/∂w₁ · ∂E/∂w₃ - ∂²E/∂w₁∂w₃`
    D13,
}

#[derive(Debug, Clone, Copy)]
struct Term {
    coef: f64,
    ell: [f64; 4],
}

const fn t(coef: f64, ell: [f64; 4]) -> Term {
    Term { coef, ell }
}

/// The exponent `E_total(x, z, ρ, δ; w₁, w₃)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm3Integrand {
    pub k: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl Thm3Integrand {
    pub fn new(k: f64, kappa1: Kappa1) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::BadParam(format!("k = {k} must be positive")));
        }
        Ok(Self {
            k,
            kappa1: kappa1.value(k),
            kappa2: k * k,
        })
    }

    pub fn s(&self, x: f64, z: f64) -> f64 {
        let k2 = self.k * self.k;
        x * x + 1.0 / (x * x) + k2 * z * z / (x * x) + k2 * x * x / (z * z)
    }

    pub fn t(x: f64, z: f64) -> f64 {
        z * z / x.powi(4) + x.powi(4) / (z * z) + 1.0 / (z * z) + z * z
    }

    pub fn u(x: f64, z: f64) -> f64 {
        z * z / (x * x) + x * x / (z * z)
    }

    pub fn v(x: f64) -> f64 {
        x * x + 1.0 / (x * x)
    }

    /// Direct evaluation of the exponent.
    pub fn exponent(&self, p: [f64; 4], w1: f64, w3: f64) -> f64 {
        let [x, z, rho, delta] = p;
        1.0 / rho
            + rho / delta
            + rho * self.s(x, z)
            + rho * w1
            + rho * self.kappa1 * w3
            + rho
                * delta
                * self.kappa2
                * (Self::t(x, z) + Self::u(x, z) * w1 + Self::v(x) * w3 + w1 * w3)
    }

    pub fn de_dw1(&self, p: [f64; 4], w3: f64) -> f64 {
        let [x, z, rho, delta] = p;
        rho + rho * delta * self.kappa2 * (Self::u(x, z) + w3)
    }

    pub fn de_dw3(&self, p: [f64; 4], w1: f64) -> f64 {
        let [x, _, rho, delta] = p;
        rho * self.kappa1 + rho * delta * self.kappa2 * (Self::v(x) + w1)
    }

    pub fn d2e(&self, p: [f64; 4]) -> f64 {
        p[2] * p[3] * self.kappa2
    }

    fn exponent_terms(&self, w1: f64, w3: f64) -> Vec<Term> {
        let k2 = self.k * self.k;
        let c2 = self.kappa2;
        let all = [
            t(1.0, [0.0, 0.0, -1.0, 0.0]),
            t(1.0, [0.0, 0.0, 1.0, -1.0]),
            t(1.0, [2.0, 0.0, 1.0, 0.0]),
            t(1.0, [-2.0, 0.0, 1.0, 0.0]),
            t(k2, [-2.0, 2.0, 1.0, 0.0]),
            t(k2, [2.0, -2.0, 1.0, 0.0]),
            t(w1 + self.kappa1 * w3, [0.0, 0.0, 1.0, 0.0]),
            t(c2, [-4.0, 2.0, 1.0, 1.0]),
            t(c2, [4.0, -2.0, 1.0, 1.0]),
            t(c2, [0.0, -2.0, 1.0, 1.0]),
            t(c2, [0.0, 2.0, 1.0, 1.0]),
            t(c2 * w1, [-2.0, 2.0, 1.0, 1.0]),
            t(c2 * w1, [2.0, -2.0, 1.0, 1.0]),
            t(c2 * w3, [2.0, 0.0, 1.0, 1.0]),
            t(c2 * w3, [-2.0, 0.0, 1.0, 1.0]),
            t(c2 * w1 * w3, [0.0, 0.0, 1.0, 1.0]),
        ];
        all.into_iter().filter(|t| t.coef != 0.0).collect()
    }

    fn d1_terms(&self, w3: f64) -> Vec<Term> {
        let c2 = self.kappa2;
        [
            t(1.0, [0.0, 0.0, 1.0, 0.0]),
            t(c2, [-2.0, 2.0, 1.0, 1.0]),
            t(c2, [2.0, -2.0, 1.0, 1.0]),
            t(c2 * w3, [0.0, 0.0, 1.0, 1.0]),
        ]
        .into_iter()
        .filter(|t| t.coef != 0.0)
        .collect()
    }

    fn d3_terms(&self, w1: f64) -> Vec<Term> {
        let c2 = self.kappa2;
        [
            t(self.kappa1, [0.0, 0.0, 1.0, 0.0]),
            t(c2, [2.0, 0.0, 1.0, 1.0]),
            t(c2, [-2.0, 0.0, 1.0, 1.0]),
            t(c2 * w1, [0.0, 0.0, 1.0, 1.0]),
        ]
        .into_iter()
        .filter(|t| t.coef != 0.0)
        .collect()
    }

    /// `∫ weight · e^{-E} dy` over `R⁴` in logarithmic coordinates, i.e.
    /// `∫∫∫∫ weight · e^{-E} dx dz dρ dδ / (x z ρ δ)`.
    pub fn integral(
        &self,
        w1: f64,
        w3: f64,
        weight: Weight,
        spec: &QuadSpec,
    ) -> Result<ScaledQuad> {
        if !(w1 >= 0.0) || !(w3 >= 0.0) || !w1.is_finite() || !w3.is_finite() {
            return Err(Error::Domain(format!(
                "(w1, w3) = ({w1}, {w3}) must be nonnegative"
            )));
        }
        let terms = self.exponent_terms(w1, w3);
        let (m, chol_diag, a) = laplace_frame(&terms)?;
        let e_min = posynomial(&terms, &m);
        let shift = |ts: &[Term]| -> Vec<(f64, [f64; 4])> {
            ts.iter()
                .map(|t| {
                    let ell = Vector4::from(t.ell);
                    let base = t.coef.ln() + ell.dot(&m);
                    let slope = a.transpose() * ell;
                    (base, [slope[0], slope[1], slope[2], slope[3]])
                })
                .collect()
        };
        let e_terms = shift(&terms);
        let d1 = shift(&self.d1_terms(w3));
        let d3 = shift(&self.d3_terms(w1));
        let d13 = shift(&[t(self.kappa2, [0.0, 0.0, 1.0, 1.0])]);
        let jac = 1.0 / chol_diag;
        let eval = |tau: &[f64]| -> Result<Evaluation> {
            let sum = |ts: &[(f64, [f64; 4])]| -> f64 {
                ts.iter()
                    .map(|(b, s)| {
                        (b + s[0] * tau[0] + s[1] * tau[1] + s[2] * tau[2] + s[3] * tau[3]).exp()
                    })
                    .sum()
            };
            let core = (e_min - sum(&e_terms)).exp();
            if core == 0.0 {
                return Ok(Evaluation::exact(0.0));
            }
            let w = match weight {
                Weight::One => 1.0,
                Weight::D1 => -sum(&d1),
                Weight::D3 => -sum(&d3),
                Weight::D13 => sum(&d1) * sum(&d3) - sum(&d13),
            };
            Ok(Evaluation::exact(jac * w * core))
        };
        let result = integrate_real_eval(eval, 4, spec)?;
        Ok(ScaledQuad {
            log_scale: e_min,
            result,
        })
    }
}

fn posynomial(terms: &[Term], y: &Vector4<f64>) -> f64 {
    terms
        .iter()
        .map(|t| t.coef * (Vector4::from(t.ell).dot(y)).exp())
        .sum()
}

/// Minimizer `m` of the posynomial, `∏ diag(chol ∇²E(m))`, and `A` with
/// `A Aᵀ = (∇²E(m))⁻¹`.
fn laplace_frame(terms: &[Term]) -> Result<(Vector4<f64>, f64, Matrix4<f64>)> {
    let grad_hess = |y: &Vector4<f64>| {
        let mut g = Vector4::zeros();
        let mut h = Matrix4::zeros();
        for t in terms {
            let ell = Vector4::from(t.ell);
            let v = t.coef * ell.dot(y).exp();
            g += ell * v;
            h += ell * ell.transpose() * v;
        }
        (g, h)
    };
    let mut y = Vector4::zeros();
    let mut e = posynomial(terms, &y);
    for _ in 0..200 {
        let (g, h) = grad_hess(&y);
        let chol = h
            .cholesky()
            .ok_or_else(|| Error::Evaluation("exponent Hessian is not positive definite".into()))?;
        let step = -chol.solve(&g);
        let decrement = -g.dot(&step);
        if decrement < 1e-24 * e.max(1.0) {
            break;
        }
        let mut s = 1.0;
        loop {
            let trial = y + step * s;
            let et = posynomial(terms, &trial);
            if et <= e - 0.25 * s * decrement {
                y = trial;
                e = et;
                break;
            }
            s *= 0.5;
            if s < 1e-12 {
                return Err(Error::Evaluation("mode search stalled".into()));
            }
        }
    }
    let (g, h) = grad_hess(&y);
    if !(g.norm() <= 1e-6 * e.max(1.0)) {
        return Err(Error::Evaluation(format!(
            "mode search did not converge (|grad| = {:e})",
            g.norm()
        )));
    }
    let chol = h
        .cholesky()
        .ok_or_else(|| Error::Evaluation("exponent Hessian is not positive definite".into()))?;
    let l = chol.l();
    let diag: f64 = (0..4).map(|i| l[(i, i)]).product();
    let a = l
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Evaluation("singular Hessian factor".into()))?;
    Ok((y, diag, a))
}

/// A quadrature result expressed relative to `exp(-log_scale)`: the true
/// value is `result.value · exp(-log_scale)`, and likewise for the error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledQuad {
    pub log_scale: f64,
    pub result: QuadResult,
}

impl ScaledQuad {
    pub fn unscaled(&self) -> QuadResult {
        let f = (-self.log_scale).exp();
        QuadResult {
            value: self.result.value * f,
            error_estimate: self.result.error_estimate * f,
            ..self.result
        }
    }

    fn times(self, c: f64) -> Self {
        Self {
            log_scale: self.log_scale,
            result: QuadResult {
                value: self.result.value * c,
                error_estimate: self.result.error_estimate * c.abs(),
                ..self.result
            },
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::BadParam(format!("k = {k} must be positive")));
    }
    Ok(())
}

/// `J(v₁, v₂) = F(v₁, v₂) · F(1/v₁, 1/v₂)`, each factor a two-dimensional
/// product-density quadrature of the counterexample density.
pub fn thm3_j_direct(v1: f64, v2: f64, k: f64, spec: &QuadSpec) -> Result<QuadResult> {
    check_k(k)?;
    if !(v1 > 0.0) || !(v2 > 0.0) {
        return Err(Error::Domain(format!(
            "(v1, v2) = ({v1}, {v2}) must be positive"
        )));
    }
    let f = catalog_density("counterexample_density", &Params::from_pairs(&[("k", k)]))?;
    let a = product_density_value(&f, &f, &[v1, v2], spec)?;
    let b = product_density_value(&f, &f, &[1.0 / v1, 1.0 / v2], spec)?;
    Ok(QuadResult {
        value: a.value * b.value,
        error_estimate: a.value.abs() * b.error_estimate
            + b.value.abs() * a.error_estimate
            + a.error_estimate * b.error_estimate,
        evaluations: a.evaluations + b.evaluations,
        converged: a.converged && b.converged,
    })
}

/// The representation of `J` without its leading factor 4, so that
/// `4 · thm3_j_repr(w(v)) = thm3_j_direct(v)`, relative to `exp(-log_scale)`.
pub fn thm3_j_repr_scaled(
    w1: f64,
    w3: f64,
    k: f64,
    kappa1: Kappa1,
    spec: &QuadSpec,
) -> Result<ScaledQuad> {
    Thm3Integrand::new(k, kappa1)?.integral(w1, w3, Weight::One, spec)
}

pub fn thm3_j13_scaled(
    w1: f64,
    w3: f64,
    k: f64,
    kappa1: Kappa1,
    spec: &QuadSpec,
) -> Result<ScaledQuad> {
    Thm3Integrand::new(k, kappa1)?.integral(w1, w3, Weight::D13, spec)
}

pub fn thm3_j_repr(w1: f64, w3: f64, k: f64, spec: &QuadSpec) -> Result<QuadResult> {
    thm3_j_repr_scaled(w1, w3, k, Kappa1::KSquared, spec).map(|r| r.unscaled())
}

pub fn thm3_j13(w1: f64, w3: f64, k: f64, spec: &QuadSpec) -> Result<QuadResult> {
    thm3_j13_scaled(w1, w3, k, Kappa1::KSquared, spec).map(|r| r.unscaled())
}

/// `J`, `J₁`, `J₃`, `J₁₃` at one point, all relative to the same scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thm3Derivatives {
    pub log_scale: f64,
    pub j: QuadResult,
    pub j1: QuadResult,
    pub j3: QuadResult,
    pub j13: QuadResult,
}

impl Thm3Derivatives {
    /// `(J·J₁₃ - J₁·J₃) / |J·J₁₃|`; zero when `J` factors as `A(w₁)·B(w₃)`.
    pub fn factorization_residual(&self) -> f64 {
        let lhs = self.j.value * self.j13.value;
        (lhs - self.j1.value * self.j3.value) / lhs.abs()
    }
}

pub fn thm3_derivatives(
    w1: f64,
    w3: f64,
    k: f64,
    kappa1: Kappa1,
    spec: &QuadSpec,
) -> Result<Thm3Derivatives> {
    let integrand = Thm3Integrand::new(k, kappa1)?;
    let rs: Vec<ScaledQuad> = [Weight::One, Weight::D1, Weight::D3, Weight::D13]
        .into_iter()
        .map(|w| integrand.integral(w1, w3, w, spec))
        .collect::<Result<_>>()?;
    Ok(Thm3Derivatives {
        log_scale: rs[0].log_scale,
        j: rs[0].result,
        j1: rs[1].result,
        j3: rs[2].result,
        j13: rs[3].result,
    })
}

/// One dual-computation comparison at a surface point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCheck {
    pub v: [f64; 2],
    pub w: [f64; 2],
    pub k: f64,
    pub kappa1: Kappa1,
    pub direct: QuadResult,
    /// `4 · J_repr`, unscaled.
    pub repr4: QuadResult,
    pub relative_difference: f64,
    pub combined_relative_error: f64,
}

pub fn thm3_dual_check(v: [f64; 2], k: f64, kappa1: Kappa1, spec: &QuadSpec) -> Result<DualCheck> {
    let w1 = v[0] + 1.0 / v[0];
    let w3 = v[0] / v[1] + v[1] / v[0];
    let direct = thm3_j_direct(v[0], v[1], k, spec)?;
    let repr4 = thm3_j_repr_scaled(w1, w3, k, kappa1, spec)?
        .times(4.0)
        .unscaled();
    Ok(DualCheck {
        v,
        w: [w1, w3],
        k,
        kappa1,
        direct,
        repr4,
        relative_difference: (repr4.value - direct.value).abs() / direct.value.abs(),
        combined_relative_error: (repr4.error_estimate + direct.error_estimate)
            / direct.value.abs(),
    })
}

/// Result of testing both candidate values of `κ₁` against the direct
/// computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kappa1Selection {
    pub selected: Option<Kappa1>,
    pub tolerance: f64,
    pub candidates: Vec<DualCheck>,
}

pub fn thm3_select_kappa1(
    v: [f64; 2],
    k: f64,
    tolerance: f64,
    spec: &QuadSpec,
) -> Result<Kappa1Selection> {
    let candidates: Vec<DualCheck> = [Kappa1::KSquared, Kappa1::K]
        .into_iter()
        .map(|c| thm3_dual_check(v, k, c, spec))
        .collect::<Result<_>>()?;
    let matching: Vec<Kappa1> = candidates
        .iter()
        .filter(|c| c.relative_difference <= tolerance && c.direct.converged && c.repr4.converged)
        .map(|c| c.kappa1)
        .collect();
    Ok(Kappa1Selection {
        selected: if matching.len() == 1 {
            Some(matching[0])
        } else {
            None
        },
        tolerance,
        candidates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignClass {
    Negative,
    Nonnegative,
    Unconverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScanEntry {
    pub k: f64,
    pub w: f64,
    /// `J₁₃(w, w)`, relative to `exp(-log_scale)`.
    pub value: f64,
    pub error_estimate: f64,
    pub log_scale: f64,
    pub evaluations: u64,
    pub converged: bool,
    pub class: SignClass,
}

/// First consecutive pair of converged entries going from nonnegative to
/// negative. `k_low` is absent when the first converged entry is negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignChange {
    pub k_low: Option<f64>,
    pub k_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScanSeries {
    pub entries: Vec<KScanEntry>,
    pub sign_change: Option<SignChange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScanReport {
    pub w_eps: f64,
    pub kappa1: Kappa1,
    /// Evaluated at `(w_eps, w_eps)`.
    pub fixed: KScanSeries,
    /// Evaluated at `(w, w)` with `w = min(w_eps, 0.1 / k³)`.
    pub coupled: KScanSeries,
    pub any_negative: bool,
    pub all_converged: bool,
}

/// The coupled small-w evaluation point for a given `k`.
pub fn coupled_w(w_eps: f64, k: f64) -> f64 {
    w_eps.min(0.1 / (k * k * k))
}

fn classify(r: &ScaledQuad) -> SignClass {
    if !r.result.converged {
        SignClass::Unconverged
    } else if r.result.value < -r.result.error_estimate {
        SignClass::Negative
    } else {
        SignClass::Nonnegative
    }
}

fn series(entries: Vec<KScanEntry>) -> KScanSeries {
    let mut prev: Option<f64> = None;
    let mut first = true;
    let mut sign_change = None;
    for e in entries.iter().filter(|e| e.class != SignClass::Unconverged) {
        if e.class == SignClass::Negative {
            sign_change = Some(SignChange {
                k_low: if first { None } else { prev },
                k_high: e.k,
            });
            break;
        }
        prev = Some(e.k);
        first = false;
    }
    KScanSeries {
        entries,
        sign_change,
    }
}

pub fn thm3_k_scan(
    k_values: &[f64],
    w_eps: f64,
    kappa1: Kappa1,
    spec: &QuadSpec,
) -> Result<KScanReport> {
    if k_values.is_empty() {
        return Err(Error::BadParam("k-scan needs at least one k".into()));
    }
    if k_values.iter().any(|&k| !(k > 0.0) || !k.is_finite()) {
        return Err(Error::BadParam(format!(
            "k values {k_values:?} must be positive"
        )));
    }
    if k_values.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::BadParam(format!(
            "k values {k_values:?} must be strictly increasing"
        )));
    }
    if !(w_eps > 0.0) || !w_eps.is_finite() {
        return Err(Error::BadParam(format!("w_eps = {w_eps} must be positive")));
    }
    let mut tasks: Vec<(f64, f64)> = Vec::new();
    for &k in k_values {
        tasks.push((k, w_eps));
        let wc = coupled_w(w_eps, k);
        if wc < w_eps {
            tasks.push((k, wc));
        }
    }
    let results: Vec<Result<ScaledQuad>> = tasks
        .par_iter()
        .map(|&(k, w)| thm3_j13_scaled(w, w, k, kappa1, spec))
        .collect();
    let mut fixed = Vec::new();
    let mut coupled = Vec::new();
    for (&(k, w), r) in tasks.iter().zip(results) {
        let r = r.map_err(|e| e.context(format!("k = {k}, w = {w}")))?;
        let entry = KScanEntry {
            k,
            w,
            value: r.result.value,
            error_estimate: r.result.error_estimate,
            log_scale: r.log_scale,
            evaluations: r.result.evaluations,
            converged: r.result.converged,
            class: classify(&r),
        };
        if w == w_eps {
            fixed.push(entry.clone());
            if coupled_w(w_eps, k) == w_eps {
                coupled.push(entry);
            }
        } else {
            coupled.push(entry);
        }
    }
    let all = fixed.iter().chain(&coupled);
    let any_negative = all.clone().any(|e| e.class == SignClass::Negative);
    let all_converged = all.clone().all(|e| e.converged);
    Ok(KScanReport {
        w_eps,
        kappa1,
        fixed: series(fixed),
        coupled: series(coupled),
        any_negative,
        all_converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frozen {
    W1,
    W3,
}

/// `J_repr` with one of `(w₁, w₃)` frozen, as a one-dimensional handle whose
/// noise is the quadrature error estimate. Values are memoized per point.
pub fn thm3_slice_handle(
    k: f64,
    frozen: Frozen,
    value: f64,
    kappa1: Kappa1,
    spec: &QuadSpec,
) -> Result<FunctionHandle> {
    check_k(k)?;
    if !(value >= 0.0) {
        return Err(Error::Domain(format!(
            "frozen value {value} must be nonnegative"
        )));
    }
    let spec = spec.clone();
    let memo = Arc::new(Memo::default());
    let label = format!("J_repr(k={k}, {frozen:?}={value})");
    Ok(FunctionHandle::from_evaluator(1, move |x| {
        memo.get_or_compute(x[0], || {
            let (w1, w3) = match frozen {
                Frozen::W1 => (value, x[0]),
                Frozen::W3 => (x[0], value),
            };
            let r = thm3_j_repr_scaled(w1, w3, k, kappa1, &spec)?.unscaled();
            let r = r.require_converged(format_args!("J_repr at ({w1}, {w3})"))?;
            Ok(Evaluation {
                value: r.value,
                noise: r.error_estimate,
            })
        })
    })
    .with_label(label))
}

/// CM test of `J_repr` in the free variable, the other one frozen.
pub fn remark2_separate_cm(
    k: f64,
    frozen: Frozen,
    value: f64,
    grid: &GridSpec,
    spec: &QuadSpec,
    settings: &CmSettings,
) -> Result<CmReport> {
    let h = thm3_slice_handle(k, frozen, value, Kappa1::KSquared, spec)?;
    cm_test(&h, grid, settings)
}
