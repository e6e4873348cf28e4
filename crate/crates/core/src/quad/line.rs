//! Step-halving trapezoidal rule on the whole real line.
//!
//! Every semi-infinite integral is mapped onto `R` before it reaches this
//! routine, so the integrand decays at both ends and the trapezoidal rule
//! converges geometrically (doubly exponentially after the DE map).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::QuadResult;

/// One node value: the integrand (already multiplied by the Jacobian), its
/// absolute noise, and bookkeeping from nested integrations.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sample {
    pub value: f64,
    pub noise: f64,
    pub evals: u64,
    pub converged: bool,
}

impl Sample {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            noise: 0.0,
            evals: 1,
            converged: true,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LineRule {
    pub h0: f64,
    pub max_depth: usize,
    /// The outward scan never stops before this distance from the origin.
    pub min_extent: f64,
    pub max_extent: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub parallel: bool,
}

const NEGLIGIBLE: f64 = 1e-18;
const CHUNK: usize = 8;

fn check_node<G>(g: &G, t: f64) -> Result<Sample>
where
    G: Fn(f64) -> Result<Sample> + Sync,
{
    let s = g(t)?;
    if !s.value.is_finite() {
        return Err(Error::NonFinite(format!(
            "integrand is {} at transformed node {t}",
            s.value
        )));
    }
    Ok(s)
}

/// Per-node results, so that a caller can ignore failures at nodes it ends
/// up discarding.
fn try_many<G>(g: &G, ts: &[f64], parallel: bool) -> Vec<Result<Sample>>
where
    G: Fn(f64) -> Result<Sample> + Sync,
{
    if parallel && ts.len() > 1 {
        ts.par_iter().map(|&t| check_node(g, t)).collect()
    } else {
        ts.iter().map(|&t| check_node(g, t)).collect()
    }
}

fn eval_many<G>(g: &G, ts: &[f64], parallel: bool) -> Result<Vec<Sample>>
where
    G: Fn(f64) -> Result<Sample> + Sync,
{
    try_many(g, ts, parallel).into_iter().collect()
}

struct Side {
    samples: Vec<Sample>,
    truncated: bool,
}

fn scan<G>(g: &G, rule: &LineRule, dir: f64, center: f64) -> Result<Side>
where
    G: Fn(f64) -> Result<Sample> + Sync,
{
    let mut samples: Vec<Sample> = Vec::new();
    let mut peak = center.abs();
    let mut prev = center.abs();
    let max_nodes = (rule.max_extent / rule.h0).floor() as usize;
    let mut j = 0usize;
    while j < max_nodes {
        let upto = (j + CHUNK).min(max_nodes);
        let ts: Vec<f64> = (j + 1..=upto).map(|i| dir * i as f64 * rule.h0).collect();
        let batch = try_many(g, &ts, rule.parallel);
        for s in batch {
            let s = s?;
            j += 1;
            let v = s.value.abs();
            peak = peak.max(v);
            samples.push(s);
            let t = j as f64 * rule.h0;
            if t >= rule.min_extent && v <= NEGLIGIBLE * peak && prev <= NEGLIGIBLE * peak {
                return Ok(Side {
                    samples,
                    truncated: false,
                });
            }
            prev = v;
        }
    }
    let last = samples.last().map_or(0.0, |s| s.value.abs());
    Ok(Side {
        samples,
        truncated: last > NEGLIGIBLE * peak,
    })
}

/// Safety factor on the extrapolated error.
const SAFETY: f64 = 10.0;

/// Error of the finer of two trapezoid sums differing by `diff`, given the
/// previous difference `prev_diff`.
///
/// With a convergence ratio `q = diff / prev_diff`, the remaining error is
/// about `diff · q / (1 - q)` when the differences shrink geometrically and
/// smaller still when they shrink faster, so `SAFETY · q · diff` bounds
/// both. The estimate never drops below the rounding level of the sum or
/// rises above `diff`.
fn refined_error(diff: f64, prev_diff: Option<f64>, abs_sum: f64) -> f64 {
    let rounding = 16.0 * f64::EPSILON * abs_sum;
    let model = match prev_diff {
        Some(p) if p > 0.0 => diff * (SAFETY * diff / p).min(1.0),
        _ => diff,
    };
    model.max(rounding)
}

/// Integrate `g` over the real line.
pub(crate) fn trapezoid<G>(g: &G, rule: &LineRule) -> Result<QuadResult>
where
    G: Fn(f64) -> Result<Sample> + Sync,
{
    let c = eval_many(g, &[0.0], false)?[0];
    let right = scan(g, rule, 1.0, c.value)?;
    let left = scan(g, rule, -1.0, c.value)?;

    let mut evals = c.evals;
    let mut noise_sum = c.noise;
    let mut converged = c.converged && !right.truncated && !left.truncated;
    let mut raw = c.value;
    let mut abs_raw = c.value.abs();
    // sum in a fixed order: center, right outward, left outward
    for s in right.samples.iter().chain(&left.samples) {
        raw += s.value;
        abs_raw += s.value.abs();
        noise_sum += s.noise;
        evals += s.evals;
        converged &= s.converged;
    }
    let lo = -(left.samples.len() as f64) * rule.h0;
    let span = right.samples.len() + left.samples.len();

    let mut h = rule.h0;
    let mut sum = raw * h;
    let mut err = f64::INFINITY;
    let mut discretization_converged = false;
    let mut prev_diff: Option<f64> = None;
    for level in 1..=rule.max_depth {
        h *= 0.5;
        let count = span << (level - 1);
        let ts: Vec<f64> = (0..count).map(|i| lo + (2 * i + 1) as f64 * h).collect();
        let fresh = eval_many(g, &ts, rule.parallel)?;
        let mut add = 0.0;
        for s in &fresh {
            add += s.value;
            abs_raw += s.value.abs();
            noise_sum += s.noise;
            evals += s.evals;
            converged &= s.converged;
        }
        let next = 0.5 * sum + h * add;
        let diff = (next - sum).abs();
        err = refined_error(diff, prev_diff, h * abs_raw);
        prev_diff = Some(diff);
        sum = next;
        if err + h * noise_sum <= (rule.rel_tol * sum.abs()).max(rule.abs_tol) {
            discretization_converged = true;
            break;
        }
    }
    if span == 0 {
        // integrand negligible away from the origin
        err = err.min(c.value.abs() * h);
    }
    let error_estimate = err + h * noise_sum;
    let converged = converged
        && discretization_converged
        && error_estimate <= (rule.rel_tol * sum.abs()).max(rule.abs_tol);
    Ok(QuadResult {
        value: sum,
        error_estimate,
        evaluations: evals,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rule() -> LineRule {
        LineRule {
            h0: 1.0,
            max_depth: 8,
            min_extent: 3.0,
            max_extent: 40.0,
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            parallel: false,
        }
    }

    #[test]
    fn gaussian_on_the_line() {
        let r = trapezoid(&|t: f64| Ok(Sample::exact((-t * t / 2.0).exp())), &rule()).unwrap();
        assert!(r.converged);
        assert_relative_eq!(
            r.value,
            (2.0 * std::f64::consts::PI).sqrt(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn off_center_peak_is_found() {
        let r = trapezoid(
            &|t: f64| Ok(Sample::exact((-(t - 12.0).powi(2)).exp())),
            &rule(),
        )
        .unwrap();
        assert_relative_eq!(r.value, std::f64::consts::PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn slow_tail_is_truncated_and_flagged() {
        let r = trapezoid(&|t: f64| Ok(Sample::exact(1.0 / (1.0 + t * t))), &rule()).unwrap();
        assert!(!r.converged);
    }
}
