use super::{product_eval, Density};
use crate::cmcheck::Evaluation;
use crate::error::{Error, Result};
use crate::quad::{integrate_eval, QuadSpec};

#[derive(Debug, Clone)]
pub enum TransformKind {
    /// Density of `1/X`.
    Invert,
    /// Density of `X^q`.
    Power(f64),
    /// Density of `T·X` for a univariate scale `T ~ g`.
    ScaleMix { g: Density, spec: QuadSpec },
}

/// `e · exp(ln_jac)`, with zero staying zero where the Jacobian overflows.
fn scale_log(e: Evaluation, ln_jac: f64) -> Evaluation {
    let times = |v: f64| {
        if v == 0.0 {
            0.0
        } else {
            v.signum() * (v.abs().ln() + ln_jac).exp()
        }
    };
    Evaluation {
        value: times(e.value),
        noise: times(e.noise),
    }
}

pub fn transform_density(f: &Density, kind: &TransformKind) -> Result<Density> {
    let n = f.dimension();
    let inner = f.clone();
    match kind {
        TransformKind::Invert => Ok(Density::from_evaluator(
            n,
            format!("invert({})", f.label()),
            f.integrable(),
            move |x| {
                let y: Vec<f64> = x.iter().map(|xi| 1.0 / xi).collect();
                let ln_jac: f64 = x.iter().map(|xi| -2.0 * xi.ln()).sum();
                Ok(scale_log(inner.evaluate(&y)?, ln_jac))
            },
        )),
        &TransformKind::Power(q) => {
            if q == 0.0 || !q.is_finite() {
                return Err(Error::BadParam(format!(
                    "power exponent {q} must be finite and nonzero"
                )));
            }
            if q.abs() < 1.0 {
                log::warn!(
                    "power transform with |q| = {} < 1 need not preserve hyperbolic monotonicity",
                    q.abs()
                );
            }
            let r = 1.0 / q;
            let ln_c = n as f64 * r.abs().ln();
            Ok(Density::from_evaluator(
                n,
                format!("power({}, {q})", f.label()),
                f.integrable(),
                move |x| {
                    let y: Vec<f64> = x.iter().map(|xi| xi.powf(r)).collect();
                    let ln_jac: f64 = ln_c + x.iter().map(|xi| (r - 1.0) * xi.ln()).sum::<f64>();
                    Ok(scale_log(inner.evaluate(&y)?, ln_jac))
                },
            ))
        }
        TransformKind::ScaleMix { g, spec } => {
            if n != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    got: n,
                });
            }
            if g.dimension() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    got: g.dimension(),
                });
            }
            spec.validate()?;
            let (g, spec) = (g.clone(), spec.clone());
            let label = format!("scale_mix({}, {})", f.label(), g.label());
            Ok(Density::from_evaluator(
                2,
                label,
                f.integrable() && g.integrable(),
                move |x| {
                    let r = integrate_eval(
                        |t: &[f64]| {
                            let t = t[0];
                            let fe = inner.evaluate(&[x[0] / t, x[1] / t])?;
                            let ge = g.evaluate(&[t])?;
                            Ok(product_eval(fe, ge).scale(1.0 / t).scale(1.0 / t))
                        },
                        1,
                        &spec,
                    )?
                    .require_converged(format_args!("scale mixture at {x:?}"))?;
                    Ok(Evaluation {
                        value: r.value.max(0.0),
                        noise: r.error_estimate,
                    })
                },
            ))
        }
    }
}
