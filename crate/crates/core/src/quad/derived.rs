use super::{integrate_eval, QuadResult, QuadSpec};
use crate::cmcheck::Evaluation;
use crate::error::{Error, Result};
use crate::hyper::{product_eval, Density};

/// Densities obtained from a bivariate density by integration.
#[derive(Debug, Clone)]
pub enum DerivedKind {
    /// Integrate out every coordinate except `axis`.
    Marginal { axis: usize },
    /// Freeze coordinate `axis` at `fixed` (unnormalized conditional).
    Conditional { axis: usize, fixed: f64 },
    /// `F(z) = ∫ y f(z y, y) dy`, the density of `X / Y`.
    Quotient,
    /// `F(x, y) = ∫∫ f(x/s, y/t) g(s, t) ds dt / (s t)`, the density of the
    /// componentwise product of independent vectors.
    Product(Density),
}

fn to_eval(r: QuadResult, what: impl std::fmt::Display) -> Result<Evaluation> {
    let r = r.require_converged(what)?;
    Ok(Evaluation {
        value: r.value.max(0.0),
        noise: r.error_estimate,
    })
}

pub fn derived_density(f: &Density, kind: &DerivedKind, spec: &QuadSpec) -> Result<Density> {
    if f.dimension() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: f.dimension(),
        });
    }
    spec.validate()?;
    let f = f.clone();
    let spec = spec.clone();
    match kind {
        &DerivedKind::Marginal { axis } => {
            check_axis(axis)?;
            let label = format!("marginal{axis}({})", f.label());
            Ok(Density::from_evaluator(
                1,
                label,
                f.integrable(),
                move |x| {
                    let r = integrate_eval(
                        |y: &[f64]| {
                            let p = if axis == 0 {
                                [x[0], y[0]]
                            } else {
                                [y[0], x[0]]
                            };
                            f.evaluate(&p)
                        },
                        1,
                        &spec,
                    )?;
                    to_eval(r, format_args!("marginal at {}", x[0]))
                },
            ))
        }
        &DerivedKind::Conditional { axis, fixed } => {
            check_axis(axis)?;
            if !(fixed > 0.0) || !fixed.is_finite() {
                return Err(Error::Domain(format!(
                    "conditioning value {fixed} must be positive"
                )));
            }
            let label = format!("conditional({}|x{axis}={fixed})", f.label());
            Ok(Density::from_evaluator(
                1,
                label,
                f.integrable(),
                move |x| {
                    let p = if axis == 0 {
                        [fixed, x[0]]
                    } else {
                        [x[0], fixed]
                    };
                    f.evaluate(&p)
                },
            ))
        }
        DerivedKind::Quotient => {
            let label = format!("quotient({})", f.label());
            Ok(Density::from_evaluator(
                1,
                label,
                f.integrable(),
                move |z| {
                    let r = integrate_eval(
                        |y: &[f64]| Ok(f.evaluate(&[z[0] * y[0], y[0]])?.scale(y[0])),
                        1,
                        &spec,
                    )?;
                    to_eval(r, format_args!("quotient at {}", z[0]))
                },
            ))
        }
        DerivedKind::Product(g) => {
            if g.dimension() != 2 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    got: g.dimension(),
                });
            }
            let g = g.clone();
            let label = format!("product({}, {})", f.label(), g.label());
            Ok(Density::from_evaluator(
                2,
                label,
                f.integrable() && g.integrable(),
                move |x| {
                    let r = product_density_value(&f, &g, x, &spec)?;
                    to_eval(r, format_args!("product density at {x:?}"))
                },
            ))
        }
    }
}

/// The raw quadrature behind [`DerivedKind::Product`] at one point.
pub fn product_density_value(
    f: &Density,
    g: &Density,
    x: &[f64],
    spec: &QuadSpec,
) -> Result<QuadResult> {
    if f.dimension() != 2 || g.dimension() != 2 || x.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: if x.len() != 2 {
                x.len()
            } else {
                f.dimension().max(g.dimension())
            },
        });
    }
    if x.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::Domain(format!(
            "product density argument {x:?} must be positive"
        )));
    }
    integrate_eval(
        |st: &[f64]| {
            let (s, t) = (st[0], st[1]);
            let a = f.evaluate(&[x[0] / s, x[1] / t])?;
            let b = g.evaluate(&[s, t])?;
            Ok(product_eval(a, b).scale(1.0 / (s * t)))
        },
        2,
        spec,
    )
}

fn check_axis(axis: usize) -> Result<()> {
    if axis > 1 {
        return Err(Error::BadParam(format!(
            "axis {axis} out of range for a bivariate density"
        )));
    }
    Ok(())
}

/// `∫ e^{-<s, x>} f(x) dx` over the positive orthant.
pub fn laplace_transform(f: &Density, s: &[f64], spec: &QuadSpec) -> Result<QuadResult> {
    if s.len() != f.dimension() {
        return Err(Error::DimensionMismatch {
            expected: f.dimension(),
            got: s.len(),
        });
    }
    if s.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
        return Err(Error::Domain(format!(
            "Laplace argument {s:?} must be nonnegative"
        )));
    }
    integrate_eval(
        |x: &[f64]| {
            let dot: f64 = s.iter().zip(x).map(|(a, b)| a * b).sum();
            Ok(f.evaluate(x)?.scale((-dot).exp()))
        },
        f.dimension(),
        spec,
    )
}

/// The Laplace transform of `f` as a density in `s`, noise equal to the
/// quadrature error estimate.
pub fn laplace_density(f: &Density, spec: &QuadSpec) -> Result<Density> {
    spec.validate()?;
    let (f, spec) = (f.clone(), spec.clone());
    let label = format!("laplace({})", f.label());
    Ok(Density::from_evaluator(
        f.dimension(),
        label,
        true,
        move |s| {
            let r = laplace_transform(&f, s, &spec)?;
            to_eval(r, format_args!("Laplace transform at {s:?}"))
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyper::{catalog_density, Params};
    use approx::assert_relative_eq;

    fn exp2() -> Density {
        Density::new(2, "exp2", true, |x| (-x[0] - x[1]).exp())
    }

    #[test]
    fn marginal_of_exponential() {
        for axis in [0, 1] {
            let m = derived_density(
                &exp2(),
                &DerivedKind::Marginal { axis },
                &QuadSpec::default(),
            )
            .unwrap();
            for x in [0.1f64, 1.0, 7.0] {
                assert_relative_eq!(m.value(&[x]).unwrap(), (-x).exp(), max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn quotient_of_exponential() {
        let q = derived_density(&exp2(), &DerivedKind::Quotient, &QuadSpec::default()).unwrap();
        assert_relative_eq!(q.value(&[1.0]).unwrap(), 0.25, max_relative = 1e-9);
        assert_relative_eq!(q.value(&[3.0]).unwrap(), 1.0 / 16.0, max_relative = 1e-9);
    }

    #[test]
    fn conditional_freezes_a_coordinate() {
        let f = catalog_density("example_density", &Params::default()).unwrap();
        let c = derived_density(
            &f,
            &DerivedKind::Conditional {
                axis: 1,
                fixed: 2.0,
            },
            &QuadSpec::default(),
        )
        .unwrap();
        assert_relative_eq!(c.value(&[1.0]).unwrap(), f.value(&[1.0, 2.0]).unwrap());
        assert!(matches!(
            derived_density(
                &f,
                &DerivedKind::Conditional {
                    axis: 1,
                    fixed: 0.0
                },
                &QuadSpec::default()
            ),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn potential_marginal() {
        let f = catalog_density("bivariate_potential", &Params::default()).unwrap();
        let m =
            derived_density(&f, &DerivedKind::Marginal { axis: 0 }, &QuadSpec::default()).unwrap();
        for x in [0.1f64, 1.0, 10.0] {
            assert_relative_eq!(
                m.value(&[x]).unwrap(),
                0.5 * (1.0 + x).powi(-2),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn laplace_of_gamma() {
        let g = catalog_density("gamma", &Params::from_pairs(&[("alpha", 2.0)])).unwrap();
        let r = laplace_transform(&g, &[1.0], &QuadSpec::default()).unwrap();
        assert!(r.converged);
        assert_relative_eq!(r.value, 0.25, max_relative = 1e-10);
        let r = laplace_transform(&exp2(), &[1.0, 1.0], &QuadSpec::default()).unwrap();
        assert_relative_eq!(r.value, 0.25, max_relative = 1e-10);
        assert!(laplace_transform(&g, &[-1.0], &QuadSpec::default()).is_err());
    }

    #[test]
    fn counterexample_marginal() {
        let f =
            catalog_density("counterexample_density", &Params::from_pairs(&[("k", 2.0)])).unwrap();
        let m =
            derived_density(&f, &DerivedKind::Marginal { axis: 0 }, &QuadSpec::default()).unwrap();
        assert_relative_eq!(
            m.value(&[1.0]).unwrap(),
            (-1.0f64).exp() / 2.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn divergent_quotient_is_an_error() {
        let f = catalog_density(
            "bivariate_potential",
            &Params::from_pairs(&[("gamma", 2.0)]),
        )
        .unwrap();
        let q = derived_density(&f, &DerivedKind::Quotient, &QuadSpec::default()).unwrap();
        assert!(matches!(q.value(&[1.0]), Err(Error::Evaluation(_))));
    }
}
