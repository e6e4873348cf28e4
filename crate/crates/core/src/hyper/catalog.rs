use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{w_arity, BasePoint, Density};
use crate::cmcheck::FunctionHandle;
use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace};

pub const DENSITY_NAMES: [&str; 4] = [
    "gamma",
    "bivariate_potential",
    "example_density",
    "counterexample_density",
];
pub const WFORM_NAMES: [&str; 4] = ["eq2", "example_H", "gamma_sum_lt", "counterexample_product"];

/// Named real parameters; each value is a scalar or a vector.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(BTreeMap<String, Vec<f64>>);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl Serialize for Params {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m: BTreeMap<&str, OneOrMany> = self
            .0
            .iter()
            .map(|(k, v)| {
                let v = if v.len() == 1 {
                    OneOrMany::One(v[0])
                } else {
                    OneOrMany::Many(v.clone())
                };
                (k.as_str(), v)
            })
            .collect();
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Params {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = BTreeMap::<String, OneOrMany>::deserialize(d)?;
        Ok(Params(
            m.into_iter()
                .map(|(k, v)| match v {
                    OneOrMany::One(x) => (k, vec![x]),
                    OneOrMany::Many(xs) => (k, xs),
                })
                .collect(),
        ))
    }
}

impl Params {
    pub fn from_pairs(pairs: &[(&str, f64)]) -> Self {
        Params(
            pairs
                .iter()
                .map(|(k, v)| (k.to_string(), vec![*v]))
                .collect(),
        )
    }

    pub fn set(&mut self, name: &str, value: Vec<f64>) {
        self.0.insert(name.to_string(), value);
    }

    pub fn with(mut self, name: &str, value: Vec<f64>) -> Self {
        self.set(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.0.get(name).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Vec<f64>)> {
        self.0.iter()
    }

    /// Fill in every key of `defaults` missing from `self`.
    pub fn merged_over(&self, defaults: &Params) -> Params {
        let mut out = defaults.clone();
        for (k, v) in &self.0 {
            out.0.insert(k.clone(), v.clone());
        }
        out
    }

    pub fn scalar(&self, name: &str, default: f64) -> Result<f64> {
        match self.0.get(name) {
            None => Ok(default),
            Some(v) if v.len() == 1 => Ok(v[0]),
            Some(v) => Err(Error::BadParam(format!(
                "`{name}` must be a scalar, got {v:?}"
            ))),
        }
    }

    pub fn positive(&self, name: &str, default: f64) -> Result<f64> {
        let x = self.scalar(name, default)?;
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::BadParam(format!("`{name}` = {x} must be positive")));
        }
        Ok(x)
    }

    pub fn vector(&self, name: &str, default: &[f64]) -> Result<Vec<f64>> {
        let v = self
            .0
            .get(name)
            .cloned()
            .unwrap_or_else(|| default.to_vec());
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::BadParam(format!("`{name}` = {v:?} must be finite")));
        }
        Ok(v)
    }

    fn positive_vector(&self, name: &str, default: &[f64]) -> Result<Vec<f64>> {
        let v = self.vector(name, default)?;
        if v.is_empty() || v.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::BadParam(format!(
                "`{name}` = {v:?} must be nonempty and positive"
            )));
        }
        Ok(v)
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, v)| {
                if v.len() == 1 {
                    format!("{k}={}", v[0])
                } else {
                    format!("{k}={v:?}")
                }
            })
            .collect();
        f.write_str(&parts.join(","))
    }
}

pub fn catalog_density(name: &str, params: &Params) -> Result<Density> {
    match name {
        "gamma" => {
            let alpha = params.positive("alpha", 1.0)?;
            Ok(Density::new(
                1,
                format!("gamma(alpha={alpha})"),
                true,
                move |x| x[0].powf(alpha - 1.0) * (-x[0]).exp(),
            ))
        }
        "bivariate_potential" => {
            let alpha = params.positive("alpha", 1.0)?;
            let beta = params.positive("beta", 1.0)?;
            let a = params.positive("a", 1.0)?;
            let b = params.positive("b", 1.0)?;
            let gamma = params.positive("gamma", 3.0)?;
            let mut d = potential_density(&[alpha, beta], &[a, b], gamma)?;
            d = Density::from_evaluator(
                2,
                format!("bivariate_potential(alpha={alpha},beta={beta},a={a},b={b},gamma={gamma})"),
                d.integrable(),
                move |x| d.evaluate(x),
            );
            Ok(d)
        }
        "example_density" => {
            let k = params.positive("k", 2.0)?;
            let gamma = params.positive("gamma", 1.0)?;
            let c = params.positive("c", 1.0)?;
            Ok(Density::new(
                2,
                format!("example_density(k={k},gamma={gamma},c={c})"),
                gamma > 1.0,
                move |x| c * (1.0 + x[0] + x[1] + k * x[0] * x[1]).powf(-gamma),
            ))
        }
        "counterexample_density" => {
            let k = params.positive("k", 1.0)?;
            Ok(Density::new(
                2,
                format!("counterexample_density(k={k})"),
                false,
                move |x| (-x[0] - k * x[0] / x[1]).exp() / (x[1] * x[1]),
            ))
        }
        other => Err(Error::UnknownName(other.to_string())),
    }
}

/// `∏ x_i^{α_i - 1} · (1 + Σ a_i x_i)^{-γ}`.
pub fn potential_density(alpha: &[f64], a: &[f64], gamma: f64) -> Result<Density> {
    if alpha.is_empty() || alpha.len() != a.len() {
        return Err(Error::DimensionMismatch {
            expected: alpha.len(),
            got: a.len(),
        });
    }
    if alpha.iter().chain(a).any(|&c| !(c > 0.0)) || !(gamma > 0.0) {
        return Err(Error::BadParam(
            "potential density parameters must be positive".into(),
        ));
    }
    let integrable = gamma > alpha.iter().sum::<f64>();
    let (alpha, a) = (alpha.to_vec(), a.to_vec());
    let label = format!("potential(alpha={alpha:?},a={a:?},gamma={gamma})");
    Ok(Density::new(alpha.len(), label, integrable, move |x| {
        let lin: f64 = 1.0 + a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>();
        let pre: f64 = alpha
            .iter()
            .zip(x)
            .map(|(al, xi)| xi.powf(al - 1.0))
            .product();
        pre * lin.powf(-gamma)
    }))
}

/// `∏_j (1 + s_1 c_{1j} + s_2 c_{2j})^{-γ_j}`, the bivariate Laplace transform
/// of a finite sum of gamma variables times nonnegative direction vectors.
pub fn gamma_sum_laplace(c1: &[f64], c2: &[f64], gamma: &[f64]) -> Result<Density> {
    check_gamma_sum(c1, c2, gamma)?;
    let (c1, c2, gamma) = (c1.to_vec(), c2.to_vec(), gamma.to_vec());
    Ok(Density::new(2, "gamma_sum_laplace", false, move |s| {
        (0..gamma.len())
            .map(|j| (1.0 + s[0] * c1[j] + s[1] * c2[j]).powf(-gamma[j]))
            .product()
    }))
}

fn check_gamma_sum(c1: &[f64], c2: &[f64], gamma: &[f64]) -> Result<()> {
    if gamma.is_empty() || c1.len() != gamma.len() || c2.len() != gamma.len() {
        return Err(Error::BadParam(format!(
            "gamma_sum_lt needs c1, c2, gamma of equal nonzero length (got {}, {}, {})",
            c1.len(),
            c2.len(),
            gamma.len()
        )));
    }
    if c1.iter().chain(c2).any(|&c| !(c >= 0.0)) {
        return Err(Error::BadParam(
            "gamma_sum_lt coefficients must be nonnegative".into(),
        ));
    }
    if gamma.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::BadParam(
            "gamma_sum_lt shapes must be positive".into(),
        ));
    }
    for j in 0..gamma.len() {
        if c1[j] + c2[j] == 0.0 {
            return Err(Error::BadParam(format!(
                "gamma_sum_lt term {j} has a zero direction"
            )));
        }
    }
    Ok(())
}

/// A polynomial in the w-coordinates: `Σ coef · ∏ w_i^{e_i}`.
#[derive(Debug, Clone)]
struct Poly {
    terms: Vec<(f64, Vec<usize>)>,
}

impl Poly {
    fn affine(constant: f64, linear: &[f64]) -> Self {
        let m = linear.len();
        let mut terms = vec![(constant, vec![0; m])];
        for (i, &c) in linear.iter().enumerate() {
            if c != 0.0 {
                let mut e = vec![0; m];
                e[i] = 1;
                terms.push((c, e));
            }
        }
        Poly { terms }
    }

    fn value(&self, w: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                c * e
                    .iter()
                    .zip(w)
                    .map(|(&k, x)| x.powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }

    fn jet(&self, space: &JetSpace, vars: &[Jet]) -> Jet {
        let mut acc = space.constant(0.0);
        for (c, e) in &self.terms {
            let mut t = space.constant(*c);
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    t = space.mul(&t, &vars[i]);
                }
            }
            acc = space.add(&acc, &t);
        }
        acc
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    /// `scale · ∏_j P_j(w)^{-γ_j}`
    Powers {
        scale: f64,
        factors: Vec<(Poly, f64)>,
    },
    /// `scale · exp(-<λ, w>)`
    Exponential { scale: f64, rates: Vec<f64> },
}

const MAX_JET_ORDER: usize = 8;

/// An explicit function of the hyperbolic coordinates `(w_1..w_n, w_ij)`.
#[derive(Clone)]
pub struct WForm {
    name: String,
    n: usize,
    params: Params,
    u: BasePoint,
    cm_by_construction: bool,
    kernel: Arc<Kernel>,
    spaces: Arc<Vec<OnceLock<JetSpace>>>,
}

impl fmt::Debug for WForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WForm")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("params", &self.params)
            .field("u", &self.u)
            .finish()
    }
}

impl WForm {
    fn build(name: &str, n: usize, params: Params, u: BasePoint, cm: bool, kernel: Kernel) -> Self {
        Self {
            name: name.to_string(),
            n,
            params,
            u,
            cm_by_construction: cm,
            kernel: Arc::new(kernel),
            spaces: Arc::new((0..=MAX_JET_ORDER).map(|_| OnceLock::new()).collect()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        w_arity(self.n)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn base_point(&self) -> &BasePoint {
        &self.u
    }

    pub fn cm_by_construction(&self) -> bool {
        self.cm_by_construction
    }

    pub fn label(&self) -> String {
        format!("{}({}; u={:?})", self.name, self.params, self.u.as_slice())
    }

    fn check(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.arity() {
            return Err(Error::DimensionMismatch {
                expected: self.arity(),
                got: w.len(),
            });
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("{}: argument {w:?}", self.name)));
        }
        Ok(())
    }

    pub fn value(&self, w: &[f64]) -> Result<f64> {
        self.check(w)?;
        match &*self.kernel {
            Kernel::Powers { scale, factors } => {
                let mut out = *scale;
                for (p, g) in factors {
                    let base = p.value(w);
                    if !(base > 0.0) {
                        return Err(Error::Domain(format!(
                            "{}: base {base} is not positive at {w:?}",
                            self.name
                        )));
                    }
                    out *= base.powf(-g);
                }
                Ok(out)
            }
            Kernel::Exponential { scale, rates } => {
                Ok(scale * (-rates.iter().zip(w).map(|(r, x)| r * x).sum::<f64>()).exp())
            }
        }
    }

    /// `D^α H(w)`, exact up to rounding.
    pub fn partial(&self, w: &[f64], alpha: &[usize]) -> Result<f64> {
        self.check(w)?;
        if alpha.len() != self.arity() {
            return Err(Error::DimensionMismatch {
                expected: self.arity(),
                got: alpha.len(),
            });
        }
        let order: usize = alpha.iter().sum();
        if order > MAX_JET_ORDER {
            return Err(Error::BadParam(format!(
                "partial order {order} exceeds {MAX_JET_ORDER}"
            )));
        }
        let space = self.spaces[order].get_or_init(|| JetSpace::new(self.arity(), order));
        let vars: Vec<Jet> = w
            .iter()
            .enumerate()
            .map(|(i, &x)| space.variable(i, x))
            .collect();
        let jet = match &*self.kernel {
            Kernel::Powers { scale, factors } => {
                let mut acc = space.constant(*scale);
                for (p, g) in factors {
                    let base = p.jet(space, &vars);
                    if !(base.value() > 0.0) {
                        return Err(Error::Domain(format!(
                            "{}: base is not positive at {w:?}",
                            self.name
                        )));
                    }
                    acc = space.mul(&acc, &space.powf(&base, -g));
                }
                acc
            }
            Kernel::Exponential { scale, rates } => {
                let mut lin = space.constant(0.0);
                for (r, v) in rates.iter().zip(&vars) {
                    lin = space.add(&lin, &space.scale(v, -r));
                }
                space.scale(&space.exp(&lin), *scale)
            }
        };
        Ok(space
            .derivative(&jet, alpha)
            .expect("alpha within jet order"))
    }

    /// A CM-testable handle on `(0, ∞)^m`.
    pub fn handle(&self) -> FunctionHandle {
        let (a, b) = (self.clone(), self.clone());
        FunctionHandle::new_fallible(self.arity(), move |w| a.value(w))
            .with_partials(move |w, alpha| b.partial(w, alpha))
            .with_label(self.label())
    }
}

pub fn catalog_wform(name: &str, params: &Params, u: &BasePoint) -> Result<WForm> {
    let us = u.as_slice();
    let need = |n: usize| -> Result<()> {
        if us.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: us.len(),
            });
        }
        Ok(())
    };
    match name {
        "eq2" => {
            let n = us.len();
            let alpha = params.positive_vector("alpha", &vec![1.0; n])?;
            let a = params.positive_vector("a", &vec![1.0; n])?;
            let gamma = params.positive("gamma", 1.0)?;
            if alpha.len() != n || a.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: alpha.len().min(a.len()),
                });
            }
            let scale: f64 = alpha
                .iter()
                .zip(us)
                .map(|(al, ui)| ui.powf(2.0 * (al - 1.0)))
                .product();
            let p: Vec<f64> = a.iter().zip(us).map(|(ai, ui)| ai * ui).collect();
            let constant = 1.0 + p.iter().map(|x| x * x).sum::<f64>();
            let mut linear = p.clone();
            for i in 0..n {
                for j in i + 1..n {
                    linear.push(p[i] * p[j]);
                }
            }
            let resolved = Params::default()
                .with("alpha", alpha)
                .with("a", a)
                .with("gamma", vec![gamma]);
            Ok(WForm::build(
                name,
                n,
                resolved,
                u.clone(),
                true,
                Kernel::Powers {
                    scale,
                    factors: vec![(Poly::affine(constant, &linear), gamma)],
                },
            ))
        }
        "example_H" => {
            need(2)?;
            let k = params.positive("k", 2.0)?;
            let gamma = params.positive("gamma", 1.0)?;
            let c = params.positive("c", 1.0)?;
            let (u1, u2) = (us[0], us[1]);
            let constant = 1.0 + u1 * u1 + u2 * u2 + k * k * u1 * u1 * u2 * u2;
            let mut poly = Poly::affine(
                constant,
                &[
                    u1 + k * u1 * u2 * u2,
                    u2 + k * u1 * u1 * u2,
                    u1 * u2 * (1.0 - k),
                ],
            );
            poly.terms.push((k * u1 * u2, vec![1, 1, 0]));
            let resolved = Params::from_pairs(&[("k", k), ("gamma", gamma), ("c", c)]);
            Ok(WForm::build(
                name,
                2,
                resolved,
                u.clone(),
                false,
                Kernel::Powers {
                    scale: c * c,
                    factors: vec![(poly, gamma)],
                },
            ))
        }
        "gamma_sum_lt" => {
            need(2)?;
            let c1 = params.vector("c1", &[1.0])?;
            let c2 = params.vector("c2", &[1.0])?;
            let gamma = params.vector("gamma", &vec![1.0; c1.len()])?;
            check_gamma_sum(&c1, &c2, &gamma)?;
            let factors = (0..gamma.len())
                .map(|j| {
                    let (a, b) = (us[0] * c1[j], us[1] * c2[j]);
                    (Poly::affine(1.0 + a * a + b * b, &[a, b, a * b]), gamma[j])
                })
                .collect();
            let resolved = Params::default()
                .with("c1", c1)
                .with("c2", c2)
                .with("gamma", gamma);
            Ok(WForm::build(
                name,
                2,
                resolved,
                u.clone(),
                true,
                Kernel::Powers {
                    scale: 1.0,
                    factors,
                },
            ))
        }
        "counterexample_product" => {
            need(2)?;
            let k = params.positive("k", 1.0)?;
            let (u1, u2) = (us[0], us[1]);
            Ok(WForm::build(
                name,
                2,
                Params::from_pairs(&[("k", k)]),
                u.clone(),
                true,
                Kernel::Exponential {
                    scale: u2.powi(-4),
                    rates: vec![u1, 0.0, k * u1 / u2],
                },
            ))
        }
        other => Err(Error::UnknownName(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyper::{hyperbolic_product, v_to_w};
    use approx::assert_relative_eq;

    #[test]
    fn density_values() {
        let g = catalog_density("gamma", &Params::from_pairs(&[("alpha", 1.0)])).unwrap();
        assert_relative_eq!(g.value(&[2.0]).unwrap(), (-2.0f64).exp());
        let c =
            catalog_density("counterexample_density", &Params::from_pairs(&[("k", 3.0)])).unwrap();
        assert_relative_eq!(
            c.value(&[1.0, 2.0]).unwrap(),
            0.25 * (-2.5f64).exp(),
            max_relative = 1e-15
        );
        assert!(!c.integrable());
        let e = catalog_density(
            "example_density",
            &Params::from_pairs(&[("k", 2.0), ("gamma", 1.0), ("c", 1.0)]),
        )
        .unwrap();
        assert_relative_eq!(e.value(&[1.0, 1.0]).unwrap(), 0.2);
        let b = catalog_density("bivariate_potential", &Params::default()).unwrap();
        assert!(b.integrable());
        assert_relative_eq!(b.value(&[1.0, 1.0]).unwrap(), 1.0 / 27.0);
    }

    #[test]
    fn unknown_and_bad() {
        assert!(matches!(
            catalog_density("beta", &Params::default()),
            Err(Error::UnknownName(_))
        ));
        assert!(matches!(
            catalog_density("gamma", &Params::from_pairs(&[("alpha", -1.0)])),
            Err(Error::BadParam(_))
        ));
        assert!(matches!(
            catalog_wform("nope", &Params::default(), &BasePoint::ones(2)),
            Err(Error::UnknownName(_))
        ));
    }

    #[test]
    fn example_h_unit_coefficients() {
        let h = catalog_wform(
            "example_H",
            &Params::from_pairs(&[("k", 2.0), ("gamma", 1.0)]),
            &BasePoint::ones(2),
        )
        .unwrap();
        let w = [0.4, 1.3, 0.7];
        let expect = 1.0 / (7.0 + 3.0 * w[0] + 3.0 * w[1] + 2.0 * w[0] * w[1] - w[2]);
        assert_relative_eq!(h.value(&w).unwrap(), expect, max_relative = 1e-15);
        assert!(h.partial(&w, &[0, 0, 1]).unwrap() > 0.0);
    }

    #[test]
    fn eq2_unit_parameters() {
        let h = catalog_wform("eq2", &Params::default(), &BasePoint::ones(2)).unwrap();
        let w = [2.0, 3.0, 4.0];
        assert_relative_eq!(h.value(&w).unwrap(), 1.0 / 12.0, max_relative = 1e-15);
    }

    #[test]
    fn gamma_sum_single_term() {
        let h = catalog_wform("gamma_sum_lt", &Params::default(), &BasePoint::ones(2)).unwrap();
        assert_relative_eq!(
            h.value(&[1.0, 2.0, 3.0]).unwrap(),
            1.0 / 9.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn partials_match_closed_form() {
        let h = catalog_wform(
            "eq2",
            &Params::from_pairs(&[("gamma", 2.0)]),
            &BasePoint::ones(2),
        )
        .unwrap();
        let w = [0.5, 1.0, 1.5];
        let l: f64 = 3.0 + w.iter().sum::<f64>();
        assert_relative_eq!(
            h.partial(&w, &[0, 0, 0]).unwrap(),
            l.powi(-2),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            h.partial(&w, &[1, 0, 0]).unwrap(),
            -2.0 * l.powi(-3),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            h.partial(&w, &[1, 1, 1]).unwrap(),
            -24.0 * l.powi(-5),
            max_relative = 1e-13
        );
        let cp = catalog_wform(
            "counterexample_product",
            &Params::from_pairs(&[("k", 3.0)]),
            &BasePoint::new(vec![2.0, 0.5]).unwrap(),
        )
        .unwrap();
        let v = cp.value(&w).unwrap();
        assert_relative_eq!(
            cp.partial(&w, &[0, 0, 2]).unwrap(),
            144.0 * v,
            max_relative = 1e-13
        );
        assert_eq!(cp.partial(&w, &[0, 1, 0]).unwrap(), 0.0);
    }

    #[test]
    fn fidelity_spot_checks() {
        let u = BasePoint::new(vec![0.8, 1.7]).unwrap();
        let v = [1.3, 2.9];
        let w = v_to_w(&v).unwrap().flatten();
        let pairs: [(&str, Density, Params); 3] = [
            (
                "eq2",
                potential_density(&[1.5, 2.0], &[0.7, 1.2], 1.3).unwrap(),
                Params::default()
                    .with("alpha", vec![1.5, 2.0])
                    .with("a", vec![0.7, 1.2])
                    .with("gamma", vec![1.3]),
            ),
            (
                "counterexample_product",
                catalog_density("counterexample_density", &Params::from_pairs(&[("k", 4.0)]))
                    .unwrap(),
                Params::from_pairs(&[("k", 4.0)]),
            ),
            (
                "example_H",
                catalog_density(
                    "example_density",
                    &Params::from_pairs(&[("k", 3.0), ("gamma", 0.7), ("c", 2.0)]),
                )
                .unwrap(),
                Params::from_pairs(&[("k", 3.0), ("gamma", 0.7), ("c", 2.0)]),
            ),
        ];
        for (name, f, p) in pairs {
            let direct = hyperbolic_product(&f, &u).unwrap().value(&v).unwrap();
            let form = catalog_wform(name, &p, &u).unwrap().value(&w).unwrap();
            assert_relative_eq!(form, direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn params_display_and_merge() {
        let p = Params::from_pairs(&[("k", 2.0)]).with("c1", vec![1.0, 0.5]);
        assert_eq!(p.to_string(), "c1=[1.0, 0.5],k=2");
        let merged = Params::from_pairs(&[("k", 5.0)]).merged_over(&p);
        assert_eq!(merged.scalar("k", 0.0).unwrap(), 5.0);
        assert_eq!(merged.get("c1").unwrap(), &[1.0, 0.5]);
        assert!(merged.scalar("c1", 0.0).is_err());
    }
}
