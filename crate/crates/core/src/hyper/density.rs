use std::fmt;
use std::sync::Arc;

use crate::cmcheck::{EvalFn, Evaluation};
use crate::error::{Error, Result};

/// A nonnegative function on the open positive orthant.
///
/// Normalization is not required; `integrable` is metadata only.
#[derive(Clone)]
pub struct Density {
    dimension: usize,
    label: String,
    integrable: bool,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density")
            .field("label", &self.label)
            .field("dimension", &self.dimension)
            .field("integrable", &self.integrable)
            .finish()
    }
}

impl Density {
    pub fn new<F>(dimension: usize, label: impl Into<String>, integrable: bool, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::from_evaluator(dimension, label, integrable, move |x| {
            Ok(Evaluation::exact(f(x)))
        })
    }

    pub fn from_evaluator<F>(
        dimension: usize,
        label: impl Into<String>,
        integrable: bool,
        f: F,
    ) -> Self
    where
        F: Fn(&[f64]) -> Result<Evaluation> + Send + Sync + 'static,
    {
        Self {
            dimension,
            label: label.into(),
            integrable,
            eval: Arc::new(f),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn integrable(&self) -> bool {
        self.integrable
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        if x.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Domain(format!(
                "{}: {x:?} is not in the open positive orthant",
                self.label
            )));
        }
        let e = (self.eval)(x)?;
        if !e.value.is_finite() {
            return Err(Error::NonFinite(format!(
                "{} at {x:?} = {}",
                self.label, e.value
            )));
        }
        if e.value < 0.0 {
            return Err(Error::Domain(format!(
                "{} is negative ({}) at {x:?}",
                self.label, e.value
            )));
        }
        Ok(e)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.evaluate(x).map(|e| e.value)
    }

    pub fn scaled(&self, c: f64) -> Density {
        let inner = self.eval.clone();
        Density::from_evaluator(
            self.dimension,
            format!("{c}*{}", self.label),
            self.integrable,
            move |x| inner(x).map(|e| e.scale(c)),
        )
    }

    /// `a(x) · b(y)` on the product orthant.
    pub fn tensor(a: &Density, b: &Density) -> Density {
        let (a, b) = (a.clone(), b.clone());
        let na = a.dimension;
        Density::from_evaluator(
            a.dimension + b.dimension,
            format!("{}⊗{}", a.label, b.label),
            a.integrable && b.integrable,
            move |x| {
                let ea = a.evaluate(&x[..na])?;
                let eb = b.evaluate(&x[na..])?;
                Ok(product_eval(ea, eb))
            },
        )
    }
}

/// Value and first-order noise of a product of two evaluations.
pub(crate) fn product_eval(a: Evaluation, b: Evaluation) -> Evaluation {
    Evaluation {
        value: a.value * b.value,
        noise: a.value.abs() * b.noise + b.value.abs() * a.noise + a.noise * b.noise,
    }
}
