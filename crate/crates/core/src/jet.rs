//! Truncated multivariate Taylor polynomials.
//!
//! Analytic partial derivatives of the catalog forms are obtained by
//! evaluating the closed form on jets: every arithmetic operation acts on the
//! Taylor coefficients up to a fixed total order, and `D^α f(x)` is read off
//! as `α! · c_α`.

/// The set of monomials of total degree `<= order` in `vars` variables,
/// together with a precomputed product table.
#[derive(Debug, Clone)]
pub struct JetSpace {
    vars: usize,
    order: usize,
    monomials: Vec<Vec<usize>>,
    products: Vec<(usize, usize, usize)>,
}

/// Coefficients of a truncated Taylor polynomial in a [`JetSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coef: Vec<f64>,
}

impl JetSpace {
    pub fn new(vars: usize, order: usize) -> Self {
        let mut monomials = Vec::new();
        for total in 0..=order {
            let mut current = vec![0; vars];
            push_with_total(&mut monomials, &mut current, 0, total);
        }
        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                let total: usize = a.iter().sum::<usize>() + b.iter().sum::<usize>();
                if total > order {
                    continue;
                }
                let sum: Vec<usize> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let k = monomials
                    .iter()
                    .position(|m| *m == sum)
                    .expect("closed under addition below order");
                products.push((i, j, k));
            }
        }
        Self {
            vars,
            order,
            monomials,
            products,
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index_of(&self, alpha: &[usize]) -> Option<usize> {
        self.monomials.iter().position(|m| m == alpha)
    }

    pub fn constant(&self, c: f64) -> Jet {
        let mut coef = vec![0.0; self.len()];
        coef[0] = c;
        Jet { coef }
    }

    /// The coordinate function `x_i` expanded around `x0`.
    pub fn variable(&self, i: usize, x0: f64) -> Jet {
        let mut jet = self.constant(x0);
        if self.order > 0 {
            let mut alpha = vec![0; self.vars];
            alpha[i] = 1;
            let k = self.index_of(&alpha).expect("first-order monomial");
            jet.coef[k] = 1.0;
        }
        jet
    }

    pub fn add(&self, a: &Jet, b: &Jet) -> Jet {
        Jet {
            coef: a.coef.iter().zip(&b.coef).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn scale(&self, a: &Jet, c: f64) -> Jet {
        Jet {
            coef: a.coef.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul(&self, a: &Jet, b: &Jet) -> Jet {
        let mut coef = vec![0.0; self.len()];
        for &(i, j, k) in &self.products {
            coef[k] += a.coef[i] * b.coef[j];
        }
        Jet { coef }
    }

    /// `a^p` for a jet with positive constant term.
    pub fn powf(&self, a: &Jet, p: f64) -> Jet {
        let a0 = a.coef[0];
        let delta = self.scale(&self.without_constant(a), 1.0 / a0);
        // (1 + d)^p = sum_j binom(p, j) d^j
        let mut term = self.constant(1.0);
        let mut out = self.constant(1.0);
        let mut binom = 1.0;
        for j in 1..=self.order {
            binom *= (p - (j as f64 - 1.0)) / j as f64;
            term = self.mul(&term, &delta);
            out = self.add(&out, &self.scale(&term, binom));
        }
        self.scale(&out, a0.powf(p))
    }

    pub fn exp(&self, a: &Jet) -> Jet {
        let delta = self.without_constant(a);
        let mut term = self.constant(1.0);
        let mut out = self.constant(1.0);
        for j in 1..=self.order {
            term = self.scale(&self.mul(&term, &delta), 1.0 / j as f64);
            out = self.add(&out, &term);
        }
        self.scale(&out, a.coef[0].exp())
    }

    /// `D^α` of the expanded function at the expansion point.
    pub fn derivative(&self, a: &Jet, alpha: &[usize]) -> Option<f64> {
        let k = self.index_of(alpha)?;
        let factorial: f64 = alpha
            .iter()
            .map(|&n| (1..=n).map(|i| i as f64).product::<f64>())
            .product();
        Some(a.coef[k] * factorial)
    }

    fn without_constant(&self, a: &Jet) -> Jet {
        let mut out = a.clone();
        out.coef[0] = 0.0;
        out
    }
}

impl Jet {
    pub fn value(&self) -> f64 {
        self.coef[0]
    }
}

fn push_with_total(out: &mut Vec<Vec<usize>>, current: &mut Vec<usize>, pos: usize, left: usize) {
    if pos + 1 == current.len() {
        current[pos] = left;
        out.push(current.clone());
        return;
    }
    for take in (0..=left).rev() {
        current[pos] = take;
        push_with_total(out, current, pos + 1, left - take);
    }
    current[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn monomial_count() {
        assert_eq!(JetSpace::new(3, 4).len(), 35);
        assert_eq!(JetSpace::new(1, 3).len(), 4);
    }

    #[test]
    fn power_of_affine_form() {
        // f = (1 + 2x + 3y)^-2 at (1, 1): L = 6
        let sp = JetSpace::new(2, 3);
        let x = sp.variable(0, 1.0);
        let y = sp.variable(1, 1.0);
        let l = sp.add(
            &sp.add(&sp.constant(1.0), &sp.scale(&x, 2.0)),
            &sp.scale(&y, 3.0),
        );
        let f = sp.powf(&l, -2.0);
        assert_relative_eq!(f.value(), 1.0 / 36.0, max_relative = 1e-14);
        // d/dx = -2 * 2 * L^-3
        assert_relative_eq!(
            sp.derivative(&f, &[1, 0]).unwrap(),
            -4.0 / 216.0,
            max_relative = 1e-13
        );
        // d2/dxdy = (-2)(-3) * 2 * 3 * L^-4
        assert_relative_eq!(
            sp.derivative(&f, &[1, 1]).unwrap(),
            36.0 / 1296.0,
            max_relative = 1e-13
        );
        // d3/dy3 = (-2)(-3)(-4) * 27 * L^-5
        assert_relative_eq!(
            sp.derivative(&f, &[0, 3]).unwrap(),
            -24.0 * 27.0 / 7776.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn exponential_of_linear_form() {
        let sp = JetSpace::new(2, 4);
        let x = sp.variable(0, 0.5);
        let y = sp.variable(1, 2.0);
        let f = sp.exp(&sp.add(&sp.scale(&x, -1.5), &sp.scale(&y, -0.25)));
        let base = (-0.75f64 - 0.5).exp();
        assert_relative_eq!(
            sp.derivative(&f, &[2, 2]).unwrap(),
            base * 1.5f64.powi(2) * 0.0625,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            sp.derivative(&f, &[1, 0]).unwrap(),
            -1.5 * base,
            max_relative = 1e-12
        );
    }
}
