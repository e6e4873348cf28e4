//! Closed-form reference values for the test suites.
//!
//! Nothing here depends on the library under test. The Bessel functions use
//! the power series below 2 and the integral `K_ν(x) = ∫₀^∞ e^{-x cosh t}
//! cosh(νt) dt` on a fine fixed trapezoid above.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn series_k0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let lead = -((0.5 * x).ln() + EULER_GAMMA);
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut rest = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        rest += term * harmonic;
        if term < 1e-18 * i0 {
            break;
        }
    }
    lead * i0 + rest
}

fn series_k1(x: f64) -> f64 {
    let q = 0.25 * x * x;
    // ψ(k+1) + ψ(k+2) at k = 0
    let mut psi1 = -EULER_GAMMA;
    let mut psi2 = 1.0 - EULER_GAMMA;
    let mut term = 1.0;
    let mut i1 = 0.5 * x;
    let mut sum = psi1 + psi2;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        psi1 += 1.0 / kf;
        psi2 += 1.0 / (kf + 1.0);
        i1 += 0.5 * x * term;
        sum += term * (psi1 + psi2);
        if term < 1e-18 {
            break;
        }
    }
    1.0 / x + (0.5 * x).ln() * i1 - 0.25 * x * sum
}

fn integral_k(nu: f64, x: f64) -> f64 {
    let h = 1.0 / 64.0;
    let mut sum = 0.5 * (-x).exp();
    let mut t: f64 = h;
    loop {
        let v = (-x * t.cosh()).exp() * (nu * t).cosh();
        sum += v;
        if v < 1e-300 || v < 1e-19 * sum {
            break;
        }
        t += h;
    }
    sum * h
}

/// Modified Bessel function of the second kind, order 0.
pub fn bessel_k0(x: f64) -> f64 {
    assert!(x > 0.0, "K0 needs x > 0");
    if x <= 2.0 {
        series_k0(x)
    } else {
        integral_k(0.0, x)
    }
}

/// Modified Bessel function of the second kind, order 1.
pub fn bessel_k1(x: f64) -> f64 {
    assert!(x > 0.0, "K1 needs x > 0");
    if x <= 2.0 {
        series_k1(x)
    } else {
        integral_k(1.0, x)
    }
}

/// `∫₀^∞ e^{-s - x/s} ds/s = 2 K₀(2√x)`.
pub fn exp_reciprocal_integral(x: f64) -> f64 {
    2.0 * bessel_k0(2.0 * x.sqrt())
}

/// `∫₀^∞ e^{-a/t - t} dt/t² = 2 a^{-1/2} K₁(2√a)`.
pub fn exp_reciprocal_integral_t2(a: f64) -> f64 {
    2.0 * bessel_k1(2.0 * a.sqrt()) / a.sqrt()
}

/// Product density of two independent `(e^{-x-y})` vectors:
/// `4 K₀(2√x) K₀(2√y)`.
pub fn exponential_product_density(x: f64, y: f64) -> f64 {
    4.0 * bessel_k0(2.0 * x.sqrt()) * bessel_k0(2.0 * y.sqrt())
}

/// Product density of two independent vectors with density
/// `y^{-2} e^{-x - kx/y}`: `4 y^{-2} K₀(2√x) K₀(2k√(x/y))`.
pub fn counterexample_product_density(x: f64, y: f64, k: f64) -> f64 {
    4.0 / (y * y) * bessel_k0(2.0 * x.sqrt()) * bessel_k0(2.0 * k * (x / y).sqrt())
}

/// `F(v₁, v₂) · F(1/v₁, 1/v₂)` for the counterexample product density.
pub fn counterexample_j(v1: f64, v2: f64, k: f64) -> f64 {
    counterexample_product_density(v1, v2, k)
        * counterexample_product_density(1.0 / v1, 1.0 / v2, k)
}

/// Marginal in `x` of `(1 + x + y)^{-3}`.
pub fn potential_marginal(x: f64) -> f64 {
    0.5 * (1.0 + x).powi(-2)
}

/// `(1 + a + b + k ab)(1 + a' + b' + k a' b')` raised to `-γ`, times `c²`,
/// with `a = u₁v₁, a' = u₁/v₁, b = u₂v₂, b' = u₂/v₂`, unexpanded.
pub fn example_h_raw(u: [f64; 2], v: [f64; 2], k: f64, gamma: f64, c: f64) -> f64 {
    let f = |x: f64, y: f64| c * (1.0 + x + y + k * x * y).powf(-gamma);
    f(u[0] * v[0], u[1] * v[1]) * f(u[0] / v[0], u[1] / v[1])
}

/// `∏_j [(1 + A_j v₁ + B_j v₂)(1 + A_j/v₁ + B_j/v₂)]^{-γ_j}` with
/// `A_j = u₁ c_{1j}`, `B_j = u₂ c_{2j}`, unexpanded.
pub fn gamma_sum_raw(u: [f64; 2], v: [f64; 2], c1: &[f64], c2: &[f64], gamma: &[f64]) -> f64 {
    (0..gamma.len())
        .map(|j| {
            let (a, b) = (u[0] * c1[j], u[1] * c2[j]);
            ((1.0 + a * v[0] + b * v[1]) * (1.0 + a / v[0] + b / v[1])).powf(-gamma[j])
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn k0_reference_values() {
        for (x, k0) in [
            (0.1, 2.427_069_024_702_017),
            (1.0, 0.421_024_438_240_708_34),
            (2.0, 0.113_893_872_749_533_44),
            (2.5, 0.062_347_553_200_366_17),
            (5.0, 0.003_691_098_334_042_594),
            (20.0, 5.741_237_815_336_524e-10),
        ] {
            assert!(close(bessel_k0(x), k0, 1e-13), "K0({x}) = {}", bessel_k0(x));
        }
    }

    #[test]
    fn k1_reference_values() {
        for (x, k1) in [
            (0.1, 9.853_844_780_870_606),
            (1.0, 0.601_907_230_197_234_6),
            (2.0, 0.139_865_881_816_522_43),
            (2.5, 0.073_890_816_347_747_05),
            (5.0, 0.004_044_613_445_452_164),
        ] {
            assert!(close(bessel_k1(x), k1, 1e-13), "K1({x}) = {}", bessel_k1(x));
        }
    }

    #[test]
    fn branches_agree_at_the_switch() {
        for x in [1.5, 2.0, 2.5] {
            assert!(close(series_k0(x), integral_k(0.0, x), 1e-13));
            assert!(close(series_k1(x), integral_k(1.0, x), 1e-13));
        }
    }

    #[test]
    fn composite_values() {
        assert!(close(
            exp_reciprocal_integral(1.0),
            0.227_787_745_499_066_8,
            1e-13
        ));
        assert!(close(
            exponential_product_density(1.0, 1.0),
            0.051_887_256_999_547_6,
            1e-12
        ));
        assert!(close(
            exp_reciprocal_integral_t2(2.0),
            0.069_833_737_007_646_56,
            1e-13
        ));
    }
}
