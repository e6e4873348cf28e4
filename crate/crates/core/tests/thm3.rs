use hcm_core::scenarios::{
    thm3_derivatives, thm3_dual_check, thm3_j13_scaled, thm3_j_direct, thm3_j_repr_scaled,
    thm3_quad, Kappa1, ScaledQuad,
};
use hcm_core::{run_scenario, v_to_w, ScenarioConfig};
use hcm_oracle::counterexample_j;

const POINTS: [[f64; 2]; 5] = [[1.0, 1.0], [2.0, 3.0], [3.0, 2.0], [1.5, 1.5], [5.0, 1.0]];

#[test]
fn dual_computation_identity() {
    let spec = thm3_quad();
    for k in [1.0, 5.0] {
        for v in POINTS {
            let d = thm3_dual_check(v, k, Kappa1::KSquared, &spec).unwrap();
            assert!(d.direct.converged, "{d:?}");
            let w = v_to_w(&v).unwrap().flatten();
            assert_eq!(d.w, [w[0], w[2]]);
            assert!(
                d.relative_difference <= d.combined_relative_error.max(1e-6),
                "v={v:?} k={k}: {:e} vs allowed {:e}",
                d.relative_difference,
                d.combined_relative_error
            );
        }
    }
}

#[test]
fn direct_product_density_matches_the_bessel_form() {
    let spec = thm3_quad();
    for (v, k) in [([1.0, 1.0], 1.0), ([2.0, 0.5], 3.0), ([0.7, 1.8], 10.0)] {
        let r = thm3_j_direct(v[0], v[1], k, &spec).unwrap();
        let exact = counterexample_j(v[0], v[1], k);
        assert!(
            ((r.value - exact) / exact).abs() < 1e-5,
            "{v:?} {k}: {} vs {exact}",
            r.value
        );
    }
}

fn value(r: &ScaledQuad, log_ref: f64) -> (f64, f64) {
    // true value is result · exp(-log_scale)
    let s = (log_ref - r.log_scale).exp();
    (r.result.value * s, r.result.error_estimate * s)
}

#[test]
fn representation_is_positive_and_decreasing() {
    let spec = thm3_quad();
    let h = 0.25;
    for k in [1.0, 10.0] {
        for (w1, w3) in [(0.05, 0.05), (0.5, 2.0), (2.0, 0.5)] {
            let j = thm3_j_repr_scaled(w1, w3, k, Kappa1::KSquared, &spec).unwrap();
            let j1 = thm3_j_repr_scaled(w1 + h, w3, k, Kappa1::KSquared, &spec).unwrap();
            let j3 = thm3_j_repr_scaled(w1, w3 + h, k, Kappa1::KSquared, &spec).unwrap();
            let (a, ea) = value(&j, j.log_scale);
            let (b, eb) = value(&j1, j.log_scale);
            let (c, ec) = value(&j3, j.log_scale);
            assert!(a > 0.0 && b > 0.0 && c > 0.0);
            assert!(b - a <= ea + eb, "k={k} ({w1},{w3}): not decreasing in w1");
            assert!(c - a <= ea + ec, "k={k} ({w1},{w3}): not decreasing in w3");
        }
    }
}

#[test]
fn mixed_derivative_is_continuous_in_k() {
    let spec = thm3_quad();
    let ks = [3.0, 3.05, 3.1, 3.15, 3.2];
    let rs: Vec<ScaledQuad> = ks
        .iter()
        .map(|&k| thm3_j13_scaled(0.01, 0.01, k, Kappa1::KSquared, &spec).unwrap())
        .collect();
    assert!(rs.iter().all(|r| r.result.converged));
    let reference = rs[0].log_scale;
    let v: Vec<(f64, f64)> = rs.iter().map(|r| value(r, reference)).collect();
    for i in 1..v.len() - 1 {
        let (d0, d1) = (v[i].0 - v[i - 1].0, v[i + 1].0 - v[i].0);
        let bars = v[i - 1].1 + v[i].1 + v[i + 1].1;
        assert!(
            (d1 - d0).abs() <= 10.0 * bars + 0.5 * d0.abs().max(d1.abs()),
            "jump at k = {}: increments {d0:e}, {d1:e}, error bars {bars:e}",
            ks[i]
        );
    }
}

#[test]
fn representation_factors_in_w1_and_w3() {
    let spec = thm3_quad();
    for (w1, w3, k) in [(0.01, 0.01, 10.0), (0.5, 2.0, 1.0)] {
        let d = thm3_derivatives(w1, w3, k, Kappa1::KSquared, &spec).unwrap();
        assert!(d.j13.value > 0.0);
        assert!(
            d.factorization_residual().abs() < 1e-5,
            "({w1},{w3}) k={k}: {:e}",
            d.factorization_residual()
        );
    }
}

#[test]
fn scenario_verdicts_ignore_density_scale() {
    for name in ["example_not_bvhcm", "prop1bc", "thm1"] {
        let base = ScenarioConfig::preset(name).unwrap();
        let r = run_scenario(name, &base).unwrap();
        for scale in [1e-3, 1e4] {
            let mut c = base.clone();
            c.scenario.scale = scale;
            let s = run_scenario(name, &c).unwrap();
            assert_eq!(r.outcome, s.outcome, "{name} at scale {scale}");
            assert_eq!(r.cm_verdict, s.cm_verdict, "{name} at scale {scale}");
            let passed =
                |x: &hcm_core::ScenarioResult| x.steps.iter().map(|s| s.passed).collect::<Vec<_>>();
            assert_eq!(passed(&r), passed(&s), "{name} at scale {scale}");
        }
    }
}

#[test]
fn scenarios_are_deterministic() {
    for name in ["thm2", "example_not_bvhcm"] {
        let c = ScenarioConfig::preset(name).unwrap();
        let a = run_scenario(name, &c).unwrap();
        let b = run_scenario(name, &c).unwrap();
        assert_eq!(format!("{:?}", a.steps), format!("{:?}", b.steps));
        assert_eq!(a.summary, b.summary);
    }
}
