use hcm_core::{
    catalog_density, catalog_wform, cm_test, hyperbolic_product, transform_density, v_to_w, Axis,
    BasePoint, CmSettings, Density, GridSpec, MultiIndex, Params, StepSpec, TransformKind, Verdict,
};
use hcm_oracle::{example_h_raw, gamma_sum_raw};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn catalog(idx: usize, k: f64, g: f64) -> Density {
    match idx {
        0 => catalog_density("gamma", &Params::from_pairs(&[("alpha", g)])).unwrap(),
        1 => catalog_density(
            "bivariate_potential",
            &Params::from_pairs(&[
                ("alpha", g),
                ("beta", 1.5),
                ("a", k),
                ("b", 0.5),
                ("gamma", 2.0 + g),
            ]),
        )
        .unwrap(),
        2 => catalog_density(
            "example_density",
            &Params::from_pairs(&[("k", k), ("gamma", g)]),
        )
        .unwrap(),
        _ => catalog_density("counterexample_density", &Params::from_pairs(&[("k", k)])).unwrap(),
    }
}

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..5.0, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hyperbolic_product_is_inversion_symmetric(
        idx in 0usize..4, k in 0.2f64..5.0, g in 0.5f64..3.0, u in point(2), v in point(2),
    ) {
        let f = catalog(idx, k, g);
        let n = f.dimension();
        let phi = hyperbolic_product(&f, &BasePoint::new(u[..n].to_vec()).unwrap()).unwrap();
        let inv: Vec<f64> = v[..n].iter().map(|x| 1.0 / x).collect();
        let (a, b) = (phi.value(&v[..n]).unwrap(), phi.value(&inv).unwrap());
        // one ulp in an exponent of size |ln a| moves the value by |ln a|·ε
        let tol = 1e-13 + 8.0 * f64::EPSILON * a.ln().abs();
        prop_assert!(close(a, b, tol), "{a:e} vs {b:e}");
    }

    #[test]
    fn w_forms_match_the_sampled_products(
        u in point(2),
        v in prop::collection::vec(1.0f64..6.0, 2),
        k in 0.2f64..5.0,
        g in 0.3f64..3.0,
        c in prop::collection::vec(0.1f64..2.0, 4),
    ) {
        let bp = BasePoint::new(u.clone()).unwrap();
        let w = v_to_w(&v).unwrap().flatten();

        let p = Params::default().with("alpha", vec![1.5, 2.0 + g]).with("a", vec![c[0], c[1]]).with("gamma", vec![g]);
        let eq2 = catalog_wform("eq2", &p, &bp).unwrap().value(&w).unwrap();
        let f = |x: f64, y: f64| x.powf(0.5) * y.powf(1.0 + g) * (1.0 + c[0] * x + c[1] * y).powf(-g);
        let direct = f(u[0] * v[0], u[1] * v[1]) * f(u[0] / v[0], u[1] / v[1]);
        prop_assert!(close(eq2, direct, 1e-12), "eq2 {eq2:e} vs {direct:e}");

        let cp = catalog_wform("counterexample_product", &Params::from_pairs(&[("k", k)]), &bp).unwrap().value(&w).unwrap();
        let f = |x: f64, y: f64| (-x - k * x / y).exp() / (y * y);
        let direct = f(u[0] * v[0], u[1] * v[1]) * f(u[0] / v[0], u[1] / v[1]);
        prop_assert!(
            close(cp, direct, 1e-12 + 8.0 * f64::EPSILON * cp.ln().abs()),
            "counterexample {cp:e} vs {direct:e}"
        );

        let (c1, c2, gs) = ([c[0], c[2]], [c[1], c[3]], [g, 0.5 * g + 0.2]);
        let p = Params::default().with("c1", c1.to_vec()).with("c2", c2.to_vec()).with("gamma", gs.to_vec());
        let gsum = catalog_wform("gamma_sum_lt", &p, &bp).unwrap().value(&w).unwrap();
        let direct = gamma_sum_raw([u[0], u[1]], [v[0], v[1]], &c1, &c2, &gs);
        prop_assert!(close(gsum, direct, 1e-12), "gamma_sum {gsum:e} vs {direct:e}");

        let p = Params::from_pairs(&[("k", k), ("gamma", g), ("c", c[0])]);
        let h = catalog_wform("example_H", &p, &bp).unwrap().value(&w).unwrap();
        let direct = example_h_raw([u[0], u[1]], [v[0], v[1]], k, g, c[0]);
        prop_assert!(close(h, direct, 1e-12), "example_H {h:e} vs {direct:e}");
    }

    #[test]
    fn inversion_is_an_involution(idx in 0usize..4, k in 0.2f64..5.0, g in 0.5f64..3.0, x in point(2)) {
        let f = catalog(idx, k, g);
        let n = f.dimension();
        let twice = transform_density(&transform_density(&f, &TransformKind::Invert).unwrap(), &TransformKind::Invert).unwrap();
        let (a, b) = (twice.value(&x[..n]).unwrap(), f.value(&x[..n]).unwrap());
        prop_assert!(close(a, b, 1e-12), "{a:e} vs {b:e}");
    }

    #[test]
    fn power_minus_one_is_inversion(idx in 0usize..4, k in 0.2f64..5.0, g in 0.5f64..3.0, x in point(2)) {
        let f = catalog(idx, k, g);
        let n = f.dimension();
        let p = transform_density(&f, &TransformKind::Power(-1.0)).unwrap().value(&x[..n]).unwrap();
        let i = transform_density(&f, &TransformKind::Invert).unwrap().value(&x[..n]).unwrap();
        prop_assert!(close(p, i, 1e-12), "{p:e} vs {i:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn counterexample_factors_are_consistent(k in 0.05f64..200.0, u in prop::collection::vec(0.3f64..3.0, 2)) {
        let h = catalog_wform("counterexample_product", &Params::from_pairs(&[("k", k)]), &BasePoint::new(u).unwrap())
            .unwrap()
            .handle();
        let r = cm_test(&h, &GridSpec::cube(Axis::linear(0.1, 5.0, 5), 3), &CmSettings::default()).unwrap();
        prop_assert_eq!(r.verdict, Verdict::ConsistentCM);
    }

    #[test]
    fn example_h_increases_in_w3(k in 1.1f64..4.0, g in 0.1f64..4.0, c in 1e-3f64..1e3) {
        let p = Params::from_pairs(&[("k", k), ("gamma", g), ("c", c)]);
        let h = catalog_wform("example_H", &p, &BasePoint::ones(2)).unwrap().handle();
        let s = CmSettings { max_order: 1, steps: StepSpec::PitchMultiples(vec![0.25, 1.0]), keep_records: true, ..CmSettings::default() };
        let r = cm_test(&h, &GridSpec::cube(Axis::linear(0.1, 4.0, 5), 3), &s).unwrap();
        prop_assert_eq!(r.verdict, Verdict::ViolatedCM);
        prop_assert_eq!(r.witness.map(|w| w.alpha), Some(MultiIndex::unit(3, 2)));
        let w3: Vec<_> = r.records.iter().filter(|c| c.alpha == MultiIndex::unit(3, 2)).collect();
        prop_assert_eq!(w3.len(), 125);
        prop_assert!(w3.iter().all(|c| c.signed_value < 0.0));
    }
}

#[test]
fn underflowing_factor_is_not_a_violation() {
    let h = catalog_wform(
        "counterexample_product",
        &Params::from_pairs(&[("k", 145.83329799952014)]),
        &BasePoint::new(vec![1.605774597762509, 0.42016273625094164]).unwrap(),
    )
    .unwrap()
    .handle();
    let r = cm_test(
        &h,
        &GridSpec::cube(Axis::linear(0.1, 5.0, 5), 3),
        &CmSettings::default(),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::ConsistentCM);
}
