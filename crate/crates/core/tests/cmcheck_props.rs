use hcm_core::{
    bernstein_mixture, catalog_wform, cm_test, forward_difference, Axis, BasePoint, CmSettings,
    FunctionHandle, GridSpec, MultiIndex, Params, StepSpec, Verdict,
};
use proptest::prelude::*;

fn atoms(dim: usize) -> impl Strategy<Value = Vec<(f64, Vec<f64>)>> {
    prop::collection::vec(
        (0.05f64..3.0, prop::collection::vec(0.0f64..4.0, dim)),
        1..5,
    )
}

fn grid(dim: usize) -> impl Strategy<Value = GridSpec> {
    (0.05f64..1.0, 0.5f64..6.0, 2usize..5, any::<bool>()).prop_map(move |(lo, span, n, log)| {
        let axis = if log {
            Axis::log(lo, lo + span, n)
        } else {
            Axis::linear(lo, lo + span, n)
        };
        GridSpec::cube(axis, dim)
    })
}

fn settings() -> impl Strategy<Value = CmSettings> {
    (1usize..4, prop::collection::vec(0.05f64..3.0, 1..3)).prop_map(|(order, steps)| CmSettings {
        max_order: order,
        steps: StepSpec::PitchMultiples(steps),
        ..CmSettings::default()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mixtures_are_never_violated(
        (a, g) in (1usize..4).prop_flat_map(|d| (atoms(d), grid(d))),
        s in settings(),
    ) {
        let h = bernstein_mixture(&a).unwrap();
        let r = cm_test(&h, &g, &s).unwrap();
        prop_assert_ne!(r.verdict, Verdict::ViolatedCM);
    }

    #[test]
    fn verdicts_are_scale_invariant(
        a in atoms(3),
        k in 0.2f64..4.0,
        gamma in 0.3f64..3.0,
        c in 1e-6f64..1e6,
        use_mixture in any::<bool>(),
    ) {
        let s = CmSettings::default().with_max_order(2);
        let g = GridSpec::cube(Axis::linear(0.1, 3.0, 4), 3);
        let h = if use_mixture {
            bernstein_mixture(&a).unwrap()
        } else {
            catalog_wform("example_H", &Params::from_pairs(&[("k", k), ("gamma", gamma)]), &BasePoint::ones(2))
                .unwrap()
                .handle()
        };
        let r1 = cm_test(&h, &g, &s).unwrap();
        let r2 = cm_test(&h.scaled(c), &g, &s).unwrap();
        prop_assert_eq!(r1.verdict, r2.verdict);
        prop_assert_eq!(r1.witness.map(|w| w.alpha), r2.witness.map(|w| w.alpha));
    }

    #[test]
    fn zero_order_difference_is_the_value(a in atoms(2), x in prop::collection::vec(0.01f64..10.0, 2)) {
        let h = bernstein_mixture(&a).unwrap();
        let d = forward_difference(&h, &x, &MultiIndex::zeros(2), &[0.3, 0.7]).unwrap();
        prop_assert_eq!(d, h.value(&x).unwrap());
    }

    #[test]
    fn identity_fails_at_every_point(lo in 0.01f64..5.0, span in 0.1f64..20.0, n in 2usize..12, step in 0.01f64..4.0) {
        let h = FunctionHandle::new(1, |x| x[0]);
        let g = GridSpec::new(vec![Axis::linear(lo, lo + span, n)]);
        let s = CmSettings { max_order: 1, steps: StepSpec::PitchMultiples(vec![step]), keep_records: true, ..CmSettings::default() };
        let r = cm_test(&h, &g, &s).unwrap();
        prop_assert_eq!(r.verdict, Verdict::ViolatedCM);
        let first: Vec<_> = r.records.iter().filter(|c| c.alpha.total() == 1).collect();
        prop_assert_eq!(first.len(), n);
        for c in first {
            prop_assert!(c.signed_value < 0.0);
            prop_assert!(c.signed_value < -c.tolerance);
        }
        let pitch = span / (n - 1) as f64;
        let d = forward_difference(&h, &[lo], &MultiIndex(vec![1]), &[step * pitch]).unwrap();
        prop_assert!((-d + step * pitch).abs() <= 1e-12 * (lo + span + step * pitch));
    }

    #[test]
    fn exact_signs_at_any_step(
        a in atoms(2),
        x in prop::collection::vec(0.01f64..5.0, 2),
        h in prop::collection::vec(1e-3f64..50.0, 2),
        o0 in 0usize..4,
        o1 in 0usize..4,
    ) {
        // each atom contributes w·∏(e^{-λh}-1)^{α_i} e^{-λx}, whose sign is (-1)^{|α|}
        let f = bernstein_mixture(&a).unwrap();
        let alpha = MultiIndex(vec![o0, o1]);
        let d = forward_difference(&f, &x, &alpha, &h).unwrap();
        let signed = if alpha.total().is_multiple_of(2) { d } else { -d };
        let scale = f.value(&x).unwrap() * (1u64 << alpha.total()) as f64;
        prop_assert!(signed >= -1e-13 * scale, "signed {signed:e}, scale {scale:e}");
    }
}

#[test]
fn gaussian_in_w_is_violated() {
    let h = FunctionHandle::new(1, |x| (-x[0] * x[0]).exp());
    let r = cm_test(
        &h,
        &GridSpec::new(vec![Axis::linear(0.1, 5.0, 12)]),
        &CmSettings::default(),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::ViolatedCM);
}

#[test]
fn mixture_precision_does_not_fake_violations_at_high_order() {
    let h = bernstein_mixture(&[(1.0, vec![0.5, 1.5, 2.5]), (0.3, vec![4.0, 0.0, 1.0])]).unwrap();
    let g = GridSpec::cube(Axis::log(0.05, 8.0, 5), 3);
    let r = cm_test(&h, &g, &CmSettings::default().with_max_order(6)).unwrap();
    assert_ne!(r.verdict, Verdict::ViolatedCM);
}
