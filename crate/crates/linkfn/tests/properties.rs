use linkfn::LinkFunction;
use proptest::prelude::*;

fn any_link() -> impl Strategy<Value = LinkFunction> {
    let exp = (0.05f64..=1.0, 0.05f64..4.0, 0.5f64..3.0)
        .prop_map(|(a, b, d)| LinkFunction::exp_decay(a, b, d).unwrap());
    let affine = (0.5f64..=1.0, 0.01f64..1.0, 0.1f64..3.0).prop_filter_map(
        "needs a - 2bD >= 0",
        |(a, b, d)| LinkFunction::affine(a, b, d).ok(),
    );
    prop_oneof![exp, affine]
}

proptest! {
    #[test]
    fn inverse_undoes_eval(p in any_link(), frac in 0.0f64..=1.0) {
        let t = frac * p.max_distance();
        prop_assert!((p.inverse(p.prob(t)) - t).abs() <= 1e-10);
    }

    #[test]
    fn slope_is_sandwiched_by_certified_constants(p in any_link(), u in 0.0f64..=1.0, v in 0.0f64..=1.0) {
        prop_assume!(u != v);
        let (s, t) = if u < v { (u, v) } else { (v, u) };
        let (s, t) = (s * p.max_distance(), t * p.max_distance());
        let drop = p.prob(s) - p.prob(t);
        let (lip, slope) = (p.lipschitz(), p.min_slope());
        prop_assert!(slope * (t - s) <= drop + 1e-12);
        prop_assert!(drop <= lip * (t - s) + 1e-12);
        prop_assert!(0.0 < slope && slope <= lip);
    }

    #[test]
    fn values_stay_in_unit_interval(p in any_link(), frac in 0.0f64..=1.0) {
        let y = p.prob(frac * p.max_distance());
        prop_assert!((0.0..=1.0).contains(&y));
    }

    #[test]
    fn inverse_is_total_and_clamped(p in any_link(), y in -1.0f64..2.0) {
        let t = p.inverse(y);
        prop_assert!((0.0..=p.max_distance()).contains(&t));
    }
}
