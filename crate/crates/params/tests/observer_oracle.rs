//! Observer items checked against an independent 50-digit recomputation
//! (see `oracles/observer.py`); the arrays below are its frozen output.

use linkfn::LinkFunction;
use manifold::ManifoldModel;
use params::{check_conditions, derive_observer_params, feasibility_test, ObserverInputs, TrueConstants};
use std::f64::consts::PI;

const SPHERE: [f64; 11] = [
    6.3095e+4,
    1.0e-2,
    9.0e-1,
    1.648_407_499_986_076e-2,
    9.765_545_248_244_527,
    5.307_123_605_488_957e-13,
    1.741_829_271_730_529_3e9,
    1.138_281_368_553_631_2e-5,
    5.443_194_247_881_781e9,
    7.882_587_267_057_288e12,
    3.228_707_744_586_665_2e16,
];
const CIRCLE: [f64; 11] = [
    1.515e+3,
    1.0e-2,
    2.0e-1,
    2.0e-1,
    8.714_622_762_628_416,
    3.978_873_577_297_384e-8,
    2.869_755_502_795_739_4e5,
    1.953125e-4,
    8.471_673_183_690_986e5,
    8.674_993_340_099_57e8,
    8.883_193_180_261_959e11,
];
const TORUS: [f64; 11] = [
    3.98107e+5,
    1.0e-2,
    5.0e-1,
    2.955_287_328_097_812e-2,
    1.143_592_225_382_982_3e1,
    5.429_746_943_523_172e-13,
    7.145_050_806_069_56e8,
    2.040_726_279_348_277_5e-5,
    2.416_244_721_880_709_6e9,
    3.499_096_121_032_813e12,
    1.433_229_771_175_040_2e16,
];

fn inputs() -> [(ObserverInputs, ManifoldModel, [f64; 11]); 3] {
    [
        (
            ObserverInputs {
                total_vertices: 1e6,
                varsigma: 0.1,
                dim: 2,
                diam_bound: 2.0,
                kappa_bound: 1.0,
                connectivity_lower: f64::INFINITY,
                measure_const: 0.25,
                link: LinkFunction::exp_decay(0.9, 1.0, 2.0).unwrap(),
            },
            ManifoldModel::sphere(1.0).unwrap(),
            SPHERE,
        ),
        (
            ObserverInputs {
                total_vertices: 2e5,
                varsigma: 0.2,
                dim: 1,
                diam_bound: 2.0,
                kappa_bound: 1.0,
                connectivity_lower: f64::INFINITY,
                measure_const: 1.0 / PI,
                link: LinkFunction::affine(0.95, 0.2, 2.0).unwrap(),
            },
            ManifoldModel::circle(1.0).unwrap(),
            CIRCLE,
        ),
        (
            ObserverInputs {
                total_vertices: 1e8,
                varsigma: 0.15,
                dim: 2,
                diam_bound: 2.0 * 2f64.sqrt(),
                kappa_bound: 1.0,
                connectivity_lower: 1.0,
                measure_const: 1.0 / (4.0 * PI),
                link: LinkFunction::exp_decay(1.0, 0.5, 2.0 * 2f64.sqrt()).unwrap(),
            },
            ManifoldModel::flat_torus(1.0).unwrap(),
            TORUS,
        ),
    ]
}

#[test]
fn items_match_independent_recomputation() {
    for (inp, _, want) in inputs() {
        let got = derive_observer_params(&inp).unwrap();
        assert_eq!(got.n as f64, want[0]);
        for ((label, value), expected) in got.items().into_iter().zip(want).skip(1) {
            let rel = ((value - expected) / expected).abs();
            assert!(rel <= 1e-12, "{label}: {value} vs {expected} (rel {rel:e})");
        }
    }
}

#[test]
fn desk_scale_observer_sets_are_infeasible() {
    for (inp, model, _) in inputs() {
        let ps = derive_observer_params(&inp).unwrap().params();
        assert!(!feasibility_test(&ps, model.locality_radius()));
    }
}

#[test]
fn faithful_sets_satisfy_every_condition_but_the_measure_one() {
    // The measure lower bound on epsilon needs epsilon/6 <= r_M, which only
    // feasible sets guarantee; every other condition holds for any inputs.
    for (inp, model, _) in inputs() {
        let ps = derive_observer_params(&inp).unwrap().params();
        let p_diam = inp.link.prob(inp.diam_bound);
        for kernel_sup in [1.0, p_diam * p_diam] {
            let k = TrueConstants::of(&model, &inp.link, kernel_sup);
            for c in check_conditions(&ps, &model, &k) {
                if c.name != "epsilon: measure" {
                    assert!(c.holds, "{}: {} vs {}", c.name, c.lhs, c.rhs);
                }
            }
        }
    }
}

#[test]
fn batch_size_is_monotone_and_epsilon_nonincreasing_in_vertex_count() {
    let (base, _, _) = inputs()[0];
    let mut last = derive_observer_params(&base).unwrap();
    for k in 1..40 {
        let mut inp = base;
        inp.total_vertices = base.total_vertices * 1.7f64.powi(k);
        let next = derive_observer_params(&inp).unwrap();
        assert!(next.n >= last.n);
        assert!(next.epsilon <= last.epsilon);
        last = next;
    }
}
