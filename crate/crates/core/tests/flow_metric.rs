use flowspace::flow_space::{dist_fs, FlowMetricConfig, GeneralizedGeodesic};
use flowspace::model_spaces::{BoundaryPoint, Endpoint, Space, SpacePoint};
use flowspace::sampling::{random_geodesic, rng};
use proptest::prelude::*;

/// Composite Simpson on [-60, 60], independent of the certified bracket.
fn simpson_oracle(c: &GeneralizedGeodesic, d: &GeneralizedGeodesic) -> f64 {
    let n = 240_000;
    let (a, b) = (-60.0f64, 60.0f64);
    let h = (b - a) / n as f64;
    let f = |t: f64| c.evaluate(t).dist(&d.evaluate(t)) * (-t.abs()).exp() / 2.0;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let t = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t);
    }
    s * h / 3.0
}

#[test]
fn bracket_agrees_with_simpson() {
    let cfg = FlowMetricConfig::with_tolerance(1e-8);
    for space in [Space::Euclidean(2), Space::Tree, Space::Hyperbolic] {
        let mut r = rng(11);
        for _ in 0..6 {
            let c = random_geodesic(space, &mut r, 3.0);
            let d = random_geodesic(space, &mut r, 3.0);
            let b = dist_fs(&c, &d, &cfg).unwrap();
            let o = simpson_oracle(&c, &d);
            assert!(b.converged);
            // Simpson has kinks at the breakpoints, so allow a small slack
            assert!(b.lower - 1e-6 <= o && o <= b.upper + 1e-6, "{space:?}: {b:?} vs {o}");
        }
    }
}

#[test]
fn constants_and_full_lines() {
    let cfg = FlowMetricConfig::default();
    let x = SpacePoint::euclidean(&[0.0, 0.0]);
    let y = SpacePoint::euclidean(&[3.0, 4.0]);
    let r = dist_fs(&GeneralizedGeodesic::constant(x), &GeneralizedGeodesic::constant(y), &cfg).unwrap();
    assert_eq!(r.lower, 5.0);
    let line = GeneralizedGeodesic::disk_line(1.0, -2.0).unwrap();
    for tau in [-2.5, 0.3, 4.0] {
        let b = dist_fs(&line, &line.flow(tau), &cfg).unwrap();
        assert!(b.contains(tau.abs(), 0.0) && b.width() <= 1e-9, "{b:?}");
    }
}

#[test]
fn huge_flow_times_stay_accurate() {
    // parallel lines at distance 1, flowed far out
    let cfg = FlowMetricConfig::with_tolerance(1e-8);
    let c = GeneralizedGeodesic::euclidean_line(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
    let d = GeneralizedGeodesic::euclidean_line(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
    let t = 5e13;
    let b = dist_fs(&c.flow(t), &d.flow(t), &cfg).unwrap();
    assert!(b.contains(1.0, 1e-6), "{b:?}");
    let e = BoundaryPoint::direction(&[1.0, 0.0]).unwrap();
    let ray = GeneralizedGeodesic::connect(&SpacePoint::euclidean(&[0.0, 0.0]), &Endpoint::Ideal(e)).unwrap();
    assert!(dist_fs(&ray.flow(t), &c.flow(t), &cfg).unwrap().upper < 1e-6);
}

fn space_strategy() -> impl Strategy<Value = Space> {
    prop_oneof![Just(Space::Euclidean(2)), Just(Space::Tree), Just(Space::Hyperbolic)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn metric_axioms(space in space_strategy(), seed in any::<u64>()) {
        let cfg = FlowMetricConfig::with_tolerance(1e-7);
        let mut r = rng(seed);
        let (a, b, c) = (random_geodesic(space, &mut r, 3.0), random_geodesic(space, &mut r, 3.0), random_geodesic(space, &mut r, 3.0));
        let ab = dist_fs(&a, &b, &cfg).unwrap();
        let ba = dist_fs(&b, &a, &cfg).unwrap();
        let bc = dist_fs(&b, &c, &cfg).unwrap();
        let ac = dist_fs(&a, &c, &cfg).unwrap();
        prop_assert!(dist_fs(&a, &a, &cfg).unwrap().upper <= 1e-7);
        prop_assert!((ab.mid() - ba.mid()).abs() <= 2e-7);
        prop_assert!(ac.lower <= ab.upper + bc.upper + 1e-9);
    }

    #[test]
    fn flow_is_a_group_action(space in space_strategy(), seed in any::<u64>(), s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let mut r = rng(seed);
        let c = random_geodesic(space, &mut r, 3.0);
        let a = c.flow(s).flow(t);
        let b = c.flow(s + t);
        for k in -8..=8 {
            let u = k as f64 * 0.7;
            prop_assert!(a.evaluate(u).dist(&b.evaluate(u)) <= 1e-9);
        }
    }

    #[test]
    fn flow_lipschitz_bound(space in space_strategy(), seed in any::<u64>(), tau in -3.0f64..3.0, sigma in -3.0f64..3.0) {
        let cfg = FlowMetricConfig::with_tolerance(1e-7);
        let mut r = rng(seed);
        let (c, d) = (random_geodesic(space, &mut r, 3.0), random_geodesic(space, &mut r, 3.0));
        let lhs = dist_fs(&c.flow(tau), &d.flow(sigma), &cfg).unwrap().lower;
        let rhs = tau.abs().exp() * dist_fs(&c, &d, &cfg).unwrap().upper + (sigma - tau).abs();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn finite_embedding_round_trip(space in space_strategy(), seed in any::<u64>(), shift in -4.0f64..4.0) {
        let mut r = rng(seed);
        let x = flowspace::sampling::random_point(space, &mut r, 3.0);
        let y = flowspace::sampling::random_point(space, &mut r, 3.0);
        prop_assume!(x.dist(&y) > 1e-6);
        let c = GeneralizedGeodesic::from_finite(shift, &x, &y).unwrap();
        let (r0, x1, y1) = c.embed_finite().unwrap();
        prop_assert!((r0 - shift).abs() <= 1e-12);
        prop_assert!(x1.dist(&x) <= 1e-9 && y1.dist(&y) <= 1e-9);
    }
}
