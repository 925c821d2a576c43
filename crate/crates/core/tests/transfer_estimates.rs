use flowspace::flow_space::FlowMetricConfig;
use flowspace::group_actions::GroupAction;
use flowspace::model_spaces::Space;
use flowspace::transfer::*;

fn cfg(delta: f64) -> FlowMetricConfig {
    FlowMetricConfig { tolerance: (1e-3 * delta).min(1e-7), ..FlowMetricConfig::default() }
}

#[test]
fn point_estimate_in_every_space() {
    for space in [Space::Euclidean(2), Space::Tree, Space::Hyperbolic] {
        let c = select_constants_g(1.0, 1.0, 0.1).unwrap();
        let r = verify_estimate_g(space, &c, 60, 3, &cfg(0.1)).unwrap();
        for e in &r.checks {
            println!("{} {} {} {:?}", space.name(), e.name, e.max_deviation, e.witness);
        }
        assert!(r.passed(), "{}", r.to_json());
        let t = triangle_check(space, &c, 60, 4);
        assert!(t.passed(), "{}", t.to_json());
    }
}

#[test]
fn action_estimate_on_the_plane() {
    let a = GroupAction::z2();
    let c = select_constants_h(&a, 0.1).unwrap();
    let h = HomotopySAction::new(a, c.radius).unwrap();
    let r = verify_estimate_h(&h, &c, 40, 5, &DEFAULT_T_GRID, &cfg(0.1)).unwrap();
    for e in &r.checks {
        println!("{} {} {:?}", e.name, e.max_deviation, e.witness);
    }
    assert!(r.passed(), "{}", r.to_json());
}

#[test]
fn chains_on_the_line_and_plane() {
    for a in [GroupAction::z(), GroupAction::z2()] {
        let n = a.s().len();
        let c = select_constants_h(&a, 0.1).unwrap();
        let (alpha, _) = chain_delta(c.beta, n, 1.0);
        let eps = alpha.exp() * c.delta;
        let h = HomotopySAction::new(a, c.radius).unwrap();
        let mut rng = flowspace::sampling::rng(9);
        let g = h.action().random_element(&mut rng, 3);
        let x = flowspace::sampling::point_at_distance(&mut rng, h.x0(), c.radius - 1.0);
        let set = h.s_n_sample(&mut rng, &g, &x, n, 12, &DEFAULT_T_GRID).unwrap();
        let r = verify_chain(&h, c.t, c.beta, &set.chains, eps, &cfg(c.delta)).unwrap();
        println!("{} chains={} skipped={} link={} total={} eps={eps}", h.action().name, set.chains.len(), set.skipped, r.max_link_deviation, r.max_total);
        assert!(r.report.passed(), "{}", r.report.to_json());
    }
}
