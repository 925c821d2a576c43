use flowspace::flow_space::{dist_fs, FlowMetricConfig, GeneralizedGeodesic};
use flowspace::group_actions::GroupAction;
use flowspace::model_spaces::{Space, SpacePoint};
use flowspace::periodic::median::LineFamilyDistance;
use flowspace::periodic::*;
use flowspace::sampling::{random_geodesic, rng};
use flowspace::transfer::{FsCover, Membership};
use proptest::prelude::*;

#[test]
fn class_counts_for_the_presets() {
    let cases: [(&str, f64, usize, usize); 6] =
        [("z2", 1.0, 4, 2), ("z2", 2.3, 16, 8), ("z", 1.0, 2, 1), ("dihedral", 1.0, 1, 1), ("f2", 1.0, 4, 2), ("f2", 2.0, 8, 4)];
    for (name, gamma, oriented, merged) in cases {
        let c = enumerate_axis_classes(gamma, &GroupAction::preset(name).unwrap()).unwrap();
        assert_eq!((c.oriented_count, c.merged_count), (oriented, merged), "{name} γ={gamma}");
    }
    let m = enumerate_axis_classes(1.5, &GroupAction::mobius(2.0).unwrap()).unwrap();
    assert_eq!((m.oriented_count, m.merged_count), (2, 1));
    assert!(enumerate_axis_classes(1.3, &GroupAction::mobius(2.0).unwrap()).unwrap().classes.is_empty());
}

#[test]
fn periodic_lines_have_their_class_period() {
    let z2 = GroupAction::z2();
    let c = GeneralizedGeodesic::euclidean_line(&[0.2, 0.7], &[0.6, 0.8]).unwrap();
    // direction (3,4) has period 5
    assert!((g_period(&c, &z2, 6.0, 9).period - 5.0).abs() < 1e-9);
    assert!(!fs_le_gamma(&c, &z2, 4.9, 9));
    assert!(fs_le_gamma(&GeneralizedGeodesic::constant(SpacePoint::euclidean(&[0.1, 0.1])), &z2, 0.0, 2));
}

#[test]
fn bundle_is_a_product_on_every_class() {
    let cfg = FlowMetricConfig::with_tolerance(1e-9);
    for (name, gamma) in [("z2", 2.3), ("f2", 2.0)] {
        let classes = enumerate_axis_classes(gamma, &GroupAction::preset(name).unwrap()).unwrap();
        let mut r = rng(5);
        for a in &classes.classes {
            let b = FlowLineBundle::new(a).unwrap();
            for _ in 0..4 {
                let y: Vec<f64> = (0..b.transversal_dim()).map(|_| r.gen_range(-2.0..2.0)).collect();
                let z: Vec<f64> = (0..b.transversal_dim()).map(|_| r.gen_range(-2.0..2.0)).collect();
                let (s, t) = (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
                let (c, d) = (b.line(&y, s).unwrap(), b.line(&z, t).unwrap());
                assert!(b.contains(&c, 1e-9));
                assert!(b.product_defect(&c, &d, &cfg).unwrap() < 1e-6);
                assert!(b.cocycle_defect(&c, t) < 1e-9);
            }
        }
    }
}

#[test]
fn extension_laws_on_point_nets_and_lines() {
    let reports = vec![
        check_extension_laws(&PointNet::plane(), 8, 300, 1),
        check_extension_laws(&PointNet::tree(), 8, 300, 2),
        check_extension_laws(&LineSubset::plane(), 8, 300, 3),
        check_extension_laws(&LineSubset::tree(), 8, 300, 4),
        check_extension_laws(&LineSubset::hyperbolic(), 8, 300, 5),
    ];
    for r in reports {
        assert!(r.passed(), "{}: {:?}", r.subset, r.report.failures().collect::<Vec<_>>());
    }
}

#[test]
fn lattice_covers_pass_their_checks() {
    for (name, gamma, orbits) in [("z2", 1.0, 12), ("z", 1.0, 4)] {
        let cover = build_cover(gamma, &GroupAction::preset(name).unwrap(), None).unwrap();
        let r = check_cover(&cover, &CheckCoverConfig { samples: 40, ..Default::default() }).unwrap();
        assert!(r.passed(), "{name}: {:?}", r.report.failures().collect::<Vec<_>>());
        assert_eq!(r.orbit_count_found, orbits);
        assert!(r.nerve_dim <= cover.multiplicity_bound);
    }
}

#[test]
fn cover_patches_listed_for_a_geodesic_are_exhaustive() {
    // every patch not listed must be certified to miss c
    let cover = build_cover(1.0, &GroupAction::z2(), None).unwrap();
    let mut r = rng(8);
    for _ in 0..10 {
        let c = random_geodesic(Space::Euclidean(2), &mut r, 1.5);
        let listed = cover.candidate_patches(&c);
        for class in 0..cover.classes.len() {
            for orbit in 0..2 {
                for k in -5..=5 {
                    let p = PatchId::Class { class, orbit, k };
                    if !listed.contains(&p) {
                        assert_eq!(cover.membership(&p, &c), Membership::Out, "{}", cover.patch_tag(&p));
                    }
                }
            }
        }
    }
}

use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// The certified slab bracket never exceeds the distance to a line of
    /// the family inside the slab.
    #[test]
    fn slab_lower_bound_is_sound(seed in 0u64..10_000, theta in 0.0f64..6.283, lo in -2.0f64..1.0, width in 0.05f64..2.0) {
        let mut r = rng(seed);
        let c = random_geodesic(Space::Euclidean(2), &mut r, 2.0);
        let u = [theta.cos(), theta.sin()];
        let normal = [-u[1], u[0]];
        let d = LineFamilyDistance::new(&c, &u, 5e-3).unwrap();
        let hi = lo + width;
        let b = d.to_slab(lo, hi);
        let cfg = FlowMetricConfig::with_tolerance(1e-6);
        let mut best = f64::INFINITY;
        for i in 0..=6 {
            let y = lo + width * i as f64 / 6.0;
            for j in -8..=8 {
                let s = j as f64 * 0.35;
                let q = [y * normal[0] + s * u[0], y * normal[1] + s * u[1]];
                let line = GeneralizedGeodesic::euclidean_line(&q, &u).unwrap();
                best = best.min(dist_fs(&c, &line, &cfg).unwrap().upper);
            }
        }
        prop_assert!(b.lower <= best + 1e-9, "{b:?} vs sampled {best}");
        prop_assert!(b.lower <= b.upper);
    }
}
