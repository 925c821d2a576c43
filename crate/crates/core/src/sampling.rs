//! Seeded random samples of points, ends and generalized geodesics.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::flow_space::GeneralizedGeodesic;
use crate::model_spaces::{hyperbolic, ray_unchecked, tree, BoundaryPoint, Endpoint, Space, SpacePoint, TreeEnd, TreePoint};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_word(rng: &mut (impl Rng + ?Sized), lo: usize, hi: usize) -> Vec<tree::Letter> {
    let len = rng.gen_range(lo..=hi);
    let mut w: Vec<tree::Letter> = Vec::with_capacity(len);
    while w.len() < len {
        let l = tree::LETTERS[rng.gen_range(0..4)];
        if w.last() != Some(&tree::inv(l)) {
            w.push(l);
        }
    }
    w
}

/// A point within distance about `radius` of the origin.
pub fn random_point(space: Space, rng: &mut (impl Rng + ?Sized), radius: f64) -> SpacePoint {
    match space {
        Space::Euclidean(n) => SpacePoint::Euclidean((0..n).map(|_| rng.gen_range(-radius..=radius)).collect()),
        Space::Tree => {
            let depth = radius.max(0.0).floor() as usize;
            let w = random_word(rng, 0, depth);
            if rng.gen_bool(0.5) || (w.len() as f64) + 1.0 > radius {
                SpacePoint::Tree(TreePoint::vertex(&w))
            } else {
                let l = loop {
                    let l = tree::LETTERS[rng.gen_range(0..4)];
                    if w.last() != Some(&tree::inv(l)) {
                        break l;
                    }
                };
                SpacePoint::Tree(TreePoint::on_edge(&w, l, rng.gen_range(0.05..0.95)).expect("valid edge"))
            }
        }
        Space::Hyperbolic => {
            let rho: f64 = rng.gen_range(0.0..=radius);
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            SpacePoint::Hyperbolic(hyperbolic::guard(Complex64::from_polar((rho / 2.0).tanh(), th)))
        }
    }
}

pub fn random_end(space: Space, rng: &mut (impl Rng + ?Sized)) -> BoundaryPoint {
    match space {
        Space::Euclidean(n) => loop {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if let Ok(b) = BoundaryPoint::direction(&u) {
                if crate::model_spaces::euclidean::norm(&u) > 1e-3 {
                    break b;
                }
            }
        },
        Space::Tree => loop {
            let head = random_word(rng, 0, 2);
            let cycle = random_word(rng, 1, 3);
            if let Ok(e) = TreeEnd::new(&head, &cycle) {
                break BoundaryPoint::Tree(e);
            }
        },
        Space::Hyperbolic => BoundaryPoint::angle(rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)),
    }
}

pub fn random_endpoint(space: Space, rng: &mut (impl Rng + ?Sized), radius: f64) -> Endpoint {
    if rng.gen_bool(0.5) {
        Endpoint::Point(random_point(space, rng, radius))
    } else {
        Endpoint::Ideal(random_end(space, rng))
    }
}

/// A random point at distance exactly `dist` from `from`.
pub fn point_at_distance(rng: &mut (impl Rng + ?Sized), from: &SpacePoint, dist: f64) -> SpacePoint {
    if dist <= 0.0 {
        return from.clone();
    }
    let space = from.space();
    match from {
        SpacePoint::Euclidean(_) | SpacePoint::Hyperbolic(_) => {
            let end = random_end(space, rng);
            ray_unchecked(from, &Endpoint::Ideal(end)).at(dist)
        }
        SpacePoint::Tree(p) => loop {
            let w = random_word(rng, dist.ceil() as usize + 2, dist.ceil() as usize + 2);
            let target = TreePoint::vertex(&tree::mul(p.word(), &w));
            let q = SpacePoint::Tree(target);
            if from.dist(&q) >= dist {
                break ray_unchecked(from, &Endpoint::Point(q)).at(dist);
            }
        },
    }
}

/// A generalized geodesic of random type: constant, segment, ray or line,
/// with a random time shift.
pub fn random_geodesic(space: Space, rng: &mut (impl Rng + ?Sized), radius: f64) -> GeneralizedGeodesic {
    let kind = rng.gen_range(0..8);
    let shift = rng.gen_range(-radius..=radius);
    let x = random_point(space, rng, radius);
    let g = match kind {
        0 => GeneralizedGeodesic::constant(x),
        1..=3 => {
            let y = random_point(space, rng, radius);
            GeneralizedGeodesic::connect_unchecked(&x, &Endpoint::Point(y))
        }
        4 | 5 => GeneralizedGeodesic::connect_unchecked(&x, &Endpoint::Ideal(random_end(space, rng))),
        _ => random_line(space, rng, radius),
    };
    let g = if kind % 2 == 1 { g.reverse() } else { g };
    g.flow(shift)
}

/// A bi-infinite geodesic passing within about `radius` of the origin.
pub fn random_line(space: Space, rng: &mut (impl Rng + ?Sized), radius: f64) -> GeneralizedGeodesic {
    match space {
        Space::Euclidean(_) => {
            let p = random_point(space, rng, radius);
            let BoundaryPoint::Euclidean(u) = random_end(space, rng) else { unreachable!() };
            GeneralizedGeodesic::euclidean_line(p.as_euclidean().unwrap(), &u).expect("unit direction")
        }
        Space::Tree => loop {
            let (BoundaryPoint::Tree(a), BoundaryPoint::Tree(b)) = (random_end(space, rng), random_end(space, rng))
            else {
                unreachable!()
            };
            if let Ok(l) = GeneralizedGeodesic::tree_line(&a, &b) {
                break l;
            }
        },
        Space::Hyperbolic => loop {
            let a: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let b: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let sep = hyperbolic::normalize_angle(a - b).abs();
            // keep the line's closest point to 0 inside the radius
            let depth = 2.0 * (1.0 / (sep / 2.0).sin()).ln();
            if sep > 1e-3 && depth <= radius.max(0.5) * 2.0 + 2.0 {
                if let Ok(l) = GeneralizedGeodesic::disk_line(a, b) {
                    break l;
                }
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_samples_repeat() {
        for space in [Space::Euclidean(2), Space::Tree, Space::Hyperbolic] {
            let (mut a, mut b, mut c) = (rng(7), rng(7), rng(8));
            for _ in 0..20 {
                let (g, h) = (random_geodesic(space, &mut a, 3.0), random_geodesic(space, &mut b, 3.0));
                assert!(g.approx_eq(&h, 0.0));
                g.validate().unwrap();
                let x = random_point(space, &mut c, 2.0);
                let y = point_at_distance(&mut c, &x, 1.75);
                assert!((x.dist(&y) - 1.75).abs() < 1e-9);
            }
        }
    }
}
