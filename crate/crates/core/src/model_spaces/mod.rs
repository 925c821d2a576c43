//! Proper CAT(0) model spaces: Euclidean space, the Cayley tree of `F₂`, and
//! the hyperbolic plane.
//!
//! Every space offers exact distances, geodesic interpolation, rays toward
//! points or boundary points, and the projection `ρ_r` onto closed balls.

pub mod euclidean;
pub mod hyperbolic;
pub mod tree;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
pub use tree::{TreeEnd, TreePoint};

/// Default absolute tolerance for geometric equalities.
pub const GEOM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Euclidean(usize),
    Tree,
    Hyperbolic,
}

impl Space {
    pub fn name(&self) -> String {
        match self {
            Space::Euclidean(n) => format!("euclidean{n}"),
            Space::Tree => "tree".into(),
            Space::Hyperbolic => "hyperbolic".into(),
        }
    }

    /// Covering dimension of the space.
    pub fn dim(&self) -> usize {
        match self {
            Space::Euclidean(n) => *n,
            Space::Tree => 1,
            Space::Hyperbolic => 2,
        }
    }

    /// A distinguished base point: the origin or the root.
    pub fn origin(&self) -> SpacePoint {
        match self {
            Space::Euclidean(n) => SpacePoint::Euclidean(vec![0.0; *n]),
            Space::Tree => SpacePoint::Tree(TreePoint::root()),
            Space::Hyperbolic => SpacePoint::Hyperbolic(Complex64::new(0.0, 0.0)),
        }
    }

    pub fn parse(s: &str) -> Result<Space> {
        match s {
            "tree" | "f2" => Ok(Space::Tree),
            "hyperbolic" | "h2" | "disk" => Ok(Space::Hyperbolic),
            _ => match s.strip_prefix("euclidean") {
                Some(n) => n
                    .parse()
                    .ok()
                    .filter(|&n: &usize| n >= 1)
                    .map(Space::Euclidean)
                    .ok_or_else(|| Error::Usage(format!("unknown space {s:?}"))),
                None => usage(format!("unknown space {s:?}")),
            },
        }
    }
}

/// A point of one of the model spaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacePoint {
    Euclidean(Vec<f64>),
    Tree(TreePoint),
    Hyperbolic(Complex64),
}

impl SpacePoint {
    pub fn euclidean(x: &[f64]) -> Self {
        SpacePoint::Euclidean(x.to_vec())
    }

    pub fn tree_vertex(word: &str) -> Result<Self> {
        Ok(SpacePoint::Tree(TreePoint::vertex(&tree::parse_word(word)?)))
    }

    /// A disk point; rejects points outside the interior guard.
    pub fn disk(re: f64, im: f64) -> Result<Self> {
        let z = Complex64::new(re, im);
        if z.norm() > hyperbolic::GUARD {
            return usage(format!("disk point {z} is outside the interior guard"));
        }
        Ok(SpacePoint::Hyperbolic(z))
    }

    pub fn space(&self) -> Space {
        match self {
            SpacePoint::Euclidean(v) => Space::Euclidean(v.len()),
            SpacePoint::Tree(_) => Space::Tree,
            SpacePoint::Hyperbolic(_) => Space::Hyperbolic,
        }
    }

    pub fn as_euclidean(&self) -> Option<&[f64]> {
        match self {
            SpacePoint::Euclidean(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_tree(&self) -> Option<&TreePoint> {
        match self {
            SpacePoint::Tree(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_disk(&self) -> Option<Complex64> {
        match self {
            SpacePoint::Hyperbolic(z) => Some(*z),
            _ => None,
        }
    }

    /// Distance; panics on mixed spaces. Use [`distance`] for checked input.
    pub fn dist(&self, other: &SpacePoint) -> f64 {
        match (self, other) {
            (SpacePoint::Euclidean(x), SpacePoint::Euclidean(y)) if x.len() == y.len() => {
                euclidean::distance(x, y)
            }
            (SpacePoint::Tree(p), SpacePoint::Tree(q)) => tree::distance(p, q),
            (SpacePoint::Hyperbolic(z), SpacePoint::Hyperbolic(w)) => hyperbolic::distance(*z, *w),
            _ => panic!("distance between {} and {}", self.space().name(), other.space().name()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SpacePoint::Euclidean(v) => format!("{v:?}"),
            SpacePoint::Tree(p) => p.to_label(),
            SpacePoint::Hyperbolic(z) => format!("{z}"),
        }
    }
}

/// A point of the ideal boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPoint {
    /// Unit direction.
    Euclidean(Vec<f64>),
    Tree(TreeEnd),
    /// Angle in `[0, 2π)`.
    Hyperbolic(f64),
}

impl BoundaryPoint {
    pub fn direction(u: &[f64]) -> Result<Self> {
        let n = euclidean::norm(u);
        if n == 0.0 {
            return usage("zero direction vector");
        }
        Ok(BoundaryPoint::Euclidean(u.iter().map(|a| a / n).collect()))
    }

    pub fn angle(theta: f64) -> Self {
        BoundaryPoint::Hyperbolic(hyperbolic::normalize_angle(theta))
    }

    pub fn space(&self) -> Space {
        match self {
            BoundaryPoint::Euclidean(v) => Space::Euclidean(v.len()),
            BoundaryPoint::Tree(_) => Space::Tree,
            BoundaryPoint::Hyperbolic(_) => Space::Hyperbolic,
        }
    }

    /// Equality up to `tol` (directions and angles) or exactly (tree ends).
    pub fn approx_eq(&self, other: &BoundaryPoint, tol: f64) -> bool {
        match (self, other) {
            (BoundaryPoint::Euclidean(u), BoundaryPoint::Euclidean(v)) => {
                u.len() == v.len() && euclidean::distance(u, v) <= tol
            }
            (BoundaryPoint::Tree(a), BoundaryPoint::Tree(b)) => a == b,
            (BoundaryPoint::Hyperbolic(a), BoundaryPoint::Hyperbolic(b)) => {
                let d = (a - b).rem_euclid(std::f64::consts::TAU);
                d.min(std::f64::consts::TAU - d) <= tol
            }
            _ => false,
        }
    }

    pub fn label(&self) -> String {
        match self {
            BoundaryPoint::Euclidean(v) => format!("dir{v:?}"),
            BoundaryPoint::Tree(e) => e.to_label(),
            BoundaryPoint::Hyperbolic(t) => format!("angle({t})"),
        }
    }
}

/// A point of the bordification `X̄ = X ∪ ∂X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Point(SpacePoint),
    Ideal(BoundaryPoint),
}

impl Endpoint {
    pub fn space(&self) -> Space {
        match self {
            Endpoint::Point(p) => p.space(),
            Endpoint::Ideal(b) => b.space(),
        }
    }

    pub fn as_point(&self) -> Option<&SpacePoint> {
        match self {
            Endpoint::Point(p) => Some(p),
            Endpoint::Ideal(_) => None,
        }
    }

    pub fn approx_eq(&self, other: &Endpoint, tol: f64) -> bool {
        match (self, other) {
            (Endpoint::Point(p), Endpoint::Point(q)) => p.space() == q.space() && p.dist(q) <= tol,
            (Endpoint::Ideal(a), Endpoint::Ideal(b)) => a.approx_eq(b, tol),
            _ => false,
        }
    }
}

impl From<SpacePoint> for Endpoint {
    fn from(p: SpacePoint) -> Self {
        Endpoint::Point(p)
    }
}

impl From<BoundaryPoint> for Endpoint {
    fn from(b: BoundaryPoint) -> Self {
        Endpoint::Ideal(b)
    }
}

fn same_space(a: Space, b: Space) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(a.name(), b.name()))
    }
}

/// Exact distance `d_X(x, y)`.
pub fn distance(x: &SpacePoint, y: &SpacePoint) -> Result<f64> {
    same_space(x.space(), y.space())?;
    Ok(x.dist(y))
}

/// A unit-speed geodesic ray `r` with `r(0) = x`; it stops at an interior
/// target.
#[derive(Clone, Debug)]
pub enum Ray {
    Euclidean(euclidean::LineRay),
    Tree(tree::TreeRay),
    Hyperbolic(hyperbolic::DiskRay),
}

impl Ray {
    pub fn at(&self, s: f64) -> SpacePoint {
        match self {
            Ray::Euclidean(r) => SpacePoint::Euclidean(r.at(s)),
            Ray::Tree(r) => SpacePoint::Tree(r.at(s)),
            Ray::Hyperbolic(r) => SpacePoint::Hyperbolic(r.at(s)),
        }
    }

    /// Length until the ray stops; infinite for rays to the boundary.
    pub fn len(&self) -> f64 {
        match self {
            Ray::Euclidean(r) => r.len(),
            Ray::Tree(r) => r.len(),
            Ray::Hyperbolic(r) => r.len(),
        }
    }
}

pub fn geodesic_ray(x: &SpacePoint, target: &Endpoint) -> Result<Ray> {
    same_space(x.space(), target.space())?;
    Ok(ray_unchecked(x, target))
}

pub(crate) fn ray_unchecked(x: &SpacePoint, target: &Endpoint) -> Ray {
    match (x, target) {
        (SpacePoint::Euclidean(x), Endpoint::Point(SpacePoint::Euclidean(y))) => {
            Ray::Euclidean(euclidean::LineRay::toward_point(x, y))
        }
        (SpacePoint::Euclidean(x), Endpoint::Ideal(BoundaryPoint::Euclidean(u))) => {
            Ray::Euclidean(euclidean::LineRay::toward_direction(x, u))
        }
        (SpacePoint::Tree(x), Endpoint::Point(SpacePoint::Tree(y))) => Ray::Tree(tree::TreeRay::toward_point(x, y)),
        (SpacePoint::Tree(x), Endpoint::Ideal(BoundaryPoint::Tree(e))) => Ray::Tree(tree::TreeRay::toward_end(x, e)),
        (SpacePoint::Hyperbolic(z), Endpoint::Point(SpacePoint::Hyperbolic(w))) => {
            Ray::Hyperbolic(hyperbolic::DiskRay::toward_point(*z, *w))
        }
        (SpacePoint::Hyperbolic(z), Endpoint::Ideal(BoundaryPoint::Hyperbolic(t))) => {
            Ray::Hyperbolic(hyperbolic::DiskRay::toward_angle(*z, *t))
        }
        _ => panic!("ray between {} and {}", x.space().name(), target.space().name()),
    }
}

/// The point at parameter `t` on the geodesic from `x` to `y`.
pub fn interpolate(x: &SpacePoint, y: &SpacePoint, t: f64) -> Result<SpacePoint> {
    same_space(x.space(), y.space())?;
    if !(0.0..=1.0).contains(&t) {
        return usage(format!("interpolation parameter {t} outside [0,1]"));
    }
    Ok(interpolate_unchecked(x, y, t))
}

pub(crate) fn interpolate_unchecked(x: &SpacePoint, y: &SpacePoint, t: f64) -> SpacePoint {
    if t <= 0.0 || x == y {
        return x.clone();
    }
    if t >= 1.0 {
        return y.clone();
    }
    if let (SpacePoint::Euclidean(a), SpacePoint::Euclidean(b)) = (x, y) {
        return SpacePoint::Euclidean(a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect());
    }
    let r = ray_unchecked(x, &Endpoint::Point(y.clone()));
    r.at(t * r.len())
}

/// `ρ_r(x)`: the identity on `B̄_r(x0)`, otherwise the point at distance `r`
/// from `x0` toward `x`.
pub fn project_ball(x0: &SpacePoint, r: f64, x: &Endpoint) -> Result<SpacePoint> {
    same_space(x0.space(), x.space())?;
    if r.is_nan() || r <= 0.0 {
        return usage(format!("ball radius {r} must be positive"));
    }
    Ok(project_unchecked(x0, r, x))
}

pub(crate) fn project_unchecked(x0: &SpacePoint, r: f64, x: &Endpoint) -> SpacePoint {
    if let Endpoint::Point(p) = x {
        if x0.dist(p) <= r {
            return p.clone();
        }
    }
    ray_unchecked(x0, x).at(r)
}

/// Samples `grid²` pairs on the sides `[x,y]` and `[x,z]` and returns the
/// largest excess of `d_X(p, q)` over the comparison distance in ℝ².
pub fn cat0_sample_check(x: &SpacePoint, y: &SpacePoint, z: &SpacePoint, grid: usize) -> Result<f64> {
    same_space(x.space(), y.space())?;
    same_space(x.space(), z.space())?;
    if grid < 2 {
        return usage("grid must be at least 2");
    }
    let (a, b, c) = (x.dist(y), x.dist(z), y.dist(z));
    if a <= 1e-15 || b <= 1e-15 || c <= 1e-15 {
        return Ok(0.0);
    }
    // comparison triangle: x̄ = 0, ȳ = (a, 0), z̄ by the law of cosines
    let cx = ((a * a + b * b - c * c) / (2.0 * a)).clamp(-b, b);
    let cy = (b * b - cx * cx).max(0.0).sqrt();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..grid {
        let s = i as f64 / (grid - 1) as f64;
        let p = interpolate_unchecked(x, y, s);
        for j in 0..grid {
            let t = j as f64 / (grid - 1) as f64;
            let q = interpolate_unchecked(x, z, t);
            let (px, qx, qy) = (s * a, t * cx, t * cy);
            let bar = ((px - qx).powi(2) + qy * qy).sqrt();
            worst = worst.max(p.dist(&q) - bar);
        }
    }
    Ok(worst)
}

/// A numeric value with a rigorous enclosure (up to floating-point rounding).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedLength {
    pub lower: f64,
    pub upper: f64,
    /// False when refinement stopped before reaching the requested width.
    pub converged: bool,
}

impl CertifiedLength {
    pub fn exact(v: f64) -> Self {
        CertifiedLength { lower: v, upper: v, converged: true }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        self.lower - slack <= v && v <= self.upper + slack
    }
}

/// An isometry moving a chosen point to the origin (Euclidean, disk) or onto
/// the root edge (tree). Used to keep coordinates small before integrating.
#[derive(Clone, Debug)]
pub enum Recentre {
    Translate(Vec<f64>),
    TreeShift(Vec<tree::Letter>),
    Disk(Complex64),
}

impl Recentre {
    pub fn at(p: &SpacePoint) -> Self {
        match p {
            SpacePoint::Euclidean(v) => Recentre::Translate(v.clone()),
            SpacePoint::Tree(t) => Recentre::TreeShift(tree::inverse(t.word())),
            SpacePoint::Hyperbolic(z) => Recentre::Disk(*z),
        }
    }

    pub fn point(&self, p: &SpacePoint) -> SpacePoint {
        match (self, p) {
            (Recentre::Translate(v), SpacePoint::Euclidean(x)) => {
                SpacePoint::Euclidean(x.iter().zip(v).map(|(a, b)| a - b).collect())
            }
            (Recentre::TreeShift(g), SpacePoint::Tree(t)) => SpacePoint::Tree(t.left_mul(g)),
            (Recentre::Disk(z), SpacePoint::Hyperbolic(w)) => {
                SpacePoint::Hyperbolic(hyperbolic::guard(hyperbolic::to_origin(*z, *w)))
            }
            _ => panic!("recentring across spaces"),
        }
    }

    pub fn boundary(&self, b: &BoundaryPoint) -> BoundaryPoint {
        match (self, b) {
            (Recentre::Translate(_), BoundaryPoint::Euclidean(u)) => BoundaryPoint::Euclidean(u.clone()),
            (Recentre::TreeShift(g), BoundaryPoint::Tree(e)) => BoundaryPoint::Tree(e.left_mul(g)),
            (Recentre::Disk(z), BoundaryPoint::Hyperbolic(t)) => {
                let v = hyperbolic::to_origin(*z, Complex64::from_polar(1.0, *t));
                BoundaryPoint::angle(v.arg())
            }
            _ => panic!("recentring across spaces"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pythagoras() {
        let d = distance(&SpacePoint::euclidean(&[0.0, 0.0]), &SpacePoint::euclidean(&[3.0, 4.0])).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn mixed_spaces_are_rejected() {
        let e = SpacePoint::euclidean(&[0.0]);
        let t = SpacePoint::Tree(TreePoint::root());
        assert!(matches!(distance(&e, &t), Err(Error::SpaceMismatch(..))));
    }

    #[test]
    fn interpolation_examples() {
        let x = SpacePoint::euclidean(&[0.0, 0.0]);
        let y = SpacePoint::euclidean(&[2.0, 0.0]);
        assert_eq!(interpolate(&x, &y, 0.5).unwrap(), SpacePoint::euclidean(&[1.0, 0.0]));
        assert_eq!(interpolate(&x, &y, 0.0).unwrap(), x);
        assert_eq!(interpolate(&x, &y, 1.0).unwrap(), y);
        assert!(interpolate(&x, &y, 1.5).is_err());
    }

    #[test]
    fn projection_examples() {
        let x0 = SpacePoint::euclidean(&[0.0, 0.0]);
        let far = Endpoint::Point(SpacePoint::euclidean(&[10.0, 0.0]));
        assert_eq!(project_ball(&x0, 2.0, &far).unwrap(), SpacePoint::euclidean(&[2.0, 0.0]));
        let end = Endpoint::Ideal(BoundaryPoint::Tree(TreeEnd::parse("", "a").unwrap()));
        let p = project_ball(&SpacePoint::Tree(TreePoint::root()), 1.5, &end).unwrap();
        let expected = SpacePoint::Tree(TreePoint::on_edge(&[0], 0, 0.5).unwrap());
        assert_eq!(p, expected);
    }

    #[test]
    fn cat0_examples() {
        let t = |s: &str| SpacePoint::tree_vertex(s).unwrap();
        assert!(cat0_sample_check(&t(""), &t("aa"), &t("bb"), 9).unwrap() <= 1e-12);
        let h = |a: f64, b: f64| SpacePoint::disk(a, b).unwrap();
        assert!(cat0_sample_check(&h(0.0, 0.0), &h(0.5, 0.0), &h(0.0, 0.5), 9).unwrap() <= 1e-12);
        let e = |a: f64, b: f64| SpacePoint::euclidean(&[a, b]);
        assert!(cat0_sample_check(&e(0.0, 0.0), &e(3.0, 1.0), &e(-1.0, 2.0), 9).unwrap().abs() <= 1e-9);
    }
}
