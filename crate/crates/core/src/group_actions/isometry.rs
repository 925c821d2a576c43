use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::flow_space::GeneralizedGeodesic;
use crate::model_spaces::{hyperbolic, tree, BoundaryPoint, Space, SpacePoint, TreeEnd};

/// An isometry of one of the model spaces.
///
/// Euclidean elements are `x ↦ Qx + v`; tree elements act by left
/// multiplication; hyperbolic elements are `SL₂(ℝ)` matrices acting on the
/// upper half plane, transported to the disk by the Cayley map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IsometryElement {
    Euclidean {
        q: Vec<Vec<f64>>,
        v: Vec<f64>,
    },
    Tree {
        #[serde(serialize_with = "tree::serialize_word", deserialize_with = "tree::deserialize_word")]
        word: Vec<tree::Letter>,
    },
    Mobius {
        m: [f64; 4],
    },
}

fn mat_vec(q: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    q.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

fn identity_matrix(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

impl IsometryElement {
    pub fn identity(space: Space) -> Self {
        match space {
            Space::Euclidean(n) => IsometryElement::Euclidean { q: identity_matrix(n), v: vec![0.0; n] },
            Space::Tree => IsometryElement::Tree { word: Vec::new() },
            Space::Hyperbolic => IsometryElement::Mobius { m: [1.0, 0.0, 0.0, 1.0] },
        }
    }

    pub fn translation(v: &[f64]) -> Self {
        IsometryElement::Euclidean { q: identity_matrix(v.len()), v: v.to_vec() }
    }

    pub fn euclidean(q: Vec<Vec<f64>>, v: Vec<f64>) -> Result<Self> {
        let n = v.len();
        if q.len() != n || q.iter().any(|r| r.len() != n) {
            return usage("matrix and translation sizes differ");
        }
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| q[k][i] * q[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-9 {
                    return usage("matrix is not orthogonal");
                }
            }
        }
        Ok(IsometryElement::Euclidean { q, v })
    }

    /// Rotation of the plane by `theta` about the origin.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        IsometryElement::Euclidean { q: vec![vec![c, -s], vec![s, c]], v: vec![0.0, 0.0] }
    }

    /// The reflection `x ↦ 2p − x` of the line.
    pub fn reflection_1d(p: f64) -> Self {
        IsometryElement::Euclidean { q: vec![vec![-1.0]], v: vec![2.0 * p] }
    }

    pub fn word(w: &str) -> Result<Self> {
        Ok(IsometryElement::Tree { word: tree::parse_word(w)? })
    }

    pub fn mobius(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if ((a * d - b * c) - 1.0).abs() > 1e-9 {
            return usage("Möbius matrix must have determinant 1");
        }
        Ok(IsometryElement::Mobius { m: [a, b, c, d] })
    }

    pub fn space(&self) -> Space {
        match self {
            IsometryElement::Euclidean { v, .. } => Space::Euclidean(v.len()),
            IsometryElement::Tree { .. } => Space::Tree,
            IsometryElement::Mobius { .. } => Space::Hyperbolic,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        match (self, other) {
            (IsometryElement::Euclidean { q: q1, v: v1 }, IsometryElement::Euclidean { q: q2, v: v2 }) => {
                let n = v1.len();
                let q = (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| q1[i][k] * q2[k][j]).sum()).collect()).collect();
                let v = mat_vec(q1, v2).iter().zip(v1).map(|(a, b)| a + b).collect();
                IsometryElement::Euclidean { q, v }
            }
            (IsometryElement::Tree { word: a }, IsometryElement::Tree { word: b }) => {
                IsometryElement::Tree { word: tree::mul(a, b) }
            }
            (IsometryElement::Mobius { m: a }, IsometryElement::Mobius { m: b }) => IsometryElement::Mobius {
                m: [
                    a[0] * b[0] + a[1] * b[2],
                    a[0] * b[1] + a[1] * b[3],
                    a[2] * b[0] + a[3] * b[2],
                    a[2] * b[1] + a[3] * b[3],
                ],
            },
            _ => panic!("composing isometries of different spaces"),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            IsometryElement::Euclidean { q, v } => {
                let n = v.len();
                let qt: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| q[j][i]).collect()).collect();
                let w = mat_vec(&qt, v).into_iter().map(|a| -a).collect();
                IsometryElement::Euclidean { q: qt, v: w }
            }
            IsometryElement::Tree { word } => IsometryElement::Tree { word: tree::inverse(word) },
            IsometryElement::Mobius { m } => IsometryElement::Mobius { m: [m[3], -m[1], -m[2], m[0]] },
        }
    }

    pub fn power(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = IsometryElement::identity(self.space());
        for _ in 0..k.unsigned_abs() {
            out = out.compose(&base);
        }
        out
    }

    /// Coefficients `(p, q, r, s)` of the disk map `z ↦ (pz + q)/(rz + s)`.
    fn disk_coefficients(m: &[f64; 4]) -> [Complex64; 4] {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let c = [one, -i, one, i];
        let cinv = [i, i, -one, one];
        let mm = [m[0].into(), m[1].into(), m[2].into(), m[3].into()];
        let mul = |a: [Complex64; 4], b: [Complex64; 4]| {
            [a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]]
        };
        mul(mul(c, mm), cinv)
    }

    pub fn apply(&self, x: &SpacePoint) -> Result<SpacePoint> {
        if self.space() != x.space() {
            return Err(Error::SpaceMismatch(self.space().name(), x.space().name()));
        }
        Ok(self.act(x))
    }

    /// Action on points; panics on mixed spaces.
    pub fn act(&self, x: &SpacePoint) -> SpacePoint {
        match (self, x) {
            (IsometryElement::Euclidean { q, v }, SpacePoint::Euclidean(p)) => {
                SpacePoint::Euclidean(mat_vec(q, p).iter().zip(v).map(|(a, b)| a + b).collect())
            }
            (IsometryElement::Tree { word }, SpacePoint::Tree(p)) => SpacePoint::Tree(p.left_mul(word)),
            (IsometryElement::Mobius { m }, SpacePoint::Hyperbolic(z)) => {
                let k = Self::disk_coefficients(m);
                SpacePoint::Hyperbolic(hyperbolic::guard((k[0] * z + k[1]) / (k[2] * z + k[3])))
            }
            _ => panic!("acting on a point of another space"),
        }
    }

    pub fn apply_boundary(&self, xi: &BoundaryPoint) -> Result<BoundaryPoint> {
        if self.space() != xi.space() {
            return Err(Error::SpaceMismatch(self.space().name(), xi.space().name()));
        }
        Ok(self.act_boundary(xi))
    }

    pub fn act_boundary(&self, xi: &BoundaryPoint) -> BoundaryPoint {
        match (self, xi) {
            (IsometryElement::Euclidean { q, .. }, BoundaryPoint::Euclidean(u)) => {
                BoundaryPoint::Euclidean(mat_vec(q, u))
            }
            (IsometryElement::Tree { word }, BoundaryPoint::Tree(e)) => BoundaryPoint::Tree(e.left_mul(word)),
            (IsometryElement::Mobius { m }, BoundaryPoint::Hyperbolic(t)) => {
                let k = Self::disk_coefficients(m);
                let z = Complex64::from_polar(1.0, *t);
                BoundaryPoint::angle(((k[0] * z + k[1]) / (k[2] * z + k[3])).arg())
            }
            _ => panic!("acting on a boundary point of another space"),
        }
    }

    /// `g · c`, the geodesic `t ↦ g c(t)`.
    pub fn apply_fs(&self, c: &GeneralizedGeodesic) -> Result<GeneralizedGeodesic> {
        if self.space() != c.space() {
            return Err(Error::SpaceMismatch(self.space().name(), c.space().name()));
        }
        Ok(self.act_fs(c))
    }

    pub fn act_fs(&self, c: &GeneralizedGeodesic) -> GeneralizedGeodesic {
        c.map_by(|p| self.act(p), |b| self.act_boundary(b))
    }

    pub fn displacement(&self, x: &SpacePoint) -> f64 {
        self.act(x).dist(x)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&IsometryElement::identity(self.space()), tol)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        match (self, other) {
            (IsometryElement::Euclidean { q: q1, v: v1 }, IsometryElement::Euclidean { q: q2, v: v2 }) => {
                v1.len() == v2.len()
                    && v1.iter().zip(v2).all(|(a, b)| (a - b).abs() <= tol)
                    && q1.iter().flatten().zip(q2.iter().flatten()).all(|(a, b)| (a - b).abs() <= tol)
            }
            (IsometryElement::Tree { word: a }, IsometryElement::Tree { word: b }) => a == b,
            (IsometryElement::Mobius { m: a }, IsometryElement::Mobius { m: b }) => {
                let same = a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
                let neg = a.iter().zip(b).all(|(x, y)| (x + y).abs() <= tol);
                same || neg
            }
            _ => false,
        }
    }

    /// Hash key, rounding real coordinates to `1e-7`.
    pub fn key(&self) -> Vec<i64> {
        let r = |x: f64| (x * 1e7).round() as i64;
        match self {
            IsometryElement::Euclidean { q, v } => q.iter().flatten().chain(v).map(|&x| r(x)).collect(),
            IsometryElement::Tree { word } => word.iter().map(|&l| l as i64).collect(),
            IsometryElement::Mobius { m } => {
                let lead = m.iter().find(|x| x.abs() > 1e-9).copied().unwrap_or(1.0);
                let s = lead.signum();
                m.iter().map(|&x| r(s * x)).collect()
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            IsometryElement::Euclidean { q, v } => {
                if q == &identity_matrix(v.len()) {
                    format!("t{v:?}")
                } else {
                    format!("({q:?}, {v:?})")
                }
            }
            IsometryElement::Tree { word } => tree::format_word(word),
            IsometryElement::Mobius { m } => format!("{m:?}"),
        }
    }

    /// Orthogonal projection onto the fixed space of `Q`, and a point of
    /// `Min(g)`, for Euclidean elements.
    fn euclidean_parts(q: &[Vec<f64>], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = v.len();
        let a = DMatrix::from_fn(n, n, |i, j| q[i][j] - if i == j { 1.0 } else { 0.0 });
        let svd = a.clone().svd(true, true);
        let vt = svd.v_t.expect("svd with v");
        let mut p = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            if svd.singular_values[k] < 1e-9 {
                let row = vt.row(k);
                p += row.transpose() * row;
            }
        }
        let vv = nalgebra::DVector::from_column_slice(v);
        let pv = &p * &vv;
        let rhs = -(&vv - &pv);
        let x = a.svd(true, true).solve(&rhs, 1e-9).expect("least squares");
        (pv.iter().copied().collect(), x.iter().copied().collect())
    }

    /// `l(g)` in closed form.
    pub fn translation_length(&self) -> f64 {
        match self {
            IsometryElement::Euclidean { q, v } => {
                let (pv, _) = Self::euclidean_parts(q, v);
                crate::model_spaces::euclidean::norm(&pv)
            }
            IsometryElement::Tree { word } => tree::cyclic_split(word).1.len() as f64,
            IsometryElement::Mobius { m } => {
                let tr = (m[0] + m[3]).abs();
                if tr > 2.0 {
                    2.0 * (tr / 2.0).acosh()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn classify(&self) -> Classification {
        match self {
            IsometryElement::Mobius { m } => {
                let tr = (m[0] + m[3]).abs();
                if tr > 2.0 + 1e-9 {
                    Classification::Hyperbolic
                } else if tr < 2.0 - 1e-9 || self.is_identity(1e-9) {
                    Classification::Elliptic
                } else {
                    Classification::Unresolved
                }
            }
            _ => {
                if self.translation_length() > 1e-9 {
                    Classification::Hyperbolic
                } else {
                    Classification::Elliptic
                }
            }
        }
    }

    /// A line `c` with `g c(t) = c(t + l(g))`.
    pub fn axis(&self) -> Result<GeneralizedGeodesic> {
        if self.classify() != Classification::Hyperbolic {
            return usage("axis requested for a non-hyperbolic element");
        }
        match self {
            IsometryElement::Euclidean { q, v } => {
                let (pv, x) = Self::euclidean_parts(q, v);
                GeneralizedGeodesic::euclidean_line(&x, &pv)
            }
            IsometryElement::Tree { word } => {
                let (u, c) = tree::cyclic_split(word);
                let fwd = TreeEnd::new(&u, &c)?;
                let back = TreeEnd::new(&u, &tree::inverse(&c))?;
                GeneralizedGeodesic::tree_line(&back, &fwd)
            }
            IsometryElement::Mobius { m } => {
                let (a, b, c, d) = (m[0], m[1], m[2], m[3]);
                // fixed points in the upper half plane closure, as points of ℝ ∪ {∞}
                let fixed: Vec<Option<f64>> = if c.abs() < 1e-14 {
                    vec![Some(b / (d - a)), None]
                } else {
                    let disc = ((d - a).powi(2) + 4.0 * b * c).sqrt();
                    vec![Some((a - d + disc) / (2.0 * c)), Some((a - d - disc) / (2.0 * c))]
                };
                let to_angle = |w: Option<f64>| match w {
                    None => 0.0,
                    Some(x) => {
                        let z = Complex64::new(x, 0.0);
                        let i = Complex64::new(0.0, 1.0);
                        ((z - i) / (z + i)).arg()
                    }
                };
                // attracting fixed point: |derivative| = 1/(cw + d)² < 1
                let attracting = |w: Option<f64>| match w {
                    None => (a / d).abs() > 1.0,
                    Some(x) => (c * x + d).powi(2) > 1.0,
                };
                let (fwd, back) = if attracting(fixed[0]) { (fixed[0], fixed[1]) } else { (fixed[1], fixed[0]) };
                GeneralizedGeodesic::disk_line(to_angle(back), to_angle(fwd))
            }
        }
    }

    /// `d_g(x) ≤ l(g) + tol`.
    pub fn min_set_test(&self, x: &SpacePoint, tol: f64) -> bool {
        self.displacement(x) <= self.translation_length() + tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Elliptic,
    Hyperbolic,
    Unresolved,
}

/// Minimizes the displacement over a grid around the space's origin and
/// refines locally. Returns the minimum and a minimizer.
pub fn minimize_displacement(g: &IsometryElement, radius: f64, step: f64) -> (f64, SpacePoint) {
    match g.space() {
        Space::Euclidean(n) => {
            let k = (radius / step).ceil() as i64;
            let mut best = (f64::INFINITY, vec![0.0; n]);
            let mut idx = vec![-k; n];
            loop {
                let x: Vec<f64> = idx.iter().map(|&i| i as f64 * step).collect();
                let d = g.displacement(&SpacePoint::Euclidean(x.clone()));
                if d < best.0 {
                    best = (d, x);
                }
                let mut j = 0;
                while j < n {
                    idx[j] += 1;
                    if idx[j] <= k {
                        break;
                    }
                    idx[j] = -k;
                    j += 1;
                }
                if j == n {
                    break;
                }
            }
            let (d, x) = pattern_search(|p: &[f64]| g.displacement(&SpacePoint::Euclidean(p.to_vec())), best.1, step);
            (d, SpacePoint::Euclidean(x))
        }
        Space::Tree => {
            let depth = radius.floor() as usize;
            let mut best = (f64::INFINITY, SpacePoint::Tree(tree::TreePoint::root()));
            let mut layer = vec![Vec::<tree::Letter>::new()];
            let m = (1.0 / step).round().max(1.0) as usize;
            for level in 0..=depth {
                let mut next = Vec::new();
                for w in &layer {
                    let p = SpacePoint::Tree(tree::TreePoint::vertex(w));
                    let d = g.displacement(&p);
                    if d < best.0 {
                        best = (d, p);
                    }
                    if level == depth {
                        continue;
                    }
                    for l in tree::LETTERS {
                        if w.last() == Some(&tree::inv(l)) {
                            continue;
                        }
                        for i in 1..m {
                            let p = SpacePoint::Tree(tree::TreePoint::on_edge(w, l, i as f64 / m as f64).unwrap());
                            let d = g.displacement(&p);
                            if d < best.0 {
                                best = (d, p);
                            }
                        }
                        next.push(tree::mul(w, &[l]));
                    }
                }
                layer = next;
            }
            best
        }
        Space::Hyperbolic => {
            let to_xy = |p: &[f64]| -> SpacePoint {
                let z = hyperbolic::guard(Complex64::new(p[0], p[1]));
                SpacePoint::Hyperbolic(z)
            };
            let rmax = (radius / 2.0).tanh();
            let nr = (radius / step).ceil() as usize;
            let mut best = (f64::INFINITY, vec![0.0, 0.0]);
            for i in 0..=nr {
                let rho = (i as f64 * step).min(radius);
                let r = (rho / 2.0).tanh().min(rmax);
                let na = ((std::f64::consts::TAU * rho.sinh().max(step)) / step).ceil().clamp(1.0, 720.0) as usize;
                for j in 0..na {
                    let th = std::f64::consts::TAU * j as f64 / na as f64;
                    let p = vec![r * th.cos(), r * th.sin()];
                    let d = g.displacement(&to_xy(&p));
                    if d < best.0 {
                        best = (d, p);
                    }
                }
            }
            let (d, p) = pattern_search(|p: &[f64]| g.displacement(&to_xy(p)), best.1, step * 0.5 * (1.0 - rmax * rmax));
            (d, to_xy(&p))
        }
    }
}

/// Compass search from `x` with initial step `h`.
fn pattern_search(f: impl Fn(&[f64]) -> f64, mut x: Vec<f64>, mut h: f64) -> (f64, Vec<f64>) {
    let mut fx = f(&x);
    let n = x.len();
    while h > 1e-12 {
        let mut moved = false;
        for i in 0..n {
            for s in [h, -h] {
                let mut y = x.clone();
                y[i] += s;
                let fy = f(&y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    moved = true;
                }
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    (fx, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translation_and_rotation() {
        let t = IsometryElement::translation(&[3.0, 4.0]);
        assert_eq!(t.translation_length(), 5.0);
        assert_eq!(t.classify(), Classification::Hyperbolic);
        let r = IsometryElement::rotation(std::f64::consts::PI);
        assert!((r.displacement(&SpacePoint::euclidean(&[1.0, 0.0])) - 2.0).abs() < 1e-12);
        assert!(r.translation_length() < 1e-12);
        assert!(r.min_set_test(&SpacePoint::euclidean(&[0.0, 0.0]), 1e-6));
        assert!(!r.min_set_test(&SpacePoint::euclidean(&[0.1, 0.0]), 1e-6));
    }

    #[test]
    fn free_group_examples() {
        let a = IsometryElement::word("a").unwrap();
        let b = SpacePoint::tree_vertex("b").unwrap();
        assert_eq!(a.act(&b), SpacePoint::tree_vertex("ab").unwrap());
        assert_eq!(a.displacement(&SpacePoint::tree_vertex("").unwrap()), 1.0);
        let g = IsometryElement::word("abA").unwrap();
        assert_eq!(g.translation_length(), 1.0);
        let (m, _) = minimize_displacement(&g, 4.0, 0.05);
        assert!((m - 1.0).abs() < 1e-4);
        let bb = IsometryElement::word("b").unwrap();
        assert!(!bb.min_set_test(&SpacePoint::tree_vertex("a").unwrap(), 1e-9));
        assert_eq!(bb.displacement(&SpacePoint::tree_vertex("a").unwrap()), 3.0);
    }

    #[test]
    fn mobius_translation_length() {
        let g = IsometryElement::mobius(2.0, 0.0, 0.0, 0.5).unwrap();
        let l = g.translation_length();
        assert!((l - 2.0 * 2f64.ln()).abs() < 1e-12);
        let (m, _) = minimize_displacement(&g, 3.0, 0.05);
        assert!((m - l).abs() < 1e-4, "{m} vs {l}");
        let axis = g.axis().unwrap();
        let (b, f) = axis.endpoints();
        assert!(f.approx_eq(&crate::model_spaces::Endpoint::Ideal(BoundaryPoint::angle(0.0)), 1e-9));
        assert!(b.approx_eq(&crate::model_spaces::Endpoint::Ideal(BoundaryPoint::angle(std::f64::consts::PI)), 1e-9));
        assert!(axis.at_zero().as_disk().unwrap().norm() < 1e-9);
    }

    #[test]
    fn classification_of_parabolics_is_unresolved() {
        let p = IsometryElement::mobius(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(p.classify(), Classification::Unresolved);
        assert_eq!(IsometryElement::identity(Space::Hyperbolic).classify(), Classification::Elliptic);
        assert!(p.axis().is_err());
    }

    #[test]
    fn group_laws() {
        let g = IsometryElement::mobius(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!(g.compose(&g.inverse()).is_identity(1e-12));
        let e = IsometryElement::euclidean(vec![vec![0.0, -1.0], vec![1.0, 0.0]], vec![1.0, 2.0]).unwrap();
        assert!(e.compose(&e.inverse()).is_identity(1e-12));
        assert!(IsometryElement::euclidean(vec![vec![2.0]], vec![0.0]).is_err());
        assert!(IsometryElement::mobius(2.0, 0.0, 0.0, 2.0).is_err());
    }
}
