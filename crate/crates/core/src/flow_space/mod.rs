//! The flow space `FS(X)` of generalized geodesics.
//!
//! A generalized geodesic is a map `c: ℝ → X` that is a unit-speed geodesic
//! on an interval `[c₋, c₊]` and constant outside it. The flow is
//! `Φ_τ(c)(t) = c(t + τ)` and the metric is
//!
//! ```text
//! d_FS(c, d) = ∫ d_X(c(t), d(t)) / (2 e^{|t|}) dt.
//! ```
//!
//! Non-constant geodesics store `(c₋, c₊)`, the two endpoints in `X̄`, and
//! an anchor `c(t₀)` with `t₀ = clamp(0, c₋, c₊)`, so the anchor is `c(0)`.

pub mod convergence;
pub mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::model_spaces::{ray_unchecked, BoundaryPoint, Endpoint, Ray, Space, SpacePoint, GEOM_TOL};
pub use quadrature::{dist_fs, FlowMetricConfig};

/// `ℝ ∪ {±∞}` with `±∞ − τ = ±∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub fn value(self) -> f64 {
        match self {
            ExtendedReal::NegInf => f64::NEG_INFINITY,
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInf => f64::INFINITY,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::PosInf
        } else if v == f64::NEG_INFINITY {
            ExtendedReal::NegInf
        } else {
            ExtendedReal::Finite(v)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn shift(self, tau: f64) -> Self {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(v - tau),
            other => other,
        }
    }
}

/// The non-constant case of a generalized geodesic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moving {
    c_minus: ExtendedReal,
    c_plus: ExtendedReal,
    anchor_time: f64,
    anchor_point: SpacePoint,
    backward: Endpoint,
    forward: Endpoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneralizedGeodesic {
    Constant(SpacePoint),
    NonConstant(Moving),
}

/// Precomputed rays for repeated evaluation.
#[derive(Clone, Debug)]
pub struct Evaluator {
    inner: EvalKind,
}

#[derive(Clone, Debug)]
enum EvalKind {
    Constant(SpacePoint),
    Moving { lo: f64, hi: f64, t0: f64, anchor: SpacePoint, fwd: Ray, bwd: Ray },
}

impl Evaluator {
    pub fn at(&self, t: f64) -> SpacePoint {
        match &self.inner {
            EvalKind::Constant(p) => p.clone(),
            EvalKind::Moving { lo, hi, t0, anchor, fwd, bwd } => {
                let t = t.clamp(*lo, *hi);
                if t == *t0 {
                    anchor.clone()
                } else if t > *t0 {
                    fwd.at(t - t0)
                } else {
                    bwd.at(t0 - t)
                }
            }
        }
    }
}

fn clamp_ext(t: f64, lo: ExtendedReal, hi: ExtendedReal) -> f64 {
    t.max(lo.value()).min(hi.value())
}

impl GeneralizedGeodesic {
    pub fn constant(p: SpacePoint) -> Self {
        GeneralizedGeodesic::Constant(p)
    }

    /// `c_{x,y}`: starts at `x` at time 0 and runs toward `target`.
    pub fn connect(x: &SpacePoint, target: &Endpoint) -> Result<Self> {
        if x.space() != target.space() {
            return Err(Error::SpaceMismatch(x.space().name(), target.space().name()));
        }
        Ok(Self::connect_unchecked(x, target))
    }

    pub(crate) fn connect_unchecked(x: &SpacePoint, target: &Endpoint) -> Self {
        let c_plus = match target {
            Endpoint::Point(y) => {
                let d = x.dist(y);
                if d == 0.0 {
                    return GeneralizedGeodesic::Constant(x.clone());
                }
                ExtendedReal::Finite(d)
            }
            Endpoint::Ideal(_) => ExtendedReal::PosInf,
        };
        GeneralizedGeodesic::NonConstant(Moving {
            c_minus: ExtendedReal::Finite(0.0),
            c_plus,
            anchor_time: 0.0,
            anchor_point: x.clone(),
            backward: Endpoint::Point(x.clone()),
            forward: target.clone(),
        })
    }

    /// The full line through `anchor = c(0)` with the given ends. The caller
    /// guarantees that `anchor` lies on the geodesic joining them.
    pub fn line(anchor: SpacePoint, backward: BoundaryPoint, forward: BoundaryPoint) -> Result<Self> {
        if anchor.space() != backward.space() || anchor.space() != forward.space() {
            return usage("line ends and anchor live in different spaces");
        }
        if backward.approx_eq(&forward, 1e-12) {
            return usage("a line needs two distinct ends");
        }
        Ok(GeneralizedGeodesic::NonConstant(Moving {
            c_minus: ExtendedReal::NegInf,
            c_plus: ExtendedReal::PosInf,
            anchor_time: 0.0,
            anchor_point: anchor,
            backward: Endpoint::Ideal(backward),
            forward: Endpoint::Ideal(forward),
        }))
    }

    /// Euclidean line `t ↦ p + t·u`.
    pub fn euclidean_line(p: &[f64], u: &[f64]) -> Result<Self> {
        let fwd = BoundaryPoint::direction(u)?;
        let BoundaryPoint::Euclidean(v) = &fwd else { unreachable!() };
        let back = BoundaryPoint::Euclidean(v.iter().map(|a| -a).collect());
        Self::line(SpacePoint::euclidean(p), back, fwd)
    }

    /// Hyperbolic line from boundary angle `back` to `fwd`, with `c(0)` the
    /// point closest to the origin.
    pub fn disk_line(back: f64, fwd: f64) -> Result<Self> {
        let anchor = crate::model_spaces::hyperbolic::line_anchor(back, fwd);
        Self::line(SpacePoint::Hyperbolic(anchor), BoundaryPoint::angle(back), BoundaryPoint::angle(fwd))
    }

    /// Tree line between two ends, with `c(0)` the vertex closest to the root.
    pub fn tree_line(back: &crate::model_spaces::TreeEnd, fwd: &crate::model_spaces::TreeEnd) -> Result<Self> {
        let anchor = crate::model_spaces::tree::line_anchor(back, fwd)?;
        Self::line(
            SpacePoint::Tree(anchor),
            BoundaryPoint::Tree(back.clone()),
            BoundaryPoint::Tree(fwd.clone()),
        )
    }

    /// Inverse of [`GeneralizedGeodesic::embed_finite`]: the segment from `x`
    /// to `y` with `c₋ = r`.
    pub fn from_finite(r: f64, x: &SpacePoint, y: &SpacePoint) -> Result<Self> {
        if x.space() != y.space() {
            return Err(Error::SpaceMismatch(x.space().name(), y.space().name()));
        }
        if x.dist(y) == 0.0 {
            return usage("finite geodesic needs distinct endpoints");
        }
        Ok(Self::connect_unchecked(x, &Endpoint::Point(y.clone())).flow(-r))
    }

    pub fn space(&self) -> Space {
        match self {
            GeneralizedGeodesic::Constant(p) => p.space(),
            GeneralizedGeodesic::NonConstant(m) => m.anchor_point.space(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, GeneralizedGeodesic::Constant(_))
    }

    pub fn c_minus(&self) -> ExtendedReal {
        match self {
            GeneralizedGeodesic::Constant(_) => ExtendedReal::NegInf,
            GeneralizedGeodesic::NonConstant(m) => m.c_minus,
        }
    }

    pub fn c_plus(&self) -> ExtendedReal {
        match self {
            GeneralizedGeodesic::Constant(_) => ExtendedReal::PosInf,
            GeneralizedGeodesic::NonConstant(m) => m.c_plus,
        }
    }

    /// Both ends infinite.
    pub fn is_line(&self) -> bool {
        matches!(self, GeneralizedGeodesic::NonConstant(m)
            if m.c_minus == ExtendedReal::NegInf && m.c_plus == ExtendedReal::PosInf)
    }

    /// Both `c₋` and `c₊` finite, or constant.
    pub fn is_finite(&self) -> bool {
        match self {
            GeneralizedGeodesic::Constant(_) => true,
            GeneralizedGeodesic::NonConstant(m) => m.c_minus.is_finite() && m.c_plus.is_finite(),
        }
    }

    /// `c(0)`.
    pub fn at_zero(&self) -> &SpacePoint {
        match self {
            GeneralizedGeodesic::Constant(p) => p,
            GeneralizedGeodesic::NonConstant(m) => &m.anchor_point,
        }
    }

    pub fn evaluator(&self) -> Evaluator {
        let inner = match self {
            GeneralizedGeodesic::Constant(p) => EvalKind::Constant(p.clone()),
            GeneralizedGeodesic::NonConstant(m) => EvalKind::Moving {
                lo: m.c_minus.value(),
                hi: m.c_plus.value(),
                t0: m.anchor_time,
                anchor: m.anchor_point.clone(),
                fwd: ray_unchecked(&m.anchor_point, &m.forward),
                bwd: ray_unchecked(&m.anchor_point, &m.backward),
            },
        };
        Evaluator { inner }
    }

    /// `c(t)`.
    pub fn evaluate(&self, t: f64) -> SpacePoint {
        match self {
            GeneralizedGeodesic::Constant(p) => p.clone(),
            GeneralizedGeodesic::NonConstant(m) => {
                let t = clamp_ext(t, m.c_minus, m.c_plus);
                if t == m.anchor_time {
                    m.anchor_point.clone()
                } else if t > m.anchor_time {
                    ray_unchecked(&m.anchor_point, &m.forward).at(t - m.anchor_time)
                } else {
                    ray_unchecked(&m.anchor_point, &m.backward).at(m.anchor_time - t)
                }
            }
        }
    }

    /// `Φ_τ(c)`, re-anchored at the new time 0.
    pub fn flow(&self, tau: f64) -> Self {
        match self {
            GeneralizedGeodesic::Constant(_) => self.clone(),
            GeneralizedGeodesic::NonConstant(m) => {
                if tau == 0.0 {
                    return self.clone();
                }
                let c_minus = m.c_minus.shift(tau);
                let c_plus = m.c_plus.shift(tau);
                let anchor_time = clamp_ext(0.0, c_minus, c_plus);
                let anchor_point = self.evaluate(anchor_time + tau);
                GeneralizedGeodesic::NonConstant(Moving {
                    c_minus,
                    c_plus,
                    anchor_time,
                    anchor_point,
                    backward: m.backward.clone(),
                    forward: m.forward.clone(),
                })
            }
        }
    }

    /// `t ↦ c(−t)`.
    pub fn reverse(&self) -> Self {
        match self {
            GeneralizedGeodesic::Constant(_) => self.clone(),
            GeneralizedGeodesic::NonConstant(m) => GeneralizedGeodesic::NonConstant(Moving {
                c_minus: ExtendedReal::from_f64(-m.c_plus.value()),
                c_plus: ExtendedReal::from_f64(-m.c_minus.value()),
                anchor_time: -m.anchor_time,
                anchor_point: m.anchor_point.clone(),
                backward: m.forward.clone(),
                forward: m.backward.clone(),
            }),
        }
    }

    /// `c|_{[−T,T]}`; `T = ∞` returns `c`.
    pub fn restrict(&self, t_max: f64) -> Self {
        let m = match self {
            GeneralizedGeodesic::Constant(_) => return self.clone(),
            GeneralizedGeodesic::NonConstant(m) => m,
        };
        if t_max == f64::INFINITY {
            return self.clone();
        }
        let t_max = t_max.max(0.0);
        let lo = m.c_minus.value().max(-t_max);
        let hi = m.c_plus.value().min(t_max);
        if lo >= hi {
            return GeneralizedGeodesic::Constant(self.evaluate(0.0));
        }
        let backward = if lo == m.c_minus.value() { m.backward.clone() } else { Endpoint::Point(self.evaluate(lo)) };
        let forward = if hi == m.c_plus.value() { m.forward.clone() } else { Endpoint::Point(self.evaluate(hi)) };
        GeneralizedGeodesic::NonConstant(Moving {
            c_minus: ExtendedReal::from_f64(lo),
            c_plus: ExtendedReal::from_f64(hi),
            anchor_time: m.anchor_time,
            anchor_point: m.anchor_point.clone(),
            backward,
            forward,
        })
    }

    /// The homotopy `H_τ(c) = c|_{[ln τ, −ln τ]}` into finite geodesics.
    pub fn homotopy_to_finite(&self, tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return usage(format!("homotopy parameter {tau} outside [0,1]"));
        }
        if tau == 0.0 {
            return Ok(self.clone());
        }
        Ok(self.restrict(-tau.ln()))
    }

    /// `(c(−∞), c(+∞))`.
    pub fn endpoints(&self) -> (Endpoint, Endpoint) {
        match self {
            GeneralizedGeodesic::Constant(p) => (Endpoint::Point(p.clone()), Endpoint::Point(p.clone())),
            GeneralizedGeodesic::NonConstant(m) => (m.backward.clone(), m.forward.clone()),
        }
    }

    /// `E(c) = (c₋, c(−∞), c(0), c(∞), c₊)`.
    pub fn embed(&self) -> Result<(ExtendedReal, Endpoint, SpacePoint, Endpoint, ExtendedReal)> {
        match self {
            GeneralizedGeodesic::Constant(_) => usage("E is defined on non-constant geodesics"),
            GeneralizedGeodesic::NonConstant(m) => {
                Ok((m.c_minus, m.backward.clone(), m.anchor_point.clone(), m.forward.clone(), m.c_plus))
            }
        }
    }

    /// `E_f(c) = (c₋, c(−∞), c(∞))` for finite non-constant `c`.
    pub fn embed_finite(&self) -> Result<(f64, SpacePoint, SpacePoint)> {
        match self {
            GeneralizedGeodesic::NonConstant(Moving {
                c_minus: ExtendedReal::Finite(r),
                backward: Endpoint::Point(x),
                forward: Endpoint::Point(y),
                ..
            }) => Ok((*r, x.clone(), y.clone())),
            _ => usage("E_f is defined on finite non-constant geodesics"),
        }
    }

    /// Applies an isometry given by its action on points and boundary points.
    pub fn map_by(
        &self,
        point: impl Fn(&SpacePoint) -> SpacePoint,
        boundary: impl Fn(&BoundaryPoint) -> BoundaryPoint,
    ) -> Self {
        let ep = |e: &Endpoint| match e {
            Endpoint::Point(p) => Endpoint::Point(point(p)),
            Endpoint::Ideal(b) => Endpoint::Ideal(boundary(b)),
        };
        match self {
            GeneralizedGeodesic::Constant(p) => GeneralizedGeodesic::Constant(point(p)),
            GeneralizedGeodesic::NonConstant(m) => GeneralizedGeodesic::NonConstant(Moving {
                c_minus: m.c_minus,
                c_plus: m.c_plus,
                anchor_time: m.anchor_time,
                anchor_point: point(&m.anchor_point),
                backward: ep(&m.backward),
                forward: ep(&m.forward),
            }),
        }
    }

    /// Structural comparison up to `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        match (self, other) {
            (GeneralizedGeodesic::Constant(p), GeneralizedGeodesic::Constant(q)) => {
                p.space() == q.space() && p.dist(q) <= tol
            }
            (GeneralizedGeodesic::NonConstant(a), GeneralizedGeodesic::NonConstant(b)) => {
                let close = |x: ExtendedReal, y: ExtendedReal| match (x, y) {
                    (ExtendedReal::Finite(u), ExtendedReal::Finite(v)) => (u - v).abs() <= tol,
                    _ => x == y,
                };
                close(a.c_minus, b.c_minus)
                    && close(a.c_plus, b.c_plus)
                    && a.anchor_point.space() == b.anchor_point.space()
                    && a.anchor_point.dist(&b.anchor_point) <= tol
                    && a.backward.approx_eq(&b.backward, tol)
                    && a.forward.approx_eq(&b.forward, tol)
            }
            _ => false,
        }
    }

    /// Checks the representation invariants.
    pub fn validate(&self) -> Result<()> {
        let GeneralizedGeodesic::NonConstant(m) = self else { return Ok(()) };
        let (lo, hi) = (m.c_minus.value(), m.c_plus.value());
        if !(lo < hi) || m.c_minus == ExtendedReal::PosInf || m.c_plus == ExtendedReal::NegInf {
            return usage("need c₋ < c₊");
        }
        if m.anchor_time != clamp_ext(0.0, m.c_minus, m.c_plus) {
            return usage("anchor must sit at clamp(0, c₋, c₊)");
        }
        match (&m.backward, m.c_minus) {
            (Endpoint::Point(_), ExtendedReal::Finite(_)) | (Endpoint::Ideal(_), ExtendedReal::NegInf) => {}
            _ => return usage("backward endpoint does not match c₋"),
        }
        match (&m.forward, m.c_plus) {
            (Endpoint::Point(_), ExtendedReal::Finite(_)) | (Endpoint::Ideal(_), ExtendedReal::PosInf) => {}
            _ => return usage("forward endpoint does not match c₊"),
        }
        if let (Endpoint::Point(x), Endpoint::Point(y)) = (&m.backward, &m.forward) {
            if (x.dist(y) - (hi - lo)).abs() > GEOM_TOL * (1.0 + hi - lo) {
                return usage("segment length disagrees with c₊ − c₋");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(x: f64, y: f64) -> SpacePoint {
        SpacePoint::euclidean(&[x, y])
    }

    #[test]
    fn segment_evaluation_and_flow() {
        let c = GeneralizedGeodesic::connect(&e(0.0, 0.0), &Endpoint::Point(e(5.0, 0.0))).unwrap();
        assert_eq!(c.evaluate(-3.0), e(0.0, 0.0));
        assert_eq!(c.evaluate(2.0), e(2.0, 0.0));
        let f = c.flow(2.0);
        assert_eq!(f.c_minus(), ExtendedReal::Finite(-2.0));
        assert_eq!(f.c_plus(), ExtendedReal::Finite(3.0));
        assert_eq!(f.evaluate(1.0), e(3.0, 0.0));
        assert!(f.validate().is_ok());
        assert_eq!(c.flow(0.0), c);
    }

    #[test]
    fn restriction_examples() {
        let line = GeneralizedGeodesic::euclidean_line(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let r = line.restrict(1.0);
        assert_eq!(r.c_minus(), ExtendedReal::Finite(-1.0));
        assert_eq!(r.c_plus(), ExtendedReal::Finite(1.0));
        assert_eq!(r.evaluate(7.0), e(1.0, 0.0));
        let seg = line.restrict(5.0);
        assert_eq!(seg.restrict(10.0), seg);
        assert_eq!(line.restrict(f64::INFINITY), line);
        let h = line.homotopy_to_finite(1.0).unwrap();
        assert_eq!(h, GeneralizedGeodesic::Constant(e(0.0, 0.0)));
        assert_eq!(line.homotopy_to_finite(0.0).unwrap(), line);
        let h2 = line.homotopy_to_finite((-2.0f64).exp()).unwrap();
        assert!((h2.c_plus().value() - 2.0).abs() < 1e-12);
        assert_eq!(h2.evaluate(5.0).as_euclidean().unwrap()[0].round(), 2.0);
    }

    #[test]
    fn embedding_coordinates() {
        let line = GeneralizedGeodesic::euclidean_line(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let (lo, back, p, fwd, hi) = line.embed().unwrap();
        assert_eq!((lo, hi), (ExtendedReal::NegInf, ExtendedReal::PosInf));
        assert_eq!(back, Endpoint::Ideal(BoundaryPoint::Euclidean(vec![-1.0, -0.0])));
        assert_eq!(fwd, Endpoint::Ideal(BoundaryPoint::Euclidean(vec![1.0, 0.0])));
        assert_eq!(p, e(0.0, 0.0));
        let seg = GeneralizedGeodesic::from_finite(0.0, &e(0.0, 0.0), &e(3.0, 4.0)).unwrap();
        assert_eq!(seg.c_plus(), ExtendedReal::Finite(5.0));
        assert_eq!(seg.embed_finite().unwrap(), (0.0, e(0.0, 0.0), e(3.0, 4.0)));
        assert!(GeneralizedGeodesic::from_finite(0.0, &e(1.0, 1.0), &e(1.0, 1.0)).is_err());
        assert!(GeneralizedGeodesic::Constant(e(0.0, 0.0)).embed().is_err());
    }

    #[test]
    fn connect_examples() {
        let x = e(0.0, 0.0);
        assert_eq!(GeneralizedGeodesic::connect(&x, &Endpoint::Point(x.clone())).unwrap(), GeneralizedGeodesic::Constant(x.clone()));
        let c = GeneralizedGeodesic::connect(&x, &Endpoint::Point(e(0.0, 7.0))).unwrap();
        assert_eq!(c.c_plus(), ExtendedReal::Finite(7.0));
        let ray = GeneralizedGeodesic::connect(&x, &Endpoint::Ideal(BoundaryPoint::Euclidean(vec![1.0, 0.0]))).unwrap();
        let (a, b) = ray.endpoints();
        assert_eq!(a, Endpoint::Point(x));
        assert_eq!(b, Endpoint::Ideal(BoundaryPoint::Euclidean(vec![1.0, 0.0])));
    }

    #[test]
    fn reverse_is_involutive() {
        let seg = GeneralizedGeodesic::from_finite(-1.0, &e(0.0, 0.0), &e(3.0, 4.0)).unwrap();
        let r = seg.reverse();
        assert_eq!(r.evaluate(-0.5), seg.evaluate(0.5));
        assert_eq!(r.reverse(), seg);
    }
}
