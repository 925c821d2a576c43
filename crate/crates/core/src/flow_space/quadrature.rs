//! Certified evaluation of `d_FS`.
//!
//! Between the breakpoints `{c₋, c₊, d₋, d₊, 0}` both geodesics are affine
//! reparametrizations of geodesics, so `f(t) = d_X(c(t), d(t))` is convex
//! there. On a piece `[a, b]` with midpoint `m` the two chords through
//! `f(a), f(m), f(b)` lie above `f`, and the lines through `(m, f(m))` with
//! the outer secant slopes lie below it. Both bounds are integrated against
//! `e^{−|t|}/2` in closed form. The tails beyond `±A` use that `f` is
//! 2-Lipschitz.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::GeneralizedGeodesic;
use crate::error::{Error, Result};
use crate::model_spaces::{hyperbolic, interpolate_unchecked, CertifiedLength, Recentre, Space, SpacePoint};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowMetricConfig {
    /// Width of the returned bracket.
    pub tolerance: f64,
    pub max_subdivisions: usize,
}

impl Default for FlowMetricConfig {
    fn default() -> Self {
        FlowMetricConfig { tolerance: 1e-9, max_subdivisions: 400_000 }
    }
}

impl FlowMetricConfig {
    pub fn with_tolerance(tolerance: f64) -> Self {
        FlowMetricConfig { tolerance, ..Default::default() }
    }
}

/// `∫_a^b (α + βt) e^{−|t|}/2 dt` for an interval not straddling 0.
fn weighted_line(alpha: f64, beta: f64, a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        let f = |t: f64| -(alpha + beta * t + beta) * (-t).exp() / 2.0;
        f(b) - f(a)
    } else {
        debug_assert!(b <= 0.0);
        let f = |t: f64| (alpha + beta * t - beta) * t.exp() / 2.0;
        f(b) - f(a)
    }
}

/// Integral of the line through `(t0, y0)` with slope `s` over `[a, b]`.
fn line_through(t0: f64, y0: f64, s: f64, a: f64, b: f64) -> f64 {
    weighted_line(y0 - s * t0, s, a, b)
}

#[derive(Clone, Copy, Debug)]
struct Piece {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    lo: f64,
    hi: f64,
    raw_gap: f64,
}

impl Piece {
    fn new(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> Self {
        let m = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let sl = (fm - fa) / h;
        let sr = (fb - fm) / h;
        let hi = line_through(a, fa, sl, a, m) + line_through(m, fm, sr, m, b);
        let lo = line_through(m, fm, sr, a, m) + line_through(m, fm, sl, m, b);
        // lo > hi only when f fails to be convex numerically; the raw gap
        // keeps such pieces at the front of the queue
        let raw_gap = (hi - lo).abs();
        let lo = lo.max(0.0).min(hi);
        Piece { a, b, fa, fm, fb, lo, hi, raw_gap }
    }

    fn gap(&self) -> f64 {
        self.raw_gap
    }
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.gap().total_cmp(&other.gap()) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gap().total_cmp(&other.gap())
    }
}

/// Certified bracket for `d_FS(c, d)`.
pub fn dist_fs(c: &GeneralizedGeodesic, d: &GeneralizedGeodesic, cfg: &FlowMetricConfig) -> Result<CertifiedLength> {
    if c.space() != d.space() {
        return Err(Error::SpaceMismatch(c.space().name(), d.space().name()));
    }
    if !(cfg.tolerance > 0.0) {
        return Err(Error::Usage("tolerance must be positive".into()));
    }
    if let (GeneralizedGeodesic::Constant(x), GeneralizedGeodesic::Constant(y)) = (c, d) {
        return Ok(CertifiedLength::exact(x.dist(y)));
    }
    // move the midpoint of c(0) and d(0) to the origin so that coordinates stay small
    let mid = interpolate_unchecked(c.at_zero(), d.at_zero(), 0.5);
    let chart = Recentre::at(&mid);
    let cc = c.map_by(|p| chart.point(p), |b| chart.boundary(b));
    let dd = d.map_by(|p| chart.point(p), |b| chart.boundary(b));
    let horizon = match c.space() {
        Space::Hyperbolic => (hyperbolic::RELIABLE_RADIUS - 0.5 * c.at_zero().dist(d.at_zero())).max(1.0),
        _ => f64::INFINITY,
    };
    let (ec, ed) = (cc.evaluator(), dd.evaluator());
    let f = |t: f64| -> f64 {
        let p: SpacePoint = ec.at(t);
        p.dist(&ed.at(t))
    };
    Ok(integrate_convex_pieces(f, &breakpoints(c, d), support(c, d), horizon, cfg))
}

fn breakpoints(c: &GeneralizedGeodesic, d: &GeneralizedGeodesic) -> Vec<f64> {
    let mut v = vec![0.0];
    for g in [c, d] {
        v.extend(g.c_minus().finite());
        v.extend(g.c_plus().finite());
    }
    v
}

/// Smallest interval outside of which both geodesics are constant.
fn support(c: &GeneralizedGeodesic, d: &GeneralizedGeodesic) -> (f64, f64) {
    let span = |g: &GeneralizedGeodesic| match g {
        GeneralizedGeodesic::Constant(_) => (f64::INFINITY, f64::NEG_INFINITY),
        _ => (g.c_minus().value(), g.c_plus().value()),
    };
    let (a, b) = (span(c), span(d));
    (a.0.min(b.0), a.1.max(b.1))
}

/// `[lower, upper]` for `∫_A^∞ g(t) e^{−t}/2 dt` over all 2-Lipschitz
/// `g ≥ 0` with `g(A) = v`.
fn lipschitz_tail(v: f64, big_a: f64) -> (f64, f64) {
    let w = (-big_a).exp() / 2.0;
    ((v - 2.0 + 2.0 * (-v / 2.0).exp()) * w, (v + 2.0) * w)
}

/// Integrates `f · e^{−|t|}/2` over ℝ for `f ≥ 0`, 2-Lipschitz, convex
/// between consecutive breakpoints, and constant outside `support`.
/// Evaluations stay inside `[−horizon, horizon]`.
pub fn integrate_convex_pieces(
    f: impl Fn(f64) -> f64,
    breaks: &[f64],
    support: (f64, f64),
    horizon: f64,
    cfg: &FlowMetricConfig,
) -> CertifiedLength {
    let tol = cfg.tolerance;
    // both Lipschitz tails together have width at most 4e^{-A}
    let big_a = (8.0 / tol).ln().max(1.0).min(horizon);
    let (fl, fr) = (f(-big_a), f(big_a));
    let tail = |fx: f64, constant: bool| -> (f64, f64) {
        if constant {
            let w = (-big_a).exp() / 2.0;
            (fx * w, fx * w)
        } else {
            lipschitz_tail(fx, big_a)
        }
    };
    let (tl_lo, tl_hi) = tail(fl, support.0 >= -big_a);
    let (tr_lo, tr_hi) = tail(fr, support.1 <= big_a);

    let mut pts: Vec<f64> = breaks.iter().copied().filter(|t| t.abs() < big_a).collect();
    pts.push(-big_a);
    pts.push(big_a);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));

    let mut heap = BinaryHeap::new();
    let mut fa = fl;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let fb = if b == big_a { fr } else { f(b) };
        let fm = f(0.5 * (a + b));
        heap.push(Piece::new(a, b, fa, fm, fb));
        fa = fb;
    }

    let tail_gap = (tl_hi - tl_lo) + (tr_hi - tr_lo);
    let target = (0.9 * tol - tail_gap).max(0.0);
    let mut gap: f64 = heap.iter().map(Piece::gap).sum();
    let mut splits = 0usize;
    let mut converged = true;
    // 0.9 leaves room for the rounding allowance added at the end
    while gap > target {
        if splits >= cfg.max_subdivisions {
            converged = false;
            break;
        }
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if m - p.a <= 1e-13 * (1.0 + m.abs()) {
            // cannot split further; keep it and stop
            heap.push(p);
            converged = false;
            break;
        }
        let left = Piece::new(p.a, m, p.fa, f(0.5 * (p.a + m)), p.fm);
        let right = Piece::new(m, p.b, p.fm, f(0.5 * (m + p.b)), p.fb);
        gap += left.gap() + right.gap() - p.gap();
        heap.push(left);
        heap.push(right);
        splits += 1;
        if splits % 1024 == 0 {
            gap = heap.iter().map(Piece::gap).sum();
        }
    }
    let lo: f64 = heap.iter().map(|p| p.lo).sum::<f64>() + tl_lo + tr_lo;
    let hi: f64 = heap.iter().map(|p| p.hi).sum::<f64>() + tl_hi + tr_hi;
    // floating-point error in f and in the summation
    let round = (1e-12 * (1.0 + hi.abs())).min(0.05 * tol);
    let (lo, hi) = (lo - round, hi + round);
    CertifiedLength { lower: lo.max(0.0), upper: hi, converged: converged && hi - lo <= tol * (1.0 + 1e-9) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_integrals_are_exact() {
        // ∫_0^∞ e^{-t}/2 = 1/2 and ∫_0^∞ t e^{-t}/2 = 1/2
        assert!((weighted_line(1.0, 0.0, 0.0, 60.0) - 0.5).abs() < 1e-15);
        assert!((weighted_line(0.0, 1.0, 0.0, 60.0) - 0.5).abs() < 1e-15);
        assert!((weighted_line(0.0, -1.0, -60.0, 0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_integrand_integrates_to_itself() {
        let r = integrate_convex_pieces(|_| 3.0, &[0.0], (f64::INFINITY, f64::NEG_INFINITY), f64::INFINITY, &FlowMetricConfig::default());
        assert!(r.contains(3.0, 1e-12) && r.width() <= 1e-9);
    }

    #[test]
    fn abs_integrand() {
        // ∫|t| e^{-|t|}/2 dt = 1
        let r = integrate_convex_pieces(f64::abs, &[0.0], (f64::NEG_INFINITY, f64::INFINITY), f64::INFINITY, &FlowMetricConfig::default());
        assert!(r.contains(1.0, 1e-12), "{r:?}");
        assert!(r.converged);
    }
}
