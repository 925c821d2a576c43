//! Convergence monitors.
//!
//! `d_FS`-convergence is equivalent to uniform convergence on compact time
//! windows. The helpers here produce both sides of that equivalence for a
//! sequence of geodesics, and the comparison points `σ_t(s)` that converge
//! to the ray from a nearby base point toward the same end.

use serde::{Deserialize, Serialize};

use super::{dist_fs, FlowMetricConfig, GeneralizedGeodesic};
use crate::error::Result;
use crate::model_spaces::{ray_unchecked, Endpoint, SpacePoint};

/// `sup_{|t| ≤ k} d_X(c(t), d(t))` on a grid of `n + 1` times.
pub fn sup_distance(c: &GeneralizedGeodesic, d: &GeneralizedGeodesic, k: f64, n: usize) -> f64 {
    let (ec, ed) = (c.evaluator(), d.evaluator());
    (0..=n)
        .map(|i| {
            let t = -k + 2.0 * k * i as f64 / n as f64;
            ec.at(t).dist(&ed.at(t))
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SequenceMonitor {
    pub sup_window: Vec<f64>,
    pub fs_upper: Vec<f64>,
    /// Largest increase between consecutive terms, over both sequences.
    pub worst_increase: f64,
    pub converges_sup: bool,
    pub converges_fs: bool,
}

impl SequenceMonitor {
    pub fn agree(&self) -> bool {
        self.converges_sup == self.converges_fs
    }
}

/// Tracks `d_FS(c_n, c)` and the sup-distance on `[−k, k]` along a sequence.
/// A sequence counts as converging when it is non-increasing up to `slack`
/// and its last term is below `threshold`.
pub fn monitor_sequence(
    seq: &[GeneralizedGeodesic],
    limit: &GeneralizedGeodesic,
    k: f64,
    cfg: &FlowMetricConfig,
    slack: f64,
    threshold: f64,
) -> Result<SequenceMonitor> {
    let mut sup_window = Vec::with_capacity(seq.len());
    let mut fs_upper = Vec::with_capacity(seq.len());
    for c in seq {
        sup_window.push(sup_distance(c, limit, k, 2000));
        fs_upper.push(dist_fs(c, limit, cfg)?.upper);
    }
    let rise = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let (rs, rf) = (rise(&sup_window), rise(&fs_upper));
    let ok = |v: &[f64], r: f64| r <= slack && v.last().is_some_and(|&x| x <= threshold);
    Ok(SequenceMonitor {
        converges_sup: ok(&sup_window, rs),
        converges_fs: ok(&fs_upper, rf),
        worst_increase: rs.max(rf),
        sup_window,
        fs_upper,
    })
}

/// `σ_t(s)`: the point at distance `s` from `x'` on the geodesic toward `c(t)`.
pub fn sigma_point(x_prime: &SpacePoint, c: &GeneralizedGeodesic, t: f64, s: f64) -> SpacePoint {
    ray_unchecked(x_prime, &Endpoint::Point(c.evaluate(t))).at(s)
}

/// Bound on `d(σ_t(s), σ_{t'}(s))` for `t' ≥ t ≥ a + s`, when `c` is a ray
/// with `c(0) = x` and `d(x, x') ≤ a`: `s·a/(t − a)`.
pub fn sigma_cauchy_bound(a: f64, t: f64, s: f64) -> f64 {
    if t <= a + s {
        return f64::INFINITY;
    }
    s * a / (t - a)
}

/// A time after which the family `σ_t(s)` moves by at most `eps`.
pub fn sigma_threshold(eps: f64, a: f64, s: f64) -> f64 {
    a + s * (a / eps).max(1.0) + 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_converges_in_the_plane() {
        let x = SpacePoint::euclidean(&[0.0, 0.0]);
        let xp = SpacePoint::euclidean(&[0.0, 1.0]);
        let end = crate::model_spaces::BoundaryPoint::Euclidean(vec![1.0, 0.0]);
        let ray = GeneralizedGeodesic::connect(&x, &Endpoint::Ideal(end)).unwrap();
        let t0 = sigma_threshold(0.01, 1.0, 2.0);
        let p = sigma_point(&xp, &ray, t0, 2.0);
        let q = sigma_point(&xp, &ray, 10.0 * t0, 2.0);
        assert!(p.dist(&q) <= 0.01);
        assert!(p.dist(&q) <= sigma_cauchy_bound(1.0, t0, 2.0));
    }
}
