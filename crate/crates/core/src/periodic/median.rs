//! Distances from a Euclidean generalized geodesic to families of parallel
//! lines.
//!
//! For a unit vector `u`, the line `L_p(t) = p + t·u` satisfies
//! `d_FS(c, L_p) = ∫ |w(t) − p| dμ(t)` with `w(t) = c(t) − t·u` and
//! `dμ = e^{−|t|}/2 dt`. Minimizing over `p` is a weighted geometric median
//! problem. The weight is replaced by point masses at panel midpoints, which
//! changes the objective by at most a computed `η` uniformly in `p`; the
//! discrete problem is solved with an explicit dual lower bound.

use crate::flow_space::GeneralizedGeodesic;
use crate::model_spaces::Endpoint;

const HORIZON: f64 = 40.0;

/// `c(t) = anchor + (clamp(t, lo, hi) − t0)·v`.
#[derive(Clone, Debug)]
pub struct EuclideanProfile {
    pub anchor: Vec<f64>,
    pub t0: f64,
    pub v: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

impl EuclideanProfile {
    pub fn of(c: &GeneralizedGeodesic) -> Option<Self> {
        let anchor = c.at_zero().as_euclidean()?.to_vec();
        let n = anchor.len();
        let (lo, hi) = (c.c_minus().value(), c.c_plus().value());
        if c.is_constant() {
            return Some(EuclideanProfile { anchor, t0: 0.0, v: vec![0.0; n], lo: 0.0, hi: 0.0 });
        }
        let t0 = 0.0f64.clamp(lo, hi);
        let unit = |d: Vec<f64>| {
            let l = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            (l > 0.0).then(|| d.iter().map(|x| x / l).collect::<Vec<_>>())
        };
        let (back, fwd) = c.endpoints();
        // read the direction off the endpoint farther from c(0)
        let from_fwd = match &fwd {
            Endpoint::Ideal(b) => match b {
                crate::model_spaces::BoundaryPoint::Euclidean(d) => Some(d.clone()),
                _ => None,
            },
            Endpoint::Point(_) if hi - t0 < t0 - lo => None,
            Endpoint::Point(y) => unit(y.as_euclidean()?.iter().zip(&anchor).map(|(a, b)| a - b).collect()),
        };
        let v = match from_fwd {
            Some(v) => v,
            None => match &back {
                Endpoint::Ideal(crate::model_spaces::BoundaryPoint::Euclidean(d)) => d.iter().map(|x| -x).collect(),
                Endpoint::Point(x) => unit(anchor.iter().zip(x.as_euclidean()?).map(|(a, b)| a - b).collect())?,
                _ => return None,
            },
        };
        Some(EuclideanProfile { anchor, t0, v, lo, hi })
    }

    /// `c(t) − c(0)`.
    pub fn offset(&self, t: f64) -> Vec<f64> {
        let s = t.clamp(self.lo, self.hi) - self.t0;
        self.v.iter().map(|x| x * s).collect()
    }

    fn moving_at(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }
}

/// Point masses for `μ` adapted to `c` and `u`, in coordinates centred at
/// `c(0)`, with the uniform error bound `eta`.
#[derive(Clone, Debug)]
pub struct Discretized {
    pub dim: usize,
    pub origin: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub total: f64,
    pub eta: f64,
}

fn weight(a: f64, b: f64) -> f64 {
    // ∫_a^b e^{−|t|}/2 dt for a < b on one side of 0
    if a >= 0.0 {
        0.5 * ((-a).exp() - (-b).exp())
    } else {
        0.5 * (b.exp() - a.exp())
    }
}

impl Discretized {
    /// `h0` is the panel width at `t = 0`; widths grow like `e^{|t|/2}`.
    pub fn new(c: &GeneralizedGeodesic, u: &[f64], h0: f64) -> Option<Self> {
        let p = EuclideanProfile::of(c)?;
        let dim = p.anchor.len();
        if dim > 2 || u.len() != dim {
            return None;
        }
        let mut cuts = vec![0.0];
        for b in [p.lo, p.hi] {
            if b.is_finite() && b.abs() < HORIZON {
                cuts.push(b);
            }
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut eta = 0.0;
        let vu: f64 = p.v.iter().zip(u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let mut push = |t: f64, w: f64, width: f64, p: &EuclideanProfile, eta: &mut f64| {
            let off = p.offset(t);
            let mut q = [0.0; 2];
            for i in 0..dim {
                q[i] = off[i] - t * u[i];
            }
            nodes.push(q);
            weights.push(w);
            let lip = if p.moving_at(t) { vu } else { 1.0 };
            *eta += w * lip * width / 2.0;
        };
        let mut s = 0.0;
        while s < HORIZON {
            s = (s + h0 * (0.5 * s).exp()).min(HORIZON);
            cuts.push(s);
            cuts.push(-s);
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for win in cuts.windows(2) {
            let (a, b) = (win[0], win[1]);
            push(0.5 * (a + b), weight(a, b), b - a, &p, &mut eta);
        }
        // tails as point masses at ±HORIZON; |w'| ≤ 2 there
        for t in [HORIZON, -HORIZON] {
            push(t, 0.5 * (-HORIZON).exp(), 0.0, &p, &mut eta);
            eta += 2.0 * 0.5 * (-HORIZON).exp();
        }
        let total = weights.iter().sum();
        Some(Discretized { dim, origin: p.anchor, points: nodes, weights, total, eta: eta + 1e-12 })
    }

    /// `Σ μᵢ |wᵢ − q|`, with `q` in centred coordinates.
    pub fn objective(&self, q: [f64; 2]) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * ((p[0] - q[0]).hypot(p[1] - q[1]))).sum()
    }

    /// Unconstrained minimizer of the discrete objective.
    pub fn median(&self) -> [f64; 2] {
        if self.dim == 1 {
            let mut idx: Vec<usize> = (0..self.points.len()).collect();
            idx.sort_by(|&a, &b| self.points[a][0].total_cmp(&self.points[b][0]));
            let mut acc = 0.0;
            for i in idx {
                acc += self.weights[i];
                if acc >= 0.5 * self.total {
                    return [self.points[i][0], 0.0];
                }
            }
            return [0.0, 0.0];
        }
        let mut q = [0.0, 0.0];
        for (p, w) in self.points.iter().zip(&self.weights) {
            q[0] += w * p[0] / self.total;
            q[1] += w * p[1] / self.total;
        }
        for _ in 0..2000 {
            let (mut nx, mut ny, mut den) = (0.0, 0.0, 0.0);
            for (p, w) in self.points.iter().zip(&self.weights) {
                let d = (p[0] - q[0]).hypot(p[1] - q[1]);
                if d > 1e-13 {
                    nx += w * p[0] / d;
                    ny += w * p[1] / d;
                    den += w / d;
                }
            }
            if den == 0.0 {
                break;
            }
            let next = [nx / den, ny / den];
            let step = (next[0] - q[0]).hypot(next[1] - q[1]);
            q = next;
            if step < 1e-13 {
                break;
            }
        }
        q
    }

    /// Minimizer on the line `{q0 + s·dir}` (golden section; the restriction
    /// is convex).
    pub fn line_min(&self, q0: [f64; 2], dir: [f64; 2], guess: f64, reach: f64) -> [f64; 2] {
        let at = |s: f64| [q0[0] + s * dir[0], q0[1] + s * dir[1]];
        let f = |s: f64| self.objective(at(s));
        let (mut lo, mut hi) = (guess - reach, guess + reach);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut c, mut d) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (mut fc, mut fd) = (f(c), f(d));
        while hi - lo > 1e-11 * (1.0 + reach) {
            if fc < fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - g * (hi - lo);
                fc = f(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + g * (hi - lo);
                fd = f(d);
            }
        }
        at(0.5 * (lo + hi))
    }

    /// A lower bound for the discrete objective over the region
    /// `{q : ⟨q, n⟩ ∈ [lo, hi]}` from the dual certificate at `q_ref`.
    /// With both bounds infinite the region is the whole plane.
    pub fn lower_bound(&self, q_ref: [f64; 2], normal: [f64; 2], range: (f64, f64)) -> f64 {
        let mut m = [0.0, 0.0];
        let units: Vec<[f64; 2]> = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| {
                let (dx, dy) = (p[0] - q_ref[0], p[1] - q_ref[1]);
                let d = dx.hypot(dy);
                let v = if d > 0.0 { [dx / d, dy / d] } else { [0.0, 0.0] };
                m[0] += w * v[0];
                m[1] += w * v[1];
                v
            })
            .collect();
        let free = !range.0.is_finite() && !range.1.is_finite();
        let mean = [m[0] / self.total, m[1] / self.total];
        let along_normal = mean[0] * normal[0] + mean[1] * normal[1];
        // remove the part of the mean the region lets us move against
        let removed = if free || self.dim == 1 {
            mean
        } else {
            [mean[0] - along_normal * normal[0], mean[1] - along_normal * normal[1]]
        };
        let scale = 1.0 + removed[0].hypot(removed[1]);
        let mut c = 0.0;
        let mut lambda = 0.0;
        for ((p, w), v) in self.points.iter().zip(&self.weights).zip(&units) {
            let vv = [(v[0] - removed[0]) / scale, (v[1] - removed[1]) / scale];
            c += w * ((p[0] - q_ref[0]) * vv[0] + (p[1] - q_ref[1]) * vv[1]);
            lambda += w * (vv[0] * normal[0] + vv[1] * normal[1]);
        }
        if free || self.dim == 1 {
            return c;
        }
        // F(q) ≥ c − λ (⟨q, n⟩ − ⟨q_ref, n⟩)
        let y_ref = q_ref[0] * normal[0] + q_ref[1] * normal[1];
        let worst = [range.0 - y_ref, range.1 - y_ref]
            .iter()
            .map(|d| if d.is_infinite() { if lambda * d > 0.0 { f64::INFINITY } else { 0.0 } } else { lambda * d })
            .fold(0.0f64, f64::max);
        c - worst
    }
}

/// Bracket of a distance from `c` to a family of lines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

/// Distances from one geodesic to the lines of direction `u`, to the
/// slab `⟨p, u⊥⟩ ∈ [α, β]` of them, and to its complement.
pub struct LineFamilyDistance {
    pub disc: Discretized,
    pub u: [f64; 2],
    pub normal: [f64; 2],
    /// Transversal coordinate of the free minimizer, in absolute
    /// coordinates.
    pub y_star: f64,
    pub free: Bracket,
    q_star: [f64; 2],
    /// Extra uncertainty from the size of the coordinates.
    pub coord_err: f64,
}

impl LineFamilyDistance {
    pub fn new(c: &GeneralizedGeodesic, u: &[f64], h0: f64) -> Option<Self> {
        let disc = Discretized::new(c, u, h0)?;
        let (uu, normal) = if disc.dim == 1 { ([u[0], 0.0], [0.0, 1.0]) } else { ([u[0], u[1]], [-u[1], u[0]]) };
        let q = disc.median();
        let f = disc.objective(q);
        let lb = disc.lower_bound(q, normal, (f64::NEG_INFINITY, f64::INFINITY));
        let big = disc.origin.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let coord_err = 8.0 * f64::EPSILON * big;
        let y0 = if disc.dim == 1 { 0.0 } else { disc.origin[0] * normal[0] + disc.origin[1] * normal[1] };
        let y_star = y0 + q[0] * normal[0] + q[1] * normal[1];
        let free = Bracket { lower: lb.min(f) - disc.eta, upper: f + disc.eta };
        Some(LineFamilyDistance { disc, u: uu, normal, y_star, free, q_star: q, coord_err })
    }

    fn y_origin(&self) -> f64 {
        if self.disc.dim == 1 {
            0.0
        } else {
            self.disc.origin[0] * self.normal[0] + self.disc.origin[1] * self.normal[1]
        }
    }

    /// Distance to the lines with transversal coordinate in `[lo, hi]`
    /// (absolute coordinates; either end may be infinite).
    pub fn to_slab(&self, lo: f64, hi: f64) -> Bracket {
        if self.disc.dim == 1 {
            return self.free;
        }
        let y0 = self.y_origin();
        let (rlo, rhi) = (lo - y0, hi - y0);
        let ys = self.y_star - y0;
        let q = if ys >= rlo && ys <= rhi {
            self.q_star
        } else {
            let target = if ys < rlo { rlo } else { rhi };
            let q0 = [target * self.normal[0], target * self.normal[1]];
            let guess = self.q_star[0] * self.u[0] + self.q_star[1] * self.u[1];
            let reach = 4.0 * self.free.upper + (ys - target).abs() + 1.0;
            self.disc.line_min(q0, self.u, guess, reach)
        };
        let f = self.disc.objective(q);
        let lb = self.disc.lower_bound(q, self.normal, (rlo, rhi)).max(self.free.lower + self.disc.eta);
        let err = self.disc.eta + self.coord_err;
        Bracket { lower: lb.min(f) - err, upper: f + err }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_spaces::SpacePoint;

    #[test]
    fn parallel_line_is_at_its_offset() {
        let c = GeneralizedGeodesic::euclidean_line(&[0.3, 2.0], &[1.0, 0.0]).unwrap();
        let d = LineFamilyDistance::new(&c, &[1.0, 0.0], 1e-3).unwrap();
        assert!(d.free.lower <= 1e-9 && d.free.upper <= 1e-3, "{:?}", d.free);
        assert!((d.y_star - 2.0).abs() < 1e-9);
        let s = d.to_slab(2.5, 3.0);
        assert!((s.lower - 0.5).abs() < 2e-3 && (s.upper - 0.5).abs() < 2e-3, "{s:?}");
    }

    #[test]
    fn turned_line_is_at_the_chord() {
        // |u − u'| for unit vectors at right angles
        let c = GeneralizedGeodesic::euclidean_line(&[5.0, -1.0], &[0.0, 1.0]).unwrap();
        let d = LineFamilyDistance::new(&c, &[1.0, 0.0], 5e-4).unwrap();
        let exact = 2f64.sqrt();
        assert!(d.free.lower <= exact && exact <= d.free.upper, "{:?}", d.free);
        assert!(d.free.upper - d.free.lower < 3e-3);
    }

    #[test]
    fn constants_sit_at_distance_one() {
        for dim in [1usize, 2] {
            let x = vec![0.7; dim];
            let c = GeneralizedGeodesic::constant(SpacePoint::euclidean(&x));
            let mut u = vec![0.0; dim];
            u[0] = 1.0;
            let d = LineFamilyDistance::new(&c, &u, 5e-4).unwrap();
            assert!(d.free.lower <= 1.0 && 1.0 <= d.free.upper, "{dim}: {:?}", d.free);
        }
    }

    #[test]
    fn segment_ending_before_time_zero() {
        let x = SpacePoint::euclidean(&[0.3, -0.5]);
        let y = SpacePoint::euclidean(&[0.1206237033861739, -0.8414494313033705]);
        // c(0) is the far endpoint up to rounding
        let c = GeneralizedGeodesic::from_finite(-1.4, &x, &y).unwrap();
        let p = EuclideanProfile::of(&c).unwrap();
        for t in [-3.0, -1.2, 0.0] {
            let e = c.evaluate(t);
            let e = e.as_euclidean().unwrap();
            let o = p.offset(t);
            assert!((p.anchor[0] + o[0] - e[0]).abs() < 1e-12 && (p.anchor[1] + o[1] - e[1]).abs() < 1e-12);
        }
    }
}
