//! An explicit equivariant cover of the periodic part of the flow space for
//! `ℤⁿ` acting on `ℝⁿ` (`n ≤ 2`), with a sampled checker.
//!
//! Patches come in two kinds. For every oriented axis class `a` with unit
//! direction `u` and shortest translation `p`, let `y(c) = ⟨c(0), u⊥⟩` be
//! the transversal coordinate of a flow line of the class. The lines of the
//! class with `y` in an open interval `I` form `W ⊆ FS_a`, and the patch is
//! `Z_a(W) ∩ U_a` with `Z_a(W) = {c : d(c, W) < d(c, FS_a − W)}` and
//! `U_a = B_δ(FS_a)`. The intervals are
//! `I_{j,k} = (ks + js/2 − 0.45s, ks + js/2 + 0.45s)` for `s = 1/|p|` and
//! `j ∈ {0, 1}`; the translation by `v` moves `k` by `det(p, v)`. On the
//! line, `Y_a` is a point and the patch is `U_a`. The second kind are the
//! balls of radius `1/2` around constant geodesics at `(½ℤ)ⁿ`.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classes::{enumerate_axis_classes, g_period};
use super::median::{Bracket, LineFamilyDistance};
use crate::error::{usage, Error, Result};
use crate::flow_space::{dist_fs, FlowMetricConfig, GeneralizedGeodesic};
use crate::group_actions::{stabilizer_witness, ActionKind, GroupAction, IsometryElement, LineMotion, StabilizerWitness};
use crate::model_spaces::{Space, SpacePoint};
use crate::report::{CheckEntry, EstimateReport};
use crate::transfer::{FsCover, Membership};

/// Half-width of the transversal intervals as a fraction of the step.
pub const HALF_WIDTH: f64 = 0.45;
/// Radius of the balls around constant geodesics.
pub const BALL_RADIUS: f64 = 0.5;
/// Panel widths for the distance-to-class evaluator, coarse to fine.
const LEVELS: [f64; 3] = [0.05, 5e-3, 5e-4];

/// Patches of one oriented axis class.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassFamily {
    /// Shortest translation vector `p` along the axes.
    pub direction: Vec<f64>,
    pub u: Vec<f64>,
    /// Spacing `1/|p|` of the transversal lattice; `0` on the line.
    pub step: f64,
    pub offsets: Vec<f64>,
    pub half_width: f64,
}

/// Balls around constant geodesics, one `ℤⁿ`-orbit per center.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallFamily {
    pub radius: f64,
    pub centers: Vec<Vec<f64>>,
    /// Every constant geodesic has its `ε_ℝ`-ball inside one of the balls.
    pub eps_r: f64,
    /// Largest number of balls meeting at a point, less one.
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PatchId {
    Class { class: usize, orbit: usize, k: i64 },
    Ball { orbit: usize, shift: Vec<i64> },
}

impl PatchId {
    /// Index of the `G`-orbit.
    pub fn orbit_key(&self) -> (usize, usize, usize) {
        match self {
            PatchId::Class { class, orbit, .. } => (0, *class, *orbit),
            PatchId::Ball { orbit, .. } => (1, *orbit, 0),
        }
    }
}

/// `V_ℝ` for `ℤⁿ` on `ℝⁿ`: centers `(½ℤ)ⁿ`, radius `1/2`. Balls in one
/// orbit are at distance at least `1 = 2r` apart, so each is an `F`-subset
/// with trivial stabilizer.
pub fn cover_constants(action: &GroupAction) -> Result<BallFamily> {
    lattice_action(action)?;
    let n = action.space.dim();
    let centers: Vec<Vec<f64>> =
        (0..1usize << n).map(|m| (0..n).map(|i| if m >> i & 1 == 1 { 0.5 } else { 0.0 }).collect()).collect();
    // covering radius of (½ℤ)ⁿ is √n/4
    let eps_r = BALL_RADIUS - (n as f64).sqrt() / 4.0;
    Ok(BallFamily { radius: BALL_RADIUS, centers, eps_r, dim: (1usize << n) - 1 })
}

fn lattice_action(action: &GroupAction) -> Result<()> {
    let n = action.space.dim();
    if action.kind != ActionKind::Translations || !matches!(action.space, Space::Euclidean(_)) || n > 2 {
        return usage(format!("covers are built for z and z2 only, not '{}'", action.name));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cover {
    pub action: String,
    pub dim: usize,
    pub gamma: f64,
    /// `min d_FS(FS_a, FS_b)` over distinct oriented classes.
    pub separation: f64,
    pub delta_sep: f64,
    /// `ε = δ_sep/4`.
    pub eps: f64,
    pub classes: Vec<ClassFamily>,
    pub balls: BallFamily,
    /// `M = 1 + dim V_ℝ + dim X`.
    pub multiplicity_bound: usize,
    /// Number of `G`-orbits of patches.
    pub orbit_count: usize,
}

/// Mean of `clamp(t, lo, hi)` under `e^{−|t|}/2 dt`.
fn mean_clamp(lo: f64, hi: f64) -> f64 {
    let cdf = |a: f64| if a <= 0.0 { 0.5 * a.exp() } else { 1.0 - 0.5 * (-a).exp() };
    // ∫ t dμ up to a
    let part = |a: f64| if a <= 0.0 { 0.5 * (a - 1.0) * a.exp() } else { -0.5 * (a + 1.0) * (-a).exp() };
    let below = if lo.is_finite() { lo * cdf(lo) } else { 0.0 };
    let above = if hi.is_finite() { hi * (1.0 - cdf(hi)) } else { 0.0 };
    let mid = part(hi.min(1e3)) - part(lo.max(-1e3));
    below + mid + above
}

impl Cover {
    pub fn group_action(&self) -> Result<GroupAction> {
        GroupAction::preset(&self.action)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cover serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    fn perp(&self, f: &ClassFamily) -> [f64; 2] {
        if self.dim == 2 {
            [-f.u[1], f.u[0]]
        } else {
            [0.0, 1.0]
        }
    }

    fn transversal(&self, f: &ClassFamily, x: &[f64]) -> f64 {
        if self.dim == 2 {
            let n = self.perp(f);
            x[0] * n[0] + x[1] * n[1]
        } else {
            0.0
        }
    }

    fn interval(&self, f: &ClassFamily, orbit: usize, k: i64) -> (f64, f64) {
        let c = k as f64 * f.step + f.offsets[orbit];
        (c - f.half_width, c + f.half_width)
    }

    fn det(&self, f: &ClassFamily, v: &[i64]) -> i64 {
        if self.dim == 2 {
            let p = [f.direction[0].round() as i64, f.direction[1].round() as i64];
            p[0] * v[1] - p[1] * v[0]
        } else {
            0
        }
    }

    /// `g · P` for a translation `g`.
    pub fn act(&self, g: &IsometryElement, p: &PatchId) -> Option<PatchId> {
        let IsometryElement::Euclidean { v, .. } = g else { return None };
        let v: Vec<i64> = v.iter().map(|x| x.round() as i64).collect();
        Some(match p {
            PatchId::Class { class, orbit, k } => {
                PatchId::Class { class: *class, orbit: *orbit, k: k + self.det(&self.classes[*class], &v) }
            }
            PatchId::Ball { orbit, shift } => {
                PatchId::Ball { orbit: *orbit, shift: shift.iter().zip(&v).map(|(a, b)| a + b).collect() }
            }
        })
    }

    /// Representatives of the patch orbits, as constructed.
    pub fn representatives(&self) -> Vec<PatchId> {
        let mut out = Vec::new();
        for (i, f) in self.classes.iter().enumerate() {
            for j in 0..f.offsets.len() {
                out.push(PatchId::Class { class: i, orbit: j, k: 0 });
            }
        }
        for o in 0..self.balls.centers.len() {
            out.push(PatchId::Ball { orbit: o, shift: vec![0; self.dim] });
        }
        out
    }

    fn ball_center(&self, orbit: usize, shift: &[i64]) -> Vec<f64> {
        self.balls.centers[orbit].iter().zip(shift).map(|(c, s)| c + *s as f64).collect()
    }

    fn ball_membership(&self, orbit: usize, shift: &[i64], c: &GeneralizedGeodesic) -> Membership {
        let x = GeneralizedGeodesic::constant(SpacePoint::euclidean(&self.ball_center(orbit, shift)));
        match dist_fs(c, &x, &FlowMetricConfig::with_tolerance(1e-7)) {
            Ok(d) if d.upper < self.balls.radius => Membership::In,
            Ok(d) if d.lower >= self.balls.radius => Membership::Out,
            _ => Membership::Undetermined,
        }
    }

    /// Ball patches that can contain `c`, from `d_FS(c, c_x) ≥ |E c(t) − x|`.
    fn ball_candidates(&self, c: &GeneralizedGeodesic) -> Vec<PatchId> {
        let Some(p) = super::median::EuclideanProfile::of(c) else { return vec![] };
        let m = mean_clamp(p.lo, p.hi) - p.t0;
        let mean: Vec<f64> = p.anchor.iter().zip(&p.v).map(|(a, v)| a + m * v).collect();
        let r = self.balls.radius + 1e-9 * (1.0 + mean.iter().fold(0.0f64, |a, x| a.max(x.abs())));
        let mut out = Vec::new();
        for (o, center) in self.balls.centers.iter().enumerate() {
            let base: Vec<i64> = mean.iter().zip(center).map(|(x, c)| (x - c).round() as i64).collect();
            let offsets: Vec<Vec<i64>> = if self.dim == 1 {
                (-1..=1).map(|a| vec![a]).collect()
            } else {
                (-1..=1).flat_map(|a| (-1..=1).map(move |b| vec![a, b])).collect()
            };
            for off in offsets {
                let shift: Vec<i64> = base.iter().zip(&off).map(|(a, b)| a + b).collect();
                let x = self.ball_center(o, &shift);
                let d = x.iter().zip(&mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                if d < r {
                    out.push(PatchId::Ball { orbit: o, shift });
                }
            }
        }
        out
    }

    fn class_distance(&self, f: &ClassFamily, c: &GeneralizedGeodesic, level: usize) -> Option<LineFamilyDistance> {
        LineFamilyDistance::new(c, &f.u, LEVELS[level])
    }

    /// `(d(c, W), d(c, FS_a − W))` for the interval `(lo, hi)`.
    fn z_brackets(&self, d: &LineFamilyDistance, lo: f64, hi: f64) -> (Bracket, Bracket) {
        let w = d.to_slab(lo, hi);
        let a = d.to_slab(f64::NEG_INFINITY, lo);
        let b = d.to_slab(hi, f64::INFINITY);
        let out = Bracket { lower: a.lower.min(b.lower), upper: a.upper.min(b.upper) };
        (w, out)
    }

    fn class_membership_with(&self, f: &ClassFamily, d: &LineFamilyDistance, orbit: usize, k: i64) -> Membership {
        let u = if d.free.upper < self.delta_sep {
            Membership::In
        } else if d.free.lower >= self.delta_sep {
            Membership::Out
        } else {
            Membership::Undetermined
        };
        if u == Membership::Out || self.dim == 1 {
            return u;
        }
        let (lo, hi) = self.interval(f, orbit, k);
        let (w, out) = self.z_brackets(d, lo, hi);
        let z = if w.upper < out.lower {
            Membership::In
        } else if w.lower >= out.upper {
            Membership::Out
        } else {
            Membership::Undetermined
        };
        match (u, z) {
            (_, Membership::Out) => Membership::Out,
            (Membership::In, Membership::In) => Membership::In,
            _ => Membership::Undetermined,
        }
    }

    fn class_membership(&self, class: usize, orbit: usize, k: i64, c: &GeneralizedGeodesic) -> Membership {
        let f = &self.classes[class];
        let mut m = Membership::Undetermined;
        for level in 0..LEVELS.len() {
            let Some(d) = self.class_distance(f, c, level) else { return Membership::Undetermined };
            m = self.class_membership_with(f, &d, orbit, k);
            if m != Membership::Undetermined {
                break;
            }
        }
        m
    }

    /// Class patches not certified to miss `c`, with their memberships.
    fn class_candidates(&self, c: &GeneralizedGeodesic) -> Vec<(PatchId, Membership)> {
        let mut out = Vec::new();
        for (i, f) in self.classes.iter().enumerate() {
            let mut level = 0;
            let mut d = match self.class_distance(f, c, level) {
                Some(d) => d,
                None => continue,
            };
            while d.free.lower < self.delta_sep && d.free.upper >= self.delta_sep && level + 1 < LEVELS.len() {
                level += 1;
                d = self.class_distance(f, c, level).expect("same profile");
            }
            if d.free.lower >= self.delta_sep {
                continue;
            }
            if self.dim == 1 {
                out.push((PatchId::Class { class: i, orbit: 0, k: 0 }, self.class_membership_with(f, &d, 0, 0)));
                continue;
            }
            for j in 0..f.offsets.len() {
                let k0 = ((d.y_star - f.offsets[j]) / f.step).round() as i64;
                let eval = |k: i64| {
                    let mut m = self.class_membership_with(f, &d, j, k);
                    let mut lv = level;
                    while m == Membership::Undetermined && lv + 1 < LEVELS.len() {
                        lv += 1;
                        let dd = self.class_distance(f, c, lv).expect("same profile");
                        m = self.class_membership_with(f, &dd, j, k);
                    }
                    m
                };
                // membership in k is an interval around the minimizer;
                // walk outward until certified misses on both sides
                let m0 = eval(k0);
                if m0 != Membership::Out {
                    out.push((PatchId::Class { class: i, orbit: j, k: k0 }, m0));
                }
                for dir in [-1i64, 1] {
                    let mut k = k0 + dir;
                    for _ in 0..64 {
                        let m = eval(k);
                        if m == Membership::Out {
                            break;
                        }
                        out.push((PatchId::Class { class: i, orbit: j, k }, m));
                        k += dir;
                    }
                }
            }
        }
        out
    }

    /// Every patch not certified to miss `c`, with its membership.
    pub fn memberships(&self, c: &GeneralizedGeodesic) -> Vec<(PatchId, Membership)> {
        let mut out = self.class_candidates(c);
        for p in self.ball_candidates(c) {
            let PatchId::Ball { orbit, shift } = &p else { unreachable!() };
            let m = self.ball_membership(*orbit, shift, c);
            if m != Membership::Out {
                out.push((p, m));
            }
        }
        out
    }

    pub fn membership_of(&self, p: &PatchId, c: &GeneralizedGeodesic) -> Membership {
        match p {
            PatchId::Class { class, orbit, k } => self.class_membership(*class, *orbit, *k, c),
            PatchId::Ball { orbit, shift } => self.ball_membership(*orbit, shift, c),
        }
    }

    pub fn tag(&self, p: &PatchId) -> String {
        match p {
            PatchId::Class { class, orbit, k } => {
                let f = &self.classes[*class];
                if self.dim == 1 {
                    format!("U_a: class {:?}", f.direction)
                } else {
                    let (lo, hi) = self.interval(f, *orbit, *k);
                    format!("Z_a(W) ∩ U_a: class {:?}, y in ({lo:.4}, {hi:.4})", f.direction)
                }
            }
            PatchId::Ball { orbit, shift } => {
                format!("V_R ball: center {:?}, radius {}", self.ball_center(*orbit, shift), self.balls.radius)
            }
        }
    }

    /// A patch containing `B_ε(Φ_{[−γ,γ]} c)` for `c` a flow line of class
    /// `class` (or a constant when `class` is `None`) through `x`, with the
    /// analytic margin.
    pub fn long_patch(&self, class: Option<usize>, x: &[f64]) -> (PatchId, f64) {
        let eps = self.eps;
        match class {
            None => {
                let mut best: Option<(PatchId, f64)> = None;
                for (o, center) in self.balls.centers.iter().enumerate() {
                    let shift: Vec<i64> = x.iter().zip(center).map(|(a, c)| (a - c).round() as i64).collect();
                    let y = self.ball_center(o, &shift);
                    let d = y.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    let margin = self.balls.radius - d - eps;
                    if best.as_ref().map_or(true, |b| margin > b.1) {
                        best = Some((PatchId::Ball { orbit: o, shift }, margin));
                    }
                }
                best.expect("at least one center")
            }
            Some(i) => {
                let f = &self.classes[i];
                let base = self.delta_sep - eps;
                if self.dim == 1 {
                    return (PatchId::Class { class: i, orbit: 0, k: 0 }, base);
                }
                let y = self.transversal(f, x);
                let mut best: Option<(PatchId, f64)> = None;
                for j in 0..f.offsets.len() {
                    let k = ((y - f.offsets[j]) / f.step).round() as i64;
                    let (lo, hi) = self.interval(f, j, k);
                    let depth = (y - lo).min(hi - y);
                    let margin = base.min(depth - 2.0 * eps);
                    if best.as_ref().map_or(true, |b| margin > b.1) {
                        best = Some((PatchId::Class { class: i, orbit: j, k }, margin));
                    }
                }
                best.expect("two orbits")
            }
        }
    }
}

/// Builds the cover; `delta_sep` defaults to
/// `0.9 min(sep/2, 4ε_ℝ, 2·0.2s_min)`.
pub fn build_cover(gamma: f64, action: &GroupAction, delta_sep: Option<f64>) -> Result<Cover> {
    lattice_action(action)?;
    let n = action.space.dim();
    let classes = enumerate_axis_classes(gamma, action)?;
    let balls = cover_constants(action)?;
    let mut fams = Vec::new();
    for a in &classes.classes {
        let u = a.unit_direction().expect("euclidean class");
        let ParallelDatum::Euclidean { direction } = &a.datum else { unreachable!() };
        let direction: Vec<f64> = direction.iter().map(|x| x.round()).collect();
        let (step, offsets) = if n == 2 {
            let s = 1.0 / a.translation_length;
            (s, vec![0.0, 0.5 * s])
        } else {
            (0.0, vec![0.0])
        };
        fams.push(ClassFamily { direction, u, step, offsets, half_width: HALF_WIDTH * step });
    }
    let mut separation = f64::INFINITY;
    for (i, a) in fams.iter().enumerate() {
        for b in &fams[i + 1..] {
            let d = a.u.iter().zip(&b.u).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            separation = separation.min(d);
        }
    }
    let depth = if n == 2 {
        fams.iter().map(|f| (HALF_WIDTH - 0.25) * f.step).fold(f64::INFINITY, f64::min)
    } else {
        f64::INFINITY
    };
    let limit = (0.5 * separation).min(4.0 * balls.eps_r).min(2.0 * depth);
    let delta_sep = match delta_sep {
        Some(d) if !(d > 0.0) => return usage("δ_sep must be positive"),
        Some(d) if d > 0.5 * separation => {
            return usage(format!("δ_sep = {d} exceeds half the class separation {}", 0.5 * separation))
        }
        Some(d) if d >= limit => {
            return usage(format!("δ_sep = {d} leaves no room for ε-long patches (needs < {limit})"))
        }
        Some(d) => d,
        None => 0.9 * limit,
    };
    let orbit_count = fams.iter().map(|f| f.offsets.len()).sum::<usize>() + balls.centers.len();
    Ok(Cover {
        action: action.name.clone(),
        dim: n,
        gamma,
        separation,
        delta_sep,
        eps: delta_sep / 4.0,
        multiplicity_bound: 1 + balls.dim + n,
        classes: fams,
        balls,
        orbit_count,
    })
}

use super::classes::ParallelDatum;

impl FsCover for Cover {
    type Patch = PatchId;

    fn candidate_patches(&self, c: &GeneralizedGeodesic) -> Vec<PatchId> {
        self.memberships(c).into_iter().map(|x| x.0).collect()
    }

    fn membership(&self, patch: &PatchId, c: &GeneralizedGeodesic) -> Membership {
        self.membership_of(patch, c)
    }

    fn patch_tag(&self, patch: &PatchId) -> String {
        self.tag(patch)
    }
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IsotropyEntry {
    pub patch: String,
    pub witness: StabilizerWitness,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverReport {
    pub report: EstimateReport,
    pub orbit_count_found: usize,
    pub orbit_count_expected: usize,
    pub max_overlap: usize,
    pub nerve_dim: usize,
    pub multiplicity_bound: usize,
    pub containment_samples: usize,
    pub min_containment_margin: f64,
    pub perturbations: usize,
    pub perturbations_undetermined: usize,
    pub isotropy: Vec<IsotropyEntry>,
}

impl CoverReport {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CheckCoverConfig {
    pub samples: usize,
    pub seed: u64,
    pub invariance_word_len: usize,
    pub isotropy_word_len: usize,
}

impl Default for CheckCoverConfig {
    fn default() -> Self {
        CheckCoverConfig { samples: 200, seed: 11, invariance_word_len: 6, isotropy_word_len: 8 }
    }
}

fn unit_random(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let l = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if l > 0.1 && l <= 1.0 {
            return v.iter().map(|x| x / l).collect();
        }
    }
}

/// A random geodesic near `c`, scaled until `d_FS` is certified below `eps`.
fn perturb(rng: &mut impl Rng, c: &GeneralizedGeodesic, eps: f64) -> Option<GeneralizedGeodesic> {
    let p = super::median::EuclideanProfile::of(c)?;
    let n = p.anchor.len();
    let cfg = FlowMetricConfig::with_tolerance(1e-7);
    let kind = rng.gen_range(0..4);
    let off = unit_random(rng, n);
    let turn = unit_random(rng, n);
    let (a, b, sh, trunc) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen_range(-1.0..1.0), rng.gen_range(2.0..30.0));
    let mut scale = eps;
    for _ in 0..30 {
        let x: Vec<f64> = p.anchor.iter().zip(&off).map(|(x, o)| x + a * scale * o).collect();
        let cand = if c.is_constant() {
            match kind {
                0 | 1 => GeneralizedGeodesic::constant(SpacePoint::euclidean(&x)),
                _ => {
                    let y: Vec<f64> = x.iter().zip(&turn).map(|(x, t)| x + b * scale * t).collect();
                    GeneralizedGeodesic::from_finite(0.0, &SpacePoint::euclidean(&x), &SpacePoint::euclidean(&y))
                        .ok()?
                        .flow(0.5 * b * scale)
                }
            }
        } else {
            let v: Vec<f64> = p.v.iter().zip(&turn).map(|(v, t)| v + b * scale * t).collect();
            let l = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let v: Vec<f64> = v.iter().map(|x| x / l).collect();
            let line = GeneralizedGeodesic::euclidean_line(&x, &v).ok()?.flow(sh * scale);
            if kind == 3 {
                line.restrict(trunc)
            } else {
                line
            }
        };
        match dist_fs(&cand, c, &cfg) {
            Ok(d) if d.upper < eps => return Some(cand),
            _ => scale *= 0.5,
        }
    }
    None
}

fn entry(name: &str, anchor: &str, fails: &[String], dev: f64) -> CheckEntry {
    let e = CheckEntry::new(name, anchor, fails.is_empty(), dev);
    match fails.first() {
        Some(w) => e.with_witness(w.clone()),
        None => e,
    }
}

/// Checks invariance, the orbit count, multiplicity against `M`, ε-long
/// containment and virtually cyclic isotropy.
pub fn check_cover(cover: &Cover, cfg: &CheckCoverConfig) -> Result<CoverReport> {
    let action = cover.group_action()?;
    let n = cover.dim;
    let mut rng = crate::sampling::rng(cfg.seed);
    let mut report = EstimateReport::new("check-cover");
    report.param("action", &cover.action);
    report.param("gamma", cover.gamma);
    report.param("delta_sep", cover.delta_sep);
    report.param("eps", cover.eps);
    report.param("samples", cfg.samples);
    report.param("seed", cfg.seed);

    // separation of the constructed classes
    let sep_ok = cover.delta_sep <= 0.5 * cover.separation;
    report.push(CheckEntry::new(
        "separation",
        "δ_sep ≤ d_FS(FS_a, FS_b)/2 for distinct classes",
        sep_ok,
        cover.delta_sep - 0.5 * cover.separation,
    ));

    // invariance: the action on patch ids is an action and preserves orbits
    let elems = action.elements(cfg.invariance_word_len);
    let reps = cover.representatives();
    let mut inv_fail = Vec::new();
    for g in &elems {
        for h in elems.iter().take(2 * n + 1) {
            for p in &reps {
                let (Some(hp), Some(gh)) = (cover.act(h, p), Some(g.compose(h))) else { continue };
                let a = cover.act(g, &hp);
                let b = cover.act(&gh, p);
                if a.is_none() || a != b || a.as_ref().map(|x| x.orbit_key()) != Some(p.orbit_key()) {
                    inv_fail.push(format!("g={} h={} patch={}", g.label(), h.label(), cover.tag(p)));
                }
            }
        }
    }
    // sampled equivariance of membership
    let probes: Vec<(GeneralizedGeodesic, IsometryElement)> = (0..cfg.samples.max(20) / 4)
        .map(|_| {
            let c = crate::sampling::random_geodesic(action.space, &mut rng, 2.0);
            let g = elems[rng.gen_range(0..elems.len())].clone();
            (c, g)
        })
        .collect();
    let eq_fail: Vec<String> = probes
        .par_iter()
        .filter_map(|(c, g)| {
            let here = cover.memberships(c);
            let there: BTreeMap<PatchId, Membership> = cover.memberships(&g.act_fs(c)).into_iter().collect();
            for (p, m) in here {
                let gp = cover.act(g, &p)?;
                let m2 = there.get(&gp).copied().unwrap_or(Membership::Out);
                let clash = matches!((m, m2), (Membership::In, Membership::Out) | (Membership::Out, Membership::In));
                if clash {
                    return Some(format!("g={} patch={} c0={}", g.label(), cover.tag(&p), c.at_zero().label()));
                }
            }
            None
        })
        .collect();
    inv_fail.extend(eq_fail);
    report.push(entry(
        "g-invariance",
        "g·V is a patch and c ∈ V ⇔ gc ∈ gV for enumerated g",
        &inv_fail,
        inv_fail.len() as f64,
    ));

    // orbit count: union-find over a window of patches under the generators
    let window: Vec<PatchId> = {
        let mut w = Vec::new();
        for (i, f) in cover.classes.iter().enumerate() {
            for j in 0..f.offsets.len() {
                let ks: Vec<i64> = if n == 2 { (-6..=6).collect() } else { vec![0] };
                for k in ks {
                    w.push(PatchId::Class { class: i, orbit: j, k });
                }
            }
        }
        for o in 0..cover.balls.centers.len() {
            let shifts: Vec<Vec<i64>> = if n == 2 {
                (-2..=2).flat_map(|a| (-2..=2).map(move |b| vec![a, b])).collect()
            } else {
                (-2..=2).map(|a| vec![a]).collect()
            };
            for s in shifts {
                w.push(PatchId::Ball { orbit: o, shift: s });
            }
        }
        w
    };
    let index: BTreeMap<PatchId, usize> = window.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let mut parent: Vec<usize> = (0..window.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for (i, p) in window.iter().enumerate() {
        for s in &action.s()[1..] {
            if let Some(j) = cover.act(s, p).and_then(|q| index.get(&q).copied()) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let roots: BTreeSet<usize> = (0..window.len()).map(|i| find(&mut parent, i)).collect();
    let orbit_count_found = roots.len();
    report.push(CheckEntry::new(
        "orbit-count",
        "|G\\V| is finite and equals the construction count",
        orbit_count_found == cover.orbit_count,
        (orbit_count_found as f64 - cover.orbit_count as f64).abs(),
    ));

    // multiplicity on random geodesics and on geodesics near the classes
    let mut mult_samples: Vec<GeneralizedGeodesic> = Vec::new();
    for _ in 0..cfg.samples {
        mult_samples.push(crate::sampling::random_geodesic(action.space, &mut rng, 2.0));
        let i = rng.gen_range(0..cover.classes.len());
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let line = GeneralizedGeodesic::euclidean_line(&x, &cover.classes[i].u)?;
        if let Some(c) = perturb(&mut rng, &line, 1.5 * cover.delta_sep) {
            mult_samples.push(c.flow(rng.gen_range(-3.0..3.0)));
        }
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        mult_samples.push(GeneralizedGeodesic::constant(SpacePoint::euclidean(&x)));
    }
    let overlaps: Vec<(usize, String)> = mult_samples
        .par_iter()
        .map(|c| {
            let m = cover.memberships(c);
            (m.len(), c.at_zero().label())
        })
        .collect();
    let (max_overlap, worst) = overlaps.iter().max_by_key(|x| x.0).cloned().unwrap_or((0, String::new()));
    let nerve_dim = max_overlap.saturating_sub(1);
    report.push(
        CheckEntry::new(
            "multiplicity",
            "sampled nerve dimension ≤ M = 1 + dim V_R + dim X",
            nerve_dim <= cover.multiplicity_bound,
            nerve_dim as f64 - cover.multiplicity_bound as f64,
        )
        .with_witness(format!("{max_overlap} patches at c(0)={worst}")),
    );

    // ε-long containment for periodic geodesics through K = [0,1]ⁿ
    let mut long_samples: Vec<(Option<usize>, Vec<f64>)> = Vec::new();
    for s in 0..cfg.samples {
        let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let class = if s % 4 == 3 { None } else { Some(rng.gen_range(0..cover.classes.len())) };
        long_samples.push((class, x));
    }
    let gamma = cover.gamma;
    let seeds: Vec<u64> = (0..long_samples.len()).map(|_| rng.gen()).collect();
    let results: Vec<(f64, Vec<String>, usize, usize, Option<String>)> = long_samples
        .par_iter()
        .zip(&seeds)
        .map(|((class, x), seed)| {
            let mut r = crate::sampling::rng(*seed);
            let c = match class {
                Some(i) => GeneralizedGeodesic::euclidean_line(x, &cover.classes[*i].u).expect("unit"),
                None => GeneralizedGeodesic::constant(SpacePoint::euclidean(x)),
            };
            let per = g_period(&c, &action, gamma + 1e-6, 4);
            let not_periodic = (!per.found()).then(|| format!("c(0)={:?} has no period ≤ γ", x));
            let (patch, margin) = cover.long_patch(*class, x);
            let mut fails = Vec::new();
            let (mut tried, mut undetermined) = (0, 0);
            for t in [-gamma, -0.5 * gamma, 0.0, 0.5 * gamma, gamma, r.gen_range(-gamma..gamma)] {
                let ct = c.flow(t);
                let mut list = vec![ct.clone()];
                for _ in 0..2 {
                    if let Some(p) = perturb(&mut r, &ct, cover.eps) {
                        list.push(p);
                    }
                }
                for c2 in list {
                    tried += 1;
                    match cover.membership_of(&patch, &c2) {
                        Membership::In => {}
                        Membership::Undetermined => undetermined += 1,
                        Membership::Out => fails.push(format!("{} misses c(0)={}", cover.tag(&patch), c2.at_zero().label())),
                    }
                }
            }
            (margin, fails, tried, undetermined, not_periodic)
        })
        .collect();
    let min_margin = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let perturbations: usize = results.iter().map(|r| r.2).sum();
    let perturbations_undetermined: usize = results.iter().map(|r| r.3).sum();
    let mut cont_fail: Vec<String> = results.iter().flat_map(|r| r.1.clone()).collect();
    cont_fail.extend(results.iter().filter_map(|r| r.4.clone()));
    if min_margin <= 0.0 {
        cont_fail.push(format!("analytic margin {min_margin}"));
    }
    report.push(entry(
        "eps-long-containment",
        "B_ε(Φ_[−γ,γ] c) lies in one patch for sampled c in FS_≤γ meeting G·K, ε = δ_sep/4",
        &cont_fail,
        -min_margin,
    ));
    report.push(CheckEntry::new(
        "eps-long-samples-decided",
        "sampled perturbations of periodic geodesics are certified members",
        perturbations_undetermined == 0,
        perturbations_undetermined as f64,
    ));

    // isotropy
    let all = action.enumerate(cfg.isotropy_word_len);
    let mut isotropy = Vec::new();
    let mut iso_fail = Vec::new();
    for p in &reps {
        let stab: Vec<(IsometryElement, usize, LineMotion)> = all
            .iter()
            .filter(|(g, _)| cover.act(g, p).as_ref() == Some(p))
            .map(|(g, l)| {
                let shift = match (p, g) {
                    (PatchId::Class { class, .. }, IsometryElement::Euclidean { v, .. }) => {
                        v.iter().zip(&cover.classes[*class].u).map(|(a, b)| a * b).sum()
                    }
                    _ => 0.0,
                };
                (g.clone(), *l, LineMotion { preserves_orientation: true, shift })
            })
            .collect();
        let w = stabilizer_witness(stab, cfg.isotropy_word_len);
        if !w.virtually_cyclic {
            iso_fail.push(cover.tag(p));
        }
        isotropy.push(IsotropyEntry { patch: cover.tag(p), witness: w });
    }
    report.push(entry(
        "isotropy-virtually-cyclic",
        "every patch stabilizer is finite or virtually cyclic (enumerated to length 8)",
        &iso_fail,
        iso_fail.len() as f64,
    ));
    report.sort();
    Ok(CoverReport {
        report,
        orbit_count_found,
        orbit_count_expected: cover.orbit_count,
        max_overlap,
        nerve_dim,
        multiplicity_bound: cover.multiplicity_bound,
        containment_samples: long_samples.len(),
        min_containment_margin: min_margin,
        perturbations,
        perturbations_undetermined,
        isotropy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_of_clamped_time() {
        assert!(mean_clamp(f64::NEG_INFINITY, f64::INFINITY).abs() < 1e-15);
        // E[max(t, 0)] = 1/2
        assert!((mean_clamp(0.0, f64::INFINITY) - 0.5).abs() < 1e-15);
        let n = 400_000;
        let (lo, hi) = (-0.7, 2.2);
        let h = 80.0 / n as f64;
        let q: f64 = (0..n)
            .map(|i| {
                let t = -40.0 + (i as f64 + 0.5) * h;
                t.clamp(lo, hi) * 0.5 * (-t.abs()).exp() * h
            })
            .sum();
        assert!((q - mean_clamp(lo, hi)).abs() < 1e-8);
    }

    #[test]
    fn construction_counts() {
        let c = build_cover(1.0, &GroupAction::z2(), None).unwrap();
        assert_eq!((c.classes.len(), c.orbit_count, c.multiplicity_bound), (4, 12, 6));
        assert!((c.separation - 2f64.sqrt()).abs() < 1e-12);
        assert!((c.eps - 0.09).abs() < 1e-12);
        let c = build_cover(2.3, &GroupAction::z2(), None).unwrap();
        assert_eq!(c.orbit_count, 36);
        let c = build_cover(1.0, &GroupAction::z(), None).unwrap();
        assert_eq!((c.orbit_count, c.multiplicity_bound), (4, 3));
        assert!(build_cover(1.0, &GroupAction::z2(), Some(0.8)).is_err());
        assert!(build_cover(1.0, &GroupAction::f2(), None).is_err());
    }

    #[test]
    fn horizontal_line_sits_in_its_interval() {
        let c = build_cover(1.0, &GroupAction::z2(), None).unwrap();
        let i = c.classes.iter().position(|f| f.direction == vec![1.0, 0.0]).unwrap();
        let line = GeneralizedGeodesic::euclidean_line(&[0.3, 0.1], &[1.0, 0.0]).unwrap();
        let m = c.memberships(&line);
        assert!(m.contains(&(PatchId::Class { class: i, orbit: 0, k: 0 }, Membership::In)), "{m:?}");
        assert_eq!(c.membership_of(&PatchId::Class { class: i, orbit: 0, k: 1 }, &line), Membership::Out);
        let json = c.to_json();
        assert_eq!(Cover::from_json(&json).unwrap().orbit_count, 12);
    }
}
