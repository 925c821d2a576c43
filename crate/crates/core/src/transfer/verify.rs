use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ActionConstants, Chain, FMap, FlowConstants, HomotopySAction};
use crate::error::Result;
use crate::flow_space::{dist_fs, FlowMetricConfig, GeneralizedGeodesic};
use crate::group_actions::IsometryElement;
use crate::model_spaces::{hyperbolic, interpolate_unchecked, project_unchecked, Endpoint, Space, SpacePoint};
use crate::report::{margin_check, CheckEntry, EstimateReport};
use crate::sampling::{point_at_distance, random_point};

fn short(s: String) -> String {
    if s.chars().count() <= 60 {
        s
    } else {
        let head: String = s.chars().take(28).collect();
        let tail: String = s.chars().rev().take(28).collect::<Vec<_>>().into_iter().rev().collect();
        format!("{head}…{tail}")
    }
}

/// Largest distance from the sampling origin at which points are drawn in
/// the disk, so that all evaluations stay resolvable.
const DISK_SAMPLE_RADIUS: f64 = hyperbolic::RELIABLE_RADIUS - 6.0;

fn cap(space: Space, d: f64) -> f64 {
    match space {
        Space::Hyperbolic => d.min(DISK_SAMPLE_RADIUS),
        _ => d,
    }
}

/// A configuration `(x₁, x₂, x)` with `d(x₁, x₂) ≤ β` and `d(x, x₁) ≤ reach`.
fn triangle_sample(rng: &mut impl Rng, space: Space, beta: f64, reach: f64, window: (f64, f64)) -> [SpacePoint; 3] {
    let x1 = random_point(space, rng, 2.0);
    let x2 = if rng.gen_bool(0.1) { x1.clone() } else {
        let d = beta * rng.gen::<f64>();
        point_at_distance(rng, &x1, d)
    };
    let d = match rng.gen_range(0..4) {
        0 => reach * rng.gen::<f64>(),
        1 => reach - beta * rng.gen::<f64>(),
        2 => rng.gen_range(window.0..=window.1),
        _ => window.0 * rng.gen::<f64>(),
    };
    let d = cap(space, d.clamp(0.0, reach));
    let x = point_at_distance(rng, &x1, d);
    [x1, x2, x]
}

/// The bound on `d(c_{x₁,x}(t), c_{x₂,x}(t + τ))` for `t ∈ [T − r', T + r']`,
/// checked on a grid of that window, together with the fact that the
/// projections `ρ_r` do not change the geodesics there.
pub fn triangle_check(space: Space, consts: &FlowConstants, samples: usize, seed: u64) -> EstimateReport {
    let mut rng = crate::sampling::rng(seed);
    let c = *consts;
    let bound = super::triangle_bound(c.beta, c.l, c.r_prime, c.r_double_prime);
    let window = (c.t - c.r_prime, c.t + c.r_prime);
    let configs: Vec<[SpacePoint; 3]> =
        (0..samples).map(|_| triangle_sample(&mut rng, space, c.beta, c.r + c.l, window)).collect();
    let results: Vec<(f64, f64, String)> = configs
        .par_iter()
        .map(|[x1, x2, x]| {
            let tau = x2.dist(x) - x1.dist(x);
            let g1 = GeneralizedGeodesic::connect_unchecked(x1, &Endpoint::Point(x.clone()));
            let g2 = GeneralizedGeodesic::connect_unchecked(x2, &Endpoint::Point(x.clone()));
            let p1 = GeneralizedGeodesic::connect_unchecked(x1, &Endpoint::Point(project_unchecked(x1, c.r, &Endpoint::Point(x.clone()))));
            let p2 = GeneralizedGeodesic::connect_unchecked(x2, &Endpoint::Point(project_unchecked(x2, c.r, &Endpoint::Point(x.clone()))));
            let (mut worst, mut worst_rho) = (f64::NEG_INFINITY, 0.0f64);
            for k in 0..=20 {
                let t = window.0 + (window.1 - window.0) * k as f64 / 20.0;
                let (a, b) = (g1.evaluate(t), g2.evaluate(t + tau));
                worst = worst.max(a.dist(&b));
                worst_rho = worst_rho.max(p1.evaluate(t).dist(&a)).max(p2.evaluate(t + tau).dist(&b));
            }
            let w = format!("x1={} x2={} x={} tau={tau}", short(x1.label()), short(x2.label()), short(x.label()));
            (worst - bound, worst_rho, w)
        })
        .collect();
    let mut report = EstimateReport::new("triangle-window");
    report.param("space", space.name()).param("bound", bound).param("samples", samples).param("constants", c);
    report.push(margin_check(
        "window-deviation",
        "d(c_{x1,x}(t), c_{x2,x}(t+tau)) <= 2 beta (L + 2r' + beta) / r'' on [T-r', T+r']",
        results.iter().map(|(m, _, w)| (*m, w.clone())),
        1e-6,
    ));
    report.push(margin_check(
        "window-projection-identity",
        "c_{xi, rho_r(x)} = c_{xi, x} on the window",
        results.iter().map(|(_, r, w)| (*r, w.clone())),
        1e-9,
    ));
    report
}

/// Samples configurations `(x₁, x₂, x)` and checks
/// `d_FS(Φ_T c_{x₁,ρ_r(x)}, Φ_{T+τ} c_{x₂,ρ_r(x)}) ≤ δ` with
/// `τ = d(x₂, x) − d(x₁, x)`.
pub fn verify_estimate_g(space: Space, consts: &FlowConstants, samples: usize, seed: u64, cfg: &FlowMetricConfig) -> Result<EstimateReport> {
    let mut rng = crate::sampling::rng(seed);
    let c = *consts;
    let window = (c.t - c.r_prime, c.t + c.r_prime);
    let configs: Vec<[SpacePoint; 3]> =
        (0..samples).map(|_| triangle_sample(&mut rng, space, c.beta, c.r + c.l, window)).collect();
    let results: Vec<Result<(f64, f64, String)>> = configs
        .par_iter()
        .map(|[x1, x2, x]| {
            let tau = x2.dist(x) - x1.dist(x);
            let e = Endpoint::Point(x.clone());
            let g1 = GeneralizedGeodesic::connect_unchecked(x1, &Endpoint::Point(project_unchecked(x1, c.r, &e)));
            let g2 = GeneralizedGeodesic::connect_unchecked(x2, &Endpoint::Point(project_unchecked(x2, c.r, &e)));
            let d = dist_fs(&g1.flow(c.t), &g2.flow(c.t + tau), cfg)?;
            let w = format!("x1={} x2={} x={} tau={tau}", short(x1.label()), short(x2.label()), short(x.label()));
            Ok((d.upper - c.delta, tau.abs() - c.beta, w))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut report = EstimateReport::new("flow-estimate-points");
    report.param("space", space.name()).param("samples", samples).param("constants", c);
    report.push(margin_check(
        "flow-estimate-points",
        "d_FS(Phi_T c_{x1,rho(x)}, Phi_{T+tau} c_{x2,rho(x)}) <= delta",
        results.iter().map(|(m, _, w)| (*m, w.clone())),
        0.0,
    ));
    report.push(margin_check(
        "flow-estimate-points-shift",
        "|tau| <= beta",
        results.iter().map(|(_, m, w)| (*m, w.clone())),
        1e-9,
    ));
    Ok(report)
}

/// `τ = τ₁ + τ₂` for `f = H_{g,h}(·, t)` and `s = gh`, with
/// `τ₁ = d(h⁻¹x₀, x) − d(x₀, x)` and `τ₂ = d(s⁻¹x₀, z) − d(h⁻¹x₀, z)`
/// where `z` is at parameter `t` from `ρ_{R,h⁻¹x₀}(x)` to `x`.
pub fn estimate_tau(h: &HomotopySAction, f: &FMap, x: &SpacePoint) -> (f64, f64, f64) {
    let x0 = h.x0();
    let hx0 = f.s.inverse().act(x0);
    let sx0 = f.product().inverse().act(x0);
    let tau1 = hx0.dist(x) - x0.dist(x);
    let rho = project_unchecked(&hx0, h.radius(), &Endpoint::Point(x.clone()));
    let z = interpolate_unchecked(&rho, x, f.t);
    let tau2 = sx0.dist(&z) - hx0.dist(&z);
    (tau1 + tau2, tau1, tau2)
}

/// `d_FS(Φ_T ι(a, x), Φ_{T+τ} ι(a s⁻¹, f(x)))` with the constructed `τ`.
fn action_deviation(
    h: &HomotopySAction,
    t: f64,
    a: &IsometryElement,
    f: &FMap,
    x: &SpacePoint,
    extra_shift: f64,
    cfg: &FlowMetricConfig,
) -> Result<(f64, f64)> {
    let (tau, _, _) = estimate_tau(h, f, x);
    let s = f.product();
    let left = h.iota(a, x).flow(t + extra_shift);
    let right = h.iota(&a.compose(&s.inverse()), &h.apply_fmap(f, x)).flow(t + tau + extra_shift);
    Ok((dist_fs(&left, &right, cfg)?.upper, tau))
}

pub(crate) fn ball_sample(rng: &mut impl Rng, h: &HomotopySAction, beta: f64) -> SpacePoint {
    let big_r = h.radius();
    let space = h.x0().space();
    let d = match rng.gen_range(0..3) {
        0 => big_r * rng.gen::<f64>(),
        1 => big_r - 2.0 * beta * rng.gen::<f64>(),
        _ => 3.0 * rng.gen::<f64>(),
    };
    let d = cap(space, d.clamp(0.0, big_r));
    point_at_distance(rng, h.x0(), d)
}

/// Samples `(a, x, s, f)` and checks the estimate along the homotopy action,
/// the range of `τ`, and that the deviation does not depend on `a`.
pub fn verify_estimate_h(
    h: &HomotopySAction,
    consts: &ActionConstants,
    samples: usize,
    seed: u64,
    t_grid: &[f64],
    cfg: &FlowMetricConfig,
) -> Result<EstimateReport> {
    let mut rng = crate::sampling::rng(seed);
    let s = h.action().s().to_vec();
    let configs: Vec<(IsometryElement, SpacePoint, FMap)> = (0..samples)
        .map(|_| {
            let x = ball_sample(&mut rng, h, consts.beta);
            let len = rng.gen_range(0..=3);
            let a = h.action().random_element(&mut rng, len);
            let sj = &s[rng.gen_range(0..s.len())];
            let f = h.random_fmap(&mut rng, sj, t_grid);
            (a, x, f)
        })
        .collect();
    let e = h.action().identity();
    let results: Vec<Result<(f64, f64, f64, String)>> = configs
        .par_iter()
        .map(|(a, x, f)| {
            let (da, tau) = action_deviation(h, consts.t, a, f, x, 0.0, cfg)?;
            let (de, _) = action_deviation(h, consts.t, &e, f, x, 0.0, cfg)?;
            let w = format!(
                "a={} x={} f=H_({},{})(.,{}) tau={tau}",
                short(a.label()),
                short(x.label()),
                short(f.r.label()),
                short(f.s.label()),
                f.t
            );
            Ok((da - consts.delta, tau.abs() - consts.beta, (da - de).abs(), w))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut report = EstimateReport::new("flow-estimate-action");
    report
        .param("action", &h.action().name)
        .param("samples", samples)
        .param("radius", h.radius())
        .param("constants", consts);
    report.push(margin_check(
        "flow-estimate-action",
        "d_FS(Phi_T iota(a,x), Phi_{T+tau} iota(a s^-1, f(x))) <= delta",
        results.iter().map(|(m, _, _, w)| (*m, w.clone())),
        0.0,
    ));
    report.push(margin_check(
        "flow-estimate-action-shift",
        "|tau1 + tau2| <= beta",
        results.iter().map(|(_, m, _, w)| (*m, w.clone())),
        1e-9,
    ));
    let slack = 2.0 * cfg.tolerance + 1e-9;
    report.push(margin_check(
        "flow-estimate-action-equivariance",
        "deviation at (a,x) equals deviation at (e,x)",
        results.iter().map(|(_, _, d, w)| (*d, w.clone())),
        slack,
    ));
    Ok(report)
}

/// Per-chain outcome of [`verify_chain`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainOutcome {
    pub links: usize,
    pub link_deviations: Vec<f64>,
    pub sigma: f64,
    pub total: f64,
    /// Certified lower bound for the end-to-end distance.
    pub total_lower: f64,
    /// Largest distance from the origin among the chain's points.
    pub scale: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainReport {
    pub report: EstimateReport,
    pub outcomes: Vec<ChainOutcome>,
    pub max_link_deviation: f64,
    pub max_total: f64,
}

/// Composes the per-link shifts along each chain, and checks each link
/// deviation against `ε`, the end-to-end distance against `2nε`, the sum of
/// link deviations, and `|σ_n| ≤ 2nβ`.
pub fn verify_chain(
    h: &HomotopySAction,
    t: f64,
    beta: f64,
    chains: &[Chain],
    eps: f64,
    cfg: &FlowMetricConfig,
) -> Result<ChainReport> {
    let outcomes: Vec<Result<ChainOutcome>> = chains.par_iter().map(|c| chain_outcome(h, t, c, cfg)).collect();
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let mut report = EstimateReport::new("chain-estimate");
    report.param("action", &h.action().name).param("chains", chains.len()).param("epsilon", eps).param("t", t);
    let label = |i: usize| {
        let c = &chains[i];
        format!("chain {i}: g={} x={} n={}", short(c.g.label()), short(c.x.label()), c.links.len())
    };
    report.push(margin_check(
        "chain-link-deviation",
        "every link deviation <= epsilon",
        outcomes.iter().enumerate().map(|(i, o)| (o.link_deviations.iter().fold(0.0f64, |a, b| a.max(*b)) - eps, label(i))),
        0.0,
    ));
    report.push(margin_check(
        "chain-total",
        "d_FS(Phi_T iota(g,x), Phi_{T+sigma_n} iota(h,y)) <= 2 n epsilon",
        outcomes.iter().enumerate().map(|(i, o)| (o.total - 2.0 * o.links as f64 * eps, label(i))),
        0.0,
    ));
    report.push(margin_check(
        "chain-total-vs-links",
        "end-to-end distance <= sum of link deviations, up to roundoff at the chain's scale",
        outcomes.iter().enumerate().map(|(i, o)| {
            let floor = 64.0 * f64::EPSILON * o.scale * o.link_deviations.len() as f64;
            (o.total_lower - o.link_deviations.iter().sum::<f64>() - floor, label(i))
        }),
        2.0 * cfg.tolerance,
    ));
    report.push(margin_check(
        "chain-shift",
        "|sigma_n| <= 2 n beta",
        outcomes.iter().enumerate().map(|(i, o)| (o.sigma.abs() - 2.0 * o.links as f64 * beta, label(i))),
        1e-9,
    ));
    let max_link_deviation = outcomes.iter().flat_map(|o| o.link_deviations.iter().copied()).fold(0.0, f64::max);
    let max_total = outcomes.iter().map(|o| o.total).fold(0.0, f64::max);
    Ok(ChainReport { report, outcomes, max_link_deviation, max_total })
}

/// `σ_n` for a chain, composed from the per-link shifts.
pub fn chain_shift(h: &HomotopySAction, c: &Chain) -> f64 {
    let pts = c.points();
    c.links
        .iter()
        .enumerate()
        .map(|(i, l)| estimate_tau(h, &l.f, &pts[i]).0 - estimate_tau(h, &l.f_tilde, &pts[i + 1]).0)
        .sum()
}

fn chain_outcome(h: &HomotopySAction, t: f64, c: &Chain, cfg: &FlowMetricConfig) -> Result<ChainOutcome> {
    let gs = c.group_elements();
    let pts = c.points();
    let mut sigma = 0.0;
    let mut devs = Vec::with_capacity(2 * c.links.len());
    for (i, l) in c.links.iter().enumerate() {
        let (g_prev, x_prev) = (&gs[i], &pts[i]);
        let (g_next, x_next) = (&gs[i + 1], &pts[i + 1]);
        let (tau, _, _) = estimate_tau(h, &l.f, x_prev);
        let (tau_t, _, _) = estimate_tau(h, &l.f_tilde, x_next);
        let left = h.iota(g_prev, x_prev).flow(t + sigma);
        let mid = h.iota(&g_prev.compose(&l.a.inverse()), &h.apply_fmap(&l.f, x_prev)).flow(t + tau + sigma);
        devs.push(dist_fs(&left, &mid, cfg)?.upper);
        sigma += tau - tau_t;
        let right = h.iota(g_next, x_next).flow(t + sigma);
        let mid2 = h.iota(&g_next.compose(&l.b.inverse()), &h.apply_fmap(&l.f_tilde, x_next)).flow(t + tau_t + sigma);
        devs.push(dist_fs(&right, &mid2, cfg)?.upper);
    }
    let (g_end, y) = (gs.last().unwrap(), pts.last().unwrap());
    let total = dist_fs(&h.iota(&c.g, &c.x).flow(t), &h.iota(g_end, y).flow(t + sigma), cfg)?;
    let o = h.action().space.origin();
    let scale = pts.iter().chain([&c.x]).map(|p| p.dist(&o)).fold(0.0, f64::max);
    Ok(ChainOutcome {
        links: c.links.len(),
        link_deviations: devs,
        sigma,
        total: total.upper,
        total_lower: total.lower,
        scale,
    })
}

/// Three-valued membership: numerical brackets can leave a point undecided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    In,
    Out,
    Undetermined,
}

/// An open cover of `G × B̄_R(x₀)`, queried through candidate patches.
pub trait PulledBackCover: Sync {
    type Patch: Clone + Send;
    /// Patches that may contain `(g, x)` together with its chain set.
    fn candidates(&self, g: &IsometryElement, x: &SpacePoint) -> Vec<Self::Patch>;
    /// Whether `(h, y)`, reached from the patch's base by `chain`, lies in
    /// the patch.
    fn contains(&self, patch: &Self::Patch, h: &IsometryElement, y: &SpacePoint, chain: &Chain) -> Membership;
    fn describe(&self, patch: &Self::Patch) -> String;
}

/// The one-patch cover `{G × B̄_R(x₀)}`.
pub struct SingleBall;

impl PulledBackCover for SingleBall {
    type Patch = ();
    fn candidates(&self, _: &IsometryElement, _: &SpacePoint) -> Vec<()> {
        vec![()]
    }
    fn contains(&self, _: &(), _: &IsometryElement, _: &SpacePoint, _: &Chain) -> Membership {
        Membership::In
    }
    fn describe(&self, _: &()) -> String {
        "G x B_R(x0)".into()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SLongReport {
    pub sampled: usize,
    pub passed: usize,
    pub chains_checked: usize,
    pub chains_skipped: usize,
    /// True when no sample was given.
    pub vacuous: bool,
    /// How many samples each kind of patch accounted for.
    pub patch_kinds: Vec<(String, usize)>,
    pub failures: Vec<String>,
}

impl SLongReport {
    pub fn ok(&self) -> bool {
        self.passed == self.sampled
    }

    pub fn entry(&self) -> CheckEntry {
        let e = CheckEntry::new(
            "s-long",
            "some patch contains the whole chain set S^{|S|}(g,x)",
            self.ok(),
            (self.sampled - self.passed) as f64,
        );
        match self.failures.first() {
            Some(w) => e.with_witness(w.clone()),
            None if self.vacuous => e.with_witness("vacuous: no samples"),
            None => e,
        }
    }
}

/// For each sampled `(g, x)` draws chains from `S^{|S|}(g, x)` and looks for
/// a single candidate patch containing every chain end.
pub fn check_s_long<C: PulledBackCover>(
    cover: &C,
    h: &HomotopySAction,
    samples: &[(IsometryElement, SpacePoint)],
    budget: usize,
    seed: u64,
    t_grid: &[f64],
) -> Result<SLongReport> {
    let n = h.action().s().len();
    let mut rng = crate::sampling::rng(seed);
    let mut sets = Vec::with_capacity(samples.len());
    for (g, x) in samples {
        sets.push(h.s_n_sample(&mut rng, g, x, n, budget, t_grid)?);
    }
    let outcomes: Vec<(Option<String>, Option<String>)> = samples
        .par_iter()
        .zip(sets.par_iter())
        .map(|((g, x), set)| {
            for p in cover.candidates(g, x) {
                let all = set.chains.iter().all(|c| {
                    let (hh, y) = c.end();
                    cover.contains(&p, &hh, &y, c) == Membership::In
                });
                if all {
                    let kind = cover.describe(&p);
                    return (Some(kind.split(':').next().unwrap_or("").to_string()), None);
                }
            }
            (None, Some(format!("g={} x={}", short(g.label()), short(x.label()))))
        })
        .collect();
    let mut kinds: Vec<(String, usize)> = Vec::new();
    for (k, _) in &outcomes {
        if let Some(k) = k {
            match kinds.iter_mut().find(|(name, _)| name == k) {
                Some(e) => e.1 += 1,
                None => kinds.push((k.clone(), 1)),
            }
        }
    }
    kinds.sort();
    Ok(SLongReport {
        sampled: samples.len(),
        passed: outcomes.iter().filter(|o| o.0.is_some()).count(),
        chains_checked: sets.iter().map(|s| s.chains.len()).sum(),
        chains_skipped: sets.iter().map(|s| s.skipped).sum(),
        vacuous: samples.is_empty(),
        patch_kinds: kinds,
        failures: outcomes.into_iter().filter_map(|o| o.1).collect(),
    })
}

/// The flow tubes `B_{ε₀}(Φ_{[−α,α]}(z))`, pulled back through `Φ_T ∘ ι`.
/// Membership of `Φ_T ι(h, y)` in the tube around `z = Φ_T ι(g, x)` is
/// certified by the shift composed along the reversed chain.
pub struct FlowTubeCover<'a> {
    pub h: &'a HomotopySAction,
    pub t: f64,
    pub alpha: f64,
    pub eps0: f64,
    pub cfg: FlowMetricConfig,
}

impl PulledBackCover for FlowTubeCover<'_> {
    type Patch = (IsometryElement, SpacePoint);

    fn candidates(&self, g: &IsometryElement, x: &SpacePoint) -> Vec<Self::Patch> {
        vec![(g.clone(), x.clone())]
    }

    fn contains(&self, patch: &Self::Patch, h: &IsometryElement, y: &SpacePoint, chain: &Chain) -> Membership {
        let (g, x) = patch;
        let back = chain.reversed();
        let sigma = chain_shift(self.h, &back);
        if sigma.abs() > self.alpha {
            return Membership::Undetermined;
        }
        let z = self.h.iota(g, x).flow(self.t + sigma);
        let w = self.h.iota(h, y).flow(self.t);
        match dist_fs(&w, &z, &self.cfg) {
            Ok(d) if d.upper < self.eps0 => Membership::In,
            Ok(d) if d.lower >= self.eps0 => Membership::Undetermined,
            _ => Membership::Undetermined,
        }
    }

    fn describe(&self, patch: &Self::Patch) -> String {
        format!("flow-tube: around Phi_T iota({}, {})", short(patch.0.label()), short(patch.1.label()))
    }
}

/// Whichever of two covers certifies containment first. The union of two
/// covers is again a cover; its dimension is at most the sum plus one.
pub struct FirstOf<A, B>(pub A, pub B);

#[derive(Clone)]
pub enum EitherPatch<P, Q> {
    Left(P),
    Right(Q),
}

impl<A: PulledBackCover, B: PulledBackCover> PulledBackCover for FirstOf<A, B> {
    type Patch = EitherPatch<A::Patch, B::Patch>;

    fn candidates(&self, g: &IsometryElement, x: &SpacePoint) -> Vec<Self::Patch> {
        let mut v: Vec<Self::Patch> = self.0.candidates(g, x).into_iter().map(EitherPatch::Left).collect();
        v.extend(self.1.candidates(g, x).into_iter().map(EitherPatch::Right));
        v
    }

    fn contains(&self, patch: &Self::Patch, h: &IsometryElement, y: &SpacePoint, chain: &Chain) -> Membership {
        match patch {
            EitherPatch::Left(p) => self.0.contains(p, h, y, chain),
            EitherPatch::Right(q) => self.1.contains(q, h, y, chain),
        }
    }

    fn describe(&self, patch: &Self::Patch) -> String {
        match patch {
            EitherPatch::Left(p) => self.0.describe(p),
            EitherPatch::Right(q) => self.1.describe(q),
        }
    }
}

/// An open cover of the flow space queried through candidate patches.
pub trait FsCover: Sync {
    type Patch: Clone + Send + Sync;
    /// Patches that might contain `c`; every patch containing `c` is listed.
    fn candidate_patches(&self, c: &GeneralizedGeodesic) -> Vec<Self::Patch>;
    fn membership(&self, patch: &Self::Patch, c: &GeneralizedGeodesic) -> Membership;
    fn patch_tag(&self, patch: &Self::Patch) -> String;
}

/// `{(Φ_T ∘ ι)⁻¹(U)}` for an open cover `{U}` of the flow space.
pub struct PullBack<'a, C: FsCover> {
    pub cover: &'a C,
    pub h: &'a HomotopySAction,
    pub t: f64,
}

impl<C: FsCover> PulledBackCover for PullBack<'_, C> {
    type Patch = C::Patch;

    fn candidates(&self, g: &IsometryElement, x: &SpacePoint) -> Vec<C::Patch> {
        self.cover.candidate_patches(&self.h.iota(g, x).flow(self.t))
    }

    fn contains(&self, patch: &C::Patch, h: &IsometryElement, y: &SpacePoint, _: &Chain) -> Membership {
        self.cover.membership(patch, &self.h.iota(h, y).flow(self.t))
    }

    fn describe(&self, patch: &C::Patch) -> String {
        format!("pulled-back: {}", self.cover.patch_tag(patch))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_actions::GroupAction;
    use crate::transfer::{select_constants_g, DEFAULT_T_GRID};

    #[test]
    fn coincident_base_points_give_zero() {
        let c = select_constants_g(1.0, 1.0, 0.5).unwrap();
        let x1 = SpacePoint::euclidean(&[0.0, 0.0]);
        let x = SpacePoint::euclidean(&[30.0, 4.0]);
        let e = Endpoint::Point(x.clone());
        let g = GeneralizedGeodesic::connect_unchecked(&x1, &Endpoint::Point(project_unchecked(&x1, c.r, &e)));
        let d = dist_fs(&g.flow(c.t), &g.flow(c.t), &FlowMetricConfig::default()).unwrap();
        assert!(d.upper <= 1e-9);
    }

    #[test]
    fn collinear_points_on_the_line_coincide_after_shift() {
        let c = select_constants_g(1.0, 1.0, 0.1).unwrap();
        let (x1, x2) = (SpacePoint::euclidean(&[0.0]), SpacePoint::euclidean(&[-0.7]));
        let x = SpacePoint::euclidean(&[c.r + 0.5]);
        let tau = x2.dist(&x) - x1.dist(&x);
        let e = Endpoint::Point(x.clone());
        let g1 = GeneralizedGeodesic::connect_unchecked(&x1, &Endpoint::Point(project_unchecked(&x1, c.r, &e)));
        let g2 = GeneralizedGeodesic::connect_unchecked(&x2, &Endpoint::Point(project_unchecked(&x2, c.r, &e)));
        let d = dist_fs(&g1.flow(c.t), &g2.flow(c.t + tau), &FlowMetricConfig::default()).unwrap();
        // the two projections stop at different points, so only the far tail differs
        assert!(d.upper <= c.delta);
    }

    #[test]
    fn identity_map_has_zero_shift() {
        let h = HomotopySAction::new(GroupAction::z2(), 50.0).unwrap();
        let e = h.action().identity();
        let f = FMap { r: e.clone(), s: e.clone(), t: 0.3 };
        let x = SpacePoint::euclidean(&[10.0, -3.0]);
        assert_eq!(estimate_tau(&h, &f, &x).0, 0.0);
        let (d, _) = action_deviation(&h, 20.0, &e, &f, &x, 0.0, &FlowMetricConfig::default()).unwrap();
        assert!(d <= 1e-9);
    }

    #[test]
    fn single_patch_is_s_long() {
        let h = HomotopySAction::new(GroupAction::z(), 5.0).unwrap();
        let samples = vec![(h.action().identity(), SpacePoint::euclidean(&[4.5]))];
        let r = check_s_long(&SingleBall, &h, &samples, 5, 1, &DEFAULT_T_GRID).unwrap();
        assert!(r.ok() && !r.vacuous);
        let r = check_s_long(&SingleBall, &h, &[], 5, 1, &DEFAULT_T_GRID).unwrap();
        assert!(r.ok() && r.vacuous);
        assert!(r.entry().witness.is_some());
    }
}
