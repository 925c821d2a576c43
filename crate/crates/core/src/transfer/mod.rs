//! The homotopy action of a generating set on a large ball, the chain sets
//! it generates, the map `ι(g, x) = c_{gx₀, gx}`, and sampled verifiers for
//! the flow estimates that tie them together.

mod constants;
mod verify;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::flow_space::GeneralizedGeodesic;
use crate::group_actions::{GroupAction, IsometryElement};
use crate::model_spaces::{interpolate_unchecked, project_unchecked, Endpoint, SpacePoint};

pub use constants::{
    chain_delta, select_constants_g, select_constants_h, tail_integral, triangle_bound, ActionConstants,
    FlowConstants,
};
pub use verify::{
    chain_shift, check_s_long, estimate_tau, triangle_check, verify_chain, verify_estimate_g, verify_estimate_h,
    ChainOutcome, ChainReport, EitherPatch, FirstOf, FlowTubeCover, FsCover, Membership, PullBack, PulledBackCover,
    SLongReport, SingleBall,
};

/// Slack for ball membership.
pub const BALL_SLACK: f64 = 1e-9;

/// Default time grid for sampling `F_s`.
pub const DEFAULT_T_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// `φ_g(x) = ρ_{R,x₀}(gx)` and `H_{g,h}(x,t) = ρ_{R,x₀}` of the point at
/// parameter `t` from `g ρ_{R,x₀}(hx)` to `ghx`.
#[derive(Clone, Debug)]
pub struct HomotopySAction {
    action: GroupAction,
    radius: f64,
    x0: SpacePoint,
}

/// A member `x ↦ H_{r,s'}(x, t)` of `F_{rs'}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FMap {
    pub r: IsometryElement,
    pub s: IsometryElement,
    pub t: f64,
}

impl FMap {
    pub fn product(&self) -> IsometryElement {
        self.r.compose(&self.s)
    }
}

impl HomotopySAction {
    pub fn new(action: GroupAction, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return usage("radius must be positive");
        }
        let x0 = action.base_point.clone();
        Ok(HomotopySAction { action, radius, x0 })
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn x0(&self) -> &SpacePoint {
        &self.x0
    }

    pub fn in_ball(&self, x: &SpacePoint) -> bool {
        x.space() == self.x0.space() && x.dist(&self.x0) <= self.radius + BALL_SLACK
    }

    /// `ρ_{R,x₀}`.
    pub fn project(&self, x: &SpacePoint) -> SpacePoint {
        project_unchecked(&self.x0, self.radius, &Endpoint::Point(x.clone()))
    }

    fn check_s(&self, g: &IsometryElement) -> Result<()> {
        match self.action.s_index(g) {
            Some(_) => Ok(()),
            None => usage(format!("{} is not in S", g.label())),
        }
    }

    fn check_ball(&self, x: &SpacePoint) -> Result<()> {
        if self.in_ball(x) {
            Ok(())
        } else {
            usage(format!("point {} lies outside the ball of radius {}", x.label(), self.radius))
        }
    }

    pub fn phi(&self, g: &IsometryElement, x: &SpacePoint) -> Result<SpacePoint> {
        self.check_s(g)?;
        self.check_ball(x)?;
        Ok(self.project(&g.act(x)))
    }

    pub fn homotopy(&self, g: &IsometryElement, h: &IsometryElement, x: &SpacePoint, t: f64) -> Result<SpacePoint> {
        self.check_s(g)?;
        self.check_s(h)?;
        if self.action.s_index(&g.compose(h)).is_none() {
            return usage(format!("{}·{} is not in S", g.label(), h.label()));
        }
        if !(0.0..=1.0).contains(&t) {
            return usage(format!("homotopy time {t} outside [0,1]"));
        }
        self.check_ball(x)?;
        Ok(self.homotopy_unchecked(g, h, x, t))
    }

    pub(crate) fn homotopy_unchecked(&self, g: &IsometryElement, h: &IsometryElement, x: &SpacePoint, t: f64) -> SpacePoint {
        let from = g.act(&self.project(&h.act(x)));
        let to = g.act(&h.act(x));
        self.project(&interpolate_unchecked(&from, &to, t))
    }

    pub fn apply_fmap(&self, f: &FMap, x: &SpacePoint) -> SpacePoint {
        self.homotopy_unchecked(&f.r, &f.s, x, f.t)
    }

    /// All factorizations `s = r s'` with `r, s' ∈ S`.
    pub fn factorizations(&self, s: &IsometryElement) -> Vec<(IsometryElement, IsometryElement)> {
        let key = s.key();
        let mut out = Vec::new();
        for r in self.action.s() {
            for sp in self.action.s() {
                if r.compose(sp).key() == key {
                    out.push((r.clone(), sp.clone()));
                }
            }
        }
        out
    }

    /// `F_s` restricted to a finite time grid.
    pub fn f_set_sample(&self, s: &IsometryElement, t_grid: &[f64]) -> Result<Vec<FMap>> {
        self.check_s(s)?;
        if t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return usage("time grid must lie in [0,1]");
        }
        let mut out = Vec::new();
        for (r, sp) in self.factorizations(s) {
            for &t in t_grid {
                out.push(FMap { r: r.clone(), s: sp.clone(), t });
            }
        }
        Ok(out)
    }

    /// A uniformly random member of `F_s` on the grid.
    pub fn random_fmap(&self, rng: &mut impl Rng, s: &IsometryElement, t_grid: &[f64]) -> FMap {
        let fs = self.factorizations(s);
        let (r, sp) = fs[rng.gen_range(0..fs.len())].clone();
        FMap { r, s: sp, t: t_grid[rng.gen_range(0..t_grid.len())] }
    }

    /// `ι(g, x)`.
    pub fn iota(&self, g: &IsometryElement, x: &SpacePoint) -> GeneralizedGeodesic {
        iota(&self.action, g, x)
    }

    /// Samples `S^n(g, x)`: always the stationary chain, plus up to `budget`
    /// random chains whose link equations `f_i(x_{i−1}) = f̃_i(x_i)` could be
    /// solved.
    pub fn s_n_sample(
        &self,
        rng: &mut impl Rng,
        g: &IsometryElement,
        x: &SpacePoint,
        n: usize,
        budget: usize,
        t_grid: &[f64],
    ) -> Result<ChainSample> {
        if n == 0 {
            return usage("chain length must be at least 1");
        }
        self.check_ball(x)?;
        let s = self.action.s();
        let mut chains = Vec::new();
        // stationary chain: a_i = b_i and f_i = f̃_i
        let mut links = Vec::new();
        for _ in 0..n {
            let a = s[rng.gen_range(0..s.len())].clone();
            let f = self.random_fmap(rng, &a, t_grid);
            links.push(ChainLink { a: a.clone(), b: a, f: f.clone(), f_tilde: f, point: x.clone(), residual: 0.0 });
        }
        chains.push(Chain { g: g.clone(), x: x.clone(), links });
        let mut skipped = 0;
        for _ in 0..budget {
            match self.random_chain(rng, g, x, n, t_grid) {
                Some(c) => chains.push(c),
                None => skipped += 1,
            }
        }
        Ok(ChainSample { chains, skipped })
    }

    /// A point of the ball, drawn uniformly in radius, near the sphere, or
    /// near `x₀`.
    pub fn sample_point(&self, rng: &mut impl Rng) -> SpacePoint {
        let beta = 2.0 * self.action.max_generator_displacement().max(0.5);
        verify::ball_sample(rng, self, beta)
    }

    /// At least `count` chains of length `n`, from random `(g, x)` with up to
    /// `per_point` random chains each besides the stationary one.
    pub fn sample_chains(
        &self,
        rng: &mut impl Rng,
        n: usize,
        count: usize,
        per_point: usize,
        t_grid: &[f64],
    ) -> Result<ChainSample> {
        let mut out = ChainSample { chains: Vec::new(), skipped: 0 };
        while out.chains.len() < count {
            let len = rng.gen_range(0..=3);
            let g = self.action.random_element(rng, len);
            let x = self.sample_point(rng);
            let mut s = self.s_n_sample(rng, &g, &x, n, per_point, t_grid)?;
            out.chains.append(&mut s.chains);
            out.skipped += s.skipped;
        }
        out.chains.truncate(count);
        Ok(out)
    }

    fn random_chain(
        &self,
        rng: &mut impl Rng,
        g: &IsometryElement,
        x: &SpacePoint,
        n: usize,
        t_grid: &[f64],
    ) -> Option<Chain> {
        let s = self.action.s();
        let mut links = Vec::with_capacity(n);
        let mut cur = x.clone();
        for _ in 0..n {
            let a = s[rng.gen_range(0..s.len())].clone();
            let b = s[rng.gen_range(0..s.len())].clone();
            let f = self.random_fmap(rng, &a, t_grid);
            let f_tilde = self.random_fmap(rng, &b, t_grid);
            let p = self.apply_fmap(&f, &cur);
            let (y, residual) = self.solve_link(&f_tilde, &b, &p)?;
            links.push(ChainLink { a, b, f, f_tilde, point: y.clone(), residual });
            cur = y;
        }
        Some(Chain { g: g.clone(), x: x.clone(), links })
    }

    /// Finds `y ∈ B̄_R(x₀)` with `f̃(y) = p`.
    fn solve_link(&self, f_tilde: &FMap, b: &IsometryElement, p: &SpacePoint) -> Option<(SpacePoint, f64)> {
        let tol = 1e-9 + 1e-14 * p.dist(&self.x0);
        let residual = |y: &SpacePoint| self.apply_fmap(f_tilde, y).dist(p);
        // inside the ball every member of F_b acts as b
        let guess = b.inverse().act(p);
        if self.in_ball(&guess) {
            let r = residual(&guess);
            if r <= tol {
                return Some((guess, r));
            }
        }
        // otherwise search along the segment from x₀ toward the guess
        let len = self.x0.dist(&guess).min(self.radius);
        if len <= 0.0 {
            return None;
        }
        let ray = crate::model_spaces::ray_unchecked(&self.x0, &Endpoint::Point(guess));
        let at = |u: f64| ray.at(u.clamp(0.0, len));
        let (mut lo, mut hi) = (0.0, len);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut c, mut d) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
        let (mut fc, mut fd) = (residual(&at(c)), residual(&at(d)));
        for _ in 0..200 {
            if fc < fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - phi * (hi - lo);
                fc = residual(&at(c));
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + phi * (hi - lo);
                fd = residual(&at(d));
            }
            if hi - lo < 1e-13 * (1.0 + len) {
                break;
            }
        }
        let y = at(0.5 * (lo + hi));
        let r = residual(&y);
        (r <= tol).then_some((y, r))
    }
}

/// `ι(g, x) = c_{gx₀, gx}`.
pub fn iota(action: &GroupAction, g: &IsometryElement, x: &SpacePoint) -> GeneralizedGeodesic {
    let start = g.act(&action.base_point);
    GeneralizedGeodesic::connect_unchecked(&start, &Endpoint::Point(g.act(x)))
}

/// One link: `f(x_{i−1}) = f̃(x_i)` with `f ∈ F_a`, `f̃ ∈ F_b`; `point` is `x_i`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainLink {
    pub a: IsometryElement,
    pub b: IsometryElement,
    pub f: FMap,
    pub f_tilde: FMap,
    pub point: SpacePoint,
    pub residual: f64,
}

/// A chain witnessing `(h, y) ∈ S^n(g, x)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Chain {
    pub g: IsometryElement,
    pub x: SpacePoint,
    pub links: Vec<ChainLink>,
}

impl Chain {
    /// `g_i = g a₁⁻¹ b₁ ⋯ a_i⁻¹ b_i` for `i = 0..n`.
    pub fn group_elements(&self) -> Vec<IsometryElement> {
        let mut out = vec![self.g.clone()];
        for l in &self.links {
            let last = out.last().unwrap();
            out.push(last.compose(&l.a.inverse()).compose(&l.b));
        }
        out
    }

    /// `x_0, …, x_n`.
    pub fn points(&self) -> Vec<SpacePoint> {
        let mut out = vec![self.x.clone()];
        out.extend(self.links.iter().map(|l| l.point.clone()));
        out
    }

    pub fn end(&self) -> (IsometryElement, SpacePoint) {
        (self.group_elements().pop().unwrap(), self.points().pop().unwrap())
    }

    /// The same chain read backwards, witnessing `(g, x) ∈ S^n(h, y)`.
    pub fn reversed(&self) -> Chain {
        let (h, y) = self.end();
        let pts = self.points();
        let n = self.links.len();
        let links = (0..n)
            .rev()
            .map(|i| {
                let l = &self.links[i];
                ChainLink {
                    a: l.b.clone(),
                    b: l.a.clone(),
                    f: l.f_tilde.clone(),
                    f_tilde: l.f.clone(),
                    point: pts[i].clone(),
                    residual: l.residual,
                }
            })
            .collect();
        Chain { g: h, x: y, links }
    }

    pub fn max_residual(&self) -> f64 {
        self.links.iter().map(|l| l.residual).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct ChainSample {
    pub chains: Vec<Chain>,
    /// Random chains dropped because a link equation could not be solved.
    pub skipped: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    fn z_on_line() -> HomotopySAction {
        HomotopySAction::new(GroupAction::z(), 10.0).unwrap()
    }

    #[test]
    fn phi_clamps_radially() {
        let h = z_on_line();
        let three = IsometryElement::translation(&[3.0]);
        // +3 is not a generator
        assert!(h.phi(&three, &SpacePoint::euclidean(&[9.0])).is_err());
        let h3 = HomotopySAction::new(
            GroupAction::new(
                "z3",
                crate::model_spaces::Space::Euclidean(1),
                crate::group_actions::ActionKind::Translations,
                vec![three.clone()],
                SpacePoint::euclidean(&[0.0]),
            )
            .unwrap(),
            10.0,
        )
        .unwrap();
        assert_eq!(h3.phi(&three, &SpacePoint::euclidean(&[9.0])).unwrap(), SpacePoint::euclidean(&[10.0]));
        assert!(h.phi(&h.action().s()[1].clone(), &SpacePoint::euclidean(&[10.5])).is_err());
    }

    #[test]
    fn homotopy_end_points() {
        let h = HomotopySAction::new(GroupAction::f2(), 3.0).unwrap();
        let mut rng = sampling::rng(3);
        let s = h.action().s().to_vec();
        for _ in 0..200 {
            let x = sampling::random_point(h.x0().space(), &mut rng, 3.0);
            let x = h.project(&x);
            for g in &s {
                for k in &s {
                    if h.action().s_index(&g.compose(k)).is_none() {
                        continue;
                    }
                    let a = h.homotopy(g, k, &x, 0.0).unwrap();
                    let b = h.phi(g, &h.phi(k, &x).unwrap()).unwrap();
                    assert!(a.dist(&b) <= 1e-9);
                    let c = h.homotopy(g, k, &x, 1.0).unwrap();
                    assert!(c.dist(&h.phi(&g.compose(k), &x).unwrap()) <= 1e-9);
                }
            }
            let e = h.action().identity();
            assert!(h.homotopy(&e, &e, &x, 0.4).unwrap().dist(&x) <= 1e-9);
        }
    }

    #[test]
    fn f_sets_count_factorizations() {
        let h = z_on_line();
        let e = h.action().identity();
        // e = 0+0 = 1+(−1) = (−1)+1
        assert_eq!(h.f_set_sample(&e, &DEFAULT_T_GRID).unwrap().len(), 15);
        let one = h.action().s()[1].clone();
        let fs = h.f_set_sample(&one, &[1.0]).unwrap();
        let x = SpacePoint::euclidean(&[2.5]);
        for f in fs {
            assert_eq!(h.apply_fmap(&f, &x), h.phi(&one, &x).unwrap());
        }
    }

    #[test]
    fn explicit_chain_on_the_line() {
        let h = z_on_line();
        let plus = IsometryElement::translation(&[1.0]);
        let x = SpacePoint::euclidean(&[2.0]);
        let f = FMap { r: plus.clone(), s: h.action().identity(), t: 0.5 };
        // x₁ solves f(x₀) = f(x₁), so x₁ = x₀ and g₁ = g·(+1)⁻¹(+1) = g
        let link = ChainLink { a: plus.clone(), b: plus.clone(), f: f.clone(), f_tilde: f, point: x.clone(), residual: 0.0 };
        let c = Chain { g: h.action().identity(), x: x.clone(), links: vec![link] };
        let (g1, x1) = c.end();
        assert!(g1.is_identity(0.0) && x1 == x);
    }

    #[test]
    fn sampled_chains_satisfy_their_equations() {
        let h = HomotopySAction::new(GroupAction::z2(), 6.0).unwrap();
        let mut rng = sampling::rng(5);
        let g = h.action().identity();
        let x = SpacePoint::euclidean(&[5.5, 0.5]);
        let sample = h.s_n_sample(&mut rng, &g, &x, 3, 50, &DEFAULT_T_GRID).unwrap();
        assert!(sample.chains.len() > 1);
        for c in &sample.chains {
            let pts = c.points();
            for (i, l) in c.links.iter().enumerate() {
                let lhs = h.apply_fmap(&l.f, &pts[i]);
                let rhs = h.apply_fmap(&l.f_tilde, &pts[i + 1]);
                assert!(lhs.dist(&rhs) <= 1e-8);
            }
            let r = c.reversed();
            assert!(r.end().0.approx_eq(&c.g, 1e-12) && r.end().1.dist(&c.x) <= 1e-12);
        }
    }

    #[test]
    fn iota_is_equivariant() {
        let a = GroupAction::z2();
        let x0 = &a.base_point;
        assert!(iota(&a, &a.identity(), x0).is_constant());
        let c = iota(&a, &a.identity(), &SpacePoint::euclidean(&[5.0, 0.0]));
        assert_eq!((c.c_minus().value(), c.c_plus().value()), (0.0, 5.0));
        let g = IsometryElement::translation(&[2.0, -1.0]);
        let h = IsometryElement::translation(&[0.0, 3.0]);
        let x = SpacePoint::euclidean(&[1.0, 1.5]);
        assert!(iota(&a, &h.compose(&g), &x).approx_eq(&h.act_fs(&iota(&a, &g, &x)), 1e-12));
    }
}
