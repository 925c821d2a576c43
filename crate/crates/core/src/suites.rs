//! Sampled verification suites, each returning one sorted report.
//!
//! These are the runs behind the command-line tool and the acceptance
//! tests: every suite is deterministic in its seed.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{usage, Result};
use crate::flow_space::convergence::{monitor_sequence, sigma_cauchy_bound, sigma_point, sigma_threshold};
use crate::flow_space::{dist_fs, FlowMetricConfig, GeneralizedGeodesic};
use crate::group_actions::{minimize_displacement, Classification, GroupAction, IsometryElement};
use crate::model_spaces::{cat0_sample_check, project_ball, Endpoint, Space, SpacePoint};
use crate::periodic::{
    check_cover, check_extension_laws, enumerate_axis_classes, CheckCoverConfig, Cover, FlowLineBundle, LineSubset,
    PointNet,
};
use crate::report::{margin_check, CheckEntry, EstimateReport};
use crate::sampling::{point_at_distance, random_end, random_geodesic, random_point, rng};
use crate::transfer::{
    chain_delta, check_s_long, select_constants_g, select_constants_h, triangle_check, verify_chain,
    verify_estimate_g, verify_estimate_h, FirstOf, FlowTubeCover, HomotopySAction, PullBack, DEFAULT_T_GRID,
};

fn short(s: String) -> String {
    if s.chars().count() <= 70 {
        s
    } else {
        let head: String = s.chars().take(34).collect();
        let tail: String = s.chars().rev().take(34).collect::<Vec<_>>().into_iter().rev().collect();
        format!("{head}…{tail}")
    }
}

fn pair_label(c: &GeneralizedGeodesic, d: &GeneralizedGeodesic) -> String {
    short(format!("c(0)={} d(0)={}", c.at_zero().label(), d.at_zero().label()))
}

/// Slack used in property checks on `d_FS`.
pub const DEFAULT_SLACK: f64 = 1e-6;

/// A geodesic near `c`: a small flow, a truncation, or a geodesic from a
/// nearby point toward the same forward end.
fn nearby(r: &mut impl Rng, c: &GeneralizedGeodesic) -> GeneralizedGeodesic {
    match r.gen_range(0..3) {
        0 => c.flow(r.gen_range(-0.05..0.05)),
        1 => c.restrict(r.gen_range(3.0..10.0)),
        _ => {
            let d = r.gen_range(0.0..0.05);
            let x = point_at_distance(r, c.at_zero(), d);
            GeneralizedGeodesic::connect(&x, &c.endpoints().1).unwrap_or_else(|_| c.clone())
        }
    }
}

/// Metric axioms, the closed-form identities, the ball projection and the
/// CAT(0) comparison in one space.
pub fn metric_suite(space: Space, samples: usize, seed: u64, tol: f64) -> Result<EstimateReport> {
    let mut r = rng(seed);
    let cfg = FlowMetricConfig::with_tolerance(tol);
    let exact = FlowMetricConfig::with_tolerance(1e-9);
    let triples: Vec<[GeneralizedGeodesic; 3]> = (0..samples)
        .map(|_| [random_geodesic(space, &mut r, 3.0), random_geodesic(space, &mut r, 3.0), random_geodesic(space, &mut r, 3.0)])
        .collect();
    let axioms: Vec<Result<[(f64, String); 3]>> = triples
        .par_iter()
        .map(|[a, b, c]| {
            let ab = dist_fs(a, b, &cfg)?;
            let ba = dist_fs(b, a, &cfg)?;
            let bc = dist_fs(b, c, &cfg)?;
            let ac = dist_fs(a, c, &cfg)?;
            let aa = dist_fs(a, a, &cfg)?;
            let w = pair_label(a, b);
            Ok([(aa.upper, w.clone()), ((ab.mid() - ba.mid()).abs(), w.clone()), (ac.lower - ab.upper - bc.upper, w)])
        })
        .collect();
    let axioms = axioms.into_iter().collect::<Result<Vec<_>>>()?;
    let mut report = EstimateReport::new("verify-metric");
    report.param("space", space.name()).param("samples", samples).param("seed", seed).param("tolerance", tol);
    report.push(margin_check("fs-identity", "d_FS(c, c) = 0", axioms.iter().map(|a| a[0].clone()), 3.0 * tol));
    report.push(margin_check("fs-symmetry", "d_FS(c, d) = d_FS(d, c)", axioms.iter().map(|a| a[1].clone()), 3.0 * tol));
    report.push(margin_check(
        "fs-triangle",
        "d_FS(a, c) <= d_FS(a, b) + d_FS(b, c)",
        axioms.iter().map(|a| a[2].clone()),
        3e-6,
    ));

    // closed forms: constants and flow shifts of lines
    let pts: Vec<(SpacePoint, SpacePoint, GeneralizedGeodesic, f64)> = (0..samples.min(200))
        .map(|_| {
            let (x, y) = (random_point(space, &mut r, 3.0), random_point(space, &mut r, 3.0));
            let line = crate::sampling::random_line(space, &mut r, 3.0);
            (x, y, line, r.gen_range(-5.0..5.0))
        })
        .collect();
    let closed: Vec<Result<[(f64, String); 2]>> = pts
        .par_iter()
        .map(|(x, y, line, tau)| {
            let d = dist_fs(&GeneralizedGeodesic::constant(x.clone()), &GeneralizedGeodesic::constant(y.clone()), &exact)?;
            let dx = x.dist(y);
            let m1 = if d.contains(dx, 0.0) { d.width() - 1e-9 } else { (d.mid() - dx).abs().max(d.width()) };
            let s = dist_fs(line, &line.flow(*tau), &exact)?;
            let m2 = if s.contains(tau.abs(), 0.0) { s.width() - 1e-9 } else { (s.mid() - tau.abs()).abs().max(s.width()) };
            Ok([
                (m1, short(format!("x={} y={}", x.label(), y.label()))),
                (m2, short(format!("line c(0)={} tau={tau}", line.at_zero().label()))),
            ])
        })
        .collect();
    let closed = closed.into_iter().collect::<Result<Vec<_>>>()?;
    report.push(margin_check(
        "fs-constant-identity",
        "d_FS(c_x, c_y) = d_X(x, y): bracket contains it, width <= 1e-9",
        closed.iter().map(|a| a[0].clone()),
        0.0,
    ));
    report.push(margin_check(
        "fs-flow-shift-identity",
        "d_FS(c, Phi_tau c) = |tau| for lines: bracket contains it, width <= 1e-9",
        closed.iter().map(|a| a[1].clone()),
        0.0,
    ));

    // ρ_r on pairs of points
    let x0 = space.origin();
    let mut proj = Vec::with_capacity(samples);
    for _ in 0..samples {
        let rad = r.gen_range(0.2..3.0);
        let (x, y) = (random_point(space, &mut r, 5.0), random_point(space, &mut r, 5.0));
        let px = project_ball(&x0, rad, &Endpoint::Point(x.clone()))?;
        let py = project_ball(&x0, rad, &Endpoint::Point(y.clone()))?;
        let ppx = project_ball(&x0, rad, &Endpoint::Point(px.clone()))?;
        let w = short(format!("r={rad} x={} y={}", x.label(), y.label()));
        proj.push((ppx.dist(&px), px.dist(&py) - x.dist(&y), w));
    }
    report.push(margin_check(
        "rho-idempotent",
        "rho_r(rho_r(x)) = rho_r(x)",
        proj.iter().map(|p| (p.0, p.2.clone())),
        1e-9,
    ));
    report.push(margin_check(
        "rho-lipschitz",
        "d(rho_r x, rho_r y) <= d(x, y)",
        proj.iter().map(|p| (p.1, p.2.clone())),
        1e-9,
    ));

    let mut cat = Vec::new();
    for _ in 0..samples.min(200) {
        let (x, y, z) = (random_point(space, &mut r, 3.0), random_point(space, &mut r, 3.0), random_point(space, &mut r, 3.0));
        let e = cat0_sample_check(&x, &y, &z, 7)?;
        cat.push((e, short(format!("x={} y={} z={}", x.label(), y.label(), z.label()))));
    }
    report.push(margin_check("cat0-comparison", "triangles are no fatter than in the plane", cat, 1e-7));
    report.sort();
    Ok(report)
}

/// The flow bound, the pointwise bounds from `d_FS`, the group law, both
/// convergence monitors and the comparison points `σ_t(s)`.
pub fn flow_suite(space: Space, samples: usize, seed: u64, tol: f64) -> Result<EstimateReport> {
    let mut r = rng(seed);
    let cfg = FlowMetricConfig::with_tolerance(tol);
    let mut report = EstimateReport::new("verify-flow");
    report.param("space", space.name()).param("samples", samples).param("seed", seed).param("tolerance", tol);

    let flows: Vec<(GeneralizedGeodesic, GeneralizedGeodesic, f64, f64)> = (0..samples)
        .map(|_| (random_geodesic(space, &mut r, 3.0), random_geodesic(space, &mut r, 3.0), r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)))
        .collect();
    let lip: Vec<Result<((f64, String), (f64, String))>> = flows
        .par_iter()
        .map(|(c, d, tau, sigma)| {
            let lhs = dist_fs(&c.flow(*tau), &d.flow(*sigma), &cfg)?.lower;
            let rhs = tau.abs().exp() * dist_fs(c, d, &cfg)?.upper + (sigma - tau).abs();
            let law = dist_fs(&c.flow(*sigma).flow(*tau), &c.flow(sigma + tau), &cfg)?.upper;
            let w = format!("{} tau={tau} sigma={sigma}", pair_label(c, d));
            Ok(((lhs - rhs, w.clone()), (law, w)))
        })
        .collect();
    let lip = lip.into_iter().collect::<Result<Vec<_>>>()?;
    report.push(margin_check(
        "flow-continuity",
        "d_FS(Phi_tau c, Phi_sigma d) <= e^|tau| d_FS(c, d) + |sigma - tau|",
        lip.iter().map(|x| x.0.clone()),
        DEFAULT_SLACK,
    ));
    report.push(margin_check(
        "flow-group-law",
        "Phi_tau Phi_sigma c = Phi_{sigma + tau} c",
        lip.iter().map(|x| x.1.clone()),
        DEFAULT_SLACK,
    ));

    let pairs: Vec<(GeneralizedGeodesic, GeneralizedGeodesic, f64)> = (0..samples)
        .map(|i| {
            let c = random_geodesic(space, &mut r, 3.0);
            let d = if i % 2 == 0 { random_geodesic(space, &mut r, 3.0) } else { nearby(&mut r, &c) };
            (c, d, r.gen_range(-3.0..3.0))
        })
        .collect();
    let point: Vec<Result<[(f64, String); 3]>> = pairs
        .par_iter()
        .map(|(c, d, t0)| {
            let b = dist_fs(c, d, &cfg)?;
            let dd = c.evaluate(*t0).dist(&d.evaluate(*t0));
            let e = t0.abs().exp();
            let w = format!("{} t0={t0}", pair_label(c, d));
            let first = dd - (e * b.upper + 2.0);
            let second = if b.upper <= 2.0 * (-t0.abs() - 1.0).exp() {
                dd - (4.0 * (t0.abs() + 1.0).exp()).sqrt() * b.upper.sqrt()
            } else {
                f64::NEG_INFINITY
            };
            let lower = (2.0 * (-dd / 2.0).exp() + dd - 2.0) / e - b.lower;
            Ok([(first, w.clone()), (second, w.clone()), (lower, w)])
        })
        .collect();
    let point = point.into_iter().collect::<Result<Vec<_>>>()?;
    report.push(margin_check(
        "pointwise-bound",
        "d_X(c(t0), d(t0)) <= e^|t0| d_FS(c, d) + 2",
        point.iter().map(|x| x[0].clone()),
        DEFAULT_SLACK,
    ));
    report.push(margin_check(
        "pointwise-continuity",
        "d_FS <= 2e^{-|t0|-1} implies d_X(c(t0), d(t0)) <= sqrt(4 e^{|t0|+1} d_FS)",
        point.iter().map(|x| x[1].clone()),
        DEFAULT_SLACK,
    ));
    report.push(margin_check(
        "pointwise-lower-bound",
        "d_FS(c, d) >= e^{-|t0|} (2 e^{-D/2} + D - 2), D = d_X(c(t0), d(t0))",
        point.iter().map(|x| x[2].clone()),
        DEFAULT_SLACK,
    ));
    let small = point.iter().filter(|x| x[1].0 > f64::NEG_INFINITY).count();
    report.push(CheckEntry::new(
        "pointwise-continuity-coverage",
        "some sampled pairs fall in the small-distance regime",
        small > 0,
        -(small as f64),
    ));

    // both convergence monitors on the two sequence families
    let mut fails = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..4 {
        let c = random_geodesic(space, &mut r, 2.0);
        let n = 64;
        let shifted: Vec<GeneralizedGeodesic> = (1..=n).map(|k| c.flow(1.0 / k as f64)).collect();
        let m = monitor_sequence(&shifted, &c, 10.0, &cfg, DEFAULT_SLACK, 2.0 / n as f64)?;
        worst = worst.max(m.worst_increase);
        if !(m.agree() && m.converges_sup && m.converges_fs) {
            fails.push(format!("flow-shift family {i}: c(0)={}", c.at_zero().label()));
        }
        // agrees with the limit on [-n, n], differs by at most 2L outside
        let half = 12.0;
        let x = random_point(space, &mut r, 2.0);
        let y = point_at_distance(&mut r, &x, 2.0 * half);
        let seg = GeneralizedGeodesic::from_finite(-half, &x, &y)?;
        let cut: Vec<GeneralizedGeodesic> = (1..=12).map(|k| seg.restrict(k as f64)).collect();
        let m = monitor_sequence(&cut, &seg, 10.0, &cfg, DEFAULT_SLACK, 1e-6)?;
        worst = worst.max(m.worst_increase);
        if !(m.agree() && m.converges_sup && m.converges_fs) {
            fails.push(format!("truncation family {i}: x={}", x.label()));
        }
    }
    let e = CheckEntry::new(
        "convergence-monitors",
        "d_FS-convergence and uniform convergence on [-10, 10] agree on both families",
        fails.is_empty(),
        worst,
    );
    report.push(match fails.first() {
        Some(w) => e.with_witness(w.clone()),
        None => e,
    });

    // σ_t(s) toward the end of a ray from a nearby base point
    let mut sig = Vec::new();
    for _ in 0..samples.min(200) {
        let x = random_point(space, &mut r, 2.0);
        let a = r.gen_range(0.1..1.0);
        let xp = point_at_distance(&mut r, &x, a);
        let ray = GeneralizedGeodesic::connect(&x, &Endpoint::Ideal(random_end(space, &mut r)))?;
        let s = r.gen_range(0.5..2.0);
        let t = sigma_threshold(0.2, a, s) * r.gen_range(1.0..1.5);
        let t2 = t + r.gen_range(0.0..4.0);
        let d = sigma_point(&xp, &ray, t, s).dist(&sigma_point(&xp, &ray, t2, s));
        sig.push((d - sigma_cauchy_bound(a, t, s), short(format!("x={} a={a} s={s} t={t} t'={t2}", x.label()))));
    }
    report.push(margin_check(
        "sigma-cauchy",
        "d(sigma_t(s), sigma_t'(s)) <= s a / (t - a) for t' >= t",
        sig,
        1e-9,
    ));
    report.sort();
    Ok(report)
}

/// The space an action lives on.
pub fn action_space(action: &GroupAction) -> Space {
    action.space
}

fn estimate_cfg(delta: f64, tol: Option<f64>) -> FlowMetricConfig {
    FlowMetricConfig::with_tolerance(tol.unwrap_or((1e-3 * delta).min(1e-7)))
}

/// The window bound, the estimate between nearby base points, and the
/// estimate along the homotopy action.
pub fn flow_estimates_suite(
    action: &GroupAction,
    delta: f64,
    beta: f64,
    l: f64,
    samples: usize,
    seed: u64,
    tol: Option<f64>,
) -> Result<EstimateReport> {
    let space = action.space;
    let cfg = estimate_cfg(delta, tol);
    let consts = select_constants_g(beta, l, delta)?;
    let mut report = EstimateReport::new("verify-flow-estimates");
    report
        .param("action", &action.name)
        .param("delta", delta)
        .param("beta", beta)
        .param("l", l)
        .param("samples", samples)
        .param("seed", seed)
        .param("constants", consts);
    report.extend(triangle_check(space, &consts, samples, seed));
    report.extend(verify_estimate_g(space, &consts, samples, seed + 1, &cfg)?);
    let ac = select_constants_h(action, delta)?;
    report.param("action_constants", ac);
    let h = HomotopySAction::new(action.clone(), ac.radius)?;
    report.extend(verify_estimate_h(&h, &ac, samples, seed + 2, &DEFAULT_T_GRID, &cfg)?);
    report.sort();
    Ok(report)
}

/// `(ε, δ)` for chains of length `n`. On the lattice actions `ε` is fixed
/// and `δ = εe^{−2nβ}`; on the tree the radius this needs is out of reach
/// for `f64`, so `δ` is fixed instead and `ε = δe^{2nβ}`.
pub fn chain_regime(action: &GroupAction, n: usize, eps: f64) -> Result<(f64, f64)> {
    let beta = select_constants_h(action, 0.1)?.beta;
    let (alpha, delta) = chain_delta(beta, n, eps);
    Ok(match action.space {
        Space::Euclidean(_) => (eps, delta),
        _ => (alpha.exp() * 0.1, 0.1),
    })
}

/// Chains of length `1..=max_n` from sampled base points.
pub fn chains_suite(action: &GroupAction, max_n: usize, samples: usize, seed: u64, eps: f64) -> Result<EstimateReport> {
    if max_n == 0 {
        return usage("chain length must be positive");
    }
    let mut report = EstimateReport::new("verify-chains");
    report.param("action", &action.name).param("samples", samples).param("seed", seed).param("max_n", max_n);
    for n in 1..=max_n {
        let (eps_n, delta) = chain_regime(action, n, eps)?;
        let c = select_constants_h(action, delta)?;
        let h = HomotopySAction::new(action.clone(), c.radius)?;
        let mut r = rng(seed + n as u64);
        let set = h.sample_chains(&mut r, n, samples, 3, &DEFAULT_T_GRID)?;
        let cr = verify_chain(&h, c.t, c.beta, &set.chains, eps_n, &estimate_cfg(c.delta, None))?;
        report.param(&format!("n{n}"), serde_json::json!({
            "epsilon": eps_n, "delta": delta, "radius": c.radius, "chains": set.chains.len(),
            "skipped": set.skipped, "max_link_deviation": cr.max_link_deviation, "max_total": cr.max_total,
        }));
        for mut e in cr.report.checks {
            e.name = format!("{}-n{n}", e.name);
            report.push(e);
        }
        report.push(CheckEntry::new(
            &format!("chain-count-n{n}"),
            "the requested number of chains was sampled",
            set.chains.len() == samples,
            samples as f64 - set.chains.len() as f64,
        ));
    }
    report.sort();
    Ok(report)
}

/// A hyperbolic Möbius element conjugated by a small displacement so that
/// its axis passes near the origin.
fn random_mobius(r: &mut impl Rng) -> Result<IsometryElement> {
    let lam: f64 = r.gen_range(1.2..6.0);
    let d = IsometryElement::mobius(lam, 0.0, 0.0, 1.0 / lam)?;
    let (s, th): (f64, f64) = (r.gen_range(0.0..0.8), r.gen_range(0.0..std::f64::consts::PI));
    let (ch, sh) = ((s / 2.0).cosh(), (s / 2.0).sinh());
    let (c, sn) = (th.cos(), th.sin());
    // rotation by th about i, then a hyperbolic push of length s
    let k = IsometryElement::mobius(c, sn, -sn, c)?.compose(&IsometryElement::mobius(ch, sh, sh, ch)?);
    Ok(k.compose(&d).compose(&k.inverse()))
}

/// Translation lengths against minimized displacement, axes, conjugation
/// invariance, the product structure on classes, and the extension laws.
pub fn axes_suite(samples: usize, seed: u64, gamma: f64) -> Result<EstimateReport> {
    let mut r = rng(seed);
    let mut report = EstimateReport::new("verify-axes");
    report.param("samples", samples).param("seed", seed).param("gamma", gamma);
    let cfg = FlowMetricConfig::with_tolerance(1e-9);

    let mut eu = Vec::new();
    for _ in 0..samples {
        let v: Vec<f64> = (0..2).map(|_| r.gen_range(-5.0..5.0)).collect();
        let g = IsometryElement::translation(&v);
        let exact = (v[0] * v[0] + v[1] * v[1]).sqrt();
        eu.push(((g.translation_length() - exact).abs(), format!("v={v:?}")));
    }
    report.push(margin_check("translation-length-euclidean", "l(translation by v) = |v|", eu, 0.0));

    let words: Vec<IsometryElement> = (0..samples.min(200))
        .map(|_| {
            let len = r.gen_range(1..7);
            GroupAction::f2().random_element(&mut r, len)
        })
        .collect();
    let tree: Vec<(f64, String)> = words
        .par_iter()
        .map(|g| {
            let (m, _) = minimize_displacement(g, 8.0, 0.5);
            ((g.translation_length() - m).abs(), g.label())
        })
        .collect();
    report.push(margin_check(
        "translation-length-tree",
        "l(w) = cyclically reduced length = min displacement",
        tree,
        1e-4,
    ));
    let mobs: Vec<IsometryElement> = (0..samples.min(100)).map(|_| random_mobius(&mut r)).collect::<Result<_>>()?;
    let mob: Vec<(f64, String)> = mobs
        .par_iter()
        .map(|g| {
            let (m, _) = minimize_displacement(g, 3.0, 0.05);
            ((g.translation_length() - m).abs(), g.label())
        })
        .collect();
    report.push(margin_check(
        "translation-length-mobius",
        "l = 2 arccosh(|tr|/2) = min displacement",
        mob,
        1e-4,
    ));

    // g c(t) = c(t + l) for hyperbolic elements with l <= 6
    let mut hyps: Vec<IsometryElement> = words.iter().filter(|g| g.translation_length() <= 6.0).take(50).cloned().collect();
    hyps.extend(mobs.iter().filter(|g| g.translation_length() <= 6.0).take(50).cloned());
    for _ in 0..50 {
        let v: Vec<f64> = (0..2).map(|_| r.gen_range(-3.0..3.0)).collect();
        hyps.push(IsometryElement::translation(&v));
    }
    hyps.retain(|g| g.classify() == Classification::Hyperbolic);
    let ax: Vec<Result<(f64, String)>> = hyps
        .par_iter()
        .map(|g| {
            let a = g.axis()?;
            let d = dist_fs(&g.act_fs(&a), &a.flow(g.translation_length()), &cfg)?;
            Ok((d.upper, g.label()))
        })
        .collect();
    report.push(margin_check(
        "axis-functional-equation",
        "g c(t) = c(t + l(g)) on the axis",
        ax.into_iter().collect::<Result<Vec<_>>>()?,
        1e-6,
    ));

    let mut conj = Vec::new();
    for g in hyps.iter().take(100) {
        let a = match g.space() {
            Space::Tree => GroupAction::f2().random_element(&mut r, 3),
            Space::Hyperbolic => random_mobius(&mut r)?,
            _ => IsometryElement::rotation(r.gen_range(0.0..6.28)).compose(&IsometryElement::translation(&[1.5, -0.5])),
        };
        let h = a.compose(g).compose(&a.inverse());
        conj.push(((h.translation_length() - g.translation_length()).abs(), g.label()));
    }
    report.push(margin_check("translation-length-conjugation", "l(a g a^-1) = l(g)", conj, 1e-6));

    // parallel axes of a translation stay at constant distance
    let mut par = Vec::new();
    for _ in 0..50 {
        let v: Vec<f64> = (0..2).map(|_| r.gen_range(-3.0..3.0)).collect();
        let g = IsometryElement::translation(&v);
        let a = g.axis()?;
        let off = [r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)];
        let b = IsometryElement::translation(&off).act_fs(&a);
        let ds: Vec<f64> = (0..=80).map(|k| -20.0 + 0.5 * k as f64).map(|t| a.evaluate(t).dist(&b.evaluate(t))).collect();
        let var = ds.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ds.iter().cloned().fold(f64::INFINITY, f64::min);
        par.push((var, format!("v={v:?} offset={off:?}")));
    }
    report.push(margin_check("parallel-axes", "parallel axes have constant distance on [-20, 20]", par, 1e-6));

    // classes and the product structure on each
    let expected: [(&str, f64, usize, usize); 6] =
        [("z2", 1.0, 4, 2), ("z2", 2.3, 16, 8), ("z", 1.0, 2, 1), ("dihedral", 1.0, 1, 1), ("f2", 1.0, 4, 2), ("f2", 2.0, 8, 4)];
    let mut count_fail = Vec::new();
    for (name, g, o, m) in expected {
        let c = enumerate_axis_classes(g, &GroupAction::preset(name)?)?;
        if (c.oriented_count, c.merged_count) != (o, m) {
            count_fail.push(format!("{name} gamma={g}: {} oriented, {} merged", c.oriented_count, c.merged_count));
        }
    }
    let mc = enumerate_axis_classes(1.5, &GroupAction::mobius(2.0)?)?;
    if (mc.oriented_count, mc.merged_count) != (2, 1) {
        count_fail.push(format!("mobius gamma=1.5: {} oriented", mc.oriented_count));
    }
    let e = CheckEntry::new(
        "axis-class-counts",
        "orbits of parallel classes of axes with l <= gamma match the preset counts",
        count_fail.is_empty(),
        count_fail.len() as f64,
    );
    report.push(match count_fail.first() {
        Some(w) => e.with_witness(w.clone()),
        None => e,
    });

    let mut bundles = Vec::new();
    for (name, g) in [("z2", gamma.max(1.0)), ("z3", 1.0), ("f2", 2.0)] {
        for a in enumerate_axis_classes(g, &GroupAction::preset(name)?)?.classes {
            bundles.push((name, FlowLineBundle::new(&a)?));
        }
    }
    for a in mc.classes {
        bundles.push(("mobius", FlowLineBundle::new(&a)?));
    }
    let configs: Vec<(usize, Vec<f64>, f64, Vec<f64>, f64)> = (0..samples)
        .map(|_| {
            let i = r.gen_range(0..bundles.len());
            let k = bundles[i].1.transversal_dim();
            let y: Vec<f64> = (0..k).map(|_| r.gen_range(-3.0..3.0)).collect();
            let z: Vec<f64> = (0..k).map(|_| r.gen_range(-3.0..3.0)).collect();
            (i, y, r.gen_range(-3.0..3.0), z, r.gen_range(-3.0..3.0))
        })
        .collect();
    let prod: Vec<Result<((f64, String), (f64, String))>> = configs
        .par_iter()
        .map(|(i, y, s, z, t)| {
            let (name, b) = &bundles[*i];
            let (c, d) = (b.line(y, *s)?, b.line(z, *t)?);
            let w = format!("{name} class {i}: y={y:?} s={s} z={z:?} t={t}");
            let slack = if matches!(b.kind, crate::periodic::BundleKind::SingleAxis { .. }) && *name == "mobius" { 1e-9 } else { 1e-12 };
            Ok(((b.product_defect(&c, &d, &cfg)?, w.clone()), (b.cocycle_defect(&c, *t) - slack, w)))
        })
        .collect();
    let prod = prod.into_iter().collect::<Result<Vec<_>>>()?;
    report.push(margin_check(
        "bundle-product-metric",
        "d_FS(c, d)^2 = d_a(q c, q d)^2 + (tau c - tau d)^2 on parallel flow lines",
        prod.iter().map(|x| x.0.clone()),
        1e-6,
    ));
    report.push(margin_check(
        "bundle-cocycle",
        "tau_a(Phi_t c) = tau_a(c) + t",
        prod.iter().map(|x| x.1.clone()),
        0.0,
    ));
    report.sort();
    Ok(report)
}

/// The extension laws on the five example subsets.
pub fn extension_suite(opens: usize, points: usize, seed: u64) -> EstimateReport {
    let runs = vec![
        check_extension_laws(&PointNet::plane(), opens, points, seed),
        check_extension_laws(&PointNet::tree(), opens, points, seed + 1),
        check_extension_laws(&LineSubset::plane(), opens, points, seed + 2),
        check_extension_laws(&LineSubset::tree(), opens, points, seed + 3),
        check_extension_laws(&LineSubset::hyperbolic(), opens, points, seed + 4),
    ];
    let mut report = EstimateReport::new("extension-laws");
    report.param("opens", opens).param("points", points).param("seed", seed);
    for run in runs {
        report.param(&format!("{}-undetermined", run.subset), run.undetermined);
        for mut e in run.report.checks {
            e.name = format!("{}/{}", run.subset, e.name);
            report.push(e);
        }
    }
    report.sort();
    report
}

/// Checks a cover; see [`check_cover`].
pub fn cover_suite(cover: &Cover, samples: usize, seed: u64) -> Result<EstimateReport> {
    let r = check_cover(cover, &CheckCoverConfig { samples, seed, ..Default::default() })?;
    let mut report = r.report.clone();
    report
        .param("orbit_count_found", r.orbit_count_found)
        .param("orbit_count_expected", r.orbit_count_expected)
        .param("max_overlap", r.max_overlap)
        .param("nerve_dim", r.nerve_dim)
        .param("multiplicity_bound", r.multiplicity_bound)
        .param("min_containment_margin", r.min_containment_margin)
        .param("perturbations", r.perturbations)
        .param(
            "isotropy",
            r.isotropy
                .iter()
                .map(|i| serde_json::json!({
                    "patch": i.patch,
                    "virtually_cyclic": i.witness.virtually_cyclic,
                    "primitive": i.witness.primitive.as_ref().map(|g| g.label()),
                }))
                .collect::<Vec<_>>(),
        );
    report.sort();
    Ok(report)
}

/// Pulls the cover back through `Φ_T ∘ ι` and checks that every sampled
/// `(g, x)` has a patch containing its whole chain set. Patches come from
/// the cover first and from flow tubes `B_{2nδ}(Φ_{[−2nβ, 2nβ]} z)`
/// otherwise.
pub fn s_long_suite(cover: &Cover, samples: usize, seed: u64, delta: f64, budget: usize) -> Result<EstimateReport> {
    let action = cover.group_action()?;
    let ac = select_constants_h(&action, delta)?;
    let h = HomotopySAction::new(action.clone(), ac.radius)?;
    let n = action.s().len();
    let (alpha, _) = chain_delta(ac.beta, n, delta);
    let eps0 = 2.0 * n as f64 * delta;
    let cfg = estimate_cfg(delta, None);
    let pulled = PullBack { cover, h: &h, t: ac.t };
    let tubes = FlowTubeCover { h: &h, t: ac.t, alpha, eps0, cfg };
    let both = FirstOf(pulled, tubes);
    let mut r = rng(seed);
    let pts: Vec<(IsometryElement, SpacePoint)> = (0..samples)
        .map(|_| {
            let len = r.gen_range(0..=3);
            (action.random_element(&mut r, len), h.sample_point(&mut r))
        })
        .collect();
    let s = check_s_long(&both, &h, &pts, budget, seed + 1, &DEFAULT_T_GRID)?;
    let mut report = EstimateReport::new("s-long");
    report
        .param("action", &action.name)
        .param("delta", delta)
        .param("radius", ac.radius)
        .param("t", ac.t)
        .param("alpha", alpha)
        .param("tube_radius", eps0)
        .param("samples", samples)
        .param("seed", seed)
        .param("chains_checked", s.chains_checked)
        .param("chains_skipped", s.chains_skipped)
        .param("patch_kinds", &s.patch_kinds);
    report.push(s.entry());
    report.push(CheckEntry::new(
        "s-long-nonvacuous",
        "chains were sampled for every (g, x)",
        s.chains_checked >= samples && !s.vacuous,
        samples as f64 - s.chains_checked as f64,
    ));
    report.sort();
    Ok(report)
}

/// Rows `(parameter, deviation)` for one of the sweeps `flow-estimate`,
/// `shift` or `integrand`.
pub fn sweep(kind: &str, space: Space, samples: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let mut r = rng(seed);
    let cfg = FlowMetricConfig::with_tolerance(1e-9);
    match kind {
        "flow-estimate" => {
            // max over samples of d_FS(Φ_T c_{x1,x}, Φ_{T+τ} c_{x2,x}) with d(x1, x2) ≤ 1
            let configs: Vec<(SpacePoint, SpacePoint, SpacePoint)> = (0..samples)
                .map(|_| {
                    let x1 = random_point(space, &mut r, 1.0);
                    let d = r.gen_range(0.0..1.0);
                    let x2 = point_at_distance(&mut r, &x1, d);
                    let far = if space == Space::Hyperbolic { 22.0 } else { 200.0 };
                    let x = point_at_distance(&mut r, &x1, far);
                    (x1, x2, x)
                })
                .collect();
            let ts: Vec<f64> = (0..=16).map(|k| k as f64).collect();
            ts.iter()
                .map(|&t| {
                    let worst: Vec<Result<f64>> = configs
                        .par_iter()
                        .map(|(x1, x2, x)| {
                            let tau = x2.dist(x) - x1.dist(x);
                            let e = Endpoint::Point(x.clone());
                            let c1 = GeneralizedGeodesic::connect(x1, &e)?;
                            let c2 = GeneralizedGeodesic::connect(x2, &e)?;
                            Ok(dist_fs(&c1.flow(t), &c2.flow(t + tau), &cfg)?.upper)
                        })
                        .collect();
                    let w = worst.into_iter().collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
                    Ok((t, w))
                })
                .collect()
        }
        "shift" => {
            let line = crate::sampling::random_line(space, &mut r, 2.0);
            (0..=40)
                .map(|k| {
                    let tau = -5.0 + 0.25 * k as f64;
                    Ok((tau, dist_fs(&line, &line.flow(tau), &cfg)?.mid()))
                })
                .collect()
        }
        "integrand" => {
            let (c, d) = (random_geodesic(space, &mut r, 3.0), random_geodesic(space, &mut r, 3.0));
            Ok((0..=400)
                .map(|k| {
                    let t = -20.0 + 0.1 * k as f64;
                    (t, c.evaluate(t).dist(&d.evaluate(t)) * (-t.abs()).exp() / 2.0)
                })
                .collect())
        }
        other => usage(format!("unknown sweep '{other}' (expected flow-estimate, shift, integrand)")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_metric_run_passes() {
        let r = metric_suite(Space::Euclidean(2), 20, 1, 1e-7).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert_eq!(r.to_json(), metric_suite(Space::Euclidean(2), 20, 1, 1e-7).unwrap().to_json());
    }

    #[test]
    fn shift_sweep_is_the_identity() {
        for (tau, d) in sweep("shift", Space::Hyperbolic, 1, 3).unwrap() {
            assert!((d - tau.abs()).abs() < 1e-8);
        }
        assert!(sweep("nope", Space::Tree, 1, 1).is_err());
    }
}
