//! The acceptance suite: one line per criterion, `PASS` or `FAIL`, with
//! the worst deviation seen. Exits non-zero if any criterion fails.

use std::time::Instant;

use flowspace::group_actions::GroupAction;
use flowspace::model_spaces::Space;
use flowspace::periodic::build_cover;
use flowspace::report::{CheckEntry, EstimateReport};
use flowspace::suites::*;
use flowspace::transfer::{select_constants_g, select_constants_h, triangle_check, verify_estimate_g, verify_estimate_h, HomotopySAction, DEFAULT_T_GRID};
use flowspace::flow_space::FlowMetricConfig;
use flowspace::Result;

const SPACES: [Space; 3] = [Space::Euclidean(2), Space::Tree, Space::Hyperbolic];

struct Outcome {
    failures: Vec<String>,
    worst: f64,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { failures: vec![], worst: f64::NEG_INFINITY, notes: vec![] }
    }

    /// Takes the named checks of a report, which must all be present.
    fn take(&mut self, tag: &str, report: &EstimateReport, names: &[&str]) {
        for n in names {
            match report.checks.iter().find(|c| c.name == *n) {
                Some(c) => self.entry(tag, c),
                None => self.failures.push(format!("{tag}: check {n} missing")),
            }
        }
    }

    fn all(&mut self, tag: &str, report: &EstimateReport) {
        if report.checks.is_empty() {
            self.failures.push(format!("{tag}: no checks ran"));
        }
        for c in &report.checks {
            self.entry(tag, c);
        }
    }

    fn entry(&mut self, tag: &str, c: &CheckEntry) {
        self.worst = self.worst.max(c.max_deviation);
        if !c.pass {
            self.failures.push(format!("{tag}/{} dev={:.3e} {}", c.name, c.max_deviation, c.witness.clone().unwrap_or_default()));
        }
    }
}

fn criterion(n: usize, title: &str, run: impl FnOnce(&mut Outcome) -> Result<()>) -> bool {
    let start = Instant::now();
    let mut o = Outcome::new();
    if let Err(e) = run(&mut o) {
        o.failures.push(format!("error: {e}"));
    }
    let ok = o.failures.is_empty();
    println!(
        "criterion {n:>2}: {} {title} (worst deviation {:.3e}, {:.1}s)",
        if ok { "PASS" } else { "FAIL" },
        o.worst,
        start.elapsed().as_secs_f64()
    );
    for note in &o.notes {
        println!("    {note}");
    }
    for f in o.failures.iter().take(5) {
        println!("    {f}");
    }
    ok
}

fn main() {
    let total = Instant::now();
    let mut metric = Vec::new();
    let mut flow = Vec::new();
    for s in SPACES {
        metric.push((s.name(), metric_suite(s, 1000, 101, 1e-7)));
        flow.push((s.name(), flow_suite(s, 1000, 202, 1e-7)));
    }
    let pick = |o: &mut Outcome, reps: &[(String, Result<EstimateReport>)], names: &[&str]| -> Result<()> {
        for (tag, r) in reps {
            match r {
                Ok(r) => o.take(tag, r, names),
                Err(e) => o.failures.push(format!("{tag}: {e}")),
            }
        }
        Ok(())
    };
    let mut results = Vec::new();

    results.push(criterion(1, "flow-space metric axioms, 10^3 triples per space, triangle slack 3e-6", |o| {
        pick(o, &metric, &["fs-identity", "fs-symmetry", "fs-triangle"])
    }));
    results.push(criterion(2, "continuity of the flow, 10^3 samples, slack 1e-6", |o| {
        pick(o, &flow, &["flow-continuity", "flow-group-law"])
    }));
    results.push(criterion(3, "pointwise bounds from d_FS and the lower bound, 10^3 samples, slack 1e-6", |o| {
        pick(o, &flow, &["pointwise-bound", "pointwise-continuity", "pointwise-lower-bound", "pointwise-continuity-coverage"])
    }));
    results.push(criterion(4, "closed forms for constants and flow shifts, width 1e-9", |o| {
        pick(o, &metric, &["fs-constant-identity", "fs-flow-shift-identity"])
    }));
    results.push(criterion(5, "d_FS and uniform convergence agree on both sequence families", |o| {
        pick(o, &flow, &["convergence-monitors", "sigma-cauchy"])
    }));
    results.push(criterion(6, "ball projection idempotent and 1-Lipschitz, 10^3 pairs per space", |o| {
        pick(o, &metric, &["rho-idempotent", "rho-lipschitz"])
    }));
    results.push(criterion(7, "window deviation bound, 10^3 configurations per space", |o| {
        let c = select_constants_g(1.0, 1.0, 0.1)?;
        for s in SPACES {
            o.all(&s.name(), &triangle_check(s, &c, 1000, 303));
        }
        Ok(())
    }));
    results.push(criterion(8, "flow estimate between nearby base points at delta 0.5, 0.1, 0.01", |o| {
        for delta in [0.5, 0.1, 0.01] {
            let c = select_constants_g(1.0, 1.0, delta)?;
            let cfg = FlowMetricConfig::with_tolerance((1e-3 * delta).min(1e-7));
            for s in SPACES {
                o.all(&format!("{} delta={delta}", s.name()), &verify_estimate_g(s, &c, 1000, 404, &cfg)?);
            }
        }
        Ok(())
    }));
    results.push(criterion(9, "flow estimate along the homotopy action at delta 0.5, 0.1", |o| {
        for name in ["z2", "dihedral", "f2"] {
            for delta in [0.5, 0.1] {
                let a = GroupAction::preset(name)?;
                let c = select_constants_h(&a, delta)?;
                let h = HomotopySAction::new(a, c.radius)?;
                let cfg = FlowMetricConfig::with_tolerance((1e-3 * delta).min(1e-7));
                o.all(&format!("{name} delta={delta}"), &verify_estimate_h(&h, &c, 1000, 505, &DEFAULT_T_GRID, &cfg)?);
            }
        }
        Ok(())
    }));
    results.push(criterion(10, "chains of length 1, 2, 3 within 2n epsilon, 500 chains per action", |o| {
        for name in ["z", "z2", "dihedral", "f2"] {
            let a = GroupAction::preset(name)?;
            let r = chains_suite(&a, 3, 500, 606, 0.1)?;
            for n in 1..=3 {
                if let Some(p) = r.parameters.get(&format!("n{n}")) {
                    o.notes.push(format!("{name} n={n}: epsilon={} max total={}", p["epsilon"], p["max_total"]));
                }
            }
            o.all(name, &r);
        }
        Ok(())
    }));
    let axes = axes_suite(1000, 707, 2.3);
    results.push(criterion(11, "translation lengths, axes and their functional equation", |o| {
        let r = axes.as_ref().map_err(|e| flowspace::Error::Usage(e.to_string()))?;
        o.take("axes", r, &[
            "translation-length-euclidean",
            "translation-length-tree",
            "translation-length-mobius",
            "translation-length-conjugation",
            "axis-functional-equation",
            "parallel-axes",
            "axis-class-counts",
        ]);
        Ok(())
    }));
    results.push(criterion(12, "product metric on flow lines of a class, 10^3 pairs; cocycle exact", |o| {
        let r = axes.as_ref().map_err(|e| flowspace::Error::Usage(e.to_string()))?;
        o.take("bundle", r, &["bundle-product-metric", "bundle-cocycle"]);
        Ok(())
    }));
    results.push(criterion(13, "extension laws, 20 opens and 10^3 points per subset", |o| {
        o.all("laws", &extension_suite(20, 1000, 808));
        Ok(())
    }));
    results.push(criterion(14, "periodic covers for z (gamma 1) and z2 (gamma 1, 2.3)", |o| {
        for (name, gamma) in [("z", 1.0), ("z2", 1.0), ("z2", 2.3)] {
            let cover = build_cover(gamma, &GroupAction::preset(name)?, None)?;
            let r = cover_suite(&cover, 200, 909)?;
            o.notes.push(format!(
                "{name} gamma={gamma}: {} orbits, nerve dim {} <= M = {}, min margin {}",
                r.parameters["orbit_count_found"], r.parameters["nerve_dim"], r.parameters["multiplicity_bound"],
                r.parameters["min_containment_margin"]
            ));
            o.all(&format!("{name} gamma={gamma}"), &r);
        }
        Ok(())
    }));
    results.push(criterion(15, "pulled-back cover of G x B_R(x0) is S-long on 500 samples (z2)", |o| {
        let cover = build_cover(1.0, &GroupAction::z2(), None)?;
        let r = s_long_suite(&cover, 500, 1010, 0.1, 4)?;
        o.notes.push(format!("patch kinds: {}", r.parameters["patch_kinds"]));
        o.all("s-long", &r);
        Ok(())
    }));

    let passed = results.iter().filter(|x| **x).count();
    println!("acceptance: {passed}/{} criteria passed in {:.1}s", results.len(), total.elapsed().as_secs_f64());
    if passed != results.len() {
        std::process::exit(1);
    }
}
