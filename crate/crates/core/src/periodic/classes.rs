use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::flow_space::GeneralizedGeodesic;
use crate::group_actions::{line_motion, ActionKind, Classification, GroupAction, IsometryElement};
use crate::model_spaces::{tree, BoundaryPoint, Endpoint};

/// Tolerance for `d_FS(Φ_τ c, g c)` in period searches.
pub const PERIOD_TOL: f64 = 1e-6;

/// Result of a G-period search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GPeriod {
    /// `0` for constants, `+∞` (serialized as `null`) when nothing was found.
    pub period: f64,
    pub witness: Option<IsometryElement>,
}

impl GPeriod {
    pub fn found(&self) -> bool {
        self.period.is_finite()
    }
}

/// Smallest `τ ∈ (0, τ_max]` with `Φ_τ c = g c` for an enumerated `g`.
///
/// Only lines can have a positive period: `Φ_τ` moves the finite ends of
/// a segment or ray in time while `g` does not.
pub fn g_period(c: &GeneralizedGeodesic, action: &GroupAction, tau_max: f64, word_len: usize) -> GPeriod {
    if c.is_constant() {
        return GPeriod { period: 0.0, witness: Some(action.identity()) };
    }
    let mut best = GPeriod { period: f64::INFINITY, witness: None };
    if !c.is_line() {
        return best;
    }
    for g in action.elements(word_len) {
        if let Some(m) = line_motion(&g, c, PERIOD_TOL) {
            if m.preserves_orientation && m.shift > PERIOD_TOL && m.shift <= tau_max && m.shift < best.period {
                best = GPeriod { period: m.shift, witness: Some(g) };
            }
        }
    }
    best
}

/// Membership in `FS_{≤γ}` as far as enumeration to `word_len` can tell.
pub fn fs_le_gamma(c: &GeneralizedGeodesic, action: &GroupAction, gamma: f64, word_len: usize) -> bool {
    g_period(c, action, gamma + PERIOD_TOL, word_len).found()
}

/// What makes axes parallel, per space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParallelDatum {
    /// Shortest translation vector in the direction of the axes.
    Euclidean { direction: Vec<f64> },
    /// Lexicographically least rotation of the cyclically reduced word.
    Tree { cyclic_word: String },
    /// Boundary fixed points as disk angles.
    Hyperbolic { back: f64, fwd: f64 },
}

impl ParallelDatum {
    /// Comparison key, rounding real data to `1e-7`.
    pub fn key(&self) -> String {
        match self {
            ParallelDatum::Euclidean { direction } => format!("{:?}", round_key(direction)),
            ParallelDatum::Tree { cyclic_word } => cyclic_word.clone(),
            ParallelDatum::Hyperbolic { back, fwd } => format!("{:?}", round_key(&[*back, *fwd])),
        }
    }
}

/// A `G`-orbit of oriented parallelism classes of hyperbolic elements.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxisClass {
    pub representative: IsometryElement,
    pub translation_length: f64,
    pub datum: ParallelDatum,
    /// Datum of the reversed axes.
    pub reversed: ParallelDatum,
    /// Whether some `g ∈ G` carries the class to its reversal.
    pub self_reverse: bool,
    /// Generators of `G_a` for the representative class `a`.
    pub stabilizer_generators: Vec<IsometryElement>,
}

impl AxisClass {
    pub fn axis(&self) -> Result<GeneralizedGeodesic> {
        self.representative.axis()
    }

    /// Unit direction of the axes of a Euclidean class.
    pub fn unit_direction(&self) -> Option<Vec<f64>> {
        match &self.datum {
            ParallelDatum::Euclidean { direction } => {
                let l = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
                Some(direction.iter().map(|x| x / l).collect())
            }
            _ => None,
        }
    }
}

/// `G\A_{≤γ}` with orientation counted both ways.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxisClasses {
    pub action: String,
    pub gamma: f64,
    /// One entry per orbit of oriented classes.
    pub classes: Vec<AxisClass>,
    pub oriented_count: usize,
    /// Orbits after identifying each class with its reversal.
    pub merged_count: usize,
}

impl AxisClasses {
    /// One class per merged orbit, preferring the first listed orientation.
    pub fn merged(&self) -> Vec<&AxisClass> {
        let mut out: Vec<&AxisClass> = Vec::new();
        for a in &self.classes {
            if !out.iter().any(|b| b.reversed.key() == a.datum.key()) {
                out.push(a);
            }
        }
        out
    }
}

fn round_key(v: &[f64]) -> Vec<i64> {
    v.iter().map(|x| (x * 1e7).round() as i64).collect()
}

fn direction_of(g: &IsometryElement) -> Option<Vec<f64>> {
    let (_, fwd) = g.axis().ok()?.endpoints();
    match fwd {
        Endpoint::Ideal(BoundaryPoint::Euclidean(u)) => {
            let l = g.translation_length();
            Some(u.iter().map(|x| x * l).collect())
        }
        _ => None,
    }
}

fn linear_part(g: &IsometryElement) -> Option<&Vec<Vec<f64>>> {
    match g {
        IsometryElement::Euclidean { q, .. } => Some(q),
        _ => None,
    }
}

fn apply_linear(q: &[Vec<f64>], d: &[f64]) -> Vec<f64> {
    q.iter().map(|row| row.iter().zip(d).map(|(a, b)| a * b).sum()).collect()
}

fn euclidean_classes(action: &GroupAction, gamma: f64) -> Vec<AxisClass> {
    let n = action.space.dim();
    let max_len = ((n as f64).sqrt() * gamma).ceil() as usize + 2;
    let elems = action.elements(max_len);
    let mut linear: Vec<Vec<Vec<f64>>> = Vec::new();
    for g in &elems {
        if let Some(q) = linear_part(g) {
            if !linear.iter().any(|x| round_key(&x.concat()) == round_key(&q.concat())) {
                linear.push(q.clone());
            }
        }
    }
    // shortest element per oriented direction
    let mut by_dir: BTreeMap<Vec<i64>, (f64, IsometryElement, Vec<f64>)> = BTreeMap::new();
    for g in &elems {
        if g.classify() != Classification::Hyperbolic {
            continue;
        }
        let l = g.translation_length();
        if l > gamma + 1e-9 {
            continue;
        }
        let Some(d) = direction_of(g) else { continue };
        let unit: Vec<f64> = d.iter().map(|x| x / l).collect();
        let key = round_key(&unit);
        if by_dir.get(&key).map_or(true, |(l0, _, _)| l < *l0 - 1e-9) {
            by_dir.insert(key, (l, g.clone(), d));
        }
    }
    let orbit_key = |d: &[f64]| -> Vec<i64> {
        linear.iter().map(|q| round_key(&apply_linear(q, d))).max().unwrap_or_else(|| round_key(d))
    };
    let mut seen: BTreeMap<Vec<i64>, ()> = BTreeMap::new();
    let mut out = Vec::new();
    for (_, (l, g, d)) in by_dir.iter().rev() {
        let key = orbit_key(d);
        if seen.insert(key.clone(), ()).is_some() {
            continue;
        }
        let rev: Vec<f64> = d.iter().map(|x| -x).collect();
        let self_reverse = orbit_key(&rev) == key;
        let fixes = |h: &IsometryElement| linear_part(h).map_or(false, |q| round_key(&apply_linear(q, d)) == round_key(d));
        let s = &action.s()[1..];
        let mut stab: Vec<IsometryElement> = s.iter().filter(|h| fixes(h)).cloned().collect();
        for a in s.iter().filter(|h| !fixes(h)) {
            for b in s.iter().filter(|h| !fixes(h)) {
                let ab = a.compose(b);
                if !ab.is_identity(1e-9) && fixes(&ab) && !stab.iter().any(|x| x.key() == ab.key()) {
                    stab.push(ab);
                }
            }
        }
        out.push(AxisClass {
            representative: g.clone(),
            translation_length: *l,
            datum: ParallelDatum::Euclidean { direction: d.clone() },
            reversed: ParallelDatum::Euclidean { direction: rev },
            self_reverse,
            stabilizer_generators: stab,
        });
    }
    out
}

fn least_rotation(w: &[tree::Letter]) -> Vec<tree::Letter> {
    (0..w.len()).map(|i| [&w[i..], &w[..i]].concat()).min().unwrap_or_default()
}

fn is_proper_power(w: &[tree::Letter]) -> bool {
    let n = w.len();
    (1..n).any(|p| n % p == 0 && (0..n).all(|i| w[i] == w[i % p]))
}

/// Cyclically reduced, primitive words of length `k`, one per rotation
/// class.
fn cyclic_words(k: usize) -> Vec<Vec<tree::Letter>> {
    let mut words: Vec<Vec<tree::Letter>> = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for w in &words {
            for l in tree::LETTERS {
                if w.last().map_or(true, |&x| x != tree::inv(l)) {
                    let mut v = w.clone();
                    v.push(l);
                    next.push(v);
                }
            }
        }
        words = next;
    }
    let mut out: Vec<Vec<tree::Letter>> = words
        .into_iter()
        .filter(|w| k < 2 || w[0] != tree::inv(w[k - 1]))
        .filter(|w| !is_proper_power(w))
        .map(|w| least_rotation(&w))
        .collect();
    out.sort();
    out.dedup();
    out
}

fn tree_classes(gamma: f64) -> Vec<AxisClass> {
    let mut out = Vec::new();
    for k in 1..=(gamma + 1e-9).floor() as usize {
        for w in cyclic_words(k) {
            let rev = least_rotation(&tree::inverse(&w));
            let g = IsometryElement::Tree { word: w.clone() };
            out.push(AxisClass {
                representative: g.clone(),
                translation_length: k as f64,
                datum: ParallelDatum::Tree { cyclic_word: tree::format_word(&w) },
                reversed: ParallelDatum::Tree { cyclic_word: tree::format_word(&rev) },
                self_reverse: false,
                stabilizer_generators: vec![g],
            });
        }
    }
    out
}

fn mobius_classes(action: &GroupAction, gamma: f64) -> Result<Vec<AxisClass>> {
    let g = action.generators()[0].clone();
    let l = g.translation_length();
    if l > gamma + 1e-9 {
        return Ok(vec![]);
    }
    let angles = |c: &GeneralizedGeodesic| -> Option<(f64, f64)> {
        match c.endpoints() {
            (Endpoint::Ideal(BoundaryPoint::Hyperbolic(b)), Endpoint::Ideal(BoundaryPoint::Hyperbolic(f))) => Some((b, f)),
            _ => None,
        }
    };
    let mut out = Vec::new();
    for h in [g.clone(), g.inverse()] {
        let Some((b, f)) = angles(&h.axis()?) else { return usage("axis without ideal ends") };
        out.push(AxisClass {
            representative: h.clone(),
            translation_length: l,
            datum: ParallelDatum::Hyperbolic { back: b, fwd: f },
            reversed: ParallelDatum::Hyperbolic { back: f, fwd: b },
            self_reverse: false,
            stabilizer_generators: vec![g.clone()],
        });
    }
    Ok(out)
}

/// Orbits of parallelism classes of hyperbolic elements with translation
/// length at most `γ`.
pub fn enumerate_axis_classes(gamma: f64, action: &GroupAction) -> Result<AxisClasses> {
    if !(gamma > 0.0) {
        return usage("γ must be positive");
    }
    let classes = match action.kind {
        ActionKind::Translations | ActionKind::Dihedral => euclidean_classes(action, gamma),
        ActionKind::Free => tree_classes(gamma),
        ActionKind::Mobius => mobius_classes(action, gamma)?,
        ActionKind::Other => return usage(format!("axis classes are not available for action '{}'", action.name)),
    };
    let oriented_count = classes.len();
    let mut out = AxisClasses { action: action.name.clone(), gamma, classes, oriented_count, merged_count: 0 };
    out.merged_count = out.merged().len();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_spaces::SpacePoint;

    fn counts(action: &GroupAction, gamma: f64) -> (usize, usize) {
        let c = enumerate_axis_classes(gamma, action).unwrap();
        (c.oriented_count, c.merged_count)
    }

    // brute force: primitive v ∈ ℤ² with |v| ≤ γ, up to sign
    fn lattice_directions(gamma: f64) -> usize {
        let r = gamma.floor() as i64;
        let gcd = |mut a: i64, mut b: i64| {
            while b != 0 {
                (a, b) = (b, a % b);
            }
            a.abs()
        };
        let mut n = 0;
        for x in -r..=r {
            for y in -r..=r {
                if (x, y) != (0, 0) && ((x * x + y * y) as f64).sqrt() <= gamma && gcd(x, y) == 1 {
                    n += 1;
                }
            }
        }
        n / 2
    }

    #[test]
    fn lattice_class_counts() {
        let z2 = GroupAction::z2();
        assert_eq!(counts(&z2, 1.0), (4, 2));
        assert_eq!(counts(&z2, 2.3), (16, 8));
        assert_eq!(lattice_directions(2.3), 8);
        assert_eq!(counts(&z2, 3.7).1, lattice_directions(3.7));
        assert_eq!(counts(&GroupAction::z(), 1.0), (2, 1));
        assert_eq!(counts(&GroupAction::dihedral(), 1.0), (1, 1));
    }

    #[test]
    fn free_group_class_counts() {
        let f2 = GroupAction::f2();
        assert_eq!(counts(&f2, 1.0), (4, 2));
        assert_eq!(counts(&f2, 2.0), (8, 4));
        // 28 cyclically reduced words of length 3, minus 4 cubes, in rotation classes of 3
        assert_eq!(cyclic_words(3).len(), 8);
    }

    #[test]
    fn mobius_classes_merge_orientation() {
        let m = GroupAction::mobius(2.0).unwrap();
        // l = 2 ln 2
        assert_eq!(counts(&m, 1.5), (2, 1));
        assert_eq!(counts(&m, 1.3).0, 0);
    }

    #[test]
    fn periods() {
        let z2 = GroupAction::z2();
        let x = GeneralizedGeodesic::constant(SpacePoint::euclidean(&[0.2, 0.3]));
        assert_eq!(g_period(&x, &z2, 5.0, 4).period, 0.0);
        let e1 = GeneralizedGeodesic::euclidean_line(&[0.0, 0.4], &[1.0, 0.0]).unwrap();
        assert!((g_period(&e1, &z2, 5.0, 4).period - 1.0).abs() < 1e-9);
        let diag = GeneralizedGeodesic::euclidean_line(&[0.0, 0.4], &[1.0, 1.0]).unwrap();
        assert!((g_period(&diag, &z2, 5.0, 4).period - 2f64.sqrt()).abs() < 1e-9);
        let irr = GeneralizedGeodesic::euclidean_line(&[0.0, 0.0], &[1.0, 2f64.sqrt()]).unwrap();
        assert!(!g_period(&irr, &z2, 5.0, 6).found());
        assert!(fs_le_gamma(&e1, &z2, 1.0, 4) && !fs_le_gamma(&diag, &z2, 1.0, 4));
        let f2 = GroupAction::f2();
        let axis = IsometryElement::word("ab").unwrap().axis().unwrap();
        assert!((g_period(&axis, &f2, 5.0, 4).period - 2.0).abs() < 1e-9);
    }
}
