use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::IsometryElement;
use crate::error::{usage, Error, Result};
use crate::flow_space::{dist_fs, FlowMetricConfig, GeneralizedGeodesic};
use crate::model_spaces::{tree, BoundaryPoint, Endpoint, Space, SpacePoint};

pub const DEFAULT_WORD_LENGTH: usize = 12;

/// Which of the bundled example families an action belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    /// `ℤⁿ` acting on `ℝⁿ` by translations.
    Translations,
    /// The infinite dihedral group acting on `ℝ`.
    Dihedral,
    /// `F₂` acting on its Cayley tree.
    Free,
    /// A cyclic group of Möbius maps.
    Mobius,
    Other,
}

/// A finitely generated group acting by isometries, with a symmetric
/// generating set `S ∋ e`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupAction {
    pub name: String,
    pub space: Space,
    pub kind: ActionKind,
    generators: Vec<IsometryElement>,
    s: Vec<IsometryElement>,
    pub base_point: SpacePoint,
}

impl GroupAction {
    pub fn new(
        name: impl Into<String>,
        space: Space,
        kind: ActionKind,
        generators: Vec<IsometryElement>,
        base_point: SpacePoint,
    ) -> Result<Self> {
        if base_point.space() != space {
            return Err(Error::SpaceMismatch(space.name(), base_point.space().name()));
        }
        for g in &generators {
            if g.space() != space {
                return Err(Error::SpaceMismatch(space.name(), g.space().name()));
            }
        }
        let mut s = vec![IsometryElement::identity(space)];
        for g in &generators {
            for h in [g.clone(), g.inverse()] {
                if !s.iter().any(|x| x.key() == h.key()) {
                    s.push(h);
                }
            }
        }
        Ok(GroupAction { name: name.into(), space, kind, generators, s, base_point })
    }

    /// `ℤ` acting on `ℝ` by unit translations.
    pub fn z() -> Self {
        Self::translations(1)
    }

    /// `ℤⁿ` acting on `ℝⁿ` by the standard lattice.
    pub fn translations(n: usize) -> Self {
        let gens = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                IsometryElement::translation(&v)
            })
            .collect();
        let name = if n == 1 { "z".to_string() } else { format!("z{n}") };
        Self::new(name, Space::Euclidean(n), ActionKind::Translations, gens, SpacePoint::Euclidean(vec![0.0; n]))
            .expect("consistent preset")
    }

    pub fn z2() -> Self {
        Self::translations(2)
    }

    /// `D∞ = ⟨x ↦ x + 1, x ↦ −x⟩` on `ℝ`.
    pub fn dihedral() -> Self {
        let gens = vec![IsometryElement::translation(&[1.0]), IsometryElement::reflection_1d(0.0)];
        Self::new("dihedral", Space::Euclidean(1), ActionKind::Dihedral, gens, SpacePoint::euclidean(&[0.0]))
            .expect("consistent preset")
    }

    pub fn f2() -> Self {
        let gens = vec![IsometryElement::word("a").unwrap(), IsometryElement::word("b").unwrap()];
        Self::new("f2", Space::Tree, ActionKind::Free, gens, SpacePoint::Tree(tree::TreePoint::root()))
            .expect("consistent preset")
    }

    /// The cyclic group generated by `diag(λ, 1/λ)`.
    pub fn mobius(lambda: f64) -> Result<Self> {
        let g = IsometryElement::mobius(lambda, 0.0, 0.0, 1.0 / lambda)?;
        Self::new("mobius", Space::Hyperbolic, ActionKind::Mobius, vec![g], SpacePoint::disk(0.0, 0.0)?)
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "z" => Ok(Self::z()),
            "z2" => Ok(Self::z2()),
            "z3" => Ok(Self::translations(3)),
            "dihedral" | "d_inf" => Ok(Self::dihedral()),
            "f2" => Ok(Self::f2()),
            "mobius" => Self::mobius(2.0),
            other => usage(format!("unknown action '{other}' (expected z, z2, z3, dihedral, f2, mobius)")),
        }
    }

    pub fn generators(&self) -> &[IsometryElement] {
        &self.generators
    }

    /// The symmetric generating set, identity first.
    pub fn s(&self) -> &[IsometryElement] {
        &self.s
    }

    pub fn s_index(&self, g: &IsometryElement) -> Option<usize> {
        let k = g.key();
        self.s.iter().position(|x| x.key() == k)
    }

    pub fn identity(&self) -> IsometryElement {
        IsometryElement::identity(self.space)
    }

    /// All elements of word length at most `max_len`, in breadth-first
    /// order, each with its word length.
    pub fn enumerate(&self, max_len: usize) -> Vec<(IsometryElement, usize)> {
        let mut seen: HashMap<Vec<i64>, ()> = HashMap::new();
        let e = self.identity();
        seen.insert(e.key(), ());
        let mut out = vec![(e.clone(), 0)];
        let mut frontier = vec![e];
        for len in 1..=max_len {
            let mut next = Vec::new();
            for g in &frontier {
                for s in &self.s[1..] {
                    let h = g.compose(s);
                    if seen.insert(h.key(), ()).is_none() {
                        out.push((h.clone(), len));
                        next.push(h);
                    }
                }
            }
            frontier = next;
        }
        out
    }

    pub fn elements(&self, max_len: usize) -> Vec<IsometryElement> {
        self.enumerate(max_len).into_iter().map(|(g, _)| g).collect()
    }

    /// A uniformly random product of `len` elements of `S`.
    pub fn random_element(&self, rng: &mut impl rand::Rng, len: usize) -> IsometryElement {
        let mut g = self.identity();
        for _ in 0..len {
            g = g.compose(&self.s[rng.gen_range(0..self.s.len())]);
        }
        g
    }

    /// `max_{s ∈ S} d(s x₀, x₀)`.
    pub fn max_generator_displacement(&self) -> f64 {
        self.s.iter().map(|s| s.displacement(&self.base_point)).fold(0.0, f64::max)
    }

    /// Checks `d(gx, gy) = d(x, y)` for enumerated `g` on the given pairs.
    pub fn isometry_defect(&self, max_len: usize, pairs: &[(SpacePoint, SpacePoint)]) -> f64 {
        let mut worst: f64 = 0.0;
        for g in self.elements(max_len) {
            for (x, y) in pairs {
                worst = worst.max((g.act(x).dist(&g.act(y)) - x.dist(y)).abs());
            }
        }
        worst
    }
}

/// How `g` moves a line `c`: `g c(t) = c(t + shift)` when orientation is
/// preserved, `g c(t) = c(shift − t)` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineMotion {
    pub preserves_orientation: bool,
    pub shift: f64,
}

/// Whether `g` maps the image of the line `c` to itself, and how.
pub fn line_motion(g: &IsometryElement, c: &GeneralizedGeodesic, tol: f64) -> Option<LineMotion> {
    if !c.is_line() {
        return None;
    }
    let (back, fwd) = c.endpoints();
    let (Endpoint::Ideal(b), Endpoint::Ideal(f)) = (&back, &fwd) else { return None };
    let (gb, gf) = (g.act_boundary(b), g.act_boundary(f));
    let x = c.at_zero();
    let gx = g.act(x);
    let cfg = FlowMetricConfig::with_tolerance(tol * 1e-2);
    let gc = g.act_fs(c);
    let same = |a: &BoundaryPoint, b: &BoundaryPoint| a.approx_eq(b, tol);
    let d = x.dist(&gx);
    if same(&gb, b) && same(&gf, f) {
        for shift in [d, -d] {
            if dist_fs(&gc, &c.flow(shift), &cfg).map(|r| r.upper <= tol).unwrap_or(false) {
                return Some(LineMotion { preserves_orientation: true, shift });
            }
        }
    } else if same(&gb, f) && same(&gf, b) {
        // g c(t) = c(s − t) = reverse(c)(t − s)
        let r = c.reverse();
        for shift in [d, -d] {
            if dist_fs(&gc, &r.flow(-shift), &cfg).map(|x| x.upper <= tol).unwrap_or(false) {
                return Some(LineMotion { preserves_orientation: false, shift });
            }
        }
    }
    None
}

/// Evidence that the stabilizer of a line, among enumerated elements, is
/// virtually cyclic: a primitive translation `z` along the line and a set of
/// coset representatives `z^{−k} g` with `|shift| ≤ shift(z)/2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilizerWitness {
    pub elements_found: usize,
    pub primitive: Option<IsometryElement>,
    pub primitive_shift: f64,
    pub coset_representatives: Vec<IsometryElement>,
    /// Representatives found using only words of half the length.
    pub representatives_at_half_length: usize,
    pub virtually_cyclic: bool,
}

/// Enumerates the stabilizer of the line `c` up to word length `max_len`.
pub fn line_stabilizer(action: &GroupAction, c: &GeneralizedGeodesic, max_len: usize) -> StabilizerWitness {
    let tol = 1e-6;
    let all = action.enumerate(max_len);
    let stab: Vec<(IsometryElement, usize, LineMotion)> =
        all.into_iter().filter_map(|(g, l)| line_motion(&g, c, tol).map(|m| (g, l, m))).collect();
    stabilizer_witness(stab, max_len)
}

/// Builds a witness from stabilizer elements `(g, word length, motion)`
/// enumerated up to `max_len`. The motion only needs a meaningful shift
/// and orientation flag; for subsets other than lines any consistent
/// translation part works.
pub fn stabilizer_witness(stab: Vec<(IsometryElement, usize, LineMotion)>, max_len: usize) -> StabilizerWitness {
    let tol = 1e-6;
    let primitive = stab
        .iter()
        .filter(|(_, _, m)| m.preserves_orientation && m.shift > tol)
        .min_by(|a, b| a.2.shift.total_cmp(&b.2.shift))
        .map(|(g, _, m)| (g.clone(), m.shift));
    let reps = |limit: usize| -> Vec<IsometryElement> {
        let mut out: Vec<IsometryElement> = Vec::new();
        for (g, l, m) in &stab {
            if *l > limit {
                continue;
            }
            let r = match &primitive {
                Some((z, s0)) => z.power(-(m.shift / s0).round() as i64).compose(g),
                None => g.clone(),
            };
            if !out.iter().any(|x| x.key() == r.key()) {
                out.push(r);
            }
        }
        out.sort_by_key(|g| g.key());
        out
    };
    let full = reps(max_len);
    let half = reps(max_len / 2).len();
    let finite_reps = full.len() == half;
    WitnessBuilder { stab_len: stab.len(), primitive, full, half, ok: finite_reps }.build()
}

struct WitnessBuilder {
    stab_len: usize,
    primitive: Option<(IsometryElement, f64)>,
    full: Vec<IsometryElement>,
    half: usize,
    ok: bool,
}

impl WitnessBuilder {
    fn build(self) -> StabilizerWitness {
        let (primitive, primitive_shift) = match self.primitive {
            Some((z, s)) => (Some(z), s),
            None => (None, 0.0),
        };
        StabilizerWitness {
            elements_found: self.stab_len,
            primitive,
            primitive_shift,
            coset_representatives: self.full,
            representatives_at_half_length: self.half,
            virtually_cyclic: self.ok,
        }
    }
}

/// JSON description of an action.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "snake_case")]
pub enum ActionConfig {
    Euclidean {
        dim: usize,
        generators: Vec<EuclideanGenerator>,
        #[serde(default)]
        base_point: Option<Vec<f64>>,
    },
    Tree {
        generators: Vec<String>,
        #[serde(default)]
        base_point: Option<String>,
    },
    Hyperbolic {
        generators: Vec<[[f64; 2]; 2]>,
        #[serde(default)]
        base_point: Option<[f64; 2]>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EuclideanGenerator {
    /// Orthogonal part, row-major; identity when absent.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
    pub translation: Vec<f64>,
}

impl ActionConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self, name: &str) -> Result<GroupAction> {
        match self {
            ActionConfig::Euclidean { dim, generators, base_point } => {
                let n = *dim;
                let mut gens = Vec::new();
                let mut all_translations = true;
                for g in generators {
                    let q = match &g.matrix {
                        Some(q) => {
                            all_translations &= IsometryElement::euclidean(q.clone(), vec![0.0; n])?.is_identity(1e-12);
                            q.clone()
                        }
                        None => (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect(),
                    };
                    gens.push(IsometryElement::euclidean(q, g.translation.clone())?);
                }
                let kind = if all_translations {
                    ActionKind::Translations
                } else if n == 1 {
                    ActionKind::Dihedral
                } else {
                    ActionKind::Other
                };
                let x0 = base_point.clone().unwrap_or_else(|| vec![0.0; n]);
                if x0.len() != n {
                    return usage("base point has the wrong dimension");
                }
                GroupAction::new(name, Space::Euclidean(n), kind, gens, SpacePoint::Euclidean(x0))
            }
            ActionConfig::Tree { generators, base_point } => {
                let gens = generators.iter().map(|w| IsometryElement::word(w)).collect::<Result<Vec<_>>>()?;
                let x0 = SpacePoint::tree_vertex(base_point.as_deref().unwrap_or(""))?;
                GroupAction::new(name, Space::Tree, ActionKind::Free, gens, x0)
            }
            ActionConfig::Hyperbolic { generators, base_point } => {
                let gens = generators
                    .iter()
                    .map(|m| IsometryElement::mobius(m[0][0], m[0][1], m[1][0], m[1][1]))
                    .collect::<Result<Vec<_>>>()?;
                let [re, im] = base_point.unwrap_or([0.0, 0.0]);
                let kind = if gens.len() == 1 { ActionKind::Mobius } else { ActionKind::Other };
                GroupAction::new(name, Space::Hyperbolic, kind, gens, SpacePoint::disk(re, im)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_generating_sets() {
        assert_eq!(GroupAction::z2().s().len(), 5);
        assert_eq!(GroupAction::f2().s().len(), 5);
        // the reflection is an involution
        assert_eq!(GroupAction::dihedral().s().len(), 4);
        assert_eq!(GroupAction::mobius(2.0).unwrap().s().len(), 3);
    }

    #[test]
    fn enumeration_counts() {
        // ℤ² ball of radius 2 in the word metric has 13 elements
        assert_eq!(GroupAction::z2().enumerate(2).len(), 13);
        // F₂ ball of radius 2: 1 + 4 + 12
        assert_eq!(GroupAction::f2().enumerate(2).len(), 17);
    }

    #[test]
    fn stabilizer_of_coordinate_axis() {
        let a = GroupAction::z2();
        let c = GeneralizedGeodesic::euclidean_line(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let w = line_stabilizer(&a, &c, 8);
        assert!(w.virtually_cyclic);
        assert!((w.primitive_shift - 1.0).abs() < 1e-9);
        assert_eq!(w.coset_representatives.len(), 1);
        assert_eq!(w.elements_found, 17);
    }

    #[test]
    fn dihedral_stabilizer_has_a_reflection() {
        let a = GroupAction::dihedral();
        let c = GeneralizedGeodesic::euclidean_line(&[0.0], &[1.0]).unwrap();
        let w = line_stabilizer(&a, &c, 8);
        assert!(w.virtually_cyclic);
        assert_eq!(w.coset_representatives.len(), 2);
    }

    #[test]
    fn config_round_trip() {
        let cfg = ActionConfig::from_json(
            r#"{"space":"euclidean","dim":2,"generators":[{"translation":[1,0]},{"translation":[0,1]}]}"#,
        )
        .unwrap();
        let a = cfg.build("custom").unwrap();
        assert_eq!(a.kind, ActionKind::Translations);
        let t = ActionConfig::from_json(r#"{"space":"tree","generators":["a","b"]}"#).unwrap().build("t").unwrap();
        assert_eq!(t.s().len(), 5);
        assert!(ActionConfig::from_json(r#"{"space":"moon"}"#).is_err());
        assert!(GroupAction::preset("nope").is_err());
    }
}
