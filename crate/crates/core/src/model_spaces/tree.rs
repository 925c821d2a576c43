//! The Cayley tree of the free group `F₂ = ⟨a, b⟩` with unit edges.
//!
//! Letters are encoded as `0 = a`, `1 = a⁻¹`, `2 = b`, `3 = b⁻¹`, written
//! `a A b B` in strings. A point is a vertex (a reduced word) or a point in
//! the interior of the edge leaving that vertex along a letter, at an offset
//! in `(0, 1)`. Every point is stored so that `word · letter` is reduced,
//! which makes `|word| + offset` the distance to the root.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};

pub type Letter = u8;

/// Offsets this close to an endpoint snap to the vertex.
pub const SNAP: f64 = 1e-12;

pub const LETTERS: [Letter; 4] = [0, 1, 2, 3];

#[inline]
pub fn inv(l: Letter) -> Letter {
    l ^ 1
}

pub fn letter_char(l: Letter) -> char {
    ['a', 'A', 'b', 'B'][l as usize]
}

pub fn parse_word(s: &str) -> Result<Vec<Letter>> {
    let mut out = Vec::with_capacity(s.len());
    for ch in s.chars() {
        let l = match ch {
            'a' => 0,
            'A' => 1,
            'b' => 2,
            'B' => 3,
            '1' | 'e' | ' ' => continue,
            _ => return usage(format!("bad letter {ch:?} in word {s:?}")),
        };
        out.push(l);
    }
    Ok(reduce(&out))
}

pub fn format_word(w: &[Letter]) -> String {
    if w.is_empty() {
        return "e".into();
    }
    w.iter().map(|&l| letter_char(l)).collect()
}

/// Free reduction.
pub fn reduce(w: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&inv(l)) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn is_reduced(w: &[Letter]) -> bool {
    w.windows(2).all(|p| p[1] != inv(p[0])) && w.iter().all(|&l| l < 4)
}

/// Product of two reduced words.
pub fn mul(u: &[Letter], v: &[Letter]) -> Vec<Letter> {
    let mut k = 0;
    while k < u.len() && k < v.len() && u[u.len() - 1 - k] == inv(v[k]) {
        k += 1;
    }
    let mut out = Vec::with_capacity(u.len() + v.len() - 2 * k);
    out.extend_from_slice(&u[..u.len() - k]);
    out.extend_from_slice(&v[k..]);
    out
}

pub fn inverse(w: &[Letter]) -> Vec<Letter> {
    w.iter().rev().map(|&l| inv(l)).collect()
}

/// Splits a reduced word as `u · c · u⁻¹` with `c` cyclically reduced.
pub fn cyclic_split(w: &[Letter]) -> (Vec<Letter>, Vec<Letter>) {
    let mut i = 0;
    let n = w.len();
    while 2 * i + 1 < n && w[i] == inv(w[n - 1 - i]) {
        i += 1;
    }
    (w[..i].to_vec(), w[i..n - i].to_vec())
}

fn common_prefix(a: impl Fn(usize) -> Letter, b: impl Fn(usize) -> Letter, n: usize) -> usize {
    let mut k = 0;
    while k < n && a(k) == b(k) {
        k += 1;
    }
    k
}

/// A point of the tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreePoint {
    #[serde(with = "word_serde")]
    word: Vec<Letter>,
    edge: Option<(Letter, f64)>,
}

impl TreePoint {
    pub fn root() -> Self {
        TreePoint { word: Vec::new(), edge: None }
    }

    pub fn vertex(word: &[Letter]) -> Self {
        TreePoint { word: reduce(word), edge: None }
    }

    /// The point at distance `offset ∈ [0,1]` from vertex `word` along `letter`.
    pub fn on_edge(word: &[Letter], letter: Letter, offset: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&offset) || letter > 3 {
            return usage(format!("edge offset {offset} outside [0,1]"));
        }
        let word = reduce(word);
        if offset <= SNAP {
            return Ok(TreePoint { word, edge: None });
        }
        if offset >= 1.0 - SNAP {
            return Ok(TreePoint { word: mul(&word, &[letter]), edge: None });
        }
        if word.last() == Some(&inv(letter)) {
            // edge toward the root; store it from the parent side
            let parent = word[..word.len() - 1].to_vec();
            let back = word[word.len() - 1];
            return Ok(TreePoint { word: parent, edge: Some((back, 1.0 - offset)) });
        }
        Ok(TreePoint { word, edge: Some((letter, offset)) })
    }

    pub fn word(&self) -> &[Letter] {
        &self.word
    }

    pub fn edge(&self) -> Option<(Letter, f64)> {
        self.edge
    }

    pub fn is_vertex(&self) -> bool {
        self.edge.is_none()
    }

    /// Distance to the root.
    pub fn depth(&self) -> f64 {
        self.word.len() as f64 + self.edge.map_or(0.0, |e| e.1)
    }

    fn ext_len(&self) -> usize {
        self.word.len() + usize::from(self.edge.is_some())
    }

    #[inline]
    fn ext(&self, i: usize) -> Letter {
        if i < self.word.len() {
            self.word[i]
        } else {
            self.edge.expect("index inside extended word").0
        }
    }

    /// Left multiplication by a reduced word.
    pub fn left_mul(&self, g: &[Letter]) -> TreePoint {
        let v = mul(g, &self.word);
        match self.edge {
            None => TreePoint { word: v, edge: None },
            Some((l, o)) => {
                if v.last() == Some(&inv(l)) {
                    let back = v[v.len() - 1];
                    TreePoint { word: v[..v.len() - 1].to_vec(), edge: Some((back, 1.0 - o)) }
                } else {
                    TreePoint { word: v, edge: Some((l, o)) }
                }
            }
        }
    }

    pub fn to_label(&self) -> String {
        match self.edge {
            None => format_word(&self.word),
            Some((l, o)) => format!("{}+{}{}", format_word(&self.word), o, letter_char(l)),
        }
    }
}

impl std::fmt::Display for TreePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_label())
    }
}

pub fn distance(p: &TreePoint, q: &TreePoint) -> f64 {
    let n = p.ext_len().min(q.ext_len());
    let k = common_prefix(|i| p.ext(i), |i| q.ext(i), n) as f64;
    let (dp, dq) = (p.depth(), q.depth());
    let m = k.min(dp).min(dq);
    (dp - m) + (dq - m)
}

/// An end of the tree, `head · cycle^∞`.
///
/// Stored canonically: `cycle` is cyclically reduced and primitive, and
/// `head` does not end with the last letter of `cycle`, so equal ends have
/// equal representations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeEnd {
    #[serde(with = "word_serde")]
    head: Vec<Letter>,
    #[serde(with = "word_serde")]
    cycle: Vec<Letter>,
}

impl TreeEnd {
    pub fn new(head: &[Letter], cycle: &[Letter]) -> Result<Self> {
        if cycle.is_empty() || !is_reduced(cycle) || cycle[0] == inv(cycle[cycle.len() - 1]) {
            return usage("end cycle must be nonempty and cyclically reduced");
        }
        if !is_reduced(head) || head.last() == Some(&inv(cycle[0])) {
            return usage("end is not reduced at the seam");
        }
        let n = cycle.len();
        let p = (1..=n).find(|&p| n % p == 0 && (0..n).all(|i| cycle[i] == cycle[i % p])).unwrap();
        let mut cycle = cycle[..p].to_vec();
        let mut head = head.to_vec();
        while head.last().is_some() && head.last() == cycle.last() {
            head.pop();
            cycle.rotate_right(1);
        }
        Ok(TreeEnd { head, cycle })
    }

    pub fn parse(head: &str, cycle: &str) -> Result<Self> {
        TreeEnd::new(&parse_word(head)?, &parse_word(cycle)?)
    }

    pub fn head(&self) -> &[Letter] {
        &self.head
    }

    pub fn cycle(&self) -> &[Letter] {
        &self.cycle
    }

    #[inline]
    pub fn letter(&self, i: usize) -> Letter {
        if i < self.head.len() {
            self.head[i]
        } else {
            self.cycle[(i - self.head.len()) % self.cycle.len()]
        }
    }

    pub fn prefix(&self, n: usize) -> Vec<Letter> {
        (0..n).map(|i| self.letter(i)).collect()
    }

    pub fn left_mul(&self, g: &[Letter]) -> TreeEnd {
        let k = g.len() / self.cycle.len() + 2;
        let mut full = self.head.clone();
        for _ in 0..k {
            full.extend_from_slice(&self.cycle);
        }
        let r = mul(g, &full);
        TreeEnd::new(&r, &self.cycle).expect("translate of a reduced end is reduced")
    }

    /// Index of the first letter where two ends differ.
    pub fn divergence(&self, other: &TreeEnd) -> Option<usize> {
        let bound = self.head.len().max(other.head.len()) + self.cycle.len() * other.cycle.len() + 1;
        (0..bound).find(|&i| self.letter(i) != other.letter(i))
    }

    pub fn to_label(&self) -> String {
        format!("{}({})^inf", format_word(&self.head), format_word(&self.cycle))
    }
}

/// The vertex where the geodesic line between two distinct ends passes
/// closest to the root.
pub fn line_anchor(back: &TreeEnd, fwd: &TreeEnd) -> Result<TreePoint> {
    match back.divergence(fwd) {
        Some(k) => Ok(TreePoint::vertex(&back.prefix(k))),
        None => usage("a line needs two distinct ends"),
    }
}

#[derive(Clone, Debug)]
enum Path {
    Finite(TreePoint),
    Infinite(TreeEnd),
}

impl Path {
    #[inline]
    fn letter(&self, i: usize) -> Letter {
        match self {
            Path::Finite(p) => p.ext(i),
            Path::Infinite(e) => e.letter(i),
        }
    }

    /// The point at the given depth on the root geodesic of this path.
    fn point_at(&self, depth: f64) -> TreePoint {
        let depth = depth.max(0.0);
        let n = depth.floor();
        let frac = depth - n;
        let n = n as usize;
        let prefix = |k: usize| -> Vec<Letter> { (0..k).map(|i| self.letter(i)).collect() };
        if frac <= SNAP {
            TreePoint { word: prefix(n), edge: None }
        } else if frac >= 1.0 - SNAP {
            TreePoint { word: prefix(n + 1), edge: None }
        } else {
            TreePoint { word: prefix(n), edge: Some((self.letter(n), frac)) }
        }
    }
}

/// Unit-speed ray from a point toward a point or an end.
#[derive(Clone, Debug)]
pub struct TreeRay {
    start: Path,
    start_depth: f64,
    meet: f64,
    target: Path,
    len: f64,
}

impl TreeRay {
    pub fn toward_point(x: &TreePoint, y: &TreePoint) -> Self {
        let n = x.ext_len().min(y.ext_len());
        let k = common_prefix(|i| x.ext(i), |i| y.ext(i), n) as f64;
        let (dx, dy) = (x.depth(), y.depth());
        let meet = k.min(dx).min(dy);
        TreeRay {
            start: Path::Finite(x.clone()),
            start_depth: dx,
            meet,
            target: Path::Finite(y.clone()),
            len: (dx - meet) + (dy - meet),
        }
    }

    pub fn toward_end(x: &TreePoint, end: &TreeEnd) -> Self {
        let k = common_prefix(|i| x.ext(i), |i| end.letter(i), x.ext_len()) as f64;
        let dx = x.depth();
        TreeRay {
            start: Path::Finite(x.clone()),
            start_depth: dx,
            meet: k.min(dx),
            target: Path::Infinite(end.clone()),
            len: f64::INFINITY,
        }
    }

    pub fn len(&self) -> f64 {
        self.len
    }

    pub fn at(&self, s: f64) -> TreePoint {
        let s = s.clamp(0.0, self.len);
        let up = self.start_depth - self.meet;
        if s <= up {
            match (&self.start, s == 0.0) {
                (Path::Finite(x), true) => x.clone(),
                _ => self.start.point_at(self.start_depth - s),
            }
        } else {
            match (&self.target, s >= self.len) {
                (Path::Finite(y), true) => y.clone(),
                _ => self.target.point_at(self.meet + (s - up)),
            }
        }
    }
}

mod word_serde {
    use super::{format_word, parse_word, Letter};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &[Letter], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_word(w))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Letter>, D::Error> {
        let s = String::deserialize(d)?;
        parse_word(&s).map_err(serde::de::Error::custom)
    }
}

pub use word_serde::{deserialize as deserialize_word, serialize as serialize_word};

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Vec<Letter> {
        parse_word(s).unwrap()
    }

    #[test]
    fn reduction_and_products() {
        assert_eq!(reduce(&[0, 2, 3, 1]), Vec::<Letter>::new());
        assert_eq!(mul(&w("ab"), &w("Ba")), w("aa"));
        assert_eq!(inverse(&w("ab")), w("BA"));
        assert_eq!(cyclic_split(&w("abA")), (w("a"), w("b")));
        assert_eq!(format_word(&[]), "e");
    }

    #[test]
    fn vertex_distances() {
        let a = TreePoint::vertex(&w("a"));
        let bi = TreePoint::vertex(&w("B"));
        assert_eq!(distance(&a, &bi), 2.0);
        let aa = TreePoint::vertex(&w("aa"));
        let ab = TreePoint::vertex(&w("ab"));
        assert_eq!(distance(&aa, &ab), 2.0);
    }

    #[test]
    fn edge_normalization() {
        // halfway down the edge from "ab" back to "a"
        let p = TreePoint::on_edge(&w("ab"), 3, 0.25).unwrap();
        assert_eq!(p.word(), &w("a")[..]);
        assert_eq!(p.edge(), Some((2, 0.75)));
        let v = TreePoint::on_edge(&w("a"), 0, 1.0).unwrap();
        assert_eq!(v, TreePoint::vertex(&w("aa")));
    }

    #[test]
    fn end_canonical_form() {
        let e1 = TreeEnd::parse("ab", "ab").unwrap();
        let e2 = TreeEnd::parse("", "abab").unwrap();
        assert_eq!(e1, e2);
        let e3 = TreeEnd::parse("b", "ab").unwrap();
        assert_eq!(e3, TreeEnd::parse("", "ba").unwrap());
        assert!(TreeEnd::parse("A", "a").is_err());
    }

    #[test]
    fn ray_to_end_walks_the_word() {
        let e = TreeEnd::parse("", "ab").unwrap();
        let r = TreeRay::toward_end(&TreePoint::root(), &e);
        assert_eq!(r.at(3.0), TreePoint::vertex(&w("aba")));
        let half = r.at(1.5);
        assert_eq!(half.word(), &w("a")[..]);
        assert_eq!(half.edge(), Some((2, 0.5)));
    }

    #[test]
    fn ray_between_points_turns_at_the_meet() {
        // brute-force walk: aa -> a -> ab, each edge length 1
        let x = TreePoint::vertex(&w("aa"));
        let y = TreePoint::vertex(&w("ab"));
        let r = TreeRay::toward_point(&x, &y);
        assert_eq!(r.len(), 2.0);
        let p = r.at(0.5);
        assert_eq!(p, TreePoint::on_edge(&w("a"), 0, 0.5).unwrap());
        assert_eq!(r.at(1.0), TreePoint::vertex(&w("a")));
        assert_eq!(r.at(1.25), TreePoint::on_edge(&w("a"), 2, 0.25).unwrap());
        assert_eq!(r.at(9.0), y);
    }

    #[test]
    fn end_translation() {
        let e = TreeEnd::parse("", "a").unwrap();
        assert_eq!(e.left_mul(&w("A")), e);
        let f = e.left_mul(&w("bA"));
        assert_eq!(f, TreeEnd::parse("b", "a").unwrap());
        assert_eq!(line_anchor(&TreeEnd::parse("", "A").unwrap(), &e).unwrap(), TreePoint::root());
    }

    #[test]
    fn left_mul_on_edges() {
        let p = TreePoint::on_edge(&w("a"), 2, 0.3).unwrap();
        let q = p.left_mul(&w("A"));
        assert_eq!(q, TreePoint::on_edge(&[], 2, 0.3).unwrap());
        let r = TreePoint::on_edge(&[], 0, 0.3).unwrap().left_mul(&w("A"));
        assert_eq!(r, TreePoint::on_edge(&w("A"), 0, 0.3).unwrap());
        assert_eq!(r.word(), &[] as &[Letter]);
        assert_eq!(r.edge(), Some((1, 0.7)));
    }
}
