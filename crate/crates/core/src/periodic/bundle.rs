use serde::{Deserialize, Serialize};

use super::classes::AxisClass;
use crate::error::{usage, Result};
use crate::flow_space::{dist_fs, FlowMetricConfig, GeneralizedGeodesic};
use crate::group_actions::IsometryElement;
use crate::model_spaces::euclidean::{dot, norm};
use crate::model_spaces::{BoundaryPoint, Endpoint, SpacePoint};

/// `FS_a ≅ Y_a × ℝ` for one class.
///
/// For a Euclidean class with direction `u`, `Y_a = u^⊥` with coordinates in
/// an orthonormal basis, `q_a(c)` is the orthogonal part of `c(0)` and
/// `τ_a(c) = ⟨c(0), u⟩`. In the tree and the hyperbolic plane a class
/// consists of the flow lines of a single axis, so `Y_a` is a point and
/// `τ_a` is the signed position along that axis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowLineBundle {
    pub class: AxisClass,
    pub kind: BundleKind,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BundleKind {
    Euclidean { u: Vec<f64>, basis: Vec<Vec<f64>> },
    SingleAxis { axis: GeneralizedGeodesic },
}

/// An orthonormal basis of `u^⊥` by Gram–Schmidt on the standard basis.
fn complement_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    if n == 2 {
        return vec![vec![-u[1], u[0]]];
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        for b in std::iter::once(u).chain(basis.iter().map(|b| b.as_slice())) {
            let k = dot(&e, b);
            e.iter_mut().zip(b).for_each(|(x, y)| *x -= k * y);
        }
        let l = norm(&e);
        if l > 1e-6 {
            basis.push(e.iter().map(|x| x / l).collect());
        }
        if basis.len() + 1 == n {
            break;
        }
    }
    basis
}

impl FlowLineBundle {
    pub fn new(class: &AxisClass) -> Result<Self> {
        let kind = match class.unit_direction() {
            Some(u) => BundleKind::Euclidean { basis: complement_basis(&u), u },
            None => BundleKind::SingleAxis { axis: class.axis()? },
        };
        Ok(FlowLineBundle { class: class.clone(), kind })
    }

    pub fn transversal_dim(&self) -> usize {
        match &self.kind {
            BundleKind::Euclidean { basis, .. } => basis.len(),
            BundleKind::SingleAxis { .. } => 0,
        }
    }

    /// `p_a(c) = c(0)`.
    pub fn p(&self, c: &GeneralizedGeodesic) -> SpacePoint {
        c.at_zero().clone()
    }

    pub fn q(&self, c: &GeneralizedGeodesic) -> Vec<f64> {
        match &self.kind {
            BundleKind::Euclidean { basis, .. } => {
                let x = c.at_zero().as_euclidean().unwrap_or(&[]);
                basis.iter().map(|b| dot(x, b)).collect()
            }
            BundleKind::SingleAxis { .. } => vec![],
        }
    }

    pub fn tau(&self, c: &GeneralizedGeodesic) -> f64 {
        match &self.kind {
            BundleKind::Euclidean { u, .. } => dot(c.at_zero().as_euclidean().unwrap_or(&[]), u),
            BundleKind::SingleAxis { axis } => {
                let x = c.at_zero();
                let s = axis.at_zero().dist(x);
                if axis.evaluate(s).dist(x) <= axis.evaluate(-s).dist(x) {
                    s
                } else {
                    -s
                }
            }
        }
    }

    /// `d_a` on `Y_a`.
    pub fn d_a(&self, y: &[f64], z: &[f64]) -> f64 {
        y.iter().zip(z).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }

    /// The flow line with coordinates `(y, τ)`.
    pub fn line(&self, y: &[f64], tau: f64) -> Result<GeneralizedGeodesic> {
        match &self.kind {
            BundleKind::Euclidean { u, basis } => {
                if y.len() != basis.len() {
                    return usage("transversal coordinate has the wrong dimension");
                }
                let mut p: Vec<f64> = u.iter().map(|x| x * tau).collect();
                for (b, yi) in basis.iter().zip(y) {
                    p.iter_mut().zip(b).for_each(|(x, bb)| *x += yi * bb);
                }
                GeneralizedGeodesic::euclidean_line(&p, u)
            }
            BundleKind::SingleAxis { axis } => Ok(axis.flow(tau)),
        }
    }

    /// Whether `c` is a flow line of this class, within `tol`.
    pub fn contains(&self, c: &GeneralizedGeodesic, tol: f64) -> bool {
        if !c.is_line() {
            return false;
        }
        match &self.kind {
            BundleKind::Euclidean { u, .. } => match c.endpoints().1 {
                Endpoint::Ideal(BoundaryPoint::Euclidean(v)) => u.iter().zip(&v).all(|(a, b)| (a - b).abs() <= tol),
                _ => false,
            },
            BundleKind::SingleAxis { axis } => {
                let (b, f) = (c.endpoints(), axis.endpoints());
                matches!((&b.0, &f.0), (Endpoint::Ideal(x), Endpoint::Ideal(y)) if x.approx_eq(y, tol))
                    && matches!((&b.1, &f.1), (Endpoint::Ideal(x), Endpoint::Ideal(y)) if x.approx_eq(y, tol))
            }
        }
    }

    /// Transversal translation of `g` on `Y_a`, for translations.
    pub fn act_on_y(&self, g: &IsometryElement, y: &[f64]) -> Option<Vec<f64>> {
        match (&self.kind, g) {
            (BundleKind::Euclidean { basis, .. }, IsometryElement::Euclidean { v, .. }) => {
                Some(basis.iter().zip(y).map(|(b, yi)| yi + dot(v, b)).collect())
            }
            (BundleKind::SingleAxis { .. }, _) => Some(vec![]),
            _ => None,
        }
    }

    /// `|d_FS(c, d)² − (d_a(q c, q d)² + (τ c − τ d)²)|`, taking the worse end
    /// of the certified bracket.
    pub fn product_defect(&self, c: &GeneralizedGeodesic, d: &GeneralizedGeodesic, cfg: &FlowMetricConfig) -> Result<f64> {
        let target = self.d_a(&self.q(c), &self.q(d)).powi(2) + (self.tau(c) - self.tau(d)).powi(2);
        let b = dist_fs(c, d, cfg)?;
        Ok((b.lower.powi(2) - target).abs().max((b.upper.powi(2) - target).abs()))
    }

    /// `|τ_a(Φ_t c) − τ_a(c) − t|`.
    pub fn cocycle_defect(&self, c: &GeneralizedGeodesic, t: f64) -> f64 {
        (self.tau(&c.flow(t)) - self.tau(c) - t).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_actions::GroupAction;
    use crate::periodic::enumerate_axis_classes;

    #[test]
    fn horizontal_lines_in_the_plane() {
        let classes = enumerate_axis_classes(1.0, &GroupAction::z2()).unwrap();
        let a = classes.classes.iter().find(|a| a.unit_direction() == Some(vec![1.0, 0.0])).unwrap();
        let b = FlowLineBundle::new(a).unwrap();
        let c = GeneralizedGeodesic::euclidean_line(&[0.0, 5.0], &[1.0, 0.0]).unwrap();
        assert_eq!(b.q(&c), vec![5.0]);
        assert_eq!(b.tau(&c.flow(2.5)), 2.5);
        let d = b.line(&[2.0], -1.5).unwrap();
        assert!(b.contains(&d, 1e-12));
        let cfg = FlowMetricConfig::with_tolerance(1e-9);
        assert!(b.product_defect(&c, &d, &cfg).unwrap() <= 1e-6);
        let e1 = IsometryElement::translation(&[0.0, 1.0]);
        assert_eq!(b.act_on_y(&e1, &[5.0]), Some(vec![6.0]));
    }

    #[test]
    fn tree_axis_is_a_single_flow_line() {
        let classes = enumerate_axis_classes(2.0, &GroupAction::f2()).unwrap();
        let b = FlowLineBundle::new(&classes.classes[5]).unwrap();
        assert_eq!(b.transversal_dim(), 0);
        let BundleKind::SingleAxis { axis } = &b.kind else { panic!() };
        for t in [-3.0, 0.0, 1.5, 4.0] {
            assert!(b.cocycle_defect(&axis.flow(0.7), t) < 1e-12);
            assert!(b.contains(&axis.flow(t), 1e-9));
        }
    }

    #[test]
    fn complement_in_three_dimensions() {
        let u = [0.6, 0.0, 0.8];
        let b = complement_basis(&u);
        assert_eq!(b.len(), 2);
        for v in &b {
            assert!(dot(v, &u).abs() < 1e-12 && (norm(v) - 1.0).abs() < 1e-12);
        }
        assert!(dot(&b[0], &b[1]).abs() < 1e-12);
    }
}
