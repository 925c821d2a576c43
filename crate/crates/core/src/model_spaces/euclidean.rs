//! Euclidean space ℝⁿ.

pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[derive(Clone, Debug)]
pub struct LineRay {
    origin: Vec<f64>,
    dir: Vec<f64>,
    len: f64,
    target: Option<Vec<f64>>,
}

impl LineRay {
    pub fn toward_point(x: &[f64], y: &[f64]) -> Self {
        let len = distance(x, y);
        let dir = if len > 0.0 {
            x.iter().zip(y).map(|(a, b)| (b - a) / len).collect()
        } else {
            vec![0.0; x.len()]
        };
        LineRay { origin: x.to_vec(), dir, len, target: Some(y.to_vec()) }
    }

    pub fn toward_direction(x: &[f64], u: &[f64]) -> Self {
        LineRay { origin: x.to_vec(), dir: u.to_vec(), len: f64::INFINITY, target: None }
    }

    pub fn len(&self) -> f64 {
        self.len
    }

    pub fn direction(&self) -> &[f64] {
        &self.dir
    }

    pub fn at(&self, s: f64) -> Vec<f64> {
        let s = s.clamp(0.0, self.len);
        if let (Some(t), true) = (&self.target, s >= self.len) {
            return t.clone();
        }
        self.origin.iter().zip(&self.dir).map(|(o, d)| o + d * s).collect()
    }
}
