//! The hyperbolic plane in the Poincaré disk model, curvature −1.

use num_complex::Complex64;

/// Points are kept inside this radius.
pub const GUARD: f64 = 1.0 - 1e-12;

/// Distance from the origin up to which disk coordinates resolve distances
/// reliably; points further out run into [`GUARD`].
pub const RELIABLE_RADIUS: f64 = 27.0;

pub fn guard(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r > GUARD {
        z * (GUARD / r)
    } else {
        z
    }
}

pub fn distance(z: Complex64, w: Complex64) -> f64 {
    let num = (z - w).norm();
    if num == 0.0 {
        return 0.0;
    }
    let den = ((1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr())).sqrt();
    2.0 * (num / den).asinh()
}

/// The disk automorphism sending `z` to `0`.
#[inline]
pub fn to_origin(z: Complex64, u: Complex64) -> Complex64 {
    (u - z) / (Complex64::new(1.0, 0.0) - z.conj() * u)
}

/// Inverse of [`to_origin`].
#[inline]
pub fn from_origin(z: Complex64, v: Complex64) -> Complex64 {
    (v + z) / (Complex64::new(1.0, 0.0) + z.conj() * v)
}

/// Boundary angle normalized to `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(std::f64::consts::TAU);
    if t >= std::f64::consts::TAU {
        0.0
    } else {
        t
    }
}

#[derive(Clone, Debug)]
pub struct DiskRay {
    base: Complex64,
    dir: Complex64,
    len: f64,
}

impl DiskRay {
    pub fn toward_point(z: Complex64, w: Complex64) -> Self {
        let len = distance(z, w);
        let v = to_origin(z, w);
        let dir = if v.norm() > 0.0 { v / v.norm() } else { Complex64::new(1.0, 0.0) };
        DiskRay { base: z, dir, len }
    }

    pub fn toward_angle(z: Complex64, theta: f64) -> Self {
        let v = to_origin(z, Complex64::from_polar(1.0, theta));
        DiskRay { base: z, dir: v / v.norm(), len: f64::INFINITY }
    }

    pub fn len(&self) -> f64 {
        self.len
    }

    pub fn at(&self, s: f64) -> Complex64 {
        let s = s.clamp(0.0, self.len);
        if s == 0.0 {
            return self.base;
        }
        guard(from_origin(self.base, self.dir * (s / 2.0).tanh()))
    }
}

/// The point of the geodesic joining two boundary angles that is closest to
/// the origin.
pub fn line_anchor(theta_back: f64, theta_fwd: f64) -> Complex64 {
    let mut half = (theta_fwd - theta_back).rem_euclid(std::f64::consts::TAU) / 2.0;
    let mut mid = theta_back + half;
    if half > std::f64::consts::FRAC_PI_2 {
        half = std::f64::consts::PI - half;
        mid += std::f64::consts::PI;
    }
    let r = (std::f64::consts::FRAC_PI_4 - half / 2.0).tan();
    Complex64::from_polar(r, mid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Integrates the line element 2|dz|/(1-|z|²) along the real radius.
    fn radial_length(r: f64, step: f64) -> f64 {
        let n = (r / step).round() as usize;
        let h = r / n as f64;
        (0..n)
            .map(|i| {
                let m = (i as f64 + 0.5) * h;
                2.0 / (1.0 - m * m) * h
            })
            .sum()
    }

    #[test]
    fn distance_matches_line_element() {
        let oracle = radial_length(0.5, 1e-6);
        assert!((distance(c(0.0, 0.0), c(0.5, 0.0)) - oracle).abs() < 1e-9);
    }

    #[test]
    fn ray_from_origin_is_tanh() {
        let r = DiskRay::toward_angle(c(0.0, 0.0), 0.0);
        for s in [0.1, 1.0, 3.0] {
            let p = r.at(s);
            assert!((p.re - (s / 2.0).tanh()).abs() < 1e-12 && p.im.abs() < 1e-12);
            assert!((distance(c(0.0, 0.0), p) - s).abs() < 1e-9);
        }
    }

    #[test]
    fn anchor_lies_on_the_geodesic() {
        let (a, b) = (0.3, 2.1);
        let p = line_anchor(a, b);
        let ra = DiskRay::toward_angle(p, a);
        let rb = DiskRay::toward_angle(p, b);
        // the two rays leave p in opposite directions
        assert!((ra.dir + rb.dir).norm() < 1e-9);
        assert!(line_anchor(0.0, std::f64::consts::PI).norm() < 1e-12);
    }
}
