use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::group_actions::GroupAction;

/// Constants for the flow estimate between geodesics from nearby base
/// points toward a common far point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConstants {
    pub beta: f64,
    pub l: f64,
    pub delta: f64,
    pub r_prime: f64,
    pub r_double_prime: f64,
    pub delta_prime: f64,
    /// `T = r' + r''`.
    pub t: f64,
    /// `r = 2r' + r'' + β`.
    pub r: f64,
}

/// `∫_{r'}^∞ (1 + t) e^{−t} dt = (2 + r') e^{−r'}`.
pub fn tail_integral(r_prime: f64) -> f64 {
    (2.0 + r_prime) * (-r_prime).exp()
}

/// `2β(L + 2r' + β)/r''`, the pointwise bound on the middle window.
pub fn triangle_bound(beta: f64, l: f64, r_prime: f64, r_double_prime: f64) -> f64 {
    2.0 * beta * (l + 2.0 * r_prime + beta) / r_double_prime
}

impl FlowConstants {
    /// The three defining conditions as margins `rhs − lhs`; all are `≥ 0`
    /// for valid constants.
    pub fn margins(&self) -> [f64; 3] {
        let third = self.delta / 3.0;
        [
            third - tail_integral(self.r_prime),
            third - self.delta_prime * (1.0 - (-self.r_prime).exp()),
            self.delta_prime - triangle_bound(self.beta, self.l, self.r_prime, self.r_double_prime),
        ]
    }

    /// Builds the derived quantities from free choices of `r'` and `r''`.
    pub fn from_parts(beta: f64, l: f64, delta: f64, r_prime: f64, r_double_prime: f64) -> Self {
        FlowConstants {
            beta,
            l,
            delta,
            r_prime,
            r_double_prime,
            delta_prime: triangle_bound(beta, l, r_prime, r_double_prime),
            t: r_prime + r_double_prime,
            r: 2.0 * r_prime + r_double_prime + beta,
        }
    }
}

/// Solves `(2 + r) e^{−r} = y` for `y ∈ (0, 2)` by bisection, returning a
/// root from the side where the inequality `≤ y` holds.
fn solve_tail(y: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while tail_integral(hi) > y {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tail_integral(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Chooses `r'`, `δ'`, `r''` and derives `T` and `r`.
pub fn select_constants_g(beta: f64, l: f64, delta: f64) -> Result<FlowConstants> {
    if !(beta > 0.0 && l > 0.0 && delta > 0.0) {
        return usage("β, L and δ must be positive");
    }
    let r_prime = solve_tail((delta / 3.0).min(1.9));
    let delta_prime = (delta / (3.0 * (1.0 - (-r_prime).exp()))).min(0.99);
    // shave off a little so that the middle condition survives rounding
    let delta_prime = delta_prime * (1.0 - 1e-12);
    let r_double_prime = (2.0 * beta * (l + 2.0 * r_prime + beta) / delta_prime).max(beta * (1.0 + 1e-9));
    let r_double_prime = r_double_prime * (1.0 + 1e-12);
    Ok(FlowConstants {
        beta,
        l,
        delta,
        r_prime,
        r_double_prime,
        delta_prime,
        t: r_prime + r_double_prime,
        r: 2.0 * r_prime + r_double_prime + beta,
    })
}

/// Constants for the estimate along the homotopy action.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionConstants {
    pub beta: f64,
    pub delta: f64,
    /// `δ₀ = (δ/2) e^{−β}`.
    pub delta0: f64,
    pub inner: FlowConstants,
    pub t: f64,
    pub radius: f64,
}

/// `β = 2 max_s d(s x₀, x₀)` (or 1 if every generator fixes `x₀`), `L = β`,
/// and `T`, `R` from [`select_constants_g`] at `δ₀`.
pub fn select_constants_h(action: &GroupAction, delta: f64) -> Result<ActionConstants> {
    if !(delta > 0.0) {
        return usage("δ must be positive");
    }
    let m = action.max_generator_displacement();
    let beta = if m > 0.0 { 2.0 * m } else { 1.0 };
    let delta0 = 0.5 * delta * (-beta).exp();
    let inner = select_constants_g(beta, beta, delta0)?;
    Ok(ActionConstants { beta, delta, delta0, inner, t: inner.t, radius: inner.r })
}

/// `ε` and the `δ` it requires, for chains of length `n`: `α = 2nβ` and
/// `δ = ε e^{−α}` make `d_FS(c, d) ≤ δ` imply `d_FS(Φ_σ c, Φ_σ d) ≤ ε` for
/// `|σ| ≤ α`.
pub fn chain_delta(beta: f64, n: usize, eps: f64) -> (f64, f64) {
    let alpha = 2.0 * n as f64 * beta;
    (alpha, eps * (-alpha).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_root_for_delta_three() {
        let c = select_constants_g(1.0, 1.0, 3.0).unwrap();
        assert!((c.r_prime - 1.146193).abs() < 1e-6, "{}", c.r_prime);
        assert!(c.margins().iter().all(|m| *m >= 0.0), "{:?}", c.margins());
    }

    #[test]
    fn tail_integral_matches_quadrature() {
        let r = 2.5;
        let n = 200_000;
        let h = 60.0 / n as f64;
        let q: f64 = (0..n).map(|i| {
            let t = r + (i as f64 + 0.5) * h;
            (1.0 + t) * (-t).exp() * h
        }).sum();
        assert!((q - tail_integral(r)).abs() < 1e-8);
    }

    #[test]
    fn smaller_delta_needs_longer_flows() {
        let mut last = (0.0, 0.0);
        for d in [0.5, 0.1, 0.01, 0.001] {
            let c = select_constants_g(1.0, 1.0, d).unwrap();
            assert!(c.t > last.0 && c.r > last.1);
            assert!(c.margins().iter().all(|m| *m >= 0.0));
            assert!(c.r_double_prime > c.beta && c.delta_prime < 1.0);
            last = (c.t, c.r);
        }
    }

    #[test]
    fn action_constants_for_z2() {
        let c = select_constants_h(&GroupAction::z2(), 0.1).unwrap();
        assert_eq!(c.beta, 2.0);
        assert!((c.delta0 - 0.05 * (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(c.radius, c.inner.r);
    }
}
