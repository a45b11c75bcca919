//! Tanh-sinh (double-exponential) quadrature for integrands with algebraic
//! endpoint singularities.
//!
//! The integrand receives the abscissa together with its exact distances
//! to both endpoints, so that factors such as `sqrt(b − x)` can be formed
//! without cancellation when nodes crowd against an endpoint.

use std::f64::consts::FRAC_PI_2;

use crate::error::{GtsError, Result};

/// Refinement settings for [`TanhSinh::integrate`].
#[derive(Debug, Clone, Copy)]
pub struct TanhSinh {
    /// Relative change between levels at which refinement stops early.
    pub target_rel: f64,
    /// Relative error above which the result is rejected.
    pub fail_rel: f64,
    /// Absolute error floor, for integrals whose value is near zero.
    pub abs_floor: f64,
    /// Deepest refinement level; the step at level `k` is `2^-k`.
    pub max_level: usize,
    /// Truncation of the transformed real line.
    pub t_max: f64,
}

impl Default for TanhSinh {
    fn default() -> Self {
        Self { target_rel: 1e-13, fail_rel: 1e-8, abs_floor: 1e-15, max_level: 10, t_max: 5.0 }
    }
}

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl TanhSinh {
    /// Integrates `f(x, x − a, b − x)` over `[a, b]`.
    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> Result<QuadResult>
    where
        F: FnMut(f64, f64, f64) -> f64,
    {
        if a == b {
            return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
        }
        if b < a {
            let r = self.ordered(b, a, &mut |x, dl, dr| f(x, dr, dl))?;
            return Ok(QuadResult { value: -r.value, ..r });
        }
        self.ordered(a, b, &mut f)
    }

    fn ordered(&self, a: f64, b: f64, f: &mut dyn FnMut(f64, f64, f64) -> f64) -> Result<QuadResult> {
        let half = 0.5 * (b - a);
        let mut evaluations = 0usize;
        let mut node = |t: f64, f: &mut dyn FnMut(f64, f64, f64) -> f64| -> Result<f64> {
            let u = FRAC_PI_2 * t.sinh();
            let e = (-2.0 * u.abs()).exp();
            let near = half * 2.0 * e / (1.0 + e);
            let far = half * 2.0 / (1.0 + e);
            let (dl, dr) = if u >= 0.0 { (far, near) } else { (near, far) };
            let x = if dl <= dr { a + dl } else { b - dr };
            let w = half * FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
            if w == 0.0 || near == 0.0 {
                return Ok(0.0);
            }
            evaluations += 1;
            let v = f(x, dl, dr);
            if v.is_finite() {
                Ok(w * v)
            } else if w < 1e-40 {
                Ok(0.0)
            } else {
                Err(GtsError::QuadratureFail { estimate: f64::NAN, error: f64::INFINITY })
            }
        };

        let mut sum = node(0.0, f)?;
        let n0 = self.t_max.floor() as i64;
        for k in 1..=n0 {
            let t = k as f64;
            sum += node(t, f)? + node(-t, f)?;
        }
        let mut h = 1.0;
        let mut estimate = h * sum;
        let mut error = f64::INFINITY;
        for level in 1..=self.max_level {
            h *= 0.5;
            let mut fresh = 0.0;
            let mut t = h;
            while t <= self.t_max {
                fresh += node(t, f)? + node(-t, f)?;
                t += 2.0 * h;
            }
            sum += fresh;
            let next = h * sum;
            error = (next - estimate).abs();
            estimate = next;
            if level >= 3 && error <= (self.target_rel * estimate.abs()).max(self.abs_floor) {
                break;
            }
        }
        if error > (self.fail_rel * estimate.abs()).max(self.abs_floor * 1e3) {
            return Err(GtsError::QuadratureFail { estimate, error });
        }
        Ok(QuadResult { value: estimate, error, evaluations })
    }

    /// Integrates a plain function `f(x)` over `[a, b]`.
    pub fn integrate_plain<F>(&self, a: f64, b: f64, mut f: F) -> Result<QuadResult>
    where
        F: FnMut(f64) -> f64,
    {
        self.integrate(a, b, |x, _, _| f(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let q = TanhSinh::default();
        let r = q.integrate_plain(0.0, 2.0, |x| x * x).unwrap();
        assert_relative_eq!(r.value, 8.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn inverse_square_root_both_ends() {
        let q = TanhSinh::default();
        let r = q.integrate(-1.0, 1.0, |_, dl, dr| 1.0 / (dl * dr).sqrt()).unwrap();
        assert_relative_eq!(r.value, PI, epsilon = 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let q = TanhSinh::default();
        let r = q.integrate(1.0, 0.0, |_, dl, _| 1.0 / dl.sqrt()).unwrap();
        assert_relative_eq!(r.value, -2.0, epsilon = 1e-13);
    }

    #[test]
    fn log_singularity() {
        let q = TanhSinh::default();
        let r = q.integrate(0.0, 1.0, |_, dl, _| dl.ln()).unwrap();
        assert_relative_eq!(r.value, -1.0, epsilon = 1e-12);
    }
}
