//! Special polar coordinates around a cycle, the primary radial averaging
//! data `ξ`, `β`, and the pullbacks of the perturbation onto the
//! `(t, φ)` torus.

use serde::Serialize;

use crate::error::{GtsError, Result};
use crate::model::{poly_with_partials, separatrices, unperturbed_field, CycleClass, SystemSpec};
use crate::monotone::{alpha_prime, practical_bounds, AlphaProfile, SignPattern};
use crate::orbit::CycleParam;
use crate::spectral::{self, TwoPeriodicField};

/// Coefficients of the special polar system on the sample grid, with the
/// admissible radii of the polar and averaging changes.
#[derive(Debug, Clone, Serialize)]
pub struct PolarCoeffs {
    pub alpha: Vec<f64>,
    pub alpha_prime: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub p_breve: Vec<f64>,
    pub q_breve: Vec<f64>,
    /// Class bound `ρ_kl` on the polar radius.
    pub rho_kl: f64,
    /// Domain bound `ρ₀ = (σ − M)/(M + 1)` with `M` the sampled maximum plus 5%.
    pub rho_0: f64,
    pub rho_star: f64,
    pub r_star: f64,
    pub alpha_star: f64,
    pub beta_star_max: f64,
}

/// Primary averaging data: `ξ = α⁻¹(α'q − p)` and `β = ∫₀^φ (ξ − ξ̄)`.
#[derive(Debug, Clone, Serialize)]
pub struct BetaData {
    pub xi: Vec<f64>,
    pub xi_mean: f64,
    pub beta: Vec<f64>,
    /// `β' = ξ − ξ̄`.
    pub beta_prime: Vec<f64>,
}

/// Perturbation pulled back to the cycle: `R°`, `Φ°`, `(R'_r)°`, `(R'_ε)°`.
#[derive(Debug, Clone, Serialize)]
pub struct PullbackSet {
    pub r0: TwoPeriodicField,
    pub phi0: TwoPeriodicField,
    pub rr: TwoPeriodicField,
    pub reps: TwoPeriodicField,
}

fn xi_samples(cycle: &CycleParam, alpha: &[f64], alpha_p: &[f64], p: &[f64], q: &[f64]) -> Vec<f64> {
    (0..cycle.len()).map(|i| (alpha_p[i] * q[i] - p[i]) / alpha[i]).collect()
}

fn beta_from_xi(xi: &[f64], omega: f64) -> (f64, Vec<f64>, Vec<f64>) {
    let m = spectral::mean(xi);
    let centred: Vec<f64> = xi.iter().map(|v| v - m).collect();
    let mut beta = spectral::antiderivative(&centred, omega);
    let b0 = beta[0];
    beta.iter_mut().for_each(|v| *v -= b0);
    (m, beta, centred)
}

fn class_radius(cycle: &CycleParam, spec: &SystemSpec) -> f64 {
    let sep = separatrices(cycle.gamma);
    let b = cycle.seed.b.abs();
    match cycle.class {
        CycleClass::ZeroInner => (sep.r_i / b - 1.0).min(1.0),
        CycleClass::ZeroOuter => (1.0 - sep.r_e / b).min(spec.r_sigma() / b - 1.0),
        CycleClass::One => {
            let (bd, bu) = practical_bounds(cycle.gamma).unwrap_or((1.0, sep.r_e));
            let lo = bd.max(1.0);
            let hi = bu.min(sep.r_e);
            ((b - lo) / (b - 1.0)).min((hi - b) / (b - 1.0)).min(1.0)
        }
        CycleClass::Two => ((sep.r_s - b) / (b - 1.0)).min(1.0),
    }
}

/// Coefficients `p, q, p̆, q̆` and the radii `ρ*`, `r*`.
pub fn polar_coeffs(cycle: &CycleParam, alpha: &AlphaProfile, spec: &SystemSpec) -> Result<PolarCoeffs> {
    if alpha.sign == SignPattern::Mixed {
        let lo = alpha.alpha.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = alpha.alpha.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return Err(GtsError::NotMonotone { min: lo, max: hi });
    }
    let k = f64::from(cycle.seed.k);
    let l = f64::from(cycle.seed.l);
    let g = cycle.gamma;
    let n = cycle.len();
    let ap = alpha_prime(cycle);
    let mut p = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let mut pb = Vec::with_capacity(n);
    let mut qb = Vec::with_capacity(n);
    for i in 0..n {
        let (c, s, a) = (cycle.c[i], cycle.s[i], alpha.alpha[i]);
        let (ck, sl) = (c - k, s - l);
        q.push((ck.powi(3) * (2.0 * c + k) + g * sl.powi(3) * (2.0 * s + l)) / (a * a));
        p.push(3.0 * g / a * c * s * ((s * s - 1.0) * ck * ck - (c * c - 1.0) * sl * sl));
        pb.push(g / a * ((c * c * c - c) * sl.powi(3) - (s * s * s - s) * ck.powi(3)));
        qb.push((ck.powi(4) + g * sl.powi(4)) / a);
    }
    let xi = xi_samples(cycle, &alpha.alpha, &ap, &p, &q);
    let (_, beta, _) = beta_from_xi(&xi, cycle.omega);
    let beta_star = beta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let m_bound = 1.05 * cycle.max_abs();
    let rho_0 = (spec.sigma - m_bound) / (m_bound + 1.0);
    let rho_kl = class_radius(cycle, spec);
    let rho_star = 0.9 * rho_kl.min(rho_0);
    let alpha_star = alpha.min_abs;
    let r_0 = alpha_star / (1.0 + beta_star) * rho_star;
    let mut q_bound = 0.0f64;
    for i in 0..n {
        for j in 0..=40 {
            let r = -1.0 + j as f64 / 20.0;
            let a = alpha.alpha[i];
            let qq = beta[i] * q[i] + qb[i] / (a * a) * (1.0 + beta[i] * r).powi(2);
            q_bound = q_bound.max((q[i] + qq * r).abs());
        }
    }
    let r_star = 0.9 * (0.25 / beta_star.max(1e-300)).min(r_0).min(0.5 / q_bound);
    Ok(PolarCoeffs {
        alpha: alpha.alpha.clone(),
        alpha_prime: ap,
        p,
        q,
        p_breve: pb,
        q_breve: qb,
        rho_kl,
        rho_0,
        rho_star,
        r_star,
        alpha_star,
        beta_star_max: beta_star,
    })
}

/// `ξ`, its mean, and the periodic antiderivative `β` with `β(0) = 0`.
pub fn beta_data(cycle: &CycleParam, coeffs: &PolarCoeffs) -> Result<BetaData> {
    let xi = xi_samples(cycle, &coeffs.alpha, &coeffs.alpha_prime, &coeffs.p, &coeffs.q);
    let (xi_mean, beta, beta_prime) = beta_from_xi(&xi, cycle.omega);
    if xi_mean.abs() > 1e-6 {
        return Err(GtsError::MeanNotZero(xi_mean));
    }
    Ok(BetaData { xi, xi_mean, beta, beta_prime })
}

/// `β₀₀ = (b⁴ − 2b²)α⁻² − (5/2)α⁻¹ + (3b² − 1)(b³ − b)⁻²/2` for class-0 cycles.
pub fn beta00_closed_form(b: f64, alpha: f64) -> f64 {
    (b.powi(4) - 2.0 * b * b) / (alpha * alpha) - 2.5 / alpha + (3.0 * b * b - 1.0) / (2.0 * (b.powi(3) - b).powi(2))
}

/// Evaluates `R°`, `Φ°`, `(R'_r)°`, `(R'_ε)°` on an `nt × N` grid.
pub fn pullbacks(
    cycle: &CycleParam,
    alpha: &AlphaProfile,
    beta: &BetaData,
    spec: &SystemSpec,
    nt: usize,
) -> Result<PullbackSet> {
    let need = 2 * spec.perturbation.max_harmonic() as usize + 2;
    if nt < need {
        return Err(GtsError::InvalidSystem(format!("time grid {nt} below {need}")));
    }
    let k = f64::from(cycle.seed.k);
    let l = f64::from(cycle.seed.l);
    let ap = alpha_prime(cycle);
    let n = cycle.len();
    let mut r0 = Vec::with_capacity(nt * n);
    let mut phi0 = Vec::with_capacity(nt * n);
    let mut rr = Vec::with_capacity(nt * n);
    let mut reps = Vec::with_capacity(nt * n);
    for it in 0..nt {
        let t = it as f64 * spec.period / nt as f64;
        let fr = spec.perturbation.at_time(t, spec.period);
        for i in 0..n {
            let (c, s, dc, ds, a) = (cycle.c[i], cycle.s[i], cycle.dc[i], cycle.ds[i], alpha.alpha[i]);
            let (x, xx, xy) = poly_with_partials(&fr.x, c, s);
            let (y, yx, yy) = poly_with_partials(&fr.y, c, s);
            let (x1, _, _) = poly_with_partials(&fr.x1, c, s);
            let (y1, _, _) = poly_with_partials(&fr.y1, c, s);
            let rv = dc * y - ds * x;
            let ph = ((s - l) * x - (c - k) * y) / a;
            let pr = (dc * ((c - k) * yx + (s - l) * yy) - ds * ((c - k) * xx + (s - l) * xy)) / a;
            r0.push(rv);
            phi0.push(ph);
            rr.push(pr + ap[i] / a * ph - 2.0 * beta.beta[i] * rv);
            reps.push(dc * y1 - ds * x1);
        }
    }
    let mk = |data| TwoPeriodicField { t_period: spec.period, phi_period: cycle.omega, nt, nphi: n, data };
    Ok(PullbackSet { r0: mk(r0), phi0: mk(phi0), rr: mk(rr), reps: mk(reps) })
}

/// Radial rate `R(t, φ_i, r, 0)` of the averaged polar system at sample
/// `i`, built from the composed changes without expanding in `r`.
pub fn full_radial_perturbation(
    cycle: &CycleParam,
    coeffs: &PolarCoeffs,
    beta: &BetaData,
    spec: &SystemSpec,
    t: f64,
    i: usize,
    r: f64,
) -> f64 {
    let k = f64::from(cycle.seed.k);
    let l = f64::from(cycle.seed.l);
    let (c, s, dc, ds) = (cycle.c[i], cycle.s[i], cycle.dc[i], cycle.ds[i]);
    let (a, ap, b, bp) = (coeffs.alpha[i], coeffs.alpha_prime[i], beta.beta[i], beta.beta_prime[i]);
    let rho = (r + b * r * r) / a;
    let x = c + (c - k) * rho;
    let y = s + (s - l) * rho;
    let fr = spec.perturbation.at_time(t, spec.period);
    let (px, _, _) = poly_with_partials(&fr.x, x, y);
    let (py, _, _) = poly_with_partials(&fr.y, x, y);
    let p_nu = dc * py - ds * px;
    let phi_nu = ((s - l) * px - (c - k) * py) / (a * (1.0 + rho));
    (p_nu + (ap / a * r + (ap / a * b - bp) * r * r) * phi_nu) / (1.0 + 2.0 * b * r)
}

/// Rates `(ṙ, φ̇)` of the unperturbed system in the averaged polar
/// coordinates at sample `i`, obtained by inverting the Jacobian of the
/// composed change numerically.
pub fn unperturbed_polar_rates(cycle: &CycleParam, coeffs: &PolarCoeffs, beta: &BetaData, i: usize, r: f64) -> (f64, f64) {
    let k = f64::from(cycle.seed.k);
    let l = f64::from(cycle.seed.l);
    let (c, s, dc, ds) = (cycle.c[i], cycle.s[i], cycle.dc[i], cycle.ds[i]);
    let (a, ap, b, bp) = (coeffs.alpha[i], coeffs.alpha_prime[i], beta.beta[i], beta.beta_prime[i]);
    let rho = (r + b * r * r) / a;
    let rho_phi = -ap / (a * a) * (r + b * r * r) + bp * r * r / a;
    let rho_r = (1.0 + 2.0 * b * r) / a;
    let x = c + (c - k) * rho;
    let y = s + (s - l) * rho;
    let (u, v) = unperturbed_field(x, y, cycle.gamma);
    let j11 = dc * (1.0 + rho) + (c - k) * rho_phi;
    let j12 = (c - k) * rho_r;
    let j21 = ds * (1.0 + rho) + (s - l) * rho_phi;
    let j22 = (s - l) * rho_r;
    let det = j11 * j22 - j12 * j21;
    let phi_dot = (u * j22 - j12 * v) / det;
    let r_dot = (j11 * v - j21 * u) / det;
    (r_dot, phi_dot)
}

/// Coefficient of `r²` in `ṙ` of the unperturbed averaged polar system
/// at every sample, by symmetric differences with Richardson extrapolation.
pub fn radial_r2_coefficients(cycle: &CycleParam, coeffs: &PolarCoeffs, beta: &BetaData, h: f64) -> Vec<f64> {
    (0..cycle.len())
        .map(|i| {
            let c2 = |h: f64| {
                let (rp, _) = unperturbed_polar_rates(cycle, coeffs, beta, i, h);
                let (rm, _) = unperturbed_polar_rates(cycle, coeffs, beta, i, -h);
                (rp + rm) / (2.0 * h * h)
            };
            (4.0 * c2(0.5 * h) - c2(h)) / 3.0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Seed, TrigPoly};
    use crate::monotone::alpha;
    use crate::orbit::parametrize;
    use std::collections::BTreeMap;

    fn sa_spec() -> SystemSpec {
        let mut y = BTreeMap::new();
        y.insert((0, 1), TrigPoly::constant(-3.314));
        y.insert((0, 3), TrigPoly::constant(-0.361));
        y.insert((2, 1), TrigPoly::constant(4.493));
        let pert = crate::model::Perturbation::new(BTreeMap::new(), y);
        SystemSpec::new(0.5, 2.0 * std::f64::consts::PI, 0, 6f64.sqrt(), pert).unwrap()
    }

    #[test]
    fn class_zero_coefficient_identities() {
        let cyc = parametrize(&Seed::new(0, 0, 1.808), 0.5, 256).unwrap();
        let al = alpha(&cyc);
        let pc = polar_coeffs(&cyc, &al, &sa_spec()).unwrap();
        for i in 0..cyc.len() {
            let (c, s, a) = (cyc.c[i], cyc.s[i], al.alpha[i]);
            let q00 = 2.0 / (a * a) * (c.powi(4) + 0.5 * s.powi(4));
            assert!((pc.q[i] - q00).abs() < 1e-10);
            assert!((pc.p[i] - 1.5 * pc.alpha_prime[i] / a).abs() < 1e-10);
        }
        let bd = beta_data(&cyc, &pc).unwrap();
        assert!(bd.xi_mean.abs() < 1e-8);
        assert_eq!(bd.beta[0], 0.0);
        for i in 0..cyc.len() {
            assert!((bd.beta[i] - beta00_closed_form(1.808, al.alpha[i])).abs() < 1e-8);
        }
    }

    #[test]
    fn mixed_sign_is_rejected() {
        let cyc = parametrize(&Seed::new(1, 0, 1.02), 0.5, 256).unwrap();
        let al = alpha(&cyc);
        assert_eq!(al.sign, SignPattern::Mixed);
        assert!(matches!(polar_coeffs(&cyc, &al, &sa_spec()), Err(GtsError::NotMonotone { .. })));
    }

    #[test]
    fn autonomous_pullback_is_time_independent() {
        let spec = sa_spec();
        let cyc = parametrize(&Seed::new(1, 1, 1.27), 0.5, 128).unwrap();
        let al = alpha(&cyc);
        let pc = polar_coeffs(&cyc, &al, &spec).unwrap();
        let bd = beta_data(&cyc, &pc).unwrap();
        let pb = pullbacks(&cyc, &al, &bd, &spec, 4).unwrap();
        for i in 0..cyc.len() {
            let (c, s) = (cyc.c[i], cyc.s[i]);
            let y0 = -3.314 * s - 0.361 * s.powi(3) + 4.493 * c * c * s;
            assert!((pb.r0.at(0, i) - cyc.dc[i] * y0).abs() < 1e-12);
            assert_eq!(pb.r0.at(0, i), pb.r0.at(3, i));
        }
    }

    #[test]
    fn radial_expansion_matches_full_rate() {
        let spec = sa_spec();
        for seed in [Seed::new(0, 0, 1.808), Seed::new(1, 1, 1.27), Seed::new(1, 0, 1.2)] {
            let cyc = parametrize(&seed, 0.5, 128).unwrap();
            let al = alpha(&cyc);
            let pc = polar_coeffs(&cyc, &al, &spec).unwrap();
            let bd = beta_data(&cyc, &pc).unwrap();
            let pb = pullbacks(&cyc, &al, &bd, &spec, 2).unwrap();
            let h = 1e-3;
            for i in (0..cyc.len()).step_by(7) {
                let f = |r| full_radial_perturbation(&cyc, &pc, &bd, &spec, 0.0, i, r);
                assert!((f(0.0) - pb.r0.at(0, i)).abs() < 1e-12);
                let d1 = (f(h) - f(-h)) / (2.0 * h);
                let d2 = (f(0.5 * h) - f(-0.5 * h)) / h;
                let d = (4.0 * d2 - d1) / 3.0;
                assert!((d - pb.rr.at(0, i)).abs() < 1e-7 * (1.0 + d.abs()), "{seed:?} {i}: {d} vs {}", pb.rr.at(0, i));
            }
        }
    }

    #[test]
    fn unperturbed_radial_rate_has_no_quadratic_term() {
        for seed in [Seed::new(0, 0, 1.808), Seed::new(0, 0, 0.4), Seed::new(1, 1, 1.27), Seed::new(1, 0, 1.2)] {
            let cyc = parametrize(&seed, 0.5, 128).unwrap();
            let al = alpha(&cyc);
            let pc = polar_coeffs(&cyc, &al, &sa_spec()).unwrap();
            let bd = beta_data(&cyc, &pc).unwrap();
            for (i, c2) in radial_r2_coefficients(&cyc, &pc, &bd, 1e-3).iter().enumerate() {
                assert!(c2.abs() < 1e-6, "{seed:?} sample {i}: {c2}");
            }
            let (r0, phi0) = unperturbed_polar_rates(&cyc, &pc, &bd, 5, 0.0);
            assert!(r0.abs() < 1e-10 && (phi0 - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn star_radii_are_positive() {
        let cyc = parametrize(&Seed::new(0, 0, 1.808), 0.5, 256).unwrap();
        let al = alpha(&cyc);
        let pc = polar_coeffs(&cyc, &al, &sa_spec()).unwrap();
        assert!(pc.rho_star > 0.0 && pc.r_star > 0.0);
        assert!(pc.r_star <= 0.9 * 0.25 / pc.beta_star_max + 1e-15);
    }
}
