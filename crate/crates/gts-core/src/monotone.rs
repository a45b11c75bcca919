//! Angular-monotonicity indicator `α_kl` along cycles and the class-1
//! region of `b` where it keeps a fixed sign.

use serde::Serialize;

use crate::error::{GtsError, Result};
use crate::model::separatrices;
use crate::orbit::CycleParam;
use crate::spectral;

/// Sign pattern of a sampled function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignPattern {
    Positive,
    Negative,
    Mixed,
}

/// Samples of `α = C'(S − l) − (C − k)S'` on a cycle.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaProfile {
    pub alpha: Vec<f64>,
    pub min_abs: f64,
    pub sign: SignPattern,
}

/// `a − 1 − γ + C² + γS² − k(C³ − C) − γl(S³ − S)`, the level-reduced form of `α`.
pub fn alpha_reduced(c: f64, s: f64, a: f64, gamma: f64, k: f64, l: f64) -> f64 {
    a - 1.0 - gamma + c * c + gamma * s * s - k * (c * c * c - c) - gamma * l * (s * s * s - s)
}

/// Indicator profile on the sampled cycle.
pub fn alpha(cycle: &CycleParam) -> AlphaProfile {
    let k = f64::from(cycle.seed.k);
    let l = f64::from(cycle.seed.l);
    let alpha: Vec<f64> = (0..cycle.len())
        .map(|i| cycle.dc[i] * (cycle.s[i] - l) - (cycle.c[i] - k) * cycle.ds[i])
        .collect();
    let lo = alpha.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = alpha.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sign = if lo > 0.0 {
        SignPattern::Positive
    } else if hi < 0.0 {
        SignPattern::Negative
    } else {
        SignPattern::Mixed
    };
    let min_abs = if sign == SignPattern::Mixed { 0.0 } else { lo.abs().min(hi.abs()) };
    AlphaProfile { alpha, min_abs, sign }
}

/// `α' = γ((S³ − S)(2C − 3kC² + k) − (C³ − C)(2S − 3lS² + l))` on the samples.
pub fn alpha_prime(cycle: &CycleParam) -> Vec<f64> {
    let k = f64::from(cycle.seed.k);
    let l = f64::from(cycle.seed.l);
    let g = cycle.gamma;
    (0..cycle.len())
        .map(|i| {
            let (c, s) = (cycle.c[i], cycle.s[i]);
            g * ((s * s * s - s) * (2.0 * c - 3.0 * k * c * c + k) - (c * c * c - c) * (2.0 * s - 3.0 * l * s * s + l))
        })
        .collect()
}

/// Spectral derivative of the indicator samples, for cross-checks.
pub fn alpha_prime_spectral(cycle: &CycleParam, profile: &AlphaProfile) -> Vec<f64> {
    spectral::derivative(&profile.alpha, cycle.omega)
}

/// `γ̃(C) = 4C(C² − 1)(C − 1)`.
pub fn gamma_tilde(c: f64) -> f64 {
    4.0 * c * (c * c - 1.0) * (c - 1.0)
}

/// Abscissa `C* = (√17 − 1)/8` of the maximum of `γ̃` on `[0, 1]`.
pub fn c_star() -> f64 {
    (17f64.sqrt() - 1.0) / 8.0
}

/// `γ* = (51√17 − 107)/128`.
pub fn gamma_star() -> f64 {
    (51.0 * 17f64.sqrt() - 107.0) / 128.0
}

/// `b* = (1 + (297 − 65√17)^{1/2}/16)^{1/2}`.
pub fn b_star() -> f64 {
    (1.0 + (297.0 - 65.0 * 17f64.sqrt()).sqrt() / 16.0).sqrt()
}

/// Branch `b_∓(C, γ)` of abscissas where `α_10` touches zero; `None`
/// when the quadratic has no admissible root.
pub fn b_branch(c: f64, gamma: f64, upper: bool) -> Option<f64> {
    let disc = gamma / 4.0 * (gamma - gamma_tilde(c));
    if disc < -1e-12 {
        return None;
    }
    let disc = disc.max(0.0);
    let s = if upper { 1.0 } else { -1.0 };
    let th = (c * c - 1.0) * (c - 1.0) - gamma / 2.0 + s * disc.sqrt();
    if th < 0.0 {
        return None;
    }
    Some((1.0 + th.sqrt()).sqrt())
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

fn scan_extremum<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let n = ((hi - lo) / step).ceil().max(2.0) as usize;
    let h = (hi - lo) / n as f64;
    let (mut bi, mut bv) = (0usize, f64::NEG_INFINITY);
    for i in 0..=n {
        let v = f(lo + i as f64 * h);
        if v > bv {
            bi = i;
            bv = v;
        }
    }
    let a = lo + (bi.saturating_sub(1)) as f64 * h;
    let b = (lo + (bi + 1) as f64 * h).min(hi);
    let (x, v) = golden_max(&f, a, b);
    if v >= bv {
        (x, v)
    } else {
        (lo + bi as f64 * h, bv)
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Class-1 monotonicity region for one `γ`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Class1Region {
    pub gamma: f64,
    pub gamma_star: f64,
    /// Scanned maximum of `γ̃` on `[0, 1]`.
    pub gamma_star_scanned: f64,
    pub c_star: f64,
    pub b_star: f64,
    /// Roots `C₁ < C₂` of `γ̃(C) = γ`.
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub b_p: Option<f64>,
    pub b_m: Option<f64>,
    pub b_d: f64,
    pub b_u: f64,
    /// Lower practical bound with coefficient 0.16 on the square root.
    pub b_d_narrow: f64,
    pub r_e: f64,
}

/// Computes `b_p`, `b_m` by a grid scan of step `grid_step` in `C`
/// followed by golden-section refinement, together with the closed-form
/// constants and practical bounds.
pub fn class1_region(gamma: f64, grid_step: f64) -> Result<Class1Region> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(GtsError::GammaOutOfRange(gamma));
    }
    let gs = gamma_star();
    let (_, gs_scan) = scan_extremum(gamma_tilde, 0.0, 1.0, grid_step);
    let r_e = separatrices(gamma).r_e;
    let off = (0.8 - gamma).max(0.0).sqrt();
    let mut reg = Class1Region {
        gamma,
        gamma_star: gs,
        gamma_star_scanned: gs_scan,
        c_star: c_star(),
        b_star: b_star(),
        c1: None,
        c2: None,
        b_p: None,
        b_m: None,
        b_d: 1.15 - off,
        b_u: 1.15 + 0.28 * off,
        b_d_narrow: 1.15 - 0.16 * off,
        r_e,
    };
    if gamma >= gs {
        return Ok(reg);
    }
    let cs = c_star();
    let c1 = bisect(|c| gamma_tilde(c) - gamma, 0.0, cs);
    let c2 = bisect(|c| gamma_tilde(c) - gamma, cs, 1.0);
    let neg_bm = |c: f64| b_branch(c.min(c1), gamma, false).map_or(f64::NEG_INFINITY, |b| -b);
    let (_, nb) = scan_extremum(neg_bm, 0.0, c1, grid_step);
    let bp = |c: f64| b_branch(c.max(c2), gamma, true).unwrap_or(f64::NEG_INFINITY);
    let (_, b_p) = scan_extremum(bp, c2, 1.0, grid_step);
    reg.c1 = Some(c1);
    reg.c2 = Some(c2);
    reg.b_m = Some(-nb);
    reg.b_p = Some(b_p);
    Ok(reg)
}

/// `(b_d, b_u) = (1.15 − (0.8 − γ)^{1/2}, 1.15 + 0.28(0.8 − γ)^{1/2})`.
pub fn practical_bounds(gamma: f64) -> Result<(f64, f64)> {
    if !(gamma > 0.0 && gamma <= 0.8) {
        return Err(GtsError::GammaOutOfRange(gamma));
    }
    let off = (0.8 - gamma).sqrt();
    Ok((1.15 - off, 1.15 + 0.28 * off))
}

/// Practical bounds with coefficient 0.16 on the lower square root,
/// `(1.15 − 0.16(0.8 − γ)^{1/2}, 1.15 + 0.28(0.8 − γ)^{1/2})`.
pub fn practical_bounds_narrow(gamma: f64) -> Result<(f64, f64)> {
    let (_, bu) = practical_bounds(gamma)?;
    Ok((1.15 - 0.16 * (0.8 - gamma).sqrt(), bu))
}
