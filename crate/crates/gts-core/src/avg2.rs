//! Secondary averaging: the Diophantine scan, the two-periodic transport
//! equation `∂ₜχ + ∂_φχ = η̃`, the fields `g, h, f, δ`, and the
//! nondegeneracy constants `K`.

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{GtsError, Result};
use crate::quad::TanhSinh;
use crate::spectral::{self, wavenumber, TwoPeriodicField};
use crate::transform::{PolarCoeffs, PullbackSet};

/// Finite scan of `|mω + nT|·(|m| + |n|)^τ`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SiegelReport {
    pub omega: f64,
    pub t_period: f64,
    pub n_max: usize,
    pub worst_margin: f64,
    /// Pair `(m, n)` attaining the worst margin.
    pub worst_pair: (i64, i64),
    pub tau: f64,
    pub vartheta_fit: f64,
    pub pass: bool,
}

/// Scans `1 ≤ |m|, |n| ≤ n_max`; the verdict is a finite-range heuristic.
pub fn siegel_check(omega: f64, t_period: f64, n_max: usize, tau: f64) -> SiegelReport {
    let mut worst = f64::INFINITY;
    let mut pair = (0, 0);
    let mut resonant = false;
    for m in 1..=n_max as i64 {
        for n in 1..=n_max as i64 {
            let gap = (m as f64 * omega - n as f64 * t_period).abs();
            if gap < 1e-10 {
                resonant = true;
            }
            let margin = gap * ((m + n) as f64).powf(tau);
            if margin < worst {
                worst = margin;
                pair = (m, -n);
            }
        }
    }
    SiegelReport {
        omega,
        t_period,
        n_max,
        worst_margin: worst,
        worst_pair: pair,
        tau,
        vartheta_fit: worst,
        pass: !resonant && worst > 1e-10,
    }
}

/// Truncated periodic solution of the transport equation.
#[derive(Debug, Clone, Serialize)]
pub struct TransportSolution {
    pub chi: TwoPeriodicField,
    /// `max |∂ₜχ + ∂_φχ − η̃|` on the grid, spectral derivatives.
    pub residual_max: f64,
    pub n_harmonics: usize,
    /// Ratio `q` of the exponential fit to the `φ`-harmonic magnitudes of `χ`.
    pub coeff_decay_rate: f64,
}

fn resonance_guard(omega: f64, t_period: f64, n_harmonics: usize) -> Result<()> {
    for n in 1..=n_harmonics {
        let an = 2.0 * std::f64::consts::PI * n as f64 / omega;
        let gap = 1.0 - (an * t_period).cos();
        if gap < 1e-10 {
            return Err(GtsError::ResonantMode { n, gap });
        }
    }
    Ok(())
}

/// Solves `∂ₜχ + ∂_φχ = η̃` for the unique doubly periodic `χ` with zero
/// double mean, keeping `φ`-harmonics `|n| ≤ n_harmonics`.
///
/// Each retained mode `e^{i(ω_j t + α_n φ)}` is divided by `i(ω_j + α_n)`,
/// which is the monodromy formula applied to a trigonometric forcing.
pub fn solve_transport(eta_tilde: &TwoPeriodicField, n_harmonics: usize) -> Result<TransportSolution> {
    resonance_guard(eta_tilde.phi_period, eta_tilde.t_period, n_harmonics)?;
    let (nt, np) = (eta_tilde.nt, eta_tilde.nphi);
    let chi = eta_tilde.spectral_apply(|jt, jp, c| {
        let kp = wavenumber(jp, np);
        let nyq = (nt % 2 == 0 && jt == nt / 2) || (np % 2 == 0 && jp == np / 2);
        if nyq || kp.unsigned_abs() as usize > n_harmonics || (jt == 0 && jp == 0) {
            return Complex64::new(0.0, 0.0);
        }
        let (wt, wp) = eta_tilde.frequencies(jt, jp);
        c / Complex64::new(0.0, wt + wp)
    });
    let lhs = chi.d_t().zip_with(&chi.d_phi(), |a, b| a + b);
    let residual_max = lhs.zip_with(eta_tilde, |a, b| a - b).max_abs();
    let spec = chi.spectrum();
    let mags: Vec<f64> = (1..=n_harmonics.min(np / 2 - 1))
        .map(|n| (0..nt).map(|jt| spec[jt * np + n].norm()).fold(0.0, f64::max) / (nt * np) as f64)
        .collect();
    let fit = spectral::decay_fit_magnitudes(&mags);
    Ok(TransportSolution { chi, residual_max, n_harmonics, coeff_decay_rate: fit.q })
}

/// Number of `φ`-harmonics kept by the transport solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Harmonics {
    Fixed(usize),
    /// Starts at `start` and doubles until the residual is at most
    /// `rel_tol · max|η̃|` or the grid resolution is reached.
    Adaptive { start: usize, rel_tol: f64 },
}

impl Default for Harmonics {
    fn default() -> Self {
        Harmonics::Adaptive { start: 15, rel_tol: 1e-6 }
    }
}

/// [`solve_transport`] with the harmonic count chosen by `harmonics`.
pub fn solve_transport_with(eta_tilde: &TwoPeriodicField, harmonics: Harmonics) -> Result<TransportSolution> {
    match harmonics {
        Harmonics::Fixed(n) => solve_transport(eta_tilde, n),
        Harmonics::Adaptive { start, rel_tol } => {
            let cap = (eta_tilde.nphi / 2).saturating_sub(1).max(1);
            let target = rel_tol * eta_tilde.max_abs();
            let mut n = start.clamp(1, cap);
            loop {
                let sol = solve_transport(eta_tilde, n)?;
                if sol.residual_max <= target || n >= cap {
                    return Ok(sol);
                }
                n = (2 * n).min(cap);
            }
        }
    }
}

/// `T`-periodic solution at time `t` of `χ̇ = Aχ + η(t)`, with `A` the
/// rotation generator of rate `α_n`, from the monodromy formula
/// `χ(t) = (E − e^{AT})⁻¹ ∫_{t−T}^t e^{A(t−s)} η(s) ds`.
pub fn monodromy_mode<F>(eta: F, alpha_n: f64, t_period: f64, t: f64, quad: &TanhSinh) -> Result<[f64; 2]>
where
    F: Fn(f64) -> [f64; 2],
{
    let gap = 2.0 - 2.0 * (alpha_n * t_period).cos();
    if gap < 2e-10 {
        return Err(GtsError::ResonantMode { n: 0, gap });
    }
    let rot = |th: f64, v: [f64; 2]| {
        let (s, c) = th.sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1]]
    };
    let mut integral = [0.0; 2];
    for (k, slot) in integral.iter_mut().enumerate() {
        *slot = quad
            .integrate_plain(t - t_period, t, |s| rot(alpha_n * (t - s), eta(s))[k])?
            .value;
    }
    let (s, c) = (alpha_n * t_period).sin_cos();
    let (p, q) = (1.0 - c, s);
    Ok([(p * integral[0] - q * integral[1]) / gap, (q * integral[0] + p * integral[1]) / gap])
}

/// How `K` and the secondary fields are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KMode {
    /// Slow time: `χ` from the transport equation.
    Slow,
    /// Fast time: hat parts by `φ`-quadrature.
    Fast,
    /// Time-independent perturbation; means are integrals over the period.
    Autonomous,
}

impl KMode {
    /// Parses `0`, `1` or `auto`.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "0" => Some(Self::Slow),
            "1" => Some(Self::Fast),
            "auto" | "a" => Some(Self::Autonomous),
            _ => None,
        }
    }
}

/// Direction of time in which the invariant set attracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stability {
    StableForward,
    StableBackward,
}

/// Nondegeneracy constant with its stability reading.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Nondegeneracy {
    pub k: f64,
    pub mode: KMode,
    pub stability: Stability,
}

/// Secondary averaging fields; hat parts are zero profiles for `Slow`.
#[derive(Debug, Clone, Serialize)]
pub struct SecondaryFields {
    pub mode: KMode,
    /// `K` normalised by the period (equal to the reported `K` except in
    /// autonomous mode, where the reported value carries an extra factor `ω`).
    pub k_normalised: f64,
    pub g_bar: f64,
    pub g_hat: Vec<f64>,
    pub g_tilde: TwoPeriodicField,
    pub h_hat: Vec<f64>,
    pub h_tilde: TwoPeriodicField,
    pub f_hat: Vec<f64>,
    pub f_tilde: TwoPeriodicField,
    pub theta_bar: f64,
    pub delta_hat: Vec<f64>,
    pub delta_tilde: TwoPeriodicField,
    /// Largest transport residual over the solves performed.
    pub transport_residual: f64,
    /// Mean of the `f` right-hand side before projection; zero when `ḡ` is consistent.
    pub f_rhs_mean: f64,
}

fn check_mean(name: &str, mean: f64, tol: f64) -> Result<()> {
    if mean.abs() > tol {
        return Err(GtsError::MeanMismatch { name: name.to_string(), mean });
    }
    Ok(())
}

fn phi_antiderivative(profile: &[f64], omega: f64) -> Vec<f64> {
    spectral::antiderivative(profile, omega)
}

fn stability_of(k: f64) -> Stability {
    if k < 0.0 {
        Stability::StableForward
    } else {
        Stability::StableBackward
    }
}

fn finish_k(k: f64, mode: KMode) -> Result<Nondegeneracy> {
    if k.abs() < 1e-3 {
        return Err(GtsError::DegenerateK(k));
    }
    Ok(Nondegeneracy { k, mode, stability: stability_of(k) })
}

fn k_normalised_fast(pb: &PullbackSet, q: &[f64]) -> f64 {
    let r_hat = pb.r0.hat();
    let rq: Vec<f64> = r_hat.iter().zip(q).map(|(a, b)| a * b).collect();
    pb.rr.mean() - spectral::mean(&rq)
}

fn k_normalised_slow(pb: &PullbackSet, q: &[f64], g_tilde: &TwoPeriodicField) -> f64 {
    pb.rr.zip_with(&g_tilde.d_phi().mul_profile(q), |a, b| a - b).mean()
}

/// `K` from the pullbacks. `Slow` needs `g̃⁰`, which is obtained from the
/// transport equation with the harmonic count chosen by `harmonics`.
pub fn k_constant(pb: &PullbackSet, coeffs: &PolarCoeffs, mode: KMode, harmonics: Harmonics) -> Result<Nondegeneracy> {
    let k = match mode {
        KMode::Fast => k_normalised_fast(pb, &coeffs.q),
        KMode::Autonomous => pb.r0.phi_period * k_normalised_fast(pb, &coeffs.q),
        KMode::Slow => {
            let eta = pb.r0.add_scalar(-pb.r0.mean());
            let g = solve_transport_with(&eta, harmonics)?;
            k_normalised_slow(pb, &coeffs.q, &g.chi)
        }
    };
    finish_k(k, mode)
}

/// `K` read off already computed secondary fields.
pub fn k_from_secondary(secondary: &SecondaryFields, omega: f64) -> Result<Nondegeneracy> {
    let k = match secondary.mode {
        KMode::Autonomous => omega * secondary.k_normalised,
        _ => secondary.k_normalised,
    };
    finish_k(k, secondary.mode)
}

/// Builds `g, h, f, Θ, δ` at a generating root.
pub fn secondary_fields(pb: &PullbackSet, coeffs: &PolarCoeffs, mode: KMode, harmonics: Harmonics) -> Result<SecondaryFields> {
    let q = &coeffs.q;
    let omega = pb.r0.phi_period;
    let r_bar = pb.r0.mean();
    let scale = 1.0 + pb.r0.max_abs();
    check_mean("R°", r_bar, 1e-6 * scale)?;
    let zeros = vec![0.0; pb.r0.nphi];
    match mode {
        KMode::Slow => {
            let g = solve_transport_with(&pb.r0.add_scalar(-r_bar), harmonics)?;
            let gp = g.chi.d_phi();
            let k = k_normalised_slow(pb, q, &g.chi);
            finish_k(k, mode)?;
            let gpq = gp.mul_profile(q);
            let h_rhs = pb.rr.zip_with(&gpq, |a, b| a - b).add_scalar(-k);
            let h = solve_transport_with(&h_rhs, harmonics)?;
            let num = gp.zip_with(&pb.phi0, |a, b| a * b).mean()
                - pb.reps.mean()
                - g.chi.zip_with(&pb.rr.zip_with(&gpq, |a, b| a - b), |a, b| a * b).mean();
            let g_bar = num / k;
            let gfull = g.chi.add_scalar(g_bar);
            let theta = pb.phi0.zip_with(&gfull.mul_profile(q), |a, b| a + b);
            let f_rhs = pb
                .rr
                .zip_with(&gfull, |a, b| a * b)
                .zip_with(&pb.reps, |a, b| a + b)
                .zip_with(&gp.zip_with(&theta, |a, b| a * b), |a, b| a - b);
            let f_rhs_mean = f_rhs.mean();
            check_mean("f right-hand side", f_rhs_mean, 1e-6 * (1.0 + f_rhs.max_abs()))?;
            let f = solve_transport_with(&f_rhs.add_scalar(-f_rhs_mean), harmonics)?;
            let theta_bar = theta.mean();
            let d = solve_transport_with(&theta.add_scalar(-theta_bar), harmonics)?;
            let transport_residual = [g.residual_max, h.residual_max, f.residual_max, d.residual_max]
                .into_iter()
                .fold(0.0, f64::max);
            Ok(SecondaryFields {
                mode,
                k_normalised: k,
                g_bar,
                g_hat: zeros.clone(),
                g_tilde: g.chi,
                h_hat: zeros.clone(),
                h_tilde: h.chi,
                f_hat: zeros.clone(),
                f_tilde: f.chi,
                theta_bar,
                delta_hat: zeros,
                delta_tilde: d.chi,
                transport_residual,
                f_rhs_mean,
            })
        }
        KMode::Fast | KMode::Autonomous => {
            let r_hat = pb.r0.hat();
            let g_hat = phi_antiderivative(&r_hat, omega);
            let g_tilde = pb.r0.tilde().t_antiderivative();
            let k = k_normalised_fast(pb, q);
            finish_k(k, mode)?;
            let rq: Vec<f64> = r_hat.iter().zip(q).map(|(a, b)| a * b).collect();
            let rr_profile = pb.rr.t_mean_profile();
            let h_prof: Vec<f64> = (0..rq.len()).map(|i| rr_profile[i] - rq[i] - k).collect();
            check_mean("h right-hand side", spectral::mean(&h_prof), 1e-9 * (1.0 + k.abs()))?;
            let h_hat = phi_antiderivative(&h_prof, omega);
            let h_tilde = pb.rr.tilde().t_antiderivative();
            let k_field = pb.rr.map_indexed(|_, ip, v| v - rq[ip]);
            let num = pb.phi0.mul_profile(&r_hat).mean()
                - pb.reps.mean()
                - k_field.mul_profile(&g_hat).mean();
            let g_bar = num / k;
            let gq: Vec<f64> = (0..q.len()).map(|i| (g_bar + g_hat[i]) * q[i]).collect();
            let theta = pb.phi0.map_indexed(|_, ip, v| v + gq[ip]);
            let frak = k_field
                .scale(g_bar)
                .zip_with(&pb.phi0.mul_profile(&r_hat), |a, b| a - b)
                .zip_with(&pb.reps, |a, b| a + b)
                .zip_with(&k_field.mul_profile(&g_hat), |a, b| a + b)
                .zip_with(&g_tilde.d_phi(), |a, b| a - b);
            let f_rhs_mean = frak.mean();
            check_mean("f right-hand side", f_rhs_mean, 1e-6 * (1.0 + frak.max_abs()))?;
            let f_hat = phi_antiderivative(&frak.hat(), omega);
            let f_tilde = frak.tilde().t_antiderivative();
            let theta_bar = theta.mean();
            let delta_hat = phi_antiderivative(&theta.hat(), omega);
            let delta_tilde = theta.tilde().t_antiderivative();
            Ok(SecondaryFields {
                mode,
                k_normalised: k,
                g_bar,
                g_hat,
                g_tilde,
                h_hat,
                h_tilde,
                f_hat,
                f_tilde,
                theta_bar,
                delta_hat,
                delta_tilde,
                transport_residual: 0.0,
                f_rhs_mean,
            })
        }
    }
}

/// Largest seam jump of a transport solution on `points + 1` nodes
/// `φ_l = lω/points`: the value at `(T, φ_l)` reached by integrating
/// `η̃` along the characteristic from `(0, φ_l − T)` is compared with
/// `χ(0, φ_l)`.
pub fn seam_mismatch(chi: &TwoPeriodicField, eta_tilde: &TwoPeriodicField, points: usize) -> f64 {
    let (w, t) = (chi.phi_period, chi.t_period);
    let (chi, eta) = (chi.interpolator(), eta_tilde.interpolator());
    let mut worst = 0.0f64;
    for l in 0..=points {
        let phi = l as f64 * w / points as f64;
        let phi0 = phi - t;
        let gain = eta.characteristic_integral(phi0, t);
        worst = worst.max((chi.eval(0.0, phi0) + gain - chi.eval(0.0, phi)).abs());
    }
    worst
}
