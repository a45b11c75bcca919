//! Fourier tools on uniform periodic grids: one-dimensional derivatives,
//! antiderivatives, interpolation and decay fits, and the two-periodic
//! field tableau in `(t, φ)`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

/// Forward DFT of real samples (unnormalised).
pub fn fft_real(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Inverse DFT returning the real part, normalised by the length.
pub fn ifft_real(spec: &[Complex64]) -> Vec<f64> {
    let mut buf = spec.to_vec();
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Signed wavenumber of DFT bin `i` on a grid of `n` points.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Spectral derivative of periodic samples over `period`.
pub fn derivative(values: &[f64], period: f64) -> Vec<f64> {
    let n = values.len();
    let mut s = fft_real(values);
    for (i, c) in s.iter_mut().enumerate() {
        let k = wavenumber(i, n);
        if n % 2 == 0 && i == n / 2 {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c *= Complex64::new(0.0, 2.0 * PI * k as f64 / period);
        }
    }
    ifft_real(&s)
}

/// Zero-mean periodic antiderivative of the zero-mean part of `values`.
pub fn antiderivative(values: &[f64], period: f64) -> Vec<f64> {
    let n = values.len();
    let mut s = fft_real(values);
    for (i, c) in s.iter_mut().enumerate() {
        let k = wavenumber(i, n);
        if k == 0 || (n % 2 == 0 && i == n / 2) {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c /= Complex64::new(0.0, 2.0 * PI * k as f64 / period);
        }
    }
    ifft_real(&s)
}

/// Arithmetic mean (the trapezoidal rule on a periodic grid).
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Trigonometric interpolant of periodic samples.
#[derive(Debug, Clone)]
pub struct TrigInterp {
    period: f64,
    coeffs: Vec<(f64, Complex64)>,
    nyquist: Option<(f64, f64)>,
}

impl TrigInterp {
    /// Builds the interpolant of `values` sampled on `[0, period)`.
    pub fn new(values: &[f64], period: f64) -> Self {
        let n = values.len();
        let s = fft_real(values);
        let mut coeffs = Vec::with_capacity(n);
        let mut nyquist = None;
        for (i, c) in s.iter().enumerate() {
            let k = wavenumber(i, n) as f64;
            if n % 2 == 0 && i == n / 2 {
                nyquist = Some((k, c.re / n as f64));
            } else {
                coeffs.push((k, c / n as f64));
            }
        }
        Self { period, coeffs, nyquist }
    }

    /// Value at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let th = 2.0 * PI * x / self.period;
        let mut acc = 0.0;
        for &(k, c) in &self.coeffs {
            let (sn, cs) = (k * th).sin_cos();
            acc += c.re * cs - c.im * sn;
        }
        if let Some((k, c)) = self.nyquist {
            acc += c * (k * th).cos();
        }
        acc
    }
}

/// Exponential fit `|c_n| ≈ M qⁿ` of Fourier coefficient magnitudes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    pub m: f64,
    pub q: f64,
    /// Number of harmonics used in the fit.
    pub harmonics: usize,
}

/// Least-squares fit of `ln|c_n|` against `n` over harmonics above the
/// round-off floor.
pub fn decay_fit(values: &[f64]) -> DecayFit {
    let n = values.len();
    let s = fft_real(values);
    let mags: Vec<f64> = (1..n / 2).map(|i| 2.0 * s[i].norm() / n as f64).collect();
    decay_fit_magnitudes(&mags)
}

/// Fit of `|c_n| ≈ M qⁿ` to magnitudes given for `n = 1, 2, …`.
pub fn decay_fit_magnitudes(mags: &[f64]) -> DecayFit {
    let top = mags.iter().cloned().fold(0.0, f64::max);
    let floor = (top * 1e-12).max(1e-14);
    let pts: Vec<(f64, f64)> = mags
        .iter()
        .enumerate()
        .take_while(|(_, &m)| m > floor)
        .filter(|(_, &m)| m > 0.0)
        .map(|(i, &m)| ((i + 1) as f64, m.ln()))
        .collect();
    if pts.len() < 2 {
        return DecayFit { m: top, q: 0.0, harmonics: pts.len() };
    }
    let k = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    let icpt = (sy - slope * sx) / k;
    DecayFit { m: icpt.exp(), q: slope.exp(), harmonics: pts.len() }
}

/// Real function of `(t, φ)`, `T`-periodic in `t` and `ω`-periodic in
/// `φ`, sampled on an `nt × nφ` uniform grid (row index `t`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoPeriodicField {
    pub t_period: f64,
    pub phi_period: f64,
    pub nt: usize,
    pub nphi: usize,
    pub data: Vec<f64>,
}

impl TwoPeriodicField {
    /// Samples `f(t, φ)` on the grid.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(t_period: f64, phi_period: f64, nt: usize, nphi: usize, f: F) -> Self {
        let mut data = Vec::with_capacity(nt * nphi);
        for i in 0..nt {
            let t = i as f64 * t_period / nt as f64;
            for j in 0..nphi {
                data.push(f(t, j as f64 * phi_period / nphi as f64));
            }
        }
        Self { t_period, phi_period, nt, nphi, data }
    }

    /// Field equal to `profile(φ)` at every `t`.
    pub fn from_profile(t_period: f64, phi_period: f64, nt: usize, profile: &[f64]) -> Self {
        let nphi = profile.len();
        let data = (0..nt).flat_map(|_| profile.iter().cloned()).collect();
        Self { t_period, phi_period, nt, nphi, data }
    }

    /// Zero field on the grid of `self`.
    pub fn zeros_like(&self) -> Self {
        Self { data: vec![0.0; self.data.len()], ..self.clone() }
    }

    /// Sample at grid indices.
    pub fn at(&self, it: usize, ip: usize) -> f64 {
        self.data[it * self.nphi + ip]
    }

    /// Time of row `it`.
    pub fn t_of(&self, it: usize) -> f64 {
        it as f64 * self.t_period / self.nt as f64
    }

    /// Angle of column `ip`.
    pub fn phi_of(&self, ip: usize) -> f64 {
        ip as f64 * self.phi_period / self.nphi as f64
    }

    /// Row of samples at time index `it`.
    pub fn row(&self, it: usize) -> &[f64] {
        &self.data[it * self.nphi..(it + 1) * self.nphi]
    }

    /// Double mean.
    pub fn mean(&self) -> f64 {
        mean(&self.data)
    }

    /// Mean over `t` at each `φ`, i.e. the mean plus the hat part.
    pub fn t_mean_profile(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.nphi];
        for it in 0..self.nt {
            for (acc, v) in p.iter_mut().zip(self.row(it)) {
                *acc += v;
            }
        }
        p.iter_mut().for_each(|v| *v /= self.nt as f64);
        p
    }

    /// Zero-mean `φ`-profile of the decomposition.
    pub fn hat(&self) -> Vec<f64> {
        let p = self.t_mean_profile();
        let m = mean(&p);
        p.into_iter().map(|v| v - m).collect()
    }

    /// Part with zero `t`-mean at every `φ`.
    pub fn tilde(&self) -> Self {
        let p = self.t_mean_profile();
        self.map_indexed(|_, ip, v| v - p[ip])
    }

    /// Largest absolute sample.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Applies `f(it, ip, value)` to every sample.
    pub fn map_indexed<F: Fn(usize, usize, f64) -> f64>(&self, f: F) -> Self {
        let mut out = self.clone();
        for it in 0..self.nt {
            for ip in 0..self.nphi {
                let k = it * self.nphi + ip;
                out.data[k] = f(it, ip, self.data[k]);
            }
        }
        out
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Self {
        assert_eq!((self.nt, self.nphi), (other.nt, other.nphi), "grid mismatch");
        let mut out = self.clone();
        for (o, (a, b)) in out.data.iter_mut().zip(self.data.iter().zip(&other.data)) {
            *o = f(*a, *b);
        }
        out
    }

    /// Multiplies every row by a `φ`-profile.
    pub fn mul_profile(&self, profile: &[f64]) -> Self {
        self.map_indexed(|_, ip, v| v * profile[ip])
    }

    /// Adds a constant.
    pub fn add_scalar(&self, c: f64) -> Self {
        self.map_indexed(|_, _, v| v + c)
    }

    /// Multiplies by a constant.
    pub fn scale(&self, c: f64) -> Self {
        self.map_indexed(|_, _, v| v * c)
    }

    /// Two-dimensional spectrum, indexed `[jt * nphi + jp]`.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut planner = FftPlanner::new();
        let fp = planner.plan_fft_forward(self.nphi);
        for row in buf.chunks_mut(self.nphi) {
            fp.process(row);
        }
        let ft = planner.plan_fft_forward(self.nt);
        let mut col = vec![Complex64::new(0.0, 0.0); self.nt];
        for ip in 0..self.nphi {
            for it in 0..self.nt {
                col[it] = buf[it * self.nphi + ip];
            }
            ft.process(&mut col);
            for it in 0..self.nt {
                buf[it * self.nphi + ip] = col[it];
            }
        }
        buf
    }

    /// Field with the given spectrum on the grid of `self`.
    pub fn from_spectrum(&self, spec: &[Complex64]) -> Self {
        let mut buf = spec.to_vec();
        let mut planner = FftPlanner::new();
        let it_plan = planner.plan_fft_inverse(self.nt);
        let mut col = vec![Complex64::new(0.0, 0.0); self.nt];
        for ip in 0..self.nphi {
            for it in 0..self.nt {
                col[it] = buf[it * self.nphi + ip];
            }
            it_plan.process(&mut col);
            for it in 0..self.nt {
                buf[it * self.nphi + ip] = col[it];
            }
        }
        let ip_plan = planner.plan_fft_inverse(self.nphi);
        for row in buf.chunks_mut(self.nphi) {
            ip_plan.process(row);
        }
        let norm = (self.nt * self.nphi) as f64;
        Self { data: buf.iter().map(|c| c.re / norm).collect(), ..self.clone() }
    }

    /// Angular frequencies `(2πj/T, 2πn/ω)` of spectrum bin `(jt, jp)`.
    pub fn frequencies(&self, jt: usize, jp: usize) -> (f64, f64) {
        let kt = wavenumber(jt, self.nt) as f64;
        let kp = wavenumber(jp, self.nphi) as f64;
        (2.0 * PI * kt / self.t_period, 2.0 * PI * kp / self.phi_period)
    }

    /// Applies `f(jt, jp, coefficient)` to every spectrum bin and
    /// transforms back.
    pub fn spectral_apply<F: Fn(usize, usize, Complex64) -> Complex64>(&self, f: F) -> Self {
        let mut s = self.spectrum();
        for jt in 0..self.nt {
            for jp in 0..self.nphi {
                let k = jt * self.nphi + jp;
                s[k] = f(jt, jp, s[k]);
            }
        }
        self.from_spectrum(&s)
    }

    /// Spectral `∂/∂t`.
    pub fn d_t(&self) -> Self {
        let nt = self.nt;
        self.spectral_apply(|jt, _, c| {
            if nt % 2 == 0 && jt == nt / 2 {
                return Complex64::new(0.0, 0.0);
            }
            let (wt, _) = self.frequencies(jt, 0);
            c * Complex64::new(0.0, wt)
        })
    }

    /// Spectral `∂/∂φ`.
    pub fn d_phi(&self) -> Self {
        let np = self.nphi;
        self.spectral_apply(|_, jp, c| {
            if np % 2 == 0 && jp == np / 2 {
                return Complex64::new(0.0, 0.0);
            }
            let (_, wp) = self.frequencies(0, jp);
            c * Complex64::new(0.0, wp)
        })
    }

    /// Antiderivative in `t` of the tilde part, with zero `t`-mean.
    pub fn t_antiderivative(&self) -> Self {
        let nt = self.nt;
        self.spectral_apply(|jt, _, c| {
            if jt == 0 || (nt % 2 == 0 && jt == nt / 2) {
                return Complex64::new(0.0, 0.0);
            }
            let (wt, _) = self.frequencies(jt, 0);
            c / Complex64::new(0.0, wt)
        })
    }

    /// Value at an arbitrary `(t, φ)` by separable trigonometric
    /// interpolation.
    pub fn eval(&self, t: f64, phi: f64) -> f64 {
        let col: Vec<f64> = (0..self.nt).map(|it| TrigInterp::new(self.row(it), self.phi_period).eval(phi)).collect();
        TrigInterp::new(&col, self.t_period).eval(t)
    }

    /// Precomputed trigonometric interpolant for repeated off-grid evaluation.
    pub fn interpolator(&self) -> TwoPeriodicInterp {
        let spec = self.spectrum();
        let norm = (self.nt * self.nphi) as f64;
        let cut = 1e-15 * spec.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        let mut terms = Vec::new();
        for jt in 0..self.nt {
            for jp in 0..self.nphi {
                let c = spec[jt * self.nphi + jp];
                if c.norm() > cut {
                    let (wt, wp) = self.frequencies(jt, jp);
                    terms.push((wt, wp, c / norm));
                }
            }
        }
        TwoPeriodicInterp { terms }
    }
}

/// Trigonometric interpolant of a [`TwoPeriodicField`].
#[derive(Debug, Clone)]
pub struct TwoPeriodicInterp {
    terms: Vec<(f64, f64, Complex64)>,
}

impl TwoPeriodicInterp {
    /// Value at `(t, φ)`.
    pub fn eval(&self, t: f64, phi: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(wt, wp, c)| {
                let (s, co) = (wt * t + wp * phi).sin_cos();
                c.re * co - c.im * s
            })
            .sum()
    }

    /// `∫₀^len f(s, φ₀ + s) ds`, integrated exactly term by term.
    pub fn characteristic_integral(&self, phi0: f64, len: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(wt, wp, c)| {
                let w = wt + wp;
                let z = c * Complex64::from_polar(1.0, wp * phi0);
                if w.abs() < 1e-14 {
                    z.re * len
                } else {
                    let e = (Complex64::from_polar(1.0, w * len) - 1.0) / Complex64::new(0.0, w);
                    (z * e).re
                }
            })
            .sum()
    }
}
