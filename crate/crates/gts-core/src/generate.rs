//! The generating equation `R̄(b) = 0`: direct and moment evaluations of
//! `R̄`, root scanning, the admissibility battery, and the first-order
//! prediction of the invariant torus or limit cycle.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::avg2::{k_from_secondary, secondary_fields, siegel_check, Harmonics, KMode, Nondegeneracy, SecondaryFields, SiegelReport};
use crate::error::{GtsError, Result};
use crate::model::{classify, extremals, separatrices, CycleClass, Seed, SystemSpec};
use crate::monotone::{alpha, class1_region, practical_bounds, practical_bounds_narrow, AlphaProfile, SignPattern};
use crate::orbit::{parametrize, period_quadrature, s_branch, Branch, CycleParam, LevelCurve};
use crate::quad::TanhSinh;
use crate::spectral::TrigInterp;
use crate::transform::{beta_data, polar_coeffs, pullbacks, BetaData, PolarCoeffs, PullbackSet};

/// `R̄` by averaging `C'Y₀ − S'X₀` over a `t`-grid and the sampled cycle.
pub fn rbar_direct(seed: &Seed, spec: &SystemSpec, n_samples: usize) -> Result<f64> {
    let cyc = parametrize(seed, spec.gamma, n_samples)?;
    let nt = 2 * spec.perturbation.max_harmonic() as usize + 2;
    let mut acc = 0.0;
    for it in 0..nt {
        let fr = spec.perturbation.at_time(it as f64 * spec.period / nt as f64, spec.period);
        for i in 0..cyc.len() {
            let (c, s) = (cyc.c[i], cyc.s[i]);
            acc += cyc.dc[i] * crate::model::poly_value(&fr.y, c, s) - cyc.ds[i] * crate::model::poly_value(&fr.x, c, s);
        }
    }
    Ok(acc / (nt * cyc.len()) as f64)
}

/// Combined mean coefficients `P^{(m,n)} = ((m+1)/n)X̄^{(m+1,n−1)} + Ȳ^{(m,n)}`, `n ≥ 1`.
pub fn p_coefficients(spec: &SystemSpec) -> BTreeMap<(u32, u32), f64> {
    let mut p = BTreeMap::new();
    for (&(m, n), c) in &spec.perturbation.x {
        if m >= 1 && c.mean != 0.0 {
            *p.entry((m - 1, n + 1)).or_insert(0.0) += m as f64 / (n + 1) as f64 * c.mean;
        }
    }
    for (&(m, n), c) in &spec.perturbation.y {
        if n >= 1 && c.mean != 0.0 {
            *p.entry((m, n)).or_insert(0.0) += c.mean;
        }
    }
    p
}

/// `J` integrals of one cycle and the coefficients they contract with.
#[derive(Debug, Clone, Serialize)]
pub struct MomentTable {
    pub class: CycleClass,
    pub omega: f64,
    /// Prefactor `4`, `2` or `1` of `R̄ = (prefactor/ω) Σ P J`.
    pub prefactor: f64,
    /// `J^{mn}` keyed by the `J` index pair.
    pub j: BTreeMap<(u32, u32), f64>,
    /// `P^{(m,n)}` keyed by the monomial exponents.
    pub p: BTreeMap<(u32, u32), f64>,
}

fn seg(quad: &TanhSinh, a: f64, gamma: f64, from: f64, to: f64, br: Branch, h: &dyn Fn(f64, f64) -> f64) -> Result<f64> {
    let mut err = None;
    let v = quad.integrate_plain(from, to, |u| match s_branch(u * u, a, gamma, br) {
        Ok(s) => h(u, s),
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(v.value),
    }
}

/// The class-specific integral `J^{mn}` of the seed's cycle.
pub fn j_integral(seed: &Seed, gamma: f64, m: u32, n: u32, quad: &TanhSinh) -> Result<f64> {
    let class = classify(seed, gamma)?;
    let e = extremals(seed, gamma)?;
    let a = e.a;
    let b = seed.b;
    let k = f64::from(seed.k);
    let l = f64::from(seed.l);
    match class {
        CycleClass::ZeroOuter => {
            let h = |u: f64, s: f64| u.powi(2 * m as i32) * s.powi(2 * n as i32 + 1);
            let r = e.r0_1e.unwrap_or(0.0);
            Ok(seg(quad, a, gamma, 0.0, r, Branch::Plus, &h)? + seg(quad, a, gamma, r, b, Branch::Minus, &h)?)
        }
        CycleClass::ZeroInner => {
            let h = |u: f64, s: f64| u.powi(2 * m as i32) * s.powi(2 * n as i32 + 1);
            seg(quad, a, gamma, b, 0.0, Branch::Minus, &h)
        }
        CycleClass::One => {
            let h = |u: f64, s: f64| u.powi(m as i32) * s.powi(2 * n as i32 + 1);
            let (l0, l1, r1) = (e.l1_0.unwrap_or(0.0), e.l1_1.unwrap_or(0.0), e.r1_1.unwrap_or(0.0));
            let v = seg(quad, a, gamma, k * l0, k * l1, Branch::Minus, &h)?
                + seg(quad, a, gamma, k * l1, k * r1, Branch::Plus, &h)?
                + seg(quad, a, gamma, k * r1, b, Branch::Minus, &h)?;
            Ok(v / k)
        }
        CycleClass::Two => {
            let l2 = e.l2_1.unwrap_or(0.0);
            let mut err = None;
            let v = quad.integrate_plain(k * l2, b, |u| {
                match (s_branch(u * u, a, gamma, Branch::Plus), s_branch(u * u, a, gamma, Branch::Minus)) {
                    (Ok(sp), Ok(sm)) => u.powi(m as i32) * (sp.powi(n as i32 + 1) - sm.powi(n as i32 + 1)),
                    (Err(e), _) | (_, Err(e)) => {
                        err.get_or_insert(e);
                        0.0
                    }
                }
            })?;
            if let Some(e) = err {
                return Err(e);
            }
            Ok(l.powi(n as i32) * v.value / k)
        }
    }
}

/// Builds the moment table of the seed's cycle for the perturbation means.
pub fn moment_table(seed: &Seed, spec: &SystemSpec) -> Result<MomentTable> {
    let class = classify(seed, spec.gamma)?;
    let omega = period_quadrature(seed, spec.gamma)?;
    let quad = TanhSinh::default();
    let p = p_coefficients(spec);
    let mut j = BTreeMap::new();
    let prefactor = match class {
        CycleClass::ZeroInner | CycleClass::ZeroOuter => 4.0,
        CycleClass::One => 2.0,
        CycleClass::Two => 1.0,
    };
    for &(pm, pn) in p.keys() {
        let key = match class {
            CycleClass::ZeroInner | CycleClass::ZeroOuter if pm % 2 == 0 && pn % 2 == 1 => Some((pm / 2, (pn - 1) / 2)),
            CycleClass::One if pn % 2 == 1 => Some((pm, (pn - 1) / 2)),
            CycleClass::Two => Some((pm, pn - 1)),
            _ => None,
        };
        if let Some((jm, jn)) = key {
            j.insert((jm, jn), j_integral(seed, spec.gamma, jm, jn, &quad)?);
        }
    }
    Ok(MomentTable { class, omega, prefactor, j, p })
}

impl MomentTable {
    /// `(prefactor/ω) Σ P^{(m,n)} J` over the contributing monomials.
    pub fn rbar(&self) -> f64 {
        let mut acc = 0.0;
        for (&(pm, pn), &pv) in &self.p {
            let key = match self.class {
                CycleClass::ZeroInner | CycleClass::ZeroOuter if pm % 2 == 0 && pn % 2 == 1 => Some((pm / 2, (pn - 1) / 2)),
                CycleClass::One if pn % 2 == 1 => Some((pm, (pn - 1) / 2)),
                CycleClass::Two => Some((pm, pn - 1)),
                _ => None,
            };
            if let Some(jk) = key {
                acc += pv * self.j[&jk];
            }
        }
        self.prefactor * acc / self.omega
    }
}

/// `R̄` from the class-specific `J` integrals.
pub fn rbar_moments(seed: &Seed, spec: &SystemSpec) -> Result<f64> {
    Ok(moment_table(seed, spec)?.rbar())
}

/// `R̄ = ω⁻¹ Σ P^{(m,n)} ∮ C^m S^n dC` with directed moments along the
/// arc decomposition of the level curve.
pub fn rbar_directed_moments(seed: &Seed, spec: &SystemSpec) -> Result<f64> {
    let lc = LevelCurve::new(seed, spec.gamma)?;
    let quad = TanhSinh::default();
    let omega = lc.period(&quad)?;
    let mut acc = 0.0;
    for (&(m, n), &p) in &p_coefficients(spec) {
        acc += p * lc.moment(&quad, m, n)?;
    }
    Ok(acc / omega)
}

/// Which bounds gate class-1 seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Class1Bounds {
    /// `(b_d, b_u)` with `b_d = 1.15 − (0.8 − γ)^{1/2}`.
    Printed,
    /// `(b_d, b_u)` with `b_d = 1.15 − 0.16(0.8 − γ)^{1/2}`.
    Narrow,
    /// Scanned `(b_p, b_m)`.
    Computed,
}

/// Options of [`find_roots`].
#[derive(Debug, Clone, Serialize)]
pub struct RootOptions {
    pub class_filter: Option<CycleClass>,
    pub grid: f64,
    pub mode: Option<KMode>,
    pub class1_bounds: Class1Bounds,
    /// Upper scan limit for class 0ᵉ in addition to `r^σ`.
    pub outer_cap: Option<f64>,
    pub n_samples: usize,
    pub harmonics: Harmonics,
    pub siegel_n_max: usize,
    /// Skip the `K`/Siegel battery.
    pub roots_only: bool,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            class_filter: None,
            grid: 1e-3,
            mode: None,
            class1_bounds: Class1Bounds::Printed,
            outer_cap: None,
            n_samples: 1024,
            harmonics: Harmonics::default(),
            siegel_n_max: 200,
            roots_only: false,
        }
    }
}

/// A located root of the generating equation with its verdict.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibleRoot {
    pub seed: Seed,
    pub class: CycleClass,
    pub omega_star: f64,
    pub bracket: (f64, f64),
    pub rbar_at_root: f64,
    pub k: Option<Nondegeneracy>,
    pub k_value: Option<f64>,
    pub siegel: Option<SiegelReport>,
    pub admissible: bool,
    pub reasons: Vec<String>,
}

/// Default `K` mode of a system.
pub fn default_mode(spec: &SystemSpec) -> KMode {
    if spec.nu == 1 {
        KMode::Fast
    } else if spec.autonomous {
        KMode::Autonomous
    } else {
        KMode::Slow
    }
}

/// Scan families `(k, l, lo, hi)` of seeds with `b` ranging over `(lo, hi)`.
pub fn scan_families(spec: &SystemSpec, opts: &RootOptions) -> Result<Vec<(i8, i8, f64, f64)>> {
    let g = spec.gamma;
    let sep = separatrices(g);
    let mut fam = Vec::new();
    let want = |c: CycleClass| opts.class_filter.is_none_or(|f| f == c);
    if want(CycleClass::ZeroInner) {
        fam.push((0, 0, 0.0, sep.r_i));
    }
    if want(CycleClass::ZeroOuter) {
        let hi = spec.r_sigma().min(opts.outer_cap.unwrap_or(f64::INFINITY));
        fam.push((0, 0, sep.r_e, hi));
    }
    if want(CycleClass::One) {
        let (lo, hi) = match opts.class1_bounds {
            Class1Bounds::Printed => practical_bounds(g)?,
            Class1Bounds::Narrow => practical_bounds_narrow(g)?,
            Class1Bounds::Computed => {
                let r = class1_region(g, 1e-3)?;
                (r.b_p.unwrap_or(1.0), r.b_m.unwrap_or(sep.r_e))
            }
        };
        let (lo, hi) = (lo.max(1.0), hi.min(sep.r_e));
        for k in [1i8, -1] {
            fam.push((k, 0, lo, hi));
        }
    }
    if want(CycleClass::Two) {
        for k in [1i8, -1] {
            for l in [1i8, -1] {
                fam.push((k, l, 1.0, sep.r_s));
            }
        }
    }
    Ok(fam)
}

fn bisect_root<F: Fn(f64) -> Result<f64>>(f: &F, mut lo: f64, mut hi: f64, mut flo: f64) -> Result<f64> {
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Roots of `R̄(b) = 0` on every class interval, refined to `10⁻¹²` and
/// put through the admissibility battery. The residual test is
/// relative to the local slope `|dR̄/db|`.
pub fn find_roots(spec: &SystemSpec, opts: &RootOptions) -> Result<Vec<AdmissibleRoot>> {
    if opts.grid > 1e-2 || opts.grid <= 0.0 {
        return Err(GtsError::InvalidSystem(format!("scan grid {} outside (0, 1e-2]", opts.grid)));
    }
    let mut brackets = Vec::new();
    for (k, l, lo, hi) in scan_families(spec, opts)? {
        let sgn = if k == 0 { 1.0 } else { f64::from(k) };
        let n = ((hi - lo) / opts.grid).floor() as usize;
        let pts: Vec<f64> = (0..n).map(|i| lo + (i as f64 + 0.5) * opts.grid).filter(|&x| x < hi).collect();
        let vals: Vec<Option<f64>> = pts
            .par_iter()
            .map(|&x| rbar_moments(&Seed::new(k, l, sgn * x), spec).ok())
            .collect();
        for i in 1..pts.len() {
            if let (Some(a), Some(b)) = (vals[i - 1], vals[i]) {
                if a * b < 0.0 {
                    brackets.push((k, l, sgn, pts[i - 1], pts[i], a));
                }
            }
        }
    }
    brackets
        .par_iter()
        .map(|&(k, l, sgn, lo, hi, flo)| {
            let f = |x: f64| rbar_moments(&Seed::new(k, l, sgn * x), spec);
            let x = bisect_root(&f, lo, hi, flo)?;
            let seed = Seed::new(k, l, sgn * x);
            assess_root(seed, spec, opts, (sgn * lo, sgn * hi))
        })
        .collect()
}

/// Admissibility battery for a refined root.
pub fn assess_root(seed: Seed, spec: &SystemSpec, opts: &RootOptions, bracket: (f64, f64)) -> Result<AdmissibleRoot> {
    let class = classify(&seed, spec.gamma)?;
    let omega_star = period_quadrature(&seed, spec.gamma)?;
    let rbar_at_root = rbar_moments(&seed, spec)?;
    let mut reasons = Vec::new();
    let probe = |d: f64| rbar_moments(&Seed::new(seed.k, seed.l, seed.b + d), spec);
    let slope = match (probe(-1e-4), probe(1e-4)) {
        (Ok(a), Ok(b)) if a * b < 0.0 => (b - a) / 2e-4,
        _ => {
            reasons.push("tangential".to_string());
            0.0
        }
    };
    if rbar_at_root.abs() > 1e-8 * slope.abs().max(1.0) {
        reasons.push(format!("residual {rbar_at_root:.2e}"));
    }
    let mut root = AdmissibleRoot {
        seed,
        class,
        omega_star,
        bracket,
        rbar_at_root,
        k: None,
        k_value: None,
        siegel: None,
        admissible: false,
        reasons,
    };
    if opts.roots_only {
        root.admissible = root.reasons.is_empty();
        return Ok(root);
    }
    let mode = opts.mode.unwrap_or_else(|| default_mode(spec));
    if mode == KMode::Slow {
        let s = siegel_check(omega_star, spec.period, opts.siegel_n_max, 1.0);
        if !s.pass {
            root.reasons.push("siegel".to_string());
        } else {
            root.reasons.push("siegel: finite scan only".to_string());
        }
        root.siegel = Some(s);
    }
    match analyse_root(&seed, spec, mode, opts.n_samples, opts.harmonics) {
        Ok(an) => {
            let nd = k_from_secondary(&an.secondary, an.cycle.omega);
            root.k_value = Some(match mode {
                KMode::Autonomous => an.cycle.omega * an.secondary.k_normalised,
                _ => an.secondary.k_normalised,
            });
            match nd {
                Ok(nd) => root.k = Some(nd),
                Err(_) => root.reasons.push("degenerate K".to_string()),
            }
        }
        Err(GtsError::NotMonotone { .. }) => root.reasons.push("alpha changes sign".to_string()),
        Err(GtsError::DegenerateK(k)) => {
            root.k_value = Some(k);
            root.reasons.push("degenerate K".to_string());
        }
        Err(e) => root.reasons.push(format!("{e}")),
    }
    root.admissible = root.reasons.iter().all(|r| r.starts_with("siegel: finite"));
    Ok(root)
}

/// Everything computed along a generating cycle.
#[derive(Debug, Clone, Serialize)]
pub struct RootAnalysis {
    pub seed: Seed,
    pub mode: KMode,
    pub cycle: CycleParam,
    pub alpha: AlphaProfile,
    pub coeffs: PolarCoeffs,
    pub beta: BetaData,
    pub pullbacks: PullbackSet,
    pub secondary: SecondaryFields,
}

/// Runs parametrization, polar coefficients, pullbacks and the secondary
/// averaging at `seed`.
pub fn analyse_root(seed: &Seed, spec: &SystemSpec, mode: KMode, n_samples: usize, harmonics: Harmonics) -> Result<RootAnalysis> {
    let cycle = parametrize(seed, spec.gamma, n_samples)?;
    let al = alpha(&cycle);
    if al.sign == SignPattern::Mixed {
        let lo = al.alpha.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = al.alpha.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return Err(GtsError::NotMonotone { min: lo, max: hi });
    }
    let coeffs = polar_coeffs(&cycle, &al, spec)?;
    let beta = beta_data(&cycle, &coeffs)?;
    let mh = spec.perturbation.max_harmonic() as usize;
    let nt = if mh == 0 { 4 } else { (4 * mh + 4).max(16) };
    let pb = pullbacks(&cycle, &al, &beta, spec, nt)?;
    let secondary = secondary_fields(&pb, &coeffs, mode, harmonics)?;
    Ok(RootAnalysis { seed: *seed, mode, cycle, alpha: al, coeffs, beta, pullbacks: pb, secondary })
}

/// Point `(x, y)` of the `O(ε)` approximation of the invariant surface:
/// `ρ = α⁻¹(ḡ + g̃(t, φ) + ĝ(φ))ε` substituted into the polar change.
pub fn torus_first_order(an: &RootAnalysis, eps: f64, t: f64, phi: f64) -> (f64, f64) {
    let w = an.cycle.omega;
    let c = TrigInterp::new(&an.cycle.c, w).eval(phi);
    let s = TrigInterp::new(&an.cycle.s, w).eval(phi);
    if eps == 0.0 {
        return (c, s);
    }
    let a = TrigInterp::new(&an.alpha.alpha, w).eval(phi);
    let sec = &an.secondary;
    let g = match an.mode {
        KMode::Slow => sec.g_bar + sec.g_tilde.eval(t, phi),
        _ => sec.g_bar + TrigInterp::new(&sec.g_hat, w).eval(phi),
    };
    let ups = g * eps / a;
    let k = f64::from(an.seed.k);
    let l = f64::from(an.seed.l);
    (c + (c - k) * ups, s + (s - l) * ups)
}

/// Predicted abscissa at `φ = 0` (on the line `S = l`).
pub fn predicted_abscissa(an: &RootAnalysis, eps: f64) -> f64 {
    torus_first_order(an, eps, 0.0, 0.0).0
}
