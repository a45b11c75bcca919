//! Domain types for the quartic Hamiltonian family, its polynomial
//! perturbations, level sets and the bookkeeping of cycle classes.
//!
//! The unperturbed system is
//! `C' = γ(S³ − S)`, `S' = −(C³ − C)` with first integral
//! `(C² − 1)² + γ(S² − 1)² = a`.  Cycles are addressed by a [`Seed`]
//! `(k, l, b)`: the equilibrium `(k, l)` the polar frame is centred on and
//! the abscissa `C(0) = b` of the cycle on the line `S = l`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{GtsError, Result};

/// One harmonic `cos·cos(2πjt/T) + sin·sin(2πjt/T)` of a [`TrigPoly`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub j: u32,
    pub cos: f64,
    pub sin: f64,
}

/// Trigonometric polynomial in time with base period `T`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigPoly {
    pub mean: f64,
    #[serde(default)]
    pub harmonics: Vec<Harmonic>,
}

impl TrigPoly {
    /// Time-independent polynomial.
    pub fn constant(mean: f64) -> Self {
        Self { mean, harmonics: Vec::new() }
    }

    /// Adds one harmonic and returns the polynomial.
    pub fn with_harmonic(mut self, j: u32, cos: f64, sin: f64) -> Self {
        self.harmonics.push(Harmonic { j, cos, sin });
        self
    }

    /// Value at time `t` for base period `period`.
    pub fn eval(&self, t: f64, period: f64) -> f64 {
        let mut v = self.mean;
        for h in &self.harmonics {
            let turns = (h.j as f64 * t / period).rem_euclid(1.0);
            let (s, c) = (2.0 * PI * turns).sin_cos();
            v += h.cos * c + h.sin * s;
        }
        v
    }

    /// Largest harmonic index with a nonzero coefficient.
    pub fn max_harmonic(&self) -> u32 {
        self.harmonics
            .iter()
            .filter(|h| h.cos != 0.0 || h.sin != 0.0)
            .map(|h| h.j)
            .max()
            .unwrap_or(0)
    }

    /// True when every harmonic coefficient vanishes.
    pub fn is_constant(&self) -> bool {
        self.max_harmonic() == 0
    }
}

/// Exponent pair `(m, n)` of the monomial `x^m y^n`.
pub type Monomial = (u32, u32);

/// Polynomial perturbation with time-periodic coefficients.
///
/// `x`/`y` hold the leading blocks `X₀`, `Y₀`; `x1`/`y1` hold the
/// first-order blocks `X₁`, `Y₁` multiplying an extra factor of `ε`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Perturbation {
    pub x: BTreeMap<Monomial, TrigPoly>,
    pub y: BTreeMap<Monomial, TrigPoly>,
    pub x1: BTreeMap<Monomial, TrigPoly>,
    pub y1: BTreeMap<Monomial, TrigPoly>,
    pub degree_bound: u32,
}

impl Perturbation {
    /// The zero perturbation.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a perturbation from leading blocks and derives the degree bound.
    pub fn new(x: BTreeMap<Monomial, TrigPoly>, y: BTreeMap<Monomial, TrigPoly>) -> Self {
        let mut p = Self { x, y, ..Self::default() };
        p.degree_bound = p.max_degree();
        p
    }

    /// Largest total degree `m + n` over all stored monomials.
    pub fn max_degree(&self) -> u32 {
        self.blocks()
            .iter()
            .flat_map(|b| b.keys())
            .map(|(m, n)| m + n)
            .max()
            .unwrap_or(0)
    }

    fn blocks(&self) -> [&BTreeMap<Monomial, TrigPoly>; 4] {
        [&self.x, &self.y, &self.x1, &self.y1]
    }

    /// Largest time harmonic present in any coefficient.
    pub fn max_harmonic(&self) -> u32 {
        self.blocks()
            .iter()
            .flat_map(|b| b.values())
            .map(TrigPoly::max_harmonic)
            .max()
            .unwrap_or(0)
    }

    /// Copy in which every coefficient is replaced by its time mean.
    pub fn means_only(&self) -> Self {
        let strip = |b: &BTreeMap<Monomial, TrigPoly>| {
            b.iter().map(|(k, v)| (*k, TrigPoly::constant(v.mean))).collect()
        };
        Self {
            x: strip(&self.x),
            y: strip(&self.y),
            x1: strip(&self.x1),
            y1: strip(&self.y1),
            degree_bound: self.degree_bound,
        }
    }

    /// Coefficients frozen at time `t`.
    pub fn at_time(&self, t: f64, period: f64) -> FrozenPerturbation {
        let freeze = |b: &BTreeMap<Monomial, TrigPoly>| -> Vec<(u32, u32, f64)> {
            b.iter()
                .map(|(&(m, n), p)| (m, n, p.eval(t, period)))
                .filter(|&(_, _, c)| c != 0.0)
                .collect()
        };
        FrozenPerturbation {
            x: freeze(&self.x),
            y: freeze(&self.y),
            x1: freeze(&self.x1),
            y1: freeze(&self.y1),
        }
    }

    /// Coefficients replaced by their time means.
    pub fn mean_frozen(&self) -> FrozenPerturbation {
        let freeze = |b: &BTreeMap<Monomial, TrigPoly>| -> Vec<(u32, u32, f64)> {
            b.iter()
                .map(|(&(m, n), p)| (m, n, p.mean))
                .filter(|&(_, _, c)| c != 0.0)
                .collect()
        };
        FrozenPerturbation {
            x: freeze(&self.x),
            y: freeze(&self.y),
            x1: freeze(&self.x1),
            y1: freeze(&self.y1),
        }
    }
}

/// Polynomial perturbation with numeric coefficients at one instant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrozenPerturbation {
    pub x: Vec<(u32, u32, f64)>,
    pub y: Vec<(u32, u32, f64)>,
    pub x1: Vec<(u32, u32, f64)>,
    pub y1: Vec<(u32, u32, f64)>,
}

fn ipow(v: f64, e: u32) -> f64 {
    v.powi(e as i32)
}

/// Value, x-partial and y-partial of `Σ c x^m y^n`.
pub fn poly_with_partials(terms: &[(u32, u32, f64)], x: f64, y: f64) -> (f64, f64, f64) {
    let mut v = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for &(m, n, c) in terms {
        let xm = ipow(x, m);
        let yn = ipow(y, n);
        v += c * xm * yn;
        if m > 0 {
            vx += c * m as f64 * ipow(x, m - 1) * yn;
        }
        if n > 0 {
            vy += c * n as f64 * xm * ipow(y, n - 1);
        }
    }
    (v, vx, vy)
}

/// Value of `Σ c x^m y^n`.
pub fn poly_value(terms: &[(u32, u32, f64)], x: f64, y: f64) -> f64 {
    terms.iter().map(|&(m, n, c)| c * ipow(x, m) * ipow(y, n)).sum()
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    m: u32,
    n: u32,
    #[serde(default)]
    mean: f64,
    #[serde(default)]
    harmonics: Vec<Harmonic>,
}

#[derive(Serialize, Deserialize)]
struct PerturbationRecord {
    #[serde(default)]
    x: Vec<TermRecord>,
    #[serde(default)]
    y: Vec<TermRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    x1: Vec<TermRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    y1: Vec<TermRecord>,
}

fn to_records(b: &BTreeMap<Monomial, TrigPoly>) -> Vec<TermRecord> {
    b.iter()
        .map(|(&(m, n), p)| TermRecord { m, n, mean: p.mean, harmonics: p.harmonics.clone() })
        .collect()
}

fn from_records(r: Vec<TermRecord>) -> BTreeMap<Monomial, TrigPoly> {
    let mut out: BTreeMap<Monomial, TrigPoly> = BTreeMap::new();
    for t in r {
        let e = out.entry((t.m, t.n)).or_default();
        e.mean += t.mean;
        e.harmonics.extend(t.harmonics);
    }
    out
}

impl Serialize for Perturbation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PerturbationRecord {
            x: to_records(&self.x),
            y: to_records(&self.y),
            x1: to_records(&self.x1),
            y1: to_records(&self.y1),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Perturbation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PerturbationRecord::deserialize(d)?;
        let mut p = Perturbation {
            x: from_records(r.x),
            y: from_records(r.y),
            x1: from_records(r.x1),
            y1: from_records(r.y1),
            degree_bound: 0,
        };
        p.degree_bound = p.max_degree();
        Ok(p)
    }
}

fn default_eps_max() -> f64 {
    1.0
}

/// One instance of the perturbed system family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub gamma: f64,
    #[serde(rename = "T")]
    pub period: f64,
    pub nu: u8,
    pub sigma: f64,
    #[serde(default = "default_eps_max")]
    pub eps_max: f64,
    pub perturbation: Perturbation,
    #[serde(default)]
    pub autonomous: bool,
}

impl SystemSpec {
    /// Builds and validates a system description.
    pub fn new(
        gamma: f64,
        period: f64,
        nu: u8,
        sigma: f64,
        perturbation: Perturbation,
    ) -> Result<Self> {
        let autonomous = perturbation.max_harmonic() == 0;
        let spec = Self { gamma, period, nu, sigma, eps_max: 1.0, perturbation, autonomous };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the invariants of the description.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GtsError::InvalidSystem(m));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma {} not in (0,1]", self.gamma));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return bad(format!("period {} must be positive", self.period));
        }
        if self.nu > 1 {
            return bad(format!("nu {} must be 0 or 1", self.nu));
        }
        let floor = (1.0 + self.gamma.powf(-0.5)).sqrt();
        if !(self.sigma > floor) {
            return bad(format!("sigma {} must exceed {floor}", self.sigma));
        }
        if !(self.eps_max >= 0.0) {
            return bad(format!("eps_max {} must be nonnegative", self.eps_max));
        }
        if self.autonomous && self.perturbation.max_harmonic() != 0 {
            return bad("autonomous system with time-dependent coefficients".into());
        }
        if self.perturbation.max_degree() > self.perturbation.degree_bound {
            return bad("monomial exceeds degree bound".into());
        }
        Ok(())
    }

    /// Parses and validates a JSON description.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SystemSpec = serde_json::from_str(text)
            .map_err(|e| GtsError::InvalidSystem(format!("JSON: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Serializes the description as pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system description serializes")
    }

    /// `r^σ`, the largest admissible outer abscissa.
    pub fn r_sigma(&self) -> f64 {
        r_sigma(self.gamma, self.sigma)
    }
}

/// Polar frame centre and initial abscissa of a candidate cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub k: i8,
    pub l: i8,
    pub b: f64,
}

impl Seed {
    pub fn new(k: i8, l: i8, b: f64) -> Self {
        Self { k, l, b }
    }

    /// Level value `a = (1 − |l|)γ + (b² − 1)²` of the cycle.
    pub fn level(&self, gamma: f64) -> f64 {
        (1.0 - self.l.abs() as f64) * gamma + (self.b * self.b - 1.0).powi(2)
    }
}

/// Cycle classes of the unperturbed system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CycleClass {
    ZeroInner,
    ZeroOuter,
    One,
    Two,
}

impl CycleClass {
    /// Short label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            CycleClass::ZeroInner => "0i",
            CycleClass::ZeroOuter => "0e",
            CycleClass::One => "1",
            CycleClass::Two => "2",
        }
    }

    /// Parses the labels produced by [`CycleClass::label`].
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "0i" | "ZeroInner" => Some(CycleClass::ZeroInner),
            "0e" | "ZeroOuter" => Some(CycleClass::ZeroOuter),
            "1" | "One" => Some(CycleClass::One),
            "2" | "Two" => Some(CycleClass::Two),
            _ => None,
        }
    }
}

/// Separatrix constants of the phase portrait for a given `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Separatrices {
    pub r_s: f64,
    pub l_s: f64,
    pub r_i: f64,
    pub r_e: f64,
    pub u_e: f64,
}

/// Separatrix constants for `γ ∈ (0, 1]`.
pub fn separatrices(gamma: f64) -> Separatrices {
    let sg = gamma.sqrt();
    let s1 = (1.0 - gamma).sqrt();
    Separatrices {
        r_s: (1.0 + sg).sqrt(),
        l_s: (1.0 - sg).sqrt(),
        r_i: (1.0 - s1).sqrt(),
        r_e: (1.0 + s1).sqrt(),
        u_e: (1.0 + 1.0 / sg).sqrt(),
    }
}

/// `r^σ = (1 + (γσ²(σ² − 2))^{1/2})^{1/2}`.
pub fn r_sigma(gamma: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    (1.0 + (gamma * s2 * (s2 - 2.0)).sqrt()).sqrt()
}

/// Separatrix constants, level value and per-cycle turning values.
///
/// Turning values are magnitudes; the sign of the corresponding abscissa
/// follows `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremals {
    pub r_s: f64,
    pub l_s: f64,
    pub r_i: f64,
    pub r_e: f64,
    pub u_e: f64,
    pub a: f64,
    pub r0_1e: Option<f64>,
    pub u0_1e: Option<f64>,
    pub u0_0e: Option<f64>,
    pub u0_0i: Option<f64>,
    pub l1_0: Option<f64>,
    pub l1_1: Option<f64>,
    pub r1_1: Option<f64>,
    pub u1_1: Option<f64>,
    pub l2_1: Option<f64>,
    pub lo2_1: Option<f64>,
    pub u2_1: Option<f64>,
}

/// `(C² − 1)² + γ(S² − 1)²`.
pub fn hamiltonian_level(c: f64, s: f64, gamma: f64) -> f64 {
    (c * c - 1.0).powi(2) + gamma * (s * s - 1.0).powi(2)
}

/// Vector field `(γ(S³ − S), −(C³ − C))` of the unperturbed system.
pub fn unperturbed_field(c: f64, s: f64, gamma: f64) -> (f64, f64) {
    (gamma * (s * s * s - s), -(c * c * c - c))
}

/// Right-hand side of the perturbed system including the factor `ε^ν`.
pub fn perturbed_field(t: f64, x: f64, y: f64, eps: f64, spec: &SystemSpec) -> Result<(f64, f64)> {
    let frozen = spec.perturbation.at_time(t, spec.period);
    perturbed_field_frozen(x, y, eps, spec, &frozen)
}

/// Same as [`perturbed_field`] with coefficients already frozen in time.
pub fn perturbed_field_frozen(
    x: f64,
    y: f64,
    eps: f64,
    spec: &SystemSpec,
    frozen: &FrozenPerturbation,
) -> Result<(f64, f64)> {
    if x.abs() > spec.sigma || y.abs() > spec.sigma || !x.is_finite() || !y.is_finite() {
        return Err(GtsError::DomainExceeded { x, y, sigma: spec.sigma });
    }
    let (u0, v0) = unperturbed_field(x, y, spec.gamma);
    let mut px = poly_value(&frozen.x, x, y);
    let mut py = poly_value(&frozen.y, x, y);
    if !frozen.x1.is_empty() || !frozen.y1.is_empty() {
        px += eps * poly_value(&frozen.x1, x, y);
        py += eps * poly_value(&frozen.y1, x, y);
    }
    let scale = if spec.nu == 1 { eps } else { 1.0 };
    Ok(((u0 + eps * px) * scale, (v0 + eps * py) * scale))
}

fn invalid(seed: &Seed, reason: impl Into<String>) -> GtsError {
    GtsError::InvalidSeed { k: seed.k, l: seed.l, b: seed.b, reason: reason.into() }
}

/// Class of the cycle through `(b, l)` encircling `(k, l)`.
pub fn classify(seed: &Seed, gamma: f64) -> Result<CycleClass> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(GtsError::GammaOutOfRange(gamma));
    }
    if !seed.b.is_finite() || seed.k.abs() > 1 || seed.l.abs() > 1 {
        return Err(invalid(seed, "k, l must lie in {-1,0,1} and b must be finite"));
    }
    let sep = separatrices(gamma);
    let kb = seed.k as f64 * seed.b;
    match (seed.k.abs(), seed.l.abs()) {
        (0, 0) => {
            if seed.b > 0.0 && seed.b < sep.r_i {
                Ok(CycleClass::ZeroInner)
            } else if seed.b > sep.r_e {
                Ok(CycleClass::ZeroOuter)
            } else {
                Err(invalid(seed, "class 0 requires b in (0, r_i) or b > r_e"))
            }
        }
        (1, 0) if kb > 1.0 && kb < sep.r_e => Ok(CycleClass::One),
        (1, 0) => Err(invalid(seed, "class 1 requires kb in (1, r_e)")),
        (1, 1) if kb > 1.0 && kb < sep.r_s => Ok(CycleClass::Two),
        (1, 1) => Err(invalid(seed, "class 2 requires kb in (1, r_s)")),
        _ => Err(invalid(seed, "(k, l) = (0, ±1) is excluded")),
    }
}

/// Separatrix constants, level value and turning values of the seed's cycle.
pub fn extremals(seed: &Seed, gamma: f64) -> Result<Extremals> {
    let class = classify(seed, gamma)?;
    let sep = separatrices(gamma);
    let a = seed.level(gamma);
    let sa = a.sqrt();
    let mut e = Extremals {
        r_s: sep.r_s,
        l_s: sep.l_s,
        r_i: sep.r_i,
        r_e: sep.r_e,
        u_e: sep.u_e,
        a,
        r0_1e: None,
        u0_1e: None,
        u0_0e: None,
        u0_0i: None,
        l1_0: None,
        l1_1: None,
        r1_1: None,
        u1_1: None,
        l2_1: None,
        lo2_1: None,
        u2_1: None,
    };
    let up = (1.0 + (a / gamma).sqrt()).sqrt();
    match class {
        CycleClass::ZeroInner => {
            e.u0_0i = Some((1.0 - ((a - 1.0) / gamma).sqrt()).sqrt());
        }
        CycleClass::ZeroOuter => {
            e.r0_1e = Some((1.0 + sa).sqrt());
            e.u0_1e = Some(up);
            e.u0_0e = Some((1.0 + ((a - 1.0) / gamma).sqrt()).sqrt());
        }
        CycleClass::One => {
            e.l1_0 = Some((1.0 - (a - gamma).sqrt()).sqrt());
            e.l1_1 = Some((1.0 - sa).sqrt());
            e.r1_1 = Some((1.0 + sa).sqrt());
            e.u1_1 = Some(up);
        }
        CycleClass::Two => {
            e.l2_1 = Some((1.0 - sa).sqrt());
            e.lo2_1 = Some((1.0 - (a / gamma).sqrt()).sqrt());
            e.u2_1 = Some(up);
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn level_at_centre_and_origin() {
        assert_eq!(hamiltonian_level(1.0, 1.0, 0.5), 0.0);
        assert_relative_eq!(hamiltonian_level(0.0, 0.0, 0.5), 1.5);
    }

    #[test]
    fn level_at_outer_separatrix_abscissa() {
        let re = separatrices(0.5).r_e;
        assert_relative_eq!(hamiltonian_level(re, 0.0, 0.5), 1.0, epsilon = 1e-13);
        let seed = Seed::new(0, 0, re);
        assert_relative_eq!(seed.level(0.5), 1.0, epsilon = 1e-13);
        assert_relative_eq!(hamiltonian_level(0.0, 1.0, 0.5), 1.0);
    }

    #[test]
    fn field_values() {
        assert_eq!(unperturbed_field(1.0, 1.0, 0.5), (0.0, 0.0));
        assert_eq!(unperturbed_field(0.0, 1.0, 0.5), (0.0, 0.0));
        let (u, v) = unperturbed_field(1.5, 0.0, 0.5);
        assert_eq!(u, 0.0);
        assert_relative_eq!(v, -1.875);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&Seed::new(0, 0, 0.2), 0.5).unwrap(), CycleClass::ZeroInner);
        assert_eq!(classify(&Seed::new(0, 0, 1.808), 0.5).unwrap(), CycleClass::ZeroOuter);
        assert_eq!(classify(&Seed::new(1, 1, 1.27), 0.5).unwrap(), CycleClass::Two);
        assert_eq!(classify(&Seed::new(-1, 0, -1.13), 0.5).unwrap(), CycleClass::One);
        assert!(classify(&Seed::new(0, 1, 0.5), 0.5).is_err());
        let re = separatrices(0.5).r_e;
        assert!(classify(&Seed::new(0, 0, re), 0.5).is_err());
        assert!(classify(&Seed::new(1, 0, 1.0), 0.5).is_err());
    }

    #[test]
    fn separatrix_constants_at_half() {
        let s = separatrices(0.5);
        assert_relative_eq!(s.r_i, 2f64.powf(-0.25) * (2f64.sqrt() - 1.0).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(s.r_e, 2f64.powf(-0.25) * (2f64.sqrt() + 1.0).sqrt(), epsilon = 1e-14);
        assert!((s.r_i - 0.5412).abs() < 5e-4);
        assert!((s.r_e - 1.306).abs() < 1e-3);
        let rs = r_sigma(0.5, 6f64.sqrt());
        assert_relative_eq!(rs, (1.0 + 12f64.sqrt()).sqrt(), epsilon = 1e-15);
        assert!((rs - 2.113).abs() < 1e-3);
    }

    #[test]
    fn extremal_turning_values_satisfy_level() {
        let g = 0.5;
        let seed = Seed::new(1, 0, 1.13);
        let e = extremals(&seed, g).unwrap();
        let a = e.a;
        assert_relative_eq!(hamiltonian_level(e.l1_0.unwrap(), 0.0, g), a, epsilon = 1e-13);
        assert_relative_eq!(hamiltonian_level(e.l1_1.unwrap(), 1.0, g), a, epsilon = 1e-13);
        assert_relative_eq!(hamiltonian_level(e.r1_1.unwrap(), 1.0, g), a, epsilon = 1e-13);
        assert_relative_eq!(hamiltonian_level(1.0, e.u1_1.unwrap(), g), a, epsilon = 1e-13);
        let e2 = extremals(&Seed::new(1, 1, 1.27), g).unwrap();
        assert_relative_eq!(hamiltonian_level(e2.l2_1.unwrap(), 1.0, g), e2.a, epsilon = 1e-13);
        assert_relative_eq!(hamiltonian_level(1.0, e2.lo2_1.unwrap(), g), e2.a, epsilon = 1e-13);
        let e0 = extremals(&Seed::new(0, 0, 1.8), g).unwrap();
        assert_relative_eq!(hamiltonian_level(e0.r0_1e.unwrap(), 1.0, g), e0.a, epsilon = 1e-13);
        assert_relative_eq!(hamiltonian_level(0.0, e0.u0_0e.unwrap(), g), e0.a, epsilon = 1e-13);
        assert_relative_eq!(hamiltonian_level(1.0, e0.u0_1e.unwrap(), g), e0.a, epsilon = 1e-13);
        let ei = extremals(&Seed::new(0, 0, 0.2), g).unwrap();
        assert_relative_eq!(hamiltonian_level(0.0, ei.u0_0i.unwrap(), g), ei.a, epsilon = 1e-13);
    }

    #[test]
    fn trig_poly_periodicity() {
        let p = TrigPoly::constant(0.3).with_harmonic(1, 1.0, -2.0).with_harmonic(3, 0.5, 0.25);
        for &t in &[0.0, 0.7, 2.1, -4.0] {
            let a = p.eval(t, 2.0 * PI);
            let b = p.eval(t + 2.0 * PI, 2.0 * PI);
            assert!((a - b).abs() < 1e-13);
        }
        assert_eq!(p.max_harmonic(), 3);
    }

    #[test]
    fn json_round_trip() {
        let mut y = BTreeMap::new();
        y.insert((0, 1), TrigPoly::constant(-3.314).with_harmonic(1, 0.0, 1.0));
        let spec = SystemSpec::new(0.5, 2.0 * PI, 0, 3.0, Perturbation::new(BTreeMap::new(), y)).unwrap();
        let text = spec.to_json();
        assert!(text.contains("\"T\""));
        let back = SystemSpec::from_json(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn domain_check() {
        let spec = SystemSpec::new(0.5, 1.0, 0, 2.0, Perturbation::zero()).unwrap();
        assert!(matches!(
            perturbed_field(0.0, 2.5, 0.0, 0.0, &spec),
            Err(GtsError::DomainExceeded { .. })
        ));
    }
}
