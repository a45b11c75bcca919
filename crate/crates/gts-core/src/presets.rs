//! Ready-made systems: the eleven-root example with slow and fast time,
//! its autonomous specialisation, and the rescaled cubic system with the
//! parameter `λ`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use crate::model::{Perturbation, SystemSpec, TrigPoly};

/// `τ₀`, coefficient of `y` in `Y₀`.
pub const TAU0: f64 = -3.314;
/// `τ₁`, coefficient of `y³` in `Y₀`.
pub const TAU1: f64 = -0.361;
/// `τ₂`, coefficient of `x²y` in `Y₀`.
pub const TAU2: f64 = 4.493;

fn sigma() -> f64 {
    6f64.sqrt() + 1e-6
}

fn build(nu: u8, x: BTreeMap<(u32, u32), TrigPoly>, y: BTreeMap<(u32, u32), TrigPoly>) -> SystemSpec {
    SystemSpec::new(0.5, 2.0 * PI, nu, sigma(), Perturbation::new(x, y)).expect("preset is valid")
}

/// Mean coefficients `Ȳ^{(0,1)} = τ₀`, `Ȳ^{(0,3)} = τ₁`, `Ȳ^{(2,1)} = τ₂` with fast time.
pub fn coeff_fast() -> SystemSpec {
    let mut spec = coeff_autonomous();
    spec.nu = 1;
    spec
}

/// `X₀ = cos t`, `Y₀ = τ₀(y + sin t) + τ₁y³ + τ₂(x²y + sin t)` with slow time.
pub fn coeff_slow() -> SystemSpec {
    let mut x = BTreeMap::new();
    x.insert((0, 0), TrigPoly::constant(0.0).with_harmonic(1, 1.0, 0.0));
    let mut y = BTreeMap::new();
    y.insert((0, 0), TrigPoly::constant(0.0).with_harmonic(1, 0.0, TAU0 + TAU2));
    y.insert((0, 1), TrigPoly::constant(TAU0));
    y.insert((0, 3), TrigPoly::constant(TAU1));
    y.insert((2, 1), TrigPoly::constant(TAU2));
    build(0, x, y)
}

/// Autonomous system `Y₀ = τ₀y + τ₂x²y + τ₁y³`, `X₀ = 0`.
pub fn coeff_autonomous() -> SystemSpec {
    let mut y = BTreeMap::new();
    y.insert((0, 1), TrigPoly::constant(TAU0));
    y.insert((0, 3), TrigPoly::constant(TAU1));
    y.insert((2, 1), TrigPoly::constant(TAU2));
    build(0, BTreeMap::new(), y)
}

/// Cubic system `u̇ = v(1 − v²) + εu(u² − 3v² − λ)`,
/// `v̇ = −u(1 − 2u²) + εv(u² − 3v² − λ)` rewritten with
/// `t = √2 τ`, `x = v`, `y = √2 u`:
/// `X₀ = 2^{-1/2}x(−3x² + y²/2 − λ)`, `Y₀ = 2^{-1/2}y(−3x² + y²/2 − λ)`.
pub fn cubic_lambda(lambda: f64) -> SystemSpec {
    let c = 1.0 / SQRT_2;
    let mut x = BTreeMap::new();
    x.insert((3, 0), TrigPoly::constant(-3.0 * c));
    x.insert((1, 2), TrigPoly::constant(0.5 * c));
    x.insert((1, 0), TrigPoly::constant(-lambda * c));
    let mut y = BTreeMap::new();
    y.insert((2, 1), TrigPoly::constant(-3.0 * c));
    y.insert((0, 3), TrigPoly::constant(0.5 * c));
    y.insert((0, 1), TrigPoly::constant(-lambda * c));
    build(0, x, y)
}

/// Looks a preset up by name: `coeff0`, `coeff1`, `sa`, or `cubic:<λ>`.
pub fn by_name(name: &str) -> Option<SystemSpec> {
    match name {
        "coeff0" => Some(coeff_slow()),
        "coeff1" => Some(coeff_fast()),
        "sa" => Some(coeff_autonomous()),
        _ => name.strip_prefix("cubic:").and_then(|v| v.parse().ok()).map(cubic_lambda),
    }
}
