//! Random systems and seeds shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use gts_core::model::{separatrices, CycleClass, Perturbation, Seed, SystemSpec, TrigPoly};
use rand::rngs::StdRng;
use rand::Rng;

/// Values of `γ` used by the randomized sweeps.
pub const GAMMAS: [f64; 3] = [0.4, 0.5, 0.6];

/// Random cubic perturbation with at most one time harmonic per coefficient.
pub fn random_perturbation(rng: &mut StdRng, harmonics: bool) -> Perturbation {
    let mut blocks = [BTreeMap::new(), BTreeMap::new()];
    for block in &mut blocks {
        for m in 0..=3u32 {
            for n in 0..=(3 - m) {
                if rng.gen_bool(0.5) {
                    let mut p = TrigPoly::constant(rng.gen_range(-1.0..1.0));
                    if harmonics && rng.gen_bool(0.3) {
                        p = p.with_harmonic(rng.gen_range(1..=2), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    }
                    block.insert((m, n), p);
                }
            }
        }
    }
    let [x, y] = blocks;
    Perturbation::new(x, y)
}

/// Random system with `γ` drawn from [`GAMMAS`].
pub fn random_spec(rng: &mut StdRng, harmonics: bool) -> SystemSpec {
    let gamma = GAMMAS[rng.gen_range(0..GAMMAS.len())];
    SystemSpec::new(gamma, 2.0 * PI, 0, 3.0, random_perturbation(rng, harmonics)).unwrap()
}

/// Random seed of the requested class, kept `0.05` away from separatrices.
pub fn random_seed(rng: &mut StdRng, class: CycleClass, gamma: f64) -> Seed {
    let sep = separatrices(gamma);
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    match class {
        CycleClass::ZeroInner => Seed::new(0, 0, rng.gen_range(0.1..sep.r_i - 0.05)),
        CycleClass::ZeroOuter => Seed::new(0, 0, rng.gen_range(sep.r_e + 0.05..sep.r_e + 0.4)),
        CycleClass::One => Seed::new(sign, 0, f64::from(sign) * rng.gen_range(1.05..sep.r_e - 0.05)),
        CycleClass::Two => {
            let l = if rng.gen_bool(0.5) { 1 } else { -1 };
            Seed::new(sign, l, f64::from(sign) * rng.gen_range(1.05..sep.r_s - 0.05))
        }
    }
}

/// All four classes.
pub const CLASSES: [CycleClass; 4] = [CycleClass::ZeroInner, CycleClass::ZeroOuter, CycleClass::One, CycleClass::Two];
