mod common;

use gts_core::model::{extremals, CycleClass, Seed};
use gts_core::orbit::*;
use gts_core::spectral::decay_fit;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn quadrature_matches_return_map_on_random_seeds() {
    let mut rng = StdRng::seed_from_u64(21);
    for i in 0..20 {
        let class = common::CLASSES[i % 4];
        let gamma = common::GAMMAS[rng.gen_range(0..3)];
        let seed = common::random_seed(&mut rng, class, gamma);
        let q = period_quadrature(&seed, gamma).unwrap();
        let r = period_return_map(&seed, gamma).unwrap();
        assert!((q - r).abs() <= 1e-6 * q, "{seed:?} at γ={gamma}: {q} vs {r}");
    }
}

#[test]
fn grid_doubling_is_stable() {
    for seed in [Seed::new(0, 0, 1.808), Seed::new(0, 0, 0.4), Seed::new(1, 0, 1.136), Seed::new(-1, 1, -1.27)] {
        let coarse = parametrize(&seed, 0.5, 256).unwrap();
        let fine = parametrize(&seed, 0.5, 512).unwrap();
        assert_eq!(coarse.omega, fine.omega);
        for i in 0..coarse.len() {
            assert!((coarse.c[i] - fine.c[2 * i]).abs() <= 1e-7, "{seed:?} C at {i}");
            assert!((coarse.s[i] - fine.s[2 * i]).abs() <= 1e-7, "{seed:?} S at {i}");
        }
    }
}

#[test]
fn fourier_decay_of_every_class() {
    let mut rng = StdRng::seed_from_u64(22);
    for class in common::CLASSES {
        for gamma in common::GAMMAS {
            let seed = common::random_seed(&mut rng, class, gamma);
            let p = parametrize(&seed, gamma, 512).unwrap();
            for values in [&p.c, &p.s] {
                let fit = decay_fit(values);
                assert!(fit.q < 1.0, "{seed:?} at γ={gamma}: q = {}", fit.q);
            }
        }
    }
}

#[test]
fn outer_cycle_extremes_match_turning_values() {
    let mut rng = StdRng::seed_from_u64(23);
    for _ in 0..5 {
        let seed = common::random_seed(&mut rng, CycleClass::ZeroOuter, 0.5);
        let p = parametrize(&seed, 0.5, 1024).unwrap();
        let e = extremals(&seed, 0.5).unwrap();
        assert!((p.peak_abs(&p.s) - e.u0_1e.unwrap()).abs() < 1e-6, "{seed:?}");
        assert!((p.peak_abs(&p.c) - e.r0_1e.unwrap()).abs() < 1e-6, "{seed:?}");
        assert!(p.level_drift() < 1e-8 && p.wrap_error < 1e-8);
    }
}

#[test]
fn branch_examples() {
    let a = Seed::new(0, 0, 1.808).level(0.5);
    let top = s_branch(1.0, a, 0.5, Branch::Plus).unwrap();
    assert!((top - (1.0 + (a / 0.5).sqrt()).sqrt()).abs() < 1e-14);
    assert_eq!(s_branch(1.0, 0.5, 0.5, Branch::Minus).unwrap(), 0.0);
    assert!(s_branch(9.0, 0.5, 0.5, Branch::Plus).is_err());
}

#[test]
fn mirrored_seeds_share_periods() {
    for (a, b) in [(Seed::new(1, 0, 1.2), Seed::new(-1, 0, -1.2)), (Seed::new(1, 1, 1.27), Seed::new(-1, -1, -1.27))] {
        let wa = period_quadrature(&a, 0.5).unwrap();
        let wb = period_quadrature(&b, 0.5).unwrap();
        assert!((wa - wb).abs() < 1e-10 * wa);
    }
    let up = period_quadrature(&Seed::new(1, 1, 1.29), 0.5).unwrap();
    let down = period_quadrature(&Seed::new(1, -1, 1.29), 0.5).unwrap();
    assert!((up - down).abs() < 1e-10 * up);
}
