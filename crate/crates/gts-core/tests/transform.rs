mod common;

use gts_core::model::{separatrices, Seed, SystemSpec};
use gts_core::monotone::{alpha, SignPattern};
use gts_core::orbit::{parametrize, CycleParam};
use gts_core::presets::{self, TAU0, TAU1, TAU2};
use gts_core::spectral::TrigInterp;
use gts_core::transform::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Setup {
    cyc: CycleParam,
    pc: PolarCoeffs,
    bd: BetaData,
}

fn setup(seed: Seed, spec: &SystemSpec, n: usize) -> Setup {
    let cyc = parametrize(&seed, spec.gamma, n).unwrap();
    let al = alpha(&cyc);
    let pc = polar_coeffs(&cyc, &al, spec).unwrap();
    let bd = beta_data(&cyc, &pc).unwrap();
    Setup { cyc, pc, bd }
}

#[test]
fn slow_pullbacks_match_direct_substitution() {
    let spec = presets::coeff_slow();
    let seed = Seed::new(0, 0, 1.808);
    let s = setup(seed, &spec, 256);
    let al = alpha(&s.cyc);
    let nt = 16;
    let pb = pullbacks(&s.cyc, &al, &s.bd, &spec, nt).unwrap();
    let mut rng = StdRng::seed_from_u64(41);
    for _ in 0..10 {
        let (it, i) = (rng.gen_range(0..nt), rng.gen_range(0..s.cyc.len()));
        let t = it as f64 * spec.period / nt as f64;
        let (c, sv, dc, ds) = (s.cyc.c[i], s.cyc.s[i], s.cyc.dc[i], s.cyc.ds[i]);
        let x0 = t.cos();
        let y0 = TAU0 * (sv + t.sin()) + TAU1 * sv.powi(3) + TAU2 * (c * c * sv + t.sin());
        assert!((pb.r0.at(it, i) - (dc * y0 - ds * x0)).abs() < 1e-12);
        let phi = (sv * x0 - c * y0) / al.alpha[i];
        assert!((pb.phi0.at(it, i) - phi).abs() < 1e-12);
    }
    assert_eq!(pb.reps.max_abs(), 0.0);
}

#[test]
fn angular_pullback_vanishes_for_radial_perturbation() {
    let mut spec = presets::coeff_autonomous();
    spec.perturbation.y.clear();
    spec.perturbation.x.insert((1, 0), gts_core::model::TrigPoly::constant(1.0));
    spec.perturbation.y.insert((0, 1), gts_core::model::TrigPoly::constant(1.0));
    let s = setup(Seed::new(0, 0, 1.808), &spec, 128);
    let pb = pullbacks(&s.cyc, &alpha(&s.cyc), &s.bd, &spec, 4).unwrap();
    assert!(pb.phi0.max_abs() < 1e-12);
}

#[test]
fn xi_mean_vanishes_on_random_seeds() {
    let spec = presets::coeff_autonomous();
    let mut rng = StdRng::seed_from_u64(42);
    for class in common::CLASSES {
        for _ in 0..3 {
            let seed = common::random_seed(&mut rng, class, 0.5);
            let cyc = parametrize(&seed, 0.5, 1024).unwrap();
            let al = alpha(&cyc);
            if al.sign == SignPattern::Mixed {
                continue;
            }
            let pc = polar_coeffs(&cyc, &al, &spec).unwrap();
            let bd = beta_data(&cyc, &pc).unwrap();
            assert!(bd.xi_mean.abs() <= 1e-8, "{seed:?}: {}", bd.xi_mean);
            assert_eq!(bd.beta[0], 0.0);
        }
    }
    let s = setup(Seed::new(1, 1, 1.27), &spec, 1024);
    assert!(s.bd.xi_mean.abs() <= 1e-8);
}

#[test]
fn beta_matches_closed_form_on_outer_cycles() {
    let spec = presets::coeff_autonomous();
    for b in [1.4, 1.6, 1.808, 2.0] {
        let s = setup(Seed::new(0, 0, b), &spec, 512);
        let sup = (0..s.cyc.len()).map(|i| (s.bd.beta[i] - beta00_closed_form(b, s.pc.alpha[i])).abs()).fold(0.0, f64::max);
        assert!(sup <= 1e-8, "b={b}: {sup}");
    }
}

#[test]
fn beta_derivative_has_zero_mean() {
    let spec = presets::coeff_autonomous();
    for seed in [Seed::new(1, 0, 1.2), Seed::new(-1, -1, -1.29)] {
        let s = setup(seed, &spec, 512);
        let m = s.bd.beta_prime.iter().sum::<f64>() / s.bd.beta_prime.len() as f64;
        assert!(m.abs() < 1e-12);
    }
}

#[test]
fn q_formula_for_class_two() {
    let spec = presets::coeff_autonomous();
    let s = setup(Seed::new(1, 1, 1.27), &spec, 256);
    for i in 0..s.cyc.len() {
        let (ck, sl) = (s.cyc.c[i] - 1.0, s.cyc.s[i] - 1.0);
        let a = s.pc.alpha[i];
        let want = (ck.powi(3) * (2.0 * s.cyc.c[i] + 1.0) + 0.5 * sl.powi(3) * (2.0 * s.cyc.s[i] + 1.0)) / (a * a);
        assert!((s.pc.q[i] - want).abs() < 1e-12);
    }
}

#[test]
fn outer_class_radius_shrinks_near_separatrix() {
    let spec = presets::coeff_autonomous();
    let re = separatrices(0.5).r_e;
    let mut last = f64::INFINITY;
    for b in [1.6, 1.45, 1.35, re + 0.01] {
        let s = setup(Seed::new(0, 0, b), &spec, 512);
        assert!(s.pc.rho_kl < last, "b={b}");
        assert!(s.pc.rho_star > 0.0 && s.pc.rho_star <= 0.9 * s.pc.rho_kl + 1e-15);
        last = s.pc.rho_kl;
    }
    assert!(last < 0.01);
}

#[test]
fn quadratic_radial_term_vanishes_for_all_gammas() {
    let mut rng = StdRng::seed_from_u64(43);
    for gamma in common::GAMMAS {
        let spec = SystemSpec { gamma, ..presets::coeff_autonomous() };
        for class in common::CLASSES {
            let seed = common::random_seed(&mut rng, class, gamma);
            let cyc = parametrize(&seed, gamma, 512).unwrap();
            let al = alpha(&cyc);
            if al.sign == SignPattern::Mixed {
                continue;
            }
            let pc = polar_coeffs(&cyc, &al, &spec).unwrap();
            let bd = beta_data(&cyc, &pc).unwrap();
            let h = (0.3 * pc.r_star.sqrt()).min(1e-3);
            let worst = radial_r2_coefficients(&cyc, &pc, &bd, h).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(worst <= 1e-6, "{seed:?} at γ={gamma}: {worst}");
        }
    }
}

#[test]
fn radial_derivative_converges_at_second_order() {
    let spec = presets::coeff_slow();
    let t = 1.0;
    for seed in [Seed::new(0, 0, 1.808), Seed::new(1, 0, 1.136), Seed::new(1, -1, 1.27)] {
        let s = setup(seed, &spec, 128);
        let pb = pullbacks(&s.cyc, &alpha(&s.cyc), &s.bd, &spec, 4).unwrap();
        for i in (0..s.cyc.len()).step_by(16) {
            let column: Vec<f64> = (0..pb.rr.nt).map(|it| pb.rr.at(it, i)).collect();
            let exact = TrigInterp::new(&column, spec.period).eval(t);
            let f = |r| full_radial_perturbation(&s.cyc, &s.pc, &s.bd, &spec, t, i, r);
            let err = |h: f64| ((f(h) - f(-h)) / (2.0 * h) - exact).abs();
            let (e1, e2) = (err(4e-2), err(2e-2));
            assert!(e2 < 0.3 * e1 || e1 < 1e-9, "{seed:?} sample {i}: {e1} then {e2}");
        }
    }
}
