use gts_core::avg2::*;
use gts_core::error::GtsError;
use gts_core::generate::{analyse_root, RootAnalysis};
use gts_core::model::{Perturbation, Seed, SystemSpec, TrigPoly};
use gts_core::presets;
use gts_core::spectral::{derivative, mean, TwoPeriodicField};

const OUTER: f64 = 1.8078096530;
const ONE: f64 = 1.1358585291;
const TWO_INNER: f64 = 1.2709914210;

fn run(spec: &SystemSpec, seed: Seed, mode: KMode, harmonics: Harmonics) -> RootAnalysis {
    analyse_root(&seed, spec, mode, 512, harmonics).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn siegel_scan_passes_at_outer_root() {
    let an = run(&presets::coeff_fast(), Seed::new(0, 0, OUTER), KMode::Fast, Harmonics::default());
    let rep = siegel_check(an.cycle.omega, 2.0 * std::f64::consts::PI, 200, 1.0);
    assert!(rep.pass && rep.worst_margin > 0.0);
}

#[test]
fn fast_fields_solve_their_defining_equations() {
    let spec = presets::coeff_fast();
    for seed in [Seed::new(0, 0, OUTER), Seed::new(1, 1, TWO_INNER)] {
        let an = run(&spec, seed, KMode::Fast, Harmonics::default());
        let (pb, sec, w) = (&an.pullbacks, &an.secondary, an.cycle.omega);
        let scale = 1.0 + pb.r0.max_abs();
        assert!(max_diff(&derivative(&sec.g_hat, w), &pb.r0.hat()) <= 1e-8 * scale);
        let dt = sec.g_tilde.d_t();
        assert!(max_diff(&dt.data, &pb.r0.tilde().data) <= 1e-8 * scale);
        assert!(mean(&sec.g_hat).abs() < 1e-12 && sec.g_tilde.mean().abs() < 1e-12);
        let gq: Vec<f64> = (0..an.coeffs.q.len()).map(|i| (sec.g_bar + sec.g_hat[i]) * an.coeffs.q[i]).collect();
        let theta = pb.phi0.map_indexed(|_, ip, v| v + gq[ip]);
        let tscale = 1.0 + theta.max_abs();
        assert!((theta.mean() - sec.theta_bar).abs() <= 1e-12 * tscale);
        assert!(max_diff(&derivative(&sec.delta_hat, w), &theta.hat()) <= 1e-8 * tscale);
        assert!(max_diff(&sec.delta_tilde.d_t().data, &theta.tilde().data) <= 1e-8 * tscale);
        assert!(sec.f_rhs_mean.abs() <= 1e-8 * scale, "{seed:?}: {}", sec.f_rhs_mean);
    }
}

#[test]
fn slow_transport_meets_residual_bound() {
    let spec = presets::coeff_slow();
    for seed in [Seed::new(0, 0, OUTER), Seed::new(1, 0, ONE), Seed::new(-1, -1, -TWO_INNER)] {
        let an = run(&spec, seed, KMode::Slow, Harmonics::default());
        let sec = &an.secondary;
        let eta = an.pullbacks.r0.add_scalar(-an.pullbacks.r0.mean());
        assert!(sec.g_tilde.mean().abs() < 1e-12);
        let lhs = sec.g_tilde.d_t().zip_with(&sec.g_tilde.d_phi(), |a, b| a + b);
        assert!(max_diff(&lhs.data, &eta.data) <= 1e-6 * eta.max_abs(), "{seed:?}");
        assert!(seam_mismatch(&sec.g_tilde, &eta, 100) < 0.011);
    }
}

#[test]
fn slow_and_fast_constants_agree() {
    let slow = presets::coeff_slow();
    let fast = presets::coeff_fast();
    for seed in [Seed::new(0, 0, OUTER), Seed::new(1, 0, ONE), Seed::new(1, 1, TWO_INNER)] {
        let a = run(&slow, seed, KMode::Slow, Harmonics::default()).secondary.k_normalised;
        let b = run(&fast, seed, KMode::Fast, Harmonics::default()).secondary.k_normalised;
        assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()), "{seed:?}: {a} vs {b}");
    }
}

#[test]
fn truncating_harmonics_degrades_the_residual() {
    let spec = presets::coeff_slow();
    let seed = Seed::new(1, 0, ONE);
    let an = run(&spec, seed, KMode::Slow, Harmonics::default());
    let eta = an.pullbacks.r0.add_scalar(-an.pullbacks.r0.mean());
    let full = solve_transport_with(&eta, Harmonics::default()).unwrap();
    let cut = solve_transport(&eta, full.n_harmonics / 2).unwrap();
    assert!(full.residual_max <= 1e-6 * eta.max_abs());
    assert!(cut.residual_max > 10.0 * full.residual_max);
    assert!(full.coeff_decay_rate < 1.0);
}

#[test]
fn first_order_block_moves_reps_but_not_k() {
    let base = presets::coeff_fast();
    let mut shifted = base.clone();
    shifted.perturbation.y1.insert((0, 1), TrigPoly::constant(0.7));
    let seed = Seed::new(0, 0, OUTER);
    let a = run(&base, seed, KMode::Fast, Harmonics::default());
    let b = run(&shifted, seed, KMode::Fast, Harmonics::default());
    assert_eq!(a.pullbacks.reps.max_abs(), 0.0);
    assert!(b.pullbacks.reps.max_abs() > 0.1);
    assert_eq!(a.secondary.k_normalised, b.secondary.k_normalised);
    assert!((a.secondary.g_bar - b.secondary.g_bar).abs() > 1e-3);
}

#[test]
fn zero_perturbation_is_degenerate() {
    let spec = SystemSpec::new(0.5, 2.0 * std::f64::consts::PI, 1, 3.0, Perturbation::zero()).unwrap();
    let err = analyse_root(&Seed::new(0, 0, OUTER), &spec, KMode::Fast, 256, Harmonics::default()).unwrap_err();
    assert!(matches!(err, GtsError::DegenerateK(k) if k == 0.0));
}

#[test]
fn manufactured_transport_solutions() {
    let (t, w) = (2.0 * std::f64::consts::PI, 3.8667);
    for (jt, jp) in [(1.0, 1.0), (2.0, -3.0), (0.0, 2.0), (3.0, 0.0)] {
        let (a, b) = (jt * 2.0 * std::f64::consts::PI / t, jp * 2.0 * std::f64::consts::PI / w);
        let chi = |s: f64, p: f64| (a * s + b * p).sin();
        let eta = TwoPeriodicField::from_fn(t, w, 16, 64, |s, p| (a + b) * (a * s + b * p).cos());
        let sol = solve_transport(&eta, 15).unwrap();
        let want = TwoPeriodicField::from_fn(t, w, 16, 64, chi);
        assert!(max_diff(&sol.chi.data, &want.data) <= 1e-10, "({jt}, {jp})");
    }
}

#[test]
fn k_mode_labels() {
    assert_eq!(KMode::parse("0"), Some(KMode::Slow));
    assert_eq!(KMode::parse("1"), Some(KMode::Fast));
    assert_eq!(KMode::parse("auto"), Some(KMode::Autonomous));
    assert_eq!(KMode::parse("2"), None);
}
