use gts_core::avg2::{KMode, Stability};
use gts_core::generate::{find_roots, AdmissibleRoot, RootOptions};
use gts_core::model::{hamiltonian_level, CycleClass, Seed, SystemSpec};
use gts_core::orbit::period_quadrature;
use gts_core::presets;
use gts_core::verify::*;

fn sa() -> SystemSpec {
    presets::coeff_autonomous()
}

fn sa_roots() -> Vec<AdmissibleRoot> {
    find_roots(&sa(), &RootOptions { mode: Some(KMode::Autonomous), n_samples: 512, ..RootOptions::default() }).unwrap()
}

#[test]
fn energy_is_conserved_without_perturbation() {
    let spec = sa();
    for seed in [Seed::new(0, 0, 1.808), Seed::new(1, 0, 1.136), Seed::new(1, 1, 1.27), Seed::new(0, 0, 0.4)] {
        let (x0, y0) = (seed.b, f64::from(seed.l));
        let omega = period_quadrature(&seed, 0.5).unwrap();
        let tr = integrate(&spec, 0.0, 0.0, x0, y0, 100.0 * omega).unwrap();
        let a0 = hamiltonian_level(x0, y0, 0.5);
        let drift = tr.x.iter().zip(&tr.y).map(|(&x, &y)| (hamiltonian_level(x, y, 0.5) - a0).abs()).fold(0.0, f64::max);
        assert!(drift <= 1e-8, "({x0}, {y0}): {drift}");
    }
}

#[test]
fn forward_then_backward_returns_to_start() {
    let spec = presets::coeff_slow();
    let fwd = integrate(&spec, 0.05, 0.3, 1.808, 0.0, 20.3).unwrap();
    let (t1, end) = fwd.end().unwrap();
    assert_eq!(t1, 20.3);
    let back = integrate(&spec, 0.05, t1, end[0], end[1], 0.3).unwrap();
    let (t0, start) = back.end().unwrap();
    assert_eq!(t0, 0.3);
    assert!((start[0] - 1.808).abs() <= 1e-8 && start[1].abs() <= 1e-8, "{start:?}");
}

#[test]
fn leaving_the_domain_is_reported() {
    let spec = sa();
    assert!(integrate(&spec, 0.0, 0.0, 2.5, 0.0, 10.0).is_err());
}

#[test]
fn class_one_table_rises_toward_cycle() {
    let t = crossing_table(&sa(), 1e-3, [1.132, 0.0], Section::Zero, 8, Direction::Forward).unwrap();
    assert_eq!(t.trend(), 1);
    assert!((t.rows[0].t - 13.6).abs() < 0.05, "{}", t.rows[0].t);
    assert!((t.rows[0].x - 1.1320219).abs() < 1e-5);
    assert!(t.rows.iter().all(|r| r.x < 1.136));
    assert!(t.to_csv().starts_with("t,x\n"));
}

#[test]
fn class_two_table_falls_toward_cycle() {
    let t = crossing_table(&sa(), 1e-3, [1.304, 1.0], Section::Plus, 8, Direction::Backward).unwrap();
    assert_eq!(t.trend(), -1);
    assert!((t.rows[0].t + 8.7).abs() < 0.05, "{}", t.rows[0].t);
    assert!((t.rows[0].x - 1.3039972).abs() < 1e-5);
    assert!(t.rows.iter().all(|r| r.x > 1.301));
}

#[test]
fn outer_table_backward() {
    let t = crossing_table(&sa(), 1e-3, [1.804, 0.0], Section::Zero, 8, Direction::Backward).unwrap();
    assert_eq!(t.trend(), 1);
    assert!((t.rows[0].x - 1.8040434).abs() < 1e-5);
    assert!((t.rows[1].x - 1.8040870).abs() < 1e-5);
}

#[test]
fn mirrored_start_gives_mirrored_table() {
    let a = crossing_table(&sa(), 1e-3, [1.132, 0.0], Section::Zero, 6, Direction::Forward).unwrap();
    let b = crossing_table(&sa(), 1e-3, [-1.132, 0.0], Section::Zero, 6, Direction::Forward).unwrap();
    for (p, q) in a.rows.iter().zip(&b.rows) {
        assert!((p.x + q.x).abs() < 1e-9 && (p.t - q.t).abs() < 1e-8);
    }
}

#[test]
fn unperturbed_equilibria_are_recovered() {
    let eq = equilibria(&sa(), 0.0).unwrap();
    assert_eq!(eq.len(), 9);
    for e in &eq {
        let p = e.point.unwrap();
        assert!((p[0] - e.seed[0]).abs() < 1e-12 && (p[1] - e.seed[1]).abs() < 1e-12);
    }
}

#[test]
fn perturbed_equilibria() {
    let eq = equilibria(&sa(), 0.05).unwrap();
    let mut off_axis = Vec::new();
    for e in &eq {
        let p = e.point.expect("every seed converges");
        if e.seed[1] == 0.0 {
            assert_eq!(p, e.seed);
        } else {
            off_axis.push(p[0].abs());
        }
    }
    for want in [0.182, 0.983, 1.025] {
        assert!(off_axis.iter().any(|x| (x - want).abs() <= 2e-3), "{want} not in {off_axis:?}");
    }
    assert!(equilibria(&presets::coeff_slow(), 0.05).is_err());
}

#[test]
fn portrait_is_deterministic() {
    let roots = sa_roots();
    let launches = [Launch { x: 1.5, y: 0.0, duration: 10.0 }, Launch { x: 0.3, y: 0.2, duration: -5.0 }];
    let a = portrait(&sa(), 0.05, Window::default(), &launches, &roots).unwrap();
    let b = portrait(&sa(), 0.05, Window::default(), &launches, &roots).unwrap();
    assert_eq!(a.svg, b.svg);
    assert_eq!(a.csv, b.csv);
    assert!(a.svg.contains("viewBox=\"0 0 800 800\""));
    assert_eq!(a.svg.matches("<polyline").count(), 13);
}

#[test]
fn empty_portrait_has_equilibria_only() {
    let p = portrait(&sa(), 0.0, Window::default(), &[], &[]).unwrap();
    assert_eq!(p.svg.matches("<circle").count(), 9);
    assert_eq!(p.svg.matches("<polyline").count(), 0);
    assert!(p.csv.starts_with("polyline,kind,x,y\n"));
}

#[test]
fn three_cycles_at_large_eps() {
    let spec = sa();
    let mut found = Vec::new();
    for r in sa_roots() {
        match bracket_cycle(&r, &spec, 0.05) {
            Ok(b) => found.push((r.class, b.stability)),
            Err(e) => assert!(r.class == CycleClass::Two, "{:?}: {e}", r.seed),
        }
    }
    found.sort_by_key(|(c, _)| *c);
    assert_eq!(
        found,
        vec![
            (CycleClass::ZeroOuter, Stability::StableBackward),
            (CycleClass::One, Stability::StableForward),
            (CycleClass::One, Stability::StableForward),
        ]
    );
}

#[test]
fn eleven_cycles_at_small_eps() {
    let spec = sa();
    for r in sa_roots() {
        let b = bracket_cycle(&r, &spec, 1e-3).unwrap();
        let want = reference_abscissa(&r).unwrap();
        assert!((b.located_x - want).abs() <= 5e-3, "{:?}: {} vs {want}", r.seed, b.located_x);
        let k = r.k_value.unwrap();
        assert_eq!(b.stability == Stability::StableForward, k < 0.0);
        assert!(b.inner_table.last_x().min(b.outer_table.last_x()) < b.located_x);
        assert!(b.inner_table.last_x().max(b.outer_table.last_x()) > b.located_x);
    }
}

#[test]
fn located_cycle_converges_linearly_in_eps() {
    let spec = sa();
    let root = sa_roots().into_iter().find(|r| r.class == CycleClass::ZeroOuter).unwrap();
    let mut gaps = Vec::new();
    for eps in [1e-2, 3e-3, 1e-3] {
        let b = bracket_cycle(&root, &spec, eps).unwrap();
        gaps.push(((b.located_x - root.seed.b).abs(), eps));
    }
    assert!(gaps[0].0 > gaps[1].0 && gaps[1].0 > gaps[2].0, "{gaps:?}");
    let ratios: Vec<f64> = gaps.iter().map(|(g, e)| g / e).collect();
    assert!(ratios.iter().all(|&r| r <= ratios[0] * 1.01), "{ratios:?}");
}
