//! Direct simulation of the perturbed system: trajectories, section
//! crossing tables, limit-cycle brackets, perturbed equilibria and phase
//! portraits.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::avg2::{Harmonics, KMode, Stability};
use crate::error::{GtsError, Result};
use crate::generate::{analyse_root, default_mode, predicted_abscissa, AdmissibleRoot, RootAnalysis};
use crate::model::{perturbed_field_frozen, unperturbed_field, FrozenPerturbation, SystemSpec};
use crate::ode::{Dopri5, OdeOptions, State};
use crate::orbit::parametrize;

/// Time direction of an integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// Horizontal section line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Section {
    /// `y = 0`.
    Zero,
    /// `y = 1`.
    Plus,
    /// `y = −1`.
    Minus,
}

impl Section {
    /// Ordinate of the line.
    pub fn y(self) -> f64 {
        match self {
            Section::Zero => 0.0,
            Section::Plus => 1.0,
            Section::Minus => -1.0,
        }
    }

    /// Section through the centre `(k, l)` of a cycle family.
    pub fn from_l(l: i8) -> Self {
        match l.signum() {
            0 => Section::Zero,
            1 => Section::Plus,
            _ => Section::Minus,
        }
    }
}

/// Side of the predicted cycle a table starts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

/// Accepted integration points of a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Trajectory {
    fn push(&mut self, t: f64, s: &State) {
        self.t.push(t);
        self.x.push(s[0]);
        self.y.push(s[1]);
    }

    /// Last recorded state.
    pub fn end(&self) -> Option<(f64, State)> {
        let n = self.t.len();
        (n > 0).then(|| (self.t[n - 1], [self.x[n - 1], self.y[n - 1]]))
    }
}

/// Right-hand side in the integration variable `τ = (t − t₀)/dir`, so
/// backward runs integrate the time-reversed field in increasing `τ`.
struct Flow<'a> {
    spec: &'a SystemSpec,
    eps: f64,
    t0: f64,
    dir: f64,
    frozen: Option<FrozenPerturbation>,
}

impl<'a> Flow<'a> {
    fn new(spec: &'a SystemSpec, eps: f64, t0: f64, direction: Direction) -> Self {
        let frozen = (spec.perturbation.max_harmonic() == 0).then(|| spec.perturbation.at_time(0.0, spec.period));
        Self { spec, eps, t0, dir: direction.sign(), frozen }
    }

    fn time(&self, tau: f64) -> f64 {
        self.t0 + self.dir * tau
    }

    fn rhs(&self, tau: f64, y: &State) -> Result<State> {
        let (u, v) = match &self.frozen {
            Some(f) => perturbed_field_frozen(y[0], y[1], self.eps, self.spec, f)?,
            None => {
                let f = self.spec.perturbation.at_time(self.time(tau), self.spec.period);
                perturbed_field_frozen(y[0], y[1], self.eps, self.spec, &f)?
            }
        };
        Ok([self.dir * u, self.dir * v])
    }
}

fn ode_options() -> OdeOptions {
    OdeOptions { atol: 1e-13, rtol: 1e-12, ..OdeOptions::default() }
}

fn check_start(spec: &SystemSpec, x: f64, y: f64) -> Result<()> {
    if x.abs() > spec.sigma || y.abs() > spec.sigma || !x.is_finite() || !y.is_finite() {
        return Err(GtsError::DomainExceeded { x, y, sigma: spec.sigma });
    }
    Ok(())
}

/// Integrates from `(t₀, x₀, y₀)` to `t_end`, which may precede `t₀`.
/// Returns the accepted points up to the failure together with the error
/// that stopped the run, if any.
pub fn integrate_partial(spec: &SystemSpec, eps: f64, t0: f64, start: State, t_end: f64) -> (Trajectory, Option<GtsError>) {
    let mut traj = Trajectory { t: vec![], x: vec![], y: vec![] };
    if let Err(e) = check_start(spec, start[0], start[1]) {
        return (traj, Some(e));
    }
    traj.push(t0, &start);
    let direction = if t_end >= t0 { Direction::Forward } else { Direction::Backward };
    let flow = Flow::new(spec, eps, t0, direction);
    let span = (t_end - t0).abs();
    let mut solver = match Dopri5::new(|tau, y| flow.rhs(tau, y), 0.0, start, ode_options()) {
        Ok(s) => s,
        Err(e) => return (traj, Some(e)),
    };
    while solver.t < span {
        match solver.step_until(span) {
            Ok(step) => {
                let t = if step.t1() >= span { t_end } else { flow.time(step.t1()) };
                traj.push(t, &step.y1);
            }
            Err(e) => return (traj, Some(e)),
        }
    }
    (traj, None)
}

/// Integrates from `(t₀, x₀, y₀)` to `t_end`, which may precede `t₀`.
pub fn integrate(spec: &SystemSpec, eps: f64, t0: f64, x0: f64, y0: f64, t_end: f64) -> Result<Trajectory> {
    match integrate_partial(spec, eps, t0, [x0, y0], t_end) {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// One crossing of a section.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Crossing {
    pub t: f64,
    pub x: f64,
}

/// Successive abscissas of crossings of one section in one orientation.
#[derive(Debug, Clone, Serialize)]
pub struct CrossingTable {
    pub section: Section,
    pub side: Option<Side>,
    pub direction: Direction,
    pub start: State,
    /// Crossings discarded as transient before the monotone run.
    pub skipped: usize,
    pub rows: Vec<Crossing>,
}

impl CrossingTable {
    /// Abscissa of the last row.
    pub fn last_x(&self) -> f64 {
        self.rows.last().map_or(self.start[0], |r| r.x)
    }

    /// `+1` if the abscissas increase, `−1` if they decrease, `0` otherwise.
    pub fn trend(&self) -> i8 {
        let d: Vec<f64> = self.rows.windows(2).map(|w| w[1].x - w[0].x).collect();
        if !d.is_empty() && d.iter().all(|&v| v > 0.0) {
            1
        } else if !d.is_empty() && d.iter().all(|&v| v < 0.0) {
            -1
        } else {
            0
        }
    }

    /// CSV with header `t,x`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x\n");
        for r in &self.rows {
            let _ = writeln!(out, "{:.6},{:.10}", r.t, r.x);
        }
        out
    }
}

/// Generator of successive oriented section crossings.
struct CrossingWalker<'a> {
    flow: &'a Flow<'a>,
    y_sec: f64,
    /// Required sign of `dy/dt` at a crossing in physical time.
    orient: f64,
    x_sign: f64,
    state_tau: f64,
    state: State,
}

impl CrossingWalker<'_> {
    fn next(&mut self, max_time: f64) -> Result<Crossing> {
        let flow = self.flow;
        let mut solver = Dopri5::new(|tau, y| flow.rhs(tau, y), self.state_tau, self.state, ode_options())?;
        let limit = self.state_tau + max_time;
        let g = |_: f64, y: &State| y[1] - self.y_sec;
        while solver.t < limit {
            let step = solver.step_until(limit)?;
            let (g0, g1) = (g(step.t0, &step.y0), g(step.t1(), &step.y1));
            let crosses = g0 * g1 < 0.0 || (g1 == 0.0 && g0 != 0.0);
            if crosses && (g1 - g0).signum() * flow.dir == self.orient && step.y1[0].signum() == self.x_sign {
                let (tau, y) = solver.locate(&step, g, 1e-13)?;
                self.state_tau = tau;
                self.state = [y[0], self.y_sec];
                return Ok(Crossing { t: flow.time(tau), x: y[0] });
            }
        }
        Err(GtsError::NoReturn { limit: max_time })
    }
}

fn strictly_monotone(rows: &[Crossing]) -> bool {
    let d: Vec<f64> = rows.windows(2).map(|w| w[1].x - w[0].x).collect();
    d.iter().all(|&v| v > 0.0) || d.iter().all(|&v| v < 0.0)
}

fn contracting(rows: &[Crossing]) -> bool {
    let d: Vec<f64> = rows.windows(2).map(|w| (w[1].x - w[0].x).abs()).collect();
    d.iter().skip(3).zip(d.iter().skip(4)).all(|(a, b)| *b <= *a * (1.0 + 1e-6) + 1e-11)
}

/// Maximal time allowed between two consecutive crossings.
const RETURN_TIME: f64 = 200.0;

/// Crossings of `section` by the trajectory from `start`, oriented like
/// the unperturbed flow at `start` and on the same side of `x = 0`.
/// The table holds the first `n_rows` consecutive crossings forming a
/// strictly monotone, contracting run; up to `5 n_rows` crossings are tried.
pub fn crossing_table(
    spec: &SystemSpec,
    eps: f64,
    start: State,
    section: Section,
    n_rows: usize,
    direction: Direction,
) -> Result<CrossingTable> {
    check_start(spec, start[0], start[1])?;
    let n_rows = n_rows.max(2);
    let flow = Flow::new(spec, eps, 0.0, direction);
    let orient = unperturbed_field(start[0], section.y(), spec.gamma).1.signum();
    let mut walker = CrossingWalker {
        flow: &flow,
        y_sec: section.y(),
        orient,
        x_sign: start[0].signum(),
        state_tau: 0.0,
        state: start,
    };
    let mut all: Vec<Crossing> = Vec::new();
    for _ in 0..5 * n_rows {
        all.push(walker.next(RETURN_TIME)?);
        if all.len() >= n_rows {
            let from = all.len() - n_rows;
            let window = &all[from..];
            if strictly_monotone(window) && contracting(window) {
                return Ok(CrossingTable { section, side: None, direction, start, skipped: from, rows: window.to_vec() });
            }
        }
    }
    let lo = all.iter().map(|r| r.x).fold(f64::INFINITY, f64::min);
    let hi = all.iter().map(|r| r.x).fold(f64::NEG_INFINITY, f64::max);
    Err(GtsError::NonMonotone(format!("{} crossings in [{lo:.6}, {hi:.6}] without a monotone run", all.len())))
}

/// First return abscissa on `section` from `(x, y_sec)` in the given direction.
pub fn return_map(spec: &SystemSpec, eps: f64, x: f64, section: Section, direction: Direction) -> Result<f64> {
    let flow = Flow::new(spec, eps, 0.0, direction);
    let orient = unperturbed_field(x, section.y(), spec.gamma).1.signum();
    let mut walker = CrossingWalker {
        flow: &flow,
        y_sec: section.y(),
        orient,
        x_sign: x.signum(),
        state_tau: 0.0,
        state: [x, section.y()],
    };
    Ok(walker.next(RETURN_TIME)?.x)
}

/// Two crossing tables enclosing a perturbed limit cycle.
#[derive(Debug, Clone, Serialize)]
pub struct LimitCycleBracket {
    pub root: AdmissibleRoot,
    pub eps: f64,
    pub predicted_x: f64,
    pub delta: f64,
    pub inner_table: CrossingTable,
    pub outer_table: CrossingTable,
    /// Fixed point of the return map inside the final bracket when the
    /// system is autonomous, the bracket midpoint otherwise.
    pub located_x: f64,
    pub stability: Stability,
}

/// Rows per crossing table used by [`bracket_cycle`].
pub const BRACKET_ROWS: usize = 12;

/// Launches crossing tables from `x̂ ∓ δ` around the first-order prediction
/// `x̂`, with `δ = max(5·10⁻³, 3|x̂ − b★|)`, in the time direction in which
/// the cycle attracts according to the sign of `K`.
pub fn bracket_cycle(root: &AdmissibleRoot, spec: &SystemSpec, eps: f64) -> Result<LimitCycleBracket> {
    let mode = default_mode(spec);
    let an = analyse_root(&root.seed, spec, mode, 1024, Harmonics::default())?;
    bracket_with_analysis(root, &an, spec, eps)
}

/// [`bracket_cycle`] with the root analysis already available.
pub fn bracket_with_analysis(root: &AdmissibleRoot, an: &RootAnalysis, spec: &SystemSpec, eps: f64) -> Result<LimitCycleBracket> {
    let k = match an.mode {
        KMode::Autonomous => an.cycle.omega * an.secondary.k_normalised,
        _ => an.secondary.k_normalised,
    };
    let stability = if k < 0.0 { Stability::StableForward } else { Stability::StableBackward };
    let direction = match stability {
        Stability::StableForward => Direction::Forward,
        Stability::StableBackward => Direction::Backward,
    };
    let section = Section::from_l(root.seed.l);
    let predicted_x = predicted_abscissa(an, eps);
    let delta = (3.0 * (predicted_x - root.seed.b).abs()).max(5e-3);
    let centre = f64::from(root.seed.k);
    let toward_centre = (centre - predicted_x).signum();
    let inner_x = predicted_x + toward_centre * delta;
    let outer_x = predicted_x - toward_centre * delta;
    let not_converged = |why: String| GtsError::NotConverged(format!("{:?} at eps={eps}: {why}", root.seed));
    let run = |x: f64, side: Side| -> Result<CrossingTable> {
        let mut t = crossing_table(spec, eps, [x, section.y()], section, BRACKET_ROWS, direction)
            .map_err(|e| not_converged(format!("{side:?} table: {e}")))?;
        t.side = Some(side);
        Ok(t)
    };
    let (lo_side, hi_side) = if inner_x < outer_x { (Side::Left, Side::Right) } else { (Side::Right, Side::Left) };
    let (inner_table, outer_table) = rayon::join(|| run(inner_x, lo_side), || run(outer_x, hi_side));
    let (inner_table, outer_table) = (inner_table?, outer_table?);
    let (lo_t, hi_t) = if inner_x < outer_x { (&inner_table, &outer_table) } else { (&outer_table, &inner_table) };
    if lo_t.trend() != 1 || hi_t.trend() != -1 {
        return Err(not_converged(format!("tables do not approach each other (trends {} and {})", lo_t.trend(), hi_t.trend())));
    }
    let (a, b) = (lo_t.last_x(), hi_t.last_x());
    if a >= b {
        return Err(not_converged(format!("tables crossed ({a} ≥ {b})")));
    }
    let located_x = if spec.perturbation.max_harmonic() == 0 {
        fixed_point(spec, eps, section, direction, a, b).unwrap_or(0.5 * (a + b))
    } else {
        0.5 * (a + b)
    };
    Ok(LimitCycleBracket {
        root: root.clone(),
        eps,
        predicted_x,
        delta,
        inner_table,
        outer_table,
        located_x,
        stability,
    })
}

fn fixed_point(spec: &SystemSpec, eps: f64, section: Section, direction: Direction, mut a: f64, mut b: f64) -> Result<f64> {
    let d = |x: f64| return_map(spec, eps, x, section, direction).map(|p| p - x);
    let (mut fa, fb) = (d(a)?, d(b)?);
    if fa * fb > 0.0 {
        return Err(GtsError::NotConverged("return map has no sign change in the bracket".into()));
    }
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if b - a < 1e-11 {
            return Ok(m);
        }
        let fm = d(m)?;
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Outcome of one damped-Newton search.
#[derive(Debug, Clone, Serialize)]
pub struct Equilibrium {
    pub seed: State,
    pub point: Option<State>,
    pub error: Option<String>,
}

/// The nine equilibria of the unperturbed system.
pub fn unperturbed_equilibria() -> Vec<State> {
    let v = [-1.0, 0.0, 1.0];
    v.iter().flat_map(|&x| v.iter().map(move |&y| [x, y])).collect()
}

/// Fixed points of the autonomous perturbed field found by damped Newton
/// iteration from the nine unperturbed equilibria.
pub fn equilibria(spec: &SystemSpec, eps: f64) -> Result<Vec<Equilibrium>> {
    if spec.perturbation.max_harmonic() != 0 {
        return Err(GtsError::InvalidSystem("equilibria need a time-independent perturbation".into()));
    }
    let mut flat = spec.clone();
    flat.nu = 0;
    let frozen = spec.perturbation.at_time(0.0, spec.period);
    let f = |p: State| -> Result<State> {
        let (u, v) = perturbed_field_frozen(p[0], p[1], eps, &flat, &frozen)?;
        Ok([u, v])
    };
    Ok(unperturbed_equilibria()
        .into_iter()
        .map(|seed| match newton(&f, seed) {
            Ok(p) => Equilibrium { seed, point: Some(p), error: None },
            Err(e) => Equilibrium { seed, point: None, error: Some(e.to_string()) },
        })
        .collect())
}

fn newton<F: Fn(State) -> Result<State>>(f: &F, seed: State) -> Result<State> {
    let norm = |v: State| v[0].hypot(v[1]);
    let mut p = seed;
    let mut fp = f(p)?;
    for _ in 0..100 {
        if norm(fp) < 1e-14 {
            return Ok(p);
        }
        let h = 1e-7;
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let mut a = p;
            let mut b = p;
            a[j] += h;
            b[j] -= h;
            let (fa, fb) = (f(a)?, f(b)?);
            jac[0][j] = (fa[0] - fb[0]) / (2.0 * h);
            jac[1][j] = (fa[1] - fb[1]) / (2.0 * h);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-14 {
            break;
        }
        let dx = [
            -(jac[1][1] * fp[0] - jac[0][1] * fp[1]) / det,
            -(-jac[1][0] * fp[0] + jac[0][0] * fp[1]) / det,
        ];
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-6 {
            let q = [p[0] + lambda * dx[0], p[1] + lambda * dx[1]];
            if let Ok(fq) = f(q) {
                if norm(fq) < norm(fp) {
                    p = q;
                    fp = fq;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm(fp) < 1e-10 {
        Ok(p)
    } else {
        Err(GtsError::NewtonFail { x0: seed[0], y0: seed[1] })
    }
}

/// Plot window `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for Window {
    fn default() -> Self {
        Self { x_min: -2.2, x_max: 2.2, y_min: -2.2, y_max: 2.2 }
    }
}

/// Trajectory launch for a portrait.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Launch {
    pub x: f64,
    pub y: f64,
    /// Signed integration time; negative values run backward.
    pub duration: f64,
}

/// Rendered portrait.
#[derive(Debug, Clone)]
pub struct Portrait {
    pub svg: String,
    pub csv: String,
}

const VIEW: f64 = 800.0;

/// Phase portrait with trajectories, equilibria and the generating cycles
/// at `roots` overlaid. Coordinates are written with two decimals in a
/// fixed `800 × 800` view box.
pub fn portrait(spec: &SystemSpec, eps: f64, window: Window, launches: &[Launch], roots: &[AdmissibleRoot]) -> Result<Portrait> {
    let sx = |x: f64| (x - window.x_min) / (window.x_max - window.x_min) * VIEW;
    let sy = |y: f64| (window.y_max - y) / (window.y_max - window.y_min) * VIEW;
    let mut polylines: Vec<(String, String, Vec<State>)> = Vec::new();
    for r in roots {
        let cyc = parametrize(&r.seed, spec.gamma, 256)?;
        let mut pts: Vec<State> = cyc.c.iter().zip(&cyc.s).map(|(&c, &s)| [c, s]).collect();
        pts.push(pts[0]);
        polylines.push((format!("cycle {}", r.class.label()), "cycle".into(), pts));
    }
    let trajs: Vec<Vec<State>> = launches
        .par_iter()
        .map(|l| {
            let (tr, _) = integrate_partial(spec, eps, 0.0, [l.x, l.y], l.duration);
            tr.x.iter().zip(&tr.y).map(|(&x, &y)| [x, y]).collect()
        })
        .collect();
    for (i, pts) in trajs.into_iter().enumerate() {
        polylines.push((format!("trajectory {i}"), "orbit".into(), pts));
    }
    let eq: Vec<State> = if spec.perturbation.max_harmonic() == 0 {
        equilibria(spec, eps)?.into_iter().filter_map(|e| e.point).collect()
    } else {
        unperturbed_equilibria()
    };
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {VIEW} {VIEW}" width="{VIEW}" height="{VIEW}">"#);
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{VIEW}" height="{VIEW}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<g stroke="gray" stroke-width="0.5"><line x1="{:.2}" y1="0.00" x2="{:.2}" y2="{VIEW:.2}"/><line x1="0.00" y1="{:.2}" x2="{VIEW:.2}" y2="{:.2}"/></g>"#,
        sx(0.0),
        sx(0.0),
        sy(0.0),
        sy(0.0)
    );
    let mut csv = String::from("polyline,kind,x,y\n");
    for (i, (name, kind, pts)) in polylines.iter().enumerate() {
        let colour = if kind == "cycle" { "red" } else { "black" };
        let mut d = String::new();
        for p in pts {
            let _ = write!(d, "{:.2},{:.2} ", sx(p[0]), sy(p[1]));
            let _ = writeln!(csv, "{i},{kind},{:.8},{:.8}", p[0], p[1]);
        }
        let _ = writeln!(
            svg,
            r#"<polyline class="{kind}" data-name="{name}" fill="none" stroke="{colour}" stroke-width="1" points="{}"/>"#,
            d.trim_end()
        );
    }
    for p in &eq {
        let _ = writeln!(svg, r#"<circle class="equilibrium" cx="{:.2}" cy="{:.2}" r="3" fill="blue"/>"#, sx(p[0]), sy(p[1]));
    }
    svg.push_str("</svg>\n");
    Ok(Portrait { svg, csv })
}

/// Reference data for one family of generating cycles of the eleven-root
/// example: abscissa and period windows and the quoted `K` values.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReferenceFamily {
    pub name: &'static str,
    /// Window for `k·b★` (for `b★` itself in class 0).
    pub b: (f64, f64),
    pub omega: (f64, f64),
    pub k_slow: f64,
    pub k_fast: f64,
    pub k_autonomous: f64,
    /// Simulated cycle abscissa at `ε = 10⁻³` on the section through the centre,
    /// for the `l ≥ 0` member; `l < 0` members are the odd mirror images.
    pub x_at_milli: f64,
}

/// Reference families: class 0ᵉ, class 1, inner and outer class 2.
pub const REFERENCE: [ReferenceFamily; 4] = [
    ReferenceFamily { name: "0e", b: (1.795, 1.815), omega: (3.81, 3.94), k_slow: 2.78, k_fast: 2.79, k_autonomous: 10.7, x_at_milli: 1.808 },
    ReferenceFamily { name: "1", b: (1.118, 1.148), omega: (13.25, 14.05), k_slow: -0.34, k_fast: -0.32, k_autonomous: -4.3, x_at_milli: 1.136 },
    ReferenceFamily { name: "2 inner", b: (1.266, 1.276), omega: (5.99, 6.29), k_slow: -0.29, k_fast: -0.05, k_autonomous: -0.28, x_at_milli: 1.277 },
    ReferenceFamily { name: "2 outer", b: (1.299, 1.303), omega: (7.72, 8.49), k_slow: 2.07, k_fast: 0.10, k_autonomous: 0.83, x_at_milli: 1.301 },
];

/// Reference family of a root, by class and abscissa.
pub fn reference_family(root: &AdmissibleRoot) -> Option<&'static ReferenceFamily> {
    let kb = if root.seed.k == 0 { root.seed.b } else { f64::from(root.seed.k) * root.seed.b };
    REFERENCE.iter().find(|f| kb > f.b.0 - 0.01 && kb < f.b.1 + 0.01 && (root.seed.k == 0) == (f.name == "0e"))
}

/// Reference abscissa at `ε = 10⁻³` for a root of the autonomous example.
/// The inner class-2 cycles with `kl < 0` sit at `±1.267`.
pub fn reference_abscissa(root: &AdmissibleRoot) -> Option<f64> {
    let f = reference_family(root)?;
    let (k, l) = (root.seed.k, root.seed.l);
    let x = if f.name == "2 inner" && k * l < 0 { 1.267 } else { f.x_at_milli };
    Some(if k < 0 { -x } else { x })
}

/// One root of the root-table reproduction.
#[derive(Debug, Clone, Serialize)]
pub struct RootRow {
    pub mode: KMode,
    pub family: Option<&'static str>,
    pub seed: crate::model::Seed,
    pub b_pass: bool,
    pub omega: f64,
    pub omega_return_map: f64,
    pub omega_pass: bool,
    pub omega_agree: bool,
    pub k: Option<f64>,
    pub k_reference: Option<f64>,
    pub k_pass: bool,
    pub admissible: bool,
}

/// Root/period/`K` table for the slow, fast and autonomous variants of
/// the eleven-root example.
#[derive(Debug, Clone, Serialize)]
pub struct RootsReport {
    pub root_counts: Vec<(KMode, usize)>,
    pub rows: Vec<RootRow>,
    pub all_pass: bool,
}

impl RootsReport {
    /// CSV with one line per root and mode.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode,family,k,l,b,b_pass,omega,omega_return_map,omega_pass,omega_agree,K,K_reference,K_pass,admissible\n");
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.6}"));
            let _ = writeln!(
                out,
                "{:?},{},{},{},{:.10},{},{:.8},{:.8},{},{},{},{},{},{}",
                r.mode,
                r.family.unwrap_or(""),
                r.seed.k,
                r.seed.l,
                r.seed.b,
                r.b_pass,
                r.omega,
                r.omega_return_map,
                r.omega_pass,
                r.omega_agree,
                opt(r.k),
                opt(r.k_reference),
                r.k_pass,
                r.admissible
            );
        }
        out
    }
}

/// `K` tolerance: absolute 0.05 for the slow and fast variants, relative
/// 10% for the autonomous one.
pub fn k_within_tolerance(mode: KMode, k: f64, reference: f64) -> bool {
    match mode {
        KMode::Autonomous => (k - reference).abs() <= 0.1 * reference.abs(),
        _ => (k - reference).abs() <= 0.05,
    }
}

/// Runs root finding, periods and `K` for the slow, fast and autonomous
/// presets and compares every value with [`REFERENCE`].
pub fn repro_roots(modes: &[KMode]) -> Result<RootsReport> {
    let mut rows = Vec::new();
    let mut root_counts = Vec::new();
    for &mode in modes {
        let spec = match mode {
            KMode::Slow => crate::presets::coeff_slow(),
            KMode::Fast => crate::presets::coeff_fast(),
            KMode::Autonomous => crate::presets::coeff_autonomous(),
        };
        let opts = crate::generate::RootOptions { mode: Some(mode), ..Default::default() };
        let roots = crate::generate::find_roots(&spec, &opts)?;
        root_counts.push((mode, roots.len()));
        let mode_rows: Vec<RootRow> = roots
            .par_iter()
            .map(|r| {
                let fam = reference_family(r);
                let kb = if r.seed.k == 0 { r.seed.b } else { f64::from(r.seed.k) * r.seed.b };
                let omega_return_map = crate::orbit::period_return_map(&r.seed, spec.gamma).unwrap_or(f64::NAN);
                let k_reference = fam.map(|f| match mode {
                    KMode::Slow => f.k_slow,
                    KMode::Fast => f.k_fast,
                    KMode::Autonomous => f.k_autonomous,
                });
                RootRow {
                    mode,
                    family: fam.map(|f| f.name),
                    seed: r.seed,
                    b_pass: fam.is_some_and(|f| kb > f.b.0 && kb < f.b.1),
                    omega: r.omega_star,
                    omega_return_map,
                    omega_pass: fam.is_some_and(|f| r.omega_star > f.omega.0 && r.omega_star < f.omega.1),
                    omega_agree: ((omega_return_map - r.omega_star) / r.omega_star).abs() < 1e-6,
                    k: r.k_value,
                    k_reference,
                    k_pass: matches!((r.k_value, k_reference), (Some(k), Some(rf)) if k_within_tolerance(mode, k, rf)),
                    admissible: r.admissible,
                }
            })
            .collect();
        rows.extend(mode_rows);
    }
    let all_pass = root_counts.iter().all(|&(_, n)| n == 11)
        && rows.iter().all(|r| r.b_pass && r.omega_pass && r.omega_agree && r.k_pass && r.admissible);
    Ok(RootsReport { root_counts, rows, all_pass })
}

/// One root of the limit-cycle scan.
#[derive(Debug, Clone, Serialize)]
pub struct CycleRow {
    pub seed: crate::model::Seed,
    pub k_autonomous: f64,
    pub bracketed: bool,
    pub located_x: Option<f64>,
    pub reference_x: Option<f64>,
    pub located_pass: Option<bool>,
    pub stability: Option<Stability>,
    pub stability_pass: Option<bool>,
    pub error: Option<String>,
}

/// Limit-cycle scan of the autonomous example at one `ε`.
#[derive(Debug, Clone, Serialize)]
pub struct CyclesReport {
    pub eps: f64,
    pub rows: Vec<CycleRow>,
    pub bracketed: usize,
}

impl CyclesReport {
    /// CSV with one line per root.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,l,b,K,bracketed,located_x,reference_x,located_pass,stability,stability_pass,error\n");
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.7}"));
            let flag = |v: Option<bool>| v.map_or(String::new(), |v| v.to_string());
            let _ = writeln!(
                out,
                "{},{},{:.10},{:.6},{},{},{},{},{},{},\"{}\"",
                r.seed.k,
                r.seed.l,
                r.seed.b,
                r.k_autonomous,
                r.bracketed,
                opt(r.located_x),
                opt(r.reference_x),
                flag(r.located_pass),
                r.stability.map_or(String::new(), |s| format!("{s:?}")),
                flag(r.stability_pass),
                r.error.clone().unwrap_or_default().replace('"', "'")
            );
        }
        out
    }
}

/// Brackets every generating cycle of the autonomous example at `eps`.
/// Located abscissas are compared with the reference values only at
/// `ε = 10⁻³`.
pub fn repro_cycles(eps: f64) -> Result<CyclesReport> {
    let spec = crate::presets::coeff_autonomous();
    let opts = crate::generate::RootOptions { mode: Some(KMode::Autonomous), ..Default::default() };
    let roots = crate::generate::find_roots(&spec, &opts)?;
    let rows: Vec<CycleRow> = roots
        .par_iter()
        .map(|r| {
            let k = r.k_value.unwrap_or(f64::NAN);
            let expected = if k < 0.0 { Stability::StableForward } else { Stability::StableBackward };
            let reference_x = if (eps - 1e-3).abs() < 1e-12 { reference_abscissa(r) } else { None };
            match bracket_cycle(r, &spec, eps) {
                Ok(b) => CycleRow {
                    seed: r.seed,
                    k_autonomous: k,
                    bracketed: true,
                    located_x: Some(b.located_x),
                    reference_x,
                    located_pass: reference_x.map(|x| (b.located_x - x).abs() <= 5e-3),
                    stability: Some(b.stability),
                    stability_pass: Some(b.stability == expected),
                    error: None,
                },
                Err(e) => CycleRow {
                    seed: r.seed,
                    k_autonomous: k,
                    bracketed: false,
                    located_x: None,
                    reference_x,
                    located_pass: None,
                    stability: None,
                    stability_pass: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let bracketed = rows.iter().filter(|r| r.bracketed).count();
    Ok(CyclesReport { eps, rows, bracketed })
}
