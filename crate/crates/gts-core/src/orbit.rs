//! Cycles of the unperturbed system: level-curve branches, periods by
//! singular quadrature and by return-map integration, and uniform-grid
//! parametrizations.

use serde::Serialize;

use crate::error::{GtsError, Result};
use crate::model::{classify, hamiltonian_level, unperturbed_field, CycleClass, Seed};
use crate::ode::{Dopri5, OdeOptions, State};
use crate::quad::TanhSinh;

/// Sign selector of the two `S`-branches of a level curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// `S_±(C²) = (1 ± γ^{-1/2}(a − (C² − 1)²)^{1/2})^{1/2}`.
pub fn s_branch(csq: f64, a: f64, gamma: f64, sign: Branch) -> Result<f64> {
    let d = a - (csq - 1.0).powi(2);
    if d < -1e-12 {
        return Err(GtsError::BranchDomain(d));
    }
    let inner = (d.max(0.0) / gamma).sqrt();
    let r = match sign {
        Branch::Plus => 1.0 + inner,
        Branch::Minus => 1.0 - inner,
    };
    if r < -1e-12 {
        return Err(GtsError::BranchDomain(r));
    }
    Ok(r.max(0.0).sqrt())
}

/// Distinguished abscissa magnitudes of a level curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Point {
    /// `C = 0`.
    Axis,
    /// Outer turning value `(1 + √a)^{1/2}`.
    TurnHi,
    /// Inner turning value `(1 − √a)^{1/2}`.
    TurnLo,
    /// Outer zero of `S_−`, `(1 + √(a − γ))^{1/2}`.
    ZeroHi,
    /// Inner zero of `S_−`, `(1 − √(a − γ))^{1/2}`.
    ZeroLo,
}

/// Exact offsets `|C| − point` supplied by the quadrature near endpoints.
#[derive(Debug, Clone, Copy, Default)]
pub struct Offsets {
    pub turn_hi: Option<f64>,
    pub turn_lo: Option<f64>,
    pub zero_hi: Option<f64>,
    pub zero_lo: Option<f64>,
}

impl Offsets {
    fn set(&mut self, p: Point, d: f64) {
        match p {
            Point::Axis => {}
            Point::TurnHi => self.turn_hi = Some(d),
            Point::TurnLo => self.turn_lo = Some(d),
            Point::ZeroHi => self.zero_hi = Some(d),
            Point::ZeroLo => self.zero_lo = Some(d),
        }
    }
}

/// Branch values at one abscissa magnitude.
#[derive(Debug, Clone, Copy)]
pub struct BranchValues {
    /// `D = a − (C² − 1)²`.
    pub d: f64,
    pub s_plus: f64,
    pub s_minus: f64,
}

impl BranchValues {
    /// Value of the selected branch.
    pub fn s(&self, br: Branch) -> f64 {
        match br {
            Branch::Plus => self.s_plus,
            Branch::Minus => self.s_minus,
        }
    }

    /// `|ζ_±| = 1 / |γ(S³ − S)|` on the selected branch.
    pub fn zeta_abs(&self, br: Branch, gamma: f64) -> f64 {
        1.0 / (self.s(br) * (gamma * self.d).sqrt())
    }
}

/// Piece of a closed level curve traversed in the direction of motion.
///
/// Along the arc `C = c_sign·u` with `u` running from `u_from` to `u_to`,
/// and `S = s_sign·S_branch(u²)`.
#[derive(Debug, Clone, Copy)]
pub struct Arc {
    pub from: Point,
    pub to: Point,
    pub c_sign: f64,
    pub s_sign: f64,
    pub branch: Branch,
}

/// Level curve `(C² − 1)² + γ(S² − 1)² = a` through a seed, with its
/// distinguished points and arc decomposition.
#[derive(Debug, Clone)]
pub struct LevelCurve {
    pub seed: Seed,
    pub class: CycleClass,
    pub gamma: f64,
    pub a: f64,
    sqrt_a: f64,
    theta: f64,
    pub t_hi: f64,
    pub t_lo: f64,
    pub z_hi: f64,
    pub z_lo: f64,
    /// Sign maps `(C, S) → (c_map·C, s_map·S)` from the canonical curve.
    pub c_map: f64,
    pub s_map: f64,
    arcs: Vec<Arc>,
}

impl LevelCurve {
    /// Builds the level curve of a valid seed.
    pub fn new(seed: &Seed, gamma: f64) -> Result<Self> {
        let class = classify(seed, gamma)?;
        let b = seed.b.abs();
        let a = seed.level(gamma);
        let sqrt_a = a.sqrt();
        let theta = a - gamma;
        let sq = |v: f64| if v >= 0.0 { v.sqrt() } else { f64::NAN };
        let mut t_hi = (1.0 + sqrt_a).sqrt();
        let t_lo = sq(1.0 - sqrt_a);
        let mut z_hi = if theta >= 0.0 { (1.0 + theta.sqrt()).sqrt() } else { f64::NAN };
        let mut z_lo = if theta >= 0.0 { sq(1.0 - theta.sqrt()) } else { f64::NAN };
        use Branch::{Minus, Plus};
        use Point::*;
        let arc = |from, to, c_sign, s_sign, branch| Arc { from, to, c_sign, s_sign, branch };
        let arcs = match class {
            CycleClass::ZeroInner => {
                z_lo = b;
                vec![
                    arc(ZeroLo, Axis, 1.0, 1.0, Minus),
                    arc(Axis, ZeroLo, -1.0, 1.0, Minus),
                    arc(ZeroLo, Axis, -1.0, -1.0, Minus),
                    arc(Axis, ZeroLo, 1.0, -1.0, Minus),
                ]
            }
            CycleClass::ZeroOuter => {
                z_hi = b;
                vec![
                    arc(ZeroHi, TurnHi, 1.0, -1.0, Minus),
                    arc(TurnHi, Axis, 1.0, -1.0, Plus),
                    arc(Axis, TurnHi, -1.0, -1.0, Plus),
                    arc(TurnHi, ZeroHi, -1.0, -1.0, Minus),
                    arc(ZeroHi, TurnHi, -1.0, 1.0, Minus),
                    arc(TurnHi, Axis, -1.0, 1.0, Plus),
                    arc(Axis, TurnHi, 1.0, 1.0, Plus),
                    arc(TurnHi, ZeroHi, 1.0, 1.0, Minus),
                ]
            }
            CycleClass::One => {
                z_hi = b;
                vec![
                    arc(ZeroHi, TurnHi, 1.0, -1.0, Minus),
                    arc(TurnHi, TurnLo, 1.0, -1.0, Plus),
                    arc(TurnLo, ZeroLo, 1.0, -1.0, Minus),
                    arc(ZeroLo, TurnLo, 1.0, 1.0, Minus),
                    arc(TurnLo, TurnHi, 1.0, 1.0, Plus),
                    arc(TurnHi, ZeroHi, 1.0, 1.0, Minus),
                ]
            }
            CycleClass::Two => {
                t_hi = b;
                vec![arc(TurnHi, TurnLo, 1.0, 1.0, Minus), arc(TurnLo, TurnHi, 1.0, 1.0, Plus)]
            }
        };
        let (c_map, s_map) = match class {
            CycleClass::ZeroInner | CycleClass::ZeroOuter => (1.0, 1.0),
            CycleClass::One => {
                let s = f64::from(seed.k.signum());
                (s, s)
            }
            CycleClass::Two => (f64::from(seed.k.signum()), f64::from(seed.l.signum())),
        };
        Ok(Self {
            seed: *seed,
            class,
            gamma,
            a,
            sqrt_a,
            theta,
            t_hi,
            t_lo,
            z_hi,
            z_lo,
            c_map,
            s_map,
            arcs,
        })
    }

    /// Arc decomposition of the canonical curve (positive `k`, `l`, `b`).
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// `+1` when the mirrored curve keeps the canonical orientation.
    pub fn orientation(&self) -> f64 {
        self.c_map * self.s_map
    }

    /// Magnitude of a distinguished point.
    pub fn point(&self, p: Point) -> f64 {
        match p {
            Point::Axis => 0.0,
            Point::TurnHi => self.t_hi,
            Point::TurnLo => self.t_lo,
            Point::ZeroHi => self.z_hi,
            Point::ZeroLo => self.z_lo,
        }
    }

    /// Branch values at `|C| = u`, using exact offsets where supplied.
    pub fn branches(&self, u: f64, off: &Offsets) -> BranchValues {
        let u2 = u * u;
        let f1 = match off.turn_hi {
            Some(h) => -h * (2.0 * self.t_hi + h),
            None => (1.0 + self.sqrt_a) - u2,
        };
        let f2 = match off.turn_lo {
            Some(l) => l * (2.0 * self.t_lo + l),
            None => u2 - (1.0 - self.sqrt_a),
        };
        let d = (f1 * f2).max(0.0);
        let g = self.gamma;
        let gd = if self.theta >= 0.0 {
            let g1 = match off.zero_hi {
                Some(z) => z * (2.0 * self.z_hi + z),
                None => u2 - (1.0 + self.theta.sqrt()),
            };
            let g2 = match off.zero_lo {
                Some(z) => z * (2.0 * self.z_lo + z),
                None => u2 - (1.0 - self.theta.sqrt()),
            };
            g1 * g2
        } else {
            (u2 - 1.0).powi(2) - self.theta
        };
        let root = (d / g).sqrt();
        BranchValues {
            d,
            s_plus: (1.0 + root).sqrt(),
            s_minus: (gd.max(0.0) / (g + (g * d).sqrt())).sqrt(),
        }
    }

    /// Integrates `h(u, branch values)` along `arc` in `u`, from `u_from`
    /// to `u_to`, with exact endpoint offsets.
    pub fn arc_integral<H>(&self, quad: &TanhSinh, arc: &Arc, mut h: H) -> Result<f64>
    where
        H: FnMut(f64, &BranchValues) -> f64,
    {
        let u0 = self.point(arc.from);
        let u1 = self.point(arc.to);
        let (lo, hi, p_lo, p_hi, sgn) =
            if u0 <= u1 { (u0, u1, arc.from, arc.to, 1.0) } else { (u1, u0, arc.to, arc.from, -1.0) };
        let r = quad.integrate(lo, hi, |u, dl, dr| {
            let mut off = Offsets::default();
            off.set(p_lo, dl);
            off.set(p_hi, -dr);
            let bv = self.branches(u, &off);
            h(u, &bv)
        })?;
        Ok(sgn * r.value)
    }

    /// Period by quadrature of `|ζ_±|` over all arcs.
    pub fn period(&self, quad: &TanhSinh) -> Result<f64> {
        let g = self.gamma;
        let mut total = 0.0;
        for arc in &self.arcs {
            let br = arc.branch;
            total += self.arc_integral(quad, arc, |_, bv| bv.zeta_abs(br, g))?.abs();
        }
        Ok(total)
    }

    /// Directed line integral `∮ C^m S^n dC` along the cycle of the seed.
    pub fn moment(&self, quad: &TanhSinh, m: u32, n: u32) -> Result<f64> {
        let mut canon = 0.0;
        for arc in &self.arcs {
            let br = arc.branch;
            let scale = arc.c_sign.powi(m as i32 + 1) * arc.s_sign.powi(n as i32);
            let v = self.arc_integral(quad, arc, |u, bv| u.powi(m as i32) * bv.s(br).powi(n as i32))?;
            canon += scale * v;
        }
        let mirror = self.orientation() * self.c_map.powi(m as i32 + 1) * self.s_map.powi(n as i32);
        Ok(mirror * canon)
    }
}

/// Period of the seed's cycle by singular quadrature.
pub fn period_quadrature(seed: &Seed, gamma: f64) -> Result<f64> {
    LevelCurve::new(seed, gamma)?.period(&TanhSinh::default())
}

fn field(gamma: f64) -> impl FnMut(f64, &State) -> Result<State> {
    move |_, y| {
        let (u, v) = unperturbed_field(y[0], y[1], gamma);
        Ok([u, v])
    }
}

/// Period of the seed's cycle by integrating to the first return to the
/// starting section.
///
/// Classes 1 and 2 use `{S = l}` on the starting side of `k`; class 0
/// uses `{S = 0, C > 0}`. Crossings are matched in the starting direction.
pub fn period_return_map(seed: &Seed, gamma: f64) -> Result<f64> {
    let class = classify(seed, gamma)?;
    let coarse = period_quadrature(seed, gamma).unwrap_or(100.0);
    let limit = 10.0 * coarse;
    let l = f64::from(seed.l);
    let k = f64::from(seed.k);
    let start = [seed.b, l];
    let dir = unperturbed_field(seed.b, l, gamma).1.signum();
    let side = (seed.b - k).signum();
    let on_side = |c: f64| match class {
        CycleClass::ZeroInner | CycleClass::ZeroOuter => c > 0.0,
        _ => (c - k).signum() == side,
    };
    let mut ode = Dopri5::new(field(gamma), 0.0, start, OdeOptions::default())?;
    while ode.t < limit {
        let st = ode.step_until(limit)?;
        let g0 = dir * (st.y0[1] - l);
        let g1 = dir * (st.y1[1] - l);
        if g0 < 0.0 && g1 >= 0.0 && on_side(st.y1[0]) && on_side(st.y0[0]) {
            let (t, _) = ode.locate(&st, |_, y| y[1] - l, 1e-14)?;
            return Ok(t);
        }
    }
    Err(GtsError::NoReturn { limit })
}

/// Uniformly sampled periodic solution of the unperturbed system.
#[derive(Debug, Clone, Serialize)]
pub struct CycleParam {
    pub seed: Seed,
    pub class: CycleClass,
    pub gamma: f64,
    /// Level value `a`.
    pub a: f64,
    pub omega: f64,
    pub phi: Vec<f64>,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub dc: Vec<f64>,
    pub ds: Vec<f64>,
    /// Distance between the state after one period and the start.
    pub wrap_error: f64,
}

impl CycleParam {
    /// Number of samples.
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    /// True if there are no samples.
    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// Maximum of `|level − a|` over the samples.
    pub fn level_drift(&self) -> f64 {
        self.c
            .iter()
            .zip(&self.s)
            .map(|(&c, &s)| (hamiltonian_level(c, s, self.gamma) - self.a).abs())
            .fold(0.0, f64::max)
    }

    /// Maximum of `max(|C|, |S|)` over the samples.
    pub fn max_abs(&self) -> f64 {
        self.c.iter().chain(&self.s).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum of `|values|` refined by a parabola through the largest
    /// sample and its periodic neighbours.
    pub fn peak_abs(&self, values: &[f64]) -> f64 {
        let n = values.len();
        let (i, _) = values
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
        let y0 = values[(i + n - 1) % n].abs();
        let y1 = values[i].abs();
        let y2 = values[(i + 1) % n].abs();
        let den = y0 - 2.0 * y1 + y2;
        if den >= 0.0 {
            return y1;
        }
        y1 - 0.125 * (y2 - y0).powi(2) / den
    }

    /// Trapezoidal mean over one period of per-sample values.
    pub fn mean_of(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Samples the cycle through `(b, l)` on `n_samples` uniform nodes.
///
/// The period comes from quadrature; states are obtained by integrating
/// node to node, and derivatives from the vector field.
pub fn parametrize(seed: &Seed, gamma: f64, n_samples: usize) -> Result<CycleParam> {
    if n_samples < 64 || !n_samples.is_power_of_two() {
        return Err(GtsError::InvalidSystem(format!(
            "sample count {n_samples} must be a power of two and at least 64"
        )));
    }
    let curve = LevelCurve::new(seed, gamma)?;
    let omega = curve.period(&TanhSinh::default())?;
    let l = f64::from(seed.l);
    let mut ode = Dopri5::new(field(gamma), 0.0, [seed.b, l], OdeOptions::default())?;
    let h = omega / n_samples as f64;
    let mut phi = Vec::with_capacity(n_samples);
    let mut c = Vec::with_capacity(n_samples);
    let mut s = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let t = i as f64 * h;
        let y = if i == 0 { [seed.b, l] } else { ode.advance_to(t)? };
        phi.push(t);
        c.push(y[0]);
        s.push(y[1]);
    }
    let end = ode.advance_to(omega)?;
    let wrap_error = ((end[0] - seed.b).powi(2) + (end[1] - l).powi(2)).sqrt();
    let (dc, ds): (Vec<f64>, Vec<f64>) =
        c.iter().zip(&s).map(|(&ci, &si)| unperturbed_field(ci, si, gamma)).unzip();
    Ok(CycleParam { seed: *seed, class: curve.class, gamma, a: curve.a, omega, phi, c, s, dc, ds, wrap_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::extremals;
    use approx::assert_relative_eq;

    #[test]
    fn branch_values_at_special_points() {
        let a: f64 = 0.7;
        let tp = 1.0 + a.sqrt();
        assert_relative_eq!(s_branch(tp, a, 0.5, Branch::Plus).unwrap(), 1.0);
        assert_relative_eq!(s_branch(tp, a, 0.5, Branch::Minus).unwrap(), 1.0);
        assert_relative_eq!(s_branch(1.0, 0.5, 0.5, Branch::Plus).unwrap(), 2f64.sqrt());
        assert_relative_eq!(s_branch(1.0, 0.5, 0.5, Branch::Minus).unwrap(), 0.0);
        assert!(s_branch(4.0, 0.5, 0.5, Branch::Plus).is_err());
    }

    #[test]
    fn anchored_branches_match_plain_formula() {
        let seed = Seed::new(1, 0, 1.13);
        let lc = LevelCurve::new(&seed, 0.5).unwrap();
        for u in [lc.t_lo + 0.01, 0.9, 1.05, lc.t_hi - 0.01] {
            let bv = lc.branches(u, &Offsets::default());
            let mut off = Offsets::default();
            off.turn_hi = Some(u - lc.t_hi);
            off.turn_lo = Some(u - lc.t_lo);
            let bw = lc.branches(u, &off);
            assert_relative_eq!(bv.s_plus, s_branch(u * u, lc.a, 0.5, Branch::Plus).unwrap(), epsilon = 1e-12);
            assert_relative_eq!(bv.s_plus, bw.s_plus, epsilon = 1e-12);
            assert_relative_eq!(bv.s_minus, bw.s_minus, epsilon = 1e-12);
        }
    }

    #[test]
    fn periods_in_published_ranges() {
        let w0 = period_quadrature(&Seed::new(0, 0, 1.808), 0.5).unwrap();
        assert!(w0 > 3.81 && w0 < 3.94, "{w0}");
        let w1 = period_quadrature(&Seed::new(1, 0, 1.136), 0.5).unwrap();
        assert!(w1 > 13.25 && w1 < 14.05, "{w1}");
        let w3 = period_quadrature(&Seed::new(1, 1, 1.301), 0.5).unwrap();
        assert!(w3 > 7.72 && w3 < 8.49, "{w3}");
    }

    #[test]
    fn quadrature_matches_return_map_per_class() {
        for seed in [
            Seed::new(0, 0, 0.2),
            Seed::new(0, 0, 1.808),
            Seed::new(1, 0, 1.136),
            Seed::new(-1, 0, -1.2),
            Seed::new(1, 1, 1.27),
            Seed::new(1, -1, 1.3),
            Seed::new(-1, 1, -1.1),
        ] {
            let q = period_quadrature(&seed, 0.5).unwrap();
            let r = period_return_map(&seed, 0.5).unwrap();
            assert!((q - r).abs() <= 1e-6 * q, "{seed:?}: {q} vs {r}");
        }
    }

    #[test]
    fn quarter_and_half_period_points() {
        let seed = Seed::new(0, 0, 0.2);
        let p = parametrize(&seed, 0.5, 256).unwrap();
        let e = extremals(&seed, 0.5).unwrap();
        assert!(p.c[64].abs() < 1e-8);
        assert_relative_eq!(p.s[64], e.u0_0i.unwrap(), epsilon = 1e-8);
        let seed = Seed::new(1, 0, 1.136);
        let p = parametrize(&seed, 0.5, 256).unwrap();
        let e = extremals(&seed, 0.5).unwrap();
        assert_relative_eq!(p.c[128], e.l1_0.unwrap(), epsilon = 1e-8);
        assert!(p.s[128].abs() < 1e-8);
    }

    #[test]
    fn parametrization_invariants() {
        let seed = Seed::new(0, 0, 1.808);
        let p = parametrize(&seed, 0.5, 1024).unwrap();
        assert_eq!(p.c[0], 1.808);
        assert_eq!(p.s[0], 0.0);
        assert!(p.s[1] < 0.0);
        assert!(p.level_drift() < 1e-8);
        assert!(p.wrap_error < 1e-8);
        let e = extremals(&seed, 0.5).unwrap();
        let smax = p.peak_abs(&p.s);
        let cmax = p.peak_abs(&p.c);
        assert!((smax - e.u0_1e.unwrap()).abs() < 1e-6);
        assert!((cmax - e.r0_1e.unwrap()).abs() < 1e-6);
    }

    #[test]
    fn moments_vanish_by_symmetry() {
        let lc = LevelCurve::new(&Seed::new(1, 0, 1.136), 0.5).unwrap();
        let q = TanhSinh::default();
        assert!(lc.moment(&q, 1, 2).unwrap().abs() < 1e-12);
        let area = lc.moment(&q, 0, 1).unwrap();
        assert!(area > 0.0, "a clockwise cycle has positive ∮S dC: {area}");
    }
}
