//! Adaptive Dormand–Prince 5(4) integrator for planar systems, with the
//! standard fourth-order continuous extension and section-crossing
//! location by re-stepping from the start of the accepted step.

use crate::error::{GtsError, Result};

/// Planar state `(x, y)`.
pub type State = [f64; 2];

/// Tolerances and limits of the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    /// Initial step; zero selects it automatically.
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { atol: 1e-12, rtol: 1e-10, h_init: 0.0, h_max: f64::INFINITY, max_steps: 5_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub t0: f64,
    pub h: f64,
    pub y0: State,
    pub y1: State,
    rcont: [State; 5],
}

impl Step {
    /// End time of the step.
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Dense-output value at `t` inside the step.
    pub fn dense(&self, t: f64) -> State {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        let mut out = [0.0; 2];
        for i in 0..2 {
            out[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        out
    }
}

/// Adaptive Dormand–Prince 5(4) stepper for `y' = f(t, y)`.
pub struct Dopri5<F>
where
    F: FnMut(f64, &State) -> Result<State>,
{
    f: F,
    pub t: f64,
    pub y: State,
    h: f64,
    k1: State,
    opts: OdeOptions,
    steps: usize,
}

impl<F> Dopri5<F>
where
    F: FnMut(f64, &State) -> Result<State>,
{
    /// Prepares integration from `(t0, y0)`.
    pub fn new(mut f: F, t0: f64, y0: State, opts: OdeOptions) -> Result<Self> {
        let k1 = f(t0, &y0)?;
        let mut s = Self { f, t: t0, y: y0, h: 0.0, k1, opts, steps: 0 };
        s.h = if opts.h_init > 0.0 { opts.h_init } else { s.initial_step()? };
        Ok(s)
    }

    fn scaled_norm(&self, v: &State, ya: &State, yb: &State) -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            let sc = self.opts.atol + self.opts.rtol * ya[i].abs().max(yb[i].abs());
            acc += (v[i] / sc).powi(2);
        }
        (acc / 2.0).sqrt()
    }

    fn initial_step(&mut self) -> Result<f64> {
        let y = self.y;
        let d0 = self.scaled_norm(&y, &y, &y);
        let d1 = self.scaled_norm(&self.k1, &y, &y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1 = axpy(&y, h0, &[(1.0, &self.k1)]);
        let f1 = (self.f)(self.t + h0, &y1)?;
        let diff = [f1[0] - self.k1[0], f1[1] - self.k1[1]];
        let d2 = self.scaled_norm(&diff, &y, &y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(self.opts.h_max))
    }

    /// Fresh single step of size `h` from `(t0, y0)` without error control.
    pub fn single_step(&mut self, t0: f64, y0: &State, h: f64) -> Result<State> {
        let k1 = (self.f)(t0, y0)?;
        let (y, _, _) = self.stages(t0, y0, &k1, h)?;
        Ok(y)
    }

    #[allow(clippy::type_complexity)]
    fn stages(&mut self, t: f64, y: &State, k1: &State, h: f64) -> Result<(State, State, [State; 7])> {
        let f = &mut self.f;
        let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]))?;
        let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
        let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = f(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
        let k6 = f(
            t + h,
            &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        )?;
        let y1 = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y1)?;
        let err = axpy(
            &[0.0, 0.0],
            h,
            &[(E1, k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
        );
        Ok((y1, err, [*k1, k2, k3, k4, k5, k6, k7]))
    }

    /// Takes one accepted step that does not pass `t_limit` (`t_limit > t`).
    pub fn step_until(&mut self, t_limit: f64) -> Result<Step> {
        let mut rejected = false;
        loop {
            self.steps += 1;
            if self.steps > self.opts.max_steps {
                return Err(GtsError::StepFail { t: self.t, reason: "step budget exhausted".into() });
            }
            let remaining = t_limit - self.t;
            let mut h = self.h.min(self.opts.h_max);
            let mut last = false;
            if h >= remaining {
                h = remaining;
                last = true;
            }
            if h <= 1e-14 * self.t.abs().max(1.0) && !last {
                return Err(GtsError::StepFail { t: self.t, reason: "step size underflow".into() });
            }
            let y0 = self.y;
            let k1 = self.k1;
            let (y1, err, k) = self.stages(self.t, &y0, &k1, h)?;
            let en = self.scaled_norm(&err, &y0, &y1);
            if !en.is_finite() {
                self.h = 0.25 * h;
                rejected = true;
                continue;
            }
            if en <= 1.0 {
                let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
                let fac = if rejected { fac.min(1.0) } else { fac };
                let diff = [y1[0] - y0[0], y1[1] - y0[1]];
                let bspl = [h * k[0][0] - diff[0], h * k[0][1] - diff[1]];
                let r4 = [diff[0] - h * k[6][0] - bspl[0], diff[1] - h * k[6][1] - bspl[1]];
                let r5 = axpy(
                    &[0.0, 0.0],
                    h,
                    &[(D1, &k[0]), (D3, &k[2]), (D4, &k[3]), (D5, &k[4]), (D6, &k[5]), (D7, &k[6])],
                );
                let step = Step { t0: self.t, h, y0, y1, rcont: [y0, diff, bspl, r4, r5] };
                self.t = if last { t_limit } else { self.t + h };
                self.y = y1;
                self.k1 = k[6];
                if !last || fac > 1.0 {
                    self.h = h * fac;
                }
                if last {
                    self.h = self.h.max(h);
                }
                return Ok(step);
            }
            self.h = h * (0.9 * en.powf(-0.2)).clamp(0.2, 1.0);
            rejected = true;
        }
    }

    /// Integrates to `t_end` and returns the final state.
    pub fn advance_to(&mut self, t_end: f64) -> Result<State> {
        while self.t < t_end {
            self.step_until(t_end)?;
        }
        Ok(self.y)
    }

    /// Locates a zero of `g` inside `step`, given a sign change between
    /// its end points, and returns the time and state at the crossing.
    ///
    /// Every trial state is computed by a fresh step from the start of the
    /// accepted step, so the returned state carries the full order of the
    /// method rather than the interpolation error.
    pub fn locate<G>(&mut self, step: &Step, g: G, tol: f64) -> Result<(f64, State)>
    where
        G: Fn(f64, &State) -> f64,
    {
        let mut lo = 0.0;
        let mut hi = step.h;
        let mut glo = g(step.t0, &step.y0);
        let mut ghi = g(step.t1(), &step.y1);
        let mut best = (step.t1(), step.y1, ghi.abs());
        if glo.abs() < best.2 {
            best = (step.t0, step.y0, glo.abs());
        }
        let mut side = 0i8;
        for _ in 0..80 {
            if best.2 <= tol || (hi - lo) <= 1e-15 * step.t0.abs().max(1.0) {
                break;
            }
            let mut s = (lo * ghi - hi * glo) / (ghi - glo);
            if !(s > lo && s < hi) {
                s = 0.5 * (lo + hi);
            }
            let y = self.single_step(step.t0, &step.y0, s)?;
            let gs = g(step.t0 + s, &y);
            if gs.abs() < best.2 {
                best = (step.t0 + s, y, gs.abs());
            }
            if (gs < 0.0) == (glo < 0.0) {
                lo = s;
                glo = gs;
                if side == -1 {
                    ghi *= 0.5;
                }
                side = -1;
            } else {
                hi = s;
                ghi = gs;
                if side == 1 {
                    glo *= 0.5;
                }
                side = 1;
            }
        }
        Ok((best.0, best.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_: f64, y: &State) -> Result<State> {
        Ok([y[1], -y[0]])
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let mut s = Dopri5::new(oscillator, 0.0, [1.0, 0.0], OdeOptions::default()).unwrap();
        let y = s.advance_to(20.0).unwrap();
        assert!((y[0] - 20f64.cos()).abs() < 1e-9);
        assert!((y[1] + 20f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn dense_output_matches_fresh_steps() {
        let mut s = Dopri5::new(oscillator, 0.0, [1.0, 0.0], OdeOptions::default()).unwrap();
        for _ in 0..20 {
            let st = s.step_until(100.0).unwrap();
            for th in [0.1, 0.37, 0.5, 0.81] {
                let t = st.t0 + th * st.h;
                let d = st.dense(t);
                assert!((d[0] - t.cos()).abs() < 1e-10, "dense x error at {t}");
                assert!((d[1] + t.sin()).abs() < 1e-10, "dense v error at {t}");
            }
        }
    }

    #[test]
    fn event_location_is_accurate() {
        let mut s = Dopri5::new(oscillator, 0.0, [1.0, 0.0], OdeOptions::default()).unwrap();
        loop {
            let st = s.step_until(10.0).unwrap();
            if st.y0[0] > 0.0 && st.y1[0] <= 0.0 {
                let (t, y) = s.locate(&st, |_, y| y[0], 1e-14).unwrap();
                assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
                assert!(y[0].abs() < 1e-13);
                break;
            }
        }
    }
}
