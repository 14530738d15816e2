//! Dormand–Prince 5(4) stepping for complex ODE systems with per-step error
//! control.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step, ns.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rel_tol: 1e-8, abs_tol: 1e-10, max_step: f64::INFINITY, max_steps: 50_000_000 }
    }
}

impl OdeOptions {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        OdeOptions { rel_tol, abs_tol, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidParameter("max_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive integrator; keeps its last accepted step so consecutive calls
/// over adjacent intervals continue smoothly.
#[derive(Clone, Debug)]
pub struct Dopri5 {
    opts: OdeOptions,
    h: Option<f64>,
    pub stats: OdeStats,
    k: [Vec<C64>; 7],
    ytmp: Vec<C64>,
    ynew: Vec<C64>,
}

impl Dopri5 {
    pub fn new(opts: OdeOptions) -> Self {
        Dopri5 {
            opts,
            h: None,
            stats: OdeStats::default(),
            k: Default::default(),
            ytmp: Vec::new(),
            ynew: Vec::new(),
        }
    }

    pub fn options(&self) -> &OdeOptions {
        &self.opts
    }

    fn resize(&mut self, n: usize) {
        if self.ytmp.len() != n {
            for k in self.k.iter_mut() {
                k.resize(n, C64::new(0.0, 0.0));
            }
            self.ytmp.resize(n, C64::new(0.0, 0.0));
            self.ynew.resize(n, C64::new(0.0, 0.0));
        }
    }

    fn error_norm(&self, y: &[C64], h: f64) -> f64 {
        let (rtol, atol) = (self.opts.rel_tol, self.opts.abs_tol);
        let mut acc = 0.0;
        for i in 0..y.len() {
            let err = h
                * (self.k[0][i] * E1
                    + self.k[2][i] * E3
                    + self.k[3][i] * E4
                    + self.k[4][i] * E5
                    + self.k[5][i] * E6
                    + self.k[6][i] * E7);
            let scale = atol + rtol * y[i].norm().max(self.ynew[i].norm());
            acc += (err.norm() / scale).powi(2);
        }
        (acc / y.len().max(1) as f64).sqrt()
    }

    /// Advances `y` from `t0` to `t1` under `dy/dt = f(t, y)`, where `f`
    /// writes the derivative into its last argument.
    pub fn integrate<F>(&mut self, mut f: F, t0: f64, t1: f64, y: &mut [C64]) -> Result<()>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        if t1 <= t0 {
            return Ok(());
        }
        self.opts.validate()?;
        let n = y.len();
        self.resize(n);
        let span = t1 - t0;
        let mut t = t0;

        f(t, y, &mut self.k[0]);
        self.stats.evaluations += 1;
        let mut h = match self.h {
            Some(h) => h,
            None => {
                // scaled-norm starting guess
                let (rtol, atol) = (self.opts.rel_tol, self.opts.abs_tol);
                let (mut d0, mut d1) = (0.0, 0.0);
                for (yi, fi) in y.iter().zip(&self.k[0]) {
                    let sc = atol + rtol * yi.norm();
                    d0 += (yi.norm() / sc).powi(2);
                    d1 += (fi.norm() / sc).powi(2);
                }
                let (d0, d1) = ((d0 / n as f64).sqrt(), (d1 / n as f64).sqrt());
                let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
                guess.min(span)
            }
        };
        h = h.min(self.opts.max_step);
        let mut steps = 0usize;
        loop {
            let remaining = t1 - t;
            if remaining <= span * 1e-14 {
                break;
            }
            let last = h >= remaining;
            let hs = if last { remaining } else { h };
            if hs <= t.abs().max(span) * 1e-14 {
                return Err(Error::StepUnderflow { t, h: hs });
            }
            steps += 1;
            if steps > self.opts.max_steps {
                return Err(Error::StepBudget { t, max_steps: self.opts.max_steps });
            }
            self.stage(&mut f, t, hs, y);
            let err = self.error_norm(y, hs);
            if err <= 1.0 {
                t = if last { t1 } else { t + hs };
                y.copy_from_slice(&self.ynew);
                self.k.swap(0, 6);
                self.stats.accepted += 1;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || factor < 1.0 {
                    h = (hs * factor).min(self.opts.max_step);
                }
            } else {
                self.stats.rejected += 1;
                let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 1.0) } else { 0.1 };
                h = hs * factor;
            }
        }
        self.h = Some(h);
        Ok(())
    }

    fn stage<F>(&mut self, f: &mut F, t: f64, h: f64, y: &[C64])
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let n = y.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let yt = &mut self.ytmp;
        for i in 0..n {
            yt[i] = y[i] + k1[i] * (h * A21);
        }
        f(t + C2 * h, yt, k2);
        for i in 0..n {
            yt[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        f(t + C3 * h, yt, k3);
        for i in 0..n {
            yt[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        f(t + C4 * h, yt, k4);
        for i in 0..n {
            yt[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        f(t + C5 * h, yt, k5);
        for i in 0..n {
            yt[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        f(t + h, yt, k6);
        let yn = &mut self.ynew;
        for i in 0..n {
            yn[i] = y[i] + (k1[i] * B1 + k3[i] * B3 + k4[i] * B4 + k5[i] * B5 + k6[i] * B6) * h;
        }
        f(t + h, yn, k7);
        self.stats.evaluations += 6;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_and_rotation() {
        // y' = (-0.3 + 2i) y
        let rate = C64::new(-0.3, 2.0);
        let mut y = vec![C64::new(1.0, 0.0)];
        let mut ode = Dopri5::new(OdeOptions::with_tolerances(1e-11, 1e-13));
        ode.integrate(|_, y, dy| dy[0] = rate * y[0], 0.0, 5.0, &mut y).unwrap();
        let exact = (rate * 5.0).exp();
        assert!((y[0] - exact).norm() < 1e-9, "{}", (y[0] - exact).norm());
        assert!(ode.stats.accepted > 10);
    }

    #[test]
    fn time_dependent_forcing() {
        // y' = cos t  ⇒  y = sin t
        let mut y = vec![C64::new(0.0, 0.0)];
        let mut ode = Dopri5::new(OdeOptions::with_tolerances(1e-10, 1e-12));
        ode.integrate(|t, _, dy| dy[0] = C64::new(t.cos(), 0.0), 0.0, 20.0, &mut y).unwrap();
        assert!((y[0].re - 20f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn chained_intervals_match_single_interval() {
        let rate = C64::new(0.0, 1.3);
        let mut a = vec![C64::new(1.0, 0.0)];
        let mut b = a.clone();
        let opts = OdeOptions::with_tolerances(1e-11, 1e-13);
        let mut ode = Dopri5::new(opts);
        for i in 0..10 {
            ode.integrate(|_, y, dy| dy[0] = rate * y[0], i as f64, (i + 1) as f64, &mut a).unwrap();
        }
        Dopri5::new(opts).integrate(|_, y, dy| dy[0] = rate * y[0], 0.0, 10.0, &mut b).unwrap();
        assert!((a[0] - b[0]).norm() < 1e-9);
    }

    #[test]
    fn step_budget_is_enforced() {
        let mut y = vec![C64::new(1.0, 0.0)];
        let opts = OdeOptions { max_steps: 5, ..OdeOptions::with_tolerances(1e-12, 1e-14) };
        let r = Dopri5::new(opts).integrate(|_, y, dy| dy[0] = C64::new(0.0, 50.0) * y[0], 0.0, 100.0, &mut y);
        assert!(matches!(r, Err(Error::StepBudget { .. })));
    }
}
