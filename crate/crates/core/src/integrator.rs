//! Explicit Runge–Kutta integrators for three-component complex states.
//!
//! [`DormandPrince`] is the embedded 5(4) pair with first-same-as-last
//! stages and an error-per-step controller; [`rk4`] is the classical fixed-step
//! scheme kept for cross-checks.

use nalgebra::Vector3;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type State3 = Vector3<C64>;

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

// fifth-order minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(y: &State3, h: f64, terms: &[(f64, &State3)]) -> State3 {
    let mut out = *y;
    for (w, k) in terms {
        out.axpy(C64::new(w * h, 0.0), k, C64::new(1.0, 0.0));
    }
    out
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl std::ops::AddAssign for StepStats {
    fn add_assign(&mut self, rhs: Self) {
        self.accepted += rhs.accepted;
        self.rejected += rhs.rejected;
        self.evaluations += rhs.evaluations;
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct DormandPrince {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Steps shorter than this abort with [`Error::StepFailure`].
    pub min_step: f64,
}

impl DormandPrince {
    fn error_ratio(&self, y: &State3, y_new: &State3, err: &State3) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..3 {
            let scale = self.abs_tol + self.rel_tol * y[k].norm().max(y_new[k].norm());
            worst = worst.max(err[k].norm() / scale);
        }
        worst
    }

    /// Advance `y` from `t0` to exactly `t1`.
    ///
    /// `h` is the trial step on entry and the suggested next step on exit, so
    /// consecutive calls over adjacent segments keep the controller warm.
    pub fn advance<F>(&self, f: &F, t0: f64, t1: f64, y: &mut State3, h: &mut f64) -> Result<StepStats>
    where
        F: Fn(f64, &State3) -> State3,
    {
        let mut stats = StepStats::default();
        if t1 <= t0 {
            return Ok(stats);
        }
        let mut t = t0;
        if !(*h > 0.0) {
            *h = (t1 - t0).min(self.max_step);
        }
        let mut k1 = f(t, y);
        stats.evaluations += 1;

        loop {
            let remaining = t1 - t;
            let mut step = h.min(self.max_step);
            let last = step >= remaining;
            if last {
                step = remaining;
            }

            let k2 = f(t + C2 * step, &combine(y, step, &[(A21, &k1)]));
            let k3 = f(t + C3 * step, &combine(y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * step, &combine(y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(t + C5 * step, &combine(y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(
                t + step,
                &combine(y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = combine(y, step, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let t_new = if last { t1 } else { t + step };
            let k7 = f(t_new, &y_new);
            stats.evaluations += 6;

            let zero = State3::zeros();
            let err = combine(&zero, step, &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);
            let ratio = self.error_ratio(y, &y_new, &err);

            if ratio <= 1.0 {
                stats.accepted += 1;
                *y = y_new;
                t = t_new;
                k1 = k7;
                let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
                // a clipped final step says little about the natural step size
                if !last || step >= *h {
                    *h = step * grow;
                }
                if last {
                    return Ok(stats);
                }
            } else {
                stats.rejected += 1;
                *h = step * (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
                if *h < self.min_step {
                    return Err(Error::StepFailure { t, h: *h });
                }
            }
        }
    }
}

/// Classical fourth-order Runge–Kutta with `steps` equal steps.
pub fn rk4<F>(f: &F, t0: f64, t1: f64, y0: State3, steps: usize) -> State3
where
    F: Fn(f64, &State3) -> State3,
{
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    for k in 0..steps {
        let t = t0 + h * k as f64;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &combine(&y, h, &[(0.5, &k1)]));
        let k3 = f(t + 0.5 * h, &combine(&y, h, &[(0.5, &k2)]));
        let k4 = f(t + h, &combine(&y, h, &[(1.0, &k3)]));
        y = combine(&y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]);
    }
    y
}
