//! Pulse envelopes, the interaction window, and the instantaneous
//! quantities derived from the pump/Stokes pair.
//!
//! Time is measured in units of the pulse duration by convention (`tau = 1`),
//! so every frequency is a product with `tau`. Nothing here relies on that
//! choice; `tau` is carried explicitly.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported envelope exponent.
pub const MAX_ENVELOPE_EXPONENT: u32 = 8;

/// Full description of a pump/Stokes experiment.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseConfig {
    /// Envelope exponent of the `cos^n` family.
    pub n: u32,
    /// Pulse duration.
    pub tau: f64,
    /// Delay of the pump behind the Stokes pulse.
    pub t_d: f64,
    /// Peak pump Rabi frequency.
    pub omega_p0: f64,
    /// Peak Stokes Rabi frequency.
    pub omega_s0: f64,
    /// Decay rate of the excited state.
    pub gamma: f64,
}

impl PulseConfig {
    pub fn new(n: u32, tau: f64, t_d: f64, omega_p0: f64, omega_s0: f64, gamma: f64) -> Result<Self> {
        let cfg = Self { n, tau, t_d, omega_p0, omega_s0, gamma };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `n = 1`, `t_d = tau/2`, equal amplitudes: total Rabi frequency is
    /// constant and the mixing angle is linear across the overlap.
    pub fn exact_case(omega0: f64, gamma: f64) -> Self {
        Self { n: 1, tau: 1.0, t_d: 0.5, omega_p0: omega0, omega_s0: omega0, gamma }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n == 0 || self.n > MAX_ENVELOPE_EXPONENT {
            return bad(&format!(
                "envelope exponent must be in 1..={MAX_ENVELOPE_EXPONENT}, got {}",
                self.n
            ));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return bad("pulse duration must be positive");
        }
        if !(self.t_d.is_finite() && self.t_d > 0.0) {
            return bad("Stokes-pump delay must be positive");
        }
        if !(self.omega_p0.is_finite() && self.omega_p0 > 0.0) {
            return bad("pump amplitude must be positive");
        }
        if !(self.omega_s0.is_finite() && self.omega_s0 > 0.0) {
            return bad("Stokes amplitude must be positive");
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad("decay rate must be non-negative");
        }
        Ok(())
    }

    pub fn is_exact_case(&self) -> bool {
        let tol = 1e-12;
        self.n == 1
            && (self.t_d - 0.5 * self.tau).abs() <= tol * self.tau
            && (self.omega_p0 - self.omega_s0).abs() <= tol * self.omega_p0
    }

    /// Earliest and latest instants with a nonzero field: Stokes turn-on and
    /// pump turn-off.
    pub fn field_span(&self) -> (f64, f64) {
        let half = 0.5 * (self.tau + self.t_d);
        (-half, half)
    }

    /// Points where the envelopes switch on or off, in increasing order.
    /// The integrators never step across these.
    pub fn breakpoints(&self) -> [f64; 4] {
        let half = 0.5 * self.tau;
        let shift = 0.5 * self.t_d;
        let mut pts = [-half - shift, -half + shift, half - shift, half + shift];
        pts.sort_by(f64::total_cmp);
        pts
    }
}

/// `cos^n(pi t / tau)` on `|t| < tau/2`, exactly zero elsewhere.
pub fn envelope(n: u32, tau: f64, t: f64) -> f64 {
    if t.abs() >= 0.5 * tau {
        return 0.0;
    }
    (PI * t / tau).cos().powi(n as i32)
}

/// Value and first two derivatives of an envelope.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct EnvelopeJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Closed-form derivatives of `cos^n(pi u / tau)` for `|u| <= tau/2`.
///
/// On the support boundary the one-sided limits from inside the pulse are
/// returned, with the value snapped to exactly zero. Outside the support
/// everything is zero.
pub fn envelope_jet(n: u32, tau: f64, u: f64) -> EnvelopeJet {
    let half = 0.5 * tau;
    let gap = half - u.abs();
    if gap < -4.0 * f64::EPSILON * tau {
        return EnvelopeJet { value: 0.0, d1: 0.0, d2: 0.0 };
    }
    let k = PI / tau;
    let (c, s) = if gap <= 4.0 * f64::EPSILON * tau {
        (0.0, u.signum())
    } else {
        let (s, c) = (k * u).sin_cos();
        (c, s)
    };
    let nf = n as f64;
    let cn = c.powi(n as i32);
    let cn1 = c.powi(n as i32 - 1);
    let cn2 = if n >= 2 { c.powi(n as i32 - 2) } else { 0.0 };
    EnvelopeJet {
        value: cn,
        d1: -nf * k * cn1 * s,
        d2: nf * k * k * ((nf - 1.0) * cn2 * s * s - cn),
    }
}

/// Pump and Stokes Rabi frequencies at `t`.
pub fn rabi_pair(cfg: &PulseConfig, t: f64) -> (f64, f64) {
    (
        cfg.omega_p0 * envelope(cfg.n, cfg.tau, t - 0.5 * cfg.t_d),
        cfg.omega_s0 * envelope(cfg.n, cfg.tau, t + 0.5 * cfg.t_d),
    )
}

/// Instantaneous mixing angle, total Rabi frequency, and their derivatives.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct MixingFrame {
    pub t: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub theta_ddot: f64,
    pub omega: f64,
    pub omega_dot: f64,
    pub omega_tilde: f64,
}

impl MixingFrame {
    fn from_parts(t: f64, theta: f64, theta_dot: f64, theta_ddot: f64, omega: f64, omega_dot: f64) -> Self {
        let omega_tilde = (omega * omega + 4.0 * theta_dot * theta_dot).sqrt();
        Self { t, theta, theta_dot, theta_ddot, omega, omega_dot, omega_tilde }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct InteractionWindow {
    /// Pump turn-on.
    pub t_i: f64,
    /// Stokes turn-off.
    pub t_f: f64,
    pub overlap: bool,
}

impl InteractionWindow {
    pub fn duration(&self) -> f64 {
        self.t_f - self.t_i
    }

    pub fn contains(&self, t: f64) -> bool {
        self.overlap && t >= self.t_i && t <= self.t_f
    }
}

pub fn interaction_window(cfg: &PulseConfig) -> InteractionWindow {
    let half = 0.5 * (cfg.tau - cfg.t_d);
    InteractionWindow { t_i: -half, t_f: half, overlap: cfg.t_d < cfg.tau }
}

/// Mixing frame at `t`.
///
/// Inside the overlap window the derivatives come from the closed-form
/// envelope derivatives (one-sided at the window edges). Where only the
/// Stokes pulse is on the angle is pinned to 0, where only the pump is on to
/// pi/2, with vanishing angle derivatives.
pub fn mixing_frame(cfg: &PulseConfig, t: f64) -> Result<MixingFrame> {
    let win = interaction_window(cfg);
    let edge = 8.0 * f64::EPSILON * cfg.tau;
    let up = t - 0.5 * cfg.t_d;
    let us = t + 0.5 * cfg.t_d;

    if win.overlap && t >= win.t_i - edge && t <= win.t_f + edge {
        let jp = envelope_jet(cfg.n, cfg.tau, up);
        let js = envelope_jet(cfg.n, cfg.tau, us);
        let (p, p1, p2) = (cfg.omega_p0 * jp.value, cfg.omega_p0 * jp.d1, cfg.omega_p0 * jp.d2);
        let (s, s1, s2) = (cfg.omega_s0 * js.value, cfg.omega_s0 * js.d1, cfg.omega_s0 * js.d2);
        let om2 = p * p + s * s;
        if om2 == 0.0 {
            return Err(Error::DegenerateField { t });
        }
        let omega = om2.sqrt();
        let num = p1 * s - p * s1;
        let dot = p * p1 + s * s1;
        let theta_dot = num / om2;
        let theta_ddot = (p2 * s - p * s2) / om2 - 2.0 * num * dot / (om2 * om2);
        let theta = p.atan2(s);
        return Ok(MixingFrame::from_parts(t, theta, theta_dot, theta_ddot, omega, dot / omega));
    }

    let half = 0.5 * cfg.tau;
    if us.abs() < half {
        let js = envelope_jet(cfg.n, cfg.tau, us);
        return Ok(MixingFrame::from_parts(t, 0.0, 0.0, 0.0, cfg.omega_s0 * js.value, cfg.omega_s0 * js.d1));
    }
    if up.abs() < half {
        let jp = envelope_jet(cfg.n, cfg.tau, up);
        return Ok(MixingFrame::from_parts(
            t,
            FRAC_PI_2,
            0.0,
            0.0,
            cfg.omega_p0 * jp.value,
            cfg.omega_p0 * jp.d1,
        ));
    }
    Err(Error::DegenerateField { t })
}

/// Frames at pump turn-on and Stokes turn-off.
pub fn endpoint_frames(cfg: &PulseConfig) -> Result<(MixingFrame, MixingFrame)> {
    let win = interaction_window(cfg);
    if !win.overlap {
        return Err(Error::PreconditionViolated {
            equation: "overlap window",
            detail: format!("t_d = {} >= tau = {}: pulses do not overlap", cfg.t_d, cfg.tau),
        });
    }
    Ok((mixing_frame(cfg, win.t_i)?, mixing_frame(cfg, win.t_f)?))
}

fn total_rabi(cfg: &PulseConfig, t: f64) -> f64 {
    let (p, s) = rabi_pair(cfg, t);
    p.hypot(s)
}

/// Adiabaticity parameter `1 / (max Omega(t) * tau)`.
pub fn adiabaticity(cfg: &PulseConfig) -> f64 {
    const SAMPLES: usize = 2000;
    let (a, b) = cfg.field_span();
    let h = (b - a) / SAMPLES as f64;
    let (mut best_t, mut best) = (a, 0.0);
    for k in 0..=SAMPLES {
        let t = a + h * k as f64;
        let v = total_rabi(cfg, t);
        if v > best {
            best = v;
            best_t = t;
        }
    }

    // golden-section refinement around the best sample
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = ((best_t - h).max(a), (best_t + h).min(b));
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (total_rabi(cfg, x1), total_rabi(cfg, x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = total_rabi(cfg, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = total_rabi(cfg, x1);
        }
    }
    let peak = best.max(f1).max(f2);
    1.0 / (peak * cfg.tau)
}
