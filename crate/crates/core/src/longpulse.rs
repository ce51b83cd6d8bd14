//! Long-pulse (`gamma * tau >> 1`) expansion of the dark-state amplitude.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pulses::{adiabaticity, endpoint_frames, interaction_window, mixing_frame, MixingFrame, PulseConfig};
use crate::quad::{self, DEFAULT_MAX_EVALUATIONS};
use crate::transfer::{ExponentParts, Method, TransferResult};

/// Below this `gamma * tau` the expansion is refused unless forced.
pub const LONG_PULSE_REFUSE: f64 = 5.0;
/// Below this `gamma * tau` a diagnostic is attached.
pub const LONG_PULSE_WARN: f64 = 10.0;

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct TransientParams {
    /// Total Rabi frequency at pump turn-on.
    pub omega_i: f64,
    /// Mixing-angle rate at pump turn-on.
    pub alpha: f64,
    pub gamma: f64,
    /// Time elapsed since pump turn-on.
    pub t_prime: f64,
}

impl TransientParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_i > 0.0) {
            return Err(Error::InvalidConfig(format!("omega_i must be positive, got {}", self.omega_i)));
        }
        if !(self.t_prime >= 0.0) {
            return Err(Error::InvalidConfig(format!("t_prime must be non-negative, got {}", self.t_prime)));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidConfig(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Parameters at elapsed time `t_prime` for the endpoint of `cfg`.
    pub fn from_config(cfg: &PulseConfig, t_prime: f64) -> Result<Self> {
        let (start, _) = endpoint_frames(cfg)?;
        Ok(Self { omega_i: start.omega, alpha: start.theta_dot, gamma: cfg.gamma, t_prime })
    }

    /// Limit of [`hd2_transient`] for large `t_prime`.
    pub fn asymptote(&self) -> f64 {
        -2.0 * self.gamma * self.alpha * self.alpha / (self.omega_i * self.omega_i)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct LongPulseTerms {
    pub h_d2_transient: f64,
    pub h_d1_quasi: f64,
    pub h_d2_quasi: f64,
}

impl LongPulseTerms {
    /// All three terms at time `t` inside the overlap window of `cfg`.
    pub fn at(cfg: &PulseConfig, t: f64) -> Result<Self> {
        let win = interaction_window(cfg);
        let params = TransientParams::from_config(cfg, (t - win.t_i).max(0.0))?;
        let (h_d1_quasi, h_d2_quasi) = hd_quasistationary(&mixing_frame(cfg, t)?, cfg.gamma)?;
        Ok(Self { h_d2_transient: hd2_transient(&params)?, h_d1_quasi, h_d2_quasi })
    }
}

/// Damped-oscillation term driven by the mixing-angle kick at pump turn-on.
///
/// Below critical damping (`omega_i < gamma/2`) the oscillation becomes
/// hyperbolic; at critical damping the `omega' -> 0` limit is used.
pub fn hd2_transient(p: &TransientParams) -> Result<f64> {
    p.validate()?;
    let TransientParams { omega_i, alpha, gamma, t_prime } = *p;
    let o2 = omega_i * omega_i;
    let a2 = alpha * alpha;
    let damp = (-0.25 * gamma * t_prime).exp();
    let disc = o2 - 0.25 * gamma * gamma;
    let half = 0.5 * t_prime;

    // (cos-like, sin-like / omega') pair
    let (c, s_over_w) = if disc.abs() < 1e-12 * gamma * gamma.max(omega_i) {
        (1.0, half)
    } else if disc > 0.0 {
        let w = disc.sqrt();
        ((half * w).cos(), (half * w).sin() / w)
    } else {
        let k = (-disc).sqrt();
        ((half * k).cosh(), (half * k).sinh() / k)
    };

    let base = 2.0 * gamma * a2 / o2;
    Ok(-base + base * damp * c + a2 * (gamma * gamma - 2.0 * o2) * damp * s_over_w / o2)
}

/// Quasistationary terms `(h_d1, h_d2)` of the logarithmic dark amplitude.
pub fn hd_quasistationary(frame: &MixingFrame, gamma: f64) -> Result<(f64, f64)> {
    let om = frame.omega;
    if !(om > 0.0) {
        return Err(Error::DegenerateField { t: frame.t });
    }
    let td = frame.theta_dot;
    let o2 = om * om;
    let g2 = gamma * gamma;
    let h1 = -2.0 * gamma * td * td / o2;
    let h2 = 4.0 * td * td * frame.omega_dot * (o2 - 2.0 * g2) / (o2 * o2 * om)
        + 4.0 * td * frame.theta_ddot * (g2 - o2) / (o2 * o2);
    Ok((h1, h2))
}

fn long_pulse_gate(cfg: &PulseConfig, force: bool, out: &mut Vec<String>) -> Result<()> {
    let gt = cfg.gamma * cfg.tau;
    if gt < LONG_PULSE_REFUSE && !force {
        return Err(Error::PreconditionViolated {
            equation: "long-pulse regime",
            detail: format!("gamma*tau = {gt} below {LONG_PULSE_REFUSE}; long-pulse expansion does not apply"),
        });
    }
    if gt < LONG_PULSE_WARN {
        out.push(format!(
            "gamma*tau = {gt} below {LONG_PULSE_WARN}: transient terms are not separated from the pulse timescale"
        ));
    }
    Ok(())
}

/// Long-pulse transfer probability by quadrature over the overlap window.
pub fn n3_long(cfg: &PulseConfig) -> Result<TransferResult> {
    n3_long_with(cfg, false)
}

/// [`n3_long`] with the option to bypass the `gamma * tau` refusal.
pub fn n3_long_with(cfg: &PulseConfig, force: bool) -> Result<TransferResult> {
    cfg.validate()?;
    let mut diagnostics = Vec::new();
    long_pulse_gate(cfg, force, &mut diagnostics)?;
    let (start, _) = endpoint_frames(cfg)?;
    let win = interaction_window(cfg);
    let gamma = cfg.gamma;

    let (oi2, a2) = (start.omega * start.omega, start.theta_dot * start.theta_dot);
    let transient = 8.0 * a2 * (gamma * gamma - oi2) / (oi2 * oi2);

    let frame = |t: f64| mixing_frame(cfg, t).expect("mixing frame defined inside the overlap window");
    let scale = 1.0 / (adiabaticity(cfg) * cfg.tau);
    let tol = 1e-10 * scale.max(1.0 / cfg.tau);

    let first = quad::integrate(
        |t| {
            let f = frame(t);
            f.theta_dot * f.theta_dot / (f.omega * f.omega)
        },
        win.t_i,
        win.t_f,
        tol / (4.0 * gamma).max(1.0),
        DEFAULT_MAX_EVALUATIONS,
    )?;
    let second = quad::integrate(
        |t| hd_quasistationary(&frame(t), gamma).map(|(_, h2)| h2).unwrap_or(f64::NAN),
        win.t_i,
        win.t_f,
        tol / 2.0,
        DEFAULT_MAX_EVALUATIONS,
    )?;

    let parts = ExponentParts {
        transient,
        first_integral: -4.0 * gamma * first.value,
        second_integral: 2.0 * second.value,
    };
    if start.omega < gamma {
        diagnostics.push("Omega(t_i) < gamma: transient exponent is positive, n3 may exceed 1".into());
    }
    let mut result = TransferResult::new(parts.total().exp(), Method::Long, adiabaticity(cfg));
    result.exponent = Some(parts);
    result.diagnostics = diagnostics;
    Ok(result)
}

/// Closed form of [`n3_long`] for the exactly solvable pulse pair
/// (`n = 1`, `t_d = tau/2`, equal amplitudes).
pub fn n3_long_closed(omega0: f64, tau: f64, gamma: f64, include_transient: bool) -> Result<TransferResult> {
    let cfg = PulseConfig::new(1, tau, 0.5 * tau, omega0, omega0, gamma)?;
    let mut diagnostics = Vec::new();
    let gt = gamma * tau;
    if gt < LONG_PULSE_WARN {
        diagnostics.push(format!("gamma*tau = {gt} below {LONG_PULSE_WARN}: outside the long-pulse regime"));
    }
    let o2 = omega0 * omega0;
    let pi2 = PI * PI;
    let parts = ExponentParts {
        transient: if include_transient { 8.0 * pi2 * (gamma * gamma - o2) / (o2 * o2 * tau * tau) } else { 0.0 },
        first_integral: -2.0 * gamma * pi2 / (o2 * tau),
        second_integral: 0.0,
    };
    let method = if include_transient { Method::LongClosed } else { Method::LongClosedNoTransient };
    let mut result = TransferResult::new(parts.total().exp(), method, adiabaticity(&cfg));
    result.exponent = Some(parts);
    result.diagnostics = diagnostics;
    Ok(result)
}

/// Closed form evaluated on a configuration, rejecting anything other than
/// the exactly solvable pulse pair.
pub fn n3_long_closed_for(cfg: &PulseConfig, include_transient: bool) -> Result<TransferResult> {
    cfg.validate()?;
    if !cfg.is_exact_case() {
        return Err(Error::PreconditionViolated {
            equation: "exactly solvable pulse pair",
            detail: "closed long-pulse form needs n = 1, t_d = tau/2 and equal amplitudes".into(),
        });
    }
    n3_long_closed(cfg.omega_p0, cfg.tau, cfg.gamma, include_transient)
}
