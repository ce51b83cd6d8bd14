//! First- and second-order adiabatic bases and the short-pulse closed forms
//! for the transfer probability.
//!
//! Vectors are stored in the order `(-, 0, +)`. Order-1 vectors are
//! components over the bare states, order-2 vectors are components over the
//! order-1 vectors. Eigenvector signs follow the conventional printed forms;
//! only populations are physically meaningful.

use std::f64::consts::SQRT_2;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dynamics::StateVector;
use crate::error::{Error, Result};
use crate::pulses::{
    adiabaticity, endpoint_frames, envelope_jet, interaction_window, mixing_frame, MixingFrame, PulseConfig,
};
use crate::quad::{self, DEFAULT_MAX_EVALUATIONS};
use crate::transfer::{clamp_probability, Method, TransferResult};

/// Decay rates above this (in units of `1/tau`) void the short-pulse
/// assumption; results still come back, with a diagnostic attached.
pub const SHORT_PULSE_GAMMA_LIMIT: f64 = 0.01;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum BasisOrder {
    First,
    Second,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct AdiabaticBasis {
    pub order: BasisOrder,
    /// `b-`, `b0`, `b+`.
    pub vectors: [Vector3<C64>; 3],
    /// `lambda-`, `lambda0`, `lambda+`.
    pub eigenvalues: [f64; 3],
}

impl AdiabaticBasis {
    /// Matrix whose columns are the basis vectors.
    pub fn matrix(&self) -> Matrix3<C64> {
        Matrix3::from_columns(&self.vectors)
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn im(x: f64) -> C64 {
    C64::new(0.0, x)
}

fn require_field(frame: &MixingFrame) -> Result<()> {
    if frame.omega > 0.0 && frame.omega.is_finite() {
        Ok(())
    } else {
        Err(Error::DegenerateField { t: frame.t })
    }
}

/// Lossless bare Hamiltonian rebuilt from `(theta, Omega)`.
pub fn frame_hamiltonian(frame: &MixingFrame) -> Matrix3<C64> {
    let (s, c) = frame.theta.sin_cos();
    let p = re(0.5 * frame.omega * s);
    let q = re(0.5 * frame.omega * c);
    let z = re(0.0);
    Matrix3::new(z, p, z, p, z, q, z, q, z)
}

/// Instantaneous eigenbasis of the lossless bare Hamiltonian.
pub fn basis1(frame: &MixingFrame) -> Result<AdiabaticBasis> {
    require_field(frame)?;
    let (s, c) = frame.theta.sin_cos();
    let h = 0.5 * SQRT_2;
    Ok(AdiabaticBasis {
        order: BasisOrder::First,
        vectors: [
            Vector3::new(re(h * s), re(-h), re(h * c)),
            Vector3::new(re(c), re(0.0), re(-s)),
            Vector3::new(re(h * s), re(h), re(h * c)),
        ],
        eigenvalues: [-0.5 * frame.omega, 0.0, 0.5 * frame.omega],
    })
}

/// Hamiltonian in the order-1 adiabatic basis.
pub fn coupling_h1(frame: &MixingFrame) -> Result<Matrix3<C64>> {
    require_field(frame)?;
    let k = 0.5 * SQRT_2 * frame.theta_dot;
    let w = 0.5 * frame.omega;
    let z = re(0.0);
    Ok(Matrix3::new(
        re(-w), im(k), z,
        im(-k), z, im(-k),
        z, im(k), re(w),
    ))
}

/// Eigenbasis of [`coupling_h1`], as components over the order-1 vectors.
pub fn basis2(frame: &MixingFrame) -> Result<AdiabaticBasis> {
    if !(frame.omega_tilde > 0.0) {
        return Err(Error::DegenerateField { t: frame.t });
    }
    let om = frame.omega;
    let ot = frame.omega_tilde;
    let k = SQRT_2 * frame.theta_dot / ot;
    let sum = (ot + om) / (2.0 * ot);
    let diff = (ot - om) / (2.0 * ot);
    Ok(AdiabaticBasis {
        order: BasisOrder::Second,
        vectors: [
            Vector3::new(re(sum), im(k), re(diff)),
            Vector3::new(re(-k), im(om / ot), re(k)),
            Vector3::new(re(-diff), im(k), re(-sum)),
        ],
        eigenvalues: [-0.5 * ot, 0.0, 0.5 * ot],
    })
}

/// Off-diagonal coupling of the order-2 Hamiltonian.
pub fn coupling_beta(frame: &MixingFrame) -> Result<f64> {
    if !(frame.omega_tilde > 0.0) {
        return Err(Error::DegenerateField { t: frame.t });
    }
    let ot2 = frame.omega_tilde * frame.omega_tilde;
    Ok(2.0 * SQRT_2 / ot2 * (frame.omega * frame.theta_ddot - frame.omega_dot * frame.theta_dot))
}

/// Hamiltonian in the order-2 adiabatic basis.
pub fn coupling_h2(frame: &MixingFrame) -> Result<Matrix3<C64>> {
    let beta = 0.5 * coupling_beta(frame)?;
    let w = 0.5 * frame.omega_tilde;
    let z = re(0.0);
    Ok(Matrix3::new(
        re(-w), im(beta), z,
        im(-beta), z, im(-beta),
        z, im(beta), re(w),
    ))
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct AdiabaticAmplitudes {
    pub order: BasisOrder,
    pub minus: C64,
    pub zero: C64,
    pub plus: C64,
}

impl AdiabaticAmplitudes {
    pub fn norm_sqr(&self) -> f64 {
        self.minus.norm_sqr() + self.zero.norm_sqr() + self.plus.norm_sqr()
    }
}

/// Project a bare state onto the order-2 basis at `frame`.
pub fn project_second_order(frame: &MixingFrame, psi: &StateVector) -> Result<AdiabaticAmplitudes> {
    let b1 = basis1(frame)?.matrix();
    let b2 = basis2(frame)?.matrix();
    let a2 = b2.adjoint() * (b1.adjoint() * psi.to_vector());
    Ok(AdiabaticAmplitudes { order: BasisOrder::Second, minus: a2[0], zero: a2[1], plus: a2[2] })
}

/// Order-2 amplitudes of `|1>` at pump turn-on.
pub fn initial_amplitudes(cfg: &PulseConfig) -> Result<AdiabaticAmplitudes> {
    let (start, _) = endpoint_frames(cfg)?;
    project_second_order(&start, &StateVector::ground())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum PhaseKind {
    /// Half the integral of `Omega~` over the window.
    Phi,
    /// Same with the order-3 splitting.
    PhiTilde,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct PhaseIntegral {
    pub value: f64,
    pub kind: PhaseKind,
    pub error_estimate: f64,
}

fn phase_tolerance(cfg: &PulseConfig) -> f64 {
    let win = interaction_window(cfg);
    let peak = 1.0 / (adiabaticity(cfg) * cfg.tau);
    1e-10 * win.duration() * peak
}

fn require_overlap(cfg: &PulseConfig) -> Result<()> {
    if interaction_window(cfg).overlap {
        Ok(())
    } else {
        Err(Error::PreconditionViolated {
            equation: "overlap window",
            detail: format!("t_d = {} >= tau = {}: pulses do not overlap", cfg.t_d, cfg.tau),
        })
    }
}

fn frame_in_window(cfg: &PulseConfig, t: f64) -> MixingFrame {
    mixing_frame(cfg, t).expect("mixing frame defined inside the overlap window")
}

fn integrate_phase(cfg: &PulseConfig, kind: PhaseKind, upper: f64) -> Result<PhaseIntegral> {
    require_overlap(cfg)?;
    let win = interaction_window(cfg);
    let integrand = |t: f64| {
        let f = frame_in_window(cfg, t);
        match kind {
            PhaseKind::Phi => 0.5 * f.omega_tilde,
            PhaseKind::PhiTilde => {
                let ot2 = f.omega_tilde * f.omega_tilde;
                let cross = f.theta_dot * f.omega_dot - f.omega * f.theta_ddot;
                0.5 * (ot2 + 16.0 * cross * cross / (ot2 * ot2)).sqrt()
            }
        }
    };
    let q = quad::integrate(integrand, win.t_i, upper, phase_tolerance(cfg), DEFAULT_MAX_EVALUATIONS)?;
    Ok(PhaseIntegral { value: q.value, kind, error_estimate: q.error_estimate })
}

/// Phase accumulated by the order-2 states across the overlap.
pub fn phase_phi(cfg: &PulseConfig) -> Result<PhaseIntegral> {
    integrate_phase(cfg, PhaseKind::Phi, interaction_window(cfg).t_f)
}

/// Running phase from pump turn-on to `t`.
pub fn phase_phi_at(cfg: &PulseConfig, t: f64) -> Result<PhaseIntegral> {
    let win = interaction_window(cfg);
    if !win.contains(t) {
        return Err(Error::PreconditionViolated {
            equation: "overlap window",
            detail: format!("t = {t} outside [{}, {}]", win.t_i, win.t_f),
        });
    }
    integrate_phase(cfg, PhaseKind::Phi, t)
}

/// Phase accumulated by the order-3 states across the overlap.
pub fn phase_phi_tilde(cfg: &PulseConfig) -> Result<PhaseIntegral> {
    integrate_phase(cfg, PhaseKind::PhiTilde, interaction_window(cfg).t_f)
}

/// First-order closed form given endpoint frames and the phase.
pub fn first_order_formula(start: &MixingFrame, end: &MixingFrame, phi: f64) -> f64 {
    let num = start.omega * end.omega + 4.0 * start.theta_dot * end.theta_dot * phi.cos();
    let den = start.omega_tilde * start.omega_tilde * end.omega_tilde * end.omega_tilde;
    num * num / den
}

/// Second-order closed form given endpoint frames and the phase.
pub fn second_order_formula(start: &MixingFrame, end: &MixingFrame, phi_tilde: f64) -> f64 {
    let (oi2, of2) = (start.omega * start.omega, end.omega * end.omega);
    let (ai, af) = (start.theta_ddot, end.theta_ddot);
    let num = oi2 * of2 + 16.0 * ai * af * phi_tilde.cos();
    num * num / ((oi2 * oi2 + 16.0 * ai * ai) * (of2 * of2 + 16.0 * af * af))
}

/// Largest `1 - n3` over the cosine phase, order 1.
pub fn first_order_peak_deficit(start: &MixingFrame, end: &MixingFrame) -> f64 {
    let a = start.omega * end.omega;
    let b = 4.0 * (start.theta_dot * end.theta_dot).abs();
    let worst = (a - b).max(0.0);
    let den = start.omega_tilde * start.omega_tilde * end.omega_tilde * end.omega_tilde;
    1.0 - worst * worst / den
}

/// Largest `1 - n3` over the cosine phase, order 2.
pub fn second_order_peak_deficit(start: &MixingFrame, end: &MixingFrame) -> f64 {
    let (oi2, of2) = (start.omega * start.omega, end.omega * end.omega);
    let (ai, af) = (start.theta_ddot, end.theta_ddot);
    let worst = (oi2 * of2 - 16.0 * (ai * af).abs()).max(0.0);
    1.0 - worst * worst / ((oi2 * oi2 + 16.0 * ai * ai) * (of2 * of2 + 16.0 * af * af))
}

fn short_pulse_diagnostics(cfg: &PulseConfig, out: &mut Vec<String>) {
    if cfg.gamma * cfg.tau > SHORT_PULSE_GAMMA_LIMIT {
        out.push(format!(
            "gamma*tau = {} exceeds {SHORT_PULSE_GAMMA_LIMIT}: short-pulse formula ignores decay",
            cfg.gamma * cfg.tau
        ));
    }
}

fn derivative_scale(cfg: &PulseConfig, start: &MixingFrame, end: &MixingFrame) -> f64 {
    1e-9 * (1.0 / cfg.tau + start.omega.max(end.omega))
}

const HIGHER_ORDER_NOTE: &str =
    "first and second endpoint derivatives of theta vanish: higher-order regime (eps^{2n}), n3 = 1 at this order";

/// Transfer probability from the order-2 adiabatic approximation, governed
/// by the first derivative of the mixing angle at the window edges.
pub fn n3_first_order(cfg: &PulseConfig) -> Result<TransferResult> {
    cfg.validate()?;
    let (start, end) = endpoint_frames(cfg)?;
    let mut result = TransferResult::new(1.0, Method::Analytic1, adiabaticity(cfg));
    short_pulse_diagnostics(cfg, &mut result.diagnostics);

    let tol = derivative_scale(cfg, &start, &end);
    if start.theta_dot.abs() <= tol && end.theta_dot.abs() <= tol {
        result.diagnostics.push("endpoint theta_dot vanishes: first-order correction is zero".into());
        if start.theta_ddot.abs() <= tol && end.theta_ddot.abs() <= tol {
            result.diagnostics.push(HIGHER_ORDER_NOTE.into());
        }
        return Ok(result);
    }

    let phi = phase_phi(cfg)?;
    result.n3 = clamp_probability(first_order_formula(&start, &end, phi.value));
    result.phase = Some(phi.value);
    Ok(result)
}

/// Transfer probability one order higher, for envelopes whose mixing angle
/// starts and ends with zero slope.
pub fn n3_second_order(cfg: &PulseConfig) -> Result<TransferResult> {
    cfg.validate()?;
    let (start, end) = endpoint_frames(cfg)?;
    let tol = derivative_scale(cfg, &start, &end);
    if start.theta_dot.abs() > tol || end.theta_dot.abs() > tol {
        return Err(Error::PreconditionViolated {
            equation: "zero endpoint slope of the mixing angle",
            detail: format!(
                "second-order formula needs theta_dot(t_i) = theta_dot(t_f) = 0, got {:.6e} and {:.6e} (envelope n = {})",
                start.theta_dot, end.theta_dot, cfg.n
            ),
        });
    }
    let mut result = TransferResult::new(1.0, Method::Analytic2, adiabaticity(cfg));
    short_pulse_diagnostics(cfg, &mut result.diagnostics);

    if start.theta_ddot.abs() <= tol && end.theta_ddot.abs() <= tol {
        result.diagnostics.push(HIGHER_ORDER_NOTE.into());
        return Ok(result);
    }

    let phi = phase_phi_tilde(cfg)?;
    result.n3 = clamp_probability(second_order_formula(&start, &end, phi.value));
    result.phase = Some(phi.value);
    Ok(result)
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct OptimalityReport {
    pub order: BasisOrder,
    /// Zero when the optimum condition holds.
    pub residual: f64,
    pub scale: f64,
    pub optimal: bool,
}

/// Check the endpoint condition under which the closed form reaches 1 at a
/// suitable phase.
///
/// Order 1 compares the pump slope at turn-on with the Stokes slope at
/// turn-off. Order 2 compares `Omega(t_i)^2 theta''(t_f)` with
/// `Omega(t_f)^2 theta''(t_i)` (up to sign); the pump and Stokes amplitudes
/// themselves vanish at those instants.
pub fn optimality_check(cfg: &PulseConfig, order: BasisOrder) -> Result<OptimalityReport> {
    cfg.validate()?;
    let (start, end) = endpoint_frames(cfg)?;
    let (lhs, rhs) = match order {
        BasisOrder::First => {
            let half = 0.5 * cfg.tau;
            let pump_slope = cfg.omega_p0 * envelope_jet(cfg.n, cfg.tau, -half).d1;
            let stokes_slope = cfg.omega_s0 * envelope_jet(cfg.n, cfg.tau, half).d1;
            (pump_slope.abs(), stokes_slope.abs())
        }
        BasisOrder::Second => (
            start.omega * start.omega * end.theta_ddot.abs(),
            end.omega * end.omega * start.theta_ddot.abs(),
        ),
    };
    let residual = lhs - rhs;
    let scale = lhs.max(rhs);
    let optimal = residual.abs() <= 1e-9 * scale || scale == 0.0;
    Ok(OptimalityReport { order, residual, scale, optimal })
}

/// Bare amplitudes at `t` reconstructed from the order-2 adiabatic
/// approximation, starting in `|1>` at pump turn-on.
pub fn amplitudes_second_order(cfg: &PulseConfig, t: f64) -> Result<StateVector> {
    cfg.validate()?;
    let a = initial_amplitudes(cfg)?;
    let frame = mixing_frame(cfg, t)?;
    let phi = phase_phi_at(cfg, t)?.value;
    let rot = C64::new(0.0, phi).exp();
    let coeffs = Vector3::new(a.minus * rot, a.zero, a.plus * rot.conj());
    let v = basis1(&frame)?.matrix() * (basis2(&frame)?.matrix() * coeffs);
    Ok(StateVector::from_vector(&v))
}
