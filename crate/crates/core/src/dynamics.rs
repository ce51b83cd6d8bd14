//! Time evolution of the three-level amplitudes under the rotating-wave
//! Hamiltonian with a decaying excited state, in the bare basis and in the
//! bright/excited/dark basis.

use std::io::Write;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{self, DormandPrince, State3, StepStats};
use crate::pulses::{interaction_window, mixing_frame, rabi_pair, PulseConfig};

/// Amplitudes over the bare states `|1>, |2>, |3>`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub c1: C64,
    pub c2: C64,
    pub c3: C64,
}

impl StateVector {
    pub fn new(c1: C64, c2: C64, c3: C64) -> Self {
        Self { c1, c2, c3 }
    }

    /// All population in `|1>`.
    pub fn ground() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr() + self.c3.norm_sqr()
    }

    pub fn to_vector(self) -> State3 {
        Vector3::new(self.c1, self.c2, self.c3)
    }

    pub fn from_vector(v: &State3) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// Amplitudes over the bright, excited and dark states.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct BedState {
    pub c_b: C64,
    pub c_e: C64,
    pub c_d: C64,
}

impl BedState {
    pub fn norm_sqr(&self) -> f64 {
        self.c_b.norm_sqr() + self.c_e.norm_sqr() + self.c_d.norm_sqr()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on a single step, in units of `tau`.
    pub max_step: f64,
    pub sample_count: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step: 0.02, sample_count: 201 }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidConfig("integrator tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidConfig("max_step must be positive".into()));
        }
        if self.sample_count < 2 {
            return Err(Error::InvalidConfig("sample_count must be at least 2".into()));
        }
        Ok(())
    }

    fn stepper(&self, tau: f64) -> DormandPrince {
        DormandPrince {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step * tau,
            min_step: 1e-14 * tau,
        }
    }
}

/// `(n1, n2, n3)` for a state.
pub fn populations(psi: &StateVector) -> (f64, f64, f64) {
    (psi.c1.norm_sqr(), psi.c2.norm_sqr(), psi.c3.norm_sqr())
}

/// Rotating-wave Hamiltonian (hbar = 1).
pub fn hamiltonian(cfg: &PulseConfig, t: f64) -> Matrix3<C64> {
    let (p, s) = rabi_pair(cfg, t);
    let z = C64::new(0.0, 0.0);
    let r = |x: f64| C64::new(0.5 * x, 0.0);
    Matrix3::new(
        z, r(p), z,
        r(p), C64::new(0.0, -0.5 * cfg.gamma), r(s),
        z, r(s), z,
    )
}

/// Right-hand side `-i H psi` written out for the sparse bare Hamiltonian.
fn bare_rhs(cfg: &PulseConfig) -> impl Fn(f64, &State3) -> State3 + '_ {
    move |t, y| {
        let (p, s) = rabi_pair(cfg, t);
        let mi = C64::new(0.0, -0.5);
        Vector3::new(
            mi * p * y[1],
            mi * (p * y[0] + s * y[2]) - 0.5 * cfg.gamma * y[1],
            mi * s * y[1],
        )
    }
}

/// Hamiltonian in the bright/excited/dark basis.
///
/// The basis rotates with the mixing angle, which couples bright and dark
/// states with strength `theta_dot`.
pub fn bed_hamiltonian(cfg: &PulseConfig, t: f64) -> Result<Matrix3<C64>> {
    let f = mixing_frame(cfg, t)?;
    let z = C64::new(0.0, 0.0);
    let om = C64::new(0.5 * f.omega, 0.0);
    let k = C64::new(0.0, f.theta_dot);
    Ok(Matrix3::new(
        z, om, k,
        om, C64::new(0.0, -0.5 * cfg.gamma), z,
        -k, z, z,
    ))
}

pub fn to_bed(cfg: &PulseConfig, t: f64, psi: &StateVector) -> Result<BedState> {
    let (s, c) = mixing_frame(cfg, t)?.theta.sin_cos();
    Ok(BedState {
        c_b: psi.c1 * s + psi.c3 * c,
        c_e: psi.c2,
        c_d: psi.c1 * c - psi.c3 * s,
    })
}

pub fn from_bed(cfg: &PulseConfig, t: f64, bed: &BedState) -> Result<StateVector> {
    let (s, c) = mixing_frame(cfg, t)?.theta.sin_cos();
    Ok(StateVector::new(bed.c_b * s + bed.c_d * c, bed.c_e, bed.c_b * c - bed.c_d * s))
}

/// `(eta_b, eta_e, eta_d) = (C_b/C_d, C_e/C_d, ln C_d)`.
pub fn eta_from_bed(bed: &BedState) -> Result<(C64, C64, C64)> {
    let magnitude = bed.c_d.norm();
    if magnitude < 1e-12 {
        return Err(Error::DarkDepleted { magnitude });
    }
    Ok((bed.c_b / bed.c_d, bed.c_e / bed.c_d, bed.c_d.ln()))
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: StateVector,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<TrajectoryPoint>,
    pub config: PulseConfig,
    pub settings: IntegratorSettings,
    pub stats: StepStats,
}

pub const TRAJECTORY_CSV_HEADER: &str = "t,re_c1,im_c1,re_c2,im_c2,re_c3,im_c3,n1,n2,n3";

impl Trajectory {
    pub fn final_state(&self) -> StateVector {
        self.samples.last().expect("trajectory is never empty").state
    }

    /// One row per sample, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(TRAJECTORY_CSV_HEADER.split(','))?;
        for p in &self.samples {
            let (n1, n2, n3) = populations(&p.state);
            let s = &p.state;
            let row = [p.t, s.c1.re, s.c1.im, s.c2.re, s.c2.im, s.c3.re, s.c3.im, n1, n2, n3];
            w.write_record(row.iter().map(|x| format_sig17(*x)))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Breakpoints of `cfg` strictly inside `(t0, t1)`.
fn interior_breaks(cfg: &PulseConfig, t0: f64, t1: f64) -> Vec<f64> {
    cfg.breakpoints().into_iter().filter(|&b| b > t0 && b < t1).collect()
}

fn evolve_bare(
    cfg: &PulseConfig,
    stepper: &DormandPrince,
    t0: f64,
    t1: f64,
    y: &mut State3,
    h: &mut f64,
) -> Result<StepStats> {
    let rhs = bare_rhs(cfg);
    let mut stats = StepStats::default();
    let mut from = t0;
    for stop in interior_breaks(cfg, t0, t1).into_iter().chain(std::iter::once(t1)) {
        stats += stepper.advance(&rhs, from, stop, y, h)?;
        from = stop;
    }
    Ok(stats)
}

/// Integrate `i dpsi/dt = H(t) psi` from `t0` to `t1`.
///
/// Steps never straddle an envelope switch-on/off, and the trajectory is
/// recorded at `sample_count` uniformly spaced instants including both
/// endpoints.
pub fn propagate(
    cfg: &PulseConfig,
    t0: f64,
    t1: f64,
    psi0: &StateVector,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    cfg.validate()?;
    settings.validate()?;
    if !(t1 > t0) {
        return Err(Error::InvalidConfig(format!("propagation interval [{t0}, {t1}] is empty")));
    }
    if psi0.norm_sqr() > 1.0 + 1e-12 {
        return Err(Error::InvalidConfig("initial state norm exceeds 1".into()));
    }
    let stepper = settings.stepper(cfg.tau);
    let n = settings.sample_count;
    let mut samples = Vec::with_capacity(n);
    samples.push(TrajectoryPoint { t: t0, state: *psi0 });

    let mut y = psi0.to_vector();
    let mut h = 0.0;
    let mut stats = StepStats::default();
    let mut from = t0;
    for k in 1..n {
        let t = if k == n - 1 { t1 } else { t0 + (t1 - t0) * k as f64 / (n - 1) as f64 };
        stats += evolve_bare(cfg, &stepper, from, t, &mut y, &mut h)?;
        samples.push(TrajectoryPoint { t, state: StateVector::from_vector(&y) });
        from = t;
    }
    Ok(Trajectory { samples, config: *cfg, settings: *settings, stats })
}

/// Result of a full STIRAP run starting in `|1>` at Stokes turn-on.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct OdeTransfer {
    /// State at Stokes turn-off.
    pub at_t_f: StateVector,
    /// State at pump turn-off.
    pub at_end: StateVector,
    pub stats: StepStats,
}

impl OdeTransfer {
    /// Target population read at Stokes turn-off.
    pub fn n3(&self) -> f64 {
        self.at_t_f.c3.norm_sqr()
    }
}

/// Run the whole pulse sequence: `|1>` at Stokes turn-on, read out at
/// Stokes turn-off and again at pump turn-off.
pub fn transfer(cfg: &PulseConfig, settings: &IntegratorSettings) -> Result<OdeTransfer> {
    cfg.validate()?;
    settings.validate()?;
    let stepper = settings.stepper(cfg.tau);
    let (start, end) = cfg.field_span();
    let t_f = interaction_window(cfg).t_f.clamp(start, end);

    let mut y = StateVector::ground().to_vector();
    let mut h = 0.0;
    let mut stats = evolve_bare(cfg, &stepper, start, t_f, &mut y, &mut h)?;
    let at_t_f = StateVector::from_vector(&y);
    stats += evolve_bare(cfg, &stepper, t_f, end, &mut y, &mut h)?;
    Ok(OdeTransfer { at_t_f, at_end: StateVector::from_vector(&y), stats })
}

/// Same run as [`transfer`], but the overlap window is integrated in the
/// bright/excited/dark basis.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct BedTransfer {
    pub bed_at_t_f: BedState,
    pub at_t_f: StateVector,
    pub at_end: StateVector,
}

pub fn transfer_bed(cfg: &PulseConfig, settings: &IntegratorSettings) -> Result<BedTransfer> {
    cfg.validate()?;
    settings.validate()?;
    let win = interaction_window(cfg);
    if !win.overlap {
        return Err(Error::PreconditionViolated {
            equation: "overlap window",
            detail: "bed-basis propagation needs overlapping pulses".into(),
        });
    }
    let stepper = settings.stepper(cfg.tau);
    let (start, end) = cfg.field_span();

    let mut y = StateVector::ground().to_vector();
    let mut h = 0.0;
    evolve_bare(cfg, &stepper, start, win.t_i, &mut y, &mut h)?;

    let bed = to_bed(cfg, win.t_i, &StateVector::from_vector(&y))?;
    let mut z = Vector3::new(bed.c_b, bed.c_e, bed.c_d);
    let rhs = |t: f64, v: &State3| -> State3 {
        // the window interior always has a defined frame
        let f = mixing_frame(cfg, t).expect("mixing frame inside overlap");
        let mi = C64::new(0.0, -0.5);
        Vector3::new(
            mi * f.omega * v[1] + f.theta_dot * v[2],
            mi * f.omega * v[0] - 0.5 * cfg.gamma * v[1],
            -f.theta_dot * v[0],
        )
    };
    stepper.advance(&rhs, win.t_i, win.t_f, &mut z, &mut h)?;
    let bed_at_t_f = BedState { c_b: z[0], c_e: z[1], c_d: z[2] };
    let at_t_f = from_bed(cfg, win.t_f, &bed_at_t_f)?;

    let mut y = at_t_f.to_vector();
    evolve_bare(cfg, &stepper, win.t_f, end, &mut y, &mut h)?;
    Ok(BedTransfer { bed_at_t_f, at_t_f, at_end: StateVector::from_vector(&y) })
}

/// Fixed-step classical RK4 over the full pulse sequence, split at the
/// envelope breakpoints. Returns the state at Stokes turn-off.
pub fn transfer_rk4(cfg: &PulseConfig, steps_per_tau: usize) -> Result<StateVector> {
    cfg.validate()?;
    let (start, _) = cfg.field_span();
    let t_f = interaction_window(cfg).t_f;
    let rhs = bare_rhs(cfg);
    let mut y = StateVector::ground().to_vector();
    let mut from = start;
    for stop in interior_breaks(cfg, start, t_f).into_iter().chain(std::iter::once(t_f)) {
        let steps = (((stop - from) / cfg.tau) * steps_per_tau as f64).ceil().max(1.0) as usize;
        y = integrator::rk4(&rhs, from, stop, y, steps);
        from = stop;
    }
    Ok(StateVector::from_vector(&y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hamiltonian_examples() {
        let cfg = PulseConfig::new(1, 1.0, 0.5, 2.0, 2.0, 0.0).unwrap();
        // no field at all
        assert_eq!(hamiltonian(&cfg, 3.0), Matrix3::zeros());

        // pump at its peak, Stokes already off
        let h = hamiltonian(&cfg, 0.25);
        assert_relative_eq!(h[(0, 1)].re, 1.0, epsilon = 1e-15);
        assert_eq!(h[(0, 1)], h[(1, 0)]);
        assert_eq!(h[(1, 2)], c(0.0, 0.0));
        assert_eq!(h[(1, 1)], c(0.0, 0.0));

        let lossy = PulseConfig::exact_case(20.0, 40.0);
        assert_eq!(hamiltonian(&lossy, 0.1)[(1, 1)], c(0.0, -20.0));
    }

    #[test]
    fn population_examples() {
        assert_eq!(populations(&StateVector::ground()), (1.0, 0.0, 0.0));
        let psi = StateVector::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
        assert_eq!(populations(&psi), (0.0, 0.0, 1.0));
        let psi = StateVector::new(c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(0.0, FRAC_1_SQRT_2));
        let (n1, n2, n3) = populations(&psi);
        assert_relative_eq!(n1, 0.5, epsilon = 1e-15);
        assert_eq!(n2, 0.0);
        assert_relative_eq!(n3, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn bed_basis_examples() {
        let cfg = PulseConfig::exact_case(20.0, 0.0);
        // theta = 0 at pump turn-on
        let bed = to_bed(&cfg, -0.25, &StateVector::ground()).unwrap();
        assert_eq!(bed.c_d, c(1.0, 0.0));
        assert_eq!(bed.c_b, c(0.0, 0.0));
        assert_eq!(bed.c_e, c(0.0, 0.0));

        // theta = pi/2 at Stokes turn-off
        let target = StateVector::new(c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0));
        let bed = to_bed(&cfg, 0.25, &target).unwrap();
        assert_relative_eq!(bed.c_d.re, 1.0, epsilon = 1e-15);

        let psi = StateVector::new(c(0.3, -0.2), c(0.1, 0.4), c(-0.5, 0.25));
        let back = from_bed(&cfg, 0.07, &to_bed(&cfg, 0.07, &psi).unwrap()).unwrap();
        assert!((back.to_vector() - psi.to_vector()).norm() < 1e-14);
        let bed = to_bed(&cfg, 0.07, &psi).unwrap();
        assert_relative_eq!(bed.norm_sqr(), psi.norm_sqr(), max_relative = 1e-12);

        assert!(matches!(to_bed(&cfg, 5.0, &psi), Err(Error::DegenerateField { .. })));
    }

    #[test]
    fn bed_hamiltonian_examples() {
        let cfg = PulseConfig::exact_case(20.0, 0.0);
        let h = bed_hamiltonian(&cfg, 0.1).unwrap();
        assert_relative_eq!(h[(0, 1)].re, 10.0, max_relative = 1e-12);
        assert_relative_eq!(h[(0, 2)].im, PI, max_relative = 1e-12);
        assert_eq!(h[(2, 0)], -h[(0, 2)]);
        let h2 = bed_hamiltonian(&cfg, -0.2).unwrap();
        assert!((h - h2).norm() < 1e-10);

        // Stokes-only region: frozen angle, decoupled dark state
        let h = bed_hamiltonian(&cfg, -0.5).unwrap();
        assert_eq!(h.row(2).norm(), 0.0);
        assert_eq!(h.column(2).norm(), 0.0);
    }

    #[test]
    fn eta_examples() {
        let bed = BedState { c_b: c(0.0, 0.0), c_e: c(0.0, 0.0), c_d: c(1.0, 0.0) };
        assert_eq!(eta_from_bed(&bed).unwrap(), (c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
        let bed = BedState { c_b: c(0.1, 0.0), c_e: c(0.0, 0.0), c_d: c(1.0, 0.0) };
        assert_eq!(eta_from_bed(&bed).unwrap().0, c(0.1, 0.0));
        let bed = BedState { c_b: c(0.2, 0.1), c_e: c(0.05, -0.3), c_d: c(0.6, -0.45) };
        let (_, _, eta_d) = eta_from_bed(&bed).unwrap();
        assert_relative_eq!((2.0 * eta_d.re).exp(), bed.c_d.norm_sqr(), max_relative = 1e-14);
        let empty = BedState { c_b: c(1.0, 0.0), c_e: c(0.0, 0.0), c_d: c(1e-13, 0.0) };
        assert!(matches!(eta_from_bed(&empty), Err(Error::DarkDepleted { .. })));
    }

    #[test]
    fn stokes_only_leaves_ground_state() {
        let cfg = PulseConfig::exact_case(20.0, 0.0);
        let traj = propagate(&cfg, -0.75, -0.25, &StateVector::ground(), &IntegratorSettings::default()).unwrap();
        let end = traj.final_state();
        assert_eq!(end, StateVector::ground());
    }

    #[test]
    fn trajectory_layout() {
        let cfg = PulseConfig::exact_case(10.0, 0.0);
        let settings = IntegratorSettings { sample_count: 11, ..Default::default() };
        let traj = propagate(&cfg, -0.75, 0.25, &StateVector::ground(), &settings).unwrap();
        assert_eq!(traj.samples.len(), 11);
        assert_eq!(traj.samples[0].t, -0.75);
        assert_eq!(traj.samples[10].t, 0.25);
        assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t));
        assert_eq!(traj.samples[0].state, StateVector::ground());
    }

    #[test]
    fn propagate_rejects_bad_input() {
        let cfg = PulseConfig::exact_case(10.0, 0.0);
        let s = IntegratorSettings::default();
        assert!(propagate(&cfg, 0.1, 0.1, &StateVector::ground(), &s).is_err());
        let big = StateVector::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        assert!(propagate(&cfg, 0.0, 0.1, &big, &s).is_err());
        let bad = IntegratorSettings { rel_tol: 0.0, ..s };
        assert!(propagate(&cfg, 0.0, 0.1, &StateVector::ground(), &bad).is_err());
    }

    #[test]
    fn csv_has_header_and_full_precision() {
        let cfg = PulseConfig::exact_case(10.0, 0.0);
        let settings = IntegratorSettings { sample_count: 3, ..Default::default() };
        let traj = propagate(&cfg, -0.25, 0.25, &StateVector::ground(), &settings).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRAJECTORY_CSV_HEADER);
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 10);
        assert_eq!(first[0], "-2.5000000000000000e-1");
        assert_eq!(text.lines().count(), 4);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn transfer_final_angle_is_pi_half() {
        // sanity of the readout convention: after Stokes turn-off only the pump
        // acts, and |3> is uncoupled
        let cfg = PulseConfig::exact_case(20.0, 0.0);
        let run = transfer(&cfg, &IntegratorSettings::default()).unwrap();
        assert_relative_eq!(run.at_t_f.c3.norm_sqr(), run.at_end.c3.norm_sqr(), max_relative = 1e-12);
        assert_eq!(mixing_frame(&cfg, 0.25).unwrap().theta, FRAC_PI_2);
    }
}
