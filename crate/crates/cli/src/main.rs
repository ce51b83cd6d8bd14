//! Command-line front end: simulate, closed-form estimates, sweeps and fits.

mod commands;
mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use stirap::dynamics::IntegratorSettings;
use stirap::PulseConfig;

/// STIRAP population transfer in a three-level lambda system.
///
/// Time is measured in units of the pulse duration tau and every frequency
/// (Rabi amplitudes, decay rate) in units of 1/tau unless --tau is changed.
#[derive(Parser, Debug)]
#[command(name = "stirap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Integrate the Schroedinger equation and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Evaluate a closed-form transfer probability.
    Analytic(AnalyticArgs),
    /// Run a parameter sweep and write the results as CSV.
    Sweep(SweepArgs),
    /// Fit the scaling exponent of 1 - n3 against epsilon from a sweep CSV.
    Fit(FitArgs),
    /// Re-run the command recorded in a run manifest.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct PulseArgs {
    /// Envelope exponent n of cos^n (1 to 8).
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Pump peak Rabi frequency [1/tau].
    #[arg(long = "omega-p0", allow_negative_numbers = true)]
    omega_p0: f64,
    /// Stokes peak Rabi frequency [1/tau].
    #[arg(long = "omega-s0", allow_negative_numbers = true)]
    omega_s0: f64,
    /// Delay between Stokes and pump centres [tau].
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    td: f64,
    /// Decay rate of the intermediate level [1/tau].
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma: f64,
    /// Pulse duration, the time unit of every other flag.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    tau: f64,
}

impl PulseArgs {
    fn config(&self) -> stirap::Result<PulseConfig> {
        PulseConfig::new(self.n, self.tau, self.td, self.omega_p0, self.omega_s0, self.gamma)
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct ToleranceArgs {
    /// Relative local error tolerance of the integrator [dimensionless].
    #[arg(long = "rel-tol", default_value_t = 1e-10)]
    rel_tol: f64,
    /// Absolute local error tolerance of the integrator [dimensionless].
    #[arg(long = "abs-tol", default_value_t = 1e-12)]
    abs_tol: f64,
    /// Largest integrator step [tau].
    #[arg(long = "max-step", default_value_t = 0.02)]
    max_step: f64,
}

impl ToleranceArgs {
    fn settings(&self, sample_count: usize) -> IntegratorSettings {
        IntegratorSettings { rel_tol: self.rel_tol, abs_tol: self.abs_tol, max_step: self.max_step, sample_count }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct SimulateArgs {
    #[command(flatten)]
    pulse: PulseArgs,
    #[command(flatten)]
    tolerances: ToleranceArgs,
    /// Number of uniformly spaced trajectory samples, end points included.
    #[arg(long, default_value_t = 201)]
    samples: usize,
    /// Trajectory CSV path.
    #[arg(long, default_value = "trajectory.csv")]
    out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Order {
    /// Order-2 adiabatic basis, governed by the endpoint slope of the mixing angle.
    First,
    /// One order higher, for envelopes with flat mixing-angle endpoints (n >= 2).
    Second,
    /// Long-pulse expansion by quadrature (gamma*tau >= 5).
    Long,
    /// Long-pulse closed form for n = 1, td = tau/2, equal amplitudes.
    LongClosed,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct AnalyticArgs {
    #[command(flatten)]
    pulse: PulseArgs,
    /// Which closed form to evaluate.
    #[arg(long, value_enum)]
    order: Order,
    /// Drop the transient term of the long-pulse closed form.
    #[arg(long = "no-transient")]
    no_transient: bool,
    /// Evaluate the long-pulse expansion even for gamma*tau < 5.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[group(required = true, multiple = false, id = "source")]
struct SweepSource {
    /// Built-in figure grid: fig2, fig3 or fig4.
    #[arg(long)]
    preset: Option<String>,
    /// Sweep description in key = value format (see README).
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct SweepArgs {
    #[command(flatten)]
    source: SweepSource,
    /// Output CSV path; defaults to <preset>.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate rows on the calling thread only.
    #[arg(long)]
    serial: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct FitArgs {
    /// Sweep CSV to read.
    #[arg(long)]
    input: PathBuf,
    /// Row filter, repeatable: ratio=R (omega_s0/omega_p0), gamma=G [1/tau] or n=N.
    #[arg(long)]
    family: Vec<String>,
    /// Method whose n3 column is fitted.
    #[arg(long, default_value = "ode")]
    method: String,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct ReplayArgs {
    /// Manifest JSON written next to an earlier output.
    manifest: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
