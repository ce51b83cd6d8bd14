use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};

use stirap::adiabatic::{n3_first_order, n3_second_order, optimality_check, BasisOrder};
use stirap::dynamics::{propagate, transfer, StateVector};
use stirap::longpulse::{n3_long_closed_for, n3_long_with};
use stirap::sweep::{
    family_points, fit_scaling, preset, read_csv, run_sweep, run_sweep_serial, write_column_map, write_csv, Family,
    SweepSpec,
};
use stirap::{Error, Method};

use crate::manifest::RunManifest;
use crate::report::{optimality_line, populations_line, sig6, transfer_lines};
use crate::{AnalyticArgs, Command, FitArgs, Order, SimulateArgs, SweepArgs};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_ANALYSIS: u8 = 4;

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_USAGE, error: error.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::StepFailure { .. }
            | Error::QuadratureFailure { .. }
            | Error::DegenerateField { .. }
            | Error::DarkDepleted { .. } => EXIT_NUMERICAL,
            Error::InsufficientData(_) => EXIT_ANALYSIS,
            _ => EXIT_USAGE,
        };
        Self { code, error: e.into() }
    }
}

type Outcome = Result<(), Failure>;

pub fn run(command: &Command) -> Outcome {
    match command {
        Command::Simulate(a) => simulate(a, command),
        Command::Analytic(a) => analytic(a),
        Command::Sweep(a) => sweep(a, command),
        Command::Fit(a) => fit(a),
        Command::Replay(a) => {
            let m = RunManifest::read(&a.manifest).map_err(Failure::usage)?;
            if matches!(m.command, Command::Replay(_)) {
                return Err(Failure::usage(anyhow!("manifest records a replay, refusing to recurse")));
            }
            run(&m.command)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).with_context(|| format!("creating {}", path.display())).map_err(Failure::usage)
}

fn simulate(a: &SimulateArgs, command: &Command) -> Outcome {
    let started = Instant::now();
    let cfg = a.pulse.config()?;
    let settings = a.tolerances.settings(a.samples);
    settings.validate()?;
    let (start, end) = cfg.field_span();
    let trajectory = propagate(&cfg, start, end, &StateVector::ground(), &settings)?;
    let run = transfer(&cfg, &settings)?;

    trajectory.write_csv(create(&a.out)?)?;
    let manifest = RunManifest {
        command_name: "simulate".into(),
        command: command.clone(),
        configs: vec![cfg],
        tolerances: Some(settings),
        outputs: vec![a.out.clone()],
        version: env!("CARGO_PKG_VERSION").into(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let mpath = manifest.write_next_to(&a.out).map_err(Failure::usage)?;

    println!("{}", populations_line("at Stokes turn-off (t_f)", &run.at_t_f));
    println!("{}", populations_line("at pump turn-off", &run.at_end));
    println!("n3 = {}", sig6(run.n3()));
    println!(
        "steps: {} accepted, {} rejected, {} evaluations",
        trajectory.stats.accepted, trajectory.stats.rejected, trajectory.stats.evaluations
    );
    println!("wrote {} and {}", a.out.display(), mpath.display());
    Ok(())
}

fn analytic(a: &AnalyticArgs) -> Outcome {
    let cfg = a.pulse.config()?;
    let (result, order) = match a.order {
        Order::First => (n3_first_order(&cfg)?, Some(BasisOrder::First)),
        Order::Second => (n3_second_order(&cfg)?, Some(BasisOrder::Second)),
        Order::Long => (n3_long_with(&cfg, a.force)?, None),
        Order::LongClosed => (n3_long_closed_for(&cfg, !a.no_transient)?, None),
    };
    for line in transfer_lines(&result) {
        println!("{line}");
    }
    if let Some(order) = order {
        println!("{}", optimality_line(&optimality_check(&cfg, order)?));
    }
    Ok(())
}

fn load_spec(a: &SweepArgs) -> Result<SweepSpec, Failure> {
    match (&a.source.preset, &a.source.spec) {
        (Some(name), _) => Ok(preset(name)?),
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::usage)?;
            Ok(SweepSpec::parse(&text)?)
        }
        (None, None) => Err(Failure::usage(anyhow!("either --preset or --spec is required"))),
    }
}

fn sweep(a: &SweepArgs, command: &Command) -> Outcome {
    let started = Instant::now();
    let spec = load_spec(a)?;
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from(format!("{}.csv", spec.preset)));
    let rows = if a.serial { run_sweep_serial(&spec)? } else { run_sweep(&spec)? };

    write_csv(&rows, create(&out)?)?;
    let gp = out.with_extension("gp");
    let csv_name = out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    write_column_map(create(&gp)?, &csv_name)?;
    let manifest = RunManifest {
        command_name: "sweep".into(),
        command: command.clone(),
        configs: spec.bases.clone(),
        tolerances: Some(spec.settings),
        outputs: vec![out.clone(), gp.clone()],
        version: env!("CARGO_PKG_VERSION").into(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let mpath = manifest.write_next_to(&out).map_err(Failure::usage)?;

    let failures: Vec<_> = rows.iter().filter(|r| r.error.is_some()).collect();
    for r in &failures {
        eprintln!(
            "row failed: method {} omega_p0 {} omega_s0 {} gamma {}: {}",
            r.method,
            r.config.omega_p0,
            r.config.omega_s0,
            r.config.gamma,
            r.error.as_deref().unwrap_or_default()
        );
    }
    println!(
        "{} rows ({} families x {} values x {} methods), {} failed",
        rows.len(),
        spec.bases.len(),
        spec.values.len(),
        spec.methods.len(),
        failures.len()
    );
    for m in spec.methods.iter().filter(|m| **m != Method::Ode) {
        let worst = rows
            .iter()
            .filter(|r| r.method == *m)
            .filter_map(|r| r.abs_err_vs_ode)
            .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |w| w.max(e))));
        if let Some(w) = worst {
            println!("max |{m} - ode| = {}", sig6(w));
        }
    }
    println!("wrote {}, {} and {}", out.display(), gp.display(), mpath.display());
    Ok(())
}

fn fit(a: &FitArgs) -> Outcome {
    let file = File::open(&a.input).with_context(|| format!("opening {}", a.input.display())).map_err(Failure::usage)?;
    let rows = read_csv(file)?;
    let method: Method = a.method.parse()?;
    let families = a.family.iter().map(|f| f.parse::<Family>()).collect::<Result<Vec<_>, _>>()?;
    let points = family_points(&rows, method, &families);
    let fit = fit_scaling(&points).map_err(|e| Failure { code: EXIT_ANALYSIS, error: e.into() })?;
    let stderr = if fit.stderr.is_finite() { sig6(fit.stderr) } else { "n/a".into() };
    println!("slope = {} +- {stderr}", sig6(fit.slope));
    println!("envelope points: {} of {} rows", fit.points, points.len());
    println!("intercept (ln scale) = {}", sig6(fit.intercept));
    Ok(())
}
