//! Parameter sweeps over pulse configurations, figure presets, CSV output
//! and scaling fits.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adiabatic::{n3_first_order, n3_second_order};
use crate::dynamics::{format_sig17, transfer, IntegratorSettings};
use crate::error::{Error, Result};
use crate::longpulse::{n3_long, n3_long_closed_for, LONG_PULSE_REFUSE};
use crate::pulses::{adiabaticity, PulseConfig};
use crate::transfer::Method;

pub const SWEEP_CSV_HEADER: &str = "preset,n,tau,td,omega_p0,omega_s0,gamma,epsilon,method,n3,abs_err_vs_ode";

/// Deficits `1 - n3` below this are clamped before taking logarithms.
pub const DEFICIT_FLOOR: f64 = 1e-14;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    OmegaP0,
    OmegaS0,
    /// Pump amplitude is the axis value, Stokes keeps its ratio to the pump.
    BothLocked,
    Gamma,
}

impl SweepAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepAxis::OmegaP0 => "omega_p0",
            SweepAxis::OmegaS0 => "omega_s0",
            SweepAxis::BothLocked => "both-locked",
            SweepAxis::Gamma => "gamma",
        }
    }

    /// `base` with the swept parameter set to `value`.
    pub fn apply(&self, base: &PulseConfig, value: f64) -> PulseConfig {
        let mut cfg = *base;
        match self {
            SweepAxis::OmegaP0 => cfg.omega_p0 = value,
            SweepAxis::OmegaS0 => cfg.omega_s0 = value,
            SweepAxis::BothLocked => {
                cfg.omega_s0 = value * base.omega_s0 / base.omega_p0;
                cfg.omega_p0 = value;
            }
            SweepAxis::Gamma => cfg.gamma = value,
        }
        cfg
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SweepAxis::OmegaP0, SweepAxis::OmegaS0, SweepAxis::BothLocked, SweepAxis::Gamma]
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidSweep(format!("unknown axis '{s}'")))
    }
}

/// A grid of configurations. Each entry of `bases` is one family; every
/// family is swept over the same `values`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub preset: String,
    pub bases: Vec<PulseConfig>,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub methods: Vec<Method>,
    pub settings: IntegratorSettings,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.bases.is_empty() {
            return Err(Error::InvalidSweep("no base configuration".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidSweep("method list is empty".into()));
        }
        if self.values.is_empty() {
            return Err(Error::InvalidSweep("value list is empty".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSweep("values must be finite".into()));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSweep("values must be strictly increasing".into()));
        }
        if self.preset.contains(['\n', '\r']) {
            return Err(Error::InvalidSweep("preset label must be a single line".into()));
        }
        self.settings.validate()?;
        for cfg in self.configs() {
            cfg.validate()?;
            for m in &self.methods {
                check_compatible(&cfg, *m)?;
            }
        }
        Ok(())
    }

    /// Every configuration of the sweep, family by family in axis order.
    pub fn configs(&self) -> Vec<PulseConfig> {
        self.bases
            .iter()
            .flat_map(|b| self.values.iter().map(move |v| self.axis.apply(b, *v)))
            .collect()
    }

    /// Parse the plain-text `key = value` format.
    ///
    /// Keys: `preset`, `n`, `tau`, `td`, `omega_p0`, `omega_s0`, `gamma`,
    /// `axis`, `values`, `methods`, `ratios`, `gammas`, `rel_tol`, `abs_tol`,
    /// `max_step`. `values` is either a comma list or `start:stop:count`.
    /// `ratios` and `gammas` expand the base into families.
    pub fn parse(text: &str) -> Result<Self> {
        let mut base = PulseConfig { n: 1, tau: 1.0, t_d: 0.5, omega_p0: 1.0, omega_s0: 1.0, gamma: 0.0 };
        let mut preset = "custom".to_string();
        let mut axis = None;
        let mut values = None;
        let mut methods = None;
        let mut ratios: Option<Vec<f64>> = None;
        let mut gammas: Option<Vec<f64>> = None;
        let mut settings = IntegratorSettings::default();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidSweep(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::InvalidSweep(format!("line {}: invalid {what} '{value}'", lineno + 1));
            let num = || value.parse::<f64>().map_err(|_| bad(key));
            match key {
                "preset" => preset = value.to_string(),
                "n" => base.n = value.parse().map_err(|_| bad("n"))?,
                "tau" => base.tau = num()?,
                "td" => base.t_d = num()?,
                "omega_p0" => base.omega_p0 = num()?,
                "omega_s0" => base.omega_s0 = num()?,
                "gamma" => base.gamma = num()?,
                "axis" => axis = Some(value.parse()?),
                "values" => values = Some(parse_values(value).map_err(|_| bad("values"))?),
                "methods" => {
                    methods = Some(value.split(',').map(|m| m.trim().parse()).collect::<Result<Vec<Method>>>()?)
                }
                "ratios" => ratios = Some(parse_list(value).map_err(|_| bad("ratios"))?),
                "gammas" => gammas = Some(parse_list(value).map_err(|_| bad("gammas"))?),
                "rel_tol" => settings.rel_tol = num()?,
                "abs_tol" => settings.abs_tol = num()?,
                "max_step" => settings.max_step = num()?,
                _ => return Err(Error::InvalidSweep(format!("line {}: unknown key '{key}'", lineno + 1))),
            }
        }

        let mut bases = vec![base];
        if let Some(rs) = ratios {
            bases = bases
                .iter()
                .flat_map(|b| rs.iter().map(move |r| PulseConfig { omega_s0: r * b.omega_p0, ..*b }))
                .collect();
        }
        if let Some(gs) = gammas {
            bases = bases.iter().flat_map(|b| gs.iter().map(move |g| PulseConfig { gamma: *g, ..*b })).collect();
        }
        let spec = SweepSpec {
            preset,
            bases,
            axis: axis.ok_or_else(|| Error::InvalidSweep("missing key 'axis'".into()))?,
            values: values.ok_or_else(|| Error::InvalidSweep("missing key 'values'".into()))?,
            methods: methods.ok_or_else(|| Error::InvalidSweep("missing key 'methods'".into()))?,
            settings,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    s.split(',').map(|x| x.trim().parse::<f64>()).collect()
}

fn parse_values(s: &str) -> std::result::Result<Vec<f64>, ()> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [start, stop, count] => {
            let a: f64 = start.parse().map_err(|_| ())?;
            let b: f64 = stop.parse().map_err(|_| ())?;
            let n: usize = count.parse().map_err(|_| ())?;
            if n < 2 {
                return Err(());
            }
            Ok(linspace(a, b, n))
        }
        [_] => parse_list(s).map_err(|_| ()),
        _ => Err(()),
    }
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let step = (stop - start) / (count - 1) as f64;
    (0..count).map(|k| if k == count - 1 { stop } else { start + step * k as f64 }).collect()
}

fn check_compatible(cfg: &PulseConfig, method: Method) -> Result<()> {
    let fail = |detail: String| Err(Error::InvalidSweep(format!("method {method}: {detail}")));
    match method {
        Method::Ode | Method::Analytic1 => Ok(()),
        Method::Analytic2 if cfg.n < 2 => fail(format!("needs envelope exponent n >= 2, got {}", cfg.n)),
        Method::Long if cfg.gamma * cfg.tau < LONG_PULSE_REFUSE => {
            fail(format!("needs gamma*tau >= {LONG_PULSE_REFUSE}, got {}", cfg.gamma * cfg.tau))
        }
        Method::LongClosed | Method::LongClosedNoTransient if !cfg.is_exact_case() => {
            fail("needs n = 1, t_d = tau/2 and equal amplitudes".into())
        }
        _ => Ok(()),
    }
}

/// Evaluate one method on one configuration.
pub fn evaluate(cfg: &PulseConfig, method: Method, settings: &IntegratorSettings) -> Result<f64> {
    match method {
        Method::Ode => transfer(cfg, settings).map(|t| t.n3()),
        Method::Analytic1 => n3_first_order(cfg).map(|r| r.n3),
        Method::Analytic2 => n3_second_order(cfg).map(|r| r.n3),
        Method::Long => n3_long(cfg).map(|r| r.n3),
        Method::LongClosed => n3_long_closed_for(cfg, true).map(|r| r.n3),
        Method::LongClosedNoTransient => n3_long_closed_for(cfg, false).map(|r| r.n3),
    }
}

/// One method evaluated at one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub preset: String,
    pub config: PulseConfig,
    pub epsilon: f64,
    pub method: Method,
    pub n3: Option<f64>,
    pub abs_err_vs_ode: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn deficit(&self) -> Option<f64> {
        self.n3.map(|p| 1.0 - p)
    }
}

fn rows_for(spec: &SweepSpec, cfg: &PulseConfig) -> Vec<SweepRow> {
    let epsilon = adiabaticity(cfg);
    let outcomes: Vec<(Method, Result<f64>)> =
        spec.methods.iter().map(|m| (*m, evaluate(cfg, *m, &spec.settings))).collect();
    let ode = outcomes.iter().find(|(m, _)| *m == Method::Ode).and_then(|(_, r)| r.as_ref().ok().copied());
    outcomes
        .into_iter()
        .map(|(method, r)| {
            let (n3, error) = match r {
                Ok(p) => (Some(p), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepRow {
                preset: spec.preset.clone(),
                config: *cfg,
                epsilon,
                method,
                n3,
                abs_err_vs_ode: n3.zip(ode).map(|(p, o)| (p - o).abs()),
                error,
            }
        })
        .collect()
}

/// Evaluate every configuration with every method, in parallel.
///
/// Rows come back in family, axis and method order. Failures are recorded
/// per row and do not abort the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let rows: Vec<Vec<SweepRow>> = spec.configs().par_iter().map(|c| rows_for(spec, c)).collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Same as [`run_sweep`] on the calling thread.
pub fn run_sweep_serial(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec.configs().iter().flat_map(|c| rows_for(spec, c)).collect())
}

/// Grids for the three figure reproductions.
pub fn preset(name: &str) -> Result<SweepSpec> {
    let exact = |ratio: f64, n: u32| PulseConfig { n, tau: 1.0, t_d: 0.5, omega_p0: 1.0, omega_s0: ratio, gamma: 0.0 };
    let spec = match name {
        "fig2" | "fig3" => {
            let (n, method) = if name == "fig2" { (1, Method::Analytic1) } else { (2, Method::Analytic2) };
            SweepSpec {
                preset: name.into(),
                bases: [1.0, 2.0, 5.0].iter().map(|r| exact(*r, n)).collect(),
                axis: SweepAxis::BothLocked,
                values: linspace(2.0, 50.0, 97),
                methods: vec![Method::Ode, method],
                settings: IntegratorSettings::default(),
            }
        }
        "fig4" => SweepSpec {
            preset: name.into(),
            bases: [10.0, 20.0, 40.0, 100.0].iter().map(|g| PulseConfig { gamma: *g, ..exact(1.0, 1) }).collect(),
            axis: SweepAxis::BothLocked,
            values: linspace(5.0, 60.0, 111),
            methods: vec![Method::Ode, Method::LongClosed, Method::LongClosedNoTransient],
            settings: IntegratorSettings::default(),
        },
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(spec)
}

fn opt_field(x: Option<f64>) -> String {
    x.map(format_sig17).unwrap_or_default()
}

/// Write rows as CSV with 17 significant digits and LF line endings.
/// Failed evaluations leave `n3` and `abs_err_vs_ode` empty.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(SWEEP_CSV_HEADER.split(','))?;
    for r in rows {
        let c = &r.config;
        w.write_record([
            r.preset.clone(),
            c.n.to_string(),
            format_sig17(c.tau),
            format_sig17(c.t_d),
            format_sig17(c.omega_p0),
            format_sig17(c.omega_s0),
            format_sig17(c.gamma),
            format_sig17(r.epsilon),
            r.method.to_string(),
            opt_field(r.n3),
            opt_field(r.abs_err_vs_ode),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Read rows back from [`write_csv`] output.
pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != SWEEP_CSV_HEADER {
        return Err(Error::InvalidSweep(format!("unexpected header '{}'", header.join(","))));
    }
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |col: &str| Error::InvalidSweep(format!("row {}: invalid {col}", k + 1));
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(&header[i]));
        let opt = |i: usize| if rec[i].is_empty() { Ok(None) } else { f(i).map(Some) };
        rows.push(SweepRow {
            preset: rec[0].to_string(),
            config: PulseConfig {
                n: rec[1].parse().map_err(|_| bad("n"))?,
                tau: f(2)?,
                t_d: f(3)?,
                omega_p0: f(4)?,
                omega_s0: f(5)?,
                gamma: f(6)?,
            },
            epsilon: f(7)?,
            method: rec[8].parse()?,
            n3: opt(9)?,
            abs_err_vs_ode: opt(10)?,
            error: None,
        });
    }
    Ok(rows)
}

/// Plain-text column map for plotting tools.
pub fn write_column_map<W: Write>(mut out: W, csv_name: &str) -> Result<()> {
    writeln!(out, "# columns of {csv_name} (comma separated, one header line)")?;
    for (k, name) in SWEEP_CSV_HEADER.split(',').enumerate() {
        writeln!(out, "{} {name}", k + 1)?;
    }
    writeln!(out, "set datafile separator ','")?;
    Ok(())
}

/// Selects one family of rows from a sweep.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Family {
    /// `omega_s0 / omega_p0`.
    Ratio(f64),
    Gamma(f64),
    Envelope(u32),
}

impl Family {
    pub fn matches(&self, cfg: &PulseConfig) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        match self {
            Family::Ratio(r) => close(cfg.omega_s0 / cfg.omega_p0, *r),
            Family::Gamma(g) => close(cfg.gamma * cfg.tau, *g),
            Family::Envelope(n) => cfg.n == *n,
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (key, value) =
            s.split_once('=').ok_or_else(|| Error::InvalidSweep(format!("family '{s}' is not key=value")))?;
        let bad = || Error::InvalidSweep(format!("invalid family value '{value}'"));
        match key.trim() {
            "ratio" => value.trim().parse().map(Family::Ratio).map_err(|_| bad()),
            "gamma" => value.trim().parse().map(Family::Gamma).map_err(|_| bad()),
            "n" => value.trim().parse().map(Family::Envelope).map_err(|_| bad()),
            other => Err(Error::InvalidSweep(format!("unknown family key '{other}' (ratio, gamma or n)"))),
        }
    }
}

/// `(epsilon, 1 - n3)` pairs of one method within the rows matching every filter.
pub fn family_points(rows: &[SweepRow], method: Method, filters: &[Family]) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.method == method && filters.iter().all(|f| f.matches(&r.config)))
        .filter_map(|r| r.deficit().map(|d| (r.epsilon, d)))
        .collect()
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    /// `NaN` when only two envelope points are available.
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!("{} point(s), need at least 2", points.len())));
    }
    if points.iter().any(|(x, _)| !(*x > 0.0)) {
        return Err(Error::InsufficientData("abscissae must be positive".into()));
    }
    let xs: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| y.max(DEFICIT_FLOOR).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if xs.len() > 2 {
        let ssr: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(ScalingFit { slope, stderr, intercept, points: xs.len() })
}

/// Local maxima of `y` along increasing `x`, excluding the end points.
pub fn upper_envelope(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    sorted.windows(3).filter(|w| w[1].1 >= w[0].1 && w[1].1 >= w[2].1).map(|w| w[1]).collect()
}

/// Scaling exponent of `1 - n3` against `epsilon` from the upper envelope of
/// the phase oscillations.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData(format!("{} point(s), need at least 4", points.len())));
    }
    let env = upper_envelope(points);
    if env.len() < 2 {
        return Err(Error::InsufficientData(format!("{} envelope maxima, need at least 2", env.len())));
    }
    fit_loglog(&env)
}
