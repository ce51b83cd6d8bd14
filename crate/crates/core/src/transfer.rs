use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// How a transfer probability was obtained.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Ode,
    Analytic1,
    Analytic2,
    Long,
    LongClosed,
    LongClosedNoTransient,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Ode,
        Method::Analytic1,
        Method::Analytic2,
        Method::Long,
        Method::LongClosed,
        Method::LongClosedNoTransient,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ode => "ode",
            Method::Analytic1 => "analytic1",
            Method::Analytic2 => "analytic2",
            Method::Long => "long",
            Method::LongClosed => "long-closed",
            Method::LongClosedNoTransient => "long-closed-no-transient",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidSweep(format!("unknown method '{s}'")))
    }
}

/// Split of the long-pulse exponent `ln n3`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ExponentParts {
    /// Damped oscillations after pump turn-on.
    pub transient: f64,
    /// `-4 gamma * integral(theta_dot^2 / Omega^2)`.
    pub first_integral: f64,
    /// Integral of the next-order quasistationary term.
    pub second_integral: f64,
}

impl ExponentParts {
    pub fn total(&self) -> f64 {
        self.transient + self.first_integral + self.second_integral
    }

    /// Transient term relative to the quasistationary remainder.
    pub fn transient_share(&self) -> f64 {
        self.transient / (self.first_integral + self.second_integral)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferResult {
    pub n3: f64,
    pub method: Method,
    /// Adiabaticity parameter of the configuration.
    pub epsilon: f64,
    /// Phase integral entering the oscillating term, if any.
    pub phase: Option<f64>,
    pub exponent: Option<ExponentParts>,
    pub diagnostics: Vec<String>,
}

impl TransferResult {
    pub fn new(n3: f64, method: Method, epsilon: f64) -> Self {
        Self { n3, method, epsilon, phase: None, exponent: None, diagnostics: Vec::new() }
    }
}

/// Snap values within `1e-12` of the unit interval onto it.
pub(crate) fn clamp_probability(p: f64) -> f64 {
    if (-1e-12..0.0).contains(&p) {
        0.0
    } else if p > 1.0 && p <= 1.0 + 1e-12 {
        1.0
    } else {
        p
    }
}
