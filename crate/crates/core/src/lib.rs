//! Simulation and analysis of stimulated Raman adiabatic passage in a
//! three-level Lambda system.

pub mod adiabatic;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod longpulse;
pub mod pulses;
pub mod quad;
pub mod sweep;
pub mod transfer;

pub use error::{Error, Result};
pub use pulses::PulseConfig;
pub use transfer::{ExponentParts, Method, TransferResult};
