//! Lumped electrothermal model of cascaded 2-SNAP sections.
//!
//! Each section holds two parallel wires of kinetic inductance `L_w`; the
//! sections and their chokes `L_s` are in series and shunted by the load
//! `R_L`, with the bias current source feeding the top node. A wire is
//! either superconducting or a fixed hotspot resistance. Units: nH, ohm,
//! ns, µA, so volts come out in µV.

mod network;
mod sim;

pub use network::{SnapNetwork, SnapParams};
pub use sim::{
    avalanche_threshold, avalanches, calibrate_recovery, recovery_time, recovery_time_from, simulate, simulate_detection,
    Event, EventKind, PulseTrace, SimOptions, ThresholdResult, WireState,
};

use thiserror::Error;

/// Measured 1/e recovery constant of the reference device.
pub const REFERENCE_RECOVERY_NS: f64 = 8.68;
/// Switching current of the reference device, shared by the two wires of a pair.
pub const REFERENCE_ISW_UA: f64 = 21.67;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("bias {bias} µA at or above the combined switching current {limit} µA: the network latches immediately")]
    Latch { bias: f64, limit: f64 },
    #[error("energy balance drift {drift:.3e} exceeds 1%; retry with a smaller time step than {dt} ns")]
    Unstable { drift: f64, dt: f64 },
    #[error("no completed pulse in trace")]
    NoPulse,
    #[error("avalanche predicate is not monotone in bias: {scan}")]
    NonMonotone { scan: String },
    #[error("calibration failed: {0}")]
    Calibration(String),
}

pub type Result<T> = std::result::Result<T, CircuitError>;
