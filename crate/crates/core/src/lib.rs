//! Desk-scale simulator of grid frequency dynamics with embedded P-class PMU
//! models and distributed under-frequency load-shedding / load-restoration
//! relays.
//!
//! The crate is organised bottom-up:
//!
//! - [`signal`]: phase-continuous waveform synthesis from frequency trajectories.
//! - [`grid`]: center-of-inertia swing model with droop governors and trips.
//! - [`pmu`]: interpolated-DFT synchrophasor / frequency / ROCOF estimation.
//! - [`relay`]: per-bus shedding and restoration logic driven by PMU frames.
//! - [`harness`]: scenario files, closed-loop orchestration, metrics and reports.

pub mod grid;
pub mod harness;
pub mod pmu;
pub mod relay;
pub mod signal;

/// Nominal system frequency used throughout, in Hz.
pub const NOMINAL_FREQUENCY: f64 = 50.0;

pub use grid::{Event, EventKind, Generator, GridModel, GridState, PlantType};
pub use harness::{Scenario, ScenarioReport};
pub use pmu::{EstimatorConfig, Frame};
pub use relay::{Command, RelayState, Scheme, ThresholdTable};
pub use signal::{FrequencyTrajectory, SampleStream};
