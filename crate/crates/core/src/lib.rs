//! Simulation of a fiber-delivered optical lattice clock used as a
//! demodulator for a coil-wound fiber vibration sensor.
//!
//! The chain runs from the fiber link budget (lattice depth, tunneling)
//! through the mechanical transducer (acceleration to phase modulation)
//! to the Floquet sideband clock spectrum, its band-structure lineshape,
//! and a detection criterion on top of it.

pub mod bessel;
pub mod detection;
pub mod error;
pub mod floquet;
pub mod golden;
pub mod lineshape;
pub mod link_budget;
pub mod oracle;
pub mod output;
pub mod physics;
pub mod presets;
pub mod scenario;
pub mod svg;
pub mod sweep;
pub mod transducer;

pub use detection::{DetectionCriterion, DetectionReport};
pub use error::{Error, Result};
pub use floquet::{ClockPulse, DetuningGrid, FloquetParams, SpectrumMeta, SpectrumResult};
pub use golden::GoldenReport;
pub use link_budget::{FiberLink, LatticeConfig, LinkBudget};
pub use oracle::OracleComparison;
pub use physics::AtomSpecies;
pub use presets::Preset;
pub use scenario::Scenario;
pub use svg::PlotSpec;
pub use sweep::Sweep;
pub use transducer::{SensorConfig, VibrationDrive};
