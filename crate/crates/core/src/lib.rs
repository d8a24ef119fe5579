//! Simulation and analysis of Franson-type two-photon interference.
//!
//! - [`quantum`]: closed-form coincidence probabilities, correlations and
//!   CHSH values, plus a local-hidden-variable reference model.
//! - [`sim`]: Monte Carlo generation of detector clicks and windowed
//!   coincidence counts.
//! - [`analysis`]: histograms, accidental subtraction, fringe fitting and
//!   CHSH reports.
//! - [`config`]: the apparatus description and its file format.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod quantum;
pub mod sim;

pub use config::{load_config, ExperimentConfig};
pub use error::{Error, Result};
