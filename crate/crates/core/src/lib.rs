//! User identification from LFI-based eye-tracker signals.
//!
//! Laser-feedback-interferometry eye trackers report eye-surface velocity and
//! eye-to-sensor distance from two sensors at high sampling rates. This crate
//! implements the full identification pipeline over those raw channels:
//!
//! - [`dataio`] — recording/cohort I/O, validation and anti-aliased decimation
//! - [`preprocess`] — ten-channel kinematic derivation and windowing
//! - [`features`] — time-domain and frequency-domain feature extractors
//! - [`pipeline`] — per-window feature vectors, registry and standardization
//! - [`classify`] — linear max-margin and gradient-boosted tree classifiers
//! - [`eval`] — split protocols, identification metrics and parameter sweeps
//! - [`synth`] — reproducible synthetic cohorts and analytic oracle signals
//!
//! Everything is deterministic given a seed: repeated runs with the same
//! inputs and configuration produce bit-identical models and reports.

pub mod classify;
pub mod dataio;
mod dsp;
pub mod eval;
pub mod features;
pub mod pipeline;
pub mod preprocess;
pub mod synth;

mod error;

pub use error::{Error, Result};
