//! Per-window feature extractors, split into time-domain and
//! frequency-domain families.
//!
//! Every estimator is total on its declared input domain: degenerate inputs
//! (constant windows, zero spectra, empty bands) produce a defined value plus
//! a degenerate flag instead of NaN, so downstream classifiers always see
//! dense finite matrices.

pub mod freq;
pub mod time;

/// A scalar feature value together with its degenerate-input flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged {
    pub value: f64,
    /// True when the defining formula was not applicable and the value comes
    /// from a documented degenerate-case rule.
    pub degenerate: bool,
}

impl Flagged {
    pub fn ok(value: f64) -> Self {
        Flagged {
            value,
            degenerate: false,
        }
    }

    pub fn degenerate(value: f64) -> Self {
        Flagged {
            value,
            degenerate: true,
        }
    }
}
