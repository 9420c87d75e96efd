//! Kinematic channel derivation and windowing.
//!
//! From the four raw sensor channels we derive the ten per-sample kinematic
//! channels `[v1, v2, a1, a2, j1, j2, theta, vmag, dd1, dd2]`: velocities,
//! accelerations, jerks, motion direction, velocity magnitude and the
//! relative distance changes of both sensors. The stream is then cut into
//! non-overlapping, fixed-length, labelled windows.

use crate::dataio::{Activity, Recording};
use crate::{Error, Result};

/// Number of derived channels.
pub const N_CHANNELS: usize = 10;

/// Canonical derived-channel names, in channel order.
pub const CHANNEL_NAMES: [&str; N_CHANNELS] = [
    "v1", "v2", "a1", "a2", "j1", "j2", "theta", "vmag", "dd1", "dd2",
];

/// The ten derived channels of one recording, equal length, plus labels.
#[derive(Debug, Clone)]
pub struct DerivedChannels {
    pub channels: [Vec<f64>; N_CHANNELS],
    pub sampling_rate_hz: f64,
    pub subject_id: String,
    pub activity: Activity,
}

impl DerivedChannels {
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A fixed-length slice of all ten channels with its stream position.
#[derive(Debug, Clone)]
pub struct Window {
    pub channels: [Vec<f64>; N_CHANNELS],
    /// Window length in samples.
    pub len: usize,
    pub subject_id: String,
    pub activity: Activity,
    /// 0-based chronological position within the (subject, activity) stream.
    pub index: usize,
}

/// Minimum window length in samples accepted by the feature estimators.
pub const MIN_WINDOW_SAMPLES: usize = 16;

/// Backward first difference scaled by the sampling rate, head-padded by
/// repeating the first computed value so the output length matches the input.
fn backward_diff(x: &[f64], rate_hz: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    out.push(0.0);
    for t in 1..x.len() {
        out.push((x[t] - x[t - 1]) * rate_hz);
    }
    if out.len() > 1 {
        out[0] = out[1];
    }
    out
}

/// Acceleration and jerk from a velocity sequence (first differences applied
/// twice). Backward differences keep the operator causal: no future sample
/// leaks across a window boundary.
pub fn derive_kinematics(v: &[f64], rate_hz: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if v.len() < 3 {
        return Err(Error::invalid(format!(
            "kinematic derivation needs at least 3 samples, got {}",
            v.len()
        )));
    }
    if rate_hz <= 0.0 {
        return Err(Error::invalid("sampling rate must be positive"));
    }
    let a = backward_diff(v, rate_hz);
    let j = backward_diff(&a, rate_hz);
    Ok((a, j))
}

/// Motion direction `arctan(v2/v1)` and velocity magnitude, per sample.
///
/// At `v1 == 0` the arctangent of the ratio is undefined; the direction is
/// defined as `sign(v2) * pi/2`, and 0 when both components vanish. This is
/// continuous along the v2 axis.
pub fn direction_and_magnitude(v1: &[f64], v2: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if v1.len() != v2.len() {
        return Err(Error::invalid("velocity components differ in length"));
    }
    let mut theta = Vec::with_capacity(v1.len());
    let mut vmag = Vec::with_capacity(v1.len());
    for (&a, &b) in v1.iter().zip(v2) {
        let th = if a == 0.0 {
            if b == 0.0 {
                0.0
            } else {
                b.signum() * std::f64::consts::FRAC_PI_2
            }
        } else {
            (b / a).atan()
        };
        theta.push(th);
        vmag.push((a * a + b * b).sqrt());
    }
    Ok((theta, vmag))
}

/// Relative distance change between consecutive readings, head-padded with 0.
pub fn distance_delta(d: &[f64]) -> Result<Vec<f64>> {
    if d.len() < 2 {
        return Err(Error::invalid(format!(
            "distance delta needs at least 2 samples, got {}",
            d.len()
        )));
    }
    let mut out = Vec::with_capacity(d.len());
    out.push(0.0);
    for t in 1..d.len() {
        out.push(d[t] - d[t - 1]);
    }
    Ok(out)
}

/// Compose the full ten-channel representation of one recording.
pub fn build_channels(rec: &Recording) -> Result<DerivedChannels> {
    let rate = rec.sampling_rate_hz;
    let (a1, j1) = derive_kinematics(&rec.v1, rate)?;
    let (a2, j2) = derive_kinematics(&rec.v2, rate)?;
    let (theta, vmag) = direction_and_magnitude(&rec.v1, &rec.v2)?;
    let dd1 = distance_delta(&rec.d1)?;
    let dd2 = distance_delta(&rec.d2)?;
    Ok(DerivedChannels {
        channels: [
            rec.v1.clone(),
            rec.v2.clone(),
            a1,
            a2,
            j1,
            j2,
            theta,
            vmag,
            dd1,
            dd2,
        ],
        sampling_rate_hz: rate,
        subject_id: rec.subject_id.clone(),
        activity: rec.activity,
    })
}

/// Window length in samples for a duration at a rate (round half up).
pub fn window_samples(window_seconds: f64, rate_hz: f64) -> usize {
    (window_seconds * rate_hz).round() as usize
}

/// Cut the stream into non-overlapping windows of `window_seconds`.
///
/// Emits `floor(n/w)` windows with chronological indices from 0; the trailing
/// remainder is discarded. A stream shorter than one window yields an empty
/// sequence, not an error.
pub fn segment_windows(channels: &DerivedChannels, window_seconds: f64) -> Result<Vec<Window>> {
    if window_seconds <= 0.0 {
        return Err(Error::invalid("window length must be positive"));
    }
    let w = window_samples(window_seconds, channels.sampling_rate_hz);
    if w < MIN_WINDOW_SAMPLES {
        return Err(Error::invalid(format!(
            "window of {window_seconds} s at {} Hz is {w} samples; feature estimators need >= {MIN_WINDOW_SAMPLES}",
            channels.sampling_rate_hz
        )));
    }
    let n_windows = channels.len() / w;
    let mut out = Vec::with_capacity(n_windows);
    for k in 0..n_windows {
        let lo = k * w;
        let hi = lo + w;
        let slices: [Vec<f64>; N_CHANNELS] =
            std::array::from_fn(|c| channels.channels[c][lo..hi].to_vec());
        out.push(Window {
            channels: slices,
            len: w,
            subject_id: channels.subject_id.clone(),
            activity: channels.activity,
            index: k,
        });
    }
    Ok(out)
}
