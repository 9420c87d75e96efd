//! Time-domain features of a single windowed channel.
//!
//! Covers the statistical moments, amplitude dynamics, lag-1 autocorrelation,
//! the Hurst exponent via detrended fluctuation analysis, the largest
//! Lyapunov exponent via Rosenstein's nearest-neighbor divergence method, the
//! Teager-Kaiser energy operator and histogram entropy.

use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::features::Flagged;
use crate::{Error, Result};

/// Number of time-domain features per channel.
pub const N_TIME_FEATURES: usize = 17;

/// Time-domain feature names, in extraction order.
pub const TIME_FEATURE_NAMES: [&str; N_TIME_FEATURES] = [
    "mean",
    "variance",
    "skewness",
    "kurtosis",
    "min",
    "max",
    "rms",
    "mad",
    "peak_to_peak",
    "zcr",
    "crest_factor",
    "lag1_autocorr",
    "hurst",
    "lle",
    "tkeo_mean",
    "tkeo_var",
    "entropy",
];

/// Detrended fluctuation analysis parameters.
///
/// Scales are `n_scales` log-spaced segment sizes in
/// `[n_min, n_max_fraction * len]`; each segment is detrended with a
/// least-squares polynomial of order `detrend_order` (1 = standard DFA-1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DfaConfig {
    pub n_min: usize,
    pub n_max_fraction: f64,
    pub n_scales: usize,
    pub detrend_order: usize,
}

impl Default for DfaConfig {
    fn default() -> Self {
        DfaConfig {
            n_min: 16,
            n_max_fraction: 0.25,
            n_scales: 12,
            detrend_order: 1,
        }
    }
}

/// Embedding delay selection for the Lyapunov estimator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delay {
    /// First zero crossing of the autocorrelation function (fallback 1).
    Auto,
    Fixed(usize),
}

/// Temporal exclusion around each reference point during neighbor search.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheilerWindow {
    /// Mean period estimated from the dominant periodogram peak.
    MeanPeriod,
    Fixed(usize),
}

/// Rosenstein largest-Lyapunov-exponent parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LleConfig {
    pub embed_dim: usize,
    pub delay: Delay,
    pub theiler: TheilerWindow,
    /// Fraction of the divergence curve used for the slope fit.
    pub fit_range_fraction: f64,
    /// Cap on reference points for the neighbor search; references are taken
    /// on an even stride so the estimate stays deterministic.
    pub max_reference_points: usize,
    /// Cap on the tracked divergence-curve length in steps.
    pub max_divergence_steps: usize,
}

impl Default for LleConfig {
    fn default() -> Self {
        LleConfig {
            embed_dim: 5,
            delay: Delay::Auto,
            theiler: TheilerWindow::MeanPeriod,
            fit_range_fraction: 0.1,
            max_reference_points: 512,
            max_divergence_steps: 500,
        }
    }
}

/// Minimum window length for a usable Lyapunov estimate; below this the
/// feature is reported as 0 with a degenerate flag.
pub const LLE_MIN_SAMPLES: usize = 500;

/// The eight basic statistical descriptors of one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasicStats {
    pub mean: f64,
    /// Population variance (divide by n).
    pub variance: f64,
    /// m3 / m2^1.5; 0 with flag for constant input.
    pub skewness: f64,
    /// Non-excess kurtosis m4 / m2^2 (Gaussian -> 3); 0 with flag for
    /// constant input.
    pub kurtosis: f64,
    pub min: f64,
    pub max: f64,
    pub rms: f64,
    /// Mean absolute deviation from the mean.
    pub mad: f64,
    /// True when skewness/kurtosis fell back to the constant-input rule.
    pub degenerate_moments: bool,
}

pub fn basic_stats(x: &[f64]) -> Result<BasicStats> {
    if x.len() < 2 {
        return Err(Error::invalid("basic stats need at least 2 samples"));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    let mut mad = 0.0;
    let mut sq = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        mad += d.abs();
        sq += v * v;
        min = min.min(v);
        max = max.max(v);
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    mad /= n;
    let rms = (sq / n).sqrt();
    let (skewness, kurtosis, degenerate) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2), false)
    } else {
        (0.0, 0.0, true)
    };
    Ok(BasicStats {
        mean,
        variance: m2,
        skewness,
        kurtosis,
        min,
        max,
        rms,
        mad,
        degenerate_moments: degenerate,
    })
}

/// Peak-to-peak amplitude, zero-crossing rate and crest factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeDynamics {
    pub peak_to_peak: f64,
    /// Fraction of consecutive sample pairs with a sign change; zeros count
    /// as positive.
    pub zcr: f64,
    /// max(|x|) / rms; 0 with flag for an all-zero window.
    pub crest_factor: f64,
    pub degenerate_crest: bool,
}

pub fn amplitude_dynamics(x: &[f64]) -> Result<AmplitudeDynamics> {
    if x.len() < 2 {
        return Err(Error::invalid("amplitude dynamics need at least 2 samples"));
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut peak_abs: f64 = 0.0;
    let mut sq = 0.0;
    let mut crossings = 0usize;
    for (i, &v) in x.iter().enumerate() {
        min = min.min(v);
        max = max.max(v);
        peak_abs = peak_abs.max(v.abs());
        sq += v * v;
        if i > 0 {
            let prev_neg = x[i - 1] < 0.0;
            let cur_neg = v < 0.0;
            if prev_neg != cur_neg {
                crossings += 1;
            }
        }
    }
    let rms = (sq / x.len() as f64).sqrt();
    let (crest, degenerate) = if rms > 0.0 {
        (peak_abs / rms, false)
    } else {
        (0.0, true)
    };
    Ok(AmplitudeDynamics {
        peak_to_peak: max - min,
        zcr: crossings as f64 / (x.len() - 1) as f64,
        crest_factor: crest,
        degenerate_crest: degenerate,
    })
}

/// Lag-1 autocorrelation, normalized by the total centered energy:
/// `R1 = sum_{t<n-1} (x(t)-mu)(x(t+1)-mu) / sum_t (x(t)-mu)^2`.
///
/// Constant input has a zero denominator; R1 is then 0 with a flag.
pub fn lag1_autocorr(x: &[f64]) -> Result<Flagged> {
    if x.len() < 3 {
        return Err(Error::invalid("lag-1 autocorrelation needs >= 3 samples"));
    }
    let mu = dsp::mean(x);
    let mut num = 0.0;
    let mut den = 0.0;
    for t in 0..x.len() {
        let d = x[t] - mu;
        den += d * d;
        if t + 1 < x.len() {
            num += d * (x[t + 1] - mu);
        }
    }
    if den > 0.0 {
        Ok(Flagged::ok(num / den))
    } else {
        Ok(Flagged::degenerate(0.0))
    }
}

/// Least-squares polynomial residuals of `y` against sample index, summed as
/// squared error. Index is centered and scaled to [-1, 1] for conditioning.
fn poly_detrend_ssr(y: &[f64], order: usize) -> f64 {
    let n = y.len();
    let dim = order + 1;
    debug_assert!(n >= dim);
    // Normal equations over the scaled index basis.
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                0.0
            } else {
                2.0 * i as f64 / (n - 1) as f64 - 1.0
            }
        })
        .collect();
    let mut ata = vec![vec![0.0; dim]; dim];
    let mut atb = vec![0.0; dim];
    for (i, &xv) in xs.iter().enumerate() {
        let mut powers = vec![1.0; dim];
        for p in 1..dim {
            powers[p] = powers[p - 1] * xv;
        }
        for r in 0..dim {
            atb[r] += powers[r] * y[i];
            for c in 0..dim {
                ata[r][c] += powers[r] * powers[c];
            }
        }
    }
    // Gaussian elimination with partial pivoting on the tiny system.
    for col in 0..dim {
        let mut pivot = col;
        for r in col + 1..dim {
            if ata[r][col].abs() > ata[pivot][col].abs() {
                pivot = r;
            }
        }
        ata.swap(col, pivot);
        atb.swap(col, pivot);
        let diag = ata[col][col];
        if diag.abs() < 1e-300 {
            continue;
        }
        for r in col + 1..dim {
            let f = ata[r][col] / diag;
            for c in col..dim {
                ata[r][c] -= f * ata[col][c];
            }
            atb[r] -= f * atb[col];
        }
    }
    let mut coef = vec![0.0; dim];
    for r in (0..dim).rev() {
        let mut acc = atb[r];
        for c in r + 1..dim {
            acc -= ata[r][c] * coef[c];
        }
        coef[r] = if ata[r][r].abs() < 1e-300 {
            0.0
        } else {
            acc / ata[r][r]
        };
    }
    let mut ssr = 0.0;
    for (i, &xv) in xs.iter().enumerate() {
        let mut fit = 0.0;
        let mut pw = 1.0;
        for &c in &coef {
            fit += c * pw;
            pw *= xv;
        }
        let r = y[i] - fit;
        ssr += r * r;
    }
    ssr
}

/// Hurst exponent by detrended fluctuation analysis.
///
/// The signal is integrated into its mean-removed cumulative profile; for
/// each scale the profile is split into non-overlapping segments, each
/// segment is polynomial-detrended, and the fluctuation `F(n)` is the RMS
/// residual. The exponent is the log-log slope of `F(n)` against `n`.
///
/// Constant input produces zero fluctuations at every scale and is reported
/// as `H = 0.5` with a degenerate flag.
pub fn hurst_dfa(x: &[f64], cfg: &DfaConfig) -> Result<Flagged> {
    let w = x.len();
    if cfg.n_min < 8 {
        return Err(Error::invalid("DFA n_min must be >= 8"));
    }
    if cfg.detrend_order < 1 {
        return Err(Error::invalid("DFA detrend order must be >= 1"));
    }
    if !(cfg.n_max_fraction > 0.0 && cfg.n_max_fraction <= 0.5) {
        return Err(Error::invalid("DFA n_max_fraction must be in (0, 0.5]"));
    }
    if w < 4 * cfg.n_min {
        return Err(Error::invalid(format!(
            "DFA needs at least 4*n_min = {} samples, got {w}",
            4 * cfg.n_min
        )));
    }
    let n_max = ((cfg.n_max_fraction * w as f64).floor() as usize).max(cfg.n_min);

    // Log-spaced integer scales, deduplicated.
    let mut scales: Vec<usize> = Vec::new();
    let ratio = (n_max as f64 / cfg.n_min as f64).ln();
    for i in 0..cfg.n_scales {
        let t = if cfg.n_scales == 1 {
            0.0
        } else {
            i as f64 / (cfg.n_scales - 1) as f64
        };
        let s = (cfg.n_min as f64 * (ratio * t).exp()).round() as usize;
        if scales.last() != Some(&s) {
            scales.push(s);
        }
    }
    scales.retain(|&s| s >= cfg.n_min && s <= n_max && s > cfg.detrend_order + 1);
    if scales.len() < 4 {
        return Err(Error::invalid(format!(
            "DFA has {} usable scales, needs >= 4",
            scales.len()
        )));
    }

    let profile = dsp::integrated_profile(x);
    let mut log_n = Vec::with_capacity(scales.len());
    let mut log_f = Vec::with_capacity(scales.len());
    for &scale in &scales {
        let segments = profile.len() / scale;
        let mut ssr = 0.0;
        for s in 0..segments {
            ssr += poly_detrend_ssr(&profile[s * scale..(s + 1) * scale], cfg.detrend_order);
        }
        let covered = (segments * scale) as f64;
        let f = (ssr / covered).sqrt();
        if f > 0.0 {
            log_n.push((scale as f64).ln());
            log_f.push(f.ln());
        }
    }
    if log_n.len() < 2 {
        // Zero fluctuation at (almost) all scales: constant or exactly
        // detrendable input.
        return Ok(Flagged::degenerate(0.5));
    }
    let (slope, _, _) = dsp::linear_fit(&log_n, &log_f);
    Ok(Flagged::ok(slope))
}

/// Largest-Lyapunov-exponent estimate.
#[derive(Debug, Clone, Copy)]
pub struct LleEstimate {
    /// Divergence rate in nats per time unit.
    pub lambda: f64,
    /// R-squared of the linear fit over the initial divergence region.
    pub fit_r_squared: f64,
    /// Set when the divergence curve has no usable linear region (e.g. white
    /// noise saturates immediately).
    pub low_fit_quality: bool,
}

fn autocorr_first_zero(x: &[f64]) -> usize {
    let n = x.len();
    let mu = dsp::mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - mu).collect();
    let denom: f64 = centered.iter().map(|v| v * v).sum();
    if denom <= 0.0 {
        return 1;
    }
    let max_lag = n / 4;
    for lag in 1..=max_lag {
        let mut acc = 0.0;
        for t in 0..n - lag {
            acc += centered[t] * centered[t + lag];
        }
        if acc / denom <= 0.0 {
            return lag;
        }
    }
    1
}

/// Dominant period in samples from the periodogram peak (DC excluded).
fn dominant_period(x: &[f64]) -> usize {
    let n = x.len();
    let mu = dsp::mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - mu).collect();
    let spec = dsp::fft_real(&centered);
    let mut best_k = 1;
    let mut best_p = 0.0;
    for (k, c) in spec.iter().enumerate().take(n / 2 + 1).skip(1) {
        let p = c.norm_sqr();
        if p > best_p {
            best_p = p;
            best_k = k;
        }
    }
    if best_p <= 0.0 {
        1
    } else {
        (n as f64 / best_k as f64).round().max(1.0) as usize
    }
}

/// Rosenstein's method: delay-embed, find each reference point's nearest
/// neighbor outside the Theiler exclusion, track the mean log distance of the
/// pairs over time, and fit the slope of the initial linear region.
///
/// Deterministic by construction: references are taken on an even stride and
/// neighbor ties break toward the lower index.
pub fn lyapunov_rosenstein(x: &[f64], cfg: &LleConfig, rate_hz: f64) -> Result<LleEstimate> {
    let w = x.len();
    if w < LLE_MIN_SAMPLES {
        return Err(Error::invalid(format!(
            "Lyapunov estimation needs >= {LLE_MIN_SAMPLES} samples, got {w}"
        )));
    }
    if cfg.embed_dim < 2 {
        return Err(Error::invalid("embedding dimension must be >= 2"));
    }
    if rate_hz <= 0.0 {
        return Err(Error::invalid("sampling rate must be positive"));
    }
    let delay = match cfg.delay {
        Delay::Fixed(d) => d.max(1),
        Delay::Auto => autocorr_first_zero(x),
    };
    // Honor embed_dim * delay < w/2 by clamping an overlarge auto delay.
    let max_delay = (w / 2 - 1) / cfg.embed_dim;
    let delay = delay.clamp(1, max_delay.max(1));
    if cfg.embed_dim * delay >= w / 2 {
        return Err(Error::invalid(
            "embedding window exceeds half the signal length",
        ));
    }

    let m = cfg.embed_dim;
    let n_points = w - (m - 1) * delay;
    let theiler = match cfg.theiler {
        TheilerWindow::Fixed(t) => t,
        TheilerWindow::MeanPeriod => dominant_period(x),
    }
    .min(n_points / 4)
    .max(1);

    let point = |i: usize, k: usize| x[i + k * delay];
    let dist = |i: usize, j: usize| -> f64 {
        let mut acc = 0.0;
        for k in 0..m {
            let d = point(i, k) - point(j, k);
            acc += d * d;
        }
        acc.sqrt()
    };

    let stride = n_points.div_ceil(cfg.max_reference_points.max(1)).max(1);
    let refs: Vec<usize> = (0..n_points).step_by(stride).collect();

    use rayon::prelude::*;
    let pairs: Vec<(usize, usize)> = refs
        .par_iter()
        .filter_map(|&i| {
            let mut best: Option<(f64, usize)> = None;
            for j in 0..n_points {
                if i.abs_diff(j) <= theiler {
                    continue;
                }
                let d = dist(i, j);
                if d > 0.0 {
                    match best {
                        Some((bd, _)) if bd <= d => {}
                        _ => best = Some((d, j)),
                    }
                }
            }
            best.map(|(_, j)| (i, j))
        })
        .collect();
    if pairs.is_empty() {
        return Err(Error::Estimation(
            "no valid neighbor pairs for Lyapunov estimation".into(),
        ));
    }

    let max_steps = cfg.max_divergence_steps.min(n_points - 1);
    let mut curve = Vec::with_capacity(max_steps);
    for step in 0..max_steps {
        let mut acc = 0.0;
        let mut count = 0usize;
        for &(i, j) in &pairs {
            if i + step < n_points && j + step < n_points {
                let d = dist(i + step, j + step);
                if d > 0.0 {
                    acc += d.ln();
                    count += 1;
                }
            }
        }
        if count < 2 {
            break;
        }
        curve.push(acc / count as f64);
    }
    if curve.len() < 5 {
        return Err(Error::Estimation(format!(
            "divergence curve has {} points, needs >= 5",
            curve.len()
        )));
    }

    let fit_len = ((curve.len() as f64 * cfg.fit_range_fraction).round() as usize)
        .clamp(2, curve.len());
    let steps: Vec<f64> = (0..fit_len).map(|i| i as f64).collect();
    let (slope_per_step, _, r2) = dsp::linear_fit(&steps, &curve[..fit_len]);
    Ok(LleEstimate {
        lambda: slope_per_step * rate_hz,
        fit_r_squared: r2,
        low_fit_quality: r2 < 0.9,
    })
}

/// Teager-Kaiser energy sequence and its summary statistics.
#[derive(Debug, Clone)]
pub struct TkeoSummary {
    /// `psi(t) = x(t)^2 - x(t-1) x(t+1)` over the interior samples.
    pub psi: Vec<f64>,
    pub mean: f64,
    /// Population variance of psi.
    pub variance: f64,
}

pub fn tkeo(x: &[f64]) -> Result<TkeoSummary> {
    if x.len() < 3 {
        return Err(Error::invalid("TKEO needs at least 3 samples"));
    }
    let psi: Vec<f64> = (1..x.len() - 1)
        .map(|t| x[t] * x[t] - x[t - 1] * x[t + 1])
        .collect();
    let n = psi.len() as f64;
    let mean = psi.iter().sum::<f64>() / n;
    let variance = psi.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok(TkeoSummary {
        psi,
        mean,
        variance,
    })
}

/// Shannon entropy (natural log) of the equal-width value histogram over
/// `[min, max]`. Constant input has zero range: all mass in one bin, H = 0
/// with a degenerate flag.
pub fn histogram_entropy(x: &[f64], bin_count: usize) -> Result<Flagged> {
    if x.len() < 2 {
        return Err(Error::invalid("histogram entropy needs >= 2 samples"));
    }
    if bin_count < 2 {
        return Err(Error::invalid("bin count must be >= 2"));
    }
    let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if range <= 0.0 {
        return Ok(Flagged::degenerate(0.0));
    }
    let mut counts = vec![0usize; bin_count];
    for &v in x {
        let idx = (((v - min) / range) * bin_count as f64) as usize;
        counts[idx.min(bin_count - 1)] += 1;
    }
    let total = x.len() as f64;
    let mut h = 0.0;
    for &c in &counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.ln();
        }
    }
    Ok(Flagged::ok(h.max(0.0)))
}

/// All time-domain features of one window, with per-feature degenerate flags
/// parallel to [`TIME_FEATURE_NAMES`].
#[derive(Debug, Clone)]
pub struct TimeFeatures {
    pub values: [f64; N_TIME_FEATURES],
    pub flags: [bool; N_TIME_FEATURES],
}

/// Extract the full time-domain feature set.
///
/// Deterministic for fixed inputs and configuration. Windows shorter than
/// [`LLE_MIN_SAMPLES`] report `lle = 0` with a degenerate flag (this keeps
/// sub-second window sweeps running); every other estimator's precondition is
/// a hard error.
pub fn extract_time_features(
    x: &[f64],
    rate_hz: f64,
    dfa: &DfaConfig,
    lle: &LleConfig,
    bin_count: usize,
) -> Result<TimeFeatures> {
    let stats = basic_stats(x)?;
    let amp = amplitude_dynamics(x)?;
    let r1 = lag1_autocorr(x)?;
    let hurst = hurst_dfa(x, dfa)?;
    let constant = stats.variance <= 0.0;
    let (lle_val, lle_flag) = if x.len() < LLE_MIN_SAMPLES || constant {
        (0.0, true)
    } else {
        match lyapunov_rosenstein(x, lle, rate_hz) {
            Ok(est) => (est.lambda, est.low_fit_quality),
            Err(Error::Estimation(_)) => (0.0, true),
            Err(e) => return Err(e),
        }
    };
    let tk = tkeo(x)?;
    let ent = histogram_entropy(x, bin_count)?;

    let values = [
        stats.mean,
        stats.variance,
        stats.skewness,
        stats.kurtosis,
        stats.min,
        stats.max,
        stats.rms,
        stats.mad,
        amp.peak_to_peak,
        amp.zcr,
        amp.crest_factor,
        r1.value,
        hurst.value,
        lle_val,
        tk.mean,
        tk.variance,
        ent.value,
    ];
    let mut flags = [false; N_TIME_FEATURES];
    flags[2] = stats.degenerate_moments;
    flags[3] = stats.degenerate_moments;
    flags[10] = amp.degenerate_crest;
    flags[11] = r1.degenerate;
    flags[12] = hurst.degenerate;
    flags[13] = lle_flag;
    flags[16] = ent.degenerate;
    debug_assert!(values.iter().all(|v| v.is_finite()));
    Ok(TimeFeatures { values, flags })
}
