//! Frequency-domain features of a single windowed channel: Welch power
//! spectral density, per-band powers, spectral entropy, the discrete wavelet
//! transform with per-level statistics and wavelet entropy.

use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::features::time::{basic_stats, BasicStats};
use crate::features::Flagged;
use crate::{Error, Result};

/// Analysis bands in Hz, Table-style: `(lo, hi)` with inclusive low edge and
/// exclusive high edge.
pub const DEFAULT_BANDS: [(f64, f64); 6] = [
    (0.1, 1.0),
    (1.0, 4.0),
    (4.0, 8.0),
    (8.0, 12.0),
    (12.0, 30.0),
    (30.0, 50.0),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowFunction {
    Hann,
    Hamming,
    Rect,
}

impl WindowFunction {
    fn taps(self, n: usize) -> Vec<f64> {
        match self {
            WindowFunction::Hann => dsp::hann(n),
            WindowFunction::Hamming => dsp::hamming(n),
            WindowFunction::Rect => vec![1.0; n],
        }
    }
}

/// Welch averaged-periodogram parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WelchConfig {
    /// Segment length; a power of two.
    pub segment_length: usize,
    /// Fractional overlap between consecutive segments, in [0, 1).
    pub overlap_fraction: f64,
    pub window_function: WindowFunction,
}

impl WelchConfig {
    /// Default policy for a window of `len` samples: Hann, 50% overlap,
    /// segments of `2^floor(log2(len/2))` capped at `max_segment`.
    pub fn for_window(len: usize, max_segment: usize) -> Self {
        let mut seg = 1usize;
        while seg * 2 <= len / 2 {
            seg *= 2;
        }
        WelchConfig {
            segment_length: seg.min(max_segment).max(2),
            overlap_fraction: 0.5,
            window_function: WindowFunction::Hann,
        }
    }
}

/// One-sided power spectral density.
#[derive(Debug, Clone)]
pub struct Psd {
    /// Ascending bin center frequencies in Hz, spanning [0, rate/2].
    pub freqs: Vec<f64>,
    /// Power density per bin, >= 0 elementwise.
    pub power: Vec<f64>,
    pub resolution_hz: f64,
}

/// Welch's method: split into overlapping windowed segments, average the
/// modified periodograms, normalize by the window power `U = mean(w^2)`.
///
/// Density scaling: `sum(power) * resolution` approximates the mean square of
/// the signal (the variance, for zero-mean input).
pub fn welch_psd(x: &[f64], rate_hz: f64, cfg: &WelchConfig) -> Result<Psd> {
    let n = cfg.segment_length;
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::invalid("segment length must be a power of two >= 2"));
    }
    if x.len() < n {
        return Err(Error::invalid(format!(
            "signal of {} samples is shorter than one segment of {n}",
            x.len()
        )));
    }
    if !(0.0..1.0).contains(&cfg.overlap_fraction) {
        return Err(Error::invalid("overlap fraction must be in [0, 1)"));
    }
    if rate_hz <= 0.0 {
        return Err(Error::invalid("sampling rate must be positive"));
    }
    let step = ((n as f64 * (1.0 - cfg.overlap_fraction)).round() as usize).max(1);
    let taps = cfg.window_function.taps(n);
    let u = taps.iter().map(|w| w * w).sum::<f64>() / n as f64;

    let n_bins = n / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut segments = 0usize;
    let mut start = 0usize;
    let mut buf = vec![0.0; n];
    while start + n <= x.len() {
        for i in 0..n {
            buf[i] = x[start + i] * taps[i];
        }
        let spec = dsp::fft_real(&buf);
        for (k, slot) in acc.iter_mut().enumerate() {
            *slot += spec[k].norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let scale = 1.0 / (segments as f64 * rate_hz * n as f64 * u);
    let mut power: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || k == n / 2 { 1.0 } else { 2.0 };
            p * scale * one_sided
        })
        .collect();
    for p in power.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let resolution = rate_hz / n as f64;
    Ok(Psd {
        freqs: (0..n_bins).map(|k| k as f64 * resolution).collect(),
        power,
        resolution_hz: resolution,
    })
}

/// Mean and peak PSD power inside one frequency band.
#[derive(Debug, Clone, Copy)]
pub struct BandPower {
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub mean_power: f64,
    pub peak_power: f64,
    /// True when no PSD bin falls inside the band at this resolution.
    pub empty: bool,
}

/// Select bins by center frequency in `[lo, hi)`; the DC bin never belongs to
/// any band. An empty band reports `(0, 0)` with a flag so coarse-resolution
/// sweeps keep running.
pub fn band_powers(psd: &Psd, bands: &[(f64, f64)]) -> Vec<BandPower> {
    bands
        .iter()
        .map(|&(lo, hi)| {
            let mut mean = 0.0;
            let mut peak = 0.0f64;
            let mut count = 0usize;
            for (k, (&f, &p)) in psd.freqs.iter().zip(&psd.power).enumerate() {
                if k == 0 {
                    continue;
                }
                if f >= lo && f < hi {
                    mean += p;
                    peak = peak.max(p);
                    count += 1;
                }
            }
            if count == 0 {
                BandPower {
                    lo_hz: lo,
                    hi_hz: hi,
                    mean_power: 0.0,
                    peak_power: 0.0,
                    empty: true,
                }
            } else {
                BandPower {
                    lo_hz: lo,
                    hi_hz: hi,
                    mean_power: mean / count as f64,
                    peak_power: peak,
                    empty: false,
                }
            }
        })
        .collect()
}

/// Shannon entropy (natural log) of the normalized non-DC spectrum. Zero
/// total power yields 0 with a degenerate flag.
pub fn spectral_entropy(psd: &Psd) -> Flagged {
    let total: f64 = psd.power.iter().skip(1).sum();
    if !(total > 0.0) {
        return Flagged::degenerate(0.0);
    }
    let mut h = 0.0;
    for &p in psd.power.iter().skip(1) {
        if p > 0.0 {
            let s = p / total;
            h -= s * s.ln();
        }
    }
    Flagged::ok(h.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveletFamily {
    Haar,
    /// The 4-tap Daubechies filter (two vanishing moments).
    Daubechies4,
}

impl WaveletFamily {
    /// Orthonormal scaling (low-pass) filter.
    fn lowpass(self) -> Vec<f64> {
        match self {
            WaveletFamily::Haar => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                vec![s, s]
            }
            WaveletFamily::Daubechies4 => {
                let r3 = 3f64.sqrt();
                let norm = 4.0 * 2f64.sqrt();
                vec![
                    (1.0 + r3) / norm,
                    (3.0 + r3) / norm,
                    (3.0 - r3) / norm,
                    (1.0 - r3) / norm,
                ]
            }
        }
    }

    /// Quadrature-mirror wavelet (high-pass) filter.
    fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let l = h.len();
        (0..l)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * h[l - 1 - k]
            })
            .collect()
    }

    pub fn filter_length(self) -> usize {
        match self {
            WaveletFamily::Haar => 2,
            WaveletFamily::Daubechies4 => 4,
        }
    }
}

/// Signal extension at the window edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// Mirror with edge duplication before analysis; slightly more
    /// coefficients, no edge discontinuity.
    Symmetric,
    /// Zero extension: the transform is an exact isometry (energy preserved).
    Zero,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveletConfig {
    pub family: WaveletFamily,
    pub levels: usize,
    pub boundary: BoundaryMode,
}

impl WaveletConfig {
    /// Deepest decomposition the invariant allows for a window of `len`.
    pub fn max_levels(family: WaveletFamily, len: usize) -> usize {
        let denom = family.filter_length() - 1;
        let mut levels = 0usize;
        let mut cap = len / denom;
        while cap >= 2 {
            levels += 1;
            cap /= 2;
        }
        levels
    }

    /// Default policy: capped at `max_levels` (typically 4) by the invariant.
    pub fn for_window(family: WaveletFamily, boundary: BoundaryMode, len: usize, max_levels: usize) -> Self {
        WaveletConfig {
            family,
            levels: Self::max_levels(family, len).min(max_levels).max(1),
            boundary,
        }
    }
}

/// Multi-level DWT coefficients. `details[0]` is the finest level D1;
/// `approx` is the coarsest approximation A_L.
#[derive(Debug, Clone)]
pub struct DwtCoefficients {
    pub details: Vec<Vec<f64>>,
    pub approx: Vec<f64>,
    family: WaveletFamily,
    boundary: BoundaryMode,
    /// Pre-extension input length at each level, for exact inversion.
    level_input_len: Vec<usize>,
}

impl DwtCoefficients {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Labels in feature order: D1..DL then AL.
    pub fn level_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = (1..=self.levels()).map(|j| format!("D{j}")).collect();
        out.push(format!("A{}", self.levels()));
        out
    }

    /// Coefficient slices in the same order as [`Self::level_labels`].
    pub fn level_slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.details.iter().map(|d| d.as_slice()).collect();
        out.push(&self.approx);
        out
    }
}

/// Mirror-extend by `pad` samples on each side (edge duplicated).
fn symmetric_extend(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    debug_assert!(pad <= n);
    let mut out = Vec::with_capacity(n + 2 * pad);
    for i in (0..pad).rev() {
        out.push(x[i]);
    }
    out.extend_from_slice(x);
    for i in 0..pad {
        out.push(x[n - 1 - i]);
    }
    out
}

/// Analysis coefficient index range: every shift `2k` whose filter support
/// overlaps the signal under zero extension.
fn coeff_range(n: usize, filter_len: usize) -> (isize, isize) {
    let k_min = -(((filter_len - 1) / 2) as isize);
    let k_max = ((n - 1) / 2) as isize;
    (k_min, k_max)
}

fn analyze_one(x: &[f64], lo: &[f64], hi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() as isize;
    let l = lo.len();
    let (k_min, k_max) = coeff_range(x.len(), l);
    let mut approx = Vec::with_capacity((k_max - k_min + 1) as usize);
    let mut detail = Vec::with_capacity(approx.capacity());
    for k in k_min..=k_max {
        let mut a = 0.0;
        let mut d = 0.0;
        for (j, (&lj, &hj)) in lo.iter().zip(hi).enumerate() {
            let idx = 2 * k + j as isize;
            if idx >= 0 && idx < n {
                let v = x[idx as usize];
                a += v * lj;
                d += v * hj;
            }
        }
        approx.push(a);
        detail.push(d);
    }
    (approx, detail)
}

/// Adjoint synthesis of one level, cropped to the original length.
fn synthesize_one(
    approx: &[f64],
    detail: &[f64],
    lo: &[f64],
    hi: &[f64],
    out_len: usize,
) -> Vec<f64> {
    let (k_min, _) = coeff_range(out_len, lo.len());
    let mut out = vec![0.0; out_len];
    for (m, (&a, &d)) in approx.iter().zip(detail).enumerate() {
        let k = k_min + m as isize;
        for (j, (&lj, &hj)) in lo.iter().zip(hi).enumerate() {
            let idx = 2 * k + j as isize;
            if idx >= 0 && (idx as usize) < out_len {
                out[idx as usize] += a * lj + d * hj;
            }
        }
    }
    out
}

/// Mallat cascade decomposition.
///
/// With [`BoundaryMode::Zero`] the coefficient set is the complete
/// orthonormal analysis of the zero-extended signal: energy is preserved
/// exactly and [`inverse_dwt`] reconstructs the input exactly. With
/// [`BoundaryMode::Symmetric`] each level is mirror-extended by one filter
/// length before the same analysis; inversion is still exact.
pub fn dwt(x: &[f64], cfg: &WaveletConfig) -> Result<DwtCoefficients> {
    if cfg.levels < 1 {
        return Err(Error::invalid("wavelet decomposition needs >= 1 level"));
    }
    let bound = WaveletConfig::max_levels(cfg.family, x.len());
    if cfg.levels > bound {
        return Err(Error::invalid(format!(
            "{} levels exceed the bound of {bound} for {} samples",
            cfg.levels,
            x.len()
        )));
    }
    let lo = cfg.family.lowpass();
    let hi = cfg.family.highpass();
    let pad = cfg.family.filter_length() - 1;

    let mut details = Vec::with_capacity(cfg.levels);
    let mut level_input_len = Vec::with_capacity(cfg.levels);
    let mut current = x.to_vec();
    for _ in 0..cfg.levels {
        level_input_len.push(current.len());
        let work = match cfg.boundary {
            BoundaryMode::Zero => current,
            BoundaryMode::Symmetric => symmetric_extend(&current, pad),
        };
        let (approx, detail) = analyze_one(&work, &lo, &hi);
        details.push(detail);
        current = approx;
    }
    Ok(DwtCoefficients {
        details,
        approx: current,
        family: cfg.family,
        boundary: cfg.boundary,
        level_input_len,
    })
}

/// Exact inverse of [`dwt`].
pub fn inverse_dwt(coeffs: &DwtCoefficients) -> Vec<f64> {
    let lo = coeffs.family.lowpass();
    let hi = coeffs.family.highpass();
    let pad = coeffs.family.filter_length() - 1;
    let mut current = coeffs.approx.clone();
    for level in (0..coeffs.levels()).rev() {
        let orig_len = coeffs.level_input_len[level];
        let work_len = match coeffs.boundary {
            BoundaryMode::Zero => orig_len,
            BoundaryMode::Symmetric => orig_len + 2 * pad,
        };
        let rec = synthesize_one(&current, &coeffs.details[level], &lo, &hi, work_len);
        current = match coeffs.boundary {
            BoundaryMode::Zero => rec,
            BoundaryMode::Symmetric => rec[pad..pad + orig_len].to_vec(),
        };
    }
    current
}

/// Per-level coefficient statistics, same conventions as
/// [`crate::features::time::basic_stats`]. Returns `(label, stats)` in
/// D1..DL, AL order.
pub fn wavelet_stats(coeffs: &DwtCoefficients) -> Result<Vec<(String, BasicStats)>> {
    let labels = coeffs.level_labels();
    let mut out = Vec::with_capacity(labels.len());
    for (label, slice) in labels.into_iter().zip(coeffs.level_slices()) {
        if slice.len() < 2 {
            return Err(Error::invalid(format!(
                "wavelet level {label} has {} coefficients, needs >= 2",
                slice.len()
            )));
        }
        out.push((label, basic_stats(slice)?));
    }
    Ok(out)
}

/// Entropy (natural log) of the normalized squared-coefficient distribution
/// at each level, in D1..DL, AL order. An all-zero level is 0 with a flag.
pub fn wavelet_entropy(coeffs: &DwtCoefficients) -> Vec<Flagged> {
    coeffs
        .level_slices()
        .into_iter()
        .map(|slice| {
            let total: f64 = slice.iter().map(|w| w * w).sum();
            if !(total > 0.0) {
                return Flagged::degenerate(0.0);
            }
            let mut h = 0.0;
            for &w in slice {
                let e = w * w / total;
                if e > 0.0 {
                    h -= e * e.ln();
                }
            }
            Flagged::ok(h.max(0.0))
        })
        .collect()
}

/// Per-level wavelet features.
#[derive(Debug, Clone)]
pub struct WaveletLevelFeatures {
    pub label: String,
    pub stats: BasicStats,
    pub entropy: Flagged,
}

/// Full frequency-domain feature set of one window.
#[derive(Debug, Clone)]
pub struct FreqFeatures {
    pub bands: Vec<BandPower>,
    pub spectral_entropy: Flagged,
    pub wavelet_levels: Vec<WaveletLevelFeatures>,
}

impl FreqFeatures {
    /// Number of scalar features: 2 per band + spectral entropy + 5 per
    /// wavelet level (4 stats + entropy).
    pub fn len(&self) -> usize {
        2 * self.bands.len() + 1 + 5 * self.wavelet_levels.len()
    }

    /// Flatten to `(value, degenerate)` pairs in registry order: band
    /// mean/peak pairs, spectral entropy, per-level stats, per-level entropy.
    pub fn flatten(&self) -> Vec<(f64, bool)> {
        let mut out = Vec::with_capacity(self.len());
        for b in &self.bands {
            out.push((b.mean_power, b.empty));
            out.push((b.peak_power, b.empty));
        }
        out.push((self.spectral_entropy.value, self.spectral_entropy.degenerate));
        for lv in &self.wavelet_levels {
            let flag = lv.stats.degenerate_moments;
            out.push((lv.stats.mean, false));
            out.push((lv.stats.variance, false));
            out.push((lv.stats.skewness, flag));
            out.push((lv.stats.kurtosis, flag));
        }
        for lv in &self.wavelet_levels {
            out.push((lv.entropy.value, lv.entropy.degenerate));
        }
        out
    }
}

/// Extract all frequency-domain features. Deterministic; degenerate cases are
/// flagged, never NaN.
pub fn extract_freq_features(
    x: &[f64],
    rate_hz: f64,
    welch: &WelchConfig,
    wavelet: &WaveletConfig,
    bands: &[(f64, f64)],
) -> Result<FreqFeatures> {
    let psd = welch_psd(x, rate_hz, welch)?;
    let bands = band_powers(&psd, bands);
    let spec_entropy = spectral_entropy(&psd);
    let coeffs = dwt(x, wavelet)?;
    let stats = wavelet_stats(&coeffs)?;
    let entropies = wavelet_entropy(&coeffs);
    let wavelet_levels = stats
        .into_iter()
        .zip(entropies)
        .map(|((label, stats), entropy)| WaveletLevelFeatures {
            label,
            stats,
            entropy,
        })
        .collect();
    Ok(FreqFeatures {
        bands,
        spectral_entropy: spec_entropy,
        wavelet_levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn white_noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn sine(freq: f64, rate: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / rate).sin())
            .collect()
    }

    #[test]
    fn welch_parseval_on_white_noise() {
        let x = white_noise(1 << 16, 42);
        let var = {
            let m = x.iter().sum::<f64>() / x.len() as f64;
            x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
        };
        let cfg = WelchConfig::for_window(x.len(), 2048);
        let psd = welch_psd(&x, 1000.0, &cfg).unwrap();
        let total: f64 = psd.power.iter().sum::<f64>() * psd.resolution_hz;
        assert!(
            (total - var).abs() / var < 0.02,
            "psd total {total}, variance {var}"
        );
    }

    #[test]
    fn welch_peak_at_tone_frequency() {
        let rate = 1000.0;
        let x = sine(10.0, rate, 1 << 14);
        let cfg = WelchConfig::for_window(x.len(), 2048);
        let psd = welch_psd(&x, rate, &cfg).unwrap();
        let peak = psd
            .power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let nearest = psd
            .freqs
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - 10.0).abs().partial_cmp(&(b.1 - 10.0).abs()).unwrap()
            })
            .unwrap()
            .0;
        assert_eq!(peak, nearest);
    }

    #[test]
    fn welch_constant_signal_is_pure_dc() {
        let x = vec![2.0; 4096];
        let cfg = WelchConfig::for_window(x.len(), 2048);
        let psd = welch_psd(&x, 100.0, &cfg).unwrap();
        let dc = psd.power[0];
        assert!(dc > 0.0);
        for &p in &psd.power[1..] {
            assert!(p < 1e-12 * dc, "leakage {p} vs dc {dc}");
        }
    }

    #[test]
    fn welch_scale_covariance() {
        let x = white_noise(4096, 3);
        let scaled: Vec<f64> = x.iter().map(|v| v * 3.0).collect();
        let cfg = WelchConfig::for_window(x.len(), 1024);
        let a = welch_psd(&x, 500.0, &cfg).unwrap();
        let b = welch_psd(&scaled, 500.0, &cfg).unwrap();
        for (pa, pb) in a.power.iter().zip(&b.power) {
            assert!((pb - 9.0 * pa).abs() <= 1e-9 * pa.abs().max(1e-12));
        }
        let ha = spectral_entropy(&a).value;
        let hb = spectral_entropy(&b).value;
        assert!((ha - hb).abs() < 1e-9);
    }

    #[test]
    fn welch_rejects_short_signal() {
        let cfg = WelchConfig {
            segment_length: 256,
            overlap_fraction: 0.5,
            window_function: WindowFunction::Hann,
        };
        assert!(welch_psd(&[0.0; 100], 100.0, &cfg).is_err());
    }

    #[test]
    fn band_powers_selective_assignment() {
        let rate = 1000.0;
        let x = sine(10.0, rate, 1 << 14);
        let cfg = WelchConfig::for_window(x.len(), 2048);
        let psd = welch_psd(&x, rate, &cfg).unwrap();
        let bands = band_powers(&psd, &DEFAULT_BANDS);
        let target = &bands[3]; // 8-12 Hz
        assert!(!target.empty);
        for (i, b) in bands.iter().enumerate() {
            if i != 3 {
                assert!(
                    b.peak_power < 1e-6 * target.peak_power,
                    "band {i} leaked {} vs {}",
                    b.peak_power,
                    target.peak_power
                );
            }
        }
    }

    #[test]
    fn band_bins_at_half_hz_resolution() {
        // 2048-sample Hann segments at 1000 Hz: resolution ~0.488 Hz, so the
        // 0.1-1 band holds exactly one bin and mean == peak there.
        let x = white_noise(5000, 8);
        let cfg = WelchConfig::for_window(x.len(), 2048);
        assert_eq!(cfg.segment_length, 2048);
        let psd = welch_psd(&x, 1000.0, &cfg).unwrap();
        let in_band: Vec<f64> = psd
            .freqs
            .iter()
            .zip(&psd.power)
            .skip(1)
            .filter(|(f, _)| **f >= 0.1 && **f < 1.0)
            .map(|(_, p)| *p)
            .collect();
        assert_eq!(in_band.len(), 2); // bins at ~0.488 and ~0.977 Hz
        let bands = band_powers(&psd, &[(0.1, 1.0)]);
        assert!(!bands[0].empty);
        assert!((bands[0].mean_power - (in_band[0] + in_band[1]) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn empty_band_is_flagged() {
        let x = white_noise(512, 9);
        let cfg = WelchConfig {
            segment_length: 128,
            overlap_fraction: 0.5,
            window_function: WindowFunction::Hann,
        };
        // 7.8 Hz resolution at 1000 Hz: nothing lands in 0.1-1 Hz.
        let psd = welch_psd(&x, 1000.0, &cfg).unwrap();
        let bands = band_powers(&psd, &[(0.1, 1.0)]);
        assert!(bands[0].empty);
        assert_eq!(bands[0].mean_power, 0.0);
        assert_eq!(bands[0].peak_power, 0.0);
    }

    #[test]
    fn flat_psd_band_mean_equals_value() {
        let psd = Psd {
            freqs: (0..11).map(|k| k as f64).collect(),
            power: vec![3.5; 11],
            resolution_hz: 1.0,
        };
        let bands = band_powers(&psd, &[(1.0, 5.0), (5.0, 10.0)]);
        for b in bands {
            assert!((b.mean_power - 3.5).abs() < 1e-15);
            assert!((b.peak_power - 3.5).abs() < 1e-15);
        }
    }

    #[test]
    fn spectral_entropy_cases() {
        let flat = Psd {
            freqs: (0..9).map(|k| k as f64).collect(),
            power: vec![2.0; 9],
            resolution_hz: 1.0,
        };
        // 8 non-DC bins, all equal.
        assert!((spectral_entropy(&flat).value - 8f64.ln()).abs() < 1e-12);

        let mut single = flat.clone();
        single.power = vec![0.0; 9];
        single.power[3] = 5.0;
        assert_eq!(spectral_entropy(&single).value, 0.0);

        let mut two = flat.clone();
        two.power = vec![0.0; 9];
        two.power[2] = 1.0;
        two.power[7] = 1.0;
        assert!((spectral_entropy(&two).value - 2f64.ln()).abs() < 1e-12);

        let mut zero = flat;
        zero.power = vec![0.0; 9];
        let h = spectral_entropy(&zero);
        assert_eq!(h.value, 0.0);
        assert!(h.degenerate);
    }

    #[test]
    fn haar_constant_pairs() {
        let cfg = WaveletConfig {
            family: WaveletFamily::Haar,
            levels: 1,
            boundary: BoundaryMode::Zero,
        };
        let coeffs = dwt(&[1.0, 1.0, 1.0, 1.0], &cfg).unwrap();
        let s = 2f64.sqrt();
        assert_eq!(coeffs.approx.len(), 2);
        assert!((coeffs.approx[0] - s).abs() < 1e-15);
        assert!((coeffs.approx[1] - s).abs() < 1e-15);
        assert!(coeffs.details[0].iter().all(|&d| d.abs() < 1e-15));
    }

    #[test]
    fn db4_annihilates_linear_ramp() {
        let x: Vec<f64> = (0..256).map(|i| 0.5 * i as f64 - 3.0).collect();
        let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
        let cfg = WaveletConfig {
            family: WaveletFamily::Daubechies4,
            levels: 1,
            boundary: BoundaryMode::Zero,
        };
        let coeffs = dwt(&x, &cfg).unwrap();
        // Interior coefficients: filter support fully inside the signal.
        let (k_min, _) = coeff_range(x.len(), 4);
        for (m, &d) in coeffs.details[0].iter().enumerate() {
            let k = k_min + m as isize;
            let support_lo = 2 * k;
            let support_hi = 2 * k + 3;
            if support_lo >= 0 && (support_hi as usize) < x.len() {
                assert!(d.abs() < 1e-9 * rms, "interior detail {d}");
            }
        }
    }

    #[test]
    fn dwt_perfect_reconstruction_both_modes() {
        let x = white_noise(300, 15);
        for boundary in [BoundaryMode::Zero, BoundaryMode::Symmetric] {
            for family in [WaveletFamily::Haar, WaveletFamily::Daubechies4] {
                let cfg = WaveletConfig {
                    family,
                    levels: 3,
                    boundary,
                };
                let coeffs = dwt(&x, &cfg).unwrap();
                let back = inverse_dwt(&coeffs);
                assert_eq!(back.len(), x.len());
                let err = x
                    .iter()
                    .zip(&back)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
                    / (x.iter().map(|v| v * v).sum::<f64>()).sqrt();
                assert!(err < 1e-9, "{family:?}/{boundary:?} rms err {err}");
            }
        }
    }

    #[test]
    fn dwt_energy_preserved_zero_mode() {
        let x = white_noise(511, 23);
        let cfg = WaveletConfig {
            family: WaveletFamily::Daubechies4,
            levels: 4,
            boundary: BoundaryMode::Zero,
        };
        let coeffs = dwt(&x, &cfg).unwrap();
        let coeff_energy: f64 = coeffs
            .level_slices()
            .iter()
            .flat_map(|s| s.iter())
            .map(|w| w * w)
            .sum();
        let signal_energy: f64 = x.iter().map(|v| v * v).sum();
        assert!(
            (coeff_energy - signal_energy).abs() / signal_energy < 1e-9,
            "coeff {coeff_energy} vs signal {signal_energy}"
        );
    }

    #[test]
    fn dwt_rejects_excess_levels() {
        let cfg = WaveletConfig {
            family: WaveletFamily::Daubechies4,
            levels: 8,
            boundary: BoundaryMode::Zero,
        };
        assert!(dwt(&white_noise(64, 2), &cfg).is_err());
    }

    #[test]
    fn wavelet_stats_gaussian_kurtosis() {
        // Detail coefficients of white noise stay Gaussian.
        let x = white_noise(1 << 15, 31);
        let cfg = WaveletConfig {
            family: WaveletFamily::Haar,
            levels: 1,
            boundary: BoundaryMode::Zero,
        };
        let coeffs = dwt(&x, &cfg).unwrap();
        let stats = wavelet_stats(&coeffs).unwrap();
        let d1 = &stats[0].1;
        assert!((d1.kurtosis - 3.0).abs() < 0.2, "kurt {}", d1.kurtosis);
    }

    #[test]
    fn wavelet_stats_zero_level() {
        let cfg = WaveletConfig {
            family: WaveletFamily::Haar,
            levels: 1,
            boundary: BoundaryMode::Zero,
        };
        let coeffs = dwt(&[5.0; 64], &cfg).unwrap();
        let stats = wavelet_stats(&coeffs).unwrap();
        let d1 = &stats[0].1;
        assert_eq!(d1.mean, 0.0);
        assert_eq!(d1.variance, 0.0);
        assert_eq!(d1.skewness, 0.0);
        assert_eq!(d1.kurtosis, 0.0);
        // A1 of the constant 5 signal: all sqrt(2)*5.
        let a1 = &stats[1].1;
        assert!((a1.mean - 5.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(a1.variance < 1e-20);
    }

    #[test]
    fn wavelet_entropy_cases() {
        let mk = |coeffs: Vec<f64>| DwtCoefficients {
            details: vec![coeffs],
            approx: vec![0.0, 0.0],
            family: WaveletFamily::Haar,
            boundary: BoundaryMode::Zero,
            level_input_len: vec![4],
        };
        let one = mk(vec![0.0, 3.0, 0.0]);
        let h = wavelet_entropy(&one);
        assert_eq!(h[0].value, 0.0);
        assert!(!h[0].degenerate);

        let equal = mk(vec![2.0, -2.0, 2.0, 2.0]);
        let h = wavelet_entropy(&equal);
        assert!((h[0].value - 4f64.ln()).abs() < 1e-12);

        let pair = mk(vec![3.0, 4.0]);
        let h = wavelet_entropy(&pair);
        let expect = -(0.36f64 * 0.36f64.ln() + 0.64 * 0.64f64.ln());
        assert!((h[0].value - expect).abs() < 1e-12);
        assert!((h[0].value - 0.6534).abs() < 1e-4);

        // The all-zero approx level is degenerate.
        let h_a = wavelet_entropy(&one)[1];
        assert_eq!(h_a.value, 0.0);
        assert!(h_a.degenerate);
    }

    #[test]
    fn extract_constant_window() {
        let x = vec![1.5; 512];
        let welch = WelchConfig::for_window(x.len(), 2048);
        let wavelet = WaveletConfig::for_window(
            WaveletFamily::Daubechies4,
            BoundaryMode::Symmetric,
            x.len(),
            4,
        );
        let f = extract_freq_features(&x, 1000.0, &welch, &wavelet, &DEFAULT_BANDS).unwrap();
        for b in &f.bands {
            assert!(b.mean_power < 1e-12);
        }
        assert_eq!(f.spectral_entropy.value, 0.0);
        for lv in &f.wavelet_levels {
            if lv.label.starts_with('D') {
                assert!(lv.stats.variance < 1e-12);
                assert_eq!(lv.stats.skewness, 0.0);
            }
        }
    }

    #[test]
    fn extract_tone_dominates_its_band() {
        let rate = 1000.0;
        let x = sine(10.0, rate, 5000);
        let welch = WelchConfig::for_window(x.len(), 2048);
        let wavelet = WaveletConfig::for_window(
            WaveletFamily::Daubechies4,
            BoundaryMode::Symmetric,
            x.len(),
            4,
        );
        let f = extract_freq_features(&x, rate, &welch, &wavelet, &DEFAULT_BANDS).unwrap();
        let target = f.bands[3].mean_power; // 8-12 Hz
        for (i, b) in f.bands.iter().enumerate() {
            if i != 3 {
                assert!(b.mean_power < target, "band {i}");
            }
        }
    }

    #[test]
    fn extract_is_deterministic() {
        let x = white_noise(2000, 77);
        let welch = WelchConfig::for_window(x.len(), 2048);
        let wavelet = WaveletConfig::for_window(
            WaveletFamily::Daubechies4,
            BoundaryMode::Symmetric,
            x.len(),
            4,
        );
        let a = extract_freq_features(&x, 500.0, &welch, &wavelet, &DEFAULT_BANDS).unwrap();
        let b = extract_freq_features(&x, 500.0, &welch, &wavelet, &DEFAULT_BANDS).unwrap();
        assert_eq!(a.flatten(), b.flatten());
        assert_eq!(a.len(), 2 * 6 + 1 + 5 * 5);
    }
}
