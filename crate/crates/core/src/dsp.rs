//! Small shared numeric helpers: least-squares fits, FFT wrappers, window
//! functions and zero-phase FIR filtering. Internal to the crate.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Ordinary least-squares line fit. Returns `(slope, intercept, r_squared)`.
///
/// `r_squared` is 1.0 for a perfect fit and 0.0 when the fit explains nothing;
/// for degenerate data (constant y) it is reported as 0.0.
pub(crate) fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "linear fit needs at least two points");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if sxx > 0.0 && syy > 0.0 {
        (sxy * sxy) / (sxx * syy)
    } else {
        0.0
    };
    (slope, intercept, r2)
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Cumulative sum of the mean-removed signal (the DFA "profile").
pub(crate) fn integrated_profile(x: &[f64]) -> Vec<f64> {
    let m = mean(x);
    let mut acc = 0.0;
    x.iter()
        .map(|&v| {
            acc += v - m;
            acc
        })
        .collect()
}

pub(crate) fn hann(n: usize) -> Vec<f64> {
    window_cosine(n, 0.5, 0.5)
}

pub(crate) fn hamming(n: usize) -> Vec<f64> {
    window_cosine(n, 0.54, 0.46)
}

fn window_cosine(n: usize, a0: f64, a1: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| a0 - a1 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Forward FFT of a real signal; returns the full complex spectrum.
pub(crate) fn fft_real(x: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

pub(crate) fn ifft(spectrum: &mut [Complex<f64>]) {
    let n = spectrum.len();
    FftPlanner::new().plan_fft_inverse(n).process(spectrum);
    let scale = 1.0 / n as f64;
    for c in spectrum.iter_mut() {
        *c *= scale;
    }
}

/// Index into `0..n` with mirror reflection at both edges (edge sample
/// duplicated), valid for any offset that stays within one extra period.
pub(crate) fn reflect_index(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    if i < 0 {
        i = -i - 1;
    }
    if i >= n {
        i = 2 * n - 1 - i;
    }
    debug_assert!(i >= 0 && i < n);
    i as usize
}

/// Windowed-sinc low-pass FIR: Hamming window, unity DC gain.
///
/// `cutoff` is the -6 dB edge as a fraction of the sampling rate (0..0.5).
pub(crate) fn lowpass_fir(taps: usize, cutoff: f64) -> Vec<f64> {
    assert!(taps % 2 == 1, "zero-phase filtering expects odd tap count");
    assert!(cutoff > 0.0 && cutoff < 0.5);
    let half = (taps / 2) as isize;
    let w = hamming(taps);
    let mut h: Vec<f64> = (0..taps as isize)
        .map(|i| {
            let t = (i - half) as f64;
            let sinc = if t == 0.0 {
                2.0 * cutoff
            } else {
                (2.0 * std::f64::consts::PI * cutoff * t).sin() / (std::f64::consts::PI * t)
            };
            sinc * w[i as usize]
        })
        .collect();
    let sum: f64 = h.iter().sum();
    for v in h.iter_mut() {
        *v /= sum;
    }
    h
}

/// One zero-phase pass of a symmetric FIR: output sample i is the filter
/// centered on input sample i, with mirror reflection at the edges.
fn fir_centered(h: &[f64], x: &[f64]) -> Vec<f64> {
    let half = (h.len() / 2) as isize;
    let n = x.len();
    (0..n as isize)
        .map(|i| {
            let mut acc = 0.0;
            for (j, &hj) in h.iter().enumerate() {
                acc += hj * x[reflect_index(i + half - j as isize, n)];
            }
            acc
        })
        .collect()
}

/// Forward-backward application of a symmetric FIR (zero phase overall,
/// squared magnitude response). For symmetric taps the causal
/// forward/backward cascade is algebraically the centered pass applied twice.
pub(crate) fn filtfilt(h: &[f64], x: &[f64]) -> Vec<f64> {
    let once = fir_centered(h, x);
    fir_centered(h, &once)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 0.5).collect();
        let (slope, intercept, r2) = linear_fit(&x, &y);
        assert!((slope - 3.0).abs() < 1e-12);
        assert!((intercept + 0.5).abs() < 1e-12);
        assert!(r2 > 1.0 - 1e-12);
    }

    #[test]
    fn reflect_index_mirrors_edges() {
        assert_eq!(reflect_index(-1, 5), 0);
        assert_eq!(reflect_index(-2, 5), 1);
        assert_eq!(reflect_index(5, 5), 4);
        assert_eq!(reflect_index(6, 5), 3);
        assert_eq!(reflect_index(2, 5), 2);
    }

    #[test]
    fn fir_has_unity_dc_gain() {
        let h = lowpass_fir(101, 0.1);
        let x = vec![2.5; 400];
        let y = filtfilt(&h, &x);
        for &v in &y {
            assert!((v - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn fft_roundtrip() {
        let x: Vec<f64> = (0..64).map(|i| (i as f64 * 0.31).sin()).collect();
        let mut spec = fft_real(&x);
        ifft(&mut spec);
        for (a, b) in x.iter().zip(&spec) {
            assert!((a - b.re).abs() < 1e-10);
        }
    }
}
