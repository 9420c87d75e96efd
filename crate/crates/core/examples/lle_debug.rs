fn main() {
    use lfi_id::features::time::*;
    let rate = 100.0;
    let n = 1 << 13;
    let x: Vec<f64> = (0..n)
        .map(|i| (2.0 * std::f64::consts::PI * 1.3 * i as f64 / rate).sin())
        .collect();
    let est = lyapunov_rosenstein(&x, &LleConfig::default(), rate).unwrap();
    println!("sine: lambda={} r2={} low={}", est.lambda, est.fit_r_squared, est.low_fit_quality);
}
