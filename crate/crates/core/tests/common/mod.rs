#![allow(dead_code)]

use franson::config::DetectorParams;
use franson::quantum::Visibility;
use franson::ExperimentConfig;

/// Lossless, noiseless apparatus with the given pair rate and visibility.
pub fn lossless(pair_rate: f64, vis: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::lossless();
    c.source.pair_rate = pair_rate;
    c.visibility = Visibility::new(vis).unwrap();
    c
}

/// Lossless source, but the stop detector has the default germanium jitter.
pub fn lossless_with_stop_jitter(pair_rate: f64, vis: f64) -> ExperimentConfig {
    let mut c = lossless(pair_rate, vis);
    c.detector_stop = DetectorParams {
        jitter_fwhm: DetectorParams::germanium().jitter_fwhm,
        ..DetectorParams::ideal()
    };
    c
}

/// No source, only dark counts on every detector.
pub fn dark_only(start_dark: f64, stop_dark: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.source.pair_rate = 0.0;
    c.detector_start.dark_rate = start_dark;
    c.detector_stop.dark_rate = stop_dark;
    c
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
