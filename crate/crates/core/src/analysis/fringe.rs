use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::quantum::{OutcomePair, Phase};
use crate::sim::{derive_seed, simulate_setting};

/// One point of a coincidence fringe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    /// Mirror displacement in meters, or phase in radians.
    pub control: f64,
    pub raw_coincidences: u64,
    pub accidentals: f64,
    /// `raw − accidentals`, not clamped.
    pub net: f64,
}

impl FringePoint {
    pub fn new(control: f64, raw_coincidences: u64, accidentals: f64) -> Self {
        FringePoint {
            control,
            raw_coincidences,
            accidentals,
            net: raw_coincidences as f64 - accidentals,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanAxis {
    /// Translates mirror M1 of the bulk Michelson; control is displacement.
    Mirror1,
    /// Drives the phase modulator of interferometer 2 directly; control is δ2.
    Phase2,
}

impl FromStr for ScanAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mirror1" => Ok(ScanAxis::Mirror1),
            "phase2" => Ok(ScanAxis::Phase2),
            other => Err(Error::InvalidArgument(format!(
                "unknown scan axis `{other}` (expected mirror1 or phase2)"
            ))),
        }
    }
}

impl ScanAxis {
    pub fn name(self) -> &'static str {
        match self {
            ScanAxis::Mirror1 => "mirror1",
            ScanAxis::Phase2 => "phase2",
        }
    }

    /// Analyzer phases at control value `x`, on top of the configured phases.
    ///
    /// Moving a Michelson mirror by `x` changes the round-trip path by `2x`.
    pub fn phases(self, config: &ExperimentConfig, x: f64) -> (Phase, Phase) {
        let base1 = config.analyzer1.phase;
        let base2 = config.analyzer2.phase;
        match self {
            ScanAxis::Mirror1 => (Phase(base1 + 4.0 * PI * x / config.wavelength1), Phase(base2)),
            ScanAxis::Phase2 => (Phase(base1), Phase(base2 + x)),
        }
    }

    /// Control-space period of the coincidence fringe.
    pub fn period(self, config: &ExperimentConfig) -> f64 {
        match self {
            ScanAxis::Mirror1 => config.wavelength1 / 2.0,
            ScanAxis::Phase2 => TAU,
        }
    }

    /// `n` evenly spaced control values covering `periods` fringe periods.
    pub fn controls(self, config: &ExperimentConfig, n: usize, periods: f64) -> Vec<f64> {
        let span = periods * self.period(config);
        if n < 2 {
            return vec![0.0; n];
        }
        (0..n).map(|k| span * k as f64 / (n - 1) as f64).collect()
    }
}

pub const MIN_SCAN_POINTS: usize = 5;

/// Runs one simulated setting per control value and subtracts accidentals.
///
/// Point `k` uses seed `derive_seed(seed, k)`.
pub fn scan_fringe(
    config: &ExperimentConfig,
    axis: ScanAxis,
    controls: &[f64],
    dwell: f64,
    seed: u64,
    outcome: OutcomePair,
) -> Result<Vec<FringePoint>> {
    if controls.len() < MIN_SCAN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "a fringe scan needs at least {MIN_SCAN_POINTS} points, got {}",
            controls.len()
        )));
    }
    if !(dwell.is_finite() && dwell > 0.0) {
        return Err(Error::InvalidArgument(format!("dwell {dwell} must be positive")));
    }
    controls
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let (d1, d2) = axis.phases(config, x);
            let s = simulate_setting(config, d1, d2, dwell, derive_seed(seed, k as u64))?;
            Ok(FringePoint::new(
                x,
                s.coincidence(outcome),
                s.accidental_estimate(outcome),
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{coincidence_probability, Visibility};

    #[test]
    fn axis_parsing() {
        assert_eq!("mirror1".parse::<ScanAxis>().unwrap(), ScanAxis::Mirror1);
        assert_eq!("phase2".parse::<ScanAxis>().unwrap(), ScanAxis::Phase2);
        assert!("mirror2".parse::<ScanAxis>().is_err());
    }

    #[test]
    fn mirror_period_is_half_wavelength() {
        // locate adjacent maxima of the analytic (+,+) curve on a fine grid
        let c = ExperimentConfig::default();
        let v = Visibility::ONE;
        let step = 0.01e-9;
        let xs: Vec<f64> = (0..100_000).map(|k| k as f64 * step).collect();
        let y: Vec<f64> = xs
            .iter()
            .map(|&x| {
                let (d1, d2) = ScanAxis::Mirror1.phases(&c, x);
                coincidence_probability(OutcomePair::PP, d1, d2, v)
            })
            .collect();
        let maxima: Vec<f64> = (1..y.len() - 1)
            .filter(|&k| y[k] > y[k - 1] && y[k] >= y[k + 1])
            .map(|k| xs[k])
            .collect();
        assert!(maxima.len() >= 2);
        let period = maxima[1] - maxima[0];
        assert!((period - 352e-9).abs() < 0.05e-9, "{period}");
        assert_eq!(ScanAxis::Mirror1.period(&c), 352e-9);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let c = ExperimentConfig::default();
        let err = scan_fringe(&c, ScanAxis::Mirror1, &[0.0; 4], 1.0, 1, OutcomePair::PP);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
        let err = scan_fringe(&c, ScanAxis::Mirror1, &[0.0; 5], 0.0, 1, OutcomePair::PP);
        assert!(err.is_err());
    }

    #[test]
    fn net_is_unclamped() {
        let p = FringePoint::new(0.0, 3, 5.5);
        assert_eq!(p.net, -2.5);
    }

    #[test]
    fn controls_span_requested_periods() {
        let c = ExperimentConfig::default();
        let xs = ScanAxis::Phase2.controls(&c, 25, 2.0);
        assert_eq!(xs.len(), 25);
        assert!((xs[24] - 2.0 * TAU).abs() < 1e-12);
    }
}
