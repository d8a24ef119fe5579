use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use serde::Serialize;

use crate::analysis::fit::FringeFit;
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::quantum::{chsh_combination, correlation_from_rates, ChshSettings, OutcomePair, LOCAL_BOUND};
use crate::sim::{derive_seed, simulate_setting, CountSummary};

/// A correlation coefficient with its first-order Poisson error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    pub e: f64,
    pub sigma: f64,
}

/// `E` from the four net (accidental-subtracted) coincidence counts.
///
/// The error treats each raw count as Poisson and the accidental estimates
/// as exact: `σ_E² = Σ ((s_ij − E) / N)² · raw_ij`, `N = Σ net`.
pub fn correlation_estimate(summary: &CountSummary) -> Result<CorrelationEstimate> {
    let net = OutcomePair::ALL.map(|o| summary.net(o));
    let e = correlation_from_rates(net[0], net[1], net[2], net[3])?.0;
    let total: f64 = net.iter().sum();
    let var: f64 = OutcomePair::ALL
        .iter()
        .map(|&o| {
            let d = (o.parity() - e) / total;
            d * d * summary.coincidence(o) as f64
        })
        .sum();
    Ok(CorrelationEstimate { e, sigma: var.sqrt() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshReport {
    pub settings: ChshSettings,
    /// In [`ChshSettings::pairs`] order.
    pub correlations: [CorrelationEstimate; 4],
    pub s: f64,
    pub s_sigma: f64,
    /// `(S − 2) / σ_S` when `S > 2`; `None` means no violation.
    pub significance: Option<f64>,
    pub dwell: f64,
    pub seed: u64,
    pub counts: Vec<CountSummary>,
}

impl ChshReport {
    pub fn from_counts(settings: ChshSettings, counts: Vec<CountSummary>, dwell: f64, seed: u64) -> Result<Self> {
        if counts.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "expected 4 settings, got {}",
                counts.len()
            )));
        }
        let mut correlations = [CorrelationEstimate { e: 0.0, sigma: 0.0 }; 4];
        for (slot, c) in correlations.iter_mut().zip(&counts) {
            *slot = correlation_estimate(c)?;
        }
        let s = chsh_combination(correlations.map(|c| c.e));
        let s_sigma = correlations.iter().map(|c| c.sigma * c.sigma).sum::<f64>().sqrt();
        Ok(ChshReport {
            settings,
            correlations,
            s,
            s_sigma,
            significance: violation_significance(s, s_sigma),
            dwell,
            seed,
            counts,
        })
    }

    pub fn violates(&self) -> bool {
        self.significance.is_some()
    }

    /// Flat `key=value` text block.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let labels = ["ab", "ab'", "a'b", "a'b'"];
        let _ = writeln!(out, "estimator=four-port");
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "dwell={}", self.dwell);
        for ((label, (d1, d2)), c) in labels.iter().zip(self.settings.pairs()).zip(&self.correlations) {
            let _ = writeln!(out, "delta1_{label}={}", d1.0);
            let _ = writeln!(out, "delta2_{label}={}", d2.0);
            let _ = writeln!(out, "E_{label}={}", c.e);
            let _ = writeln!(out, "sigma_E_{label}={}", c.sigma);
        }
        let _ = writeln!(out, "S={}", self.s);
        let _ = writeln!(out, "sigma_S={}", self.s_sigma);
        match self.significance {
            Some(z) => {
                let _ = writeln!(out, "significance={z}");
            }
            None => {
                let _ = writeln!(out, "significance=none (no violation)");
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn violation_significance(s: f64, s_sigma: f64) -> Option<f64> {
    (s > LOCAL_BOUND && s_sigma > 0.0).then(|| (s - LOCAL_BOUND) / s_sigma)
}

/// Simulates the four CHSH settings and combines their correlations.
///
/// Setting `k` (in [`ChshSettings::pairs`] order) uses seed
/// `derive_seed(seed, k)`.
pub fn chsh_experiment(
    config: &ExperimentConfig,
    settings: &ChshSettings,
    dwell: f64,
    seed: u64,
) -> Result<ChshReport> {
    settings.validate()?;
    if !(dwell.is_finite() && dwell > 0.0) {
        return Err(Error::InvalidArgument(format!("dwell {dwell} must be positive")));
    }
    let counts = settings
        .pairs()
        .iter()
        .enumerate()
        .map(|(k, &(d1, d2))| simulate_setting(config, d1, d2, dwell, derive_seed(seed, k as u64)))
        .collect::<Result<Vec<_>>>()?;
    ChshReport::from_counts(*settings, counts, dwell, seed)
}

/// `(2√2·V − 2) / (2√2·σ_V)`: how many standard deviations a sinusoidal
/// fringe of visibility `V` puts the standard-settings CHSH value above 2.
pub fn significance_from_visibility(vis: f64, vis_sigma: f64) -> Result<f64> {
    if !(vis_sigma.is_finite() && vis_sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "visibility sigma {vis_sigma} must be positive"
        )));
    }
    Ok((2.0 * SQRT_2 * vis - LOCAL_BOUND) / (2.0 * SQRT_2 * vis_sigma))
}

/// CHSH value projected from a single monitored output pair.
///
/// Assumes the other three coincidence functions share the fitted
/// visibility, so `S = 2√2·V` and `σ_S = 2√2·σ_V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinglePortChsh {
    pub visibility: f64,
    pub visibility_sigma: f64,
    pub s: f64,
    pub s_sigma: f64,
    pub significance: f64,
}

impl SinglePortChsh {
    pub const LABEL: &'static str = "single-port (symmetry assumed)";

    pub fn from_fit(fit: &FringeFit) -> Result<Self> {
        let v = fit.visibility_raw;
        let sv = fit.visibility_sigma;
        Ok(SinglePortChsh {
            visibility: v,
            visibility_sigma: sv,
            s: 2.0 * SQRT_2 * v,
            s_sigma: 2.0 * SQRT_2 * sv,
            significance: significance_from_visibility(v, sv)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn headline_significance() {
        let z = significance_from_visibility(0.957, 0.0315).unwrap();
        assert!((z - 7.93).abs() < 0.01, "{z}");
        assert!(significance_from_visibility(FRAC_1_SQRT_2, 0.05).unwrap().abs() < 1e-12);
        assert!(significance_from_visibility(0.9, 0.0).is_err());
    }

    #[test]
    fn linear_propagation_of_visibility_error() {
        let sigma_s = 2.0 * SQRT_2 * 0.0315;
        assert!((sigma_s - 0.0891).abs() < 1e-4);
    }

    #[test]
    fn estimate_from_counts() {
        let mut s = CountSummary::empty(1.0, 0.0);
        s.coincidences = [900, 100, 100, 900];
        let c = correlation_estimate(&s).unwrap();
        assert!((c.e - 0.8).abs() < 1e-12);
        // brute-force finite-difference propagation as an independent check
        let e_of = |n: [f64; 4]| (n[0] - n[1] - n[2] + n[3]) / n.iter().sum::<f64>();
        let base = [900.0, 100.0, 100.0, 900.0];
        let mut var = 0.0;
        for k in 0..4 {
            let h = 1e-4;
            let mut up = base;
            up[k] += h;
            let mut dn = base;
            dn[k] -= h;
            let g = (e_of(up) - e_of(dn)) / (2.0 * h);
            var += g * g * base[k];
        }
        assert!((c.sigma - var.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn empty_setting_is_undefined() {
        let counts = vec![CountSummary::empty(1.0, 0.0); 4];
        assert!(matches!(
            ChshReport::from_counts(ChshSettings::standard(), counts, 1.0, 0),
            Err(Error::UndefinedCorrelation)
        ));
    }

    #[test]
    fn non_violation_has_no_significance() {
        let mut s = CountSummary::empty(1.0, 0.0);
        s.coincidences = [10, 10, 10, 10];
        let report = ChshReport::from_counts(ChshSettings::standard(), vec![s; 4], 1.0, 0).unwrap();
        assert!(report.s <= 2.0);
        assert!(!report.violates());
        assert!(report.to_key_value().contains("significance=none"));
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert!(json["significance"].is_null());
    }
}
