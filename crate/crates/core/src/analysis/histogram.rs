use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::record::{DetectionRecord, Side, PS_PER_S};

/// Start–stop delay spectrum, as a TPHC would record it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// Seconds.
    pub bin_width: f64,
    /// Left edge of bin 0, seconds.
    pub origin: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_center(&self, k: usize) -> f64 {
        self.origin + (k as f64 + 0.5) * self.bin_width
    }

    /// Sum of bins whose centers lie in `[lo, hi]`.
    pub fn area(&self, lo: f64, hi: f64) -> u64 {
        (0..self.counts.len())
            .filter(|&k| (lo..=hi).contains(&self.bin_center(k)))
            .map(|k| self.counts[k])
            .sum()
    }

    /// Full width at half maximum of the peak containing the tallest bin
    /// within `[lo, hi]`, using linear interpolation between bin centers.
    pub fn peak_fwhm(&self, lo: f64, hi: f64) -> Option<f64> {
        let range: Vec<usize> = (0..self.counts.len())
            .filter(|&k| (lo..=hi).contains(&self.bin_center(k)))
            .collect();
        let &peak = range.iter().max_by_key(|&&k| self.counts[k])?;
        let half = self.counts[peak] as f64 / 2.0;
        if half == 0.0 {
            return None;
        }
        let y = |k: usize| self.counts[k] as f64;
        let mut left = peak;
        while left > 0 && y(left - 1) >= half {
            left -= 1;
        }
        let mut right = peak;
        while right + 1 < self.counts.len() && y(right + 1) >= half {
            right += 1;
        }
        if left == 0 || right + 1 == self.counts.len() {
            return None;
        }
        let xl = left as f64 - (y(left) - half) / (y(left) - y(left - 1));
        let xr = right as f64 + (y(right) - half) / (y(right) - y(right + 1));
        Some((xr - xl) * self.bin_width)
    }
}

fn check_per_channel_order(events: &[DetectionRecord]) -> Result<()> {
    let mut last = [None::<u64>; 4];
    for (index, r) in events.iter().enumerate() {
        let slot = &mut last[r.channel.code() as usize];
        if slot.is_some_and(|t| r.timestamp_ps < t) {
            return Err(Error::Unordered { index });
        }
        *slot = Some(r.timestamp_ps);
    }
    Ok(())
}

/// Histograms `stop − start` over `[-range, range]`.
///
/// Each start is paired with the first stop (any port) at or after
/// `start − range`, provided that stop is no later than `start + range`.
/// Unpaired starts are not counted.
pub fn build_histogram(events: &[DetectionRecord], bin_width: f64, range: f64) -> Result<Histogram> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bin width {bin_width} must be positive"
        )));
    }
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::InvalidArgument(format!("range {range} must be positive")));
    }
    check_per_channel_order(events)?;

    let mut starts = Vec::new();
    let mut stops = Vec::new();
    for r in events {
        match r.channel.side {
            Side::Start => starts.push(r.timestamp_ps as i64),
            Side::Stop => stops.push(r.timestamp_ps as i64),
        }
    }
    // ports interleave, so merge them into one time order per side
    starts.sort_unstable();
    stops.sort_unstable();

    let n_bins = (2.0 * range / bin_width).ceil() as usize;
    let mut counts = vec![0u64; n_bins];
    let range_ps = range * PS_PER_S;
    let bin_ps = bin_width * PS_PER_S;
    let mut cursor = 0usize;
    for &s in &starts {
        let earliest = s as f64 - range_ps;
        while cursor < stops.len() && (stops[cursor] as f64) < earliest {
            cursor += 1;
        }
        let Some(&t) = stops.get(cursor) else { break };
        let dt = (t - s) as f64;
        if dt > range_ps {
            continue;
        }
        let k = (((dt + range_ps) / bin_ps).floor() as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    Ok(Histogram {
        bin_width,
        origin: -range,
        counts,
    })
}
