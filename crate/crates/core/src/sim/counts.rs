use serde::{Deserialize, Serialize};

use crate::quantum::{OutcomePair, Sign};

/// Singles and windowed coincidences for one analyzer setting.
///
/// Singles are per output-port detector; coincidences are indexed in
/// [`OutcomePair::ALL`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSummary {
    pub duration: f64,
    pub window_width: f64,
    pub singles_start: [u64; 2],
    pub singles_stop: [u64; 2],
    pub coincidences: [u64; 4],
}

impl CountSummary {
    pub fn empty(duration: f64, window_width: f64) -> Self {
        CountSummary {
            duration,
            window_width,
            singles_start: [0; 2],
            singles_stop: [0; 2],
            coincidences: [0; 4],
        }
    }

    pub fn coincidence(&self, outcome: OutcomePair) -> u64 {
        self.coincidences[outcome.index()]
    }

    pub fn singles_start_rate(&self, port: Sign) -> f64 {
        self.singles_start[port.index()] as f64 / self.duration
    }

    pub fn singles_stop_rate(&self, port: Sign) -> f64 {
        self.singles_stop[port.index()] as f64 / self.duration
    }

    /// Expected accidental coincidences over the whole run for one port
    /// pairing: `R_start · R_stop · τ · duration`.
    pub fn accidental_estimate(&self, outcome: OutcomePair) -> f64 {
        if self.duration <= 0.0 {
            return 0.0;
        }
        crate::analysis::accidental_rate(
            self.singles_start_rate(outcome.i),
            self.singles_stop_rate(outcome.j),
            self.window_width,
        ) * self.duration
    }

    pub fn accidental_estimates(&self) -> [f64; 4] {
        OutcomePair::ALL.map(|o| self.accidental_estimate(o))
    }

    /// Raw minus estimated accidental coincidences; may be negative.
    pub fn net(&self, outcome: OutcomePair) -> f64 {
        self.coincidence(outcome) as f64 - self.accidental_estimate(outcome)
    }

    pub fn total_coincidences(&self) -> u64 {
        self.coincidences.iter().sum()
    }

    /// Adds another run taken with the same window. Durations add.
    pub fn merge(&mut self, other: &CountSummary) {
        debug_assert_eq!(self.window_width, other.window_width);
        self.duration += other.duration;
        for k in 0..2 {
            self.singles_start[k] += other.singles_start[k];
            self.singles_stop[k] += other.singles_stop[k];
        }
        for k in 0..4 {
            self.coincidences[k] += other.coincidences[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accidentals_use_per_port_singles() {
        let mut s = CountSummary::empty(2.0, 350e-12);
        s.singles_start = [500_000, 0];
        s.singles_stop = [760_000, 10];
        let acc = s.accidental_estimate(OutcomePair::PP);
        assert!((acc - 250e3 * 380e3 * 350e-12 * 2.0).abs() < 1e-9);
        assert_eq!(s.accidental_estimate(OutcomePair::MP), 0.0);
    }

    #[test]
    fn merge_is_commutative() {
        let mut a = CountSummary::empty(1.0, 1e-10);
        a.coincidences = [1, 2, 3, 4];
        a.singles_start = [10, 20];
        let mut b = CountSummary::empty(2.0, 1e-10);
        b.coincidences = [5, 0, 0, 1];
        b.singles_stop = [7, 7];
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab, ba);
        assert_eq!(ab.duration, 3.0);
    }
}
