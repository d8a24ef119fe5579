//! Window discriminator: start–stop pairing inside a fixed Δt interval.

use std::collections::VecDeque;

use serde::Serialize;

use crate::config::TphcParams;
use crate::error::{Error, Result};
use crate::quantum::{OutcomePair, Sign};
use crate::sim::record::{seconds_to_ps, DetectionRecord, Side, PS_PER_S};
use crate::sim::CountSummary;

/// `R1 · R2 · τ`: rate of uncorrelated start–stop overlaps.
pub fn accidental_rate(singles_start: f64, singles_stop: f64, window: f64) -> f64 {
    singles_start * singles_stop * window
}

/// Integer-picosecond acceptance interval `[lo, hi]` for `stop − start`.
///
/// The test is closed on both edges. A non-positive width accepts nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowBounds {
    lo: i64,
    hi: i64,
    open: bool,
}

impl WindowBounds {
    pub fn new(tphc: &TphcParams) -> Self {
        let center = seconds_to_ps(tphc.center_offset);
        let half = (tphc.window_width * PS_PER_S / 2.0 + 1e-6).floor() as i64;
        WindowBounds {
            lo: center - half,
            hi: center + half,
            open: tphc.window_width > 0.0,
        }
    }

    pub fn accepts(&self, dt_ps: i64) -> bool {
        self.open && dt_ps >= self.lo && dt_ps <= self.hi
    }
}

/// One start port against one stop port, matched one-to-one.
#[derive(Debug, Default, Clone)]
struct PortMatcher {
    starts: VecDeque<i64>,
    stops: VecDeque<i64>,
    count: u64,
}

impl PortMatcher {
    fn on_start(&mut self, s: i64, w: &WindowBounds) {
        while self.stops.front().is_some_and(|&t| t < s + w.lo) {
            self.stops.pop_front();
        }
        while self.starts.front().is_some_and(|&x| x < s - w.hi) {
            self.starts.pop_front();
        }
        match self.stops.front() {
            Some(&t) if t <= s + w.hi => {
                self.stops.pop_front();
                self.count += 1;
            }
            _ => self.starts.push_back(s),
        }
    }

    fn on_stop(&mut self, t: i64, w: &WindowBounds) {
        while self.starts.front().is_some_and(|&s| s < t - w.hi) {
            self.starts.pop_front();
        }
        while self.stops.front().is_some_and(|&x| x < t + w.lo) {
            self.stops.pop_front();
        }
        match self.starts.front() {
            Some(&s) if s <= t - w.lo => {
                self.starts.pop_front();
                self.count += 1;
            }
            _ => self.stops.push_back(t),
        }
    }
}

/// Streaming coincidence counter over a time-ordered record stream.
///
/// Each of the four start/stop detector pairings behaves as its own TPHC:
/// a click is used in at most one coincidence of that pairing, taking the
/// earliest unmatched partner inside the window.
#[derive(Debug, Clone)]
pub struct CoincidenceCounter {
    bounds: WindowBounds,
    tphc: TphcParams,
    duration: f64,
    matchers: [PortMatcher; 4],
    singles_start: [u64; 2],
    singles_stop: [u64; 2],
    last: Option<DetectionRecord>,
    seen: usize,
}

impl CoincidenceCounter {
    pub fn new(tphc: &TphcParams, duration: f64) -> Self {
        CoincidenceCounter {
            bounds: WindowBounds::new(tphc),
            tphc: tphc.clone(),
            duration,
            matchers: Default::default(),
            singles_start: [0; 2],
            singles_stop: [0; 2],
            last: None,
            seen: 0,
        }
    }

    pub fn push(&mut self, record: DetectionRecord) -> Result<()> {
        if self.last.is_some_and(|prev| record < prev) {
            return Err(Error::Unordered { index: self.seen });
        }
        self.last = Some(record);
        self.seen += 1;
        let t = record.timestamp_ps as i64;
        let port = record.channel.port;
        match record.channel.side {
            Side::Start => {
                self.singles_start[port.index()] += 1;
                if self.bounds.open {
                    for j in [Sign::Plus, Sign::Minus] {
                        self.matchers[OutcomePair::new(port, j).index()].on_start(t, &self.bounds);
                    }
                }
            }
            Side::Stop => {
                self.singles_stop[port.index()] += 1;
                if self.bounds.open {
                    for i in [Sign::Plus, Sign::Minus] {
                        self.matchers[OutcomePair::new(i, port).index()].on_stop(t, &self.bounds);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn finish(self) -> CountSummary {
        CountSummary {
            duration: self.duration,
            window_width: self.tphc.window_width.max(0.0),
            singles_start: self.singles_start,
            singles_stop: self.singles_stop,
            coincidences: [0, 1, 2, 3].map(|k| self.matchers[k].count),
        }
    }
}

/// The window accepts at least one side peak.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowWarning {
    pub window_width: f64,
    pub path_delay: f64,
}

impl std::fmt::Display for WindowWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "coincidence window {:e} s is not shorter than the path delay {:e} s; \
             short-long and long-short events are accepted",
            self.window_width, self.path_delay
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowedCounts {
    pub summary: CountSummary,
    pub warning: Option<WindowWarning>,
}

/// Counts windowed coincidences in a recorded stream.
///
/// `duration` is the acquisition time the stream covers; it sets the singles
/// rates used for accidental estimates. A window at least as wide as
/// `path_delay` still counts, but comes back with a warning.
pub fn window_coincidences(
    events: &[DetectionRecord],
    tphc: &TphcParams,
    duration: f64,
    path_delay: f64,
) -> Result<WindowedCounts> {
    let mut counter = CoincidenceCounter::new(tphc, duration);
    for &r in events {
        counter.push(r)?;
    }
    let warning = (tphc.window_width >= path_delay).then_some(WindowWarning {
        window_width: tphc.window_width,
        path_delay,
    });
    Ok(WindowedCounts {
        summary: counter.finish(),
        warning,
    })
}
