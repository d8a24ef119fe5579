//! Chunked Monte Carlo event generation.
//!
//! Emission time is cut into fixed chunks of [`CHUNK_PS`]. Chunk `k` draws
//! from its own ChaCha8 stream `(seed, k)`, so the output depends only on
//! `(config, phases, duration, seed)` and not on how many chunks run in
//! parallel. Chunk outputs are merged through a reorder buffer: before a
//! record is released, every record that could still precede it (photons
//! delayed into the next chunk by path delay, offset or jitter) has been
//! generated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::window::{CoincidenceCounter, WindowBounds};
use crate::config::{ExperimentConfig, PairModel};
use crate::error::{Error, Result};
use crate::quantum::{Phase, Sign};
use crate::sim::counts::CountSummary;
use crate::sim::record::{Channel, DetectionRecord, Side, PS_PER_S};
use crate::sim::sampling::{
    apply_jitter, fwhm_to_sigma, generate_dark_counts, sample_lhv_pair_branch, sample_pair_branch, Branch,
};

/// Emission-time chunk length, 10 ms.
pub const CHUNK_PS: u64 = 10_000_000_000;

const DEFAULT_GROUP: usize = 32;

/// Ground-truth bookkeeping that a real apparatus cannot observe.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TruthTally {
    /// Pairs with at least one photon detected.
    pub pairs_detected: u64,
    /// Pairs with both photons detected, per [`Branch::index`].
    pub both_detected: [u64; 3],
    /// Both detected and the pair's own Δt inside the window, per branch.
    pub both_windowed: [u64; 3],
    /// Central-branch pairs with both photons detected, per outcome.
    pub central_by_outcome: [u64; 4],
    /// Central-branch pairs inside the window, per outcome.
    pub central_windowed_by_outcome: [u64; 4],
}

impl TruthTally {
    pub fn merge(&mut self, other: &TruthTally) {
        self.pairs_detected += other.pairs_detected;
        for k in 0..3 {
            self.both_detected[k] += other.both_detected[k];
            self.both_windowed[k] += other.both_windowed[k];
        }
        for k in 0..4 {
            self.central_by_outcome[k] += other.central_by_outcome[k];
            self.central_windowed_by_outcome[k] += other.central_windowed_by_outcome[k];
        }
    }

    pub fn total_both_detected(&self) -> u64 {
        self.both_detected.iter().sum()
    }

    /// Fraction of detected central-branch pairs that fall inside the window.
    pub fn central_acceptance(&self) -> f64 {
        let c = self.both_detected[Branch::Central.index()];
        if c == 0 {
            return 0.0;
        }
        self.both_windowed[Branch::Central.index()] as f64 / c as f64
    }
}

struct Setting<'a> {
    config: &'a ExperimentConfig,
    d1: Phase,
    d2: Phase,
    seed: u64,
    duration_ps: u64,
    bounds: WindowBounds,
}

struct ChunkOutput {
    events: Vec<DetectionRecord>,
    truth: TruthTally,
}

/// Quantizes to 1 ps and keeps the click if it lies inside `[0, limit)`.
fn push_clipped(events: &mut Vec<DetectionRecord>, channel: Channel, t_ps: f64, limit: u64) -> i64 {
    let ts = t_ps.round();
    if ts >= 0.0 && ts < limit as f64 {
        events.push(DetectionRecord::new(channel, ts as u64));
    }
    ts as i64
}

fn noisy(phase: Phase, noise: Option<Normal<f64>>, rng: &mut ChaCha8Rng) -> Phase {
    match noise {
        Some(n) => Phase(phase.0 + n.sample(rng)),
        None => phase,
    }
}

impl Setting<'_> {
    fn generate_chunk(&self, index: u64) -> ChunkOutput {
        let cfg = self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);

        let begin = index * CHUNK_PS;
        let end = (begin + CHUNK_PS).min(self.duration_ps);
        let len_ps = (end - begin) as f64;
        let len_s = len_ps / PS_PER_S;

        let mut events = Vec::new();
        let mut truth = TruthTally::default();

        let (p1, p2) = cfg.detection_probabilities();
        let any = p1 + p2 - p1 * p2;
        let mean_pairs = cfg.source.pair_rate * cfg.source.split_efficiency * any * len_s;
        let n_pairs = if mean_pairs > 0.0 {
            Poisson::new(mean_pairs).expect("finite mean").sample(&mut rng) as u64
        } else {
            0
        };
        let both = p1 * p2 / any;
        let only_first = p1 * (1.0 - p2) / any;

        let delay1 = cfg.analyzer1.path_delay * PS_PER_S;
        let delay2 = cfg.analyzer2.path_delay * PS_PER_S;
        let offset = cfg.tphc.center_offset * PS_PER_S;
        let jitter1 = cfg.detector_start.jitter_fwhm * PS_PER_S;
        let jitter2 = cfg.detector_stop.jitter_fwhm * PS_PER_S;
        let noise1 =
            (cfg.analyzer1.phase_noise > 0.0).then(|| Normal::new(0.0, cfg.analyzer1.phase_noise).expect("finite"));
        let noise2 =
            (cfg.analyzer2.phase_noise > 0.0).then(|| Normal::new(0.0, cfg.analyzer2.phase_noise).expect("finite"));

        for _ in 0..n_pairs {
            let emission = begin as f64 + rng.random::<f64>() * len_ps;
            let u: f64 = rng.random();
            let (seen1, seen2) = if u < both {
                (true, true)
            } else if u < both + only_first {
                (true, false)
            } else {
                (false, true)
            };
            let d1 = noisy(self.d1, noise1, &mut rng);
            let d2 = noisy(self.d2, noise2, &mut rng);
            let sample = match cfg.source.model {
                PairModel::Quantum => sample_pair_branch(d1, d2, cfg.visibility, &mut rng),
                PairModel::Lhv => sample_lhv_pair_branch(d1, d2, &mut rng),
            };
            let (long1, long2) = match sample.branch {
                Branch::Central => (0.0, 0.0),
                Branch::ShortLong => (0.0, delay2),
                Branch::LongShort => (delay1, 0.0),
            };
            truth.pairs_detected += 1;
            let start = seen1.then(|| {
                let t = apply_jitter(emission + long1, jitter1, &mut rng);
                push_clipped(
                    &mut events,
                    Channel::new(Side::Start, sample.outcome.i),
                    t,
                    self.duration_ps,
                )
            });
            let stop = seen2.then(|| {
                let t = apply_jitter(emission + offset + long2, jitter2, &mut rng);
                push_clipped(
                    &mut events,
                    Channel::new(Side::Stop, sample.outcome.j),
                    t,
                    self.duration_ps,
                )
            });
            if let (Some(s), Some(t)) = (start, stop) {
                let b = sample.branch.index();
                truth.both_detected[b] += 1;
                let inside = self.bounds.accepts(t - s);
                if inside {
                    truth.both_windowed[b] += 1;
                }
                if sample.branch == Branch::Central {
                    truth.central_by_outcome[sample.outcome.index()] += 1;
                    if inside {
                        truth.central_windowed_by_outcome[sample.outcome.index()] += 1;
                    }
                }
            }
        }

        for side in [Side::Start, Side::Stop] {
            let rate = match side {
                Side::Start => cfg.detector_start.dark_rate,
                Side::Stop => cfg.detector_stop.dark_rate,
            };
            for port in [Sign::Plus, Sign::Minus] {
                for t in generate_dark_counts(rate, len_s, &mut rng) {
                    push_clipped(&mut events, Channel::new(side, port), begin as f64 + t * PS_PER_S, end);
                }
            }
        }

        events.sort_unstable();
        ChunkOutput { events, truth }
    }

    /// Earliest a record from a later chunk can land before that chunk's
    /// start, in picoseconds, with a wide safety factor on the jitter tails.
    fn reorder_margin(&self) -> u64 {
        let cfg = self.config;
        let sigma = fwhm_to_sigma(cfg.detector_start.jitter_fwhm.max(cfg.detector_stop.jitter_fwhm));
        let spread =
            cfg.analyzer1.path_delay.max(cfg.analyzer2.path_delay) + cfg.tphc.center_offset.abs() + 40.0 * sigma + 1e-9;
        (spread * PS_PER_S).ceil() as u64
    }

    fn drive<F>(&self, group: usize, mut sink: F) -> Result<TruthTally>
    where
        F: FnMut(DetectionRecord) -> Result<()>,
    {
        let n_chunks = self.duration_ps.div_ceil(CHUNK_PS);
        let margin = self.reorder_margin();
        let mut truth = TruthTally::default();
        let mut pending: Vec<DetectionRecord> = Vec::new();
        let mut last: Option<DetectionRecord> = None;

        let mut first = 0;
        while first < n_chunks {
            let stop = (first + group as u64).min(n_chunks);
            let outputs: Vec<ChunkOutput> = (first..stop).into_par_iter().map(|k| self.generate_chunk(k)).collect();
            for out in outputs {
                truth.merge(&out.truth);
                pending.extend(out.events);
            }
            pending.sort_unstable();
            let release = if stop == n_chunks {
                pending.len()
            } else {
                let horizon = (stop * CHUNK_PS).saturating_sub(margin);
                pending.partition_point(|r| r.timestamp_ps < horizon)
            };
            for r in pending.drain(..release) {
                // one click per detector per picosecond
                if last == Some(r) {
                    continue;
                }
                last = Some(r);
                sink(r)?;
            }
            first = stop;
        }
        Ok(truth)
    }
}

fn check_duration(duration: f64, allow_zero: bool) -> Result<u64> {
    let ok = duration.is_finite() && (duration > 0.0 || (allow_zero && duration == 0.0));
    if !ok {
        return Err(Error::InvalidArgument(format!("duration {duration} must be positive")));
    }
    Ok((duration * PS_PER_S).round() as u64)
}

fn setting<'a>(config: &'a ExperimentConfig, d1: Phase, d2: Phase, duration_ps: u64, seed: u64) -> Result<Setting<'a>> {
    config.validate()?;
    if !(d1.0.is_finite() && d2.0.is_finite()) {
        return Err(Error::InvalidArgument("phases must be finite".into()));
    }
    Ok(Setting {
        config,
        d1,
        d2,
        seed,
        duration_ps,
        bounds: WindowBounds::new(&config.tphc),
    })
}

fn simulate_grouped(
    config: &ExperimentConfig,
    d1: Phase,
    d2: Phase,
    duration: f64,
    seed: u64,
    group: usize,
) -> Result<(CountSummary, TruthTally)> {
    let duration_ps = check_duration(duration, false)?;
    let s = setting(config, d1, d2, duration_ps, seed)?;
    let mut counter = CoincidenceCounter::new(&config.tphc, duration);
    let truth = s.drive(group, |r| counter.push(r))?;
    Ok((counter.finish(), truth))
}

/// Simulates one `(δ1, δ2)` setting for `duration` seconds.
pub fn simulate_setting(
    config: &ExperimentConfig,
    d1: Phase,
    d2: Phase,
    duration: f64,
    seed: u64,
) -> Result<CountSummary> {
    simulate_setting_with_truth(config, d1, d2, duration, seed).map(|(summary, _)| summary)
}

/// Like [`simulate_setting`], also returning the branch bookkeeping.
pub fn simulate_setting_with_truth(
    config: &ExperimentConfig,
    d1: Phase,
    d2: Phase,
    duration: f64,
    seed: u64,
) -> Result<(CountSummary, TruthTally)> {
    simulate_grouped(config, d1, d2, duration, seed, DEFAULT_GROUP)
}

/// The time-ordered detector stream behind [`simulate_setting`].
///
/// Windowing this stream with the config's TPHC over the same duration
/// reproduces the `simulate_setting` summary exactly.
pub fn emit_event_stream(
    config: &ExperimentConfig,
    d1: Phase,
    d2: Phase,
    duration: f64,
    seed: u64,
) -> Result<Vec<DetectionRecord>> {
    let duration_ps = check_duration(duration, true)?;
    let s = setting(config, d1, d2, duration_ps, seed)?;
    let mut out = Vec::new();
    s.drive(DEFAULT_GROUP, |r| {
        out.push(r);
        Ok(())
    })?;
    Ok(out)
}

/// Derives an independent seed for sub-run `index` of a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
