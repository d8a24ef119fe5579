mod common;

use franson::analysis::build_histogram;
use franson::quantum::Phase;
use franson::sim::emit_event_stream;

#[test]
fn three_peaks_with_binomial_areas() {
    let c = common::lossless(1e5, 0.957);
    let events = emit_event_stream(&c, Phase(0.3), Phase(1.1), 2.0, 17).unwrap();
    let h = build_histogram(&events, 20e-12, 1.5e-9).unwrap();
    let left = h.area(-0.9e-9, -0.5e-9) as f64;
    let mid = h.area(-0.2e-9, 0.2e-9) as f64;
    let right = h.area(0.5e-9, 0.9e-9) as f64;
    // no jitter and no darks; entries between peaks come only from a
    // start matched to a neighbouring pair's stop, rate·range ≈ 3e-4
    let strays = h.total() as f64 - (left + mid + right);
    assert!(strays <= 1e-3 * h.total() as f64, "{strays} stray entries");
    let n = h.total() as f64;
    for (area, p) in [(left, 0.25), (mid, 0.5), (right, 0.25)] {
        let se = (n * p * (1.0 - p)).sqrt();
        assert!((area - n * p).abs() < 5.0 * se, "{area} vs {}", n * p);
    }
}

#[test]
fn peak_width_follows_detector_jitter() {
    let c = common::lossless_with_stop_jitter(1e5, 1.0);
    let events = emit_event_stream(&c, Phase(0.0), Phase(0.0), 2.0, 3).unwrap();
    let h = build_histogram(&events, 10e-12, 1.5e-9).unwrap();
    for (lo, hi) in [(-1.0e-9, -0.4e-9), (-0.3e-9, 0.3e-9), (0.4e-9, 1.0e-9)] {
        let w = h.peak_fwhm(lo, hi).unwrap();
        assert!((w - 200e-12).abs() < 20e-12, "fwhm {w}");
    }
}

#[test]
fn bin_sum_counts_each_paired_start_once() {
    let c = common::lossless(2e4, 0.5);
    let events = emit_event_stream(&c, Phase(0.0), Phase(0.0), 0.5, 8).unwrap();
    let starts = events
        .iter()
        .filter(|r| r.channel.side == franson::sim::Side::Start)
        .count();
    let h = build_histogram(&events, 50e-12, 1.5e-9).unwrap();
    // lossless: every start has its partner inside the range
    assert_eq!(h.total() as usize, starts);
}
