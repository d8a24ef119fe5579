//! Plain-text output formats.

use std::fmt::Write as _;

use crate::analysis::fringe::FringePoint;
use crate::config::ExperimentConfig;
use crate::quantum::OutcomePair;
use crate::sim::CountSummary;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Run identification written at the top of every output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub dwell: f64,
    pub visibility: f64,
}

impl Provenance {
    pub fn new(command: &str, config: &ExperimentConfig, seed: u64, dwell: f64) -> Self {
        Provenance {
            command: command.to_string(),
            config_hash: config.hash(),
            seed,
            dwell,
            visibility: config.visibility.value(),
        }
    }

    pub fn header(&self) -> String {
        format!(
            "# franson {} command={} config_hash={} seed={} dwell={} visibility={}\n",
            TOOL_VERSION, self.command, self.config_hash, self.seed, self.dwell, self.visibility
        )
    }
}

/// `control,raw,accidentals,net` with a `#` provenance header.
pub fn fringe_csv(points: &[FringePoint], provenance: &Provenance, axis: &str) -> String {
    let mut out = provenance.header();
    let _ = writeln!(out, "# axis={axis}");
    out.push_str("control,raw,accidentals,net\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.control, p.raw_coincidences, p.accidentals, p.net);
    }
    out
}

/// Per-outcome counts for one setting: `outcome,raw,accidentals,net`.
pub fn summary_csv(summary: &CountSummary, provenance: &Provenance, d1: f64, d2: f64) -> String {
    let mut out = provenance.header();
    let _ = writeln!(out, "# delta1={d1} delta2={d2} duration={}", summary.duration);
    let _ = writeln!(
        out,
        "# singles_start_plus={} singles_start_minus={} singles_stop_plus={} singles_stop_minus={}",
        summary.singles_start[0], summary.singles_start[1], summary.singles_stop[0], summary.singles_stop[1]
    );
    out.push_str("outcome,raw,accidentals,net\n");
    for o in OutcomePair::ALL {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            o.label(),
            summary.coincidence(o),
            summary.accidental_estimate(o),
            summary.net(o)
        );
    }
    out
}
