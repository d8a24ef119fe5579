//! Monte Carlo event generation for the two-interferometer apparatus.

pub mod counts;
pub mod engine;
pub mod record;
pub mod sampling;

pub use counts::CountSummary;
pub use engine::{derive_seed, emit_event_stream, simulate_setting, simulate_setting_with_truth, TruthTally};
pub use record::{read_records, write_records, Channel, DetectionRecord, Side};
pub use sampling::{
    apply_jitter, generate_dark_counts, sample_lhv_pair_branch, sample_pair_branch, Branch, PairBranchSample,
};
