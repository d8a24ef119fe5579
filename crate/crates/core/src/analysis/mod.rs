//! From raw events or count summaries to fringes, fits and CHSH values.

pub mod chsh;
pub mod fit;
pub mod fringe;
pub mod histogram;
pub mod report;
pub mod window;

pub use chsh::{
    chsh_experiment, correlation_estimate, significance_from_visibility, ChshReport, CorrelationEstimate,
    SinglePortChsh,
};
pub use fit::{fit_fringe, FringeFit};
pub use fringe::{scan_fringe, FringePoint, ScanAxis};
pub use histogram::{build_histogram, Histogram};
pub use window::{accidental_rate, window_coincidences, CoincidenceCounter, WindowWarning, WindowedCounts};
