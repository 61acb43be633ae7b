//! Time-domain simulation of the delayed plant, the adaptive controller,
//! the reference system and the desired system.

mod closed_loop;
mod history;
mod metrics;
pub mod projection;
mod scenario;
mod signal;
mod trace;

pub use closed_loop::{simulate_closed_loop, simulate_desired, simulate_reference, DIVERGENCE_THRESHOLD};
pub use history::HistoryBuffer;
pub use metrics::{error_metrics, tracking_metrics, TrackingMetrics};
pub use projection::proj;
pub use scenario::ScenarioConfig;
pub use signal::{SignalSpec, SignalTerm, TrigKind};
pub use trace::{DesiredTrace, ReferenceTrace, SimTrace};
