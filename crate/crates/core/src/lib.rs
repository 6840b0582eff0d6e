//! An ordered set kept balanced by scheduled partial rebuilds instead of a
//! balance criterion.
//!
//! Each node carries a countdown timer. A successful insert or delete ticks
//! down the timers along its search path; when one reaches zero, the
//! subtree under the shallowest such node is flattened and rebuilt
//! perfectly balanced, and every timer in it is reset to
//! `max(1, floor(k * subtree size))` for a fixed fraction `0 < k < 1`.
//! Height stays logarithmic and updates cost amortized `O(log n)`.
//!
//! ```
//! use timer_tree::{IntTimerTree, RebalanceFraction};
//!
//! let mut set = IntTimerTree::new(RebalanceFraction::new(1, 4).unwrap());
//! for key in 0..1000 {
//!     set.insert(key);
//! }
//! assert!(set.contains(&500));
//! assert!(set.height() <= 13);
//! ```

pub mod baseline;
pub mod bench;
pub mod cli;
pub mod dot;
mod fraction;
pub mod metrics;
mod node;
mod rebuild;
mod tree;
pub mod validation;
pub mod workload;

pub use fraction::{timer_reset_value, FractionError, RebalanceFraction};
pub use metrics::{Counters, Event, MetricsSink};
pub use node::{Dir, NodeId, NodeRef, NodeSnapshot};
pub use tree::{RebuildInfo, TimerTree, UpdateOutcome};

/// Timer tree over the integer keys used by the workloads and the CLI.
pub type IntTimerTree = TimerTree<i64>;
