//! Timer lifecycle instrumentation and the amortized-cost checks built on it.
//!
//! A [`MetricsSink`] attached to a tree sees every timer reset, every
//! decrement and every triggered rebuild. With no sink attached the tree
//! does no bookkeeping at all.

use crate::fraction::RebalanceFraction;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    /// A node's timer was reset during a rebuild. `subtree_size` is the size
    /// of the subtree that node roots after the rebuild.
    TimerReset {
        subtree_size: u64,
        timer0: u64,
    },
    Decrement,
    /// A timer reached zero and the subtree under the least-deep such node
    /// was rebuilt; logged after the resets the rebuild caused. `timer0` is
    /// that node's timer start, which equals the number of successful
    /// updates the subtree absorbed since its last timer set. `depth`
    /// counts the root as 1.
    RebuildTriggered {
        subtree_size: u64,
        timer0: u64,
        depth: u64,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub total_decrements: u64,
    pub total_rebuilds: u64,
    /// Sum of subtree sizes over all triggered rebuilds.
    pub total_rebuilt_nodes: u64,
    pub updates_succeeded: u64,
}

#[derive(Clone, Debug, Default)]
pub struct MetricsSink {
    counters: Counters,
    events: Option<Vec<Event>>,
}

impl MetricsSink {
    /// Sink that keeps both the counters and the full event log.
    pub fn new() -> Self {
        Self {
            counters: Counters::default(),
            events: Some(Vec::new()),
        }
    }

    /// Sink that keeps only the running counters.
    pub fn counters_only() -> Self {
        Self::default()
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    /// The event log, or an empty slice for a counters-only sink.
    pub fn events(&self) -> &[Event] {
        self.events.as_deref().unwrap_or(&[])
    }

    fn push(&mut self, event: Event) {
        if let Some(events) = &mut self.events {
            events.push(event);
        }
    }

    pub fn record_reset(&mut self, subtree_size: u64, timer0: u64) {
        debug_assert!(subtree_size >= 1 && timer0 >= 1);
        self.push(Event::TimerReset {
            subtree_size,
            timer0,
        });
    }

    pub fn record_decrement(&mut self) {
        self.counters.total_decrements += 1;
        self.push(Event::Decrement);
    }

    pub fn record_trigger(&mut self, subtree_size: u64, timer0: u64, depth: u64) {
        debug_assert!(subtree_size >= 1 && timer0 >= 1);
        self.counters.total_rebuilds += 1;
        self.counters.total_rebuilt_nodes += subtree_size;
        self.push(Event::RebuildTriggered {
            subtree_size,
            timer0,
            depth,
        });
    }

    pub fn record_success(&mut self) {
        self.counters.updates_succeeded += 1;
    }
}

/// `2/k + 1` as the integer pair `(2*den + num, num)`.
fn credit_per_update(k: RebalanceFraction) -> (u128, u128) {
    let num = u128::from(k.num());
    let den = u128::from(k.den());
    (2 * den + num, num)
}

/// Whether a rebuild of `subtree_size` nodes, paid for by `timer0` updates,
/// stays strictly under the per-update credit `2/k + 1`:
/// `subtree_size * num < (2*den + num) * timer0`.
pub fn credit_bound_holds(subtree_size: u64, timer0: u64, k: RebalanceFraction) -> bool {
    let (credit_num, credit_den) = credit_per_update(k);
    u128::from(subtree_size) * credit_den < credit_num * u128::from(timer0)
}

/// [`credit_bound_holds`] for a recorded event. Events other than
/// `RebuildTriggered` carry no cost and trivially pass.
pub fn check_credit_bound(event: &Event, k: RebalanceFraction) -> bool {
    match *event {
        Event::RebuildTriggered {
            subtree_size,
            timer0,
            ..
        } => credit_bound_holds(subtree_size, timer0, k),
        _ => true,
    }
}

/// The credit argument summed over a run: every decrement deposits
/// `2/k + 1` credits, every rebuild spends its subtree size. Holds
/// trivially when nothing was rebuilt.
pub fn check_aggregate_amortized(counters: &Counters, k: RebalanceFraction) -> bool {
    if counters.total_rebuilds == 0 {
        return true;
    }
    let (credit_num, credit_den) = credit_per_update(k);
    u128::from(counters.total_rebuilt_nodes) * credit_den
        < credit_num * u128::from(counters.total_decrements)
}
