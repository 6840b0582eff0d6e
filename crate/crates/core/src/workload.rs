//! Replayable operation sequences and the checked runner that drives a tree,
//! a reference model and every structural checker in lockstep.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dot;
use crate::fraction::RebalanceFraction;
use crate::metrics::{self, Counters, MetricsSink};
use crate::tree::TimerTree;
use crate::validation::{self, HeightBounds, OracleModel};

pub use crate::validation::OpKind;

/// SplitMix64. Fixed here rather than taken from a crate so that any
/// implementation can regenerate the exact same workloads:
///
/// ```text
/// state += 0x9E3779B97F4A7C15
/// z = state
/// z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
/// z = (z ^ (z >> 27)) * 0x94D049BB133111EB
/// return z ^ (z >> 31)
/// ```
///
/// Bounded draws use the high half of a 128-bit product; unit floats take
/// the top 53 bits.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `0..bound`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        ((u128::from(self.next_u64()) * u128::from(bound)) >> 64) as u64
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Random keys are drawn from `1..=KEY_SPREAD * n`.
pub const KEY_SPREAD: u64 = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WorkloadKind {
    Ascending,
    Descending,
    RandomInsert,
    /// Each step deletes a uniformly chosen live key with probability
    /// `p_delete`, otherwise inserts a random key.
    RandomMixed {
        p_delete: f64,
    },
    /// Alternately the smallest and largest key not yet inserted.
    Zigzag,
    /// Inserts `1..=n`, then `m` delete/insert pairs on random keys.
    Churn {
        m: usize,
    },
}

impl WorkloadKind {
    pub const NAMES: [&'static str; 6] = [
        "ascending",
        "descending",
        "random-insert",
        "random-mixed",
        "zigzag",
        "churn",
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ascending => "ascending",
            Self::Descending => "descending",
            Self::RandomInsert => "random-insert",
            Self::RandomMixed { .. } => "random-mixed",
            Self::Zigzag => "zigzag",
            Self::Churn { .. } => "churn",
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown workload {0:?} (expected one of: ascending, descending, random-insert, random-mixed, zigzag, churn)")]
pub struct UnknownWorkload(pub String);

impl FromStr for WorkloadKind {
    type Err = UnknownWorkload;

    /// Parses a bare name. `random-mixed` gets `p_delete = 0.4` and `churn`
    /// gets `m = 0`; set those fields afterwards as needed.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "ascending" => Self::Ascending,
            "descending" => Self::Descending,
            "random-insert" => Self::RandomInsert,
            "random-mixed" => Self::RandomMixed { p_delete: 0.4 },
            "zigzag" => Self::Zigzag,
            "churn" => Self::Churn { m: 0 },
            other => return Err(UnknownWorkload(other.to_owned())),
        })
    }
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RandomMixed { p_delete } => write!(f, "random-mixed(p_delete={p_delete})"),
            Self::Churn { m } => write!(f, "churn(m={m})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Op {
    pub kind: OpKind,
    pub key: i64,
}

impl Op {
    pub fn insert(key: i64) -> Self {
        Self {
            kind: OpKind::Insert,
            key,
        }
    }

    pub fn delete(key: i64) -> Self {
        Self {
            kind: OpKind::Delete,
            key,
        }
    }

    pub fn contains(key: i64) -> Self {
        Self {
            kind: OpKind::Contains,
            key,
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpKind::Insert => "insert",
            OpKind::Delete => "delete",
            OpKind::Contains => "contains",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Workload {
    pub kind: WorkloadKind,
    pub seed: u64,
    pub ops: Vec<Op>,
}

impl Workload {
    pub fn name(&self) -> &'static str {
        self.kind.name()
    }
}

/// Live key set that supports uniform sampling.
#[derive(Default)]
struct LiveKeys {
    keys: Vec<i64>,
    slots: std::collections::HashMap<i64, usize>,
}

impl LiveKeys {
    fn insert(&mut self, key: i64) {
        if let std::collections::hash_map::Entry::Vacant(e) = self.slots.entry(key) {
            e.insert(self.keys.len());
            self.keys.push(key);
        }
    }

    fn remove_random(&mut self, rng: &mut SplitMix64) -> Option<i64> {
        if self.keys.is_empty() {
            return None;
        }
        let at = rng.below(self.keys.len() as u64) as usize;
        let key = self.keys.swap_remove(at);
        self.slots.remove(&key);
        if let Some(&moved) = self.keys.get(at) {
            self.slots.insert(moved, at);
        }
        Some(key)
    }
}

pub fn gen(kind: WorkloadKind, n: usize, seed: u64) -> Workload {
    let mut rng = SplitMix64::new(seed);
    let top = n as i64;
    let spread = (n as u64).max(1) * KEY_SPREAD;
    let random_key = |rng: &mut SplitMix64| 1 + rng.below(spread) as i64;

    let ops = match kind {
        WorkloadKind::Ascending => (1..=top).map(Op::insert).collect(),
        WorkloadKind::Descending => (1..=top).rev().map(Op::insert).collect(),
        WorkloadKind::RandomInsert => (0..n).map(|_| Op::insert(random_key(&mut rng))).collect(),
        WorkloadKind::Zigzag => {
            let (mut lo, mut hi) = (1, top);
            let mut ops = Vec::with_capacity(n);
            while lo <= hi {
                ops.push(Op::insert(lo));
                lo += 1;
                if lo <= hi {
                    ops.push(Op::insert(hi));
                    hi -= 1;
                }
            }
            ops
        }
        WorkloadKind::RandomMixed { p_delete } => {
            let mut live = LiveKeys::default();
            let mut ops = Vec::with_capacity(n);
            for _ in 0..n {
                let roll = rng.next_f64();
                let victim = if roll < p_delete {
                    live.remove_random(&mut rng)
                } else {
                    None
                };
                match victim {
                    Some(key) => ops.push(Op::delete(key)),
                    None => {
                        let key = random_key(&mut rng);
                        live.insert(key);
                        ops.push(Op::insert(key));
                    }
                }
            }
            ops
        }
        WorkloadKind::Churn { m } => {
            let mut live = LiveKeys::default();
            let mut ops = Vec::with_capacity(n + 2 * m);
            for key in 1..=top {
                live.insert(key);
                ops.push(Op::insert(key));
            }
            for _ in 0..m {
                if let Some(key) = live.remove_random(&mut rng) {
                    ops.push(Op::delete(key));
                }
                let key = random_key(&mut rng);
                live.insert(key);
                ops.push(Op::insert(key));
            }
            ops
        }
    };
    Workload { kind, seed, ops }
}

/// One row of a run trace; the CSV emitted by the CLI has exactly these
/// columns in this order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepSample {
    pub step: usize,
    pub op: OpKind,
    pub key: i64,
    pub success: bool,
    pub size: usize,
    pub height: usize,
    /// 0 for an empty tree.
    pub height_bound: u64,
    /// 0 when this step triggered no rebuild.
    pub rebuild_size: u64,
    pub total_decrements: u64,
    pub total_rebuilt_nodes: u64,
}

impl StepSample {
    pub const CSV_HEADER: [&'static str; 10] = [
        "step",
        "op",
        "key",
        "success",
        "size",
        "height",
        "height_bound",
        "rebuild_size",
        "total_decrements",
        "total_rebuilt_nodes",
    ];

    pub fn csv_record(&self) -> [String; 10] {
        [
            self.step.to_string(),
            self.op.to_string(),
            self.key.to_string(),
            self.success.to_string(),
            self.size.to_string(),
            self.height.to_string(),
            self.height_bound.to_string(),
            self.rebuild_size.to_string(),
            self.total_decrements.to_string(),
            self.total_rebuilt_nodes.to_string(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub k: RebalanceFraction,
    pub final_size: usize,
    pub final_height: usize,
    pub max_height: usize,
    /// 0 for an empty final tree.
    pub final_height_bound: u64,
    pub counters: Counters,
    /// Rebuilds whose postconditions and credit bound were checked.
    pub rebuilds_checked: u64,
    /// Unsuccessful inserts/deletes verified to leave the tree byte-identical.
    pub unsuccessful_checked: u64,
    /// Steps that exceeded the height bound; only populated under
    /// [`HeightPolicy::Record`].
    pub height_excess: Vec<HeightExcess>,
    pub samples: Vec<StepSample>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeightExcess {
    pub step: usize,
    pub size: usize,
    pub height: usize,
    pub bound: u64,
}

/// What the runner does when the tree is taller than [`validation::height_bound`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HeightPolicy {
    /// Stop with a [`Check::HeightBound`] violation.
    #[default]
    Enforce,
    /// Note the step in [`RunReport::height_excess`] and keep going, so the
    /// remaining checks still cover the whole run.
    Record,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Audit the whole tree every this many steps; 0 audits only at the end.
    pub check_every: usize,
    pub height: HeightPolicy,
}

/// The checks a run can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    /// The tree's return value differs from the reference model's.
    OracleResult,
    /// In-order keys differ from the reference model.
    OracleEqual,
    Bst,
    TimerRange,
    HeightBound,
    RebuildBalance,
    RebuildTimers,
    RebuildHalfSize,
    CreditBound,
    AggregateCredit,
    /// A successful update decremented more timers than the tree is tall.
    DecrementPath,
    /// An unsuccessful update changed the tree.
    UnsuccessfulMutation,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::OracleResult => "oracle-result",
            Check::OracleEqual => "oracle-equal",
            Check::Bst => "bst-order",
            Check::TimerRange => "timer-range",
            Check::HeightBound => "height-bound",
            Check::RebuildBalance => "rebuild-perfect-balance",
            Check::RebuildTimers => "rebuild-timer-reset",
            Check::RebuildHalfSize => "rebuild-child-half-size",
            Check::CreditBound => "rebuild-credit-bound",
            Check::AggregateCredit => "aggregate-credit-bound",
            Check::DecrementPath => "decrement-path-length",
            Check::UnsuccessfulMutation => "unsuccessful-update-mutated",
        })
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("check {check} failed at step {step}: {detail}")]
pub struct Violation {
    pub check: Check,
    /// 1-based step index; the end-of-run checks report `ops.len()`.
    pub step: usize,
    pub detail: String,
    /// The tree at the moment of failure.
    pub dot: String,
}

/// Replays `workload` on a fresh tree with `k`, checking everything.
///
/// Every step compares the return value against the reference model,
/// checks the height bound and the decrement count, and checks any rebuild
/// it triggered (perfect balance, timer reset, child sizes, credit bound).
/// Every `check_every` steps and at the end the whole tree is audited
/// against the model. `check_every = 0` audits only at the end.
pub fn run(
    workload: &Workload,
    k: RebalanceFraction,
    check_every: usize,
) -> Result<RunReport, Violation> {
    run_with(
        workload,
        k,
        RunOptions {
            check_every,
            height: HeightPolicy::Enforce,
        },
    )
}

pub fn run_with(
    workload: &Workload,
    k: RebalanceFraction,
    options: RunOptions,
) -> Result<RunReport, Violation> {
    Runner::new(k).run(workload, options)
}

struct Runner {
    tree: TimerTree<i64>,
    model: OracleModel<i64>,
    bounds: HeightBounds,
    k: RebalanceFraction,
}

impl Runner {
    fn new(k: RebalanceFraction) -> Self {
        let mut tree = TimerTree::new(k);
        tree.attach_metrics(MetricsSink::counters_only());
        Self {
            tree,
            model: OracleModel::new(),
            bounds: HeightBounds::new(k),
            k,
        }
    }

    fn counters(&self) -> Counters {
        self.tree
            .metrics()
            .map(|m| m.counters())
            .unwrap_or_default()
    }

    fn fail(&self, check: Check, step: usize, detail: String) -> Violation {
        Violation {
            check,
            step,
            detail,
            dot: dot::to_dot(&self.tree),
        }
    }

    fn bound(&mut self, size: usize) -> u64 {
        if size == 0 {
            0
        } else {
            self.bounds.get(size as u64)
        }
    }

    fn run(mut self, workload: &Workload, options: RunOptions) -> Result<RunReport, Violation> {
        let check_every = options.check_every;
        let mut height_excess = Vec::new();
        let mut samples = Vec::with_capacity(workload.ops.len());
        let mut max_height = 0;
        let mut height = 0;
        let mut rebuilds_checked = 0;
        let mut unsuccessful_checked = 0;

        for (index, &op) in workload.ops.iter().enumerate() {
            let step = index + 1;
            let audit_now = check_every > 0 && step % check_every == 0;
            let expected = self.model.apply(op.kind, op.key);
            let before = (audit_now && !expected && op.kind != OpKind::Contains)
                .then(|| dot::to_dot(&self.tree));
            let decrements_before = self.counters().total_decrements;

            let outcome = match op.kind {
                OpKind::Insert => self.tree.insert_traced(op.key),
                OpKind::Delete => self.tree.delete_traced(&op.key),
                OpKind::Contains => crate::tree::UpdateOutcome {
                    succeeded: self.tree.contains(&op.key),
                    rebuild: None,
                },
            };
            if outcome.succeeded != expected {
                return Err(self.fail(
                    Check::OracleResult,
                    step,
                    format!(
                        "{} {} returned {}, model says {}",
                        op.kind, op.key, outcome.succeeded, expected
                    ),
                ));
            }
            if let Some(before) = before {
                if before != dot::to_dot(&self.tree) {
                    return Err(self.fail(
                        Check::UnsuccessfulMutation,
                        step,
                        format!("unsuccessful {} {} changed the tree", op.kind, op.key),
                    ));
                }
                unsuccessful_checked += 1;
            }

            let decremented = self.counters().total_decrements - decrements_before;
            if outcome.succeeded && decremented > height as u64 {
                return Err(self.fail(
                    Check::DecrementPath,
                    step,
                    format!("{decremented} decrements on a tree of height {height}"),
                ));
            }

            if let Some(info) = outcome.rebuild {
                let sub = Some(self.tree.node(info.root));
                let failed = if !validation::check_perfectly_balanced(sub) {
                    Some(Check::RebuildBalance)
                } else if !validation::check_timer_reset_law(sub, self.k) {
                    Some(Check::RebuildTimers)
                } else if !validation::check_children_at_most_half(sub) {
                    Some(Check::RebuildHalfSize)
                } else if !metrics::credit_bound_holds(info.subtree_size, info.timer0, self.k) {
                    Some(Check::CreditBound)
                } else {
                    None
                };
                if let Some(check) = failed {
                    return Err(self.fail(
                        check,
                        step,
                        format!(
                            "rebuild of {} nodes at depth {} with timer start {}",
                            info.subtree_size, info.depth, info.timer0
                        ),
                    ));
                }
                rebuilds_checked += 1;
            }

            height = if audit_now {
                self.audit(step)?
            } else {
                self.tree.height()
            };
            max_height = max_height.max(height);
            let size = self.tree.len();
            let bound = self.bound(size);
            if size > 0 && height as u64 > bound {
                match options.height {
                    HeightPolicy::Enforce => {
                        return Err(self.fail(
                            Check::HeightBound,
                            step,
                            format!("height {height} exceeds bound {bound} at size {size}"),
                        ))
                    }
                    HeightPolicy::Record => height_excess.push(HeightExcess {
                        step,
                        size,
                        height,
                        bound,
                    }),
                }
            }

            let counters = self.counters();
            samples.push(StepSample {
                step,
                op: op.kind,
                key: op.key,
                success: outcome.succeeded,
                size,
                height,
                height_bound: bound,
                rebuild_size: outcome.rebuild.map_or(0, |r| r.subtree_size),
                total_decrements: counters.total_decrements,
                total_rebuilt_nodes: counters.total_rebuilt_nodes,
            });
        }

        let last = workload.ops.len();
        let final_height = self.audit(last)?;
        let counters = self.counters();
        if !metrics::check_aggregate_amortized(&counters, self.k) {
            return Err(self.fail(
                Check::AggregateCredit,
                last,
                format!(
                    "{} rebuilt nodes against {} decrements",
                    counters.total_rebuilt_nodes, counters.total_decrements
                ),
            ));
        }
        let final_size = self.tree.len();
        Ok(RunReport {
            k: self.k,
            final_size,
            final_height,
            max_height,
            final_height_bound: self.bound(final_size),
            counters,
            rebuilds_checked,
            unsuccessful_checked,
            height_excess,
            samples,
        })
    }

    /// Full comparison against the model; returns the tree height.
    fn audit(&self, step: usize) -> Result<usize, Violation> {
        let audit = validation::audit(&self.tree);
        if !audit.ordered {
            return Err(self.fail(
                Check::Bst,
                step,
                "in-order keys not strictly ascending".into(),
            ));
        }
        if !audit.timers_in_range {
            return Err(self.fail(
                Check::TimerRange,
                step,
                "a timer is outside 1..=timer_start".into(),
            ));
        }
        if audit.keys != self.model.keys() || self.tree.len() != self.model.len() {
            return Err(self.fail(
                Check::OracleEqual,
                step,
                format!(
                    "tree holds {} keys (count {}), model holds {}",
                    audit.keys.len(),
                    self.tree.len(),
                    self.model.len()
                ),
            ));
        }
        Ok(audit.height)
    }
}
