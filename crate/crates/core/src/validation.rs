//! Structural checkers for the tree's guarantees, the exact height bound,
//! and a sorted-sequence reference model for black-box comparison.

use num_bigint::BigUint;

use crate::fraction::RebalanceFraction;
use crate::node::{subtree_size, NodeRef};
use crate::tree::TimerTree;

/// Largest height a non-empty timer tree of `n` nodes may reach:
/// `floor(log_b(n / (2 - 2k))) + 1` with `b = (2 + 2k) / (1 + 2k)`.
///
/// Heights here count nodes. For small `k` the formula falls below the
/// smallest height some tiny trees can have (`n = 2, k = 1/4` gives 1), so
/// such trees exceed it by one; counting edges instead they never do.
///
/// Evaluated exactly. With `k = p/q`, `b = (2q + 2p) / (q + 2p)` and
/// `n / (2 - 2k) = n q / (2q - 2p)`, so `b^d <= n / (2 - 2k)` becomes
/// `(2q + 2p)^d * (2q - 2p) <= n q (q + 2p)^d` in integers.
pub fn height_bound(n: u64, k: RebalanceFraction) -> u64 {
    assert!(n >= 1, "height bound is defined for non-empty trees");
    let p = BigUint::from(k.num());
    let q = BigUint::from(k.den());
    let base_num = (&q + &p) * 2u32;
    let base_den = &q + &p * 2u32;
    let scaled_n = BigUint::from(n) * &q;

    // b^d <= target  <=>  lhs <= rhs, tracked incrementally in d
    let mut lhs = (&q - &p) * 2u32;
    let mut rhs = scaled_n;
    if lhs > rhs {
        return 1;
    }
    let mut d = 0;
    loop {
        lhs *= &base_num;
        rhs *= &base_den;
        if lhs > rhs {
            return d + 1;
        }
        d += 1;
    }
}

/// Memoized [`height_bound`] for one `k`, for callers that evaluate it
/// after every operation. The bound is monotone in `n`, so it is stored as
/// the list of thresholds where it steps up.
#[derive(Clone, Debug)]
pub struct HeightBounds {
    k: RebalanceFraction,
    /// `steps[i]` is the smallest `n` with `height_bound(n) >= i + 2`.
    steps: Vec<u64>,
}

impl HeightBounds {
    pub fn new(k: RebalanceFraction) -> Self {
        Self {
            k,
            steps: Vec::new(),
        }
    }

    pub fn get(&mut self, n: u64) -> u64 {
        while self.steps.last().is_none_or(|&s| s <= n) {
            let target = self.steps.len() as u64 + 2;
            // smallest n whose bound reaches `target`, by exponential then binary search
            let mut lo = self.steps.last().copied().unwrap_or(1);
            let mut hi = lo.max(1);
            while height_bound(hi, self.k) < target {
                lo = hi;
                hi = hi
                    .checked_mul(2)
                    .expect("height bound threshold overflows u64");
            }
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if height_bound(mid, self.k) >= target {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            self.steps.push(hi);
        }
        self.steps.partition_point(|&s| s <= n) as u64 + 1
    }
}

/// True iff the subtree's keys are strictly ascending in order.
pub fn check_bst<K: Ord>(node: Option<NodeRef<'_, K>>) -> bool {
    let Some(node) = node else { return true };
    let mut prev: Option<&K> = None;
    let mut ok = true;
    node.for_each_in_order(&mut |n| {
        if prev.is_some_and(|p| p >= n.key()) {
            ok = false;
        }
        prev = Some(n.key());
    });
    ok
}

/// True iff at every node the two child subtrees differ in size by at most one.
pub fn check_perfectly_balanced<K>(node: Option<NodeRef<'_, K>>) -> bool {
    fn sized<K>(node: Option<NodeRef<'_, K>>) -> Option<usize> {
        let Some(node) = node else { return Some(0) };
        let left = sized(node.left())?;
        let right = sized(node.right())?;
        (left.abs_diff(right) <= 1).then_some(left + right + 1)
    }
    sized(node).is_some()
}

/// True iff the tree is empty or no taller than [`height_bound`] allows.
pub fn check_height_bound<K: Ord + Clone>(tree: &TimerTree<K>) -> bool {
    tree.is_empty()
        || tree.height() as u64 <= height_bound(tree.len() as u64, tree.rebalance_fraction())
}

/// True iff every node in the subtree has `timer == timer_start ==
/// max(1, floor(k * own subtree size))`, the state a rebuild leaves behind.
/// In particular every subtree smaller than `2/k` has timer 1, so the next
/// update through it triggers another rebuild.
pub fn check_timer_reset_law<K>(node: Option<NodeRef<'_, K>>, k: RebalanceFraction) -> bool {
    fn sized<K>(node: Option<NodeRef<'_, K>>, k: RebalanceFraction) -> Option<u64> {
        let Some(node) = node else { return Some(0) };
        let size = sized(node.left(), k)? + sized(node.right(), k)? + 1;
        let expected = k.timer_reset_value(size);
        let small_is_one =
            u128::from(size) * u128::from(k.num()) >= 2 * u128::from(k.den()) || node.timer() == 1;
        (node.timer() == expected && node.timer_start() == expected && small_is_one).then_some(size)
    }
    sized(node, k).is_some()
}

/// True iff neither child subtree holds more than half the nodes.
pub fn check_children_at_most_half<K>(node: Option<NodeRef<'_, K>>) -> bool {
    let Some(node) = node else { return true };
    let half = node.size() / 2;
    subtree_size(node.left()) <= half && subtree_size(node.right()) <= half
}

/// True iff `1 <= timer <= timer_start` at every node.
pub fn check_timer_range<K>(node: Option<NodeRef<'_, K>>) -> bool {
    let Some(node) = node else { return true };
    (1..=node.timer_start()).contains(&node.timer())
        && check_timer_range(node.left())
        && check_timer_range(node.right())
}

/// Everything one pass over the tree can tell about it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Audit<K> {
    pub keys: Vec<K>,
    pub height: usize,
    pub ordered: bool,
    pub timers_in_range: bool,
}

/// Collects keys, height, ordering and timer range in a single traversal.
pub fn audit<K: Ord + Clone>(tree: &TimerTree<K>) -> Audit<K> {
    fn walk<K: Ord + Clone>(node: NodeRef<'_, K>, depth: usize, out: &mut Audit<K>) {
        out.height = out.height.max(depth);
        if !(1..=node.timer_start()).contains(&node.timer()) {
            out.timers_in_range = false;
        }
        if let Some(left) = node.left() {
            walk(left, depth + 1, out);
        }
        if out.keys.last().is_some_and(|last| last >= node.key()) {
            out.ordered = false;
        }
        out.keys.push(node.key().clone());
        if let Some(right) = node.right() {
            walk(right, depth + 1, out);
        }
    }
    let mut out = Audit {
        keys: Vec::with_capacity(tree.len()),
        height: 0,
        ordered: true,
        timers_in_range: true,
    };
    if let Some(root) = tree.root() {
        walk(root, 1, &mut out);
    }
    out
}

/// Reference ordered set: a sorted vector of unique keys.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleModel<K> {
    keys: Vec<K>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpKind {
    Insert,
    Delete,
    Contains,
}

impl<K: Ord> OracleModel<K> {
    pub fn new() -> Self {
        Self { keys: Vec::new() }
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Applies `op` and returns what the tree is expected to return.
    pub fn apply(&mut self, op: OpKind, key: K) -> bool {
        let found = self.keys.binary_search(&key);
        match (op, found) {
            (OpKind::Insert, Err(at)) => {
                self.keys.insert(at, key);
                true
            }
            (OpKind::Delete, Ok(at)) => {
                self.keys.remove(at);
                true
            }
            (OpKind::Contains, found) => found.is_ok(),
            _ => false,
        }
    }

    pub fn equals_tree(&self, tree: &TimerTree<K>) -> bool
    where
        K: Clone,
    {
        tree.len() == self.keys.len() && tree.in_order() == self.keys
    }
}
