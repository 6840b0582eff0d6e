//! The timer tree: an ordinary recursive binary search tree plus a
//! countdown timer on every node.
//!
//! Every successful insert or delete decrements the timer of each node
//! whose recursive frame saw the success, on the way back up. When a timer
//! hits zero its node becomes the rebuild target; since frames unwind
//! deepest-first, the last node marked is the shallowest one, and only its
//! subtree is rebuilt. Rebuilding resets every timer in the subtree to
//! `max(1, floor(k * subtree size))`. New nodes start with a timer of 1.

use std::cmp::Ordering;
use std::fmt;

use crate::fraction::RebalanceFraction;
use crate::metrics::MetricsSink;
use crate::node::{subtree_height, Arena, Dir, Node, NodeId, NodeRef, NodeSnapshot};
use crate::rebuild;

/// What a single insert or delete did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UpdateOutcome {
    pub succeeded: bool,
    pub rebuild: Option<RebuildInfo>,
}

/// The rebuild an update triggered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RebuildInfo {
    /// Root of the rebuilt subtree; valid until the next update.
    pub root: NodeId,
    pub subtree_size: u64,
    /// Timer start of the node whose timer reached zero.
    pub timer0: u64,
    /// Depth of the rebuilt subtree's root, counting the tree root as 1.
    pub depth: u64,
}

/// Scratch state threaded through one recursive update.
#[derive(Debug)]
pub(crate) struct UpdateContext {
    pub succeeded: bool,
    pub rebuild_target: Option<NodeId>,
    pub target_parent: Option<NodeId>,
    pub target_dir: Dir,
    pub target_depth: u64,
}

impl UpdateContext {
    fn new() -> Self {
        Self {
            succeeded: false,
            rebuild_target: None,
            target_parent: None,
            target_dir: Dir::Root,
            target_depth: 0,
        }
    }
}

/// An ordered set balanced by scheduled partial rebuilds.
#[derive(Clone)]
pub struct TimerTree<K> {
    arena: Arena<K>,
    root: Option<NodeId>,
    k: RebalanceFraction,
    count: usize,
    metrics: Option<MetricsSink>,
}

impl<K: Ord + Clone> Default for TimerTree<K> {
    fn default() -> Self {
        Self::new(RebalanceFraction::default())
    }
}

impl<K: Ord + Clone> TimerTree<K> {
    pub fn new(k: RebalanceFraction) -> Self {
        Self {
            arena: Arena::default(),
            root: None,
            k,
            count: 0,
            metrics: None,
        }
    }

    /// Builds a perfectly balanced tree over `keys`, which must be strictly
    /// ascending. Timers are set as if the whole tree had just been rebuilt.
    pub fn from_sorted(k: RebalanceFraction, keys: impl IntoIterator<Item = K>) -> Self {
        let mut tree = Self::new(k);
        let mut array = Vec::new();
        for key in keys {
            if let Some(&last) = array.last() {
                assert!(
                    tree.arena[last].key < key,
                    "keys must be strictly ascending"
                );
            }
            array.push(tree.arena.alloc(Node::leaf(key)));
        }
        tree.count = array.len();
        tree.root = rebuild::build_tree(&mut tree.arena, &array, k, None);
        tree
    }

    /// Loads a tree exactly as described, timers included. The snapshot is
    /// trusted as-is: nothing checks key order or timer ranges, so this can
    /// also build invalid trees for exercising the checkers.
    pub fn from_snapshot(k: RebalanceFraction, root: Option<NodeSnapshot<K>>) -> Self {
        let mut tree = Self::new(k);
        tree.root = root.map(|snap| tree.load(snap));
        tree
    }

    fn load(&mut self, snap: NodeSnapshot<K>) -> NodeId {
        let left = snap.left.map(|s| self.load(*s));
        let right = snap.right.map(|s| self.load(*s));
        self.count += 1;
        self.arena.alloc(Node {
            key: snap.key,
            left,
            right,
            timer: snap.timer,
            timer_start: snap.timer_start,
        })
    }

    pub fn rebalance_fraction(&self) -> RebalanceFraction {
        self.k
    }

    pub fn attach_metrics(&mut self, sink: MetricsSink) {
        self.metrics = Some(sink);
    }

    pub fn detach_metrics(&mut self) -> Option<MetricsSink> {
        self.metrics.take()
    }

    pub fn metrics(&self) -> Option<&MetricsSink> {
        self.metrics.as_ref()
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn height(&self) -> usize {
        subtree_height(self.root())
    }

    pub fn root(&self) -> Option<NodeRef<'_, K>> {
        self.root.map(|id| NodeRef::new(&self.arena, id))
    }

    /// View of a node by id, e.g. the root reported in [`RebuildInfo`].
    pub fn node(&self, id: NodeId) -> NodeRef<'_, K> {
        NodeRef::new(&self.arena, id)
    }

    pub fn snapshot(&self) -> Option<NodeSnapshot<K>> {
        self.root().map(|r| r.snapshot())
    }

    pub fn in_order(&self) -> Vec<K> {
        let mut keys = Vec::with_capacity(self.count);
        if let Some(root) = self.root() {
            root.for_each_in_order(&mut |n| keys.push(n.key().clone()));
        }
        keys
    }

    pub fn contains(&self, key: &K) -> bool {
        let mut cur = self.root;
        while let Some(id) = cur {
            let node = &self.arena[id];
            cur = match key.cmp(&node.key) {
                Ordering::Less => node.left,
                Ordering::Greater => node.right,
                Ordering::Equal => return true,
            };
        }
        false
    }

    pub fn clear(&mut self) {
        self.arena.clear();
        self.root = None;
        self.count = 0;
    }

    /// Inserts `key`; returns false if it was already present.
    pub fn insert(&mut self, key: K) -> bool {
        self.insert_traced(key).succeeded
    }

    /// Removes `key`; returns false if it was absent.
    pub fn delete(&mut self, key: &K) -> bool {
        self.delete_traced(key).succeeded
    }

    pub fn insert_traced(&mut self, key: K) -> UpdateOutcome {
        let mut ctx = UpdateContext::new();
        let root = self.insert_rec(self.root, key, 1, &mut ctx);
        self.root = Some(root);
        if ctx.succeeded {
            self.count += 1;
        }
        self.finish_update(ctx)
    }

    pub fn delete_traced(&mut self, key: &K) -> UpdateOutcome {
        let mut ctx = UpdateContext::new();
        self.root = self.delete_rec(self.root, key, 1, &mut ctx);
        if ctx.succeeded {
            self.count -= 1;
        }
        self.finish_update(ctx)
    }

    fn finish_update(&mut self, ctx: UpdateContext) -> UpdateOutcome {
        if ctx.succeeded {
            if let Some(sink) = &mut self.metrics {
                sink.record_success();
            }
        }
        let rebuild = ctx
            .rebuild_target
            .is_some()
            .then(|| self.apply_rebuild(&ctx));
        UpdateOutcome {
            succeeded: ctx.succeeded,
            rebuild,
        }
    }

    fn insert_rec(
        &mut self,
        slot: Option<NodeId>,
        key: K,
        depth: u64,
        ctx: &mut UpdateContext,
    ) -> NodeId {
        let Some(id) = slot else {
            ctx.succeeded = true;
            return self.arena.alloc(Node::leaf(key));
        };
        let dir = match key.cmp(&self.arena[id].key) {
            Ordering::Less => Dir::Left,
            Ordering::Greater => Dir::Right,
            Ordering::Equal => {
                ctx.succeeded = false;
                return id;
            }
        };
        let child = self.arena[id].child(dir);
        let child = self.insert_rec(child, key, depth + 1, ctx);
        self.arena[id].set_child(dir, Some(child));
        if ctx.succeeded {
            self.decrement_and_mark(id, dir, depth, ctx);
        }
        id
    }

    fn delete_rec(
        &mut self,
        slot: Option<NodeId>,
        key: &K,
        depth: u64,
        ctx: &mut UpdateContext,
    ) -> Option<NodeId> {
        let Some(id) = slot else {
            ctx.succeeded = false;
            return None;
        };
        let node = &self.arena[id];
        let child = match key.cmp(&node.key) {
            Ordering::Less => {
                let left = self.delete_rec(node.left, key, depth + 1, ctx);
                self.arena[id].left = left;
                Dir::Left
            }
            Ordering::Greater => {
                let right = self.delete_rec(node.right, key, depth + 1, ctx);
                self.arena[id].right = right;
                Dir::Right
            }
            Ordering::Equal => match (node.left, node.right) {
                (Some(_), Some(right)) => {
                    // Take over the in-order successor's key, then delete the
                    // successor from the right subtree instead.
                    let successor = self.arena[self.get_min(right)].key.clone();
                    self.arena[id].key = successor.clone();
                    let right = self.delete_rec(Some(right), &successor, depth + 1, ctx);
                    self.arena[id].right = right;
                    Dir::Right
                }
                (left, right) => {
                    ctx.succeeded = true;
                    self.arena.free(id);
                    return left.or(right);
                }
            },
        };
        if ctx.succeeded {
            self.decrement_and_mark(id, child, depth, ctx);
        }
        Some(id)
    }

    fn get_min(&self, mut id: NodeId) -> NodeId {
        while let Some(left) = self.arena[id].left {
            id = left;
        }
        id
    }

    /// Unwind step after a successful update passed through `id` towards its
    /// `dir` child.
    pub(crate) fn decrement_and_mark(
        &mut self,
        id: NodeId,
        dir: Dir,
        depth: u64,
        ctx: &mut UpdateContext,
    ) {
        let node = &mut self.arena[id];
        node.timer -= 1;
        if let Some(sink) = &mut self.metrics {
            sink.record_decrement();
        }
        if node.timer == 0 {
            // Shallower than any target marked so far.
            ctx.rebuild_target = Some(id);
            ctx.target_parent = None;
            ctx.target_dir = Dir::Root;
            ctx.target_depth = depth;
        } else if ctx.rebuild_target.is_some() && node.child(dir) == ctx.rebuild_target {
            ctx.target_parent = Some(id);
            ctx.target_dir = dir;
        }
    }

    /// Rebuilds the subtree under the context's target and relinks it.
    pub(crate) fn apply_rebuild(&mut self, ctx: &UpdateContext) -> RebuildInfo {
        let target = ctx.rebuild_target.expect("apply_rebuild without a target");
        let timer0 = self.arena[target].timer_start;

        let (new_root, size) =
            rebuild::rebuild(&mut self.arena, target, self.k, self.metrics.as_mut());
        let subtree_size = size as u64;
        if let Some(sink) = &mut self.metrics {
            sink.record_trigger(subtree_size, timer0, ctx.target_depth);
        }

        match (ctx.target_dir, ctx.target_parent) {
            (Dir::Root, _) => self.root = Some(new_root),
            (dir, Some(parent)) => self.arena[parent].set_child(dir, Some(new_root)),
            (_, None) => unreachable!("child-side target without a parent"),
        }
        RebuildInfo {
            root: new_root,
            subtree_size,
            timer0,
            depth: ctx.target_depth,
        }
    }
}

impl<K: Ord + Clone> Extend<K> for TimerTree<K> {
    fn extend<I: IntoIterator<Item = K>>(&mut self, iter: I) {
        for key in iter {
            self.insert(key);
        }
    }
}

impl<K: Ord + Clone> FromIterator<K> for TimerTree<K> {
    fn from_iter<I: IntoIterator<Item = K>>(iter: I) -> Self {
        let mut tree = Self::default();
        tree.extend(iter);
        tree
    }
}

impl<K: fmt::Debug + Ord + Clone> fmt::Debug for TimerTree<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimerTree")
            .field("k", &self.k)
            .field("len", &self.count)
            .field("root", &self.snapshot())
            .finish()
    }
}
