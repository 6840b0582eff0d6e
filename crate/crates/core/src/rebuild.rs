//! Partial rebuilding: flatten a subtree into key order, then relink the
//! same nodes into a perfectly balanced shape, resetting every timer on the
//! way back up.

use crate::fraction::RebalanceFraction;
use crate::metrics::MetricsSink;
use crate::node::{Arena, NodeId};

/// Appends the nodes of the subtree under `node` to `array` in key order.
pub(crate) fn copy_to_array<K>(arena: &Arena<K>, node: Option<NodeId>, array: &mut Vec<NodeId>) {
    if let Some(id) = node {
        copy_to_array(arena, arena[id].left, array);
        array.push(id);
        copy_to_array(arena, arena[id].right, array);
    }
}

/// Links `array` into a perfectly balanced subtree and returns its root.
///
/// The lower median becomes the root, so a range of two nodes always hangs
/// the larger key to the right. Each node's timer and timer start are set
/// from the size of the range it roots.
pub(crate) fn build_tree<K>(
    arena: &mut Arena<K>,
    array: &[NodeId],
    k: RebalanceFraction,
    mut sink: Option<&mut MetricsSink>,
) -> Option<NodeId> {
    build_range(arena, array, k, &mut sink)
}

fn build_range<K>(
    arena: &mut Arena<K>,
    array: &[NodeId],
    k: RebalanceFraction,
    sink: &mut Option<&mut MetricsSink>,
) -> Option<NodeId> {
    if array.is_empty() {
        return None;
    }
    let mid = (array.len() - 1) / 2;
    let left = build_range(arena, &array[..mid], k, sink);
    let right = build_range(arena, &array[mid + 1..], k, sink);

    let size = array.len() as u64;
    let timer = k.timer_reset_value(size);
    let root = array[mid];
    let node = &mut arena[root];
    node.left = left;
    node.right = right;
    node.timer = timer;
    node.timer_start = timer;
    if let Some(sink) = sink {
        sink.record_reset(size, timer);
    }
    Some(root)
}

/// Rebuilds the subtree under `node` and returns the new subtree root.
/// The caller relinks it. Returns the subtree size alongside.
pub(crate) fn rebuild<K>(
    arena: &mut Arena<K>,
    node: NodeId,
    k: RebalanceFraction,
    sink: Option<&mut MetricsSink>,
) -> (NodeId, usize) {
    let mut array = Vec::new();
    copy_to_array(arena, Some(node), &mut array);
    let root = build_tree(arena, &array, k, sink).expect("non-empty subtree");
    (root, array.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::{Node, NodeRef, NodeSnapshot};

    fn keys(arena: &Arena<i64>, array: &[NodeId]) -> Vec<i64> {
        array.iter().map(|&id| arena[id].key).collect()
    }

    /// Allocates a right spine over `keys` with stale timers, returning its root.
    fn spine(arena: &mut Arena<i64>, keys: &[i64]) -> Option<NodeId> {
        keys.iter().rev().fold(None, |right, &key| {
            let mut node = Node::leaf(key);
            node.right = right;
            node.timer = 7;
            node.timer_start = 9;
            Some(arena.alloc(node))
        })
    }

    #[test]
    fn copy_to_array_cases() {
        let mut arena = Arena::default();
        let mut array = Vec::new();
        copy_to_array(&arena, None, &mut array);
        assert!(array.is_empty());

        let five = arena.alloc(Node::leaf(5));
        copy_to_array(&arena, Some(five), &mut array);
        assert_eq!(keys(&arena, &array), [5]);

        let one = arena.alloc(Node::leaf(1));
        let three = arena.alloc(Node::leaf(3));
        let mut two = Node::leaf(2);
        two.left = Some(one);
        two.right = Some(three);
        let two = arena.alloc(two);
        let mut array = Vec::new();
        copy_to_array(&arena, Some(two), &mut array);
        assert_eq!(keys(&arena, &array), [1, 2, 3]);
        assert_eq!(array, [one, two, three]);
    }

    #[test]
    fn build_tree_empty_range() {
        let mut arena = Arena::<i64>::default();
        assert_eq!(
            build_tree(&mut arena, &[], RebalanceFraction::HALF, None),
            None
        );
    }

    #[test]
    fn build_tree_over_five_keys() {
        let mut arena = Arena::default();
        let array: Vec<_> = (1..=5).map(|key| arena.alloc(Node::leaf(key))).collect();
        let root = build_tree(&mut arena, &array, RebalanceFraction::HALF, None).unwrap();
        let expected = NodeSnapshot::with(
            3,
            2,
            Some(NodeSnapshot::with(
                1,
                1,
                None,
                Some(NodeSnapshot::leaf(2, 1)),
            )),
            Some(NodeSnapshot::with(
                4,
                1,
                None,
                Some(NodeSnapshot::leaf(5, 1)),
            )),
        );
        assert_eq!(NodeRef::new(&arena, root).snapshot(), expected);
    }

    #[test]
    fn build_tree_single_node() {
        for k in [(1, 2), (1, 4), (99, 100)] {
            let k = RebalanceFraction::new(k.0, k.1).unwrap();
            let mut arena = Arena::default();
            let mut node = Node::leaf(7);
            node.timer = 4;
            node.timer_start = 6;
            let id = arena.alloc(node);
            let root = build_tree(&mut arena, &[id], k, None).unwrap();
            assert_eq!(
                NodeRef::new(&arena, root).snapshot(),
                NodeSnapshot::leaf(7, 1)
            );
        }
    }

    #[test]
    fn rebuild_right_spine_reuses_nodes() {
        let mut arena = Arena::default();
        let top = spine(&mut arena, &[1, 2, 3, 4, 5]).unwrap();
        let mut before = Vec::new();
        copy_to_array(&arena, Some(top), &mut before);

        let mut sink = MetricsSink::new();
        let (root, size) = rebuild(&mut arena, top, RebalanceFraction::HALF, Some(&mut sink));
        assert_eq!(size, 5);
        assert_eq!(arena[root].key, 3);
        assert_eq!(root, before[2]);
        assert_eq!(sink.events().len(), 5);

        let mut fresh = Arena::default();
        let ids: Vec<_> = (1..=5).map(|key| fresh.alloc(Node::leaf(key))).collect();
        let reference = build_tree(&mut fresh, &ids, RebalanceFraction::HALF, None).unwrap();
        assert_eq!(
            NodeRef::new(&arena, root).snapshot(),
            NodeRef::new(&fresh, reference).snapshot()
        );
    }

    #[test]
    fn rebuild_two_nodes_hangs_larger_key_right() {
        for keys in [[1, 2], [2, 1]] {
            let mut arena = Arena::default();
            let mut lo = Node::leaf(keys[0].min(keys[1]));
            let hi = arena.alloc(Node::leaf(keys[0].max(keys[1])));
            // both shapes: larger key as right child, or smaller key as left child
            let top = if keys[0] < keys[1] {
                lo.right = Some(hi);
                arena.alloc(lo)
            } else {
                let lo = arena.alloc(lo);
                arena[hi].left = Some(lo);
                hi
            };
            let (root, _) = rebuild(&mut arena, top, RebalanceFraction::HALF, None);
            let expected = NodeSnapshot::with(1, 1, None, Some(NodeSnapshot::leaf(2, 1)));
            assert_eq!(NodeRef::new(&arena, root).snapshot(), expected);
        }
    }

    #[test]
    fn rebuild_balanced_subtree_keeps_shape() {
        let mut arena = Arena::default();
        let ids: Vec<_> = (1..=7).map(|key| arena.alloc(Node::leaf(key))).collect();
        let root = build_tree(&mut arena, &ids, RebalanceFraction::HALF, None).unwrap();
        let shape = NodeRef::new(&arena, root).snapshot();
        arena[root].timer = 1;
        let (again, _) = rebuild(&mut arena, root, RebalanceFraction::HALF, None);
        assert_eq!(again, root);
        assert_eq!(NodeRef::new(&arena, again).snapshot(), shape);
    }
}
