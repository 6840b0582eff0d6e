//! Node storage.
//!
//! Nodes live in a slot arena and link to each other by [`NodeId`]. This
//! lets an update remember "the node whose timer hit zero, and its parent"
//! while it unwinds, and lets a rebuild relink existing nodes instead of
//! allocating fresh ones.

use std::ops::{Index, IndexMut};

/// Handle to a node inside one tree's arena. Only meaningful for the tree
/// that produced it, and only until that tree's next update.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(u32);

impl NodeId {
    fn index(self) -> usize {
        self.0 as usize
    }
}

/// Which link of the parent a subtree hangs from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    Left,
    Right,
    /// The subtree is the whole tree.
    Root,
}

#[derive(Clone, Debug)]
pub(crate) struct Node<K> {
    pub key: K,
    pub left: Option<NodeId>,
    pub right: Option<NodeId>,
    /// Remaining successful updates in this subtree before it is rebuilt.
    pub timer: u64,
    /// Value `timer` held at its last set or reset.
    pub timer_start: u64,
}

impl<K> Node<K> {
    pub fn leaf(key: K) -> Self {
        Self {
            key,
            left: None,
            right: None,
            timer: 1,
            timer_start: 1,
        }
    }

    pub fn child(&self, dir: Dir) -> Option<NodeId> {
        match dir {
            Dir::Left => self.left,
            Dir::Right => self.right,
            Dir::Root => unreachable!("a node has no root link"),
        }
    }

    pub fn set_child(&mut self, dir: Dir, child: Option<NodeId>) {
        match dir {
            Dir::Left => self.left = child,
            Dir::Right => self.right = child,
            Dir::Root => unreachable!("a node has no root link"),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Arena<K> {
    slots: Vec<Option<Node<K>>>,
    free: Vec<NodeId>,
}

impl<K> Default for Arena<K> {
    fn default() -> Self {
        Self {
            slots: Vec::new(),
            free: Vec::new(),
        }
    }
}

impl<K> Arena<K> {
    pub fn alloc(&mut self, node: Node<K>) -> NodeId {
        if let Some(id) = self.free.pop() {
            self.slots[id.index()] = Some(node);
            return id;
        }
        let id = NodeId(u32::try_from(self.slots.len()).expect("arena exceeds u32 slots"));
        self.slots.push(Some(node));
        id
    }

    pub fn free(&mut self, id: NodeId) -> Node<K> {
        let node = self.slots[id.index()]
            .take()
            .expect("double free of arena slot");
        self.free.push(id);
        node
    }

    pub fn clear(&mut self) {
        self.slots.clear();
        self.free.clear();
    }
}

impl<K> Index<NodeId> for Arena<K> {
    type Output = Node<K>;

    fn index(&self, id: NodeId) -> &Node<K> {
        self.slots[id.index()].as_ref().expect("dangling NodeId")
    }
}

impl<K> IndexMut<NodeId> for Arena<K> {
    fn index_mut(&mut self, id: NodeId) -> &mut Node<K> {
        self.slots[id.index()].as_mut().expect("dangling NodeId")
    }
}

/// Borrowed, read-only view of one node and, through it, its subtree.
pub struct NodeRef<'a, K> {
    arena: &'a Arena<K>,
    id: NodeId,
}

impl<K> Clone for NodeRef<'_, K> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<K> Copy for NodeRef<'_, K> {}

impl<'a, K> NodeRef<'a, K> {
    pub(crate) fn new(arena: &'a Arena<K>, id: NodeId) -> Self {
        Self { arena, id }
    }

    fn node(&self) -> &'a Node<K> {
        &self.arena[self.id]
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn key(&self) -> &'a K {
        &self.node().key
    }

    pub fn timer(&self) -> u64 {
        self.node().timer
    }

    pub fn timer_start(&self) -> u64 {
        self.node().timer_start
    }

    pub fn left(&self) -> Option<Self> {
        self.node().left.map(|id| Self::new(self.arena, id))
    }

    pub fn right(&self) -> Option<Self> {
        self.node().right.map(|id| Self::new(self.arena, id))
    }

    /// Leftmost node of this subtree.
    pub fn min(&self) -> Self {
        let mut cur = *self;
        while let Some(left) = cur.left() {
            cur = left;
        }
        cur
    }

    /// Number of nodes in this subtree.
    pub fn size(&self) -> usize {
        1 + subtree_size(self.left()) + subtree_size(self.right())
    }

    /// Nodes on the longest downward path starting here.
    pub fn height(&self) -> usize {
        1 + subtree_height(self.left()).max(subtree_height(self.right()))
    }

    pub fn snapshot(&self) -> NodeSnapshot<K>
    where
        K: Clone,
    {
        NodeSnapshot {
            key: self.key().clone(),
            timer: self.timer(),
            timer_start: self.timer_start(),
            left: self.left().map(|n| Box::new(n.snapshot())),
            right: self.right().map(|n| Box::new(n.snapshot())),
        }
    }

    /// Visits the subtree's nodes in ascending key order.
    pub fn for_each_in_order(&self, f: &mut impl FnMut(NodeRef<'a, K>)) {
        if let Some(left) = self.left() {
            left.for_each_in_order(f);
        }
        f(*self);
        if let Some(right) = self.right() {
            right.for_each_in_order(f);
        }
    }
}

pub fn subtree_size<K>(node: Option<NodeRef<'_, K>>) -> usize {
    node.map_or(0, |n| n.size())
}

pub fn subtree_height<K>(node: Option<NodeRef<'_, K>>) -> usize {
    node.map_or(0, |n| n.height())
}

/// Owned, plain copy of a subtree: keys, timers and shape.
///
/// Used to compare trees node-for-node in tests and to hand-build fixture
/// trees with [`crate::TimerTree::from_snapshot`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeSnapshot<K> {
    pub key: K,
    pub timer: u64,
    pub timer_start: u64,
    pub left: Option<Box<NodeSnapshot<K>>>,
    pub right: Option<Box<NodeSnapshot<K>>>,
}

impl<K> NodeSnapshot<K> {
    pub fn new(
        key: K,
        timer: u64,
        timer_start: u64,
        left: Option<NodeSnapshot<K>>,
        right: Option<NodeSnapshot<K>>,
    ) -> Self {
        Self {
            key,
            timer,
            timer_start,
            left: left.map(Box::new),
            right: right.map(Box::new),
        }
    }

    /// Childless node whose timer equals its timer start.
    pub fn leaf(key: K, timer: u64) -> Self {
        Self::new(key, timer, timer, None, None)
    }

    /// Node whose timer equals its timer start.
    pub fn with(key: K, timer: u64, left: Option<Self>, right: Option<Self>) -> Self {
        Self::new(key, timer, timer, left, right)
    }
}
