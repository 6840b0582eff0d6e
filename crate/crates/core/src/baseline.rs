//! Unbalanced binary search tree used as the comparison baseline.
//!
//! Iterative throughout: on sorted input its height equals its size, and
//! recursion that deep would overflow the stack.

use std::cmp::Ordering;

#[derive(Clone, Debug)]
struct Slot<K> {
    key: K,
    left: Option<u32>,
    right: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct NaiveBst<K> {
    slots: Vec<Slot<K>>,
    free: Vec<u32>,
    root: Option<u32>,
    len: usize,
}

impl<K> Default for NaiveBst<K> {
    fn default() -> Self {
        Self {
            slots: Vec::new(),
            free: Vec::new(),
            root: None,
            len: 0,
        }
    }
}

/// Where a link lives: the root handle or one side of a slot.
#[derive(Clone, Copy)]
enum Link {
    Root,
    Left(u32),
    Right(u32),
}

impl<K: Ord> NaiveBst<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn get(&self, link: Link) -> Option<u32> {
        match link {
            Link::Root => self.root,
            Link::Left(i) => self.slots[i as usize].left,
            Link::Right(i) => self.slots[i as usize].right,
        }
    }

    fn set(&mut self, link: Link, value: Option<u32>) {
        match link {
            Link::Root => self.root = value,
            Link::Left(i) => self.slots[i as usize].left = value,
            Link::Right(i) => self.slots[i as usize].right = value,
        }
    }

    /// The link that holds `key`, or the empty link where it would go.
    fn find(&self, key: &K) -> Link {
        let mut link = Link::Root;
        while let Some(i) = self.get(link) {
            link = match key.cmp(&self.slots[i as usize].key) {
                Ordering::Less => Link::Left(i),
                Ordering::Greater => Link::Right(i),
                Ordering::Equal => return link,
            };
        }
        link
    }

    pub fn contains(&self, key: &K) -> bool {
        self.get(self.find(key)).is_some()
    }

    pub fn insert(&mut self, key: K) -> bool {
        let link = self.find(&key);
        if self.get(link).is_some() {
            return false;
        }
        let slot = Slot {
            key,
            left: None,
            right: None,
        };
        let index = match self.free.pop() {
            Some(i) => {
                self.slots[i as usize] = slot;
                i
            }
            None => {
                self.slots.push(slot);
                (self.slots.len() - 1) as u32
            }
        };
        self.set(link, Some(index));
        self.len += 1;
        true
    }

    pub fn delete(&mut self, key: &K) -> bool {
        let link = self.find(key);
        let Some(target) = self.get(link) else {
            return false;
        };
        let Slot { left, right, .. } = self.slots[target as usize];
        match (left, right) {
            (Some(_), Some(right)) => {
                // unlink the in-order successor and move its key up
                let mut succ_link = Link::Right(target);
                let mut succ = right;
                while let Some(l) = self.slots[succ as usize].left {
                    succ_link = Link::Left(succ);
                    succ = l;
                }
                let succ_right = self.slots[succ as usize].right;
                self.set(succ_link, succ_right);
                // move the successor's key into target's slot, keeping target's links
                let (t, s) = (target as usize, succ as usize);
                let (left, right) = (self.slots[t].left, self.slots[t].right);
                self.slots.swap(t, s);
                self.slots[t].left = left;
                self.slots[t].right = right;
                self.free.push(succ);
            }
            (child, None) | (None, child) => {
                self.set(link, child);
                self.free.push(target);
            }
        }
        self.len -= 1;
        true
    }

    pub fn height(&self) -> usize {
        let mut best = 0;
        let mut stack: Vec<(u32, usize)> = self.root.map(|r| (r, 1)).into_iter().collect();
        while let Some((i, depth)) = stack.pop() {
            best = best.max(depth);
            let slot = &self.slots[i as usize];
            stack.extend(slot.left.map(|c| (c, depth + 1)));
            stack.extend(slot.right.map(|c| (c, depth + 1)));
        }
        best
    }

    pub fn in_order(&self) -> Vec<&K> {
        let mut out = Vec::with_capacity(self.len);
        let mut stack = Vec::new();
        let mut cur = self.root;
        while cur.is_some() || !stack.is_empty() {
            while let Some(i) = cur {
                stack.push(i);
                cur = self.slots[i as usize].left;
            }
            let i = stack.pop().expect("stack non-empty");
            out.push(&self.slots[i as usize].key);
            cur = self.slots[i as usize].right;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn ascending_is_a_spine() {
        let mut bst = NaiveBst::new();
        for key in 0..10_000 {
            assert!(bst.insert(key));
        }
        assert_eq!(bst.height(), 10_000);
        assert!(!bst.insert(77));
    }

    #[test]
    fn matches_btreeset() {
        let mut bst = NaiveBst::new();
        let mut set = BTreeSet::new();
        let mut x: u64 = 1;
        for _ in 0..5000 {
            x = x
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let key = (x >> 33) % 300;
            if (x >> 20).is_multiple_of(3) {
                assert_eq!(bst.delete(&key), set.remove(&key));
            } else {
                assert_eq!(bst.insert(key), set.insert(key));
            }
            assert_eq!(bst.contains(&key), set.contains(&key));
        }
        assert_eq!(bst.len(), set.len());
        assert!(bst.in_order().into_iter().eq(set.iter()));
    }
}
