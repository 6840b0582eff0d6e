//! Graphviz export.
//!
//! Nodes are numbered in preorder rather than by arena slot, so two trees
//! with the same keys, timers and shape always render to identical bytes.

use std::fmt::{Display, Write};

use crate::node::NodeRef;
use crate::tree::TimerTree;

pub fn to_dot<K: Ord + Clone + Display>(tree: &TimerTree<K>) -> String {
    subtree_to_dot(tree.root())
}

pub fn subtree_to_dot<K: Display>(root: Option<NodeRef<'_, K>>) -> String {
    let mut out = String::from("digraph timer_tree {\n    node [shape=box];\n");
    if let Some(root) = root {
        let mut next = 0;
        emit(root, &mut next, &mut out);
    }
    out.push_str("}\n");
    out
}

fn emit<K: Display>(node: NodeRef<'_, K>, next: &mut usize, out: &mut String) -> usize {
    let id = *next;
    *next += 1;
    // `\n` stays literal: Graphviz turns it into a line break inside the label
    let _ = writeln!(
        out,
        "    n{id} [label=\"{}\\nt={}/{}\"];",
        node.key(),
        node.timer(),
        node.timer_start()
    );
    for (child, label) in [(node.left(), "L"), (node.right(), "R")] {
        if let Some(child) = child {
            let child_id = emit(child, next, out);
            let _ = writeln!(out, "    n{id} -> n{child_id} [label=\"{label}\"];");
        }
    }
    id
}
