//! Downward closure, tree closure `tcl`, the anchor `[a ^ B]` and orbits.

use std::collections::BTreeSet;

use crate::plan::{Expansion, Mark};
use crate::tree::{qftp_key, Node};

pub type NodeSet = BTreeSet<Node>;

/// All prefixes of members of `b`, members included.
pub fn downset(_e: &Expansion, b: &NodeSet) -> NodeSet {
    let mut out = NodeSet::new();
    for x in b {
        for d in 0..=x.depth() {
            out.insert(x.prefix(d));
        }
    }
    out
}

/// Smallest superset of `{eps} ∪ ↓B` closed under taking `1`-marked children.
pub fn tcl(e: &Expansion, b: &NodeSet) -> NodeSet {
    let mut out = downset(e, b);
    out.insert(Node::root());
    let mut frontier: Vec<Node> = out.iter().cloned().collect();
    while let Some(x) = frontier.pop() {
        let Some(i) = e.tree.index_of(&x) else { continue };
        for &c in e.tree.children(i) {
            let child = e.tree.node(c);
            if e.mark_of(child) == Mark::One && out.insert(child.clone()) {
                frontier.push(child.clone());
            }
        }
    }
    out
}

/// The largest member of `closed` below or equal to `a`.
///
/// `closed` must contain the root, which is the case for any `tcl` result.
pub fn anchor_in(closed: &NodeSet, a: &Node) -> Node {
    (0..=a.depth()).rev().map(|d| a.prefix(d)).find(|p| closed.contains(p)).unwrap_or_else(Node::root)
}

pub fn anchor(e: &Expansion, a: &Node, b: &NodeSet) -> Node {
    anchor_in(&tcl(e, b), a)
}

/// Nodes realizing the same labeled quantifier-free type as `a` over `b`.
pub fn orbit(e: &Expansion, a: &Node, b: &NodeSet) -> NodeSet {
    let params: Vec<Node> = b.iter().cloned().collect();
    let with = |x: &Node| {
        let mut tuple = Vec::with_capacity(params.len() + 1);
        tuple.push(x.clone());
        tuple.extend(params.iter().cloned());
        qftp_key(&tuple, true)
    };
    let target = with(a);
    e.tree.nodes().iter().filter(|x| with(x) == target).cloned().collect()
}
