//! Embedding extension, rearrangement into automorphisms, and disjoint
//! amalgamation.

use std::collections::BTreeSet;

use super::AnalysisError;
use crate::closure::{tcl, NodeSet};
use crate::game::image_in;
use crate::plan::{Expansion, Mark};
use crate::tree::{is_automorphism, is_embedding, qftp_key, Node, NodeMap, Segment, Tag};

/// Extends `f`, defined on the tree-closed set `b`, to `tcl(b ∪ {c})`.
///
/// `c` goes to the least child of `f(pred(c))` over `pi(c)` that is not
/// already an image; its `1`-marked descendants follow it.
pub fn extend_embedding(
    src: &Expansion,
    b: &NodeSet,
    f: &NodeMap,
    dst: &Expansion,
    c: &Node,
) -> Result<NodeMap, AnalysisError> {
    if b.contains(c) {
        return Ok(f.clone());
    }
    if c.is_root() || !b.contains(&c.pred()) {
        return Err(AnalysisError::Domain(format!("pred({c}) is not in the domain")));
    }
    let parent =
        f.get(&c.pred()).ok_or_else(|| AnalysisError::Domain(format!("embedding undefined at {}", c.pred())))?;
    let seg = c.last().expect("non-root");
    if src.mark_of(c) == Mark::One {
        return Err(AnalysisError::Domain(format!("{c} is a 1-child of the closed domain but not in it")));
    }
    let used: BTreeSet<u32> = f
        .values()
        .filter(|y| {
            y.depth() == parent.depth() + 1 && y.pred() == *parent && y.last().map(|s| s.branch) == Some(seg.branch)
        })
        .filter_map(|y| match y.last().map(|s| s.tag) {
            Some(Tag::Index(t)) => Some(t),
            _ => None,
        })
        .collect();
    let t = (0..dst.n as u32)
        .find(|t| !used.contains(t))
        .ok_or_else(|| AnalysisError::Capacity(format!("no fresh sibling under {parent} in Gamma({})", dst.n)))?;
    let image = parent.child(Segment::indexed(seg.branch, t));
    let mut g = f.clone();
    let closed = tcl(src, &[c.clone()].into());
    for y in closed.into_iter().filter(|y| c.le(y)) {
        g.insert(y.clone(), image.concat(&y.segments()[c.depth()..]));
    }
    Ok(g)
}

/// Extends a partial embedding of `e` into itself, defined on a tree-closed
/// set, node by node in preorder until it is total.
fn complete(e: &Expansion, mut k: NodeMap) -> Result<NodeMap, AnalysisError> {
    for c in e.tree.nodes() {
        if !k.contains_key(c) {
            let dom: NodeSet = k.keys().cloned().collect();
            k = extend_embedding(e, &dom, &k, e, c)?;
        }
    }
    Ok(k)
}

/// An automorphism `g` of `Gamma(n)` with `g ∘ h = id` on `Gamma(m)`.
pub fn rearrange(src: &Expansion, dst: &Expansion, h: &NodeMap) -> Result<NodeMap, AnalysisError> {
    if src.plan != dst.plan {
        return Err(AnalysisError::MismatchedPlans);
    }
    if src.n > dst.n || !is_embedding(&src.tree, &dst.tree, h, true) {
        return Err(AnalysisError::NotAnEmbedding);
    }
    if h.iter().any(|(a, b)| a.projection() != b.projection()) {
        return Err(AnalysisError::NotAnEmbedding);
    }
    let inverse: NodeMap = h.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
    let g = complete(dst, inverse)?;
    if !is_automorphism(&dst.tree, &g) || h.iter().any(|(a, b)| g.get(b) != Some(a)) {
        return Err(AnalysisError::Domain("rearrangement failed to verify".into()));
    }
    Ok(g)
}

/// An automorphism of `e` sending `from[i]` to `to[i]`, or `None` when the
/// tuples have different quantifier-free types.
pub fn automorphism_extending(e: &Expansion, from: &[Node], to: &[Node]) -> Result<Option<NodeMap>, AnalysisError> {
    if from.len() != to.len() {
        return Ok(None);
    }
    for x in from.iter().chain(to) {
        if !e.contains(x) {
            return Err(AnalysisError::Domain(format!("{x} is not in the expansion")));
        }
    }
    if qftp_key(from, true) != qftp_key(to, true) {
        return Ok(None);
    }
    let closed = tcl(e, &from.iter().cloned().collect());
    let mut k = NodeMap::new();
    for y in &closed {
        let Some(z) = image_in(y, from, to) else { return Ok(None) };
        k.insert(y.clone(), z);
    }
    if !is_embedding(&e.tree, &e.tree, &k, false) {
        return Ok(None);
    }
    let g = complete(e, k)?;
    let ok = is_automorphism(&e.tree, &g) && from.iter().zip(to).all(|(a, b)| g.get(a) == Some(b));
    Ok(ok.then_some(g))
}

/// A disjoint amalgam of `left` and `right` over `base`.
#[derive(Clone, Debug)]
pub struct Amalgam {
    pub base: Expansion,
    pub left: Expansion,
    pub right: Expansion,
    pub target: Expansion,
    pub j1: NodeMap,
    pub j2: NodeMap,
}

impl Amalgam {
    /// Both maps are embeddings, they agree on the base, and their images
    /// meet exactly in the image of the base.
    pub fn verify(&self, f1: &NodeMap, f2: &NodeMap) -> bool {
        let embeds = is_embedding(&self.left.tree, &self.target.tree, &self.j1, true)
            && is_embedding(&self.right.tree, &self.target.tree, &self.j2, true);
        let commutes = self.base.tree.nodes().iter().all(|a| self.j1.get(&f1[a]) == self.j2.get(&f2[a]));
        let img1: NodeSet = self.j1.values().cloned().collect();
        let img2: NodeSet = self.j2.values().cloned().collect();
        let base_img: NodeSet = self.base.tree.nodes().iter().map(|a| self.j1[&f1[a]].clone()).collect();
        embeds && commutes && img1.intersection(&img2).cloned().collect::<NodeSet>() == base_img
    }
}

fn retag(a: &Node, map: impl Fn(u32) -> u32) -> Node {
    Node::from_segments(
        a.segments()
            .iter()
            .map(|s| match s.tag {
                Tag::Star => *s,
                Tag::Index(t) => Segment::indexed(s.branch, map(t)),
            })
            .collect(),
    )
}

/// Amalgamates in `Gamma(n1 + n2)`. Each side is first rearranged so that
/// the base sits on the least tags; the left side then keeps its tags and
/// the right side moves every tag `k >= n0` to `k + n1`.
pub fn amalgamate(
    base: &Expansion,
    left: &Expansion,
    right: &Expansion,
    f1: &NodeMap,
    f2: &NodeMap,
) -> Result<Amalgam, AnalysisError> {
    if base.plan != left.plan || base.plan != right.plan {
        return Err(AnalysisError::MismatchedPlans);
    }
    let g1 = rearrange(base, left, f1)?;
    let g2 = rearrange(base, right, f2)?;
    let (n0, n1) = (base.n as u32, left.n as u32);
    let target = crate::plan::expand(&base.plan, left.n + right.n)?;
    let j1 = g1.iter().map(|(a, b)| (a.clone(), b.clone())).collect();
    let j2 = g2.iter().map(|(a, b)| (a.clone(), retag(b, |k| if k < n0 { k } else { k + n1 }))).collect();
    Ok(Amalgam { base: base.clone(), left: left.clone(), right: right.clone(), target, j1, j2 })
}

/// The inclusion of `Gamma(m)` into `Gamma(n)` for `m <= n`.
pub fn inclusion(small: &Expansion, large: &Expansion) -> NodeMap {
    small.tree.nodes().iter().map(|a| (a.clone(), a.clone())).filter(|(_, b)| large.contains(b)).collect()
}
