//! The explicit duplicator strategy and orbit representatives.

use crate::closure::{anchor_in, tcl, NodeSet};
use crate::plan::{Expansion, Mark, PlanPath};
use crate::tree::{Node, Segment, Tag};

use super::{DuplicatorStrategy, GameState, Reply, SpoilerMove};

/// Extends `base` by the least segments leading to the plan node `sigma`.
fn least_extension(e: &Expansion, base: Node, sigma: &PlanPath) -> Node {
    (base.depth() + 1..=sigma.len()).fold(base, |acc, l| {
        let branch = sigma.indices()[l - 1];
        match e.plan.mark(&sigma.prefix(l)) {
            Some(Mark::Inf) => acc.child(Segment::indexed(branch, 0)),
            _ => acc.child(Segment::star(branch)),
        }
    })
}

/// The least node over `sigma_p` whose path leaves `anchor` through a child
/// outside `closed`, or `None` when every such child is taken.
pub fn fresh_node(e: &Expansion, closed: &NodeSet, anchor: &Node, sigma_p: &PlanPath) -> Option<Node> {
    let sigma = anchor.projection();
    if sigma_p.len() <= sigma.len() || !sigma.is_prefix_of(sigma_p) {
        return None;
    }
    let rho = sigma_p.prefix(sigma.len() + 1);
    if e.plan.mark(&rho) != Some(Mark::Inf) {
        return None;
    }
    let branch = *rho.indices().last().expect("non-root");
    let used: Vec<u32> = closed
        .iter()
        .filter(|d| d.depth() == anchor.depth() + 1 && d.pred() == *anchor && d.projection() == rho)
        .filter_map(|d| match d.last() {
            Some(Segment { tag: Tag::Index(t), .. }) => Some(t),
            _ => None,
        })
        .collect();
    let t = (0..e.n as u32).find(|t| !used.contains(t))?;
    Some(least_extension(e, anchor.child(Segment::indexed(branch, t)), sigma_p))
}

/// One node from each orbit of `e` over `picks`.
///
/// Members of `tcl(picks)` are fixed points; every other orbit is given by
/// its anchor in `tcl(picks)` and its projection.
pub fn orbit_representatives(e: &Expansion, picks: &[Node]) -> Vec<Node> {
    let closed = tcl(e, &picks.iter().cloned().collect());
    let mut out: Vec<Node> = closed.iter().cloned().collect();
    for c in &closed {
        let sigma = c.projection();
        for sigma_p in e.plan.nodes().filter(|s| s.len() > sigma.len() && sigma.is_prefix_of(s)) {
            if let Some(x) = fresh_node(e, &closed, c, sigma_p) {
                out.push(x);
            }
        }
    }
    out
}

/// Image of `y` under the map `tcl(from) -> tcl(to)` generated by
/// `from[i] -> to[i]`; `None` when `y` is not in `tcl(from)`.
pub fn image_in(y: &Node, from: &[Node], to: &[Node]) -> Option<Node> {
    let (z_depth, z_image) = (0..=y.depth())
        .rev()
        .find_map(|d| {
            from.iter()
                .position(|p| p.depth() >= d && p.prefix(d) == y.prefix(d))
                .map(|i| (d, to[i].predk(from[i].depth() - d)))
        })
        .unwrap_or((0, Node::root()));
    let rest = &y.segments()[z_depth..];
    if rest.iter().any(|s| s.tag != Tag::Star) {
        return None;
    }
    Some(z_image.concat(rest))
}

/// The duplicator of the threshold argument.
///
/// A spoiler pick inside the tree closure of the earlier picks is answered
/// by its image under the closure map. Any other pick `c` is answered by the
/// least node over `pi(c)` hanging off the image of `c`'s anchor through a
/// fresh branch. The strategy is stateless: the closure map is rebuilt from
/// the picks.
pub fn duplicator_fixed(s: &GameState, m: &SpoilerMove) -> Reply {
    let side = m.side;
    let (from, to) = (s.picks(side), s.picks(side.other()));
    let (src, dst) = (s.structure(side), s.structure(side.other()));
    let closed_src = tcl(src, &from.iter().cloned().collect());
    let fallback = |node: Node| Reply { node, precondition_violated: true };

    if closed_src.contains(&m.node) {
        return match image_in(&m.node, from, to) {
            Some(node) if dst.contains(&node) => Reply { node, precondition_violated: false },
            _ => fallback(Node::root()),
        };
    }
    let d = anchor_in(&closed_src, &m.node);
    let Some(d_image) = image_in(&d, from, to).filter(|x| dst.contains(x)) else {
        return fallback(Node::root());
    };
    let closed_dst = tcl(dst, &to.iter().cloned().collect());
    let sigma_p = m.node.projection();
    match fresh_node(dst, &closed_dst, &d_image, &sigma_p) {
        Some(node) => Reply { node, precondition_violated: false },
        None => fallback(least_extension(dst, d_image, &sigma_p)),
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct FixedDuplicator;

impl DuplicatorStrategy for FixedDuplicator {
    fn respond(&mut self, s: &GameState, m: &SpoilerMove) -> Reply {
        duplicator_fixed(s, m)
    }
}
