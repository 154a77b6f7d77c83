//! Tree plans and their finite expansions `Gamma(n)`.
//!
//! A plan is a finite rooted tree of branch-index paths where every node is
//! marked `1` or `inf`; the root is always `1`. Expanding a plan at size `n`
//! replaces each `inf` node by `n` tagged copies (per parent copy) and keeps
//! each `1` node single.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::tree::{FiniteTree, Node, NodeMap, Segment, Tag};

pub const DEFAULT_NODE_BUDGET: usize = 2_000_000;
pub const BUDGET_ENV_VAR: &str = "TREEPLAN_BUDGET";

/// Node budget for expansions: `TREEPLAN_BUDGET` if set and valid, else the default.
pub fn default_budget() -> usize {
    std::env::var(BUDGET_ENV_VAR)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&b: &usize| b > 0)
        .unwrap_or(DEFAULT_NODE_BUDGET)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("the root of a tree plan must be marked 1")]
    RootNotOne,
    #[error("invalid plan structure: {0}")]
    Malformed(String),
    #[error("plan node {0} does not exist")]
    UnknownNode(PlanPath),
    #[error("{0} is not a prefix of {1}")]
    NotPrefix(PlanPath, PlanPath),
    #[error("expansion size must be at least 1")]
    ZeroSize,
    #[error("expansion needs {needed} nodes, over the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: usize },
    #[error("not a permutation of 0..{0}")]
    BadPermutation(usize),
}

/// A path of branch indices in a plan; the empty path is the plan root.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlanPath(Vec<u32>);

impl PlanPath {
    pub fn new(path: Vec<u32>) -> Self {
        PlanPath(path)
    }

    pub fn root() -> Self {
        PlanPath(Vec::new())
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &PlanPath) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn child(&self, branch: u32) -> PlanPath {
        let mut p = self.0.clone();
        p.push(branch);
        PlanPath(p)
    }

    pub fn parent(&self) -> Option<PlanPath> {
        (!self.0.is_empty()).then(|| PlanPath(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn prefix(&self, len: usize) -> PlanPath {
        PlanPath(self.0[..len.min(self.0.len())].to_vec())
    }

    /// The part of `self` after `prefix`.
    pub fn strip_prefix(&self, prefix: &PlanPath) -> Option<PlanPath> {
        prefix.is_prefix_of(self).then(|| PlanPath(self.0[prefix.0.len()..].to_vec()))
    }
}

impl fmt::Display for PlanPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for PlanPath {
    type Err = PlanError;

    /// `""` or `"<>"` is the root; otherwise dot-separated naturals.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "<>" {
            return Ok(PlanPath::root());
        }
        s.split('.')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| PlanError::Syntax { pos: 0, message: format!("bad plan path {s:?}") })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(PlanPath)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mark {
    One,
    Inf,
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mark::One => "1",
            Mark::Inf => "inf",
        })
    }
}

/// A tree plan: a prefix-closed set of paths with a mark per path.
///
/// Branch indices under each node are normalized to `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreePlan {
    marks: BTreeMap<PlanPath, Mark>,
}

impl TreePlan {
    pub fn from_marks(marks: BTreeMap<PlanPath, Mark>) -> Result<Self, PlanError> {
        match marks.get(&PlanPath::root()) {
            None => return Err(PlanError::Malformed("missing root".into())),
            Some(Mark::Inf) => return Err(PlanError::RootNotOne),
            Some(Mark::One) => {}
        }
        for path in marks.keys() {
            if let Some(parent) = path.parent() {
                if !marks.contains_key(&parent) {
                    return Err(PlanError::Malformed(format!("parent of {path} missing")));
                }
                let last = *path.indices().last().expect("non-root");
                if last > 0 && !marks.contains_key(&parent.child(last - 1)) {
                    return Err(PlanError::Malformed(format!("branch indices under {parent} are not consecutive")));
                }
            }
        }
        Ok(TreePlan { marks })
    }

    /// The one-node plan `(1)`.
    pub fn trivial() -> Self {
        TreePlan { marks: BTreeMap::from([(PlanPath::root(), Mark::One)]) }
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    /// Plan nodes in preorder.
    pub fn nodes(&self) -> impl Iterator<Item = &PlanPath> {
        self.marks.keys()
    }

    pub fn marks(&self) -> &BTreeMap<PlanPath, Mark> {
        &self.marks
    }

    pub fn contains(&self, sigma: &PlanPath) -> bool {
        self.marks.contains_key(sigma)
    }

    pub fn mark(&self, sigma: &PlanPath) -> Option<Mark> {
        self.marks.get(sigma).copied()
    }

    pub fn require(&self, sigma: &PlanPath) -> Result<Mark, PlanError> {
        self.mark(sigma).ok_or_else(|| PlanError::UnknownNode(sigma.clone()))
    }

    pub fn children(&self, sigma: &PlanPath) -> Vec<PlanPath> {
        (0u32..).map(|i| sigma.child(i)).take_while(|c| self.marks.contains_key(c)).collect()
    }

    /// Nodes marked `inf`.
    pub fn inf_nodes(&self) -> impl Iterator<Item = &PlanPath> {
        self.marks.iter().filter(|(_, m)| **m == Mark::Inf).map(|(p, _)| p)
    }

    /// Mark-preserving canonical code; equal codes iff the plans are isomorphic.
    pub fn canonical_code(&self) -> String {
        self.code_at(&PlanPath::root())
    }

    fn code_at(&self, sigma: &PlanPath) -> String {
        let mut kids: Vec<String> = self.children(sigma).iter().map(|c| self.code_at(c)).collect();
        kids.sort_unstable();
        let mark = match self.marks[sigma] {
            Mark::One => "1",
            Mark::Inf => "i",
        };
        format!("{mark}({})", kids.concat())
    }

    /// Rebuilds the plan with children sorted by canonical code, so
    /// isomorphic plans print identically.
    pub fn normalized(&self) -> TreePlan {
        let mut marks = BTreeMap::new();
        self.normalize_into(&PlanPath::root(), &PlanPath::root(), &mut marks);
        TreePlan { marks }
    }

    fn normalize_into(&self, from: &PlanPath, to: &PlanPath, out: &mut BTreeMap<PlanPath, Mark>) {
        out.insert(to.clone(), self.marks[from]);
        let mut kids: Vec<(String, PlanPath)> =
            self.children(from).into_iter().map(|c| (self.code_at(&c), c)).collect();
        kids.sort();
        for (i, (_, c)) in kids.into_iter().enumerate() {
            self.normalize_into(&c, &to.child(i as u32), out);
        }
    }

    /// Number of nodes of `Gamma(n)`, saturating.
    pub fn expansion_size(&self, n: usize) -> u128 {
        self.size_at(&PlanPath::root(), n as u128)
    }

    fn size_at(&self, sigma: &PlanPath, n: u128) -> u128 {
        self.children(sigma).iter().fold(1u128, |acc, c| {
            let mult = if self.marks[c] == Mark::Inf { n } else { 1 };
            acc.saturating_add(mult.saturating_mul(self.size_at(c, n)))
        })
    }

    /// A plan whose root children are the given subplans, re-marked as given.
    pub(crate) fn from_children_lists(root_children: Vec<(Mark, TreePlan)>) -> TreePlan {
        let mut marks = BTreeMap::from([(PlanPath::root(), Mark::One)]);
        for (i, (mark, sub)) in root_children.into_iter().enumerate() {
            let base = PlanPath::root().child(i as u32);
            for (p, m) in sub.marks {
                let mut full = base.0.clone();
                full.extend_from_slice(&p.0);
                let m = if p.is_empty() { mark } else { m };
                marks.insert(PlanPath(full), m);
            }
        }
        TreePlan { marks }
    }
}

impl fmt::Display for TreePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_node(plan: &TreePlan, sigma: &PlanPath, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "({}", plan.marks[sigma])?;
            for c in plan.children(sigma) {
                f.write_str(" ")?;
                write_node(plan, &c, f)?;
            }
            f.write_str(")")
        }
        write_node(self, &PlanPath::root(), f)
    }
}

impl FromStr for TreePlan {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_plan(s)
    }
}

struct PlanParser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl PlanParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.text.len() {
            match self.text[self.pos] {
                b'#' => {
                    while self.pos < self.text.len() && self.text[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn error(&self, message: impl Into<String>) -> PlanError {
        PlanError::Syntax { pos: self.pos, message: message.into() }
    }

    fn expect(&mut self, byte: u8) -> Result<(), PlanError> {
        self.skip_ws();
        if self.text.get(self.pos) == Some(&byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected '{}'", byte as char)))
        }
    }

    fn mark(&mut self, optional: bool) -> Result<Option<Mark>, PlanError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        if rest.starts_with(b"inf") {
            self.pos += 3;
            Ok(Some(Mark::Inf))
        } else if rest.starts_with(b"1") {
            self.pos += 1;
            Ok(Some(Mark::One))
        } else if optional {
            Ok(None)
        } else {
            Err(self.error("expected mark '1' or 'inf'"))
        }
    }

    /// `node := "(" mark { node } ")"`, recording marks under `path`.
    fn node(
        &mut self,
        path: PlanPath,
        optional_marks: bool,
        out: &mut BTreeMap<PlanPath, Mark>,
    ) -> Result<(), PlanError> {
        self.expect(b'(')?;
        let mark = self.mark(optional_marks)?.unwrap_or(Mark::One);
        out.insert(path.clone(), mark);
        let mut i = 0;
        loop {
            self.skip_ws();
            match self.text.get(self.pos) {
                Some(b'(') => {
                    self.node(path.child(i), optional_marks, out)?;
                    i += 1;
                }
                Some(b')') => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(_) => return Err(self.error("expected '(' or ')'")),
                None => return Err(self.error("unexpected end of input")),
            }
        }
    }

    fn finish(&mut self) -> Result<(), PlanError> {
        self.skip_ws();
        if self.pos < self.text.len() {
            Err(self.error("trailing input"))
        } else {
            Ok(())
        }
    }
}

/// Parses `node := "(" mark { node } ")"` with `mark` in `{1, inf}`.
pub fn parse_plan(text: &str) -> Result<TreePlan, PlanError> {
    let mut parser = PlanParser { text: text.as_bytes(), pos: 0 };
    let mut marks = BTreeMap::new();
    parser.node(PlanPath::root(), false, &mut marks)?;
    parser.finish()?;
    TreePlan::from_marks(marks)
}

/// Parses the same grammar with marks optional and ignored, returning the
/// bare tree shape as plan paths.
pub(crate) fn parse_shape(text: &str) -> Result<BTreeSet<PlanPath>, PlanError> {
    let mut parser = PlanParser { text: text.as_bytes(), pos: 0 };
    let mut marks = BTreeMap::new();
    parser.node(PlanPath::root(), true, &mut marks)?;
    parser.finish()?;
    Ok(marks.into_keys().collect())
}

pub fn height(p: &TreePlan) -> usize {
    p.nodes().map(PlanPath::len).max().unwrap_or(0)
}

/// One more than the largest number of `1`-marked children of any node.
pub fn ell(p: &TreePlan) -> usize {
    1 + p.nodes().map(|s| p.children(s).iter().filter(|c| p.mark(c) == Some(Mark::One)).count()).max().unwrap_or(0)
}

/// Number of `inf` nodes on the path from the root to `sigma` (inclusive).
pub fn inf_count(p: &TreePlan, sigma: &PlanPath) -> Result<usize, PlanError> {
    p.require(sigma)?;
    Ok((1..=sigma.len()).filter(|&l| p.mark(&sigma.prefix(l)) == Some(Mark::Inf)).count())
}

/// The plan above `sigma`, re-rooted, with the new root marked `1`.
pub fn subplan(p: &TreePlan, sigma: &PlanPath) -> Result<TreePlan, PlanError> {
    p.require(sigma)?;
    let marks = p
        .marks()
        .iter()
        .filter_map(|(path, m)| {
            path.strip_prefix(sigma).map(|tail| (tail.clone(), if tail.is_empty() { Mark::One } else { *m }))
        })
        .collect();
    TreePlan::from_marks(marks)
}

pub fn plan_isomorphic(p: &TreePlan, q: &TreePlan) -> bool {
    p.len() == q.len() && p.canonical_code() == q.canonical_code()
}

/// The structure `Gamma(n)` with its projection onto the plan.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub plan: TreePlan,
    pub n: usize,
    pub tree: FiniteTree,
}

impl Expansion {
    pub fn mark_of(&self, node: &Node) -> Mark {
        self.plan.mark(&node.projection()).expect("expansion node projects into the plan")
    }

    pub fn is_inf(&self, node: &Node) -> bool {
        !node.is_root() && self.mark_of(node) == Mark::Inf
    }

    pub fn contains(&self, node: &Node) -> bool {
        self.tree.contains(node)
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    /// The lexicographically least node projecting to `sigma`.
    pub fn least_node(&self, sigma: &PlanPath) -> Result<Node, PlanError> {
        self.plan.require(sigma)?;
        let segs = (1..=sigma.len())
            .map(|l| {
                let branch = sigma.indices()[l - 1];
                match self.plan.mark(&sigma.prefix(l)) {
                    Some(Mark::Inf) => Segment::indexed(branch, 0),
                    _ => Segment::star(branch),
                }
            })
            .collect();
        Ok(Node::from_segments(segs))
    }

    /// The `pi`-fiber of `sigma`.
    pub fn fiber(&self, sigma: &PlanPath) -> Vec<Node> {
        self.tree.nodes().iter().filter(|a| &a.projection() == sigma).cloned().collect()
    }
}

pub fn expand(p: &TreePlan, n: usize) -> Result<Expansion, PlanError> {
    expand_with_budget(p, n, default_budget())
}

pub fn expand_with_budget(p: &TreePlan, n: usize, budget: usize) -> Result<Expansion, PlanError> {
    if n == 0 {
        return Err(PlanError::ZeroSize);
    }
    let needed = p.expansion_size(n);
    if needed > budget as u128 {
        return Err(PlanError::BudgetExceeded { needed, budget });
    }
    let mut nodes = Vec::with_capacity(needed as usize);
    let mut stack = vec![(Node::root(), PlanPath::root())];
    while let Some((node, sigma)) = stack.pop() {
        for c in p.children(&sigma).into_iter().rev() {
            let branch = *c.indices().last().expect("child");
            match p.marks[&c] {
                Mark::One => stack.push((node.child(Segment::star(branch)), c)),
                Mark::Inf => {
                    for t in (0..n as u32).rev() {
                        stack.push((node.child(Segment::indexed(branch, t)), c.clone()));
                    }
                }
            }
        }
        nodes.push(node);
    }
    let tree = FiniteTree::from_nodes(nodes, true, Some(n)).expect("expansions are prefix-closed");
    Ok(Expansion { plan: p.clone(), n, tree })
}

/// Relabels every element tag of every node by `perm`.
pub fn induced_automorphism(e: &Expansion, perm: &[u32]) -> Result<NodeMap, PlanError> {
    let mut seen = vec![false; e.n];
    if perm.len() != e.n {
        return Err(PlanError::BadPermutation(e.n));
    }
    for &v in perm {
        if v as usize >= e.n || std::mem::replace(&mut seen[v as usize], true) {
            return Err(PlanError::BadPermutation(e.n));
        }
    }
    Ok(e.tree
        .nodes()
        .iter()
        .map(|a| {
            let image = a
                .segments()
                .iter()
                .map(|s| match s.tag {
                    Tag::Star => *s,
                    Tag::Index(t) => Segment::indexed(s.branch, perm[t as usize]),
                })
                .collect();
            (a.clone(), Node::from_segments(image))
        })
        .collect())
}
