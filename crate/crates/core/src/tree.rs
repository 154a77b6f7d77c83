//! Finite trees as structures in the signature `{<=, eps, meet, pred}`.
//!
//! A node is identified by its full path from the root: a sequence of
//! segments `(branch, tag)` where the tag is either `*` (the node copies a
//! plan node marked `1`) or an element index `0..n` (the node is one of the
//! `n` copies of a plan node marked `inf`). With that representation the
//! order is prefix order, `pred` drops the last segment and `meet` is the
//! longest common prefix, so none of the structure has to be stored.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::plan::PlanPath;

/// Partial or total maps between node sets (embeddings, automorphisms).
pub type NodeMap = BTreeMap<Node, Node>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("node {0} is not in the tree")]
    UnknownNode(Node),
    #[error("malformed node text {text:?}: {reason}")]
    BadNodeText { text: String, reason: String },
    #[error("node set is not a tree: {0}")]
    NotATree(String),
    #[error("inconsistent partial map: {0}")]
    InconsistentPartial(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Star,
    Index(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Segment {
    pub branch: u32,
    pub tag: Tag,
}

impl Segment {
    pub fn star(branch: u32) -> Self {
        Segment { branch, tag: Tag::Star }
    }

    pub fn indexed(branch: u32, index: u32) -> Self {
        Segment { branch, tag: Tag::Index(index) }
    }
}

/// A node of a finite tree, named by its path from the root.
///
/// The derived ordering is lexicographic on segments, which is a preorder
/// traversal of the tree: every node sorts after all of its ancestors.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node(Vec<Segment>);

impl Node {
    pub fn root() -> Self {
        Node(Vec::new())
    }

    pub fn from_segments(segments: Vec<Segment>) -> Self {
        Node(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn last(&self) -> Option<Segment> {
        self.0.last().copied()
    }

    /// `pred`, with `pred(eps) = eps`.
    pub fn pred(&self) -> Node {
        self.predk(1)
    }

    /// Drops the last `k` segments, clamping at the root.
    pub fn predk(&self, k: usize) -> Node {
        let keep = self.0.len().saturating_sub(k);
        Node(self.0[..keep].to_vec())
    }

    /// Ancestor (or self) at the given depth.
    pub fn prefix(&self, depth: usize) -> Node {
        Node(self.0[..depth.min(self.0.len())].to_vec())
    }

    pub fn child(&self, segment: Segment) -> Node {
        let mut segs = self.0.clone();
        segs.push(segment);
        Node(segs)
    }

    /// Tree order: `self <= other` iff `self` is a prefix of `other`.
    pub fn le(&self, other: &Node) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn lt(&self, other: &Node) -> bool {
        self.0.len() < other.0.len() && self.le(other)
    }

    pub fn meet(&self, other: &Node) -> Node {
        let common = self.0.iter().zip(other.0.iter()).take_while(|(a, b)| a == b).count();
        Node(self.0[..common].to_vec())
    }

    /// The plan path this node projects to (the branch indices).
    pub fn projection(&self) -> PlanPath {
        PlanPath::new(self.0.iter().map(|s| s.branch).collect())
    }

    /// Appends the segments of `suffix` to this node.
    pub fn concat(&self, suffix: &[Segment]) -> Node {
        let mut segs = self.0.clone();
        segs.extend_from_slice(suffix);
        Node(segs)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "eps");
        }
        for (i, seg) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "/")?;
            }
            match seg.tag {
                Tag::Star => write!(f, "{}:*", seg.branch)?,
                Tag::Index(t) => write!(f, "{}:{}", seg.branch, t)?,
            }
        }
        Ok(())
    }
}

impl FromStr for Node {
    type Err = TreeError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let trimmed = text.trim();
        if trimmed == "eps" {
            return Ok(Node::root());
        }
        let bad = |reason: &str| TreeError::BadNodeText { text: text.to_string(), reason: reason.to_string() };
        let mut segs = Vec::new();
        for part in trimmed.split('/') {
            let (branch, tag) = part.split_once(':').ok_or_else(|| bad("segment needs branch:tag"))?;
            let branch: u32 = branch.trim().parse().map_err(|_| bad("branch must be a natural"))?;
            let tag = match tag.trim() {
                "*" => Tag::Star,
                t => Tag::Index(t.parse().map_err(|_| bad("tag must be '*' or a natural"))?),
            };
            segs.push(Segment { branch, tag });
        }
        Ok(Node(segs))
    }
}

/// Canonical code of a rooted (optionally labeled) tree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm(String);

impl CanonicalForm {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A finite prefix-closed set of nodes.
///
/// Nodes are stored in preorder, so the root has index 0 and every parent
/// index is smaller than the indices of its children. When `labeled` is set,
/// each node carries its projection as the label `P_sigma`.
#[derive(Clone, Debug)]
pub struct FiniteTree {
    nodes: Vec<Node>,
    index: HashMap<Node, usize>,
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    labeled: bool,
    size_param: Option<usize>,
}

impl FiniteTree {
    pub fn from_nodes<I>(nodes: I, labeled: bool, size_param: Option<usize>) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = Node>,
    {
        let set: BTreeSet<Node> = nodes.into_iter().collect();
        if !set.contains(&Node::root()) {
            return Err(TreeError::NotATree("missing root".into()));
        }
        let nodes: Vec<Node> = set.into_iter().collect();
        let index: HashMap<Node, usize> = nodes.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let mut parent = vec![0; nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        for (i, node) in nodes.iter().enumerate().skip(1) {
            let p = *index.get(&node.pred()).ok_or_else(|| TreeError::NotATree(format!("parent of {node} missing")))?;
            parent[i] = p;
            children[p].push(i);
        }
        Ok(FiniteTree { nodes, index, parent, children, labeled, size_param })
    }

    /// A tree with the same shape but without projection labels.
    pub fn unlabeled(&self) -> FiniteTree {
        FiniteTree { labeled: false, size_param: None, ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn index_of(&self, node: &Node) -> Option<usize> {
        self.index.get(node).copied()
    }

    pub fn contains(&self, node: &Node) -> bool {
        self.index.contains_key(node)
    }

    pub fn require(&self, node: &Node) -> Result<usize, TreeError> {
        self.index_of(node).ok_or_else(|| TreeError::UnknownNode(node.clone()))
    }

    pub fn parent(&self, i: usize) -> usize {
        self.parent[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn depth(&self, i: usize) -> usize {
        self.nodes[i].depth()
    }

    pub fn is_labeled(&self) -> bool {
        self.labeled
    }

    pub fn size_param(&self) -> Option<usize> {
        self.size_param
    }

    pub fn label(&self, i: usize) -> Option<PlanPath> {
        self.labeled.then(|| self.nodes[i].projection())
    }

    pub fn height(&self) -> usize {
        self.nodes.iter().map(Node::depth).max().unwrap_or(0)
    }

    pub fn ancestor_at_depth(&self, mut i: usize, depth: usize) -> usize {
        while self.depth(i) > depth {
            i = self.parent[i];
        }
        i
    }

    pub fn meet_index(&self, mut i: usize, mut j: usize) -> usize {
        while self.depth(i) > self.depth(j) {
            i = self.parent[i];
        }
        while self.depth(j) > self.depth(i) {
            j = self.parent[j];
        }
        while i != j {
            i = self.parent[i];
            j = self.parent[j];
        }
        i
    }

    /// Canonical codes of every subtree, indexed like `nodes()`.
    pub fn subtree_codes(&self, use_labels: bool) -> Vec<CanonicalForm> {
        let use_labels = use_labels && self.labeled;
        let mut codes: Vec<String> = vec![String::new(); self.len()];
        for i in (0..self.len()).rev() {
            let mut kids: Vec<&str> = self.children[i].iter().map(|&c| codes[c].as_str()).collect();
            kids.sort_unstable();
            let mut code = String::new();
            if use_labels {
                code.push('<');
                code.push_str(&self.nodes[i].projection().to_string());
                code.push('>');
            }
            code.push('(');
            code.push_str(&kids.concat());
            code.push(')');
            codes[i] = code;
        }
        codes.into_iter().map(CanonicalForm).collect()
    }
}

pub fn meet(t: &FiniteTree, a: &Node, b: &Node) -> Result<Node, TreeError> {
    t.require(a)?;
    t.require(b)?;
    Ok(a.meet(b))
}

pub fn predk(_t: &FiniteTree, a: &Node, k: usize) -> Node {
    a.predk(k)
}

/// AHU-style code: sorted child codes, with projection labels interleaved
/// when requested. Equal codes iff the rooted (labeled) trees are isomorphic.
pub fn canonical(t: &FiniteTree, use_labels: bool) -> CanonicalForm {
    t.subtree_codes(use_labels).swap_remove(0)
}

/// Canonical code of a prefix-closed node set with position markers.
fn encode_marked(set: &BTreeSet<Node>, use_labels: bool, marks: &HashMap<&Node, Vec<usize>>) -> CanonicalForm {
    let mut pending: HashMap<&Node, Vec<String>> = HashMap::new();
    let mut root_code = String::new();
    for node in set.iter().rev() {
        let mut kids = pending.remove(node).unwrap_or_default();
        kids.sort_unstable();
        let mut code = String::new();
        if use_labels {
            code.push('<');
            code.push_str(&node.projection().to_string());
            code.push('>');
        }
        if let Some(ms) = marks.get(node) {
            code.push('{');
            for (k, m) in ms.iter().enumerate() {
                if k > 0 {
                    code.push(',');
                }
                code.push_str(&m.to_string());
            }
            code.push('}');
        }
        code.push('(');
        code.push_str(&kids.concat());
        code.push(')');
        if node.is_root() {
            root_code = code;
        } else {
            let parent = set.get(&node.pred()).expect("prefix-closed");
            pending.entry(parent).or_default().push(code);
        }
    }
    CanonicalForm(root_code)
}

/// The substructure generated by a tuple under `pred`, `meet` and `eps`,
/// together with the positions of the tuple entries in it.
#[derive(Clone, Debug)]
pub struct TupleType {
    pub generated: FiniteTree,
    /// `positions[i]` is the index in `generated` of the i-th tuple entry.
    pub positions: Vec<usize>,
    pub labeled: bool,
    code: CanonicalForm,
}

impl TupleType {
    pub fn code(&self) -> &CanonicalForm {
        &self.code
    }
}

impl PartialEq for TupleType {
    fn eq(&self, other: &Self) -> bool {
        self.code == other.code
    }
}

impl Eq for TupleType {}

fn generated_set(tuple: &[Node]) -> BTreeSet<Node> {
    let mut set = BTreeSet::new();
    set.insert(Node::root());
    for a in tuple {
        for d in 0..=a.depth() {
            set.insert(a.prefix(d));
        }
    }
    set
}

/// Canonical key of the quantifier-free type of a tuple, without building
/// the generated substructure as a `FiniteTree`.
pub fn qftp_key(tuple: &[Node], use_labels: bool) -> CanonicalForm {
    let set = generated_set(tuple);
    let mut marks: HashMap<&Node, Vec<usize>> = HashMap::new();
    for (i, a) in tuple.iter().enumerate() {
        marks.entry(set.get(a).expect("member")).or_default().push(i);
    }
    encode_marked(&set, use_labels, &marks)
}

pub fn qftp(t: &FiniteTree, tuple: &[Node], use_labels: bool) -> Result<TupleType, TreeError> {
    for a in tuple {
        t.require(a)?;
    }
    let use_labels = use_labels && t.is_labeled();
    let code = qftp_key(tuple, use_labels);
    let generated = FiniteTree::from_nodes(generated_set(tuple), use_labels, None)?;
    let positions = tuple.iter().map(|a| generated.index_of(a).expect("member")).collect();
    Ok(TupleType { generated, positions, labeled: use_labels, code })
}

/// Checks that `map` is an injective map from `src` into `dst` preserving
/// the root, `pred`, `meet`, the order and (when both trees carry them) the
/// labels. With `total` set, the domain must be all of `src`.
pub fn is_embedding(src: &FiniteTree, dst: &FiniteTree, map: &NodeMap, total: bool) -> bool {
    if total && map.len() != src.len() {
        return false;
    }
    let labels = src.is_labeled() && dst.is_labeled();
    let mut seen = BTreeSet::new();
    for (a, b) in map {
        if !src.contains(a) || !dst.contains(b) || !seen.insert(b) {
            return false;
        }
        if a.depth() != b.depth() || (labels && a.projection() != b.projection()) {
            return false;
        }
    }
    if let Some(r) = map.get(&Node::root()) {
        if !r.is_root() {
            return false;
        }
    }
    let entries: Vec<(&Node, &Node)> = map.iter().collect();
    for (i, (a1, b1)) in entries.iter().enumerate() {
        for (a2, b2) in &entries[i + 1..] {
            if a1.meet(a2).depth() != b1.meet(b2).depth() {
                return false;
            }
        }
    }
    true
}

pub fn is_automorphism(t: &FiniteTree, map: &NodeMap) -> bool {
    is_embedding(t, t, map, true)
}

struct EmbeddingSearch<'a> {
    src: &'a FiniteTree,
    dst: &'a FiniteTree,
    labels: bool,
    /// For each source node, the constrained (source, target) pairs in its subtree.
    constraints: Vec<Vec<(usize, usize)>>,
    memo: HashMap<(usize, usize), bool>,
}

impl EmbeddingSearch<'_> {
    fn feasible(&mut self, u: usize, v: usize) -> bool {
        if let Some(&r) = self.memo.get(&(u, v)) {
            return r;
        }
        let r = self.compute(u, v);
        self.memo.insert((u, v), r);
        r
    }

    fn compute(&mut self, u: usize, v: usize) -> bool {
        if self.labels && self.src.node(u).projection() != self.dst.node(v).projection() {
            return false;
        }
        let du = self.src.depth(u);
        if self.constraints[u].iter().any(|&(_, fx)| self.dst.ancestor_at_depth(fx, du) != v) {
            return false;
        }
        if self.src.children(u).len() > self.dst.children(v).len() {
            return false;
        }
        self.match_children(u, v).is_some()
    }

    /// Kuhn's augmenting-path matching of children(u) into children(v).
    fn match_children(&mut self, u: usize, v: usize) -> Option<Vec<usize>> {
        let left: Vec<usize> = self.src.children(u).to_vec();
        let right: Vec<usize> = self.dst.children(v).to_vec();
        let mut adj = vec![Vec::new(); left.len()];
        for (i, &c) in left.iter().enumerate() {
            for (j, &d) in right.iter().enumerate() {
                if self.feasible(c, d) {
                    adj[i].push(j);
                }
            }
        }
        let mut owner: Vec<Option<usize>> = vec![None; right.len()];
        for i in 0..left.len() {
            let mut visited = vec![false; right.len()];
            if !augment(i, &adj, &mut owner, &mut visited) {
                return None;
            }
        }
        let mut assignment = vec![0; left.len()];
        for (j, o) in owner.iter().enumerate() {
            if let Some(i) = o {
                assignment[*i] = right[j];
            }
        }
        Some(assignment)
    }

    fn build(&mut self, u: usize, v: usize, out: &mut NodeMap) {
        out.insert(self.src.node(u).clone(), self.dst.node(v).clone());
        let assignment = self.match_children(u, v).expect("feasible pair");
        let kids = self.src.children(u).to_vec();
        for (c, d) in kids.into_iter().zip(assignment) {
            self.build(c, d, out);
        }
    }
}

fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], visited: &mut [bool]) -> bool {
    for &j in &adj[i] {
        if visited[j] {
            continue;
        }
        visited[j] = true;
        if owner[j].is_none() || augment(owner[j].unwrap(), adj, owner, visited) {
            owner[j] = Some(i);
            return true;
        }
    }
    false
}

/// Searches for an embedding of `src` into `dst` extending `partial`.
///
/// Returns `Ok(None)` when no such embedding exists and an error when the
/// partial map is not itself a structure-preserving injection.
pub fn find_embedding(src: &FiniteTree, dst: &FiniteTree, partial: &NodeMap) -> Result<Option<NodeMap>, TreeError> {
    for (a, b) in partial {
        src.require(a)?;
        dst.require(b)?;
    }
    if !is_embedding(src, dst, partial, false) {
        return Err(TreeError::InconsistentPartial("partial map does not preserve the tree structure".into()));
    }
    let mut constraints = vec![Vec::new(); src.len()];
    for (a, b) in partial {
        let x = src.index_of(a).expect("checked");
        let fx = dst.index_of(b).expect("checked");
        let mut u = x;
        loop {
            constraints[u].push((x, fx));
            if u == 0 {
                break;
            }
            u = src.parent(u);
        }
    }
    let mut search =
        EmbeddingSearch { src, dst, labels: src.is_labeled() && dst.is_labeled(), constraints, memo: HashMap::new() };
    if !search.feasible(0, 0) {
        return Ok(None);
    }
    let mut out = NodeMap::new();
    search.build(0, 0, &mut out);
    Ok(Some(out))
}
