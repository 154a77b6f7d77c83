//! Recovering a tree plan from expansions.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::AnalysisError;
use crate::plan::{parse_shape, Mark, TreePlan};
use crate::tree::{FiniteTree, Node, Segment};

/// Child classes of one node: unlabeled code -> (multiplicity, representative).
type Classes = BTreeMap<String, (usize, usize)>;

struct Sample {
    tree: FiniteTree,
    codes: Vec<String>,
}

impl Sample {
    fn new(t: &FiniteTree) -> Self {
        let tree = t.unlabeled();
        let codes = tree.subtree_codes(false).into_iter().map(|c| c.as_str().to_string()).collect();
        Sample { tree, codes }
    }

    fn classes(&self, i: usize) -> Classes {
        let mut out = Classes::new();
        for &c in self.tree.children(i) {
            let e = out.entry(self.codes[c].clone()).or_insert((0, c));
            e.0 += 1;
        }
        out
    }
}

/// Distinct plans kept per subproblem; enough to witness ambiguity.
const MAX_SOLUTIONS: usize = 4;

struct Inferrer<'a> {
    s1: &'a Sample,
    s2: &'a Sample,
    n: usize,
    memo: HashMap<(String, String), Vec<TreePlan>>,
}

struct Candidate {
    plan: TreePlan,
    c1: String,
    c2: String,
}

impl Inferrer<'_> {
    /// Plans `q` with `q(n)` the subtree at `i1` and `q(n+1)` the one at `i2`,
    /// pairwise non-isomorphic, in a fixed order.
    fn infer(&mut self, i1: usize, i2: usize) -> Vec<TreePlan> {
        let key = (self.s1.codes[i1].clone(), self.s2.codes[i2].clone());
        if let Some(r) = self.memo.get(&key) {
            return r.clone();
        }
        let r = self.solve(i1, i2);
        self.memo.insert(key, r.clone());
        r
    }

    fn solve(&mut self, i1: usize, i2: usize) -> Vec<TreePlan> {
        let (k1, k2) = (self.s1.classes(i1), self.s2.classes(i2));
        let mut cands = Vec::new();
        for (c1, &(_, r1)) in &k1 {
            for (c2, &(_, r2)) in &k2 {
                for plan in self.infer(r1, r2) {
                    cands.push(Candidate { plan, c1: c1.clone(), c2: c2.clone() });
                }
            }
        }
        let mut rem1: BTreeMap<String, usize> = k1.iter().map(|(c, &(m, _))| (c.clone(), m)).collect();
        let mut rem2: BTreeMap<String, usize> = k2.iter().map(|(c, &(m, _))| (c.clone(), m)).collect();
        let mut found = Vec::new();
        let mut assign = vec![(0, 0); cands.len()];
        search(&cands, 0, self.n, &mut rem1, &mut rem2, &mut assign, &mut found);
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for sol in found {
            let mut children = Vec::new();
            for (cand, &(ones, infs)) in cands.iter().zip(&sol) {
                children.extend(std::iter::repeat_n((Mark::One, cand.plan.clone()), ones));
                children.extend(std::iter::repeat_n((Mark::Inf, cand.plan.clone()), infs));
            }
            let plan = TreePlan::from_children_lists(children).normalized();
            if seen.insert(plan.canonical_code()) {
                out.push(plan);
            }
        }
        out
    }
}

/// Depth-first search for `(ones, infs)` per candidate matching every class
/// count in both samples.
fn search(
    cands: &[Candidate],
    j: usize,
    n: usize,
    rem1: &mut BTreeMap<String, usize>,
    rem2: &mut BTreeMap<String, usize>,
    assign: &mut Vec<(usize, usize)>,
    found: &mut Vec<Vec<(usize, usize)>>,
) {
    if found.len() >= MAX_SOLUTIONS * 4 {
        return;
    }
    if j == cands.len() {
        if rem1.values().all(|&v| v == 0) && rem2.values().all(|&v| v == 0) {
            found.push(assign.clone());
        }
        return;
    }
    let c = &cands[j];
    let (r1, r2) = (rem1[&c.c1], rem2[&c.c2]);
    for infs in 0..=r1 / n {
        for ones in 0..=r1 - infs * n {
            let (u1, u2) = (ones + infs * n, ones + infs * (n + 1));
            if u2 > r2 {
                break;
            }
            // The last candidate touching a class must exhaust it.
            let last1 = !cands[j + 1..].iter().any(|d| d.c1 == c.c1);
            let last2 = !cands[j + 1..].iter().any(|d| d.c2 == c.c2);
            if (last1 && u1 != r1) || (last2 && u2 != r2) {
                continue;
            }
            *rem1.get_mut(&c.c1).expect("class") -= u1;
            *rem2.get_mut(&c.c2).expect("class") -= u2;
            assign[j] = (ones, infs);
            search(cands, j + 1, n, rem1, rem2, assign, found);
            *rem1.get_mut(&c.c1).expect("class") += u1;
            *rem2.get_mut(&c.c2).expect("class") += u2;
        }
    }
    assign[j] = (0, 0);
}

/// Result of two-sample inference.
#[derive(Clone, Debug)]
pub struct Inference {
    pub plan: TreePlan,
    /// The size parameter of the first sample.
    pub n: usize,
    /// Every size parameter that admits a consistent plan; more than one
    /// means the samples alone do not determine the plan.
    pub consistent_ns: Vec<usize>,
    /// A non-isomorphic plan fits the samples as well.
    pub ambiguous: bool,
}

/// Every plan (up to a small cap, pairwise non-isomorphic) whose expansions
/// at `n` and `n + 1` match the samples.
pub fn consistent_plans(t1: &FiniteTree, t2: &FiniteTree, n: usize) -> Result<Vec<TreePlan>, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::Inconsistent("size parameter must be at least 1".into()));
    }
    let (s1, s2) = (Sample::new(t1), Sample::new(t2));
    let mut inf = Inferrer { s1: &s1, s2: &s2, n, memo: HashMap::new() };
    let all = inf.infer(0, 0);
    if all.is_empty() {
        return Err(AnalysisError::Inconsistent(describe_failure(&s1, &s2, n)));
    }
    Ok(all.into_iter().take(MAX_SOLUTIONS).collect())
}

/// Infers the plan assuming `t1 = Gamma(n)` and `t2 = Gamma(n + 1)`. The flag
/// is set when a non-isomorphic plan fits the samples too.
pub fn infer_plan_with_n(t1: &FiniteTree, t2: &FiniteTree, n: usize) -> Result<(TreePlan, bool), AnalysisError> {
    let mut all = consistent_plans(t1, t2, n)?;
    let ambiguous = all.len() > 1;
    Ok((all.swap_remove(0), ambiguous))
}

fn describe_failure(s1: &Sample, s2: &Sample, n: usize) -> String {
    let show = |k: &Classes| k.iter().map(|(c, (m, _))| format!("{m}x{c}")).collect::<Vec<_>>().join(" ");
    format!(
        "no plan fits the root classes [{}] at n={n} and [{}] at n={}",
        show(&s1.classes(0)),
        show(&s2.classes(0)),
        n + 1
    )
}

/// Two-sample inference from `Gamma(n)` and `Gamma(n + 1)`.
///
/// The first sample's size parameter is used when it carries one. Otherwise
/// every `n` up to the sample size is tried, and the largest consistent one
/// wins, giving the plan with the fewest nodes.
pub fn infer_plan_report(t1: &FiniteTree, t2: &FiniteTree) -> Result<Inference, AnalysisError> {
    if let Some(n) = t1.size_param() {
        if let Some(m) = t2.size_param() {
            if m != n + 1 {
                return Err(AnalysisError::Inconsistent(format!("samples have sizes {n} and {m}, not n and n+1")));
            }
        }
        let (plan, ambiguous) = infer_plan_with_n(t1, t2, n)?;
        return Ok(Inference { plan, n, consistent_ns: vec![n], ambiguous });
    }
    let mut hits = Vec::new();
    let mut last_err = None;
    for n in 1..=t1.len().max(1) {
        match infer_plan_with_n(t1, t2, n) {
            Ok(r) => hits.push((n, r)),
            Err(e) => last_err = Some(e),
        }
    }
    let consistent_ns: Vec<usize> = hits.iter().map(|(n, _)| *n).collect();
    match hits.pop() {
        Some((n, (plan, ambiguous))) => Ok(Inference { plan, n, consistent_ns, ambiguous }),
        None => Err(last_err.unwrap_or_else(|| AnalysisError::Inconsistent("empty sample".into()))),
    }
}

pub fn infer_plan(t1: &FiniteTree, t2: &FiniteTree) -> Result<TreePlan, AnalysisError> {
    infer_plan_report(t1, t2).map(|r| r.plan)
}

/// Single-sample heuristic: a child class occurring more than `threshold`
/// times becomes one `inf` child, otherwise that many `1` children.
pub fn infer_plan_threshold(t: &FiniteTree, threshold: usize) -> TreePlan {
    fn at(s: &Sample, i: usize, threshold: usize) -> TreePlan {
        let mut children = Vec::new();
        for (mult, rep) in s.classes(i).into_values() {
            let sub = at(s, rep, threshold);
            if mult > threshold {
                children.push((Mark::Inf, sub));
            } else {
                children.extend(std::iter::repeat_n((Mark::One, sub), mult));
            }
        }
        TreePlan::from_children_lists(children).normalized()
    }
    at(&Sample::new(t), 0, threshold.max(1))
}

/// Reads an unlabeled tree: either the plan grammar with marks optional and
/// ignored, or one parent index per line with `-1` for the root.
pub fn parse_unlabeled_tree(text: &str) -> Result<FiniteTree, AnalysisError> {
    let body = text.trim_start();
    if body.starts_with('(') {
        let shape = parse_shape(body)?;
        let nodes =
            shape.into_iter().map(|p| Node::from_segments(p.indices().iter().map(|&b| Segment::star(b)).collect()));
        return FiniteTree::from_nodes(nodes, false, None).map_err(AnalysisError::from);
    }
    let mut parents = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: i64 =
            line.parse().map_err(|_| AnalysisError::Parse(format!("line {}: expected a parent index", lineno + 1)))?;
        parents.push(v);
    }
    let roots: Vec<usize> = (0..parents.len()).filter(|&i| parents[i] < 0).collect();
    if roots.len() != 1 {
        return Err(AnalysisError::Parse(format!("expected exactly one root, found {}", roots.len())));
    }
    let mut children = vec![Vec::new(); parents.len()];
    for (i, &p) in parents.iter().enumerate() {
        if p >= 0 {
            let p = p as usize;
            if p >= parents.len() {
                return Err(AnalysisError::Parse(format!("node {i} has unknown parent {p}")));
            }
            children[p].push(i);
        }
    }
    let mut nodes = vec![None; parents.len()];
    let mut stack = vec![(roots[0], Node::root())];
    while let Some((i, node)) = stack.pop() {
        for (b, &c) in children[i].iter().enumerate() {
            stack.push((c, node.child(Segment::star(b as u32))));
        }
        nodes[i] = Some(node);
    }
    let nodes: Vec<Node> = nodes
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| AnalysisError::Parse("parent indices contain a cycle".into()))?;
    FiniteTree::from_nodes(nodes, false, None).map_err(AnalysisError::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{expand, parse_plan, plan_isomorphic};

    fn tree(plan: &str, n: usize) -> FiniteTree {
        expand(&parse_plan(plan).unwrap(), n).unwrap().tree
    }

    fn plain(plan: &str, n: usize) -> FiniteTree {
        let t = tree(plan, n);
        FiniteTree::from_nodes(t.nodes().iter().cloned(), false, None).unwrap()
    }

    fn iso(p: &TreePlan, s: &str) -> bool {
        plan_isomorphic(p, &parse_plan(s).unwrap())
    }

    #[test]
    fn single_node() {
        let t = parse_unlabeled_tree("(1)").unwrap();
        assert!(iso(&infer_plan(&t, &t).unwrap(), "(1)"));
        assert!(iso(&infer_plan_threshold(&t, 4), "(1)"));
    }

    #[test]
    fn round_trips() {
        for p in [
            "(1 (inf))",
            "(1 (1 (inf)) (inf))",
            "(1 (inf (inf)))",
            "(1 (1) (inf))",
            "(1 (1 (1) (inf (1))) (inf (1 (1))))",
        ] {
            for n in 1..=3 {
                let got = infer_plan(&tree(p, n), &tree(p, n + 1)).unwrap();
                assert!(iso(&got, p), "{p} n={n}: got {got}");
            }
        }
    }

    #[test]
    fn two_samples_do_not_always_determine_the_plan() {
        let (p, q) = ("(1 (inf (1) (1)) (1 (inf)))", "(1 (1 (1) (1)) (inf (inf)))");
        let code = |t: &FiniteTree| crate::tree::canonical(&t.unlabeled(), false);
        assert_eq!(code(&tree(p, 1)), code(&tree(q, 1)));
        assert_eq!(code(&tree(p, 2)), code(&tree(q, 2)));
        let (_, ambiguous) = infer_plan_with_n(&tree(p, 1), &tree(p, 2), 1).unwrap();
        assert!(ambiguous);
        let all = consistent_plans(&tree(p, 1), &tree(p, 2), 1).unwrap();
        assert!(all.iter().any(|x| iso(x, p)) && all.iter().any(|x| iso(x, q)));
        for n in 2..=3 {
            let got = infer_plan(&tree(p, n), &tree(p, n + 1)).unwrap();
            assert!(iso(&got, p), "n={n}: got {got}");
        }
    }

    #[test]
    fn unknown_size_is_ambiguous() {
        // PLAN_A at n=2 and (1 (1) (inf)) at n=1 give the same samples.
        let r = infer_plan_report(&plain("(1 (inf))", 2), &plain("(1 (inf))", 3)).unwrap();
        assert_eq!(r.consistent_ns, vec![1, 2]);
        assert!(iso(&r.plan, "(1 (inf))"));
        let alt = infer_plan_with_n(&plain("(1 (inf))", 2), &plain("(1 (inf))", 3), 1).unwrap().0;
        assert!(iso(&alt, "(1 (1) (inf))"));
    }

    #[test]
    fn inconsistent_samples() {
        let err = infer_plan(&tree("(1 (inf))", 3), &tree("(1 (inf (inf)))", 2)).unwrap_err();
        assert!(matches!(err, AnalysisError::Inconsistent(_)));
        let shrink = infer_plan_with_n(&plain("(1 (inf))", 3), &plain("(1 (inf))", 2), 3).unwrap_err();
        assert!(shrink.to_string().contains("root classes"));
    }

    #[test]
    fn threshold_examples() {
        assert!(iso(&infer_plan_threshold(&tree("(1 (inf))", 5), 3), "(1 (inf))"));
        assert!(iso(&infer_plan_threshold(&tree("(1 (inf))", 2), 3), "(1 (1) (1))"));
        assert!(iso(&infer_plan_threshold(&tree("(1 (1 (inf)) (inf))", 4), 3), "(1 (1 (inf)) (inf))"));
        // All five root children of this plan look alike at n=4.
        assert!(iso(&infer_plan_threshold(&tree("(1 (1 (inf)) (inf (inf)))", 4), 3), "(1 (inf (inf)))"));
    }

    #[test]
    fn tree_formats() {
        let a = parse_unlabeled_tree("(1 (1) (inf (1)))").unwrap();
        let b = parse_unlabeled_tree("( () (()) )").unwrap();
        let c = parse_unlabeled_tree("-1\n0\n0\n2\n").unwrap();
        let code = |t: &FiniteTree| crate::tree::canonical(t, false);
        assert_eq!(code(&a), code(&b));
        assert_eq!(code(&a), code(&c));
        assert!(parse_unlabeled_tree("-1\n-1\n").is_err());
        assert!(parse_unlabeled_tree("-1\n2\n1\n").is_err());
        assert!(parse_unlabeled_tree("-1\nx\n").is_err());
    }
}
