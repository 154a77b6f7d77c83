//! Isolating quantifier-free formulas for 1-types over a finite set.

use std::collections::BTreeMap;

use super::ast::{Formula, Term};
use crate::closure::{downset, tcl, NodeSet};
use crate::plan::Expansion;
use crate::tree::Node;

/// Which position `a` has relative to the parameter set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrincipalCase {
    /// `a` is a parameter.
    Member,
    /// `a` is a proper prefix of a parameter.
    BelowParameter,
    /// `a` is in the tree closure but not below a parameter.
    InClosure,
    /// `a` is outside the tree closure.
    Outside,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrincipalFormula {
    /// Free variable `x`.
    pub formula: Formula,
    /// Parameter names used by `formula` and their values.
    pub params: BTreeMap<String, Node>,
    pub case: PrincipalCase,
}

pub const FREE_VAR: &str = "x";

/// Names parameters `b0, b1, ...` in node order.
pub fn parameter_names(b: &NodeSet) -> Vec<(String, Node)> {
    b.iter().enumerate().map(|(i, n)| (format!("b{i}"), n.clone())).collect()
}

/// Builds a formula `theta(x)` whose solution set in `e` is exactly the orbit
/// of `a` over `b`.
///
/// When `a` lies outside `tcl(B)` with anchor `e0`, the basic
/// `pred^k(x) = e0 & P[pi(a)](x)` also catches nodes that pass through a
/// prefix of some parameter; those branches are excluded by one negated
/// conjunct each.
pub fn principal_formula(e: &Expansion, a: &Node, b: &NodeSet) -> PrincipalFormula {
    let named = parameter_names(b);
    let x = || Term::var(FREE_VAR);
    let mut params = BTreeMap::new();
    let param_term = |name: &str, node: &Node, params: &mut BTreeMap<String, Node>| {
        if node.is_root() {
            Term::Eps
        } else {
            params.insert(name.to_string(), node.clone());
            Term::var(name)
        }
    };

    if let Some((name, _)) = named.iter().find(|(_, n)| n == a) {
        params.insert(name.clone(), a.clone());
        return PrincipalFormula { formula: Formula::eq(x(), Term::var(name)), params, case: PrincipalCase::Member };
    }
    if let Some((name, c)) = named.iter().find(|(_, n)| a.lt(n)) {
        params.insert(name.clone(), c.clone());
        let k = c.depth() - a.depth();
        return PrincipalFormula {
            formula: Formula::eq(Term::pred_k(Term::var(name), k), x()),
            params,
            case: PrincipalCase::BelowParameter,
        };
    }

    let down = downset(e, b);
    let closed = tcl(e, b);
    let label = Formula::label(a.projection(), x());
    if closed.contains(a) {
        let base = (0..=a.depth()).rev().map(|d| a.prefix(d)).find(|p| down.contains(p)).unwrap_or_else(Node::root);
        let k = a.depth() - base.depth();
        let t = param_term("b", &base, &mut params);
        return PrincipalFormula {
            formula: Formula::and(Formula::eq(Term::pred_k(x(), k), t), label),
            params,
            case: PrincipalCase::InClosure,
        };
    }

    let anchor = crate::closure::anchor_in(&closed, a);
    let k = a.depth() - anchor.depth();
    let first = a.prefix(anchor.depth() + 1);
    let t = param_term("e", &anchor, &mut params);
    let mut parts = vec![Formula::eq(Term::pred_k(x(), k), t), label];
    // Children of the anchor on a parameter's path, with the same label as
    // the first step towards `a`, each written as a prefix of that parameter.
    let first_label = first.projection();
    let mut excluded = NodeSet::new();
    for (name, c) in &named {
        if c.depth() <= anchor.depth() {
            continue;
        }
        let d = c.prefix(anchor.depth() + 1);
        if d.pred() == anchor && d.projection() == first_label && excluded.insert(d.clone()) {
            params.insert(name.clone(), c.clone());
            let j = c.depth() - d.depth();
            parts.push(Formula::not(Formula::eq(Term::pred_k(x(), k - 1), Term::pred_k(Term::var(name), j))));
        }
    }
    PrincipalFormula { formula: Formula::conj(parts).expect("non-empty"), params, case: PrincipalCase::Outside }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::orbit;
    use crate::logic::eval::solution_set;
    use crate::logic::parse_formula;
    use crate::plan::{expand, parse_plan, TreePlan};
    use crate::tree::qftp_key;
    use proptest::prelude::*;

    fn n(s: &str) -> Node {
        s.parse().unwrap()
    }

    fn exp(plan: &str, size: usize) -> Expansion {
        expand(&parse_plan(plan).unwrap(), size).unwrap()
    }

    fn solutions(e: &Expansion, p: &PrincipalFormula) -> NodeSet {
        solution_set(e, &p.formula, FREE_VAR, &p.params).unwrap()
    }

    #[test]
    fn member_case() {
        let e = exp("(1 (inf (inf)))", 2);
        let b: NodeSet = [n("0:1/0:0")].into();
        let p = principal_formula(&e, &n("0:1/0:0"), &b);
        assert_eq!(p.case, PrincipalCase::Member);
        assert_eq!(p.formula.to_string(), "x = b0");
        assert_eq!(solutions(&e, &p), b);
    }

    #[test]
    fn anchored_at_root() {
        let e = exp("(1 (1 (inf)) (inf))", 2);
        let p = principal_formula(&e, &n("0:*"), &NodeSet::new());
        assert_eq!(p.case, PrincipalCase::InClosure);
        assert_eq!(p.formula, parse_formula("pred(x) = eps & P[0](x)").unwrap());
        assert_eq!(solutions(&e, &p).len(), 1);
    }

    #[test]
    fn outside_closure_counts_relative_fiber() {
        let e = exp("(1 (inf (inf)))", 3);
        let p = principal_formula(&e, &n("0:0/0:1"), &[n("0:0")].into());
        assert_eq!(p.case, PrincipalCase::Outside);
        assert_eq!(p.formula, parse_formula("pred(x) = e & P[0.0](x)").unwrap());
        assert_eq!(p.params["e"], n("0:0"));
        assert_eq!(solutions(&e, &p).len(), 3);
    }

    #[test]
    fn below_parameter() {
        let e = exp("(1 (inf (inf)))", 2);
        let p = principal_formula(&e, &n("0:1"), &[n("0:1/0:0")].into());
        assert_eq!(p.case, PrincipalCase::BelowParameter);
        assert_eq!(p.formula.to_string(), "pred(b0) = x");
        assert_eq!(solutions(&e, &p), [n("0:1")].into());
    }

    #[test]
    fn sibling_parameters_are_excluded() {
        let e = exp("(1 (inf (inf)))", 3);
        let b: NodeSet = [n("0:0/0:0"), n("0:2")].into();
        let a = n("0:1/0:1");
        let p = principal_formula(&e, &a, &b);
        assert_eq!(p.case, PrincipalCase::Outside);
        assert_eq!(p.formula.to_string(), "((pred^2(x) = eps & P[0.0](x)) & !(pred(x) = pred(b0))) & !(pred(x) = b1)");
        assert_eq!(solutions(&e, &p), orbit(&e, &a, &b));
        assert_eq!(solutions(&e, &p).len(), 3);
    }

    fn corpus() -> Vec<TreePlan> {
        ["(1 (inf (inf)))", "(1 (inf) (inf))", "(1 (1 (inf)) (inf))", "(1 (inf (1) (inf)) (1 (inf)))"]
            .iter()
            .map(|p| parse_plan(p).unwrap())
            .collect()
    }

    proptest! {
        #[test]
        fn isolates_the_orbit(p in 0usize..4, size in 1usize..4, b in prop::collection::vec(0usize..1000, 0..3), a in 0usize..1000) {
            let e = expand(&corpus()[p], size).unwrap();
            let b: NodeSet = b.iter().map(|i| e.tree.node(i % e.len()).clone()).collect();
            let a = e.tree.node(a % e.len()).clone();
            let pf = principal_formula(&e, &a, &b);
            prop_assert!(pf.formula.is_quantifier_free());
            prop_assert_eq!(solutions(&e, &pf), orbit(&e, &a, &b));
        }

        /// Equal quantifier-free types over `B` give equal solution sets.
        #[test]
        fn type_determines_formula(p in 0usize..4, b in prop::collection::vec(0usize..1000, 0..3), a in 0usize..1000, a2 in 0usize..1000) {
            let e = expand(&corpus()[p], 3).unwrap();
            let b: NodeSet = b.iter().map(|i| e.tree.node(i % e.len()).clone()).collect();
            let a = e.tree.node(a % e.len()).clone();
            let a2 = e.tree.node(a2 % e.len()).clone();
            let key = |x: &Node| {
                let mut t = vec![x.clone()];
                t.extend(b.iter().cloned());
                qftp_key(&t, true)
            };
            if key(&a) == key(&a2) {
                prop_assert_eq!(
                    solutions(&e, &principal_formula(&e, &a, &b)),
                    solutions(&e, &principal_formula(&e, &a2, &b))
                );
            }
        }
    }
}
