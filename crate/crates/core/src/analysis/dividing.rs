//! The dividing criterion for 1-types.

use std::collections::BTreeMap;

use super::AnalysisError;
use crate::closure::{anchor_in, orbit, tcl, NodeSet};
use crate::logic::{solution_set, Formula, Term};
use crate::plan::Expansion;
use crate::tree::{qftp_key, Node};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DividingVerdict {
    pub divides: bool,
    /// The `inf` node of `tcl(B)` outside `tcl(C)` on the path to `a`.
    pub witness: Option<Node>,
    /// Conjugates of the witness over `C`, the witness first.
    pub conjugates: Vec<Node>,
    /// `k` in the instances `pred^k(x) = e_i`.
    pub depth: usize,
    /// The instances have pairwise disjoint solution sets.
    pub pairwise_inconsistent: bool,
    /// The conjugates pairwise share their quantifier-free type over `C`.
    pub same_type_over_c: bool,
}

impl DividingVerdict {
    fn no() -> Self {
        DividingVerdict {
            divides: false,
            witness: None,
            conjugates: Vec::new(),
            depth: 0,
            pairwise_inconsistent: false,
            same_type_over_c: false,
        }
    }
}

/// Decides whether `tp(a/B)` divides over `C`: it does iff some `inf` node
/// of `tcl(B)` outside `tcl(C)` lies on the path from `[a ^ C]` to `a`.
pub fn check_dividing(e: &Expansion, a: &Node, b: &NodeSet, c: &NodeSet) -> Result<DividingVerdict, AnalysisError> {
    if !c.is_subset(b) {
        return Err(AnalysisError::Domain("C must be a subset of B".into()));
    }
    for x in b.iter().chain([a]) {
        if !e.contains(x) {
            return Err(AnalysisError::Domain(format!("{x} is not in the expansion")));
        }
    }
    let closed_c = tcl(e, c);
    if closed_c.contains(a) {
        return Ok(DividingVerdict::no());
    }
    // Below `a`, tcl(B) is downward closed, so it suffices to look at the
    // first step out of tcl(C), which is an inf node.
    let base = anchor_in(&closed_c, a);
    let first = a.prefix(base.depth() + 1);
    if !tcl(e, b).contains(&first) || !e.is_inf(&first) {
        return Ok(DividingVerdict::no());
    }
    let mut conjugates: Vec<Node> = orbit(e, &first, c).into_iter().filter(|x| *x != first).collect();
    conjugates.insert(0, first.clone());
    let depth = a.depth() - first.depth();
    let instance = Formula::eq(Term::pred_k(Term::var("x"), depth), Term::var("e"));
    let sets: Vec<NodeSet> = conjugates
        .iter()
        .map(|w| solution_set(e, &instance, "x", &BTreeMap::from([("e".to_string(), w.clone())])))
        .collect::<Result<_, _>>()?;
    let pairwise_inconsistent = (0..sets.len()).all(|i| (i + 1..sets.len()).all(|j| sets[i].is_disjoint(&sets[j])));
    let key = |x: &Node| {
        let mut t = vec![x.clone()];
        t.extend(c.iter().cloned());
        qftp_key(&t, true)
    };
    let k0 = key(&first);
    let same_type_over_c = conjugates.iter().all(|x| key(x) == k0);
    Ok(DividingVerdict {
        divides: true,
        witness: Some(first),
        conjugates,
        depth,
        pairwise_inconsistent,
        same_type_over_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{expand, parse_plan};

    fn exp(plan: &str, n: usize) -> Expansion {
        expand(&parse_plan(plan).unwrap(), n).unwrap()
    }

    fn n(s: &str) -> Node {
        s.parse().unwrap()
    }

    #[test]
    fn examples() {
        let e = exp("(1 (inf (inf)))", 3);
        let a = n("0:0/0:1");
        let c: NodeSet = [a.clone()].into();
        assert!(!check_dividing(&e, &a, &c, &c).unwrap().divides);

        let v = check_dividing(&e, &a, &[n("0:0")].into(), &NodeSet::new()).unwrap();
        assert!(v.divides);
        assert_eq!(v.witness, Some(n("0:0")));
        assert_eq!(v.conjugates.len(), 3);
        assert!(v.pairwise_inconsistent && v.same_type_over_c);

        let v = check_dividing(&e, &a, &NodeSet::new(), &NodeSet::new()).unwrap();
        assert!(!v.divides && v.witness.is_none());
    }

    #[test]
    fn deeper_witness_through_one_nodes() {
        let e = exp("(1 (1 (inf (1 (inf)))))", 3);
        let a = n("0:*/0:2/0:*/0:1");
        let v = check_dividing(&e, &a, &[n("0:*/0:2/0:*")].into(), &NodeSet::new()).unwrap();
        assert_eq!(v.witness, Some(n("0:*/0:2")));
        assert_eq!(v.depth, 2);
        assert_eq!(v.conjugates.len(), 3);
    }

    #[test]
    fn containment_is_checked() {
        let e = exp("(1 (inf))", 2);
        let b: NodeSet = [n("0:0")].into();
        let c: NodeSet = [n("0:1")].into();
        assert!(check_dividing(&e, &n("0:0"), &b, &c).is_err());
        assert!(check_dividing(&e, &n("0:7"), &b, &NodeSet::new()).is_err());
    }
}
