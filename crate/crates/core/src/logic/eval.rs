//! Tarskian model checking over an expansion.
//!
//! Formulas are compiled to a slot-indexed form first. A quantifier whose
//! body forces its variable into a small set (`pred^k(y) = t`, `y <= t`,
//! `P[s](y)` as a conjunct of an existential body or of the antecedent of a
//! universal one) only ranges over that set.

use std::collections::{BTreeMap, HashMap};

use super::ast::{Formula, Term};
use super::LogicError;
use crate::closure::NodeSet;
use crate::plan::{Expansion, PlanPath};
use crate::tree::Node;

#[derive(Clone, Debug)]
enum CTerm {
    Slot(usize),
    Eps,
    Pred(usize, Box<CTerm>),
    Meet(Box<CTerm>, Box<CTerm>),
}

impl CTerm {
    fn uses(&self, slot: usize) -> bool {
        match self {
            CTerm::Slot(s) => *s == slot,
            CTerm::Eps => false,
            CTerm::Pred(_, t) => t.uses(slot),
            CTerm::Meet(a, b) => a.uses(slot) || b.uses(slot),
        }
    }
}

#[derive(Clone, Debug)]
enum Domain {
    All,
    /// Nodes `y` with `pred^k(y) = t`.
    Below(CTerm, usize),
    /// Ancestors of `t`, itself included.
    Above(CTerm),
    Fiber(usize),
}

#[derive(Clone, Debug)]
enum CFormula {
    Eq(CTerm, CTerm),
    Leq(CTerm, CTerm),
    /// `None` when the label is not a plan node; such atoms are false.
    Label(Option<usize>, CTerm),
    Not(Box<CFormula>),
    And(Box<CFormula>, Box<CFormula>),
    Or(Box<CFormula>, Box<CFormula>),
    Implies(Box<CFormula>, Box<CFormula>),
    Exists(Domain, Box<CFormula>),
    Forall(Domain, Box<CFormula>),
}

/// Precomputed index data for evaluating many formulas on one expansion.
pub struct Model<'a> {
    e: &'a Expansion,
    depth: Vec<usize>,
    /// One past the last preorder index of each subtree.
    end: Vec<usize>,
    proj: Vec<usize>,
    plan_ids: HashMap<PlanPath, usize>,
    fibers: Vec<Vec<usize>>,
}

impl<'a> Model<'a> {
    pub fn new(e: &'a Expansion) -> Self {
        let t = &e.tree;
        let plan_ids: HashMap<PlanPath, usize> = e.plan.nodes().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let mut end: Vec<usize> = (1..=t.len()).collect();
        for i in (1..t.len()).rev() {
            let p = t.parent(i);
            end[p] = end[p].max(end[i]);
        }
        let proj: Vec<usize> = t.nodes().iter().map(|a| plan_ids[&a.projection()]).collect();
        let mut fibers = vec![Vec::new(); plan_ids.len()];
        for (i, &p) in proj.iter().enumerate() {
            fibers[p].push(i);
        }
        Model { e, depth: (0..t.len()).map(|i| t.depth(i)).collect(), end, proj, plan_ids, fibers }
    }

    pub fn expansion(&self) -> &Expansion {
        self.e
    }

    fn compile(&self, f: &Formula, scope: &mut Vec<String>) -> Result<CFormula, LogicError> {
        let term = |t: &Term, scope: &Vec<String>| self.compile_term(t, scope);
        Ok(match f {
            Formula::Eq(a, b) => CFormula::Eq(term(a, scope)?, term(b, scope)?),
            Formula::Leq(a, b) => CFormula::Leq(term(a, scope)?, term(b, scope)?),
            Formula::Label(p, t) => {
                if !self.e.plan.contains(p) {
                    return Err(LogicError::UnknownLabel(p.clone()));
                }
                CFormula::Label(self.plan_ids.get(p).copied(), term(t, scope)?)
            }
            Formula::Not(g) => CFormula::Not(Box::new(self.compile(g, scope)?)),
            Formula::And(a, b) => CFormula::And(Box::new(self.compile(a, scope)?), Box::new(self.compile(b, scope)?)),
            Formula::Or(a, b) => CFormula::Or(Box::new(self.compile(a, scope)?), Box::new(self.compile(b, scope)?)),
            Formula::Implies(a, b) => {
                CFormula::Implies(Box::new(self.compile(a, scope)?), Box::new(self.compile(b, scope)?))
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                let slot = scope.len();
                scope.push(v.clone());
                let body = self.compile(g, scope);
                scope.pop();
                let body = body?;
                if matches!(f, Formula::Exists(..)) {
                    let dom = guard(&body, slot);
                    CFormula::Exists(dom, Box::new(body))
                } else {
                    let dom = match &body {
                        CFormula::Implies(ante, _) => guard(ante, slot),
                        _ => Domain::All,
                    };
                    CFormula::Forall(dom, Box::new(body))
                }
            }
        })
    }

    fn compile_term(&self, t: &Term, scope: &[String]) -> Result<CTerm, LogicError> {
        Ok(match t {
            Term::Var(v) => {
                CTerm::Slot(scope.iter().rposition(|s| s == v).ok_or_else(|| LogicError::UnboundVariable(v.clone()))?)
            }
            Term::Eps => CTerm::Eps,
            Term::Pred(_) => {
                let (k, inner) = t.strip_preds();
                CTerm::Pred(k, Box::new(self.compile_term(inner, scope)?))
            }
            Term::Meet(a, b) => {
                CTerm::Meet(Box::new(self.compile_term(a, scope)?), Box::new(self.compile_term(b, scope)?))
            }
        })
    }

    fn term(&self, t: &CTerm, env: &[usize]) -> usize {
        match t {
            CTerm::Slot(s) => env[*s],
            CTerm::Eps => 0,
            CTerm::Pred(k, inner) => {
                let i = self.term(inner, env);
                self.e.tree.ancestor_at_depth(i, self.depth[i].saturating_sub(*k))
            }
            CTerm::Meet(a, b) => self.e.tree.meet_index(self.term(a, env), self.term(b, env)),
        }
    }

    fn is_ancestor(&self, i: usize, j: usize) -> bool {
        i <= j && j < self.end[i]
    }

    fn candidates(&self, dom: &Domain, env: &[usize]) -> Vec<usize> {
        match dom {
            Domain::All => (0..self.depth.len()).collect(),
            Domain::Below(t, k) => {
                let i = self.term(t, env);
                if i == 0 {
                    (0..self.depth.len()).filter(|&j| self.depth[j] <= *k).collect()
                } else {
                    let want = self.depth[i] + k;
                    (i..self.end[i]).filter(|&j| self.depth[j] == want).collect()
                }
            }
            Domain::Above(t) => {
                let mut i = self.term(t, env);
                let mut out = vec![i];
                while i != 0 {
                    i = self.e.tree.parent(i);
                    out.push(i);
                }
                out
            }
            Domain::Fiber(p) => self.fibers[*p].clone(),
        }
    }

    fn holds(&self, f: &CFormula, env: &mut Vec<usize>) -> bool {
        match f {
            CFormula::Eq(a, b) => self.term(a, env) == self.term(b, env),
            CFormula::Leq(a, b) => self.is_ancestor(self.term(a, env), self.term(b, env)),
            CFormula::Label(p, t) => p.is_some_and(|p| self.proj[self.term(t, env)] == p),
            CFormula::Not(g) => !self.holds(g, env),
            CFormula::And(a, b) => self.holds(a, env) && self.holds(b, env),
            CFormula::Or(a, b) => self.holds(a, env) || self.holds(b, env),
            CFormula::Implies(a, b) => !self.holds(a, env) || self.holds(b, env),
            CFormula::Exists(dom, g) => self.quantify(dom, g, env, true),
            CFormula::Forall(dom, g) => self.quantify(dom, g, env, false),
        }
    }

    fn quantify(&self, dom: &Domain, body: &CFormula, env: &mut Vec<usize>, exists: bool) -> bool {
        for c in self.candidates(dom, env) {
            env.push(c);
            let v = self.holds(body, env);
            env.pop();
            if v == exists {
                return exists;
            }
        }
        !exists
    }

    fn index(&self, node: &Node) -> Result<usize, LogicError> {
        self.e.tree.index_of(node).ok_or_else(|| LogicError::UnknownNode(node.clone()))
    }

    pub fn evaluate(&self, f: &Formula, env: &BTreeMap<String, Node>) -> Result<bool, LogicError> {
        let mut scope: Vec<String> = env.keys().cloned().collect();
        let compiled = self.compile(f, &mut scope)?;
        let mut slots = env.values().map(|n| self.index(n)).collect::<Result<Vec<_>, _>>()?;
        Ok(self.holds(&compiled, &mut slots))
    }

    /// Preorder indices of the nodes satisfying `f` with `free_var` bound to them.
    pub fn solution_indices(
        &self,
        f: &Formula,
        free_var: &str,
        params: &BTreeMap<String, Node>,
    ) -> Result<Vec<usize>, LogicError> {
        let mut scope: Vec<String> = params.keys().cloned().collect();
        scope.push(free_var.to_string());
        let compiled = self.compile(f, &mut scope)?;
        let mut env = params.values().map(|n| self.index(n)).collect::<Result<Vec<_>, _>>()?;
        let slot = env.len();
        // The free variable may be narrowed like an existential.
        let dom = guard(&compiled, slot);
        let out = self
            .candidates(&dom, &env)
            .into_iter()
            .filter(|&c| {
                env.push(c);
                let v = self.holds(&compiled, &mut env);
                env.pop();
                v
            })
            .collect();
        Ok(out)
    }

    pub fn solution_set(
        &self,
        f: &Formula,
        free_var: &str,
        params: &BTreeMap<String, Node>,
    ) -> Result<NodeSet, LogicError> {
        Ok(self.solution_indices(f, free_var, params)?.into_iter().map(|i| self.e.tree.node(i).clone()).collect())
    }
}

/// A domain restriction for `slot` implied by `f` holding.
fn guard(f: &CFormula, slot: usize) -> Domain {
    match f {
        CFormula::And(a, b) => match guard(a, slot) {
            Domain::All => guard(b, slot),
            d => d,
        },
        CFormula::Eq(l, r) => {
            for (lhs, rhs) in [(l, r), (r, l)] {
                if rhs.uses(slot) {
                    continue;
                }
                match lhs {
                    CTerm::Slot(s) if *s == slot => return Domain::Below(rhs.clone(), 0),
                    CTerm::Pred(k, inner) if matches!(**inner, CTerm::Slot(s) if s == slot) => {
                        return Domain::Below(rhs.clone(), *k)
                    }
                    _ => {}
                }
            }
            Domain::All
        }
        CFormula::Leq(CTerm::Slot(s), t) if *s == slot && !t.uses(slot) => Domain::Above(t.clone()),
        CFormula::Label(Some(p), CTerm::Slot(s)) if *s == slot => Domain::Fiber(*p),
        _ => Domain::All,
    }
}

pub fn evaluate(e: &Expansion, f: &Formula, env: &BTreeMap<String, Node>) -> Result<bool, LogicError> {
    Model::new(e).evaluate(f, env)
}

/// Truth value of a sentence.
pub fn evaluate_sentence(e: &Expansion, f: &Formula) -> Result<bool, LogicError> {
    evaluate(e, f, &BTreeMap::new())
}

pub fn solution_set(
    e: &Expansion,
    f: &Formula,
    free_var: &str,
    params: &BTreeMap<String, Node>,
) -> Result<NodeSet, LogicError> {
    Model::new(e).solution_set(f, free_var, params)
}
