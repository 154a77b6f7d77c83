use std::collections::BTreeSet;
use std::fmt;

use crate::plan::PlanPath;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Eps,
    Pred(Box<Term>),
    Meet(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn pred(t: Term) -> Term {
        Term::Pred(Box::new(t))
    }

    /// `pred` applied `k` times; `k = 0` gives the term itself.
    pub fn pred_k(t: Term, k: usize) -> Term {
        (0..k).fold(t, |acc, _| Term::pred(acc))
    }

    pub fn meet(a: Term, b: Term) -> Term {
        Term::Meet(Box::new(a), Box::new(b))
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Eps => {}
            Term::Pred(t) => t.vars(out),
            Term::Meet(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        match self {
            Term::Var(v) => v == var,
            Term::Eps => false,
            Term::Pred(t) => t.mentions(var),
            Term::Meet(a, b) => a.mentions(var) || b.mentions(var),
        }
    }

    /// Splits `pred^k(t)` into `(k, t)` with `t` not a `pred`.
    pub fn strip_preds(&self) -> (usize, &Term) {
        let mut k = 0;
        let mut t = self;
        while let Term::Pred(inner) = t {
            k += 1;
            t = inner;
        }
        (k, t)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Eps => f.write_str("eps"),
            Term::Pred(_) => {
                let (k, inner) = self.strip_preds();
                if k == 1 {
                    write!(f, "pred({inner})")
                } else {
                    write!(f, "pred^{k}({inner})")
                }
            }
            Term::Meet(a, b) => write!(f, "meet({a}, {b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Eq(Term, Term),
    Leq(Term, Term),
    Label(PlanPath, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn leq(a: Term, b: Term) -> Formula {
        Formula::Leq(a, b)
    }

    pub fn label(path: PlanPath, t: Term) -> Formula {
        Formula::Label(path, t)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &str, f: Formula) -> Formula {
        Formula::Exists(v.to_string(), Box::new(f))
    }

    pub fn forall(v: &str, f: Formula) -> Formula {
        Formula::Forall(v.to_string(), Box::new(f))
    }

    /// Left-nested conjunction; `None` for an empty list.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        parts.into_iter().reduce(Formula::and)
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Eq(..) | Formula::Leq(..) | Formula::Label(..))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Eq(..) | Formula::Leq(..) | Formula::Label(..) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut add = |t: &Term| {
            let mut vs = BTreeSet::new();
            t.vars(&mut vs);
            out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
        };
        match self {
            Formula::Eq(a, b) | Formula::Leq(a, b) => {
                add(a);
                add(b);
            }
            Formula::Label(_, t) => add(t),
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Label paths used by the formula.
    pub fn labels(&self) -> BTreeSet<PlanPath> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Label(p, _) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    fn visit(&self, g: &mut impl FnMut(&Formula)) {
        g(self);
        match self {
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.visit(g),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit(g);
                b.visit(g);
            }
            _ => {}
        }
    }
}

pub fn qrank(f: &Formula) -> usize {
    match f {
        Formula::Eq(..) | Formula::Leq(..) | Formula::Label(..) => 0,
        Formula::Not(g) => qrank(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => qrank(a).max(qrank(b)),
        Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + qrank(g),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Operands that are not atoms or negations get parentheses, which
        // keeps the output re-parseable without tracking precedence.
        fn operand(g: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if g.is_atomic() || matches!(g, Formula::Not(_)) {
                write!(f, "{g}")
            } else {
                write!(f, "({g})")
            }
        }
        match self {
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Leq(a, b) => write!(f, "{a} <= {b}"),
            Formula::Label(p, t) => write!(f, "P[{p}]({t})"),
            Formula::Not(g) => write!(f, "!({g})"),
            Formula::And(a, b) => {
                operand(a, f)?;
                f.write_str(" & ")?;
                operand(b, f)
            }
            Formula::Or(a, b) => {
                operand(a, f)?;
                f.write_str(" | ")?;
                operand(b, f)
            }
            Formula::Implies(a, b) => {
                operand(a, f)?;
                f.write_str(" -> ")?;
                operand(b, f)
            }
            Formula::Exists(v, g) => write!(f, "exists {v}. {g}"),
            Formula::Forall(v, g) => write!(f, "forall {v}. {g}"),
        }
    }
}
