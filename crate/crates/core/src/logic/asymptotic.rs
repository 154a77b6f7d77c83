//! Solution classes of definable sets and the finite asymptotic-class check.

use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{Float, ToPrimitive, Zero};
use serde::Serialize;

use super::ast::{qrank, Formula};
use super::eval::Model;
use super::LogicError;
use crate::closure::{anchor_in, tcl, NodeSet};
use crate::counting::{leading_coefficient, plan_degree, poly_q_rel, DimMeasure, Measure};
use crate::plan::{ell, expand_with_budget, height, Expansion, PlanPath, TreePlan};
use crate::tree::Node;

/// Solutions sharing an anchor in `tcl(params)` and a projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionClass {
    pub anchor: Node,
    /// `pi(anchor)`.
    pub sigma: PlanPath,
    /// `pi(a)` for every member `a`.
    pub sigma_p: PlanPath,
    pub count: usize,
    /// The class is a single member of `tcl(params)`.
    pub closed: bool,
    /// Size of the full class as predicted from the plan.
    pub predicted: BigUint,
    pub measure: DimMeasure,
}

impl SolutionClass {
    pub fn exact(&self) -> bool {
        BigUint::from(self.count) == self.predicted
    }
}

/// Size of the class `(anchor, sigma_p)` over `params`: the nodes above
/// `anchor` projecting to `sigma_p`, minus those that leave the anchor
/// through a child lying in `tcl(params)`.
pub fn predicted_class_size(e: &Expansion, closed: &NodeSet, anchor: &Node, sigma_p: &PlanPath) -> BigUint {
    let sigma = anchor.projection();
    let x = BigUint::from(e.n);
    let full = poly_q_rel(&e.plan, &sigma, sigma_p).expect("anchor is a prefix").eval(&x);
    let rho = sigma_p.prefix(sigma.len() + 1);
    let taken = closed
        .iter()
        .filter(|d| d.depth() == anchor.depth() + 1 && d.pred() == *anchor && d.projection() == rho)
        .count();
    if taken == 0 {
        return full;
    }
    let per_branch = poly_q_rel(&e.plan, &rho, sigma_p).expect("rho is a prefix").eval(&x);
    full - per_branch * BigUint::from(taken)
}

pub fn classify_solutions(
    e: &Expansion,
    f: &Formula,
    free_var: &str,
    params: &BTreeMap<String, Node>,
) -> Result<Vec<SolutionClass>, LogicError> {
    let model = Model::new(e);
    let solutions = model.solution_indices(f, free_var, params)?;
    let b: NodeSet = params.values().cloned().collect();
    let closed = tcl(e, &b);
    let deg = plan_degree(&e.plan);
    let a_lead = leading_coefficient(&e.plan).to_u64().expect("fits");

    let mut counts: BTreeMap<(Node, PlanPath), usize> = BTreeMap::new();
    for i in solutions {
        let a = e.tree.node(i);
        *counts.entry((anchor_in(&closed, a), a.projection())).or_default() += 1;
    }
    Ok(counts
        .into_iter()
        .map(|((anchor, sigma_p), count)| {
            let sigma = anchor.projection();
            let is_closed = sigma == sigma_p;
            let (predicted, measure) = if is_closed {
                (BigUint::from(1u32), DimMeasure::from_degrees(0, deg, a_lead))
            } else {
                let rel = poly_q_rel(&e.plan, &sigma, &sigma_p).expect("prefix").degree().unwrap_or(0);
                (predicted_class_size(e, &closed, &anchor, &sigma_p), DimMeasure::from_degrees(rel, deg, a_lead))
            };
            SolutionClass { anchor, sigma, sigma_p, count, closed: is_closed, predicted, measure }
        })
        .collect())
}

/// Dimension and measure of a definable set from its classes: the largest
/// class dimension, and the sum of the measures of the classes attaining it.
pub fn formula_measure(classes: &[SolutionClass]) -> DimMeasure {
    let Some(delta) = classes.iter().map(|c| c.measure.delta).max() else {
        return DimMeasure { delta: Ratio::zero(), mu: Measure { coefficient: 0, base: 1, exponent: Ratio::zero() } };
    };
    let top: Vec<&SolutionClass> = classes.iter().filter(|c| c.measure.delta == delta).collect();
    let base = top[0].measure.mu.base;
    DimMeasure { delta, mu: Measure { coefficient: top.len() as u64, base, exponent: delta } }
}

/// Where a parameter comes from at each ladder point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamSource {
    /// The least node over a plan path.
    Least(PlanPath),
    /// A fixed node, which must exist at every ladder point.
    Fixed(Node),
}

impl FromStr for ParamSource {
    type Err = LogicError;

    /// Node syntax (`eps`, `0:1/1:*`) gives a fixed node; a dotted plan
    /// path (`0.1`, or `<>` for the root) gives the least node over it.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || LogicError::Syntax { pos: 0, message: format!("bad parameter {s:?}") };
        if s == "eps" || s.contains(':') {
            s.parse().map(ParamSource::Fixed).map_err(|_| bad())
        } else {
            s.parse().map(ParamSource::Least).map_err(|_| bad())
        }
    }
}

pub fn instantiate(e: &Expansion, spec: &[(String, ParamSource)]) -> Result<BTreeMap<String, Node>, LogicError> {
    spec.iter()
        .map(|(name, src)| {
            let node = match src {
                ParamSource::Least(p) => e.least_node(p)?,
                ParamSource::Fixed(n) if e.contains(n) => n.clone(),
                ParamSource::Fixed(_) => return Err(LogicError::NotRealizable { param: name.clone(), n: e.n }),
            };
            Ok((name.clone(), node))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticRow<F> {
    pub n: usize,
    pub observed: u64,
    pub delta: String,
    pub mu: String,
    pub predicted: F,
    pub ratio: F,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct AsymptoticReport<F> {
    pub formula: String,
    pub measure: DimMeasure,
    pub rows: Vec<AsymptoticRow<F>>,
    pub classes: Vec<Vec<SolutionClass>>,
    /// Every class count equals its prediction at every ladder point.
    pub class_counts_exact: bool,
    /// The same class keys are realized at every ladder point.
    pub classes_stable: bool,
    pub within_tolerance: bool,
    /// `|ratio - mu|` never grows along the ladder.
    pub remainder_shrinking: bool,
}

impl<F: Float + Serialize> AsymptoticReport<F> {
    pub fn pass(&self) -> bool {
        self.class_counts_exact && self.within_tolerance
    }

    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn ratio_value<F: Float>(r: &Ratio<u64>) -> F {
    F::from(*r.numer()).expect("fits") / F::from(*r.denom()).expect("fits")
}

/// Checks `|phi(Gamma(n), c)| ~ mu |Gamma(n)|^delta` along `ladder`.
///
/// `delta` and `mu` come from the classes realized at the first ladder
/// point. Class counts are checked exactly at every point; the ratio is
/// checked at the last point with relative tolerance `tol`.
pub fn asymptotic_check<F: Float + Serialize>(
    p: &TreePlan,
    f: &Formula,
    free_var: &str,
    spec: &[(String, ParamSource)],
    ladder: &[usize],
    tol: F,
    budget: usize,
) -> Result<AsymptoticReport<F>, LogicError> {
    let mut measure = None;
    let mut rows = Vec::with_capacity(ladder.len());
    let mut all_classes = Vec::with_capacity(ladder.len());
    let mut keys: Option<BTreeSet<(Node, PlanPath)>> = None;
    let mut classes_stable = true;
    let mut deviations = Vec::new();
    for (idx, &n) in ladder.iter().enumerate() {
        let e = expand_with_budget(p, n, budget)?;
        let params = instantiate(&e, spec)?;
        let classes = classify_solutions(&e, f, free_var, &params)?;
        let m: &DimMeasure = measure.get_or_insert_with(|| formula_measure(&classes));
        let here: BTreeSet<(Node, PlanPath)> = classes.iter().map(|c| (c.anchor.clone(), c.sigma_p.clone())).collect();
        if keys.get_or_insert_with(|| here.clone()) != &here {
            classes_stable = false;
        }
        let observed: usize = classes.iter().map(|c| c.count).sum();
        let delta: F = ratio_value(&m.delta);
        let mu: F = m.mu.value();
        let scale = F::from(e.len()).expect("fits").powf(delta);
        let ratio = F::from(observed).expect("fits") / scale;
        let exact = classes.iter().all(SolutionClass::exact);
        let deviation = (ratio - mu).abs();
        deviations.push(deviation);
        let top = idx + 1 == ladder.len();
        rows.push(AsymptoticRow {
            n,
            observed: observed as u64,
            delta: m.delta.to_string(),
            mu: m.mu.to_string(),
            predicted: mu * scale,
            ratio,
            pass: exact && (!top || deviation <= tol * mu),
        });
        all_classes.push(classes);
    }
    let measure = measure.unwrap_or_else(|| formula_measure(&[]));
    let mu: F = measure.mu.value();
    Ok(AsymptoticReport {
        formula: f.to_string(),
        within_tolerance: deviations.last().is_some_and(|&d| d <= tol * mu),
        remainder_shrinking: deviations.windows(2).all(|w| w[1] <= w[0]),
        class_counts_exact: all_classes.iter().flatten().all(SolutionClass::exact),
        classes_stable,
        measure,
        rows,
        classes: all_classes,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeReport {
    pub rank: usize,
    /// `N(k) = k + ell * height`, at least 1.
    pub start: usize,
    pub values: Vec<(usize, bool)>,
}

impl ProbeReport {
    pub fn constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0].1 == w[1].1)
    }
}

/// Evaluates a sentence on `Gamma(n)` for `n` from `N(qrank)` to
/// `N(qrank) + margin`.
pub fn pseudofinite_probe(
    p: &TreePlan,
    sentence: &Formula,
    margin: usize,
    budget: usize,
) -> Result<ProbeReport, LogicError> {
    let free = sentence.free_vars();
    if !free.is_empty() {
        return Err(LogicError::NotClosed(free.into_iter().collect::<Vec<_>>().join(", ")));
    }
    let rank = qrank(sentence);
    let start = (rank + ell(p) * height(p)).max(1);
    let values = (start..=start + margin)
        .map(|n| {
            let e = expand_with_budget(p, n, budget)?;
            Ok((n, Model::new(&e).evaluate(sentence, &BTreeMap::new())?))
        })
        .collect::<Result<_, LogicError>>()?;
    Ok(ProbeReport { rank, start, values })
}
