//! Counting polynomials of a plan, dimensions and measures, and exact
//! verification of the polynomials against materialized expansions.

use std::fmt;
use std::io;
use std::ops::{Add, Mul};

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{Float, One, ToPrimitive, Zero};
use serde::Serialize;

use crate::plan::{expand_with_budget, inf_count, subplan, Expansion, Mark, PlanError, PlanPath, TreePlan};
use crate::tree::Node;

/// Univariate polynomial; `coeffs[i]` is the coefficient of `x^i`.
///
/// Trailing zero coefficients are never stored, so the zero polynomial has
/// no coefficients at all.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial<C> {
    coeffs: Vec<C>,
}

impl<C: Clone + Zero + One> Polynomial<C> {
    pub fn from_coeffs(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Polynomial { coeffs: vec![C::one()] }
    }

    /// `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![C::zero(); k + 1];
        coeffs[k] = C::one();
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&C> {
        self.coeffs.last()
    }

    /// Multiplies by `x`.
    pub fn shift(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(C::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        Polynomial { coeffs }
    }

    /// Horner evaluation in the coefficient ring.
    pub fn eval(&self, x: &C) -> C {
        self.coeffs.iter().rev().fold(C::zero(), |acc, c| acc * x.clone() + c.clone())
    }
}

impl<C: Clone + Zero + One + ToPrimitive> Polynomial<C> {
    /// Floating-point evaluation, for ratio checks at the reporting boundary.
    pub fn eval_float<F: Float>(&self, x: F) -> F {
        self.coeffs.iter().rev().fold(F::zero(), |acc, c| {
            acc * x + F::from(c.to_f64().unwrap_or(f64::INFINITY)).unwrap_or_else(F::infinity)
        })
    }
}

impl<C: Clone + Zero + One> Add for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn add(self, rhs: Self) -> Polynomial<C> {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len)
            .map(|i| {
                let a = self.coeffs.get(i).cloned().unwrap_or_else(C::zero);
                let b = rhs.coeffs.get(i).cloned().unwrap_or_else(C::zero);
                a + b
            })
            .collect();
        Polynomial::from_coeffs(coeffs)
    }
}

impl<C: Clone + Zero + One> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn mul(self, rhs: Self) -> Polynomial<C> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::from_coeffs(coeffs)
    }
}

impl<C: Clone + Zero + One + PartialEq + fmt::Display> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let unit = c.is_one();
            match (i, unit) {
                (0, _) => write!(f, "{c}")?,
                (1, true) => f.write_str("x")?,
                (1, false) => write!(f, "{c}x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

/// `P(plan; x)`: `P` of the one-node plan is 1, otherwise
/// `1 + sum_i f_i(x) P(child_i; x)` with `f_i = 1` for `1`-children and `x`
/// for `inf`-children.
pub fn poly_p(p: &TreePlan) -> IntPoly {
    fn at(p: &TreePlan, sigma: &PlanPath) -> IntPoly {
        p.children(sigma).iter().fold(IntPoly::one(), |acc, c| {
            let sub = at(p, c);
            let term = match p.mark(c) {
                Some(Mark::Inf) => sub.shift(),
                _ => sub,
            };
            &acc + &term
        })
    }
    at(p, &PlanPath::root())
}

/// `Q(plan, sigma; x) = x^(number of inf nodes up to sigma)`.
pub fn poly_q(p: &TreePlan, sigma: &PlanPath) -> Result<IntPoly, PlanError> {
    Ok(IntPoly::monomial(inf_count(p, sigma)?))
}

/// `Q(plan, sigma, sigma'; x) = Q(subplan at sigma, tail; x)`.
pub fn poly_q_rel(p: &TreePlan, sigma: &PlanPath, sigma_p: &PlanPath) -> Result<IntPoly, PlanError> {
    p.require(sigma)?;
    p.require(sigma_p)?;
    let tail = sigma_p.strip_prefix(sigma).ok_or_else(|| PlanError::NotPrefix(sigma.clone(), sigma_p.clone()))?;
    poly_q(&subplan(p, sigma)?, &tail)
}

/// `deg(plan)`, the degree of `P`.
pub fn plan_degree(p: &TreePlan) -> usize {
    poly_p(p).degree().unwrap_or(0)
}

/// `A(plan)`, the leading coefficient of `P`.
pub fn leading_coefficient(p: &TreePlan) -> BigUint {
    poly_p(p).leading().cloned().unwrap_or_else(BigUint::one)
}

/// A value `coefficient / base^exponent`, kept symbolic because it is
/// irrational in general.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Measure {
    pub coefficient: u64,
    pub base: u64,
    #[serde(serialize_with = "ser_ratio")]
    pub exponent: Ratio<u64>,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl Measure {
    pub fn one() -> Self {
        Measure { coefficient: 1, base: 1, exponent: Ratio::zero() }
    }

    pub fn value<F: Float>(&self) -> F {
        let c = F::from(self.coefficient).expect("u64 fits a float");
        if self.exponent.is_zero() || self.base == 1 {
            return c;
        }
        let base = F::from(self.base).expect("u64 fits a float");
        let exp = F::from(*self.exponent.numer()).expect("fits") / F::from(*self.exponent.denom()).expect("fits");
        c / base.powf(exp)
    }

    /// Decimal rendering at the given precision.
    pub fn render(&self, precision: usize) -> String {
        format!("{:.*}", precision, self.value::<f64>())
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent.is_zero() || self.base == 1 {
            write!(f, "{}", self.coefficient)
        } else if self.exponent.is_integer() {
            write!(f, "{}/{}^{}", self.coefficient, self.base, self.exponent.numer())
        } else {
            write!(f, "{}/{}^({})", self.coefficient, self.base, self.exponent)
        }
    }
}

/// Dimension `delta = deg(sigma'/sigma) / deg(plan)` and measure `1/A^delta`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DimMeasure {
    #[serde(serialize_with = "ser_ratio")]
    pub delta: Ratio<u64>,
    pub mu: Measure,
}

impl DimMeasure {
    pub fn from_degrees(relative_degree: usize, plan_degree: usize, leading: u64) -> Self {
        if relative_degree == 0 || plan_degree == 0 {
            return DimMeasure { delta: Ratio::zero(), mu: Measure::one() };
        }
        let delta = Ratio::new(relative_degree as u64, plan_degree as u64);
        DimMeasure { delta, mu: Measure { coefficient: 1, base: leading, exponent: delta } }
    }
}

pub fn dim_measure(p: &TreePlan, sigma: &PlanPath, sigma_p: &PlanPath) -> Result<DimMeasure, PlanError> {
    let rel = poly_q_rel(p, sigma, sigma_p)?.degree().unwrap_or(0);
    let a = leading_coefficient(p).to_u64().expect("leading coefficient fits u64");
    Ok(DimMeasure::from_degrees(rel, plan_degree(p), a))
}

/// One row of a counting report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountRow {
    pub plan: String,
    pub quantity: String,
    pub n: usize,
    pub observed: u64,
    pub predicted: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Default)]
pub struct CountReport {
    pub rows: Vec<CountRow>,
}

impl CountReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CountRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn extend(&mut self, other: CountReport) {
        self.rows.extend(other.rows);
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

fn row(p: &TreePlan, quantity: String, n: usize, observed: usize, predicted: &BigUint) -> CountRow {
    CountRow {
        plan: p.to_string(),
        quantity,
        n,
        observed: observed as u64,
        predicted: predicted.to_string(),
        pass: BigUint::from(observed) == *predicted,
    }
}

/// Checks `|Gamma(n)| = P(plan; n)` for every `n` in `1..=n_max`.
pub fn verify_p(p: &TreePlan, n_max: usize, budget: usize) -> Result<CountReport, PlanError> {
    let poly = poly_p(p);
    let mut report = CountReport::default();
    for n in 1..=n_max {
        let e = expand_with_budget(p, n, budget)?;
        report.rows.push(row(p, "P".into(), n, e.len(), &poly.eval(&BigUint::from(n))));
    }
    Ok(report)
}

/// Counts, for a witness `b`, the nodes `a >= b` projecting to `sigma_p`.
///
/// The bound is taken non-strictly so that `sigma = sigma_p` counts the
/// witness itself, matching `Q(plan, sigma, sigma; x) = 1`.
pub fn relative_fiber(e: &Expansion, b: &Node, sigma_p: &PlanPath) -> usize {
    let Some(start) = e.tree.index_of(b) else { return 0 };
    e.tree.nodes()[start..].iter().take_while(|a| b.le(a)).filter(|a| &a.projection() == sigma_p).count()
}

/// Checks the fiber polynomials `Q(plan, sigma)` and, for every witness `b`
/// over `sigma`, the relative polynomials `Q(plan, sigma, sigma')`.
pub fn verify_q(p: &TreePlan, n_max: usize, budget: usize) -> Result<CountReport, PlanError> {
    let sigmas: Vec<PlanPath> = p.nodes().cloned().collect();
    let mut report = CountReport::default();
    for n in 1..=n_max {
        let e = expand_with_budget(p, n, budget)?;
        let x = BigUint::from(n);
        for sigma in &sigmas {
            let fiber = e.fiber(sigma);
            report.rows.push(row(p, format!("Q[{sigma}]"), n, fiber.len(), &poly_q(p, sigma)?.eval(&x)));
            for sigma_p in sigmas.iter().filter(|s| sigma.is_prefix_of(s)) {
                let predicted = poly_q_rel(p, sigma, sigma_p)?.eval(&x);
                for b in &fiber {
                    let observed = relative_fiber(&e, b, sigma_p);
                    report.rows.push(row(p, format!("Qrel[{sigma}->{sigma_p}]@{b}"), n, observed, &predicted));
                }
            }
        }
    }
    Ok(report)
}

/// One point of the ratio ladder `|Gamma(n; b, sigma')| / |Gamma(n)|^delta`.
#[derive(Clone, Debug, Serialize)]
pub struct LimitPoint<F> {
    pub n: usize,
    pub observed: u64,
    pub size: u64,
    pub ratio: F,
    pub deviation: F,
}

#[derive(Clone, Debug)]
pub struct LimitReport<F> {
    pub sigma: PlanPath,
    pub sigma_p: PlanPath,
    pub measure: DimMeasure,
    pub points: Vec<LimitPoint<F>>,
    /// Relative deviation at the top of the ladder is within tolerance.
    pub within_tolerance: bool,
    /// Deviations never increase along the ladder.
    pub monotone: bool,
}

impl<F: Float> LimitReport<F> {
    pub fn pass(&self) -> bool {
        self.within_tolerance && self.monotone
    }
}

/// Finite surrogate for the limit of `|Gamma(n; b, sigma')| / |Gamma(n)|^delta`,
/// with `b` the least node over `sigma`, checked along `ladder`.
pub fn limit_check<F: Float>(
    p: &TreePlan,
    sigma: &PlanPath,
    sigma_p: &PlanPath,
    ladder: &[usize],
    tol: F,
    budget: usize,
) -> Result<LimitReport<F>, PlanError> {
    let measure = dim_measure(p, sigma, sigma_p)?;
    let mu: F = measure.mu.value();
    let delta = F::from(*measure.delta.numer()).expect("fits") / F::from(*measure.delta.denom()).expect("fits");
    let mut points = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let e = expand_with_budget(p, n, budget)?;
        let b = e.least_node(sigma)?;
        let observed = relative_fiber(&e, &b, sigma_p);
        let size = F::from(e.len()).expect("fits");
        let ratio = F::from(observed).expect("fits") / size.powf(delta);
        points.push(LimitPoint {
            n,
            observed: observed as u64,
            size: e.len() as u64,
            ratio,
            deviation: (ratio - mu).abs(),
        });
    }
    let within_tolerance = points.last().is_some_and(|pt| pt.deviation <= tol * mu);
    let monotone = points.windows(2).all(|w| w[1].deviation <= w[0].deviation);
    Ok(LimitReport { sigma: sigma.clone(), sigma_p: sigma_p.clone(), measure, points, within_tolerance, monotone })
}

pub type IntPoly = Polynomial<BigUint>;
