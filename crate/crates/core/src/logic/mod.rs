//! First-order logic over expansions.

mod ast;
mod asymptotic;
mod eval;
mod parser;
mod principal;

use thiserror::Error;

use crate::plan::{PlanError, PlanPath};
use crate::tree::Node;

pub use ast::{qrank, Formula, Term};
pub use asymptotic::{
    asymptotic_check, classify_solutions, formula_measure, instantiate, predicted_class_size, pseudofinite_probe,
    AsymptoticReport, AsymptoticRow, ParamSource, ProbeReport, SolutionClass,
};
pub use eval::{evaluate, evaluate_sentence, solution_set, Model};
pub use parser::{parse_formula, parse_formula_file, parse_term};
pub use principal::{parameter_names, principal_formula, PrincipalCase, PrincipalFormula, FREE_VAR};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("label P[{0}] is not a node of the plan")]
    UnknownLabel(PlanPath),
    #[error("node {0} is not in the expansion")]
    UnknownNode(Node),
    #[error("sentence expected, but {0} occur free")]
    NotClosed(String),
    #[error("parameter {param} is not realized in Gamma({n})")]
    NotRealizable { param: String, n: usize },
    #[error(transparent)]
    Plan(#[from] PlanError),
}
