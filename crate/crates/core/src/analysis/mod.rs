//! Amalgamation, plan inference and the dividing criterion.

mod dividing;
mod embed;
mod infer;

use thiserror::Error;

use crate::logic::LogicError;
use crate::plan::PlanError;
use crate::tree::TreeError;

pub use dividing::{check_dividing, DividingVerdict};
pub use embed::{amalgamate, automorphism_extending, extend_embedding, inclusion, rearrange, Amalgam};
pub use infer::{
    consistent_plans, infer_plan, infer_plan_report, infer_plan_threshold, infer_plan_with_n, parse_unlabeled_tree,
    Inference,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("map is not a label-preserving embedding")]
    NotAnEmbedding,
    #[error("{0}")]
    Domain(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("expansions of different plans")]
    MismatchedPlans,
    #[error("inconsistent samples: {0}")]
    Inconsistent(String),
    #[error("bad tree input: {0}")]
    Parse(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}
