//! A fixed corpus of small plans used by tests, benchmarks and the CLI.

use crate::plan::{parse_plan, TreePlan};

pub const PLAN_A: &str = "(1 (inf))";
pub const PLAN_B: &str = "(1 (inf (inf)))";
pub const PLAN_C: &str = "(1 (inf) (inf))";
pub const PLAN_D: &str = "(1 (1 (inf)) (inf))";

/// At most 8 nodes and height at most 3 each.
pub const CORPUS: &[&str] = &[
    "(1)",
    "(1 (1))",
    PLAN_A,
    "(1 (1) (1))",
    "(1 (1) (inf))",
    PLAN_C,
    PLAN_B,
    "(1 (1 (inf)))",
    "(1 (inf (1)))",
    PLAN_D,
    "(1 (inf (inf (inf))))",
    "(1 (inf (inf) (inf)))",
    "(1 (inf (1) (inf)) (1))",
    "(1 (1 (1) (inf (1))) (inf (1 (1))))",
    "(1 (inf (inf)) (inf (inf)))",
    "(1 (inf (1) (1)) (1 (inf)))",
    "(1 (1 (inf (inf))) (inf))",
    "(1 (inf (1 (inf))) (1))",
    "(1 (1) (1) (inf (inf)))",
    "(1 (inf (inf (1))) (inf))",
    "(1 (1 (1 (1))))",
    "(1 (inf (1) (1) (1)))",
    "(1 (1 (inf) (inf)) (inf (1) (inf)))",
    "(1 (inf (inf (inf))) (1 (inf)))",
];

pub fn corpus() -> Vec<TreePlan> {
    CORPUS.iter().map(|s| parse_plan(s).expect("corpus plan parses")).collect()
}
