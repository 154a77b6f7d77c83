use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use treeplan::analysis::{check_dividing, infer_plan_report, infer_plan_with_n, parse_unlabeled_tree, AnalysisError};
use treeplan::closure::NodeSet;
use treeplan::counting::{poly_p, verify_p, verify_q, CountReport};
use treeplan::game::{
    game_value, play, ExhaustiveSpoiler, FixedDuplicator, GameState, RandomSpoiler, SearchConfig, SpoilerStrategy,
    Target, Winner,
};
use treeplan::logic::{asymptotic_check, parse_formula, LogicError, Model, ParamSource};
use treeplan::plan::{expand_with_budget, parse_plan, PlanError, TreePlan, BUDGET_ENV_VAR, DEFAULT_NODE_BUDGET};
use treeplan::tree::Node;

const EXIT_FAIL: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_INCONSISTENT: u8 = 4;

/// Tree plans, their expansions, and the checks built on them.
#[derive(Parser)]
#[command(name = "treeplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Plan file, or plan text if it starts with '('.
    #[arg(long)]
    plan: String,
    /// Node budget for any single expansion.
    #[arg(long, env = BUDGET_ENV_VAR, default_value_t = DEFAULT_NODE_BUDGET, value_parser = positive)]
    budget: usize,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Human-readable table instead of CSV.
    #[arg(long)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// List the nodes of Gamma(n) with their projections.
    Expand {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = positive)]
        n: usize,
    },
    /// Check the counting polynomials on Gamma(1..=n).
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = positive)]
        n: usize,
    },
    /// Play the k-round game on Gamma(n1) and Gamma(n2) against the fixed duplicator.
    Ef {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = positive)]
        n1: usize,
        #[arg(long, value_parser = positive)]
        n2: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = SpoilerKind::Exhaustive)]
        spoiler: SpoilerKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a sentence, or count the solutions of a formula in one free variable.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = positive)]
        n: usize,
        #[arg(long)]
        formula: String,
        /// Parameter bindings `name=node`.
        #[arg(long = "param", value_parser = binding::<Node>)]
        params: Vec<(String, Node)>,
    },
    /// Compare solution counts with the predicted dimension and measure.
    Asymptotic {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        formula: String,
        #[arg(long, value_parser = ladder)]
        ladder: Ladder,
        #[arg(long, default_value_t = 0.1)]
        tol: f64,
        #[arg(long, default_value = "x")]
        var: String,
        /// `name=node` for a fixed node, or `name=path` for the least node over a plan path.
        #[arg(long = "param", value_parser = binding::<ParamSource>)]
        params: Vec<(String, ParamSource)>,
    },
    /// Recover a plan from unlabeled samples of Gamma(n) and Gamma(n+1).
    Infer {
        tree1: PathBuf,
        tree2: PathBuf,
        /// Size parameter of the first sample, when known.
        #[arg(long, value_parser = positive)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether tp(a/B) divides over C in Gamma(n).
    Dividing {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = positive)]
        n: usize,
        #[arg(long)]
        a: Node,
        /// Comma-separated nodes.
        #[arg(long, default_value = "", value_parser = node_set)]
        b: NodeSet,
        #[arg(long, default_value = "", value_parser = node_set)]
        c: NodeSet,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SpoilerKind {
    /// Search for a line beating the fixed duplicator.
    Exhaustive,
    /// Play the game-theoretically optimal move.
    Minimax,
    Random,
}

#[derive(Clone, Debug)]
struct Ladder(Vec<usize>);

fn positive(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn ladder(s: &str) -> Result<Ladder, String> {
    let v: Vec<usize> = s.split(',').map(positive).collect::<Result<_, _>>()?;
    if v.is_empty() || v.windows(2).any(|w| w[0] >= w[1]) {
        return Err("ladder must be strictly increasing".into());
    }
    Ok(Ladder(v))
}

fn binding<T: std::str::FromStr>(s: &str) -> Result<(String, T), String>
where
    T::Err: std::fmt::Display,
{
    let (name, value) = s.split_once('=').ok_or("expected name=value")?;
    Ok((name.trim().to_string(), value.trim().parse().map_err(|e: T::Err| e.to_string())?))
}

fn node_set(s: &str) -> Result<NodeSet, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Node>().map_err(|e| e.to_string()))
        .collect()
}

fn load_plan(arg: &str) -> Result<TreePlan> {
    let text = if arg.trim_start().starts_with('(') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).with_context(|| format!("reading plan file {arg}"))?
    };
    Ok(parse_plan(&text)?)
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_count_report(report: &CountReport, pretty: bool, w: &mut dyn Write) -> Result<()> {
    if !pretty {
        report.write_csv(w)?;
        return Ok(());
    }
    writeln!(w, "{:<24} {:>4} {:>10} {:>10}  ok", "quantity", "n", "observed", "predicted")?;
    for r in &report.rows {
        writeln!(
            w,
            "{:<24} {:>4} {:>10} {:>10}  {}",
            r.quantity,
            r.n,
            r.observed,
            r.predicted,
            if r.pass { "yes" } else { "NO" }
        )?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Expand { common, n } => {
            let plan = load_plan(&common.plan)?;
            let e = expand_with_budget(&plan, n, common.budget)?;
            let mut w = sink(common.out.as_deref())?;
            let mut fibers: BTreeMap<String, usize> = BTreeMap::new();
            for x in e.tree.nodes() {
                let pi = x.projection().to_string();
                if common.pretty {
                    writeln!(w, "{x:<20} pi={pi}")?;
                } else {
                    writeln!(w, "{x},{pi}")?;
                }
                *fibers.entry(pi).or_default() += 1;
            }
            for (pi, count) in fibers {
                eprintln!("# fiber {}: {count}", if pi.is_empty() { "<>" } else { &pi });
            }
            Ok(0)
        }
        Command::Verify { common, n } => {
            let plan = load_plan(&common.plan)?;
            let mut report = verify_p(&plan, n, common.budget)?;
            report.extend(verify_q(&plan, n, common.budget)?);
            let mut w = sink(common.out.as_deref())?;
            write_count_report(&report, common.pretty, &mut w)?;
            if common.pretty {
                writeln!(w, "P = {}", poly_p(&plan))?;
            }
            Ok(if report.all_pass() { 0 } else { EXIT_FAIL })
        }
        Command::Ef { common, n1, n2, k, spoiler, seed } => {
            let plan = load_plan(&common.plan)?;
            let left = expand_with_budget(&plan, n1, common.budget)?;
            let right = expand_with_budget(&plan, n2, common.budget)?;
            let config = SearchConfig { seed, ..SearchConfig::default() };
            let mut s: Box<dyn SpoilerStrategy> = match spoiler {
                SpoilerKind::Exhaustive => Box::new(ExhaustiveSpoiler::new(Target::Fixed, config.clone())),
                SpoilerKind::Minimax => Box::new(ExhaustiveSpoiler::new(Target::Minimax, config.clone())),
                SpoilerKind::Random => Box::new(RandomSpoiler::new(seed)),
            };
            let outcome = play(&left, &right, k, s.as_mut(), &mut FixedDuplicator);
            let mut w = sink(common.out.as_deref())?;
            write!(w, "{}", outcome.transcript())?;
            if matches!(spoiler, SpoilerKind::Minimax) && outcome.winner == Winner::Spoiler {
                if let Some(f) = game_value(&GameState::new(&left, &right, k), &config).sentence {
                    writeln!(w, "# separating sentence: {f}")?;
                }
            }
            Ok(if outcome.winner == Winner::Duplicator { 0 } else { EXIT_FAIL })
        }
        Command::Check { common, n, formula, params } => {
            let plan = load_plan(&common.plan)?;
            let f = parse_formula(&formula)?;
            let e = expand_with_budget(&plan, n, common.budget)?;
            let env: BTreeMap<String, Node> = params.into_iter().collect();
            for (name, node) in &env {
                if !e.contains(node) {
                    bail!(LogicError::NotRealizable { param: name.clone(), n });
                }
            }
            let free: Vec<String> = f.free_vars().into_iter().filter(|v| !env.contains_key(v)).collect();
            let model = Model::new(&e);
            let mut w = sink(common.out.as_deref())?;
            match free.as_slice() {
                [] => writeln!(w, "{}", model.evaluate(&f, &env)?)?,
                [x] => writeln!(w, "{}", model.solution_indices(&f, x, &env)?.len())?,
                _ => bail!(LogicError::UnboundVariable(free.join(", "))),
            }
            Ok(0)
        }
        Command::Asymptotic { common, formula, ladder, tol, var, params } => {
            let plan = load_plan(&common.plan)?;
            let f = parse_formula(&formula)?;
            let report = asymptotic_check::<f64>(&plan, &f, &var, &params, &ladder.0, tol, common.budget)?;
            let mut w = sink(common.out.as_deref())?;
            if common.pretty {
                writeln!(w, "formula {}  delta={} mu={}", report.formula, report.measure.delta, report.measure.mu)?;
                writeln!(w, "{:>5} {:>10} {:>12} {:>9}  ok", "n", "observed", "predicted", "ratio")?;
                for r in &report.rows {
                    writeln!(
                        w,
                        "{:>5} {:>10} {:>12.2} {:>9.5}  {}",
                        r.n,
                        r.observed,
                        r.predicted,
                        r.ratio,
                        if r.pass { "yes" } else { "NO" }
                    )?;
                }
                writeln!(
                    w,
                    "classes exact={} stable={} remainder shrinking={}",
                    report.class_counts_exact, report.classes_stable, report.remainder_shrinking
                )?;
            } else {
                report.write_csv(&mut w)?;
            }
            Ok(if report.pass() { 0 } else { EXIT_FAIL })
        }
        Command::Infer { tree1, tree2, n, out } => {
            let read = |p: &Path| -> Result<_> {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Ok(parse_unlabeled_tree(&text)?)
            };
            let (t1, t2) = (read(&tree1)?, read(&tree2)?);
            let (plan, n, ambiguous) = match n {
                Some(n) => {
                    let (plan, ambiguous) = infer_plan_with_n(&t1, &t2, n)?;
                    (plan, n, ambiguous)
                }
                None => {
                    let r = infer_plan_report(&t1, &t2)?;
                    if r.consistent_ns.len() > 1 {
                        eprintln!("# samples fit n in {:?}; using n={}", r.consistent_ns, r.n);
                    }
                    (r.plan, r.n, r.ambiguous)
                }
            };
            if ambiguous {
                eprintln!("# another non-isomorphic plan also fits at n={n}");
            }
            writeln!(sink(out.as_deref())?, "{plan}")?;
            Ok(0)
        }
        Command::Dividing { common, n, a, b, c } => {
            let plan = load_plan(&common.plan)?;
            let e = expand_with_budget(&plan, n, common.budget)?;
            let v = check_dividing(&e, &a, &b, &c)?;
            let mut w = sink(common.out.as_deref())?;
            let join = |xs: &[Node]| xs.iter().map(Node::to_string).collect::<Vec<_>>().join(" ");
            let witness = v.witness.as_ref().map(Node::to_string).unwrap_or_default();
            if common.pretty {
                writeln!(w, "divides: {}", v.divides)?;
                if v.divides {
                    writeln!(w, "witness: {witness} (depth {})", v.depth)?;
                    writeln!(w, "conjugates over C: {}", join(&v.conjugates))?;
                    writeln!(w, "pairwise inconsistent: {}", v.pairwise_inconsistent)?;
                }
            } else {
                writeln!(w, "divides,witness,depth,conjugates,pairwise_inconsistent,same_type_over_c")?;
                writeln!(
                    w,
                    "{},{witness},{},{},{},{}",
                    v.divides,
                    v.depth,
                    join(&v.conjugates),
                    v.pairwise_inconsistent,
                    v.same_type_over_c
                )?;
            }
            Ok(0)
        }
    }
}

fn plan_code(e: &PlanError) -> u8 {
    match e {
        PlanError::BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_PARSE,
    }
}

fn logic_code(e: &LogicError) -> u8 {
    match e {
        LogicError::Plan(p) => plan_code(p),
        _ => EXIT_PARSE,
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<PlanError>() {
        plan_code(e)
    } else if let Some(e) = err.downcast_ref::<LogicError>() {
        logic_code(e)
    } else if let Some(e) = err.downcast_ref::<AnalysisError>() {
        match e {
            AnalysisError::Inconsistent(_) => EXIT_INCONSISTENT,
            AnalysisError::Plan(p) => plan_code(p),
            AnalysisError::Logic(l) => logic_code(l),
            _ => EXIT_PARSE,
        }
    } else {
        EXIT_PARSE
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
