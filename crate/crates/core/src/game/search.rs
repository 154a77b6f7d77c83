//! Spoiler search: exhaustive, orbit-reduced, and seeded random.
//!
//! The orbit-reduced tier tries one spoiler move per orbit over the current
//! picks of the chosen side. Automorphisms fixing the picks preserve the
//! game value, and the fixed duplicator answers orbit-mates identically, so
//! the reduction is exact for both searches.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::duplicator::{duplicator_fixed, orbit_representatives};
use super::{GameState, Round, Side, SpoilerMove, SpoilerStrategy};
use crate::logic::{Formula, Term};
use crate::tree::Node;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchTier {
    Full,
    Orbit,
    Random,
}

impl fmt::Display for SearchTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchTier::Full => "full",
            SearchTier::Orbit => "orbit-reduced",
            SearchTier::Random => "random",
        })
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Game-tree nodes allowed for the full search.
    pub full_budget: usize,
    /// Game-tree nodes allowed for the orbit-reduced search.
    pub orbit_budget: usize,
    pub episodes: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { full_budget: 100_000, orbit_budget: 20_000_000, episodes: 2_000, seed: 0 }
    }
}

/// Which duplicator the spoiler searches against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// The fixed duplicator strategy.
    Fixed,
    /// Every duplicator: the game value.
    Minimax,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub spoiler_wins: bool,
    /// A winning line against the fixed duplicator, when one was found.
    pub line: Vec<Round>,
    pub tier: SearchTier,
    pub visited: usize,
    /// False when the random tier found no win, which proves nothing.
    pub conclusive: bool,
}

#[derive(Clone, Debug)]
pub struct ValueOutcome {
    pub spoiler_wins: bool,
    /// When the spoiler wins: a formula in the picks `x1, x2, ...` (a
    /// sentence from the start position) true on the left and false on
    /// the right, of quantifier rank at most the rounds left.
    pub sentence: Option<Formula>,
    pub first_move: Option<SpoilerMove>,
    pub tier: SearchTier,
    pub visited: usize,
    pub conclusive: bool,
}

struct OverBudget;

struct Searcher<'a> {
    state: GameState<'a>,
    tier: SearchTier,
    visited: usize,
    limit: usize,
}

impl<'a> Searcher<'a> {
    fn new(state: &GameState<'a>, tier: SearchTier, limit: usize) -> Self {
        Searcher { state: state.clone(), tier, visited: 0, limit }
    }

    fn tick(&mut self) -> Result<(), OverBudget> {
        self.visited += 1;
        if self.visited > self.limit {
            Err(OverBudget)
        } else {
            Ok(())
        }
    }

    fn moves(&self, side: Side) -> Vec<Node> {
        let e = self.state.structure(side);
        match self.tier {
            SearchTier::Orbit => orbit_representatives(e, self.state.picks(side)),
            _ => e.tree.nodes().to_vec(),
        }
    }

    fn oriented(side: Side, c: &Node, y: &Node) -> (Node, Node) {
        match side {
            Side::Left => (c.clone(), y.clone()),
            Side::Right => (y.clone(), c.clone()),
        }
    }

    fn against_fixed(&mut self) -> Result<Option<Vec<Round>>, OverBudget> {
        if self.state.rounds_left == 0 {
            return Ok(None);
        }
        for side in [Side::Left, Side::Right] {
            for c in self.moves(side) {
                self.tick()?;
                let m = SpoilerMove { side, node: c.clone() };
                let reply = duplicator_fixed(&self.state, &m).node;
                let round = Round { spoiler: m, reply: reply.clone() };
                let (l, r) = Self::oriented(side, &c, &reply);
                if !self.state.structure(side.other()).contains(&reply) || !self.state.extends(&l, &r) {
                    return Ok(Some(vec![round]));
                }
                self.state.push(side, c, reply);
                let sub = self.against_fixed();
                self.state.pop();
                if let Some(mut line) = sub? {
                    line.insert(0, round);
                    return Ok(Some(line));
                }
            }
        }
        Ok(None)
    }

    /// Spoiler's winning move and a formula true on the left and false on
    /// the right for the current picks, if the spoiler wins.
    fn minimax(&mut self) -> Result<Option<(SpoilerMove, Formula)>, OverBudget> {
        if self.state.rounds_left == 0 {
            return Ok(None);
        }
        let var = format!("x{}", self.state.rounds_played() + 1);
        for side in [Side::Left, Side::Right] {
            for c in self.moves(side) {
                let m = SpoilerMove { side, node: c.clone() };
                // The fixed reply first: it usually refutes the move at once.
                let mut replies = vec![duplicator_fixed(&self.state, &m).node];
                replies.extend(self.moves(side.other()));
                let mut parts: Vec<Formula> = Vec::new();
                let mut refuted = false;
                for y in replies {
                    self.tick()?;
                    if !self.state.structure(side.other()).contains(&y) {
                        continue;
                    }
                    let (l, r) = Self::oriented(side, &c, &y);
                    let part = if self.state.extends(&l, &r) {
                        self.state.push(side, c.clone(), y);
                        let sub = self.minimax();
                        self.state.pop();
                        match sub? {
                            Some((_, f)) => f,
                            None => {
                                refuted = true;
                                break;
                            }
                        }
                    } else {
                        let mut ls = self.state.picks_left.clone();
                        let mut rs = self.state.picks_right.clone();
                        ls.push(l);
                        rs.push(r);
                        distinguishing_literal(&ls, &rs)
                    };
                    if !parts.contains(&part) {
                        parts.push(part);
                    }
                }
                if !refuted {
                    let f = match side {
                        Side::Left => {
                            Formula::exists(&var, parts.into_iter().reduce(Formula::and).expect("eps replies"))
                        }
                        Side::Right => {
                            Formula::forall(&var, parts.into_iter().reduce(Formula::or).expect("eps replies"))
                        }
                    };
                    return Ok(Some((m, f)));
                }
            }
        }
        Ok(None)
    }
}

fn pick_term(i: usize) -> Term {
    if i == 0 {
        Term::Eps
    } else {
        Term::var(&format!("x{i}"))
    }
}

/// An atom or negated atom over `eps, x1, ..` true for `left` and false for
/// `right`. The inputs must not form a partial isomorphism.
fn distinguishing_literal(left: &[Node], right: &[Node]) -> Formula {
    let mut l = vec![Node::root()];
    l.extend(left.iter().cloned());
    let mut r = vec![Node::root()];
    r.extend(right.iter().cloned());
    let lit = |atom: Formula, truth: bool| if truth { atom } else { Formula::not(atom) };
    for i in 0..l.len() {
        if l[i].projection() != r[i].projection() {
            return Formula::label(l[i].projection(), pick_term(i));
        }
    }
    for i in 0..l.len() {
        for j in 0..l.len() {
            let (ti, tj) = (pick_term(i), pick_term(j));
            if (l[i] == l[j]) != (r[i] == r[j]) {
                return lit(Formula::eq(ti, tj), l[i] == l[j]);
            }
            if l[i].le(&l[j]) != r[i].le(&r[j]) {
                return lit(Formula::leq(ti, tj), l[i].le(&l[j]));
            }
            if (l[i].pred() == l[j]) != (r[i].pred() == r[j]) {
                return lit(Formula::eq(Term::pred(ti), tj), l[i].pred() == l[j]);
            }
        }
    }
    for i in 0..l.len() {
        for j in 0..l.len() {
            for k in 0..l.len() {
                let lm = l[i].meet(&l[j]) == l[k];
                if lm != (r[i].meet(&r[j]) == r[k]) {
                    return lit(Formula::eq(Term::meet(pick_term(i), pick_term(j)), pick_term(k)), lm);
                }
            }
        }
    }
    panic!("distinguishing_literal called on a partial isomorphism")
}

fn random_move(rng: &mut ChaCha8Rng, s: &GameState) -> SpoilerMove {
    let side = if rng.gen_bool(0.5) { Side::Left } else { Side::Right };
    let e = s.structure(side);
    SpoilerMove { side, node: e.tree.node(rng.gen_range(0..e.len())).clone() }
}

fn random_against_fixed(state: &GameState, config: &SearchConfig) -> (Option<Vec<Round>>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut visited = 0;
    for _ in 0..config.episodes {
        let mut s = state.clone();
        let mut line = Vec::new();
        while s.rounds_left > 0 {
            visited += 1;
            let m = random_move(&mut rng, &s);
            let reply = duplicator_fixed(&s, &m).node;
            line.push(Round { spoiler: m.clone(), reply: reply.clone() });
            let (l, r) = Searcher::oriented(m.side, &m.node, &reply);
            if !s.structure(m.side.other()).contains(&reply) || !s.extends(&l, &r) {
                return (Some(line), visited);
            }
            s.push(m.side, m.node, reply);
        }
    }
    (None, visited)
}

/// Searches for a spoiler line beating the fixed duplicator.
pub fn spoiler_search(state: &GameState, config: &SearchConfig) -> SearchOutcome {
    let mut visited = 0;
    for (tier, limit) in [(SearchTier::Full, config.full_budget), (SearchTier::Orbit, config.orbit_budget)] {
        let mut s = Searcher::new(state, tier, limit);
        let res = s.against_fixed();
        visited += s.visited;
        if let Ok(line) = res {
            return SearchOutcome {
                spoiler_wins: line.is_some(),
                line: line.unwrap_or_default(),
                tier,
                visited,
                conclusive: true,
            };
        }
    }
    let (line, v) = random_against_fixed(state, config);
    SearchOutcome {
        spoiler_wins: line.is_some(),
        conclusive: line.is_some(),
        line: line.unwrap_or_default(),
        tier: SearchTier::Random,
        visited: visited + v,
    }
}

/// Decides who wins the remaining game with optimal play on both sides.
pub fn game_value(state: &GameState, config: &SearchConfig) -> ValueOutcome {
    let mut visited = 0;
    for (tier, limit) in [(SearchTier::Full, config.full_budget), (SearchTier::Orbit, config.orbit_budget)] {
        let mut s = Searcher::new(state, tier, limit);
        let res = s.minimax();
        visited += s.visited;
        if let Ok(win) = res {
            let (first_move, sentence) = win.unzip();
            return ValueOutcome {
                spoiler_wins: sentence.is_some(),
                sentence,
                first_move,
                tier,
                visited,
                conclusive: true,
            };
        }
    }
    // Random play only bounds the game value against one duplicator.
    let (line, v) = random_against_fixed(state, config);
    ValueOutcome {
        spoiler_wins: false,
        sentence: None,
        first_move: line.and_then(|l| l.into_iter().next()).map(|r| r.spoiler),
        tier: SearchTier::Random,
        visited: visited + v,
        conclusive: false,
    }
}

/// Plays the best move found by search, or the root when none wins.
pub struct ExhaustiveSpoiler {
    pub target: Target,
    pub config: SearchConfig,
    tiers: Vec<SearchTier>,
}

impl ExhaustiveSpoiler {
    pub fn new(target: Target, config: SearchConfig) -> Self {
        ExhaustiveSpoiler { target, config, tiers: Vec::new() }
    }
}

impl SpoilerStrategy for ExhaustiveSpoiler {
    fn choose(&mut self, s: &GameState) -> SpoilerMove {
        let (tier, mv) = match self.target {
            Target::Fixed => {
                let out = spoiler_search(s, &self.config);
                (out.tier, out.line.into_iter().next().map(|r| r.spoiler))
            }
            Target::Minimax => {
                let out = game_value(s, &self.config);
                (out.tier, out.first_move)
            }
        };
        self.tiers.push(tier);
        mv.unwrap_or(SpoilerMove { side: Side::Left, node: Node::root() })
    }

    fn flags(&self) -> Vec<String> {
        self.tiers
            .iter()
            .enumerate()
            .filter(|(_, t)| **t != SearchTier::Full)
            .map(|(i, t)| format!("round {}: spoiler search used the {t} tier", i + 1))
            .collect()
    }
}

pub struct RandomSpoiler {
    rng: ChaCha8Rng,
}

impl RandomSpoiler {
    pub fn new(seed: u64) -> Self {
        RandomSpoiler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl SpoilerStrategy for RandomSpoiler {
    fn choose(&mut self, s: &GameState) -> SpoilerMove {
        random_move(&mut self.rng, s)
    }
}

/// Replays fixed moves, then picks the left root.
pub struct ScriptedSpoiler {
    moves: std::vec::IntoIter<SpoilerMove>,
}

impl ScriptedSpoiler {
    pub fn new(moves: Vec<SpoilerMove>) -> Self {
        ScriptedSpoiler { moves: moves.into_iter() }
    }
}

impl SpoilerStrategy for ScriptedSpoiler {
    fn choose(&mut self, _s: &GameState) -> SpoilerMove {
        self.moves.next().unwrap_or(SpoilerMove { side: Side::Left, node: Node::root() })
    }
}
