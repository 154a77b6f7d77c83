//! Ehrenfeucht-Fraisse games between expansions.

mod duplicator;
mod search;

use std::fmt;

use thiserror::Error;

use crate::plan::Expansion;
use crate::tree::Node;

pub use duplicator::{duplicator_fixed, fresh_node, image_in, orbit_representatives, FixedDuplicator};
pub use search::{
    game_value, spoiler_search, ExhaustiveSpoiler, RandomSpoiler, ScriptedSpoiler, SearchConfig, SearchOutcome,
    SearchTier, Target, ValueOutcome,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("the game still has {0} rounds to play")]
    NotFinished(usize),
    #[error("no rounds left")]
    NoRoundsLeft,
    #[error("bad transcript line {line}: {message}")]
    Transcript { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "L",
            Side::Right => "R",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpoilerMove {
    pub side: Side,
    pub node: Node,
}

/// A duplicator answer; the flag is raised when the strategy could not
/// follow its rule because a structure was too small.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reply {
    pub node: Node,
    pub precondition_violated: bool,
}

#[derive(Clone, Debug)]
pub struct GameState<'a> {
    pub left: &'a Expansion,
    pub right: &'a Expansion,
    pub picks_left: Vec<Node>,
    pub picks_right: Vec<Node>,
    pub rounds_left: usize,
}

impl<'a> GameState<'a> {
    pub fn new(left: &'a Expansion, right: &'a Expansion, rounds: usize) -> Self {
        GameState { left, right, picks_left: Vec::new(), picks_right: Vec::new(), rounds_left: rounds }
    }

    pub fn structure(&self, side: Side) -> &'a Expansion {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    pub fn picks(&self, side: Side) -> &[Node] {
        match side {
            Side::Left => &self.picks_left,
            Side::Right => &self.picks_right,
        }
    }

    pub fn rounds_played(&self) -> usize {
        self.picks_left.len()
    }

    /// Records a round: `node` on `side` answered by `reply` on the other.
    pub fn push(&mut self, side: Side, node: Node, reply: Node) {
        let (l, r) = match side {
            Side::Left => (node, reply),
            Side::Right => (reply, node),
        };
        self.picks_left.push(l);
        self.picks_right.push(r);
        self.rounds_left = self.rounds_left.saturating_sub(1);
    }

    pub fn pop(&mut self) {
        self.picks_left.pop();
        self.picks_right.pop();
        self.rounds_left += 1;
    }

    /// Whether picks (with `eps` for `eps`) form a partial isomorphism.
    pub fn is_partial_iso(&self) -> bool {
        let l = with_root(&self.picks_left);
        let r = with_root(&self.picks_right);
        (1..l.len()).all(|m| consistent_at(&l[..=m], &r[..=m]))
    }

    /// Whether adding the pair `(l, r)` keeps a partial isomorphism, given
    /// that the current picks already form one.
    pub fn extends(&self, l: &Node, r: &Node) -> bool {
        let mut ls = with_root(&self.picks_left);
        let mut rs = with_root(&self.picks_right);
        ls.push(l.clone());
        rs.push(r.clone());
        consistent_at(&ls, &rs)
    }
}

fn with_root(picks: &[Node]) -> Vec<Node> {
    let mut v = Vec::with_capacity(picks.len() + 2);
    v.push(Node::root());
    v.extend(picks.iter().cloned());
    v
}

/// Checks every atomic relation involving the last element of `l`, `r`.
fn consistent_at(l: &[Node], r: &[Node]) -> bool {
    let m = l.len() - 1;
    let (lm, rm) = (&l[m], &r[m]);
    if lm.projection() != rm.projection() {
        return false;
    }
    for i in 0..=m {
        let (li, ri) = (&l[i], &r[i]);
        let same = |a: bool, b: bool| a == b;
        if !same(li == lm, ri == rm)
            || !same(li.le(lm), ri.le(rm))
            || !same(lm.le(li), rm.le(ri))
            || !same(li.pred() == *lm, ri.pred() == *rm)
            || !same(lm.pred() == *li, rm.pred() == *ri)
        {
            return false;
        }
        for j in 0..=m {
            let (lj, rj) = (&l[j], &r[j]);
            if !same(lm.meet(li) == *lj, rm.meet(ri) == *rj) || !same(li.meet(lj) == *lm, ri.meet(rj) == *rm) {
                return false;
            }
        }
    }
    true
}

/// The duplicator wins a finished game iff the picks form a partial isomorphism.
pub fn game_won(s: &GameState) -> Result<bool, GameError> {
    if s.rounds_left > 0 {
        return Err(GameError::NotFinished(s.rounds_left));
    }
    Ok(s.is_partial_iso())
}

pub trait SpoilerStrategy {
    fn choose(&mut self, s: &GameState) -> SpoilerMove;

    /// Notes about how the moves were produced, e.g. a search fallback.
    fn flags(&self) -> Vec<String> {
        Vec::new()
    }
}

pub trait DuplicatorStrategy {
    fn respond(&mut self, s: &GameState, m: &SpoilerMove) -> Reply;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Winner {
    Spoiler,
    Duplicator,
}

impl fmt::Display for Winner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Winner::Spoiler => "S",
            Winner::Duplicator => "D",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Round {
    pub spoiler: SpoilerMove,
    pub reply: Node,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub winner: Winner,
    pub rounds: Vec<Round>,
    pub flags: Vec<String>,
}

impl Outcome {
    /// Lines `round;side;node`, flags as `#` comments, then `winner=S|D`.
    pub fn transcript(&self) -> String {
        let mut out = String::new();
        for (i, r) in self.rounds.iter().enumerate() {
            out.push_str(&format!("{};{};{}\n", i + 1, r.spoiler.side, r.spoiler.node));
            out.push_str(&format!("{};{};{}\n", i + 1, r.spoiler.side.other(), r.reply));
        }
        for f in &self.flags {
            out.push_str(&format!("# {f}\n"));
        }
        out.push_str(&format!("winner={}\n", self.winner));
        out
    }
}

/// Parses the move lines of a transcript into rounds and the winner.
pub fn parse_transcript(text: &str) -> Result<(Vec<Round>, Option<Winner>), GameError> {
    let mut rounds = Vec::new();
    let mut pending: Option<SpoilerMove> = None;
    let mut winner = None;
    for (i, line) in text.lines().enumerate() {
        let bad = |message: &str| GameError::Transcript { line: i + 1, message: message.to_string() };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(w) = line.strip_prefix("winner=") {
            winner = Some(match w {
                "S" => Winner::Spoiler,
                "D" => Winner::Duplicator,
                _ => return Err(bad("winner must be S or D")),
            });
            continue;
        }
        let parts: Vec<&str> = line.split(';').collect();
        let [round, side, node] = parts[..] else { return Err(bad("expected round;side;node")) };
        let round: usize = round.parse().map_err(|_| bad("bad round number"))?;
        let side = match side {
            "L" => Side::Left,
            "R" => Side::Right,
            _ => return Err(bad("side must be L or R")),
        };
        let node: Node = node.parse().map_err(|_| bad("bad node"))?;
        match pending.take() {
            None => {
                if round != rounds.len() + 1 {
                    return Err(bad("rounds out of order"));
                }
                pending = Some(SpoilerMove { side, node });
            }
            Some(sp) => {
                if side != sp.side.other() || round != rounds.len() + 1 {
                    return Err(bad("reply must be on the other side in the same round"));
                }
                rounds.push(Round { spoiler: sp, reply: node });
            }
        }
    }
    if pending.is_some() {
        return Err(GameError::Transcript { line: text.lines().count(), message: "unanswered move".into() });
    }
    Ok((rounds, winner))
}

/// Plays `k` rounds. A move naming a node outside its structure loses the
/// game for the player who made it.
pub fn play(
    left: &Expansion,
    right: &Expansion,
    k: usize,
    spoiler: &mut dyn SpoilerStrategy,
    duplicator: &mut dyn DuplicatorStrategy,
) -> Outcome {
    let mut s = GameState::new(left, right, k);
    let mut rounds = Vec::new();
    let mut flags = Vec::new();
    let mut winner = None;
    for round in 1..=k {
        let m = spoiler.choose(&s);
        if !s.structure(m.side).contains(&m.node) {
            flags.push(format!("round {round}: illegal spoiler move {}", m.node));
            winner = Some(Winner::Duplicator);
            break;
        }
        let reply = duplicator.respond(&s, &m);
        if reply.precondition_violated {
            flags.push(format!("round {round}: duplicator precondition violated"));
        }
        rounds.push(Round { spoiler: m.clone(), reply: reply.node.clone() });
        if !s.structure(m.side.other()).contains(&reply.node) {
            flags.push(format!("round {round}: illegal duplicator move {}", reply.node));
            winner = Some(Winner::Spoiler);
            break;
        }
        s.push(m.side, m.node, reply.node);
    }
    flags.extend(spoiler.flags());
    let winner = winner.unwrap_or(if s.is_partial_iso() { Winner::Duplicator } else { Winner::Spoiler });
    Outcome { winner, rounds, flags }
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
    fn game_won_examples() {
        let a2 = exp("(1 (inf))", 2);
        let a3 = exp("(1 (inf))", 3);
        let s = GameState::new(&a2, &a3, 0);
        assert_eq!(game_won(&s), Ok(true));

        let mut s = GameState::new(&a2, &a3, 1);
        assert_eq!(game_won(&s), Err(GameError::NotFinished(1)));
        s.push(Side::Left, Node::root(), n("0:1"));
        assert_eq!(game_won(&s), Ok(false));

        let mut s = GameState::new(&a2, &a3, 2);
        s.push(Side::Left, n("0:0"), n("0:2"));
        s.push(Side::Left, n("0:1"), n("0:0"));
        assert_eq!(game_won(&s), Ok(true));
    }

    #[test]
    fn meets_and_preds_are_checked() {
        let b = exp("(1 (inf (inf)))", 2);
        let mut s = GameState::new(&b, &b, 3);
        s.push(Side::Left, n("0:0/0:0"), n("0:0/0:0"));
        // Same label, but the meet with the first pick differs.
        assert!(!s.extends(&n("0:0/0:1"), &n("0:1/0:1")));
        assert!(s.extends(&n("0:0/0:1"), &n("0:0/0:1")));
        // pred(first) = third on the left only.
        assert!(!s.extends(&n("0:0"), &n("0:1")));
    }

    #[test]
    fn transcript_round_trip() {
        let o = Outcome {
            winner: Winner::Duplicator,
            rounds: vec![Round { spoiler: SpoilerMove { side: Side::Right, node: n("0:1") }, reply: n("0:0") }],
            flags: vec!["note".into()],
        };
        let t = o.transcript();
        assert_eq!(t, "1;R;0:1\n1;L;0:0\n# note\nwinner=D\n");
        let (rounds, w) = parse_transcript(&t).unwrap();
        assert_eq!(rounds, o.rounds);
        assert_eq!(w, Some(Winner::Duplicator));
        assert!(parse_transcript("1;L;0:0\n1;L;0:1\n").is_err());
    }

    #[test]
    fn zero_rounds() {
        let a = exp("(1 (inf))", 1);
        let b = exp("(1 (inf))", 4);
        let o = play(&a, &b, 0, &mut ScriptedSpoiler::new(vec![]), &mut FixedDuplicator);
        assert_eq!(o.winner, Winner::Duplicator);
        assert_eq!(o.transcript(), "winner=D\n");
    }

    #[test]
    fn illegal_moves_lose() {
        let a = exp("(1 (inf))", 1);
        let m = SpoilerMove { side: Side::Left, node: n("0:5") };
        let o = play(&a, &a, 1, &mut ScriptedSpoiler::new(vec![m]), &mut FixedDuplicator);
        assert_eq!(o.winner, Winner::Duplicator);
        assert!(o.flags[0].contains("illegal spoiler"));
    }
}
