//! The Cantor game: configuration, plays, strategy oracles, consistency.
//!
//! Player A picks `a_n` with `a_{n-1} < a_n < b_{n-1}`, then player B picks
//! `b_n` with `a_n < b_n < b_{n-1}`. A wins when `lim a_n` lies in the target.
//! Infinite plays are handled as finite prefixes; the limit is reported as a
//! [`LimitBracket`].

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::Interval;
use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

impl std::str::FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Side, String> {
        match s {
            "A" | "a" => Ok(Side::A),
            "B" | "b" => Ok(Side::B),
            _ => Err(format!("unknown side {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("invalid game interval: need a0 < b0, got [{a0}, {b0}]")]
    InvalidConfig { a0: Rat, b0: Rat },
    #[error("illegal move {value} by {side}: needs {lo} < value < {hi}")]
    IllegalMove { side: Side, value: Rat, lo: Rat, hi: Rat },
    #[error("it is {expected}'s turn, not {got}'s")]
    WrongTurn { expected: Side, got: Side },
    #[error("play has no complete rounds")]
    NoRounds,
    #[error("oracle {descriptor} plays for {actual}, expected {expected}")]
    WrongOracleSide { descriptor: String, expected: Side, actual: Side },
    #[error("malformed play: {0}")]
    Malformed(String),
}

/// The game interval `[a0, b0]`, `a0 < b0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct GameConfig {
    a0: Rat,
    b0: Rat,
}

impl GameConfig {
    pub fn new(a0: Rat, b0: Rat) -> Result<GameConfig, GameError> {
        if a0 >= b0 {
            return Err(GameError::InvalidConfig { a0, b0 });
        }
        Ok(GameConfig { a0, b0 })
    }

    pub fn unit() -> GameConfig {
        GameConfig { a0: Rat::zero(), b0: Rat::one() }
    }

    pub fn a0(&self) -> &Rat {
        &self.a0
    }

    pub fn b0(&self) -> &Rat {
        &self.b0
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.a0.clone(), self.b0.clone())
    }
}

impl<'de> Deserialize<'de> for GameConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<GameConfig, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            a0: Rat,
            b0: Rat,
        }
        let raw = Raw::deserialize(d)?;
        GameConfig::new(raw.a0, raw.b0).map_err(serde::de::Error::custom)
    }
}

/// A finite prefix of a play: complete rounds `(a_i, b_i)` plus A's move awaiting
/// B's reply, if any. Every constructor and mutator re-validates the chain
/// `a0 < a1 < ... < an < bn < ... < b0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct History {
    config: GameConfig,
    rounds: Vec<(Rat, Rat)>,
    pending_a: Option<Rat>,
}

impl History {
    pub fn new(config: GameConfig) -> History {
        History { config, rounds: Vec::new(), pending_a: None }
    }

    /// Builds a history from raw values, validating every move.
    pub fn from_parts(
        config: GameConfig,
        rounds: Vec<(Rat, Rat)>,
        pending_a: Option<Rat>,
    ) -> Result<History, GameError> {
        let mut h = History::new(config);
        for (a, b) in rounds {
            h.play(Side::A, a)?;
            h.play(Side::B, b)?;
        }
        if let Some(a) = pending_a {
            h.play(Side::A, a)?;
        }
        Ok(h)
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn rounds(&self) -> &[(Rat, Rat)] {
        &self.rounds
    }

    pub fn pending_a(&self) -> Option<&Rat> {
        self.pending_a.as_ref()
    }

    /// Number of complete rounds.
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty() && self.pending_a.is_none()
    }

    pub fn to_move(&self) -> Side {
        if self.pending_a.is_some() {
            Side::B
        } else {
            Side::A
        }
    }

    /// Latest `a_n` (or `a0`).
    pub fn last_a(&self) -> &Rat {
        self.rounds.last().map(|r| &r.0).unwrap_or(&self.config.a0)
    }

    /// Latest `b_n` (or `b0`).
    pub fn last_b(&self) -> &Rat {
        self.rounds.last().map(|r| &r.1).unwrap_or(&self.config.b0)
    }

    /// Open interval the next move must fall in.
    pub fn legal_bounds(&self) -> (Rat, Rat) {
        match &self.pending_a {
            None => (self.last_a().clone(), self.last_b().clone()),
            Some(a) => (a.clone(), self.last_b().clone()),
        }
    }

    /// Pure variant of [`History::play`].
    pub fn apply_move(&self, side: Side, value: Rat) -> Result<History, GameError> {
        let mut next = self.clone();
        next.play(side, value)?;
        Ok(next)
    }

    pub fn play(&mut self, side: Side, value: Rat) -> Result<(), GameError> {
        let expected = self.to_move();
        if side != expected {
            return Err(GameError::WrongTurn { expected, got: side });
        }
        let (lo, hi) = self.legal_bounds();
        if !(lo < value && value < hi) {
            return Err(GameError::IllegalMove { side, value, lo, hi });
        }
        match self.pending_a.take() {
            None => self.pending_a = Some(value),
            Some(a) => self.rounds.push((a, value)),
        }
        Ok(())
    }

    /// The first `n` complete rounds, without a pending move.
    pub fn prefix(&self, n: usize) -> History {
        History {
            config: self.config.clone(),
            rounds: self.rounds[..n].to_vec(),
            pending_a: None,
        }
    }

    /// First `n` rounds followed by A's move of round `n + 1`.
    pub fn prefix_with_a(&self, n: usize) -> History {
        let a = self
            .rounds
            .get(n)
            .map(|r| r.0.clone())
            .or_else(|| if n == self.rounds.len() { self.pending_a.clone() } else { None })
            .expect("round exists");
        History {
            config: self.config.clone(),
            rounds: self.rounds[..n].to_vec(),
            pending_a: Some(a),
        }
    }

    /// Argument list in the order strategies consume it:
    /// `a0, b0, a1, b1, ..., an, bn[, a_{n+1}]`.
    pub fn arguments(&self) -> Vec<Rat> {
        let mut v = vec![self.config.a0.clone(), self.config.b0.clone()];
        for (a, b) in &self.rounds {
            v.push(a.clone());
            v.push(b.clone());
        }
        if let Some(a) = &self.pending_a {
            v.push(a.clone());
        }
        v
    }

    /// Inverse of [`History::arguments`].
    pub fn from_arguments(args: &[Rat]) -> Result<History, GameError> {
        if args.len() < 2 {
            return Err(GameError::Malformed("need at least a0 and b0".into()));
        }
        let config = GameConfig::new(args[0].clone(), args[1].clone())?;
        let mut h = History::new(config);
        for (i, v) in args[2..].iter().enumerate() {
            let side = if i % 2 == 0 { Side::A } else { Side::B };
            h.play(side, v.clone())?;
        }
        Ok(h)
    }

    /// `self` followed by the moves of `sub`, a play of the sub-game on
    /// `[last_a, last_b]`. `self` must end on a complete round.
    pub fn concat(&self, sub: &History) -> Result<History, GameError> {
        if self.pending_a.is_some() {
            return Err(GameError::Malformed("prefix ends with a pending move".into()));
        }
        if sub.config.a0 != *self.last_a() || sub.config.b0 != *self.last_b() {
            return Err(GameError::Malformed(format!(
                "sub-game [{}, {}] does not start at the prefix bracket [{}, {}]",
                sub.config.a0,
                sub.config.b0,
                self.last_a(),
                self.last_b()
            )));
        }
        let mut h = self.clone();
        for (a, b) in &sub.rounds {
            h.play(Side::A, a.clone())?;
            h.play(Side::B, b.clone())?;
        }
        if let Some(a) = &sub.pending_a {
            h.play(Side::A, a.clone())?;
        }
        Ok(h)
    }
}

#[derive(Serialize, Deserialize)]
struct HistoryFile {
    config: GameConfig,
    rounds: Vec<(Rat, Rat)>,
    pending_a: Option<Rat>,
}

impl<'de> Deserialize<'de> for History {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<History, D::Error> {
        let f = HistoryFile::deserialize(d)?;
        History::from_parts(f.config, f.rounds, f.pending_a).map_err(serde::de::Error::custom)
    }
}

/// A deterministic move rule for one side: the per-round move functions
/// collapsed into one procedure over the whole history.
///
/// Implementations must be pure functions of the history (and any fixed
/// parameters such as a seed) and must return a legal move for every legal
/// history on which it is their turn.
pub trait Strategy: Send + Sync {
    fn side(&self) -> Side;

    /// Stable identity: kind, parameters and seed.
    fn descriptor(&self) -> String;

    fn choose(&self, history: &History) -> Rat;
}

pub type Oracle = Arc<dyn Strategy>;

impl fmt::Debug for dyn Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Strategy({})", self.descriptor())
    }
}

fn check_side(oracle: &dyn Strategy, expected: Side) -> Result<(), GameError> {
    if oracle.side() != expected {
        return Err(GameError::WrongOracleSide {
            descriptor: oracle.descriptor(),
            expected,
            actual: oracle.side(),
        });
    }
    Ok(())
}

/// Lets the oracle for whoever is to move choose, and applies the move.
pub fn step(history: &mut History, oracle: &dyn Strategy) -> Result<Rat, GameError> {
    check_side(oracle, history.to_move())?;
    let v = oracle.choose(history);
    history.play(oracle.side(), v.clone())?;
    Ok(v)
}

/// Plays `rounds` complete rounds from the empty history.
pub fn run(
    config: &GameConfig,
    sa: &dyn Strategy,
    sb: &dyn Strategy,
    rounds: usize,
) -> Result<History, GameError> {
    check_side(sa, Side::A)?;
    check_side(sb, Side::B)?;
    let mut h = History::new(config.clone());
    for _ in 0..rounds {
        step(&mut h, sa)?;
        step(&mut h, sb)?;
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum Consistency {
    Consistent,
    /// `round` is 1-based.
    FirstDivergence { round: usize, expected: Rat, found: Rat },
}

impl Consistency {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Consistency::Consistent)
    }
}

/// Re-invokes `oracle` on every prefix of `h` where `side` moved and compares
/// its answer with the recorded move.
pub fn check_consistency(h: &History, oracle: &dyn Strategy, side: Side) -> Consistency {
    let n = h.rounds.len();
    match side {
        Side::A => {
            let moves = h.rounds.iter().map(|r| &r.0).chain(h.pending_a.iter());
            for (i, found) in moves.enumerate() {
                let expected = oracle.choose(&h.prefix(i));
                if &expected != found {
                    return Consistency::FirstDivergence { round: i + 1, expected, found: found.clone() };
                }
            }
        }
        Side::B => {
            for i in 0..n {
                let expected = oracle.choose(&h.prefix_with_a(i));
                let found = &h.rounds[i].1;
                if &expected != found {
                    return Consistency::FirstDivergence { round: i + 1, expected, found: found.clone() };
                }
            }
        }
    }
    Consistency::Consistent
}

/// `(a_n, b_n)` at the deepest complete round; the limit `a` of any infinite
/// continuation satisfies `lo < a < hi`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitBracket {
    pub lo: Rat,
    pub hi: Rat,
    pub depth: usize,
}

impl LimitBracket {
    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }
}

pub fn limit_bracket(h: &History) -> Result<LimitBracket, GameError> {
    let (a, b) = h.rounds.last().ok_or(GameError::NoRounds)?;
    Ok(LimitBracket { lo: a.clone(), hi: b.clone(), depth: h.rounds.len() })
}
