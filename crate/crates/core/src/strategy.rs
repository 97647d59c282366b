//! Concrete strategies, the rebasing operation and the counter-play harness.
//!
//! Every strategy is addressed by a descriptor string such as `midpoint_A`,
//! `seeded_random(B,42)` or `dodger_B(1/3)`; [`StrategyKind`] parses and prints
//! them and [`StrategyKind::build`] turns one into an [`Oracle`].

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::code::{anchored_value, Code};
use crate::enumeration::RatEnumeration;
use crate::game::{check_consistency, limit_bracket, GameConfig, GameError, History, LimitBracket, Oracle, Side, Strategy};
use crate::interval::Interval;
use crate::rat::Rat;
use crate::tree::{CantorTree, Path, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("unknown strategy descriptor {0:?}")]
    UnknownDescriptor(String),
    #[error("strategy {descriptor} plays for {actual}, not {expected}")]
    SideMismatch { descriptor: String, expected: Side, actual: Side },
    #[error("chaser target's first-level intervals {left} and {right} must lie strictly inside ({a0}, {b0})")]
    PrologueViolation { left: Interval, right: Interval, a0: Rat, b0: Rat },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("sampler returned {value}, outside ({lo}, {hi})")]
    SamplerOutOfRange { value: Rat, lo: Rat, hi: Rat },
    #[error("target point {s} must lie in ({a0}, {b0})")]
    TargetOutOfRange { s: Rat, a0: Rat, b0: Rat },
    #[error("committed history must end with a complete round")]
    PendingMove,
}

/// `a_n = (a_{n-1} + b_{n-1}) / 2`.
pub struct MidpointA;

impl Strategy for MidpointA {
    fn side(&self) -> Side {
        Side::A
    }
    fn descriptor(&self) -> String {
        "midpoint_A".into()
    }
    fn choose(&self, h: &History) -> Rat {
        let (lo, hi) = h.legal_bounds();
        lo.midpoint(&hi)
    }
}

/// `b_n = (a_n + b_{n-1}) / 2`.
pub struct MidpointB;

impl Strategy for MidpointB {
    fn side(&self) -> Side {
        Side::B
    }
    fn descriptor(&self) -> String {
        "midpoint_B".into()
    }
    fn choose(&self, h: &History) -> Rat {
        let (lo, hi) = h.legal_bounds();
        lo.midpoint(&hi)
    }
}

/// `b_n = a_n + (b_{n-1} - a_n) / 4^n`: closes in on A as fast as it can.
pub struct SqueezeB;

impl Strategy for SqueezeB {
    fn side(&self) -> Side {
        Side::B
    }
    fn descriptor(&self) -> String {
        "squeeze_B".into()
    }
    fn choose(&self, h: &History) -> Rat {
        let (lo, hi) = h.legal_bounds();
        let n = h.len() as u32 + 1;
        &lo + (&hi - &lo) * Rat::new(1, 4).pow(n)
    }
}

const LCG_MUL: u64 = 6364136223846793005;
const LCG_INC: u64 = 1442695040888963407;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// A pseudo-random legal move, a pure function of seed and history. The LCG
/// is seeded with `seed ^ fnv1a(history)`; its output steers a short walk down
/// the Stern–Brocot mediants of `(0, 1)`, and the resulting fraction `t` is
/// placed at `lo + t (hi - lo)` in the legal interval. Working in relative
/// coordinates keeps the move away from the ends of the interval no matter
/// how large the endpoints' denominators are.
pub struct SeededRandom {
    side: Side,
    seed: u64,
}

impl SeededRandom {
    pub fn new(side: Side, seed: u64) -> SeededRandom {
        SeededRandom { side, seed }
    }
}

impl Strategy for SeededRandom {
    fn side(&self) -> Side {
        self.side
    }
    fn descriptor(&self) -> String {
        format!("seeded_random({},{})", self.side, self.seed)
    }
    fn choose(&self, h: &History) -> Rat {
        let text: Vec<String> = h.arguments().iter().map(Rat::to_string).collect();
        let mut state = self.seed ^ fnv1a(text.join(",").as_bytes());
        let mut next = || {
            state = state.wrapping_mul(LCG_MUL).wrapping_add(LCG_INC);
            state
        };
        let (mut l, mut r) = (Rat::zero(), Rat::one());
        let steps = 1 + (next() >> 61);
        for _ in 0..steps {
            let m = l.mediant(&r);
            if next() >> 63 == 1 {
                l = m;
            } else {
                r = m;
            }
        }
        let t = l.mediant(&r);
        let (lo, hi) = h.legal_bounds();
        &lo + t * (&hi - &lo)
    }
}

/// Beats any countable target listed by `enumeration`: in round `n` it plays
/// `s_n` when that is legal, which pushes `s_n` out of every later bracket;
/// otherwise `s_n` is already outside and it plays the midpoint.
pub struct CountableKiller {
    enumeration: RatEnumeration,
}

impl CountableKiller {
    pub fn new(enumeration: RatEnumeration) -> CountableKiller {
        CountableKiller { enumeration }
    }

    /// The point handled in round `n`.
    pub fn target(&self, n: u64) -> Rat {
        self.enumeration.at(n)
    }
}

impl Strategy for CountableKiller {
    fn side(&self) -> Side {
        Side::B
    }
    fn descriptor(&self) -> String {
        format!("countable_killer_B({},{})", self.enumeration.lo(), self.enumeration.hi())
    }
    fn choose(&self, h: &History) -> Rat {
        let (lo, hi) = h.legal_bounds();
        let s = self.target(h.len() as u64 + 1);
        if lo < s && s < hi {
            s
        } else {
            lo.midpoint(&hi)
        }
    }
}

/// Plays exact points of a left-anchored target tree.
///
/// The first move is the anchored point of `"0"`. After B answers `b_n`, with
/// current prefix `p`, the chaser takes the least `j` with
/// `e_{|p|+j} < b_n - a_n`, moves to `p' = p 0^j 1` and plays its anchored
/// point. The interval of `p 0^j` starts at `a_n` and is shorter than
/// `b_n - a_n`, and its 1-child lies strictly right of `a_n`, so the move is
/// legal and is a point of the target.
///
/// On a history it did not produce itself it plays the midpoint, which keeps
/// it total on all legal histories.
pub struct TreeChaser {
    target: Arc<CantorTree>,
    label: String,
}

impl TreeChaser {
    pub fn new(target: Arc<CantorTree>, config: &GameConfig, label: String) -> Result<TreeChaser, StrategyError> {
        anchored_value(&Code::zeros(Arc::clone(&target), Path::root()))?;
        let (left, right) = target.children(&Path::root())?;
        if !(config.a0() < &left.lo && &right.hi < config.b0()) {
            return Err(StrategyError::PrologueViolation {
                left,
                right,
                a0: config.a0().clone(),
                b0: config.b0().clone(),
            });
        }
        Ok(TreeChaser { target, label })
    }

    pub fn target(&self) -> &Arc<CantorTree> {
        &self.target
    }

    fn point(&self, p: &Path) -> Rat {
        self.target.node(p).expect("generator-backed target").lo
    }

    /// The prefix whose anchored point the chaser plays next, or `None` if the
    /// history contains an A move the chaser would not have made.
    pub fn state(&self, h: &History) -> Option<Path> {
        let mut p = Path::root().child(false);
        for (a, b) in h.rounds() {
            if *a != self.point(&p) {
                return None;
            }
            let gap = b - a;
            let mut depth = p.len();
            let mut e = self.target.e(depth);
            while e >= gap {
                e = e * self.target.bound().ratio();
                depth += 1;
            }
            p = Path::from_bits(p.bits().iter().copied().chain(std::iter::repeat_n(false, depth - p.len())).chain([true]));
        }
        Some(p)
    }
}

impl Strategy for TreeChaser {
    fn side(&self) -> Side {
        Side::A
    }
    fn descriptor(&self) -> String {
        self.label.clone()
    }
    fn choose(&self, h: &History) -> Rat {
        match self.state(h) {
            Some(p) => self.point(&p),
            None => {
                let (lo, hi) = h.legal_bounds();
                lo.midpoint(&hi)
            }
        }
    }
}

/// Keeps B below a fixed point `s` whenever it legally can:
/// `b_n = (a_n + s) / 2`, otherwise the midpoint.
pub struct Dodger {
    s: Rat,
}

impl Dodger {
    pub fn new(s: Rat) -> Dodger {
        Dodger { s }
    }
}

impl Strategy for Dodger {
    fn side(&self) -> Side {
        Side::B
    }
    fn descriptor(&self) -> String {
        format!("dodger_B({})", self.s)
    }
    fn choose(&self, h: &History) -> Rat {
        let (lo, hi) = h.legal_bounds();
        let v = lo.midpoint(&self.s);
        if lo < v && v < hi {
            v
        } else {
            lo.midpoint(&hi)
        }
    }
}

/// `g` seen from the sub-game on `[a_N, b_N]` after a committed prefix:
/// `ĝ(sub) = g(committed ++ sub)`.
pub struct Rebased {
    inner: Oracle,
    committed: History,
}

impl Strategy for Rebased {
    fn side(&self) -> Side {
        self.inner.side()
    }
    fn descriptor(&self) -> String {
        let args: Vec<String> = self.committed.arguments().iter().map(Rat::to_string).collect();
        format!("rebased({};{})", self.inner.descriptor(), args.join(","))
    }
    fn choose(&self, sub: &History) -> Rat {
        match self.committed.concat(sub) {
            Ok(full) => self.inner.choose(&full),
            // a play of some other sub-game: stay legal
            Err(_) => {
                let (lo, hi) = sub.legal_bounds();
                lo.midpoint(&hi)
            }
        }
    }
}

/// The sub-game strategy after `committed`. `committed` must end after B's
/// reply; its last round `(a_N, b_N)` is the sub-game interval.
pub fn rebase_strategy_b(g: Oracle, committed: History) -> Result<Oracle, StrategyError> {
    if g.side() != Side::B {
        return Err(StrategyError::SideMismatch { descriptor: g.descriptor(), expected: Side::B, actual: g.side() });
    }
    if committed.pending_a().is_some() {
        return Err(StrategyError::PendingMove);
    }
    Ok(Arc::new(Rebased { inner: g, committed }))
}

/// The sub-game on `[a_N, b_N]` after `committed`.
pub fn sub_game(committed: &History) -> GameConfig {
    GameConfig::new(committed.last_a().clone(), committed.last_b().clone()).expect("chain invariant")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Restart {
    /// The round whose reply fell below the target.
    pub round: usize,
    /// `[a_N, b_N]`, the sub-game interval.
    pub interval: Interval,
    pub new_target: Rat,
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterplayTrace {
    pub strategy: String,
    pub initial_target: Rat,
    pub committed: History,
    pub restarts: Vec<Restart>,
    pub final_bracket: Option<LimitBracket>,
    /// The whole committed play checked against the original strategy.
    pub consistent: bool,
}

/// A's side of the counter-play: move halfway to the current target `s`.
///
/// Each B reply `b >= s` leaves `s` reachable and play goes on. A reply
/// `b < s` cuts `s` off: the round is committed, B's strategy is rebased onto
/// the sub-game `[a_N, b_N]`, a fresh target is drawn from it by `sampler`, and
/// play continues against the rebased strategy. The final play is checked
/// against the original `g`.
pub fn counterplay(
    g: Oracle,
    config: &GameConfig,
    s: Rat,
    sampler: &dyn Fn(&Interval) -> Rat,
    depth: usize,
) -> Result<CounterplayTrace, StrategyError> {
    if g.side() != Side::B {
        return Err(StrategyError::SideMismatch { descriptor: g.descriptor(), expected: Side::B, actual: g.side() });
    }
    if !(config.a0() < &s && &s < config.b0()) {
        return Err(StrategyError::TargetOutOfRange { s, a0: config.a0().clone(), b0: config.b0().clone() });
    }
    let mut committed = History::new(config.clone());
    let mut current: Oracle = Arc::clone(&g);
    let mut sub = History::new(config.clone());
    let mut target = s.clone();
    let mut restarts = Vec::new();
    for round in 1..=depth {
        let a = committed.last_a().midpoint(&target);
        sub.play(Side::A, a.clone())?;
        let b = current.choose(&sub);
        sub.play(Side::B, b.clone())?;
        committed.play(Side::A, a)?;
        committed.play(Side::B, b.clone())?;
        if b < target {
            let interval = Interval::new(committed.last_a().clone(), b);
            let fresh = sampler(&interval);
            if !interval.contains_open(&fresh) {
                return Err(StrategyError::SamplerOutOfRange { value: fresh, lo: interval.lo, hi: interval.hi });
            }
            current = rebase_strategy_b(Arc::clone(&g), committed.clone())?;
            sub = History::new(sub_game(&committed));
            restarts.push(Restart { round, interval, new_target: fresh.clone() });
            target = fresh;
        }
    }
    let consistent = check_consistency(&committed, g.as_ref(), Side::B).is_consistent();
    Ok(CounterplayTrace {
        strategy: g.descriptor(),
        initial_target: s,
        final_bracket: limit_bracket(&committed).ok(),
        committed,
        restarts,
        consistent,
    })
}

/// Midpoint of the surviving interval: the default fresh-target rule.
pub fn midpoint_sampler(i: &Interval) -> Rat {
    i.midpoint()
}

/// A strategy descriptor. Parameters left out are filled in from the game
/// interval when the strategy is built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategyKind {
    MidpointA,
    MidpointB,
    SqueezeB,
    SeededRandom { side: Side, seed: u64 },
    /// Over `[lo, hi]`; defaults to the game interval.
    CountableKillerB { range: Option<(Rat, Rat)> },
    /// Middle-thirds set on `[lo, hi]`; defaults to the game interval with an
    /// eighth of its width removed at each end.
    TreeChaserA { range: Option<(Rat, Rat)> },
    DodgerB { s: Rat },
}

impl StrategyKind {
    pub fn side(&self) -> Side {
        match self {
            StrategyKind::MidpointA | StrategyKind::TreeChaserA { .. } => Side::A,
            StrategyKind::MidpointB
            | StrategyKind::SqueezeB
            | StrategyKind::CountableKillerB { .. }
            | StrategyKind::DodgerB { .. } => Side::B,
            StrategyKind::SeededRandom { side, .. } => *side,
        }
    }

    /// Parses a descriptor. Short names (`midpoint`, `random(7)`, `chaser`,
    /// ...) take their side from `side`.
    pub fn parse(text: &str, side: Option<Side>) -> Result<StrategyKind, StrategyError> {
        let unknown = || StrategyError::UnknownDescriptor(text.to_string());
        let t = text.trim();
        let (name, args) = match t.split_once('(') {
            Some((n, rest)) => {
                let inner = rest.strip_suffix(')').ok_or_else(unknown)?;
                (n.trim(), inner.split(',').map(str::trim).filter(|a| !a.is_empty()).collect::<Vec<_>>())
            }
            None => (t, Vec::new()),
        };
        let (base, named_side) = match name.rsplit_once('_') {
            Some((b, "A")) => (b, Some(Side::A)),
            Some((b, "B")) => (b, Some(Side::B)),
            _ => (name, None),
        };
        let rat = |s: &str| s.parse::<Rat>().map_err(|_| unknown());
        let range = |args: &[&str]| -> Result<Option<(Rat, Rat)>, StrategyError> {
            match args {
                [] => Ok(None),
                [lo, hi] => Ok(Some((rat(lo)?, rat(hi)?))),
                _ => Err(unknown()),
            }
        };
        let mut args = args;
        // seeded_random(A,42): the side may also come as the first argument
        let arg_side = match (base, args.first()) {
            ("seeded_random" | "random", Some(&"A")) => Some(Side::A),
            ("seeded_random" | "random", Some(&"B")) => Some(Side::B),
            _ => None,
        };
        if arg_side.is_some() {
            args.remove(0);
        }
        let given = named_side.or(arg_side);
        let resolved = match (given, side) {
            (Some(g), Some(s)) if g != s => {
                return Err(StrategyError::SideMismatch { descriptor: text.to_string(), expected: s, actual: g })
            }
            (g, s) => g.or(s),
        };
        let kind = match (base, resolved) {
            ("midpoint", Some(Side::A)) if args.is_empty() => StrategyKind::MidpointA,
            ("midpoint", Some(Side::B)) if args.is_empty() => StrategyKind::MidpointB,
            ("squeeze", Some(Side::B) | None) if args.is_empty() => StrategyKind::SqueezeB,
            ("seeded_random" | "random", Some(side)) => match args.as_slice() {
                [seed] => StrategyKind::SeededRandom { side, seed: seed.parse().map_err(|_| unknown())? },
                _ => return Err(unknown()),
            },
            ("countable_killer" | "killer", Some(Side::B) | None) => StrategyKind::CountableKillerB { range: range(&args)? },
            ("tree_chaser" | "chaser", Some(Side::A) | None) => StrategyKind::TreeChaserA { range: range(&args)? },
            ("dodger", Some(Side::B) | None) => match args.as_slice() {
                [s] => StrategyKind::DodgerB { s: rat(s)? },
                _ => return Err(unknown()),
            },
            _ => return Err(unknown()),
        };
        if let Some(s) = side {
            if kind.side() != s {
                return Err(StrategyError::SideMismatch { descriptor: text.to_string(), expected: s, actual: kind.side() });
            }
        }
        Ok(kind)
    }

    /// The chaser's default target: middle thirds on `[a0 + w/8, b0 - w/8]`.
    pub fn default_chaser_range(config: &GameConfig) -> (Rat, Rat) {
        let eighth = (config.b0() - config.a0()) / Rat::from_int(8);
        (config.a0() + &eighth, config.b0() - &eighth)
    }

    pub fn build(&self, config: &GameConfig) -> Result<Oracle, StrategyError> {
        Ok(match self {
            StrategyKind::MidpointA => Arc::new(MidpointA),
            StrategyKind::MidpointB => Arc::new(MidpointB),
            StrategyKind::SqueezeB => Arc::new(SqueezeB),
            StrategyKind::SeededRandom { side, seed } => Arc::new(SeededRandom::new(*side, *seed)),
            StrategyKind::CountableKillerB { range } => {
                let (lo, hi) = range.clone().unwrap_or((config.a0().clone(), config.b0().clone()));
                let e = RatEnumeration::new(lo.clone(), hi.clone())
                    .map_err(|_| StrategyError::UnknownDescriptor(format!("countable_killer_B({lo},{hi})")))?;
                Arc::new(CountableKiller::new(e))
            }
            StrategyKind::TreeChaserA { range } => {
                let (lo, hi) = range.clone().unwrap_or_else(|| StrategyKind::default_chaser_range(config));
                let target = Arc::new(CantorTree::middle_thirds(Interval::new(lo.clone(), hi.clone()))?);
                Arc::new(TreeChaser::new(target, config, format!("tree_chaser_A({lo},{hi})"))?)
            }
            StrategyKind::DodgerB { s } => Arc::new(Dodger::new(s.clone())),
        })
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyKind::MidpointA => f.write_str("midpoint_A"),
            StrategyKind::MidpointB => f.write_str("midpoint_B"),
            StrategyKind::SqueezeB => f.write_str("squeeze_B"),
            StrategyKind::SeededRandom { side, seed } => write!(f, "seeded_random({side},{seed})"),
            StrategyKind::CountableKillerB { range: None } => f.write_str("countable_killer_B"),
            StrategyKind::CountableKillerB { range: Some((lo, hi)) } => write!(f, "countable_killer_B({lo},{hi})"),
            StrategyKind::TreeChaserA { range: None } => f.write_str("tree_chaser_A"),
            StrategyKind::TreeChaserA { range: Some((lo, hi)) } => write!(f, "tree_chaser_A({lo},{hi})"),
            StrategyKind::DodgerB { s } => write!(f, "dodger_B({s})"),
        }
    }
}

impl FromStr for StrategyKind {
    type Err = StrategyError;
    fn from_str(s: &str) -> Result<StrategyKind, StrategyError> {
        StrategyKind::parse(s, None)
    }
}

/// Parses and builds in one step.
pub fn make_oracle(descriptor: &str, side: Option<Side>, config: &GameConfig) -> Result<Oracle, StrategyError> {
    StrategyKind::parse(descriptor, side)?.build(config)
}
