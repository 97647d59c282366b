//! Building a generalized Cantor set inside the limit set of an arbitrary
//! strategy, and replaying the plays that reach its points.
//!
//! For an A-strategy `f` the construction starts from `c = a_1 = f()`,
//! `d = b_0` and, at every node `p` with midpoint `u_p`, picks
//!
//! ```text
//! d_p1 = first enumerated rational in (c_p, u_p)     c_p1 = f(ledger(p), c_p, d_p1)
//! d_p0 = first enumerated rational in (c_p, c_p1)    c_p0 = f(ledger(p), c_p, d_p0)
//! ```
//!
//! so that `c_p < c_p0 < d_p0 < c_p1 < d_p1 < u_p < d_p`. Left endpoints are A's
//! answers, right endpoints are B's moves. The ledger of a node is the history
//! that produced its left endpoint, and it is itself a play consistent with `f`.
//!
//! For a B-strategy `g` the construction mirrors this upward from the
//! midpoint, starting from `c = a_0`, `d = b_0`:
//!
//! ```text
//! c_p0 = first enumerated rational in (u_p, d_p)     d_p0 = g(ledger(p), c_p0)
//! c_p1 = first enumerated rational in (d_p0, d_p)    d_p1 = g(ledger(p), c_p1)
//! ```
//!
//! Both trees satisfy the width bound `e_n = (b_0 - a_0) / 2^n`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumeration::{EnumError, RatEnumeration};
use crate::game::{check_consistency, Consistency, GameConfig, GameError, History, Side, Strategy};
use crate::interval::Interval;
use crate::rat::Rat;
use crate::tree::{BoundRule, CantorTree, Path, RuleSpec, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("oracle {descriptor} broke its contract at node {path}: answered {value} where {lo} < value < {hi} is required (history {history:?})")]
    OracleContractViolation { descriptor: String, path: Path, history: Vec<Rat>, value: Rat, lo: Rat, hi: Rat },
    #[error(transparent)]
    Enumeration(#[from] EnumError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("code of length {requested} exceeds extraction depth {depth}")]
    DepthExceeded { requested: usize, depth: usize },
    #[error("enumeration range [{lo}, {hi}] differs from the game interval")]
    RangeMismatch { lo: Rat, hi: Rat },
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("malformed extraction file: {0}")]
    Malformed(String),
}

/// Values fixed before the recursion starts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Initial {
    /// A's opening move (A-side only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<Rat>,
    pub c: Rat,
    pub d: Rat,
    pub u: Rat,
}

#[derive(Debug, Clone)]
pub struct ExtractedTree {
    pub tree: Arc<CantorTree>,
    pub side: Side,
    pub strategy: String,
    pub config: GameConfig,
    pub depth: usize,
    pub initial: Initial,
    /// Node → the history the oracle was called with to produce that node's
    /// strategy endpoint.
    pub ledger: BTreeMap<Path, History>,
    /// Node → index of its enumerated endpoint.
    pub enum_indices: BTreeMap<Path, BigUint>,
}

/// A replayed play plus its consistency verdict against the source oracle.
#[derive(Debug, Clone, Serialize)]
pub struct Replay {
    pub code: Path,
    pub history: History,
    pub consistency: Consistency,
}

struct Builder<'a> {
    oracle: &'a dyn Strategy,
    enumeration: &'a RatEnumeration,
    level_cap: u64,
    nodes: BTreeMap<Path, Interval>,
    ledger: BTreeMap<Path, History>,
    enum_indices: BTreeMap<Path, BigUint>,
}

impl Builder<'_> {
    fn ask(&self, path: &Path, h: &History) -> Result<Rat, ExtractError> {
        let side = self.oracle.side();
        let v = self.oracle.choose(h);
        h.apply_move(side, v.clone()).map_err(|e| match e {
            GameError::IllegalMove { value, lo, hi, .. } => ExtractError::OracleContractViolation {
                descriptor: self.oracle.descriptor(),
                path: path.clone(),
                history: h.arguments(),
                value,
                lo,
                hi,
            },
            other => ExtractError::Game(other),
        })?;
        Ok(v)
    }

    fn first(&mut self, path: &Path, x: &Rat, y: &Rat) -> Result<Rat, ExtractError> {
        let hit = self.enumeration.first_in(x, y, self.level_cap)?;
        self.enum_indices.insert(path.clone(), hit.index);
        Ok(hit.value)
    }

    /// A-side children of `p`.
    fn split_a(&mut self, p: &Path) -> Result<(), ExtractError> {
        let node = self.nodes[p].clone();
        let (c, u) = (node.lo.clone(), node.midpoint());
        let base = self.ledger[p].clone();
        let (p0, p1) = (p.child(false), p.child(true));

        let d1 = self.first(&p1, &c, &u)?;
        let h1 = base.apply_move(Side::A, c.clone())?.apply_move(Side::B, d1.clone())?;
        let c1 = self.ask(&p1, &h1)?;

        let d0 = self.first(&p0, &c, &c1)?;
        let h0 = base.apply_move(Side::A, c.clone())?.apply_move(Side::B, d0.clone())?;
        let c0 = self.ask(&p0, &h0)?;

        self.nodes.insert(p0.clone(), Interval::new(c0, d0));
        self.nodes.insert(p1.clone(), Interval::new(c1, d1));
        self.ledger.insert(p0, h0);
        self.ledger.insert(p1, h1);
        Ok(())
    }

    /// B-side children of `p`. `rounds(p)` is the play `(c_q, d_q)` along the
    /// path to `p`.
    fn split_b(&mut self, p: &Path, rounds: &History) -> Result<(), ExtractError> {
        let node = self.nodes[p].clone();
        let (d, u) = (node.hi.clone(), node.midpoint());
        let (p0, p1) = (p.child(false), p.child(true));

        let c0 = self.first(&p0, &u, &d)?;
        let h0 = rounds.apply_move(Side::A, c0.clone())?;
        let d0 = self.ask(&p0, &h0)?;

        let c1 = self.first(&p1, &d0, &d)?;
        let h1 = rounds.apply_move(Side::A, c1.clone())?;
        let d1 = self.ask(&p1, &h1)?;

        self.nodes.insert(p0.clone(), Interval::new(c0, d0));
        self.nodes.insert(p1.clone(), Interval::new(c1, d1));
        self.ledger.insert(p0, h0);
        self.ledger.insert(p1, h1);
        Ok(())
    }
}

fn check_range(config: &GameConfig, e: &RatEnumeration) -> Result<(), ExtractError> {
    if e.lo() != config.a0() || e.hi() != config.b0() {
        return Err(ExtractError::RangeMismatch { lo: e.lo().clone(), hi: e.hi().clone() });
    }
    Ok(())
}

/// Runs the construction for whichever side `oracle` plays.
pub fn extract(
    oracle: &dyn Strategy,
    config: &GameConfig,
    depth: usize,
    enumeration: &RatEnumeration,
    level_cap: u64,
) -> Result<ExtractedTree, ExtractError> {
    match oracle.side() {
        Side::A => extract_from_a(oracle, config, depth, enumeration, level_cap),
        Side::B => extract_from_b(oracle, config, depth, enumeration, level_cap),
    }
}

pub fn extract_from_a(
    f: &dyn Strategy,
    config: &GameConfig,
    depth: usize,
    enumeration: &RatEnumeration,
    level_cap: u64,
) -> Result<ExtractedTree, ExtractError> {
    if depth == 0 {
        return Err(ExtractError::ZeroDepth);
    }
    if f.side() != Side::A {
        return Err(GameError::WrongOracleSide { descriptor: f.descriptor(), expected: Side::A, actual: f.side() }.into());
    }
    check_range(config, enumeration)?;
    let mut b = Builder {
        oracle: f,
        enumeration,
        level_cap,
        nodes: BTreeMap::new(),
        ledger: BTreeMap::new(),
        enum_indices: BTreeMap::new(),
    };
    let empty = History::new(config.clone());
    let a1 = b.ask(&Path::root(), &empty)?;
    let root = Interval::new(a1.clone(), config.b0().clone());
    let initial = Initial { a1: Some(a1), c: root.lo.clone(), d: root.hi.clone(), u: root.midpoint() };
    b.nodes.insert(Path::root(), root.clone());
    b.ledger.insert(Path::root(), empty);
    for n in 0..depth {
        for p in Path::all_of_len(n) {
            b.split_a(&p)?;
        }
    }
    finish(b, Side::A, f.descriptor(), config, depth, root, initial)
}

pub fn extract_from_b(
    g: &dyn Strategy,
    config: &GameConfig,
    depth: usize,
    enumeration: &RatEnumeration,
    level_cap: u64,
) -> Result<ExtractedTree, ExtractError> {
    if depth == 0 {
        return Err(ExtractError::ZeroDepth);
    }
    if g.side() != Side::B {
        return Err(GameError::WrongOracleSide { descriptor: g.descriptor(), expected: Side::B, actual: g.side() }.into());
    }
    check_range(config, enumeration)?;
    let mut b = Builder {
        oracle: g,
        enumeration,
        level_cap,
        nodes: BTreeMap::new(),
        ledger: BTreeMap::new(),
        enum_indices: BTreeMap::new(),
    };
    let root = config.interval();
    let initial = Initial { a1: None, c: root.lo.clone(), d: root.hi.clone(), u: root.midpoint() };
    b.nodes.insert(Path::root(), root.clone());
    let mut rounds: BTreeMap<Path, History> = BTreeMap::from([(Path::root(), History::new(config.clone()))]);
    for n in 0..depth {
        for p in Path::all_of_len(n) {
            b.split_b(&p, &rounds[&p])?;
            for q in [p.child(false), p.child(true)] {
                let mut h = b.ledger[&q].clone();
                h.play(Side::B, b.nodes[&q].hi.clone())?;
                rounds.insert(q, h);
            }
        }
    }
    finish(b, Side::B, g.descriptor(), config, depth, root, initial)
}

fn finish(
    b: Builder<'_>,
    side: Side,
    strategy: String,
    config: &GameConfig,
    depth: usize,
    root: Interval,
    initial: Initial,
) -> Result<ExtractedTree, ExtractError> {
    let bound = BoundRule::halving(config.b0() - config.a0())?;
    let tree = CantorTree::from_table(root, bound, b.nodes)?;
    Ok(ExtractedTree {
        tree: Arc::new(tree),
        side,
        strategy,
        config: config.clone(),
        depth,
        initial,
        ledger: b.ledger,
        enum_indices: b.enum_indices,
    })
}

impl ExtractedTree {
    /// The play that follows `code` through the tree:
    /// A-side `a_1 = c`, `b_n = d_{i_1..i_n}`, `a_n = c_{i_1..i_{n-1}}`;
    /// B-side `a_n = c_{i_1..i_n}`, `b_n = d_{i_1..i_n}`.
    pub fn replay_history(&self, code: &Path) -> Result<History, ExtractError> {
        if code.len() > self.depth {
            return Err(ExtractError::DepthExceeded { requested: code.len(), depth: self.depth });
        }
        let mut h = History::new(self.config.clone());
        for n in 1..=code.len() {
            let here = self.tree.node(&code.prefix(n))?;
            let a = match self.side {
                Side::A => self.tree.node(&code.prefix(n - 1))?.lo,
                Side::B => here.lo.clone(),
            };
            h.play(Side::A, a)?;
            h.play(Side::B, here.hi)?;
        }
        Ok(h)
    }

    /// Replays `code` and checks the play against `oracle`, which should be
    /// the strategy the tree was extracted from.
    pub fn replay(&self, code: &Path, oracle: &dyn Strategy) -> Result<Replay, ExtractError> {
        let history = self.replay_history(code)?;
        let consistency = check_consistency(&history, oracle, self.side);
        Ok(Replay { code: code.clone(), history, consistency })
    }

    /// Re-derives every recorded quantity from scratch: the tree conditions,
    /// each ledger entry (it must be the path play, and the oracle must answer
    /// it with the node's strategy endpoint), and each enumerated endpoint
    /// (recorded index, least index in its interval). Returns the problems.
    pub fn audit(&self, oracle: &dyn Strategy, enumeration: &RatEnumeration, level_cap: u64) -> Vec<String> {
        let mut out: Vec<String> = self
            .tree
            .validate(self.depth)
            .violations
            .into_iter()
            .map(|v| format!("node {}: {} ({})", v.path, v.clause, v.detail))
            .collect();
        if oracle.descriptor() != self.strategy {
            out.push(format!("oracle {} is not the recorded {}", oracle.descriptor(), self.strategy));
        }
        if let (Side::A, Some(a1)) = (self.side, &self.initial.a1) {
            let v = oracle.choose(&History::new(self.config.clone()));
            if &v != a1 {
                out.push(format!("opening move: oracle answers {v}, recorded {a1}"));
            }
        }
        for (p, h) in &self.ledger {
            if p.is_empty() {
                continue;
            }
            let node = match self.tree.node(p) {
                Ok(i) => i,
                Err(e) => {
                    out.push(format!("node {p}: {e}"));
                    continue;
                }
            };
            let (strategy_end, enum_end, bounds) = match self.side {
                Side::A => {
                    let parent = self.tree.node(&p.parent().unwrap()).expect("parent");
                    let bounds = if p.last() == Some(true) {
                        (parent.lo.clone(), parent.midpoint())
                    } else {
                        let sib = self.tree.node(&p.sibling().unwrap()).expect("sibling");
                        (parent.lo.clone(), sib.lo)
                    };
                    (node.lo.clone(), node.hi.clone(), bounds)
                }
                Side::B => {
                    let parent = self.tree.node(&p.parent().unwrap()).expect("parent");
                    let bounds = if p.last() == Some(true) {
                        let sib = self.tree.node(&p.sibling().unwrap()).expect("sibling");
                        (sib.hi, parent.hi.clone())
                    } else {
                        (parent.midpoint(), parent.hi.clone())
                    };
                    (node.hi.clone(), node.lo.clone(), bounds)
                }
            };
            match self.expected_ledger(p) {
                Ok(expected) if &expected == h => {}
                Ok(_) => out.push(format!("node {p}: ledger is not the path play")),
                Err(e) => out.push(format!("node {p}: {e}")),
            }
            let v = oracle.choose(h);
            if v != strategy_end {
                out.push(format!("node {p}: oracle answers {v}, tree has {strategy_end}"));
            }
            match self.enum_indices.get(p) {
                None => out.push(format!("node {p}: no enumeration index")),
                Some(k) => {
                    if enumeration.at_index(k) != enum_end {
                        out.push(format!("node {p}: index {k} is not {enum_end}"));
                    }
                    match enumeration.first_in(&bounds.0, &bounds.1, level_cap) {
                        Ok(hit) if hit.index == *k => {}
                        Ok(hit) => out.push(format!("node {p}: least index in ({}, {}) is {}, recorded {k}", bounds.0, bounds.1, hit.index)),
                        Err(e) => out.push(format!("node {p}: {e}")),
                    }
                }
            }
        }
        let expected_nodes: usize = (1..=self.depth).map(|n| 1usize << n).sum();
        if self.ledger.len() != expected_nodes + 1 - usize::from(self.side == Side::B) {
            out.push(format!("ledger has {} entries", self.ledger.len()));
        }
        out
    }

    fn expected_ledger(&self, p: &Path) -> Result<History, ExtractError> {
        match self.side {
            Side::A => self.replay_history(p),
            Side::B => {
                let mut h = self.replay_history(&p.parent().expect("non-root"))?;
                h.play(Side::A, self.tree.node(p)?.lo)?;
                Ok(h)
            }
        }
    }

    pub fn to_file(&self) -> Result<ExtractionFile, ExtractError> {
        Ok(ExtractionFile {
            root: self.tree.root().clone(),
            e_rule: RuleSpec::describe(self.tree.bound(), self.tree.root()),
            depth: self.depth,
            nodes: self.tree.materialize(self.depth)?,
            side: self.side,
            strategy: self.strategy.clone(),
            config: self.config.clone(),
            initial: self.initial.clone(),
            ledger: self.ledger.iter().map(|(p, h)| (p.clone(), h.arguments())).collect(),
            enum_indices: self.enum_indices.iter().map(|(p, k)| (p.clone(), k.to_string())).collect(),
        })
    }

    pub fn from_file(f: &ExtractionFile) -> Result<ExtractedTree, ExtractError> {
        let bound = f.e_rule.resolve(&f.root)?;
        let tree = CantorTree::from_table(f.root.clone(), bound, f.nodes.clone())?;
        if tree.max_depth() != Some(f.depth) {
            return Err(ExtractError::Malformed(format!("nodes do not reach depth {}", f.depth)));
        }
        let ledger = f
            .ledger
            .iter()
            .map(|(p, args)| {
                let h = History::from_arguments(args)?;
                if h.config() != &f.config {
                    return Err(ExtractError::Malformed(format!("ledger {p} is for another game")));
                }
                Ok((p.clone(), h))
            })
            .collect::<Result<_, ExtractError>>()?;
        let enum_indices = f
            .enum_indices
            .iter()
            .map(|(p, k)| {
                k.parse::<BigUint>()
                    .map(|k| (p.clone(), k))
                    .map_err(|_| ExtractError::Malformed(format!("bad index {k:?} at {p}")))
            })
            .collect::<Result<_, _>>()?;
        Ok(ExtractedTree {
            tree: Arc::new(tree),
            side: f.side,
            strategy: f.strategy.clone(),
            config: f.config.clone(),
            depth: f.depth,
            initial: f.initial.clone(),
            ledger,
            enum_indices,
        })
    }
}

/// On-disk extraction: the materialized tree plus the construction record.
/// Ledger entries are flat argument lists `[a0, b0, a1, b1, ...]`; indices are
/// decimal strings since they are unbounded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionFile {
    pub root: Interval,
    pub e_rule: RuleSpec,
    pub depth: usize,
    pub nodes: BTreeMap<Path, Interval>,
    pub side: Side,
    pub strategy: String,
    pub config: GameConfig,
    pub initial: Initial,
    pub ledger: BTreeMap<Path, Vec<Rat>>,
    pub enum_indices: BTreeMap<Path, String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::DEFAULT_LEVEL_CAP;
    use crate::rat::rat;

    struct Mid(Side);
    impl Strategy for Mid {
        fn side(&self) -> Side {
            self.0
        }
        fn descriptor(&self) -> String {
            format!("mid_{}", self.0)
        }
        fn choose(&self, h: &History) -> Rat {
            let (lo, hi) = h.legal_bounds();
            lo.midpoint(&hi)
        }
    }

    /// Plays `b_0` itself: never legal.
    struct Cheat;
    impl Strategy for Cheat {
        fn side(&self) -> Side {
            Side::B
        }
        fn descriptor(&self) -> String {
            "cheat".into()
        }
        fn choose(&self, h: &History) -> Rat {
            h.legal_bounds().1
        }
    }

    fn p(s: &str) -> Path {
        s.parse().unwrap()
    }

    fn unit_extract(o: &dyn Strategy, depth: usize) -> ExtractedTree {
        extract(o, &GameConfig::unit(), depth, &RatEnumeration::unit(), DEFAULT_LEVEL_CAP).unwrap()
    }

    #[test]
    fn a_side_depth_one_trace() {
        let x = unit_extract(&Mid(Side::A), 1);
        assert_eq!(x.initial, Initial { a1: Some(rat(1, 2)), c: rat(1, 2), d: rat(1, 1), u: rat(3, 4) });
        assert_eq!(x.tree.node(&p("1")).unwrap(), Interval::new(rat(7, 12), rat(2, 3)));
        assert_eq!(x.tree.node(&p("0")).unwrap(), Interval::new(rat(15, 28), rat(4, 7)));
        assert_eq!(x.enum_indices[&p("1")], BigUint::from(4u32));
        assert_eq!(x.enum_indices[&p("0")], BigUint::from(13u32));
        let chain = [rat(1, 2), rat(15, 28), rat(4, 7), rat(7, 12), rat(2, 3), rat(3, 4), rat(1, 1)];
        assert!(chain.windows(2).all(|w| w[0] < w[1]));
        assert!(x.tree.node(&p("1")).unwrap().width() < rat(1, 2));
    }

    #[test]
    fn b_side_depth_one_trace() {
        let x = unit_extract(&Mid(Side::B), 1);
        assert_eq!(x.initial.u, rat(1, 2));
        assert_eq!(x.tree.node(&p("0")).unwrap(), Interval::new(rat(2, 3), rat(5, 6)));
        assert_eq!(x.tree.node(&p("1")).unwrap(), Interval::new(rat(6, 7), rat(13, 14)));
        let chain = [rat(0, 1), rat(1, 2), rat(2, 3), rat(5, 6), rat(6, 7), rat(13, 14), rat(1, 1)];
        assert!(chain.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn replay_examples() {
        let a = unit_extract(&Mid(Side::A), 1);
        let r = a.replay(&p("1"), &Mid(Side::A)).unwrap();
        assert_eq!(r.history.rounds(), &[(rat(1, 2), rat(2, 3))]);
        assert!(r.consistency.is_consistent());

        let b = unit_extract(&Mid(Side::B), 1);
        let r = b.replay(&p("0"), &Mid(Side::B)).unwrap();
        assert_eq!(r.history.rounds(), &[(rat(2, 3), rat(5, 6))]);
        assert!(r.consistency.is_consistent());
        assert!(matches!(b.replay(&p("01"), &Mid(Side::B)), Err(ExtractError::DepthExceeded { .. })));
    }

    #[test]
    fn depth_six_is_clean_and_consistent() {
        for side in [Side::A, Side::B] {
            let o = Mid(side);
            let x = unit_extract(&o, 6);
            let report = x.tree.validate(6);
            assert!(report.is_clean(), "{:?}", report.violations);
            assert_eq!(report.nodes, 126);
            for code in Path::all_of_len(6) {
                let r = x.replay(&code, &o).unwrap();
                assert!(r.consistency.is_consistent(), "{side} {code}");
                let cell = x.tree.node(&code.prefix(5)).unwrap();
                let last = r.history.rounds().last().unwrap();
                assert!(cell.contains(&last.0) && cell.contains(&last.1));
            }
            assert!(x.audit(&o, &RatEnumeration::unit(), DEFAULT_LEVEL_CAP).is_empty());
        }
    }

    #[test]
    fn ledger_entries_are_consistent_plays() {
        let o = Mid(Side::A);
        let x = unit_extract(&o, 4);
        for h in x.ledger.values() {
            assert!(check_consistency(h, &o, Side::A).is_consistent());
        }
    }

    #[test]
    fn contract_violation_is_reported() {
        match extract(&Cheat, &GameConfig::unit(), 2, &RatEnumeration::unit(), DEFAULT_LEVEL_CAP) {
            Err(ExtractError::OracleContractViolation { path, value, hi, .. }) => {
                assert_eq!(path, p("0"));
                assert_eq!(value, rat(1, 1));
                assert_eq!(hi, rat(1, 1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn file_round_trip_and_audit() {
        let o = Mid(Side::B);
        let x = unit_extract(&o, 3);
        let file = x.to_file().unwrap();
        let json = serde_json::to_string(&file).unwrap();
        let back: ExtractionFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, file);
        let y = ExtractedTree::from_file(&back).unwrap();
        assert!(y.audit(&o, &RatEnumeration::unit(), DEFAULT_LEVEL_CAP).is_empty());

        let mut tampered = back.clone();
        tampered.nodes.insert(p("01"), Interval::new(rat(3, 4), rat(4, 5)));
        let z = ExtractedTree::from_file(&tampered).unwrap();
        assert!(!z.audit(&o, &RatEnumeration::unit(), DEFAULT_LEVEL_CAP).is_empty());
    }

    #[test]
    fn general_interval() {
        let cfg = GameConfig::new(rat(-2, 1), rat(3, 1)).unwrap();
        let e = RatEnumeration::new(rat(-2, 1), rat(3, 1)).unwrap();
        for side in [Side::A, Side::B] {
            let x = extract(&Mid(side), &cfg, 5, &e, DEFAULT_LEVEL_CAP).unwrap();
            assert!(x.tree.validate(5).is_clean());
            assert_eq!(x.tree.e(1), rat(5, 2));
        }
        assert!(matches!(
            extract(&Mid(Side::A), &cfg, 2, &RatEnumeration::unit(), DEFAULT_LEVEL_CAP),
            Err(ExtractError::RangeMismatch { .. })
        ));
    }
}
