//! Live sessions between a human and an engine strategy.
//!
//! Sessions live in memory. Each one is behind its own lock, so moves within a
//! session are serialized while different sessions proceed independently.
//! An optional append-only log (one JSON object per line) records every
//! creation and accepted move; [`SessionStore::recover`] replays it, and
//! because engines are deterministic the replay reproduces every reply.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path as FsPath;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{GameConfig, GameError, History, Oracle, Side};
use crate::interval::Interval;
use crate::rat::Rat;
use crate::strategy::{make_oracle, StrategyKind};
use crate::target::{complement_components, Countable, SetExpr, SetFile, TargetError};
use crate::tree::{CantorTree, Path};

/// Deepest target overlay served.
pub const MAX_OVERLAY_DEPTH: usize = 8;
/// Validation depth for named tree targets.
const NAMED_TREE_DEPTH: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArenaError {
    #[error("unknown descriptor: {0}")]
    UnknownDescriptor(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("illegal move {value} by {side}: needs {lo} < value < {hi}")]
    IllegalMove { side: Side, value: Rat, lo: Rat, hi: Rat },
    #[error("it is {expected}'s turn, not {got}'s")]
    WrongTurn { expected: Side, got: Side },
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("no session {0:?}")]
    UnknownSession(String),
    #[error("session {0} has played all its rounds")]
    Finished(String),
    #[error("overlay depth {0} exceeds {MAX_OVERLAY_DEPTH}")]
    InvalidDepth(usize),
    #[error("engine {descriptor} failed: {detail}")]
    EngineFault { descriptor: String, detail: String },
    #[error("log: {0}")]
    Log(String),
}

impl ArenaError {
    /// Stable machine-readable code for wire errors.
    pub fn code(&self) -> &'static str {
        match self {
            ArenaError::UnknownDescriptor(_) => "UnknownDescriptor",
            ArenaError::InvalidConfig(_) => "InvalidConfig",
            ArenaError::IllegalMove { .. } => "IllegalMove",
            ArenaError::WrongTurn { .. } => "WrongTurn",
            ArenaError::ParseError(_) => "ParseError",
            ArenaError::UnknownSession(_) => "UnknownSession",
            ArenaError::Finished(_) => "Finished",
            ArenaError::InvalidDepth(_) => "InvalidDepth",
            ArenaError::EngineFault { .. } => "EngineFault",
            ArenaError::Log(_) => "LogError",
        }
    }

    /// The violated open bound, for illegal moves.
    pub fn bound(&self) -> Option<Bound> {
        match self {
            ArenaError::IllegalMove { lo, hi, .. } => Some(Bound { lo: lo.clone(), hi: hi.clone() }),
            _ => None,
        }
    }
}

impl From<GameError> for ArenaError {
    fn from(e: GameError) -> ArenaError {
        match e {
            GameError::IllegalMove { side, value, lo, hi } => ArenaError::IllegalMove { side, value, lo, hi },
            GameError::WrongTurn { expected, got } => ArenaError::WrongTurn { expected, got },
            GameError::InvalidConfig { .. } => ArenaError::InvalidConfig(e.to_string()),
            other => ArenaError::ParseError(other.to_string()),
        }
    }
}

impl From<TargetError> for ArenaError {
    fn from(e: TargetError) -> ArenaError {
        match e {
            TargetError::OutsideGame { .. } => ArenaError::InvalidConfig(e.to_string()),
            other => ArenaError::UnknownDescriptor(other.to_string()),
        }
    }
}

/// Open interval `(lo, hi)` the next move must fall in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bound {
    pub lo: Rat,
    pub hi: Rat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    AwaitingHuman,
    AwaitingEngine,
    /// The round limit has been reached.
    Idle,
}

/// A built-in name or an inline target file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    /// `rationals`, `middle_thirds` (inside the default chaser range) or `game`.
    Named(String),
    Inline(Box<SetFile>),
}

impl TargetSpec {
    pub fn resolve(&self, config: &GameConfig) -> Result<SetExpr, ArenaError> {
        let s = match self {
            TargetSpec::Named(name) => match name.as_str() {
                "rationals" | "q0" => SetExpr::rationals(config.a0().clone(), config.b0().clone())?,
                "middle_thirds" => {
                    let (lo, hi) = StrategyKind::default_chaser_range(config);
                    let tree = CantorTree::middle_thirds(Interval::new(lo, hi))
                        .map_err(|e| ArenaError::UnknownDescriptor(e.to_string()))?;
                    SetExpr::tree(tree, NAMED_TREE_DEPTH)
                }
                "game" => SetExpr::Interval(config.interval()),
                _ => return Err(ArenaError::UnknownDescriptor(format!("target {name:?}"))),
            },
            TargetSpec::Inline(f) => f.to_expr()?,
        };
        s.check_within(config)?;
        Ok(s)
    }
}

/// Wire form of a session request; the config is checked after parsing so
/// that a degenerate interval reports `InvalidConfig`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewSession {
    pub config: RawConfig,
    pub human: Side,
    pub engine: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawConfig {
    pub a0: Rat,
    pub b0: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayedMove {
    pub side: Side,
    pub value: Rat,
}

/// Snapshot sent to clients. `config`, `rounds` and `pending_a` together form
/// a play file.
#[derive(Debug, Clone, Serialize)]
pub struct SessionView {
    pub id: String,
    pub human: Side,
    pub engine: String,
    #[serde(flatten)]
    pub play: History,
    pub to_move: Side,
    pub legal: Option<Bound>,
    pub status: Status,
    pub max_rounds: Option<usize>,
    pub target: Option<SetFile>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MoveOutcome {
    pub accepted: PlayedMove,
    pub engine_reply: Option<PlayedMove>,
    /// `[a_n, b_n]` after the latest complete round.
    pub bracket: Option<Interval>,
    pub session: SessionView,
}

#[derive(Debug, Clone, Serialize)]
pub struct Overlay {
    pub depth: usize,
    pub intervals: Vec<Interval>,
}

pub struct Session {
    id: String,
    human: Side,
    engine: Oracle,
    target: Option<SetExpr>,
    history: History,
    max_rounds: Option<usize>,
}

impl Session {
    fn new(id: String, req: &NewSession) -> Result<Session, ArenaError> {
        let config = GameConfig::new(req.config.a0.clone(), req.config.b0.clone())
            .map_err(|e| ArenaError::InvalidConfig(e.to_string()))?;
        let engine_side = req.human.other();
        let engine = make_oracle(&req.engine, Some(engine_side), &config)
            .map_err(|e| ArenaError::UnknownDescriptor(e.to_string()))?;
        if engine.side() != engine_side {
            return Err(ArenaError::UnknownDescriptor(format!(
                "{} plays for {}, but the engine must play {engine_side}",
                engine.descriptor(),
                engine.side()
            )));
        }
        let target = req.target.as_ref().map(|t| t.resolve(&config)).transpose()?;
        let mut s = Session { id, human: req.human, engine, target, history: History::new(config), max_rounds: req.max_rounds };
        s.engine_turn()?;
        Ok(s)
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    fn finished(&self) -> bool {
        self.history.pending_a().is_none() && self.max_rounds.is_some_and(|m| self.history.len() >= m)
    }

    pub fn status(&self) -> Status {
        if self.finished() {
            Status::Idle
        } else if self.history.to_move() == self.human {
            Status::AwaitingHuman
        } else {
            Status::AwaitingEngine
        }
    }

    /// Plays the engine's move if it is the engine's turn.
    fn engine_turn(&mut self) -> Result<Option<PlayedMove>, ArenaError> {
        if self.status() != Status::AwaitingEngine {
            return Ok(None);
        }
        let side = self.engine.side();
        let value = self.engine.choose(&self.history);
        self.history.play(side, value.clone()).map_err(|e| ArenaError::EngineFault {
            descriptor: self.engine.descriptor(),
            detail: e.to_string(),
        })?;
        Ok(Some(PlayedMove { side, value }))
    }

    pub fn view(&self) -> SessionView {
        let status = self.status();
        let (lo, hi) = self.history.legal_bounds();
        SessionView {
            id: self.id.clone(),
            human: self.human,
            engine: self.engine.descriptor(),
            play: self.history.clone(),
            to_move: self.history.to_move(),
            legal: (status != Status::Idle).then_some(Bound { lo, hi }),
            status,
            max_rounds: self.max_rounds,
            target: self.target.as_ref().and_then(|t| SetFile::from_expr(t).ok()),
        }
    }

    /// Validates and applies the human move, then the engine reply, as one
    /// step: on any error the session is left unchanged.
    fn post(&mut self, side: Option<Side>, value: &str) -> Result<MoveOutcome, ArenaError> {
        match self.status() {
            Status::Idle => return Err(ArenaError::Finished(self.id.clone())),
            Status::AwaitingEngine => {
                return Err(ArenaError::WrongTurn { expected: self.history.to_move(), got: self.human })
            }
            Status::AwaitingHuman => {}
        }
        if let Some(side) = side {
            if side != self.human {
                return Err(ArenaError::WrongTurn { expected: self.human, got: side });
            }
        }
        let value: Rat = value.parse().map_err(|e| ArenaError::ParseError(format!("{value:?}: {e}")))?;
        let before = self.history.clone();
        self.history.play(self.human, value.clone())?;
        let reply = match self.engine_turn() {
            Ok(r) => r,
            Err(e) => {
                self.history = before;
                return Err(e);
            }
        };
        let bracket = self.history.rounds().last().map(|(a, b)| Interval::new(a.clone(), b.clone()));
        Ok(MoveOutcome {
            accepted: PlayedMove { side: self.human, value },
            engine_reply: reply,
            bracket,
            session: self.view(),
        })
    }

    /// Intervals of the target at `depth` for display: tree nodes of that
    /// depth, intervals and cover-complement pieces as they are, and the
    /// points of finite lists. Dense enumerations are not drawn.
    pub fn overlay(&self, depth: usize) -> Result<Overlay, ArenaError> {
        if depth > MAX_OVERLAY_DEPTH {
            return Err(ArenaError::InvalidDepth(depth));
        }
        let mut intervals = Vec::new();
        if let Some(t) = &self.target {
            for atom in t.atoms() {
                match atom {
                    SetExpr::Interval(i) => intervals.push(i.clone()),
                    SetExpr::Tree { tree, .. } => {
                        for p in Path::all_of_len(depth) {
                            intervals.push(tree.expand(&p).map_err(|e| ArenaError::EngineFault {
                                descriptor: "target".into(),
                                detail: e.to_string(),
                            })?);
                        }
                    }
                    SetExpr::CoverComplement { host, cover } => intervals.extend(complement_components(host, cover)),
                    SetExpr::Countable(Countable::Finite(v)) => {
                        intervals.extend(v.iter().map(|x| Interval::new(x.clone(), x.clone())))
                    }
                    _ => {}
                }
            }
        }
        Ok(Overlay { depth, intervals })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum LogLine {
    Create { session: String, request: Box<NewSession> },
    Move { session: String, side: Side, value: Rat, engine_reply: Option<Rat> },
}

#[derive(Default)]
pub struct SessionStore {
    sessions: Mutex<BTreeMap<String, Arc<Mutex<Session>>>>,
    next: AtomicU64,
    log: Option<Mutex<File>>,
}

impl SessionStore {
    pub fn new() -> SessionStore {
        SessionStore::default()
    }

    /// A store that appends to `path`, first replaying whatever it holds.
    pub fn with_log(path: &FsPath) -> Result<SessionStore, ArenaError> {
        let mut store = SessionStore::new();
        if path.exists() {
            store.recover(path)?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| ArenaError::Log(e.to_string()))?;
        store.log = Some(Mutex::new(file));
        Ok(store)
    }

    fn recover(&mut self, path: &FsPath) -> Result<(), ArenaError> {
        let file = File::open(path).map_err(|e| ArenaError::Log(e.to_string()))?;
        let mut max_id = 0;
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| ArenaError::Log(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: LogLine =
                serde_json::from_str(&line).map_err(|e| ArenaError::Log(format!("line {}: {e}", n + 1)))?;
            match entry {
                LogLine::Create { session, request } => {
                    if let Some(k) = session.strip_prefix('s').and_then(|k| k.parse::<u64>().ok()) {
                        max_id = max_id.max(k);
                    }
                    let s = Session::new(session.clone(), &request)?;
                    self.sessions.get_mut().expect("unpoisoned").insert(session, Arc::new(Mutex::new(s)));
                }
                LogLine::Move { session, side, value, engine_reply } => {
                    let s = self.get(&session)?;
                    let mut s = s.lock().expect("unpoisoned");
                    let out = s.post(Some(side), &value.to_string())?;
                    if out.engine_reply.map(|m| m.value) != engine_reply {
                        return Err(ArenaError::Log(format!("line {}: engine reply differs on replay", n + 1)));
                    }
                }
            }
        }
        self.next = AtomicU64::new(max_id);
        Ok(())
    }

    fn append(&self, line: &LogLine) -> Result<(), ArenaError> {
        if let Some(log) = &self.log {
            let mut f = log.lock().expect("unpoisoned");
            let text = serde_json::to_string(line).map_err(|e| ArenaError::Log(e.to_string()))?;
            writeln!(f, "{text}").and_then(|_| f.flush()).map_err(|e| ArenaError::Log(e.to_string()))?;
        }
        Ok(())
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ArenaError> {
        self.sessions
            .lock()
            .expect("unpoisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ArenaError::UnknownSession(id.to_string()))
    }

    pub fn create_session(&self, req: &NewSession) -> Result<SessionView, ArenaError> {
        let id = format!("s{}", self.next.fetch_add(1, Ordering::SeqCst) + 1);
        let s = Session::new(id.clone(), req)?;
        let view = s.view();
        self.append(&LogLine::Create { session: id.clone(), request: Box::new(req.clone()) })?;
        self.sessions.lock().expect("unpoisoned").insert(id, Arc::new(Mutex::new(s)));
        Ok(view)
    }

    pub fn view(&self, id: &str) -> Result<SessionView, ArenaError> {
        Ok(self.get(id)?.lock().expect("unpoisoned").view())
    }

    /// `side`, when given, must be the human's side.
    pub fn post_move(&self, id: &str, side: Option<Side>, value: &str) -> Result<MoveOutcome, ArenaError> {
        let s = self.get(id)?;
        let mut s = s.lock().expect("unpoisoned");
        let out = s.post(side, value)?;
        self.append(&LogLine::Move {
            session: id.to_string(),
            side: out.accepted.side,
            value: out.accepted.value.clone(),
            engine_reply: out.engine_reply.as_ref().map(|m| m.value.clone()),
        })?;
        Ok(out)
    }

    pub fn overlay(&self, id: &str, depth: usize) -> Result<Overlay, ArenaError> {
        self.get(id)?.lock().expect("unpoisoned").overlay(depth)
    }

    /// The engine oracle of a session, for replay checks.
    pub fn engine(&self, id: &str) -> Result<Oracle, ArenaError> {
        Ok(Arc::clone(&self.get(id)?.lock().expect("unpoisoned").engine))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{membership_probe, Probe};
    use crate::game::check_consistency;
    use crate::rat::rat;

    fn request(human: Side, engine: &str) -> NewSession {
        NewSession {
            config: RawConfig { a0: rat(0, 1), b0: rat(1, 1) },
            human,
            engine: engine.into(),
            target: None,
            max_rounds: None,
        }
    }

    #[test]
    fn human_a_against_killer() {
        let store = SessionStore::new();
        let v = store.create_session(&request(Side::A, "countable_killer")).unwrap();
        assert_eq!(v.status, Status::AwaitingHuman);
        assert!(v.play.is_empty());
        assert_eq!(v.legal, Some(Bound { lo: rat(0, 1), hi: rat(1, 1) }));

        let out = store.post_move(&v.id, None, "1/2").unwrap();
        let reply = out.engine_reply.unwrap();
        assert_eq!(reply.side, Side::B);
        assert_eq!(out.bracket, Some(Interval::new(rat(1, 2), reply.value.clone())));
        assert_eq!(out.session.legal, Some(Bound { lo: rat(1, 2), hi: reply.value }));

        let err = store.post_move(&v.id, None, "1/1").unwrap_err();
        assert_eq!(err.code(), "IllegalMove");
        assert_eq!(err.bound().unwrap().lo, rat(1, 2));
        assert_eq!(store.post_move(&v.id, None, "0.5").unwrap_err().code(), "ParseError");
        assert_eq!(store.post_move(&v.id, Some(Side::B), "3/5").unwrap_err().code(), "WrongTurn");
        assert_eq!(store.view(&v.id).unwrap().play.len(), 1);
    }

    #[test]
    fn first_move_bounds() {
        let store = SessionStore::new();
        let v = store.create_session(&request(Side::A, "midpoint_B")).unwrap();
        let err = store.post_move(&v.id, None, "1/1").unwrap_err();
        assert_eq!((err.code(), err.bound()), ("IllegalMove", Some(Bound { lo: rat(0, 1), hi: rat(1, 1) })));
    }

    #[test]
    fn human_b_against_chaser() {
        let store = SessionStore::new();
        let mut req = request(Side::B, "tree_chaser");
        req.target = Some(TargetSpec::Named("middle_thirds".into()));
        let v = store.create_session(&req).unwrap();
        assert_eq!(v.status, Status::AwaitingHuman);
        let a1 = v.play.pending_a().unwrap().clone();
        // left end of the chaser target's 0-interval
        assert_eq!(a1, rat(1, 8));
        let err = store.post_move(&v.id, None, &a1.to_string()).unwrap_err();
        assert_eq!(err.code(), "IllegalMove");
        let out = store.post_move(&v.id, None, "1/2").unwrap();
        assert_eq!(out.engine_reply.as_ref().unwrap().side, Side::A);
        let overlay = store.overlay(&v.id, 6).unwrap();
        assert_eq!(overlay.intervals.len(), 64);
        assert_eq!(store.overlay(&v.id, 9).unwrap_err().code(), "InvalidDepth");
        let SetExpr::Tree { tree, .. } = TargetSpec::Named("middle_thirds".into()).resolve(&GameConfig::unit()).unwrap() else {
            unreachable!()
        };
        let a2 = out.engine_reply.unwrap().value;
        assert!(matches!(membership_probe(&tree, &a2, 20).unwrap(), Probe::In { .. }));
    }

    #[test]
    fn invalid_requests() {
        let store = SessionStore::new();
        let mut req = request(Side::A, "midpoint_B");
        req.config.b0 = rat(0, 1);
        assert_eq!(store.create_session(&req).unwrap_err().code(), "InvalidConfig");
        assert_eq!(store.create_session(&request(Side::A, "nonsense")).unwrap_err().code(), "UnknownDescriptor");
        assert_eq!(store.create_session(&request(Side::A, "midpoint_A")).unwrap_err().code(), "UnknownDescriptor");
        let mut req = request(Side::A, "midpoint_B");
        req.target = Some(TargetSpec::Named("primes".into()));
        assert_eq!(store.create_session(&req).unwrap_err().code(), "UnknownDescriptor");
        assert_eq!(store.view("s99").unwrap_err().code(), "UnknownSession");
    }

    #[test]
    fn round_limit_and_replay() {
        let store = SessionStore::new();
        let mut req = request(Side::A, "squeeze");
        req.max_rounds = Some(3);
        let id = store.create_session(&req).unwrap().id;
        for _ in 0..3 {
            let v = store.view(&id).unwrap();
            let legal = v.legal.unwrap();
            store.post_move(&id, None, &legal.lo.midpoint(&legal.hi).to_string()).unwrap();
        }
        let v = store.view(&id).unwrap();
        assert_eq!(v.status, Status::Idle);
        assert_eq!(store.post_move(&id, None, "1/2").unwrap_err().code(), "Finished");

        let json = serde_json::to_value(&v).unwrap();
        let play: History = serde_json::from_value(json).unwrap();
        assert!(check_consistency(&play, store.engine(&id).unwrap().as_ref(), Side::B).is_consistent());
    }

    #[test]
    fn log_recovery() {
        let dir = std::env::temp_dir().join(format!("cantor-arena-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("moves.jsonl");
        let _ = std::fs::remove_file(&path);
        let (id, before) = {
            let store = SessionStore::with_log(&path).unwrap();
            let id = store.create_session(&request(Side::A, "seeded_random(B,7)")).unwrap().id;
            store.post_move(&id, None, "1/3").unwrap();
            store.post_move(&id, None, "2/5").unwrap();
            let view = serde_json::to_string(&store.view(&id).unwrap()).unwrap();
            (id, view)
        };
        let store = SessionStore::with_log(&path).unwrap();
        assert_eq!(serde_json::to_string(&store.view(&id).unwrap()).unwrap(), before);
        let next = store.create_session(&request(Side::A, "midpoint_B")).unwrap().id;
        assert_eq!(next, "s2");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
