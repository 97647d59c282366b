//! Operations shared by the subcommands and the HTTP endpoints.

use std::fmt;

use cantor_core::arena::{ArenaError, Bound, RawConfig, TargetSpec};
use cantor_core::extraction::{ExtractError, ExtractedTree, ExtractionFile};
use cantor_core::game::{limit_bracket, GameConfig, Side};
use cantor_core::strategy::{counterplay, midpoint_sampler, CounterplayTrace, StrategyError};
use cantor_core::target::TargetError;
use cantor_core::{make_oracle, CantorTree, Path, Rat, RatEnumeration, TreeFile, DEFAULT_LEVEL_CAP};
use serde::{Deserialize, Serialize};

/// Deepest extraction served; a depth-n tree has `2^(n+1) - 1` nodes.
pub const MAX_EXTRACT_DEPTH: usize = 12;
/// Longest counter-play served.
pub const MAX_COUNTERPLAY_DEPTH: usize = 256;
/// Replayed codes per verification when the tree is too deep to replay all.
const SPOT_CHECKS: usize = 64;

/// An error with a stable wire code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpError {
    pub code: &'static str,
    pub message: String,
    pub bound: Option<Bound>,
}

impl OpError {
    pub fn new(code: &'static str, message: impl Into<String>) -> OpError {
        OpError { code, message: message.into(), bound: None }
    }
}

impl fmt::Display for OpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for OpError {}

impl From<ArenaError> for OpError {
    fn from(e: ArenaError) -> OpError {
        OpError { code: e.code(), message: e.to_string(), bound: e.bound() }
    }
}

impl From<StrategyError> for OpError {
    fn from(e: StrategyError) -> OpError {
        let code = match &e {
            StrategyError::UnknownDescriptor(_) | StrategyError::SideMismatch { .. } => "UnknownDescriptor",
            StrategyError::PrologueViolation { .. } => "PrologueViolation",
            StrategyError::TargetOutOfRange { .. } => "TargetOutOfRange",
            StrategyError::SamplerOutOfRange { .. } => "SamplerOutOfRange",
            StrategyError::Game(g) => return ArenaError::from(g.clone()).into(),
            StrategyError::Tree(_) => "TreeError",
            StrategyError::PendingMove => "PendingMove",
        };
        OpError::new(code, e.to_string())
    }
}

impl From<ExtractError> for OpError {
    fn from(e: ExtractError) -> OpError {
        let code = match &e {
            ExtractError::OracleContractViolation { lo, hi, .. } => {
                return OpError {
                    code: "OracleContractViolation",
                    message: e.to_string(),
                    bound: Some(Bound { lo: lo.clone(), hi: hi.clone() }),
                }
            }
            ExtractError::ZeroDepth | ExtractError::DepthExceeded { .. } => "InvalidDepth",
            ExtractError::RangeMismatch { .. } => "InvalidConfig",
            ExtractError::Malformed(_) => "ParseError",
            ExtractError::Enumeration(_) => "EnumerationError",
            ExtractError::Tree(_) => "TreeError",
            ExtractError::Game(g) => return ArenaError::from(g.clone()).into(),
        };
        OpError::new(code, e.to_string())
    }
}

impl From<TargetError> for OpError {
    fn from(e: TargetError) -> OpError {
        let code = match &e {
            TargetError::Tree(_) => "TreeError",
            TargetError::UnknownScheme(_) | TargetError::InvalidRange { .. } | TargetError::Duplicate(_) => "InvalidTarget",
            TargetError::OutsideGame { .. } => "InvalidConfig",
            TargetError::UnsupportedAtom { .. } => "UnsupportedAtom",
            TargetError::PreconditionFailed(_) => "PreconditionFailed",
            TargetError::ProbeFailed { .. } => "ProbeFailed",
        };
        OpError::new(code, e.to_string())
    }
}

pub fn config_of(raw: Option<&RawConfig>) -> Result<GameConfig, OpError> {
    match raw {
        None => Ok(GameConfig::unit()),
        Some(r) => GameConfig::new(r.a0.clone(), r.b0.clone()).map_err(|e| OpError::new("InvalidConfig", e.to_string())),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractRequest {
    pub side: Side,
    pub strategy: String,
    pub depth: usize,
    #[serde(default)]
    pub config: Option<RawConfig>,
}

pub fn extract(req: &ExtractRequest) -> Result<ExtractionFile, OpError> {
    if req.depth == 0 || req.depth > MAX_EXTRACT_DEPTH {
        return Err(OpError::new("InvalidDepth", format!("depth must be in 1..={MAX_EXTRACT_DEPTH}, got {}", req.depth)));
    }
    let config = config_of(req.config.as_ref())?;
    let oracle = make_oracle(&req.strategy, Some(req.side), &config)?;
    if oracle.side() != req.side {
        return Err(OpError::new(
            "UnknownDescriptor",
            format!("{} plays for {}, not {}", oracle.descriptor(), oracle.side(), req.side),
        ));
    }
    let e = RatEnumeration::new(config.a0().clone(), config.b0().clone()).map_err(|e| OpError::new("InvalidConfig", e.to_string()))?;
    let t = cantor_core::extract(oracle.as_ref(), &config, req.depth, &e, DEFAULT_LEVEL_CAP)?;
    Ok(t.to_file()?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub kind: &'static str,
    pub depth: usize,
    /// Nodes validated, root excluded.
    pub nodes: usize,
    pub replays: usize,
    pub violations: Vec<String>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Spot-check codes: every code of the full depth when there are at most
/// [`SPOT_CHECKS`], otherwise a fixed pseudo-random sample.
fn spot_codes(depth: usize) -> Vec<Path> {
    if depth < 63 && (1usize << depth) <= SPOT_CHECKS {
        return Path::all_of_len(depth).collect();
    }
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    (0..SPOT_CHECKS)
        .map(|_| {
            Path::from_bits((0..depth).map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                state >> 63 == 1
            }))
        })
        .collect()
}

/// Checks an extraction file (validation, construction audit against the
/// named strategy, replays) or a plain tree file (validation only).
pub fn verify(text: &str) -> Result<VerifyReport, OpError> {
    if let Ok(file) = serde_json::from_str::<ExtractionFile>(text) {
        return verify_extraction(&file);
    }
    let file: TreeFile = serde_json::from_str(text).map_err(|e| OpError::new("ParseError", e.to_string()))?;
    let (tree, depth) = CantorTree::from_file(&file).map_err(|e| OpError::new("TreeError", e.to_string()))?;
    let report = tree.validate(depth);
    Ok(VerifyReport {
        kind: "tree",
        depth,
        nodes: report.nodes,
        replays: 0,
        violations: report.violations.iter().map(|v| format!("node {}: {} ({})", v.path, v.clause, v.detail)).collect(),
    })
}

fn verify_extraction(file: &ExtractionFile) -> Result<VerifyReport, OpError> {
    let t = ExtractedTree::from_file(file)?;
    let oracle = make_oracle(&t.strategy, Some(t.side), &t.config)?;
    let e = RatEnumeration::new(t.config.a0().clone(), t.config.b0().clone())
        .map_err(|e| OpError::new("InvalidConfig", e.to_string()))?;
    let mut violations = t.audit(oracle.as_ref(), &e, DEFAULT_LEVEL_CAP);
    let codes = spot_codes(t.depth);
    for code in &codes {
        let r = match t.replay(code, oracle.as_ref()) {
            Ok(r) => r,
            Err(e) => {
                violations.push(format!("replay {code}: {e}"));
                continue;
            }
        };
        if !r.consistency.is_consistent() {
            violations.push(format!("replay {code}: {:?}", r.consistency));
        }
        let b = limit_bracket(&r.history).map_err(|e| OpError::new("ParseError", e.to_string()))?;
        let cell = t.tree.node(&code.prefix(code.len() - 1)).map_err(|e| OpError::new("TreeError", e.to_string()))?;
        if !(cell.lo <= b.lo && b.hi <= cell.hi) {
            violations.push(format!("replay {code}: bracket [{}, {}] leaves node {}", b.lo, b.hi, cell));
        }
    }
    let nodes = t.tree.validate(t.depth).nodes;
    Ok(VerifyReport { kind: "extraction", depth: t.depth, nodes, replays: codes.len(), violations })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyRequest {
    pub target: TargetSpec,
    #[serde(default)]
    pub config: Option<RawConfig>,
}

/// Verdict plus witness, as JSON.
pub fn classify(req: &ClassifyRequest) -> Result<serde_json::Value, OpError> {
    let config = config_of(req.config.as_ref())?;
    let s = req.target.resolve(&config)?;
    Ok(s.classify().to_json()?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterplayRequest {
    pub strategy: String,
    pub target_point: Rat,
    pub depth: usize,
    #[serde(default)]
    pub config: Option<RawConfig>,
}

pub fn run_counterplay(req: &CounterplayRequest) -> Result<CounterplayTrace, OpError> {
    if req.depth > MAX_COUNTERPLAY_DEPTH {
        return Err(OpError::new("InvalidDepth", format!("depth must be at most {MAX_COUNTERPLAY_DEPTH}")));
    }
    let config = config_of(req.config.as_ref())?;
    let g = make_oracle(&req.strategy, Some(Side::B), &config)?;
    Ok(counterplay(g, &config, req.target_point.clone(), &midpoint_sampler, req.depth)?)
}
