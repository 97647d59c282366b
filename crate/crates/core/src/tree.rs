//! Generalized Cantor sets as lazily expanded binary interval trees.
//!
//! A tree has a root interval `I = [c, d]`, a strictly decreasing positive bound
//! sequence `e_n`, and for every bit string `p` a closed interval `I_p`. The set is
//! the intersection over `n` of the union of the depth-`n` intervals. A tree is
//! well formed when every node satisfies:
//!
//! * width: `0 < |I_p| < e_{|p|}` for `|p| >= 1`,
//! * nesting: `I_{p0}, I_{p1}` are inside `I_p` (shared endpoints allowed),
//! * sibling disjointness: `I_{p0}` and `I_{p1}` do not meet.
//!
//! Nodes come either from a [`ChildGenerator`] (expanded on demand and memoized)
//! or from a materialized table of fixed depth.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::interval::Interval;
use crate::rat::Rat;

/// A node address: a finite bit string, written `"0110"`. Ordered shortlex
/// (shorter first, then lexicographic), which is breadth-first tree order.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Path(Vec<bool>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Path {
        Path(bits.into_iter().collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, bit: bool) -> Path {
        let mut v = self.0.clone();
        v.push(bit);
        Path(v)
    }

    pub fn parent(&self) -> Option<Path> {
        let (_, rest) = self.0.split_last()?;
        Some(Path(rest.to_vec()))
    }

    pub fn sibling(&self) -> Option<Path> {
        let (last, rest) = self.0.split_last()?;
        let mut v = rest.to_vec();
        v.push(!last);
        Some(Path(v))
    }

    pub fn last(&self) -> Option<bool> {
        self.0.last().copied()
    }

    pub fn prefix(&self, n: usize) -> Path {
        Path(self.0[..n].to_vec())
    }

    pub fn concat(&self, other: &Path) -> Path {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Path(v)
    }

    pub fn starts_with(&self, other: &Path) -> bool {
        self.0.starts_with(&other.0)
    }

    /// All `2^n` paths of length `n`, in left-to-right order.
    pub fn all_of_len(n: usize) -> impl Iterator<Item = Path> {
        assert!(n < 64, "depth {n} is too large to enumerate");
        (0..1u64 << n).map(move |k| Path((0..n).map(|i| (k >> (n - 1 - i)) & 1 == 1).collect()))
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Path) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Path) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for Path {
    type Err = TreeError;
    fn from_str(s: &str) -> Result<Path, TreeError> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(TreeError::InvalidPath(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Path)
    }
}

impl Serialize for Path {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Path {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Path, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Which well-formedness condition a node breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// `0 < width < e_n`.
    Width,
    /// Child not inside its parent.
    Nesting,
    /// Siblings meet.
    SiblingOverlap,
    /// Two non-sibling intervals at the same depth meet.
    LevelOverlap,
    /// The node could not be produced at all.
    Generation,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Width => "width bound",
            Clause::Nesting => "nesting",
            Clause::SiblingOverlap => "sibling disjointness",
            Clause::LevelOverlap => "same-depth disjointness",
            Clause::Generation => "generation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("node {path}: {clause} violated ({detail})")]
    GeneratorViolation { path: Path, clause: Clause, detail: String },
    #[error("node {path} is beyond the materialized depth {depth}")]
    NotMaterialized { path: Path, depth: usize },
    #[error("no room for two disjoint uncovered children below node {path}")]
    ConstructionStuck { path: Path },
    #[error("cover length {total} exceeds the allowed {limit}")]
    CoverTooLarge { total: Rat, limit: Rat },
    #[error("not anchored: {0}")]
    NotAnchored(String),
    #[error("code has {have} definite bits, {need} needed")]
    UnspecifiedTail { need: usize, have: usize },
    #[error("invalid bound rule: {0}")]
    InvalidRule(String),
    #[error("invalid depth: {0}")]
    InvalidDepth(String),
    #[error("invalid path {0:?}")]
    InvalidPath(String),
    #[error("invalid interval {0}")]
    InvalidInterval(Interval),
    #[error("malformed tree: {0}")]
    Malformed(String),
}

/// Geometric bound sequence `e_n = scale * ratio^n`, `scale > 0`, `0 < ratio < 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundRule {
    scale: Rat,
    ratio: Rat,
}

impl BoundRule {
    pub fn new(scale: Rat, ratio: Rat) -> Result<BoundRule, TreeError> {
        if !scale.is_positive() {
            return Err(TreeError::InvalidRule(format!("scale {scale} must be positive")));
        }
        if !(ratio.is_positive() && ratio < Rat::one()) {
            return Err(TreeError::InvalidRule(format!("ratio {ratio} must lie in (0, 1)")));
        }
        Ok(BoundRule { scale, ratio })
    }

    /// `e_n = w / 2^n`.
    pub fn halving(width: Rat) -> Result<BoundRule, TreeError> {
        BoundRule::new(width, Rat::new(1, 2))
    }

    pub fn scale(&self) -> &Rat {
        &self.scale
    }

    pub fn ratio(&self) -> &Rat {
        &self.ratio
    }

    pub fn at(&self, n: usize) -> Rat {
        &self.scale * self.ratio.pow(n as u32)
    }

    /// The rule seen from a node at depth `r`: `e'_n = e_{n + r}`.
    pub fn shifted(&self, r: usize) -> BoundRule {
        BoundRule { scale: self.at(r), ratio: self.ratio.clone() }
    }
}

/// Serialized bound rule: `"halving"` (relative to the root width) or
/// `{"scale": "p/q", "ratio": "r/s"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RuleSpec {
    Named(String),
    Geometric { scale: Rat, ratio: Rat },
}

impl RuleSpec {
    pub fn resolve(&self, root: &Interval) -> Result<BoundRule, TreeError> {
        match self {
            RuleSpec::Named(n) if n == "halving" => BoundRule::halving(root.width()),
            RuleSpec::Named(n) => Err(TreeError::InvalidRule(format!("unknown rule {n:?}"))),
            RuleSpec::Geometric { scale, ratio } => BoundRule::new(scale.clone(), ratio.clone()),
        }
    }

    pub fn describe(rule: &BoundRule, root: &Interval) -> RuleSpec {
        if rule.scale == root.width() && rule.ratio == Rat::new(1, 2) {
            RuleSpec::Named("halving".into())
        } else {
            RuleSpec::Geometric { scale: rule.scale.clone(), ratio: rule.ratio.clone() }
        }
    }
}

/// Serializable description of a built-in generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorSpec {
    #[serde(rename = "middle_thirds")]
    MiddleThirds,
    /// Complement of finitely many open intervals, see [`avoid_open_cover_tree`].
    #[serde(rename = "avoid_cover")]
    AvoidCover { cover: Vec<Interval> },
}

/// Produces the two children of a node. Must be deterministic.
pub trait ChildGenerator: Send + Sync {
    fn children(&self, path: &Path, parent: &Interval) -> Result<(Interval, Interval), TreeError>;

    /// Every 0-child shares its parent's left endpoint.
    fn left_anchored(&self) -> bool {
        false
    }

    fn spec(&self) -> Option<GeneratorSpec> {
        None
    }
}

/// Keep the outer thirds.
pub struct MiddleThirds;

impl ChildGenerator for MiddleThirds {
    fn children(&self, _: &Path, p: &Interval) -> Result<(Interval, Interval), TreeError> {
        let third = p.width() / Rat::from_int(3);
        Ok((
            Interval::new(p.lo.clone(), &p.lo + &third),
            Interval::new(&p.hi - &third, p.hi.clone()),
        ))
    }

    fn left_anchored(&self) -> bool {
        true
    }

    fn spec(&self) -> Option<GeneratorSpec> {
        Some(GeneratorSpec::MiddleThirds)
    }
}

/// Split into halves, keep the largest closed piece of each half that misses
/// every cover interval (leftmost on ties), then trim an eighth of its width
/// from both ends so the children stay strictly apart.
pub struct AvoidCover {
    cover: Vec<Interval>,
}

impl AvoidCover {
    fn largest_gap(&self, half: &Interval) -> Option<Interval> {
        let mut blocks: Vec<&Interval> =
            self.cover.iter().filter(|u| half.meets_open(&u.lo, &u.hi)).collect();
        blocks.sort_by(|x, y| x.lo.cmp(&y.lo));
        let mut best: Option<Interval> = None;
        let mut consider = |lo: &Rat, hi: &Rat| {
            if lo < hi {
                let w = hi - lo;
                if best.as_ref().is_none_or(|b| w > b.width()) {
                    best = Some(Interval::new(lo.clone(), hi.clone()));
                }
            }
        };
        let mut cursor = half.lo.clone();
        for u in blocks {
            let end = if u.lo < half.hi { u.lo.clone() } else { half.hi.clone() };
            consider(&cursor, &end);
            if u.hi > cursor {
                cursor = u.hi.clone();
            }
            if cursor >= half.hi {
                break;
            }
        }
        consider(&cursor, &half.hi);
        best
    }
}

impl ChildGenerator for AvoidCover {
    fn children(&self, path: &Path, p: &Interval) -> Result<(Interval, Interval), TreeError> {
        let mid = p.midpoint();
        let eighth = Rat::new(1, 8);
        let pick = |half: Interval| {
            let g = self
                .largest_gap(&half)
                .ok_or_else(|| TreeError::ConstructionStuck { path: path.clone() })?;
            let t = g.width() * &eighth;
            Ok::<_, TreeError>(Interval::new(&g.lo + &t, &g.hi - &t))
        };
        let left = pick(Interval::new(p.lo.clone(), mid.clone()))?;
        let right = pick(Interval::new(mid, p.hi.clone()))?;
        Ok((left, right))
    }

    fn spec(&self) -> Option<GeneratorSpec> {
        Some(GeneratorSpec::AvoidCover { cover: self.cover.clone() })
    }
}

/// The part of another tree below a fixed node.
struct Subtree {
    parent: Arc<CantorTree>,
    base: Path,
}

impl ChildGenerator for Subtree {
    fn children(&self, path: &Path, _: &Interval) -> Result<(Interval, Interval), TreeError> {
        self.parent.children(&self.base.concat(path))
    }

    fn left_anchored(&self) -> bool {
        self.parent.is_left_anchored()
    }
}

enum Source {
    Generator(Arc<dyn ChildGenerator>),
    Table { depth: usize, left_anchored: bool },
}

pub struct CantorTree {
    root: Interval,
    bound: BoundRule,
    source: Source,
    memo: Mutex<HashMap<Path, Interval>>,
}

impl fmt::Debug for CantorTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.source {
            Source::Generator(g) => match g.spec() {
                Some(s) => format!("{s:?}"),
                None => "custom".to_string(),
            },
            Source::Table { depth, .. } => format!("table(depth {depth})"),
        };
        write!(f, "CantorTree({} {kind})", self.root)
    }
}

impl CantorTree {
    pub fn from_generator(
        root: Interval,
        bound: BoundRule,
        generator: Arc<dyn ChildGenerator>,
    ) -> Result<CantorTree, TreeError> {
        if root.lo >= root.hi {
            return Err(TreeError::InvalidInterval(root));
        }
        let memo = HashMap::from([(Path::root(), root.clone())]);
        Ok(CantorTree { root, bound, source: Source::Generator(generator), memo: Mutex::new(memo) })
    }

    /// The classical middle-thirds set on `root`, with `e_n = |root| / 2^n`.
    pub fn middle_thirds(root: Interval) -> Result<CantorTree, TreeError> {
        let bound = BoundRule::halving(root.width())?;
        CantorTree::from_generator(root, bound, Arc::new(MiddleThirds))
    }

    /// A materialized tree. `nodes` must hold every path of length `0..=depth`
    /// for some depth, with the root entry equal to `root`.
    pub fn from_table(
        root: Interval,
        bound: BoundRule,
        nodes: BTreeMap<Path, Interval>,
    ) -> Result<CantorTree, TreeError> {
        if root.lo >= root.hi {
            return Err(TreeError::InvalidInterval(root));
        }
        if let Some(r) = nodes.get(&Path::root()) {
            if *r != root {
                return Err(TreeError::Malformed(format!("root entry {r} differs from root {root}")));
            }
        }
        let depth = nodes.keys().map(Path::len).max().unwrap_or(0);
        for p in nodes.keys() {
            if let Some(s) = p.sibling() {
                if !nodes.contains_key(&s) {
                    return Err(TreeError::Malformed(format!("node {p} has no sibling")));
                }
            }
        }
        let expected: usize = (0..=depth).map(|n| 1usize << n).sum();
        let mut memo: HashMap<Path, Interval> = nodes.into_iter().collect();
        memo.insert(Path::root(), root.clone());
        if memo.len() != expected {
            return Err(TreeError::Malformed(format!(
                "expected a complete tree of depth {depth} ({expected} nodes), got {}",
                memo.len()
            )));
        }
        let left_anchored = memo.iter().all(|(p, i)| match p.last() {
            Some(false) => memo[&p.parent().unwrap()].lo == i.lo,
            _ => true,
        });
        Ok(CantorTree { root, bound, source: Source::Table { depth, left_anchored }, memo: Mutex::new(memo) })
    }

    pub fn root(&self) -> &Interval {
        &self.root
    }

    pub fn bound(&self) -> &BoundRule {
        &self.bound
    }

    /// `e_n`.
    pub fn e(&self, n: usize) -> Rat {
        self.bound.at(n)
    }

    /// Deepest available level; `None` for generator-backed trees.
    pub fn max_depth(&self) -> Option<usize> {
        match self.source {
            Source::Generator(_) => None,
            Source::Table { depth, .. } => Some(depth),
        }
    }

    pub fn is_left_anchored(&self) -> bool {
        match &self.source {
            Source::Generator(g) => g.left_anchored(),
            Source::Table { left_anchored, .. } => *left_anchored,
        }
    }

    pub fn generator_spec(&self) -> Option<GeneratorSpec> {
        match &self.source {
            Source::Generator(g) => g.spec(),
            Source::Table { .. } => None,
        }
    }

    fn memo_get(&self, p: &Path) -> Option<Interval> {
        self.memo.lock().expect("memo poisoned").get(p).cloned()
    }

    /// Children of the node at `path`, unchecked. Memoized.
    pub fn children(&self, path: &Path) -> Result<(Interval, Interval), TreeError> {
        let (p0, p1) = (path.child(false), path.child(true));
        if let (Some(a), Some(b)) = (self.memo_get(&p0), self.memo_get(&p1)) {
            return Ok((a, b));
        }
        let gen = match &self.source {
            Source::Generator(g) => g,
            Source::Table { depth, .. } => {
                return Err(TreeError::NotMaterialized { path: p0, depth: *depth });
            }
        };
        let parent = match self.memo_get(path) {
            Some(i) => i,
            None => self.node(path)?,
        };
        let (a, b) = gen.children(path, &parent)?;
        let mut memo = self.memo.lock().expect("memo poisoned");
        let a = memo.entry(p0).or_insert(a).clone();
        let b = memo.entry(p1).or_insert(b).clone();
        Ok((a, b))
    }

    /// The interval at `path`, unchecked.
    pub fn node(&self, path: &Path) -> Result<Interval, TreeError> {
        if let Some(i) = self.memo_get(path) {
            return Ok(i);
        }
        let mut cur = self.root.clone();
        for k in 0..path.len() {
            let (a, b) = self.children(&path.prefix(k))?;
            cur = if path.bits()[k] { b } else { a };
        }
        Ok(cur)
    }

    /// The interval at `path`, checking width, nesting and sibling
    /// disjointness at every level on the way down.
    pub fn expand(&self, path: &Path) -> Result<Interval, TreeError> {
        let mut cur = self.root.clone();
        for k in 0..path.len() {
            let parent_path = path.prefix(k);
            let (a, b) = self.children(&parent_path)?;
            if let Some((clause, detail)) = local_violation(&self.bound, k + 1, &cur, &a, &b) {
                let at = if clause == Clause::SiblingOverlap { parent_path.child(true) } else { path.prefix(k + 1) };
                return Err(TreeError::GeneratorViolation { path: at, clause, detail });
            }
            cur = if path.bits()[k] { b } else { a };
        }
        Ok(cur)
    }

    /// Expands every node down to `depth` and checks all conditions exactly,
    /// including pairwise disjointness of all intervals at each depth.
    pub fn validate(&self, depth: usize) -> ValidationReport {
        let mut report = ValidationReport { depth, nodes: 0, violations: Vec::new() };
        let mut level: Vec<(Path, Interval)> = vec![(Path::root(), self.root.clone())];
        for n in 1..=depth {
            let mut next = Vec::with_capacity(level.len() * 2);
            for (p, parent) in &level {
                match self.children(p) {
                    Ok((a, b)) => {
                        report.check_pair(&self.bound, n, p, parent, &a, &b);
                        next.push((p.child(false), a));
                        next.push((p.child(true), b));
                    }
                    Err(e) => report.violations.push(Violation {
                        path: p.child(false),
                        other: None,
                        clause: Clause::Generation,
                        detail: e.to_string(),
                    }),
                }
            }
            report.nodes += next.len();
            report.check_level(&next);
            level = next;
        }
        report
    }

    /// All nodes of length `0..=depth`.
    pub fn materialize(&self, depth: usize) -> Result<BTreeMap<Path, Interval>, TreeError> {
        let mut out = BTreeMap::new();
        out.insert(Path::root(), self.root.clone());
        let mut level = vec![Path::root()];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(level.len() * 2);
            for p in &level {
                let (a, b) = self.children(p)?;
                out.insert(p.child(false), a);
                out.insert(p.child(true), b);
                next.push(p.child(false));
                next.push(p.child(true));
            }
            level = next;
        }
        Ok(out)
    }

    /// The tree rooted at `path`, sharing this tree's nodes. Its bound rule
    /// is shifted so that its depth-`n` widths are still below `e_{n + |path|}`.
    pub fn subtree(self: &Arc<Self>, path: &Path) -> Result<CantorTree, TreeError> {
        let root = self.node(path)?;
        let bound = self.bound.shifted(path.len());
        match &self.source {
            Source::Generator(_) => CantorTree::from_generator(
                root,
                bound,
                Arc::new(Subtree { parent: Arc::clone(self), base: path.clone() }),
            ),
            Source::Table { depth, .. } => {
                let memo = self.memo.lock().expect("memo poisoned");
                let nodes: BTreeMap<Path, Interval> = memo
                    .iter()
                    .filter(|(p, _)| p.starts_with(path) && p.len() <= *depth)
                    .map(|(p, i)| (Path::from_bits(p.bits()[path.len()..].iter().copied()), i.clone()))
                    .collect();
                drop(memo);
                CantorTree::from_table(root, bound, nodes)
            }
        }
    }

    /// Serializable form: the generator descriptor when there is one (and
    /// `materialize` is false), otherwise the node table down to `depth`.
    pub fn to_file(&self, depth: usize, materialize: bool) -> Result<TreeFile, TreeError> {
        let e_rule = RuleSpec::describe(&self.bound, &self.root);
        match (self.generator_spec(), materialize) {
            (Some(generator), false) => {
                Ok(TreeFile::Generated { generator, root: self.root.clone(), e_rule, depth })
            }
            _ => Ok(TreeFile::Table {
                root: self.root.clone(),
                e_rule,
                depth: Some(depth),
                nodes: self.materialize(depth)?,
            }),
        }
    }

    /// Builds a tree from its file form; returns it with the recorded depth.
    pub fn from_file(file: &TreeFile) -> Result<(CantorTree, usize), TreeError> {
        match file {
            TreeFile::Generated { generator, root, e_rule, depth } => {
                let bound = e_rule.resolve(root)?;
                let gen: Arc<dyn ChildGenerator> = match generator {
                    GeneratorSpec::MiddleThirds => Arc::new(MiddleThirds),
                    GeneratorSpec::AvoidCover { cover } => Arc::new(AvoidCover { cover: cover.clone() }),
                };
                Ok((CantorTree::from_generator(root.clone(), bound, gen)?, *depth))
            }
            TreeFile::Table { root, e_rule, depth, nodes } => {
                let bound = e_rule.resolve(root)?;
                let tree = CantorTree::from_table(root.clone(), bound, nodes.clone())?;
                let d = tree.max_depth().unwrap_or(0);
                if let Some(declared) = depth {
                    if *declared != d {
                        return Err(TreeError::Malformed(format!("declared depth {declared}, nodes reach {d}")));
                    }
                }
                Ok((tree, d))
            }
        }
    }
}

fn local_violation(
    bound: &BoundRule,
    n: usize,
    parent: &Interval,
    a: &Interval,
    b: &Interval,
) -> Option<(Clause, String)> {
    let e = bound.at(n);
    for (i, name) in [(a, "0"), (b, "1")] {
        let w = i.width();
        if !(w.is_positive() && w < e) {
            return Some((Clause::Width, format!("{name}-child {i} has width {w}, bound {e}")));
        }
        if !parent.includes(i) {
            return Some((Clause::Nesting, format!("{name}-child {i} not inside {parent}")));
        }
    }
    if a.intersects(b) {
        return Some((Clause::SiblingOverlap, format!("{a} meets {b}")));
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: Path,
    /// The second node, for same-depth overlaps.
    pub other: Option<Path>,
    pub clause: Clause,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub depth: usize,
    /// Nodes checked, root excluded: `2 + 4 + ... + 2^depth` when complete.
    pub nodes: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn check_pair(&mut self, bound: &BoundRule, n: usize, p: &Path, parent: &Interval, a: &Interval, b: &Interval) {
        let e = bound.at(n);
        for (bit, i) in [(false, a), (true, b)] {
            let path = p.child(bit);
            let w = i.width();
            if !(w.is_positive() && w < e) {
                self.violations.push(Violation {
                    path: path.clone(),
                    other: None,
                    clause: Clause::Width,
                    detail: format!("width {w}, bound {e}"),
                });
            }
            if !parent.includes(i) {
                self.violations.push(Violation {
                    path,
                    other: None,
                    clause: Clause::Nesting,
                    detail: format!("{i} not inside {parent}"),
                });
            }
        }
        if a.intersects(b) {
            self.violations.push(Violation {
                path: p.child(true),
                other: Some(p.child(false)),
                clause: Clause::SiblingOverlap,
                detail: format!("{a} meets {b}"),
            });
        }
    }

    fn check_level(&mut self, level: &[(Path, Interval)]) {
        let mut sorted: Vec<&(Path, Interval)> = level.iter().collect();
        sorted.sort_by(|x, y| x.1.lo.cmp(&y.1.lo).then_with(|| x.1.hi.cmp(&y.1.hi)));
        // sorted by left end, closed intervals are pairwise disjoint iff
        // neighbours are; report each meeting neighbour pair that is not a
        // sibling pair (those are already reported)
        for w in sorted.windows(2) {
            let (p, i) = (&w[0].0, &w[0].1);
            let (q, j) = (&w[1].0, &w[1].1);
            if i.intersects(j) && p.sibling().as_ref() != Some(q) {
                self.violations.push(Violation {
                    path: p.clone(),
                    other: Some(q.clone()),
                    clause: Clause::LevelOverlap,
                    detail: format!("{i} meets {j}"),
                });
            }
        }
    }
}

/// On-disk tree: either a generator descriptor or a node table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeFile {
    Generated {
        generator: GeneratorSpec,
        root: Interval,
        e_rule: RuleSpec,
        depth: usize,
    },
    Table {
        root: Interval,
        e_rule: RuleSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depth: Option<usize>,
        nodes: BTreeMap<Path, Interval>,
    },
}

/// A tree inside `host` whose intervals miss every open interval of `cover`,
/// validated to `depth`. Its points are all in `host` minus the cover, so it
/// certifies that this complement contains a perfect set.
///
/// The clipped cover length must not exceed half the host width.
pub fn avoid_open_cover_tree(cover: &[Interval], host: Interval, depth: usize) -> Result<CantorTree, TreeError> {
    if host.lo >= host.hi {
        return Err(TreeError::InvalidInterval(host));
    }
    let mut total = Rat::zero();
    for u in cover {
        if u.lo >= u.hi {
            return Err(TreeError::InvalidInterval(u.clone()));
        }
        let lo = if u.lo > host.lo { &u.lo } else { &host.lo };
        let hi = if u.hi < host.hi { &u.hi } else { &host.hi };
        if lo < hi {
            total = total + (hi - lo);
        }
    }
    let limit = host.width() / Rat::from_int(2);
    if total > limit {
        return Err(TreeError::CoverTooLarge { total, limit });
    }
    let bound = BoundRule::halving(host.width())?;
    let tree = CantorTree::from_generator(host, bound, Arc::new(AvoidCover { cover: cover.to_vec() }))?;
    let report = tree.validate(depth);
    if let Some(v) = report.violations.first() {
        if v.clause == Clause::Generation {
            return Err(TreeError::ConstructionStuck { path: v.path.parent().unwrap_or_default() });
        }
        return Err(TreeError::GeneratorViolation { path: v.path.clone(), clause: v.clause, detail: v.detail.clone() });
    }
    Ok(tree)
}

/// The open intervals `(q_n - 2^-(n+2), q_n + 2^-(n+2))`, `n = 1..=count`, where
/// `q_n` is the `(n-1)`-th element of the fixed enumeration of `[lo, hi]`.
/// Total length is below half of `[0, 1]`.
pub fn enumeration_cover(e: &crate::enumeration::RatEnumeration, count: u32) -> Vec<Interval> {
    (1..=count)
        .map(|n| {
            let q = e.at(u64::from(n - 1));
            let r = Rat::pow2_inv(n + 2);
            Interval::new(&q - &r, &q + &r)
        })
        .collect()
}
