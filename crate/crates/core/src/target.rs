//! Target sets, determinacy certificates and condensation-point probes.
//!
//! A target is a finite union of atoms: closed intervals, Cantor trees,
//! countable enumerations, complements of finitely many open intervals inside
//! a host interval, and opaque sets the engine cannot reason about.
//!
//! Uncountability is only ever certified by a perfect subset (a positive-length
//! interval or a validated tree) and countability only by an enumeration. When
//! neither is available the verdict is `Unknown`; nothing is guessed.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::{anchored_value, membership_probe, Code, Probe, Tail};
use crate::enumeration::RatEnumeration;
use crate::game::GameConfig;
use crate::interval::Interval;
use crate::rat::Rat;
use crate::tree::{avoid_open_cover_tree, CantorTree, Path, TreeError, TreeFile, ValidationReport};

/// Depth to which tree atoms are validated when no depth is recorded.
pub const DEFAULT_TREE_DEPTH: usize = 6;
/// Depth of the witness tree built for cover complements.
pub const COVER_WITNESS_DEPTH: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TargetError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("unknown enumeration scheme {0:?}")]
    UnknownScheme(String),
    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: Rat, hi: Rat },
    #[error("atom {atom} leaves the game interval [{a0}, {b0}]")]
    OutsideGame { atom: String, a0: Rat, b0: Rat },
    #[error("finite enumeration lists {0} twice")]
    Duplicate(Rat),
    #[error("unsupported atom {atom}; its own countable witness is {witness}")]
    UnsupportedAtom { atom: String, witness: String },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("no certificate found down to depth {depth}")]
    ProbeFailed { depth: usize },
}

/// A countable set given by an injective enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Countable {
    /// All rationals of `[lo, hi]` in the fixed Stern–Brocot order.
    SternBrocot(RatEnumeration),
    /// A finite list without repeats.
    Finite(Vec<Rat>),
}

impl Countable {
    pub fn finite(points: Vec<Rat>) -> Result<Countable, TargetError> {
        let mut seen = std::collections::BTreeSet::new();
        for p in &points {
            if !seen.insert(p.clone()) {
                return Err(TargetError::Duplicate(p.clone()));
            }
        }
        Ok(Countable::Finite(points))
    }

    pub fn at(&self, k: u64) -> Option<Rat> {
        match self {
            Countable::SternBrocot(e) => Some(e.at(k)),
            Countable::Finite(v) => usize::try_from(k).ok().and_then(|i| v.get(i).cloned()),
        }
    }

    /// `None` for infinite enumerations.
    pub fn len(&self) -> Option<u64> {
        match self {
            Countable::SternBrocot(_) => None,
            Countable::Finite(v) => Some(v.len() as u64),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn hull(&self) -> Option<Interval> {
        match self {
            Countable::SternBrocot(e) => Some(Interval::new(e.lo().clone(), e.hi().clone())),
            Countable::Finite(v) => {
                let lo = v.iter().min()?;
                let hi = v.iter().max()?;
                Some(Interval::new(lo.clone(), hi.clone()))
            }
        }
    }

    /// In if `x` has index at most `depth`; finite lists also decide Out.
    fn member(&self, x: &Rat, depth: u64) -> Membership {
        match self {
            Countable::SternBrocot(e) => match e.index_of(x) {
                None => Membership::Out,
                Some(k) if k <= num_bigint::BigUint::from(depth) => Membership::In,
                Some(_) => Membership::Undetermined,
            },
            Countable::Finite(v) => {
                if v.contains(x) {
                    Membership::In
                } else {
                    Membership::Out
                }
            }
        }
    }
}

impl fmt::Display for Countable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Countable::SternBrocot(e) => write!(f, "stern-brocot[{}, {}]", e.lo(), e.hi()),
            Countable::Finite(v) => {
                let parts: Vec<String> = v.iter().map(Rat::to_string).collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum SetExpr {
    /// `[lo, hi]`, `lo <= hi`.
    Interval(Interval),
    /// The set of a tree; `depth` is how deep it is validated.
    Tree { tree: Arc<CantorTree>, depth: usize },
    Countable(Countable),
    /// `host` minus finitely many open intervals.
    CoverComplement { host: Interval, cover: Vec<Interval> },
    /// A set with no computable description.
    Opaque { label: String },
    Union(Vec<SetExpr>),
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetExpr::Interval(i) => write!(f, "{i}"),
            SetExpr::Tree { tree, .. } => write!(f, "tree on {}", tree.root()),
            SetExpr::Countable(c) => write!(f, "{c}"),
            SetExpr::CoverComplement { host, cover } => write!(f, "{host} minus {} open intervals", cover.len()),
            SetExpr::Opaque { label } => write!(f, "opaque {label:?}"),
            SetExpr::Union(parts) => {
                let parts: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "union({})", parts.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    In,
    Out,
    Undetermined,
}

/// A perfect subset of the target.
#[derive(Debug, Clone)]
pub enum PerfectWitness {
    Interval(Interval),
    Tree { tree: Arc<CantorTree>, report: ValidationReport },
}

impl PerfectWitness {
    /// Positive length, or a tree validated without violations.
    pub fn is_valid(&self) -> bool {
        match self {
            PerfectWitness::Interval(i) => i.lo < i.hi,
            PerfectWitness::Tree { report, .. } => report.is_clean() && report.depth >= 1,
        }
    }

    /// Some closed interval containing the witness.
    pub fn hull(&self) -> Interval {
        match self {
            PerfectWitness::Interval(i) => i.clone(),
            PerfectWitness::Tree { tree, .. } => tree.root().clone(),
        }
    }

    pub fn to_json(&self) -> Result<serde_json::Value, TargetError> {
        Ok(match self {
            PerfectWitness::Interval(i) => serde_json::json!({ "interval": i }),
            PerfectWitness::Tree { tree, report } => serde_json::json!({
                "tree": tree.to_file(report.depth, false)?,
                "validation": report,
            }),
        })
    }
}

/// Covers the target by enumerations: every element of every part appears in
/// [`CountableWitness::iter`]. Parts are interleaved round-robin, so the
/// merged list reaches any element after finitely many steps.
#[derive(Debug, Clone)]
pub struct CountableWitness {
    pub parts: Vec<Countable>,
}

impl CountableWitness {
    pub fn iter(&self) -> impl Iterator<Item = Rat> + '_ {
        let m = self.parts.len();
        let mut round = 0u64;
        let mut buffer: std::collections::VecDeque<Rat> = Default::default();
        std::iter::from_fn(move || loop {
            if let Some(x) = buffer.pop_front() {
                return Some(x);
            }
            let mut any = false;
            for p in &self.parts {
                if p.len().is_none_or(|n| round < n) {
                    any = true;
                    if let Some(x) = p.at(round) {
                        buffer.push_back(x);
                    }
                }
            }
            if !any || m == 0 {
                return None;
            }
            round += 1;
        })
    }

    /// Whether `x` is listed among the first `limit` merged elements.
    pub fn lists(&self, x: &Rat, limit: usize) -> bool {
        self.iter().take(limit).any(|y| &y == x)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let parts: Vec<serde_json::Value> = self.parts.iter().map(countable_json).collect();
        serde_json::json!({ "merged": parts })
    }
}

fn countable_json(c: &Countable) -> serde_json::Value {
    match c {
        Countable::SternBrocot(e) => serde_json::json!({
            "enum": { "scheme": RatEnumeration::SCHEME, "lo": e.lo(), "hi": e.hi() }
        }),
        Countable::Finite(v) => serde_json::json!({ "finite": v }),
    }
}

#[derive(Debug, Clone)]
pub enum Determinacy {
    AWins(PerfectWitness),
    BWins(CountableWitness),
    Unknown { reason: String },
}

impl Determinacy {
    pub fn label(&self) -> &'static str {
        match self {
            Determinacy::AWins(_) => "AWins",
            Determinacy::BWins(_) => "BWins",
            Determinacy::Unknown { .. } => "Unknown",
        }
    }

    pub fn to_json(&self) -> Result<serde_json::Value, TargetError> {
        Ok(match self {
            Determinacy::AWins(w) => serde_json::json!({ "verdict": "AWins", "witness": w.to_json()? }),
            Determinacy::BWins(w) => serde_json::json!({ "verdict": "BWins", "witness": w.to_json() }),
            Determinacy::Unknown { reason } => serde_json::json!({ "verdict": "Unknown", "reason": reason }),
        })
    }
}

/// The closed pieces of `host` left after removing the open intervals, in
/// order; single points included.
pub fn complement_components(host: &Interval, cover: &[Interval]) -> Vec<Interval> {
    let mut blocks: Vec<&Interval> = cover.iter().filter(|u| host.meets_open(&u.lo, &u.hi)).collect();
    blocks.sort_by(|x, y| x.lo.cmp(&y.lo));
    let mut out = Vec::new();
    let mut cursor = Some(host.lo.clone());
    for u in blocks {
        if let Some(c) = &cursor {
            if &u.lo >= c {
                let end = if u.lo < host.hi { u.lo.clone() } else { host.hi.clone() };
                out.push(Interval::new(c.clone(), end));
            }
        }
        // the open interval removes everything below u.hi
        let next = u.hi.clone();
        cursor = match cursor {
            Some(c) if c > next => Some(c),
            _ if next <= host.hi => Some(next),
            _ => None,
        };
        if cursor.as_ref().is_some_and(|c| c > &host.hi) {
            cursor = None;
        }
    }
    if let Some(c) = cursor {
        out.push(Interval::new(c, host.hi.clone()));
    }
    out
}

impl SetExpr {
    pub fn interval(lo: Rat, hi: Rat) -> Result<SetExpr, TargetError> {
        if lo > hi {
            return Err(TargetError::InvalidRange { lo, hi });
        }
        Ok(SetExpr::Interval(Interval::new(lo, hi)))
    }

    /// All rationals of `[lo, hi]`.
    pub fn rationals(lo: Rat, hi: Rat) -> Result<SetExpr, TargetError> {
        let e = RatEnumeration::new(lo.clone(), hi.clone()).map_err(|_| TargetError::InvalidRange { lo, hi })?;
        Ok(SetExpr::Countable(Countable::SternBrocot(e)))
    }

    pub fn tree(tree: CantorTree, depth: usize) -> SetExpr {
        SetExpr::Tree { tree: Arc::new(tree), depth }
    }

    /// The atoms of this expression, unions flattened.
    pub fn atoms(&self) -> Vec<&SetExpr> {
        match self {
            SetExpr::Union(parts) => parts.iter().flat_map(|p| p.atoms()).collect(),
            atom => vec![atom],
        }
    }

    /// Every atom lies inside `[a0, b0]`.
    pub fn check_within(&self, config: &GameConfig) -> Result<(), TargetError> {
        let game = config.interval();
        for atom in self.atoms() {
            let hull = match atom {
                SetExpr::Interval(i) => Some(i.clone()),
                SetExpr::Tree { tree, .. } => Some(tree.root().clone()),
                SetExpr::Countable(c) => c.hull(),
                SetExpr::CoverComplement { host, .. } => Some(host.clone()),
                SetExpr::Opaque { .. } | SetExpr::Union(_) => None,
            };
            if let Some(h) = hull {
                if !game.includes(&h) {
                    return Err(TargetError::OutsideGame {
                        atom: atom.to_string(),
                        a0: config.a0().clone(),
                        b0: config.b0().clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Exact for intervals and cover complements; trees are probed to `depth`;
    /// enumerations report In only for an index at most `depth`.
    pub fn member(&self, x: &Rat, depth: usize) -> Result<Membership, TargetError> {
        Ok(match self {
            SetExpr::Interval(i) => {
                if i.contains(x) {
                    Membership::In
                } else {
                    Membership::Out
                }
            }
            SetExpr::Tree { tree, .. } => match membership_probe(tree, x, depth)? {
                Probe::In { .. } => Membership::In,
                Probe::Out { .. } => Membership::Out,
                Probe::Undetermined { .. } => Membership::Undetermined,
            },
            SetExpr::Countable(c) => c.member(x, depth as u64),
            SetExpr::CoverComplement { host, cover } => {
                if host.contains(x) && !cover.iter().any(|u| u.contains_open(x)) {
                    Membership::In
                } else {
                    Membership::Out
                }
            }
            SetExpr::Opaque { .. } => Membership::Undetermined,
            SetExpr::Union(parts) => {
                let mut all_out = true;
                for p in parts {
                    match p.member(x, depth)? {
                        Membership::In => return Ok(Membership::In),
                        Membership::Undetermined => all_out = false,
                        Membership::Out => {}
                    }
                }
                if all_out {
                    Membership::Out
                } else {
                    Membership::Undetermined
                }
            }
        })
    }

    pub fn classify(&self) -> Determinacy {
        let atoms = self.atoms();
        let mut notes = Vec::new();
        for atom in &atoms {
            match atom {
                SetExpr::Interval(i) if i.lo < i.hi => return Determinacy::AWins(PerfectWitness::Interval(i.clone())),
                SetExpr::Tree { tree, depth } => {
                    let report = tree.validate((*depth).max(1));
                    if report.is_clean() {
                        return Determinacy::AWins(PerfectWitness::Tree { tree: Arc::clone(tree), report });
                    }
                    notes.push(format!("tree on {} fails validation", tree.root()));
                }
                SetExpr::CoverComplement { host, cover } => match avoid_open_cover_tree(cover, host.clone(), COVER_WITNESS_DEPTH) {
                    Ok(tree) => {
                        let report = tree.validate(COVER_WITNESS_DEPTH);
                        return Determinacy::AWins(PerfectWitness::Tree { tree: Arc::new(tree), report });
                    }
                    Err(e) => notes.push(format!("no perfect subset built for {atom}: {e}")),
                },
                _ => {}
            }
        }
        let mut parts = Vec::new();
        for atom in &atoms {
            match atom {
                SetExpr::Countable(c) => parts.push(c.clone()),
                SetExpr::Interval(i) => parts.push(Countable::Finite(vec![i.lo.clone()])),
                other => {
                    notes.push(format!("{other} has neither a perfect subset nor an enumeration"));
                    return Determinacy::Unknown { reason: notes.join("; ") };
                }
            }
        }
        Determinacy::BWins(CountableWitness { parts })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Plus,
    Minus,
}

/// A point for the condensation calculus: an exact rational or a code on a
/// tree atom.
#[derive(Debug, Clone)]
pub enum Point {
    Rat(Rat),
    Code(Code),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CondensationVerdict {
    pub direction: Direction,
    pub verdict: Verdict,
    pub note: String,
}

/// Whether the 0-child lies left of the 1-child at every node on the first
/// `n` levels of `code`. All built-in trees are ordered this way, and the
/// tail rules below depend on it.
fn ordered_along(code: &Code, n: usize) -> Result<bool, TreeError> {
    let path = code.path(n)?;
    for k in 0..n {
        let (a, b) = code.tree().children(&path.prefix(k))?;
        if a.hi >= b.lo {
            return Ok(false);
        }
    }
    Ok(true)
}

fn tail_span(code: &Code) -> usize {
    let period = match code.tail() {
        Tail::Periodic(w) => w.len(),
        _ => 1,
    };
    code.prefix().len() + 2 * period
}

fn verdict(direction: Direction, verdict: Verdict, note: impl Into<String>) -> CondensationVerdict {
    CondensationVerdict { direction, verdict, note: note.into() }
}

fn cond_on_tree_code(code: &Code, direction: Direction) -> CondensationVerdict {
    // plus needs infinitely many 0s, minus infinitely many 1s
    let bit = direction == Direction::Minus;
    match code.infinitely_many(bit) {
        None => verdict(direction, Verdict::Unknown, "code tail is unspecified"),
        Some(many) => match ordered_along(code, tail_span(code)) {
            Ok(true) if many => verdict(
                direction,
                Verdict::Yes,
                format!("tail has infinitely many {}s; the sibling subtrees accumulate from that side", u8::from(bit)),
            ),
            Ok(true) => verdict(
                direction,
                Verdict::No,
                format!("tail is eventually all {}s; a neighbouring gap isolates that side", u8::from(!bit)),
            ),
            Ok(false) => verdict(direction, Verdict::Unknown, "siblings are not ordered left to right"),
            Err(e) => verdict(direction, Verdict::Unknown, e.to_string()),
        },
    }
}

fn cond_in_interval(i: &Interval, x: &Rat, direction: Direction) -> bool {
    i.lo < i.hi
        && match direction {
            Direction::Plus => &i.lo <= x && x < &i.hi,
            Direction::Minus => &i.lo < x && x <= &i.hi,
        }
}

fn cond_atom(atom: &SetExpr, x: &Point, direction: Direction, depth: usize) -> CondensationVerdict {
    let rat = match x {
        Point::Rat(r) => Some(r.clone()),
        Point::Code(c) => anchored_value(c).ok(),
    };
    match atom {
        SetExpr::Countable(_) => verdict(direction, Verdict::No, "countable sets have no condensation points"),
        SetExpr::Interval(i) => match rat {
            Some(r) if cond_in_interval(i, &r, direction) => verdict(direction, Verdict::Yes, format!("{r} has interval {i} on that side")),
            Some(r) => verdict(direction, Verdict::No, format!("{r} has no part of {i} on that side")),
            None => verdict(direction, Verdict::Unknown, "point has no exact value"),
        },
        SetExpr::CoverComplement { host, cover } => match rat {
            Some(r) => {
                let yes = complement_components(host, cover).iter().any(|c| cond_in_interval(c, &r, direction));
                verdict(direction, if yes { Verdict::Yes } else { Verdict::No }, "decided on the complement's components")
            }
            None => verdict(direction, Verdict::Unknown, "point has no exact value"),
        },
        SetExpr::Tree { tree, .. } => match x {
            Point::Code(c) if Arc::ptr_eq(c.tree(), tree) => cond_on_tree_code(c, direction),
            _ => match rat {
                None => verdict(direction, Verdict::Unknown, "point has no exact value"),
                Some(r) => match membership_probe(tree, &r, depth) {
                    Ok(Probe::In { prefix }) => cond_on_tree_code(&Code::zeros(Arc::clone(tree), prefix), direction),
                    Ok(Probe::Out { level }) => verdict(
                        direction,
                        Verdict::No,
                        format!("{r} lies in no interval of depth {level}, so a neighbourhood misses the set"),
                    ),
                    Ok(Probe::Undetermined { prefix }) => {
                        verdict(direction, Verdict::Unknown, format!("{r} still inside node {prefix}"))
                    }
                    Err(e) => verdict(direction, Verdict::Unknown, e.to_string()),
                },
            },
        },
        SetExpr::Opaque { label } => verdict(direction, Verdict::Unknown, format!("{label} is opaque")),
        SetExpr::Union(_) => unreachable!("atoms are flattened"),
    }
}

/// Right (`Plus`) or left (`Minus`) condensation point test: is every one-sided
/// neighbourhood of `x` met by uncountably many points of the set?
pub fn cond_point(s: &SetExpr, x: &Point, direction: Direction, depth: usize) -> CondensationVerdict {
    let mut unknown = Vec::new();
    for atom in s.atoms() {
        let v = cond_atom(atom, x, direction, depth);
        match v.verdict {
            Verdict::Yes => return v,
            Verdict::Unknown => unknown.push(v.note),
            Verdict::No => {}
        }
    }
    if unknown.is_empty() {
        verdict(direction, Verdict::No, "no atom has uncountably many points on that side")
    } else {
        verdict(direction, Verdict::Unknown, unknown.join("; "))
    }
}

/// A countable set containing every point of an atom that is not a right
/// condensation point.
#[derive(Debug, Clone)]
pub enum PartitionWitness {
    Points(Vec<Rat>),
    /// Codes `q 1 1 1 ...` of a tree where `q` is empty or ends in 0, listed
    /// shortlex by `q`. Each eventually-all-1 code has exactly one such form.
    TreeOnes { tree: Arc<CantorTree> },
}

impl PartitionWitness {
    /// The `k`-th code of a `TreeOnes` witness.
    pub fn code_at(&self, k: u64) -> Option<Code> {
        match self {
            PartitionWitness::Points(_) => None,
            PartitionWitness::TreeOnes { tree } => {
                if k == 0 {
                    return Some(Code::ones(Arc::clone(tree), Path::root()));
                }
                // for length n >= 1 there are 2^(n-1) strings ending in 0
                let (mut n, mut start) = (1u32, 1u64);
                while k >= start + (1u64 << (n - 1)) {
                    start += 1u64 << (n - 1);
                    n += 1;
                }
                let j = k - start;
                let bits = (0..n - 1).map(|i| (j >> (n - 2 - i)) & 1 == 1).chain([false]);
                Some(Code::ones(Arc::clone(tree), Path::from_bits(bits)))
            }
        }
    }
}

/// Countable witness for "the atom minus its right condensation points".
pub fn condensation_partition_probe(atom: &SetExpr) -> Result<PartitionWitness, TargetError> {
    match atom {
        SetExpr::Interval(i) => Ok(PartitionWitness::Points(vec![i.hi.clone()])),
        SetExpr::Tree { tree, .. } => Ok(PartitionWitness::TreeOnes { tree: Arc::clone(tree) }),
        SetExpr::CoverComplement { host, cover } => {
            Ok(PartitionWitness::Points(complement_components(host, cover).into_iter().map(|c| c.hi).collect()))
        }
        SetExpr::Countable(c) => {
            Err(TargetError::UnsupportedAtom { atom: atom.to_string(), witness: c.to_string() })
        }
        other => Err(TargetError::UnsupportedAtom { atom: other.to_string(), witness: "none".into() }),
    }
}

/// A perfect subset of the set inside `(x, y)`, for a right condensation
/// point `x`. On a tree it descends the code of `x`: at every 0-bit, the
/// sibling 1-subtree lies right of `x` and within the parent interval, and
/// the first one that fits below `y` is returned. `max_depth` bounds the search.
pub fn t15_probe(s: &SetExpr, x: &Point, y: &Rat, max_depth: usize) -> Result<PerfectWitness, TargetError> {
    let xr = match x {
        Point::Rat(r) => Some(r.clone()),
        Point::Code(c) => anchored_value(c).ok(),
    };
    if let Some(r) = &xr {
        if y <= r {
            return Err(TargetError::PreconditionFailed(format!("need y > x, got x = {r}, y = {y}")));
        }
    }
    let pre = cond_point(s, x, Direction::Plus, max_depth);
    if pre.verdict != Verdict::Yes {
        return Err(TargetError::PreconditionFailed(format!("x is not a right condensation point: {}", pre.note)));
    }
    for atom in s.atoms() {
        if cond_atom(atom, x, Direction::Plus, max_depth).verdict != Verdict::Yes {
            continue;
        }
        match atom {
            SetExpr::Interval(i) => {
                let r = xr.clone().expect("decided on an exact value");
                return Ok(PerfectWitness::Interval(inner_quarter(&r, y, i)));
            }
            SetExpr::CoverComplement { host, cover } => {
                let r = xr.clone().expect("decided on an exact value");
                let comp = complement_components(host, cover);
                let c = comp.iter().find(|c| cond_in_interval(c, &r, Direction::Plus)).expect("a component");
                return Ok(PerfectWitness::Interval(inner_quarter(&r, y, c)));
            }
            SetExpr::Tree { tree, .. } => {
                let code = match x {
                    Point::Code(c) if Arc::ptr_eq(c.tree(), tree) => c.clone(),
                    _ => match membership_probe(tree, xr.as_ref().expect("exact"), max_depth)? {
                        Probe::In { prefix } => Code::zeros(Arc::clone(tree), prefix),
                        _ => continue,
                    },
                };
                if let Some(w) = descend_for_subtree(tree, &code, xr.as_ref(), y, max_depth)? {
                    return Ok(w);
                }
            }
            _ => {}
        }
    }
    Err(TargetError::ProbeFailed { depth: max_depth })
}

fn inner_quarter(x: &Rat, y: &Rat, within: &Interval) -> Interval {
    let top = if y < &within.hi { y.clone() } else { within.hi.clone() };
    let w = &top - x;
    Interval::new(x + &w / Rat::from_int(4), x + &w * Rat::new(3, 4))
}

fn descend_for_subtree(
    tree: &Arc<CantorTree>,
    code: &Code,
    x: Option<&Rat>,
    y: &Rat,
    max_depth: usize,
) -> Result<Option<PerfectWitness>, TargetError> {
    for n in 1..=max_depth {
        if code.bit(n - 1) != Some(false) {
            continue;
        }
        let here = code.path(n)?;
        let sib = here.sibling().expect("nonempty");
        let cell = tree.node(&here)?;
        let s = tree.node(&sib)?;
        // strictly right of the cell holding x, hence of x itself
        let right_of_x = cell.hi < s.lo && x.is_none_or(|r| r < &s.lo);
        if right_of_x && &s.hi < y {
            let sub = tree.subtree(&sib)?;
            let depth = DEFAULT_TREE_DEPTH;
            let report = sub.validate(depth);
            return Ok(Some(PerfectWitness::Tree { tree: Arc::new(sub), report }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum CellResult {
    /// A certified point of the complement.
    Hit { x: Rat },
    /// Not found in any enumeration to the probe depth; absence from an
    /// infinite enumeration cannot be decided, so this is presumed, not proven.
    PresumedOut { x: Rat },
    Miss,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityReport {
    pub cells: Vec<(Interval, CellResult)>,
    pub hits: usize,
    pub presumed_out: usize,
    pub misses: usize,
}

/// Splits `sub` into `k` equal cells and looks in each for a point outside
/// the set, trying dyadic points of the cell level by level.
pub fn density_probe(s: &SetExpr, sub: &Interval, k: usize, depth: usize) -> Result<DensityReport, TargetError> {
    const LEVELS: u32 = 8;
    let step = sub.width() / Rat::from_int(k as i64);
    let mut cells = Vec::with_capacity(k);
    for i in 0..k {
        let lo = &sub.lo + &step * Rat::from_int(i as i64);
        let cell = Interval::new(lo.clone(), &lo + &step);
        let mut result = CellResult::Miss;
        'search: for level in 1..=LEVELS {
            for j in 0..1i64 << (level - 1) {
                let x = &cell.lo + &step * Rat::new(2 * j + 1, 1i64 << level);
                match s.member(&x, depth)? {
                    Membership::Out => {
                        result = CellResult::Hit { x };
                        break 'search;
                    }
                    Membership::Undetermined if result == CellResult::Miss && only_enumerations_undecided(s, &x, depth)? => {
                        result = CellResult::PresumedOut { x };
                    }
                    _ => {}
                }
            }
        }
        cells.push((cell, result));
    }
    let count = |f: fn(&CellResult) -> bool| cells.iter().filter(|(_, r)| f(r)).count();
    Ok(DensityReport {
        hits: count(|r| matches!(r, CellResult::Hit { .. })),
        presumed_out: count(|r| matches!(r, CellResult::PresumedOut { .. })),
        misses: count(|r| matches!(r, CellResult::Miss)),
        cells,
    })
}

fn only_enumerations_undecided(s: &SetExpr, x: &Rat, depth: usize) -> Result<bool, TargetError> {
    for atom in s.atoms() {
        if atom.member(x, depth)? == Membership::Undetermined && !matches!(atom, SetExpr::Countable(_)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// On-disk target:
/// `{"union": [{"interval": ["3/4","1/1"]}, {"tree": {...}}, {"enum": {"scheme": "stern-brocot", "lo": "0/1", "hi": "1/1"}}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetFile {
    Union(Vec<SetFile>),
    Interval(Interval),
    Tree(TreeFile),
    Enum { scheme: String, lo: Rat, hi: Rat },
    Finite(Vec<Rat>),
    CoverComplement { host: Interval, cover: Vec<Interval> },
    Opaque(String),
}

impl SetFile {
    pub fn to_expr(&self) -> Result<SetExpr, TargetError> {
        Ok(match self {
            SetFile::Union(parts) => SetExpr::Union(parts.iter().map(SetFile::to_expr).collect::<Result<_, _>>()?),
            SetFile::Interval(i) => SetExpr::interval(i.lo.clone(), i.hi.clone())?,
            SetFile::Tree(t) => {
                let (tree, depth) = CantorTree::from_file(t)?;
                SetExpr::Tree { tree: Arc::new(tree), depth }
            }
            SetFile::Enum { scheme, lo, hi } => {
                if scheme != RatEnumeration::SCHEME {
                    return Err(TargetError::UnknownScheme(scheme.clone()));
                }
                SetExpr::rationals(lo.clone(), hi.clone())?
            }
            SetFile::Finite(v) => SetExpr::Countable(Countable::finite(v.clone())?),
            SetFile::CoverComplement { host, cover } => {
                if host.lo >= host.hi {
                    return Err(TargetError::InvalidRange { lo: host.lo.clone(), hi: host.hi.clone() });
                }
                SetExpr::CoverComplement { host: host.clone(), cover: cover.clone() }
            }
            SetFile::Opaque(label) => SetExpr::Opaque { label: label.clone() },
        })
    }

    pub fn from_expr(s: &SetExpr) -> Result<SetFile, TargetError> {
        Ok(match s {
            SetExpr::Union(parts) => SetFile::Union(parts.iter().map(SetFile::from_expr).collect::<Result<_, _>>()?),
            SetExpr::Interval(i) => SetFile::Interval(i.clone()),
            SetExpr::Tree { tree, depth } => SetFile::Tree(tree.to_file(*depth, false)?),
            SetExpr::Countable(Countable::SternBrocot(e)) => {
                SetFile::Enum { scheme: RatEnumeration::SCHEME.into(), lo: e.lo().clone(), hi: e.hi().clone() }
            }
            SetExpr::Countable(Countable::Finite(v)) => SetFile::Finite(v.clone()),
            SetExpr::CoverComplement { host, cover } => SetFile::CoverComplement { host: host.clone(), cover: cover.clone() },
            SetExpr::Opaque { label } => SetFile::Opaque(label.clone()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use crate::tree::enumeration_cover;

    fn unit() -> Interval {
        Interval::new(rat(0, 1), rat(1, 1))
    }

    fn thirds() -> SetExpr {
        SetExpr::tree(CantorTree::middle_thirds(unit()).unwrap(), 6)
    }

    fn tree_of(s: &SetExpr) -> Arc<CantorTree> {
        match s {
            SetExpr::Tree { tree, .. } => Arc::clone(tree),
            _ => unreachable!(),
        }
    }

    fn q0() -> SetExpr {
        SetExpr::rationals(rat(0, 1), rat(1, 1)).unwrap()
    }

    #[test]
    fn member_examples() {
        let i = SetExpr::interval(rat(3, 4), rat(1, 1)).unwrap();
        assert_eq!(i.member(&rat(4, 5), 0).unwrap(), Membership::In);
        assert_eq!(q0().member(&rat(1, 2), 10).unwrap(), Membership::In);
        assert_eq!(q0().member(&rat(1, 1000), 10).unwrap(), Membership::Undetermined);
        assert_eq!(q0().member(&rat(2, 1), 10).unwrap(), Membership::Out);
        assert_eq!(thirds().member(&rat(1, 2), 8).unwrap(), Membership::Out);
        let u = SetExpr::Union(vec![thirds(), q0()]);
        assert_eq!(u.member(&rat(1, 2), 10).unwrap(), Membership::In);
        assert_eq!(u.member(&rat(1, 1000), 10).unwrap(), Membership::Undetermined);
    }

    #[test]
    fn classify_examples() {
        match thirds().classify() {
            Determinacy::AWins(w) => assert!(w.is_valid()),
            other => panic!("{other:?}"),
        }
        match q0().classify() {
            Determinacy::BWins(w) => assert!(w.lists(&rat(3, 7), 100)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(SetExpr::Union(vec![q0(), thirds()]).classify(), Determinacy::AWins(_)));
        assert!(matches!(SetExpr::Opaque { label: "bernstein".into() }.classify(), Determinacy::Unknown { .. }));
        let point = SetExpr::interval(rat(1, 3), rat(1, 3)).unwrap();
        assert!(matches!(SetExpr::Union(vec![point, q0()]).classify(), Determinacy::BWins(_)));
    }

    #[test]
    fn classify_cover_complement() {
        let cover = enumeration_cover(&RatEnumeration::unit(), 10);
        let s = SetExpr::CoverComplement { host: unit(), cover: cover.clone() };
        match s.classify() {
            Determinacy::AWins(PerfectWitness::Tree { tree, report }) => {
                assert!(report.is_clean());
                for (_, i) in tree.materialize(COVER_WITNESS_DEPTH).unwrap().iter().skip(1) {
                    assert!(cover.iter().all(|u| !i.meets_open(&u.lo, &u.hi)));
                }
            }
            other => panic!("{other:?}"),
        }
        let too_big = SetExpr::CoverComplement { host: unit(), cover: vec![unit()] };
        assert!(matches!(too_big.classify(), Determinacy::Unknown { .. }));
    }

    #[test]
    fn merged_witness_interleaves() {
        let w = CountableWitness {
            parts: vec![Countable::finite(vec![rat(5, 1), rat(6, 1)]).unwrap(), Countable::SternBrocot(RatEnumeration::unit())],
        };
        let first: Vec<Rat> = w.iter().take(6).collect();
        assert_eq!(first, vec![rat(5, 1), rat(0, 1), rat(6, 1), rat(1, 1), rat(1, 2), rat(1, 3)]);
    }

    #[test]
    fn cond_point_examples() {
        let i = SetExpr::interval(rat(3, 4), rat(1, 1)).unwrap();
        assert_eq!(cond_point(&i, &Point::Rat(rat(3, 4)), Direction::Plus, 8).verdict, Verdict::Yes);
        assert_eq!(cond_point(&i, &Point::Rat(rat(1, 1)), Direction::Plus, 8).verdict, Verdict::No);
        assert_eq!(cond_point(&i, &Point::Rat(rat(1, 1)), Direction::Minus, 8).verdict, Verdict::Yes);
        assert_eq!(cond_point(&q0(), &Point::Rat(rat(1, 2)), Direction::Plus, 8).verdict, Verdict::No);

        let t = thirds();
        let x = Point::Code(Code::zeros(tree_of(&t), "1".parse().unwrap()));
        assert_eq!(cond_point(&t, &x, Direction::Plus, 8).verdict, Verdict::Yes);
        assert_eq!(cond_point(&t, &x, Direction::Minus, 8).verdict, Verdict::No);
        assert_eq!(cond_point(&t, &Point::Rat(rat(2, 3)), Direction::Plus, 8).verdict, Verdict::Yes);
        assert_eq!(cond_point(&t, &Point::Rat(rat(1, 2)), Direction::Plus, 8).verdict, Verdict::No);
        assert_eq!(cond_point(&t, &Point::Rat(rat(1, 4)), Direction::Plus, 8).verdict, Verdict::Unknown);
        let right_end = Point::Code(Code::ones(tree_of(&t), "0".parse().unwrap()));
        assert_eq!(cond_point(&t, &right_end, Direction::Plus, 8).verdict, Verdict::No);
        assert_eq!(cond_point(&t, &right_end, Direction::Minus, 8).verdict, Verdict::Yes);
    }

    #[test]
    fn partition_examples() {
        match condensation_partition_probe(&SetExpr::Interval(unit())).unwrap() {
            PartitionWitness::Points(p) => assert_eq!(p, vec![rat(1, 1)]),
            other => panic!("{other:?}"),
        }
        let t = thirds();
        let w = condensation_partition_probe(&t).unwrap();
        let prefixes: Vec<String> = (0..8).map(|k| w.code_at(k).unwrap().prefix().to_string()).collect();
        assert_eq!(prefixes, vec!["", "0", "00", "10", "000", "010", "100", "110"]);
        for k in 0..50 {
            let c = w.code_at(k).unwrap();
            assert_eq!(cond_point(&t, &Point::Code(c), Direction::Plus, 8).verdict, Verdict::No);
        }
        assert!(matches!(condensation_partition_probe(&q0()), Err(TargetError::UnsupportedAtom { .. })));
    }

    #[test]
    fn t15_examples() {
        let i = SetExpr::interval(rat(3, 4), rat(1, 1)).unwrap();
        match t15_probe(&i, &Point::Rat(rat(3, 4)), &rat(7, 8), 32).unwrap() {
            PerfectWitness::Interval(w) => assert_eq!(w, Interval::new(rat(25, 32), rat(27, 32))),
            other => panic!("{other:?}"),
        }
        let t = thirds();
        let y = rat(2, 3) + rat(1, 100);
        let x = Point::Code(Code::zeros(tree_of(&t), "1".parse().unwrap()));
        match t15_probe(&t, &x, &y, 32).unwrap() {
            PerfectWitness::Tree { tree, report } => {
                assert!(report.is_clean());
                assert!(tree.root().lo > rat(2, 3) && tree.root().hi < y);
                // rooted at 1 0...0 1
                assert_eq!(tree.root(), &tree_of(&t).node(&"100001".parse().unwrap()).unwrap());
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(t15_probe(&q0(), &Point::Rat(rat(1, 2)), &rat(3, 4), 32), Err(TargetError::PreconditionFailed(_))));
    }

    #[test]
    fn density_examples() {
        let r = density_probe(&thirds(), &unit(), 10, 12).unwrap();
        assert_eq!(r.hits, 10, "{:?}", r.cells);
        let r = density_probe(&SetExpr::Interval(unit()), &unit(), 10, 12).unwrap();
        assert_eq!((r.hits, r.misses), (0, 10));
        let r = density_probe(&q0(), &Interval::new(rat(1, 4), rat(1, 2)), 10, 1000).unwrap();
        assert_eq!(r.hits, 0);
        assert_eq!(r.presumed_out, 10);
    }

    #[test]
    fn components() {
        let host = unit();
        let cover = vec![Interval::new(rat(1, 4), rat(1, 2)), Interval::new(rat(-1, 1), rat(0, 1)), Interval::new(rat(1, 3), rat(3, 4))];
        assert_eq!(
            complement_components(&host, &cover),
            vec![Interval::new(rat(0, 1), rat(1, 4)), Interval::new(rat(3, 4), rat(1, 1))]
        );
        let touching = vec![Interval::new(rat(0, 1), rat(1, 2)), Interval::new(rat(1, 2), rat(1, 1))];
        assert_eq!(
            complement_components(&host, &touching),
            vec![Interval::new(rat(0, 1), rat(0, 1)), Interval::new(rat(1, 2), rat(1, 2)), Interval::new(rat(1, 1), rat(1, 1))]
        );
        let s = SetExpr::CoverComplement { host, cover };
        assert_eq!(s.member(&rat(1, 4), 0).unwrap(), Membership::In);
        assert_eq!(s.member(&rat(1, 3), 0).unwrap(), Membership::Out);
        assert_eq!(cond_point(&s, &Point::Rat(rat(1, 4)), Direction::Plus, 4).verdict, Verdict::No);
    }

    #[test]
    fn file_round_trip() {
        let json = r#"{"union":[{"interval":["3/4","1/1"]},{"tree":{"generator":"middle_thirds","root":["0/1","1/1"],"e_rule":"halving","depth":6}},{"enum":{"scheme":"stern-brocot","lo":"0/1","hi":"1/1"}}]}"#;
        let f: SetFile = serde_json::from_str(json).unwrap();
        let s = f.to_expr().unwrap();
        assert_eq!(s.atoms().len(), 3);
        assert_eq!(serde_json::to_string(&SetFile::from_expr(&s).unwrap()).unwrap(), json);
        assert!(s.check_within(&GameConfig::unit()).is_ok());
        let outside = SetFile::Interval(Interval::new(rat(1, 2), rat(2, 1))).to_expr().unwrap();
        assert!(outside.check_within(&GameConfig::unit()).is_err());
        let bad: SetFile = serde_json::from_str(r#"{"enum":{"scheme":"cantor","lo":"0/1","hi":"1/1"}}"#).unwrap();
        assert!(matches!(bad.to_expr(), Err(TargetError::UnknownScheme(_))));
    }
}
