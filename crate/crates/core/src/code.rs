//! Codes: infinite branch sequences through a [`CantorTree`], each naming one
//! point of the set.
//!
//! A code is a finite prefix followed by a tail. Constant and periodic tails are
//! definite, so every bit is known; an unspecified tail only pins down the
//! prefix.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::interval::Interval;
use crate::rat::Rat;
use crate::tree::{CantorTree, Path, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    AllZeros,
    AllOnes,
    /// The word repeated forever. Must be nonempty.
    Periodic(Path),
    Unspecified,
}

impl Tail {
    fn word(&self) -> Option<Vec<bool>> {
        match self {
            Tail::AllZeros => Some(vec![false]),
            Tail::AllOnes => Some(vec![true]),
            Tail::Periodic(w) if !w.is_empty() => Some(w.bits().to_vec()),
            _ => None,
        }
    }
}

#[derive(Clone)]
pub struct Code {
    tree: Arc<CantorTree>,
    prefix: Path,
    tail: Tail,
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Code({self})")
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.tail {
            Tail::AllZeros => write!(f, "{}(0)", self.prefix),
            Tail::AllOnes => write!(f, "{}(1)", self.prefix),
            Tail::Periodic(w) => write!(f, "{}({w})", self.prefix),
            Tail::Unspecified => write!(f, "{}...", self.prefix),
        }
    }
}

impl Code {
    pub fn new(tree: Arc<CantorTree>, prefix: Path, tail: Tail) -> Result<Code, TreeError> {
        if let Tail::Periodic(w) = &tail {
            if w.is_empty() {
                return Err(TreeError::InvalidPath("empty period".into()));
            }
        }
        Ok(Code { tree, prefix, tail })
    }

    pub fn zeros(tree: Arc<CantorTree>, prefix: Path) -> Code {
        Code { tree, prefix, tail: Tail::AllZeros }
    }

    pub fn ones(tree: Arc<CantorTree>, prefix: Path) -> Code {
        Code { tree, prefix, tail: Tail::AllOnes }
    }

    pub fn tree(&self) -> &Arc<CantorTree> {
        &self.tree
    }

    pub fn prefix(&self) -> &Path {
        &self.prefix
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn is_definite(&self) -> bool {
        self.tail != Tail::Unspecified
    }

    /// Bit `i` (0-based), if known.
    pub fn bit(&self, i: usize) -> Option<bool> {
        if let Some(&b) = self.prefix.bits().get(i) {
            return Some(b);
        }
        let w = self.tail.word()?;
        Some(w[(i - self.prefix.len()) % w.len()])
    }

    /// The first `k` bits.
    pub fn path(&self, k: usize) -> Result<Path, TreeError> {
        if k > self.prefix.len() && !self.is_definite() {
            return Err(TreeError::UnspecifiedTail { need: k, have: self.prefix.len() });
        }
        Ok(Path::from_bits((0..k).map(|i| self.bit(i).expect("definite"))))
    }

    /// Whether the bit occurs infinitely often; `None` for unspecified tails.
    pub fn infinitely_many(&self, bit: bool) -> Option<bool> {
        self.tail.word().map(|w| w.contains(&bit))
    }

    /// Same infinite bit sequence (and same tree). Two eventually periodic
    /// sequences agree iff they agree on the longer preperiod plus the lcm of
    /// the periods.
    pub fn same_sequence(&self, other: &Code) -> bool {
        if !Arc::ptr_eq(&self.tree, &other.tree) {
            return false;
        }
        match (self.tail.word(), other.tail.word()) {
            (Some(a), Some(b)) => {
                let n = self.prefix.len().max(other.prefix.len()) + lcm(a.len(), b.len());
                (0..n).all(|i| self.bit(i) == other.bit(i))
            }
            (None, None) => self.prefix == other.prefix,
            _ => false,
        }
    }

    /// Moves `n` tail bits into the prefix; the tail rotates accordingly.
    fn materialized(&self, n: usize) -> Result<Code, TreeError> {
        if self.prefix.len() >= n {
            return Ok(self.clone());
        }
        let prefix = self.path(n)?;
        let tail = match &self.tail {
            Tail::Periodic(w) => {
                let shift = (n - self.prefix.len()) % w.len();
                let bits = w.bits();
                Tail::Periodic(Path::from_bits(bits[shift..].iter().chain(&bits[..shift]).copied()))
            }
            t => t.clone(),
        };
        Ok(Code { tree: Arc::clone(&self.tree), prefix, tail })
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// The depth-`k` interval containing the coded point. Its width is below `e_k`.
pub fn point_bounds(code: &Code, k: usize) -> Result<Interval, TreeError> {
    code.tree.expand(&code.path(k)?)
}

/// Exact value of `prefix` followed by zeros on a left-anchored tree: every
/// node `prefix 0^k` starts at the same left endpoint, so their intersection
/// is that endpoint, and it is a point of the set.
pub fn anchored_value(code: &Code) -> Result<Rat, TreeError> {
    if code.tail != Tail::AllZeros {
        return Err(TreeError::NotAnchored(format!("code {code} does not end in zeros")));
    }
    if !code.tree.is_left_anchored() {
        return Err(TreeError::NotAnchored("tree is not left-anchored".into()));
    }
    Ok(code.tree.node(&code.prefix)?.lo)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Probe {
    /// `x` is the anchored point of this prefix.
    In { prefix: Path },
    /// `x` lies in no interval of this depth, hence not in the set.
    Out { level: usize },
    /// Deepest node containing `x`.
    Undetermined { prefix: Path },
}

/// Descends the unique chain of nodes containing `x` down to `depth`.
pub fn membership_probe(tree: &CantorTree, x: &Rat, depth: usize) -> Result<Probe, TreeError> {
    if !tree.root().contains(x) {
        return Ok(Probe::Out { level: 0 });
    }
    let anchored = tree.is_left_anchored();
    let mut path = Path::root();
    let mut node = tree.root().clone();
    for level in 1..=depth {
        if anchored && node.lo == *x {
            return Ok(Probe::In { prefix: path });
        }
        let (a, b) = tree.children(&path)?;
        if a.contains(x) {
            path = path.child(false);
            node = a;
        } else if b.contains(x) {
            path = path.child(true);
            node = b;
        } else {
            return Ok(Probe::Out { level });
        }
    }
    if anchored && node.lo == *x {
        return Ok(Probe::In { prefix: path });
    }
    Ok(Probe::Undetermined { prefix: path })
}

/// A second point `y` of the set close to `x`: the code with bit `n + 1`
/// flipped. Both share the depth-`n` interval (so `|x - y| < e_n`) and sit in
/// disjoint depth-`(n + 1)` intervals (so `y != x`).
#[derive(Debug, Clone)]
pub struct FlipWitness {
    pub code: Code,
    pub shared: Interval,
    pub x_cell: Interval,
    pub y_cell: Interval,
    pub e_n: Rat,
}

impl FlipWitness {
    /// Re-checks both guarantees exactly.
    pub fn verify(&self) -> bool {
        self.shared.includes(&self.x_cell)
            && self.shared.includes(&self.y_cell)
            && !self.x_cell.intersects(&self.y_cell)
            && self.shared.width() < self.e_n
    }
}

pub fn flip_witness(code: &Code, n: usize) -> Result<FlipWitness, TreeError> {
    if n == 0 {
        return Err(TreeError::InvalidDepth("flip depth must be at least 1".into()));
    }
    let m = code.materialized(n + 1)?;
    let mut bits = m.prefix.bits().to_vec();
    bits[n] = !bits[n];
    let flipped = Code { tree: Arc::clone(&code.tree), prefix: Path::from_bits(bits), tail: m.tail.clone() };
    let shared = code.tree.expand(&m.prefix.prefix(n))?;
    let x_cell = code.tree.expand(&m.prefix.prefix(n + 1))?;
    let y_cell = code.tree.expand(&flipped.prefix.prefix(n + 1))?;
    Ok(FlipWitness { code: flipped, shared, x_cell, y_cell, e_n: code.tree.e(n) })
}
