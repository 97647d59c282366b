//! Exact-arithmetic engine for the Cantor game.
//!
//! Two players shrink a rational interval: A raises the left end, B lowers
//! the right end, and A wins when the limit point lies in a target set. The
//! crate plays the game, turns any strategy into a Cantor set of points it
//! cannot avoid (or cannot reach), and certifies who wins on a target.
//!
//! Every number is a [`Rat`]. Irrational points only ever appear as nested
//! brackets of rationals.

// Errors carry exact rational bounds; they are cold and not worth boxing.
#![allow(clippy::result_large_err)]

pub mod arena;
pub mod code;
pub mod enumeration;
pub mod extraction;
pub mod game;
pub mod interval;
pub mod rat;
pub mod strategy;
pub mod target;
pub mod tree;

pub use code::{Code, Probe, Tail};
pub use enumeration::{RatEnumeration, DEFAULT_LEVEL_CAP};
pub use extraction::{extract, ExtractedTree, ExtractionFile};
pub use game::{check_consistency, Consistency, GameConfig, History, Oracle, Side, Strategy};
pub use interval::Interval;
pub use rat::{rat, Rat};
pub use strategy::{make_oracle, StrategyKind};
pub use target::{Determinacy, SetExpr, SetFile};
pub use tree::{CantorTree, Path, TreeFile, ValidationReport};
