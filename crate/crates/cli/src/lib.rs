//! Command-line front end and HTTP service for the Cantor game engine.

// Errors carry exact rational bounds; they are cold and not worth boxing.
#![allow(clippy::result_large_err)]

pub mod ops;
pub mod play;
pub mod service;
