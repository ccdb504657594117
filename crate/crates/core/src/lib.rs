//! Resource-aware parity automata and games.
//!
//! Models carry semiring weights on transitions and offsets (resource gains)
//! on states. The crate computes extents (the least initial resources that
//! admit an accepting run, or a winning strategy in games), synthesizes
//! memory-full and two-move strategies that realize them, evaluates and
//! simulates runs, and cross-checks everything against brute-force oracles.

pub mod cli;
pub mod examples;
pub mod extent;
pub mod model;
pub mod oracle;
pub mod resource_game;
pub mod runs;
pub mod semiring;
pub mod strategy;

pub use extent::{extent_generic, extent_recursive, one_step_value, ExtentMap, UpdateTrace};
pub use model::{parse_model, Model, ModelError, StateId};
pub use semiring::{Cost, Extended, Rational, SemiringKind, Value};
