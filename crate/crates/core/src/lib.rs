//! traceline: an inspectable transformer forward pass together with the
//! algebraic automata machinery that explains what such a pass can compute.
//!
//! The crate has two halves that meet in [`bridge`]:
//!
//! * the numeric half — [`linalg`], [`transformer`], [`invariance`] — runs a
//!   minimal encoder-only model, records every residual-stream snapshot, and
//!   verifies the architecture's structural invariants (permutation
//!   invariance of unmasked models, substring invariance of masked ones,
//!   positional-encoding properties);
//! * the symbolic half — [`automata`], [`cascade`] — provides finite state
//!   automata, state-sequence functions, transformation semigroups, parallel
//!   prefix-scan evaluation, and covering checks for hand-built cascade
//!   decompositions.
//!
//! [`bridge`] closes the loop by constructing explicit one-block transformer
//! weights that emulate a reset automaton exactly at the decoded-token level.

pub mod automata;
pub mod bridge;
pub mod cascade;
pub mod invariance;
pub mod linalg;
pub mod rng;
pub mod transformer;

pub use linalg::{Matrix, Permutation};
pub use transformer::{MaskMode, ModelConfig, ModelWeights, ResidualTrace};
