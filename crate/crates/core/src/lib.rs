//! wbc-arena: an executable playground for keyed program families,
//! obfuscators with checkable correctness, and game-based security
//! experiments with black-box and white-box variants.
//!
//! The crate is organized around a few currencies:
//! - [`bits::Bits`]: canonical bitstrings (keys, inputs, outputs, tapes);
//! - [`family::Family`]: keyed deterministic programs with step accounting;
//! - [`program::ProgramValue`]: serializable, budget-evaluated programs;
//! - [`games::Specification`]: an experiment (oracles, key derivation, win
//!   predicate) whose advantages are estimated by Monte Carlo;
//! - [`obfuscation::Obfuscator`]: randomized program transforms with
//!   correctness and soundness estimators;
//! - [`zoo`]: the registered adversaries, learners, and simulators that
//!   stand in for "any efficient algorithm" at desk scale.

pub mod arena;
pub mod bits;
pub mod cli;
pub mod error;
pub mod family;
pub mod games;
pub mod learnability;
pub mod obfuscation;
pub mod poly;
pub mod program;
pub mod rng;
pub mod schemes;
pub mod specs;
pub mod stats;
pub mod zoo;

pub use arena::Arena;
pub use bits::Bits;
pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const ZOO_VERSION: &str = "zoo-v1";
