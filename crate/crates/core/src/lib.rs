//! Littlestone-dimension driven learning with random counterexamples.
//!
//! The crate is organised bottom-up:
//!
//! - [`concept`]: finite weighted domains, concepts, classes and restrictions.
//! - [`format`]: the JSON class-file interchange format.
//! - [`littlestone`]: exact Littlestone dimension, drops, exceptional partial
//!   functions and the canonical partial function of a class.
//! - [`thicket`]: the thicket query graph, query ranks, max-min query selection
//!   and deficient-cycle search.
//! - [`learner`]: the max-min equivalence-query learner against a random
//!   counterexample teacher, Monte Carlo summaries and exact expectations.
//! - [`staged`]: learning countable classes with a random target by running the
//!   max-min learner on growing prefixes.
//! - [`compression`]: extended `d`-compression with `d + 1` reconstruction
//!   functions, plus an exhaustive certifier.
//! - [`verify`]: property checkers used by the CLI and the acceptance suite.

pub mod compression;
pub mod concept;
pub mod error;
pub mod format;
pub mod learner;
pub mod littlestone;
pub mod random;
pub mod rational;
pub mod staged;
pub mod thicket;
pub mod verify;

pub use concept::{Concept, ConceptClass, ConceptSet, Domain, PartialAssignment};
pub use error::{Error, Result};
pub use littlestone::LdimCache;
pub use rational::Rational;
pub use thicket::{QueryRank, ThicketGraph};

/// Crate version, embedded in every CLI report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
