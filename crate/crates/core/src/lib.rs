//! Finite-scale workbench for degree-spectrum constructions.
//!
//! The crate implements, at "desk scale", the effective combinatorics behind
//! a family of degree-spectrum results: Cantor-normal-form ordinal notations,
//! a toy oracle-machine substrate with certified jump snapshots, the rank
//! calculus of fat trees, flower-graph codings of set families, the staged
//! enumeration operator for the relativised Wehner family, discerning pairs
//! of trees and their jump-guided classifier, graph jump inversion, linear
//! order omega-powers, and an exact-dyadic-measure construction on Cantor
//! space.
//!
//! Every infinitary object is replaced by a staged, certified approximation:
//! queries that a true jump oracle would answer are answered here only when a
//! bounded run of the machine substrate produces a certificate, and are
//! three-valued (`In`/`Out`/`Unknown`) otherwise. Brute-force oracles and
//! property tests pin each rank formula, coding equivalence, and measure
//! bound at the scales we can actually compute.

pub mod coding;
pub mod error;
pub mod inversion;
pub mod linorders;
pub mod machines;
pub mod measure;
pub mod ordinals;
pub mod pairs;
pub mod randomness;
pub mod trees;
pub mod wehner;

pub use error::Error;
pub use machines::Verdict;
pub use ordinals::OrdinalNotation;
// re-exports of tree types land once the module exists

/// Version tag stamped into every JSON report the crate emits.
pub const REPORT_SCHEMA_VERSION: u32 = 1;
