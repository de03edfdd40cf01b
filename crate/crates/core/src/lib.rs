//! Effective metrization of computable topological groups.
//!
//! The crate builds, over executable group instances, three metric
//! constructions driven entirely by enumeration: a left-invariant
//! compatible metric from a nested scale of identity neighbourhoods
//! ([`bk`]), a right-c.e. Polish presentation on dense points ([`dense`]),
//! and a proper left-invariant metric for locally compact groups
//! ([`proper`]). Every metric value is an exact rational upper bound; the
//! [`oracle`] module recomputes the limits by brute force on finite and
//! truncated instances.

pub mod bk;
pub mod cli;
pub mod dense;
pub mod error;
pub mod exec;
pub mod group;
pub mod instances;
pub mod kernel;
pub mod oracle;
pub mod proper;
pub mod topology;

pub use error::{Error, Result};
