//! Preference-based link formation and dissolution prediction for temporal
//! social networks with node attributes.
//!
//! The pipeline runs raw communication logs, friendship nominations and
//! survey answers through [`ingest`] into per-semester [`graph::Snapshot`]s,
//! scores each node's preference for every attribute value ([`preference`]),
//! turns those into dyad features ([`features`]) and trains the classifiers
//! in [`ml`]. [`importance`] ranks attributes by regression weight and
//! [`survival`] tracks how long similar and dissimilar ties last.
//! [`synthgen`] produces synthetic inputs with planted structure.

pub mod cli;
pub mod error;
pub mod features;
pub mod graph;
pub mod importance;
pub mod ingest;
pub mod ml;
pub mod pipeline;
pub mod preference;
pub mod survival;
pub mod synthgen;

pub use error::{Error, Result};
