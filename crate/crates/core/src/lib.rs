//! Connectivity of wireless networks under the uniform-power SINR model.
//!
//! Nodes sit on a line or in the plane and every node transmits with unit
//! power. A coloring assigns each node a channel (frequency or time slot);
//! nodes sharing a channel transmit concurrently and interfere with each
//! other. Node `v` decodes node `u` when
//!
//! ```text
//!            1 / d(u,v)^α
//!   ───────────────────────────────  ≥ β
//!    Σ_{w ≠ u, c(w) = c(u)} 1 / d(w,v)^α
//! ```
//!
//! and the resulting directed graph is the SINR graph. This crate builds that
//! graph, tests strong connectivity, constructs the standard instance
//! families (grids, uniform random points) and colorings, and provides the
//! analysis tools used to probe how many colors connectivity requires:
//! minimum-color searches, closed-form sufficiency constants, interference
//! profiles and two detectors for structures that force disconnection.
//!
//! The [`experiment`] module drives all of this from the `sinr-conn` binary.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod model;
pub mod sinr;

pub use error::{Error, Result};
pub use model::{Coloring, ColoringKind, Dimension, Layout, NodeSet, SinrParams};
pub use sinr::{
    build_graph, interference_at, is_strongly_connected, sinr_edge, EdgeEvaluation, SinrGraph,
};
