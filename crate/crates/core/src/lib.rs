//! Prior-regularized label propagation on weighted graphs.
//!
//! The crate covers graph construction from features ([`graph`]), the
//! propagation solvers ([`solver`]), fusion of several weak labelers through
//! dongle nodes ([`multi_source`]), per-hop error bounds and spectral
//! diagnostics ([`bound`], [`spectral`]), and scoring plus synthetic data
//! ([`evaluation`]). Plain-text file formats live in [`io`].

pub mod bound;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod io;
mod linalg;
pub mod multi_source;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{
    build_threshold_graph, compute_neighborhoods, FeatureMatrix, Graph, Label, LabelSet, NeighborhoodPartition,
};
pub use multi_source::{AlphaAssignment, AlphaScheme, LabelerAccuracy, WeakVoteMatrix};
pub use solver::{NodeFlag, Prediction, PriorField, SolveMethod, SolverConfig};
