//! Partitioning compact metric graphs into connected pieces of controlled size.
//!
//! A [`MetricGraph`] is a finite multigraph whose edges are intervals. Given a
//! super-additive [`SetFunction`] `Φ` that vanishes on points, [`partition::partition`]
//! splits the graph into at most `n` connected parts whose punctured mass `Φ̃` stays
//! below `Φ(Γ)/(n+1)`. The [`approx`] module turns such partitions into step-function
//! approximations of Sobolev functions, and [`hardy`] checks singular-value estimates
//! for Hardy operators on rooted trees.
//!
//! The `examples/` directory has one runnable program per capability, and the
//! `metgraph` binary exposes the same operations on JSON input files.

pub mod approx;
pub mod cli;
pub mod embed;
pub mod error;
pub mod functional;
pub mod graph;
pub mod hardy;
pub mod io;
pub mod measure;
pub mod partition;
pub mod random;
pub mod subset;
pub mod svd;

pub use error::{Error, Result};
pub use functional::{Functional, FunctionalKind, SetFunction, TildePhi};
pub use graph::{EdgeId, GraphPoint, MetricGraph, VertexId};
pub use measure::{Measure, PiecewiseFunction};
pub use subset::{ConnectedSubset, Interval, Partition};
