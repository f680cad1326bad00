//! Canonical construction terms for graphs of bounded treewidth.
//!
//! Given a graph `G` and a parameter `k`, the pipeline either concludes that
//! `tw(G) >= k` or produces a construction term that depends only on the
//! isomorphism class of `G`. Two graphs are isomorphic exactly when their
//! terms serialize to the same bytes.
//!
//! The stages, in pipeline order:
//!
//! * [`graph`]: graphs, components, and Menger-style minimum separations.
//! * [`improved`]: the `k`-improved graph.
//! * [`atoms`]: clique minimal separator decomposition.
//! * [`bags`]: isomorphism-invariant candidate bags.
//! * [`canon`]: the dynamic program over `(bag, labelling, zone)` states.
//!
//! [`terms`] holds the term algebra, [`decomp`] tree decompositions and the
//! bridges between decompositions and terms, [`oracle`] brute-force ground
//! truth used by the test suites, and [`io`] the text graph format.

pub mod atoms;
pub mod bags;
mod bits;
pub mod canon;
pub mod decomp;
mod error;
pub mod exec;
mod flow;
pub mod graph;
pub mod improved;
pub mod io;
pub mod oracle;
pub mod terms;

pub use error::Error;
pub use graph::{Graph, GraphError, Separation, Vertex, VertexSet};
