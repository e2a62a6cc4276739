//! Exact k-center solvers for weighted uncertain points on undirected graphs.
//!
//! Each uncertain point has a weight and a discrete distribution over graph
//! locations. The solvers place `k` centers on the graph (vertices or points
//! inside edges) minimizing the largest weighted expected distance from an
//! uncertain point to its nearest center.

pub mod error;
pub mod feasibility;
pub mod generate;
pub mod graph;
pub mod one_center;
pub mod optimizer;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod pwl;
pub mod scalar;
pub mod uncertain;

pub use error::{Error, Result};
pub use feasibility::Engine;
pub use graph::{Edge, EdgeId, Graph, GraphPoint, VertexId};
pub use one_center::solve_one_center;
pub use optimizer::{solve_k_center, verify_solution, Diagnostics, Method, Solution};
pub use pwl::{Interval, Line, PwlFunction};
pub use scalar::{Scalar, Tolerance};
pub use uncertain::{Instance, Location, Settings, UncertainPoint};

/// Solves with the one-center sweep for `k = 1` and by candidate search
/// otherwise.
pub fn solve<T: Scalar>(instance: &Instance<T>, k: usize, engine: Option<Engine>) -> Result<Solution<T>> {
    match (k, engine) {
        (1, None) => solve_one_center(instance),
        (_, engine) => solve_k_center(instance, k, engine.unwrap_or(Engine::Candidates)),
    }
}
