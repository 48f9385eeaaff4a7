//! Multi-depot routing approximation toolkit: metric CMP/k-TSP instances,
//! the three-phase centralized approximation, labeled-path shortcutting, and
//! exhaustive oracles for desk-scale ratio certification.

pub mod batch;
pub mod error;
pub mod graph;
pub mod instance;
pub mod io;
pub mod labeled;
pub mod oracle;
pub mod solver;

pub use error::{CoreError, Result};
pub use instance::{
    edge_id, generate_euclidean, solution_cost, validate_instance, verify_solution, CmpInstance,
    MetricGraph, RouteSet, Violation, REL_TOL,
};
pub use labeled::{path_cost, shortcut_path, LabeledPath, PathEntry};
