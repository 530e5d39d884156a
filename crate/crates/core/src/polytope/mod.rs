//! The noncontextual measurement-assignment polytope of a scenario: its
//! half-space description, exact vertex enumeration, and vertex
//! classification.

mod dd;
mod hrep;
mod vertex;

use thiserror::Error;

use crate::scenario::Violation;

pub use dd::{enumerate_points, solve_equalities, AffineSolution};
pub use hrep::{build_hrep, Constraint, HRep};
pub use vertex::{
    classify_vertex, enumerate_vertices, marginal_response, scenario_vertices, write_vertex_csv,
    Vertex, VertexKind,
};

#[derive(Debug, Error)]
pub enum PolytopeError {
    #[error("scenario is invalid: {0:?}")]
    InvalidScenario(Vec<Violation>),
    #[error("constraint system is infeasible")]
    Infeasible,
    #[error("constraint system is unbounded")]
    Unbounded,
    #[error("internal enumeration error: {0}")]
    Internal(String),
    #[error("unknown measurement `{0}`")]
    UnknownMeasurement(String),
    #[error("measurement `{measurement}` is not in context {context}")]
    NotInContext { measurement: String, context: usize },
    #[error("vertex does not match the scenario's table layout")]
    ShapeMismatch,
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
