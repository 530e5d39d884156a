use std::io::Write;

use crate::scalar::ExactField;
use crate::scenario::{joint_outcomes, Scenario};

use super::hrep::{build_hrep, slot_of, HRep};
use super::{enumerate_points, PolytopeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexKind {
    Deterministic,
    Indeterministic,
}

impl VertexKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Deterministic => "deterministic",
            Self::Indeterministic => "indeterministic",
        }
    }
}

/// One noncontextual assignment: a probability table per context, indexed
/// by joint outcome in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex<T> {
    pub tables: Vec<Vec<T>>,
    pub kind: VertexKind,
}

impl<T: ExactField> Vertex<T> {
    pub fn from_point(h: &HRep<T>, point: &[T]) -> Self {
        let tables: Vec<Vec<T>> = h
            .context_columns
            .iter()
            .map(|r| point[r.clone()].to_vec())
            .collect();
        let kind = kind_of(&tables);
        Self { tables, kind }
    }

    /// Flattened coordinates in H-representation column order.
    pub fn point(&self) -> Vec<T> {
        self.tables.iter().flatten().cloned().collect()
    }

    pub fn is_deterministic(&self) -> bool {
        self.kind == VertexKind::Deterministic
    }
}

fn kind_of<T: ExactField>(tables: &[Vec<T>]) -> VertexKind {
    if tables.iter().flatten().all(ExactField::is_zero_or_one) {
        VertexKind::Deterministic
    } else {
        VertexKind::Indeterministic
    }
}

/// Every vertex of the polytope, lexicographically ordered by coordinates.
pub fn enumerate_vertices<T: ExactField>(h: &HRep<T>) -> Result<Vec<Vertex<T>>, PolytopeError> {
    Ok(enumerate_points(h)?
        .iter()
        .map(|p| Vertex::from_point(h, p))
        .collect())
}

/// Builds the H-representation of `scenario` and enumerates its vertices.
pub fn scenario_vertices<T: ExactField>(
    scenario: &Scenario<T>,
) -> Result<Vec<Vertex<T>>, PolytopeError> {
    enumerate_vertices(&build_hrep(scenario)?)
}

/// Deterministic iff every table entry is 0 or 1.
pub fn classify_vertex<T: ExactField>(vertex: &Vertex<T>, _scenario: &Scenario<T>) -> VertexKind {
    kind_of(&vertex.tables)
}

/// Response function of one measurement, obtained by summing the context
/// table over the other members' outcomes.
pub fn marginal_response<T: ExactField>(
    vertex: &Vertex<T>,
    scenario: &Scenario<T>,
    measurement_id: &str,
    context: usize,
) -> Result<Vec<T>, PolytopeError> {
    let measurement = scenario
        .measurement(measurement_id)
        .ok_or_else(|| PolytopeError::UnknownMeasurement(measurement_id.to_string()))?;
    let in_context = scenario
        .contexts
        .get(context)
        .is_some_and(|c| c.member_ids.iter().any(|m| m == measurement_id));
    if !in_context {
        return Err(PolytopeError::NotInContext {
            measurement: measurement_id.to_string(),
            context,
        });
    }
    let table = vertex.tables.get(context).ok_or(PolytopeError::ShapeMismatch)?;
    let outcomes = scenario.joint_outcomes(context);
    if table.len() != outcomes.len() {
        return Err(PolytopeError::ShapeMismatch);
    }
    let slot = slot_of(scenario, context, measurement_id);
    let mut marginal = vec![T::zero(); measurement.outcome_count];
    for (p, tuple) in table.iter().zip(&outcomes) {
        marginal[tuple[slot]] = marginal[tuple[slot]].clone() + p.clone();
    }
    Ok(marginal)
}

/// Writes one CSV row per table entry. The leading `vertex` column is the
/// vertex's position in `vertices`; outcome tuples are space-separated.
pub fn write_vertex_csv<T: ExactField, W: Write>(
    vertices: &[Vertex<T>],
    scenario: &Scenario<T>,
    writer: W,
) -> Result<(), PolytopeError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "vertex",
        "context",
        "outcome_tuple",
        "value_num",
        "value_den",
        "kind",
    ])?;
    for (index, v) in vertices.iter().enumerate() {
        for (c, table) in v.tables.iter().enumerate() {
            let tuples = joint_outcomes(&scenario.context_shape(c));
            for (tuple, value) in tuples.iter().zip(table) {
                let fraction = value.to_fraction_string();
                let (num, den) = fraction.split_once('/').expect("fraction form");
                let tuple = tuple
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(" ");
                out.write_record([
                    index.to_string().as_str(),
                    c.to_string().as_str(),
                    tuple.as_str(),
                    num,
                    den,
                    v.kind.as_str(),
                ])?;
            }
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}
