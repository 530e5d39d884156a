//! JSON form of a realization. Matrices are row-major lists of `[re, im]`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::operator::Operator;
use super::realization::{ContextPovm, QuantumMeasurement, QuantumRealization, SourceEnsemble};
use super::QuantumError;
use crate::scalar::Real;

type Matrix = Vec<[f64; 2]>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RealizationFile {
    dim: usize,
    measurements: Vec<MeasurementEntry>,
    contexts: Vec<ContextEntry>,
    sources: Vec<SourceEntry>,
    special_source: SourceEntry,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurementEntry {
    id: String,
    effects: Vec<Matrix>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContextEntry {
    members: Vec<String>,
    effects: Vec<Matrix>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceEntry {
    id: String,
    branches: Vec<BranchEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchEntry {
    probability: f64,
    state: Matrix,
}

fn matrix<F: Real>(op: &Operator<F>) -> Matrix {
    op.entries()
        .iter()
        .map(|z| [z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN)])
        .collect()
}

fn operator<F: Real>(dim: usize, m: &Matrix) -> Result<Operator<F>, QuantumError> {
    if m.len() != dim * dim {
        return Err(QuantumError::Invalid(format!(
            "matrix has {} entries, expected {}",
            m.len(),
            dim * dim
        )));
    }
    Ok(Operator::from_entries(
        dim,
        m.iter().map(|[re, im]| Complex::new(F::lit(*re), F::lit(*im))).collect(),
    ))
}

fn source_entry<F: Real>(s: &SourceEnsemble<F>) -> SourceEntry {
    SourceEntry {
        id: s.source_id.clone(),
        branches: s
            .branches
            .iter()
            .map(|(p, rho)| BranchEntry {
                probability: p.to_f64().unwrap_or(f64::NAN),
                state: matrix(rho),
            })
            .collect(),
    }
}

fn source<F: Real>(dim: usize, s: &SourceEntry) -> Result<SourceEnsemble<F>, QuantumError> {
    let branches = s
        .branches
        .iter()
        .map(|b| Ok((F::lit(b.probability), operator(dim, &b.state)?)))
        .collect::<Result<_, QuantumError>>()?;
    Ok(SourceEnsemble {
        source_id: s.id.clone(),
        branches,
    })
}

impl<F: Real> QuantumRealization<F> {
    pub fn to_json(&self) -> String {
        let file = RealizationFile {
            dim: self.dim,
            measurements: self
                .measurements
                .iter()
                .map(|m| MeasurementEntry {
                    id: m.measurement_id.clone(),
                    effects: m.effects.iter().map(matrix).collect(),
                })
                .collect(),
            contexts: self
                .contexts
                .iter()
                .map(|c| ContextEntry {
                    members: c.member_ids.clone(),
                    effects: c.effects.iter().map(matrix).collect(),
                })
                .collect(),
            sources: self.sources.iter().map(source_entry).collect(),
            special_source: source_entry(&self.special_source),
        };
        serde_json::to_string_pretty(&file).expect("realization serializes")
    }

    /// Parses and validates a realization dump.
    pub fn from_json(text: &str) -> Result<Self, QuantumError> {
        let file: RealizationFile = serde_json::from_str(text).map_err(|e| QuantumError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let dim = file.dim;
        let ops = |ms: &[Matrix]| ms.iter().map(|m| operator::<F>(dim, m)).collect::<Result<Vec<_>, _>>();
        let measurements = file
            .measurements
            .iter()
            .map(|m| {
                Ok(QuantumMeasurement {
                    measurement_id: m.id.clone(),
                    effects: ops(&m.effects)?,
                })
            })
            .collect::<Result<_, QuantumError>>()?;
        let contexts = file
            .contexts
            .iter()
            .map(|c| {
                Ok(ContextPovm {
                    member_ids: c.members.clone(),
                    effects: ops(&c.effects)?,
                })
            })
            .collect::<Result<_, QuantumError>>()?;
        let q = Self {
            dim,
            measurements,
            contexts,
            sources: file.sources.iter().map(|s| source(dim, s)).collect::<Result<_, _>>()?,
            special_source: source(dim, &file.special_source)?,
        };
        q.validate()?;
        Ok(q)
    }
}
