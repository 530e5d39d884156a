//! Three-outcome cycles as four-outcome n-cycle contexts.
//!
//! Tri outcome 0 ↔ `(+, −)`, 1 ↔ `(−, −)`, 2 ↔ `(−, +)`; the `(+, +)` joint
//! outcome is assigned the zero effect. With `+` as label 0 the quad order is
//! `[(+,+), (+,−), (−,+), (−,−)] = [0, T0, T2, T1]`.

use super::operator::Operator;
use super::realization::{validate_povm, ContextPovm, QuantumMeasurement, QuantumRealization, SourceEnsemble};
use super::{QuantumError, STRUCTURAL_TOLERANCE};
use crate::scalar::Real;

/// Binary measurements and four-outcome context POVMs of an n-cycle, without
/// sources.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleFragment<F> {
    pub measurements: Vec<QuantumMeasurement<F>>,
    pub contexts: Vec<ContextPovm<F>>,
}

impl<F: Real> CycleFragment<F> {
    pub fn into_realization(
        self,
        sources: Vec<SourceEnsemble<F>>,
        special_source: SourceEnsemble<F>,
    ) -> Result<QuantumRealization<F>, QuantumError> {
        let q = QuantumRealization {
            dim: self.measurements.first().map_or(0, QuantumMeasurement::dim),
            measurements: self.measurements,
            contexts: self.contexts,
            sources,
            special_source,
        };
        q.validate()?;
        Ok(q)
    }
}

/// Translates a cycle of three-outcome measurements. Requires
/// `[2 | tri_i] ≃ [0 | tri_{i⊕1}]` (equal effects); binary measurement
/// `M_{i+1}` gets `E_+ = tri_i[0]`.
pub fn translate_tri_to_quad<F: Real>(tri: &[QuantumMeasurement<F>]) -> Result<CycleFragment<F>, QuantumError> {
    let n = tri.len();
    if n < 3 {
        return Err(QuantumError::Translation(format!("a cycle needs at least 3 measurements, got {n}")));
    }
    for (i, m) in tri.iter().enumerate() {
        if m.effects.len() != 3 {
            return Err(QuantumError::Translation(format!(
                "measurement {i} has {} outcomes, expected 3",
                m.effects.len()
            )));
        }
        validate_povm(&m.measurement_id, &m.effects)?;
    }
    let tolerance = F::lit(STRUCTURAL_TOLERANCE).max(F::epsilon() * F::lit(64.0));
    for i in 0..n {
        let next = (i + 1) % n;
        let dev = tri[i].effects[2].max_diff(&tri[next].effects[0]);
        if dev > tolerance {
            return Err(QuantumError::Translation(format!(
                "outcome 2 of measurement {i} and outcome 0 of measurement {next} differ by {dev}; \
                 the joint measurement is genuinely four-outcome"
            )));
        }
    }

    let dim = tri[0].dim();
    let id = |i: usize| format!("M{}", i + 1);
    let measurements = tri
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let plus = m.effects[0].clone();
            let minus = &Operator::identity(dim) - &plus;
            QuantumMeasurement::new(id(i), vec![plus, minus])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let contexts = tri
        .iter()
        .enumerate()
        .map(|(i, m)| ContextPovm {
            member_ids: vec![id(i), id((i + 1) % n)],
            effects: vec![
                Operator::zeros(dim),
                m.effects[0].clone(),
                m.effects[2].clone(),
                m.effects[1].clone(),
            ],
        })
        .collect();
    Ok(CycleFragment {
        measurements,
        contexts,
    })
}
