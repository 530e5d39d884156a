use std::collections::BTreeMap;

use crate::scalar::ExactField;
use crate::scenario::Scenario;

use super::PolytopeError;

/// A linear constraint `coeffs · x (= or ≥) rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub rhs: T,
}

/// Half-space description of the noncontextual measurement-assignment
/// polytope. One column per `(context, joint outcome)`, context-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HRep<T> {
    pub variables: Vec<(usize, Vec<usize>)>,
    pub variable_index: BTreeMap<(usize, Vec<usize>), usize>,
    /// Half-open column range of each context.
    pub context_columns: Vec<std::ops::Range<usize>>,
    pub equalities: Vec<Constraint<T>>,
    /// Rows meaning `coeffs · x ≥ rhs`.
    pub inequalities: Vec<Constraint<T>>,
}

impl<T: ExactField> HRep<T> {
    pub fn dimension(&self) -> usize {
        self.variables.len()
    }

    /// Exact membership test.
    pub fn contains(&self, x: &[T]) -> bool {
        let dot = |c: &Constraint<T>| -> T {
            c.coeffs
                .iter()
                .zip(x)
                .fold(T::zero(), |acc, (a, v)| acc + a.clone() * v.clone())
        };
        x.len() == self.dimension()
            && self.equalities.iter().all(|c| dot(c) == c.rhs)
            && self.inequalities.iter().all(|c| dot(c) >= c.rhs)
    }
}

/// Transcribes the scenario's probability, normalization, and
/// marginal-consistency constraints.
///
/// A measurement shared by contexts `α1 < α2 < … < αk` gets, for every
/// outcome `m`, the equalities `ξ(m|α_j) − ξ(m|α_{j+1}) = 0`. Redundant rows
/// are kept.
pub fn build_hrep<T: ExactField>(scenario: &Scenario<T>) -> Result<HRep<T>, PolytopeError> {
    let violations = scenario.validate();
    if !violations.is_empty() {
        return Err(PolytopeError::InvalidScenario(violations));
    }

    let mut variables = Vec::new();
    let mut context_columns = Vec::new();
    for c in 0..scenario.contexts.len() {
        let start = variables.len();
        variables.extend(scenario.joint_outcomes(c).into_iter().map(|o| (c, o)));
        context_columns.push(start..variables.len());
    }
    let dim = variables.len();
    let variable_index: BTreeMap<_, _> = variables
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, k)| (k, i))
        .collect();

    let unit_row = |cols: &mut dyn Iterator<Item = (usize, T)>| {
        let mut row = vec![T::zero(); dim];
        for (col, value) in cols {
            row[col] = row[col].clone() + value;
        }
        row
    };

    let mut equalities = Vec::new();
    for range in &context_columns {
        equalities.push(Constraint {
            coeffs: unit_row(&mut range.clone().map(|col| (col, T::one()))),
            rhs: T::one(),
        });
    }

    for m in &scenario.measurements {
        let containing = scenario.contexts_containing(&m.id);
        for pair in containing.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let slot_a = slot_of(scenario, a, &m.id);
            let slot_b = slot_of(scenario, b, &m.id);
            for outcome in 0..m.outcome_count {
                let plus = context_columns[a]
                    .clone()
                    .filter(|&col| variables[col].1[slot_a] == outcome)
                    .map(|col| (col, T::one()));
                let minus = context_columns[b]
                    .clone()
                    .filter(|&col| variables[col].1[slot_b] == outcome)
                    .map(|col| (col, -T::one()));
                equalities.push(Constraint {
                    coeffs: unit_row(&mut plus.chain(minus)),
                    rhs: T::zero(),
                });
            }
        }
    }

    let inequalities = (0..dim)
        .map(|col| Constraint {
            coeffs: unit_row(&mut std::iter::once((col, T::one()))),
            rhs: T::zero(),
        })
        .collect();

    Ok(HRep {
        variables,
        variable_index,
        context_columns,
        equalities,
        inequalities,
    })
}

pub(crate) fn slot_of<T>(scenario: &Scenario<T>, context: usize, id: &str) -> usize {
    scenario.contexts[context]
        .member_ids
        .iter()
        .position(|m| m == id)
        .expect("measurement belongs to context")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Context, Measurement, WitnessFunctional};
    use crate::Rational;

    #[test]
    fn five_cycle_counts() {
        let h = build_hrep(&Scenario::<Rational>::n_cycle(5).unwrap()).unwrap();
        assert_eq!(h.dimension(), 20);
        assert_eq!(h.equalities.len(), 5 + 10);
        assert_eq!(h.inequalities.len(), 20);
    }

    #[test]
    fn three_cycle_counts() {
        let h = build_hrep(&Scenario::<Rational>::n_cycle(3).unwrap()).unwrap();
        assert_eq!(h.dimension(), 12);
        assert_eq!(h.equalities.len(), 3 + 6);
        assert_eq!(h.inequalities.len(), 12);
    }

    #[test]
    fn single_binary_measurement() {
        let s = Scenario::<Rational>::new(
            vec![Measurement {
                id: "A".into(),
                outcome_count: 2,
            }],
            vec![Context {
                member_ids: vec!["A".into()],
            }],
            WitnessFunctional {
                terms: vec![],
                offset: Rational::from_ratio(0, 1),
            },
            vec!["A".into()],
        )
        .unwrap();
        let h = build_hrep(&s).unwrap();
        assert_eq!(h.dimension(), 2);
        assert_eq!(h.equalities.len(), 1);
        assert_eq!(h.inequalities.len(), 2);
    }

    #[test]
    fn consistency_row_layout() {
        let h = build_hrep(&Scenario::<Rational>::n_cycle(3).unwrap()).unwrap();
        // Rows: 3 normalizations, M1 (contexts 0, 2) x 2 outcomes, then M2.
        // M2 outcome 0 is slot 1 of context 0 and slot 0 of context 1.
        let row = &h.equalities[5];
        let expected: Vec<Rational> = [1, 0, 1, 0, -1, -1, 0, 0, 0, 0, 0, 0]
            .iter()
            .map(|&v| Rational::from_ratio(v, 1))
            .collect();
        assert_eq!(row.coeffs, expected);
        assert_eq!(row.rhs, Rational::from_ratio(0, 1));
    }
}
