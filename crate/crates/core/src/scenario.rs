//! Contextuality scenarios: measurements, compatibility contexts, and the
//! linear witness functional evaluated on the special preparation.
//!
//! Outcomes are integers `0..k`. For binary measurements the `+1` outcome is
//! label `0` and `-1` is label `1`. Joint outcomes of a context are tuples in
//! member order; they are enumerated lexicographically with the first member
//! most significant.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::ExactField;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measurement {
    pub id: String,
    pub outcome_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    pub member_ids: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalTerm<T> {
    pub context: usize,
    pub outcome: Vec<usize>,
    pub coeff: T,
}

/// `F(p) = offset + Σ coeff · p(outcome | context)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessFunctional<T> {
    pub terms: Vec<FunctionalTerm<T>>,
    pub offset: T,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario<T> {
    pub measurements: Vec<Measurement>,
    pub contexts: Vec<Context>,
    pub functional: WitnessFunctional<T>,
    /// Measurements paired with a correlated source, in pairing order.
    pub corr_pairing: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationCode {
    TooFewOutcomes,
    DuplicateMeasurementId,
    EmptyContext,
    DuplicateContextMember,
    UnknownContextMember,
    MeasurementInNoContext,
    TermContextOutOfRange,
    TermOutcomeArity,
    TermOutcomeOutOfRange,
    DuplicateTerm,
    EmptyCorrPairing,
    UnknownCorrMeasurement,
    DuplicateCorrMeasurement,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::TooFewOutcomes => "too_few_outcomes",
            Self::DuplicateMeasurementId => "duplicate_measurement_id",
            Self::EmptyContext => "empty_context",
            Self::DuplicateContextMember => "duplicate_context_member",
            Self::UnknownContextMember => "unknown_context_member",
            Self::MeasurementInNoContext => "measurement_in_no_context",
            Self::TermContextOutOfRange => "term_context_out_of_range",
            Self::TermOutcomeArity => "term_outcome_arity",
            Self::TermOutcomeOutOfRange => "term_outcome_out_of_range",
            Self::DuplicateTerm => "duplicate_term",
            Self::EmptyCorrPairing => "empty_corr_pairing",
            Self::UnknownCorrMeasurement => "unknown_corr_measurement",
            Self::DuplicateCorrMeasurement => "duplicate_corr_measurement",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code.as_str(), self.message)
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("invalid scenario: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("{0}")]
    Argument(String),
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl<T: ExactField> Scenario<T> {
    /// Builds a scenario and rejects it if any invariant is violated.
    pub fn new(
        measurements: Vec<Measurement>,
        contexts: Vec<Context>,
        functional: WitnessFunctional<T>,
        corr_pairing: Vec<String>,
    ) -> Result<Self, ScenarioError> {
        let scenario = Self {
            measurements,
            contexts,
            functional,
            corr_pairing,
        };
        let violations = scenario.validate();
        if violations.is_empty() {
            Ok(scenario)
        } else {
            Err(ScenarioError::Invalid(violations))
        }
    }

    /// The odd n-cycle: `M1..Mn` binary measurements, contexts `(Mi, Mi⊕1)`,
    /// and `F` the average probability of anticorrelated adjacent outcomes.
    pub fn n_cycle(n: usize) -> Result<Self, ScenarioError> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(ScenarioError::Argument(format!(
                "n-cycle requires odd n >= 3, got {n}"
            )));
        }
        let id = |i: usize| format!("M{}", i + 1);
        let measurements = (0..n)
            .map(|i| Measurement {
                id: id(i),
                outcome_count: 2,
            })
            .collect();
        let contexts = (0..n)
            .map(|i| Context {
                member_ids: vec![id(i), id((i + 1) % n)],
            })
            .collect();
        let weight = T::from_ratio(1, n as i64);
        let terms = (0..n)
            .flat_map(|c| {
                [vec![0, 1], vec![1, 0]].into_iter().map({
                    let weight = weight.clone();
                    move |outcome| FunctionalTerm {
                        context: c,
                        outcome,
                        coeff: weight.clone(),
                    }
                })
            })
            .collect();
        let functional = WitnessFunctional {
            terms,
            offset: T::zero(),
        };
        Self::new(measurements, contexts, functional, (0..n).map(id).collect())
    }

    /// Returns every invariant violation; empty when the scenario is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |code, message: String| out.push(Violation { code, message });

        let mut ids = HashMap::new();
        for (i, m) in self.measurements.iter().enumerate() {
            if m.outcome_count < 2 {
                push(
                    ViolationCode::TooFewOutcomes,
                    format!("measurement `{}` has {} outcomes", m.id, m.outcome_count),
                );
            }
            if ids.insert(m.id.as_str(), i).is_some() {
                push(
                    ViolationCode::DuplicateMeasurementId,
                    format!("measurement id `{}` is repeated", m.id),
                );
            }
        }

        let mut covered = BTreeSet::new();
        for (c, ctx) in self.contexts.iter().enumerate() {
            if ctx.member_ids.is_empty() {
                push(ViolationCode::EmptyContext, format!("context {c} is empty"));
            }
            let mut seen = BTreeSet::new();
            for id in &ctx.member_ids {
                if !seen.insert(id.as_str()) {
                    push(
                        ViolationCode::DuplicateContextMember,
                        format!("context {c} lists `{id}` twice"),
                    );
                }
                if ids.contains_key(id.as_str()) {
                    covered.insert(id.as_str());
                } else {
                    push(
                        ViolationCode::UnknownContextMember,
                        format!("context {c} references unknown measurement `{id}`"),
                    );
                }
            }
        }
        for m in &self.measurements {
            if !covered.contains(m.id.as_str()) {
                push(
                    ViolationCode::MeasurementInNoContext,
                    format!("measurement `{}` appears in no context", m.id),
                );
            }
        }

        let mut keys = BTreeSet::new();
        for (t, term) in self.functional.terms.iter().enumerate() {
            let Some(ctx) = self.contexts.get(term.context) else {
                push(
                    ViolationCode::TermContextOutOfRange,
                    format!("term {t} references context {}", term.context),
                );
                continue;
            };
            if term.outcome.len() != ctx.member_ids.len() {
                push(
                    ViolationCode::TermOutcomeArity,
                    format!(
                        "term {t} has a {}-tuple for a context of {} measurements",
                        term.outcome.len(),
                        ctx.member_ids.len()
                    ),
                );
            } else {
                for (slot, (&o, id)) in term.outcome.iter().zip(&ctx.member_ids).enumerate() {
                    let count = ids.get(id.as_str()).map(|&i| self.measurements[i].outcome_count);
                    if matches!(count, Some(k) if o >= k) {
                        push(
                            ViolationCode::TermOutcomeOutOfRange,
                            format!("term {t} slot {slot}: outcome {o} out of range for `{id}`"),
                        );
                    }
                }
            }
            if !keys.insert((term.context, term.outcome.clone())) {
                push(
                    ViolationCode::DuplicateTerm,
                    format!(
                        "term {t} repeats key (context {}, outcome {:?})",
                        term.context, term.outcome
                    ),
                );
            }
        }

        if self.corr_pairing.is_empty() {
            push(ViolationCode::EmptyCorrPairing, "corr_pairing is empty".into());
        }
        let mut paired = BTreeSet::new();
        for id in &self.corr_pairing {
            if !ids.contains_key(id.as_str()) {
                push(
                    ViolationCode::UnknownCorrMeasurement,
                    format!("corr_pairing references unknown measurement `{id}`"),
                );
            }
            if !paired.insert(id.as_str()) {
                push(
                    ViolationCode::DuplicateCorrMeasurement,
                    format!("corr_pairing lists `{id}` twice"),
                );
            }
        }
        out
    }

    pub fn measurement_index(&self, id: &str) -> Option<usize> {
        self.measurements.iter().position(|m| m.id == id)
    }

    pub fn measurement(&self, id: &str) -> Option<&Measurement> {
        self.measurements.iter().find(|m| m.id == id)
    }

    /// Outcome counts of the context members, in member order.
    pub fn context_shape(&self, context: usize) -> Vec<usize> {
        self.contexts[context]
            .member_ids
            .iter()
            .map(|id| self.measurement(id).map_or(0, |m| m.outcome_count))
            .collect()
    }

    pub fn joint_outcome_count(&self, context: usize) -> usize {
        self.context_shape(context).iter().product()
    }

    /// Joint outcome tuples of a context in lexicographic order.
    pub fn joint_outcomes(&self, context: usize) -> Vec<Vec<usize>> {
        joint_outcomes(&self.context_shape(context))
    }

    /// Indices of the contexts containing `id`, ascending.
    pub fn contexts_containing(&self, id: &str) -> Vec<usize> {
        self.contexts
            .iter()
            .enumerate()
            .filter(|(_, c)| c.member_ids.iter().any(|m| m == id))
            .map(|(i, _)| i)
            .collect()
    }

    /// Parses and validates a scenario file.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let parse = |field: String, text: &str| {
            T::parse_fraction(text).ok_or_else(|| ScenarioError::Field {
                field,
                message: format!("expected a \"p/q\" rational, got {text:?}"),
            })
        };
        let offset = parse("functional.offset".into(), &file.functional.offset)?;
        let terms = file
            .functional
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                Ok(FunctionalTerm {
                    context: t.context,
                    outcome: t.outcome.clone(),
                    coeff: parse(format!("functional.terms[{i}].coeff"), &t.coeff)?,
                })
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        Self::new(
            file.measurements
                .into_iter()
                .map(|m| Measurement {
                    id: m.id,
                    outcome_count: m.outcomes,
                })
                .collect(),
            file.contexts
                .into_iter()
                .map(|member_ids| Context { member_ids })
                .collect(),
            WitnessFunctional { terms, offset },
            file.corr_pairing,
        )
    }

    pub fn to_json(&self) -> String {
        let file = ScenarioFile {
            measurements: self
                .measurements
                .iter()
                .map(|m| MeasurementEntry {
                    id: m.id.clone(),
                    outcomes: m.outcome_count,
                })
                .collect(),
            contexts: self.contexts.iter().map(|c| c.member_ids.clone()).collect(),
            functional: FunctionalEntry {
                offset: self.functional.offset.to_fraction_string(),
                terms: self
                    .functional
                    .terms
                    .iter()
                    .map(|t| TermEntry {
                        context: t.context,
                        outcome: t.outcome.clone(),
                        coeff: t.coeff.to_fraction_string(),
                    })
                    .collect(),
            },
            corr_pairing: self.corr_pairing.clone(),
        };
        serde_json::to_string_pretty(&file).expect("scenario serializes")
    }

    /// Coefficients of `F` keyed by `(context, joint outcome)`.
    pub fn functional_map(&self) -> BTreeMap<(usize, Vec<usize>), T> {
        self.functional
            .terms
            .iter()
            .map(|t| ((t.context, t.outcome.clone()), t.coeff.clone()))
            .collect()
    }
}

/// All tuples in the Cartesian product of `0..shape[k]`, lexicographic.
pub fn joint_outcomes(shape: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = shape.iter().product();
    let mut out = Vec::with_capacity(total);
    if shape.contains(&0) {
        return out;
    }
    let mut tuple = vec![0; shape.len()];
    loop {
        out.push(tuple.clone());
        let mut slot = shape.len();
        loop {
            if slot == 0 {
                return out;
            }
            slot -= 1;
            tuple[slot] += 1;
            if tuple[slot] < shape[slot] {
                break;
            }
            tuple[slot] = 0;
        }
    }
}

/// Position of `tuple` in [`joint_outcomes`] order.
pub fn joint_outcome_index(shape: &[usize], tuple: &[usize]) -> usize {
    shape
        .iter()
        .zip(tuple)
        .fold(0, |acc, (&k, &o)| acc * k + o)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    measurements: Vec<MeasurementEntry>,
    contexts: Vec<Vec<String>>,
    functional: FunctionalEntry,
    corr_pairing: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurementEntry {
    id: String,
    outcomes: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionalEntry {
    offset: String,
    terms: Vec<TermEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermEntry {
    context: usize,
    outcome: Vec<usize>,
    coeff: String,
}
