use crate::scalar::{ExactField, Real};
use crate::scenario::{joint_outcomes, Scenario};

use super::operator::Operator;
use super::{QuantumError, PROBABILITY_TOLERANCE, STRUCTURAL_TOLERANCE};

/// A POVM with one effect per outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumMeasurement<F> {
    pub measurement_id: String,
    pub effects: Vec<Operator<F>>,
}

/// A source: each branch is an outcome with its probability and the state it
/// prepares.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceEnsemble<F> {
    pub source_id: String,
    pub branches: Vec<(F, Operator<F>)>,
}

/// Joint POVM of a context, effects in lexicographic joint-outcome order.
#[derive(Clone, Debug, PartialEq)]
pub struct ContextPovm<F> {
    pub member_ids: Vec<String>,
    pub effects: Vec<Operator<F>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumRealization<F> {
    pub dim: usize,
    pub measurements: Vec<QuantumMeasurement<F>>,
    pub contexts: Vec<ContextPovm<F>>,
    /// Aligned with the scenario's correlation pairing.
    pub sources: Vec<SourceEnsemble<F>>,
    /// Branch 0 is the special preparation.
    pub special_source: SourceEnsemble<F>,
}

/// Measured `(Corr, R, p*)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealizationValues<F> {
    pub corr: F,
    pub r: F,
    pub p_star: F,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquivalenceReport<F> {
    pub tolerance: F,
    /// Largest max-norm distance between any two source averages.
    pub source_deviation: F,
    /// Largest max-norm distance between a context marginal and the
    /// standalone effect.
    pub measurement_deviation: F,
    pub sources_equivalent: bool,
    pub measurements_equivalent: bool,
}

impl<F> EquivalenceReport<F> {
    pub fn passed(&self) -> bool {
        self.sources_equivalent && self.measurements_equivalent
    }
}

/// `x`, floored at a few ulps so single precision stays usable.
fn tol<F: Real>(x: f64) -> F {
    F::lit(x).max(F::epsilon() * F::lit(64.0))
}

impl<F: Real> QuantumMeasurement<F> {
    pub fn new(measurement_id: impl Into<String>, effects: Vec<Operator<F>>) -> Result<Self, QuantumError> {
        let m = Self {
            measurement_id: measurement_id.into(),
            effects,
        };
        m.validate()?;
        Ok(m)
    }

    /// `{P, I − P}`.
    pub fn binary(measurement_id: impl Into<String>, projector: Operator<F>) -> Result<Self, QuantumError> {
        let complement = &Operator::identity(projector.dim()) - &projector;
        Self::new(measurement_id, vec![projector, complement])
    }

    pub fn dim(&self) -> usize {
        self.effects.first().map_or(0, Operator::dim)
    }

    pub fn validate(&self) -> Result<(), QuantumError> {
        validate_povm(&self.measurement_id, &self.effects)
    }
}

pub(crate) fn validate_povm<F: Real>(label: &str, effects: &[Operator<F>]) -> Result<(), QuantumError> {
    let Some(first) = effects.first() else {
        return Err(QuantumError::Invalid(format!("`{label}` has no effects")));
    };
    let dim = first.dim();
    let mut sum = Operator::zeros(dim);
    for (k, e) in effects.iter().enumerate() {
        if e.dim() != dim {
            return Err(QuantumError::Invalid(format!("`{label}` effect {k} has the wrong dimension")));
        }
        if e.hermitian_deviation() > tol(STRUCTURAL_TOLERANCE) {
            return Err(QuantumError::Invalid(format!("`{label}` effect {k} is not Hermitian")));
        }
        let low = e.min_eigenvalue();
        if low < -tol::<F>(STRUCTURAL_TOLERANCE) {
            return Err(QuantumError::Invalid(format!(
                "`{label}` effect {k} has eigenvalue {low}"
            )));
        }
        sum = &sum + e;
    }
    let dev = sum.max_diff(&Operator::identity(dim));
    if dev > tol(STRUCTURAL_TOLERANCE) {
        return Err(QuantumError::Invalid(format!(
            "`{label}` effects sum to identity only within {dev}"
        )));
    }
    Ok(())
}

impl<F: Real> SourceEnsemble<F> {
    pub fn new(source_id: impl Into<String>, branches: Vec<(F, Operator<F>)>) -> Result<Self, QuantumError> {
        let s = Self {
            source_id: source_id.into(),
            branches,
        };
        s.validate()?;
        Ok(s)
    }

    /// Prepares `ρ` with probability `p` and `(I − ρ)/(d − 1)` otherwise.
    pub fn with_complement(source_id: impl Into<String>, p: F, state: Operator<F>) -> Result<Self, QuantumError> {
        let d = state.dim();
        let rest = (&Operator::identity(d) - &state).scale(F::one() / F::lit((d - 1) as f64));
        Self::new(source_id, vec![(p, state), (F::one() - p, rest)])
    }

    /// `Σ p_s ρ_s`: the state prepared when the outcome is ignored.
    pub fn average(&self) -> Operator<F> {
        let dim = self.branches.first().map_or(0, |b| b.1.dim());
        self.branches
            .iter()
            .fold(Operator::zeros(dim), |acc, (p, rho)| &acc + &rho.scale(*p))
    }

    pub fn validate(&self) -> Result<(), QuantumError> {
        let label = &self.source_id;
        if self.branches.is_empty() {
            return Err(QuantumError::Invalid(format!("source `{label}` has no branches")));
        }
        let mut total = F::zero();
        for (k, (p, rho)) in self.branches.iter().enumerate() {
            if *p < F::zero() {
                return Err(QuantumError::Invalid(format!("source `{label}` branch {k} has negative probability")));
            }
            total = total + *p;
            if (rho.trace().re - F::one()).abs() > tol(STRUCTURAL_TOLERANCE) || rho.trace().im.abs() > tol(STRUCTURAL_TOLERANCE) {
                return Err(QuantumError::Invalid(format!("source `{label}` branch {k} state is not trace 1")));
            }
            if rho.hermitian_deviation() > tol(STRUCTURAL_TOLERANCE) || rho.min_eigenvalue() < -tol::<F>(STRUCTURAL_TOLERANCE) {
                return Err(QuantumError::Invalid(format!("source `{label}` branch {k} state is not PSD")));
            }
        }
        if (total - F::one()).abs() > tol(PROBABILITY_TOLERANCE) {
            return Err(QuantumError::Invalid(format!(
                "source `{label}` probabilities sum to {total}"
            )));
        }
        Ok(())
    }
}

/// Joint POVM of two measurements whose effects pairwise commute: effect
/// `(a, b)` is `E_a F_b`, ordered with `a` most significant.
pub fn joint_povm_from_commuting<F: Real>(
    first: &QuantumMeasurement<F>,
    second: &QuantumMeasurement<F>,
) -> Result<Vec<Operator<F>>, QuantumError> {
    joint_effects(&first.effects, &second.effects).map_err(|worst| QuantumError::Incompatible {
        first: first.measurement_id.clone(),
        second: second.measurement_id.clone(),
        commutator: worst.to_f64().unwrap_or(f64::NAN),
    })
}

fn joint_effects<F: Real>(a: &[Operator<F>], b: &[Operator<F>]) -> Result<Vec<Operator<F>>, F> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    let mut worst = F::zero();
    for e in a {
        for f in b {
            worst = worst.max(e.commutator_norm(f));
            // Symmetrized so the product is Hermitian to rounding.
            out.push((&(e * f) + &(f * e)).scale(F::lit(0.5)));
        }
    }
    if worst > tol(STRUCTURAL_TOLERANCE) {
        return Err(worst);
    }
    Ok(out)
}

impl<F: Real> QuantumRealization<F> {
    /// Builds the context POVMs as products of the members' commuting
    /// effects, then validates the whole realization.
    pub fn from_commuting(
        measurements: Vec<QuantumMeasurement<F>>,
        context_members: Vec<Vec<String>>,
        sources: Vec<SourceEnsemble<F>>,
        special_source: SourceEnsemble<F>,
    ) -> Result<Self, QuantumError> {
        let dim = measurements.first().map_or(0, QuantumMeasurement::dim);
        let find = |id: &str| {
            measurements
                .iter()
                .find(|m| m.measurement_id == id)
                .ok_or_else(|| QuantumError::Misaligned(format!("unknown measurement `{id}`")))
        };
        let mut contexts = Vec::with_capacity(context_members.len());
        for members in context_members {
            let mut joint = vec![Operator::identity(dim)];
            let mut label = String::new();
            for id in &members {
                let m = find(id)?;
                joint = joint_effects(&joint, &m.effects).map_err(|worst| QuantumError::Incompatible {
                    first: label.clone(),
                    second: id.clone(),
                    commutator: worst.to_f64().unwrap_or(f64::NAN),
                })?;
                label = if label.is_empty() { id.clone() } else { format!("{label}+{id}") };
            }
            contexts.push(ContextPovm {
                member_ids: members,
                effects: joint,
            });
        }
        let q = Self {
            dim,
            measurements,
            contexts,
            sources,
            special_source,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn measurement(&self, id: &str) -> Option<&QuantumMeasurement<F>> {
        self.measurements.iter().find(|m| m.measurement_id == id)
    }

    fn context_shape(&self, context: &ContextPovm<F>) -> Result<Vec<usize>, QuantumError> {
        context
            .member_ids
            .iter()
            .map(|id| {
                self.measurement(id)
                    .map(|m| m.effects.len())
                    .ok_or_else(|| QuantumError::Misaligned(format!("context member `{id}` has no measurement")))
            })
            .collect()
    }

    /// Effect of `member`'s outcome `o` obtained by summing the context POVM
    /// over the other members.
    pub fn context_marginal(&self, context: usize, slot: usize, outcome: usize) -> Result<Operator<F>, QuantumError> {
        let ctx = &self.contexts[context];
        let shape = self.context_shape(ctx)?;
        let tuples = joint_outcomes(&shape);
        Ok(tuples
            .iter()
            .zip(&ctx.effects)
            .filter(|(t, _)| t[slot] == outcome)
            .fold(Operator::zeros(self.dim), |acc, (_, e)| &acc + e))
    }

    /// Structural invariants: valid POVMs and states, consistent
    /// dimensions, and context marginals matching the standalone effects.
    pub fn validate(&self) -> Result<(), QuantumError> {
        for m in &self.measurements {
            m.validate()?;
            if m.dim() != self.dim {
                return Err(QuantumError::Invalid(format!("`{}` has the wrong dimension", m.measurement_id)));
            }
        }
        for (c, ctx) in self.contexts.iter().enumerate() {
            let shape = self.context_shape(ctx)?;
            if ctx.effects.len() != shape.iter().product::<usize>() {
                return Err(QuantumError::Invalid(format!("context {c} has the wrong number of effects")));
            }
            validate_povm(&format!("context {c}"), &ctx.effects)?;
        }
        for s in self.sources.iter().chain(std::iter::once(&self.special_source)) {
            s.validate()?;
            if s.branches.iter().any(|(_, rho)| rho.dim() != self.dim) {
                return Err(QuantumError::Invalid(format!("source `{}` has the wrong dimension", s.source_id)));
            }
        }
        let report = self.check_operational_equivalences_at(tol(STRUCTURAL_TOLERANCE))?;
        if !report.measurements_equivalent {
            return Err(QuantumError::Invalid(format!(
                "context marginals deviate from the measurements by {}",
                report.measurement_deviation
            )));
        }
        Ok(())
    }

    fn check_operational_equivalences_at(&self, tolerance: F) -> Result<EquivalenceReport<F>, QuantumError> {
        let averages: Vec<Operator<F>> = self
            .sources
            .iter()
            .chain(std::iter::once(&self.special_source))
            .map(SourceEnsemble::average)
            .collect();
        let mut source_deviation = F::zero();
        for (i, a) in averages.iter().enumerate() {
            for b in &averages[i + 1..] {
                source_deviation = source_deviation.max(a.max_diff(b));
            }
        }

        let mut measurement_deviation = F::zero();
        for (c, ctx) in self.contexts.iter().enumerate() {
            for (slot, id) in ctx.member_ids.iter().enumerate() {
                let m = self
                    .measurement(id)
                    .ok_or_else(|| QuantumError::Misaligned(format!("unknown measurement `{id}`")))?;
                for (o, effect) in m.effects.iter().enumerate() {
                    let marginal = self.context_marginal(c, slot, o)?;
                    measurement_deviation = measurement_deviation.max(marginal.max_diff(effect));
                }
            }
        }
        Ok(EquivalenceReport {
            tolerance,
            source_deviation,
            measurement_deviation,
            sources_equivalent: source_deviation <= tolerance,
            measurements_equivalent: measurement_deviation <= tolerance,
        })
    }

    /// Checks that all source averages coincide and that every context POVM
    /// marginalizes to the standalone measurements.
    pub fn check_operational_equivalences(&self, tolerance: F) -> Result<EquivalenceReport<F>, QuantumError> {
        if tolerance.is_nan() || tolerance <= F::zero() {
            return Err(QuantumError::Argument(format!("tolerance must be positive, got {tolerance}")));
        }
        self.check_operational_equivalences_at(tolerance)
    }

    /// Depolarizes every effect, `E ↦ vE + (1 − v) Tr(E)/d · I`, on the
    /// measurements and context POVMs alike. Sources are untouched.
    pub fn depolarize(&self, visibility: F) -> Result<Self, QuantumError> {
        if !(visibility >= F::zero() && visibility <= F::one()) {
            return Err(QuantumError::Argument(format!("visibility {visibility} is outside [0, 1]")));
        }
        let id = Operator::identity(self.dim);
        let d = F::lit(self.dim as f64);
        let noisy = |e: &Operator<F>| {
            &e.scale(visibility) + &id.scale((F::one() - visibility) * e.trace().re / d)
        };
        let mut out = self.clone();
        for m in &mut out.measurements {
            m.effects = m.effects.iter().map(noisy).collect();
        }
        for c in &mut out.contexts {
            c.effects = c.effects.iter().map(noisy).collect();
        }
        Ok(out)
    }

    /// Checks that ids, outcome counts, context layouts, and source
    /// branches line up with `scenario`.
    pub fn check_alignment<T: ExactField>(&self, scenario: &Scenario<T>) -> Result<(), QuantumError> {
        let misaligned = |msg: String| Err(QuantumError::Misaligned(msg));
        for m in &scenario.measurements {
            match self.measurement(&m.id) {
                None => return misaligned(format!("no quantum measurement for `{}`", m.id)),
                Some(q) if q.effects.len() != m.outcome_count => {
                    return misaligned(format!(
                        "`{}` has {} effects, scenario expects {}",
                        m.id,
                        q.effects.len(),
                        m.outcome_count
                    ))
                }
                _ => {}
            }
        }
        if self.contexts.len() != scenario.contexts.len() {
            return misaligned(format!(
                "{} context POVMs for {} contexts",
                self.contexts.len(),
                scenario.contexts.len()
            ));
        }
        for (c, (q, s)) in self.contexts.iter().zip(&scenario.contexts).enumerate() {
            if q.member_ids != s.member_ids {
                return misaligned(format!("context {c} members differ"));
            }
        }
        if self.sources.len() != scenario.corr_pairing.len() {
            return misaligned(format!(
                "{} sources for {} paired measurements",
                self.sources.len(),
                scenario.corr_pairing.len()
            ));
        }
        for (source, id) in self.sources.iter().zip(&scenario.corr_pairing) {
            let outcomes = scenario.measurement(id).map_or(0, |m| m.outcome_count);
            if source.branches.len() != outcomes {
                return misaligned(format!(
                    "source `{}` has {} branches, `{id}` has {outcomes} outcomes",
                    source.source_id,
                    source.branches.len()
                ));
            }
        }
        Ok(())
    }

    /// Born-rule `(Corr, R, p*)`.
    ///
    /// `Corr = (1/n) Σ_i Σ_m p(s = m | S_i) Tr(E_m ρ_m)` pairs source outcome
    /// `m` with measurement outcome `m`; `R` is `F` on the context statistics
    /// of the special source's branch-0 state.
    pub fn evaluate<T: ExactField>(&self, scenario: &Scenario<T>) -> Result<RealizationValues<F>, QuantumError> {
        self.check_alignment(scenario)?;
        let n = scenario.corr_pairing.len();
        let mut corr = F::zero();
        for (source, id) in self.sources.iter().zip(&scenario.corr_pairing) {
            let m = self.measurement(id).expect("aligned");
            for ((p, rho), effect) in source.branches.iter().zip(&m.effects) {
                corr = corr + *p * effect.trace_product(rho);
            }
        }
        corr = corr / F::lit(n as f64);

        let (p_star, special) = self
            .special_source
            .branches
            .first()
            .ok_or_else(|| QuantumError::Invalid("special source has no branches".into()))?;
        let real = |x: &T| F::lit(x.to_f64_lossy());
        let mut r = real(&scenario.functional.offset);
        for term in &scenario.functional.terms {
            let shape = scenario.context_shape(term.context);
            let k = crate::scenario::joint_outcome_index(&shape, &term.outcome);
            r = r + real(&term.coeff) * self.contexts[term.context].effects[k].trace_product(special);
        }
        Ok(RealizationValues {
            corr,
            r,
            p_star: *p_star,
        })
    }
}

pub fn evaluate_realization<T: ExactField, F: Real>(
    realization: &QuantumRealization<F>,
    scenario: &Scenario<T>,
) -> Result<RealizationValues<F>, QuantumError> {
    realization.evaluate(scenario)
}

pub fn check_operational_equivalences<F: Real>(
    realization: &QuantumRealization<F>,
    tolerance: F,
) -> Result<EquivalenceReport<F>, QuantumError> {
    realization.check_operational_equivalences(tolerance)
}

pub fn depolarize<F: Real>(
    realization: &QuantumRealization<F>,
    visibility: F,
) -> Result<QuantumRealization<F>, QuantumError> {
    realization.depolarize(visibility)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex;

    use super::*;
    use crate::quantum::kcbs_realization;
    use crate::Rational;

    fn five() -> (QuantumRealization<f64>, Scenario<Rational>) {
        (kcbs_realization(5).unwrap(), Scenario::n_cycle(5).unwrap())
    }

    fn z_projector(k: usize) -> Operator<f64> {
        let mut v = vec![Complex::new(0.0, 0.0); 3];
        v[k] = Complex::new(1.0, 0.0);
        Operator::projector(&v)
    }

    #[test]
    fn ideal_five_cycle_values() {
        let (q, s) = five();
        let v = q.evaluate(&s).unwrap();
        assert!((v.corr - 1.0).abs() < 1e-10);
        assert!((v.r - 2.0 / 5f64.sqrt()).abs() < 1e-10);
        assert!((v.p_star - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn seven_cycle_r() {
        let q = kcbs_realization::<f64>(7).unwrap();
        let v = q.evaluate(&Scenario::<Rational>::n_cycle(7).unwrap()).unwrap();
        let c = (std::f64::consts::PI / 7.0).cos();
        assert!((v.r - 2.0 * c / (1.0 + c)).abs() < 1e-10);
        assert!((v.r - 0.947904).abs() < 1e-5);
    }

    #[test]
    fn joint_povm_special_cases() {
        let p = z_projector(0);
        let m = QuantumMeasurement::binary("A", p.clone()).unwrap();
        let trivial = QuantumMeasurement::new("T", vec![Operator::identity(3)]).unwrap();
        let padded = joint_povm_from_commuting(&m, &trivial).unwrap();
        assert_eq!(padded.len(), 2);
        assert!(padded[0].max_diff(&m.effects[0]) < 1e-15);

        let same = joint_povm_from_commuting(&m, &m).unwrap();
        assert!(same[0].max_diff(&p) < 1e-15);
        assert!(same[1].max_norm() < 1e-15 && same[2].max_norm() < 1e-15);
        assert!(same[3].max_diff(&m.effects[1]) < 1e-15);
    }

    #[test]
    fn kcbs_pair_joint_povm() {
        let (q, _) = five();
        let joint = joint_povm_from_commuting(&q.measurements[0], &q.measurements[1]).unwrap();
        assert!(joint[0].max_norm() <= 1e-10);
        assert!(joint[1].max_diff(&q.measurements[0].effects[0]) < 1e-12);
        assert!(joint[2].max_diff(&q.measurements[1].effects[0]) < 1e-12);
    }

    #[test]
    fn non_commuting_pair_is_rejected() {
        let s = 0.5f64.sqrt();
        let diag = QuantumMeasurement::binary("Z", z_projector(0)).unwrap();
        let plus = Operator::projector(&[Complex::new(s, 0.0), Complex::new(s, 0.0), Complex::new(0.0, 0.0)]);
        let x = QuantumMeasurement::binary("X", plus).unwrap();
        assert!(matches!(
            joint_povm_from_commuting(&diag, &x),
            Err(QuantumError::Incompatible { .. })
        ));
    }

    #[test]
    fn equivalence_checks() {
        let (q, _) = five();
        let report = q.check_operational_equivalences(1e-9).unwrap();
        assert!(report.passed());
        assert!(report.source_deviation < 1e-12 && report.measurement_deviation < 1e-12);
        assert!(q.check_operational_equivalences(0.0).is_err());

        let mut skewed = q.clone();
        skewed.sources[0].branches[0].0 = 0.4;
        skewed.sources[0].branches[1].0 = 0.6;
        let report = skewed.check_operational_equivalences(1e-9).unwrap();
        assert!(!report.sources_equivalent);
        assert!(report.measurements_equivalent);
    }

    #[test]
    fn depolarizing_endpoints() {
        let (q, s) = five();
        assert_eq!(q.depolarize(1.0).unwrap(), q);
        let flat = q.depolarize(0.0).unwrap();
        let v = flat.evaluate(&s).unwrap();
        assert!((v.corr - 5.0 / 9.0).abs() < 1e-12);
        assert!((v.r - 2.0 / 3.0).abs() < 1e-12);
        assert!(flat.check_operational_equivalences(1e-9).unwrap().passed());
        assert!(q.depolarize(1.5).is_err());
        assert!(q.depolarize(-0.1).is_err());
    }

    #[test]
    fn misalignment_is_reported() {
        let q = kcbs_realization::<f64>(7).unwrap();
        let s = Scenario::<Rational>::n_cycle(5).unwrap();
        assert!(matches!(q.evaluate(&s), Err(QuantumError::Misaligned(_))));
        let (mut q, s) = five();
        q.sources.pop();
        assert!(matches!(q.evaluate(&s), Err(QuantumError::Misaligned(_))));
    }

    #[test]
    fn single_precision_realization() {
        let q = kcbs_realization::<f32>(5).unwrap();
        let v = q.evaluate(&Scenario::<Rational>::n_cycle(5).unwrap()).unwrap();
        assert!((v.r - 2.0 / 5f32.sqrt()).abs() < 1e-5);
    }
}
