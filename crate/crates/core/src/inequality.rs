//! Scores vertices by `Corr(λ)` and `R(λ)`, extracts the inequality
//! parameters `(R_det, R_ind, Corr_ind)`, and evaluates the noise-robust bound
//!
//! ```text
//! Corr ≤ 1 − p* (1 − Corr_ind) (R − R_det) / (R_ind − R_det)
//! ```
//!
//! Parameter extraction is exact; bound evaluation takes measured (float)
//! values.

use serde::Serialize;
use thiserror::Error;

use crate::polytope::{marginal_response, scenario_vertices, PolytopeError, Vertex, VertexKind};
use crate::scalar::{ExactField, Real};
use crate::scenario::Scenario;

/// Absolute tolerance for boundary comparisons in [`evaluate_bound`].
pub const BOUND_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum InequalityError {
    #[error("not a statistical proof: R_ind = {r_ind} does not exceed R_det = {r_det}")]
    NotAStatisticalProof { r_det: String, r_ind: String },
    #[error("no deterministic vertices: the scenario is a logical proof; use the logical bound")]
    LogicalProof,
    #[error("degenerate scenario: no indeterministic vertices")]
    Degenerate,
    #[error("Corr_ind = {0} is not below 1; the correlation bound is trivial")]
    TrivialCorrelation(String),
    #[error("slope {found} differs from n/6 = {expected}")]
    XuMismatch { found: String, expected: String },
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexScores<T> {
    pub vertex_index: usize,
    pub corr_lambda: T,
    pub r_lambda: T,
    pub kind: VertexKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityParameters<T> {
    pub r_det: T,
    pub r_ind: T,
    pub corr_ind: T,
    pub n_det_vertices: usize,
    pub n_ind_vertices: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundEvaluation<F> {
    pub corr: F,
    pub r: F,
    pub p_star: F,
    pub rhs: F,
    pub violated: bool,
    /// `corr − rhs`, snapped to zero within [`BOUND_TOLERANCE`].
    pub margin: F,
}

/// Maxima over each vertex class, before any statistical-proof checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassMaxima<T> {
    pub r_det: Option<T>,
    pub r_ind: Option<T>,
    pub corr_ind: Option<T>,
    pub n_det: usize,
    pub n_ind: usize,
}

/// Source-optimized correlation `(1/n) Σ_i max_m ξ(m | M_i, λ)` over the
/// scenario's correlation pairing.
pub fn corr_of_vertex<T: ExactField>(
    vertex: &Vertex<T>,
    scenario: &Scenario<T>,
) -> Result<T, InequalityError> {
    let n = scenario.corr_pairing.len();
    if n == 0 {
        return Err(InequalityError::Argument("corr_pairing is empty".into()));
    }
    let mut total = T::zero();
    for id in &scenario.corr_pairing {
        let context = *scenario.contexts_containing(id).first().ok_or_else(|| {
            InequalityError::Argument(format!("`{id}` belongs to no context"))
        })?;
        let marginal = marginal_response(vertex, scenario, id, context)?;
        let best = marginal.into_iter().max().unwrap_or_else(T::zero);
        total = total + best;
    }
    Ok(total / T::from_usize(n).expect("count fits"))
}

/// `F` evaluated on the vertex's context tables.
pub fn r_of_vertex<T: ExactField>(vertex: &Vertex<T>, scenario: &Scenario<T>) -> T {
    let outcome_index = |c: usize, outcome: &[usize]| {
        crate::scenario::joint_outcome_index(&scenario.context_shape(c), outcome)
    };
    scenario
        .functional
        .terms
        .iter()
        .fold(scenario.functional.offset.clone(), |acc, t| {
            acc + t.coeff.clone() * vertex.tables[t.context][outcome_index(t.context, &t.outcome)].clone()
        })
}

pub fn score_vertices<T: ExactField>(
    vertices: &[Vertex<T>],
    scenario: &Scenario<T>,
) -> Result<Vec<VertexScores<T>>, InequalityError> {
    vertices
        .iter()
        .enumerate()
        .map(|(vertex_index, v)| {
            Ok(VertexScores {
                vertex_index,
                corr_lambda: corr_of_vertex(v, scenario)?,
                r_lambda: r_of_vertex(v, scenario),
                kind: v.kind,
            })
        })
        .collect()
}

pub fn class_maxima<T: ExactField>(scores: &[VertexScores<T>]) -> ClassMaxima<T> {
    let of_kind = |k| scores.iter().filter(move |s| s.kind == k);
    ClassMaxima {
        r_det: of_kind(VertexKind::Deterministic).map(|s| s.r_lambda.clone()).max(),
        r_ind: of_kind(VertexKind::Indeterministic).map(|s| s.r_lambda.clone()).max(),
        corr_ind: of_kind(VertexKind::Indeterministic).map(|s| s.corr_lambda.clone()).max(),
        n_det: of_kind(VertexKind::Deterministic).count(),
        n_ind: of_kind(VertexKind::Indeterministic).count(),
    }
}

impl<T: ExactField> ClassMaxima<T> {
    /// Checks the statistical-proof preconditions.
    pub fn into_parameters(self) -> Result<InequalityParameters<T>, InequalityError> {
        let (Some(r_ind), Some(corr_ind)) = (self.r_ind, self.corr_ind) else {
            return Err(InequalityError::Degenerate);
        };
        let r_det = self.r_det.ok_or(InequalityError::LogicalProof)?;
        if r_ind <= r_det {
            return Err(InequalityError::NotAStatisticalProof {
                r_det: r_det.to_fraction_string(),
                r_ind: r_ind.to_fraction_string(),
            });
        }
        if corr_ind >= T::one() {
            return Err(InequalityError::TrivialCorrelation(corr_ind.to_fraction_string()));
        }
        Ok(InequalityParameters {
            r_det,
            r_ind,
            corr_ind,
            n_det_vertices: self.n_det,
            n_ind_vertices: self.n_ind,
        })
    }
}

pub fn compute_parameters<T: ExactField>(
    vertices: &[Vertex<T>],
    scenario: &Scenario<T>,
) -> Result<InequalityParameters<T>, InequalityError> {
    class_maxima(&score_vertices(vertices, scenario)?).into_parameters()
}

impl<T: ExactField> InequalityParameters<T> {
    fn check(&self) -> Result<(), InequalityError> {
        if self.r_ind <= self.r_det {
            return Err(InequalityError::NotAStatisticalProof {
                r_det: self.r_det.to_fraction_string(),
                r_ind: self.r_ind.to_fraction_string(),
            });
        }
        Ok(())
    }

    /// The inequality with the parameters substituted.
    pub fn inequality_text(&self) -> String {
        format!(
            "Corr <= 1 - p*·(1-{})·(R-{})/({}-{})",
            self.corr_ind, self.r_det, self.r_ind, self.r_det
        )
    }
}

fn check_probability<F: Real>(name: &str, p: F) -> Result<(), InequalityError> {
    if !(p >= F::zero() && p <= F::one()) {
        return Err(InequalityError::Argument(format!("{name} = {p} is outside [0, 1]")));
    }
    Ok(())
}

/// Right-hand side `1 − p* (1 − Corr_ind)(r − R_det)/(R_ind − R_det)`.
/// `r` is not clamped: `r < R_det` gives a vacuous bound above 1.
pub fn bound_rhs<T: ExactField, F: Real>(
    params: &InequalityParameters<T>,
    p_star: F,
    r: F,
) -> Result<F, InequalityError> {
    params.check()?;
    check_probability("p_star", p_star)?;
    let real = |x: &T| F::lit(x.to_f64_lossy());
    let (r_det, r_ind, corr_ind) = (real(&params.r_det), real(&params.r_ind), real(&params.corr_ind));
    Ok(F::one() - p_star * (F::one() - corr_ind) * (r - r_det) / (r_ind - r_det))
}

pub fn evaluate_bound<T: ExactField, F: Real>(
    params: &InequalityParameters<T>,
    corr: F,
    r: F,
    p_star: F,
) -> Result<BoundEvaluation<F>, InequalityError> {
    if !corr.is_finite() || !r.is_finite() {
        return Err(InequalityError::Argument("corr and r must be finite".into()));
    }
    let rhs = bound_rhs(params, p_star, r)?;
    let mut margin = corr - rhs;
    if margin.abs() <= F::lit(BOUND_TOLERANCE) {
        margin = F::zero();
    }
    Ok(BoundEvaluation {
        corr,
        r,
        p_star,
        rhs,
        violated: margin > F::zero(),
        margin,
    })
}

/// `max Corr(λ)` over indeterministic vertices: the bound `Corr ≤ Corr_ind`
/// for scenarios without deterministic assignments.
pub fn logical_bound<T: ExactField>(
    vertices: &[Vertex<T>],
    scenario: &Scenario<T>,
) -> Result<T, InequalityError> {
    class_maxima(&score_vertices(vertices, scenario)?)
        .corr_ind
        .ok_or(InequalityError::Degenerate)
}

/// `1 − p* (1 − Corr_ind)`: below this `Corr`, no value of `R` violates.
pub fn noise_threshold<T: ExactField>(
    params: &InequalityParameters<T>,
    p_star: &T,
) -> Result<T, InequalityError> {
    if !p_star.is_positive() || *p_star > T::one() {
        return Err(InequalityError::Argument(format!(
            "p_star = {p_star} must lie in (0, 1]"
        )));
    }
    Ok(T::one() - p_star.clone() * (T::one() - params.corr_ind.clone()))
}

pub fn noise_threshold_real<T: ExactField, F: Real>(
    params: &InequalityParameters<T>,
    p_star: F,
) -> Result<F, InequalityError> {
    if !(p_star > F::zero() && p_star <= F::one()) {
        return Err(InequalityError::Argument(format!(
            "p_star = {p_star} must lie in (0, 1]"
        )));
    }
    Ok(F::one() - p_star * (F::one() - F::lit(params.corr_ind.to_f64_lossy())))
}

/// True iff both maximizing vertex sets are non-empty:
/// deterministic with `R = R_det, Corr = 1`, and indeterministic with
/// `R = R_ind, Corr = Corr_ind`.
pub fn saturating_model_exists<T: ExactField>(
    scores: &[VertexScores<T>],
    params: &InequalityParameters<T>,
) -> bool {
    let det = scores.iter().any(|s| {
        s.kind == VertexKind::Deterministic && s.r_lambda == params.r_det && s.corr_lambda.is_one()
    });
    let ind = scores.iter().any(|s| {
        s.kind == VertexKind::Indeterministic
            && s.r_lambda == params.r_ind
            && s.corr_lambda == params.corr_ind
    });
    det && ind
}

/// Slope `p* (1 − Corr_ind)/(R_ind − R_det)` at `p* = 1/3`.
pub fn xu_slope<T: ExactField>(params: &InequalityParameters<T>) -> Result<T, InequalityError> {
    params.check()?;
    Ok(T::from_ratio(1, 3) * (T::one() - params.corr_ind.clone())
        / (params.r_ind.clone() - params.r_det.clone()))
}

/// [`xu_slope`] for n-cycle parameters, which must equal `n/6`.
pub fn specialize_xu<T: ExactField>(
    params: &InequalityParameters<T>,
    n: usize,
) -> Result<T, InequalityError> {
    let slope = xu_slope(params)?;
    let expected = T::from_ratio(n as i64, 6);
    if slope != expected {
        return Err(InequalityError::XuMismatch {
            found: slope.to_fraction_string(),
            expected: expected.to_fraction_string(),
        });
    }
    Ok(slope)
}

/// Everything the derivation pipeline produces for one scenario.
#[derive(Clone, Debug)]
pub struct Derivation<T> {
    pub vertices: Vec<Vertex<T>>,
    pub scores: Vec<VertexScores<T>>,
    pub maxima: ClassMaxima<T>,
}

impl<T: ExactField> Derivation<T> {
    pub fn run(scenario: &Scenario<T>) -> Result<Self, InequalityError> {
        let vertices = scenario_vertices(scenario)?;
        let scores = score_vertices(&vertices, scenario)?;
        let maxima = class_maxima(&scores);
        Ok(Self {
            vertices,
            scores,
            maxima,
        })
    }

    pub fn parameters(&self) -> Result<InequalityParameters<T>, InequalityError> {
        self.maxima.clone().into_parameters()
    }

    pub fn report(&self) -> DerivationReport {
        let frac = |x: &Option<T>| x.as_ref().map(ExactField::to_fraction_string);
        let mut report = DerivationReport {
            r_det: frac(&self.maxima.r_det),
            r_ind: frac(&self.maxima.r_ind),
            corr_ind: frac(&self.maxima.corr_ind),
            n_vertices: self.vertices.len(),
            n_det: self.maxima.n_det,
            n_ind: self.maxima.n_ind,
            saturable: false,
            inequality: None,
            diagnosis: None,
        };
        match self.parameters() {
            Ok(params) => {
                report.saturable = saturating_model_exists(&self.scores, &params);
                report.inequality = Some(params.inequality_text());
            }
            Err(e) => report.diagnosis = Some(e.to_string()),
        }
        report
    }
}

/// Serialized result of a derivation. `diagnosis` is present only when the
/// scenario fails the statistical-proof preconditions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivationReport {
    pub r_det: Option<String>,
    pub r_ind: Option<String>,
    pub corr_ind: Option<String>,
    pub n_vertices: usize,
    pub n_det: usize,
    pub n_ind: usize,
    pub saturable: bool,
    pub inequality: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnosis: Option<String>,
}
