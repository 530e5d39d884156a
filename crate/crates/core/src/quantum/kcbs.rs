//! The qutrit realization of the odd n-cycle.
//!
//! Rays `|l_i⟩ = (sinθ cosφ_i, sinθ sinφ_i, cosθ)` with `φ_i = (n−1)π i/n`
//! and `cos²θ = cos(π/n)/(1 + cos(π/n))`; adjacent rays are orthogonal. The
//! special state is `|ψ⟩ = (0, 0, 1)`. Every source prepares its pure state
//! with probability 1/3 and the normalized complement with probability 2/3,
//! so all sources average to `I/3`.

use num_complex::Complex;

use super::operator::Operator;
use super::realization::{QuantumMeasurement, QuantumRealization, SourceEnsemble};
use super::QuantumError;
use crate::scalar::Real;

/// `|l_i⟩` for `i = 1..=n`.
pub fn kcbs_rays<F: Real>(n: usize) -> Vec<[F; 3]> {
    let c = (F::PI() / F::lit(n as f64)).cos();
    let cos_theta = (c / (F::one() + c)).sqrt();
    let sin_theta = (F::one() - cos_theta * cos_theta).sqrt();
    (1..=n)
        .map(|i| {
            let phi = F::lit(((n - 1) * i) as f64) * F::PI() / F::lit(n as f64);
            [sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta]
        })
        .collect()
}

fn ket<F: Real>(v: &[F; 3]) -> Vec<Complex<F>> {
    v.iter().map(|&x| Complex::new(x, F::zero())).collect()
}

/// The ideal realization for odd `n ≥ 5`, aligned with the n-cycle scenario
/// (`M1..Mn`, contexts `(Mi, Mi⊕1)`, sources `S1..Sn` paired in order).
pub fn kcbs_realization<F: Real>(n: usize) -> Result<QuantumRealization<F>, QuantumError> {
    if n < 5 || n.is_multiple_of(2) {
        return Err(QuantumError::Argument(format!(
            "KCBS realization requires odd n >= 5, got {n}"
        )));
    }
    let third = F::one() / F::lit(3.0);
    let id = |i: usize| format!("M{}", i + 1);
    let rays = kcbs_rays::<F>(n);

    let mut measurements = Vec::with_capacity(n);
    let mut sources = Vec::with_capacity(n);
    for (i, ray) in rays.iter().enumerate() {
        let p = Operator::projector(&ket(ray));
        measurements.push(QuantumMeasurement::binary(id(i), p.clone())?);
        sources.push(SourceEnsemble::with_complement(format!("S{}", i + 1), third, p)?);
    }
    let psi = [F::zero(), F::zero(), F::one()];
    let special = SourceEnsemble::with_complement("S*", third, Operator::projector(&ket(&psi)))?;
    let contexts = (0..n).map(|i| vec![id(i), id((i + 1) % n)]).collect();
    QuantumRealization::from_commuting(measurements, contexts, sources, special)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn adjacent_rays_are_orthogonal() {
        for n in [5, 7, 9, 11] {
            let rays = kcbs_rays::<f64>(n);
            for i in 0..n {
                let d = dot(&rays[i], &rays[(i + 1) % n]);
                assert!(d.abs() <= 1e-10, "n={n} i={i}: {d}");
                assert!((dot(&rays[i], &rays[i]) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn five_cycle_overlap_with_psi() {
        for ray in kcbs_rays::<f64>(5) {
            assert!((ray[2] * ray[2] - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn sources_average_to_maximally_mixed() {
        let q = kcbs_realization::<f64>(5).unwrap();
        let target = Operator::identity(3).scale(1.0 / 3.0);
        for s in q.sources.iter().chain(std::iter::once(&q.special_source)) {
            assert!(s.average().max_diff(&target) < 1e-10);
        }
    }

    #[test]
    fn rejects_small_or_even_n() {
        assert!(kcbs_realization::<f64>(3).is_err());
        assert!(kcbs_realization::<f64>(6).is_err());
    }

    #[test]
    fn joint_effects_have_empty_plus_plus() {
        let q = kcbs_realization::<f64>(5).unwrap();
        for c in &q.contexts {
            assert!(c.effects[0].max_norm() <= 1e-10);
        }
    }
}
