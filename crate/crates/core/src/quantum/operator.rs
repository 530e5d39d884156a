use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use super::eigen::symmetric_eigenvalues;
use crate::scalar::Real;

/// Dense `dim × dim` complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<F> {
    dim: usize,
    entries: Vec<Complex<F>>,
}

impl<F: Real> Operator<F> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![Complex::new(F::zero(), F::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.entries[i * dim + i] = Complex::new(F::one(), F::zero());
        }
        op
    }

    pub fn from_entries(dim: usize, entries: Vec<Complex<F>>) -> Self {
        assert_eq!(entries.len(), dim * dim, "entries must be dim x dim");
        Self { dim, entries }
    }

    pub fn from_real(dim: usize, entries: &[F]) -> Self {
        Self::from_entries(
            dim,
            entries.iter().map(|&x| Complex::new(x, F::zero())).collect(),
        )
    }

    /// `|v⟩⟨v|` for a (not necessarily normalized) vector.
    pub fn projector(v: &[Complex<F>]) -> Self {
        let dim = v.len();
        let entries = (0..dim * dim)
            .map(|k| v[k / dim] * v[k % dim].conj())
            .collect();
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex<F>] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<F> {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex<F> {
        (0..self.dim).fold(Complex::new(F::zero(), F::zero()), |acc, i| {
            acc + self.get(i, i)
        })
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        Self {
            dim: d,
            entries: (0..d * d).map(|k| self.get(k % d, k / d).conj()).collect(),
        }
    }

    pub fn scale(&self, factor: F) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> F {
        self.entries.iter().fold(F::zero(), |m, z| m.max(z.norm()))
    }

    pub fn max_diff(&self, other: &Self) -> F {
        (self - other).max_norm()
    }

    /// Real part of `Tr(self · other)`; the Born-rule probability when one
    /// side is an effect and the other a state.
    pub fn trace_product(&self, other: &Self) -> F {
        let d = self.dim;
        let mut acc = F::zero();
        for i in 0..d {
            for k in 0..d {
                acc = acc + (self.get(i, k) * other.get(k, i)).re;
            }
        }
        acc
    }

    pub fn hermitian_deviation(&self) -> F {
        self.max_diff(&self.dagger())
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<F> {
        // [[Re, -Im], [Im, Re]] has each eigenvalue of A twice.
        let d = self.dim;
        let h = (self + &self.dagger()).scale(F::lit(0.5));
        let n = 2 * d;
        let mut real = vec![F::zero(); n * n];
        for i in 0..d {
            for j in 0..d {
                let z = h.get(i, j);
                real[i * n + j] = z.re;
                real[(i + d) * n + (j + d)] = z.re;
                real[i * n + (j + d)] = -z.im;
                real[(i + d) * n + j] = z.im;
            }
        }
        symmetric_eigenvalues(real, n).into_iter().step_by(2).collect()
    }

    pub fn min_eigenvalue(&self) -> F {
        self.eigenvalues().first().copied().unwrap_or_else(F::zero)
    }

    pub fn commutator_norm(&self, other: &Self) -> F {
        (&(self * other) - &(other * self)).max_norm()
    }

    pub fn map<G: Real>(&self, f: impl Fn(F) -> G) -> Operator<G> {
        Operator {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|z| Complex::new(f(z.re), f(z.im)))
                .collect(),
        }
    }
}

impl<F: Real> Add for &Operator<F> {
    type Output = Operator<F>;
    fn add(self, rhs: Self) -> Operator<F> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Operator {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<F: Real> Sub for &Operator<F> {
    type Output = Operator<F>;
    fn sub(self, rhs: Self) -> Operator<F> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Operator {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<F: Real> Mul for &Operator<F> {
    type Output = Operator<F>;
    fn mul(self, rhs: Self) -> Operator<F> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let d = self.dim;
        let mut out = Operator::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                for j in 0..d {
                    out.entries[i * d + j] = out.entries[i * d + j] + a * rhs.get(k, j);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn projector_is_idempotent() {
        let s = 0.5f64.sqrt();
        let p = Operator::projector(&[c(s, 0.0), c(0.0, s), c(0.0, 0.0)]);
        assert!((&p * &p).max_diff(&p) < 1e-15);
        assert!((p.trace().re - 1.0).abs() < 1e-15);
        assert!(p.hermitian_deviation() < 1e-15);
        let e = p.eigenvalues();
        assert!(e[0].abs() < 1e-12 && e[1].abs() < 1e-12 && (e[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_hermitian_eigenvalues() {
        // Pauli Y has eigenvalues ±1.
        let y = Operator::from_entries(2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let e = y.eigenvalues();
        assert!((e[0] + 1.0).abs() < 1e-12 && (e[1] - 1.0).abs() < 1e-12);
        assert!((y.min_eigenvalue() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_product_is_born_rule() {
        let p = Operator::<f64>::projector(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let rho = Operator::identity(2).scale(0.5);
        assert!((p.trace_product(&rho) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_precision_works() {
        let p = Operator::<f32>::identity(3).scale(0.5);
        assert!((p.min_eigenvalue() - 0.5).abs() < 1e-6);
    }
}
