//! Cyclic Jacobi eigenvalues for real symmetric matrices.

use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of the symmetric `n × n` row-major matrix `a`, ascending.
pub fn symmetric_eigenvalues<F: Real>(mut a: Vec<F>, n: usize) -> Vec<F> {
    assert_eq!(a.len(), n * n, "matrix must be n x n");
    let scale = a.iter().fold(F::zero(), |m, x| m.max(x.abs()));
    let eps = F::epsilon() * F::epsilon();
    for _ in 0..MAX_SWEEPS {
        let off: F = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .fold(F::zero(), |s, (i, j)| s + a[i * n + j] * a[i * n + j]);
        if off <= eps * scale * scale || off == F::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == F::zero() {
                    continue;
                }
                let (app, aqq) = (a[p * n + p], a[q * n + q]);
                let theta = (aqq - app) / (F::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<F> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    eig
}
