//! Exact double-description (Motzkin) vertex enumeration.
//!
//! Equalities are eliminated first by solving for a particular point and a
//! null-space basis. The remaining inequalities are homogenized into a
//! pointed cone `{z = (t, y) : A z ≥ 0}` whose extreme rays with `t > 0` are
//! the polytope's vertices. Rows are inserted one at a time; two rays are
//! combined only when they are adjacent, decided by the combinatorial test on
//! their common zero sets.

use num_traits::Zero;

use super::hrep::{Constraint, HRep};
use super::PolytopeError;
use crate::scalar::ExactField;

#[derive(Clone, Debug, PartialEq, Eq)]
struct ZeroSet(Vec<u64>);

impl ZeroSet {
    fn empty(bits: usize) -> Self {
        Self(vec![0; bits.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn intersect(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn is_superset_of(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == *b)
    }

    fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

#[derive(Clone, Debug)]
struct Ray<T> {
    coords: Vec<T>,
    zeros: ZeroSet,
}

fn dot<T: ExactField>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Divides by the absolute value of the first nonzero entry so that equal
/// rays compare equal and entries stay small.
fn normalize<T: ExactField>(v: &mut [T]) {
    if let Some(first) = v.iter().find(|x| !x.is_zero()).map(|x| x.abs()) {
        if !first.is_one() {
            for x in v.iter_mut() {
                *x = x.clone() / first.clone();
            }
        }
    }
}

/// Affine parametrization `x = base + Σ y_j basis[j]` of an equality system.
#[derive(Clone, Debug)]
pub struct AffineSolution<T> {
    pub base: Vec<T>,
    pub basis: Vec<Vec<T>>,
}

/// Solves `A x = b` exactly by reduced row echelon form. `None` when the
/// system is inconsistent.
#[allow(clippy::needless_range_loop)]
pub fn solve_equalities<T: ExactField>(
    rows: &[Constraint<T>],
    dim: usize,
) -> Option<AffineSolution<T>> {
    let mut m: Vec<Vec<T>> = rows
        .iter()
        .map(|c| {
            let mut r = c.coeffs.clone();
            r.push(c.rhs.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..dim {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let inv = T::one() / m[rank][col].clone();
        for x in m[rank].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=dim {
                    let delta = f.clone() * m[rank][c].clone();
                    m[r][c] = m[r][c].clone() - delta;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    if m[rank..].iter().any(|r| !r[dim].is_zero()) {
        return None;
    }

    let mut base = vec![T::zero(); dim];
    for (r, &col) in pivots.iter().enumerate() {
        base[col] = m[r][dim].clone();
    }
    let mut is_pivot = vec![false; dim];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let basis = (0..dim)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![T::zero(); dim];
            v[f] = T::one();
            for (r, &col) in pivots.iter().enumerate() {
                v[col] = -m[r][f].clone();
            }
            v
        })
        .collect();
    Some(AffineSolution { base, basis })
}

/// Inverse of a square matrix, or `None` if singular.
#[allow(clippy::needless_range_loop)]
fn invert<T: ExactField>(matrix: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = matrix.len();
    let mut m: Vec<Vec<T>> = matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, p);
        let inv = T::one() / m[col][col].clone();
        for x in m[col].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..2 * n {
                    let delta = f.clone() * m[col][c].clone();
                    m[r][c] = m[r][c].clone() - delta;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Greedily picks rows that are linearly independent, up to `target`.
fn independent_rows<T: ExactField>(rows: &[Vec<T>], target: usize) -> Vec<usize> {
    let mut chosen = Vec::new();
    // Echelon basis of the chosen rows, each with its pivot column.
    let mut echelon: Vec<(usize, Vec<T>)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut v = row.clone();
        for (pivot, e) in &echelon {
            if !v[*pivot].is_zero() {
                let f = v[*pivot].clone() / e[*pivot].clone();
                for (x, y) in v.iter_mut().zip(e) {
                    *x = x.clone() - f.clone() * y.clone();
                }
            }
        }
        if let Some(pivot) = v.iter().position(|x| !x.is_zero()) {
            echelon.push((pivot, v));
            chosen.push(i);
            if chosen.len() == target {
                break;
            }
        }
    }
    chosen
}

/// Enumerates the vertices of `{x : E x = e, A x ≥ b}` exactly. The
/// polytope must be bounded. Vertices come back sorted lexicographically.
pub fn enumerate_points<T: ExactField>(h: &HRep<T>) -> Result<Vec<Vec<T>>, PolytopeError> {
    let dim = h.dimension();
    let affine = solve_equalities(&h.equalities, dim).ok_or(PolytopeError::Infeasible)?;
    let k = affine.basis.len();

    // Reduced inequality rows over z = (t, y): -b' t + a' y >= 0.
    let mut cone_rows: Vec<Vec<T>> = Vec::new();
    cone_rows.push(
        std::iter::once(T::one())
            .chain(std::iter::repeat_n(T::zero(), k))
            .collect(),
    );
    for c in &h.inequalities {
        let shifted = c.rhs.clone() - dot(&c.coeffs, &affine.base);
        let reduced: Vec<T> = affine.basis.iter().map(|b| dot(&c.coeffs, b)).collect();
        if reduced.iter().all(Zero::is_zero) {
            if shifted.is_positive() {
                return Err(PolytopeError::Infeasible);
            }
            continue;
        }
        let mut row = Vec::with_capacity(k + 1);
        row.push(-shifted);
        row.extend(reduced);
        normalize(&mut row);
        if !cone_rows.contains(&row) {
            cone_rows.push(row);
        }
    }

    let rays = if k == 0 {
        vec![vec![T::one()]]
    } else {
        double_description(&cone_rows, k + 1)?
    };

    let mut points: Vec<Vec<T>> = rays
        .into_iter()
        .map(|z| {
            let t = z[0].clone();
            if !t.is_positive() {
                return Err(PolytopeError::Unbounded);
            }
            let mut x = affine.base.clone();
            for (yj, b) in z[1..].iter().zip(&affine.basis) {
                let w = yj.clone() / t.clone();
                if w.is_zero() {
                    continue;
                }
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi = xi.clone() + w.clone() * bi.clone();
                }
            }
            Ok(x)
        })
        .collect::<Result<_, _>>()?;
    if points.is_empty() {
        return Err(PolytopeError::Infeasible);
    }
    points.sort();
    points.dedup();
    if points.iter().any(|p| !h.contains(p)) {
        return Err(PolytopeError::Internal(
            "enumerated point violates the H-representation".into(),
        ));
    }
    Ok(points)
}

/// Extreme rays of the pointed cone `{z : row · z ≥ 0 for all rows}` in
/// `dim` dimensions.
fn double_description<T: ExactField>(rows: &[Vec<T>], dim: usize) -> Result<Vec<Vec<T>>, PolytopeError> {
    let m = rows.len();
    let initial = independent_rows(rows, dim);
    if initial.len() < dim {
        return Err(PolytopeError::Unbounded);
    }
    let basis: Vec<Vec<T>> = initial.iter().map(|&i| rows[i].clone()).collect();
    let inverse = invert(&basis).ok_or_else(|| PolytopeError::Internal("singular initial basis".into()))?;

    let mut processed = vec![false; m];
    for &i in &initial {
        processed[i] = true;
    }

    let zero_set = |coords: &[T], processed: &[bool]| {
        let mut z = ZeroSet::empty(m);
        for (i, row) in rows.iter().enumerate() {
            if processed[i] && dot(row, coords).is_zero() {
                z.insert(i);
            }
        }
        z
    };

    let mut rays: Vec<Ray<T>> = (0..dim)
        .map(|j| {
            let mut coords: Vec<T> = inverse.iter().map(|r| r[j].clone()).collect();
            normalize(&mut coords);
            let zeros = zero_set(&coords, &processed);
            Ray { coords, zeros }
        })
        .collect();

    for (i, row) in rows.iter().enumerate() {
        if processed[i] {
            continue;
        }
        processed[i] = true;

        let values: Vec<T> = rays.iter().map(|r| dot(row, &r.coords)).collect();
        let positive: Vec<usize> = (0..rays.len()).filter(|&r| values[r].is_positive()).collect();
        let negative: Vec<usize> = (0..rays.len()).filter(|&r| values[r].is_negative()).collect();
        if negative.is_empty() {
            for (r, v) in rays.iter_mut().zip(&values) {
                if v.is_zero() {
                    r.zeros.insert(i);
                }
            }
            continue;
        }

        let mut fresh = Vec::new();
        for &p in &positive {
            for &q in &negative {
                let common = rays[p].zeros.intersect(&rays[q].zeros);
                if common.len() + 2 < dim {
                    continue;
                }
                let blocked = rays.iter().enumerate().any(|(r, ray)| {
                    r != p && r != q && ray.zeros.is_superset_of(&common)
                });
                if blocked {
                    continue;
                }
                let (vp, vq) = (values[p].clone(), -values[q].clone());
                let mut coords: Vec<T> = rays[p]
                    .coords
                    .iter()
                    .zip(&rays[q].coords)
                    .map(|(a, b)| vq.clone() * a.clone() + vp.clone() * b.clone())
                    .collect();
                normalize(&mut coords);
                let mut zeros = common;
                zeros.insert(i);
                fresh.push(Ray { coords, zeros });
            }
        }

        let mut next = Vec::with_capacity(rays.len() + fresh.len() - negative.len());
        for (r, v) in rays.into_iter().zip(values) {
            if v.is_negative() {
                continue;
            }
            let mut r = r;
            if v.is_zero() {
                r.zeros.insert(i);
            }
            next.push(r);
        }
        next.extend(fresh);
        rays = next;
    }
    Ok(rays.into_iter().map(|r| r.coords).collect())
}
