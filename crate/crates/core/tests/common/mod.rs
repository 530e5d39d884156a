//! Independent oracles and generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use nci_core::scenario::{Context, FunctionalTerm, Measurement, WitnessFunctional};
use nci_core::{Rational, Scenario};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

pub fn q(p: i64, d: i64) -> Rational {
    Rational::new(p.into(), d.into())
}

/// Row rank by plain Gaussian elimination.
#[allow(clippy::needless_range_loop)]
pub fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone() / pivot.clone();
                for j in c..cols {
                    let d = rows[r][j].clone() * f.clone();
                    rows[i][j] -= d;
                }
            }
        }
        r += 1;
    }
    r
}

/// Mixed-radix index with the first coordinate most significant.
pub fn index(shape: &[usize], tuple: &[usize]) -> usize {
    tuple.iter().zip(shape).fold(0, |acc, (&o, &k)| acc * k + o)
}

fn shape(s: &Scenario, c: usize) -> Vec<usize> {
    s.contexts[c]
        .member_ids
        .iter()
        .map(|id| s.measurements.iter().find(|m| &m.id == id).unwrap().outcome_count)
        .collect()
}

/// Context tables of every global outcome assignment, deduplicated.
pub fn deterministic_tables(s: &Scenario) -> BTreeSet<Vec<Vec<Rational>>> {
    let counts: Vec<usize> = s.measurements.iter().map(|m| m.outcome_count).collect();
    let total: usize = counts.iter().product();
    let mut out = BTreeSet::new();
    for mut code in 0..total {
        let mut assignment = Vec::with_capacity(counts.len());
        for &k in &counts {
            assignment.push(code % k);
            code /= k;
        }
        let tables = (0..s.contexts.len())
            .map(|c| {
                let sh = shape(s, c);
                let tuple: Vec<usize> = s.contexts[c]
                    .member_ids
                    .iter()
                    .map(|id| assignment[s.measurements.iter().position(|m| &m.id == id).unwrap()])
                    .collect();
                let mut t = vec![Rational::zero(); sh.iter().product()];
                t[index(&sh, &tuple)] = Rational::one();
                t
            })
            .collect();
        out.insert(tables);
    }
    out
}

/// `R` of each global assignment, straight from the functional's terms.
pub fn deterministic_scores(s: &Scenario) -> Vec<Rational> {
    deterministic_tables(s)
        .iter()
        .map(|tables| {
            s.functional.terms.iter().fold(s.functional.offset.clone(), |acc, t| {
                acc + t.coeff.clone() * tables[t.context][index(&shape(s, t.context), &t.outcome)].clone()
            })
        })
        .collect()
}

/// Nondeterministic vertices of the odd n-cycle: uniform marginals, each
/// context perfectly correlated or anticorrelated, with an odd number of
/// anticorrelated contexts.
pub fn cycle_indeterministic_tables(n: usize) -> BTreeSet<Vec<Vec<Rational>>> {
    let h = q(1, 2);
    let z = Rational::zero();
    (0..1u32 << n)
        .filter(|mask| mask.count_ones() % 2 == 1)
        .map(|mask| {
            (0..n)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        vec![z.clone(), h.clone(), h.clone(), z.clone()]
                    } else {
                        vec![h.clone(), z.clone(), z.clone(), h.clone()]
                    }
                })
                .collect()
        })
        .collect()
}

/// Independent constraint rows: normalization per context and, for every
/// pair of contexts sharing a measurement, equal marginals.
pub fn oracle_equalities(s: &Scenario) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let shapes: Vec<Vec<usize>> = (0..s.contexts.len()).map(|c| s.context_shape(c)).collect();
    let offsets: Vec<usize> = shapes
        .iter()
        .scan(0, |acc, sh| {
            let o = *acc;
            *acc += sh.iter().product::<usize>();
            Some(o)
        })
        .collect();
    let n: usize = shapes.iter().map(|sh| sh.iter().product::<usize>()).sum();
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (c, sh) in shapes.iter().enumerate() {
        let mut row = vec![Rational::zero(); n];
        for t in tuples(sh) {
            row[offsets[c] + index(sh, &t)] = Rational::one();
        }
        rows.push(row);
        rhs.push(Rational::one());
    }
    for a in 0..shapes.len() {
        for b in a + 1..shapes.len() {
            for (sa, id) in s.contexts[a].member_ids.iter().enumerate() {
                let Some(sb) = s.contexts[b].member_ids.iter().position(|x| x == id) else {
                    continue;
                };
                for m in 0..shapes[a][sa] {
                    let mut row = vec![Rational::zero(); n];
                    for t in tuples(&shapes[a]).into_iter().filter(|t| t[sa] == m) {
                        row[offsets[a] + index(&shapes[a], &t)] += Rational::one();
                    }
                    for t in tuples(&shapes[b]).into_iter().filter(|t| t[sb] == m) {
                        row[offsets[b] + index(&shapes[b], &t)] -= Rational::one();
                    }
                    rows.push(row);
                    rhs.push(Rational::zero());
                }
            }
        }
    }
    (rows, rhs)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Feasible for the independent constraints, and the active constraints
/// pin the point down uniquely.
pub fn is_extreme_point(s: &Scenario, x: &[Rational]) -> bool {
    let (eq, rhs) = oracle_equalities(s);
    let n = eq[0].len();
    if x.len() != n || x.iter().any(|xi| xi.is_negative()) {
        return false;
    }
    if eq.iter().zip(&rhs).any(|(row, b)| &dot(row, x) != b) {
        return false;
    }
    let mut active = eq;
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            let mut unit = vec![Rational::zero(); n];
            unit[i] = Rational::one();
            active.push(unit);
        }
    }
    rank(active) == n
}

type Mat = [[f64; 3]; 3];

fn outer(a: &[f64; 3]) -> Mat {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i] * a[j];
        }
    }
    m
}

fn mul(a: &Mat, b: &Mat) -> Mat {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                m[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    m
}

fn sub(a: &Mat, b: &Mat) -> Mat {
    let mut m = *a;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] -= b[i][j];
        }
    }
    m
}

fn expect(m: &Mat, psi: &[f64; 3]) -> f64 {
    (0..3).map(|i| (0..3).map(|j| psi[i] * m[i][j] * psi[j]).sum::<f64>()).sum()
}

/// `R` of the qutrit n-cycle by direct Born-rule sums over real 3×3
/// matrices: `(1/n) Σ_i ⟨ψ|Π_i(I−Π_{i+1}) + (I−Π_i)Π_{i+1}|ψ⟩`.
pub fn naive_cycle_r(n: usize) -> f64 {
    let c = (std::f64::consts::PI / n as f64).cos();
    let ct = (c / (1.0 + c)).sqrt();
    let st = (1.0 - ct * ct).sqrt();
    let rays: Vec<[f64; 3]> = (1..=n)
        .map(|i| {
            let phi = ((n - 1) * i) as f64 * std::f64::consts::PI / n as f64;
            [st * phi.cos(), st * phi.sin(), ct]
        })
        .collect();
    let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let psi = [0.0, 0.0, 1.0];
    let mut total = 0.0;
    for i in 0..n {
        let a = outer(&rays[i]);
        let b = outer(&rays[(i + 1) % n]);
        total += expect(&mul(&a, &sub(&id, &b)), &psi);
        total += expect(&mul(&sub(&id, &a), &b), &psi);
    }
    total / n as f64
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-4i64..=4, 1i64..=4).prop_map(|(p, d)| q(p, d))
}

/// Valid scenarios with 2–4 measurements of 2–3 outcomes and contexts of
/// one or two members.
pub fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    (2usize..=4)
        .prop_flat_map(|k| {
            (
                prop::collection::vec(2usize..=3, k),
                prop::collection::vec(prop::collection::btree_set(0..k, 1..=2), 1..=4),
                prop::collection::vec(any::<bool>(), k),
                Just((0..k).collect::<Vec<_>>()).prop_shuffle(),
            )
        })
        .prop_flat_map(|(outcomes, raw_contexts, paired, order)| {
            let k = outcomes.len();
            let mut contexts: Vec<Vec<usize>> = raw_contexts.into_iter().map(|c| c.into_iter().collect()).collect();
            for m in 0..k {
                if !contexts.iter().any(|c| c.contains(&m)) {
                    contexts.push(vec![m]);
                }
            }
            let keys: Vec<(usize, Vec<usize>)> = contexts
                .iter()
                .enumerate()
                .flat_map(|(c, members)| {
                    let sh: Vec<usize> = members.iter().map(|&m| outcomes[m]).collect();
                    tuples(&sh).into_iter().map(move |t| (c, t))
                })
                .collect();
            let nkeys = keys.len();
            (
                Just(outcomes),
                Just(contexts),
                Just(keys),
                prop::collection::vec(prop::option::weighted(0.4, small_rational()), nkeys),
                small_rational(),
                Just(paired),
                Just(order),
            )
        })
        .prop_map(|(outcomes, contexts, keys, coeffs, offset, paired, order)| {
            let id = |m: usize| format!("m{m}");
            let measurements = outcomes
                .iter()
                .enumerate()
                .map(|(m, &k)| Measurement {
                    id: id(m),
                    outcome_count: k,
                })
                .collect();
            let contexts = contexts
                .iter()
                .map(|c| Context {
                    member_ids: c.iter().map(|&m| id(m)).collect(),
                })
                .collect();
            let terms = keys
                .into_iter()
                .zip(coeffs)
                .filter_map(|((context, outcome), coeff)| {
                    coeff.map(|coeff| FunctionalTerm {
                        context,
                        outcome,
                        coeff,
                    })
                })
                .collect();
            let mut pairing: Vec<String> = order.iter().filter(|&&m| paired[m]).map(|&m| id(m)).collect();
            if pairing.is_empty() {
                pairing.push(id(order[0]));
            }
            Scenario::new(measurements, contexts, WitnessFunctional { terms, offset }, pairing)
                .expect("generator yields valid scenarios")
        })
}

pub fn tuples(shape: &[usize]) -> Vec<Vec<usize>> {
    shape.iter().fold(vec![vec![]], |acc, &k| {
        acc.into_iter()
            .flat_map(|t| {
                (0..k).map(move |o| {
                    let mut t = t.clone();
                    t.push(o);
                    t
                })
            })
            .collect()
    })
}
