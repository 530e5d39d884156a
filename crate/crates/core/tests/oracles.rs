mod common;

use std::collections::BTreeSet;

use common::{cycle_indeterministic_tables, deterministic_scores, deterministic_tables, naive_cycle_r, q};
use nci_core::inequality::{compute_parameters, score_vertices, Derivation};
use nci_core::polytope::scenario_vertices;
use nci_core::quantum::{kcbs_realization, Operator, SourceEnsemble};
use nci_core::Scenario;

#[test]
fn brute_force_assignments_reproduce_r_det() {
    for n in [3, 5, 7] {
        let s = Scenario::n_cycle(n).unwrap();
        let best = deterministic_scores(&s).into_iter().max().unwrap();
        assert_eq!(best, q(n as i64 - 1, n as i64));
        let params = Derivation::run(&s).unwrap().parameters().unwrap();
        assert_eq!(params.r_det, best, "n={n}");
    }
}

#[test]
fn vertex_sets_match_oracles() {
    for n in [3, 5, 7] {
        let s = Scenario::n_cycle(n).unwrap();
        let vertices = scenario_vertices(&s).unwrap();
        let (det, ind): (Vec<_>, Vec<_>) = vertices.iter().partition(|v| v.is_deterministic());
        let det: BTreeSet<_> = det.into_iter().map(|v| v.tables.clone()).collect();
        let ind: BTreeSet<_> = ind.into_iter().map(|v| v.tables.clone()).collect();
        assert_eq!(det, deterministic_tables(&s), "n={n}");
        assert_eq!(ind, cycle_indeterministic_tables(n), "n={n}");
    }
}

#[test]
fn indeterministic_scores_by_hand() {
    // Each anticorrelated context contributes 1/n to R; Corr is 1/2 throughout.
    let n = 5;
    let s = Scenario::n_cycle(n).unwrap();
    let vertices = scenario_vertices(&s).unwrap();
    for score in score_vertices(&vertices, &s).unwrap() {
        let v = &vertices[score.vertex_index];
        if v.is_deterministic() {
            assert_eq!(score.corr_lambda, q(1, 1));
            continue;
        }
        let anti = v.tables.iter().filter(|t| t[1] == q(1, 2)).count();
        assert_eq!(score.r_lambda, q(anti as i64, n as i64));
        assert_eq!(score.corr_lambda, q(1, 2));
    }
    let params = compute_parameters(&vertices, &s).unwrap();
    assert_eq!((params.n_det_vertices, params.n_ind_vertices), (32, 16));
}

#[test]
fn naive_born_rule_reproduces_r() {
    for n in [5, 7] {
        let s = Scenario::n_cycle(n).unwrap();
        let values = kcbs_realization::<f64>(n).unwrap().evaluate(&s).unwrap();
        let naive = naive_cycle_r(n);
        assert!((values.r - naive).abs() <= 1e-12, "n={n}: {} vs {naive}", values.r);
    }
}

#[test]
fn maximally_mixed_special_state_gives_two_thirds() {
    for n in [5, 7] {
        let s = Scenario::n_cycle(n).unwrap();
        let mut q = kcbs_realization::<f64>(n).unwrap();
        q.special_source = SourceEnsemble::new("S*", vec![(1.0, Operator::identity(3).scale(1.0 / 3.0))]).unwrap();
        let values = q.evaluate(&s).unwrap();
        assert!((values.r - 2.0 / 3.0).abs() <= 1e-12);
        assert_eq!(values.p_star, 1.0);
    }
}

#[test]
fn depolarized_values_match_closed_form() {
    // Tr(Π)/3 = 1/3 for rank-one projectors, so a source branch in its own
    // state scores v + (1 − v)/3 and the complement branch v + 2(1 − v)/3.
    let s = Scenario::n_cycle(5).unwrap();
    let q = kcbs_realization::<f64>(5).unwrap();
    let r1 = 2.0 / 5f64.sqrt();
    for v in [0.0, 0.25, 0.5, 0.8759, 0.99, 1.0] {
        let values = q.depolarize(v).unwrap().evaluate(&s).unwrap();
        let corr = (v + (1.0 - v) / 3.0) / 3.0 + 2.0 / 3.0 * (v + 2.0 * (1.0 - v) / 3.0);
        assert!((values.corr - corr).abs() < 1e-12, "v={v}");
        assert!((values.corr - (v + 5.0 * (1.0 - v) / 9.0)).abs() < 1e-12);
        assert!((values.r - (v * r1 + (1.0 - v) * 2.0 / 3.0)).abs() < 1e-12);
    }
}

#[test]
fn nearly_ideal_realization_still_violates() {
    let s = Scenario::n_cycle(5).unwrap();
    let params = Derivation::run(&s).unwrap().parameters().unwrap();
    let values = kcbs_realization::<f64>(5).unwrap().depolarize(0.99).unwrap().evaluate(&s).unwrap();
    let e = nci_core::inequality::evaluate_bound(&params, values.corr, values.r, values.p_star).unwrap();
    assert!(e.violated);
    let flat = kcbs_realization::<f64>(5).unwrap().depolarize(0.0).unwrap().evaluate(&s).unwrap();
    assert!((flat.corr - 5.0 / 9.0).abs() < 1e-12);
}
