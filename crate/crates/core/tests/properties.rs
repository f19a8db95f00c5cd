mod common;

use common::*;
use hypercyclic::{
    conjugate_schedule, dual_transitive_map, enumerate_targets, linearly_independent, orbit_report, pair,
    solve_coefficients, theorem_d_pipeline, transitive_map, GridSpec, OperatorExpr, Scalar, SparseFunctional,
    SparseVector,
};
use proptest::prelude::*;
use rand::Rng;

fn scalar() -> impl Strategy<Value = Scalar> {
    (-9i64..10, 1i64..6).prop_map(|(n, d)| Scalar::ratio(n, d))
}

fn small_rows() -> impl Strategy<Value = Vec<Vec<(usize, Scalar)>>> {
    let entry = (0usize..4, (-2i64..3).prop_map(Scalar::from_integer));
    proptest::collection::vec(proptest::collection::vec(entry, 0..5), 1..5)
}

fn vector(max_index: usize) -> impl Strategy<Value = SparseVector> {
    proptest::collection::vec((0..max_index, scalar()), 0..6).prop_map(SparseVector::from_entries)
}

proptest! {
    #[test]
    fn independence_matches_minors(rows in small_rows()) {
        let vs: Vec<SparseVector> = rows.iter().map(|r| SparseVector::from_entries(r.clone())).collect();
        prop_assert_eq!(linearly_independent(&vs), brute_force_independent(&rows));
        let fs: Vec<SparseFunctional> = vs.iter().map(SparseVector::transpose).collect();
        prop_assert_eq!(linearly_independent(&fs), linearly_independent(&vs));
    }

    #[test]
    fn coefficients_always_satisfy(alpha in scalar(), beta in scalar(), gamma in scalar()) {
        let admissible = !(alpha.is_zero() && beta.is_zero()) && !(beta.is_zero() && gamma.is_zero());
        match solve_coefficients(&alpha, &beta, &gamma) {
            Ok(t) => prop_assert!(admissible && t.satisfies(&alpha, &beta, &gamma)),
            Err(_) => prop_assert!(!admissible),
        }
    }

    #[test]
    fn transitive_map_is_invertible(x in vector(8), y in vector(8), probes in proptest::collection::vec(vector(10), 20)) {
        prop_assume!(!x.is_zero() && !y.is_zero());
        let s = transitive_map(&x, &y).unwrap();
        prop_assert_eq!(s.apply(&x), y);
        let inv = s.inverse().unwrap();
        for u in probes {
            prop_assert_eq!(inv.apply(&s.apply(&u)), u.clone());
            prop_assert_eq!(s.apply(&inv.apply(&u)), u);
        }
    }

    #[test]
    fn restriction_determinant_identity(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let x = rand_nonzero_vector(&mut rng, 3, 6);
        let y = rand_nonzero_vector(&mut rng, 3, 6);
        let f = rand_functional(&mut rng, 3, 6);
        let g = rand_functional(&mut rng, 3, 6);
        let admissible = pair(&f, &y) == pair(&g, &x)
            && pair(&f, &x) * pair(&g, &y) != pair(&f, &y) * pair(&g, &x);
        match dual_transitive_map(&x, &y, &f, &g) {
            Ok(map) => {
                prop_assert!(admissible);
                let (a, b) = (&map.coefficients.a, &map.coefficients.b);
                prop_assert_eq!(map.restriction.det(), -(a * pair(&g, &x) + b * pair(&g, &y)));
            }
            Err(_) => prop_assert!(!admissible),
        }
    }
}

#[test]
fn incremental_orbit_matches_power_apply() {
    let grid = GridSpec::standard(3).unwrap();
    let schedule = enumerate_targets(&grid, 12, 2).unwrap();
    let run = theorem_d_pipeline(2, &schedule).unwrap();
    let a = &run.artifact;
    let mut rng = rng(7);
    let horizon = run.certificate.horizon;
    for (j, r) in a.tuple.ops().iter().enumerate() {
        let orbit: Vec<SparseVector> = r.orbit(&a.common_vector).take(horizon + 1).collect();
        for _ in 0..10 {
            let n = rng.gen_range(0..=horizon);
            assert_eq!(orbit[n], r.power_apply(&a.common_vector, n), "component {j}, n = {n}");
        }
    }
}

#[test]
fn orbit_report_agrees_with_direct_distances() {
    let grid = GridSpec::standard(2).unwrap();
    let schedule = enumerate_targets(&grid, 5, 2).unwrap();
    let run = theorem_d_pipeline(2, &schedule).unwrap();
    let a = &run.artifact;
    let conj = conjugate_schedule(&run.schedule, &a.similarities, &a.scales).unwrap();
    let horizon = run.certificate.horizon;
    let report = orbit_report(&a.tuple, &a.common_vector, &conj, horizon).unwrap();
    for rec in &report.records {
        let direct: Vec<Scalar> = (0..=horizon)
            .map(|n| {
                a.tuple
                    .ops()
                    .iter()
                    .zip(conj.target(rec.target))
                    .map(|(r, t)| r.power_apply(&a.common_vector, n).dist_sq(t))
                    .sum()
            })
            .collect();
        let min = direct.iter().min().unwrap();
        assert_eq!(&rec.best_dist_sq, min);
        assert_eq!(direct.iter().position(|d| d == min), Some(rec.best_time));
    }
}

#[test]
fn scalar_similarities_conjugate_trivially() {
    // S = λI conjugates trivially for every λ ≠ 0
    let t = OperatorExpr::weighted_backward_shift(Scalar::from_integer(3));
    let mut rng = rng(11);
    for _ in 0..20 {
        let lambda = rand_nonzero(&mut rng);
        let r = hypercyclic::conjugate(&OperatorExpr::ScalarMultiple(lambda), &t).unwrap();
        let u = rand_vector(&mut rng, 5, 9);
        assert_eq!(r.power_apply(&u, 4), t.power_apply(&u, 4));
    }
}
