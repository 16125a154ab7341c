mod common;

use common::lp_oracle::{dual_vertex_enumeration, random_instance, tableau_simplex, vertex_enumeration};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repday::lp::{solve, verify_optimality, LinearProgram, LpStatus, Sense};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol || (a - b).abs() <= tol * a.abs().max(b.abs())
}

#[test]
fn small_instances_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..120 {
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(1..=5);
        let lp = random_instance(&mut rng, n, m, 0.15);
        let oracle = vertex_enumeration(&lp).expect("constructed feasible");
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal, "trial {trial}");
        assert!(close(sol.objective, oracle, 1e-8), "trial {trial}: {} vs {oracle}", sol.objective);
        let report = verify_optimality(&lp, &sol);
        assert!(report.passes(1e-6), "trial {trial}: {report:?}");
    }
}

#[test]
fn dual_enumeration_agrees_with_both_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..40 {
        let n = rng.gen_range(2..=6);
        // The dual oracle needs full row rank.
        let m = rng.gen_range(1..=n.min(4));
        let lp = random_instance(&mut rng, n, m, 0.2);
        let primal = vertex_enumeration(&lp).unwrap();
        let dual = dual_vertex_enumeration(&lp).unwrap();
        assert!(close(primal, dual, 1e-8), "trial {trial}: {primal} vs {dual}");
    }
    for trial in 0..10 {
        let n = rng.gen_range(20..=30);
        let m = rng.gen_range(1..=4);
        let lp = random_instance(&mut rng, n, m, 0.2);
        let tableau = tableau_simplex(&lp).unwrap();
        let dual = dual_vertex_enumeration(&lp).unwrap();
        assert!(close(tableau, dual, 1e-8), "trial {trial}: {tableau} vs {dual}");
    }
}

#[test]
fn dense_20x30_matches_tableau_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for trial in 0..20 {
        let lp = random_instance(&mut rng, 30, 20, 0.1);
        let oracle = tableau_simplex(&lp).expect("constructed feasible");
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!(close(sol.objective, oracle, 1e-8), "trial {trial}: {} vs {oracle}", sol.objective);
        assert!(verify_optimality(&lp, &sol).passes(1e-6));
    }
}

#[test]
fn redundant_row_keeps_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let mut lp = random_instance(&mut rng, 8, 6, 0.0);
        let base = solve(&lp).unwrap();
        // Sum of two existing <= rows (or a loosened copy of one) is implied.
        let row = lp.constraints[0].clone();
        let mut implied = row.clone();
        match row.sense {
            Sense::Le => implied.rhs += 1.0,
            Sense::Ge => implied.rhs -= 1.0,
            Sense::Eq => {}
        }
        lp.constraints.push(implied);
        let again = solve(&lp).unwrap();
        assert!(close(base.objective, again.objective, 1e-8));
    }
}

fn infeasible_pair() -> LinearProgram {
    let mut lp = LinearProgram::new();
    let x = lp.add_variable("x", 0.0, 10.0);
    let y = lp.add_variable("y", 0.0, 10.0);
    lp.add_constraint(vec![(x, 1.0), (y, 1.0)], Sense::Ge, 15.0);
    lp.add_constraint(vec![(x, 1.0), (y, -1.0)], Sense::Ge, 8.0);
    lp
}

#[test]
fn detects_infeasible_box() {
    // x + y >= 15 and x - y >= 8 need x >= 11.5 > 10.
    assert_eq!(solve(&infeasible_pair()).unwrap().status, LpStatus::Infeasible);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn objective_scaling_and_weak_duality(seed in 0u64..10_000, lambda in 0.1f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lp = random_instance(&mut rng, 10, 7, 0.1);
        let sol = solve(&lp).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        let report = verify_optimality(&lp, &sol);
        prop_assert!(report.dual_objective <= sol.objective + 1e-6 * (1.0 + sol.objective.abs()));

        let mut scaled = lp.clone();
        scaled.objective.iter_mut().for_each(|(_, c)| *c *= lambda);
        let s2 = solve(&scaled).unwrap();
        prop_assert!(close(s2.objective, lambda * sol.objective, 1e-8));

        let again = solve(&lp).unwrap();
        prop_assert_eq!(again.objective.to_bits(), sol.objective.to_bits());
        prop_assert_eq!(again.primal, sol.primal);
    }
}
