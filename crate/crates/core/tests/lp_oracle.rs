//! Sizing LPs checked against brute-force vertex enumeration.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rreh_core::optimize::{build_lp, check_kkt, presolve_lp, solve, solve_lp, LpStatus, Sense, SolverOptions};
use rreh_core::synth::random_small_problem;

#[path = "support/vertex.rs"]
mod vertex;

use vertex::vertex_min;

#[test]
fn random_sizing_problems_match_vertex_enumeration() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let opts = SolverOptions::default();
    let no_presolve = SolverOptions { presolve: false, ..opts };
    let (mut checked, mut optimal, mut infeasible) = (0, 0, 0);
    let mut attempts = 0;
    while checked < 200 {
        attempts += 1;
        assert!(attempts < 20_000, "generator rarely yields small programs");
        let problem = random_small_problem(&mut rng);
        let (lp, layout) = build_lp(&problem).unwrap();
        let Some(reduced) = presolve_lp(&lp) else { continue };
        if reduced.num_vars() > 8 {
            continue;
        }
        checked += 1;
        let oracle = vertex_min(&lp);
        match (oracle, vertex_min(&reduced)) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "presolve moved optimum {a} -> {b}"),
            (a, b) => assert_eq!(a.is_some(), b.is_some(), "presolve changed feasibility"),
        }
        let sol = solve(&problem, &opts).unwrap();
        let raw = solve_lp(&lp, &no_presolve).unwrap();
        match oracle {
            None => {
                infeasible += 1;
                assert_eq!(sol.status, LpStatus::Infeasible);
                assert_eq!(raw.status, LpStatus::Infeasible);
                assert!(sol.certificate_verified);
            }
            Some(v) => {
                optimal += 1;
                assert_eq!(sol.status, LpStatus::Optimal, "oracle optimum {v}");
                let rel = |a: f64| (a - v).abs() / v.abs().max(1.0);
                assert!(rel(sol.objective) <= 1e-6, "solver {} vs oracle {v}", sol.objective);
                assert!(rel(raw.objective) <= 1e-6, "unpresolved {} vs oracle {v}", raw.objective);

                let x = &sol.lp.x;
                assert!(sol.balance_residual(&lp, &layout) <= 1e-7);
                for &r in &layout.capacity_rows {
                    let row = &lp.rows[r];
                    assert_eq!(row.sense, Sense::Le);
                    assert!(row.activity(x) - row.rhs <= 1e-9, "capacity row {} violated", row.name);
                }
                let kkt = check_kkt(&lp, x, &sol.lp.y);
                assert!(kkt.gap <= 1e-6, "duality gap {}", kkt.gap);
                assert!(kkt.primal <= 1e-7 && kkt.bounds <= 1e-9);
            }
        }
    }
    assert!(optimal > 100 && infeasible > 0, "optimal {optimal}, infeasible {infeasible}");
    assert!(started.elapsed().as_secs() < 60);
}
