use std::path::{Path, PathBuf};

use rreh_core::dsl::parse;
use rreh_core::model::{commodity, TechId};
use rreh_core::optimize::{
    demand_sweep, parse_annex, solve, solve_lp, verify_farkas, verify_ray, Certificate, DemandSpec,
    DemandTarget, Lp, LpStatus, OptimizeError, ProfileSource, Sense, SizingProblem, SolverOptions,
    StorageBoundary,
};
use rreh_core::par::map_ordered_seq;
use rreh_core::synth::benchmark_problem;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load(hub: &str, annex: &str, profiles: Option<&str>, seed: Option<u64>) -> SizingProblem {
    let dir = fixtures();
    let text = std::fs::read_to_string(dir.join(hub)).unwrap();
    let doc = parse(&text, hub).unwrap();
    let annex = parse_annex(&std::fs::read_to_string(dir.join(annex)).unwrap(), &doc.hub).unwrap();
    let source = ProfileSource {
        dir: profiles.map(|p| dir.join(p)),
        seed,
    };
    SizingProblem::from_annex(doc.hub, annex, &source).unwrap()
}

fn toy(profiles: &str) -> SizingProblem {
    load("toy_wind_h2.rreh", "toy_wind_h2.econ.toml", Some(profiles), None)
}

fn toy_battery() -> SizingProblem {
    load("toy_wind_h2_battery.rreh", "toy_wind_h2_battery.econ.toml", Some("profiles_half"), None)
}

fn tech(name: &str) -> TechId {
    TechId::new(name, "l1").unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

// Wind and electrolyzer both cost 10 per unit of capacity and one unit of
// H2 is needed every hour. With full availability one unit of each suffices.
#[test]
fn toy_uniform_profile() {
    let sol = solve(&toy("profiles_uniform"), &opts()).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!(rel(sol.objective, 20.0) <= 1e-6, "{}", sol.objective);
    assert!(rel(sol.capacities[&tech("Wind")], 1.0) <= 1e-6);
}

// Availability drops to one half in the last two hours, so wind capacity
// must double: 2·10 + 1·10.
#[test]
fn toy_half_profile() {
    let sol = solve(&toy("profiles_half"), &opts()).unwrap();
    assert!(rel(sol.objective, 30.0) <= 1e-6, "{}", sol.objective);
    assert!(rel(sol.capacities[&tech("Wind")], 2.0) <= 1e-6);
}

// A lossless free battery lets wind cover the 4 units of demand with
// 3·K energy over the horizon, so K = 4/3.
#[test]
fn free_battery_lowers_cost() {
    let sol = solve(&toy_battery(), &opts()).unwrap();
    assert!(sol.objective < 30.0 - 1e-6);
    assert!(rel(sol.objective, 10.0 + 40.0 / 3.0) <= 1e-6, "{}", sol.objective);
    let levels = &sol.storage_levels[&tech("Battery")];
    assert_eq!(levels.len(), 5);
    assert!((levels[0] - levels[4]).abs() <= 1e-7, "cyclic boundary: {levels:?}");
}

#[test]
fn free_start_boundary_starts_empty() {
    let mut p = toy_battery();
    p.boundary = StorageBoundary::FreeStartZero;
    let sol = solve(&p, &opts()).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!(sol.storage_levels[&tech("Battery")][0].abs() <= 1e-9);
    assert!(rel(sol.objective, 10.0 + 40.0 / 3.0) <= 1e-6);
}

#[test]
fn zero_demand_costs_nothing() {
    let p = toy("profiles_half").with_demand(DemandSpec {
        commodity: commodity("H2"),
        quantity: 0.0,
        target: DemandTarget::PerStep,
    });
    let sol = solve(&p, &opts()).unwrap();
    assert!(sol.objective.abs() <= 1e-9);
}

#[test]
fn total_demand_equals_per_step_sum_without_storage_gain() {
    let p = toy("profiles_uniform").with_demand(DemandSpec {
        commodity: commodity("H2"),
        quantity: 4.0,
        target: DemandTarget::Total,
    });
    let sol = solve(&p, &opts()).unwrap();
    assert!(rel(sol.objective, 20.0) <= 1e-6);
}

#[test]
fn cost_is_monotone_and_convex_in_demand() {
    let base = benchmark_problem(24, 11);
    let mult = [0.0, 0.5, 1.0, 1.5, 2.0];
    let objs: Vec<f64> = demand_sweep(&base, &mult, &opts())
        .into_iter()
        .map(|r| r.unwrap().objective)
        .collect();
    for w in objs.windows(2) {
        assert!(w[1] >= w[0] - 1e-7 * w[0].abs().max(1.0), "{objs:?}");
    }
    for w in objs.windows(3) {
        assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-6 * w[1].abs().max(1.0), "{objs:?}");
    }
}

#[test]
fn parallel_sweep_matches_sequential() {
    let base = benchmark_problem(12, 3);
    let mult = [0.25, 0.5, 1.0, 2.0];
    let par: Vec<f64> = demand_sweep(&base, &mult, &opts()).into_iter().map(|r| r.unwrap().objective).collect();
    let seq: Vec<f64> = map_ordered_seq(&mult, |&m| solve(&base.scaled_demand(m), &opts()).unwrap().objective);
    assert_eq!(par, seq);
}

#[test]
fn scaling_costs_scales_objective() {
    let base = benchmark_problem(12, 5);
    let a = solve(&base, &opts()).unwrap().objective;
    let b = solve(&base.scaled_costs(3.5), &opts()).unwrap().objective;
    assert!(rel(b, 3.5 * a) <= 1e-7, "{a} {b}");
}

#[test]
fn infeasible_bound_yields_verified_farkas() {
    let mut p = toy("profiles_half");
    p.econ.techs.get_mut(&tech("Wind")).unwrap().capacity_bounds = (0.0, 0.5);
    let sol = solve(&p, &opts()).unwrap();
    assert_eq!(sol.status, LpStatus::Infeasible);
    assert!(matches!(sol.certificate, Some(Certificate::Farkas { .. })));
    assert!(sol.certificate_verified);
}

#[test]
fn raw_lp_certificates() {
    // min -x0 - x1 s.t. x0 - x1 <= 1: unbounded along (1, 1).
    let mut lp = Lp::default();
    let a = lp.add_var("a", -1.0, 0.0, f64::INFINITY);
    let b = lp.add_var("b", -1.0, 0.0, f64::INFINITY);
    lp.add_row("r", [(a, 1.0), (b, -1.0)], Sense::Le, 1.0);
    let sol = solve_lp(&lp, &opts()).unwrap();
    assert_eq!(sol.status, LpStatus::Unbounded);
    let Some(Certificate::Ray { point, direction }) = &sol.certificate else { panic!("no ray") };
    assert!(verify_ray(&lp, point, direction, 1e-9));

    // x0 + x1 >= 3 with both capped at 1.
    let mut lp = Lp::default();
    let a = lp.add_var("a", 1.0, 0.0, 1.0);
    let b = lp.add_var("b", 1.0, 0.0, 1.0);
    lp.add_row("r", [(a, 1.0), (b, 1.0)], Sense::Ge, 3.0);
    for presolve in [true, false] {
        let sol = solve_lp(&lp, &SolverOptions { presolve, ..opts() }).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        let Some(Certificate::Farkas { y }) = &sol.certificate else { panic!("no Farkas vector") };
        assert!(verify_farkas(&lp, y, 1e-9));
    }
}

// A fuel cell and an electrolyzer feed each other with nothing entering
// the loop, so no export can ever be produced.
const LOOP: &str = r#"hub "loop" {
  location l1 { name = "loop"; potential = wind: high; demand = low; }
  tech cell@l1 { in: H2; out: electricity; }
  tech electrolyzer@l1 { in: electricity; out: H2; }
  tech export@l1 kind export { in: H2; out: ; }
  flows {
    flow electricity { from: cell@l1; to: electrolyzer@l1; }
    flow H2 { from: electrolyzer@l1; to: cell@l1, export@l1; }
  }
}
"#;

const LOOP_ANNEX: &str = r#"
[horizon]
steps = 2

[[demand]]
commodity = "H2"
quantity = 1.0

[tech."cell@l1"]
capex_annuity = 1.0
conversion = { H2 = -1.0, electricity = 0.5 }

[tech."electrolyzer@l1"]
capex_annuity = 1.0
conversion = { electricity = -1.0, H2 = 1.0 }
"#;

#[test]
fn unreachable_demand_is_reported() {
    let doc = parse(LOOP, "loop.rreh").unwrap();
    let annex = parse_annex(LOOP_ANNEX, &doc.hub).unwrap();
    let p = SizingProblem::from_annex(doc.hub, annex, &ProfileSource::default()).unwrap();
    match solve(&p, &opts()) {
        Err(OptimizeError::UnreachableDemand { commodity, cut }) => {
            assert_eq!(commodity.as_str(), "H2");
            assert_eq!(cut, vec![tech("cell"), tech("electrolyzer"), tech("export")]);
        }
        other => panic!("expected unreachable demand, got {other:?}"),
    }
}

#[test]
fn australia_disposes_byproducts() {
    let p = load("australia_ch3oh.rreh", "australia_ch3oh.econ.toml", None, Some(42));
    let sol = solve(&p, &opts()).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    let disposed = |c: &str| -> f64 {
        sol.disposal
            .iter()
            .filter(|((_, k), _)| k.as_str() == c)
            .flat_map(|(_, v)| v.iter())
            .sum()
    };
    assert!(disposed("O2") > 1e-6);
    assert!(disposed("heat") > 1e-6);
}
