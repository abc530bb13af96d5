use super::problem::{solve, SizingProblem, SizingSolution};
use super::simplex::SolverOptions;
use super::OptimizeError;
use crate::par::map_ordered;

/// Solves independent problems, concurrently when the `parallel` feature
/// is enabled. Results are in input order.
pub fn solve_scenarios(
    problems: &[SizingProblem],
    opts: &SolverOptions,
) -> Vec<Result<SizingSolution, OptimizeError>> {
    map_ordered(problems, |p| solve(p, opts))
}

/// Solves `base` with every demand scaled by each multiplier.
pub fn demand_sweep(
    base: &SizingProblem,
    multipliers: &[f64],
    opts: &SolverOptions,
) -> Vec<Result<SizingSolution, OptimizeError>> {
    let problems: Vec<SizingProblem> = multipliers.iter().map(|&m| base.scaled_demand(m)).collect();
    solve_scenarios(&problems, opts)
}
