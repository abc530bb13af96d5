//! Linear sizing and dispatch of a hub.
//!
//! A [`SizingProblem`] combines a valid hub with a techno-economic annex,
//! availability profiles and demands. [`build_lp`] turns it into an [`Lp`]
//! and [`solve`] runs presolve plus the bundled simplex, returning a
//! [`SizingSolution`] that [`report`] can render.

mod annex;
mod lp;
mod presolve;
mod problem;
mod profile;
mod report;
mod simplex;
mod sweep;

use thiserror::Error;

use crate::model::{CommodityId, TechId};

pub use annex::{parse_annex, Annex, StorageBoundary};
pub use lp::{
    check_kkt, dual_objective, verify_farkas, verify_ray, Certificate, KktReport, Lp, LpSolution,
    LpStatus, Row, Sense, Tolerances,
};
pub use problem::{
    build_lp, check_reachability, solve, DemandSpec, DemandTarget, Horizon, LpLayout,
    SizingProblem, SizingSolution, StorageSpec, TechEcon, TechnoEconomics,
};
pub use profile::{load_profile, parse_profile_csv, synthetic_profile, Profile, ProfileSource};
pub use report::{format_number, report, ReportFormat, SIZING_SCHEMA};
pub use simplex::SolverOptions;
pub use sweep::{demand_sweep, solve_scenarios};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("annex: {0}")]
    Annex(String),
    #[error("annex does not cover generic technology `{0}`")]
    UncoveredTechnology(TechId),
    #[error("annex entry for `{tech}`: {reason}")]
    InvalidEntry { tech: String, reason: String },
    #[error("profile `{id}`: {reason}")]
    Profile { id: String, reason: String },
    #[error("demand for {commodity}: {reason}")]
    InvalidDemand { commodity: CommodityId, reason: String },
    #[error("hub has {0} validation error(s)")]
    InvalidHub(usize),
    #[error(
        "demand for {commodity} cannot be reached from any source; unreached: {}",
        cut.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
    )]
    UnreachableDemand { commodity: CommodityId, cut: Vec<TechId> },
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("solution is {}, not optimal", .0.as_str())]
    NotOptimal(LpStatus),
}

/// Solves an LP: presolve (unless disabled), simplex, postsolve.
///
/// If presolve detects infeasibility or unboundedness the full program is
/// solved instead so that the returned certificate refers to `lp`.
pub fn solve_lp(lp: &Lp, opts: &SolverOptions) -> Result<LpSolution, OptimizeError> {
    if opts.presolve {
        if let Ok(p) = presolve::presolve(lp) {
            let sol = simplex::simplex(&p.reduced, opts)?;
            if sol.status == LpStatus::Optimal {
                return Ok(p.postsolve(lp, &sol));
            }
        }
    }
    simplex::simplex(lp, opts)
}

/// The reduced program after presolve, or `None` if presolve alone proves
/// the program infeasible or unbounded. Its objective (offset included)
/// equals the original one at corresponding points.
pub fn presolve_lp(lp: &Lp) -> Option<Lp> {
    presolve::presolve(lp).ok().map(|p| p.reduced)
}

/// Number of variables left after presolve.
pub fn presolved_size(lp: &Lp) -> Option<usize> {
    presolve_lp(lp).map(|p| p.num_vars())
}
