use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::annex::{Annex, StorageBoundary};
use super::lp::{verify_farkas, verify_ray, Certificate, Lp, LpSolution, LpStatus, Sense};
use super::profile::{Profile, ProfileSource};
use super::simplex::SolverOptions;
use super::{solve_lp, OptimizeError};
use crate::model::{
    byproduct_pairs, expand_hyperedges, validate, CommodityId, Hub, SetName, SimpleEdge, TechId,
    Technology, TechnologyKind,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    pub steps: usize,
    /// Length of one step in hours.
    pub step_hours: f64,
}

impl Default for Horizon {
    fn default() -> Self {
        Self {
            steps: 24,
            step_hours: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemandTarget {
    /// `quantity` must be delivered in every step.
    PerStep,
    /// `quantity` must be delivered over the whole horizon.
    Total,
}

impl DemandTarget {
    pub fn as_str(self) -> &'static str {
        match self {
            DemandTarget::PerStep => "per_step",
            DemandTarget::Total => "total",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandSpec {
    pub commodity: CommodityId,
    pub quantity: f64,
    pub target: DemandTarget,
}

impl FromStr for DemandSpec {
    type Err = String;

    /// `COMMODITY:QUANTITY[:per_step|:total]`.
    fn from_str(s: &str) -> Result<Self, String> {
        let mut parts: Vec<&str> = s.rsplitn(3, ':').collect();
        parts.reverse();
        let (commodity, qty, target) = match parts.as_slice() {
            [c, q, t] if *t == "per_step" || *t == "total" => (c.to_string(), *q, *t),
            [c, q, last] => (format!("{c}:{q}"), *last, "per_step"),
            [c, q] => (c.to_string(), *q, "per_step"),
            _ => return Err(format!("expected COMMODITY:QUANTITY[:per_step|:total], got {s:?}")),
        };
        let quantity: f64 = qty
            .trim()
            .parse()
            .map_err(|_| format!("invalid demand quantity {qty:?}"))?;
        let commodity = CommodityId::new(&commodity).map_err(|e| e.to_string())?;
        let target = if target == "total" {
            DemandTarget::Total
        } else {
            DemandTarget::PerStep
        };
        Ok(DemandSpec {
            commodity,
            quantity,
            target,
        })
    }
}

impl fmt::Display for DemandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.commodity, self.quantity, self.target.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StorageSpec {
    pub commodity: CommodityId,
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
    /// Hours of discharge at full power that the reservoir holds.
    pub energy_to_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TechEcon {
    pub capex_annuity: f64,
    pub opex_var: f64,
    /// Negative: consumed per unit activity; positive: produced.
    pub conversion: BTreeMap<CommodityId, f64>,
    pub capacity_bounds: (f64, f64),
    pub storage: Option<StorageSpec>,
    pub profile_ref: Option<String>,
}

impl TechEcon {
    /// Plain converter with the given conversion map and no bounds.
    pub fn new(capex_annuity: f64, opex_var: f64, conversion: impl IntoIterator<Item = (CommodityId, f64)>) -> Self {
        Self {
            capex_annuity,
            opex_var,
            conversion: conversion.into_iter().collect(),
            capacity_bounds: (0.0, f64::INFINITY),
            storage: None,
            profile_ref: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TechnoEconomics {
    pub techs: BTreeMap<TechId, TechEcon>,
}

#[derive(Debug, Clone)]
pub struct SizingProblem {
    pub hub: Hub,
    pub econ: TechnoEconomics,
    pub profiles: BTreeMap<String, Profile>,
    pub demands: Vec<DemandSpec>,
    pub horizon: Horizon,
    pub boundary: StorageBoundary,
}

impl SizingProblem {
    /// Builds a problem from a parsed annex, resolving every referenced
    /// profile through `source`.
    pub fn from_annex(hub: Hub, annex: Annex, source: &ProfileSource) -> Result<Self, OptimizeError> {
        let mut profiles = BTreeMap::new();
        for econ in annex.econ.techs.values() {
            if let Some(id) = &econ.profile_ref {
                if !profiles.contains_key(id) {
                    profiles.insert(id.clone(), source.resolve(id, annex.horizon.steps)?);
                }
            }
        }
        Self::new(hub, annex.econ, profiles, annex.demands, annex.horizon, annex.boundary)
    }

    /// Checks the problem invariants; demand reachability is checked later
    /// by [`build_lp`].
    pub fn new(
        hub: Hub,
        econ: TechnoEconomics,
        profiles: BTreeMap<String, Profile>,
        demands: Vec<DemandSpec>,
        horizon: Horizon,
        boundary: StorageBoundary,
    ) -> Result<Self, OptimizeError> {
        let report = validate(&hub);
        if !report.is_valid() {
            return Err(OptimizeError::InvalidHub(report.errors.len()));
        }
        if horizon.steps == 0 || !(horizon.step_hours > 0.0 && horizon.step_hours.is_finite()) {
            return Err(OptimizeError::Annex("horizon needs ≥ 1 step of positive length".into()));
        }
        for t in hub.technologies() {
            match econ.techs.get(&t.id) {
                None if t.kind == TechnologyKind::Generic => {
                    return Err(OptimizeError::UncoveredTechnology(t.id.clone()))
                }
                None => {}
                Some(e) => check_econ(t, e)?,
            }
        }
        for id in econ.techs.keys() {
            if !hub.graph().contains(id) {
                return Err(OptimizeError::InvalidEntry {
                    tech: id.to_string(),
                    reason: "no such technology in the hub".into(),
                });
            }
        }
        for e in econ.techs.values() {
            if let Some(p) = &e.profile_ref {
                let Some(profile) = profiles.get(p) else {
                    return Err(OptimizeError::Profile {
                        id: p.clone(),
                        reason: "referenced but not provided".into(),
                    });
                };
                if profile.values.len() < horizon.steps {
                    return Err(OptimizeError::Profile {
                        id: p.clone(),
                        reason: format!(
                            "has {} values but the horizon has {} steps",
                            profile.values.len(),
                            horizon.steps
                        ),
                    });
                }
            }
        }
        let sinks_for: BTreeSet<&CommodityId> = hub
            .set(SetName::E)
            .iter()
            .chain(hub.set(SetName::O))
            .collect();
        for d in &demands {
            let bad = |reason: &str| OptimizeError::InvalidDemand {
                commodity: d.commodity.clone(),
                reason: reason.to_string(),
            };
            if !(d.quantity.is_finite() && d.quantity >= 0.0) {
                return Err(bad("quantity must be a finite number ≥ 0"));
            }
            if !sinks_for.contains(&d.commodity) {
                return Err(bad("commodity is neither exported nor used by a local opportunity"));
            }
        }
        Ok(Self {
            hub,
            econ,
            profiles,
            demands,
            horizon,
            boundary,
        })
    }

    /// Copy with every demand quantity multiplied by `factor`.
    pub fn scaled_demand(&self, factor: f64) -> Self {
        let mut p = self.clone();
        for d in &mut p.demands {
            d.quantity *= factor;
        }
        p
    }

    /// Copy with demands for the same commodity replaced by `spec`.
    pub fn with_demand(&self, spec: DemandSpec) -> Self {
        let mut p = self.clone();
        p.demands.retain(|d| d.commodity != spec.commodity);
        p.demands.push(spec);
        p
    }

    /// Copy with every cost multiplied by `factor`.
    pub fn scaled_costs(&self, factor: f64) -> Self {
        let mut p = self.clone();
        for e in p.econ.techs.values_mut() {
            e.capex_annuity *= factor;
            e.opex_var *= factor;
        }
        p
    }

    fn availability(&self, id: &TechId, step: usize) -> f64 {
        self.econ
            .techs
            .get(id)
            .and_then(|e| e.profile_ref.as_ref())
            .and_then(|p| self.profiles.get(p))
            .map_or(1.0, |p| p.values[step])
    }
}

fn check_econ(t: &Technology, e: &TechEcon) -> Result<(), OptimizeError> {
    let bad = |reason: String| OptimizeError::InvalidEntry {
        tech: t.id.to_string(),
        reason,
    };
    for (c, v) in &e.conversion {
        let ok = (*v <= 0.0 && t.inputs.contains(c)) || (*v >= 0.0 && t.outputs.contains(c));
        if !ok {
            return Err(bad(format!("conversion {c} = {v} does not match the technology's ports")));
        }
    }
    if e.capex_annuity < 0.0 || e.opex_var < 0.0 {
        return Err(bad("costs must be ≥ 0".into()));
    }
    if !(e.capacity_bounds.0 >= 0.0 && e.capacity_bounds.0 <= e.capacity_bounds.1) {
        return Err(bad("capacity bounds must satisfy 0 ≤ min ≤ max".into()));
    }
    if let Some(s) = &e.storage {
        if !(t.inputs.contains(&s.commodity) && t.outputs.contains(&s.commodity)) {
            return Err(bad(format!("storage commodity {} must be both input and output", s.commodity)));
        }
    }
    Ok(())
}

fn out_coef(t: &Technology, e: Option<&TechEcon>, c: &CommodityId) -> f64 {
    match e.and_then(|e| e.conversion.get(c)) {
        Some(v) => v.max(0.0),
        None if t.kind == TechnologyKind::Import => 1.0,
        None => 0.0,
    }
}

fn in_coef(t: &Technology, e: Option<&TechEcon>, c: &CommodityId) -> f64 {
    match e.and_then(|e| e.conversion.get(c)) {
        Some(v) => (-v).max(0.0),
        None if t.kind.is_sink() => 1.0,
        None => 0.0,
    }
}

/// Sources are import technologies and generic technologies without inputs.
/// A demand is reachable when some sink consuming its commodity is fed, over
/// simple edges carrying that commodity, by a technology reachable from a
/// source. Only connectivity is checked, not that every input is supplied.
pub fn check_reachability(hub: &Hub, demands: &[DemandSpec]) -> Result<(), OptimizeError> {
    let edges = expand_hyperedges(hub.graph()).unwrap_or_default();
    let mut reached: BTreeSet<&TechId> = hub
        .technologies()
        .iter()
        .filter(|t| {
            t.kind == TechnologyKind::Import
                || (t.kind == TechnologyKind::Generic && t.inputs.is_empty())
        })
        .map(|t| &t.id)
        .collect();
    loop {
        let before = reached.len();
        for e in &edges {
            if reached.contains(&e.producer) {
                reached.insert(&e.consumer);
            }
        }
        if reached.len() == before {
            break;
        }
    }
    for d in demands {
        let sinks: BTreeSet<&TechId> = hub
            .technologies()
            .iter()
            .filter(|t| t.kind.is_sink() && t.inputs.contains(&d.commodity))
            .map(|t| &t.id)
            .collect();
        let fed = edges.iter().any(|e| {
            e.commodity == d.commodity && sinks.contains(&e.consumer) && reached.contains(&e.producer)
        });
        if fed {
            continue;
        }
        let mut upstream: BTreeSet<&TechId> = sinks.clone();
        loop {
            let before = upstream.len();
            for e in &edges {
                if upstream.contains(&e.consumer) {
                    upstream.insert(&e.producer);
                }
            }
            if upstream.len() == before {
                break;
            }
        }
        let cut = upstream
            .into_iter()
            .filter(|t| !reached.contains(t) || sinks.contains(t))
            .cloned()
            .collect();
        return Err(OptimizeError::UnreachableDemand {
            commodity: d.commodity.clone(),
            cut,
        });
    }
    Ok(())
}

/// Variable and row positions of a built LP.
///
/// Variables are laid out in this order: capacities `K` of generic
/// technologies; activities `x[t, τ]` of every technology; storage charge
/// `y[t, τ]`; storage levels `s[t, τ]` for `τ = 0..=T`; flows `f[e, τ]`
/// per expanded simple edge; disposal `d[t, c, τ]` per byproduct pair.
/// Technologies are in id order, edges in expansion order, and the time
/// index is innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct LpLayout {
    pub steps: usize,
    pub capacity: BTreeMap<TechId, usize>,
    pub activity: BTreeMap<TechId, usize>,
    pub charge: BTreeMap<TechId, usize>,
    pub level: BTreeMap<TechId, usize>,
    pub flows: Vec<(SimpleEdge, usize)>,
    pub disposal: Vec<((TechId, CommodityId), usize)>,
    /// Port balance rows, one per (technology, commodity, step).
    pub balance_rows: Vec<usize>,
    /// Rows bounding activity (or charge) by available capacity.
    pub capacity_rows: Vec<usize>,
    /// Storage recursion and boundary rows.
    pub storage_rows: Vec<usize>,
    pub demand_rows: Vec<usize>,
}

impl LpLayout {
    pub fn activity_at(&self, t: &TechId, step: usize) -> Option<usize> {
        self.activity.get(t).map(|s| s + step)
    }
}

pub fn build_lp(problem: &SizingProblem) -> Result<(Lp, LpLayout), OptimizeError> {
    let hub = &problem.hub;
    check_reachability(hub, &problem.demands)?;
    let steps = problem.horizon.steps;
    let dt = problem.horizon.step_hours;
    let econ = |id: &TechId| problem.econ.techs.get(id);
    let storage = |id: &TechId| econ(id).and_then(|e| e.storage.as_ref());

    let mut lp = Lp::default();
    let mut layout = LpLayout {
        steps,
        capacity: BTreeMap::new(),
        activity: BTreeMap::new(),
        charge: BTreeMap::new(),
        level: BTreeMap::new(),
        flows: Vec::new(),
        disposal: Vec::new(),
        balance_rows: Vec::new(),
        capacity_rows: Vec::new(),
        storage_rows: Vec::new(),
        demand_rows: Vec::new(),
    };

    for t in hub.technologies() {
        if t.kind == TechnologyKind::Generic {
            let e = econ(&t.id).expect("generic technologies are covered");
            let (lo, hi) = e.capacity_bounds;
            let k = lp.add_var(format!("K[{}]", t.id), e.capex_annuity, lo, hi);
            layout.capacity.insert(t.id.clone(), k);
        }
    }
    for t in hub.technologies() {
        let opex = econ(&t.id).map_or(0.0, |e| e.opex_var);
        let start = lp.num_vars();
        for s in 0..steps {
            lp.add_var(format!("x[{},{s}]", t.id), opex * dt, 0.0, f64::INFINITY);
        }
        layout.activity.insert(t.id.clone(), start);
    }
    for t in hub.technologies() {
        if storage(&t.id).is_some() {
            let start = lp.num_vars();
            for s in 0..steps {
                lp.add_var(format!("y[{},{s}]", t.id), 0.0, 0.0, f64::INFINITY);
            }
            layout.charge.insert(t.id.clone(), start);
        }
    }
    for t in hub.technologies() {
        if storage(&t.id).is_some() {
            let start = lp.num_vars();
            for s in 0..=steps {
                lp.add_var(format!("s[{},{s}]", t.id), 0.0, 0.0, f64::INFINITY);
            }
            layout.level.insert(t.id.clone(), start);
        }
    }
    for e in expand_hyperedges(hub.graph()).unwrap_or_default() {
        let start = lp.num_vars();
        for s in 0..steps {
            lp.add_var(
                format!("f[{}->{}:{},{s}]", e.producer, e.consumer, e.commodity),
                0.0,
                0.0,
                f64::INFINITY,
            );
        }
        layout.flows.push((e, start));
    }
    for (t, c) in byproduct_pairs(hub.graph()) {
        let start = lp.num_vars();
        for s in 0..steps {
            lp.add_var(format!("d[{t}:{c},{s}]"), 0.0, 0.0, f64::INFINITY);
        }
        layout.disposal.push(((t, c), start));
    }

    // Port balances.
    for t in hub.technologies() {
        let e = econ(&t.id);
        let x0 = layout.activity[&t.id];
        let st = storage(&t.id);
        for c in &t.outputs {
            let is_store = st.is_some_and(|s| &s.commodity == c);
            let coef = if is_store { 1.0 } else { out_coef(t, e, c) };
            let outgoing: Vec<usize> = layout
                .flows
                .iter()
                .filter(|(f, _)| f.producer == t.id && &f.commodity == c)
                .map(|(_, start)| *start)
                .collect();
            let disposal = layout
                .disposal
                .iter()
                .find(|((p, pc), _)| p == &t.id && pc == c)
                .map(|(_, start)| *start);
            if coef == 0.0 && outgoing.is_empty() && disposal.is_none() {
                continue;
            }
            for s in 0..steps {
                let mut row = vec![(x0 + s, coef)];
                row.extend(outgoing.iter().map(|f| (f + s, -1.0)));
                row.extend(disposal.map(|d| (d + s, -1.0)));
                let r = lp.add_row(format!("out[{},{c},{s}]", t.id), row, Sense::Eq, 0.0);
                layout.balance_rows.push(r);
            }
        }
        for c in &t.inputs {
            let is_store = st.is_some_and(|s| &s.commodity == c);
            let (var0, coef) = if is_store {
                (layout.charge[&t.id], 1.0)
            } else {
                (x0, in_coef(t, e, c))
            };
            let incoming: Vec<usize> = layout
                .flows
                .iter()
                .filter(|(f, _)| f.consumer == t.id && &f.commodity == c)
                .map(|(_, start)| *start)
                .collect();
            if coef == 0.0 && incoming.is_empty() {
                continue;
            }
            for s in 0..steps {
                let mut row = vec![(var0 + s, -coef)];
                row.extend(incoming.iter().map(|f| (f + s, 1.0)));
                let r = lp.add_row(format!("in[{},{c},{s}]", t.id), row, Sense::Eq, 0.0);
                layout.balance_rows.push(r);
            }
        }
    }

    // Capacity and storage.
    for (id, &k) in &layout.capacity {
        let x0 = layout.activity[id];
        for s in 0..steps {
            let a = problem.availability(id, s);
            let r = lp.add_row(format!("cap[{id},{s}]"), [(x0 + s, 1.0), (k, -a)], Sense::Le, 0.0);
            layout.capacity_rows.push(r);
        }
        if let Some(st) = storage(id) {
            let y0 = layout.charge[id];
            let s0 = layout.level[id];
            for s in 0..steps {
                let a = problem.availability(id, s);
                let r = lp.add_row(format!("chg[{id},{s}]"), [(y0 + s, 1.0), (k, -a)], Sense::Le, 0.0);
                layout.capacity_rows.push(r);
            }
            for s in 0..=steps {
                let r = lp.add_row(
                    format!("soc[{id},{s}]"),
                    [(s0 + s, 1.0), (k, -st.energy_to_power)],
                    Sense::Le,
                    0.0,
                );
                layout.capacity_rows.push(r);
            }
            for s in 0..steps {
                let r = lp.add_row(
                    format!("store[{id},{s}]"),
                    [
                        (s0 + s + 1, 1.0),
                        (s0 + s, -1.0),
                        (y0 + s, -dt * st.charge_efficiency),
                        (x0 + s, dt / st.discharge_efficiency),
                    ],
                    Sense::Eq,
                    0.0,
                );
                layout.storage_rows.push(r);
            }
            let boundary = match problem.boundary {
                StorageBoundary::Cyclic => vec![(s0, 1.0), (s0 + steps, -1.0)],
                StorageBoundary::FreeStartZero => vec![(s0, 1.0)],
            };
            let r = lp.add_row(format!("soc0[{id}]"), boundary, Sense::Eq, 0.0);
            layout.storage_rows.push(r);
        }
    }

    // Demand.
    for d in &problem.demands {
        let sinks: Vec<(usize, f64)> = hub
            .technologies()
            .iter()
            .filter(|t| t.kind.is_sink() && t.inputs.contains(&d.commodity))
            .map(|t| (layout.activity[&t.id], dt * in_coef(t, econ(&t.id), &d.commodity)))
            .collect();
        match d.target {
            DemandTarget::PerStep => {
                for s in 0..steps {
                    let r = lp.add_row(
                        format!("demand[{},{s}]", d.commodity),
                        sinks.iter().map(|&(x0, a)| (x0 + s, a)),
                        Sense::Eq,
                        d.quantity,
                    );
                    layout.demand_rows.push(r);
                }
            }
            DemandTarget::Total => {
                let r = lp.add_row(
                    format!("demand[{}]", d.commodity),
                    sinks.iter().flat_map(|&(x0, a)| (0..steps).map(move |s| (x0 + s, a))),
                    Sense::Eq,
                    d.quantity,
                );
                layout.demand_rows.push(r);
            }
        }
    }
    Ok((lp, layout))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizingSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub capacities: BTreeMap<TechId, f64>,
    pub activities: BTreeMap<TechId, Vec<f64>>,
    pub charges: BTreeMap<TechId, Vec<f64>>,
    pub storage_levels: BTreeMap<TechId, Vec<f64>>,
    pub flows: Vec<(SimpleEdge, Vec<f64>)>,
    pub disposal: BTreeMap<(TechId, CommodityId), Vec<f64>>,
    /// `(capex, opex)` per technology.
    pub cost_breakdown: BTreeMap<TechId, (f64, f64)>,
    /// Row duals, when optimal.
    pub duals: Option<Vec<f64>>,
    pub certificate: Option<Certificate>,
    /// Whether the certificate passed its independent check.
    pub certificate_verified: bool,
    pub lp: LpSolution,
}

impl SizingSolution {
    fn extract(problem: &SizingProblem, lp: &Lp, layout: &LpLayout, sol: LpSolution) -> Self {
        let mut out = SizingSolution {
            status: sol.status,
            objective: sol.objective,
            capacities: BTreeMap::new(),
            activities: BTreeMap::new(),
            charges: BTreeMap::new(),
            storage_levels: BTreeMap::new(),
            flows: Vec::new(),
            disposal: BTreeMap::new(),
            cost_breakdown: BTreeMap::new(),
            duals: None,
            certificate: sol.certificate.clone(),
            certificate_verified: false,
            lp: sol,
        };
        let tol = 1e-7;
        match (&out.status, &out.certificate) {
            (LpStatus::Optimal, _) => {}
            (_, Some(Certificate::Farkas { y })) => out.certificate_verified = verify_farkas(lp, y, tol),
            (_, Some(Certificate::Ray { point, direction })) => {
                out.certificate_verified = verify_ray(lp, point, direction, tol)
            }
            _ => {}
        }
        if out.status != LpStatus::Optimal {
            return out;
        }
        let x = &out.lp.x;
        let steps = layout.steps;
        let series = |start: usize, len: usize| x[start..start + len].to_vec();
        for (id, &k) in &layout.capacity {
            out.capacities.insert(id.clone(), x[k]);
        }
        for (id, &start) in &layout.activity {
            out.activities.insert(id.clone(), series(start, steps));
        }
        for (id, &start) in &layout.charge {
            out.charges.insert(id.clone(), series(start, steps));
        }
        for (id, &start) in &layout.level {
            out.storage_levels.insert(id.clone(), series(start, steps + 1));
        }
        for (e, start) in &layout.flows {
            out.flows.push((e.clone(), series(*start, steps)));
        }
        for (pair, start) in &layout.disposal {
            out.disposal.insert(pair.clone(), series(*start, steps));
        }
        let dt = problem.horizon.step_hours;
        for t in problem.hub.technologies() {
            let e = problem.econ.techs.get(&t.id);
            let capex = e.map_or(0.0, |e| e.capex_annuity) * out.capacities.get(&t.id).copied().unwrap_or(0.0);
            let opex = e.map_or(0.0, |e| e.opex_var) * dt * out.activities[&t.id].iter().sum::<f64>();
            out.cost_breakdown.insert(t.id.clone(), (capex, opex));
        }
        out.duals = Some(out.lp.y.clone());
        out
    }

    /// Largest port-balance residual.
    pub fn balance_residual(&self, lp: &Lp, layout: &LpLayout) -> f64 {
        layout
            .balance_rows
            .iter()
            .map(|&r| lp.rows[r].violation(&self.lp.x))
            .fold(0.0, f64::max)
    }
}

/// Builds and solves the sizing LP.
pub fn solve(problem: &SizingProblem, opts: &SolverOptions) -> Result<SizingSolution, OptimizeError> {
    let (lp, layout) = build_lp(problem)?;
    let sol = solve_lp(&lp, opts)?;
    Ok(SizingSolution::extract(problem, &lp, &layout, sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::model::commodity;

    const GREENLAND: &str = r#"hub "g" {
  location l1 { name = "G"; potential = wind: high; demand = low; }
  tech Wind@l1 { in: ; out: electricity; }
  tech import@l1 kind import { in: ; out: H2O; }
  tech electrolyzer@l1 { in: electricity, H2O; out: H2, O2; }
  tech export@l1 kind export { in: H2; out: ; }
  flows {
    flow electricity { from: Wind@l1; to: electrolyzer@l1; }
    flow H2O { from: import@l1; to: electrolyzer@l1; }
    flow O2 { from: electrolyzer@l1; to: ; }
    flow H2 { from: electrolyzer@l1; to: export@l1; }
  }
}"#;

    fn id(s: &str) -> TechId {
        TechId::parse(s).unwrap()
    }

    fn greenland(steps: usize, demand: f64) -> SizingProblem {
        let hub = parse(GREENLAND, "g").unwrap().hub;
        let mut econ = TechnoEconomics::default();
        econ.techs.insert(id("Wind@l1"), TechEcon::new(10.0, 0.0, [(commodity("electricity"), 1.0)]));
        econ.techs.insert(
            id("electrolyzer@l1"),
            TechEcon::new(
                10.0,
                0.0,
                [
                    (commodity("electricity"), -1.0),
                    (commodity("H2O"), -1.0),
                    (commodity("H2"), 1.0),
                    (commodity("O2"), 0.5),
                ],
            ),
        );
        SizingProblem::new(
            hub,
            econ,
            BTreeMap::new(),
            vec![DemandSpec {
                commodity: commodity("H2"),
                quantity: demand,
                target: DemandTarget::PerStep,
            }],
            Horizon { steps, step_hours: 1.0 },
            StorageBoundary::Cyclic,
        )
        .unwrap()
    }

    #[test]
    fn greenland_variable_counts() {
        let (lp, layout) = build_lp(&greenland(2, 1.0)).unwrap();
        // 2 capacities + 4·2 activities + 3·2 flows + 1·2 disposal
        assert_eq!(lp.num_vars(), 2 + 8 + 6 + 2);
        assert_eq!(layout.capacity.len(), 2);
        assert_eq!(layout.flows.len(), 3);
        assert_eq!(layout.disposal.len(), 1);
        assert_eq!(lp.names[0], "K[Wind@l1]");
        assert_eq!(lp.names[2], "x[Wind@l1,0]");
        assert_eq!(layout.demand_rows.len(), 2);
    }

    #[test]
    fn greenland_solves_with_o2_disposal() {
        let sol = solve(&greenland(2, 1.0), &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 20.0).abs() < 1e-9);
        let d = &sol.disposal[&(id("electrolyzer@l1"), commodity("O2"))];
        assert!(d.iter().all(|v| (v - 0.5).abs() < 1e-9));
        assert!((sol.activities[&id("import@l1")][0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_demand_is_all_zero() {
        let sol = solve(&greenland(3, 0.0), &SolverOptions::default()).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert!(sol.lp.x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn unreachable_demand_names_the_cut() {
        let src = GREENLAND.replace("flow electricity { from: Wind@l1; to: electrolyzer@l1; }\n", "")
            .replace("flow H2O { from: import@l1; to: electrolyzer@l1; }\n", "");
        let hub = parse(&src, "g").unwrap().hub;
        let e = check_reachability(
            &hub,
            &[DemandSpec {
                commodity: commodity("H2"),
                quantity: 1.0,
                target: DemandTarget::Total,
            }],
        )
        .unwrap_err();
        match e {
            OptimizeError::UnreachableDemand { commodity: c, cut } => {
                assert_eq!(c, commodity("H2"));
                assert_eq!(cut, vec![id("electrolyzer@l1"), id("export@l1")]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn demand_specs_parse() {
        let d: DemandSpec = "H2:2.5".parse().unwrap();
        assert_eq!((d.quantity, d.target), (2.5, DemandTarget::PerStep));
        let d: DemandSpec = "sea water:3:total".parse().unwrap();
        assert_eq!(d.commodity, commodity("sea water"));
        assert_eq!(d.target, DemandTarget::Total);
        assert!("H2".parse::<DemandSpec>().is_err());
        assert!("H2:x".parse::<DemandSpec>().is_err());
    }

    #[test]
    fn demand_must_target_a_sink_commodity() {
        let p = greenland(1, 1.0);
        let err = SizingProblem::new(
            p.hub.clone(),
            p.econ.clone(),
            BTreeMap::new(),
            vec![DemandSpec {
                commodity: commodity("O2"),
                quantity: 1.0,
                target: DemandTarget::PerStep,
            }],
            p.horizon,
            p.boundary,
        )
        .unwrap_err();
        assert!(matches!(err, OptimizeError::InvalidDemand { .. }));
    }
}
