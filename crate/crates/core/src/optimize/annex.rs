//! Techno-economic annex files (`*.econ.toml`).
//!
//! ```toml
//! [horizon]                 # optional; defaults: steps = 24, step_hours = 1
//! steps = 4
//! step_hours = 1.0
//!
//! [options]                 # optional
//! storage_boundary = "cyclic"        # or "free-start-zero"
//!
//! [[demand]]
//! commodity = "H2"
//! quantity = 1.0
//! target = "per_step"                # or "total"
//!
//! [tech."electrolyzer@l1"]
//! capex_annuity = 10.0               # per unit capacity over the horizon
//! opex_var = 0.0                     # per unit activity and hour
//! capacity_bounds = [0.0, 50.0]      # optional; default [0, unbounded)
//! profile_ref = "wind"               # optional availability profile
//! conversion = { electricity = -1.0, H2 = 1.0 }
//!
//! [tech."Battery@l1".storage]
//! commodity = "electricity"
//! charge_efficiency = 0.95
//! discharge_efficiency = 0.95
//! energy_to_power = 4.0
//! ```
//!
//! Keys are matched exactly and unknown keys are rejected. Commodity keys
//! that are not bare words are quoted (`"sea water" = -1.0`).

use std::collections::BTreeMap;

use serde::Deserialize;

use super::problem::{DemandSpec, DemandTarget, Horizon, StorageSpec, TechEcon, TechnoEconomics};
use super::OptimizeError;
use crate::model::{CommodityId, Hub, TechId, TechnologyKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StorageBoundary {
    /// `s_0 = s_T`.
    #[default]
    Cyclic,
    /// `s_0 = 0`, end level free.
    FreeStartZero,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct HorizonToml {
    steps: usize,
    #[serde(default = "one")]
    step_hours: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionsToml {
    #[serde(default)]
    storage_boundary: StorageBoundary,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemandToml {
    commodity: String,
    quantity: f64,
    #[serde(default)]
    target: TargetToml,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum TargetToml {
    #[default]
    PerStep,
    Total,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct StorageToml {
    commodity: String,
    charge_efficiency: f64,
    discharge_efficiency: f64,
    energy_to_power: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TechToml {
    capex_annuity: Option<f64>,
    #[serde(default)]
    opex_var: f64,
    capacity_bounds: Option<Vec<f64>>,
    profile_ref: Option<String>,
    #[serde(default)]
    conversion: BTreeMap<String, f64>,
    storage: Option<StorageToml>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnexToml {
    horizon: Option<HorizonToml>,
    #[serde(default)]
    options: OptionsToml,
    #[serde(default)]
    demand: Vec<DemandToml>,
    #[serde(default)]
    tech: BTreeMap<String, TechToml>,
}

/// A parsed annex, checked against a hub.
#[derive(Debug, Clone, PartialEq)]
pub struct Annex {
    pub horizon: Horizon,
    pub boundary: StorageBoundary,
    pub demands: Vec<DemandSpec>,
    pub econ: TechnoEconomics,
}

fn entry(tech: &str, reason: impl Into<String>) -> OptimizeError {
    OptimizeError::InvalidEntry {
        tech: tech.to_string(),
        reason: reason.into(),
    }
}

fn nonneg(tech: &str, what: &str, v: f64) -> Result<f64, OptimizeError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(entry(tech, format!("{what} must be a finite number ≥ 0, got {v}")))
    }
}

fn commodity(tech: &str, raw: &str) -> Result<CommodityId, OptimizeError> {
    CommodityId::new(raw).map_err(|e| entry(tech, e.to_string()))
}

/// Parses annex text and checks it against `hub`: every generic technology
/// must be covered, conversion keys must be commodities the technology
/// actually consumes (negative) or produces (positive), and cost, bound
/// and storage settings are only allowed on generic technologies.
pub fn parse_annex(text: &str, hub: &Hub) -> Result<Annex, OptimizeError> {
    let raw: AnnexToml = toml::from_str(text).map_err(|e| OptimizeError::Annex(e.to_string().trim_end().to_string()))?;

    let horizon = match raw.horizon {
        Some(h) => {
            if h.steps == 0 {
                return Err(OptimizeError::Annex("horizon.steps must be ≥ 1".into()));
            }
            if !(h.step_hours.is_finite() && h.step_hours > 0.0) {
                return Err(OptimizeError::Annex("horizon.step_hours must be > 0".into()));
            }
            Horizon {
                steps: h.steps,
                step_hours: h.step_hours,
            }
        }
        None => Horizon::default(),
    };

    let mut demands = Vec::new();
    for d in raw.demand {
        let c = CommodityId::new(&d.commodity).map_err(|e| OptimizeError::Annex(e.to_string()))?;
        demands.push(DemandSpec {
            commodity: c,
            quantity: d.quantity,
            target: match d.target {
                TargetToml::PerStep => DemandTarget::PerStep,
                TargetToml::Total => DemandTarget::Total,
            },
        });
    }

    let all_c = hub.set(crate::model::SetName::C);
    let mut techs = BTreeMap::new();
    for (key, t) in raw.tech {
        let id = TechId::parse(&key).map_err(|_| entry(&key, "expected `name@location`"))?;
        let Some(tech) = hub.graph().get(&id) else {
            return Err(entry(&key, "no such technology in the hub"));
        };
        let generic = tech.kind == TechnologyKind::Generic;
        if !generic && (t.capex_annuity.is_some() || t.capacity_bounds.is_some() || t.storage.is_some() || t.profile_ref.is_some()) {
            return Err(entry(
                &key,
                format!("{} technologies have no capacity; only opex_var and conversion may be set", tech.kind),
            ));
        }
        let capex = nonneg(&key, "capex_annuity", t.capex_annuity.unwrap_or(0.0))?;
        let opex = nonneg(&key, "opex_var", t.opex_var)?;
        let bounds = match t.capacity_bounds.as_deref() {
            None => (0.0, f64::INFINITY),
            Some([lo, hi]) => {
                let lo = nonneg(&key, "capacity_bounds[0]", *lo)?;
                if hi.is_nan() || *hi < lo {
                    return Err(entry(&key, "capacity_bounds must satisfy min ≤ max"));
                }
                (lo, *hi)
            }
            Some(_) => return Err(entry(&key, "capacity_bounds must be [min, max]")),
        };

        let mut conversion = BTreeMap::new();
        for (c_raw, v) in &t.conversion {
            let c = commodity(&key, c_raw)?;
            if !all_c.contains(&c) {
                return Err(entry(&key, format!("conversion key {c} is not a commodity of the hub")));
            }
            if !v.is_finite() {
                return Err(entry(&key, format!("conversion for {c} must be finite")));
            }
            let ok = (*v < 0.0 && tech.inputs.contains(&c))
                || (*v > 0.0 && tech.outputs.contains(&c))
                || *v == 0.0 && (tech.inputs.contains(&c) || tech.outputs.contains(&c));
            if !ok {
                let side = if *v < 0.0 { "an input" } else { "an output" };
                return Err(entry(&key, format!("conversion {c} = {v} but {c} is not {side} of the technology")));
            }
            conversion.insert(c, *v);
        }

        let storage = match t.storage {
            None => None,
            Some(s) => {
                let c = commodity(&key, &s.commodity)?;
                if !(tech.inputs.contains(&c) && tech.outputs.contains(&c)) {
                    return Err(entry(&key, format!("storage commodity {c} must be both an input and an output")));
                }
                if conversion.contains_key(&c) {
                    return Err(entry(&key, format!("storage commodity {c} must not have a conversion entry")));
                }
                for (name, eta) in [("charge_efficiency", s.charge_efficiency), ("discharge_efficiency", s.discharge_efficiency)] {
                    if !(eta > 0.0 && eta <= 1.0) {
                        return Err(entry(&key, format!("{name} must be in (0, 1], got {eta}")));
                    }
                }
                let e2p = nonneg(&key, "energy_to_power", s.energy_to_power)?;
                Some(StorageSpec {
                    commodity: c,
                    charge_efficiency: s.charge_efficiency,
                    discharge_efficiency: s.discharge_efficiency,
                    energy_to_power: e2p,
                })
            }
        };
        if generic && conversion.is_empty() && storage.is_none() {
            return Err(entry(&key, "generic technologies need at least one conversion entry"));
        }
        techs.insert(
            id,
            TechEcon {
                capex_annuity: capex,
                opex_var: opex,
                conversion,
                capacity_bounds: bounds,
                storage,
                profile_ref: t.profile_ref,
            },
        );
    }
    for t in hub.technologies() {
        if t.kind == TechnologyKind::Generic && !techs.contains_key(&t.id) {
            return Err(OptimizeError::UncoveredTechnology(t.id.clone()));
        }
    }
    Ok(Annex {
        horizon,
        boundary: raw.options.storage_boundary,
        demands,
        econ: TechnoEconomics { techs },
    })
}
