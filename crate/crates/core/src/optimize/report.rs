use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::lp::LpStatus;
use super::problem::{SizingProblem, SizingSolution};
use super::OptimizeError;
use crate::model::{TechId, TechnologyKind};

pub const SIZING_SCHEMA: &str = "rreh-sizing/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

/// At most six decimals, trailing zeros trimmed; magnitudes below 1e-9
/// print as `0`.
pub fn format_number(v: f64) -> String {
    trimmed(v, 6)
}

fn trimmed(v: f64, decimals: usize) -> String {
    if v.abs() < 1e-9 {
        return "0".into();
    }
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.truncate(s.trim_end_matches('0').trim_end_matches('.').len());
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn clean(v: f64) -> f64 {
    if v.abs() < 1e-9 {
        0.0
    } else {
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Utilization {
    Factor(f64),
    Idle,
    NotApplicable,
}

impl Utilization {
    fn render(&self) -> String {
        match self {
            Utilization::Factor(f) => format_number(*f),
            Utilization::Idle => "idle".into(),
            Utilization::NotApplicable => "-".into(),
        }
    }
}

impl Serialize for Utilization {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Utilization::Factor(f) => s.serialize_f64(clean(*f)),
            Utilization::Idle => s.serialize_str("idle"),
            Utilization::NotApplicable => s.serialize_str("-"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct Driver {
    tech: String,
    capacity: Option<f64>,
    capex: f64,
    opex: f64,
    total: f64,
    /// Percent of the summed cost.
    share: f64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct SizingJson<'a> {
    schema: &'a str,
    status: &'a str,
    objective: f64,
    capacities: BTreeMap<String, f64>,
    cost_breakdown: Vec<Driver>,
    utilization: BTreeMap<String, Utilization>,
    disposal: BTreeMap<String, f64>,
}

fn drivers(sol: &SizingSolution) -> Vec<Driver> {
    let grand: f64 = sol.cost_breakdown.values().map(|(c, o)| c + o).sum();
    let mut out: Vec<Driver> = sol
        .cost_breakdown
        .iter()
        .filter(|(_, (c, o))| c + o > 1e-9)
        .map(|(id, &(capex, opex))| Driver {
            tech: id.to_string(),
            capacity: sol.capacities.get(id).map(|k| clean(*k)),
            capex: clean(capex),
            opex: clean(opex),
            total: clean(capex + opex),
            share: 100.0 * (capex + opex) / grand,
        })
        .collect();
    out.sort_by(|a, b| b.total.total_cmp(&a.total).then_with(|| a.tech.cmp(&b.tech)));
    out
}

fn utilization(sol: &SizingSolution, problem: &SizingProblem) -> BTreeMap<TechId, Utilization> {
    problem
        .hub
        .technologies()
        .iter()
        .map(|t| {
            let x = &sol.activities[&t.id];
            let busy = x.iter().any(|v| v.abs() > 1e-9);
            let u = if t.kind == TechnologyKind::Generic {
                let k = sol.capacities.get(&t.id).copied().unwrap_or(0.0);
                if k.abs() <= 1e-9 {
                    Utilization::Idle
                } else {
                    Utilization::Factor(x.iter().map(|v| v / k).sum::<f64>() / x.len() as f64)
                }
            } else if busy {
                Utilization::NotApplicable
            } else {
                Utilization::Idle
            };
            (t.id.clone(), u)
        })
        .collect()
}

fn disposal_totals(sol: &SizingSolution, problem: &SizingProblem) -> BTreeMap<String, f64> {
    let dt = problem.horizon.step_hours;
    let mut out = BTreeMap::new();
    for ((_, c), series) in &sol.disposal {
        *out.entry(c.to_string()).or_insert(0.0) += dt * series.iter().sum::<f64>();
    }
    out
}

fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let mut line = String::from(" ");
        for (c, cell) in r.iter().enumerate() {
            let _ = write!(line, " {cell:<w$}", w = widths[c]);
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Renders an optimal solution.
pub fn report(sol: &SizingSolution, problem: &SizingProblem, format: ReportFormat) -> Result<String, OptimizeError> {
    if sol.status != LpStatus::Optimal {
        return Err(OptimizeError::NotOptimal(sol.status));
    }
    let drivers = drivers(sol);
    let util = utilization(sol, problem);
    let disposal = disposal_totals(sol, problem);
    match format {
        ReportFormat::Json => {
            let doc = SizingJson {
                schema: SIZING_SCHEMA,
                status: sol.status.as_str(),
                objective: clean(sol.objective),
                capacities: sol.capacities.iter().map(|(k, v)| (k.to_string(), clean(*v))).collect(),
                cost_breakdown: drivers,
                utilization: util.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
                disposal: disposal.into_iter().map(|(k, v)| (k, clean(v))).collect(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["tech", "timestep", "activity"]).expect("in-memory write");
            for (id, series) in &sol.activities {
                for (s, v) in series.iter().enumerate() {
                    w.write_record([id.to_string(), s.to_string(), format_number(*v)])
                        .expect("in-memory write");
                }
            }
            Ok(String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"))
        }
        ReportFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "status: {}", sol.status.as_str());
            let _ = writeln!(out, "objective: {}", format_number(sol.objective));
            let _ = writeln!(
                out,
                "horizon: {} step(s) of {} h",
                problem.horizon.steps,
                format_number(problem.horizon.step_hours)
            );
            out.push_str("\ncost drivers:\n");
            if drivers.is_empty() {
                out.push_str("  (none)\n");
            } else {
                let mut rows = vec![["tech", "capacity", "capex", "opex", "share"].map(String::from).to_vec()];
                for d in &drivers {
                    rows.push(vec![
                        d.tech.clone(),
                        d.capacity.map_or("-".into(), format_number),
                        format_number(d.capex),
                        format_number(d.opex),
                        format!("{}%", trimmed(d.share, 2)),
                    ]);
                }
                out.push_str(&table(&rows));
            }
            out.push_str("\nutilization:\n");
            let rows: Vec<Vec<String>> = util.iter().map(|(id, u)| vec![id.to_string(), u.render()]).collect();
            out.push_str(&table(&rows));
            out.push_str("\nbyproduct disposal:\n");
            if disposal.is_empty() {
                out.push_str("  (none)\n");
            } else {
                let rows: Vec<Vec<String>> = disposal
                    .iter()
                    .map(|(c, v)| vec![c.clone(), format_number(*v)])
                    .collect();
                out.push_str(&table(&rows));
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_trim() {
        assert_eq!(format_number(20.0), "20");
        assert_eq!(format_number(23.333333333), "23.333333");
        assert_eq!(format_number(-1e-12), "0");
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(-2.25), "-2.25");
        assert_eq!(trimmed(50.0, 2), "50");
        assert_eq!(trimmed(33.3333, 2), "33.33");
    }
}
