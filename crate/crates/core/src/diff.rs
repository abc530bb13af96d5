//! Per-set structural comparison of two hubs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate, CommoditySet, Hub, SetName, Technology};

pub const DIFF_SCHEMA: &str = "rreh-diff/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiffSet {
    L,
    T,
    H,
    C,
    E,
    I,
    B,
    O,
}

impl DiffSet {
    pub const ORDER: [DiffSet; 8] = [
        DiffSet::L,
        DiffSet::T,
        DiffSet::H,
        DiffSet::C,
        DiffSet::E,
        DiffSet::I,
        DiffSet::B,
        DiffSet::O,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DiffSet::L => "L",
            DiffSet::T => "T",
            DiffSet::H => "H",
            DiffSet::C => "C",
            DiffSet::E => "E",
            DiffSet::I => "I",
            DiffSet::B => "B",
            DiffSet::O => "O",
        }
    }

    fn commodity_set(self) -> Option<SetName> {
        match self {
            DiffSet::C => Some(SetName::C),
            DiffSet::E => Some(SetName::E),
            DiffSet::I => Some(SetName::I),
            DiffSet::B => Some(SetName::B),
            DiffSet::O => Some(SetName::O),
            _ => None,
        }
    }
}

impl fmt::Display for DiffSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetDelta {
    #[serde(rename = "set")]
    pub set_name: DiffSet,
    #[serde(rename = "onlyLeft")]
    pub only_left: Vec<String>,
    #[serde(rename = "onlyRight")]
    pub only_right: Vec<String>,
    pub common: usize,
}

impl SetDelta {
    pub fn is_same(&self) -> bool {
        self.only_left.is_empty() && self.only_right.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DiffJson", into = "DiffJson")]
pub struct DiffReport {
    pub left_id: String,
    pub right_id: String,
    /// One entry per set, in [`DiffSet::ORDER`].
    pub deltas: Vec<SetDelta>,
}

#[derive(Serialize, Deserialize)]
struct DiffJson {
    schema: String,
    left: String,
    right: String,
    deltas: Vec<SetDelta>,
}

impl From<DiffReport> for DiffJson {
    fn from(r: DiffReport) -> Self {
        DiffJson {
            schema: DIFF_SCHEMA.to_string(),
            left: r.left_id,
            right: r.right_id,
            deltas: r.deltas,
        }
    }
}

impl TryFrom<DiffJson> for DiffReport {
    type Error = String;
    fn try_from(j: DiffJson) -> Result<Self, String> {
        if j.schema != DIFF_SCHEMA {
            return Err(format!("unsupported schema {:?}", j.schema));
        }
        let order: Vec<DiffSet> = j.deltas.iter().map(|d| d.set_name).collect();
        if order != DiffSet::ORDER {
            return Err("deltas must list L, T, H, C, E, I, B, O exactly once in order".into());
        }
        Ok(DiffReport {
            left_id: j.left,
            right_id: j.right,
            deltas: j.deltas,
        })
    }
}

impl DiffReport {
    pub fn delta(&self, set: DiffSet) -> &SetDelta {
        &self.deltas[set as usize]
    }

    pub fn is_identical(&self) -> bool {
        self.deltas.iter().all(SetDelta::is_same)
    }

    /// Verdict phrase for one set.
    pub fn verdict(&self, set: DiffSet) -> String {
        let d = self.delta(set);
        if d.is_same() {
            return format!("Same as {}", self.left_id);
        }
        let presence = |items: &[String], here: &str, there: &str| {
            let verb = if items.len() == 1 { "is" } else { "are" };
            format!("{} {verb} present in {here} but not in {there}", braces(items))
        };
        match set {
            DiffSet::L => "Different locations".to_string(),
            DiffSet::T => "Different technologies".to_string(),
            DiffSet::H => "Different hub structure".to_string(),
            DiffSet::E => "Energy export differs".to_string(),
            _ => {
                let mut parts = Vec::new();
                if !d.only_right.is_empty() {
                    parts.push(presence(&d.only_right, &self.right_id, &self.left_id));
                }
                if !d.only_left.is_empty() {
                    parts.push(presence(&d.only_left, &self.left_id, &self.right_id));
                }
                parts.join("; ")
            }
        }
    }

    pub fn summary(&self) -> Vec<(DiffSet, String)> {
        DiffSet::ORDER.iter().map(|s| (*s, self.verdict(*s))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("hub `{hub}` has {errors} validation error(s); fix them before diffing")]
    InvalidOperand { hub: String, errors: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffFormat {
    Table,
    Json,
}

fn braces(items: &[String]) -> String {
    format!("{{{}}}", items.join(", "))
}

fn set_delta(set: DiffSet, left: BTreeSet<String>, right: BTreeSet<String>) -> SetDelta {
    SetDelta {
        set_name: set,
        only_left: left.difference(&right).cloned().collect(),
        only_right: right.difference(&left).cloned().collect(),
        common: left.intersection(&right).count(),
    }
}

fn list(set: &CommoditySet) -> String {
    set.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", ")
}

fn signature(t: &Technology) -> String {
    format!("kind={}, in={{{}}}, out={{{}}}", t.kind, list(&t.inputs), list(&t.outputs))
}

fn technology_delta(left: &Hub, right: &Hub) -> SetDelta {
    let index = |h: &Hub| -> BTreeMap<String, String> {
        h.technologies()
            .iter()
            .map(|t| (t.id.to_string(), signature(t)))
            .collect()
    };
    let (l, r) = (index(left), index(right));
    let mut only_left = BTreeSet::new();
    let mut only_right = BTreeSet::new();
    let mut common = 0;
    for (id, sig) in &l {
        match r.get(id) {
            Some(other) if other == sig => common += 1,
            Some(other) => {
                only_left.insert(format!("{id} (changed: {sig})"));
                only_right.insert(format!("{id} (changed: {other})"));
            }
            None => {
                only_left.insert(id.clone());
            }
        }
    }
    for id in r.keys() {
        if !l.contains_key(id) {
            only_right.insert(id.clone());
        }
    }
    SetDelta {
        set_name: DiffSet::T,
        only_left: only_left.into_iter().collect(),
        only_right: only_right.into_iter().collect(),
        common,
    }
}

fn elements(hub: &Hub, set: DiffSet) -> BTreeSet<String> {
    match set {
        DiffSet::L => hub.locations().iter().map(|l| l.triplet()).collect(),
        DiffSet::H => hub.edges().iter().map(|e| e.render()).collect(),
        other => {
            let name = other.commodity_set().expect("commodity-valued set");
            hub.set(name).iter().map(|c| c.to_string()).collect()
        }
    }
}

/// Compares the derived structure of two valid hubs.
pub fn diff_hubs(left: &Hub, right: &Hub) -> Result<DiffReport, DiffError> {
    for hub in [left, right] {
        let report = validate(hub);
        if !report.is_valid() {
            return Err(DiffError::InvalidOperand {
                hub: hub.id().to_string(),
                errors: report.errors.len(),
            });
        }
    }
    let deltas = DiffSet::ORDER
        .iter()
        .map(|&set| match set {
            DiffSet::T => technology_delta(left, right),
            _ => set_delta(set, elements(left, set), elements(right, set)),
        })
        .collect();
    Ok(DiffReport {
        left_id: left.id().to_string(),
        right_id: right.id().to_string(),
        deltas,
    })
}

pub fn render_diff(report: &DiffReport, format: DiffFormat) -> String {
    match format {
        DiffFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("diff report serializes");
            s.push('\n');
            s
        }
        DiffFormat::Table => render_table(report),
    }
}

fn render_table(report: &DiffReport) -> String {
    let header = [
        "Set".to_string(),
        format!("Only in {}", report.left_id),
        format!("Only in {}", report.right_id),
        "Differences".to_string(),
    ];
    let rows: Vec<[String; 4]> = report
        .deltas
        .iter()
        .map(|d| {
            [
                format!("{}_r", d.set_name),
                braces(&d.only_left),
                braces(&d.only_right),
                report.verdict(d.set_name),
            ]
        })
        .collect();
    let mut widths = header.each_ref().map(|h| h.chars().count());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String; 4]| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 3 { c.clone() } else { format!("{c:<w$}") })
            .collect();
        padded.join(" | ").trim_end().to_string()
    };
    let mut out = line(&header);
    out.push('\n');
    out.push_str(
        &widths
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let w = if i == 0 || i == 3 { *w + 1 } else { *w + 2 };
                "-".repeat(w)
            })
            .collect::<Vec<_>>()
            .join("+"),
    );
    out.push('\n');
    for row in &rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}
