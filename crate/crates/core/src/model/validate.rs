use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::derive::{byproduct_pairs, is_routed};
use super::{CommoditySet, Hub, LocationId, SetName, TechId, TechnologyKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        })
    }
}

/// Stable diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    /// Flow commodity is not an output of one of its producers.
    E001,
    /// Flow commodity is not an input of one of its consumers.
    E002,
    /// Import with inputs, or export/opportunity with outputs.
    E003,
    /// Technology bound to an undeclared location.
    E004,
    /// Duplicate location, technology or flow.
    E005,
    /// Flow without producers.
    E006,
    /// Location without any potential tag.
    E007,
    /// Generic technology input that nothing supplies and that is not imported.
    W001,
    /// Declared set differs from the derived one.
    W002,
    /// Output never routed to a consumer by its producer.
    I001,
    /// Byproduct that other producers do route to consumers.
    I002,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::E001 => "E001",
            Code::E002 => "E002",
            Code::E003 => "E003",
            Code::E004 => "E004",
            Code::E005 => "E005",
            Code::E006 => "E006",
            Code::E007 => "E007",
            Code::W001 => "W001",
            Code::W002 => "W002",
            Code::I001 => "I001",
            Code::I002 => "I002",
        }
    }

    pub fn severity(self) -> Severity {
        match self.as_str().as_bytes()[0] {
            b'E' => Severity::Error,
            b'W' => Severity::Warning,
            _ => Severity::Info,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// What a finding is about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Hub,
    Location(LocationId),
    Technology(TechId),
    /// Hyperedge by declaration index.
    Flow(usize),
    Set(SetName),
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Hub => f.write_str("hub"),
            Subject::Location(l) => write!(f, "location {l}"),
            Subject::Technology(t) => write!(f, "tech {t}"),
            Subject::Flow(i) => write!(f, "flow #{i}"),
            Subject::Set(s) => write!(f, "set {s}"),
        }
    }
}

impl Serialize for Subject {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub code: Code,
    pub message: String,
    pub subject: Subject,
}

impl Finding {
    fn new(code: Code, subject: Subject, message: String) -> Self {
        Self {
            code,
            message,
            subject,
        }
    }

    pub fn severity(&self) -> Severity {
        self.code.severity()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
    pub infos: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn has(&self, code: Code) -> bool {
        self.all().any(|f| f.code == code)
    }

    pub fn all(&self) -> impl Iterator<Item = &Finding> {
        self.errors.iter().chain(&self.warnings).chain(&self.infos)
    }

    fn push(&mut self, finding: Finding) {
        match finding.severity() {
            Severity::Error => self.errors.push(finding),
            Severity::Warning => self.warnings.push(finding),
            Severity::Info => self.infos.push(finding),
        }
    }
}

fn render_set(s: &CommoditySet) -> String {
    s.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", ")
}

/// Checks every structural invariant of a hub and reports findings ordered
/// by rule, then by subject.
pub fn validate(hub: &Hub) -> ValidationReport {
    let mut report = ValidationReport::default();
    let graph = hub.graph();

    // E005 / E007 on locations
    let mut seen_locations = BTreeSet::new();
    for loc in hub.locations() {
        if !seen_locations.insert(&loc.id) {
            report.push(Finding::new(
                Code::E005,
                Subject::Location(loc.id.clone()),
                format!("location `{}` is declared more than once", loc.id),
            ));
        }
        if loc.potential.is_empty() {
            report.push(Finding::new(
                Code::E007,
                Subject::Location(loc.id.clone()),
                format!("location `{}` has no renewable potential tag", loc.id),
            ));
        }
    }

    let mut seen_techs = BTreeSet::new();
    for tech in graph.technologies() {
        if !seen_techs.insert(&tech.id) {
            report.push(Finding::new(
                Code::E005,
                Subject::Technology(tech.id.clone()),
                format!("technology `{}` is declared more than once", tech.id),
            ));
        }
        if !seen_locations.contains(&tech.id.location) {
            report.push(Finding::new(
                Code::E004,
                Subject::Technology(tech.id.clone()),
                format!(
                    "technology `{}` sits at undeclared location `{}`",
                    tech.id, tech.id.location
                ),
            ));
        }
        let kind_violation = match tech.kind {
            TechnologyKind::Import if !tech.inputs.is_empty() => {
                Some(format!("import technology `{}` must have no inputs (has {{{}}})", tech.id, render_set(&tech.inputs)))
            }
            TechnologyKind::Export | TechnologyKind::Opportunity if !tech.outputs.is_empty() => Some(format!(
                "{} technology `{}` must have no outputs (has {{{}}})",
                tech.kind,
                tech.id,
                render_set(&tech.outputs)
            )),
            _ => None,
        };
        if let Some(msg) = kind_violation {
            report.push(Finding::new(Code::E003, Subject::Technology(tech.id.clone()), msg));
        }
    }

    let mut seen_edges = BTreeSet::new();
    for (idx, edge) in graph.edges().iter().enumerate() {
        let subject = Subject::Flow(idx);
        if edge.producers.is_empty() {
            report.push(Finding::new(
                Code::E006,
                subject.clone(),
                format!("flow #{idx} of {} has no producers", edge.commodity),
            ));
        }
        if !seen_edges.insert(edge) {
            report.push(Finding::new(
                Code::E005,
                subject.clone(),
                format!("flow #{idx} duplicates an earlier flow {}", edge.render()),
            ));
        }
        for p in &edge.producers {
            if let Some(tech) = graph.get(p) {
                if !tech.outputs.contains(&edge.commodity) {
                    report.push(Finding::new(
                        Code::E001,
                        subject.clone(),
                        format!(
                            "flow #{idx}: {} is not an output of producer `{}` (outputs {{{}}})",
                            edge.commodity,
                            p,
                            render_set(&tech.outputs)
                        ),
                    ));
                }
            }
        }
        for c in &edge.consumers {
            if let Some(tech) = graph.get(c) {
                if !tech.inputs.contains(&edge.commodity) {
                    report.push(Finding::new(
                        Code::E002,
                        subject.clone(),
                        format!(
                            "flow #{idx}: {} is not an input of consumer `{}` (inputs {{{}}})",
                            edge.commodity,
                            c,
                            render_set(&tech.inputs)
                        ),
                    ));
                }
            }
        }
    }

    let derived = hub.derived();
    for tech in graph.technologies() {
        if tech.kind != TechnologyKind::Generic {
            continue;
        }
        for input in &tech.inputs {
            let supplied = graph.edges().iter().any(|e| {
                &e.commodity == input && e.consumers.contains(&tech.id) && !e.producers.is_empty()
            });
            if !supplied && !derived.imports.contains(input) {
                report.push(Finding::new(
                    Code::W001,
                    Subject::Technology(tech.id.clone()),
                    format!(
                        "dangling demand: {input} required by `{}` is never supplied by a flow nor imported",
                        tech.id
                    ),
                ));
            }
        }
    }

    if let Some(declared) = hub.declared() {
        for (name, decl) in declared {
            let got = derived.get(*name);
            if decl != got {
                let missing: CommoditySet = got.difference(decl).cloned().collect();
                let extra: CommoditySet = decl.difference(got).cloned().collect();
                let mut parts = Vec::new();
                if !missing.is_empty() {
                    parts.push(format!("derived but not declared {{{}}}", render_set(&missing)));
                }
                if !extra.is_empty() {
                    parts.push(format!("declared but not derived {{{}}}", render_set(&extra)));
                }
                report.push(Finding::new(
                    Code::W002,
                    Subject::Set(*name),
                    format!(
                        "declared {} set ({}) differs from derivation: {}",
                        name,
                        name.describe(),
                        parts.join("; ")
                    ),
                ));
            }
        }
    }

    let pairs = byproduct_pairs(graph);
    for (tech, c) in &pairs {
        report.push(Finding::new(
            Code::I001,
            Subject::Technology(tech.clone()),
            format!("{c} output by `{tech}` is never routed to a consumer (byproduct)"),
        ));
    }
    for c in &derived.byproducts {
        let routers: Vec<String> = graph
            .technologies()
            .iter()
            .filter(|t| t.outputs.contains(c) && is_routed(graph, &t.id, c))
            .map(|t| t.id.to_string())
            .collect();
        if !routers.is_empty() {
            report.push(Finding::new(
                Code::I002,
                Subject::Hub,
                format!(
                    "byproduct {c} is consumed when produced by {}",
                    routers.join(", ")
                ),
            ));
        }
    }

    report
}
