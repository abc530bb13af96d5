//! Domain types for hub descriptions: commodities, locations, technologies,
//! hyperedges and the assembled hub with its derived commodity sets.
//!
//! Every collection that behaves like a set is stored in canonical
//! (lexicographic) order so that equal hubs compare and serialize equal.

mod derive;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use derive::{
    check_structure, derive_byproducts, derive_commodities, derive_exports, derive_imports,
    byproduct_pairs, derive_opportunities, expand_hyperedges, DerivedSets, SimpleEdge,
};
pub use validate::{validate, Code, Finding, Severity, Subject, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid identifier {0:?}")]
    InvalidIdentifier(String),
    #[error("invalid commodity id {0:?}")]
    InvalidCommodity(String),
    #[error("unknown level {0:?} (expected low, medium or high)")]
    InvalidLevel(String),
    #[error("flow #{edge} ({commodity}) references undeclared technology `{tech}`")]
    UndeclaredTechnology {
        edge: usize,
        commodity: CommodityId,
        tech: TechId,
    },
}

/// Trims and collapses internal whitespace runs to a single space.
pub fn normalize_ident(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn checked_ident(raw: &str) -> Result<String, ModelError> {
    let id = normalize_ident(raw);
    if id.is_empty() {
        return Err(ModelError::InvalidIdentifier(raw.to_string()));
    }
    Ok(id)
}

/// Commodity identifier, e.g. `electricity`, `sea water` or `CH4(g)`.
///
/// The optional phase tag is the trailing parenthesised qualifier. Two ids
/// are equal iff their canonical strings are equal; no chemical
/// normalization happens (`H2O` and `sea water` are unrelated).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CommodityId(String);

impl CommodityId {
    pub fn new(raw: &str) -> Result<Self, ModelError> {
        let norm = normalize_ident(raw);
        match norm.find('(') {
            None => {
                if norm.is_empty() || norm.contains(')') {
                    return Err(ModelError::InvalidCommodity(raw.to_string()));
                }
                Ok(Self(norm))
            }
            Some(open) => {
                let (base, rest) = norm.split_at(open);
                let phase = rest
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| ModelError::InvalidCommodity(raw.to_string()))?;
                if phase.contains('(') || phase.contains(')') || base.contains(')') {
                    return Err(ModelError::InvalidCommodity(raw.to_string()));
                }
                Self::with_phase(base, Some(phase))
            }
        }
    }

    pub fn with_phase(base: &str, phase: Option<&str>) -> Result<Self, ModelError> {
        let base_n = normalize_ident(base);
        let bad = |s: &str| s.is_empty() || s.contains('(') || s.contains(')');
        if bad(&base_n) {
            return Err(ModelError::InvalidCommodity(base.to_string()));
        }
        match phase {
            None => Ok(Self(base_n)),
            Some(p) => {
                let p_n = normalize_ident(p);
                if bad(&p_n) {
                    return Err(ModelError::InvalidCommodity(format!("{base}({p})")));
                }
                Ok(Self(format!("{base_n}({p_n})")))
            }
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn base(&self) -> &str {
        match self.0.find('(') {
            Some(i) => &self.0[..i],
            None => &self.0,
        }
    }

    pub fn phase_tag(&self) -> Option<&str> {
        let i = self.0.find('(')?;
        Some(&self.0[i + 1..self.0.len() - 1])
    }
}

impl fmt::Display for CommodityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for CommodityId {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl TryFrom<String> for CommodityId {
    type Error = ModelError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::new(&s)
    }
}

impl From<CommodityId> for String {
    fn from(c: CommodityId) -> String {
        c.0
    }
}

/// Convenience for tests and fixtures; panics on an invalid id.
pub fn commodity(raw: &str) -> CommodityId {
    CommodityId::new(raw).expect("valid commodity id")
}

pub type CommoditySet = BTreeSet<CommodityId>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    Medium,
    High,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Low, Level::Medium, Level::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Low => "low",
            Level::Medium => "medium",
            Level::High => "high",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "low" => Ok(Level::Low),
            "medium" => Ok(Level::Medium),
            "high" => Ok(Level::High),
            other => Err(ModelError::InvalidLevel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LocationId(String);

impl LocationId {
    pub fn new(raw: &str) -> Result<Self, ModelError> {
        checked_ident(raw).map(Self)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LocationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A site of the hub: `(name, renewable potential, demand)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub id: LocationId,
    pub name: String,
    /// Resource tag (e.g. `wind`) to potential level.
    pub potential: BTreeMap<String, Level>,
    pub demand: Level,
}

impl Location {
    pub fn new(
        id: LocationId,
        name: &str,
        potential: impl IntoIterator<Item = (String, Level)>,
        demand: Level,
    ) -> Self {
        Self {
            id,
            name: normalize_ident(name),
            potential: potential
                .into_iter()
                .map(|(k, v)| (normalize_ident(&k), v))
                .collect(),
            demand,
        }
    }

    /// Load centres have high demand and low renewable potential everywhere.
    pub fn is_load_centre(&self) -> bool {
        self.demand == Level::High && self.potential.values().all(|l| *l == Level::Low)
    }

    /// Canonical triplet rendering used for structural comparison.
    pub fn triplet(&self) -> String {
        let potential = self
            .potential
            .iter()
            .map(|(tag, lvl)| format!("{tag}: {lvl}"))
            .collect::<Vec<_>>()
            .join(", ");
        format!("({}, {{{}}}, {} demand)", self.name, potential, self.demand)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TechnologyKind {
    Generic,
    Import,
    Export,
    Opportunity,
}

impl TechnologyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TechnologyKind::Generic => "generic",
            TechnologyKind::Import => "import",
            TechnologyKind::Export => "export",
            TechnologyKind::Opportunity => "opportunity",
        }
    }

    pub fn is_sink(self) -> bool {
        matches!(self, TechnologyKind::Export | TechnologyKind::Opportunity)
    }
}

impl fmt::Display for TechnologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Location-qualified technology name, rendered `name@location`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TechId {
    pub name: String,
    pub location: LocationId,
}

impl TechId {
    pub fn new(name: &str, location: &str) -> Result<Self, ModelError> {
        Ok(Self {
            name: checked_ident(name)?,
            location: LocationId::new(location)?,
        })
    }

    /// Parses `name@location`, splitting at the last `@`.
    pub fn parse(s: &str) -> Result<Self, ModelError> {
        let (name, loc) = s
            .rsplit_once('@')
            .ok_or_else(|| ModelError::InvalidIdentifier(s.to_string()))?;
        Self::new(name, loc)
    }
}

impl fmt::Display for TechId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.location)
    }
}

impl Serialize for TechId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TechId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        TechId::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Technology {
    pub id: TechId,
    pub kind: TechnologyKind,
    pub inputs: CommoditySet,
    pub outputs: CommoditySet,
}

impl Technology {
    pub fn new(
        id: TechId,
        kind: TechnologyKind,
        inputs: impl IntoIterator<Item = CommodityId>,
        outputs: impl IntoIterator<Item = CommodityId>,
    ) -> Self {
        Self {
            id,
            kind,
            inputs: inputs.into_iter().collect(),
            outputs: outputs.into_iter().collect(),
        }
    }
}

/// A flow of one commodity from every producer to every consumer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Hyperedge {
    pub commodity: CommodityId,
    pub producers: BTreeSet<TechId>,
    pub consumers: BTreeSet<TechId>,
}

impl Hyperedge {
    pub fn new(
        commodity: CommodityId,
        producers: impl IntoIterator<Item = TechId>,
        consumers: impl IntoIterator<Item = TechId>,
    ) -> Self {
        Self {
            commodity,
            producers: producers.into_iter().collect(),
            consumers: consumers.into_iter().collect(),
        }
    }

    /// Number of simple producer→consumer edges this hyperedge stands for.
    pub fn expansion_count(&self) -> usize {
        self.producers.len() * self.consumers.len()
    }

    pub fn is_vented(&self) -> bool {
        self.consumers.is_empty()
    }

    pub fn render(&self) -> String {
        fn set(s: &BTreeSet<TechId>) -> String {
            s.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
        }
        format!(
            "({}, {{{}}}, {{{}}})",
            self.commodity,
            set(&self.producers),
            set(&self.consumers)
        )
    }
}

/// Technologies (nodes) and hyperedges of a hub.
///
/// Technologies are kept sorted by id; duplicates are retained (in input
/// order) so that validation can report them. Hyperedges keep declaration
/// order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TechGraph {
    technologies: Vec<Technology>,
    edges: Vec<Hyperedge>,
}

impl TechGraph {
    pub fn new(technologies: Vec<Technology>, edges: Vec<Hyperedge>) -> Self {
        let mut technologies = technologies;
        technologies.sort_by(|a, b| a.id.cmp(&b.id));
        Self { technologies, edges }
    }

    pub fn technologies(&self) -> &[Technology] {
        &self.technologies
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn get(&self, id: &TechId) -> Option<&Technology> {
        self.technologies
            .binary_search_by(|t| t.id.cmp(id))
            .ok()
            .map(|i| &self.technologies[i])
    }

    pub fn contains(&self, id: &TechId) -> bool {
        self.get(id).is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.technologies.is_empty() && self.edges.is_empty()
    }

    /// Returns a copy with `edge` appended.
    pub fn with_edge(&self, edge: Hyperedge) -> Self {
        let mut g = self.clone();
        g.edges.push(edge);
        g
    }

    /// Returns a copy with `tech` added.
    pub fn with_technology(&self, tech: Technology) -> Self {
        let mut techs = self.technologies.clone();
        techs.push(tech);
        Self::new(techs, self.edges.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SetName {
    C,
    E,
    I,
    B,
    O,
}

impl SetName {
    pub const ALL: [SetName; 5] = [SetName::C, SetName::E, SetName::I, SetName::B, SetName::O];

    pub fn as_str(self) -> &'static str {
        match self {
            SetName::C => "C",
            SetName::E => "E",
            SetName::I => "I",
            SetName::B => "B",
            SetName::O => "O",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            SetName::C => "commodities",
            SetName::E => "exports",
            SetName::I => "imports",
            SetName::B => "byproducts",
            SetName::O => "local opportunities",
        }
    }
}

impl fmt::Display for SetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SetName {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "C" => Ok(SetName::C),
            "E" => Ok(SetName::E),
            "I" => Ok(SetName::I),
            "B" => Ok(SetName::B),
            "O" => Ok(SetName::O),
            other => Err(ModelError::InvalidIdentifier(other.to_string())),
        }
    }
}

/// Commodity sets transcribed by hand (e.g. from a published table) so they
/// can be cross-checked against derivation.
pub type DeclaredSets = BTreeMap<SetName, CommoditySet>;

/// An assembled hub: locations, technology graph, optional declared sets
/// and the cached derived sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hub {
    id: String,
    locations: Vec<Location>,
    graph: TechGraph,
    declared: Option<DeclaredSets>,
    derived: DerivedSets,
}

/// Builds a hub and derives its commodity sets.
pub fn assemble_hub(
    id: &str,
    locations: Vec<Location>,
    graph: TechGraph,
    declared: Option<DeclaredSets>,
) -> Result<Hub, ModelError> {
    let derived = DerivedSets::of(&graph)?;
    let mut locations = locations;
    locations.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(Hub {
        id: normalize_ident(id),
        locations,
        graph,
        declared,
        derived,
    })
}

impl Hub {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn location(&self, id: &LocationId) -> Option<&Location> {
        self.locations.iter().find(|l| &l.id == id)
    }

    pub fn graph(&self) -> &TechGraph {
        &self.graph
    }

    pub fn technologies(&self) -> &[Technology] {
        self.graph.technologies()
    }

    pub fn edges(&self) -> &[Hyperedge] {
        self.graph.edges()
    }

    pub fn declared(&self) -> Option<&DeclaredSets> {
        self.declared.as_ref()
    }

    pub fn derived(&self) -> &DerivedSets {
        &self.derived
    }

    pub fn set(&self, name: SetName) -> &CommoditySet {
        self.derived.get(name)
    }
}
