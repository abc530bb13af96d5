use serde::Serialize;

use super::{CommodityId, CommoditySet, ModelError, SetName, TechGraph, TechId, TechnologyKind};

/// Fails on the first hyperedge endpoint that names no declared technology.
pub fn check_structure(graph: &TechGraph) -> Result<(), ModelError> {
    for (idx, edge) in graph.edges().iter().enumerate() {
        for tech in edge.producers.iter().chain(&edge.consumers) {
            if !graph.contains(tech) {
                return Err(ModelError::UndeclaredTechnology {
                    edge: idx,
                    commodity: edge.commodity.clone(),
                    tech: tech.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Union of every technology's input and output commodities.
pub fn derive_commodities(graph: &TechGraph) -> Result<CommoditySet, ModelError> {
    check_structure(graph)?;
    Ok(graph
        .technologies()
        .iter()
        .flat_map(|t| t.inputs.iter().chain(&t.outputs))
        .cloned()
        .collect())
}

fn inputs_of_kind(graph: &TechGraph, kind: TechnologyKind) -> CommoditySet {
    graph
        .technologies()
        .iter()
        .filter(|t| t.kind == kind)
        .flat_map(|t| t.inputs.iter().cloned())
        .collect()
}

pub fn derive_exports(graph: &TechGraph) -> Result<CommoditySet, ModelError> {
    check_structure(graph)?;
    Ok(inputs_of_kind(graph, TechnologyKind::Export))
}

pub fn derive_imports(graph: &TechGraph) -> Result<CommoditySet, ModelError> {
    check_structure(graph)?;
    Ok(graph
        .technologies()
        .iter()
        .filter(|t| t.kind == TechnologyKind::Import)
        .flat_map(|t| t.outputs.iter().cloned())
        .collect())
}

pub fn derive_opportunities(graph: &TechGraph) -> Result<CommoditySet, ModelError> {
    check_structure(graph)?;
    Ok(inputs_of_kind(graph, TechnologyKind::Opportunity))
}

/// Whether some hyperedge routes `commodity` from `producer` into at least
/// one consumer.
pub(crate) fn is_routed(graph: &TechGraph, producer: &TechId, commodity: &CommodityId) -> bool {
    graph.edges().iter().any(|e| {
        &e.commodity == commodity && e.producers.contains(producer) && !e.consumers.is_empty()
    })
}

/// Per-producer byproducts: `c` is a byproduct when some technology outputs
/// it and no hyperedge carries `c` from that technology into a consumer.
pub fn derive_byproducts(graph: &TechGraph) -> Result<CommoditySet, ModelError> {
    check_structure(graph)?;
    Ok(byproduct_pairs(graph).into_iter().map(|(_, c)| c).collect())
}

/// `(producer, commodity)` pairs that are never routed to a consumer, in
/// technology order then commodity order.
pub fn byproduct_pairs(graph: &TechGraph) -> Vec<(TechId, CommodityId)> {
    let mut out = Vec::new();
    for tech in graph.technologies() {
        for c in &tech.outputs {
            if !is_routed(graph, &tech.id, c) {
                out.push((tech.id.clone(), c.clone()));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SimpleEdge {
    /// Index of the hyperedge this edge was expanded from.
    pub hyperedge: usize,
    pub commodity: CommodityId,
    pub producer: TechId,
    pub consumer: TechId,
}

/// Cartesian expansion of every hyperedge, in declaration order and
/// producer-major within a hyperedge.
pub fn expand_hyperedges(graph: &TechGraph) -> Result<Vec<SimpleEdge>, ModelError> {
    check_structure(graph)?;
    let mut out = Vec::new();
    for (idx, edge) in graph.edges().iter().enumerate() {
        for p in &edge.producers {
            for c in &edge.consumers {
                out.push(SimpleEdge {
                    hyperedge: idx,
                    commodity: edge.commodity.clone(),
                    producer: p.clone(),
                    consumer: c.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// The five commodity sets derived from a technology graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DerivedSets {
    pub commodities: CommoditySet,
    pub exports: CommoditySet,
    pub imports: CommoditySet,
    pub byproducts: CommoditySet,
    pub opportunities: CommoditySet,
}

impl DerivedSets {
    pub fn of(graph: &TechGraph) -> Result<Self, ModelError> {
        Ok(Self {
            commodities: derive_commodities(graph)?,
            exports: derive_exports(graph)?,
            imports: derive_imports(graph)?,
            byproducts: derive_byproducts(graph)?,
            opportunities: derive_opportunities(graph)?,
        })
    }

    pub fn get(&self, name: SetName) -> &CommoditySet {
        match name {
            SetName::C => &self.commodities,
            SetName::E => &self.exports,
            SetName::I => &self.imports,
            SetName::B => &self.byproducts,
            SetName::O => &self.opportunities,
        }
    }
}
