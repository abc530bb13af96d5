use std::fmt::Write;

use crate::model::{expand_hyperedges, CommodityId, Hub, TechId, Technology, TechnologyKind};

pub const SKELETON_HEADER: &str = "# rreh-skeleton v1";

/// Exported text plus the element counts reported by the CLI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub text: String,
    /// Technology nodes (DOT) or node blocks (skeleton).
    pub nodes: usize,
    /// Drawn edges (DOT) or hyperedge blocks (skeleton).
    pub edges: usize,
    /// Junction nodes; zero unless DOT without expansion.
    pub junctions: usize,
}

fn dot_str(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn shape(kind: TechnologyKind) -> &'static str {
    match kind {
        TechnologyKind::Generic => "box",
        TechnologyKind::Import => "invhouse",
        TechnologyKind::Export => "house",
        TechnologyKind::Opportunity => "octagon",
    }
}

fn dot_edge(out: &mut String, from: &str, to: &str, c: &CommodityId) {
    let c = dot_str(c.as_str());
    let _ = writeln!(out, "  {} -> {} [commodity={c}, label={c}];", dot_str(from), dot_str(to));
}

/// Graphviz digraph of the hub. With `expand`, every hyperedge becomes its
/// producer × consumer simple edges; otherwise each hyperedge is drawn
/// through a junction node `flow#i`.
pub fn export_dot(hub: &Hub, expand: bool) -> Rendered {
    let mut text = String::new();
    let _ = writeln!(text, "digraph {} {{", dot_str(hub.id()));
    text.push_str("  rankdir=LR;\n");
    for t in hub.technologies() {
        let id = t.id.to_string();
        let _ = writeln!(
            text,
            "  {} [kind={}, shape={}, label={}];",
            dot_str(&id),
            dot_str(t.kind.as_str()),
            shape(t.kind),
            dot_str(&id)
        );
    }
    let mut edges = 0;
    let mut junctions = 0;
    if expand {
        for e in expand_hyperedges(hub.graph()).unwrap_or_default() {
            dot_edge(&mut text, &e.producer.to_string(), &e.consumer.to_string(), &e.commodity);
            edges += 1;
        }
    } else {
        for (i, h) in hub.edges().iter().enumerate() {
            let j = format!("flow#{i}");
            let _ = writeln!(
                text,
                "  {} [kind=\"junction\", shape=point, label={}];",
                dot_str(&j),
                dot_str(h.commodity.as_str())
            );
            junctions += 1;
            for p in &h.producers {
                dot_edge(&mut text, &p.to_string(), &j, &h.commodity);
                edges += 1;
            }
            for c in &h.consumers {
                dot_edge(&mut text, &j, &c.to_string(), &h.commodity);
                edges += 1;
            }
        }
    }
    text.push_str("}\n");
    Rendered {
        text,
        nodes: hub.technologies().len(),
        edges,
        junctions,
    }
}

/// Identifier-safe form: ASCII alphanumerics kept, everything else `_`.
fn sanitize(s: &str) -> String {
    let mut out: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    if out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out
}

fn node_name(t: &TechId) -> String {
    sanitize(&format!("{}_{}", t.name, t.location))
}

fn port(prefix: &str, c: &CommodityId) -> String {
    format!("{prefix}_{}", sanitize(c.as_str()))
}

fn node_block(out: &mut String, t: &Technology) {
    let sized = t.kind == TechnologyKind::Generic;
    let _ = writeln!(out, "\n#NODE {} // {} ({})", node_name(&t.id), t.id, t.kind);
    out.push_str("#PARAMETERS\n");
    if sized {
        out.push_str("    capex_annuity = 0;\n");
    }
    out.push_str("    opex_var = 0;\n");
    for c in t.inputs.iter().chain(&t.outputs) {
        let _ = writeln!(out, "    {} = 0;", port("conv", c));
    }
    out.push_str("#VARIABLES\n");
    if sized {
        out.push_str("    internal: capacity;\n");
    }
    out.push_str("    internal: activity[T];\n");
    for c in &t.inputs {
        let _ = writeln!(out, "    external: {}[T];", port("in", c));
    }
    for c in &t.outputs {
        let _ = writeln!(out, "    external: {}[T];", port("out", c));
    }
    out.push_str("#CONSTRAINTS\n");
    out.push_str("    activity[t] >= 0;\n");
    if sized {
        out.push_str("    capacity >= 0;\n");
        out.push_str("    activity[t] <= capacity;\n");
    }
    for c in &t.inputs {
        let _ = writeln!(out, "    {}[t] == -{} * activity[t];", port("in", c), port("conv", c));
    }
    for c in &t.outputs {
        let _ = writeln!(out, "    {}[t] == {} * activity[t];", port("out", c), port("conv", c));
    }
    out.push_str("#OBJECTIVES\n");
    if sized {
        out.push_str("    min: capex_annuity * capacity + opex_var * activity[t];\n");
    } else {
        out.push_str("    min: opex_var * activity[t];\n");
    }
}

/// Node/hyperedge text skeleton with placeholder parameters, one node block
/// per technology and one hyperedge block per flow.
pub fn export_model_skeleton(hub: &Hub) -> Rendered {
    let mut text = String::new();
    let _ = writeln!(text, "{SKELETON_HEADER}");
    if hub.technologies().is_empty() && hub.edges().is_empty() {
        return Rendered {
            text,
            nodes: 0,
            edges: 0,
            junctions: 0,
        };
    }
    let _ = writeln!(text, "// hub: {}", hub.id());
    text.push_str("\n#TIMEHORIZON\n    T = 1;\n");
    for t in hub.technologies() {
        node_block(&mut text, t);
    }
    for (i, h) in hub.edges().iter().enumerate() {
        let sum = |ids: &std::collections::BTreeSet<TechId>, dir: &str| {
            ids.iter()
                .map(|t| format!("{}.{}[t]", node_name(t), port(dir, &h.commodity)))
                .collect::<Vec<_>>()
                .join(" + ")
        };
        let _ = writeln!(
            text,
            "\n#HYPEREDGE flow_{i}_{} // {}",
            sanitize(h.commodity.as_str()),
            h.render()
        );
        text.push_str("#CONSTRAINTS\n");
        if h.consumers.is_empty() {
            let _ = writeln!(text, "    {} >= 0; // vented", sum(&h.producers, "out"));
        } else {
            let _ = writeln!(text, "    {} == {};", sum(&h.producers, "out"), sum(&h.consumers, "in"));
        }
    }
    Rendered {
        text,
        nodes: hub.technologies().len(),
        edges: hub.edges().len(),
        junctions: 0,
    }
}
