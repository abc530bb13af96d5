use std::collections::BTreeMap;
use std::fmt::Write;

use super::lexer::is_bare_word;
use crate::model::{CommodityId, CommoditySet, Hub, TechId, TechnologyKind};

/// Top-level sections of a canonical document, in emission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Section {
    Locations,
    Technologies,
    Flows,
    Assert,
    End,
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

pub(crate) fn ident(s: &str) -> String {
    if is_bare_word(s) {
        s.to_string()
    } else {
        quote(s)
    }
}

fn commodity(c: &CommodityId) -> String {
    match c.phase_tag() {
        Some(p) => format!("{}({})", ident(c.base()), ident(p)),
        None => ident(c.as_str()),
    }
}

fn commodity_list(set: &CommoditySet) -> String {
    set.iter().map(commodity).collect::<Vec<_>>().join(", ")
}

fn tech_ref(t: &TechId) -> String {
    format!("{}@{}", ident(&t.name), ident(t.location.as_str()))
}

/// Canonical text: fixed section order, entities sorted, two-space
/// indentation, LF line endings. Flows keep declaration order.
pub fn serialize(hub: &Hub) -> String {
    serialize_with_comments(hub, &BTreeMap::new())
}

/// Canonical text with `# ` comment lines emitted before the given sections.
pub fn serialize_with_comments(hub: &Hub, comments: &BTreeMap<Section, Vec<String>>) -> String {
    let mut chunks: Vec<String> = Vec::new();
    let comment_block = |section: Section| -> String {
        let mut s = String::new();
        for line in comments.get(&section).into_iter().flatten() {
            if line.is_empty() {
                s.push_str("  #\n");
            } else {
                let _ = writeln!(s, "  # {line}");
            }
        }
        s
    };

    let mut locs = comment_block(Section::Locations);
    for (i, loc) in hub.locations().iter().enumerate() {
        if i > 0 {
            locs.push('\n');
        }
        let potential = loc
            .potential
            .iter()
            .map(|(tag, lvl)| format!("{}: {}", ident(tag), lvl))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(locs, "  location {} {{", ident(loc.id.as_str()));
        let _ = writeln!(locs, "    name = {};", quote(&loc.name));
        let _ = writeln!(locs, "    potential = {potential};");
        let _ = writeln!(locs, "    demand = {};", loc.demand);
        locs.push_str("  }\n");
    }
    chunks.push(locs);

    let mut techs = comment_block(Section::Technologies);
    for (i, t) in hub.technologies().iter().enumerate() {
        if i > 0 {
            techs.push('\n');
        }
        let kind = match t.kind {
            TechnologyKind::Generic => String::new(),
            k => format!(" kind {k}"),
        };
        let _ = writeln!(techs, "  tech {}{kind} {{", tech_ref(&t.id));
        let _ = writeln!(techs, "    in: {};", commodity_list(&t.inputs));
        let _ = writeln!(techs, "    out: {};", commodity_list(&t.outputs));
        techs.push_str("  }\n");
    }
    chunks.push(techs);

    let mut flows = comment_block(Section::Flows);
    if hub.edges().is_empty() {
        flows.push_str("  flows {}\n");
    } else {
        flows.push_str("  flows {\n");
        for e in hub.edges() {
            let list = |s: &std::collections::BTreeSet<TechId>| {
                s.iter().map(tech_ref).collect::<Vec<_>>().join(", ")
            };
            let _ = writeln!(flows, "    flow {} {{", commodity(&e.commodity));
            let _ = writeln!(flows, "      from: {};", list(&e.producers));
            let _ = writeln!(flows, "      to: {};", list(&e.consumers));
            flows.push_str("    }\n");
        }
        flows.push_str("  }\n");
    }
    chunks.push(flows);

    if let Some(declared) = hub.declared() {
        let mut a = comment_block(Section::Assert);
        if declared.is_empty() {
            a.push_str("  assert {}\n");
        } else {
            a.push_str("  assert {\n");
            for (name, set) in declared {
                if set.is_empty() {
                    let _ = writeln!(a, "    {name} = {{}};");
                } else {
                    let _ = writeln!(a, "    {name} = {{ {} }};", commodity_list(set));
                }
            }
            a.push_str("  }\n");
        }
        chunks.push(a);
    }
    let end = comment_block(Section::End);
    if !end.is_empty() {
        chunks.push(end);
    }

    let body = chunks
        .into_iter()
        .filter(|c| !c.is_empty())
        .collect::<Vec<_>>()
        .join("\n");
    format!("hub {} {{\n{body}}}\n", quote(hub.id()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::model::{assemble_hub, TechGraph};

    const SRC: &str = r#"hub "g" {
  location l1 { name = "Greenland"; potential = wind: high; demand = low; }
  tech electrolyzer@l1 { in: H2O, electricity; out: O2, H2; }
  tech Wind@l1 { in: ; out: electricity; }
  tech "sea pump"@l1 kind import { in: ; out: "sea water", CH4(g); }
  flows {
    flow electricity { from: Wind@l1; to: electrolyzer@l1; }
    flow O2 { from: electrolyzer@l1; to: ; }
  }
  assert { C = { O2 }; E = {}; }
}"#;

    #[test]
    fn canonical_layout() {
        let hub = parse(SRC, "s.rreh").unwrap().hub;
        let text = serialize(&hub);
        let expected = r#"hub "g" {
  location l1 {
    name = "Greenland";
    potential = wind: high;
    demand = low;
  }

  tech Wind@l1 {
    in: ;
    out: electricity;
  }

  tech electrolyzer@l1 {
    in: H2O, electricity;
    out: H2, O2;
  }

  tech "sea pump"@l1 kind import {
    in: ;
    out: CH4(g), "sea water";
  }

  flows {
    flow electricity {
      from: Wind@l1;
      to: electrolyzer@l1;
    }
    flow O2 {
      from: electrolyzer@l1;
      to: ;
    }
  }

  assert {
    C = { O2 };
    E = {};
  }
}
"#;
        assert_eq!(text, expected);
        assert_eq!(parse(&text, "s2.rreh").unwrap().hub, hub);
    }

    #[test]
    fn empty_flows_block() {
        let hub = assemble_hub("e", vec![], TechGraph::default(), None).unwrap();
        assert_eq!(serialize(&hub), "hub \"e\" {\n  flows {}\n}\n");
    }

    #[test]
    fn comments_are_placed_before_sections() {
        let hub = parse(SRC, "s.rreh").unwrap().hub;
        let mut comments = BTreeMap::new();
        comments.insert(Section::Flows, vec!["Step 3".to_string()]);
        comments.insert(Section::End, vec!["done".to_string()]);
        let text = serialize_with_comments(&hub, &comments);
        assert!(text.contains("  # Step 3\n  flows {"));
        assert!(text.ends_with("  # done\n}\n"));
        assert_eq!(parse(&text, "c.rreh").unwrap().hub, hub);
    }

    #[test]
    fn quoting_escapes() {
        assert_eq!(ident("H2-Storage"), "H2-Storage");
        assert_eq!(ident("a \"b\""), "\"a \\\"b\\\"\"");
        assert_eq!(ident("x\\y"), "\"x\\\\y\"");
    }
}
