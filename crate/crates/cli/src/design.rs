use std::collections::BTreeMap;
use std::path::Path;

use rreh_core::dsl::{serialize_with_comments, Section};
use rreh_core::model::{validate, CommoditySet, Hub, SetName};

use crate::commands::load;
use crate::{Outcome, Style};

pub const STEPS: [&str; 7] = [
    "Define Export Commodities",
    "Select Locations",
    "Construct Technological Graph",
    "Consider Imports",
    "Assess Byproducts",
    "Identify Local Opportunities",
    "Optimize",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Satisfied,
    Unsatisfied,
    Review,
    Pending,
}

impl Mark {
    fn as_str(self) -> &'static str {
        match self {
            Mark::Satisfied => "satisfied",
            Mark::Unsatisfied => "unsatisfied",
            Mark::Review => "review required",
            Mark::Pending => "not run",
        }
    }
}

fn braces(set: &CommoditySet) -> String {
    format!("{{{}}}", set.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", "))
}

fn assess(hub: &Hub) -> [(Mark, String); 7] {
    let e = hub.set(SetName::E);
    let i = hub.set(SetName::I);
    let b = hub.set(SetName::B);
    let o = hub.set(SetName::O);
    let report = validate(hub);
    let graph_ok = !hub.technologies().is_empty() && report.is_valid();
    [
        (
            if e.is_empty() { Mark::Unsatisfied } else { Mark::Satisfied },
            format!("E = {}", braces(e)),
        ),
        (
            if hub.locations().is_empty() { Mark::Unsatisfied } else { Mark::Review },
            format!("{} location(s) declared; suitability is a judgment call", hub.locations().len()),
        ),
        (
            if graph_ok { Mark::Satisfied } else { Mark::Unsatisfied },
            format!(
                "{} technologies, {} flows, {} validation error(s)",
                hub.technologies().len(),
                hub.edges().len(),
                report.errors.len()
            ),
        ),
        (Mark::Review, format!("I = {}; check what could be imported instead of produced", braces(i))),
        (Mark::Review, format!("B = {}; check which byproducts could be reused", braces(b))),
        (
            if o.is_empty() { Mark::Unsatisfied } else { Mark::Satisfied },
            format!("O = {}", braces(o)),
        ),
        (Mark::Pending, "run `rrehc optimize` with a techno-economic annex".to_string()),
    ]
}

fn step_lines(k: usize, status: Option<&(Mark, String)>) -> Vec<String> {
    let mut head = format!("Step {}: {}", k + 1, STEPS[k]);
    let mut lines = Vec::new();
    if let Some((mark, detail)) = status {
        head.push_str(&format!(" [{}]", mark.as_str()));
        lines.push(head);
        lines.push(format!("  {detail}"));
    } else {
        lines.push(head);
    }
    lines
}

const SCAFFOLD: &str = r#"hub "new-hub" {
  # Step 1: Define Export Commodities
  #   List each exported commodity as the input of an export technology.
  #
  # Step 2: Select Locations
  #   One block per site: name, renewable potential per resource, demand.
  location l1 {
    name = "site";
    potential = wind: high;
    demand = low;
  }

  # Step 3: Construct Technological Graph
  #   Technologies with their input and output commodities.
  #
  # Step 4: Consider Imports
  #   Commodities scarce on site can enter through `kind import` technologies.
  tech Wind@l1 { in: ; out: electricity; }

  tech export@l1 kind export { in: electricity; out: ; }

  # Step 5: Assess Byproducts
  #   Outputs routed to no consumer are byproducts; run `rrehc derive --set B`.
  #
  # Step 6: Identify Local Opportunities
  #   Commodities serving local demand go into `kind opportunity` technologies.
  flows {
    flow electricity {
      from: Wind@l1;
      to: export@l1;
    }
  }

  # Step 7: Optimize
  #   Write a techno-economic annex and run `rrehc optimize`.
}
"#;

pub fn design(from: Option<&Path>, style: Style) -> Outcome {
    let Some(path) = from else {
        return Outcome {
            stdout: format!("# rreh design scaffold: seven steps, top to bottom.\n{SCAFFOLD}"),
            ..Outcome::default()
        };
    };
    let doc = match load(path, style) {
        Ok(d) => d,
        Err(o) => return o,
    };
    let status = assess(&doc.hub);
    let mut comments: BTreeMap<Section, Vec<String>> = BTreeMap::new();
    let placement = [
        Section::Locations,
        Section::Locations,
        Section::Technologies,
        Section::Technologies,
        Section::Flows,
        Section::Flows,
        Section::End,
    ];
    for (k, section) in placement.iter().enumerate() {
        let block = comments.entry(*section).or_default();
        if !block.is_empty() {
            block.push(String::new());
        }
        block.extend(step_lines(k, Some(&status[k])));
    }
    let mut stdout = format!("# rreh design checklist for {}\n", path.display());
    for (k, (mark, _)) in status.iter().enumerate() {
        stdout.push_str(&format!("#   {}. {:<30} {}\n", k + 1, STEPS[k], mark.as_str()));
    }
    stdout.push_str(&serialize_with_comments(&doc.hub, &comments));
    Outcome {
        stdout,
        ..Outcome::default()
    }
}
