use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use rreh_core::diff::{diff_hubs, render_diff, DiffFormat};
use rreh_core::dsl::{export_dot, export_model_skeleton, parse, EntityKey, HubDocument, ParseDiagnostic, SourceSpan};
use rreh_core::model::{validate as validate_hub, CommoditySet, Finding, SetName, Severity, Subject, ValidationReport};
use rreh_core::optimize::{
    parse_annex, report, solve, Certificate, DemandSpec, LpStatus, OptimizeError, ProfileSource, ReportFormat,
    SizingProblem, SolverOptions,
};
use rreh_core::par::map_ordered;

use crate::{Outcome, Style};

pub const VALIDATE_SCHEMA: &str = "rreh-validate/1";
pub const DERIVE_SCHEMA: &str = "rreh-derive/1";

fn render_diagnostics(diags: &[ParseDiagnostic], style: Style) -> String {
    let mut out = String::new();
    for d in diags {
        let sev = if d.is_error() {
            style.paint("error", "31")
        } else {
            style.paint("warning", "33")
        };
        let _ = write!(out, "{}: {sev}: {}", d.span, d.message);
        if let Some(exp) = &d.expected {
            let _ = write!(out, " (expected {exp})");
        }
        out.push('\n');
        for n in &d.notes {
            let _ = writeln!(out, "  note: {n}");
        }
    }
    out
}

/// Reads and parses a hub file; failures map to exit code 2.
pub(crate) fn load(path: &Path, style: Style) -> Result<HubDocument, Outcome> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Outcome::fail(2, format!("{display}: cannot read: {e}")))?;
    parse(&text, &display).map_err(|diags| Outcome {
        stdout: String::new(),
        stderr: render_diagnostics(&diags, style),
        code: 2,
    })
}

fn subject_key(s: &Subject) -> EntityKey {
    match s {
        Subject::Hub => EntityKey::Hub,
        Subject::Location(l) => EntityKey::Location(l.clone()),
        Subject::Technology(t) => EntityKey::Technology(t.clone()),
        Subject::Flow(i) => EntityKey::Flow(*i),
        Subject::Set(n) => EntityKey::DeclaredSet(*n),
    }
}

fn finding_span<'a>(doc: &'a HubDocument, f: &Finding) -> Option<&'a SourceSpan> {
    doc.span(&subject_key(&f.subject)).or_else(|| doc.span(&EntityKey::Hub))
}

fn render_findings(doc: &HubDocument, report: &ValidationReport, style: Style) -> String {
    let mut out = String::new();
    for f in report.all() {
        let (word, color) = match f.severity() {
            Severity::Error => ("error", "31"),
            Severity::Warning => ("warning", "33"),
            Severity::Info => ("info", "36"),
        };
        if style.quiet && f.severity() == Severity::Info {
            continue;
        }
        let at = finding_span(doc, f).map(|s| format!("{s}: ")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{at}{}[{}]: {} ({})",
            style.paint(word, color),
            f.code.as_str(),
            f.message,
            f.subject
        );
    }
    out
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

#[derive(Serialize)]
struct JsonFinding<'a> {
    code: &'a str,
    severity: String,
    subject: String,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    span: Option<&'a SourceSpan>,
}

#[derive(Serialize)]
struct JsonFile<'a> {
    file: String,
    status: &'static str,
    errors: Vec<JsonFinding<'a>>,
    warnings: Vec<JsonFinding<'a>>,
    infos: Vec<JsonFinding<'a>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    diagnostics: Vec<ParseDiagnostic>,
}

fn json_findings<'a>(doc: &'a HubDocument, fs: &'a [Finding]) -> Vec<JsonFinding<'a>> {
    fs.iter()
        .map(|f| JsonFinding {
            code: f.code.as_str(),
            severity: f.severity().to_string(),
            subject: f.subject.to_string(),
            message: &f.message,
            span: finding_span(doc, f),
        })
        .collect()
}

enum Checked {
    Parsed(Box<HubDocument>, ValidationReport),
    Failed(Outcome),
}

fn exit_for(report: &ValidationReport, strict: bool) -> u8 {
    if !report.errors.is_empty() || (strict && !report.warnings.is_empty()) {
        1
    } else {
        0
    }
}

pub fn validate(files: &[PathBuf], json: bool, style: Style) -> Outcome {
    // Files are checked concurrently; output is assembled in input order.
    let checked: Vec<Checked> = map_ordered(files, |path| match load(path, style) {
        Ok(doc) => {
            let report = validate_hub(&doc.hub);
            Checked::Parsed(Box::new(doc), report)
        }
        Err(o) => Checked::Failed(o),
    });
    let mut out = Outcome::default();
    if json {
        let mut entries = Vec::new();
        for (path, c) in files.iter().zip(&checked) {
            let file = path.display().to_string();
            match c {
                Checked::Parsed(doc, report) => {
                    let conv = |fs| json_findings(doc, fs);
                    out.code = out.code.max(exit_for(report, style.strict));
                    entries.push(JsonFile {
                        file,
                        status: if report.is_valid() { "valid" } else { "invalid" },
                        errors: conv(&report.errors),
                        warnings: conv(&report.warnings),
                        infos: conv(&report.infos),
                        diagnostics: doc.warnings.clone(),
                    });
                }
                Checked::Failed(o) => {
                    out.code = out.code.max(o.code);
                    let path_str = path.display().to_string();
                    let diagnostics = match std::fs::read_to_string(path) {
                        Ok(text) => parse(&text, &path_str).err().unwrap_or_default(),
                        Err(_) => Vec::new(),
                    };
                    out.stderr.push_str(&o.stderr);
                    entries.push(JsonFile {
                        file,
                        status: "parse-error",
                        errors: vec![],
                        warnings: vec![],
                        infos: vec![],
                        diagnostics,
                    });
                }
            }
        }
        let doc = serde_json::json!({ "schema": VALIDATE_SCHEMA, "files": entries });
        out.stdout = serde_json::to_string_pretty(&doc).expect("json") + "\n";
        return out;
    }
    for (path, c) in files.iter().zip(checked) {
        match c {
            Checked::Parsed(doc, report) => {
                if !style.quiet {
                    out.stdout.push_str(&render_diagnostics(&doc.warnings, style));
                }
                out.stdout.push_str(&render_findings(&doc, &report, style));
                if !style.quiet {
                    let verdict = if report.is_valid() {
                        style.paint("valid", "32")
                    } else {
                        style.paint("invalid", "31")
                    };
                    let _ = writeln!(
                        out.stdout,
                        "{}: {verdict} ({}, {}, {})",
                        path.display(),
                        plural(report.errors.len(), "error"),
                        plural(report.warnings.len(), "warning"),
                        plural(report.infos.len(), "info")
                    );
                }
                out.code = out.code.max(exit_for(&report, style.strict));
            }
            Checked::Failed(o) => {
                out.stderr.push_str(&o.stderr);
                out.code = out.code.max(o.code);
            }
        }
    }
    out
}

fn braces(set: &CommoditySet) -> String {
    format!("{{{}}}", set.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", "))
}

/// `None` when no assertion exists for the set, else mismatch details.
fn compare(doc: &HubDocument, name: SetName) -> Option<Result<(), (CommoditySet, CommoditySet)>> {
    let declared = doc.hub.declared()?.get(&name)?;
    let derived = doc.hub.set(name);
    if declared == derived {
        Some(Ok(()))
    } else {
        Some(Err((
            derived.difference(declared).cloned().collect(),
            declared.difference(derived).cloned().collect(),
        )))
    }
}

pub fn derive(path: &Path, set: &str, json: bool, style: Style) -> Outcome {
    let names: Vec<SetName> = if set.eq_ignore_ascii_case("all") {
        SetName::ALL.to_vec()
    } else {
        match SetName::from_str(set) {
            Ok(n) => vec![n],
            Err(_) => return Outcome::fail(2, format!("--set: expected C, E, I, B, O or all, got {set:?}")),
        }
    };
    let doc = match load(path, style) {
        Ok(d) => d,
        Err(o) => return o,
    };
    let mut out = Outcome::default();
    let mut mismatch = false;
    if json {
        let mut sets = serde_json::Map::new();
        let mut checks = serde_json::Map::new();
        for &n in &names {
            let members: Vec<&str> = doc.hub.set(n).iter().map(|c| c.as_str()).collect();
            sets.insert(n.as_str().to_string(), serde_json::json!(members));
            if let Some(r) = compare(&doc, n) {
                mismatch |= r.is_err();
                checks.insert(n.as_str().to_string(), serde_json::json!(if r.is_ok() { "MATCH" } else { "MISMATCH" }));
            }
        }
        let v = serde_json::json!({
            "schema": DERIVE_SCHEMA,
            "file": path.display().to_string(),
            "sets": sets,
            "assert": checks,
        });
        out.stdout = serde_json::to_string_pretty(&v).expect("json") + "\n";
    } else if let [n] = names.as_slice() {
        let members = doc.hub.set(*n).iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", ");
        let _ = writeln!(out.stdout, "{members}");
        if let Some(r) = compare(&doc, *n) {
            mismatch |= r.is_err();
            out.stdout.push_str(&check_line(&format!("{} ", n.as_str()), &r, style));
        }
    } else {
        for &n in &names {
            let _ = write!(out.stdout, "{} = {}", n.as_str(), braces(doc.hub.set(n)));
            match compare(&doc, n) {
                Some(r) => {
                    mismatch |= r.is_err();
                    out.stdout.push_str("  ");
                    out.stdout.push_str(&check_line("", &r, style));
                }
                None => out.stdout.push('\n'),
            }
        }
    }
    if mismatch && style.strict {
        out.code = 1;
    }
    out
}

fn check_line(label: &str, r: &Result<(), (CommoditySet, CommoditySet)>, style: Style) -> String {
    match r {
        Ok(()) => format!("{label}{}\n", style.paint("MATCH", "32")),
        Err((derived_only, declared_only)) => format!(
            "{label}{} (derived only {}, declared only {})\n",
            style.paint("MISMATCH", "31"),
            braces(derived_only),
            braces(declared_only)
        ),
    }
}

fn require_valid(doc: &HubDocument, label: &str, style: Style) -> Result<(), Outcome> {
    let report = validate_hub(&doc.hub);
    if report.is_valid() {
        return Ok(());
    }
    let mut stderr = render_findings(doc, &report, Style { quiet: true, ..style });
    let _ = writeln!(stderr, "{label} has {}", plural(report.errors.len(), "validation error"));
    Err(Outcome {
        stdout: String::new(),
        stderr,
        code: 1,
    })
}

pub fn diff(left: &Path, right: &Path, json: bool, expect_same: bool, style: Style) -> Outcome {
    let mut docs = Vec::new();
    for (side, path) in [("left", left), ("right", right)] {
        let doc = match load(path, style) {
            Ok(d) => d,
            Err(o) => return o,
        };
        if let Err(o) = require_valid(&doc, &format!("{side} hub {}", path.display()), style) {
            return o;
        }
        docs.push(doc);
    }
    let report = match diff_hubs(&docs[0].hub, &docs[1].hub) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(1, e.to_string()),
    };
    let format = if json { DiffFormat::Json } else { DiffFormat::Table };
    Outcome {
        stdout: render_diff(&report, format),
        stderr: String::new(),
        code: u8::from(expect_same && !report.is_identical()),
    }
}

pub fn export(path: &Path, dot: bool, expand: bool, output: Option<&Path>, style: Style) -> Outcome {
    let doc = match load(path, style) {
        Ok(d) => d,
        Err(o) => return o,
    };
    if let Err(o) = require_valid(&doc, &path.display().to_string(), style) {
        return o;
    }
    let rendered = if dot {
        export_dot(&doc.hub, expand)
    } else {
        export_model_skeleton(&doc.hub)
    };
    let counts = if dot {
        let mut s = format!("{}, {}", plural(rendered.nodes, "node"), plural(rendered.edges, "edge"));
        if rendered.junctions > 0 {
            let _ = write!(s, ", {}", plural(rendered.junctions, "junction"));
        }
        s
    } else {
        format!(
            "{}, {}",
            plural(rendered.nodes, "node block"),
            plural(rendered.edges, "hyperedge block")
        )
    };
    let mut out = Outcome::default();
    match output {
        Some(target) => {
            if let Err(e) = std::fs::write(target, &rendered.text) {
                return Outcome::fail(2, format!("{}: cannot write: {e}", target.display()));
            }
            if !style.quiet {
                let _ = writeln!(out.stdout, "wrote {}: {counts}", target.display());
            }
        }
        None => {
            out.stdout = rendered.text;
            if !style.quiet {
                let _ = writeln!(out.stderr, "{counts}");
            }
        }
    }
    out
}

pub struct OptimizeArgs {
    pub file: PathBuf,
    pub annex: PathBuf,
    pub profiles_dir: Option<PathBuf>,
    pub horizon: Option<usize>,
    pub demands: Vec<String>,
    pub format: ReportFormat,
    pub seed: Option<u64>,
}

fn exit_code(e: &OptimizeError) -> u8 {
    match e {
        OptimizeError::InvalidHub(_) => 1,
        OptimizeError::UnreachableDemand { .. } | OptimizeError::NotOptimal(_) => 3,
        OptimizeError::NumericalBreakdown(_) => 4,
        _ => 2,
    }
}

pub fn optimize(args: &OptimizeArgs, style: Style) -> Outcome {
    let doc = match load(&args.file, style) {
        Ok(d) => d,
        Err(o) => return o,
    };
    if let Err(o) = require_valid(&doc, &args.file.display().to_string(), style) {
        return o;
    }
    let annex_text = match std::fs::read_to_string(&args.annex) {
        Ok(t) => t,
        Err(e) => return Outcome::fail(2, format!("{}: cannot read: {e}", args.annex.display())),
    };
    let mut annex = match parse_annex(&annex_text, &doc.hub) {
        Ok(a) => a,
        Err(e) => return Outcome::fail(exit_code(&e), format!("{}: {e}", args.annex.display())),
    };
    if let Some(h) = args.horizon {
        if h == 0 {
            return Outcome::fail(2, "--horizon must be at least 1");
        }
        annex.horizon.steps = h;
    }
    for spec in &args.demands {
        let d = match DemandSpec::from_str(spec) {
            Ok(d) => d,
            Err(e) => return Outcome::fail(2, format!("--demand: {e}")),
        };
        annex.demands.retain(|x| x.commodity != d.commodity);
        annex.demands.push(d);
    }
    let source = ProfileSource {
        dir: args.profiles_dir.clone(),
        seed: args.seed,
    };
    let problem = match SizingProblem::from_annex(doc.hub.clone(), annex, &source) {
        Ok(p) => p,
        Err(e) => return Outcome::fail(exit_code(&e), e.to_string()),
    };
    let sol = match solve(&problem, &SolverOptions::default()) {
        Ok(s) => s,
        Err(e) => return Outcome::fail(exit_code(&e), e.to_string()),
    };
    if sol.status == LpStatus::Optimal {
        return match report(&sol, &problem, args.format) {
            Ok(text) => Outcome {
                stdout: text,
                ..Outcome::default()
            },
            Err(e) => Outcome::fail(exit_code(&e), e.to_string()),
        };
    }
    let mut out = Outcome {
        code: 3,
        ..Outcome::default()
    };
    let _ = writeln!(out.stdout, "status: {}", sol.status.as_str());
    let verified = if sol.certificate_verified { "verified" } else { "NOT verified" };
    match &sol.certificate {
        Some(Certificate::Farkas { y }) => {
            let support = y.iter().filter(|v| v.abs() > 1e-12).count();
            let _ = writeln!(out.stdout, "certificate: Farkas multipliers on {support} constraint(s), {verified}");
        }
        Some(Certificate::Ray { direction, .. }) => {
            let support = direction.iter().filter(|v| v.abs() > 1e-12).count();
            let _ = writeln!(out.stdout, "certificate: improving ray over {support} variable(s), {verified}");
        }
        None => {
            let _ = writeln!(out.stdout, "certificate: none");
        }
    }
    out
}
