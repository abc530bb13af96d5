//! The `.rreh` hub description language.
//!
//! ```text
//! document      := hubDecl ;
//! hubDecl       := "hub" STRING "{" locationDecl* techDecl* flowsBlock assertBlock? "}" ;
//! locationDecl  := "location" IDENT "{" "name" "=" STRING ";"
//!                  "potential" "=" potentialList ";" "demand" "=" LEVEL ";" "}" ;
//! potentialList := resourceLevel ("," resourceLevel)* ;
//! resourceLevel := IDENT ":" LEVEL ;
//! LEVEL         := "low" | "medium" | "high" ;
//! techDecl      := "tech" IDENT "@" IDENT ("kind" KIND)? "{"
//!                  "in" ":" commodityList? ";" "out" ":" commodityList? ";" "}" ;
//! KIND          := "import" | "export" | "opportunity" ;   (absent => generic)
//! flowsBlock    := "flows" "{" flowDecl* "}" ;
//! flowDecl      := "flow" COMMODITY "{" "from" ":" techRefList ";" "to" ":" techRefList? ";" "}" ;
//! techRef       := IDENT "@" IDENT ;
//! assertBlock   := "assert" "{" ( SETNAME "=" "{" commodityList? "}" ";" )* "}" ;
//! SETNAME       := "C" | "E" | "I" | "B" | "O" ;
//! COMMODITY     := IDENT ( "(" IDENT ")" )? ;
//! ```
//!
//! `IDENT` is either a bare word (letters, digits, `_`, and `-` after the
//! first character) or a double-quoted string, which allows names such as
//! `"sea water"`. Keywords are contextual. `#` starts a comment that runs to
//! the end of the line.

mod export;
mod lexer;
mod parser;
mod serialize;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::model::{CommodityId, Hub, LocationId, SetName, TechId};

pub use export::{export_dot, export_model_skeleton, Rendered, SKELETON_HEADER};
pub use serialize::{serialize, serialize_with_comments, Section};

/// Internal 1-based position of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Pos {
    pub line: u32,
    pub col: u32,
    pub len: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub(crate) fn at(file: &str, pos: Pos) -> Self {
        Self {
            file: file.to_string(),
            line: pos.line.max(1),
            column: pos.col.max(1),
            length: pos.len,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagSeverity {
    Error,
    Warning,
}

impl fmt::Display for DiagSeverity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagSeverity::Error => "error",
            DiagSeverity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub span: SourceSpan,
    pub severity: DiagSeverity,
    pub message: String,
    /// Description of the tokens that would have been accepted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ParseDiagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == DiagSeverity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.severity, self.message)?;
        for note in &self.notes {
            write!(f, "\n  note: {note}")?;
        }
        Ok(())
    }
}

/// Anything in a document that carries a declaration span.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityKey {
    Hub,
    Location(LocationId),
    Technology(TechId),
    /// Hyperedge by declaration index.
    Flow(usize),
    DeclaredSet(SetName),
    DeclaredEntry(SetName, CommodityId),
}

#[derive(Debug, Clone)]
pub struct HubDocument {
    pub hub: Hub,
    pub spans: BTreeMap<EntityKey, SourceSpan>,
    /// Hex SHA-256 of the source text.
    pub source_hash: String,
    /// Non-fatal diagnostics.
    pub warnings: Vec<ParseDiagnostic>,
}

impl HubDocument {
    pub fn span(&self, key: &EntityKey) -> Option<&SourceSpan> {
        self.spans.get(key)
    }
}

pub fn source_digest(source: &str) -> String {
    hex::encode(Sha256::digest(source.as_bytes()))
}

/// Parses a `.rreh` document. On failure every diagnostic (errors and
/// warnings, ordered by position) is returned.
pub fn parse(source: &str, file_name: &str) -> Result<HubDocument, Vec<ParseDiagnostic>> {
    parser::parse_document(source, file_name)
}
