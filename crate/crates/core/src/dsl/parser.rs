use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{lex, Tok, Token};
use super::{source_digest, DiagSeverity, EntityKey, HubDocument, ParseDiagnostic, Pos, SourceSpan};
use crate::model::{
    assemble_hub, normalize_ident, CommodityId, CommoditySet, DeclaredSets, Hyperedge, Level,
    Location, LocationId, SetName, TechGraph, TechId, Technology, TechnologyKind,
};

/// Marker for "a diagnostic has been recorded; unwind to the recovery point".
struct Failed;

type PResult<T> = Result<T, Failed>;

#[derive(Debug, Clone)]
struct Spanned<T> {
    value: T,
    pos: Pos,
}

struct LocationAst {
    id: Spanned<String>,
    name: String,
    potential: Vec<(Spanned<String>, Level)>,
    demand: Level,
}

struct TechAst {
    name: Spanned<String>,
    location: Spanned<String>,
    kind: TechnologyKind,
    inputs: Vec<Spanned<CommodityId>>,
    outputs: Vec<Spanned<CommodityId>>,
}

struct TechRef {
    name: String,
    location: String,
}

struct FlowAst {
    commodity: Spanned<CommodityId>,
    from: Vec<Spanned<TechRef>>,
    to: Vec<Spanned<TechRef>>,
}

struct AssertAst {
    set: Spanned<SetName>,
    items: Vec<Spanned<CommodityId>>,
}

#[derive(Default)]
struct HubAst {
    id: Option<Spanned<String>>,
    locations: Vec<LocationAst>,
    techs: Vec<TechAst>,
    flows: Vec<FlowAst>,
    asserts: Option<Vec<AssertAst>>,
    /// Ids of declarations that failed to parse; references to them are not
    /// reported again.
    broken_locations: BTreeSet<String>,
    broken_techs: BTreeSet<(String, String)>,
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    file: &'a str,
    diags: Vec<ParseDiagnostic>,
}

const TOP_SYNC: &[&str] = &["location", "tech", "flows", "assert"];
const FLOW_SYNC: &[&str] = &["flow"];

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_pos(&self) -> Pos {
        self.toks[self.pos].pos
    }

    fn name_at(&self, i: usize) -> Option<String> {
        match &self.toks.get(i)?.tok {
            Tok::Word(w) => Some(w.clone()),
            Tok::Str(s) => Some(normalize_ident(s)),
            _ => None,
        }
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if !matches!(t.tok, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn diag(&mut self, pos: Pos, severity: DiagSeverity, message: String, expected: Option<String>, notes: Vec<String>) {
        self.diags.push(ParseDiagnostic {
            span: SourceSpan::at(self.file, pos),
            severity,
            message,
            expected,
            notes,
        });
    }

    fn error(&mut self, pos: Pos, message: String) {
        self.diag(pos, DiagSeverity::Error, message, None, vec![]);
    }

    fn unexpected(&mut self, expected: &str) -> Failed {
        let found = self.peek().describe();
        let pos = self.peek_pos();
        self.diag(
            pos,
            DiagSeverity::Error,
            format!("expected {expected}, found {found}"),
            Some(expected.to_string()),
            vec![],
        );
        Failed
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<Pos> {
        if self.at_word(w) {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&format!("'{w}'")))
        }
    }

    /// Bare word or quoted string, normalized.
    fn ident(&mut self, what: &str) -> PResult<Spanned<String>> {
        match self.peek().clone() {
            Tok::Word(w) => {
                let pos = self.bump().pos;
                Ok(Spanned { value: w, pos })
            }
            Tok::Str(s) => {
                let pos = self.bump().pos;
                let value = normalize_ident(&s);
                if value.is_empty() {
                    self.error(pos, format!("{what} must not be empty"));
                    return Err(Failed);
                }
                Ok(Spanned { value, pos })
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn string(&mut self, what: &str) -> PResult<Spanned<String>> {
        match self.peek().clone() {
            Tok::Str(s) => {
                let pos = self.bump().pos;
                Ok(Spanned {
                    value: normalize_ident(&s),
                    pos,
                })
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn level(&mut self) -> PResult<Level> {
        if let Tok::Word(w) = self.peek() {
            if let Ok(l) = w.parse::<Level>() {
                self.bump();
                return Ok(l);
            }
        }
        Err(self.unexpected("'low', 'medium' or 'high'"))
    }

    fn commodity(&mut self) -> PResult<Spanned<CommodityId>> {
        let base = self.ident("commodity")?;
        let mut pos = base.pos;
        let mut phase = None;
        if *self.peek() == Tok::LParen {
            self.bump();
            let p = self.ident("phase tag")?;
            let close = self.expect(Tok::RParen)?;
            pos.len = (close.col + 1).saturating_sub(pos.col).max(pos.len);
            if close.line != pos.line {
                pos.len = base.pos.len;
            }
            phase = Some(p.value);
        }
        match CommodityId::with_phase(&base.value, phase.as_deref()) {
            Ok(c) => Ok(Spanned { value: c, pos }),
            Err(e) => {
                self.error(pos, e.to_string());
                Err(Failed)
            }
        }
    }

    /// `commodityList?` terminated by `end` (not consumed).
    fn commodity_list(&mut self, end: Tok) -> PResult<Vec<Spanned<CommodityId>>> {
        let mut out = Vec::new();
        if *self.peek() == end {
            return Ok(out);
        }
        loop {
            out.push(self.commodity()?);
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn tech_ref(&mut self) -> PResult<Spanned<TechRef>> {
        let name = self.ident("technology name")?;
        self.expect(Tok::At)?;
        let loc = self.ident("location id")?;
        let len = if loc.pos.line == name.pos.line {
            loc.pos.col + loc.pos.len - name.pos.col
        } else {
            name.pos.len
        };
        Ok(Spanned {
            value: TechRef {
                name: name.value,
                location: loc.value,
            },
            pos: Pos { len, ..name.pos },
        })
    }

    fn tech_ref_list(&mut self, allow_empty: bool) -> PResult<Vec<Spanned<TechRef>>> {
        let mut out = Vec::new();
        if *self.peek() == Tok::Semi {
            if allow_empty {
                return Ok(out);
            }
            return Err(self.unexpected("technology reference"));
        }
        loop {
            out.push(self.tech_ref()?);
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        Ok(out)
    }

    /// Skips the rest of a failed declaration that started at token `start`.
    fn recover(&mut self, start: usize, sync: &[&str]) {
        let mut depth: i32 = self.toks[start..self.pos]
            .iter()
            .map(|t| match t.tok {
                Tok::LBrace => 1,
                Tok::RBrace => -1,
                _ => 0,
            })
            .sum::<i32>()
            .max(0);
        let mut i = self.pos;
        loop {
            match &self.toks[i].tok {
                Tok::Eof => break,
                Tok::Word(w) if i > start && sync.contains(&w.as_str()) => {
                    let prev = &self.toks[i - 1].tok;
                    if matches!(prev, Tok::Semi | Tok::RBrace | Tok::LBrace) {
                        break;
                    }
                }
                Tok::LBrace => depth += 1,
                Tok::RBrace => {
                    if depth == 0 {
                        break;
                    }
                    depth -= 1;
                    if depth == 0 {
                        i += 1;
                        break;
                    }
                }
                _ => {}
            }
            i += 1;
        }
        self.pos = i.max(self.pos);
    }

    fn skip_unexpected(&mut self) {
        if *self.peek() == Tok::LBrace {
            let start = self.pos;
            self.bump();
            self.recover(start, &[]);
        } else {
            self.bump();
        }
    }

    fn location(&mut self) -> PResult<LocationAst> {
        self.expect_word("location")?;
        let id = self.ident("location id")?;
        self.expect(Tok::LBrace)?;
        self.expect_word("name")?;
        self.expect(Tok::Eq)?;
        let name = self.string("location name string")?;
        self.expect(Tok::Semi)?;
        self.expect_word("potential")?;
        self.expect(Tok::Eq)?;
        let mut potential = Vec::new();
        loop {
            let tag = self.ident("resource tag")?;
            self.expect(Tok::Colon)?;
            let lvl = self.level()?;
            potential.push((tag, lvl));
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::Semi)?;
        self.expect_word("demand")?;
        self.expect(Tok::Eq)?;
        let demand = self.level()?;
        self.expect(Tok::Semi)?;
        self.expect(Tok::RBrace)?;
        Ok(LocationAst {
            id,
            name: name.value,
            potential,
            demand,
        })
    }

    fn tech(&mut self) -> PResult<TechAst> {
        self.expect_word("tech")?;
        let name = self.ident("technology name")?;
        self.expect(Tok::At)?;
        let location = self.ident("location id")?;
        let mut kind = TechnologyKind::Generic;
        if self.at_word("kind") {
            self.bump();
            kind = match self.peek() {
                Tok::Word(w) if w == "import" => TechnologyKind::Import,
                Tok::Word(w) if w == "export" => TechnologyKind::Export,
                Tok::Word(w) if w == "opportunity" => TechnologyKind::Opportunity,
                _ => return Err(self.unexpected("'import', 'export' or 'opportunity'")),
            };
            self.bump();
        }
        self.expect(Tok::LBrace)?;
        self.expect_word("in")?;
        self.expect(Tok::Colon)?;
        let inputs = self.commodity_list(Tok::Semi)?;
        self.expect(Tok::Semi)?;
        self.expect_word("out")?;
        self.expect(Tok::Colon)?;
        let outputs = self.commodity_list(Tok::Semi)?;
        self.expect(Tok::Semi)?;
        self.expect(Tok::RBrace)?;
        Ok(TechAst {
            name,
            location,
            kind,
            inputs,
            outputs,
        })
    }

    fn flow(&mut self) -> PResult<FlowAst> {
        self.expect_word("flow")?;
        let commodity = self.commodity()?;
        self.expect(Tok::LBrace)?;
        self.expect_word("from")?;
        self.expect(Tok::Colon)?;
        let from = self.tech_ref_list(false)?;
        self.expect(Tok::Semi)?;
        self.expect_word("to")?;
        self.expect(Tok::Colon)?;
        let to = self.tech_ref_list(true)?;
        self.expect(Tok::Semi)?;
        self.expect(Tok::RBrace)?;
        Ok(FlowAst { commodity, from, to })
    }

    fn flows_block(&mut self, ast: &mut HubAst) -> PResult<()> {
        self.expect_word("flows")?;
        self.expect(Tok::LBrace)?;
        loop {
            match self.peek() {
                Tok::Word(w) if w == "flow" => {
                    let start = self.pos;
                    match self.flow() {
                        Ok(f) => ast.flows.push(f),
                        Err(Failed) => self.recover(start, FLOW_SYNC),
                    }
                }
                Tok::RBrace => {
                    self.bump();
                    return Ok(());
                }
                Tok::Eof => return Err(self.unexpected("'flow' or '}'")),
                _ => {
                    let _ = self.unexpected("'flow' or '}'");
                    self.skip_unexpected();
                }
            }
        }
    }

    fn assert_entry(&mut self) -> PResult<AssertAst> {
        let name = self.ident("set name")?;
        let set = match name.value.parse::<SetName>() {
            Ok(s) => s,
            Err(_) => {
                self.diag(
                    name.pos,
                    DiagSeverity::Error,
                    format!("unknown set name '{}'", name.value),
                    Some("'C', 'E', 'I', 'B' or 'O'".into()),
                    vec![],
                );
                return Err(Failed);
            }
        };
        self.expect(Tok::Eq)?;
        self.expect(Tok::LBrace)?;
        let items = self.commodity_list(Tok::RBrace)?;
        self.expect(Tok::RBrace)?;
        self.expect(Tok::Semi)?;
        Ok(AssertAst {
            set: Spanned {
                value: set,
                pos: name.pos,
            },
            items,
        })
    }

    fn assert_block(&mut self) -> PResult<Vec<AssertAst>> {
        self.expect_word("assert")?;
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(out);
                }
                Tok::Eof => return Err(self.unexpected("set name or '}'")),
                _ => {
                    let start = self.pos;
                    match self.assert_entry() {
                        Ok(a) => out.push(a),
                        Err(Failed) => {
                            // skip to the end of this entry
                            let mut depth = 0;
                            loop {
                                match self.peek() {
                                    Tok::Eof => break,
                                    Tok::LBrace => depth += 1,
                                    Tok::RBrace if depth == 0 => break,
                                    Tok::RBrace => depth -= 1,
                                    Tok::Semi if depth == 0 => {
                                        self.bump();
                                        break;
                                    }
                                    _ => {}
                                }
                                self.bump();
                            }
                            if self.pos == start {
                                self.bump();
                            }
                        }
                    }
                }
            }
        }
    }

    fn document(&mut self) -> Option<HubAst> {
        if !self.at_word("hub") {
            let _ = self.unexpected("'hub'");
            return None;
        }
        self.bump();
        let mut ast = HubAst::default();
        match self.string("hub name string") {
            Ok(id) => ast.id = Some(id),
            Err(Failed) => {
                if matches!(self.peek(), Tok::Word(_)) {
                    self.bump();
                }
            }
        }
        if self.expect(Tok::LBrace).is_err() {
            return Some(ast);
        }

        // 0: locations, 1: techs, 2: after flows, 3: after assert
        let mut phase = 0;
        let mut saw_flows = false;
        loop {
            let start = self.pos;
            match self.peek().clone() {
                Tok::Word(w) if w == "location" => {
                    if phase > 0 {
                        let pos = self.peek_pos();
                        self.error(pos, "location declarations must come before technologies and flows".into());
                    }
                    match self.location() {
                        Ok(l) => ast.locations.push(l),
                        Err(Failed) => {
                            if let Some(id) = self.name_at(start + 1) {
                                ast.broken_locations.insert(id);
                            }
                            self.recover(start, TOP_SYNC);
                        }
                    }
                }
                Tok::Word(w) if w == "tech" => {
                    if phase > 1 {
                        let pos = self.peek_pos();
                        self.error(pos, "technology declarations must come before the flows block".into());
                    }
                    phase = phase.max(1);
                    match self.tech() {
                        Ok(t) => ast.techs.push(t),
                        Err(Failed) => {
                            let at = self.toks.get(start + 2).map(|t| &t.tok) == Some(&Tok::At);
                            if let (true, Some(n), Some(l)) = (at, self.name_at(start + 1), self.name_at(start + 3)) {
                                ast.broken_techs.insert((n, l));
                            }
                            self.recover(start, TOP_SYNC);
                        }
                    }
                }
                Tok::Word(w) if w == "flows" => {
                    if saw_flows {
                        let pos = self.peek_pos();
                        self.error(pos, "duplicate 'flows' block".into());
                    }
                    saw_flows = true;
                    phase = phase.max(2);
                    if self.flows_block(&mut ast).is_err() {
                        self.recover(start, TOP_SYNC);
                    }
                }
                Tok::Word(w) if w == "assert" => {
                    if !saw_flows {
                        let pos = self.peek_pos();
                        self.error(pos, "the assert block must follow the flows block".into());
                    } else if phase == 3 {
                        let pos = self.peek_pos();
                        self.error(pos, "duplicate 'assert' block".into());
                    }
                    phase = 3;
                    match self.assert_block() {
                        Ok(a) => ast.asserts.get_or_insert_with(Vec::new).extend(a),
                        Err(Failed) => self.recover(start, TOP_SYNC),
                    }
                }
                Tok::RBrace => {
                    if !saw_flows {
                        let _ = self.unexpected("'flows'");
                    }
                    self.bump();
                    break;
                }
                Tok::Eof => {
                    let _ = self.unexpected("'}'");
                    break;
                }
                _ => {
                    let expected = match phase {
                        0 => "'location', 'tech' or 'flows'",
                        1 => "'tech' or 'flows'",
                        2 => "'assert' or '}'",
                        _ => "'}'",
                    };
                    let _ = self.unexpected(expected);
                    self.skip_unexpected();
                }
            }
        }
        if !matches!(self.peek(), Tok::Eof) {
            let _ = self.unexpected("end of input");
        }
        Some(ast)
    }
}

fn near_misses<'a>(needle: &str, candidates: impl IntoIterator<Item = (&'a str, String)>) -> Vec<String> {
    let mut scored: Vec<(usize, String)> = candidates
        .into_iter()
        .filter_map(|(key, shown)| {
            let d = strsim::levenshtein(needle, key);
            (d <= 2).then_some((d, shown))
        })
        .collect();
    scored.sort();
    scored.dedup();
    scored.into_iter().map(|(_, s)| s).collect()
}

fn suggestion_note(candidates: &[String]) -> Vec<String> {
    if candidates.is_empty() {
        vec![]
    } else {
        let list = candidates.iter().map(|c| format!("`{c}`")).collect::<Vec<_>>().join(", ");
        vec![format!("did you mean {list}?")]
    }
}

struct Resolver<'a> {
    file: &'a str,
    diags: Vec<ParseDiagnostic>,
    spans: BTreeMap<EntityKey, SourceSpan>,
}

impl<'a> Resolver<'a> {
    fn span(&self, pos: Pos) -> SourceSpan {
        SourceSpan::at(self.file, pos)
    }

    fn push(&mut self, pos: Pos, severity: DiagSeverity, message: String, notes: Vec<String>) {
        let span = self.span(pos);
        self.diags.push(ParseDiagnostic {
            span,
            severity,
            message,
            expected: None,
            notes,
        });
    }

    fn duplicate(&mut self, pos: Pos, what: String, first: &SourceSpan) {
        self.push(
            pos,
            DiagSeverity::Error,
            format!("duplicate declaration of {what}"),
            vec![format!("first declared at {}:{}", first.line, first.column)],
        );
    }

    fn commodity_set(&mut self, items: &[Spanned<CommodityId>], context: &str) -> CommoditySet {
        let mut set = CommoditySet::new();
        for item in items {
            if !set.insert(item.value.clone()) {
                self.push(
                    item.pos,
                    DiagSeverity::Warning,
                    format!("{} listed twice in {context}", item.value),
                    vec![],
                );
            }
        }
        set
    }

    fn resolve(&mut self, ast: HubAst) -> Option<crate::model::Hub> {
        let hub_id = ast.id.as_ref().map(|s| s.value.clone()).unwrap_or_default();
        if let Some(id) = &ast.id {
            let span = self.span(id.pos);
            self.spans.insert(EntityKey::Hub, span);
        }

        let mut locations = Vec::new();
        for loc in &ast.locations {
            let id = LocationId::new(&loc.id.value).ok()?;
            let key = EntityKey::Location(id.clone());
            if let Some(first) = self.spans.get(&key).cloned() {
                self.duplicate(loc.id.pos, format!("location `{id}`"), &first);
                continue;
            }
            let span = self.span(loc.id.pos);
            self.spans.insert(key, span);
            let mut potential = BTreeMap::new();
            let mut first_tag: BTreeMap<String, Pos> = BTreeMap::new();
            for (tag, lvl) in &loc.potential {
                if let Some(prev) = first_tag.get(&tag.value) {
                    let prev = self.span(*prev);
                    self.duplicate(tag.pos, format!("potential tag `{}`", tag.value), &prev);
                    continue;
                }
                first_tag.insert(tag.value.clone(), tag.pos);
                potential.insert(tag.value.clone(), *lvl);
            }
            locations.push(Location::new(id, &loc.name, potential, loc.demand));
        }
        let location_ids: BTreeSet<String> = locations.iter().map(|l| l.id.to_string()).collect();

        let mut techs = Vec::new();
        for t in &ast.techs {
            let id = match TechId::new(&t.name.value, &t.location.value) {
                Ok(id) => id,
                Err(e) => {
                    self.push(t.name.pos, DiagSeverity::Error, e.to_string(), vec![]);
                    continue;
                }
            };
            let key = EntityKey::Technology(id.clone());
            if let Some(first) = self.spans.get(&key).cloned() {
                self.duplicate(t.name.pos, format!("technology `{id}`"), &first);
                continue;
            }
            let span = self.span(t.name.pos);
            self.spans.insert(key, span);
            if !location_ids.contains(id.location.as_str())
                && !ast.broken_locations.contains(id.location.as_str())
            {
                let cands = near_misses(
                    id.location.as_str(),
                    location_ids.iter().map(|l| (l.as_str(), l.clone())),
                );
                self.push(
                    t.location.pos,
                    DiagSeverity::Error,
                    format!("technology `{id}` references undeclared location `{}`", id.location),
                    suggestion_note(&cands),
                );
            }
            let inputs = self.commodity_set(&t.inputs, &format!("inputs of `{id}`"));
            let outputs = self.commodity_set(&t.outputs, &format!("outputs of `{id}`"));
            techs.push(Technology::new(id, t.kind, inputs, outputs));
        }

        let declared_ids: Vec<TechId> = techs.iter().map(|t| t.id.clone()).collect();
        let declared_set: BTreeSet<&TechId> = declared_ids.iter().collect();
        let mut edges = Vec::new();
        for (idx, flow) in ast.flows.iter().enumerate() {
            let span = self.span(flow.commodity.pos);
            self.spans.insert(EntityKey::Flow(idx), span);
            let resolve_list = |this: &mut Self, refs: &[Spanned<TechRef>], role: &str| {
                let mut out = BTreeSet::new();
                for r in refs {
                    let id = match TechId::new(&r.value.name, &r.value.location) {
                        Ok(id) => id,
                        Err(e) => {
                            this.push(r.pos, DiagSeverity::Error, e.to_string(), vec![]);
                            continue;
                        }
                    };
                    let broken = ast
                        .broken_techs
                        .contains(&(id.name.clone(), id.location.to_string()));
                    if broken {
                        continue;
                    }
                    if !declared_set.contains(&id) {
                        let cands = near_misses(
                            &id.name,
                            declared_ids.iter().map(|d| (d.name.as_str(), d.to_string())),
                        );
                        this.push(
                            r.pos,
                            DiagSeverity::Error,
                            format!(
                                "flow of {} references undeclared {role} technology `{id}`",
                                flow.commodity.value
                            ),
                            suggestion_note(&cands),
                        );
                        continue;
                    }
                    if !out.insert(id.clone()) {
                        this.push(
                            r.pos,
                            DiagSeverity::Warning,
                            format!("`{id}` listed twice in the same flow"),
                            vec![],
                        );
                    }
                }
                out
            };
            let producers = resolve_list(self, &flow.from, "producer");
            let consumers = resolve_list(self, &flow.to, "consumer");
            edges.push(Hyperedge {
                commodity: flow.commodity.value.clone(),
                producers,
                consumers,
            });
        }

        let declared = ast.asserts.as_ref().map(|asserts| {
            let mut sets = DeclaredSets::new();
            for a in asserts {
                let key = EntityKey::DeclaredSet(a.set.value);
                if let Some(first) = self.spans.get(&key).cloned() {
                    self.duplicate(a.set.pos, format!("assertion for set {}", a.set.value), &first);
                    continue;
                }
                let span = self.span(a.set.pos);
                self.spans.insert(key, span);
                let items = self.commodity_set(&a.items, &format!("assertion {}", a.set.value));
                for item in &a.items {
                    let span = self.span(item.pos);
                    self.spans
                        .entry(EntityKey::DeclaredEntry(a.set.value, item.value.clone()))
                        .or_insert(span);
                }
                sets.insert(a.set.value, items);
            }
            sets
        });

        if self.diags.iter().any(|d| d.is_error()) {
            return None;
        }
        match assemble_hub(&hub_id, locations, TechGraph::new(techs, edges), declared) {
            Ok(hub) => Some(hub),
            Err(e) => {
                self.push(Pos { line: 1, col: 1, len: 0 }, DiagSeverity::Error, e.to_string(), vec![]);
                None
            }
        }
    }
}

pub(super) fn parse_document(source: &str, file: &str) -> Result<HubDocument, Vec<ParseDiagnostic>> {
    let (toks, lex_diags) = lex(source);
    let mut parser = Parser {
        toks,
        pos: 0,
        file,
        diags: lex_diags
            .into_iter()
            .map(|d| ParseDiagnostic {
                span: SourceSpan::at(file, d.pos),
                severity: d.severity,
                message: d.message,
                expected: None,
                notes: vec![],
            })
            .collect(),
    };
    let ast = parser.document();
    let mut resolver = Resolver {
        file,
        diags: std::mem::take(&mut parser.diags),
        spans: BTreeMap::new(),
    };
    let syntax_ok = !resolver.diags.iter().any(|d| d.is_error());
    let hub = match ast {
        Some(ast) => resolver.resolve(ast),
        None => None,
    };
    let mut diags = resolver.diags;
    diags.sort_by(|a, b| {
        (a.span.line, a.span.column)
            .cmp(&(b.span.line, b.span.column))
            .then(a.severity.cmp(&b.severity))
    });
    match hub {
        Some(hub) if syntax_ok && !diags.iter().any(|d| d.is_error()) => Ok(HubDocument {
            hub,
            spans: resolver.spans,
            source_hash: source_digest(source),
            warnings: diags,
        }),
        _ => Err(diags),
    }
}

#[cfg(test)]
mod tests {
    use crate::dsl::{parse, EntityKey};
    use crate::model::{commodity, SetName, TechId, TechnologyKind};

    const GREENLAND: &str = r#"
hub "Greenland" {
  location l1 {
    name = "Greenland";
    potential = wind: high;
    demand = low;
  }
  tech Wind@l1 { in: ; out: electricity; }
  tech import@l1 kind import { in: ; out: H2O; }
  tech electrolyzer@l1 { in: electricity, H2O; out: H2, O2; }
  tech export@l1 kind export { in: H2; out: ; }
  flows {
    flow electricity { from: Wind@l1; to: electrolyzer@l1; }
    flow H2O { from: import@l1; to: electrolyzer@l1; }
    flow O2 { from: electrolyzer@l1; to: ; }
    flow H2 { from: electrolyzer@l1; to: export@l1; }
  }
  assert {
    B = { O2 };
    O = {};
  }
}
"#;

    fn errors(src: &str) -> Vec<String> {
        parse(src, "t.rreh")
            .err()
            .expect("should fail")
            .into_iter()
            .filter(|d| d.is_error())
            .map(|d| format!("{}:{} {}", d.span.line, d.span.column, d.message))
            .collect()
    }

    #[test]
    fn parses_greenland() {
        let doc = parse(GREENLAND, "greenland.rreh").unwrap();
        let hub = &doc.hub;
        assert_eq!(hub.id(), "Greenland");
        assert_eq!(hub.technologies().len(), 4);
        assert_eq!(hub.edges().len(), 4);
        assert_eq!(hub.locations().len(), 1);
        let imp = hub.graph().get(&TechId::new("import", "l1").unwrap()).unwrap();
        assert_eq!(imp.kind, TechnologyKind::Import);
        assert_eq!(hub.declared().unwrap()[&SetName::B].len(), 1);
        assert!(doc.warnings.is_empty());
    }

    #[test]
    fn spans_point_at_declaring_tokens() {
        let doc = parse(GREENLAND, "g.rreh").unwrap();
        let s = doc.span(&EntityKey::Technology(TechId::new("electrolyzer", "l1").unwrap())).unwrap();
        assert_eq!((s.line, s.column, s.length), (10, 8, 12));
        let f = doc.span(&EntityKey::Flow(2)).unwrap();
        assert_eq!((f.line, f.column), (15, 10));
        let l = doc.span(&EntityKey::Location(crate::model::LocationId::new("l1").unwrap())).unwrap();
        assert_eq!((l.line, l.column), (3, 12));
        assert!(doc.span(&EntityKey::DeclaredEntry(SetName::B, commodity("O2"))).is_some());
        assert!(doc.span(&EntityKey::DeclaredSet(SetName::O)).is_some());
        assert_eq!(doc.source_hash.len(), 64);
    }

    #[test]
    fn empty_file_expects_hub_at_origin() {
        let diags = parse("", "empty.rreh").unwrap_err();
        assert_eq!(diags.len(), 1);
        let d = &diags[0];
        assert!(d.message.starts_with("expected 'hub'"), "{}", d.message);
        assert_eq!((d.span.line, d.span.column), (1, 1));
        assert_eq!(d.expected.as_deref(), Some("'hub'"));
    }

    #[test]
    fn typo_in_flow_gets_near_miss_suggestion() {
        let src = GREENLAND.replace(
            "flow H2 { from: electrolyzer@l1;",
            "flow H2 { from: electorlyzer@l1;",
        );
        let diags = parse(&src, "t.rreh").unwrap_err();
        let d = diags.iter().find(|d| d.is_error()).unwrap();
        assert!(d.message.contains("electorlyzer@l1"), "{}", d.message);
        assert_eq!(d.notes, vec!["did you mean `electrolyzer@l1`?".to_string()]);
        assert_eq!((d.span.line, d.span.column), (16, 21));
    }

    #[test]
    fn recovers_and_reports_independent_errors() {
        let src = r#"hub "x" {
  location l1 { name = "a"; potential = wind high; demand = low; }
  tech A@l1 { in: ; out: e }
  tech B@l1 { in: e; out: ; }
  flows {
    flow e { from: A@l1; to B@l1; }
    flow e { from: ; to: B@l1; }
    flow e { from: A@l1; to: B@l1; }
  }
}"#;
        let errs = errors(src);
        assert_eq!(errs.len(), 4, "{errs:#?}");
        assert!(errs[0].starts_with("2:46 expected ':'"));
        assert!(errs[1].starts_with("3:28 expected ';'"));
        assert!(errs[2].starts_with("6:29 expected ':'"));
        assert!(errs[3].starts_with("7:20 expected technology reference"));
    }

    #[test]
    fn duplicates_and_undeclared_locations() {
        let src = r#"hub "x" {
  location l1 { name = "a"; potential = wind: high, wind: low; demand = low; }
  location l1 { name = "b"; potential = sun: high; demand = low; }
  tech A@l1 { in: ; out: e; }
  tech A@l1 { in: ; out: e; }
  tech B@l2 { in: e, e; out: ; }
  flows {}
}"#;
        let diags = parse(src, "t.rreh").unwrap_err();
        let errs: Vec<_> = diags.iter().filter(|d| d.is_error()).collect();
        assert_eq!(errs.len(), 4, "{errs:#?}");
        assert!(errs[0].message.contains("potential tag `wind`"));
        assert!(errs[1].message.contains("location `l1`"));
        assert_eq!(errs[1].notes, vec!["first declared at 2:12".to_string()]);
        assert!(errs[2].message.contains("technology `A@l1`"));
        assert!(errs[3].message.contains("undeclared location `l2`"));
        assert!(errs[3].notes[0].contains("`l1`"));
        assert!(diags.iter().any(|d| !d.is_error() && d.message.contains("listed twice")));
    }

    #[test]
    fn bom_is_rejected() {
        let src = format!("\u{feff}{GREENLAND}");
        let diags = parse(&src, "b.rreh").unwrap_err();
        assert!(diags[0].message.contains("byte order mark"));
    }

    #[test]
    fn quoted_names_phase_tags_and_comments() {
        let src = r#"# header comment
hub "Algeria  coast" {
  location l2 { name = "Algerian coast"; potential = renewable: high; demand = medium; }
  tech "Air Separation Unit"@l2 { in: electricity; out: N2, Ar; }  # inline
  tech Liquefaction@l2 { in: CH4(g); out: CH4 ( l ), "sea water"; }
  flows {
    flow "N2" { from: "Air  Separation Unit"@l2; to: ; }
  }
}"#;
        let doc = parse(src, "q.rreh").unwrap();
        assert_eq!(doc.hub.id(), "Algeria coast");
        let liq = doc.hub.graph().get(&TechId::new("Liquefaction", "l2").unwrap()).unwrap();
        assert!(liq.inputs.contains(&commodity("CH4(g)")));
        assert!(liq.outputs.contains(&commodity("CH4(l)")));
        assert!(liq.outputs.contains(&commodity("sea water")));
        assert!(doc.hub.edges()[0]
            .producers
            .contains(&TechId::new("Air Separation Unit", "l2").unwrap()));
    }

    #[test]
    fn ordering_violations_are_errors() {
        let src = r#"hub "x" {
  tech A@l1 { in: ; out: e; }
  location l1 { name = "a"; potential = w: high; demand = low; }
  flows {}
}"#;
        let errs = errors(src);
        assert_eq!(errs.len(), 1);
        assert!(errs[0].contains("must come before"));
    }

    #[test]
    fn missing_flows_block_and_trailing_garbage() {
        let errs = errors("hub \"x\" { }");
        assert!(errs[0].contains("expected 'flows'"));
        let errs = errors("hub \"x\" { flows {} } extra");
        assert!(errs[0].contains("expected end of input"));
    }

    #[test]
    fn bad_set_name_and_kind() {
        let src = r#"hub "x" {
  location l1 { name = "a"; potential = w: high; demand = low; }
  tech A@l1 kind sink { in: ; out: e; }
  flows {}
  assert { X = { e }; E = {}; }
}"#;
        let errs = errors(src);
        assert_eq!(errs.len(), 2, "{errs:?}");
        assert!(errs[0].contains("'import', 'export' or 'opportunity'"));
        assert!(errs[1].contains("unknown set name 'X'"));
    }
}
