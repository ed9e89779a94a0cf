//! SPARQL-star subset: `PREFIX`, `SELECT`, `WHERE` with triple patterns,
//! embedded quoted-triple patterns and `UNION` between braced groups.
//!
//! Semantics are set-based (results are deduplicated) with a deterministic
//! row order, since results are consumed as prompt context where duplicates
//! only add noise.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::store::{GraphStore, TermPattern, TriplePattern};
use crate::term::{Iri, Term, Triple};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("query parse error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("undeclared prefix '{prefix}:' at {line}:{column}")]
    UnknownPrefix { prefix: String, line: usize, column: usize },
    #[error("template {template:?} expects {expected} anchor, got {actual}")]
    AnchorKindMismatch { template: QueryTemplate, expected: &'static str, actual: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    Star,
    Vars(Vec<String>),
}

/// A parsed query: a projection over a union of pattern groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub prefixes: BTreeMap<String, String>,
    pub projection: Projection,
    /// UNION alternatives; each alternative is a joined pattern list.
    pub alternatives: Vec<Vec<TriplePattern>>,
}

/// Deduplicated solution rows in deterministic order. A cell is `None`
/// when the variable is unbound in that row.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolutionTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<Term>>>,
}

/// The three retrieval query shapes of the review pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryTemplate {
    /// Triples touching an entity at top level, in either direction.
    EntityContext,
    /// Triples touching an event (quoted triple), in either direction.
    EventContext,
    /// Risk categories attached to an event.
    RiskCategory,
}

pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    QueryParser::new(text).parse()
}

/// Instantiates one of the retrieval templates with a concrete anchor.
pub fn bind_template(template: QueryTemplate, anchor: &Term) -> Result<Query, QueryError> {
    let mismatch = |expected: &'static str| QueryError::AnchorKindMismatch {
        template,
        expected,
        actual: anchor.canonical(),
    };
    let var = |name: &str| TermPattern::Var(name.to_owned());
    let mut prefixes = BTreeMap::new();
    prefixes.insert(vocab::CKG_PREFIX.to_owned(), vocab::CKG_NS.to_owned());
    match template {
        QueryTemplate::EntityContext => {
            if anchor.as_iri().is_none() {
                return Err(mismatch("an IRI"));
            }
            Ok(Query {
                prefixes,
                projection: Projection::Vars(vec!["s".into(), "p".into(), "o".into()]),
                alternatives: vec![
                    vec![TriplePattern::new(var("s"), var("p"), TermPattern::Term(anchor.clone()))],
                    vec![TriplePattern::new(TermPattern::Term(anchor.clone()), var("p"), var("o"))],
                ],
            })
        }
        QueryTemplate::EventContext => {
            if anchor.as_quoted().is_none() {
                return Err(mismatch("a quoted triple"));
            }
            Ok(Query {
                prefixes,
                projection: Projection::Vars(vec!["s".into(), "p".into(), "o".into()]),
                alternatives: vec![
                    vec![TriplePattern::new(var("s"), var("p"), TermPattern::Term(anchor.clone()))],
                    vec![TriplePattern::new(TermPattern::Term(anchor.clone()), var("p"), var("o"))],
                ],
            })
        }
        QueryTemplate::RiskCategory => {
            if anchor.as_quoted().is_none() {
                return Err(mismatch("a quoted triple"));
            }
            // hasRiskLabel is accepted as a read-alias of hasRiskCategory.
            Ok(Query {
                prefixes,
                projection: Projection::Vars(vec!["r".into()]),
                alternatives: vec![
                    vec![TriplePattern::new(
                        TermPattern::Term(anchor.clone()),
                        TermPattern::iri(vocab::has_risk_category()),
                        var("r"),
                    )],
                    vec![TriplePattern::new(
                        TermPattern::Term(anchor.clone()),
                        TermPattern::iri(vocab::has_risk_label()),
                        var("r"),
                    )],
                ],
            })
        }
    }
}

pub fn evaluate(store: &GraphStore, query: &Query) -> SolutionTable {
    evaluate_collecting(store, query).0
}

/// Evaluates the query and additionally returns every asserted triple that
/// participated in a solution, for callers that need graph context rather
/// than bindings.
pub fn evaluate_collecting(store: &GraphStore, query: &Query) -> (SolutionTable, Vec<Triple>) {
    let header = match &query.projection {
        Projection::Vars(vars) => vars.clone(),
        Projection::Star => {
            let mut seen = Vec::new();
            for alt in &query.alternatives {
                for pattern in alt {
                    collect_vars(pattern, &mut seen);
                }
            }
            // lexicographic header keeps SELECT * independent of
            // pattern order
            seen.sort();
            seen
        }
    };

    let mut rows: BTreeSet<Vec<Option<Term>>> = BTreeSet::new();
    let mut touched: BTreeSet<Triple> = BTreeSet::new();
    for alt in &query.alternatives {
        // each partial solution carries the asserted triples it used
        let mut bindings: Vec<(BTreeMap<String, Term>, Vec<Triple>)> =
            vec![(BTreeMap::new(), Vec::new())];
        for pattern in alt {
            let mut next = Vec::new();
            for (binding, used) in &bindings {
                let lookup = substitute(pattern, binding);
                for candidate in store.matching(&lookup) {
                    let mut extended = binding.clone();
                    if unify(pattern, &candidate, &mut extended) {
                        let mut used = used.clone();
                        used.push(candidate);
                        next.push((extended, used));
                    }
                }
            }
            bindings = next;
            if bindings.is_empty() {
                break;
            }
        }
        for (binding, used) in bindings {
            rows.insert(header.iter().map(|v| binding.get(v).cloned()).collect());
            touched.extend(used);
        }
    }

    (
        SolutionTable { header, rows: rows.into_iter().collect() },
        touched.into_iter().collect(),
    )
}

fn collect_vars(pattern: &TriplePattern, out: &mut Vec<String>) {
    for tp in [&pattern.subject, &pattern.predicate, &pattern.object] {
        collect_term_vars(tp, out);
    }
}

fn collect_term_vars(tp: &TermPattern, out: &mut Vec<String>) {
    match tp {
        TermPattern::Var(name) => {
            if !out.contains(name) {
                out.push(name.clone());
            }
        }
        TermPattern::Quoted(inner) => collect_vars(inner, out),
        _ => {}
    }
}

/// Replaces bound variables with their terms so the store can pick a
/// selective index; unbound variables stay open.
fn substitute(pattern: &TriplePattern, binding: &BTreeMap<String, Term>) -> TriplePattern {
    TriplePattern::new(
        substitute_term(&pattern.subject, binding),
        substitute_term(&pattern.predicate, binding),
        substitute_term(&pattern.object, binding),
    )
}

fn substitute_term(tp: &TermPattern, binding: &BTreeMap<String, Term>) -> TermPattern {
    match tp {
        TermPattern::Var(name) => match binding.get(name) {
            Some(term) => TermPattern::Term(term.clone()),
            None => TermPattern::Var(name.clone()),
        },
        TermPattern::Quoted(inner) => TermPattern::Quoted(Box::new(substitute(inner, binding))),
        other => other.clone(),
    }
}

/// Binding-consistent unification: variables inside quoted patterns bind
/// exactly like top-level variables.
fn unify(pattern: &TriplePattern, triple: &Triple, binding: &mut BTreeMap<String, Term>) -> bool {
    unify_term(&pattern.subject, triple.subject(), binding)
        && unify_term(&pattern.predicate, &Term::Iri(triple.predicate().clone()), binding)
        && unify_term(&pattern.object, triple.object(), binding)
}

fn unify_term(tp: &TermPattern, term: &Term, binding: &mut BTreeMap<String, Term>) -> bool {
    match tp {
        TermPattern::Any => true,
        TermPattern::Var(name) => match binding.get(name) {
            Some(bound) => bound == term,
            None => {
                binding.insert(name.clone(), term.clone());
                true
            }
        },
        TermPattern::Term(t) => t == term,
        TermPattern::Quoted(inner) => match term {
            Term::Quoted(t) => unify(inner, t, binding),
            _ => false,
        },
    }
}

struct QueryParser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    prefixes: BTreeMap<String, String>,
}

impl QueryParser {
    fn new(text: &str) -> Self {
        QueryParser {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
            prefixes: BTreeMap::new(),
        }
    }

    fn parse(mut self) -> Result<Query, QueryError> {
        self.skip_ws();
        while self.peek_keyword("PREFIX") {
            self.parse_prefix_decl()?;
            self.skip_ws();
        }
        self.expect_keyword("SELECT")?;
        self.skip_ws();
        let projection = if self.peek() == Some('*') {
            self.advance();
            Projection::Star
        } else {
            let mut vars = Vec::new();
            while self.peek() == Some('?') {
                vars.push(self.read_var()?);
                self.skip_ws();
            }
            if vars.is_empty() {
                return Err(self.syntax("expected '*' or at least one ?variable"));
            }
            Projection::Vars(vars)
        };
        self.skip_ws();
        self.expect_keyword("WHERE")?;
        self.skip_ws();
        self.expect_char('{')?;
        self.skip_ws();

        let alternatives = if self.peek() == Some('{') {
            let mut alts = vec![self.parse_group()?];
            loop {
                self.skip_ws();
                if self.peek_keyword("UNION") {
                    self.expect_keyword("UNION")?;
                    self.skip_ws();
                    alts.push(self.parse_group()?);
                } else {
                    break;
                }
            }
            alts
        } else {
            vec![self.parse_pattern_list('}')?]
        };
        self.skip_ws();
        self.expect_char('}')?;
        self.skip_ws();
        if !self.at_end() {
            return Err(self.syntax("unexpected trailing input"));
        }

        if let Projection::Vars(vars) = &projection {
            let mut used = Vec::new();
            for alt in &alternatives {
                for p in alt {
                    collect_vars(p, &mut used);
                }
            }
            for var in vars {
                if !used.contains(var) {
                    return Err(self.syntax(&format!(
                        "projected variable ?{var} does not appear in any pattern"
                    )));
                }
            }
        }

        Ok(Query { prefixes: self.prefixes, projection, alternatives })
    }

    fn parse_prefix_decl(&mut self) -> Result<(), QueryError> {
        self.expect_keyword("PREFIX")?;
        self.skip_ws();
        let prefix = self.read_bareword();
        if prefix.is_empty() {
            return Err(self.syntax("expected prefix name"));
        }
        self.expect_char(':')?;
        self.skip_ws();
        let iri = self.parse_iri_ref()?;
        self.prefixes.insert(prefix, iri.as_str().to_owned());
        Ok(())
    }

    fn parse_group(&mut self) -> Result<Vec<TriplePattern>, QueryError> {
        self.expect_char('{')?;
        let patterns = self.parse_pattern_list('}')?;
        self.expect_char('}')?;
        Ok(patterns)
    }

    fn parse_pattern_list(&mut self, terminator: char) -> Result<Vec<TriplePattern>, QueryError> {
        let mut patterns = Vec::new();
        loop {
            self.skip_ws();
            if self.peek() == Some(terminator) {
                break;
            }
            if self.at_end() {
                return Err(self.syntax(&format!("expected {terminator:?}")));
            }
            patterns.push(self.parse_pattern()?);
            self.skip_ws();
            if self.peek() == Some('.') {
                self.advance();
            }
        }
        if patterns.is_empty() {
            return Err(self.syntax("empty pattern group"));
        }
        Ok(patterns)
    }

    fn parse_pattern(&mut self) -> Result<TriplePattern, QueryError> {
        let subject = self.parse_term_pattern()?;
        self.skip_ws();
        let predicate = self.parse_term_pattern()?;
        self.skip_ws();
        let object = self.parse_term_pattern()?;
        Ok(TriplePattern::new(subject, predicate, object))
    }

    fn parse_term_pattern(&mut self) -> Result<TermPattern, QueryError> {
        self.skip_ws();
        match self.peek() {
            Some('?') => Ok(TermPattern::Var(self.read_var()?)),
            Some('<') if self.peek_at(1) == Some('<') => {
                self.advance();
                self.advance();
                let inner = self.parse_pattern()?;
                self.skip_ws();
                if self.peek() == Some('>') && self.peek_at(1) == Some('>') {
                    self.advance();
                    self.advance();
                } else {
                    return Err(self.syntax("expected '>>'"));
                }
                // Fully concrete quoted patterns collapse to a term.
                Ok(match to_concrete(&inner) {
                    Some(triple) => TermPattern::Term(Term::quoted(triple)),
                    None => TermPattern::Quoted(Box::new(inner)),
                })
            }
            Some('<') => Ok(TermPattern::Term(Term::Iri(self.parse_iri_ref()?))),
            Some(c) if c.is_ascii_alphabetic() => {
                let (line, column) = (self.line, self.column);
                let word = self.read_bareword();
                if self.peek() == Some(':') {
                    self.advance();
                    let local = self.read_local_name();
                    match self.prefixes.get(&word) {
                        Some(ns) => {
                            let iri = Iri::new(format!("{ns}{local}"))
                                .map_err(|e| self.syntax(&e.to_string()))?;
                            Ok(TermPattern::Term(Term::Iri(iri)))
                        }
                        None => Err(QueryError::UnknownPrefix { prefix: word, line, column }),
                    }
                } else {
                    Err(self.syntax(&format!("unexpected token '{word}'")))
                }
            }
            Some(c) => Err(self.syntax(&format!("unexpected character {c:?}"))),
            None => Err(self.syntax("unexpected end of query")),
        }
    }

    fn parse_iri_ref(&mut self) -> Result<Iri, QueryError> {
        self.expect_char('<')?;
        let mut value = String::new();
        loop {
            match self.peek() {
                Some('>') => {
                    self.advance();
                    break;
                }
                Some('\n') | None => return Err(self.syntax("unterminated IRI")),
                Some(c) => {
                    value.push(c);
                    self.advance();
                }
            }
        }
        Iri::new(value).map_err(|e| self.syntax(&e.to_string()))
    }

    fn read_var(&mut self) -> Result<String, QueryError> {
        self.expect_char('?')?;
        let name = self.read_bareword();
        if name.is_empty() {
            return Err(self.syntax("expected variable name after '?'"));
        }
        Ok(name)
    }

    fn read_bareword(&mut self) -> String {
        let mut word = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                word.push(c);
                self.advance();
            } else {
                break;
            }
        }
        word
    }

    fn read_local_name(&mut self) -> String {
        let mut word = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                word.push(c);
                self.advance();
            } else {
                break;
            }
        }
        word
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        let mut i = self.pos;
        for expected in kw.chars() {
            match self.chars.get(i) {
                Some(&c) if c.eq_ignore_ascii_case(&expected) => i += 1,
                _ => return false,
            }
        }
        match self.chars.get(i) {
            Some(&c) => !(c.is_ascii_alphanumeric() || c == '_'),
            None => true,
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), QueryError> {
        if !self.peek_keyword(kw) {
            return Err(self.syntax(&format!("expected '{kw}'")));
        }
        for _ in 0..kw.len() {
            self.advance();
        }
        Ok(())
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.advance();
                }
            } else if c.is_whitespace() {
                self.advance();
            } else {
                break;
            }
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn advance(&mut self) {
        if let Some(&c) = self.chars.get(self.pos) {
            self.pos += 1;
            if c == '\n' {
                self.line += 1;
                self.column = 1;
            } else {
                self.column += 1;
            }
        }
    }

    fn expect_char(&mut self, expected: char) -> Result<(), QueryError> {
        match self.peek() {
            Some(c) if c == expected => {
                self.advance();
                Ok(())
            }
            Some(c) => Err(self.syntax(&format!("expected {expected:?}, found {c:?}"))),
            None => Err(self.syntax(&format!("expected {expected:?}, found end of input"))),
        }
    }

    fn syntax(&self, message: &str) -> QueryError {
        QueryError::Syntax { line: self.line, column: self.column, message: message.to_owned() }
    }
}

fn to_concrete(pattern: &TriplePattern) -> Option<Triple> {
    fn term(tp: &TermPattern) -> Option<Term> {
        match tp {
            TermPattern::Term(t) => Some(t.clone()),
            TermPattern::Quoted(inner) => to_concrete(inner).map(Term::quoted),
            _ => None,
        }
    }
    let s = term(&pattern.subject)?;
    let p = match term(&pattern.predicate)? {
        Term::Iri(iri) => iri,
        _ => return None,
    };
    let o = term(&pattern.object)?;
    Triple::new(s, p, o).ok()
}
