//! Turtle-star subset parser and serializer.
//!
//! Supported constructs: `@prefix`/`PREFIX` directives, `<iri>` references,
//! prefixed names, quoted triples `<< s p o >>` (nestable), predicate lists
//! with `;`, object lists with `,`, double-quoted string literals with
//! optional `^^datatype` or `@lang`, `.` terminators and `#` comments.
//! Everything else (blank nodes, collections, numeric/boolean shorthand)
//! is a hard parse error with a source position.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::term::{Iri, Literal, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{column}: {message}")]
pub struct ParseError {
    /// 1-based line of the offending token.
    pub line: usize,
    /// 1-based column of the offending token.
    pub column: usize,
    pub message: String,
    /// The source line the error points into.
    pub snippet: String,
}

/// A parsed Turtle-star document: prefix declarations plus the asserted
/// triples in source order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub prefixes: BTreeMap<String, String>,
    pub triples: Vec<Triple>,
}

impl Document {
    pub fn new() -> Self {
        Document::default()
    }
}

pub fn parse(text: &str) -> Result<Document, ParseError> {
    Parser::new(text).parse_document()
}

/// Serializes with the prefix block first, then one statement per asserted
/// triple (no `;`/`,` compression). Deterministic for a given document.
pub fn serialize(doc: &Document) -> String {
    let mut out = String::new();
    for (prefix, ns) in &doc.prefixes {
        out.push_str(&format!("@prefix {prefix}: <{ns}> .\n"));
    }
    if !doc.prefixes.is_empty() && !doc.triples.is_empty() {
        out.push('\n');
    }
    for triple in &doc.triples {
        write_triple(&mut out, triple, &doc.prefixes);
        out.push_str(" .\n");
    }
    out
}

fn write_triple(out: &mut String, triple: &Triple, prefixes: &BTreeMap<String, String>) {
    write_term(out, triple.subject(), prefixes);
    out.push(' ');
    write_iri(out, triple.predicate(), prefixes);
    out.push(' ');
    write_term(out, triple.object(), prefixes);
}

fn write_term(out: &mut String, term: &Term, prefixes: &BTreeMap<String, String>) {
    match term {
        Term::Iri(iri) => write_iri(out, iri, prefixes),
        Term::Quoted(t) => {
            out.push_str("<< ");
            write_triple(out, t, prefixes);
            out.push_str(" >>");
        }
        Term::Literal(lit) => {
            out.push('"');
            for c in lit.lexical().chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    _ => out.push(c),
                }
            }
            out.push('"');
            if let Some(dt) = lit.datatype() {
                out.push_str("^^");
                write_iri(out, dt, prefixes);
            } else if let Some(lang) = lit.lang() {
                out.push('@');
                out.push_str(lang);
            }
        }
    }
}

fn write_iri(out: &mut String, iri: &Iri, prefixes: &BTreeMap<String, String>) {
    // Longest declared namespace wins; fall back to an absolute reference.
    let mut best: Option<(&str, &str)> = None;
    for (prefix, ns) in prefixes {
        if let Some(local) = iri.as_str().strip_prefix(ns.as_str()) {
            if is_simple_local(local) && best.map(|(_, n)| ns.len() > n.len()).unwrap_or(true) {
                best = Some((prefix, ns));
            }
        }
    }
    match best {
        Some((prefix, ns)) => {
            out.push_str(prefix);
            out.push(':');
            out.push_str(&iri.as_str()[ns.len()..]);
        }
        None => {
            out.push('<');
            out.push_str(iri.as_str());
            out.push('>');
        }
    }
}

fn is_simple_local(local: &str) -> bool {
    !local.is_empty()
        && local.chars().next().map(|c| c.is_ascii_alphabetic()).unwrap_or(false)
        && local.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

struct Parser<'a> {
    chars: Vec<char>,
    lines: Vec<&'a str>,
    pos: usize,
    line: usize,
    column: usize,
    prefixes: BTreeMap<String, String>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            chars: text.chars().collect(),
            lines: text.lines().collect(),
            pos: 0,
            line: 1,
            column: 1,
            prefixes: BTreeMap::new(),
        }
    }

    fn parse_document(mut self) -> Result<Document, ParseError> {
        let mut triples = Vec::new();
        loop {
            self.skip_ws();
            if self.at_end() {
                break;
            }
            if self.peek() == Some('@') || self.peek_keyword("PREFIX") {
                self.parse_prefix_decl()?;
            } else {
                self.parse_statement(&mut triples)?;
            }
        }
        Ok(Document { prefixes: self.prefixes, triples })
    }

    fn parse_prefix_decl(&mut self) -> Result<(), ParseError> {
        let (line, column) = (self.line, self.column);
        let sparql_form = if self.peek() == Some('@') {
            self.advance();
            let word = self.read_bareword();
            if word != "prefix" {
                return Err(self.error_at(line, column, format!("unknown directive @{word}")));
            }
            false
        } else {
            for _ in 0.."PREFIX".len() {
                self.advance();
            }
            true
        };
        self.skip_ws();
        let prefix = self.read_prefix_name()?;
        self.expect_char(':')?;
        self.skip_ws();
        let ns = self.parse_iri_ref()?;
        self.skip_ws();
        if self.peek() == Some('.') {
            self.advance();
        } else if !sparql_form {
            return Err(self.error_here("expected '.' after @prefix directive".to_owned()));
        }
        self.prefixes.insert(prefix, ns.as_str().to_owned());
        Ok(())
    }

    fn parse_statement(&mut self, triples: &mut Vec<Triple>) -> Result<(), ParseError> {
        let subject = self.parse_subject()?;
        loop {
            self.skip_ws();
            let predicate = self.parse_predicate()?;
            loop {
                self.skip_ws();
                let object = self.parse_object()?;
                let (line, column) = (self.line, self.column);
                let triple = Triple::new(subject.clone(), predicate.clone(), object)
                    .map_err(|e| self.error_at(line, column, e.to_string()))?;
                triples.push(triple);
                self.skip_ws();
                if self.peek() == Some(',') {
                    self.advance();
                } else {
                    break;
                }
            }
            match self.peek() {
                Some(';') => {
                    self.advance();
                    self.skip_ws();
                    // trailing ';' before '.' is legal Turtle
                    if self.peek() == Some('.') {
                        self.advance();
                        return Ok(());
                    }
                }
                Some('.') => {
                    self.advance();
                    return Ok(());
                }
                _ => {
                    return Err(self.error_here("expected '.', ';' or ',' after object".to_owned()))
                }
            }
        }
    }

    fn parse_subject(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        let (line, column) = (self.line, self.column);
        let term = self.parse_term()?;
        if term.is_literal() {
            return Err(self.error_at(line, column, "a literal cannot be a subject".to_owned()));
        }
        Ok(term)
    }

    fn parse_predicate(&mut self) -> Result<Iri, ParseError> {
        let (line, column) = (self.line, self.column);
        match self.parse_term()? {
            Term::Iri(iri) => Ok(iri),
            other => Err(self.error_at(
                line,
                column,
                format!("predicate must be an IRI, found {other}"),
            )),
        }
    }

    fn parse_object(&mut self) -> Result<Term, ParseError> {
        self.parse_term()
    }

    fn parse_term(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        let (line, column) = (self.line, self.column);
        match self.peek() {
            None => Err(self.error_here("unexpected end of input".to_owned())),
            Some('<') => {
                if self.peek_at(1) == Some('<') {
                    self.parse_quoted_triple()
                } else {
                    Ok(Term::Iri(self.parse_iri_ref()?))
                }
            }
            Some('"') => self.parse_literal(),
            Some('_') => Err(self.error_at(
                line,
                column,
                "blank nodes are not supported in this subset".to_owned(),
            )),
            Some('[') => Err(self.error_at(
                line,
                column,
                "anonymous blank nodes are not supported in this subset".to_owned(),
            )),
            Some('(') => Err(self.error_at(
                line,
                column,
                "collections are not supported in this subset".to_owned(),
            )),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' => Err(self.error_at(
                line,
                column,
                "numeric literals are not supported in this subset".to_owned(),
            )),
            Some(c) if c.is_ascii_alphabetic() => {
                let word = self.read_bareword();
                if self.peek() == Some(':') {
                    self.advance();
                    let local = self.read_local_name();
                    let ns = self.prefixes.get(&word).ok_or_else(|| {
                        self.error_at(line, column, format!("undeclared prefix '{word}:'"))
                    })?;
                    let iri = Iri::new(format!("{ns}{local}"))
                        .map_err(|e| self.error_at(line, column, e.to_string()))?;
                    Ok(Term::Iri(iri))
                } else if word == "true" || word == "false" {
                    Err(self.error_at(
                        line,
                        column,
                        "boolean shorthand is not supported in this subset".to_owned(),
                    ))
                } else {
                    Err(self.error_at(line, column, format!("unexpected token '{word}'")))
                }
            }
            Some(c) => Err(self.error_at(line, column, format!("unexpected character {c:?}"))),
        }
    }

    fn parse_quoted_triple(&mut self) -> Result<Term, ParseError> {
        self.advance(); // <
        self.advance(); // <
        let subject = self.parse_subject()?;
        self.skip_ws();
        let predicate = self.parse_predicate()?;
        self.skip_ws();
        let object = self.parse_term()?;
        self.skip_ws();
        let (line, column) = (self.line, self.column);
        if self.peek() == Some('>') && self.peek_at(1) == Some('>') {
            self.advance();
            self.advance();
        } else {
            return Err(self.error_at(line, column, "expected '>>'".to_owned()));
        }
        let triple = Triple::new(subject, predicate, object)
            .map_err(|e| self.error_at(line, column, e.to_string()))?;
        Ok(Term::quoted(triple))
    }

    fn parse_iri_ref(&mut self) -> Result<Iri, ParseError> {
        let (line, column) = (self.line, self.column);
        self.expect_char('<')?;
        let mut value = String::new();
        loop {
            match self.peek() {
                Some('>') => {
                    self.advance();
                    break;
                }
                Some('\n') | None => {
                    return Err(self.error_at(line, column, "unterminated IRI".to_owned()))
                }
                Some(c) => {
                    value.push(c);
                    self.advance();
                }
            }
        }
        Iri::new(value).map_err(|e| self.error_at(line, column, e.to_string()))
    }

    fn parse_literal(&mut self) -> Result<Term, ParseError> {
        let (line, column) = (self.line, self.column);
        self.advance(); // opening quote
        let mut value = String::new();
        loop {
            match self.peek() {
                None | Some('\n') => {
                    return Err(self.error_at(line, column, "unterminated string".to_owned()))
                }
                Some('"') => {
                    self.advance();
                    break;
                }
                Some('\\') => {
                    self.advance();
                    let esc = self.peek().ok_or_else(|| {
                        self.error_at(line, column, "unterminated escape".to_owned())
                    })?;
                    let replacement = match esc {
                        '"' => '"',
                        '\\' => '\\',
                        'n' => '\n',
                        't' => '\t',
                        other => {
                            return Err(
                                self.error_here(format!("unsupported escape '\\{other}'"))
                            )
                        }
                    };
                    value.push(replacement);
                    self.advance();
                }
                Some(c) => {
                    value.push(c);
                    self.advance();
                }
            }
        }
        if self.peek() == Some('^') && self.peek_at(1) == Some('^') {
            self.advance();
            self.advance();
            let (dline, dcol) = (self.line, self.column);
            match self.parse_term()? {
                Term::Iri(dt) => Ok(Term::Literal(Literal::typed(value, dt))),
                other => Err(self.error_at(
                    dline,
                    dcol,
                    format!("datatype must be an IRI, found {other}"),
                )),
            }
        } else if self.peek() == Some('@') {
            self.advance();
            let tag = self.read_lang_tag();
            if tag.is_empty() {
                return Err(self.error_here("empty language tag".to_owned()));
            }
            Ok(Term::Literal(Literal::tagged(value, tag)))
        } else {
            Ok(Term::Literal(Literal::plain(value)))
        }
    }

    fn read_prefix_name(&mut self) -> Result<String, ParseError> {
        let (line, column) = (self.line, self.column);
        let word = self.read_bareword();
        if word.is_empty() {
            return Err(self.error_at(line, column, "expected prefix name".to_owned()));
        }
        Ok(word)
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

    fn read_lang_tag(&mut self) -> String {
        let mut tag = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '-' {
                tag.push(c);
                self.advance();
            } else {
                break;
            }
        }
        tag
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        let mut i = self.pos;
        for expected in kw.chars() {
            match self.chars.get(i) {
                Some(&c) if c.eq_ignore_ascii_case(&expected) => i += 1,
                _ => return false,
            }
        }
        // must not run into a longer bareword or a pname
        match self.chars.get(i) {
            Some(&c) => !(c.is_ascii_alphanumeric() || c == '_' || c == ':'),
            None => true,
        }
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

    fn expect_char(&mut self, expected: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == expected => {
                self.advance();
                Ok(())
            }
            Some(c) => Err(self.error_here(format!("expected {expected:?}, found {c:?}"))),
            None => Err(self.error_here(format!("expected {expected:?}, found end of input"))),
        }
    }

    fn error_here(&self, message: String) -> ParseError {
        self.error_at(self.line, self.column, message)
    }

    fn error_at(&self, line: usize, column: usize, message: String) -> ParseError {
        ParseError {
            line,
            column,
            message,
            snippet: self.lines.get(line - 1).copied().unwrap_or("").to_owned(),
        }
    }
}
