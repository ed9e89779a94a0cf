//! RDF-star terms and triples.
//!
//! A [`Term`] is an IRI, a literal, or a quoted triple (`<<s p o>>`).
//! Quoted triples make whole statements addressable as nodes, which is how
//! contractual events carry conditions, exceptions and risk annotations.

use alloc::boxed::Box;
use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("IRI must be non-empty")]
    EmptyIri,
    #[error("IRI contains forbidden character {0:?}")]
    ForbiddenIriChar(char),
    #[error("literal cannot carry both a datatype and a language tag")]
    DatatypeAndLang,
    #[error("literal cannot occupy the subject position of a triple")]
    LiteralSubject,
}

/// An absolute or expanded IRI. No whitespace or angle brackets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        if value.is_empty() {
            return Err(TermError::EmptyIri);
        }
        for c in value.chars() {
            if c.is_whitespace() || c == '<' || c == '>' {
                return Err(TermError::ForbiddenIriChar(c));
            }
        }
        Ok(Iri(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The fragment after the last `/`, `#` or `:`.
    pub fn local_name(&self) -> &str {
        let idx = self.0.rfind(['/', '#', ':']).map(|i| i + 1).unwrap_or(0);
        &self.0[idx..]
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    lexical: String,
    datatype: Option<Iri>,
    lang: Option<String>,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), datatype: None, lang: None }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal { lexical: lexical.into(), datatype: Some(datatype), lang: None }
    }

    pub fn tagged(lexical: impl Into<String>, lang: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), datatype: None, lang: Some(lang.into()) }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Option<&Iri> {
        self.datatype.as_ref()
    }

    pub fn lang(&self) -> Option<&str> {
        self.lang.as_deref()
    }
}

/// A node of the graph: entity IRI, literal annotation, or quoted triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
    Quoted(Box<Triple>),
}

impl Term {
    pub fn iri(value: &str) -> Result<Self, TermError> {
        Ok(Term::Iri(Iri::new(value)?))
    }

    pub fn quoted(triple: Triple) -> Self {
        Term::Quoted(Box::new(triple))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_quoted(&self) -> Option<&Triple> {
        match self {
            Term::Quoted(t) => Some(t),
            _ => None,
        }
    }

    /// Nesting depth: 0 for IRIs and literals, 1 + inner depth for quoted triples.
    pub fn depth(&self) -> usize {
        match self {
            Term::Quoted(t) => 1 + t.inner_depth(),
            _ => 0,
        }
    }

    /// Canonical serialization used for deterministic ordering.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        self.write_canonical(&mut out);
        out
    }

    pub(crate) fn write_canonical(&self, out: &mut String) {
        match self {
            Term::Iri(iri) => {
                out.push('<');
                out.push_str(iri.as_str());
                out.push('>');
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
                    out.push_str("^^<");
                    out.push_str(dt.as_str());
                    out.push('>');
                } else if let Some(lang) = lit.lang() {
                    out.push('@');
                    out.push_str(lang);
                }
            }
            Term::Quoted(t) => {
                out.push_str("<< ");
                t.write_canonical(out);
                out.push_str(" >>");
            }
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical().cmp(&other.canonical())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

/// Classification of a triple by which positions hold quoted triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TripleKind {
    /// Entity-to-entity: neither end is quoted.
    E2E,
    /// Entity-to-event: exactly one end is quoted, in either direction.
    E2Evt,
    /// Event-to-event: both ends are quoted.
    Evt2Evt,
}

impl fmt::Display for TripleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TripleKind::E2E => f.write_str("E2E"),
            TripleKind::E2Evt => f.write_str("E2Evt"),
            TripleKind::Evt2Evt => f.write_str("Evt2Evt"),
        }
    }
}

/// An asserted or quoted statement `(subject, predicate, object)`.
///
/// Construction enforces that the subject is never a literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    subject: Term,
    predicate: Iri,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Iri, object: Term) -> Result<Self, TermError> {
        if subject.is_literal() {
            return Err(TermError::LiteralSubject);
        }
        Ok(Triple { subject, predicate, object })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Iri {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn kind(&self) -> TripleKind {
        match (self.subject.as_quoted().is_some(), self.object.as_quoted().is_some()) {
            (false, false) => TripleKind::E2E,
            (true, true) => TripleKind::Evt2Evt,
            _ => TripleKind::E2Evt,
        }
    }

    /// Maximum nesting depth among the subject and object.
    pub fn inner_depth(&self) -> usize {
        self.subject.depth().max(self.object.depth())
    }

    pub fn canonical(&self) -> String {
        let mut out = String::new();
        self.write_canonical(&mut out);
        out
    }

    pub(crate) fn write_canonical(&self, out: &mut String) {
        self.subject.write_canonical(out);
        out.push(' ');
        out.push('<');
        out.push_str(self.predicate.as_str());
        out.push('>');
        out.push(' ');
        self.object.write_canonical(out);
    }

    /// Visits every IRI in subject or object position, recursing into
    /// quoted triples. Predicates are not visited.
    pub fn visit_node_iris<'a>(&'a self, f: &mut impl FnMut(&'a Iri)) {
        for term in [&self.subject, &self.object] {
            match term {
                Term::Iri(iri) => f(iri),
                Term::Quoted(t) => t.visit_node_iris(f),
                Term::Literal(_) => {}
            }
        }
    }

    /// Visits every quoted triple occurring in this triple, recursively.
    pub fn visit_quoted<'a>(&'a self, f: &mut impl FnMut(&'a Triple)) {
        for term in [&self.subject, &self.object] {
            if let Term::Quoted(t) = term {
                f(t);
                t.visit_quoted(f);
            }
        }
    }
}

impl PartialOrd for Triple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Triple {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical().cmp(&other.canonical())
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab;

    fn iri(local: &str) -> Iri {
        Iri::new(alloc::format!("{}{}", vocab::CKG_NS, local)).unwrap()
    }

    fn e2e(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(Term::Iri(iri(s)), iri(p), Term::Iri(iri(o))).unwrap()
    }

    #[test]
    fn literal_subject_is_rejected() {
        let err = Triple::new(
            Term::Literal(Literal::plain("x")),
            iri("hasCondition"),
            Term::Iri(iri("y")),
        )
        .unwrap_err();
        assert_eq!(err, TermError::LiteralSubject);
    }

    #[test]
    fn iri_validation() {
        assert!(Iri::new("").is_err());
        assert!(Iri::new("http://example.org/a b").is_err());
        assert!(Iri::new("http://example.org/<x>").is_err());
        assert!(Iri::new("http://example.org/NCKG/Contractor").is_ok());
    }

    #[test]
    fn local_name() {
        assert_eq!(iri("advancePayment").local_name(), "advancePayment");
        assert_eq!(Iri::new("urn:x").unwrap().local_name(), "x");
    }

    #[test]
    fn kind_classification() {
        // <Contractor, submit, Programme> is plain entity-to-entity.
        let submit = e2e("Contractor", "submit", "Programme");
        assert_eq!(submit.kind(), TripleKind::E2E);

        let insure = e2e("Contractor", "insure", "eventOrLiability");
        let no_cert = e2e("Client", "doesNotSubmit", "requiredCertificate");
        let conditional = Triple::new(
            Term::quoted(insure),
            iri("hasCondition"),
            Term::quoted(no_cert),
        )
        .unwrap();
        assert_eq!(conditional.kind(), TripleKind::Evt2Evt);

        let pay = e2e("Employer", "make", "advancePayment");
        let labelled = Triple::new(
            Term::quoted(pay.clone()),
            iri("hasRiskLabel"),
            Term::Iri(iri("Payment")),
        )
        .unwrap();
        assert_eq!(labelled.kind(), TripleKind::E2Evt);

        // Direction does not change the kind.
        let swapped = Triple::new(
            Term::Iri(iri("Payment")),
            iri("hasRiskLabel"),
            Term::quoted(pay),
        )
        .unwrap();
        assert_eq!(swapped.kind(), TripleKind::E2Evt);
    }

    #[test]
    fn depth_counts_nesting() {
        let base = e2e("Employer", "make", "advancePayment");
        assert_eq!(base.inner_depth(), 0);
        let level1 = Triple::new(
            Term::Iri(iri("commencement")),
            iri("hasCondition"),
            Term::quoted(base),
        )
        .unwrap();
        assert_eq!(level1.inner_depth(), 1);
        let level2 = Triple::new(
            Term::quoted(level1),
            iri("hasCondition"),
            Term::Iri(iri("x")),
        )
        .unwrap();
        assert_eq!(level2.inner_depth(), 2);
    }

    #[test]
    fn quoted_equality_is_structural() {
        let a = Term::quoted(e2e("Employer", "make", "advancePayment"));
        let b = Term::quoted(e2e("Employer", "make", "advancePayment"));
        assert_eq!(a, b);
        assert_eq!(a.cmp(&b), core::cmp::Ordering::Equal);
    }
}
