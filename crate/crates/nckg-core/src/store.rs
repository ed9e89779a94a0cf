//! Indexed in-memory triple store.
//!
//! Three permutation indexes (SPO/POS/OSP) are keyed on the top-level
//! subject, predicate and object terms. Pattern matching picks the most
//! selective index and post-filters candidates, which also resolves
//! nested quoted-triple patterns.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::term::{Iri, Term, Triple};

pub const DEFAULT_MAX_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("triple nesting depth {depth} exceeds the configured maximum {max}")]
    DepthExceeded { depth: usize, max: usize },
}

/// One position of a [`TriplePattern`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TermPattern {
    /// Matches any term.
    Any,
    /// Named variable; matches any term. Binding consistency is the
    /// query layer's concern — the store treats this like [`TermPattern::Any`].
    Var(String),
    /// Matches exactly this term.
    Term(Term),
    /// Matches a quoted triple whose components match the inner pattern.
    Quoted(Box<TriplePattern>),
}

impl TermPattern {
    pub fn iri(iri: Iri) -> Self {
        TermPattern::Term(Term::Iri(iri))
    }

    pub fn matches(&self, term: &Term) -> bool {
        match self {
            TermPattern::Any | TermPattern::Var(_) => true,
            TermPattern::Term(t) => t == term,
            TermPattern::Quoted(inner) => match term {
                Term::Quoted(t) => inner.matches(t),
                _ => false,
            },
        }
    }

    /// The concrete term this pattern pins down, if any. Nested patterns
    /// with wildcards inside pin nothing.
    fn concrete(&self) -> Option<Term> {
        match self {
            TermPattern::Term(t) => Some(t.clone()),
            TermPattern::Quoted(inner) => inner.concrete_triple().map(Term::quoted),
            _ => None,
        }
    }
}

/// A subject/predicate/object pattern over asserted triples.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TriplePattern {
    pub subject: TermPattern,
    pub predicate: TermPattern,
    pub object: TermPattern,
}

impl TriplePattern {
    pub fn new(subject: TermPattern, predicate: TermPattern, object: TermPattern) -> Self {
        TriplePattern { subject, predicate, object }
    }

    pub fn any() -> Self {
        TriplePattern::new(TermPattern::Any, TermPattern::Any, TermPattern::Any)
    }

    pub fn matches(&self, triple: &Triple) -> bool {
        self.subject.matches(triple.subject())
            && self.predicate.matches(&Term::Iri(triple.predicate().clone()))
            && self.object.matches(triple.object())
    }

    fn concrete_triple(&self) -> Option<Triple> {
        let s = self.subject.concrete()?;
        let p = match self.predicate.concrete()? {
            Term::Iri(iri) => iri,
            _ => return None,
        };
        let o = self.object.concrete()?;
        Triple::new(s, p, o).ok()
    }
}

/// Aggregate counts in the shape of the knowledge-base composition table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StoreStats {
    /// Asserted triples.
    pub triples: usize,
    /// Asserted triples with a quoted subject or object.
    pub nested: usize,
    /// Distinct quoted triples, at any nesting level.
    pub events: usize,
    /// Distinct IRIs in subject/object position, including inside quoted triples.
    pub entities: usize,
}

/// The in-memory NCKG database: a set of asserted triples with prefix map
/// and permutation indexes.
#[derive(Debug, Clone, Default)]
pub struct GraphStore {
    triples: BTreeSet<Triple>,
    prefixes: BTreeMap<String, String>,
    spo: BTreeMap<Term, BTreeSet<Triple>>,
    pos: BTreeMap<Iri, BTreeSet<Triple>>,
    osp: BTreeMap<Term, BTreeSet<Triple>>,
    max_depth: usize,
}

impl GraphStore {
    pub fn new() -> Self {
        Self::with_max_depth(DEFAULT_MAX_DEPTH)
    }

    pub fn with_max_depth(max_depth: usize) -> Self {
        GraphStore { max_depth, ..Default::default() }
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    pub fn declare_prefix(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.prefixes.insert(prefix.into(), namespace.into());
    }

    /// Inserts a triple. Returns `true` iff it was not already present.
    pub fn insert(&mut self, triple: Triple) -> Result<bool, StoreError> {
        let depth = triple.inner_depth();
        if depth > self.max_depth {
            return Err(StoreError::DepthExceeded { depth, max: self.max_depth });
        }
        if !self.triples.insert(triple.clone()) {
            return Ok(false);
        }
        self.spo.entry(triple.subject().clone()).or_default().insert(triple.clone());
        self.pos.entry(triple.predicate().clone()).or_default().insert(triple.clone());
        self.osp.entry(triple.object().clone()).or_default().insert(triple);
        Ok(true)
    }

    /// Removes a triple. Returns `true` iff it was present.
    pub fn remove(&mut self, triple: &Triple) -> bool {
        if !self.triples.remove(triple) {
            return false;
        }
        for (key, map) in [
            (triple.subject().clone(), &mut self.spo),
            (triple.object().clone(), &mut self.osp),
        ] {
            if let Some(set) = map.get_mut(&key) {
                set.remove(triple);
                if set.is_empty() {
                    map.remove(&key);
                }
            }
        }
        if let Some(set) = self.pos.get_mut(triple.predicate()) {
            set.remove(triple);
            if set.is_empty() {
                self.pos.remove(triple.predicate());
            }
        }
        true
    }

    /// Returns the stored triples matching `pattern`, ordered by canonical
    /// serialization.
    pub fn matching(&self, pattern: &TriplePattern) -> Vec<Triple> {
        let candidates: Vec<&Triple> = if let Some(s) = pattern.subject.concrete() {
            self.spo.get(&s).map(|set| set.iter().collect()).unwrap_or_default()
        } else if let Some(Term::Iri(p)) = pattern.predicate.concrete() {
            self.pos.get(&p).map(|set| set.iter().collect()).unwrap_or_default()
        } else if let Some(o) = pattern.object.concrete() {
            self.osp.get(&o).map(|set| set.iter().collect()).unwrap_or_default()
        } else {
            self.triples.iter().collect()
        };
        candidates
            .into_iter()
            .filter(|t| pattern.matches(t))
            .cloned()
            .collect()
    }

    pub fn stats(&self) -> StoreStats {
        let mut entities: BTreeSet<&Iri> = BTreeSet::new();
        let mut events: BTreeSet<&Triple> = BTreeSet::new();
        let mut nested = 0;
        for t in &self.triples {
            if t.inner_depth() > 0 {
                nested += 1;
            }
            t.visit_node_iris(&mut |iri| {
                entities.insert(iri);
            });
            t.visit_quoted(&mut |q| {
                events.insert(q);
            });
        }
        StoreStats {
            triples: self.triples.len(),
            nested,
            events: events.len(),
            entities: entities.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::TermError;
    use crate::vocab;

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(
            Term::Iri(vocab::ckg(s)),
            vocab::ckg(p),
            Term::Iri(vocab::ckg(o)),
        )
        .unwrap()
    }

    #[test]
    fn insert_is_set_semantics() {
        let mut store = GraphStore::new();
        let triple = t("Contractor", "submit", "Programme");
        assert!(store.insert(triple.clone()).unwrap());
        assert_eq!(store.len(), 1);
        assert!(!store.insert(triple.clone()).unwrap());
        assert_eq!(store.len(), 1);
        assert!(store.contains(&triple));
    }

    #[test]
    fn literal_subject_cannot_be_constructed() {
        let err = Triple::new(
            Term::Literal(crate::term::Literal::plain("x")),
            vocab::ckg("p"),
            Term::Iri(vocab::ckg("o")),
        )
        .unwrap_err();
        assert_eq!(err, TermError::LiteralSubject);
    }

    #[test]
    fn remove_roundtrip() {
        let mut store = GraphStore::new();
        let a = t("a", "p", "b");
        let b = t("c", "p", "d");
        store.insert(a.clone()).unwrap();
        store.insert(b.clone()).unwrap();
        assert!(store.remove(&a));
        assert!(!store.remove(&a));
        assert_eq!(store.len(), 1);
        // the other triple is still matchable
        assert_eq!(store.matching(&TriplePattern::any()), alloc::vec![b]);
        assert!(!GraphStore::new().remove(&a));
    }

    #[test]
    fn depth_limit_enforced() {
        let mut store = GraphStore::with_max_depth(1);
        let inner = t("a", "p", "b");
        let level1 = Triple::new(
            Term::quoted(inner.clone()),
            vocab::ckg("q"),
            Term::Iri(vocab::ckg("c")),
        )
        .unwrap();
        store.insert(level1.clone()).unwrap();
        let level2 = Triple::new(
            Term::quoted(level1),
            vocab::ckg("q"),
            Term::Iri(vocab::ckg("c")),
        )
        .unwrap();
        assert_eq!(
            store.insert(level2),
            Err(StoreError::DepthExceeded { depth: 2, max: 1 })
        );
    }

    #[test]
    fn match_on_empty_store() {
        let store = GraphStore::new();
        assert!(store.matching(&TriplePattern::any()).is_empty());
    }

    #[test]
    fn match_uses_predicate_index() {
        let mut store = GraphStore::new();
        let pay = t("Employer", "make", "advancePayment");
        for (s, o) in [
            ("advancePayment", "q1"),
            ("NoticeToProceed", "q2"),
            ("financialArrangementsEvidence", "q3"),
        ] {
            let evt = t("Employer", "provide", s);
            store
                .insert(
                    Triple::new(
                        Term::Iri(vocab::ckg("commencement")),
                        vocab::ckg("hasCondition"),
                        Term::quoted(evt),
                    )
                    .unwrap(),
                )
                .unwrap();
            store.insert(t(s, "other", o)).unwrap();
        }
        store.insert(pay).unwrap();
        let pattern = TriplePattern::new(
            TermPattern::Any,
            TermPattern::iri(vocab::ckg("hasCondition")),
            TermPattern::Any,
        );
        let hits = store.matching(&pattern);
        assert_eq!(hits.len(), 3);
        for hit in &hits {
            assert_eq!(hit.subject(), &Term::Iri(vocab::ckg("commencement")));
        }
    }

    #[test]
    fn nested_pattern_with_inner_wildcard() {
        let mut store = GraphStore::new();
        let evt = t("Employer", "make", "advancePayment");
        let nested = Triple::new(
            Term::Iri(vocab::ckg("commencement")),
            vocab::ckg("hasCondition"),
            Term::quoted(evt),
        )
        .unwrap();
        store.insert(nested.clone()).unwrap();
        store.insert(t("x", "hasCondition", "y")).unwrap();

        let pattern = TriplePattern::new(
            TermPattern::Any,
            TermPattern::Any,
            TermPattern::Quoted(Box::new(TriplePattern::new(
                TermPattern::Any,
                TermPattern::iri(vocab::ckg("make")),
                TermPattern::Any,
            ))),
        );
        assert_eq!(store.matching(&pattern), alloc::vec![nested]);
    }

    #[test]
    fn stats_on_empty() {
        assert_eq!(GraphStore::new().stats(), StoreStats::default());
    }
}
