//! TF-IDF label catalog with cosine top-k search over entities, events
//! and whole clauses.
//!
//! Weights follow w(t,d) = tf(t,d) * ln(N / df(t)) with raw in-doc term
//! counts. Labels are short, so no length normalization is applied.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::float;
use crate::ontology::OntologyModel;
use crate::store::GraphStore;
use crate::term::{Term, Triple};
use crate::vocab;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DocKind {
    Entity,
    Event,
    Clause,
}

/// Where a catalog document came from: a graph term or a clause id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DocSource {
    Term(Term),
    Clause(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelDoc {
    pub id: String,
    pub kind: DocKind,
    pub tokens: Vec<String>,
    pub source: DocSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub id: String,
    pub score: f64,
    pub kind: DocKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("cannot build a lexical index over an empty store")]
    EmptyStore,
}

/// Immutable TF-IDF index: documents, per-token document frequencies and
/// precomputed sparse weight vectors.
#[derive(Debug, Clone, Default)]
pub struct LexicalIndex {
    docs: Vec<LabelDoc>,
    df: BTreeMap<String, usize>,
    n_docs: usize,
    vectors: Vec<BTreeMap<String, f64>>,
}

/// Splits on camelCase boundaries, underscores, hyphens, digit runs and
/// whitespace, lowercasing everything: "advancePayment" becomes
/// ["advance", "payment"], "within2weeksOf" becomes
/// ["within", "2", "weeks", "of"].
pub fn tokenize(label: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut prev: Option<char> = None;
    for c in label.chars() {
        let boundary = match prev {
            Some(p) => {
                (p.is_lowercase() && c.is_uppercase())
                    || (p.is_ascii_digit() != c.is_ascii_digit()
                        && (p.is_alphanumeric() && c.is_alphanumeric()))
            }
            None => false,
        };
        if !c.is_alphanumeric() {
            if !current.is_empty() {
                tokens.push(core::mem::take(&mut current));
            }
            prev = None;
            continue;
        }
        if boundary && !current.is_empty() {
            tokens.push(core::mem::take(&mut current));
        }
        current.extend(c.to_lowercase());
        prev = Some(c);
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn term_label_tokens(term: &Term) -> Vec<String> {
    match term {
        Term::Iri(iri) => tokenize(iri.local_name()),
        Term::Literal(lit) => tokenize(lit.lexical()),
        Term::Quoted(inner) => triple_label_tokens(inner),
    }
}

fn triple_label_tokens(triple: &Triple) -> Vec<String> {
    let mut tokens = term_label_tokens(triple.subject());
    tokens.extend(tokenize(triple.predicate().local_name()));
    tokens.extend(term_label_tokens(triple.object()));
    tokens
}

fn term_frequencies(tokens: &[String]) -> BTreeMap<String, f64> {
    let mut tf = BTreeMap::new();
    for token in tokens {
        *tf.entry(token.clone()).or_insert(0.0) += 1.0;
    }
    tf
}

pub fn cosine(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let mut dot = 0.0;
    for (token, wa) in a {
        if let Some(wb) = b.get(token) {
            dot += wa * wb;
        }
    }
    let norm_a = float::sqrt(a.values().map(|w| w * w).sum());
    let norm_b = float::sqrt(b.values().map(|w| w * w).sum());
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    dot / (norm_a * norm_b)
}

impl LexicalIndex {
    /// Catalogs one document per distinct entity Iri and per distinct
    /// event quoted triple in the store. Ontology classes and `rdf:type`
    /// links are schema, not contract content, and are left out.
    pub fn build(store: &GraphStore, onto: &OntologyModel) -> Result<Self, IndexError> {
        if store.is_empty() {
            return Err(IndexError::EmptyStore);
        }
        let rdf_type = vocab::rdf_type();
        let risk_preds = [vocab::has_risk_category(), vocab::has_risk_label()];
        let mut entities: BTreeMap<Term, ()> = BTreeMap::new();
        let mut events: BTreeMap<Triple, ()> = BTreeMap::new();
        for triple in store.iter() {
            // schema and risk-label links are not contract content
            if triple.predicate() == &rdf_type || risk_preds.contains(triple.predicate()) {
                continue;
            }
            triple.visit_node_iris(&mut |iri| {
                if !onto.is_class(iri) {
                    entities.insert(Term::Iri(iri.clone()), ());
                }
            });
            triple.visit_quoted(&mut |q| {
                events.insert(q.clone(), ());
            });
        }

        let mut docs = Vec::new();
        for term in entities.into_keys() {
            let tokens = term_label_tokens(&term);
            if tokens.is_empty() {
                continue;
            }
            docs.push(LabelDoc {
                id: term.canonical(),
                kind: DocKind::Entity,
                tokens,
                source: DocSource::Term(term),
            });
        }
        for event in events.into_keys() {
            let tokens = triple_label_tokens(&event);
            if tokens.is_empty() {
                continue;
            }
            let term = Term::quoted(event);
            docs.push(LabelDoc {
                id: term.canonical(),
                kind: DocKind::Event,
                tokens,
                source: DocSource::Term(term),
            });
        }
        Ok(Self::from_docs(docs))
    }

    /// Builds a clause-level index for whole-text retrieval.
    pub fn build_clauses<'a, I>(clauses: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let docs = clauses
            .into_iter()
            .filter_map(|(id, text)| {
                let tokens = tokenize(text);
                if tokens.is_empty() {
                    return None;
                }
                Some(LabelDoc {
                    id: id.to_string(),
                    kind: DocKind::Clause,
                    tokens,
                    source: DocSource::Clause(id.to_string()),
                })
            })
            .collect();
        Self::from_docs(docs)
    }

    fn from_docs(docs: Vec<LabelDoc>) -> Self {
        let n_docs = docs.len();
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in &docs {
            let mut seen = alloc::collections::BTreeSet::new();
            for token in &doc.tokens {
                if seen.insert(token) {
                    *df.entry(token.clone()).or_insert(0) += 1;
                }
            }
        }
        let vectors = docs
            .iter()
            .map(|doc| {
                let mut vector = term_frequencies(&doc.tokens);
                for (token, weight) in vector.iter_mut() {
                    let idf = float::ln(n_docs as f64 / df[token] as f64);
                    *weight *= idf;
                }
                vector
            })
            .collect();
        LexicalIndex { docs, df, n_docs, vectors }
    }

    pub fn docs(&self) -> &[LabelDoc] {
        &self.docs
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn df(&self, token: &str) -> usize {
        self.df.get(token).copied().unwrap_or(0)
    }

    pub fn vector(&self, doc_index: usize) -> &BTreeMap<String, f64> {
        &self.vectors[doc_index]
    }

    pub fn doc_by_id(&self, id: &str) -> Option<&LabelDoc> {
        self.docs.iter().find(|d| d.id == id)
    }

    /// Weighted query vector using the index's idf values; tokens the
    /// corpus has never seen are dropped.
    pub fn query_vector(&self, query: &str) -> BTreeMap<String, f64> {
        let mut vector = term_frequencies(&tokenize(query));
        vector.retain(|token, _| self.df.contains_key(token));
        for (token, weight) in vector.iter_mut() {
            *weight *= float::ln(self.n_docs as f64 / self.df[token] as f64);
        }
        vector
    }

    /// Top-k documents of the requested kind by cosine against the query,
    /// ties broken lexicographically by doc id.
    pub fn top_k(&self, query: &str, k: usize, kind: DocKind) -> Vec<Match> {
        let query_vector = self.query_vector(query);
        let mut matches: Vec<Match> = self
            .docs
            .iter()
            .enumerate()
            .filter(|(_, doc)| doc.kind == kind)
            .map(|(i, doc)| Match {
                id: doc.id.clone(),
                score: cosine(&query_vector, &self.vectors[i]),
                kind,
            })
            .collect();
        matches.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then_with(|| a.id.cmp(&b.id))
        });
        matches.truncate(k);
        matches
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::turtle;

    #[test]
    fn tokenize_splits_case_digits_and_separators() {
        assert_eq!(tokenize("advancePayment"), ["advance", "payment"]);
        assert_eq!(tokenize("DSC"), ["dsc"]);
        assert_eq!(tokenize("within2weeksOf"), ["within", "2", "weeks", "of"]);
        assert_eq!(tokenize("notice_to-proceed"), ["notice", "to", "proceed"]);
        assert_eq!(tokenize("  "), Vec::<String>::new());
    }

    #[test]
    fn cosine_basics() {
        let a: BTreeMap<String, f64> =
            [("x".into(), 1.0), ("y".into(), 2.0), ("z".into(), 3.0)].into();
        let b: BTreeMap<String, f64> =
            [("x".into(), 4.0), ("y".into(), 5.0), ("z".into(), 6.0)].into();
        assert!((cosine(&a, &a) - 1.0).abs() < 1e-12);
        assert!((cosine(&a, &b) - 0.974_631_846).abs() < 1e-6);
        let disjoint: BTreeMap<String, f64> = [("w".into(), 1.0)].into();
        assert_eq!(cosine(&a, &disjoint), 0.0);
        assert_eq!(cosine(&a, &BTreeMap::new()), 0.0);
    }

    fn seed_store() -> GraphStore {
        let doc = turtle::parse(
            r#"
@prefix ckg: <http://example.org/NCKG/> .
<< ckg:Employer ckg:make ckg:advancePayment >> ckg:hasCondition << ckg:Contractor ckg:submit ckg:Guarantee >> .
ckg:Works ckg:hasProperty ckg:commencementDate .
ckg:commencement ckg:hasProperty ckg:startOfWorks .
"#,
        )
        .unwrap();
        let mut store = GraphStore::new();
        for triple in doc.triples {
            store.insert(triple).unwrap();
        }
        store
    }

    fn toy_onto() -> OntologyModel {
        OntologyModel::load(
            &turtle::parse(
                "@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n\
                 @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n\
                 @prefix ckg: <http://example.org/NCKG/> .\n\
                 ckg:ContractActor rdf:type rdfs:Class .\n\
                 ckg:ContractObject rdf:type rdfs:Class .\n\
                 ckg:ContractProperty rdf:type rdfs:Class .\n\
                 ckg:ContractConstraint rdf:type rdfs:Class .\n\
                 ckg:ContractEvent rdf:type rdfs:Class .",
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn empty_store_is_rejected() {
        assert_eq!(
            LexicalIndex::build(&GraphStore::new(), &toy_onto()).unwrap_err(),
            IndexError::EmptyStore
        );
    }

    #[test]
    fn catalog_has_entities_and_events() {
        let index = LexicalIndex::build(&seed_store(), &toy_onto()).unwrap();
        let entity_ids: Vec<&str> = index
            .docs()
            .iter()
            .filter(|d| d.kind == DocKind::Entity)
            .map(|d| d.id.as_str())
            .collect();
        assert!(entity_ids.contains(&"<http://example.org/NCKG/advancePayment>"));
        let event_count = index.docs().iter().filter(|d| d.kind == DocKind::Event).count();
        assert_eq!(event_count, 2);
    }

    #[test]
    fn exact_label_match_scores_one() {
        let index = LexicalIndex::build(&seed_store(), &toy_onto()).unwrap();
        let hits = index.top_k("advance payment", 2, DocKind::Entity);
        assert_eq!(hits[0].id, "<http://example.org/NCKG/advancePayment>");
        assert!((hits[0].score - 1.0).abs() < 1e-9);
    }

    #[test]
    fn event_containing_query_terms_ranks_in_top_two() {
        let index = LexicalIndex::build(&seed_store(), &toy_onto()).unwrap();
        let hits = index.top_k("advance payment", 2, DocKind::Event);
        assert!(hits
            .iter()
            .any(|m| m.id.contains("advancePayment") && m.id.contains("Employer")));
    }

    #[test]
    fn commencement_query_finds_both_variants() {
        let index = LexicalIndex::build(&seed_store(), &toy_onto()).unwrap();
        let hits = index.top_k("commencement", 2, DocKind::Entity);
        let ids: alloc::collections::BTreeSet<&str> =
            hits.iter().map(|m| m.id.as_str()).collect();
        assert_eq!(
            ids,
            alloc::collections::BTreeSet::from([
                "<http://example.org/NCKG/commencement>",
                "<http://example.org/NCKG/commencementDate>",
            ])
        );
    }

    #[test]
    fn single_doc_index_has_all_zero_weights() {
        let index = LexicalIndex::build_clauses([("c1", "all terms share one doc")]);
        assert_eq!(index.n_docs(), 1);
        assert!(index.vector(0).values().all(|w| *w == 0.0));
    }

    #[test]
    fn unseen_query_tokens_are_dropped() {
        let index = LexicalIndex::build(&seed_store(), &toy_onto()).unwrap();
        assert!(index.query_vector("zzz unseen tokens").is_empty());
        let hits = index.top_k("zzz unseen tokens", 2, DocKind::Entity);
        assert!(hits.iter().all(|m| m.score == 0.0));
    }

    #[test]
    fn clause_index_retrieves_by_shared_words() {
        let index = LexicalIndex::build_clauses([
            ("c1", "The Contractor shall submit a payment guarantee"),
            ("c2", "The Engineer may instruct a variation"),
            ("c3", "Payment becomes due within 56 days"),
        ]);
        let hits = index.top_k("payment guarantee", 1, DocKind::Clause);
        assert_eq!(hits[0].id, "c1");
        assert!(hits[0].score > 0.0);
    }
}
