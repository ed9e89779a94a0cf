//! Core data model and algorithms for nested contract knowledge graphs.
//!
//! A contract clause is modelled as a set of RDF-star triples in which a
//! whole triple (an *event*) may itself occupy the subject or object
//! position of another triple. This crate provides the term and triple
//! model, an indexed in-memory store, a Turtle-star parser and serializer,
//! a small SPARQL-star query engine, the ontology layer with risk-category
//! mapping, TF-IDF label retrieval, multi-label evaluation metrics, and
//! the text-level helpers (prompt rendering, verdict parsing) shared by
//! the review pipeline.
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std`
//! feature enables the standard library.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod lexical;
pub mod metrics;
pub mod ontology;
pub mod prompt;
pub mod query;
pub mod store;
pub mod term;
pub mod turtle;
pub mod verdict;
pub mod vocab;

pub use ontology::{OntologyModel, RiskCategory, RiskType};
pub use store::{GraphStore, StoreStats, TermPattern, TriplePattern};
pub use term::{Iri, Literal, Term, Triple, TripleKind};
pub use turtle::Document;

/// Float helpers that work without `std`.
pub(crate) mod float {
    #[cfg(feature = "std")]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }

    #[cfg(not(feature = "std"))]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }

    #[cfg(feature = "std")]
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }

    #[cfg(not(feature = "std"))]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
}
