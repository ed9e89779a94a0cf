//! Ontology layer: class hierarchy, relation taxonomy and the mapping
//! from ontology classes to risk categories.
//!
//! The ontology is itself a Turtle-star document, so the same parser
//! serves schema and data. Classes are declared with `rdf:type rdfs:Class`
//! or implied by `rdfs:subClassOf`; relations are typed against the
//! `ckg:E2ERelation` / `ckg:E2EvtRelation` / `ckg:Evt2EvtRelation` marker
//! classes; risk links use `ckg:hasRiskCategory`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::store::{GraphStore, TermPattern, TriplePattern};
use crate::term::{Iri, Term, TripleKind};
use crate::turtle::Document;
use crate::vocab;

/// The six contract risk categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RiskCategory {
    Assignment,
    Payment,
    Temporal,
    Financial,
    /// Differing site conditions.
    Dsc,
    Liability,
}

impl RiskCategory {
    pub const ALL: [RiskCategory; 6] = [
        RiskCategory::Assignment,
        RiskCategory::Payment,
        RiskCategory::Temporal,
        RiskCategory::Financial,
        RiskCategory::Dsc,
        RiskCategory::Liability,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RiskCategory::Assignment => "Assignment",
            RiskCategory::Payment => "Payment",
            RiskCategory::Temporal => "Temporal",
            RiskCategory::Financial => "Financial",
            RiskCategory::Dsc => "DSC",
            RiskCategory::Liability => "Liability",
        }
    }

    /// Case-insensitive label match, tolerating "Differing site conditions".
    pub fn from_label(label: &str) -> Option<Self> {
        let trimmed = label.trim();
        for cat in Self::ALL {
            if trimmed.eq_ignore_ascii_case(cat.as_str()) {
                return Some(cat);
            }
        }
        if trimmed.to_ascii_lowercase().starts_with("differing site condition") {
            return Some(RiskCategory::Dsc);
        }
        None
    }

    pub fn from_iri(iri: &Iri) -> Option<Self> {
        Self::from_label(iri.local_name())
    }

    pub fn iri(&self) -> Iri {
        vocab::ckg(self.as_str())
    }
}

impl fmt::Display for RiskCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The qualitative finding attached to a risk category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RiskType {
    Ambiguity,
    UnbalancedObligation,
    NoRisk,
}

impl RiskType {
    pub fn as_str(&self) -> &'static str {
        match self {
            RiskType::Ambiguity => "Ambiguity",
            RiskType::UnbalancedObligation => "Unbalanced Obligation",
            RiskType::NoRisk => "No Risk",
        }
    }

    /// Normalizes the spellings found in model output ("No risk",
    /// "Unbalanced Obligation", "Ambiguity"), ignoring case and
    /// space/underscore/hyphen differences.
    pub fn from_label(label: &str) -> Option<Self> {
        let folded: String = label
            .trim()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match folded.as_str() {
            "ambiguity" => Some(RiskType::Ambiguity),
            "unbalancedobligation" => Some(RiskType::UnbalancedObligation),
            "norisk" => Some(RiskType::NoRisk),
            _ => None,
        }
    }
}

impl fmt::Display for RiskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub subject: Term,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("cyclic class hierarchy through {0}")]
    CyclicHierarchy(Iri),
    #[error("upper ontology class {0} is not declared")]
    UnknownUpperClass(Iri),
}

/// Immutable ontology model: class forest, relation taxonomy and the
/// class-to-risk-category map.
#[derive(Debug, Clone, Default)]
pub struct OntologyModel {
    classes: BTreeSet<Iri>,
    subclass_of: BTreeMap<Iri, Iri>,
    relation_taxonomy: BTreeMap<Iri, TripleKind>,
    risk_map: BTreeMap<Iri, BTreeSet<RiskCategory>>,
}

impl OntologyModel {
    pub fn load(doc: &Document) -> Result<Self, OntologyError> {
        let mut model = OntologyModel::default();
        let rdf_type = vocab::rdf_type();
        let subclass = vocab::rdfs_subclass_of();
        let rdfs_class = vocab::rdfs_class();
        let risk_pred = vocab::has_risk_category();
        let relation_markers = [
            (vocab::ckg("E2ERelation"), TripleKind::E2E),
            (vocab::ckg("E2EvtRelation"), TripleKind::E2Evt),
            (vocab::ckg("Evt2EvtRelation"), TripleKind::Evt2Evt),
        ];

        for triple in &doc.triples {
            let (Some(s), o) = (triple.subject().as_iri(), triple.object()) else {
                continue;
            };
            let p = triple.predicate();
            if p == &rdf_type {
                if let Some(obj) = o.as_iri() {
                    if obj == &rdfs_class {
                        model.classes.insert(s.clone());
                    }
                    for (marker, kind) in &relation_markers {
                        if obj == marker {
                            model.relation_taxonomy.insert(s.clone(), *kind);
                        }
                    }
                }
            } else if p == &subclass {
                if let Some(parent) = o.as_iri() {
                    model.classes.insert(s.clone());
                    model.classes.insert(parent.clone());
                    model.subclass_of.insert(s.clone(), parent.clone());
                }
            } else if p == &risk_pred {
                if let Some(cat) = o.as_iri().and_then(RiskCategory::from_iri) {
                    model.risk_map.entry(s.clone()).or_default().insert(cat);
                }
            }
        }

        for upper in [
            vocab::contract_actor(),
            vocab::contract_object(),
            vocab::contract_property(),
            vocab::contract_constraint(),
            vocab::contract_event(),
        ] {
            if !model.classes.contains(&upper) {
                return Err(OntologyError::UnknownUpperClass(upper));
            }
        }

        // acyclicity of the subclass forest
        for start in model.subclass_of.keys() {
            let mut seen = BTreeSet::new();
            let mut current = start;
            while let Some(parent) = model.subclass_of.get(current) {
                if !seen.insert(current.clone()) {
                    return Err(OntologyError::CyclicHierarchy(start.clone()));
                }
                current = parent;
            }
        }

        Ok(model)
    }

    pub fn classes(&self) -> &BTreeSet<Iri> {
        &self.classes
    }

    pub fn is_class(&self, iri: &Iri) -> bool {
        self.classes.contains(iri)
    }

    pub fn parent_of(&self, class: &Iri) -> Option<&Iri> {
        self.subclass_of.get(class)
    }

    pub fn relation_kind(&self, predicate: &Iri) -> Option<TripleKind> {
        self.relation_taxonomy.get(predicate).copied()
    }

    pub fn risk_map(&self) -> &BTreeMap<Iri, BTreeSet<RiskCategory>> {
        &self.risk_map
    }

    /// The class plus all its ancestors.
    pub fn closure(&self, class: &Iri) -> BTreeSet<Iri> {
        let mut out = BTreeSet::new();
        let mut current = class.clone();
        loop {
            if !out.insert(current.clone()) {
                break;
            }
            match self.subclass_of.get(&current) {
                Some(parent) => current = parent.clone(),
                None => break,
            }
        }
        out
    }

    /// Upward closure of the `rdf:type` assertions on `term` in `store`.
    pub fn classes_of(&self, term: &Term, store: &GraphStore) -> BTreeSet<Iri> {
        let pattern = TriplePattern::new(
            TermPattern::Term(term.clone()),
            TermPattern::iri(vocab::rdf_type()),
            TermPattern::Any,
        );
        let mut out = BTreeSet::new();
        for triple in store.matching(&pattern) {
            if let Some(class) = triple.object().as_iri() {
                out.extend(self.closure(class));
            }
        }
        out
    }

    /// Risk categories reachable from a term through its classes. For an
    /// event (quoted triple) the predicate's classes contribute too.
    pub fn risk_categories_for(&self, term: &Term, store: &GraphStore) -> BTreeSet<RiskCategory> {
        let mut classes = self.classes_of(term, store);
        if let Some(inner) = term.as_quoted() {
            classes.extend(self.classes_of(&Term::Iri(inner.predicate().clone()), store));
        }
        let mut out = BTreeSet::new();
        for class in classes {
            if let Some(categories) = self.risk_map.get(&class) {
                out.extend(categories.iter().copied());
            }
        }
        out
    }

    /// Shape checks over a store: deviations from the meta-model are
    /// warnings, hard structural violations are errors.
    pub fn validate(&self, store: &GraphStore) -> Vec<Diagnostic> {
        let mut diagnostics = Vec::new();
        let actor = vocab::contract_actor();
        let has_property = vocab::has_property();
        let mut events: BTreeSet<crate::term::Triple> = BTreeSet::new();

        for triple in store.iter() {
            if triple.inner_depth() > store.max_depth() {
                diagnostics.push(Diagnostic {
                    severity: Severity::Error,
                    subject: triple.subject().clone(),
                    message: format!(
                        "triple nesting depth {} exceeds maximum {}",
                        triple.inner_depth(),
                        store.max_depth()
                    ),
                });
            }
            if triple.kind() != TripleKind::E2E && !self.is_nested_predicate(triple.predicate()) {
                diagnostics.push(Diagnostic {
                    severity: Severity::Warning,
                    subject: triple.subject().clone(),
                    message: format!(
                        "predicate {} links an event but is outside the constraint, \
                         conditional, temporal and risk families",
                        triple.predicate()
                    ),
                });
            }
            triple.visit_quoted(&mut |q| {
                events.insert(q.clone());
            });
        }

        for event in events {
            if event.predicate() == &has_property {
                continue;
            }
            if let Some(subject_iri) = event.subject().as_iri() {
                let classes = self.classes_of(&Term::Iri(subject_iri.clone()), store);
                if !classes.contains(&actor) {
                    diagnostics.push(Diagnostic {
                        severity: Severity::Warning,
                        subject: Term::quoted(event.clone()),
                        message: format!(
                            "event subject {subject_iri} is not typed under ckg:ContractActor"
                        ),
                    });
                }
            }
        }

        diagnostics
    }

    /// Predicates acceptable on triples that touch an event: anything the
    /// ontology types as an E2Evt/Evt2Evt relation, the risk annotations,
    /// and minted temporal predicates like `within90daysOf`.
    fn is_nested_predicate(&self, predicate: &Iri) -> bool {
        if matches!(
            self.relation_taxonomy.get(predicate),
            Some(TripleKind::E2Evt) | Some(TripleKind::Evt2Evt)
        ) {
            return true;
        }
        if predicate == &vocab::has_risk_category() || predicate == &vocab::has_risk_label() {
            return true;
        }
        let local = predicate.local_name().to_ascii_lowercase();
        local.starts_with("within")
            || local.starts_with("before")
            || local.starts_with("after")
            || local.starts_with("until")
            || local.starts_with("assoonas")
    }
}
