//! The retrieval-augmented review pipeline and its two baselines.
//!
//! NCKG mode extracts two key terms, maps them to catalog entities and
//! events, pulls the triples touching each anchor plus their risk
//! categories, and folds everything into the review prompt. The vector
//! baseline retrieves the most similar catalog clause instead; the
//! LLM-only baseline prompts with the clause alone.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use nckg_core::lexical::{DocKind, DocSource, LexicalIndex, Match};
use nckg_core::ontology::RiskCategory;
use nckg_core::query::{self, QueryTemplate};
use nckg_core::store::GraphStore;
use nckg_core::term::{Term, Triple};
use nckg_core::turtle::{self, Document};
use nckg_core::verdict::{self, Assessment, CategoryLabel, VerdictError};
use nckg_core::vocab;

use crate::construct::Clause;
use crate::gateway::{ChatRequest, Gateway, GatewayError};
use crate::templates::{self, TemplateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReviewMode {
    #[serde(rename = "nckg")]
    Nckg,
    #[serde(rename = "vector")]
    VectorBaseline,
    #[serde(rename = "llm-only")]
    LlmOnly,
}

impl ReviewMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReviewMode::Nckg => "nckg",
            ReviewMode::VectorBaseline => "vector",
            ReviewMode::LlmOnly => "llm-only",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown review mode '{0}': expected nckg, vector or llm-only")]
pub struct UnknownMode(pub String);

impl FromStr for ReviewMode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nckg" => Ok(ReviewMode::Nckg),
            "vector" => Ok(ReviewMode::VectorBaseline),
            "llm-only" => Ok(ReviewMode::LlmOnly),
            other => Err(UnknownMode(other.to_string())),
        }
    }
}

/// Everything the retrieval stage found for one clause.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalBundle {
    pub clause_id: String,
    pub extracted_terms: [String; 2],
    pub entity_matches: Vec<(String, Vec<Match>)>,
    pub event_matches: Vec<(String, Vec<Match>)>,
    /// Deduplicated, in retrieval order.
    pub retrieved_triples: Vec<Triple>,
    pub retrieved_risk_categories: BTreeSet<RiskCategory>,
}

impl RetrievalBundle {
    /// The bundle's triples as Turtle-star statements, the form they
    /// take inside the review prompt.
    pub fn context_text(&self) -> String {
        let doc = Document {
            prefixes: BTreeMap::from([(
                vocab::CKG_PREFIX.to_string(),
                vocab::CKG_NS.to_string(),
            )]),
            triples: self.retrieved_triples.clone(),
        };
        let serialized = turtle::serialize(&doc);
        serialized
            .lines()
            .filter(|line| !line.starts_with("@prefix") && !line.trim().is_empty())
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn categories_text(&self) -> String {
        if self.retrieved_risk_categories.is_empty() {
            return "(none)".to_string();
        }
        self.retrieved_risk_categories
            .iter()
            .map(|c| c.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictAssessment {
    pub category: String,
    pub risk_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskVerdict {
    pub clause_id: String,
    pub mode: ReviewMode,
    pub assessments: Vec<VerdictAssessment>,
    pub summary: String,
    pub raw_response: String,
}

#[derive(Debug, Error)]
pub enum ReviewError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("term extraction failed: {0}")]
    Terms(VerdictError),
    #[error("no catalog matches above score 0 for clause {0}")]
    EmptyRetrieval(String),
    #[error("could not parse a verdict from the model output: {0}")]
    VerdictParseFailure(VerdictError),
    #[error("prompt rendering failed: {0}")]
    Render(#[from] nckg_core::prompt::RenderError),
}

/// Clause catalog for the vector baseline: TF-IDF index plus raw texts.
#[derive(Debug, Clone)]
pub struct ClauseCatalog {
    pub index: LexicalIndex,
    pub texts: BTreeMap<String, String>,
}

impl ClauseCatalog {
    pub fn build(clauses: &[Clause]) -> Self {
        let index = LexicalIndex::build_clauses(
            clauses.iter().map(|c| (c.id.as_str(), c.text.as_str())),
        );
        let texts = clauses.iter().map(|c| (c.id.clone(), c.text.clone())).collect();
        ClauseCatalog { index, texts }
    }

    /// The most similar catalog clause, if any scores above zero.
    pub fn top_provision(&self, clause_text: &str) -> Option<(&str, &str)> {
        let hits = self.index.top_k(clause_text, 1, DocKind::Clause);
        let hit = hits.first().filter(|m| m.score > 0.0)?;
        let text = self.texts.get(&hit.id)?;
        let id = self.texts.get_key_value(&hit.id).map(|(k, _)| k.as_str())?;
        Some((id, text.as_str()))
    }
}

fn anchor_of(index: &LexicalIndex, m: &Match) -> Option<Term> {
    match &index.doc_by_id(&m.id)?.source {
        DocSource::Term(term) => Some(term.clone()),
        DocSource::Clause(_) => None,
    }
}

/// Algorithm: extract two terms, map each to top-k entities and events,
/// query the context of every anchor, then the risk categories of every
/// retrieved event.
pub fn retrieve(
    clause: &Clause,
    store: &GraphStore,
    index: &LexicalIndex,
    gateway: &Gateway,
    model: &str,
    top_k: usize,
) -> Result<RetrievalBundle, ReviewError> {
    let prompt = templates::render(TemplateId::TermExtract, &[("clause", &clause.text)])?;
    let response = gateway.complete(&ChatRequest::prompt(model, prompt, TemplateId::TermExtract))?;
    let terms = verdict::parse_term_list(&response.content).map_err(ReviewError::Terms)?;

    let mut entity_matches = Vec::new();
    let mut event_matches = Vec::new();
    let mut anchors: Vec<Term> = Vec::new();
    for term in &terms {
        let entities = index.top_k(term, top_k, DocKind::Entity);
        let events = index.top_k(term, top_k, DocKind::Event);
        for m in entities.iter().chain(&events) {
            if m.score > 0.0 {
                if let Some(anchor) = anchor_of(index, m) {
                    if !anchors.contains(&anchor) {
                        anchors.push(anchor);
                    }
                }
            }
        }
        entity_matches.push((term.clone(), entities));
        event_matches.push((term.clone(), events));
    }
    if anchors.is_empty() {
        return Err(ReviewError::EmptyRetrieval(clause.id.clone()));
    }

    let mut retrieved: Vec<Triple> = Vec::new();
    for anchor in &anchors {
        let template = if anchor.as_quoted().is_some() {
            QueryTemplate::EventContext
        } else {
            QueryTemplate::EntityContext
        };
        let bound = query::bind_template(template, anchor).expect("anchor kind matches template");
        let (_, touched) = query::evaluate_collecting(store, &bound);
        for triple in touched {
            if !retrieved.contains(&triple) {
                retrieved.push(triple);
            }
        }
    }

    let mut events: Vec<Triple> = Vec::new();
    for triple in &retrieved {
        triple.visit_quoted(&mut |q| {
            if !events.contains(q) {
                events.push(q.clone());
            }
        });
    }
    let mut categories = BTreeSet::new();
    for event in &events {
        let anchor = Term::quoted(event.clone());
        let bound = query::bind_template(QueryTemplate::RiskCategory, &anchor)
            .expect("event anchor is quoted");
        let table = query::evaluate(store, &bound);
        for row in &table.rows {
            for cell in row.iter().flatten() {
                if let Term::Iri(iri) = cell {
                    if let Some(category) = RiskCategory::from_iri(iri) {
                        categories.insert(category);
                    }
                }
            }
        }
    }

    Ok(RetrievalBundle {
        clause_id: clause.id.clone(),
        extracted_terms: terms,
        entity_matches,
        event_matches,
        retrieved_triples: retrieved,
        retrieved_risk_categories: categories,
    })
}

/// Mode-specific context for [`review`]. LLM-only needs none of it,
/// which is what keeps that baseline isolated from the graph.
pub enum ReviewContext<'a> {
    Nckg {
        store: &'a GraphStore,
        index: &'a LexicalIndex,
        top_k: usize,
    },
    Vector {
        catalog: &'a ClauseCatalog,
    },
    LlmOnly,
}

#[derive(Debug)]
pub struct ReviewOutcome {
    pub verdict: RiskVerdict,
    pub bundle: Option<RetrievalBundle>,
    /// Set when NCKG retrieval came up empty and the clause fell back
    /// to the LLM-only prompt.
    pub degraded: bool,
}

pub fn review(
    clause: &Clause,
    mode: ReviewMode,
    context: ReviewContext<'_>,
    gateway: &Gateway,
    model: &str,
) -> Result<ReviewOutcome, ReviewError> {
    let mut bundle = None;
    let mut degraded = false;

    let prompt = match (&mode, context) {
        (ReviewMode::Nckg, ReviewContext::Nckg { store, index, top_k }) => {
            match retrieve(clause, store, index, gateway, model, top_k) {
                Ok(found) => {
                    let prompt = templates::render(
                        TemplateId::Review,
                        &[
                            ("input_clause", &clause.text),
                            ("retrieved_triple", &found.context_text()),
                            ("retrieved_risk_category", &found.categories_text()),
                        ],
                    )?;
                    bundle = Some(found);
                    (prompt, TemplateId::Review)
                }
                Err(ReviewError::EmptyRetrieval(id)) => {
                    log::warn!("clause {id}: empty retrieval, degrading to the LLM-only prompt");
                    degraded = true;
                    (
                        templates::render(TemplateId::BaselineLlmOnly, &[("clause", &clause.text)])?,
                        TemplateId::BaselineLlmOnly,
                    )
                }
                Err(other) => return Err(other),
            }
        }
        (ReviewMode::VectorBaseline, ReviewContext::Vector { catalog }) => {
            let provision = catalog
                .top_provision(&clause.text)
                .map(|(_, text)| text.to_string())
                .unwrap_or_else(|| "(no similar provision found)".to_string());
            (
                templates::render(
                    TemplateId::BaselineVector,
                    &[("clause", &clause.text), ("standard_provision", &provision)],
                )?,
                TemplateId::BaselineVector,
            )
        }
        (ReviewMode::LlmOnly, ReviewContext::LlmOnly) => (
            templates::render(TemplateId::BaselineLlmOnly, &[("clause", &clause.text)])?,
            TemplateId::BaselineLlmOnly,
        ),
        _ => unreachable!("review mode and context are paired by the caller"),
    };

    let response = gateway.complete(&ChatRequest::prompt(model, prompt.0, prompt.1))?;
    let parsed = verdict::parse_verdict(&response.content)
        .map_err(ReviewError::VerdictParseFailure)?;
    if parsed.summary.split_whitespace().count() > 100 {
        log::warn!("clause {}: risk summary exceeds 100 words", clause.id);
    }

    Ok(ReviewOutcome {
        verdict: RiskVerdict {
            clause_id: clause.id.clone(),
            mode,
            assessments: dedupe_assessments(parsed.assessments),
            summary: parsed.summary,
            raw_response: response.content,
        },
        bundle,
        degraded,
    })
}

/// Keeps the first assessment per category label.
fn dedupe_assessments(assessments: Vec<Assessment>) -> Vec<VerdictAssessment> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for assessment in assessments {
        let category = match &assessment.category {
            CategoryLabel::Known(cat) => cat.as_str().to_string(),
            CategoryLabel::Unknown(label) => label.clone(),
        };
        if seen.insert(category.clone()) {
            out.push(VerdictAssessment {
                category,
                risk_type: assessment.risk_type.as_str().to_string(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::Source;
    use crate::gateway::{MockEntry, MockMatch};

    fn clause(id: &str, text: &str) -> Clause {
        Clause { id: id.to_string(), source: Source::Fidic, section: String::new(), text: text.to_string() }
    }

    fn mock(entries: Vec<(&str, &str)>) -> Gateway {
        Gateway::mock(
            entries
                .into_iter()
                .map(|(template, response)| MockEntry {
                    matcher: MockMatch {
                        template_id: Some(template.to_string()),
                        prompt_sha256: None,
                    },
                    response: response.to_string(),
                })
                .collect(),
        )
    }

    #[test]
    fn llm_only_needs_no_graph_context() {
        let gateway = mock(vec![(
            "BASELINE_LLM_ONLY",
            "Payment-No risk\n\nRisk Summary: fine.",
        )]);
        let outcome = review(
            &clause("c1", "a clause"),
            ReviewMode::LlmOnly,
            ReviewContext::LlmOnly,
            &gateway,
            "m",
        )
        .unwrap();
        assert_eq!(outcome.verdict.mode, ReviewMode::LlmOnly);
        assert!(outcome.bundle.is_none());
        assert_eq!(outcome.verdict.assessments.len(), 1);
        assert_eq!(outcome.verdict.summary, "fine.");
    }

    #[test]
    fn vector_baseline_picks_the_closest_provision() {
        let catalog = ClauseCatalog::build(&[
            clause("std1", "The Employer shall deliver the payment guarantee"),
            clause("std2", "The Engineer may instruct a variation of the works"),
        ]);
        assert_eq!(
            catalog.top_provision("payment guarantee terms").map(|(id, _)| id),
            Some("std1")
        );
        assert_eq!(catalog.top_provision("zzz qqq"), None);
    }

    #[test]
    fn duplicate_categories_collapse() {
        let gateway = mock(vec![(
            "BASELINE_LLM_ONLY",
            "Payment-No risk\nPayment-Ambiguity\nTemporal-No risk",
        )]);
        let outcome = review(
            &clause("c1", "text"),
            ReviewMode::LlmOnly,
            ReviewContext::LlmOnly,
            &gateway,
            "m",
        )
        .unwrap();
        let categories: Vec<&str> =
            outcome.verdict.assessments.iter().map(|a| a.category.as_str()).collect();
        assert_eq!(categories, ["Payment", "Temporal"]);
        assert_eq!(outcome.verdict.assessments[0].risk_type, "No Risk");
    }

    #[test]
    fn unparseable_output_is_flagged_with_raw_preserved() {
        let gateway = mock(vec![("BASELINE_LLM_ONLY", "I cannot help with that.")]);
        let err = review(
            &clause("c1", "text"),
            ReviewMode::LlmOnly,
            ReviewContext::LlmOnly,
            &gateway,
            "m",
        )
        .unwrap_err();
        assert!(matches!(err, ReviewError::VerdictParseFailure(_)));
    }

    #[test]
    fn mode_strings_round_trip() {
        for mode in [ReviewMode::Nckg, ReviewMode::VectorBaseline, ReviewMode::LlmOnly] {
            assert_eq!(mode.as_str().parse::<ReviewMode>().unwrap(), mode);
        }
        assert!("other".parse::<ReviewMode>().is_err());
    }
}
