//! The six prompt templates and their slot rendering.
//!
//! Template bodies live in `templates/*.txt` so wording can be revised
//! without touching code; slots use `{name}` syntax.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nckg_core::prompt::{self, RenderError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TemplateId {
    TermExtract,
    Ner,
    RelationLink,
    Review,
    BaselineLlmOnly,
    BaselineVector,
}

impl TemplateId {
    pub const ALL: [TemplateId; 6] = [
        TemplateId::TermExtract,
        TemplateId::Ner,
        TemplateId::RelationLink,
        TemplateId::Review,
        TemplateId::BaselineLlmOnly,
        TemplateId::BaselineVector,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TemplateId::TermExtract => "TERM_EXTRACT",
            TemplateId::Ner => "NER",
            TemplateId::RelationLink => "RELATION_LINK",
            TemplateId::Review => "REVIEW",
            TemplateId::BaselineLlmOnly => "BASELINE_LLM_ONLY",
            TemplateId::BaselineVector => "BASELINE_VECTOR",
        }
    }

    pub fn body(&self) -> &'static str {
        match self {
            TemplateId::TermExtract => include_str!("../templates/term_extract.txt"),
            TemplateId::Ner => include_str!("../templates/ner.txt"),
            TemplateId::RelationLink => include_str!("../templates/relation_link.txt"),
            TemplateId::Review => include_str!("../templates/review.txt"),
            TemplateId::BaselineLlmOnly => include_str!("../templates/baseline_llm_only.txt"),
            TemplateId::BaselineVector => include_str!("../templates/baseline_vector.txt"),
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown template id '{0}'")]
pub struct UnknownTemplate(pub String);

impl FromStr for TemplateId {
    type Err = UnknownTemplate;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| UnknownTemplate(s.to_string()))
    }
}

pub fn render(id: TemplateId, slots: &[(&str, &str)]) -> Result<String, RenderError> {
    prompt::render_pairs(id.body(), slots)
}

pub fn render_map(
    id: TemplateId,
    slots: &BTreeMap<String, String>,
) -> Result<String, RenderError> {
    prompt::render(id.body(), slots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn review_template_states_the_answer_format() {
        let out = render(
            TemplateId::Review,
            &[
                ("input_clause", "clause text"),
                ("retrieved_triple", "t"),
                ("retrieved_risk_category", "Payment"),
            ],
        )
        .unwrap();
        assert!(out.contains("[Risk category]-[Risk type]"));
        assert!(out.contains("clause text"));
    }

    #[test]
    fn term_extract_asks_for_two_entities() {
        let out = render(TemplateId::TermExtract, &[("clause", "x")]).unwrap();
        assert!(out.contains("Extract two key concepts or entities"));
        assert!(out.contains("comma-separated list of two entities"));
    }

    #[test]
    fn missing_slot_surfaces() {
        assert_eq!(
            render(TemplateId::Review, &[("input_clause", "x")]),
            Err(RenderError::MissingSlot("retrieved_triple".to_string()))
        );
    }

    #[test]
    fn ids_round_trip_through_strings() {
        for id in TemplateId::ALL {
            assert_eq!(id.as_str().parse::<TemplateId>().unwrap(), id);
        }
        assert!("NOPE".parse::<TemplateId>().is_err());
    }

    #[test]
    fn distinct_clause_texts_render_distinct_prompts() {
        let a = render(TemplateId::BaselineLlmOnly, &[("clause", "first")]).unwrap();
        let b = render(TemplateId::BaselineLlmOnly, &[("clause", "second")]).unwrap();
        assert_ne!(a, b);
    }
}
