//! Parsers for model output: term lists from the extraction prompt and
//! risk assessments from the review prompt.
//!
//! The review prompt asks for `[Risk category]-[Risk type]` lines but
//! real output drifts between `-` and `--`, with and without brackets,
//! and sometimes packs several assessments on one line. The parser
//! accepts all of these.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::ontology::{RiskCategory, RiskType};

/// A category label as printed by the model; labels outside the six
/// known categories are preserved rather than dropped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum CategoryLabel {
    Known(RiskCategory),
    Unknown(String),
}

impl CategoryLabel {
    pub fn from_text(text: &str) -> Self {
        match RiskCategory::from_label(text) {
            Some(cat) => CategoryLabel::Known(cat),
            None => CategoryLabel::Unknown(text.trim().to_string()),
        }
    }

    pub fn known(&self) -> Option<RiskCategory> {
        match self {
            CategoryLabel::Known(cat) => Some(*cat),
            CategoryLabel::Unknown(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assessment {
    pub category: CategoryLabel,
    pub risk_type: RiskType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedVerdict {
    pub assessments: Vec<Assessment>,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerdictError {
    #[error("no risk assessments found in model output")]
    ParseFailure,
    #[error("expected 2 comma-separated terms, found {found}")]
    TermCountMismatch { found: usize },
}

/// Splits a comma-separated term list, trimming whitespace and quotes.
/// The extraction prompt asks for exactly two terms.
pub fn parse_term_list(content: &str) -> Result<[String; 2], VerdictError> {
    let terms: Vec<String> = content
        .split(',')
        .map(|t| t.trim().trim_matches(|c| c == '"' || c == '\'').trim().to_string())
        .filter(|t| !t.is_empty())
        .collect();
    match <[String; 2]>::try_from(terms) {
        Ok(pair) => Ok(pair),
        Err(terms) => Err(VerdictError::TermCountMismatch { found: terms.len() }),
    }
}

/// One of the three risk-type spellings, matched case-insensitively at
/// the start of `text`. Returns the type and how many bytes it spans.
fn leading_risk_type(text: &str) -> Option<(RiskType, usize)> {
    for (spelling, risk_type) in [
        ("unbalanced obligation", RiskType::UnbalancedObligation),
        ("ambiguity", RiskType::Ambiguity),
        ("no risk", RiskType::NoRisk),
    ] {
        if text.len() >= spelling.len()
            && text.is_char_boundary(spelling.len())
            && text[..spelling.len()].eq_ignore_ascii_case(spelling)
        {
            return Some((risk_type, spelling.len()));
        }
    }
    None
}

fn trim_decoration(text: &str) -> &str {
    text.trim_matches(|c: char| c.is_whitespace() || "[]():,.*".contains(c))
}

fn line_assessments(line: &str) -> Vec<Assessment> {
    let bytes = line.as_bytes();
    let mut out = Vec::new();
    let mut consumed = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'-' {
            i += 1;
            continue;
        }
        let sep_start = i;
        while i < bytes.len() && bytes[i] == b'-' {
            i += 1;
        }
        if i - sep_start > 2 {
            continue;
        }
        let after = &line[i..];
        let stripped = after.trim_start_matches(|c: char| c.is_whitespace() || c == '[');
        let Some((risk_type, span)) = leading_risk_type(stripped) else {
            continue;
        };
        let label = trim_decoration(&line[consumed..sep_start]);
        if label.is_empty() {
            continue;
        }
        out.push(Assessment { category: CategoryLabel::from_text(label), risk_type });
        consumed = i + (after.len() - stripped.len()) + span;
        i = consumed;
    }
    out
}

/// Extracts the assessment list and the free-text risk summary from a
/// review response. Fails only when no assessment line is recognized.
pub fn parse_verdict(text: &str) -> Result<ParsedVerdict, VerdictError> {
    let mut assessments = Vec::new();
    let mut last_assessment_line = None;
    let lines: Vec<&str> = text.lines().collect();
    for (idx, line) in lines.iter().enumerate() {
        let found = line_assessments(line);
        if !found.is_empty() {
            last_assessment_line = Some(idx);
            assessments.extend(found);
        }
    }
    if assessments.is_empty() {
        return Err(VerdictError::ParseFailure);
    }

    let summary = match find_summary_marker(text) {
        Some(rest) => rest.trim().to_string(),
        None => {
            let start = last_assessment_line.unwrap() + 1;
            lines[start..].join("\n").trim().to_string()
        }
    };
    Ok(ParsedVerdict { assessments, summary })
}

/// Text following a "Risk Summary" heading, if one is present.
fn find_summary_marker(text: &str) -> Option<&str> {
    let lower = text.to_ascii_lowercase();
    let pos = lower.find("risk summary")?;
    let rest = &text[pos + "risk summary".len()..];
    Some(rest.trim_start_matches(|c: char| c == ':' || c == '*' || c.is_whitespace()))
}
