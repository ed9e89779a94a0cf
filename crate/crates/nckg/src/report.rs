//! Risk-evaluation scoring over verdict files: per-label
//! precision/recall/F1, macro-F1, and ingestion of human summary scores.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use nckg_core::metrics::{confusion, macro_f1, metrics};
use nckg_core::ontology::{RiskCategory, RiskType};

use crate::ioutil::atomic_write;
use crate::review::{ReviewMode, RiskVerdict};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedClause {
    pub id: String,
    pub text: String,
    pub categories: Vec<String>,
    pub risk_type: String,
    pub summary: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub mode: ReviewMode,
    pub n: usize,
    pub per_label: BTreeMap<String, LabelReport>,
    pub macro_f1: f64,
    /// Fraction of clauses whose full (category, risk type) pair set
    /// matches gold exactly; auxiliary, not part of the RE-score.
    pub exact_pair_agreement: f64,
    /// Mean of human-assigned summary scores, when a scores file was
    /// supplied. Summary quality is never scored automatically.
    pub rs_mean: Option<f64>,
    /// Predicted labels outside the six known categories, with counts.
    pub unknown_labels: BTreeMap<String, usize>,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no verdict found for clause(s): {}", .0.join(", "))]
    MissingVerdict(Vec<String>),
    #[error("gold record {id} has unknown category '{category}'")]
    BadGoldCategory { id: String, category: String },
    #[error("gold record {id} has unknown risk type '{risk_type}'")]
    BadGoldRiskType { id: String, risk_type: String },
    #[error("gold record {id} has no categories but risk type is not No Risk")]
    EmptyGoldCategories { id: String },
    #[error("{path}: line {line}: {message}")]
    Jsonl { path: String, line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, EvalError> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| EvalError::Jsonl {
            path: path.display().to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn read_gold(path: &Path) -> Result<Vec<AnnotatedClause>, EvalError> {
    read_jsonl(path)
}

pub fn read_verdicts(path: &Path) -> Result<Vec<RiskVerdict>, EvalError> {
    read_jsonl(path)
}

#[derive(Debug, Clone, Deserialize)]
struct RsScore {
    id: String,
    score: f64,
}

/// Human summary scores as `{"id": ..., "score": ...}` JSONL.
pub fn read_rs_scores(path: &Path) -> Result<BTreeMap<String, f64>, EvalError> {
    Ok(read_jsonl::<RsScore>(path)?.into_iter().map(|r| (r.id, r.score)).collect())
}

fn gold_categories(record: &AnnotatedClause) -> Result<BTreeSet<RiskCategory>, EvalError> {
    let mut out = BTreeSet::new();
    for label in &record.categories {
        let category =
            RiskCategory::from_label(label).ok_or_else(|| EvalError::BadGoldCategory {
                id: record.id.clone(),
                category: label.clone(),
            })?;
        out.insert(category);
    }
    let risk_type =
        RiskType::from_label(&record.risk_type).ok_or_else(|| EvalError::BadGoldRiskType {
            id: record.id.clone(),
            risk_type: record.risk_type.clone(),
        })?;
    if out.is_empty() && risk_type != RiskType::NoRisk {
        return Err(EvalError::EmptyGoldCategories { id: record.id.clone() });
    }
    Ok(out)
}

/// Scores a verdict run against gold annotations. Verdicts are matched
/// by clause id, so their file order does not matter.
pub fn evaluate_run(
    gold: &[AnnotatedClause],
    verdicts: &[RiskVerdict],
    rs_scores: Option<&BTreeMap<String, f64>>,
) -> Result<Report, EvalError> {
    let by_id: BTreeMap<&str, &RiskVerdict> =
        verdicts.iter().map(|v| (v.clause_id.as_str(), v)).collect();
    let missing: Vec<String> = gold
        .iter()
        .filter(|g| !by_id.contains_key(g.id.as_str()))
        .map(|g| g.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingVerdict(missing));
    }

    let mut gold_sets = Vec::new();
    let mut pred_sets = Vec::new();
    let mut unknown_labels: BTreeMap<String, usize> = BTreeMap::new();
    let mut exact_matches = 0usize;
    for record in gold {
        let verdict = by_id[record.id.as_str()];
        gold_sets.push(gold_categories(record)?);
        let mut predicted = BTreeSet::new();
        let mut predicted_pairs = BTreeSet::new();
        for assessment in &verdict.assessments {
            match RiskCategory::from_label(&assessment.category) {
                Some(category) => {
                    if assessment.risk_type != RiskType::NoRisk.as_str() {
                        predicted.insert(category);
                    }
                    predicted_pairs.insert((category, assessment.risk_type.clone()));
                }
                None => {
                    *unknown_labels.entry(assessment.category.clone()).or_insert(0) += 1;
                }
            }
        }
        let gold_type = record.risk_type.clone();
        let gold_pairs: BTreeSet<(RiskCategory, String)> = gold_sets
            .last()
            .unwrap()
            .iter()
            .map(|c| (*c, gold_type.clone()))
            .collect();
        let predicted_risky: BTreeSet<(RiskCategory, String)> = predicted_pairs
            .iter()
            .filter(|(_, t)| t != RiskType::NoRisk.as_str())
            .cloned()
            .collect();
        if gold_pairs == predicted_risky {
            exact_matches += 1;
        }
        pred_sets.push(predicted);
    }

    let cells = confusion(&gold_sets, &pred_sets).expect("gold and pred are paired");
    let per_label = cells
        .iter()
        .map(|cell| {
            let m = metrics(cell);
            (
                cell.label.as_str().to_string(),
                LabelReport {
                    precision: m.precision,
                    recall: m.recall,
                    f1: m.f1,
                    tp: cell.tp,
                    fp: cell.fp,
                    tn: cell.tn,
                    fn_: cell.fn_,
                },
            )
        })
        .collect();

    let rs_mean = rs_scores.filter(|s| !s.is_empty()).map(|scores| {
        scores.values().sum::<f64>() / scores.len() as f64
    });
    let mode = verdicts.first().map(|v| v.mode).unwrap_or(ReviewMode::LlmOnly);

    Ok(Report {
        mode,
        n: gold.len(),
        per_label,
        macro_f1: macro_f1(&cells),
        exact_pair_agreement: if gold.is_empty() {
            0.0
        } else {
            exact_matches as f64 / gold.len() as f64
        },
        rs_mean,
        unknown_labels,
    })
}

impl Report {
    /// Markdown summary: one row per mode, RE and RS columns, plus the
    /// per-label breakdown.
    pub fn markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("# Risk review evaluation\n\n");
        out.push_str("| Mode | n | RE-score (macro-F1, %) | RS-score (mean, %) |\n");
        out.push_str("|---|---|---|---|\n");
        let rs = self
            .rs_mean
            .map(|v| format!("{v:.1}"))
            .unwrap_or_else(|| "n/a (no human scores supplied)".to_string());
        out.push_str(&format!(
            "| {} | {} | {:.1} | {} |\n\n",
            self.mode.as_str(),
            self.n,
            self.macro_f1 * 100.0,
            rs
        ));
        out.push_str("| Label | Precision | Recall | F1 | TP | FP | FN | TN |\n");
        out.push_str("|---|---|---|---|---|---|---|---|\n");
        for (label, report) in &self.per_label {
            out.push_str(&format!(
                "| {label} | {:.3} | {:.3} | {:.3} | {} | {} | {} | {} |\n",
                report.precision, report.recall, report.f1, report.tp, report.fp, report.fn_,
                report.tn
            ));
        }
        out.push_str(&format!(
            "\nExact (category, risk type) agreement: {:.3}\n",
            self.exact_pair_agreement
        ));
        if !self.unknown_labels.is_empty() {
            out.push_str("\nPredicted labels outside the six categories (ignored above):\n");
            for (label, count) in &self.unknown_labels {
                out.push_str(&format!("- {label}: {count}\n"));
            }
        }
        out
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("report serializes");
        atomic_write(&dir.join("report.json"), &json)?;
        atomic_write(&dir.join("report.md"), &self.markdown())
    }
}
