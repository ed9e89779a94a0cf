//! Multi-label confusion counts and precision/recall/F1 over the six
//! risk categories.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use thiserror::Error;

use crate::ontology::RiskCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCell {
    pub label: RiskCategory,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("gold has {gold} label sets but predictions have {pred}")]
    LengthMismatch { gold: usize, pred: usize },
}

/// Per-label confusion counts over paired gold/predicted label sets.
pub fn confusion(
    gold: &[BTreeSet<RiskCategory>],
    pred: &[BTreeSet<RiskCategory>],
) -> Result<Vec<ConfusionCell>, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch { gold: gold.len(), pred: pred.len() });
    }
    let mut cells = Vec::with_capacity(RiskCategory::ALL.len());
    for label in RiskCategory::ALL {
        let mut cell = ConfusionCell { label, tp: 0, fp: 0, tn: 0, fn_: 0 };
        for (g, p) in gold.iter().zip(pred) {
            match (g.contains(&label), p.contains(&label)) {
                (true, true) => cell.tp += 1,
                (false, true) => cell.fp += 1,
                (true, false) => cell.fn_ += 1,
                (false, false) => cell.tn += 1,
            }
        }
        cells.push(cell);
    }
    Ok(cells)
}

/// Precision, recall and F1 for one cell. Any metric whose denominator
/// is zero is reported as zero.
pub fn metrics(cell: &ConfusionCell) -> LabelMetrics {
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(cell.tp, cell.tp + cell.fp);
    let recall = ratio(cell.tp, cell.tp + cell.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    LabelMetrics { precision, recall, f1 }
}

/// Unweighted mean of per-label F1 over all cells.
pub fn macro_f1(cells: &[ConfusionCell]) -> f64 {
    if cells.is_empty() {
        return 0.0;
    }
    cells.iter().map(|c| metrics(c).f1).sum::<f64>() / cells.len() as f64
}
