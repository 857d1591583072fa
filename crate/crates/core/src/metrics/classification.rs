use serde::{Deserialize, Serialize};

use super::segmentation::ConfusionCounts;
use crate::error::{param, Result};

/// Rates derived from a 2×2 confusion matrix. `None` marks a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClsStats {
    pub accuracy: Option<f64>,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn cls_stats(c: &ConfusionCounts) -> ClsStats {
    ClsStats {
        accuracy: ratio(c.tp + c.tn, c.total()),
        ppv: ratio(c.tp, c.tp + c.fp),
        npv: ratio(c.tn, c.tn + c.fn_),
        sensitivity: ratio(c.tp, c.tp + c.fn_),
        specificity: ratio(c.tn, c.tn + c.fp),
    }
}

/// Cohen's κ. `None` for an empty matrix or when chance agreement is 1.
pub fn cohen_kappa(c: &ConfusionCounts) -> Option<f64> {
    let n = c.total();
    if n == 0 {
        return None;
    }
    let n2 = (n as f64) * (n as f64);
    let p_o = (c.tp + c.tn) as f64 / n as f64;
    let pred_pos = (c.tp + c.fp) as f64;
    let true_pos = (c.tp + c.fn_) as f64;
    let pred_neg = (c.fn_ + c.tn) as f64;
    let true_neg = (c.fp + c.tn) as f64;
    let p_e = (pred_pos * true_pos + pred_neg * true_neg) / n2;
    if p_e >= 1.0 {
        return None;
    }
    Some((p_o - p_e) / (1.0 - p_e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub score: f64,
    pub label: ClassLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`.
    pub curve: Vec<(f64, f64)>,
    pub auc: f64,
}

/// ROC curve over descending score thresholds with equal scores grouped
/// into one step, and its trapezoidal area.
pub fn roc_auc(samples: &[ScoredSample]) -> Result<RocCurve> {
    if let Some(s) = samples.iter().find(|s| !s.score.is_finite()) {
        return param(format!("non-finite score {}", s.score));
    }
    let pos = samples.iter().filter(|s| s.label == ClassLabel::Positive).count();
    let neg = samples.len() - pos;
    if pos == 0 || neg == 0 {
        return param("ROC needs at least one positive and one negative sample");
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));

    let mut curve = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let score = sorted[i].score;
        while i < sorted.len() && sorted[i].score == score {
            match sorted[i].label {
                ClassLabel::Positive => tp += 1,
                ClassLabel::Negative => fp += 1,
            }
            i += 1;
        }
        let pt = (fp as f64 / neg as f64, tp as f64 / pos as f64);
        let prev = *curve.last().expect("curve starts non-empty");
        auc += (pt.0 - prev.0) * (pt.1 + prev.1) / 2.0;
        curve.push(pt);
    }
    Ok(RocCurve { curve, auc })
}
