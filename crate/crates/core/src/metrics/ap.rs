use serde::{Deserialize, Serialize};

use super::matching::MatchReport;
use crate::error::{LightError, Result};

/// One cut of the precision-recall sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub confidence: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Sweeps the pooled detections of all reports in descending confidence
/// (ties keep report order, then within-report order) and emits one point
/// per detection.
pub fn precision_recall(reports: &[MatchReport]) -> Result<Vec<PrPoint>> {
    let total_gt: usize = reports.iter().map(|r| r.num_ground_truths).sum();
    if total_gt == 0 {
        return Err(LightError::UndefinedRecall);
    }
    let mut pooled: Vec<(f64, bool)> = reports
        .iter()
        .flat_map(|r| r.outcomes.iter().map(|o| (o.confidence, o.is_true_positive())))
        .collect();
    pooled.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (mut tp, mut fp) = (0usize, 0usize);
    Ok(pooled
        .into_iter()
        .map(|(confidence, hit)| {
            if hit {
                tp += 1;
            } else {
                fp += 1;
            }
            PrPoint {
                confidence,
                precision: tp as f64 / (tp + fp) as f64,
                recall: tp as f64 / total_gt as f64,
            }
        })
        .collect())
}

/// All-point interpolated area under the curve:
/// `sum_k (r_k - r_{k-1}) * max{p_j : r_j >= r_k}` with `r_0 = 0`.
pub fn average_precision(curve: &[PrPoint]) -> f64 {
    let mut envelope: Vec<f64> = curve.iter().map(|p| p.precision).collect();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut prev = 0.0;
    let mut ap = 0.0;
    for (p, &best) in curve.iter().zip(&envelope) {
        ap += (p.recall - prev) * best;
        prev = p.recall;
    }
    ap.clamp(0.0, 1.0)
}

/// Unweighted mean of per-class APs.
pub fn mean_average_precision(aps: &[f64]) -> Result<f64> {
    if aps.is_empty() {
        return Err(LightError::EmptyInput("average precision values"));
    }
    Ok(aps.iter().sum::<f64>() / aps.len() as f64)
}
