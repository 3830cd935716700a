use serde::{Deserialize, Serialize};

use super::iou::{box_iou, scaled_center_distance};
use crate::error::{LightError, Result};
use crate::geometry::{BoxTlbr, PixelPoint};

/// A predicted light. Which geometry is needed depends on the criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub bbox: Option<BoxTlbr>,
    pub center: Option<PixelPoint>,
    pub confidence: f64,
}

impl Detection {
    pub fn boxed(bbox: BoxTlbr, confidence: f64) -> Self {
        Self {
            bbox: Some(bbox),
            center: None,
            confidence,
        }
    }

    pub fn centered(center: PixelPoint, confidence: f64) -> Self {
        Self {
            bbox: None,
            center: Some(center),
            confidence,
        }
    }

    /// Explicit center, else the box center.
    pub fn resolved_center(&self) -> Option<PixelPoint> {
        self.center.or_else(|| self.bbox.map(|b| b.center()))
    }
}

/// An annotated light.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub bbox: Option<BoxTlbr>,
    pub center: Option<PixelPoint>,
    /// Width of the owning vehicle's box, the scale for center distances.
    pub vehicle_width: Option<f64>,
}

impl GroundTruth {
    pub fn boxed(bbox: BoxTlbr) -> Self {
        Self {
            bbox: Some(bbox),
            center: Some(bbox.center()),
            vehicle_width: None,
        }
    }

    pub fn centered(center: PixelPoint, vehicle_width: f64) -> Self {
        Self {
            bbox: None,
            center: Some(center),
            vehicle_width: Some(vehicle_width),
        }
    }
}

/// Rule deciding whether a detection hits a ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "threshold", rename_all = "kebab-case")]
pub enum MatchCriterion {
    /// Hit when IoU >= threshold.
    Iou(f64),
    /// Hit when center distance / vehicle width <= threshold.
    ScaledDistance(f64),
}

impl Default for MatchCriterion {
    fn default() -> Self {
        MatchCriterion::Iou(0.5)
    }
}

impl MatchCriterion {
    pub const DEFAULT_DISTANCE: f64 = 0.1;

    pub fn check(&self) -> Result<()> {
        match *self {
            MatchCriterion::Iou(t) if !(0.0..=1.0).contains(&t) => Err(LightError::invalid(
                format!("IoU threshold must lie in [0, 1], got {t}"),
            )),
            MatchCriterion::ScaledDistance(d) if !(d >= 0.0) || !d.is_finite() => Err(
                LightError::invalid(format!("distance threshold must be >= 0, got {d}")),
            ),
            _ => Ok(()),
        }
    }

    /// Score of a pair and whether it meets the threshold.
    /// `None` when the ground truth lacks the geometry the criterion needs.
    fn score(&self, det: &Detection, gt: &GroundTruth) -> Result<Option<(f64, bool)>> {
        match *self {
            MatchCriterion::Iou(t) => {
                let d = det
                    .bbox
                    .ok_or_else(|| LightError::invalid("IoU matching needs detection boxes"))?;
                Ok(gt.bbox.map(|g| {
                    let iou = box_iou(&d, &g);
                    (iou, iou >= t)
                }))
            }
            MatchCriterion::ScaledDistance(t) => {
                let d = det.resolved_center().ok_or_else(|| {
                    LightError::invalid("distance matching needs detection centers or boxes")
                })?;
                let (Some(c), Some(w)) = (gt.center, gt.vehicle_width) else {
                    return Ok(None);
                };
                let dist = scaled_center_distance(&d, &c, w)?;
                Ok(Some((dist, dist <= t)))
            }
        }
    }

    fn better(&self, a: f64, b: f64) -> bool {
        match self {
            MatchCriterion::Iou(_) => a > b,
            MatchCriterion::ScaledDistance(_) => a < b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionOutcome {
    /// Index into the detection list given to [`match_detections`].
    pub detection: usize,
    pub confidence: f64,
    /// Matched ground truth, `None` for a false positive.
    pub ground_truth: Option<usize>,
    /// IoU or scaled distance of the match.
    pub score: Option<f64>,
}

impl DetectionOutcome {
    pub fn is_true_positive(&self) -> bool {
        self.ground_truth.is_some()
    }
}

/// Matching result for one image and class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    /// Outcomes in processing order: descending confidence, ties by input order.
    pub outcomes: Vec<DetectionOutcome>,
    pub num_ground_truths: usize,
    /// Ground truths no detection claimed (false negatives).
    pub unmatched_ground_truths: Vec<usize>,
}

impl MatchReport {
    pub fn true_positives(&self) -> usize {
        self.outcomes.iter().filter(|o| o.is_true_positive()).count()
    }

    pub fn false_positives(&self) -> usize {
        self.outcomes.len() - self.true_positives()
    }

    pub fn false_negatives(&self) -> usize {
        self.unmatched_ground_truths.len()
    }
}

/// Greedy confidence-ordered matching.
///
/// Each detection, highest confidence first, claims the best unclaimed
/// ground truth that meets the criterion (highest IoU or smallest distance,
/// ties to the lower index); otherwise it is a false positive.
pub fn match_detections(
    detections: &[Detection],
    ground_truths: &[GroundTruth],
    criterion: MatchCriterion,
) -> Result<MatchReport> {
    criterion.check()?;
    if let Some(d) = detections.iter().find(|d| !(0.0..=1.0).contains(&d.confidence)) {
        return Err(LightError::invalid(format!(
            "confidence must lie in [0, 1], got {}",
            d.confidence
        )));
    }
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| detections[b].confidence.total_cmp(&detections[a].confidence));

    let mut claimed = vec![false; ground_truths.len()];
    let mut outcomes = Vec::with_capacity(detections.len());
    for di in order {
        let det = &detections[di];
        let mut best: Option<(usize, f64)> = None;
        for (gi, gt) in ground_truths.iter().enumerate() {
            if claimed[gi] {
                continue;
            }
            if let Some((score, hit)) = criterion.score(det, gt)? {
                if hit && best.is_none_or(|(_, s)| criterion.better(score, s)) {
                    best = Some((gi, score));
                }
            }
        }
        if let Some((gi, _)) = best {
            claimed[gi] = true;
        }
        outcomes.push(DetectionOutcome {
            detection: di,
            confidence: det.confidence,
            ground_truth: best.map(|b| b.0),
            score: best.map(|b| b.1),
        });
    }
    Ok(MatchReport {
        outcomes,
        num_ground_truths: ground_truths.len(),
        unmatched_ground_truths: claimed
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| i)
            .collect(),
    })
}
