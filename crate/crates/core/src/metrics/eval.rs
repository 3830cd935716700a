use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ap::{average_precision, mean_average_precision, precision_recall, PrPoint};
use super::matching::{match_detections, Detection, GroundTruth, MatchCriterion, MatchReport};
use crate::annotation::{optional_position, position_label, LightPosition, SceneAnnotation};
use crate::error::{LightError, Result};
use crate::geometry::{BoxTlbr, PixelPoint};
use crate::io::parse_jsonl;

/// Class label used when positions are ignored.
pub const AGNOSTIC_CLASS: &str = "light";

/// Light-box-area bins. `labels[i]` covers `[edges[i-1], edges[i])` with
/// open ends below the first edge and above the last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeStrata {
    pub edges: Vec<f64>,
    pub labels: Vec<String>,
}

impl Default for SizeStrata {
    fn default() -> Self {
        Self {
            edges: vec![256.0, 1024.0],
            labels: vec!["small".into(), "medium".into(), "large".into()],
        }
    }
}

impl SizeStrata {
    pub fn new(edges: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        let s = Self { edges, labels };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        if self.labels.len() != self.edges.len() + 1 {
            return Err(LightError::invalid(format!(
                "{} strata edges need {} labels, got {}",
                self.edges.len(),
                self.edges.len() + 1,
                self.labels.len()
            )));
        }
        if self.edges.iter().any(|e| !e.is_finite())
            || self.edges.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(LightError::invalid("strata edges must be finite and strictly increasing"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Index of the stratum holding `area`.
    pub fn stratum_of(&self, area: f64) -> usize {
        self.edges.partition_point(|&e| e <= area)
    }

    pub fn label_of(&self, area: f64) -> &str {
        &self.labels[self.stratum_of(area)]
    }
}

/// Detections and ground truths of one class in one image.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGroup {
    pub scene_id: String,
    pub class: String,
    pub detections: Vec<Detection>,
    pub ground_truths: Vec<GroundTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub class: String,
    pub num_ground_truths: usize,
    pub num_detections: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// `None` when the class has no ground truth.
    pub ap: Option<f64>,
    pub curve: Vec<PrPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StratumStatus {
    Evaluated,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumReport {
    pub label: String,
    pub min_area: Option<f64>,
    pub max_area: Option<f64>,
    pub status: StratumStatus,
    pub num_ground_truths: usize,
    pub map: Option<f64>,
    pub classes: Vec<ClassReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub criterion: MatchCriterion,
    pub classes: Vec<ClassReport>,
    pub map: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strata: Option<Vec<StratumReport>>,
    /// Ground truths left out because they lack the geometry the criterion needs.
    pub skipped_ground_truths: usize,
}

fn class_report(class: &str, reports: &[MatchReport]) -> Result<ClassReport> {
    let num_ground_truths = reports.iter().map(|r| r.num_ground_truths).sum();
    let (ap, curve) = if num_ground_truths == 0 {
        (None, Vec::new())
    } else {
        let curve = precision_recall(reports)?;
        (Some(average_precision(&curve)), curve)
    };
    Ok(ClassReport {
        class: class.to_string(),
        num_ground_truths,
        num_detections: reports.iter().map(|r| r.outcomes.len()).sum(),
        true_positives: reports.iter().map(MatchReport::true_positives).sum(),
        false_positives: reports.iter().map(MatchReport::false_positives).sum(),
        false_negatives: reports.iter().map(MatchReport::false_negatives).sum(),
        ap,
        curve,
    })
}

fn map_of(classes: &[ClassReport]) -> Result<f64> {
    let aps: Vec<f64> = classes.iter().filter_map(|c| c.ap).collect();
    if aps.is_empty() {
        return Err(LightError::UndefinedRecall);
    }
    mean_average_precision(&aps)
}

/// Restricts a report to ground truths in `keep`. Detections matched to
/// other ground truths drop out; unmatched detections stay as false positives.
fn restrict(report: &MatchReport, keep: &[bool]) -> MatchReport {
    MatchReport {
        outcomes: report
            .outcomes
            .iter()
            .filter(|o| o.ground_truth.is_none_or(|g| keep[g]))
            .cloned()
            .collect(),
        num_ground_truths: keep.iter().filter(|&&k| k).count(),
        unmatched_ground_truths: report
            .unmatched_ground_truths
            .iter()
            .copied()
            .filter(|&g| keep[g])
            .collect(),
    }
}

/// Matches every group, then pools per class into PR curves, APs and mAP.
///
/// With `strata`, ground truths are binned by box area and each stratum
/// is scored from the same matching. Ground truths without a box cannot be
/// binned and only count in the overall figures.
pub fn evaluate(
    groups: &[EvalGroup],
    criterion: MatchCriterion,
    strata: Option<&SizeStrata>,
) -> Result<EvalReport> {
    criterion.check()?;
    if let Some(s) = strata {
        s.check()?;
    }
    let reports: Vec<MatchReport> = groups
        .par_iter()
        .map(|g| match_detections(&g.detections, &g.ground_truths, criterion))
        .collect::<Result<_>>()?;

    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        by_class.entry(g.class.as_str()).or_default().push(i);
    }
    let pick = |idx: &[usize]| idx.iter().map(|&i| reports[i].clone()).collect::<Vec<_>>();

    let classes = by_class
        .iter()
        .map(|(class, idx)| class_report(class, &pick(idx)))
        .collect::<Result<Vec<_>>>()?;
    let map = map_of(&classes)?;

    let strata = strata.map(|s| -> Result<Vec<StratumReport>> {
        (0..s.len())
            .map(|k| {
                let mut class_reports = Vec::new();
                for (class, idx) in &by_class {
                    let restricted: Vec<MatchReport> = idx
                        .iter()
                        .map(|&i| {
                            let keep: Vec<bool> = groups[i]
                                .ground_truths
                                .iter()
                                .map(|g| g.bbox.is_some_and(|b| s.stratum_of(b.area()) == k))
                                .collect();
                            restrict(&reports[i], &keep)
                        })
                        .collect();
                    class_reports.push(class_report(class, &restricted)?);
                }
                let num_ground_truths: usize =
                    class_reports.iter().map(|c| c.num_ground_truths).sum();
                let evaluated = num_ground_truths > 0;
                Ok(StratumReport {
                    label: s.labels[k].clone(),
                    min_area: (k > 0).then(|| s.edges[k - 1]),
                    max_area: s.edges.get(k).copied(),
                    status: if evaluated {
                        StratumStatus::Evaluated
                    } else {
                        StratumStatus::NotApplicable
                    },
                    num_ground_truths,
                    map: if evaluated { Some(map_of(&class_reports)?) } else { None },
                    classes: class_reports,
                })
            })
            .collect()
    });

    Ok(EvalReport {
        criterion,
        classes,
        map,
        strata: strata.transpose()?,
        skipped_ground_truths: 0,
    })
}

/// One line of a detection prediction file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub scene_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vehicle_id: Option<String>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "optional_position"
    )]
    pub position: Option<LightPosition>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub bbox: Option<BoxTlbr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<PixelPoint>,
    pub confidence: f64,
}

/// Parses a prediction JSONL file; errors carry the 1-based line number.
pub fn parse_predictions(text: &str) -> Result<Vec<PredictionRecord>> {
    let records: Vec<PredictionRecord> = parse_jsonl(text)?;
    let lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, _)| i + 1);
    for (r, line) in records.iter().zip(lines) {
        let bad = |message: &str| LightError::Parse {
            line,
            column: 0,
            message: message.to_string(),
        };
        if r.bbox.is_none() && r.center.is_none() {
            return Err(bad("prediction needs a box or a center"));
        }
        if r.bbox.is_some_and(|b| !b.is_valid()) {
            return Err(bad("invalid box"));
        }
        if !(0.0..=1.0).contains(&r.confidence) {
            return Err(bad("confidence must lie in [0, 1]"));
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub criterion: MatchCriterion,
    /// Pool all positions into one class.
    pub class_agnostic: bool,
    pub strata: Option<SizeStrata>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            criterion: MatchCriterion::default(),
            class_agnostic: false,
            strata: None,
        }
    }
}

fn group_for<'a>(
    groups: &'a mut BTreeMap<(usize, &'static str), EvalGroup>,
    scenes: &[SceneAnnotation],
    scene: usize,
    class: &'static str,
) -> &'a mut EvalGroup {
    groups.entry((scene, class)).or_insert_with(|| EvalGroup {
        scene_id: scenes[scene].scene_id.clone(),
        class: class.to_string(),
        detections: Vec::new(),
        ground_truths: Vec::new(),
    })
}

/// Scores predictions against the visible lights of `scenes`.
///
/// Classes are light positions (`unknown` for unlabelled lights) unless
/// `class_agnostic` is set. Each light's ground-truth box and center are
/// its resolved geometry; its distance scale is the owning vehicle's box
/// width. `vehicle_id` on a prediction is informational.
pub fn evaluate_predictions(
    scenes: &[SceneAnnotation],
    predictions: &[PredictionRecord],
    options: &EvalOptions,
) -> Result<EvalReport> {
    let class_of = |p: Option<LightPosition>| {
        if options.class_agnostic {
            AGNOSTIC_CLASS
        } else {
            position_label(p)
        }
    };
    let mut groups: BTreeMap<(usize, &'static str), EvalGroup> = BTreeMap::new();
    let scene_index: HashMap<&str, usize> = scenes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.scene_id.as_str(), i))
        .collect();
    let mut skipped = 0;
    for (si, scene) in scenes.iter().enumerate() {
        for vehicle in &scene.vehicles {
            for light in vehicle.lights.iter().filter(|l| l.visible) {
                let gt = GroundTruth {
                    bbox: light.resolved_box(),
                    center: light.resolved_center(),
                    vehicle_width: Some(vehicle.bbox.width()).filter(|&w| w > 0.0),
                };
                let usable = match options.criterion {
                    MatchCriterion::Iou(_) => gt.bbox.is_some(),
                    MatchCriterion::ScaledDistance(_) => {
                        gt.center.is_some() && gt.vehicle_width.is_some()
                    }
                };
                if !usable {
                    skipped += 1;
                    continue;
                }
                group_for(&mut groups, scenes, si, class_of(light.position))
                    .ground_truths
                    .push(gt);
            }
        }
    }
    for p in predictions {
        let si = *scene_index.get(p.scene_id.as_str()).ok_or_else(|| {
            LightError::invalid(format!("prediction for unknown scene {:?}", p.scene_id))
        })?;
        group_for(&mut groups, scenes, si, class_of(p.position))
            .detections
            .push(Detection {
                bbox: p.bbox,
                center: p.center,
                confidence: p.confidence,
            });
    }
    let groups: Vec<EvalGroup> = groups.into_values().collect();
    let mut report = evaluate(&groups, options.criterion, options.strata.as_ref())?;
    report.skipped_ground_truths = skipped;
    Ok(report)
}
