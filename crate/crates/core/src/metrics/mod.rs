//! IoU, greedy matching, precision/recall, AP/mAP, size strata and
//! visibility accuracy tables.

mod ap;
mod eval;
mod iou;
mod matching;
mod visibility;

pub use ap::{average_precision, mean_average_precision, precision_recall, PrPoint};
pub use eval::{
    evaluate, evaluate_predictions, parse_predictions, ClassReport, EvalGroup, EvalOptions,
    EvalReport, PredictionRecord, SizeStrata, StratumReport, StratumStatus, AGNOSTIC_CLASS,
};
pub use iou::{box_iou, mask_iou, scaled_center_distance};
pub use matching::{
    match_detections, Detection, DetectionOutcome, GroundTruth, MatchCriterion, MatchReport,
};
pub use visibility::{
    format_percent, visibility_accuracy, PositionAccuracy, VisibilityRecord, VisibilityReport,
    TABLE_HEADER, TABLE_ORDER,
};
