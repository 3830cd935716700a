use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::annotation::LightPosition;
use crate::error::{LightError, Result};

/// Per-vehicle visible tags, used both for labels and for predictions.
/// A missing position is not part of that position's dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisibilityRecord {
    pub scene_id: String,
    pub vehicle_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub front_left: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub front_right: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rear_left: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rear_right: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crop_path: Option<String>,
}

impl VisibilityRecord {
    /// Labels ordered front-left, front-right, rear-left, rear-right.
    pub fn from_labels(scene_id: &str, vehicle_id: &str, labels: [bool; 4]) -> Self {
        Self {
            scene_id: scene_id.to_string(),
            vehicle_id: vehicle_id.to_string(),
            front_left: Some(labels[0]),
            front_right: Some(labels[1]),
            rear_left: Some(labels[2]),
            rear_right: Some(labels[3]),
            crop_path: None,
        }
    }

    pub fn get(&self, p: LightPosition) -> Option<bool> {
        match p {
            LightPosition::FrontLeft => self.front_left,
            LightPosition::FrontRight => self.front_right,
            LightPosition::RearLeft => self.rear_left,
            LightPosition::RearRight => self.rear_right,
        }
    }

    pub fn set(&mut self, p: LightPosition, value: Option<bool>) {
        match p {
            LightPosition::FrontLeft => self.front_left = value,
            LightPosition::FrontRight => self.front_right = value,
            LightPosition::RearLeft => self.rear_left = value,
            LightPosition::RearRight => self.rear_right = value,
        }
    }

    pub fn key(&self) -> String {
        format!("{}/{}", self.scene_id, self.vehicle_id)
    }
}

/// Row order of the accuracy table.
pub const TABLE_ORDER: [LightPosition; 4] = [
    LightPosition::FrontLeft,
    LightPosition::RearLeft,
    LightPosition::FrontRight,
    LightPosition::RearRight,
];

pub const TABLE_HEADER: [&str; 3] = ["Vehicle Light", "Dataset Size (# of Images)", "% Accuracy"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionAccuracy {
    pub position: LightPosition,
    pub dataset_size: usize,
    pub correct: usize,
    /// Percent with two decimals, `"n/a"` for an empty dataset.
    pub accuracy: String,
}

impl PositionAccuracy {
    /// Accuracy as a fraction, `None` for an empty dataset.
    pub fn fraction(&self) -> Option<f64> {
        (self.dataset_size > 0).then(|| self.correct as f64 / self.dataset_size as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityReport {
    pub rows: Vec<PositionAccuracy>,
}

/// `correct / total` as a percentage with two decimals.
pub fn format_percent(correct: usize, total: usize) -> String {
    if total == 0 {
        return "n/a".into();
    }
    // integer arithmetic in hundredths of a percent, rounded half up
    let scaled = (correct as u128 * 20_000 + total as u128) / (2 * total as u128);
    format!("{}.{:02}", scaled / 100, scaled % 100)
}

fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn index(records: &[VisibilityRecord], what: &str) -> Result<BTreeMap<String, usize>> {
    let mut map = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        if map.insert(r.key(), i).is_some() {
            return Err(LightError::invalid(format!("duplicate {what} for {}", r.key())));
        }
    }
    Ok(map)
}

/// Per-position accuracy of visibility predictions, aligned to labels by
/// (scene id, vehicle id).
pub fn visibility_accuracy(
    predictions: &[VisibilityRecord],
    labels: &[VisibilityRecord],
) -> Result<VisibilityReport> {
    let preds = index(predictions, "prediction")?;
    let labs = index(labels, "label")?;
    let pred_keys: BTreeSet<&String> = preds.keys().collect();
    let label_keys: BTreeSet<&String> = labs.keys().collect();
    if pred_keys != label_keys {
        return Err(LightError::Alignment {
            missing_labels: pred_keys.difference(&label_keys).map(|k| k.to_string()).collect(),
            missing_predictions: label_keys.difference(&pred_keys).map(|k| k.to_string()).collect(),
        });
    }
    let mut rows = Vec::with_capacity(4);
    for p in TABLE_ORDER {
        let (mut size, mut correct) = (0, 0);
        for (key, &li) in &labs {
            let Some(truth) = labels[li].get(p) else { continue };
            let guess = predictions[preds[key]].get(p).ok_or_else(|| {
                LightError::invalid(format!("prediction for {key} lacks {p}"))
            })?;
            size += 1;
            correct += (guess == truth) as usize;
        }
        rows.push(PositionAccuracy {
            position: p,
            dataset_size: size,
            correct,
            accuracy: format_percent(correct, size),
        });
    }
    Ok(VisibilityReport { rows })
}

impl VisibilityReport {
    pub fn row(&self, p: LightPosition) -> Option<&PositionAccuracy> {
        self.rows.iter().find(|r| r.position == p)
    }

    /// Plain-text table in the column layout of the published results.
    pub fn to_table(&self) -> String {
        let cells: Vec<[String; 3]> = self
            .rows
            .iter()
            .map(|r| [r.position.title().to_string(), thousands(r.dataset_size), r.accuracy.clone()])
            .collect();
        let mut widths = TABLE_HEADER.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, row: [&str; 3]| {
            writeln!(
                out,
                "| {:<w0$} | {:>w1$} | {:>w2$} |",
                row[0],
                row[1],
                row[2],
                w0 = widths[0],
                w1 = widths[1],
                w2 = widths[2]
            )
            .expect("string write");
        };
        line(&mut out, TABLE_HEADER);
        writeln!(
            out,
            "|{}|{}|{}|",
            "-".repeat(widths[0] + 2),
            "-".repeat(widths[1] + 2),
            "-".repeat(widths[2] + 2)
        )
        .expect("string write");
        for row in &cells {
            line(&mut out, [&row[0], &row[1], &row[2]]);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("position,dataset_size,accuracy_percent\n");
        for r in &self.rows {
            writeln!(out, "{},{},{}", r.position.title(), r.dataset_size, r.accuracy)
                .expect("string write");
        }
        out
    }
}
