use std::path::Path;

use lightkit::curation::CropApproach;
use serde::Deserialize;

/// Optional TOML defaults. Command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Config {
    pub approach: Option<CropApproach>,
    pub workers: Option<usize>,
    pub iou_threshold: Option<f64>,
    pub dist_threshold: Option<f64>,
    pub min_area: Option<usize>,
    pub connectivity: Option<u8>,
    pub min_vehicle_size: Option<String>,
    pub vehicle_slack: Option<f64>,
    /// Reserved; every command is deterministic.
    pub seed: Option<u64>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Parses `WxH`, e.g. `32x32`.
pub fn parse_size(s: &str) -> Result<(f64, f64), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got '{s}'"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite() && *x >= 0.0)
            .ok_or_else(|| format!("invalid size component '{v}' in '{s}'"))
    };
    Ok((parse(w)?, parse(h)?))
}
