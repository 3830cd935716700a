//! On-disk manifest: `manifest.jsonl` plus a `crops/` directory of PNGs.
//!
//! The first line is a header record, followed by one record per sample and
//! one per scene error, each tagged by a `record` field.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::pipeline::{DatasetManifest, Provenance, SceneError};
use super::sample::{CuratedSample, SampleRecord};
use crate::annotation::canonical_line;
use crate::error::{LightError, Result};
use crate::io::{load_rgb, parse_jsonl, read_text, save_png, write_text};

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum ManifestLine {
    Header {
        schema_version: u32,
        #[serde(flatten)]
        provenance: Provenance,
    },
    Sample(SampleRecord),
    Error(SceneError),
}

/// Manifest metadata without the crop rasters.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestIndex {
    pub provenance: Provenance,
    pub records: Vec<SampleRecord>,
    pub errors: Vec<SceneError>,
}

fn crop_path(index: usize) -> String {
    format!("crops/{index:06}.png")
}

/// Renders the manifest text with crop paths assigned by sample index.
pub fn manifest_text(manifest: &DatasetManifest) -> String {
    index_text(&ManifestIndex {
        provenance: manifest.provenance.clone(),
        records: manifest
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| SampleRecord {
                crop_path: crop_path(i),
                ..s.record.clone()
            })
            .collect(),
        errors: manifest.errors.clone(),
    })
}

/// Renders manifest text from records as given, crop paths included.
pub fn index_text(index: &ManifestIndex) -> String {
    let mut out = String::new();
    let mut push = |line: &ManifestLine| {
        writeln!(out, "{}", canonical_line(line)).expect("string write");
    };
    push(&ManifestLine::Header {
        schema_version: MANIFEST_VERSION,
        provenance: index.provenance.clone(),
    });
    for r in &index.records {
        push(&ManifestLine::Sample(r.clone()));
    }
    for e in &index.errors {
        push(&ManifestLine::Error(e.clone()));
    }
    out
}

/// Writes `manifest.jsonl` and every crop under `dir`.
pub fn write_manifest(manifest: &DatasetManifest, dir: &Path) -> Result<()> {
    let crops = dir.join("crops");
    if crops.exists() {
        // stale crops from an earlier, larger run would otherwise linger
        fs::remove_dir_all(&crops).map_err(|e| LightError::io(&crops, e))?;
    }
    fs::create_dir_all(&crops).map_err(|e| LightError::io(&crops, e))?;
    for (i, s) in manifest.samples.iter().enumerate() {
        save_png(&s.crop, &dir.join(crop_path(i)))?;
    }
    write_text(&dir.join(MANIFEST_FILE), &manifest_text(manifest))
}

pub fn parse_manifest(text: &str) -> Result<ManifestIndex> {
    let lines: Vec<ManifestLine> = parse_jsonl(text)?;
    let mut it = lines.into_iter();
    let provenance = match it.next() {
        Some(ManifestLine::Header {
            schema_version,
            provenance,
        }) => {
            if schema_version != MANIFEST_VERSION {
                return Err(LightError::Parse {
                    line: 1,
                    column: 1,
                    message: format!("unsupported manifest version {schema_version}"),
                });
            }
            provenance
        }
        _ => {
            return Err(LightError::Parse {
                line: 1,
                column: 1,
                message: "manifest must start with a header record".into(),
            })
        }
    };
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for line in it {
        match line {
            ManifestLine::Sample(r) => records.push(r),
            ManifestLine::Error(e) => errors.push(e),
            ManifestLine::Header { .. } => {
                return Err(LightError::Parse {
                    line: 0,
                    column: 0,
                    message: "repeated header record".into(),
                })
            }
        }
    }
    Ok(ManifestIndex {
        provenance,
        records,
        errors,
    })
}

pub fn read_manifest_index(dir: &Path) -> Result<ManifestIndex> {
    parse_manifest(&read_text(&dir.join(MANIFEST_FILE))?)
}

/// Reads the manifest and loads every crop.
pub fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let index = read_manifest_index(dir)?;
    let samples = index
        .records
        .into_iter()
        .map(|mut record| {
            let crop = load_rgb(&dir.join(&record.crop_path))?;
            record.crop_path.clear();
            Ok(CuratedSample { record, crop })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DatasetManifest {
        provenance: index.provenance,
        samples,
        errors: index.errors,
    })
}
