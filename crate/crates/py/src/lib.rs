//! Python bindings. Boxes cross the boundary as `(x0, y0, x1, y1)` tuples,
//! masks as lists of boolean rows, and documents as JSON text.

use std::path::Path;

use lightkit::annotation::{
    import_keypoint_dataset, parse_scenes_unchecked, serialize_scenes, validate_with,
    KeypointMapping, KeypointRecord, ValidationOptions,
};
use lightkit::curation::{
    augment_reflect, compute_stats, curate, manifest_text, read_manifest, reflect_sample,
    write_manifest, CropApproach, CurateOptions, CuratedSample, DatasetManifest,
};
use lightkit::geometry::{
    bbox_of_mask, connected_components as label_components, largest_component, BinaryMask,
    BoxTlbr, Connectivity,
};
use lightkit::io::{parse_jsonl, DirImageSource};
use lightkit::metrics::{
    self, evaluate_predictions, parse_predictions, precision_recall, Detection, EvalOptions,
    GroundTruth, MatchCriterion, SizeStrata, VisibilityRecord,
};
use lightkit::LightError;
use pyo3::exceptions::{PyIndexError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use serde::Serialize;

type Box4 = (f64, f64, f64, f64);

fn err(e: LightError) -> PyErr {
    if e.is_io() {
        PyOSError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn to_box(b: Box4) -> PyResult<BoxTlbr> {
    let bx = BoxTlbr::from_coords(b.0, b.1, b.2, b.3);
    if bx.is_valid() {
        Ok(bx)
    } else {
        Err(PyValueError::new_err(format!("invalid box {b:?}")))
    }
}

fn from_box(b: &BoxTlbr) -> Box4 {
    (b.top_left.x, b.top_left.y, b.bottom_right.x, b.bottom_right.y)
}

fn connectivity(c: u8) -> PyResult<Connectivity> {
    Connectivity::try_from(c).map_err(err)
}

/// Converts a serializable value into plain Python objects via JSON.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn mask_from_rows(rows: &[Vec<bool>]) -> PyResult<BinaryMask> {
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(PyValueError::new_err("mask rows must have equal length"));
    }
    BinaryMask::from_bits(width, rows.len(), rows.concat()).map_err(err)
}

fn parse_approach(name: &str) -> PyResult<CropApproach> {
    match name {
        "vehicle-only" => Ok(CropApproach::VehicleOnly),
        "scene-context" => Ok(CropApproach::SceneContext),
        other => Err(PyValueError::new_err(format!(
            "approach must be 'vehicle-only' or 'scene-context', got {other:?}"
        ))),
    }
}

/// IoU of two half-open boxes.
#[pyfunction]
fn box_iou(a: Box4, b: Box4) -> PyResult<f64> {
    Ok(metrics::box_iou(&to_box(a)?, &to_box(b)?))
}

/// Component labels per pixel; 0 is background, components numbered from 1
/// in raster order.
#[pyfunction]
#[pyo3(signature = (mask, connectivity = 8))]
fn connected_components(mask: Vec<Vec<bool>>, connectivity: u8) -> PyResult<Vec<Vec<u32>>> {
    let m = mask_from_rows(&mask)?;
    let labeled = label_components(&m, self::connectivity(connectivity)?);
    if m.width() == 0 {
        return Ok(vec![Vec::new(); m.height()]);
    }
    Ok(labeled.labels().chunks(m.width()).map(<[u32]>::to_vec).collect())
}

/// Box around the largest component, or None when nothing reaches `min_area`.
#[pyfunction]
#[pyo3(signature = (mask, connectivity = 8, min_area = 1))]
fn mask_to_box(mask: Vec<Vec<bool>>, connectivity: u8, min_area: usize) -> PyResult<Option<Box4>> {
    let m = mask_from_rows(&mask)?;
    let largest = largest_component(&label_components(&m, self::connectivity(connectivity)?), min_area);
    Ok(bbox_of_mask(&largest).ok().map(|b| from_box(&b)))
}

/// Converts keypoint JSON Lines into a scene document.
#[pyfunction]
#[pyo3(signature = (records, mapping = None))]
fn import_keypoints(records: &str, mapping: Option<&str>) -> PyResult<String> {
    let records: Vec<KeypointRecord> = parse_jsonl(records).map_err(err)?;
    let mapping = match mapping {
        Some(text) => KeypointMapping::from_json(text).map_err(err)?,
        None => KeypointMapping::default_layout(),
    };
    let scenes = import_keypoint_dataset(&records, &mapping).map_err(err)?;
    Ok(serialize_scenes(&scenes))
}

/// Schema violations of a scene document, as dicts.
#[pyfunction]
#[pyo3(signature = (document, vehicle_slack = 0.05))]
fn validate_scenes<'py>(py: Python<'py>, document: &str, vehicle_slack: f64) -> PyResult<Bound<'py, PyAny>> {
    let scenes = parse_scenes_unchecked(document).map_err(err)?;
    to_py(py, &validate_with(&scenes, &ValidationOptions { vehicle_slack }))
}

/// A curated sample: manifest record plus its 128x128 RGB crop.
#[pyclass(module = "lightkit", frozen)]
struct Sample {
    inner: CuratedSample,
}

#[pymethods]
impl Sample {
    #[getter]
    fn record<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.record)
    }

    /// Raw RGB bytes, row-major.
    #[getter]
    fn crop<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.inner.crop.as_raw())
    }

    #[getter]
    fn size(&self) -> (u32, u32) {
        self.inner.crop.dimensions()
    }

    /// Left-right mirror of this sample.
    fn reflect(&self) -> Sample {
        Sample {
            inner: reflect_sample(&self.inner),
        }
    }

    fn __eq__(&self, other: &Sample) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Sample({:?})", self.inner.record.sample_id)
    }
}

/// Curated samples with provenance.
#[pyclass(module = "lightkit", frozen)]
struct Manifest {
    inner: DatasetManifest,
}

#[pymethods]
impl Manifest {
    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }

    fn __getitem__(&self, index: isize) -> PyResult<Sample> {
        let n = self.inner.samples.len() as isize;
        let i = if index < 0 { index + n } else { index };
        if !(0..n).contains(&i) {
            return Err(PyIndexError::new_err("sample index out of range"));
        }
        Ok(Sample {
            inner: self.inner.samples[i as usize].clone(),
        })
    }

    fn records<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.records())
    }

    fn errors<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.errors)
    }

    /// Every sample followed by its reflection.
    fn augment_reflect(&self) -> Manifest {
        Manifest {
            inner: augment_reflect(&self.inner),
        }
    }

    /// Per-position counts and width/height histograms.
    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &compute_stats(&self.inner.records()))
    }

    fn text(&self) -> String {
        manifest_text(&self.inner)
    }

    fn write(&self, directory: &str) -> PyResult<()> {
        write_manifest(&self.inner, Path::new(directory)).map_err(err)
    }
}

/// Cuts one light-centered sample per visible light.
#[pyfunction]
#[pyo3(signature = (document, image_root, approach = "vehicle-only", workers = 0, source = "scenes"))]
fn curate_scenes(document: &str, image_root: &str, approach: &str, workers: usize, source: &str) -> PyResult<Manifest> {
    let scenes = lightkit::annotation::parse_scenes(document).map_err(err)?;
    let options = CurateOptions {
        approach: parse_approach(approach)?,
        workers,
    };
    let inner = curate(&scenes, &options, &DirImageSource::new(image_root), source).map_err(err)?;
    Ok(Manifest { inner })
}

#[pyfunction]
fn load_manifest(directory: &str) -> PyResult<Manifest> {
    Ok(Manifest {
        inner: read_manifest(Path::new(directory)).map_err(err)?,
    })
}

fn detections(items: &[(Box4, f64)]) -> PyResult<Vec<Detection>> {
    items.iter().map(|&(b, c)| Ok(Detection::boxed(to_box(b)?, c))).collect()
}

fn ground_truths(items: &[Box4]) -> PyResult<Vec<GroundTruth>> {
    items.iter().map(|&b| Ok(GroundTruth::boxed(to_box(b)?))).collect()
}

/// Greedy confidence-ordered matching. Returns the matched ground-truth
/// index (or None) for each detection in input order.
#[pyfunction]
#[pyo3(signature = (detections, ground_truths, iou_threshold = 0.5))]
fn match_detections(
    detections: Vec<(Box4, f64)>,
    ground_truths: Vec<Box4>,
    iou_threshold: f64,
) -> PyResult<Vec<Option<usize>>> {
    let report = metrics::match_detections(
        &self::detections(&detections)?,
        &self::ground_truths(&ground_truths)?,
        MatchCriterion::Iou(iou_threshold),
    )
    .map_err(err)?;
    let mut out = vec![None; detections.len()];
    for o in &report.outcomes {
        out[o.detection] = o.ground_truth;
    }
    Ok(out)
}

/// All-point interpolated AP of one image's detections.
#[pyfunction]
#[pyo3(signature = (detections, ground_truths, iou_threshold = 0.5))]
fn average_precision(detections: Vec<(Box4, f64)>, ground_truths: Vec<Box4>, iou_threshold: f64) -> PyResult<f64> {
    let report = metrics::match_detections(
        &self::detections(&detections)?,
        &self::ground_truths(&ground_truths)?,
        MatchCriterion::Iou(iou_threshold),
    )
    .map_err(err)?;
    let curve = precision_recall(&[report]).map_err(err)?;
    Ok(metrics::average_precision(&curve))
}

/// Scores prediction JSON Lines against a scene document; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (predictions, document, criterion = "iou", threshold = None, class_agnostic = false, strata = false))]
fn evaluate_detections<'py>(
    py: Python<'py>,
    predictions: &str,
    document: &str,
    criterion: &str,
    threshold: Option<f64>,
    class_agnostic: bool,
    strata: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let criterion = match criterion {
        "iou" => MatchCriterion::Iou(threshold.unwrap_or(0.5)),
        "distance" => MatchCriterion::ScaledDistance(threshold.unwrap_or(MatchCriterion::DEFAULT_DISTANCE)),
        other => return Err(PyValueError::new_err(format!("unknown criterion {other:?}"))),
    };
    criterion.check().map_err(err)?;
    let scenes = lightkit::annotation::parse_scenes(document).map_err(err)?;
    let preds = parse_predictions(predictions).map_err(err)?;
    let options = EvalOptions {
        criterion,
        class_agnostic,
        strata: strata.then(SizeStrata::default),
    };
    to_py(py, &evaluate_predictions(&scenes, &preds, &options).map_err(err)?)
}

/// Per-position visibility accuracy.
#[pyclass(module = "lightkit", frozen)]
struct VisibilityReport {
    inner: metrics::VisibilityReport,
}

#[pymethods]
impl VisibilityReport {
    /// `(position, dataset size, accuracy percent)` rows in table order.
    fn rows(&self) -> Vec<(String, usize, String)> {
        self.inner
            .rows
            .iter()
            .map(|r| (r.position.title().to_string(), r.dataset_size, r.accuracy.clone()))
            .collect()
    }

    fn table(&self) -> String {
        self.inner.to_table()
    }

    fn csv(&self) -> String {
        self.inner.to_csv()
    }
}

/// Aligns visibility predictions with labels (both JSON Lines) by scene
/// and vehicle id.
#[pyfunction]
fn visibility_accuracy(predictions: &str, labels: &str) -> PyResult<VisibilityReport> {
    let preds: Vec<VisibilityRecord> = parse_jsonl(predictions).map_err(err)?;
    let labels: Vec<VisibilityRecord> = parse_jsonl(labels).map_err(err)?;
    Ok(VisibilityReport {
        inner: metrics::visibility_accuracy(&preds, &labels).map_err(err)?,
    })
}

#[pyfunction]
fn format_percent(correct: usize, total: usize) -> String {
    metrics::format_percent(correct, total)
}

#[pymodule]
#[pyo3(name = "lightkit")]
fn lightkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Sample>()?;
    m.add_class::<Manifest>()?;
    m.add_class::<VisibilityReport>()?;
    m.add_function(wrap_pyfunction!(box_iou, m)?)?;
    m.add_function(wrap_pyfunction!(connected_components, m)?)?;
    m.add_function(wrap_pyfunction!(mask_to_box, m)?)?;
    m.add_function(wrap_pyfunction!(import_keypoints, m)?)?;
    m.add_function(wrap_pyfunction!(validate_scenes, m)?)?;
    m.add_function(wrap_pyfunction!(curate_scenes, m)?)?;
    m.add_function(wrap_pyfunction!(load_manifest, m)?)?;
    m.add_function(wrap_pyfunction!(match_detections, m)?)?;
    m.add_function(wrap_pyfunction!(average_precision, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_detections, m)?)?;
    m.add_function(wrap_pyfunction!(visibility_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(format_percent, m)?)?;
    Ok(())
}
