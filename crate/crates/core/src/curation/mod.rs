//! Light-centered crops, corner-offset targets, reflection augmentation,
//! visibility export and dataset statistics.

mod crop;
mod manifest;
mod masks;
mod pipeline;
mod sample;
mod stats;
mod visibility;

pub use crop::{
    crop_light_centered, crop_vehicle, from_vehicle_frame, round_half_down, to_vehicle_frame,
    LightCrop, Padding, CROP_SIZE, HALF_CROP,
};
pub use manifest::{
    index_text, manifest_text, parse_manifest, read_manifest, read_manifest_index, write_manifest,
    ManifestIndex, MANIFEST_FILE, MANIFEST_VERSION,
};
pub use masks::{convert_mask_annotations_to_boxes, AnnotationError, MaskConversion};
pub use pipeline::{
    augment_reflect, curate, curate_light, CurateOptions, DatasetManifest, Provenance, SceneError,
};
pub use sample::{
    corner_offset_targets, reflect_sample, CropApproach, CuratedSample, OffsetTargets,
    SampleRecord,
};
pub use stats::{
    compute_stats, histogram_csv, positions_csv, write_stats, Histogram, LightStats,
    HEIGHTS_CSV, HIST_BIN_WIDTH, HIST_LIMIT, POSITIONS_CSV, WIDTHS_CSV,
};
pub use visibility::{
    export_visibility_dataset, write_visibility_dataset, Exclusion, ExclusionReason,
    VisibilityExport, VisibilityOptions, VisibilitySample, VISIBILITY_EXCLUDED_FILE,
    VISIBILITY_LABELS_FILE,
};
