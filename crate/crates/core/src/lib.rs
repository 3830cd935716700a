//! Vehicle-light annotation curation and light-detector evaluation.
//!
//! The crate is organised around the life of a light annotation:
//!
//! * [`geometry`]: box, center, corner and mask representations of a light
//!   and conversions between them.
//! * [`annotation`]: the scene / vehicle / light schema, importers and the
//!   validator.
//! * [`curation`]: light-centered 128x128 crops, corner-offset targets,
//!   reflection augmentation, visibility export and dataset statistics.
//! * [`metrics`]: IoU, greedy matching, precision/recall, AP/mAP, size
//!   strata and visibility accuracy tables.
//! * [`overlay`]: annotation overlays for inspection.

pub mod annotation;
pub mod curation;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod overlay;

pub use error::{LightError, Result};
