//! PNG and JSONL helpers plus the image and mask sources used by the pipeline.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use image::RgbImage;

use crate::error::{LightError, Result};
use crate::geometry::BinaryMask;

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|source| LightError::Image {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(img.to_rgb8())
}

pub fn save_png(img: &RgbImage, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| LightError::io(parent, e))?;
    }
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| LightError::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// Reads a single-channel PNG; any nonzero value marks a light pixel.
pub fn load_mask_png(path: &Path) -> Result<BinaryMask> {
    let img = image::open(path)
        .map_err(|source| LightError::Image {
            path: path.to_path_buf(),
            source,
        })?
        .to_luma8();
    let (w, h) = img.dimensions();
    let bits = img.pixels().map(|p| p.0[0] != 0).collect();
    BinaryMask::from_bits(w as usize, h as usize, bits)
}

pub fn save_mask_png(mask: &BinaryMask, path: &Path) -> Result<()> {
    let raw = mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }).collect();
    let img = image::GrayImage::from_raw(mask.width() as u32, mask.height() as u32, raw)
        .expect("buffer sized from mask");
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| LightError::io(parent, e))?;
    }
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| LightError::Image {
            path: path.to_path_buf(),
            source,
        })
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| LightError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| LightError::io(parent, e))?;
        }
    }
    fs::write(path, text).map_err(|e| LightError::io(path, e))
}

/// Parses JSON Lines, skipping blank lines. Errors carry the 1-based line number.
pub fn parse_jsonl<T: serde::de::DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| LightError::Parse {
                line: i + 1,
                column: e.column(),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Resolves scene images by path.
pub trait ImageSource: Sync {
    fn load(&self, image_path: &str) -> Result<RgbImage>;
}

/// Images on disk, relative paths resolved against `root`.
#[derive(Debug, Clone)]
pub struct DirImageSource {
    pub root: PathBuf,
}

impl DirImageSource {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }
}

impl ImageSource for DirImageSource {
    fn load(&self, image_path: &str) -> Result<RgbImage> {
        load_rgb(&self.root.join(image_path))
    }
}

impl ImageSource for HashMap<String, RgbImage> {
    fn load(&self, image_path: &str) -> Result<RgbImage> {
        self.get(image_path).cloned().ok_or_else(|| {
            LightError::io(
                image_path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "image not registered"),
            )
        })
    }
}

/// Resolves mask references.
pub trait MaskSource: Sync {
    fn load(&self, mask_ref: &str) -> Result<BinaryMask>;
}

#[derive(Debug, Clone)]
pub struct DirMaskSource {
    pub root: PathBuf,
}

impl DirMaskSource {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }
}

impl MaskSource for DirMaskSource {
    fn load(&self, mask_ref: &str) -> Result<BinaryMask> {
        load_mask_png(&self.root.join(mask_ref))
    }
}

impl MaskSource for HashMap<String, BinaryMask> {
    fn load(&self, mask_ref: &str) -> Result<BinaryMask> {
        self.get(mask_ref).cloned().ok_or_else(|| {
            LightError::io(
                mask_ref,
                std::io::Error::new(std::io::ErrorKind::NotFound, "mask not registered"),
            )
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = BinaryMask::from_pixels(7, 5, &[(0, 0), (6, 4), (3, 2)]).unwrap();
        let path = dir.path().join("m.png");
        save_mask_png(&m, &path).unwrap();
        assert_eq!(load_mask_png(&path).unwrap(), m);
    }

    #[test]
    fn jsonl_errors_carry_line_numbers() {
        let err = parse_jsonl::<serde_json::Value>("{}\n\n{oops}\n").unwrap_err();
        assert!(matches!(err, LightError::Parse { line: 3, .. }));
    }

    #[test]
    fn missing_image_is_io_error() {
        let src = DirImageSource::new("/nonexistent");
        assert!(src.load("x.png").unwrap_err().is_io());
    }
}
