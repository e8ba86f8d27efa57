//! JSON file formats for annotations and detections.
//!
//! Both files hold a top-level list of flat records. Parse failures name the
//! file, the zero-based record index and the offending field.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{BoxRect, DetectionClass, DetectionPayload, DetectionSet, GroundTruthAnnotation, ScoredDetection};
use crate::error::{Error, Result};
use crate::raster::{decode_rle, encode_rle, BinaryMask};

/// Reads a JSON list and deserializes each element, reporting the record
/// index and field path on failure.
pub fn read_json_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let values: Vec<serde_json::Value> =
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    values
        .into_iter()
        .enumerate()
        .map(|(index, value)| {
            serde_path_to_error::deserialize(value).map_err(|err| {
                let field = err.path().to_string();
                Error::Record {
                    file: path.to_path_buf(),
                    index,
                    message: if field == "." {
                        err.into_inner().to_string()
                    } else {
                        format!("field `{field}`: {}", err.into_inner())
                    },
                }
            })
        })
        .collect()
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_annotations(path: &Path) -> Result<Vec<GroundTruthAnnotation>> {
    let records: Vec<GroundTruthAnnotation> = read_json_records(path)?;
    for (index, rec) in records.iter().enumerate() {
        rec.validate().map_err(|e| Error::Record {
            file: path.to_path_buf(),
            index,
            message: e.to_string(),
        })?;
    }
    Ok(records)
}

pub fn save_annotations(path: &Path, annotations: &[GroundTruthAnnotation]) -> Result<()> {
    write_json(path, annotations)
}

/// On-disk detection record. Exactly one of `mask_png`, `mask_rle` or `box`
/// is expected, matching the class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub image_id: String,
    pub class: DetectionClass,
    pub score: f64,
    /// PNG path, relative to the detection file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_png: Option<String>,
    /// Alternating background/foreground run lengths, row-major, starting
    /// with background.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_rle: Option<Vec<u32>>,
    /// `[width, height]` of an RLE mask; defaults to the annotated image size.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_size: Option<[usize; 2]>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub bbox: Option<BoxRect>,
}

impl DetectionRecord {
    fn resolve(&self, base: &Path, dims: Option<(usize, usize)>) -> std::result::Result<ScoredDetection, String> {
        let payload = match (&self.mask_png, &self.mask_rle, &self.bbox) {
            (Some(png), None, None) => {
                let mask = BinaryMask::load_png(&base.join(png)).map_err(|e| format!("field `mask_png`: {e}"))?;
                if let Some(d) = dims {
                    if mask.dimensions() != d {
                        return Err(format!(
                            "field `mask_png`: mask is {}x{}, image is {}x{}",
                            mask.width(),
                            mask.height(),
                            d.0,
                            d.1
                        ));
                    }
                }
                DetectionPayload::Mask(mask)
            }
            (None, Some(runs), None) => {
                let (w, h) = match (self.mask_size, dims) {
                    (Some([w, h]), _) => (w, h),
                    (None, Some(d)) => d,
                    (None, None) => return Err("field `mask_size`: required when the image size is unknown".into()),
                };
                DetectionPayload::Mask(decode_rle(runs, w, h).map_err(|e| format!("field `mask_rle`: {e}"))?)
            }
            (None, None, Some(b)) => DetectionPayload::Box(*b),
            _ => {
                return Err("exactly one of `mask_png`, `mask_rle`, `box` must be given".into());
            }
        };
        ScoredDetection::new(self.class, self.score, payload).map_err(|e| e.to_string())
    }

    pub fn from_detection(image_id: &str, det: &ScoredDetection) -> Self {
        let (mask_rle, mask_size, bbox) = match det.payload() {
            DetectionPayload::Mask(m) => (Some(encode_rle(m)), Some([m.width(), m.height()]), None),
            DetectionPayload::Box(b) => (None, None, Some(*b)),
        };
        Self {
            image_id: image_id.to_string(),
            class: det.class(),
            score: det.score(),
            mask_png: None,
            mask_rle,
            mask_size,
            bbox,
        }
    }
}

/// Loads a detection file and groups records into per-image sets, ordered by
/// image id; record order within an image is preserved.
///
/// With `images` given (image id to `(width, height)`), records naming an
/// unknown image are rejected and RLE masks default to the image size.
pub fn load_detections(
    path: &Path,
    images: Option<&BTreeMap<String, (usize, usize)>>,
) -> Result<Vec<DetectionSet>> {
    let records: Vec<DetectionRecord> = read_json_records(path)?;
    let base: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut sets: BTreeMap<String, DetectionSet> = BTreeMap::new();
    if let Some(images) = images {
        for id in images.keys() {
            sets.insert(
                id.clone(),
                DetectionSet {
                    image_id: id.clone(),
                    detections: Vec::new(),
                },
            );
        }
    }
    for (index, rec) in records.iter().enumerate() {
        let record_err = |message: String| Error::Record {
            file: path.to_path_buf(),
            index,
            message,
        };
        let dims = match images {
            Some(images) => Some(*images.get(&rec.image_id).ok_or_else(|| {
                record_err(format!("field `image_id`: unknown image id `{}`", rec.image_id))
            })?),
            None => None,
        };
        let det = rec.resolve(&base, dims).map_err(record_err)?;
        sets.entry(rec.image_id.clone())
            .or_insert_with(|| DetectionSet {
                image_id: rec.image_id.clone(),
                detections: Vec::new(),
            })
            .detections
            .push(det);
    }
    Ok(sets.into_values().collect())
}

/// Writes detection sets with masks stored inline as RLE.
pub fn save_detections(path: &Path, sets: &[DetectionSet]) -> Result<()> {
    let records: Vec<DetectionRecord> = sets
        .iter()
        .flat_map(|s| s.detections.iter().map(|d| DetectionRecord::from_detection(&s.image_id, d)))
        .collect();
    write_json(path, &records)
}
