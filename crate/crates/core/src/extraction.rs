//! Feature-point extraction and fusion.
//!
//! Each feature point has two sources: the centre of the predicted feature
//! box and a point derived from the predicted mask. For the tube tip the box
//! wins whenever it exists and the mask only fills in missing boxes. For the
//! carina the mask also fills in missing boxes, and additionally replaces the
//! box when the two disagree by more than the fusion threshold.

use serde::{Deserialize, Serialize};

use crate::annotation::{select_max_score, BoxRect, DetectionSet};
use crate::error::{Error, Result};
use crate::raster::{
    crop_patch, densest_window_center, densest_window_center_near, edge_pixels_default,
    lowest_skeleton_point, skeletonize, BinaryMask, PixelPoint, WindowSpec,
};

/// Default box/mask disagreement (pixels) above which the carina mask point
/// replaces the box point.
pub const DEFAULT_FUSION_THRESHOLD_PX: f64 = 100.0;
/// Window locating the branch point on the carina skeleton.
pub const CENTRAL_WINDOW: WindowSpec = WindowSpec::square(15);
/// Window locating the carina on the edge patch.
pub const FEATURE_WINDOW: WindowSpec = WindowSpec::square(7);
pub const PATCH_WIDTH: usize = 100;
pub const PATCH_HEIGHT: usize = 150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointSource {
    Box,
    Mask,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    pub carina_threshold_px: f64,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            carina_threshold_px: DEFAULT_FUSION_THRESHOLD_PX,
        }
    }
}

/// Per-image extraction record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub image_id: String,
    pub tip: Option<PixelPoint>,
    pub carina: Option<PixelPoint>,
    pub tip_source: PointSource,
    pub carina_source: PointSource,
    pub tip_box_point: Option<PixelPoint>,
    pub tip_mask_point: Option<PixelPoint>,
    pub carina_box_point: Option<PixelPoint>,
    pub carina_mask_point: Option<PixelPoint>,
    /// Set when the carina mask point fell back to the skeleton centre
    /// because the edge patch was empty.
    #[serde(default)]
    pub carina_mask_fallback: bool,
    pub distance_px: Option<f64>,
    pub distance_mm: Option<f64>,
}

/// Tip point of a tube mask: the lowest pixel of its skeleton.
pub fn tip_from_mask(tube_mask: &BinaryMask) -> Result<PixelPoint> {
    lowest_skeleton_point(&skeletonize(tube_mask)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CarinaMaskPoint {
    pub point: PixelPoint,
    /// Densest point of the skeleton, around which the edge patch is cut.
    pub central: PixelPoint,
    /// The patch held no edge pixels and `point` is the central point.
    pub fallback: bool,
}

/// Carina point of a bifurcation mask.
///
/// 1. skeletonize the mask;
/// 2. the central point is the skeleton pixel with the most skeleton pixels
///    in its 15x15 window (the branch of the inverted Y);
/// 3. take the mask edges and crop a 100x150 patch centred on that point;
/// 4. the carina is the patch edge pixel with the most edge pixels in its
///    7x7 window, ties going to the pixel nearest the central point.
pub fn carina_from_mask(carina_mask: &BinaryMask) -> Result<CarinaMaskPoint> {
    let skeleton = skeletonize(carina_mask)?;
    let central = densest_window_center(&skeleton, &skeleton, CENTRAL_WINDOW)?;
    let edges = edge_pixels_default(carina_mask)?;
    let (patch, offset) = crop_patch(&edges, central, PATCH_WIDTH, PATCH_HEIGHT);
    let local_central = PixelPoint::new(central.x - offset.x, central.y - offset.y);
    match densest_window_center_near(&patch, &patch, FEATURE_WINDOW, local_central) {
        Ok(p) => Ok(CarinaMaskPoint {
            point: p.offset(offset.x, offset.y),
            central,
            fallback: false,
        }),
        Err(Error::EmptyMask) => Ok(CarinaMaskPoint {
            point: central,
            central,
            fallback: true,
        }),
        Err(e) => Err(e),
    }
}

fn round_half_up(v: f64) -> i32 {
    (v + 0.5).floor() as i32
}

/// Rounded box centre. The point is not clamped to the image.
pub fn point_from_box(rect: &BoxRect) -> PixelPoint {
    PixelPoint::new(round_half_up(rect.cx), round_half_up(rect.cy))
}

/// Box point whenever present, otherwise the mask point.
pub fn fuse_tip(
    box_pt: Option<PixelPoint>,
    mask_pt: Option<PixelPoint>,
) -> (Option<PixelPoint>, PointSource) {
    match (box_pt, mask_pt) {
        (Some(b), _) => (Some(b), PointSource::Box),
        (None, Some(m)) => (Some(m), PointSource::Mask),
        (None, None) => (None, PointSource::None),
    }
}

/// Box point unless the mask point lies strictly farther than `threshold_px`
/// from it; a lone source is used as is.
pub fn fuse_carina(
    box_pt: Option<PixelPoint>,
    mask_pt: Option<PixelPoint>,
    threshold_px: f64,
) -> (Option<PixelPoint>, PointSource) {
    match (box_pt, mask_pt) {
        (Some(b), Some(m)) if b.distance(m) > threshold_px => (Some(m), PointSource::Mask),
        (Some(b), _) => (Some(b), PointSource::Box),
        (None, Some(m)) => (Some(m), PointSource::Mask),
        (None, None) => (None, PointSource::None),
    }
}

/// Runs the full pipeline on one image. Missing or unusable detections show
/// up as absent points rather than errors.
pub fn extract(dets: &DetectionSet, pixel_spacing_mm: f64, config: &FusionConfig) -> ExtractionResult {
    let selected = select_max_score(dets);

    let tip_box_point = selected
        .tube_tip_box
        .and_then(|d| d.rect())
        .map(|r| point_from_box(&r));
    let tip_mask_point = selected
        .tube
        .and_then(|d| d.mask())
        .and_then(|m| tip_from_mask(m).ok());
    let carina_box_point = selected
        .carina_box
        .and_then(|d| d.rect())
        .map(|r| point_from_box(&r));
    let carina_mask = selected
        .carina
        .and_then(|d| d.mask())
        .and_then(|m| carina_from_mask(m).ok());
    let carina_mask_point = carina_mask.map(|c| c.point);

    let (tip, tip_source) = fuse_tip(tip_box_point, tip_mask_point);
    let (carina, carina_source) =
        fuse_carina(carina_box_point, carina_mask_point, config.carina_threshold_px);

    let distance_px = match (tip, carina) {
        (Some(t), Some(c)) => Some(t.distance(c)),
        _ => None,
    };

    ExtractionResult {
        image_id: dets.image_id.clone(),
        tip,
        carina,
        tip_source,
        carina_source,
        tip_box_point,
        tip_mask_point,
        carina_box_point,
        carina_mask_point,
        carina_mask_fallback: carina_mask.is_some_and(|c| c.fallback),
        distance_px,
        distance_mm: distance_px.map(|d| d * pixel_spacing_mm),
    }
}
