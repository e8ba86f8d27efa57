//! Ground-truth annotations and model detections.
//!
//! The tube end is labelled by four outline points P1..P4 and the tracheal
//! bifurcation by nine outline points P5..P13. The tip reference point is the
//! midpoint of P2 and P3; the carina reference point is P9.

mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{fill_polygon, polygon_area2, BinaryMask, PixelPoint};

pub use io::{
    load_annotations, load_detections, read_json_records, save_annotations, save_detections, write_json,
    DetectionRecord,
};

pub const ETT_POINT_COUNT: usize = 4;
pub const BIFURCATION_POINT_COUNT: usize = 9;
/// Side of the square feature boxes centred on the tip and carina points.
pub const FEATURE_BOX_SIDE: u32 = 48;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthAnnotation {
    pub image_id: String,
    pub image_width: usize,
    pub image_height: usize,
    /// Isotropic pixel spacing in millimetres per pixel.
    pub pixel_spacing_mm: f64,
    /// P1..P4, or `None` when no tube is present.
    #[serde(default)]
    pub ett_points: Option<Vec<PixelPoint>>,
    /// P5..P13, or `None` when the carina is not visible.
    #[serde(default)]
    pub bifurcation_points: Option<Vec<PixelPoint>>,
}

impl GroundTruthAnnotation {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Error::InvalidAnnotation {
            image_id: self.image_id.clone(),
            reason,
        };
        if !(self.pixel_spacing_mm.is_finite() && self.pixel_spacing_mm > 0.0) {
            return Err(fail(format!(
                "pixel_spacing_mm must be positive, got {}",
                self.pixel_spacing_mm
            )));
        }
        if self.image_width == 0 || self.image_height == 0 {
            return Err(fail("image dimensions must be nonzero".into()));
        }
        for (name, points, expected) in [
            ("ett_points", &self.ett_points, ETT_POINT_COUNT),
            ("bifurcation_points", &self.bifurcation_points, BIFURCATION_POINT_COUNT),
        ] {
            let Some(points) = points else { continue };
            if points.len() != expected {
                return Err(fail(format!(
                    "{name} must have {expected} points, got {}",
                    points.len()
                )));
            }
            if let Some(p) = points.iter().find(|p| !self.contains(**p)) {
                return Err(fail(format!(
                    "{name} point [{}, {}] lies outside the {}x{} image",
                    p.x, p.y, self.image_width, self.image_height
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: PixelPoint) -> bool {
        p.x >= 0
            && p.y >= 0
            && (p.x as usize) < self.image_width
            && (p.y as usize) < self.image_height
    }

    fn ett(&self) -> Result<&[PixelPoint]> {
        self.ett_points.as_deref().ok_or_else(|| Error::MissingObject {
            image_id: self.image_id.clone(),
            object: "ETT annotation",
        })
    }

    fn bifurcation(&self) -> Result<&[PixelPoint]> {
        self.bifurcation_points
            .as_deref()
            .ok_or_else(|| Error::MissingObject {
                image_id: self.image_id.clone(),
                object: "bifurcation annotation",
            })
    }

    /// Ground-truth ETT-carina distance in millimetres, when both objects are
    /// labelled.
    pub fn reference_distance_mm(&self) -> Option<f64> {
        let tip = derive_mp(self).ok()?;
        let carina = carina_gt_point(self).ok()?;
        Some(tip.distance(carina) * self.pixel_spacing_mm)
    }
}

/// Round-half-up midpoint of two coordinates.
fn midpoint(a: i32, b: i32) -> i32 {
    (i64::from(a) + i64::from(b) + 1).div_euclid(2) as i32
}

/// Tip reference point MP: the midpoint of P2 and P3, rounded half up.
pub fn derive_mp(annotation: &GroundTruthAnnotation) -> Result<PixelPoint> {
    let pts = annotation.ett()?;
    let (p2, p3) = (pts[1], pts[2]);
    Ok(PixelPoint::new(midpoint(p2.x, p3.x), midpoint(p2.y, p3.y)))
}

/// Carina reference point P9 (fifth of the bifurcation points).
pub fn carina_gt_point(annotation: &GroundTruthAnnotation) -> Result<PixelPoint> {
    Ok(annotation.bifurcation()?[4])
}

fn object_mask(
    annotation: &GroundTruthAnnotation,
    points: &[PixelPoint],
    object: &'static str,
) -> Result<BinaryMask> {
    if polygon_area2(points) == 0 {
        return Err(Error::DegenerateAnnotation {
            image_id: annotation.image_id.clone(),
            object,
        });
    }
    Ok(fill_polygon(
        points,
        annotation.image_width,
        annotation.image_height,
    ))
}

/// Rasterized ETT (P1..P4) polygon.
pub fn ett_mask(annotation: &GroundTruthAnnotation) -> Result<BinaryMask> {
    object_mask(annotation, annotation.ett()?, "ETT")
}

/// Rasterized bifurcation (P5..P13) polygon.
pub fn bifurcation_mask(annotation: &GroundTruthAnnotation) -> Result<BinaryMask> {
    object_mask(annotation, annotation.bifurcation()?, "bifurcation")
}

/// Both ground-truth polygons rasterized with even-odd fill, outline
/// included. An object that is not annotated yields `None`.
pub fn gt_masks(
    annotation: &GroundTruthAnnotation,
) -> Result<(Option<BinaryMask>, Option<BinaryMask>)> {
    let ett = match &annotation.ett_points {
        Some(_) => Some(ett_mask(annotation)?),
        None => None,
    };
    let bif = match &annotation.bifurcation_points {
        Some(_) => Some(bifurcation_mask(annotation)?),
        None => None,
    };
    Ok((ett, bif))
}

/// Square box labelling a feature point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureBox {
    pub center: PixelPoint,
    pub side: u32,
}

impl FeatureBox {
    pub fn centered(center: PixelPoint) -> Self {
        Self {
            center,
            side: FEATURE_BOX_SIDE,
        }
    }

    pub fn to_rect(self) -> BoxRect {
        BoxRect {
            cx: f64::from(self.center.x),
            cy: f64::from(self.center.y),
            w: f64::from(self.side),
            h: f64::from(self.side),
        }
    }
}

/// Feature boxes around the tip (MP) and carina (P9) reference points.
pub fn feature_boxes(annotation: &GroundTruthAnnotation) -> (Option<FeatureBox>, Option<FeatureBox>) {
    (
        derive_mp(annotation).ok().map(FeatureBox::centered),
        carina_gt_point(annotation).ok().map(FeatureBox::centered),
    )
}

/// Axis-aligned box given by centre and extent in pixels. Serialized as
/// `[cx, cy, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoxRect {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for BoxRect {
    fn from([cx, cy, w, h]: [f64; 4]) -> Self {
        Self { cx, cy, w, h }
    }
}

impl From<BoxRect> for [f64; 4] {
    fn from(b: BoxRect) -> Self {
        [b.cx, b.cy, b.w, b.h]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionClass {
    Tube,
    Carina,
    TubeTipBox,
    CarinaBox,
}

impl DetectionClass {
    pub const ALL: [DetectionClass; 4] = [
        DetectionClass::Tube,
        DetectionClass::Carina,
        DetectionClass::TubeTipBox,
        DetectionClass::CarinaBox,
    ];

    pub fn has_mask(self) -> bool {
        matches!(self, DetectionClass::Tube | DetectionClass::Carina)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DetectionClass::Tube => "tube",
            DetectionClass::Carina => "carina",
            DetectionClass::TubeTipBox => "tube_tip_box",
            DetectionClass::CarinaBox => "carina_box",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DetectionPayload {
    Mask(BinaryMask),
    Box(BoxRect),
}

/// One scored model output. Mask classes carry a mask, box classes a box.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDetection {
    class: DetectionClass,
    score: f64,
    payload: DetectionPayload,
}

impl ScoredDetection {
    pub fn new(class: DetectionClass, score: f64, payload: DetectionPayload) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::InvalidDetection(format!(
                "{} score {score} outside [0, 1]",
                class.as_str()
            )));
        }
        let is_mask = matches!(payload, DetectionPayload::Mask(_));
        if is_mask != class.has_mask() {
            return Err(Error::InvalidDetection(format!(
                "{} detections must carry a {}",
                class.as_str(),
                if class.has_mask() { "mask" } else { "box" }
            )));
        }
        Ok(Self {
            class,
            score,
            payload,
        })
    }

    pub fn with_mask(class: DetectionClass, score: f64, mask: BinaryMask) -> Result<Self> {
        Self::new(class, score, DetectionPayload::Mask(mask))
    }

    pub fn with_box(class: DetectionClass, score: f64, rect: BoxRect) -> Result<Self> {
        Self::new(class, score, DetectionPayload::Box(rect))
    }

    pub fn class(&self) -> DetectionClass {
        self.class
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn payload(&self) -> &DetectionPayload {
        &self.payload
    }

    pub fn mask(&self) -> Option<&BinaryMask> {
        match &self.payload {
            DetectionPayload::Mask(m) => Some(m),
            DetectionPayload::Box(_) => None,
        }
    }

    pub fn rect(&self) -> Option<BoxRect> {
        match self.payload {
            DetectionPayload::Box(b) => Some(b),
            DetectionPayload::Mask(_) => None,
        }
    }
}

/// All detections for one image, in model output order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionSet {
    pub image_id: String,
    pub detections: Vec<ScoredDetection>,
}

/// Highest-scoring detection per class.
#[derive(Debug, Clone, Copy, Default)]
pub struct SelectedDetections<'a> {
    pub tube: Option<&'a ScoredDetection>,
    pub carina: Option<&'a ScoredDetection>,
    pub tube_tip_box: Option<&'a ScoredDetection>,
    pub carina_box: Option<&'a ScoredDetection>,
}

impl<'a> SelectedDetections<'a> {
    pub fn get(&self, class: DetectionClass) -> Option<&'a ScoredDetection> {
        match class {
            DetectionClass::Tube => self.tube,
            DetectionClass::Carina => self.carina,
            DetectionClass::TubeTipBox => self.tube_tip_box,
            DetectionClass::CarinaBox => self.carina_box,
        }
    }

    fn slot(&mut self, class: DetectionClass) -> &mut Option<&'a ScoredDetection> {
        match class {
            DetectionClass::Tube => &mut self.tube,
            DetectionClass::Carina => &mut self.carina,
            DetectionClass::TubeTipBox => &mut self.tube_tip_box,
            DetectionClass::CarinaBox => &mut self.carina_box,
        }
    }
}

/// Keeps only the maximal-score detection of each class; equal scores keep
/// the one listed first.
pub fn select_max_score(dets: &DetectionSet) -> SelectedDetections<'_> {
    let mut selected = SelectedDetections::default();
    for det in &dets.detections {
        let slot = selected.slot(det.class);
        if slot.is_none_or(|best| det.score > best.score) {
            *slot = Some(det);
        }
    }
    selected
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i32, y: i32) -> PixelPoint {
        PixelPoint::new(x, y)
    }

    fn ann(ett: Option<Vec<PixelPoint>>, bif: Option<Vec<PixelPoint>>) -> GroundTruthAnnotation {
        GroundTruthAnnotation {
            image_id: "img".into(),
            image_width: 640,
            image_height: 640,
            pixel_spacing_mm: 0.5,
            ett_points: ett,
            bifurcation_points: bif,
        }
    }

    fn ett_with(p2: PixelPoint, p3: PixelPoint) -> Option<Vec<PixelPoint>> {
        Some(vec![p(0, 0), p2, p3, p(20, 0)])
    }

    #[test]
    fn mp_is_rounded_midpoint() {
        let a = ann(ett_with(p(100, 200), p(110, 210)), None);
        assert_eq!(derive_mp(&a).unwrap(), p(105, 205));
        let a = ann(ett_with(p(50, 50), p(50, 50)), None);
        assert_eq!(derive_mp(&a).unwrap(), p(50, 50));
        let a = ann(ett_with(p(0, 0), p(1, 1)), None);
        assert_eq!(derive_mp(&a).unwrap(), p(1, 1));
        assert!(matches!(derive_mp(&ann(None, None)), Err(Error::MissingObject { .. })));
    }

    #[test]
    fn mp_is_symmetric() {
        for (a, b) in [(p(3, 8), p(10, 1)), (p(0, 0), p(1, 1)), (p(7, 2), p(8, 9))] {
            assert_eq!(
                derive_mp(&ann(ett_with(a, b), None)).unwrap(),
                derive_mp(&ann(ett_with(b, a), None)).unwrap()
            );
        }
    }

    #[test]
    fn carina_is_fifth_bifurcation_point() {
        let bif: Vec<_> = (0..9).map(|i| p(10 * i, 3 * i + 1)).collect();
        let a = ann(None, Some(bif));
        assert_eq!(carina_gt_point(&a).unwrap(), p(40, 13));
        assert!(matches!(
            carina_gt_point(&ann(None, None)),
            Err(Error::MissingObject { .. })
        ));
    }

    #[test]
    fn degenerate_polygon_is_rejected() {
        let a = ann(Some(vec![p(0, 0), p(1, 1), p(2, 2), p(3, 3)]), None);
        assert!(matches!(gt_masks(&a), Err(Error::DegenerateAnnotation { .. })));
        let a = ann(Some(vec![p(0, 0), p(10, 0), p(10, 10), p(0, 10)]), None);
        let (ett, bif) = gt_masks(&a).unwrap();
        assert_eq!(ett.unwrap().count(), 121);
        assert!(bif.is_none());
    }

    #[test]
    fn validation_catches_bad_records() {
        let mut a = ann(ett_with(p(1, 1), p(2, 2)), None);
        assert!(a.validate().is_ok());
        a.pixel_spacing_mm = 0.0;
        assert!(a.validate().is_err());
        let a = ann(Some(vec![p(0, 0), p(1, 1)]), None);
        assert!(a.validate().is_err());
        let a = ann(ett_with(p(1, 1), p(640, 2)), None);
        assert!(a.validate().is_err());
    }

    #[test]
    fn feature_boxes_are_48_and_centred() {
        let bif: Vec<_> = (0..9).map(|i| p(10 * i, 3 * i + 1)).collect();
        let a = ann(ett_with(p(100, 200), p(110, 210)), Some(bif));
        let (tip, carina) = feature_boxes(&a);
        assert_eq!(tip.unwrap().center, p(105, 205));
        assert_eq!(tip.unwrap().side, 48);
        assert_eq!(carina.unwrap().center, p(40, 13));
    }

    fn box_det(class: DetectionClass, score: f64) -> ScoredDetection {
        ScoredDetection::with_box(class, score, BoxRect::from([1.0, 1.0, 48.0, 48.0])).unwrap()
    }

    fn mask_det(class: DetectionClass, score: f64, marker: usize) -> ScoredDetection {
        let mut m = BinaryMask::new(4, 4);
        m.set(marker, 0, true);
        ScoredDetection::with_mask(class, score, m).unwrap()
    }

    #[test]
    fn max_score_per_class() {
        let set = DetectionSet {
            image_id: "a".into(),
            detections: vec![
                mask_det(DetectionClass::Tube, 0.9, 0),
                mask_det(DetectionClass::Tube, 0.7, 1),
                mask_det(DetectionClass::Carina, 0.8, 2),
            ],
        };
        let sel = select_max_score(&set);
        assert_eq!(sel.tube.unwrap().score(), 0.9);
        assert_eq!(sel.carina.unwrap().score(), 0.8);
        assert!(sel.tube_tip_box.is_none() && sel.carina_box.is_none());

        let none = DetectionSet::default();
        let empty = select_max_score(&none);
        assert!(DetectionClass::ALL.iter().all(|&c| empty.get(c).is_none()));
    }

    #[test]
    fn equal_scores_keep_first() {
        let set = DetectionSet {
            image_id: "a".into(),
            detections: vec![
                mask_det(DetectionClass::Tube, 0.9, 0),
                mask_det(DetectionClass::Tube, 0.9, 3),
                box_det(DetectionClass::CarinaBox, 0.4),
            ],
        };
        let sel = select_max_score(&set);
        assert!(sel.tube.unwrap().mask().unwrap().get(0, 0));
        assert_eq!(sel.carina_box.unwrap().score(), 0.4);
    }

    #[test]
    fn payload_must_match_class() {
        assert!(ScoredDetection::with_box(DetectionClass::Tube, 0.5, BoxRect::from([0.0; 4])).is_err());
        assert!(ScoredDetection::with_mask(DetectionClass::CarinaBox, 0.5, BinaryMask::new(1, 1)).is_err());
        assert!(ScoredDetection::with_mask(DetectionClass::Tube, 1.5, BinaryMask::new(1, 1)).is_err());
    }
}
