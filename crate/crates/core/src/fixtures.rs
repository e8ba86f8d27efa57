//! Deterministic synthetic fixtures with known ground truth.
//!
//! A fixture is one image worth of ground truth (tube end polygon P1..P4,
//! bifurcation outline P5..P13 with P9 at the carina apex) plus detections
//! derived from it with controlled perturbations. Masks are rasterized with
//! the same polygon fill used for ground truth. Every real-valued geometric
//! step is rounded to integer pixels before rasterization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::{
    BoxRect, DetectionClass, DetectionSet, GroundTruthAnnotation, ScoredDetection,
    FEATURE_BOX_SIDE,
};
use crate::error::{Error, Result};
use crate::extraction::{PointSource, DEFAULT_FUSION_THRESHOLD_PX};
use crate::raster::{fill_polygon, polygon_area2, polygon_boundary_points, BinaryMask, PixelPoint};

/// Skeleton quantization envelope for a tip recovered from a tube mask.
pub const TIP_MASK_TOLERANCE_PX: f64 = 2.0;
/// Envelope for a carina recovered from a bifurcation mask.
pub const CARINA_MASK_TOLERANCE_PX: f64 = 7.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeSpec {
    /// Centre line of the distal tube end; the last point is the tip.
    pub path: Vec<PixelPoint>,
    pub width: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationSpec {
    /// Carina apex (the notch between the two main bronchi).
    pub apex: PixelPoint,
    /// Branch angles from the downward vertical, in degrees.
    pub left_angle_deg: f64,
    pub right_angle_deg: f64,
    pub left_width: u32,
    pub right_width: u32,
    pub trachea_width: u32,
    /// Length of each bronchus along its inner edge.
    pub branch_length: u32,
    /// Trachea length above the apex.
    pub trachea_length: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub tube: f64,
    pub carina: f64,
    pub tube_tip_box: f64,
    pub carina_box: f64,
}

impl Default for Scores {
    fn default() -> Self {
        Self {
            tube: 0.95,
            carina: 0.95,
            tube_tip_box: 0.9,
            carina_box: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Perturbation {
    pub tip_box_offset: [i32; 2],
    pub carina_box_offset: [i32; 2],
    pub tube_mask_offset: [i32; 2],
    pub carina_mask_offset: [i32; 2],
    pub scores: Scores,
    pub drop_tube_mask: bool,
    pub drop_tip_box: bool,
    pub drop_carina_mask: bool,
    pub drop_carina_box: bool,
    /// Replace the tube mask by its one-pixel centre line.
    pub thin_tube_mask: bool,
    /// Extra lower-scoring detections far from the truth, one per class.
    pub decoys: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub seed: u64,
    pub image_id: String,
    pub width: usize,
    pub height: usize,
    pub pixel_spacing_mm: f64,
    pub tube: TubeSpec,
    pub bifurcation: BifurcationSpec,
    pub perturbation: Perturbation,
}

impl FixtureSpec {
    /// A vertical tube above a symmetric bifurcation on a 640x800 image.
    pub fn standard(image_id: &str, tip: PixelPoint, apex: PixelPoint, pixel_spacing_mm: f64) -> Self {
        Self {
            seed: 0,
            image_id: image_id.to_string(),
            width: 640,
            height: 800,
            pixel_spacing_mm,
            tube: TubeSpec {
                path: vec![tip.offset(0, -60), tip],
                width: 9,
            },
            bifurcation: BifurcationSpec {
                apex,
                left_angle_deg: 35.0,
                right_angle_deg: 35.0,
                left_width: 17,
                right_width: 17,
                trachea_width: 21,
                branch_length: 130,
                trachea_length: 110,
            },
            perturbation: Perturbation::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(self.pixel_spacing_mm.is_finite() && self.pixel_spacing_mm > 0.0) {
            return bad(format!("pixel spacing {} must be positive", self.pixel_spacing_mm));
        }
        if self.tube.path.len() < 2 {
            return bad("tube path needs at least two points".into());
        }
        if self.tube.path.windows(2).any(|w| w[0] == w[1]) {
            return bad("tube path has a zero-length segment".into());
        }
        let b = &self.bifurcation;
        if self.tube.width < 1 || b.left_width < 1 || b.right_width < 1 || b.trachea_width < 1 {
            return bad("widths must be at least one pixel".into());
        }
        for angle in [b.left_angle_deg, b.right_angle_deg] {
            if !(5.0..=85.0).contains(&angle) {
                return bad(format!("branch angle {angle} outside [5, 85] degrees"));
            }
        }
        Ok(())
    }

    fn inside(&self, p: PixelPoint) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as usize) < self.width && (p.y as usize) < self.height
    }
}

fn round_point(x: f64, y: f64) -> PixelPoint {
    PixelPoint::new(x.round() as i32, y.round() as i32)
}

fn unit(a: PixelPoint, b: PixelPoint) -> (f64, f64) {
    let (dx, dy) = (f64::from(b.x - a.x), f64::from(b.y - a.y));
    let len = dx.hypot(dy);
    (dx / len, dy / len)
}

/// Ground-truth quadrilateral P1..P4 around the last tube segment: P1/P4 at
/// the path start, P2/P3 beside the tip, so that MP is the tip.
pub fn tube_outline(tube: &TubeSpec) -> [PixelPoint; 4] {
    let start = tube.path[0];
    let tip = *tube.path.last().unwrap();
    let before = tube.path[tube.path.len() - 2];
    let (dx, dy) = unit(before, tip);
    // left-hand normal when walking towards the tip
    let (nx, ny) = (dy, -dx);
    let h = f64::from(tube.width / 2);
    let side = |p: PixelPoint, s: f64| {
        round_point(f64::from(p.x) + s * nx * h, f64::from(p.y) + s * ny * h)
    };
    [side(start, 1.0), side(tip, 1.0), side(tip, -1.0), side(start, -1.0)]
}

/// Taper length of the mask tip, in half-widths.
const TAPER_RATIO: f64 = 3.0;

/// Predicted tube mask outline: the tube band narrowing to a point at the tip.
pub fn tube_mask_polygon(tube: &TubeSpec) -> Vec<PixelPoint> {
    let path = &tube.path;
    let h = f64::from(tube.width / 2);
    let n = path.len();
    let normals: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let (a, b) = if i + 1 < n { (path[i], path[i + 1]) } else { (path[i - 1], path[i]) };
            let (dx, dy) = unit(a, b);
            if i > 0 && i + 1 < n {
                let (px, py) = unit(path[i - 1], path[i]);
                let (mx, my) = (dy + py, -dx - px);
                let len = mx.hypot(my);
                (mx / len, my / len)
            } else {
                (dy, -dx)
            }
        })
        .collect();
    let tip = path[n - 1];
    let (dx, dy) = unit(path[n - 2], tip);
    let taper = h * TAPER_RATIO;
    let shoulder = |s: f64| {
        let (nx, ny) = normals[n - 1];
        round_point(
            f64::from(tip.x) - dx * taper + s * nx * h,
            f64::from(tip.y) - dy * taper + s * ny * h,
        )
    };
    let mut left: Vec<PixelPoint> = (0..n - 1)
        .map(|i| round_point(f64::from(path[i].x) + normals[i].0 * h, f64::from(path[i].y) + normals[i].1 * h))
        .collect();
    left.push(shoulder(1.0));
    left.push(tip);
    left.push(shoulder(-1.0));
    for i in (0..n - 1).rev() {
        left.push(round_point(
            f64::from(path[i].x) - normals[i].0 * h,
            f64::from(path[i].y) - normals[i].1 * h,
        ));
    }
    left
}

/// Bifurcation outline P5..P13, traced from the top of the trachea's left
/// wall down the left bronchus, through the apex (P9), and back up the right
/// side.
pub fn bifurcation_outline(b: &BifurcationSpec) -> [PixelPoint; 9] {
    let (ax, ay) = (f64::from(b.apex.x), f64::from(b.apex.y));
    let (sl, cl) = b.left_angle_deg.to_radians().sin_cos();
    let (sr, cr) = b.right_angle_deg.to_radians().sin_cos();
    let wl = f64::from(b.left_width);
    let wr = f64::from(b.right_width);
    let ht = f64::from(b.trachea_width) / 2.0;
    let len = f64::from(b.branch_length);

    // inner edges run from the apex along each branch direction; the outer
    // edges are offset by the branch width, away from the midline
    let left_dir = (-sl, cl);
    let right_dir = (sr, cr);
    let left_out = (-cl, -sl);
    let right_out = (cr, -sr);

    let left_inner_end = (ax + len * left_dir.0, ay + len * left_dir.1);
    let left_outer_end = (left_inner_end.0 + wl * left_out.0, left_inner_end.1 + wl * left_out.1);
    let right_inner_end = (ax + len * right_dir.0, ay + len * right_dir.1);
    let right_outer_end = (right_inner_end.0 + wr * right_out.0, right_inner_end.1 + wr * right_out.1);

    // elbows: where each trachea wall meets the outer edge of its bronchus
    let left_outer_origin = (ax + wl * left_out.0, ay + wl * left_out.1);
    let t = ((ax - ht) - left_outer_origin.0) / left_dir.0;
    let left_elbow = (ax - ht, left_outer_origin.1 + t * left_dir.1);
    let right_outer_origin = (ax + wr * right_out.0, ay + wr * right_out.1);
    let t = ((ax + ht) - right_outer_origin.0) / right_dir.0;
    let right_elbow = (ax + ht, right_outer_origin.1 + t * right_dir.1);

    let top = ay - f64::from(b.trachea_length);
    [
        round_point(ax - ht, top),
        round_point(left_elbow.0, left_elbow.1),
        round_point(left_outer_end.0, left_outer_end.1),
        round_point(left_inner_end.0, left_inner_end.1),
        b.apex,
        round_point(right_inner_end.0, right_inner_end.1),
        round_point(right_outer_end.0, right_outer_end.1),
        round_point(right_elbow.0, right_elbow.1),
        round_point(ax + ht, top),
    ]
}

/// True points and tolerance radii the extraction result must fall within.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedEnvelope {
    pub image_id: String,
    pub tip: Option<PixelPoint>,
    pub tip_tolerance_px: f64,
    pub tip_source: PointSource,
    pub carina: Option<PixelPoint>,
    pub carina_tolerance_px: f64,
    pub carina_source: PointSource,
}

impl ExpectedEnvelope {
    pub fn tip_ok(&self, got: Option<PixelPoint>) -> bool {
        within(self.tip, got, self.tip_tolerance_px)
    }

    pub fn carina_ok(&self, got: Option<PixelPoint>) -> bool {
        within(self.carina, got, self.carina_tolerance_px)
    }
}

fn within(expected: Option<PixelPoint>, got: Option<PixelPoint>, tol: f64) -> bool {
    match (expected, got) {
        (Some(e), Some(g)) => e.distance(g) <= tol,
        (None, None) => true,
        _ => false,
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub annotation: GroundTruthAnnotation,
    pub detections: DetectionSet,
    pub expected: ExpectedEnvelope,
}

fn shifted(p: PixelPoint, o: [i32; 2]) -> PixelPoint {
    p.offset(o[0], o[1])
}

fn feature_box(center: PixelPoint) -> BoxRect {
    BoxRect {
        cx: f64::from(center.x),
        cy: f64::from(center.y),
        w: f64::from(FEATURE_BOX_SIDE),
        h: f64::from(FEATURE_BOX_SIDE),
    }
}

/// Builds the ground truth, detections and expected envelope for one spec.
pub fn generate(spec: &FixtureSpec) -> Result<Fixture> {
    spec.validate()?;
    let ett_points = tube_outline(&spec.tube);
    let bif_points = bifurcation_outline(&spec.bifurcation);
    let tube_poly = tube_mask_polygon(&spec.tube);
    for p in ett_points.iter().chain(&bif_points).chain(&tube_poly) {
        if !spec.inside(*p) {
            return Err(Error::InvalidSpec(format!(
                "geometry point [{}, {}] lies outside the {}x{} image",
                p.x, p.y, spec.width, spec.height
            )));
        }
    }
    if polygon_area2(&ett_points) == 0 || polygon_area2(&bif_points) == 0 {
        return Err(Error::InvalidSpec("degenerate outline".into()));
    }

    let annotation = GroundTruthAnnotation {
        image_id: spec.image_id.clone(),
        image_width: spec.width,
        image_height: spec.height,
        pixel_spacing_mm: spec.pixel_spacing_mm,
        ett_points: Some(ett_points.to_vec()),
        bifurcation_points: Some(bif_points.to_vec()),
    };
    annotation
        .validate()
        .map_err(|e| Error::InvalidSpec(e.to_string()))?;

    let gt_tip = *spec.tube.path.last().unwrap();
    let gt_carina = spec.bifurcation.apex;
    let pert = &spec.perturbation;
    let (w, h) = (spec.width, spec.height);

    let tube_mask = if pert.thin_tube_mask {
        let mut m = BinaryMask::new(w, h);
        for seg in spec.tube.path.windows(2) {
            for p in polygon_boundary_points(seg) {
                m.set_point(p, true);
            }
        }
        m
    } else {
        fill_polygon(&tube_poly, w, h)
    }
    .translated(pert.tube_mask_offset[0], pert.tube_mask_offset[1]);
    let carina_mask = fill_polygon(&bif_points, w, h)
        .translated(pert.carina_mask_offset[0], pert.carina_mask_offset[1]);

    let tip_box = shifted(gt_tip, pert.tip_box_offset);
    let carina_box = shifted(gt_carina, pert.carina_box_offset);
    let s = pert.scores;
    let mut detections = Vec::new();
    if !pert.drop_tube_mask && tube_mask.has_foreground() {
        detections.push(ScoredDetection::with_mask(DetectionClass::Tube, s.tube, tube_mask)?);
    }
    if !pert.drop_carina_mask && carina_mask.has_foreground() {
        detections.push(ScoredDetection::with_mask(DetectionClass::Carina, s.carina, carina_mask)?);
    }
    if !pert.drop_tip_box {
        detections.push(ScoredDetection::with_box(DetectionClass::TubeTipBox, s.tube_tip_box, feature_box(tip_box))?);
    }
    if !pert.drop_carina_box {
        detections.push(ScoredDetection::with_box(DetectionClass::CarinaBox, s.carina_box, feature_box(carina_box))?);
    }
    if pert.decoys {
        add_decoys(spec, &mut detections)?;
    }

    let expected = envelope(spec, gt_tip, gt_carina, tip_box, carina_box)?;
    Ok(Fixture {
        annotation,
        detections: DetectionSet {
            image_id: spec.image_id.clone(),
            detections,
        },
        expected,
    })
}

/// Lower-scoring distractors in the image corner, one beside each real
/// detection.
fn add_decoys(spec: &FixtureSpec, detections: &mut Vec<ScoredDetection>) -> Result<()> {
    let (w, h) = (spec.width, spec.height);
    let blob = BinaryMask::from_fn(w, h, |x, y| x < 12 && y < 12);
    let corner = feature_box(PixelPoint::new(6, 6));
    let real: Vec<(DetectionClass, f64)> = detections.iter().map(|d| (d.class(), d.score())).collect();
    for (class, score) in real {
        let decoy = if class.has_mask() {
            ScoredDetection::with_mask(class, score * 0.5, blob.clone())?
        } else {
            ScoredDetection::with_box(class, score * 0.5, corner)?
        };
        detections.push(decoy);
    }
    Ok(())
}

fn envelope(
    spec: &FixtureSpec,
    gt_tip: PixelPoint,
    gt_carina: PixelPoint,
    tip_box: PixelPoint,
    carina_box: PixelPoint,
) -> Result<ExpectedEnvelope> {
    let pert = &spec.perturbation;
    let tube_mask_point = (!pert.drop_tube_mask).then(|| shifted(gt_tip, pert.tube_mask_offset));
    let carina_mask_point = (!pert.drop_carina_mask).then(|| shifted(gt_carina, pert.carina_mask_offset));
    let tip_mask_tol = if pert.thin_tube_mask { 0.0 } else { TIP_MASK_TOLERANCE_PX };

    let (tip, tip_tolerance_px, tip_source) = match (pert.drop_tip_box, tube_mask_point) {
        (false, _) => (Some(tip_box), 0.0, PointSource::Box),
        (true, Some(m)) => (Some(m), tip_mask_tol, PointSource::Mask),
        (true, None) => (None, 0.0, PointSource::None),
    };

    let (carina, carina_tolerance_px, carina_source) = match (pert.drop_carina_box, carina_mask_point) {
        (false, Some(m)) => {
            let gap = carina_box.distance(m);
            let threshold = DEFAULT_FUSION_THRESHOLD_PX;
            if gap > threshold + CARINA_MASK_TOLERANCE_PX {
                (Some(m), CARINA_MASK_TOLERANCE_PX, PointSource::Mask)
            } else if gap < threshold - CARINA_MASK_TOLERANCE_PX {
                (Some(carina_box), 0.0, PointSource::Box)
            } else {
                return Err(Error::InvalidSpec(format!(
                    "carina box/mask gap {gap:.1} px is too close to the {threshold} px fusion threshold"
                )));
            }
        }
        (false, None) => (Some(carina_box), 0.0, PointSource::Box),
        (true, Some(m)) => (Some(m), CARINA_MASK_TOLERANCE_PX, PointSource::Mask),
        (true, None) => (None, 0.0, PointSource::None),
    };

    Ok(ExpectedEnvelope {
        image_id: spec.image_id.clone(),
        tip,
        tip_tolerance_px,
        tip_source,
        carina,
        carina_tolerance_px,
        carina_source,
    })
}

/// Controls which errors a cohort plants. Periodic rules fire on image
/// indices `i` with `(i + 1).is_multiple_of(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorProfile {
    /// Carina-box displacement along the tube axis, in mm, applied cyclically.
    /// Each value must be a whole number of pixels at every spacing in
    /// `pixel_spacings_mm` and stay below the fusion threshold.
    pub distance_errors_mm: Vec<f64>,
    pub pixel_spacings_mm: Vec<f64>,
    /// Drop both carina detections.
    pub carina_undetected_every: Option<usize>,
    /// Drop the tip box; the tip then comes from a thin tube mask.
    pub tip_box_dropout_every: Option<usize>,
    /// Move the tip box 150 px sideways and drop the tube mask.
    pub far_tip_box_every: Option<usize>,
    /// Add lower-scoring distractor detections.
    pub decoys_every: Option<usize>,
}

/// Sideways displacement of a misplaced tip box.
pub const FAR_TIP_BOX_OFFSET_PX: i32 = 150;

impl ErrorProfile {
    pub fn perfect() -> Self {
        Self {
            distance_errors_mm: vec![0.0],
            pixel_spacings_mm: vec![0.5, 0.25],
            carina_undetected_every: None,
            tip_box_dropout_every: None,
            far_tip_box_every: None,
            decoys_every: None,
        }
    }

    pub fn planted() -> Self {
        Self {
            distance_errors_mm: vec![0.0, 3.0, 8.0, 13.0, 22.0],
            pixel_spacings_mm: vec![0.5, 0.25],
            carina_undetected_every: Some(23),
            tip_box_dropout_every: Some(7),
            far_tip_box_every: Some(17),
            decoys_every: Some(3),
        }
    }

    fn fires(every: Option<usize>, i: usize) -> bool {
        every.is_some_and(|k| k > 0 && (i + 1).is_multiple_of(k))
    }

    fn validate(&self) -> Result<()> {
        if self.distance_errors_mm.is_empty() || self.pixel_spacings_mm.is_empty() {
            return Err(Error::InvalidSpec("error profile lists must be nonempty".into()));
        }
        for &s in &self.pixel_spacings_mm {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidSpec(format!("pixel spacing {s} must be positive")));
            }
            for &e in &self.distance_errors_mm {
                let px = e / s;
                if e < 0.0 || px.fract() != 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "planted error {e} mm is not a whole number of pixels at {s} mm/px"
                    )));
                }
                if px + CARINA_MASK_TOLERANCE_PX >= DEFAULT_FUSION_THRESHOLD_PX {
                    return Err(Error::InvalidSpec(format!(
                        "planted error {e} mm ({px} px) would trigger carina replacement"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-image planted truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image_id: String,
    pub pixel_spacing_mm: f64,
    pub gt_tip: PixelPoint,
    pub gt_carina: PixelPoint,
    /// Final points the pipeline must produce (exact).
    pub predicted_tip: Option<PixelPoint>,
    pub predicted_carina: Option<PixelPoint>,
    pub tip_source: PointSource,
    pub carina_source: PointSource,
    /// Planted |d1 - d2| in mm, for images where only the carina box moved.
    pub planted_distance_error_mm: Option<f64>,
    /// Whether the image carries a tube mask / carina mask detection.
    pub has_tube_mask: bool,
    pub has_carina_mask: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortManifest {
    pub seed: u64,
    pub count: usize,
    pub profile: ErrorProfile,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone)]
pub struct Cohort {
    pub annotations: Vec<GroundTruthAnnotation>,
    pub detections: Vec<DetectionSet>,
    pub manifest: CohortManifest,
}

/// Image id for cohort member `i`.
pub fn cohort_image_id(i: usize) -> String {
    format!("fx{i:05}")
}

/// Spec for cohort member `index`, drawn from its own ChaCha8 stream.
pub fn cohort_member_spec(seed: u64, index: usize, profile: &ErrorProfile) -> (FixtureSpec, Option<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);

    let spacing = profile.pixel_spacings_mm[rng.random_range(0..profile.pixel_spacings_mm.len())];
    // ground-truth distance in whole mm so d1 spans both suitability classes
    let d1_mm: u32 = rng.random_range(12..=88);
    let gap_px = (f64::from(d1_mm) / spacing).round() as i32;
    let tip = PixelPoint::new(rng.random_range(250..=390), rng.random_range(90..=130));
    let apex = tip.offset(0, gap_px);

    let mut spec = FixtureSpec::standard(&cohort_image_id(index), tip, apex, spacing);
    spec.seed = seed;
    let scores = Scores {
        tube: rng.random_range(0.6..1.0),
        carina: rng.random_range(0.6..1.0),
        tube_tip_box: rng.random_range(0.6..1.0),
        carina_box: rng.random_range(0.6..1.0),
    };
    let pert = &mut spec.perturbation;
    pert.scores = scores;
    pert.decoys = ErrorProfile::fires(profile.decoys_every, index);

    let undetected = ErrorProfile::fires(profile.carina_undetected_every, index);
    let far_tip = ErrorProfile::fires(profile.far_tip_box_every, index);
    let tip_dropout = !far_tip && ErrorProfile::fires(profile.tip_box_dropout_every, index);

    let mut planted = None;
    if undetected {
        pert.drop_carina_box = true;
        pert.drop_carina_mask = true;
    } else {
        let err_mm = profile.distance_errors_mm[index % profile.distance_errors_mm.len()];
        let err_px = (err_mm / spacing) as i32;
        // move the carina box along the tube axis, away from the tip unless
        // there is room to move it closer
        let toward_tip = index % 2 == 1 && gap_px - err_px > 20;
        pert.carina_box_offset = [0, if toward_tip { -err_px } else { err_px }];
        if !far_tip {
            planted = Some(err_mm);
        }
    }
    if far_tip {
        pert.tip_box_offset = [FAR_TIP_BOX_OFFSET_PX, 0];
        pert.drop_tube_mask = true;
    }
    if tip_dropout {
        pert.drop_tip_box = true;
        pert.thin_tube_mask = true;
    }
    (spec, planted)
}

/// Generates `n` fixtures with planted errors and a manifest of what was
/// planted, so aggregate metrics can be derived without running the
/// pipeline.
pub fn generate_cohort(n: usize, seed: u64, profile: &ErrorProfile) -> Result<Cohort> {
    if n == 0 {
        return Err(Error::InvalidSpec("cohort size must be at least 1".into()));
    }
    profile.validate()?;
    let mut annotations = Vec::with_capacity(n);
    let mut detections = Vec::with_capacity(n);
    let mut entries = Vec::with_capacity(n);
    for i in 0..n {
        let (spec, planted) = cohort_member_spec(seed, i, profile);
        let fixture = generate(&spec)?;
        let exp = &fixture.expected;
        debug_assert!(exp.tip_tolerance_px == 0.0 && exp.carina_tolerance_px == 0.0);
        entries.push(ManifestEntry {
            image_id: spec.image_id.clone(),
            pixel_spacing_mm: spec.pixel_spacing_mm,
            gt_tip: *spec.tube.path.last().unwrap(),
            gt_carina: spec.bifurcation.apex,
            predicted_tip: exp.tip,
            predicted_carina: exp.carina,
            tip_source: exp.tip_source,
            carina_source: exp.carina_source,
            planted_distance_error_mm: planted,
            has_tube_mask: !spec.perturbation.drop_tube_mask,
            has_carina_mask: !spec.perturbation.drop_carina_mask,
        });
        annotations.push(fixture.annotation);
        detections.push(fixture.detections);
    }
    Ok(Cohort {
        annotations,
        detections,
        manifest: CohortManifest {
            seed,
            count: n,
            profile: profile.clone(),
            entries,
        },
    })
}
