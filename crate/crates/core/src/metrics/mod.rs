//! Evaluation: mask overlap, feature-point errors, detection counts,
//! distance errors, suitability and correlation.

mod report;
pub mod stats;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::annotation::{
    carina_gt_point, derive_mp, gt_masks, select_max_score, DetectionSet, GroundTruthAnnotation,
};
use crate::error::{Error, Result};
use crate::extraction::ExtractionResult;
use crate::raster::{BinaryMask, PixelPoint};

pub use report::{render_csv, render_tables};
pub use stats::{mean, p_value_summary, pearson_stats, sample_std, PearsonStats};

pub const DICE_THRESHOLD: f64 = 0.6;
pub const OBJECT_ERROR_THRESHOLD_PX: f64 = 100.0;
pub const BUCKET_THRESHOLDS_MM: [f64; 4] = [5.0, 10.0, 15.0, 20.0];
pub const DEFAULT_SUITABLE_RANGE_MM: (f64, f64) = (20.0, 70.0);

/// Dice coefficient 2|A∩B| / (|A| + |B|).
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let total = a.count() + b.count();
    if total == 0 {
        return Err(Error::Undefined("dice of two empty masks"));
    }
    Ok(2.0 * a.intersection_count(b)? as f64 / total as f64)
}

/// Euclidean error in pixels and millimetres.
pub fn object_error(gt: PixelPoint, pred: PixelPoint, pixel_spacing_mm: f64) -> (f64, f64) {
    let px = gt.distance(pred);
    (px, px * pixel_spacing_mm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DetectionFlags {
    pub tp: bool,
    pub fp: bool,
    #[serde(rename = "fn")]
    pub fn_: bool,
}

/// TP when both objects exist and either the overlap or the point error
/// passes; a prediction that fails counts as FP, a missed truth as FN.
pub fn classify_detection(
    dice: Option<f64>,
    err_px: Option<f64>,
    gt_present: bool,
    pred_present: bool,
) -> DetectionFlags {
    let passes = dice.is_some_and(|d| d >= DICE_THRESHOLD)
        || err_px.is_some_and(|e| e <= OBJECT_ERROR_THRESHOLD_PX);
    let tp = gt_present && pred_present && passes;
    DetectionFlags {
        tp,
        fp: pred_present && !tp,
        fn_: gt_present && !tp,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl DetectionCounts {
    pub fn add(&mut self, flags: DetectionFlags) {
        self.tp += usize::from(flags.tp);
        self.fp += usize::from(flags.fp);
        self.fn_ += usize::from(flags.fn_);
    }

    pub fn recall(&self) -> Result<f64> {
        recall_precision(self.tp, self.fn_, self.fp).0
    }

    pub fn precision(&self) -> Result<f64> {
        recall_precision(self.tp, self.fn_, self.fp).1
    }
}

/// (recall, precision); each is `Undefined` when its denominator is zero.
pub fn recall_precision(tp: usize, fn_: usize, fp: usize) -> (Result<f64>, Result<f64>) {
    let ratio = |den: usize, what| {
        if den == 0 {
            Err(Error::Undefined(what))
        } else {
            Ok(tp as f64 / den as f64)
        }
    };
    (
        ratio(tp + fn_, "recall with no ground-truth objects"),
        ratio(tp + fp, "precision with no predictions"),
    )
}

/// |d1 - d2|, or `None` when either distance is missing.
pub fn distance_error(d1: Option<f64>, d2: Option<f64>) -> Option<f64> {
    Some((d1? - d2?).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suitability {
    Suitable,
    Unsuitable,
    Undetection,
}

impl Suitability {
    pub fn as_str(self) -> &'static str {
        match self {
            Suitability::Suitable => "suitable",
            Suitability::Unsuitable => "unsuitable",
            Suitability::Undetection => "undetection",
        }
    }
}

/// Inclusive range check; a missing distance is an undetection.
pub fn suitability(distance_mm: Option<f64>, range: (f64, f64)) -> Suitability {
    match distance_mm {
        None => Suitability::Undetection,
        Some(d) if d >= range.0 && d <= range.1 => Suitability::Suitable,
        Some(_) => Suitability::Unsuitable,
    }
}

/// Fraction of `errors` at or below each threshold.
pub fn bucket_distribution(errors: &[f64], thresholds: &[f64]) -> Result<Vec<f64>> {
    if errors.is_empty() {
        return Err(Error::Undefined("bucket distribution of no errors"));
    }
    let n = errors.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&t| errors.iter().filter(|&&e| e <= t).count() as f64 / n)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub suitable_range_mm: (f64, f64),
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            suitable_range_mm: DEFAULT_SUITABLE_RANGE_MM,
        }
    }
}

/// Per-object outcome for one image.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub dice: Option<f64>,
    pub object_error_px: Option<f64>,
    pub object_error_mm: Option<f64>,
    pub is_tp: bool,
    pub is_fp: bool,
    pub is_fn: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEvaluation {
    pub image_id: String,
    pub tip: MatchOutcome,
    pub carina: MatchOutcome,
    pub d1_mm: Option<f64>,
    pub d2_mm: Option<f64>,
    pub distance_error_mm: Option<f64>,
    /// `None` when the ground truth lacks one of the two objects.
    pub suitability_gt: Option<Suitability>,
    pub suitability_pred: Suitability,
}

fn outcome(
    gt_point: Option<PixelPoint>,
    pred_point: Option<PixelPoint>,
    gt_mask: Option<&BinaryMask>,
    pred_mask: Option<&BinaryMask>,
    spacing: f64,
) -> Result<MatchOutcome> {
    let dice = match (gt_mask, pred_mask) {
        (Some(g), Some(p)) => Some(dice(g, p)?),
        _ => None,
    };
    let err = match (gt_point, pred_point) {
        (Some(g), Some(p)) => Some(object_error(g, p, spacing)),
        _ => None,
    };
    let flags = classify_detection(dice, err.map(|e| e.0), gt_point.is_some(), pred_point.is_some());
    Ok(MatchOutcome {
        dice,
        object_error_px: err.map(|e| e.0),
        object_error_mm: err.map(|e| e.1),
        is_tp: flags.tp,
        is_fp: flags.fp,
        is_fn: flags.fn_,
    })
}

/// Scores one image. `detections` supplies the predicted masks for Dice;
/// without it only the point criterion applies.
pub fn evaluate_image(
    gt: &GroundTruthAnnotation,
    result: &ExtractionResult,
    detections: Option<&DetectionSet>,
    config: &EvalConfig,
) -> Result<ImageEvaluation> {
    let spacing = gt.pixel_spacing_mm;
    let gt_tip = gt.ett_points.as_ref().map(|_| derive_mp(gt)).transpose()?;
    let gt_carina = gt
        .bifurcation_points
        .as_ref()
        .map(|_| carina_gt_point(gt))
        .transpose()?;
    let (gt_tube_mask, gt_carina_mask) = gt_masks(gt)?;
    let selected = detections.map(select_max_score);
    let pred_tube = selected.and_then(|s| s.tube).and_then(|d| d.mask());
    let pred_carina = selected.and_then(|s| s.carina).and_then(|d| d.mask());

    let tip = outcome(gt_tip, result.tip, gt_tube_mask.as_ref(), pred_tube, spacing)?;
    let carina = outcome(gt_carina, result.carina, gt_carina_mask.as_ref(), pred_carina, spacing)?;

    let d1_mm = gt.reference_distance_mm();
    // recomputed from the points so results files cannot disagree with the GT spacing
    let d2_mm = match (result.tip, result.carina) {
        (Some(t), Some(c)) => Some(t.distance(c) * spacing),
        _ => None,
    };
    Ok(ImageEvaluation {
        image_id: gt.image_id.clone(),
        tip,
        carina,
        d1_mm,
        d2_mm,
        distance_error_mm: distance_error(d1_mm, d2_mm),
        suitability_gt: d1_mm.map(|d| suitability(Some(d), config.suitable_range_mm)),
        suitability_pred: suitability(d2_mm, config.suitable_range_mm),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub count: usize,
    pub mean_mm: Option<f64>,
    pub std_mm: Option<f64>,
    /// Fractions at or below 5, 10, 15 and 20 mm.
    pub buckets: Option<[f64; 4]>,
}

impl ErrorSummary {
    fn from_errors(errors: &[f64]) -> Self {
        let buckets = bucket_distribution(errors, &BUCKET_THRESHOLDS_MM)
            .ok()
            .map(|b| [b[0], b[1], b[2], b[3]]);
        Self {
            count: errors.len(),
            mean_mm: mean(errors),
            std_mm: sample_std(errors),
            buckets,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectReport {
    pub counts: DetectionCounts,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    /// Over every image where both the true and the predicted point exist.
    pub object_error: ErrorSummary,
}

/// Rows: predicted suitable / unsuitable / undetection. Columns: GT
/// suitable / unsuitable.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub cells: [[usize; 2]; 3],
    /// Images whose ground truth lacks a distance; kept out of the cells.
    pub gt_unavailable: usize,
}

impl ConfusionMatrix {
    pub fn add(&mut self, gt: Option<Suitability>, pred: Suitability) {
        let col = match gt {
            Some(Suitability::Suitable) => 0,
            Some(Suitability::Unsuitable) => 1,
            _ => {
                self.gt_unavailable += 1;
                return;
            }
        };
        let row = match pred {
            Suitability::Suitable => 0,
            Suitability::Unsuitable => 1,
            Suitability::Undetection => 2,
        };
        self.cells[row][col] += 1;
    }

    pub fn total(&self) -> usize {
        self.cells.iter().flatten().sum::<usize>() + self.gt_unavailable
    }

    /// Images where predicted and true suitability agree.
    pub fn agreement(&self) -> usize {
        self.cells[0][0] + self.cells[1][1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub n_pairs: usize,
    pub n_total: usize,
    pub stats: Option<PearsonStats>,
    /// Why `stats` is missing.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub image_count: usize,
    pub suitable_range_mm: [f64; 2],
    pub tip: ObjectReport,
    pub carina: ObjectReport,
    pub distance_error: ErrorSummary,
    pub confusion: ConfusionMatrix,
    pub correlation: CorrelationReport,
    pub images: Vec<ImageEvaluation>,
}

fn object_report<'a>(outcomes: impl Iterator<Item = &'a MatchOutcome>) -> ObjectReport {
    let mut counts = DetectionCounts::default();
    let mut errors = Vec::new();
    for o in outcomes {
        counts.add(DetectionFlags {
            tp: o.is_tp,
            fp: o.is_fp,
            fn_: o.is_fn,
        });
        errors.extend(o.object_error_mm);
    }
    ObjectReport {
        counts,
        recall: counts.recall().ok(),
        precision: counts.precision().ok(),
        object_error: ErrorSummary::from_errors(&errors),
    }
}

/// Folds per-image rows into the report. Rows are sorted by image id first,
/// so the result does not depend on the order they were computed in.
pub fn aggregate(mut images: Vec<ImageEvaluation>, config: &EvalConfig) -> EvaluationReport {
    images.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    let distance_errors: Vec<f64> = images.iter().filter_map(|i| i.distance_error_mm).collect();
    let mut confusion = ConfusionMatrix::default();
    for i in &images {
        confusion.add(i.suitability_gt, i.suitability_pred);
    }
    let pairs: Vec<(f64, f64)> = images
        .iter()
        .filter_map(|i| Some((i.d1_mm?, i.d2_mm?)))
        .collect();
    let (stats, note) = match pearson_stats(&pairs) {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    EvaluationReport {
        image_count: images.len(),
        suitable_range_mm: [config.suitable_range_mm.0, config.suitable_range_mm.1],
        tip: object_report(images.iter().map(|i| &i.tip)),
        carina: object_report(images.iter().map(|i| &i.carina)),
        distance_error: ErrorSummary::from_errors(&distance_errors),
        confusion,
        correlation: CorrelationReport {
            n_pairs: pairs.len(),
            n_total: images.len(),
            stats,
            note,
        },
        images,
    }
}

fn duplicates<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    ids.filter(|id| !seen.insert(*id)).map(str::to_string).collect()
}

/// Checks that ground truth and results cover the same image ids, each once.
pub fn check_alignment(gt: &[GroundTruthAnnotation], results: &[ExtractionResult]) -> Result<()> {
    let gt_ids: BTreeSet<&str> = gt.iter().map(|a| a.image_id.as_str()).collect();
    let res_ids: BTreeSet<&str> = results.iter().map(|r| r.image_id.as_str()).collect();
    let mut offenders: Vec<String> = gt_ids
        .symmetric_difference(&res_ids)
        .map(|s| s.to_string())
        .collect();
    offenders.extend(duplicates(gt.iter().map(|a| a.image_id.as_str())));
    offenders.extend(duplicates(results.iter().map(|r| r.image_id.as_str())));
    offenders.sort();
    offenders.dedup();
    if offenders.is_empty() {
        Ok(())
    } else {
        Err(Error::UnmatchedImages(offenders))
    }
}

/// Scores every image and aggregates. Detection sets are optional per image
/// and only feed the Dice criterion.
pub fn evaluate(
    gt: &[GroundTruthAnnotation],
    results: &[ExtractionResult],
    detections: &[DetectionSet],
    config: &EvalConfig,
) -> Result<EvaluationReport> {
    check_alignment(gt, results)?;
    let by_id: BTreeMap<&str, &ExtractionResult> =
        results.iter().map(|r| (r.image_id.as_str(), r)).collect();
    let dets: BTreeMap<&str, &DetectionSet> =
        detections.iter().map(|d| (d.image_id.as_str(), d)).collect();
    let images = gt
        .iter()
        .map(|a| {
            let id = a.image_id.as_str();
            evaluate_image(a, by_id[id], dets.get(id).copied(), config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(images, config))
}
