use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use rayon::prelude::*;

use ettc_core::annotation::{
    load_annotations, load_detections, read_json_records, save_annotations, save_detections,
    select_max_score, write_json, DetectionSet, GroundTruthAnnotation,
};
use ettc_core::extraction::{extract as extract_one, ExtractionResult, FusionConfig};
use ettc_core::fixtures::{generate_cohort, ErrorProfile};
use ettc_core::metrics::{aggregate, check_alignment, evaluate_image, render_csv, render_tables, EvalConfig};
use ettc_core::raster::BinaryMask;
use ettc_core::render::{render_overlay, write_overlay};

use crate::{Common, EvaluateArgs, ExtractArgs, GenArgs, RenderArgs};

pub const EXTRACTIONS_FILE: &str = "extractions.json";
pub const REPORT_FILE: &str = "report.json";
pub const TABLES_FILE: &str = "tables.txt";
pub const CSV_FILE: &str = "per_image.csv";
pub const ANNOTATIONS_FILE: &str = "annotations.json";
pub const DETECTIONS_FILE: &str = "detections.json";
pub const MANIFEST_FILE: &str = "manifest.json";

fn annotations(path: &Path, common: &Common) -> Result<Vec<GroundTruthAnnotation>> {
    let mut anns = load_annotations(path)?;
    if let Some(s) = common.pixel_spacing {
        if !(s.is_finite() && s > 0.0) {
            bail!("--pixel-spacing must be positive");
        }
        for a in &mut anns {
            a.pixel_spacing_mm = s;
        }
    }
    Ok(anns)
}

fn image_sizes(anns: &[GroundTruthAnnotation]) -> BTreeMap<String, (usize, usize)> {
    anns.iter()
        .map(|a| (a.image_id.clone(), (a.image_width, a.image_height)))
        .collect()
}

fn detections_for(path: &Path, anns: &[GroundTruthAnnotation]) -> Result<Vec<DetectionSet>> {
    Ok(load_detections(path, Some(&image_sizes(anns)))?)
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn extract(args: &ExtractArgs) -> Result<()> {
    let anns = annotations(&args.annotations, &args.common)?;
    let sets = detections_for(&args.detections, &anns)?;
    let config = FusionConfig {
        carina_threshold_px: args.fusion_threshold,
    };
    let spacing: BTreeMap<&str, f64> = anns
        .iter()
        .map(|a| (a.image_id.as_str(), a.pixel_spacing_mm))
        .collect();
    // sets come back sorted by image id and collect() keeps that order
    let results: Vec<ExtractionResult> = sets
        .par_iter()
        .map(|s| extract_one(s, spacing[s.image_id.as_str()], &config))
        .collect();
    for r in &results {
        if r.carina_mask_fallback {
            warn!("{}: carina edge patch empty, using skeleton centre", r.image_id);
        }
    }
    out_dir(&args.out)?;
    write_json(&args.out.join(EXTRACTIONS_FILE), &results)?;
    info!("wrote {} extraction records", results.len());
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let anns = annotations(&args.annotations, &args.common)?;
    let results: Vec<ExtractionResult> = read_json_records(&args.extractions)?;
    check_alignment(&anns, &results)?;
    let sets = match &args.detections {
        Some(p) => detections_for(p, &anns)?,
        None => Vec::new(),
    };
    let by_id: BTreeMap<&str, &ExtractionResult> =
        results.iter().map(|r| (r.image_id.as_str(), r)).collect();
    let dets: BTreeMap<&str, &DetectionSet> = sets.iter().map(|d| (d.image_id.as_str(), d)).collect();
    let config = EvalConfig {
        suitable_range_mm: args.suitable_range,
    };
    let images = anns
        .par_iter()
        .map(|a| {
            let id = a.image_id.as_str();
            evaluate_image(a, by_id[id], dets.get(id).copied(), &config)
        })
        .collect::<ettc_core::Result<Vec<_>>>()?;
    let report = aggregate(images, &config);

    out_dir(&args.out)?;
    write_json(&args.out.join(REPORT_FILE), &report)?;
    write_text(&args.out.join(TABLES_FILE), &render_tables(&report))?;
    write_text(&args.out.join(CSV_FILE), &render_csv(&report))?;
    info!("evaluated {} images", report.image_count);
    Ok(())
}

pub fn gen_fixtures(args: &GenArgs) -> Result<()> {
    let profile = match args.profile.as_str() {
        "planted" => ErrorProfile::planted(),
        "perfect" => ErrorProfile::perfect(),
        other => bail!("unknown profile `{other}` (expected `planted` or `perfect`)"),
    };
    let cohort = generate_cohort(args.count, args.seed, &profile)?;
    out_dir(&args.out)?;
    save_annotations(&args.out.join(ANNOTATIONS_FILE), &cohort.annotations)?;
    save_detections(&args.out.join(DETECTIONS_FILE), &cohort.detections)?;
    write_json(&args.out.join(MANIFEST_FILE), &cohort.manifest)?;
    info!("wrote {} fixtures", args.count);
    Ok(())
}

/// File stem for an image id, with anything path-like replaced.
pub fn file_stem(image_id: &str) -> String {
    image_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

fn background(dir: Option<&PathBuf>, image_id: &str) -> Result<Option<image::GrayImage>> {
    let Some(dir) = dir else { return Ok(None) };
    let path = dir.join(format!("{}.png", file_stem(image_id)));
    if !path.exists() {
        return Ok(None);
    }
    let img = image::open(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Some(img.into_luma8()))
}

pub fn render(args: &RenderArgs) -> Result<()> {
    let anns = annotations(&args.annotations, &args.common)?;
    let results: Vec<ExtractionResult> = match &args.extractions {
        Some(p) => read_json_records(p)?,
        None => Vec::new(),
    };
    let sets = match &args.detections {
        Some(p) => detections_for(p, &anns)?,
        None => Vec::new(),
    };
    let by_id: BTreeMap<&str, &ExtractionResult> =
        results.iter().map(|r| (r.image_id.as_str(), r)).collect();
    let dets: BTreeMap<&str, &DetectionSet> = sets.iter().map(|d| (d.image_id.as_str(), d)).collect();
    out_dir(&args.out)?;
    anns.par_iter().try_for_each(|a| -> Result<()> {
        let id = a.image_id.as_str();
        let bg = background(args.images.as_ref(), id)?;
        let masks: Vec<&BinaryMask> = dets
            .get(id)
            .map(|s| {
                let sel = select_max_score(s);
                [sel.tube, sel.carina]
                    .into_iter()
                    .flatten()
                    .filter_map(|d| d.mask())
                    .collect()
            })
            .unwrap_or_default();
        let overlay = render_overlay(a, by_id.get(id).copied(), bg.as_ref(), &masks)
            .with_context(|| format!("rendering {id}"))?;
        let path = args.out.join(format!("{}.png", file_stem(id)));
        write_overlay(&overlay, &path).with_context(|| format!("writing {}", path.display()))
    })?;
    info!("rendered {} overlays", anns.len());
    Ok(())
}
