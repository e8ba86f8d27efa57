//! Annotated overlays: ground-truth outlines and feature points in yellow,
//! predicted feature points in red.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::{GrayImage, Rgb, RgbImage};

use crate::annotation::{carina_gt_point, derive_mp, GroundTruthAnnotation};
use crate::error::{Error, Result};
use crate::extraction::{ExtractionResult, PointSource};
use crate::raster::{polygon_boundary_points, BinaryMask, PixelPoint};

pub const YELLOW: Rgb<u8> = Rgb([255, 255, 0]);
pub const RED: Rgb<u8> = Rgb([255, 0, 0]);
const SILHOUETTE: Rgb<u8> = Rgb([96, 96, 96]);
/// Arm length of the asterisk glyph.
pub const GLYPH_RADIUS: i32 = 4;
/// PNG text key holding the legend.
pub const LEGEND_KEY: &str = "Legend";

#[derive(Debug, Clone)]
pub struct Overlay {
    pub image: RgbImage,
    pub legend: Vec<String>,
}

/// Pixels of an eight-armed asterisk centred on `p`.
pub fn asterisk_pixels(p: PixelPoint) -> Vec<PixelPoint> {
    let mut out = vec![p];
    for k in 1..=GLYPH_RADIUS {
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)] {
            out.push(p.offset(dx * k, dy * k));
        }
    }
    out
}

fn put(img: &mut RgbImage, p: PixelPoint, color: Rgb<u8>) {
    if p.x >= 0 && p.y >= 0 && (p.x as u32) < img.width() && (p.y as u32) < img.height() {
        img.put_pixel(p.x as u32, p.y as u32, color);
    }
}

fn source_label(source: PointSource) -> &'static str {
    match source {
        PointSource::Box => "box",
        PointSource::Mask => "mask",
        PointSource::None => "none",
    }
}

/// Draws one overlay. Without a background the predicted masks (or, if
/// none are given, the ground-truth region) are drawn as a gray silhouette.
/// `result` may be absent for a ground-truth-only rendering.
pub fn render_overlay(
    gt: &GroundTruthAnnotation,
    result: Option<&ExtractionResult>,
    background: Option<&GrayImage>,
    silhouette: &[&BinaryMask],
) -> Result<Overlay> {
    let (w, h) = (gt.image_width, gt.image_height);
    let mut img = match background {
        Some(bg) => {
            let (bw, bh) = bg.dimensions();
            if (bw as usize, bh as usize) != (w, h) {
                return Err(Error::DimensionMismatch {
                    left_w: w,
                    left_h: h,
                    right_w: bw as usize,
                    right_h: bh as usize,
                });
            }
            RgbImage::from_fn(bw, bh, |x, y| {
                let v = bg.get_pixel(x, y).0[0];
                Rgb([v, v, v])
            })
        }
        None => {
            let mut img = RgbImage::new(w as u32, h as u32);
            for m in silhouette {
                m.ensure_same_dims(&BinaryMask::new(w, h))?;
                for p in m.foreground() {
                    put(&mut img, p, SILHOUETTE);
                }
            }
            img
        }
    };

    let mut legend = vec![
        "yellow line: ground truth".to_string(),
        "yellow asterisk: ground-truth feature point".to_string(),
        "red asterisk: predicted feature point".to_string(),
    ];

    for outline in [&gt.ett_points, &gt.bifurcation_points].into_iter().flatten() {
        for p in polygon_boundary_points(outline) {
            put(&mut img, p, YELLOW);
        }
    }
    let gt_points = [
        gt.ett_points.as_ref().map(|_| derive_mp(gt)).transpose()?,
        gt.bifurcation_points
            .as_ref()
            .map(|_| carina_gt_point(gt))
            .transpose()?,
    ];
    for p in gt_points.into_iter().flatten() {
        for q in asterisk_pixels(p) {
            put(&mut img, q, YELLOW);
        }
    }

    match result {
        Some(r) => {
            for (name, point, source) in [("tip", r.tip, r.tip_source), ("carina", r.carina, r.carina_source)] {
                match point {
                    Some(p) => {
                        for q in asterisk_pixels(p) {
                            put(&mut img, q, RED);
                        }
                        legend.push(format!("{name}: predicted at [{}, {}] from {}", p.x, p.y, source_label(source)));
                    }
                    None => legend.push(format!("{name}: undetected")),
                }
            }
            if r.carina_mask_fallback {
                legend.push("carina: mask point fell back to the skeleton centre".to_string());
            }
        }
        None => legend.push("ground truth only".to_string()),
    }
    Ok(Overlay { image: img, legend })
}

/// Writes the overlay as RGB PNG with the legend in a text chunk.
pub fn write_overlay(overlay: &Overlay, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), overlay.image.width(), overlay.image.height());
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    enc.add_text_chunk(LEGEND_KEY.to_string(), overlay.legend.join("\n"))?;
    let mut writer = enc.write_header()?;
    writer.write_image_data(overlay.image.as_raw())?;
    writer.finish()?;
    Ok(())
}

/// Reads back the legend lines of an overlay PNG.
pub fn read_legend(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(std::io::BufReader::new(file));
    decoder.set_ignore_text_chunk(false);
    let reader = decoder
        .read_info()
        .map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
    Ok(reader
        .info()
        .uncompressed_latin1_text
        .iter()
        .find(|t| t.keyword == LEGEND_KEY)
        .map(|t| t.text.lines().map(str::to_string).collect())
        .unwrap_or_default())
}
