//! Edge extraction for binary masks.
//!
//! The mask is rendered as a 0/255 intensity image and the gradient at each
//! pixel is taken as the 3x3 morphological gradient (max - min), which is
//! exact on a step image: it is 255 on every pixel that touches the other
//! phase through any of its eight neighbours and 0 elsewhere. The gradient is
//! then passed through Canny's double threshold with hysteresis, and edges are
//! kept on the foreground side only. On a binary input the result is the
//! inner 8-connected boundary for any pair of thresholds in (0, 255).

use super::BinaryMask;
use crate::error::{Error, Result};

pub const CANNY_LOW: u8 = 50;
pub const CANNY_HIGH: u8 = 150;

fn gradient(mask: &BinaryMask) -> Vec<u8> {
    let (w, h) = mask.dimensions();
    let intensity = |x: i64, y: i64| -> u8 {
        // Pixels outside the raster replicate the border, so the image frame
        // itself does not create edges.
        let cx = x.clamp(0, w as i64 - 1);
        let cy = y.clamp(0, h as i64 - 1);
        if mask.get(cx as usize, cy as usize) {
            255
        } else {
            0
        }
    };
    let mut out = vec![0u8; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let (mut lo, mut hi) = (u8::MAX, u8::MIN);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let v = intensity(x + dx, y + dy);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            out[y as usize * w + x as usize] = hi - lo;
        }
    }
    out
}

/// Edge pixels of a binary mask: foreground pixels with at least one
/// background 8-neighbour, obtained through a thresholded gradient with
/// hysteresis.
pub fn edge_pixels(mask: &BinaryMask, low_threshold: u8, high_threshold: u8) -> Result<BinaryMask> {
    if low_threshold >= high_threshold {
        return Err(Error::InvalidThresholds {
            low: low_threshold,
            high: high_threshold,
        });
    }
    mask.ensure_nonempty()?;
    let (w, h) = mask.dimensions();
    let grad = gradient(mask);

    let mut edges = BinaryMask::new(w, h);
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) && grad[y * w + x] >= high_threshold {
                edges.set(x, y, true);
                stack.push((x, y));
            }
        }
    }
    // hysteresis: weak pixels survive when 8-connected to a strong one
    while let Some((x, y)) = stack.pop() {
        for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
            for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                if !edges.get(nx, ny) && mask.get(nx, ny) && grad[ny * w + nx] >= low_threshold {
                    edges.set(nx, ny, true);
                    stack.push((nx, ny));
                }
            }
        }
    }
    Ok(edges)
}

pub fn edge_pixels_default(mask: &BinaryMask) -> Result<BinaryMask> {
    edge_pixels(mask, CANNY_LOW, CANNY_HIGH)
}
