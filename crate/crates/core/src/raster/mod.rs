//! Binary raster primitives used by the extraction pipeline.
//!
//! Coordinates follow the usual image convention: the origin is the top-left
//! pixel, `x` grows to the right and `y` grows downward, so the "lowest" pixel
//! of a shape is the one with the largest `y`.

mod edges;
mod polygon;
mod rle;
mod skeleton;
mod window;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use edges::{edge_pixels, edge_pixels_default, CANNY_HIGH, CANNY_LOW};
pub use polygon::{fill_polygon, polygon_area2, polygon_boundary_points};
pub use rle::{decode_rle, encode_rle};
pub use skeleton::skeletonize;
pub use window::{
    crop_patch, densest_window_center, densest_window_center_near, lowest_skeleton_point,
    window_density,
};

/// Integer pixel coordinate. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct PixelPoint {
    pub x: i32,
    pub y: i32,
}

impl PixelPoint {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    /// Euclidean distance in pixels.
    pub fn distance(self, other: PixelPoint) -> f64 {
        let dx = f64::from(self.x - other.x);
        let dy = f64::from(self.y - other.y);
        dx.hypot(dy)
    }

    pub(crate) fn distance_sq(self, other: PixelPoint) -> i64 {
        let dx = i64::from(self.x - other.x);
        let dy = i64::from(self.y - other.y);
        dx * dx + dy * dy
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }
}

impl From<[i32; 2]> for PixelPoint {
    fn from([x, y]: [i32; 2]) -> Self {
        Self { x, y }
    }
}

impl From<PixelPoint> for [i32; 2] {
    fn from(p: PixelPoint) -> Self {
        [p.x, p.y]
    }
}

/// Rectangular scan window with odd side lengths so a center pixel exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    width: usize,
    height: usize,
}

impl WindowSpec {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width.is_multiple_of(2) || height.is_multiple_of(2) {
            return Err(Error::InvalidWindow { width, height });
        }
        Ok(Self { width, height })
    }

    pub const fn square(side: usize) -> Self {
        assert!(side % 2 == 1, "window side must be odd");
        Self {
            width: side,
            height: side,
        }
    }

    pub fn width(self) -> usize {
        self.width
    }

    pub fn height(self) -> usize {
        self.height
    }

    pub(crate) fn half_width(self) -> usize {
        self.width / 2
    }

    pub(crate) fn half_height(self) -> usize {
        self.height / 2
    }
}

/// Row-major boolean raster.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl std::fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("foreground", &self.count())
            .finish()
    }
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::RleLength {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Builds a mask from ASCII art rows; `#`, `1` and `*` are foreground.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        Self::from_fn(width, height, |x, y| {
            matches!(rows[y].as_bytes().get(x), Some(b'#' | b'1' | b'*'))
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    /// Out-of-bounds reads are background.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return false;
        }
        self.pixels[y as usize * self.width + x as usize]
    }

    pub fn at(&self, p: PixelPoint) -> bool {
        self.get_signed(i64::from(p.x), i64::from(p.y))
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.pixels[y * self.width + x] = value;
    }

    /// Sets a pixel if it lies inside the raster; returns whether it did.
    pub fn set_point(&mut self, p: PixelPoint, value: bool) -> bool {
        if self.contains(p) {
            self.set(p.x as usize, p.y as usize, value);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, p: PixelPoint) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as usize) < self.width && (p.y as usize) < self.height
    }

    pub fn count(&self) -> usize {
        self.pixels.iter().filter(|&&v| v).count()
    }

    pub fn has_foreground(&self) -> bool {
        self.pixels.iter().any(|&v| v)
    }

    /// Foreground pixels in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = PixelPoint> + '_ {
        let w = self.width;
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(i, _)| PixelPoint::new((i % w) as i32, (i / w) as i32))
    }

    pub fn ensure_nonempty(&self) -> Result<()> {
        if self.has_foreground() {
            Ok(())
        } else {
            Err(Error::EmptyMask)
        }
    }

    pub fn ensure_same_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.dimensions() == other.dimensions() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            })
        }
    }

    pub fn intersection_count(&self, other: &BinaryMask) -> Result<usize> {
        self.ensure_same_dims(other)?;
        Ok(self
            .pixels
            .iter()
            .zip(&other.pixels)
            .filter(|(&a, &b)| a && b)
            .count())
    }

    /// In-place union with another mask of the same size.
    pub fn union_with(&mut self, other: &BinaryMask) -> Result<()> {
        self.ensure_same_dims(other)?;
        for (a, &b) in self.pixels.iter_mut().zip(&other.pixels) {
            *a |= b;
        }
        Ok(())
    }

    /// Copy shifted by `(dx, dy)`; pixels leaving the raster are dropped.
    pub fn translated(&self, dx: i32, dy: i32) -> BinaryMask {
        let mut out = BinaryMask::new(self.width, self.height);
        for p in self.foreground() {
            out.set_point(p.offset(dx, dy), true);
        }
        out
    }

    /// Sub-raster of `width x height` starting at `origin`. The region must lie
    /// inside this mask.
    pub fn sub_mask(&self, origin: PixelPoint, width: usize, height: usize) -> BinaryMask {
        let (ox, oy) = (origin.x as usize, origin.y as usize);
        debug_assert!(ox + width <= self.width && oy + height <= self.height);
        BinaryMask::from_fn(width, height, |x, y| self.get(ox + x, oy + y))
    }

    /// 0/255 grayscale rendering.
    pub fn to_gray(&self) -> image::GrayImage {
        image::GrayImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            image::Luma([if self.get(x as usize, y as usize) { 255 } else { 0 }])
        })
    }

    /// Any nonzero intensity is foreground.
    pub fn from_gray(img: &image::GrayImage) -> Self {
        let (w, h) = img.dimensions();
        Self::from_fn(w as usize, h as usize, |x, y| {
            img.get_pixel(x as u32, y as u32).0[0] != 0
        })
    }

    /// Loads an 8-bit single-channel PNG (other formats are converted to luma).
    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_gray(&img.into_luma8()))
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        self.to_gray().save(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_must_be_odd() {
        assert!(WindowSpec::new(15, 15).is_ok());
        assert!(WindowSpec::new(100, 151).is_err());
        assert!(WindowSpec::new(0, 7).is_err());
    }

    #[test]
    fn out_of_bounds_reads_are_background() {
        let m = BinaryMask::from_fn(3, 3, |_, _| true);
        assert!(m.get_signed(0, 0));
        assert!(!m.get_signed(-1, 0));
        assert!(!m.get_signed(3, 2));
    }

    #[test]
    fn point_serializes_as_pair() {
        let p = PixelPoint::new(3, -4);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[3,-4]");
        let back: PixelPoint = serde_json::from_str("[3,-4]").unwrap();
        assert_eq!(back, p);
        assert_eq!(PixelPoint::new(0, 0).distance(PixelPoint::new(3, 4)), 5.0);
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let m = BinaryMask::from_ascii(&["#..", ".#.", "..#", "###"]);
        m.save_png(&path).unwrap();
        assert_eq!(BinaryMask::load_png(&path).unwrap(), m);
    }
}
