use super::{BinaryMask, PixelPoint, WindowSpec};
use crate::error::Result;

/// Summed-area table with a zero guard row and column.
struct Integral {
    width: usize,
    height: usize,
    sums: Vec<u32>,
}

impl Integral {
    fn new(mask: &BinaryMask) -> Self {
        let (w, h) = mask.dimensions();
        let stride = w + 1;
        let mut sums = vec![0u32; stride * (h + 1)];
        for y in 0..h {
            let mut row = 0u32;
            for x in 0..w {
                row += u32::from(mask.get(x, y));
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
            }
        }
        Self {
            width: w,
            height: h,
            sums,
        }
    }

    /// Count over the window centred at `(x, y)`, clipped to the raster.
    fn window(&self, x: usize, y: usize, window: WindowSpec) -> u32 {
        let x0 = x.saturating_sub(window.half_width());
        let y0 = y.saturating_sub(window.half_height());
        let x1 = (x + window.half_width() + 1).min(self.width);
        let y1 = (y + window.half_height() + 1).min(self.height);
        let s = self.width + 1;
        self.sums[y1 * s + x1] + self.sums[y0 * s + x0]
            - self.sums[y0 * s + x1]
            - self.sums[y1 * s + x0]
    }
}

/// Number of `weights` pixels inside `window` centred on `center`.
pub fn window_density(weights: &BinaryMask, center: PixelPoint, window: WindowSpec) -> u32 {
    Integral::new(weights).window(center.x as usize, center.y as usize, window)
}

/// Candidate pixel whose window holds the most `weights` pixels. Ties go to
/// the smallest `y`, then the smallest `x`.
pub fn densest_window_center(
    candidates: &BinaryMask,
    weights: &BinaryMask,
    window: WindowSpec,
) -> Result<PixelPoint> {
    candidates.ensure_nonempty()?;
    candidates.ensure_same_dims(weights)?;
    let table = Integral::new(weights);
    let mut best: Option<(u32, PixelPoint)> = None;
    // row-major scan visits ties in (y, x) order, so strict `>` keeps the first
    for p in candidates.foreground() {
        let count = table.window(p.x as usize, p.y as usize, window);
        if best.is_none_or(|(c, _)| count > c) {
            best = Some((count, p));
        }
    }
    Ok(best.expect("nonempty candidates").1)
}

/// Like [`densest_window_center`], but density ties are broken by distance to
/// `anchor` (nearest first), then by smallest `y`, then smallest `x`.
pub fn densest_window_center_near(
    candidates: &BinaryMask,
    weights: &BinaryMask,
    window: WindowSpec,
    anchor: PixelPoint,
) -> Result<PixelPoint> {
    candidates.ensure_nonempty()?;
    candidates.ensure_same_dims(weights)?;
    let table = Integral::new(weights);
    let mut best: Option<(u32, i64, PixelPoint)> = None;
    for p in candidates.foreground() {
        let count = table.window(p.x as usize, p.y as usize, window);
        let dist = p.distance_sq(anchor);
        let better = match best {
            None => true,
            Some((c, d, _)) => count > c || (count == c && dist < d),
        };
        if better {
            best = Some((count, dist, p));
        }
    }
    Ok(best.expect("nonempty candidates").2)
}

/// Crops a `patch_w x patch_h` sub-raster centred on `center`. The patch is
/// shifted to stay inside the image (and shrunk if the image is smaller than
/// the patch). Returns the patch and its top-left offset in image coordinates.
pub fn crop_patch(
    mask: &BinaryMask,
    center: PixelPoint,
    patch_w: usize,
    patch_h: usize,
) -> (BinaryMask, PixelPoint) {
    let w = patch_w.min(mask.width());
    let h = patch_h.min(mask.height());
    let ox = (i64::from(center.x) - (w / 2) as i64).clamp(0, (mask.width() - w) as i64);
    let oy = (i64::from(center.y) - (h / 2) as i64).clamp(0, (mask.height() - h) as i64);
    let offset = PixelPoint::new(ox as i32, oy as i32);
    (mask.sub_mask(offset, w, h), offset)
}

/// Foreground pixel with the largest `y`; ties go to the smallest `x`.
pub fn lowest_skeleton_point(skeleton: &BinaryMask) -> Result<PixelPoint> {
    skeleton.ensure_nonempty()?;
    let (w, h) = skeleton.dimensions();
    for y in (0..h).rev() {
        if let Some(x) = (0..w).find(|&x| skeleton.get(x, y)) {
            return Ok(PixelPoint::new(x as i32, y as i32));
        }
    }
    unreachable!("nonempty skeleton")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn plus(size: usize, c: usize, arm: usize) -> BinaryMask {
        BinaryMask::from_fn(size, size, |x, y| {
            (x == c && y.abs_diff(c) <= arm) || (y == c && x.abs_diff(c) <= arm)
        })
    }

    #[test]
    fn plus_center_is_densest() {
        let m = plus(31, 15, 7);
        let p = densest_window_center(&m, &m, WindowSpec::square(15)).unwrap();
        assert_eq!(p, PixelPoint::new(15, 15));
        // with 5-pixel arms the whole plus fits in the window from several
        // centres; the tie goes to the topmost one
        let m = plus(31, 15, 5);
        let p = densest_window_center(&m, &m, WindowSpec::square(15)).unwrap();
        assert_eq!(p, PixelPoint::new(15, 13));
        let p = densest_window_center_near(&m, &m, WindowSpec::square(15), PixelPoint::new(15, 15))
            .unwrap();
        assert_eq!(p, PixelPoint::new(15, 15));
    }

    #[test]
    fn ties_prefer_smallest_y_then_x() {
        let mut m = BinaryMask::new(12, 12);
        m.set(3, 7, true);
        m.set(3, 3, true);
        let p = densest_window_center(&m, &m, WindowSpec::square(3)).unwrap();
        assert_eq!(p, PixelPoint::new(3, 3));

        let mut m = BinaryMask::new(12, 12);
        m.set(8, 3, true);
        m.set(3, 3, true);
        let p = densest_window_center(&m, &m, WindowSpec::square(3)).unwrap();
        assert_eq!(p, PixelPoint::new(3, 3));
    }

    #[test]
    fn anchor_breaks_density_ties() {
        let m = BinaryMask::from_fn(20, 3, |_, y| y == 1);
        let p = densest_window_center_near(&m, &m, WindowSpec::square(3), PixelPoint::new(12, 0))
            .unwrap();
        assert_eq!(p, PixelPoint::new(12, 1));
    }

    #[test]
    fn empty_candidates_error() {
        let m = BinaryMask::new(5, 5);
        assert!(matches!(
            densest_window_center(&m, &m, WindowSpec::square(3)),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn crop_offsets_clamp_to_image() {
        let m = BinaryMask::new(500, 500);
        assert_eq!(crop_patch(&m, PixelPoint::new(250, 250), 100, 150).1, PixelPoint::new(200, 175));
        assert_eq!(crop_patch(&m, PixelPoint::new(10, 10), 100, 150).1, PixelPoint::new(0, 0));
        let (patch, off) = crop_patch(&m, PixelPoint::new(499, 499), 100, 150);
        assert_eq!(off, PixelPoint::new(400, 350));
        assert_eq!(patch.dimensions(), (100, 150));
    }

    #[test]
    fn crop_shrinks_for_small_images() {
        let m = BinaryMask::new(40, 60);
        let (patch, off) = crop_patch(&m, PixelPoint::new(20, 30), 100, 150);
        assert_eq!(patch.dimensions(), (40, 60));
        assert_eq!(off, PixelPoint::new(0, 0));
    }

    #[test]
    fn lowest_point() {
        let line = BinaryMask::from_fn(10, 31, |x, _| x == 5);
        assert_eq!(lowest_skeleton_point(&line).unwrap(), PixelPoint::new(5, 30));
        let row = BinaryMask::from_fn(10, 10, |x, y| y == 9 && (2..=4).contains(&x));
        assert_eq!(lowest_skeleton_point(&row).unwrap(), PixelPoint::new(2, 9));
        // L shape: vertical arm at x=2, foot running right along y=8
        let l = BinaryMask::from_fn(10, 10, |x, y| (x == 2 && y <= 8) || (y == 8 && (2..=7).contains(&x)));
        assert_eq!(lowest_skeleton_point(&l).unwrap(), PixelPoint::new(2, 8));
    }
}
