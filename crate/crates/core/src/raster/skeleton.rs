//! Zhang-Suen thinning.
//!
//! Each sub-iteration marks deletion candidates against a snapshot of the
//! raster, as in the classic algorithm. Candidates are then removed one by one
//! and re-checked against the live raster, so a pixel is only removed while it
//! is still a simple point (A = 1, 2 <= B <= 6). The re-check keeps 2x2 blocks
//! and two-pixel-thick diagonals from vanishing, which the plain parallel
//! update does.

use super::BinaryMask;
use crate::error::Result;

/// Neighbours P2..P9, clockwise starting north.
const RING: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

fn ring(mask: &BinaryMask, x: usize, y: usize) -> [bool; 8] {
    let (x, y) = (x as i64, y as i64);
    RING.map(|(dx, dy)| mask.get_signed(x + dx, y + dy))
}

/// Number of foreground neighbours (B) and background-to-foreground
/// transitions around the ring (A).
fn counts(n: &[bool; 8]) -> (usize, usize) {
    let b = n.iter().filter(|&&v| v).count();
    let a = (0..8).filter(|&i| !n[i] && n[(i + 1) % 8]).count();
    (b, a)
}

fn is_simple(n: &[bool; 8]) -> bool {
    let (b, a) = counts(n);
    (2..=6).contains(&b) && a == 1
}

/// Live re-check for a marked candidate. Earlier removals in the same pass
/// may have turned it into an end point (B = 1), which can still go; it must
/// stay a simple point with a background 4-neighbour (A = 1, B <= 6).
fn still_removable(n: &[bool; 8]) -> bool {
    let (b, a) = counts(n);
    b <= 6 && a == 1
}

/// Inclusive bounding box of the foreground as `(x0, y0, x1, y1)`.
fn bounds(mask: &BinaryMask) -> (usize, usize, usize, usize) {
    let mut b = (usize::MAX, usize::MAX, 0, 0);
    for p in mask.foreground() {
        let (x, y) = (p.x as usize, p.y as usize);
        b = (b.0.min(x), b.1.min(y), b.2.max(x), b.3.max(y));
    }
    b
}

fn sub_iteration(mask: &mut BinaryMask, first: bool, area: (usize, usize, usize, usize)) -> bool {
    let (x0, y0, x1, y1) = area;
    let mut candidates = Vec::new();
    for y in y0..=y1 {
        for x in x0..=x1 {
            if !mask.get(x, y) {
                continue;
            }
            let n = ring(mask, x, y);
            if !is_simple(&n) {
                continue;
            }
            // n[0]=P2 (N), n[2]=P4 (E), n[4]=P6 (S), n[6]=P8 (W)
            let (c1, c2) = if first {
                (n[0] && n[2] && n[4], n[2] && n[4] && n[6])
            } else {
                (n[0] && n[2] && n[6], n[0] && n[4] && n[6])
            };
            if !c1 && !c2 {
                candidates.push((x, y));
            }
        }
    }

    let mut changed = false;
    for (x, y) in candidates {
        if still_removable(&ring(mask, x, y)) {
            mask.set(x, y, false);
            changed = true;
        }
    }
    changed
}

/// Thins every foreground region to a one-pixel-wide skeleton.
pub fn skeletonize(mask: &BinaryMask) -> Result<BinaryMask> {
    mask.ensure_nonempty()?;
    let mut out = mask.clone();
    // thinning never adds pixels, so the initial bounding box covers every pass
    let area = bounds(mask);
    loop {
        let a = sub_iteration(&mut out, true, area);
        let b = sub_iteration(&mut out, false, area);
        if !a && !b {
            break;
        }
    }
    Ok(out)
}
