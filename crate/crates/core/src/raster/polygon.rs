//! Exact integer polygon rasterization.
//!
//! A pixel `(x, y)` is sampled at its integer coordinate. It is foreground
//! when that point lies on the polygon outline or inside it under the
//! even-odd rule. Fixture generation and ground-truth rasterization both go
//! through [`fill_polygon`], so the two can never disagree.

use super::{BinaryMask, PixelPoint};

/// Twice the signed shoelace area.
pub fn polygon_area2(vertices: &[PixelPoint]) -> i64 {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            i64::from(a.x) * i64::from(b.y) - i64::from(b.x) * i64::from(a.y)
        })
        .sum()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// All integer points on the closed outline, in edge order (vertices may
/// repeat at edge joins).
pub fn polygon_boundary_points(vertices: &[PixelPoint]) -> Vec<PixelPoint> {
    let n = vertices.len();
    let mut out = Vec::new();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let dx = i64::from(b.x - a.x);
        let dy = i64::from(b.y - a.y);
        let steps = gcd(dx, dy).max(1);
        let (sx, sy) = (dx / steps, dy / steps);
        for k in 0..steps {
            out.push(PixelPoint::new(
                (i64::from(a.x) + k * sx) as i32,
                (i64::from(a.y) + k * sy) as i32,
            ));
        }
    }
    out
}

fn floor_div(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -floor_div(-a, b)
}

/// Rasterizes a closed polygon into a `width x height` mask (even-odd fill,
/// outline included). Parts outside the raster are clipped.
pub fn fill_polygon(vertices: &[PixelPoint], width: usize, height: usize) -> BinaryMask {
    let mut mask = BinaryMask::new(width, height);
    if vertices.is_empty() || width == 0 || height == 0 {
        return mask;
    }
    let n = vertices.len();
    let y_min = vertices.iter().map(|v| v.y).min().unwrap().max(0);
    let y_max = vertices
        .iter()
        .map(|v| v.y)
        .max()
        .unwrap()
        .min(height as i32 - 1);

    // Crossings are rational x = num / den with den > 0.
    let mut crossings: Vec<(i64, i64)> = Vec::with_capacity(n);
    for y in y_min..=y_max {
        let y = i64::from(y);
        crossings.clear();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let (ay, by) = (i64::from(a.y), i64::from(b.y));
            // half-open rule: an edge counts when y lies in [min, max)
            if (ay <= y) == (by <= y) {
                continue;
            }
            let (ax, bx) = (i64::from(a.x), i64::from(b.x));
            let mut num = ax * (by - ay) + (y - ay) * (bx - ax);
            let mut den = by - ay;
            if den < 0 {
                num = -num;
                den = -den;
            }
            crossings.push((num, den));
        }
        crossings.sort_by(|p, q| (p.0 * q.1).cmp(&(q.0 * p.1)));
        for pair in crossings.chunks_exact(2) {
            let lo = ceil_div(pair[0].0, pair[0].1).max(0);
            let hi = floor_div(pair[1].0, pair[1].1).min(width as i64 - 1);
            for x in lo..=hi {
                mask.set(x as usize, y as usize, true);
            }
        }
    }
    for p in polygon_boundary_points(vertices) {
        mask.set_point(p, true);
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i32, i32)]) -> Vec<PixelPoint> {
        v.iter().map(|&(x, y)| PixelPoint::new(x, y)).collect()
    }

    #[test]
    fn square_includes_boundary() {
        let sq = pts(&[(0, 0), (10, 0), (10, 10), (0, 10)]);
        let m = fill_polygon(&sq, 20, 20);
        assert_eq!(m.count(), 121);
        assert_eq!(polygon_area2(&sq).abs(), 200);
    }

    #[test]
    fn collinear_has_zero_area() {
        let line = pts(&[(0, 0), (1, 1), (2, 2), (3, 3)]);
        assert_eq!(polygon_area2(&line), 0);
    }

    #[test]
    fn clipped_to_raster() {
        let sq = pts(&[(-5, -5), (4, -5), (4, 4), (-5, 4)]);
        let m = fill_polygon(&sq, 10, 10);
        assert_eq!(m.count(), 25);
    }

    #[test]
    fn boundary_walk_hits_lattice_points() {
        let b = polygon_boundary_points(&pts(&[(0, 0), (4, 2), (0, 2)]));
        assert!(b.contains(&PixelPoint::new(2, 1)));
        assert!(!b.contains(&PixelPoint::new(1, 1)));
    }
}
