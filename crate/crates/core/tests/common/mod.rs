//! Oracles shared by the core integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::VecDeque;

use ettc_core::fixtures::ManifestEntry;
use ettc_core::raster::{BinaryMask, PixelPoint, WindowSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Random mask: either sparse noise or a union of rectangles and discs.
pub fn random_mask(rng: &mut ChaCha8Rng) -> BinaryMask {
    let w = rng.random_range(1..=128);
    let h = rng.random_range(1..=128);
    let mut m = if rng.random_bool(0.3) {
        let p = rng.random_range(0.05..0.7);
        BinaryMask::from_fn(w, h, |_, _| rng.random_bool(p))
    } else {
        random_blobs(rng, w, h)
    };
    if !m.has_foreground() {
        m.set(rng.random_range(0..w), rng.random_range(0..h), true);
    }
    m
}

pub fn random_blobs(rng: &mut ChaCha8Rng, w: usize, h: usize) -> BinaryMask {
    let mut m = BinaryMask::new(w, h);
    for _ in 0..rng.random_range(1..=5) {
        let cx = rng.random_range(0..w) as i64;
        let cy = rng.random_range(0..h) as i64;
        let r = rng.random_range(1..=20i64);
        let disc = rng.random_bool(0.5);
        let rh = rng.random_range(1..=20i64);
        for y in 0..h {
            for x in 0..w {
                let (dx, dy) = (x as i64 - cx, y as i64 - cy);
                let inside = if disc { dx * dx + dy * dy <= r * r } else { dx.abs() <= r && dy.abs() <= rh };
                if inside {
                    m.set(x, y, true);
                }
            }
        }
    }
    m
}

/// Foreground pixel with at least one background pixel among its in-image
/// 8-neighbours.
pub fn boundary_oracle(m: &BinaryMask) -> BinaryMask {
    let (w, h) = m.dimensions();
    BinaryMask::from_fn(w, h, |x, y| {
        if !m.get(x, y) {
            return false;
        }
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h && !m.get(nx as usize, ny as usize) {
                    return true;
                }
            }
        }
        false
    })
}

pub fn brute_count(weights: &BinaryMask, c: PixelPoint, win: WindowSpec) -> usize {
    let (hw, hh) = ((win.width() / 2) as i64, (win.height() / 2) as i64);
    let mut n = 0;
    for y in c.y as i64 - hh..=c.y as i64 + hh {
        for x in c.x as i64 - hw..=c.x as i64 + hw {
            n += usize::from(weights.get_signed(x, y));
        }
    }
    n
}

pub fn components(m: &BinaryMask) -> usize {
    let (w, h) = m.dimensions();
    let mut seen = BinaryMask::new(w, h);
    let mut count = 0;
    for start in m.foreground() {
        if seen.at(start) {
            continue;
        }
        count += 1;
        let mut queue = VecDeque::from([start]);
        seen.set_point(start, true);
        while let Some(p) = queue.pop_front() {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let q = p.offset(dx, dy);
                    if m.contains(q) && m.at(q) && !seen.at(q) {
                        seen.set_point(q, true);
                        queue.push_back(q);
                    }
                }
            }
        }
    }
    count
}

/// Reference r from the textbook sum formula, accumulated independently.
pub fn reference(pairs: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let n = pairs.len() as f64;
    let sx: f64 = pairs.iter().map(|p| p.0).sum();
    let sy: f64 = pairs.iter().map(|p| p.1).sum();
    let (mx, my) = (sx / n, sy / n);
    let cov: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let vx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let vy: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r = cov / (vx * vy).sqrt();
    let df = n - 2.0;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let p = 2.0 * StudentsT::new(0.0, 1.0, df).unwrap().cdf(-t.abs());
    let z = 0.5 * ((1.0 + r) / (1.0 - r)).ln();
    let se = 1.0 / (n - 3.0).sqrt();
    (r, p, (z - 1.96 * se).tanh(), (z + 1.96 * se).tanh())
}

/// Candidate with the highest brute-force window count; ties go to the
/// smallest y, then the smallest x.
pub fn exhaustive_argmax(candidates: &BinaryMask, weights: &BinaryMask, win: WindowSpec) -> PixelPoint {
    candidates
        .foreground()
        .min_by_key(|&p| (std::cmp::Reverse(brute_count(weights, p, win)), p.y, p.x))
        .expect("nonempty candidates")
}

pub fn random_pairs(rng: &mut ChaCha8Rng, n: usize) -> Vec<(f64, f64)> {
    let slope = rng.random_range(-2.0..2.0);
    let noise = rng.random_range(0.1..30.0);
    (0..n)
        .map(|_| {
            let x = rng.random_range(10.0..90.0);
            (x, slope * x + rng.random_range(-noise..noise))
        })
        .collect()
}

pub struct Expected {
    pub tip_tp: usize,
    pub tip_fp: usize,
    pub tip_fn: usize,
    pub carina_tp: usize,
    pub carina_fp: usize,
    pub carina_fn: usize,
    pub tip_errors: Vec<f64>,
    pub carina_errors: Vec<f64>,
    pub distance_errors: Vec<f64>,
    pub cells: [[usize; 2]; 3],
    pub pairs: Vec<(f64, f64)>,
}

/// Aggregates derived from the manifest alone: planted points, spacing, and
/// the counting rules written out longhand.
pub fn from_manifest(entries: &[ManifestEntry]) -> Expected {
    let mut e = Expected {
        tip_tp: 0,
        tip_fp: 0,
        tip_fn: 0,
        carina_tp: 0,
        carina_fp: 0,
        carina_fn: 0,
        tip_errors: vec![],
        carina_errors: vec![],
        distance_errors: vec![],
        cells: [[0; 2]; 3],
        pairs: vec![],
    };
    for m in entries {
        let s = m.pixel_spacing_mm;
        match m.predicted_tip {
            Some(p) => {
                let px = m.gt_tip.distance(p);
                e.tip_errors.push(px * s);
                if px <= 100.0 {
                    e.tip_tp += 1;
                } else {
                    // every planted miss comes without a tube mask, so Dice cannot rescue it
                    assert!(!m.has_tube_mask);
                    e.tip_fp += 1;
                    e.tip_fn += 1;
                }
            }
            None => e.tip_fn += 1,
        }
        match m.predicted_carina {
            Some(p) => {
                let px = m.gt_carina.distance(p);
                e.carina_errors.push(px * s);
                assert!(px <= 100.0);
                e.carina_tp += 1;
            }
            None => e.carina_fn += 1,
        }
        let d1 = m.gt_tip.distance(m.gt_carina) * s;
        let col = if (20.0..=70.0).contains(&d1) { 0 } else { 1 };
        match (m.predicted_tip, m.predicted_carina) {
            (Some(t), Some(c)) => {
                let d2 = t.distance(c) * s;
                e.distance_errors.push((d1 - d2).abs());
                e.pairs.push((d1, d2));
                let row = if (20.0..=70.0).contains(&d2) { 0 } else { 1 };
                e.cells[row][col] += 1;
            }
            _ => e.cells[2][col] += 1,
        }
    }
    e
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn std(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

pub fn buckets(v: &[f64]) -> [f64; 4] {
    [5.0, 10.0, 15.0, 20.0].map(|t| v.iter().filter(|&&x| x <= t).count() as f64 / v.len() as f64)
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + b.abs())
}
