mod common;

use common::{random_pairs, reference};
use ettc_core::metrics::pearson_stats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn matches_reference_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9EA5);
    for case in 0..50 {
        let n = rng.random_range(10..=500);
        let pairs = random_pairs(&mut rng, n);
        let s = pearson_stats(&pairs).unwrap();
        let (r, p, lo, hi) = reference(&pairs);
        assert!((s.r - r).abs() < 1e-9, "case {case}: r {} vs {r}", s.r);
        assert!((s.p_two_tailed - p).abs() < 1e-6, "case {case}: p {} vs {p}", s.p_two_tailed);
        assert!((s.ci95_low - lo).abs() < 1e-6, "case {case}");
        assert!((s.ci95_high - hi).abs() < 1e-6, "case {case}");
        assert_eq!(s.n, n);
    }
}

#[test]
fn matches_frozen_scipy_values() {
    // scipy.stats.pearsonr on x = 1..20, y = 10 sin(i) + i / 2
    let pairs: Vec<(f64, f64)> = (1..=20)
        .map(|i| (f64::from(i), 10.0 * f64::from(i).sin() + 0.5 * f64::from(i)))
        .collect();
    let s = pearson_stats(&pairs).unwrap();
    assert!((s.r - 0.295_527_491_073_653_06).abs() < 1e-12);
    assert!((s.p_two_tailed - 0.205_862_194_648_414_43).abs() < 1e-9);
    assert!((s.ci95_low - -0.169_117_333_730_986_53).abs() < 1e-9);
    assert!((s.ci95_high - 0.652_696_248_572_593).abs() < 1e-9);
}

#[test]
fn r_is_affine_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xAFF1);
    for _ in 0..20 {
        let pairs = random_pairs(&mut rng, 60);
        let r = pearson_stats(&pairs).unwrap().r;
        let (a, b) = (rng.random_range(0.1..10.0), rng.random_range(-50.0..50.0));
        let (c, d) = (rng.random_range(0.1..10.0), rng.random_range(-50.0..50.0));
        let moved: Vec<_> = pairs.iter().map(|&(x, y)| (a * x + b, c * y + d)).collect();
        assert!((pearson_stats(&moved).unwrap().r - r).abs() < 1e-12);
    }
}
