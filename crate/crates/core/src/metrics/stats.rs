//! Summary statistics and Pearson correlation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// z for a two-sided 95% normal interval.
const Z_95: f64 = 1.96;
const MIN_PAIRS: usize = 4;

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

/// Sample standard deviation (n - 1 denominator). `None` below two values.
pub fn sample_std(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PearsonStats {
    pub r: f64,
    pub r_squared: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub p_two_tailed: f64,
    pub n: usize,
}

/// Pearson correlation with a Fisher-z 95% interval and a two-tailed
/// Student-t p-value on n - 2 degrees of freedom.
pub fn pearson_stats(pairs: &[(f64, f64)]) -> Result<PearsonStats> {
    let n = pairs.len();
    if n < MIN_PAIRS {
        return Err(Error::TooFewPairs(n));
    }
    let nf = n as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("correlation of a constant series"));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);

    let z = r.atanh();
    let half = Z_95 / (nf - 3.0).sqrt();
    let df = nf - 2.0;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        let t2 = r * r * df / (1.0 - r * r);
        regularized_beta(df / 2.0, 0.5, df / (df + t2))
    };
    Ok(PearsonStats {
        r,
        r_squared: r * r,
        ci95_low: (z - half).tanh(),
        ci95_high: (z + half).tanh(),
        p_two_tailed: p.clamp(0.0, 1.0),
        n,
    })
}

/// GraphPad-style significance stars.
pub fn p_value_summary(p: f64) -> &'static str {
    if p < 0.0001 {
        "****"
    } else if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        "ns"
    }
}

/// Lanczos approximation (g = 7, n = 9).
fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized incomplete beta I_x(a, b).
pub fn regularized_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    // the continued fraction converges fast on this side of the mean
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Continued fraction for the incomplete beta, modified Lentz.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = f64::from(m);
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn perfect_correlations() {
        let s = pearson_stats(&[(1.0, 2.0), (2.0, 4.0), (3.0, 6.0), (4.0, 8.0)]).unwrap();
        assert_abs_diff_eq!(s.r, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.r_squared, 1.0, epsilon = 1e-15);
        assert!(s.p_two_tailed < 1e-12);
        let s = pearson_stats(&[(1.0, 4.0), (2.0, 3.0), (3.0, 2.0), (4.0, 1.0)]).unwrap();
        assert_abs_diff_eq!(s.r, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn guards() {
        assert!(matches!(pearson_stats(&[(1.0, 1.0); 3]), Err(Error::TooFewPairs(3))));
        let flat = [(1.0, 5.0), (2.0, 5.0), (3.0, 5.0), (4.0, 5.0)];
        assert!(matches!(pearson_stats(&flat), Err(Error::Undefined(_))));
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, 1) = x, I_x(a, 1) = x^a, I_x(1, b) = 1 - (1 - x)^b
        assert_abs_diff_eq!(regularized_beta(1.0, 1.0, 0.3), 0.3, epsilon = 1e-14);
        assert_abs_diff_eq!(regularized_beta(2.5, 1.0, 0.6), 0.6f64.powf(2.5), epsilon = 1e-13);
        assert_abs_diff_eq!(regularized_beta(1.0, 3.0, 0.2), 1.0 - 0.8f64.powi(3), epsilon = 1e-13);
        // symmetry
        let v = regularized_beta(3.3, 0.5, 0.7) + regularized_beta(0.5, 3.3, 0.3);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn t_tail_matches_known_value() {
        // two-tailed p for t = 2.0 on 10 df is 0.0733880347...
        let df = 10.0;
        let p = regularized_beta(df / 2.0, 0.5, df / (df + 4.0));
        assert_abs_diff_eq!(p, 0.073_388_034_770_7, epsilon = 1e-9);
    }

    #[test]
    fn std_uses_n_minus_one() {
        assert_abs_diff_eq!(sample_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap(), (32.0f64 / 7.0).sqrt(), epsilon = 1e-12);
        assert_eq!(sample_std(&[1.0]), None);
        assert_eq!(mean(&[]), None);
    }
}
