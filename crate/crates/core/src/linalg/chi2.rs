//! Chi-square distribution function and quantile.
//!
//! The CDF is the regularized lower incomplete gamma `P(df/2, x/2)`, evaluated
//! with the power series below `a + 1` and a modified-Lentz continued fraction
//! for the upper tail above it. The quantile brackets the root and bisects.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
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

const EPS: f64 = 1e-16;
const MAX_TERMS: usize = 10_000;

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_TERMS {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn regularized_gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_continued_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 - P(a, x)`.
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_continued_fraction(a, x)
    }
}

pub fn chi2_cdf(df: usize, x: f64) -> f64 {
    regularized_gamma_p(df as f64 / 2.0, x / 2.0)
}

/// Value `q` with `P(χ²_df ≤ q) = prob`.
pub fn chi2_quantile(df: usize, prob: f64) -> Result<f64> {
    if df == 0 {
        return Err(Error::Domain("chi-square degrees of freedom must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&prob) {
        return Err(Error::Domain(format!("probability {prob} outside [0, 1)")));
    }
    if prob == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = df as f64;
    while chi2_cdf(df, hi) < prob {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi2_cdf(df, mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_at_integers_and_half() {
        let mut fact = 1.0f64;
        for n in 1..20 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12, "n={n}");
            fact *= n as f64;
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn p_and_q_are_complementary() {
        for &a in &[0.5, 1.0, 3.5, 25.0] {
            for &x in &[0.1, 1.0, 4.0, 30.0, 80.0] {
                let s = regularized_gamma_p(a, x) + regularized_gamma_q(a, x);
                assert!((s - 1.0).abs() < 1e-12, "a={a} x={x}");
            }
        }
    }

    #[test]
    fn quantile_examples() {
        assert!((chi2_quantile(2, 0.95).unwrap() - 5.991_464_547_107_979).abs() < 1e-9);
        assert!((chi2_quantile(1, 0.95).unwrap() - 3.841_458_820_694_124).abs() < 1e-9);
        for df in [1, 7, 30] {
            assert_eq!(chi2_quantile(df, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn df_two_matches_closed_form() {
        for &p in &[0.1, 0.5, 0.9, 0.95, 0.999] {
            let closed = -2.0 * (1.0f64 - p).ln();
            assert!((chi2_quantile(2, p).unwrap() - closed).abs() < 1e-9 * closed.max(1.0));
        }
    }

    #[test]
    fn quantile_domain_errors() {
        assert!(chi2_quantile(3, 1.0).is_err());
        assert!(chi2_quantile(3, -0.1).is_err());
        assert!(chi2_quantile(3, f64::NAN).is_err());
        assert!(chi2_quantile(0, 0.5).is_err());
    }

    #[test]
    fn quantile_is_strictly_increasing() {
        let probs = [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.975, 0.99, 0.999];
        for df in 1..=60 {
            let q: Vec<f64> = probs.iter().map(|&p| chi2_quantile(df, p).unwrap()).collect();
            assert!(q.windows(2).all(|w| w[0] < w[1]), "df={df}");
        }
        for &p in &probs {
            let q: Vec<f64> = (1..=60).map(|df| chi2_quantile(df, p).unwrap()).collect();
            assert!(q.windows(2).all(|w| w[0] < w[1]), "p={p}");
        }
    }
}
