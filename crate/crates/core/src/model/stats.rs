//! Statistical kernels: Welch's t with Cohen's d, Pearson correlation with
//! a Fisher-transform interval, and the quartile odds ratio.
//!
//! Tail probabilities come from adaptive Simpson quadrature of the t (and
//! normal) densities rather than a stats library; the quadrature tolerance
//! is far below the 1e-10 the p-values need.

use super::ModelError;

/// Lanczos approximation (g = 7, 9 terms).
fn ln_gamma(x: f64) -> f64 {
    const COEFFICIENTS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection formula
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, &c) in COEFFICIENTS.iter().enumerate() {
        acc += c / (x + i as f64 + 1.0);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson_inner(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = (a + b) / 2.0;
    let lm = (a + m) / 2.0;
    let rm = (m + b) / 2.0;
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson_inner(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive_simpson_inner(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = (a + b) / 2.0;
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    adaptive_simpson_inner(&f, a, b, fa, fm, fb, whole, tol, 50)
}

fn t_density(x: f64, df: f64) -> f64 {
    let log_norm = ln_gamma((df + 1.0) / 2.0)
        - ln_gamma(df / 2.0)
        - 0.5 * (df * std::f64::consts::PI).ln();
    (log_norm - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

/// Two-sided p-value of a t statistic by numerical integration of the
/// density over [0, |t|].
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let body = integrate(|x| t_density(x, df), 0.0, t.abs(), 1e-13);
    (2.0 * (0.5 - body)).clamp(0.0, 1.0)
}

fn normal_density(x: f64) -> f64 {
    (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn normal_cdf(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - normal_cdf(-x);
    }
    0.5 + integrate(normal_density, 0.0, x, 1e-13)
}

/// Standard normal quantile by bisection on the quadrature CDF.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1), got {p}");
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}

fn mean_and_sample_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, variance)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupStats {
    pub cohens_d: f64,
    pub welch_t: f64,
    pub welch_df: f64,
    pub p_two_sided: f64,
}

/// Cohen's d with the group-size-weighted pooled standard deviation, and
/// Welch's t-test with Welch-Satterthwaite degrees of freedom.
pub fn group_stats(a: &[f64], b: &[f64]) -> Result<GroupStats, ModelError> {
    for (name, group) in [("group a", a), ("group b", b)] {
        if group.len() < 2 {
            return Err(ModelError::TooFewValues {
                what: "group_stats",
                need: 2,
                found: group.len(),
            });
        }
        let _ = name;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mean_a, var_a) = mean_and_sample_variance(a);
    let (mean_b, var_b) = mean_and_sample_variance(b);

    let pooled_variance = ((na - 1.0) * var_a + (nb - 1.0) * var_b) / (na + nb - 2.0);
    if pooled_variance <= 0.0 {
        return Err(ModelError::ZeroVariance {
            what: "both groups",
        });
    }
    let cohens_d = (mean_a - mean_b) / pooled_variance.sqrt();

    let se_squared = var_a / na + var_b / nb;
    let welch_t = (mean_a - mean_b) / se_squared.sqrt();
    let welch_df = se_squared * se_squared
        / ((var_a / na).powi(2) / (na - 1.0) + (var_b / nb).powi(2) / (nb - 1.0));
    let p_two_sided = if welch_t == 0.0 {
        1.0
    } else {
        student_t_two_sided_p(welch_t, welch_df)
    };
    Ok(GroupStats {
        cohens_d,
        welch_t,
        welch_df,
        p_two_sided,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PearsonCi {
    pub r: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Sample Pearson correlation with a Fisher z-transform confidence
/// interval at the given confidence level.
pub fn pearson_r_ci(x: &[f64], y: &[f64], confidence: f64) -> Result<PearsonCi, ModelError> {
    if x.len() != y.len() {
        return Err(ModelError::LengthMismatch { a: x.len(), b: y.len() });
    }
    if x.len() < 4 {
        return Err(ModelError::TooFewValues {
            what: "pearson_r_ci",
            need: 4,
            found: x.len(),
        });
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        cov += (xi - mean_x) * (yi - mean_y);
        var_x += (xi - mean_x).powi(2);
        var_y += (yi - mean_y).powi(2);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(ModelError::ZeroVariance { what: "pearson input" });
    }
    let r = cov / (var_x * var_y).sqrt();

    if (1.0 - r * r) < 1e-15 {
        // perfectly correlated input: the transform degenerates
        return Ok(PearsonCi {
            r,
            ci_low: r,
            ci_high: r,
        });
    }
    let z = r.atanh();
    let se = 1.0 / (n - 3.0).sqrt();
    let z_crit = normal_quantile(0.5 + confidence / 2.0);
    Ok(PearsonCi {
        r,
        ci_low: (z - z_crit * se).tanh(),
        ci_high: (z + z_crit * se).tanh(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddsRatio {
    pub or: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// True when a zero cell triggered the Haldane-Anscombe correction.
    pub corrected: bool,
}

pub(crate) fn odds_ratio_from_table(
    mut a: f64,
    mut b: f64,
    mut c: f64,
    mut d: f64,
    confidence: f64,
) -> OddsRatio {
    let corrected = a == 0.0 || b == 0.0 || c == 0.0 || d == 0.0;
    if corrected {
        a += 0.5;
        b += 0.5;
        c += 0.5;
        d += 0.5;
    }
    let or = (a * d) / (b * c);
    let se = (1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d).sqrt();
    let z_crit = normal_quantile(0.5 + confidence / 2.0);
    OddsRatio {
        or,
        ci_low: (or.ln() - z_crit * se).exp(),
        ci_high: (or.ln() + z_crit * se).exp(),
        corrected,
    }
}

/// Odds ratio of improvement for the top feature quartile versus the rest,
/// with a 95% Wald interval on the log odds. The top quartile is values
/// strictly above the nearest-rank 75th percentile.
pub fn quartile_odds_ratio(values: &[f64], improved: &[bool]) -> Result<OddsRatio, ModelError> {
    if values.len() != improved.len() {
        return Err(ModelError::LengthMismatch {
            a: values.len(),
            b: improved.len(),
        });
    }
    if values.len() < 8 {
        return Err(ModelError::TooFewValues {
            what: "quartile_odds_ratio",
            need: 8,
            found: values.len(),
        });
    }
    if improved.iter().all(|&l| l) || improved.iter().all(|&l| !l) {
        return Err(ModelError::SingleClass);
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("feature values are finite"));
    let rank = (0.75 * sorted.len() as f64).ceil() as usize;
    let threshold = sorted[rank - 1];

    let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
    for (&value, &label) in values.iter().zip(improved) {
        match (value > threshold, label) {
            (true, true) => a += 1.0,
            (true, false) => b += 1.0,
            (false, true) => c += 1.0,
            (false, false) => d += 1.0,
        }
    }
    Ok(odds_ratio_from_table(a, b, c, d, 0.95))
}
