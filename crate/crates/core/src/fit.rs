//! Least-squares slopes for scaling exponents.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval for the slope; degenerate with two points.
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
}

/// Ordinary least squares `y = intercept + slope·x`. Needs two distinct `x`.
pub fn ols(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (ci_low, ci_high) = if n > 2 {
        let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        let se = (rss / (nf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0).expect("positive degrees of freedom").inverse_cdf(0.975);
        (slope - t * se, slope + t * se)
    } else {
        (slope, slope)
    };
    Some(LineFit { slope, intercept, ci_low, ci_high, points: n })
}

/// OLS on `(ln x, ln y)`, skipping non-positive entries.
pub fn log_log(points: &[(f64, f64)]) -> Option<LineFit> {
    let logs: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    ols(&logs)
}

/// Slope of the upper envelope of a log-log scatter: points are grouped into
/// `bins` equal bins of `ln x`, the largest `y` of each non-empty bin is kept
/// and a line is fitted through those maxima.
pub fn upper_envelope_slope(points: &[(f64, f64)], bins: usize) -> Option<LineFit> {
    let logs: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if logs.is_empty() || bins == 0 {
        return None;
    }
    let lo = logs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = logs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut best: Vec<Option<(f64, f64)>> = vec![None; bins];
    for &(x, y) in &logs {
        let k = if width > 0.0 { (((x - lo) / width) as usize).min(bins - 1) } else { 0 };
        if best[k].is_none_or(|b| y > b.1) {
            best[k] = Some((x, y));
        }
    }
    let maxima: Vec<(f64, f64)> = best.into_iter().flatten().collect();
    ols(&maxima)
}
