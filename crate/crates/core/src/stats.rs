//! Summary statistics for Monte Carlo output.

use serde::{Deserialize, Serialize};

/// Pairwise (cascade) summation; the result depends only on the order of
/// `values`, never on how work was scheduled.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Unbiased sample variance (`1/(N−1)`); zero for a single value.
pub fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mu = mean(values);
    let sq: Vec<f64> = values.iter().map(|x| (x - mu) * (x - mu)).collect();
    pairwise_sum(&sq) / (values.len() - 1) as f64
}

/// `X₍⌈Np⌉₎` of an ascending slice.
pub fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let k = ((n as f64 * p).ceil() as usize).clamp(1, n);
    sorted[k - 1]
}

/// Probability levels reported in every summary.
pub const SUMMARY_LEVELS: [f64; 7] = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    /// Values at [`SUMMARY_LEVELS`].
    pub quantiles: Vec<f64>,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let variance = sample_variance(values);
        Summary {
            count: values.len(),
            mean: mean(values),
            variance,
            std_error: (variance / values.len() as f64).sqrt(),
            quantiles: SUMMARY_LEVELS.iter().map(|&p| sorted_quantile(&sorted, p)).collect(),
        }
    }

    pub fn median(&self) -> f64 {
        self.quantiles[3]
    }
}

/// Ordinary least squares fit of `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
}

pub fn ols(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len(), "ols needs paired data");
    assert!(x.len() >= 2, "ols needs at least two points");
    let k = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_std_error = if x.len() > 2 { (sse / (k - 2.0) / sxx).sqrt() } else { f64::NAN };
    LineFit { slope, intercept, slope_std_error }
}

/// Log-log slope of `values` against `sizes`.
pub fn loglog_slope(sizes: &[usize], values: &[f64]) -> LineFit {
    let x: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    ols(&x, &y)
}
