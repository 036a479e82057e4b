use serde::{Deserialize, Serialize};

/// Median, 95% credible interval and relative uncertainty of a replicate
/// vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub median: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `100 * (ci_high - ci_low) / median`; `None` when the median is zero.
    pub relative_uncertainty_pct: Option<f64>,
}

/// Quantile of sorted data by linear interpolation between order statistics
/// (position `p * (n - 1)`).
///
/// # Panics
/// If `sorted` is empty.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub fn relative_uncertainty(median: f64, lo: f64, hi: f64) -> Option<f64> {
    (median != 0.0).then(|| 100.0 * (hi - lo) / median)
}

/// Summarize replicates. NaN values are ignored; returns `None` if nothing
/// remains.
pub fn summarize(replicates: &[f64]) -> Option<DistributionSummary> {
    let mut xs: Vec<f64> = replicates.iter().copied().filter(|x| !x.is_nan()).collect();
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let median = quantile(&xs, 0.5);
    let ci_low = quantile(&xs, 0.025);
    let ci_high = quantile(&xs, 0.975);
    Some(DistributionSummary {
        median,
        ci_low,
        ci_high,
        relative_uncertainty_pct: relative_uncertainty(median, ci_low, ci_high),
    })
}
