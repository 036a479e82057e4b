use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CitationErrorSample, MissedCitationMarginal};
use crate::error::Result;

/// Missed-citation histogram of a 372-record audited sample of citation links.
pub fn embedded_missed_citation_sample() -> MissedCitationMarginal {
    const HISTOGRAM: [(u64, u64); 11] = [
        (0, 263),
        (1, 67),
        (2, 20),
        (3, 5),
        (4, 5),
        (5, 2),
        (6, 3),
        (8, 1),
        (9, 4),
        (15, 1),
        (26, 1),
    ];
    MissedCitationMarginal::new(HISTOGRAM.into_iter().collect::<BTreeMap<_, _>>())
}

/// Pearson correlation with a Fisher-z 95% confidence interval. The interval
/// needs at least four observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStatistics {
    pub records: usize,
    pub total_observed: u64,
    pub total_omitted: u64,
    /// Omitted over observed citations; `None` when nothing was observed.
    pub omitted_rate: Option<f64>,
    pub share_with_omitted: f64,
    pub mean_observed: f64,
    pub mean_corrected: f64,
    pub mean_shift: f64,
    /// Raw-count Pearson correlation of observed and omitted citations;
    /// `None` when either column has zero variance.
    pub correlation: Option<Correlation>,
}

const Z_975: f64 = 1.959_963_984_540_054;

pub(crate) fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn fisher_interval(r: f64, n: usize) -> (Option<f64>, Option<f64>) {
    if n < 4 {
        return (None, None);
    }
    if r.abs() >= 1.0 {
        return (Some(r), Some(r));
    }
    let z = r.atanh();
    let half = Z_975 / ((n - 3) as f64).sqrt();
    (Some((z - half).tanh()), Some((z + half).tanh()))
}

pub fn sample_statistics(sample: &CitationErrorSample) -> Result<SampleStatistics> {
    sample.validate_for_fit()?;
    let n = sample.len();
    let total_observed: u64 = sample.rows.iter().map(|r| r.observed).sum();
    let total_omitted: u64 = sample.rows.iter().map(|r| r.omitted).sum();
    let with_omitted = sample.rows.iter().filter(|r| r.omitted > 0).count();
    let mean_observed = total_observed as f64 / n as f64;
    let mean_corrected = (total_observed + total_omitted) as f64 / n as f64;

    let xs: Vec<f64> = sample.rows.iter().map(|r| r.observed as f64).collect();
    let ys: Vec<f64> = sample.rows.iter().map(|r| r.omitted as f64).collect();
    let correlation = pearson(&xs, &ys).map(|r| {
        let (ci_low, ci_high) = fisher_interval(r, n);
        Correlation { r, ci_low, ci_high }
    });

    Ok(SampleStatistics {
        records: n,
        total_observed,
        total_omitted,
        omitted_rate: (total_observed > 0).then(|| total_omitted as f64 / total_observed as f64),
        share_with_omitted: with_omitted as f64 / n as f64,
        mean_observed,
        mean_corrected,
        mean_shift: mean_corrected - mean_observed,
        correlation,
    })
}

/// Summary of a missed-citation histogram, optionally paired with the
/// observed citation total of the same records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalStatistics {
    pub records: u64,
    pub total_missed: u64,
    pub records_with_missed: u64,
    pub share_with_missed: Option<f64>,
    pub total_observed: Option<u64>,
    /// Missed over observed citations.
    pub omitted_rate: Option<f64>,
    pub mean_observed: Option<f64>,
    pub mean_corrected: Option<f64>,
}

pub fn marginal_statistics(m: &MissedCitationMarginal, total_observed: Option<u64>) -> MarginalStatistics {
    let n = m.records();
    let missed = m.total_missed();
    let per_record = |t: u64| (n > 0).then(|| t as f64 / n as f64);
    MarginalStatistics {
        records: n,
        total_missed: missed,
        records_with_missed: m.records_with_missed(),
        share_with_missed: m.share_with_missed(),
        total_observed,
        omitted_rate: total_observed.filter(|&t| t > 0).map(|t| missed as f64 / t as f64),
        mean_observed: total_observed.and_then(per_record),
        mean_corrected: total_observed.and_then(|t| per_record(t + missed)),
    }
}
