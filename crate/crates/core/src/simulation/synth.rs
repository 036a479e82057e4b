use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::stats::pearson;
use crate::data::{CitationErrorSample, ErrorPair, MissedCitationMarginal};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

/// Tolerance on the realized correlation.
pub const R_TOLERANCE: f64 = 0.05;
const LOG_SD: f64 = 1.1;
const GRID: usize = 201;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSample {
    pub sample: CitationErrorSample,
    /// Pearson r of the generated pairs; `None` if a column is constant.
    pub achieved_r: Option<f64>,
    /// Weight of the rank signal in the coupling, in [-1, 1].
    pub coupling: f64,
    pub warning: Option<String>,
}

/// Spread `total` over lognormal weights so the integer counts sum to it
/// exactly (largest remainders get the leftovers).
fn scaled_counts(raw: &[f64], total: u64) -> Vec<u64> {
    let sum: f64 = raw.iter().sum();
    let exact: Vec<f64> = raw.iter().map(|x| x / sum * total as f64).collect();
    let mut out: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let short = total - out.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().take(short as usize) {
        out[i] += 1;
    }
    out
}

/// Normal scores of values using mid-ranks for ties.
fn normal_scores(values: &[u64]) -> Vec<f64> {
    let n = values.len();
    let std = Normal::standard();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| values[i]);
    let mut scores = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        let mid_rank = (start + end) as f64 / 2.0 + 1.0;
        let z = std.inverse_cdf((mid_rank - 0.5) / n as f64);
        for &i in &order[start..=end] {
            scores[i] = z;
        }
        start = end + 1;
    }
    scores
}

fn couple(omitted: &[u64], sorted_c: &[u64], scores: &[f64], noise: &[f64], w: f64) -> Vec<ErrorPair> {
    let mut order: Vec<usize> = (0..omitted.len()).collect();
    let latent: Vec<f64> = scores.iter().zip(noise).map(|(s, e)| w * s + (1.0 - w.abs()) * e).collect();
    order.sort_by(|&a, &b| latent[a].total_cmp(&latent[b]).then(a.cmp(&b)));
    order
        .iter()
        .zip(sorted_c)
        .map(|(&i, &c)| ErrorPair::new(c, omitted[i]))
        .collect()
}

fn r_of(pairs: &[ErrorPair]) -> Option<f64> {
    let xs: Vec<f64> = pairs.iter().map(|p| p.observed as f64).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.omitted as f64).collect();
    pearson(&xs, &ys)
}

/// Generate (observed, omitted) pairs whose omitted column reproduces
/// `marginal` exactly and whose observed column sums to
/// `round(target_mean_c * n)`, with Pearson r close to `target_r`.
///
/// Observed counts are lognormal, rescaled to the total. Omitted values are
/// matched to them by sorting a latent score that mixes the omitted value's
/// normal score with noise; the mixing weight is chosen on a grid.
pub fn synthesize_training_sample(
    marginal: &MissedCitationMarginal,
    target_mean_c: f64,
    target_r: f64,
    seed: u64,
) -> Result<SyntheticSample> {
    let n = marginal.records() as usize;
    if n == 0 {
        return Err(Error::Validation("missed-citation marginal is empty".into()));
    }
    if !(target_mean_c >= 0.0) || !target_mean_c.is_finite() {
        return Err(Error::Validation(format!("target mean must be non-negative, got {target_mean_c}")));
    }
    let mut rng = stream(seed, Domain::Synthetic, &[]);
    let total = (target_mean_c * n as f64).round() as u64;
    let raw: Vec<f64> = (0..n)
        .map(|_| { let z: f64 = StandardNormal.sample(&mut rng); (LOG_SD * z).exp() })
        .collect();
    let mut sorted_c = scaled_counts(&raw, total);
    sorted_c.sort_unstable();

    let mut omitted = marginal.expand();
    omitted.shuffle(&mut rng);
    let scores = normal_scores(&omitted);
    let noise: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();

    let mut best: Option<(f64, Vec<ErrorPair>, Option<f64>)> = None;
    let mut best_gap = f64::INFINITY;
    for k in 0..GRID {
        let w = -1.0 + 2.0 * k as f64 / (GRID - 1) as f64;
        let pairs = couple(&omitted, &sorted_c, &scores, &noise, w);
        let r = r_of(&pairs);
        let gap = r.map_or(f64::INFINITY, |r| (r - target_r).abs());
        if best.is_none() || gap < best_gap {
            best_gap = gap;
            best = Some((w, pairs, r));
        }
    }
    let (coupling, pairs, achieved_r) = best.expect("grid is non-empty");
    let warning = match achieved_r {
        None => Some("correlation undefined: a column has zero variance".to_string()),
        Some(r) if (r - target_r).abs() > R_TOLERANCE => Some(format!(
            "target r = {target_r} not reached; best achieved r = {r:.4}"
        )),
        Some(_) => None,
    };
    Ok(SyntheticSample {
        sample: CitationErrorSample::new(pairs),
        achieved_r,
        coupling,
        warning,
    })
}
