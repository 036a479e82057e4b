//! Convergence diagnostics: split R-hat and multi-chain effective sample size.

use serde::{Deserialize, Serialize};

use super::negbin::{NegBinPosterior, PARAM_NAMES};

/// R-hat values at or above this flag non-convergence.
pub const RHAT_THRESHOLD: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDiagnostics {
    pub name: String,
    /// `None` when unavailable (a single chain, or a parameter held fixed).
    /// Serialized as null when infinite.
    pub rhat: Option<f64>,
    pub ess: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct McmcDiagnostics {
    pub parameters: Vec<ParamDiagnostics>,
    /// Acceptance rate of each chain over its kept iterations.
    pub acceptance: Vec<f64>,
    pub converged: bool,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_var(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

fn split_halves<'a>(chains: &[&'a [f64]]) -> Option<Vec<&'a [f64]>> {
    let n = chains.iter().map(|c| c.len()).min()?;
    if n < 4 {
        return None;
    }
    let half = n / 2;
    Some(
        chains
            .iter()
            .flat_map(|c| [&c[..half], &c[half..2 * half]])
            .collect(),
    )
}

/// Between- and within-chain variance (B/n form not applied).
fn variance_components(chains: &[&[f64]]) -> (f64, f64, usize) {
    let n = chains[0].len();
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let grand = mean(&means);
    let m = chains.len() as f64;
    let b = n as f64 * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>() / (m - 1.0);
    let w = chains.iter().zip(&means).map(|(c, &mu)| sample_var(c, mu)).sum::<f64>() / m;
    (b, w, n)
}

/// Split R-hat (Gelman-Rubin on half-chains). Requires at least two chains.
///
/// Returns `None` when fewer than two chains are given or every draw is
/// identical, and `+inf` when chains are individually constant but disagree.
pub fn split_rhat(chains: &[&[f64]]) -> Option<f64> {
    if chains.len() < 2 {
        return None;
    }
    let halves = split_halves(chains)?;
    let (b, w, n) = variance_components(&halves);
    if w <= 0.0 {
        return if b > 0.0 { Some(f64::INFINITY) } else { None };
    }
    let n = n as f64;
    let var_plus = (n - 1.0) / n * w + b / n;
    Some((var_plus / w).sqrt())
}

fn autocovariance(xs: &[f64], m: f64, lag: usize) -> f64 {
    let n = xs.len();
    let s: f64 = xs[..n - lag]
        .iter()
        .zip(&xs[lag..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum();
    s / n as f64
}

/// Effective sample size over split chains, using the multi-chain
/// autocorrelation estimate and Geyer's initial monotone sequence.
pub fn effective_sample_size(chains: &[&[f64]]) -> f64 {
    let Some(halves) = split_halves(chains) else {
        return chains.iter().map(|c| c.len()).sum::<usize>() as f64;
    };
    let m = halves.len();
    let n = halves[0].len();
    let total = (m * n) as f64;
    let (b, w, _) = if m > 1 {
        variance_components(&halves)
    } else {
        let mu = mean(halves[0]);
        (0.0, sample_var(halves[0], mu), n)
    };
    if w <= 0.0 {
        return total;
    }
    let nf = n as f64;
    let var_plus = (nf - 1.0) / nf * w + b / nf;
    let means: Vec<f64> = halves.iter().map(|c| mean(c)).collect();
    let rho = |lag: usize| -> f64 {
        let acov = halves
            .iter()
            .zip(&means)
            .map(|(c, &mu)| autocovariance(c, mu, lag))
            .sum::<f64>()
            / m as f64;
        1.0 - (w - acov) / var_plus
    };

    // Pairs P_k = rho(2k) + rho(2k+1), truncated at the first negative pair
    // and forced monotone.
    let mut sum_pairs = 0.0;
    let mut prev = f64::INFINITY;
    let mut lag = 0;
    while lag + 1 < n {
        let mut pair = rho(lag) + rho(lag + 1);
        if pair < 0.0 {
            break;
        }
        if pair > prev {
            pair = prev;
        }
        prev = pair;
        sum_pairs += pair;
        lag += 2;
    }
    let tau = (-1.0 + 2.0 * sum_pairs).max(1.0 / total.log10().max(1.0));
    total / tau
}

/// Recompute split R-hat, ESS, and convergence for a fitted posterior.
/// Acceptance rates are carried over from the fit.
pub fn mcmc_diagnostics(posterior: &NegBinPosterior) -> McmcDiagnostics {
    let fixed = posterior.spec.priors().map(|p| p.is_fixed());
    let per_chain: Vec<&[super::negbin::ParamDraw]> =
        (0..posterior.chains).map(|c| posterior.chain(c)).collect();
    let parameters: Vec<ParamDiagnostics> = (0..3)
        .map(|i| {
            let series: Vec<Vec<f64>> = per_chain
                .iter()
                .map(|c| c.iter().map(|d| d.component(i)).collect())
                .collect();
            let refs: Vec<&[f64]> = series.iter().map(Vec::as_slice).collect();
            let (rhat, ess) = if fixed[i] {
                (None, posterior.len() as f64)
            } else {
                (split_rhat(&refs), effective_sample_size(&refs))
            };
            ParamDiagnostics {
                name: PARAM_NAMES[i].to_string(),
                rhat,
                ess,
            }
        })
        .collect();
    let converged = parameters
        .iter()
        .all(|p| p.rhat.is_none_or(|r| r < RHAT_THRESHOLD));
    McmcDiagnostics {
        parameters,
        acceptance: posterior.diagnostics.acceptance.clone(),
        converged,
    }
}
