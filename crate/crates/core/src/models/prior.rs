use serde::{Deserialize, Serialize};

use super::mcmc::McmcConfig;
use super::negbin::{sample_negbin, NegBinModelSpec, ParamDraw, ParamPrior};
use crate::error::Result;
use crate::rng::{stream, Domain};
use crate::simulation::quantile;

/// Predictor counts used when no grid is given. 16.4 is the mean citation
/// count of the empirical sample.
pub const DEFAULT_PRIOR_GRID: [f64; 7] = [0.0, 1.0, 5.0, 10.0, 16.4, 50.0, 100.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub citations: f64,
    /// Quantiles (2.5%, 50%, 97.5%) of the expected omitted count.
    pub mean_quantiles: [f64; 3],
    /// Quantiles (2.5%, 50%, 97.5%) of simulated omitted counts.
    pub omitted_quantiles: [f64; 3],
    pub share_zero: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorPredictiveSummary {
    pub draws: usize,
    /// `exp(mean -+ 2 sd)` of the intercept prior: the customary two-sigma
    /// reading of a 95% prior range on the count scale. `None` for a fixed
    /// intercept.
    pub intercept_two_sigma: Option<(f64, f64)>,
    /// Monte Carlo quantiles (2.5%, 50%, 97.5%) of `exp(intercept)`.
    pub intercept_quantiles: [f64; 3],
    pub grid: Vec<GridSummary>,
}

fn quantiles3(mut xs: Vec<f64>) -> [f64; 3] {
    xs.sort_by(f64::total_cmp);
    [quantile(&xs, 0.025), quantile(&xs, 0.5), quantile(&xs, 0.975)]
}

/// Draw parameters from the priors and simulate omitted counts over a grid of
/// predictor values. Uses `cfg.chains * cfg.keep` draws.
pub fn prior_predictive_check(
    spec: &NegBinModelSpec,
    cfg: &McmcConfig,
    grid: &[f64],
) -> Result<PriorPredictiveSummary> {
    // a vanishing sd is allowed here as a limit case
    let n = (cfg.chains * cfg.keep).max(1);
    let mut rng = stream(cfg.seed, Domain::Prior, &[]);
    let params: Vec<ParamDraw> = (0..n)
        .map(|_| {
            let b0 = spec.intercept_prior.draw(&mut rng);
            let b1 = spec.slope_prior.draw(&mut rng);
            let log_theta = spec.dispersion_prior.draw(&mut rng);
            ParamDraw::new(b0, b1, log_theta.exp())
        })
        .collect();

    let grid = grid
        .iter()
        .map(|&c| {
            let means: Vec<f64> = params.iter().map(|p| p.mean_at(c)).collect();
            let sims: Vec<f64> = params
                .iter()
                .zip(&means)
                .map(|(p, &m)| sample_negbin(&mut rng, m, p.dispersion) as f64)
                .collect();
            let share_zero = sims.iter().filter(|&&x| x == 0.0).count() as f64 / n as f64;
            GridSummary {
                citations: c,
                mean_quantiles: quantiles3(means),
                omitted_quantiles: quantiles3(sims),
                share_zero,
            }
        })
        .collect();

    let intercept_two_sigma = match spec.intercept_prior {
        ParamPrior::Normal { mean, sd } => Some(((mean - 2.0 * sd).exp(), (mean + 2.0 * sd).exp())),
        ParamPrior::Fixed { .. } => None,
    };
    Ok(PriorPredictiveSummary {
        draws: n,
        intercept_two_sigma,
        intercept_quantiles: quantiles3(params.iter().map(|p| p.intercept.exp()).collect()),
        grid,
    })
}
