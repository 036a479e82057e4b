//! Adaptive random-walk Metropolis for the negative-binomial regression.
//!
//! Sampling happens on `(b0 + b1 * xbar, b1, ln theta)`: centering the
//! predictor removes most of the intercept/slope correlation so a diagonal
//! Gaussian proposal mixes well. Proposal scales are tuned during warmup and
//! frozen afterwards.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diagnostics::{mcmc_diagnostics, McmcDiagnostics};
use super::negbin::{negbin_kernel, NegBinModelSpec, NegBinPosterior, ParamDraw, ParamPrior};
use super::ModelKind;
use crate::data::CitationErrorSample;
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub chains: usize,
    pub warmup: usize,
    pub keep: usize,
    pub seed: u64,
    pub target_acceptance: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            chains: 4,
            warmup: 1000,
            keep: 1000,
            seed: 0,
            target_acceptance: 0.30,
        }
    }
}

impl McmcConfig {
    pub fn with_seed(seed: u64) -> Self {
        McmcConfig {
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::Validation("chains must be positive".into()));
        }
        if self.warmup < 100 || self.keep < 100 {
            return Err(Error::Validation(format!(
                "warmup and keep must be at least 100 (got {} and {})",
                self.warmup, self.keep
            )));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::Validation("target acceptance must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Unnormalized log posterior. Observations are grouped by distinct
/// (predictor, outcome) pairs.
struct Target {
    priors: [ParamPrior; 3],
    groups: Vec<(f64, u64, f64)>,
    /// Predictor offset used by the sampling coordinates.
    center: f64,
}

impl Target {
    fn new(spec: &NegBinModelSpec, sample: Option<&CitationErrorSample>) -> Self {
        let mut counts: BTreeMap<(u64, u64), u64> = BTreeMap::new();
        if let Some(s) = sample {
            for r in &s.rows {
                let predictor = match spec.kind {
                    ModelKind::SecondKind => r.observed,
                    ModelKind::FirstKind => r.corrected(),
                };
                *counts.entry((predictor, r.omitted)).or_default() += 1;
            }
        }
        let groups: Vec<(f64, u64, f64)> = counts
            .into_iter()
            .map(|((c, y), n)| (((c + 1) as f64).ln(), y, n as f64))
            .collect();
        let n: f64 = groups.iter().map(|g| g.2).sum();
        let both_free = !spec.intercept_prior.is_fixed() && !spec.slope_prior.is_fixed();
        let center = if both_free && n > 0.0 {
            groups.iter().map(|g| g.0 * g.2).sum::<f64>() / n
        } else {
            0.0
        };
        Target {
            priors: spec.priors(),
            groups,
            center,
        }
    }

    fn to_natural(&self, u: &[f64; 3]) -> [f64; 3] {
        [u[0] - u[1] * self.center, u[1], u[2]]
    }

    fn to_sampling(&self, p: &[f64; 3]) -> [f64; 3] {
        [p[0] + p[1] * self.center, p[1], p[2]]
    }

    fn ln_density(&self, u: &[f64; 3]) -> f64 {
        let p = self.to_natural(u);
        let mut lp: f64 = self
            .priors
            .iter()
            .zip(p.iter())
            .map(|(prior, &x)| prior.ln_density(x))
            .sum();
        if !lp.is_finite() {
            return f64::NEG_INFINITY;
        }
        let theta = p[2].exp();
        if !(theta > 0.0) {
            return f64::NEG_INFINITY;
        }
        for &(x, y, n) in &self.groups {
            lp += n * negbin_kernel(y, p[0] + p[1] * x, theta);
        }
        if lp.is_nan() {
            f64::NEG_INFINITY
        } else {
            lp
        }
    }

    fn free(&self) -> Vec<usize> {
        (0..3).filter(|&i| !self.priors[i].is_fixed()).collect()
    }

    fn initial<R: Rng>(&self, rng: &mut R, mean_outcome: Option<f64>) -> [f64; 3] {
        let mut p = [0.0; 3];
        for (i, prior) in self.priors.iter().enumerate() {
            p[i] = match prior {
                ParamPrior::Fixed { value } => *value,
                ParamPrior::Normal { .. } => {
                    let z: f64 = rng.sample(StandardNormal);
                    match (i, mean_outcome) {
                        (0, Some(m)) => (m + 0.1).ln() + 0.3 * z,
                        (1, Some(_)) => 0.2 * z,
                        (2, Some(_)) => 0.5 * z,
                        _ => prior.center() + 0.5 * prior.spread() * z,
                    }
                }
            };
        }
        if mean_outcome.is_some() && !self.priors[0].is_fixed() {
            // start the intercept at the centered value
            p[0] -= p[1] * self.center;
        }
        self.to_sampling(&p)
    }
}

struct ChainOutput {
    draws: Vec<ParamDraw>,
    acceptance: f64,
}

fn run_chain(target: &Target, cfg: &McmcConfig, chain: usize, mean_outcome: Option<f64>) -> ChainOutput {
    let mut rng = stream(cfg.seed, Domain::Chain, &[chain as u64]);
    let free = target.free();
    let d = free.len().max(1) as f64;

    let mut u = target.initial(&mut rng, mean_outcome);
    let mut lp = target.ln_density(&u);
    // A start outside the support is pulled back to the prior centers.
    if !lp.is_finite() {
        let centers = target.priors.map(|p| p.center());
        u = target.to_sampling(&centers);
        lp = target.ln_density(&u);
    }

    let mut base = [0.1f64; 3];
    for &i in &free {
        base[i] = 0.1 * target.priors[i].spread().clamp(0.1, 1.0);
    }
    let mut log_lambda = 0.0f64;
    let mut rm_step = 0usize;
    let marks = [cfg.warmup / 4, cfg.warmup / 2, 3 * cfg.warmup / 4];
    let mut window: Vec<[f64; 3]> = Vec::with_capacity(cfg.warmup / 4 + 1);

    let mut draws = Vec::with_capacity(cfg.keep);
    let mut accepted = 0usize;
    let total = cfg.warmup + cfg.keep;
    for t in 0..total {
        let warm = t < cfg.warmup;
        if !free.is_empty() {
            let scale = log_lambda.exp();
            let mut prop = u;
            for &i in &free {
                let z: f64 = rng.sample(StandardNormal);
                prop[i] += scale * base[i] * z;
            }
            let lp_prop = target.ln_density(&prop);
            let log_ratio = lp_prop - lp;
            let accept_prob = if log_ratio >= 0.0 { 1.0 } else { log_ratio.exp() };
            let uniform: f64 = rng.random();
            if uniform < accept_prob {
                u = prop;
                lp = lp_prop;
                if !warm {
                    accepted += 1;
                }
            }
            if warm {
                rm_step += 1;
                let gain = (rm_step as f64).powf(-0.6);
                log_lambda += gain * (accept_prob - cfg.target_acceptance);
                log_lambda = log_lambda.clamp(-10.0, 5.0);
                window.push(u);
                if marks.contains(&(t + 1)) && window.len() >= 20 {
                    for &i in &free {
                        let n = window.len() as f64;
                        let m = window.iter().map(|w| w[i]).sum::<f64>() / n;
                        let v = window.iter().map(|w| (w[i] - m).powi(2)).sum::<f64>() / (n - 1.0);
                        if v > 0.0 {
                            base[i] = 2.38 / d.sqrt() * v.sqrt();
                        }
                    }
                    log_lambda = 0.0;
                    rm_step = 0;
                    window.clear();
                }
            }
        }
        if !warm {
            let p = target.to_natural(&u);
            draws.push(ParamDraw::new(p[0], p[1], p[2].exp()));
        }
    }
    ChainOutput {
        draws,
        acceptance: if free.is_empty() { 1.0 } else { accepted as f64 / cfg.keep as f64 },
    }
}

fn run(spec: &NegBinModelSpec, cfg: &McmcConfig, sample: Option<&CitationErrorSample>) -> Result<NegBinPosterior> {
    spec.validate()?;
    cfg.validate()?;
    let target = Target::new(spec, sample);
    let mean_outcome = sample.map(|s| s.rows.iter().map(|r| r.omitted as f64).sum::<f64>() / s.len() as f64);
    let outputs: Vec<ChainOutput> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_chain(&target, cfg, c, mean_outcome))
        .collect();
    let acceptance = outputs.iter().map(|o| o.acceptance).collect();
    let draws = outputs.into_iter().flat_map(|o| o.draws).collect();
    let mut posterior = NegBinPosterior {
        spec: *spec,
        mcmc: *cfg,
        chains: cfg.chains,
        draws,
        diagnostics: McmcDiagnostics {
            acceptance,
            ..Default::default()
        },
    };
    posterior.diagnostics = mcmc_diagnostics(&posterior);
    Ok(posterior)
}

/// Fit the omitted-citation model to a sample. The result is a deterministic
/// function of (sample, spec, cfg); non-convergence is reported through
/// [`NegBinPosterior::converged`] rather than as an error.
pub fn fit_citation_error_model(
    sample: &CitationErrorSample,
    spec: &NegBinModelSpec,
    cfg: &McmcConfig,
) -> Result<NegBinPosterior> {
    sample.validate_for_fit()?;
    run(spec, cfg, Some(sample))
}

/// Run the same sampler with the likelihood switched off.
pub fn sample_prior(spec: &NegBinModelSpec, cfg: &McmcConfig) -> Result<NegBinPosterior> {
    run(spec, cfg, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ErrorPair;
    use crate::simulation::quantile;

    #[test]
    fn config_validation() {
        assert!(McmcConfig::default().validate().is_ok());
        let bad = McmcConfig { warmup: 50, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = McmcConfig { chains: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = McmcConfig { target_acceptance: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn prior_only_sampling_reproduces_intercept_prior() {
        let spec = NegBinModelSpec::default();
        let cfg = McmcConfig { keep: 5000, seed: 4, ..Default::default() };
        let post = sample_prior(&spec, &cfg).unwrap();
        let mut scale: Vec<f64> = post.draws.iter().map(|d| d.intercept.exp()).collect();
        scale.sort_by(f64::total_cmp);
        // lognormal(0, 0.8) quantiles: exp(-+1.96 * 0.8) = 0.2085, 4.797
        let lo = quantile(&scale, 0.025);
        let hi = quantile(&scale, 0.975);
        let med = quantile(&scale, 0.5);
        assert!((lo - 0.2085).abs() < 0.03, "lo {lo}");
        assert!((hi - 4.797).abs() < 0.6, "hi {hi}");
        assert!((med - 1.0).abs() < 0.08, "median {med}");
        assert!(post.draws.iter().all(|d| d.dispersion > 0.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let sample = CitationErrorSample::new(
            (0..200).map(|i| ErrorPair::new(i % 40, (i % 7 == 0) as u64 * (i % 3))).collect(),
        );
        let spec = NegBinModelSpec::default();
        let cfg = McmcConfig { warmup: 200, keep: 200, seed: 99, ..Default::default() };
        let a = fit_citation_error_model(&sample, &spec, &cfg).unwrap();
        let b = fit_citation_error_model(&sample, &spec, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 800);
        let c = fit_citation_error_model(&sample, &spec, &McmcConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a.draws, c.draws);
    }

    #[test]
    fn all_zero_outcomes_push_mean_to_zero() {
        let sample = CitationErrorSample::new((0..500).map(|i| ErrorPair::new(i % 60, 0)).collect());
        let post = fit_citation_error_model(&sample, &NegBinModelSpec::default(), &McmcConfig::with_seed(2)).unwrap();
        let mut m16: Vec<f64> = post.draws.iter().map(|d| d.mean_at(16.0)).collect();
        m16.sort_by(f64::total_cmp);
        let med = quantile(&m16, 0.5);
        assert!(med < 0.1, "median mean at c=16: {med}");
    }

    #[test]
    fn fixed_parameters_stay_fixed() {
        let mut spec = NegBinModelSpec::default();
        spec.slope_prior = ParamPrior::Fixed { value: 0.0 };
        spec.dispersion_prior = ParamPrior::Fixed { value: 2.0 };
        let sample = CitationErrorSample::from_pairs(&[(1, 0), (5, 1), (9, 2), (3, 0)]);
        let cfg = McmcConfig { warmup: 100, keep: 100, ..Default::default() };
        let post = fit_citation_error_model(&sample, &spec, &cfg).unwrap();
        assert!(post.draws.iter().all(|d| d.slope == 0.0 && (d.dispersion - 2f64.exp()).abs() < 1e-12));
        assert!(post.diagnostics.parameters[1].rhat.is_none());
    }

    #[test]
    fn too_small_sample_rejected() {
        let sample = CitationErrorSample::from_pairs(&[(1, 0)]);
        assert!(fit_citation_error_model(&sample, &NegBinModelSpec::default(), &McmcConfig::default()).is_err());
    }
}
