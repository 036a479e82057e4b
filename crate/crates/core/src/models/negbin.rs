use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::diagnostics::McmcDiagnostics;
use super::mcmc::McmcConfig;
use super::ModelKind;
use crate::error::{Error, Result};

pub const PARAM_NAMES: [&str; 3] = ["intercept", "slope", "log_dispersion"];

/// Prior on one regression parameter. `Fixed` removes the parameter from
/// sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ParamPrior {
    Normal { mean: f64, sd: f64 },
    Fixed { value: f64 },
}

impl ParamPrior {
    pub fn normal(mean: f64, sd: f64) -> Self {
        ParamPrior::Normal { mean, sd }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, ParamPrior::Fixed { .. })
    }

    pub(crate) fn ln_density(&self, x: f64) -> f64 {
        match *self {
            ParamPrior::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                -0.5 * z * z - sd.ln()
            }
            ParamPrior::Fixed { .. } => 0.0,
        }
    }

    pub(crate) fn center(&self) -> f64 {
        match *self {
            ParamPrior::Normal { mean, .. } => mean,
            ParamPrior::Fixed { value } => value,
        }
    }

    pub(crate) fn spread(&self) -> f64 {
        match *self {
            ParamPrior::Normal { sd, .. } => sd,
            ParamPrior::Fixed { .. } => 0.0,
        }
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ParamPrior::Normal { mean, sd } => {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                mean + sd * z
            }
            ParamPrior::Fixed { value } => value,
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        match *self {
            ParamPrior::Normal { mean, sd } if mean.is_finite() && sd.is_finite() && sd > 0.0 => Ok(()),
            ParamPrior::Fixed { value } if value.is_finite() => Ok(()),
            other => Err(Error::Validation(format!("invalid {name} prior {other:?}"))),
        }
    }
}

/// Negative-binomial regression of omitted citations on `ln(c + 1)`:
///
/// `o ~ NegBin(mean = exp(b0 + b1 * ln(c + 1)), dispersion = theta)`,
/// with variance `mean + mean^2 / theta`. For second-kind models `c` is the
/// observed count; for first-kind models it is the error-free count
/// (observed plus omitted).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegBinModelSpec {
    pub kind: ModelKind,
    pub intercept_prior: ParamPrior,
    pub slope_prior: ParamPrior,
    /// Prior on `ln(theta)`.
    pub dispersion_prior: ParamPrior,
}

impl NegBinModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        NegBinModelSpec {
            kind,
            intercept_prior: ParamPrior::normal(0.0, 0.8),
            slope_prior: ParamPrior::normal(0.0, 1.0),
            dispersion_prior: ParamPrior::normal(0.0, 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.intercept_prior.validate("intercept")?;
        self.slope_prior.validate("slope")?;
        self.dispersion_prior.validate("dispersion")
    }

    pub(crate) fn priors(&self) -> [ParamPrior; 3] {
        [self.intercept_prior, self.slope_prior, self.dispersion_prior]
    }
}

impl Default for NegBinModelSpec {
    fn default() -> Self {
        Self::new(ModelKind::SecondKind)
    }
}

/// One posterior draw of the regression parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamDraw {
    pub intercept: f64,
    pub slope: f64,
    pub dispersion: f64,
}

impl ParamDraw {
    pub fn new(intercept: f64, slope: f64, dispersion: f64) -> Self {
        ParamDraw {
            intercept,
            slope,
            dispersion,
        }
    }

    /// Expected omitted citations for a predictor count `c`.
    pub fn mean_at(&self, c: f64) -> f64 {
        (self.intercept + self.slope * (c + 1.0).ln()).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, c: f64) -> u64 {
        sample_negbin(rng, self.mean_at(c), self.dispersion)
    }

    /// Parameter `i` in [`PARAM_NAMES`] order, dispersion on the log scale.
    pub fn component(&self, i: usize) -> f64 {
        match i {
            0 => self.intercept,
            1 => self.slope,
            _ => self.dispersion.ln(),
        }
    }
}

/// Posterior draws from [`fit_citation_error_model`](super::fit_citation_error_model),
/// stored chain by chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegBinPosterior {
    pub spec: NegBinModelSpec,
    pub mcmc: McmcConfig,
    pub chains: usize,
    pub draws: Vec<ParamDraw>,
    pub diagnostics: McmcDiagnostics,
}

impl NegBinPosterior {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn per_chain(&self) -> usize {
        if self.chains == 0 {
            0
        } else {
            self.draws.len() / self.chains
        }
    }

    pub fn chain(&self, i: usize) -> &[ParamDraw] {
        let n = self.per_chain();
        &self.draws[i * n..(i + 1) * n]
    }

    /// Draw `j`, cycling when `j` exceeds the number of stored draws.
    pub fn cycled(&self, j: usize) -> &ParamDraw {
        &self.draws[j % self.draws.len()]
    }

    /// True when every available R-hat is below the threshold.
    pub fn converged(&self) -> bool {
        self.diagnostics.converged
    }

    /// A posterior holding the single given draw; for tests and for
    /// deterministic scenarios.
    pub fn point(spec: NegBinModelSpec, draw: ParamDraw) -> Self {
        NegBinPosterior {
            spec,
            mcmc: McmcConfig::default(),
            chains: 1,
            draws: vec![draw],
            diagnostics: McmcDiagnostics::default(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let post: NegBinPosterior = serde_json::from_str(text)?;
        if post.draws.iter().any(|d| !(d.dispersion > 0.0)) {
            return Err(Error::Validation("posterior contains non-positive dispersion draws".into()));
        }
        Ok(post)
    }
}

/// Draw from NegBin(mean, theta) as a gamma-Poisson mixture. An infinite
/// `theta` gives Poisson(mean); a zero or non-finite mean gives 0.
pub fn sample_negbin<R: Rng + ?Sized>(rng: &mut R, mean: f64, theta: f64) -> u64 {
    if !(mean > 0.0) || !mean.is_finite() {
        return 0;
    }
    let rate = if theta.is_infinite() {
        mean
    } else {
        match Gamma::new(theta, mean / theta) {
            Ok(g) => g.sample(rng),
            Err(_) => return 0,
        }
    };
    if !(rate > 0.0) {
        return 0;
    }
    match Poisson::new(rate) {
        Ok(p) => {
            let v: f64 = p.sample(rng);
            v as u64
        }
        Err(_) => u64::MAX,
    }
}

/// `ln Gamma(y + theta) - ln Gamma(theta)`, summed exactly for small `y`.
fn ln_rising(theta: f64, y: u64) -> f64 {
    if y <= 32 {
        (0..y).map(|k| (theta + k as f64).ln()).sum()
    } else {
        ln_gamma(theta + y as f64) - ln_gamma(theta)
    }
}

fn ln_factorial(y: u64) -> f64 {
    ln_gamma(y as f64 + 1.0)
}

/// Log-likelihood of `y` under NegBin with log-mean `eta` and dispersion
/// `theta`, dropping the `ln y!` term.
pub(crate) fn negbin_kernel(y: u64, eta: f64, theta: f64) -> f64 {
    let mean = eta.exp();
    if mean == 0.0 {
        return if y == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let yf = y as f64;
    if theta.is_infinite() {
        return yf * eta - mean;
    }
    let l1p = (mean / theta).ln_1p();
    ln_rising(theta, y) + yf * (eta - theta.ln() - l1p) - theta * l1p
}

/// Log probability mass of NegBin(mean, theta) at `y`.
pub fn negbin_ln_pmf(y: u64, mean: f64, theta: f64) -> f64 {
    if mean <= 0.0 {
        return if y == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    negbin_kernel(y, mean.ln(), theta) - ln_factorial(y)
}
