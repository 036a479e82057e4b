//! Bayesian error models: negative-binomial regression for omitted citations
//! and a Dirichlet-categorical model for document-type misassignment.

mod diagnostics;
mod dirichlet;
mod mcmc;
mod negbin;
mod prior;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use diagnostics::{effective_sample_size, mcmc_diagnostics, split_rhat, McmcDiagnostics, ParamDiagnostics, RHAT_THRESHOLD};
pub use dirichlet::{fit_doctype_error_model, DirichletPosterior};
pub(crate) use dirichlet::sample_category;
pub use mcmc::{fit_citation_error_model, sample_prior, McmcConfig};
pub use negbin::{
    negbin_ln_pmf, sample_negbin, NegBinModelSpec, NegBinPosterior, ParamDraw, ParamPrior,
    PARAM_NAMES,
};
pub use prior::{prior_predictive_check, GridSummary, PriorPredictiveSummary, DEFAULT_PRIOR_GRID};

/// Direction of prediction.
///
/// `SecondKind` models predict error-free values from observed, error-affected
/// data (correction). `FirstKind` models predict error-affected values from
/// known error-free data (error injection).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    FirstKind,
    SecondKind,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::FirstKind => "first-kind",
            ModelKind::SecondKind => "second-kind",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first-kind" | "first" | "inject" => Ok(ModelKind::FirstKind),
            "second-kind" | "second" | "correct" => Ok(ModelKind::SecondKind),
            other => Err(format!(
                "unknown model direction `{other}` (expected first-kind or second-kind)"
            )),
        }
    }
}
