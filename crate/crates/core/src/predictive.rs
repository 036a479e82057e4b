//! Posterior-predictive draws of citation counts and document types.
//!
//! Monte Carlo iteration `j` is one hypothetical dataset: it uses posterior
//! parameter draw `j` (cycled) and one transition matrix drawn from the
//! Dirichlet posterior, shared by every publication in that iteration. Each
//! publication then draws its own values from a stream keyed by
//! (seed, iteration, publication key, channel), so a publication's draws do
//! not depend on which other publications are processed or in what order.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{DocType, Publication};
use crate::error::{Error, Result};
use crate::models::{DirichletPosterior, ModelKind, NegBinPosterior, ParamDraw};
use crate::rng::{item_key, stream, Domain, StreamRng};

/// Which error sources are simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Channels {
    pub citations: bool,
    pub doctypes: bool,
}

impl Channels {
    pub const CITATIONS: Channels = Channels { citations: true, doctypes: false };
    pub const DOCTYPES: Channels = Channels { citations: false, doctypes: true };
    pub const BOTH: Channels = Channels { citations: true, doctypes: true };

    pub fn any(&self) -> bool {
        self.citations || self.doctypes
    }
}

impl fmt::Display for Channels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.citations {
            parts.push("citations");
        }
        if self.doctypes {
            parts.push("doctypes");
        }
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Channels {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let mut ch = Channels { citations: false, doctypes: false };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "citations" => ch.citations = true,
                "doctypes" => ch.doctypes = true,
                other => return Err(format!("unknown channel `{other}` (expected citations, doctypes)")),
            }
        }
        if !ch.any() {
            return Err("at least one channel must be enabled".into());
        }
        Ok(ch)
    }
}

/// Fitted models available to a run. Either may be absent when its channel
/// is disabled.
#[derive(Debug, Clone, Default)]
pub struct ErrorModels {
    pub citation: Option<NegBinPosterior>,
    pub doctype: Option<DirichletPosterior>,
}

/// One simulated value of a publication in one iteration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictiveDraw {
    pub iteration: usize,
    pub publication_id: String,
    pub predicted_citations: u64,
    pub predicted_doctype: DocType,
}

/// Parameters shared by all publications within one iteration.
#[derive(Debug, Clone, Copy)]
pub struct World {
    citation: Option<ParamDraw>,
    doctype: Option<[[f64; 4]; 4]>,
}

const CITATION_STREAM: u64 = 1;
const DOCTYPE_STREAM: u64 = 2;

/// Draws predicted values for publications under a fixed set of models,
/// direction, channels, and seed.
#[derive(Debug, Clone, Copy)]
pub struct PredictiveEngine<'a> {
    kind: ModelKind,
    channels: Channels,
    citation: Option<&'a NegBinPosterior>,
    doctype: Option<&'a DirichletPosterior>,
    seed: u64,
    shared_parameters: bool,
}

impl<'a> PredictiveEngine<'a> {
    /// Fails with a usage error when an enabled channel has no model, a
    /// posterior is empty, or a model was fitted in the other direction.
    pub fn new(models: &'a ErrorModels, channels: Channels, kind: ModelKind, seed: u64) -> Result<Self> {
        if !channels.any() {
            return Err(Error::Usage("at least one error channel must be enabled".into()));
        }
        let citation = if channels.citations {
            let post = models
                .citation
                .as_ref()
                .ok_or_else(|| Error::Usage("citations channel enabled but no citation model given".into()))?;
            check_citation_posterior(post, kind)?;
            Some(post)
        } else {
            None
        };
        let doctype = if channels.doctypes {
            let post = models
                .doctype
                .as_ref()
                .ok_or_else(|| Error::Usage("doctypes channel enabled but no document-type model given".into()))?;
            if post.kind != kind {
                return Err(Error::Usage(format!(
                    "document-type model is {} but the run is {kind}",
                    post.kind
                )));
            }
            Some(post)
        } else {
            None
        };
        Ok(PredictiveEngine {
            kind,
            channels,
            citation,
            doctype,
            seed,
            shared_parameters: true,
        })
    }

    /// When false, every publication draws its own parameters instead of
    /// sharing the iteration's draw.
    pub fn shared_parameters(mut self, shared: bool) -> Self {
        self.shared_parameters = shared;
        self
    }

    pub fn channels(&self) -> Channels {
        self.channels
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn world(&self, iteration: usize) -> World {
        let citation = self.citation.map(|p| *p.cycled(iteration));
        let doctype = self.doctype.map(|p| {
            let mut rng = stream(self.seed, Domain::Iteration, &[iteration as u64]);
            p.draw_matrix(&mut rng)
        });
        World { citation, doctype }
    }

    fn item_rng(&self, iteration: usize, key: u64, channel: u64) -> StreamRng {
        stream(self.seed, Domain::Item, &[iteration as u64, key, channel])
    }

    /// Predicted (doctype, citations) of one publication in one iteration.
    /// Disabled channels pass values through.
    pub fn draw(&self, world: &World, iteration: usize, key: u64, doctype: DocType, citations: u64) -> (DocType, u64) {
        let mut out_type = doctype;
        if let Some(post) = self.doctype {
            let mut rng = self.item_rng(iteration, key, DOCTYPE_STREAM);
            let probs = match (self.shared_parameters, world.doctype) {
                (true, Some(m)) => m[doctype.index()],
                _ => post.draw_probabilities(&mut rng, doctype),
            };
            out_type = crate::models::sample_category(&mut rng, &probs);
        }
        let mut out_citations = citations;
        if let Some(post) = self.citation {
            let mut rng = self.item_rng(iteration, key, CITATION_STREAM);
            let params = match (self.shared_parameters, world.citation) {
                (true, Some(p)) => p,
                _ => *post.cycled(rng.random_range(0..post.len())),
            };
            let omitted = params.sample(&mut rng, citations as f64);
            out_citations = match self.kind {
                ModelKind::SecondKind => citations.saturating_add(omitted),
                ModelKind::FirstKind => citations.saturating_sub(omitted),
            };
        }
        (out_type, out_citations)
    }

    /// `n` iterations of draws for one publication.
    pub fn publication_draws(&self, publication: &Publication, n: usize) -> Vec<PredictiveDraw> {
        let key = item_key(&publication.id);
        (0..n)
            .map(|j| {
                let world = self.world(j);
                let (d, c) = self.draw(&world, j, key, publication.doctype, publication.citations);
                PredictiveDraw {
                    iteration: j,
                    publication_id: publication.id.clone(),
                    predicted_citations: c,
                    predicted_doctype: d,
                }
            })
            .collect()
    }
}

fn check_citation_posterior(post: &NegBinPosterior, kind: ModelKind) -> Result<()> {
    if post.is_empty() {
        return Err(Error::Usage("citation posterior has no draws".into()));
    }
    if post.kind() != kind {
        return Err(Error::Usage(format!(
            "citation model is {} but the run is {kind}",
            post.kind()
        )));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Usage("draw count must be at least 1".into()));
    }
    Ok(())
}

/// Predicted omitted citations for a predictor count `c`. Draw `j` uses
/// posterior draw `j` (cycled), so parameter uncertainty and sampling noise
/// both propagate.
pub fn predict_omitted(posterior: &NegBinPosterior, c: u64, n: usize, seed: u64) -> Result<Vec<u64>> {
    check_n(n)?;
    if posterior.is_empty() {
        return Err(Error::Usage("citation posterior has no draws".into()));
    }
    Ok((0..n)
        .map(|j| {
            let mut rng = stream(seed, Domain::Item, &[j as u64, 0, CITATION_STREAM]);
            posterior.cycled(j).sample(&mut rng, c as f64)
        })
        .collect())
}

/// Error-free citation counts `c_new + o_hat` from a second-kind model.
pub fn predict_error_free_citations(posterior: &NegBinPosterior, c_new: u64, n: usize, seed: u64) -> Result<Vec<u64>> {
    check_citation_posterior(posterior, ModelKind::SecondKind)?;
    Ok(predict_omitted(posterior, c_new, n, seed)?
        .into_iter()
        .map(|o| c_new.saturating_add(o))
        .collect())
}

/// Error-affected citation counts `max(0, c_star - o_hat)` from a first-kind
/// model. The floor is applied after subtraction.
pub fn predict_error_affected_citations(posterior: &NegBinPosterior, c_star: u64, n: usize, seed: u64) -> Result<Vec<u64>> {
    check_citation_posterior(posterior, ModelKind::FirstKind)?;
    Ok(predict_omitted(posterior, c_star, n, seed)?
        .into_iter()
        .map(|o| c_star.saturating_sub(o))
        .collect())
}

/// Predicted document types: each draw samples a probability vector from the
/// conditioning row's Dirichlet, then a category from it.
pub fn predict_doctype(posterior: &DirichletPosterior, given: DocType, n: usize, seed: u64) -> Result<Vec<DocType>> {
    check_n(n)?;
    Ok((0..n)
        .map(|j| {
            let mut rng = stream(seed, Domain::Item, &[j as u64, 0, DOCTYPE_STREAM]);
            let probs = posterior.draw_probabilities(&mut rng, given);
            crate::models::sample_category(&mut rng, &probs)
        })
        .collect())
}

/// Predicted doctypes from a label, rejecting anything but the four
/// canonical category names.
pub fn predict_doctype_label(posterior: &DirichletPosterior, given: &str, n: usize, seed: u64) -> Result<Vec<DocType>> {
    let d = DocType::ALL
        .into_iter()
        .find(|d| d.label().eq_ignore_ascii_case(given.trim()))
        .ok_or_else(|| Error::Usage(format!("unknown conditioning document type `{given}`")))?;
    predict_doctype(posterior, d, n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DocTypeConfusionTable;
    use crate::models::{fit_doctype_error_model, NegBinModelSpec};
    use proptest::prelude::*;

    fn point(kind: ModelKind, b0: f64, b1: f64, theta: f64) -> NegBinPosterior {
        NegBinPosterior::point(NegBinModelSpec::new(kind), ParamDraw::new(b0, b1, theta))
    }

    #[test]
    fn degenerate_zero_mean_posterior() {
        let post = point(ModelKind::SecondKind, f64::NEG_INFINITY, 0.0, 1.0);
        assert!(predict_omitted(&post, 50, 1000, 1).unwrap().iter().all(|&o| o == 0));
        assert!(predict_error_free_citations(&post, 0, 100, 1).unwrap().iter().all(|&c| c == 0));
    }

    #[test]
    fn poisson_limit_mean() {
        // b0 = 0, b1 = 0, theta -> inf gives Poisson(1)
        let post = point(ModelKind::SecondKind, 0.0, 0.0, f64::INFINITY);
        let n = 100_000;
        let draws = predict_omitted(&post, 7, n, 3).unwrap();
        let mean = draws.iter().sum::<u64>() as f64 / n as f64;
        let se = (1.0 / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean}");
        // large finite theta behaves the same
        let post = point(ModelKind::SecondKind, 0.0, 0.0, 1e9);
        let draws = predict_omitted(&post, 7, n, 4).unwrap();
        let mean = draws.iter().sum::<u64>() as f64 / n as f64;
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn clamp_applies_after_subtraction() {
        let post = point(ModelKind::FirstKind, 3.0, 0.0, 1.0);
        assert!(predict_error_affected_citations(&post, 0, 500, 1).unwrap().iter().all(|&c| c == 0));
        let draws = predict_error_affected_citations(&post, 3, 2000, 1).unwrap();
        assert!(draws.iter().all(|&c| c <= 3));
        assert!(draws.contains(&0));
    }

    #[test]
    fn direction_mismatch_is_usage_error() {
        let first = point(ModelKind::FirstKind, 0.0, 0.0, 1.0);
        let second = point(ModelKind::SecondKind, 0.0, 0.0, 1.0);
        assert!(matches!(predict_error_free_citations(&first, 1, 1, 1), Err(Error::Usage(_))));
        assert!(matches!(predict_error_affected_citations(&second, 1, 1, 1), Err(Error::Usage(_))));
        assert!(matches!(predict_omitted(&second, 1, 0, 1), Err(Error::Usage(_))));
    }

    #[test]
    fn empty_posterior_is_usage_error() {
        let mut post = point(ModelKind::SecondKind, 0.0, 0.0, 1.0);
        post.draws.clear();
        assert!(matches!(predict_omitted(&post, 1, 1, 1), Err(Error::Usage(_))));
    }

    #[test]
    fn uniform_row_frequencies() {
        let post = fit_doctype_error_model(&DocTypeConfusionTable::new([[10; 4]; 4]), 1.0, ModelKind::SecondKind).unwrap();
        let n = 10_000;
        let draws = predict_doctype(&post, DocType::Letter, n, 5).unwrap();
        for d in DocType::ALL {
            let f = draws.iter().filter(|&&x| x == d).count() as f64 / n as f64;
            assert!((f - 0.25).abs() < 0.02, "{d}: {f}");
        }
    }

    #[test]
    fn unknown_label_rejected() {
        let post = fit_doctype_error_model(&DocTypeConfusionTable::default(), 1.0, ModelKind::SecondKind).unwrap();
        assert!(matches!(predict_doctype_label(&post, "editorial", 3, 1), Err(Error::Usage(_))));
        assert_eq!(predict_doctype_label(&post, "Review", 3, 1).unwrap().len(), 3);
    }

    #[test]
    fn channels_parse() {
        assert_eq!("citations,doctypes".parse::<Channels>().unwrap(), Channels::BOTH);
        assert_eq!("doctypes".parse::<Channels>().unwrap(), Channels::DOCTYPES);
        assert!("".parse::<Channels>().is_err());
        assert!("citations,typo".parse::<Channels>().is_err());
    }

    #[test]
    fn missing_model_is_usage_error() {
        let models = ErrorModels::default();
        let err = PredictiveEngine::new(&models, Channels::CITATIONS, ModelKind::SecondKind, 1).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    proptest! {
        #[test]
        fn second_kind_never_below_observed(c in 0u64..500, b0 in -3.0f64..2.0, b1 in -1.0f64..1.5, theta in 0.05f64..20.0, seed in any::<u64>()) {
            let post = point(ModelKind::SecondKind, b0, b1, theta);
            for d in predict_error_free_citations(&post, c, 50, seed).unwrap() {
                prop_assert!(d >= c);
            }
        }

        #[test]
        fn first_kind_bounded(c in 0u64..500, b0 in -3.0f64..3.0, b1 in -1.0f64..1.5, theta in 0.05f64..20.0, seed in any::<u64>()) {
            let post = point(ModelKind::FirstKind, b0, b1, theta);
            for d in predict_error_affected_citations(&post, c, 50, seed).unwrap() {
                prop_assert!(d <= c);
            }
        }
    }
}
