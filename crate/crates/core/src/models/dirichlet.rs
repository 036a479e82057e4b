use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::ModelKind;
use crate::data::{DocType, DocTypeConfusionTable};
use crate::error::{Error, Result};

/// Conjugate posterior of the document-type model: one Dirichlet per
/// conditioning type over the four predicted types.
///
/// For second-kind models the conditioning type is the observed type and the
/// prediction is the true type; first-kind models condition on the true type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletPosterior {
    pub kind: ModelKind,
    pub pseudocount: f64,
    /// `concentrations[conditioning][predicted]`.
    pub concentrations: [[f64; 4]; 4],
}

pub fn fit_doctype_error_model(
    table: &DocTypeConfusionTable,
    pseudocount: f64,
    kind: ModelKind,
) -> Result<DirichletPosterior> {
    if !(pseudocount > 0.0) || !pseudocount.is_finite() {
        return Err(Error::Validation(format!(
            "pseudocount must be positive and finite, got {pseudocount}"
        )));
    }
    let mut concentrations = [[0.0; 4]; 4];
    for t in DocType::ALL {
        for o in DocType::ALL {
            let n = table.count(t, o) as f64 + pseudocount;
            match kind {
                ModelKind::SecondKind => concentrations[o.index()][t.index()] = n,
                ModelKind::FirstKind => concentrations[t.index()][o.index()] = n,
            }
        }
    }
    Ok(DirichletPosterior {
        kind,
        pseudocount,
        concentrations,
    })
}

impl DirichletPosterior {
    pub fn row(&self, given: DocType) -> &[f64; 4] {
        &self.concentrations[given.index()]
    }

    /// Posterior mean probabilities of each predicted type.
    pub fn mean_probabilities(&self, given: DocType) -> [f64; 4] {
        let row = self.row(given);
        let total: f64 = row.iter().sum();
        row.map(|a| a / total)
    }

    /// Draw one probability vector for the given conditioning type.
    pub fn draw_probabilities<R: Rng + ?Sized>(&self, rng: &mut R, given: DocType) -> [f64; 4] {
        let row = self.row(given);
        let mut p = [0.0; 4];
        for (pi, &a) in p.iter_mut().zip(row) {
            *pi = Gamma::new(a, 1.0).map(|g| g.sample(rng)).unwrap_or(0.0);
        }
        let total: f64 = p.iter().sum();
        if total > 0.0 && total.is_finite() {
            p.map(|x| x / total)
        } else {
            // every gamma draw underflowed (tiny concentrations)
            self.mean_probabilities(given)
        }
    }

    /// Draw a full 4x4 transition matrix, one row per conditioning type.
    pub fn draw_matrix<R: Rng + ?Sized>(&self, rng: &mut R) -> [[f64; 4]; 4] {
        DocType::ALL.map(|d| self.draw_probabilities(rng, d))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let post: DirichletPosterior = serde_json::from_str(text)?;
        if post.concentrations.iter().flatten().any(|&a| !(a > 0.0)) {
            return Err(Error::Validation("Dirichlet concentrations must be positive".into()));
        }
        Ok(post)
    }
}

/// Sample a category from a probability vector.
pub(crate) fn sample_category<R: Rng + ?Sized>(rng: &mut R, probs: &[f64; 4]) -> DocType {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return DocType::from_index(i);
        }
    }
    // rounding left the cumulative sum just under 1
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(3);
    DocType::from_index(last)
}
