use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{DocType, Publication, PublicationSet, SetRole};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

/// Share of each document type, indexed by [`DocType::index`].
pub const DEFAULT_DOCTYPE_MIX: [f64; 4] = [0.68, 0.04, 0.03, 0.25];
/// Multiplier of the set location per document type, indexed by
/// [`DocType::index`].
pub const DEFAULT_SCALING: [f64; 4] = [1.0, 1.5, 0.2, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Discretize {
    Floor,
    Round,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub name: String,
    pub role: SetRole,
    pub size: usize,
    /// Location of the citation lognormal before doctype scaling.
    pub location: f64,
}

impl ScenarioSet {
    pub fn unit(name: &str, size: usize, location: f64) -> Self {
        ScenarioSet {
            name: name.into(),
            role: SetRole::AssessedUnit,
            size,
            location,
        }
    }

    pub fn reference(name: &str, size: usize, location: f64) -> Self {
        ScenarioSet {
            name: name.into(),
            role: SetRole::ReferenceSet,
            size,
            location,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub sets: Vec<ScenarioSet>,
    pub doctype_mix: [f64; 4],
    pub scaling: [f64; 4],
    /// Scale (sd on the log scale) of the citation lognormal.
    pub scale: f64,
    pub discretize: Discretize,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(sets: Vec<ScenarioSet>, seed: u64) -> Self {
        ScenarioConfig {
            sets,
            doctype_mix: DEFAULT_DOCTYPE_MIX,
            scaling: DEFAULT_SCALING,
            scale: 1.0,
            discretize: Discretize::Floor,
            seed,
        }
    }

    /// Units A (40) and B (50) with a 200-item reference set.
    pub fn exercise_2(seed: u64) -> Self {
        Self::new(
            vec![
                ScenarioSet::unit("A", 40, 0.8),
                ScenarioSet::unit("B", 50, 1.2),
                ScenarioSet::reference("ref", 200, 1.0),
            ],
            seed,
        )
    }

    /// Units A (20) and B (30) with a 1000-item reference set, treated as
    /// error-free data.
    pub fn exercise_a(seed: u64) -> Self {
        Self::new(
            vec![
                ScenarioSet::unit("A", 20, 5f64.ln()),
                ScenarioSet::unit("B", 30, 7f64.ln()),
                ScenarioSet::reference("ref", 1000, 6f64.ln()),
            ],
            seed,
        )
    }

    /// The A scenario at 2000 / 3000 / 10000 publications.
    pub fn exercise_a4(seed: u64) -> Self {
        let mut cfg = Self::exercise_a(seed);
        for (s, n) in cfg.sets.iter_mut().zip([2000, 3000, 10_000]) {
            s.size = n;
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.doctype_mix.iter().sum();
        if (total - 1.0).abs() > 1e-9 || self.doctype_mix.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::Validation(format!(
                "doctype mixture must be non-negative and sum to 1, got {:?}",
                self.doctype_mix
            )));
        }
        if self.scaling.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::Validation(format!("scaling factors must be positive, got {:?}", self.scaling)));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::Validation(format!("lognormal scale must be positive, got {}", self.scale)));
        }
        if self.sets.iter().any(|s| !s.location.is_finite()) {
            return Err(Error::Validation("set locations must be finite".into()));
        }
        Ok(())
    }
}

fn pick(u: f64, mix: &[f64; 4]) -> DocType {
    let mut acc = 0.0;
    for d in DocType::ALL {
        acc += mix[d.index()];
        if u < acc {
            return d;
        }
    }
    let last = mix.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    DocType::from_index(last)
}

/// Synthetic publication sets with mixture doctypes and discretized
/// lognormal citations. Ids are `<set>-<n>` counting from 1.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<Vec<PublicationSet>> {
    use rand::Rng;
    cfg.validate()?;
    let normal = Normal::new(0.0, cfg.scale).expect("validated scale");
    cfg.sets
        .iter()
        .enumerate()
        .map(|(s, set)| {
            let mut rng = stream(cfg.seed, Domain::Scenario, &[s as u64]);
            let members = (0..set.size)
                .map(|i| {
                    let d = pick(rng.random(), &cfg.doctype_mix);
                    let x = (set.location * cfg.scaling[d.index()] + normal.sample(&mut rng)).exp();
                    let c = match cfg.discretize {
                        Discretize::Floor => x.floor(),
                        Discretize::Round => x.round(),
                    };
                    Publication::new(format!("{}-{}", set.name, i + 1), &set.name, d, c.max(0.0) as u64)
                })
                .collect();
            PublicationSet::new(set.name.clone(), set.role, members)
        })
        .collect()
}
