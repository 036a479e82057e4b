use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::propagate::{propagate, PropagationConfig, PropagationResult, DEFAULT_ITERATIONS};
use super::scenario::{generate_scenario, ScenarioConfig};
use super::synth::synthesize_training_sample;
use crate::data::{
    embedded_missed_citation_sample, CitationErrorSample, DocType, DocTypeConfusionTable, PublicationSet, SetRole,
};
use crate::error::{Error, Result};
use crate::indicators::{KeyMode, Universe};
use crate::models::{
    fit_citation_error_model, fit_doctype_error_model, McmcConfig, ModelKind, NegBinModelSpec, NegBinPosterior,
};
use crate::predictive::{predict_doctype, predict_error_free_citations, Channels, ErrorModels};

/// Observed citation total paired with the embedded missed-citation sample.
pub const EMBEDDED_CITATION_TOTAL: u64 = 6120;
/// Correlation of observed and omitted citations in the embedded sample.
pub const EMBEDDED_CORRELATION: f64 = 0.31;

/// Stand-in for the unpublished document-type error data, as
/// `counts[true][observed]`.
pub fn synthetic_confusion_table() -> DocTypeConfusionTable {
    DocTypeConfusionTable::new([
        [965, 126, 36, 30],
        [22, 846, 0, 3],
        [9, 0, 54, 4],
        [4, 27, 10, 963],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Exercise {
    #[serde(rename = "1")]
    E1,
    #[serde(rename = "2")]
    E2,
    #[serde(rename = "3")]
    E3,
    #[serde(rename = "4")]
    E4,
    A1,
    A2,
    A3,
    A4,
}

impl Exercise {
    pub const ALL: [Exercise; 8] = [
        Exercise::E1,
        Exercise::E2,
        Exercise::E3,
        Exercise::E4,
        Exercise::A1,
        Exercise::A2,
        Exercise::A3,
        Exercise::A4,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Exercise::E1 => "1",
            Exercise::E2 => "2",
            Exercise::E3 => "3",
            Exercise::E4 => "4",
            Exercise::A1 => "A1",
            Exercise::A2 => "A2",
            Exercise::A3 => "A3",
            Exercise::A4 => "A4",
        }
    }

    pub fn kind(self) -> ModelKind {
        match self {
            Exercise::E1 | Exercise::E2 | Exercise::E3 | Exercise::E4 => ModelKind::SecondKind,
            _ => ModelKind::FirstKind,
        }
    }

    pub fn channels(self) -> Channels {
        match self {
            Exercise::E2 | Exercise::A1 => Channels::CITATIONS,
            Exercise::E3 | Exercise::A2 => Channels::DOCTYPES,
            _ => Channels::BOTH,
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Exercise::E1 => "Predicted error-free document types and citation counts of three publications",
            Exercise::E2 => "Observed citation count error-affected and simulated error-free indicator values",
            Exercise::E3 => "Observed document type error-affected and simulated error-free indicator values",
            Exercise::E4 => "Observed error-affected and simulated error-free indicator values",
            Exercise::A1 => "Error-free and simulated citation count error-affected indicator values",
            Exercise::A2 => "Error-free and simulated document type error-affected indicator values",
            Exercise::A3 => "Error-free and simulated citation count and document type error-affected indicator values",
            Exercise::A4 => "Error-free and simulated error-affected indicator values (large units)",
        }
    }

    /// Headings of the observed and simulated table halves.
    pub fn column_groups(self) -> (&'static str, &'static str) {
        match self.kind() {
            ModelKind::SecondKind => ("observed error-affected values", "simulated error-free values"),
            ModelKind::FirstKind => ("error-free values", "simulated error-affected values"),
        }
    }

    pub fn scenario(self, seed: u64) -> Option<ScenarioConfig> {
        match self {
            Exercise::E1 => None,
            Exercise::E2 | Exercise::E3 | Exercise::E4 => Some(ScenarioConfig::exercise_2(seed)),
            Exercise::A1 | Exercise::A2 | Exercise::A3 => Some(ScenarioConfig::exercise_a(seed)),
            Exercise::A4 => Some(ScenarioConfig::exercise_a4(seed)),
        }
    }
}

impl fmt::Display for Exercise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Exercise {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Exercise::ALL
            .into_iter()
            .find(|e| e.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let names: Vec<&str> = Exercise::ALL.iter().map(|e| e.label()).collect();
                Error::Usage(format!("unknown exercise `{s}`; valid names: {}", names.join(", ")))
            })
    }
}

/// Training data for the error models. Missing parts are synthesized.
#[derive(Debug, Clone, Default)]
pub struct TrainingInputs {
    pub citation_sample: Option<CitationErrorSample>,
    pub confusion: Option<DocTypeConfusionTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExerciseConfig {
    pub seed: u64,
    /// Monte Carlo iterations, or draws per publication for exercise 1.
    pub iterations: usize,
    pub mcmc: McmcConfig,
    pub pseudocount: f64,
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
}

impl ExerciseConfig {
    pub fn with_seed(seed: u64) -> Self {
        ExerciseConfig {
            seed,
            iterations: DEFAULT_ITERATIONS,
            mcmc: McmcConfig::with_seed(seed),
            pseudocount: 1.0,
            workers: None,
        }
    }
}

/// How the training data were obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub synthetic_sample: bool,
    pub synthetic_confusion: bool,
    pub sample_r: Option<f64>,
    pub converged: Option<bool>,
    pub warnings: Vec<String>,
}

/// Draw counts per document type (`doctypes`) and per citation value
/// (`citations`) for each publication of exercise 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTables {
    pub publications: Vec<String>,
    pub doctypes: Vec<BTreeMap<DocType, usize>>,
    pub citations: Vec<BTreeMap<u64, usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ExerciseOutput {
    Frequencies(FrequencyTables),
    Indicators(Box<PropagationResult>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExerciseReport {
    pub exercise: Exercise,
    pub seed: u64,
    pub training: TrainingSummary,
    pub output: ExerciseOutput,
}

fn fit_models(
    exercise: Exercise,
    inputs: &TrainingInputs,
    cfg: &ExerciseConfig,
) -> Result<(ErrorModels, TrainingSummary)> {
    let kind = exercise.kind();
    let channels = exercise.channels();
    let mut summary = TrainingSummary {
        synthetic_sample: false,
        synthetic_confusion: false,
        sample_r: None,
        converged: None,
        warnings: Vec::new(),
    };
    let mut models = ErrorModels::default();
    if channels.citations {
        let sample = match &inputs.citation_sample {
            Some(s) => s.clone(),
            None => {
                let marginal = embedded_missed_citation_sample();
                let mean = EMBEDDED_CITATION_TOTAL as f64 / marginal.records() as f64;
                let synth = synthesize_training_sample(&marginal, mean, EMBEDDED_CORRELATION, cfg.seed)?;
                summary.synthetic_sample = true;
                summary.sample_r = synth.achieved_r;
                summary.warnings.extend(synth.warning);
                synth.sample
            }
        };
        let post: NegBinPosterior = fit_citation_error_model(&sample, &NegBinModelSpec::new(kind), &cfg.mcmc)?;
        if !post.converged() {
            summary.warnings.push("citation model: R-hat above threshold".into());
        }
        summary.converged = Some(post.converged());
        models.citation = Some(post);
    }
    if channels.doctypes {
        let table = match &inputs.confusion {
            Some(t) => t.clone(),
            None => {
                summary.synthetic_confusion = true;
                synthetic_confusion_table()
            }
        };
        models.doctype = Some(fit_doctype_error_model(&table, cfg.pseudocount, kind)?);
    }
    Ok((models, summary))
}

fn exercise_1(models: &ErrorModels, cfg: &ExerciseConfig) -> Result<FrequencyTables> {
    let pubs = [("P1", DocType::Article, 5u64), ("P2", DocType::Review, 10), ("P3", DocType::Letter, 0)];
    let citation = models.citation.as_ref().expect("exercise 1 fits both models");
    let doctype = models.doctype.as_ref().expect("exercise 1 fits both models");
    let mut tables = FrequencyTables {
        publications: Vec::new(),
        doctypes: Vec::new(),
        citations: Vec::new(),
    };
    for (i, (name, d, c)) in pubs.into_iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let mut types: BTreeMap<DocType, usize> = DocType::ALL.into_iter().map(|d| (d, 0)).collect();
        for t in predict_doctype(doctype, d, cfg.iterations, seed)? {
            *types.entry(t).or_default() += 1;
        }
        let mut counts = BTreeMap::new();
        for v in predict_error_free_citations(citation, c, cfg.iterations, seed)? {
            *counts.entry(v).or_default() += 1;
        }
        tables.publications.push(name.to_string());
        tables.doctypes.push(types);
        tables.citations.push(counts);
    }
    Ok(tables)
}

/// The publication sets an exercise propagates over.
pub fn exercise_data(exercise: Exercise, seed: u64) -> Result<Option<(Vec<PublicationSet>, PublicationSet)>> {
    let Some(scenario) = exercise.scenario(seed) else {
        return Ok(None);
    };
    let sets = generate_scenario(&scenario)?;
    let (reference, units): (Vec<_>, Vec<_>) = sets.into_iter().partition(|s| s.role == SetRole::ReferenceSet);
    let reference = reference.into_iter().next().expect("scenarios have a reference set");
    Ok(Some((units, reference)))
}

/// Run a named exercise: fit (or synthesize) the training models, generate
/// the scenario data and propagate.
pub fn run_exercise(exercise: Exercise, inputs: &TrainingInputs, cfg: &ExerciseConfig) -> Result<ExerciseReport> {
    if cfg.iterations == 0 {
        return Err(Error::Usage("iterations must be at least 1".into()));
    }
    let (models, training) = fit_models(exercise, inputs, cfg)?;
    let output = match exercise_data(exercise, cfg.seed)? {
        None => ExerciseOutput::Frequencies(exercise_1(&models, cfg)?),
        Some((units, reference)) => {
            let pcfg = PropagationConfig {
                iterations: cfg.iterations,
                seed: cfg.seed,
                channels: exercise.channels(),
                kind: exercise.kind(),
                key_mode: KeyMode::DoctypeOnly,
                universe: Universe::Pooled,
                workers: cfg.workers,
                shared_parameters: true,
            };
            ExerciseOutput::Indicators(Box::new(propagate(&units, Some(&reference), &models, &pcfg)?))
        }
    };
    Ok(ExerciseReport {
        exercise,
        seed: cfg.seed,
        training,
        output,
    })
}
