use std::path::{Path, PathBuf};

use bibuq::indicators::{KeyMode, Universe};
use bibuq::models::ModelKind;
use bibuq::predictive::Channels;
use bibuq::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "bibuq",
    version,
    about = "Bayesian error models and uncertainty propagation for bibliometric indicators",
    long_about = "Fits models of omitted citations and document-type errors, propagates them into \
                  P, C and MNCS by Monte Carlo simulation, and reports medians with 95% credible \
                  intervals. Exit codes: 0 success, 1 runtime failure, 2 usage or input error, \
                  3 non-convergence under --strict."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit the citation and/or document-type error models and write posterior JSON files.
    Fit(FitArgs),
    /// Simulate error-free indicators from observed data (second-kind models).
    Propagate(PropagateArgs),
    /// Simulate error-affected indicators from error-free data (first-kind models).
    Inject(PropagateArgs),
    /// Run one of the worked exercises 1-4 or A1-A4.
    Exercise(ExerciseArgs),
    /// Render a saved report or exercise JSON file.
    Report(ReportArgs),
    /// Descriptive statistics of an omitted-citation sample.
    Stats(StatsArgs),
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Flags > config file > defaults. Flags are overlaid on the file's JSON,
/// then unset fields take their defaults.
pub trait Configurable: Serialize + DeserializeOwned {
    fn config_file(&self) -> Option<&Path>;
    fn fill_defaults(&mut self);

    fn resolve(self) -> Result<Self>
    where
        Self: Sized,
    {
        let flags = serde_json::to_value(&self)?;
        let mut merged = match self.config_file() {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::input(path, e))?;
                let mut v: serde_json::Value = serde_json::from_str(&text)
                    .map_err(|e| Error::Usage(format!("config {}: {e}", path.display())))?;
                // a run manifest carries its resolved config under "config"
                if let Some(inner) = v.get("config").filter(|c| c.is_object()) {
                    v = inner.clone();
                }
                if !v.is_object() {
                    return Err(Error::Usage(format!("config {} is not a JSON object", path.display())));
                }
                v
            }
            None => serde_json::Value::Object(Default::default()),
        };
        if let (Some(m), serde_json::Value::Object(f)) = (merged.as_object_mut(), flags) {
            for (k, v) in f {
                if !v.is_null() {
                    m.insert(k, v);
                }
            }
        }
        let mut out: Self = serde_json::from_value(merged).map_err(|e| Error::Usage(format!("config: {e}")))?;
        out.fill_defaults();
        Ok(out)
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct FitArgs {
    /// Omitted-citation training CSV (observed_citations,omitted_citations).
    #[arg(long, value_name = "CSV")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub citation_sample: Option<PathBuf>,
    /// Document-type confusion CSV (true_type,observed_type,count).
    #[arg(long, value_name = "CSV")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doctype_confusion: Option<PathBuf>,
    /// Model direction: second-kind (correct observed data) or first-kind (inject errors). [default: second-kind]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<ModelKind>,
    /// Random seed. [default: 0]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Number of MCMC chains. [default: 4]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chains: Option<usize>,
    /// Warmup iterations per chain. [default: 1000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warmup: Option<usize>,
    /// Kept draws per chain. [default: 1000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keep: Option<usize>,
    /// Dirichlet pseudo-count added to every confusion cell. [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pseudocount: Option<f64>,
    /// Output directory. [default: bibuq-fit]
    #[arg(long, value_name = "DIR")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Exit with code 3 when any R-hat reaches 1.05 or more.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub strict: bool,
    /// JSON config file or run manifest supplying defaults for these flags.
    #[arg(long, value_name = "JSON")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Configurable for FitArgs {
    fn config_file(&self) -> Option<&Path> {
        self.config.as_deref()
    }

    fn fill_defaults(&mut self) {
        self.direction.get_or_insert(ModelKind::SecondKind);
        self.seed.get_or_insert(0);
        self.chains.get_or_insert(4);
        self.warmup.get_or_insert(1000);
        self.keep.get_or_insert(1000);
        self.pseudocount.get_or_insert(1.0);
        self.out.get_or_insert_with(|| "bibuq-fit".into());
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct PropagateArgs {
    /// Publications CSV (id,unit,doctype,year,field,citations); each unit is assessed.
    #[arg(long, value_name = "CSV")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pubs: Option<PathBuf>,
    /// Reference-set CSV in the same format.
    #[arg(long, value_name = "CSV")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
    /// Treat this unit of --pubs as the reference set instead of an assessed unit.
    #[arg(long, value_name = "UNIT")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_unit: Option<String>,
    /// Citation posterior JSON written by `fit`.
    #[arg(long, value_name = "JSON")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub citation_model: Option<PathBuf>,
    /// Document-type posterior JSON written by `fit`.
    #[arg(long, value_name = "JSON")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doctype_model: Option<PathBuf>,
    /// Error channels to simulate: citations, doctypes, or both comma-separated. [default: citations,doctypes]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channels: Option<Channels>,
    /// Monte Carlo iterations. [default: 2000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    /// Random seed. [default: 0]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Normalization cells: doctype or doctype-year-field. [default: doctype]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key_mode: Option<KeyMode>,
    /// Normalization universe: pooled (reference plus units) or reference-only. [default: pooled]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub universe: Option<Universe>,
    /// Worker threads; results do not depend on it. [default: all cores]
    #[arg(long, env = "BIBUQ_WORKERS")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Draw model parameters per publication instead of once per iteration.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub per_item_parameters: bool,
    /// Also write every item draw to draws.csv.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub dump_draws: bool,
    /// Output directory. [default: bibuq-out]
    #[arg(long, value_name = "DIR")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// JSON config file or run manifest supplying defaults for these flags.
    #[arg(long, value_name = "JSON")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Configurable for PropagateArgs {
    fn config_file(&self) -> Option<&Path> {
        self.config.as_deref()
    }

    fn fill_defaults(&mut self) {
        self.channels.get_or_insert(Channels::BOTH);
        self.iterations.get_or_insert(bibuq::simulation::DEFAULT_ITERATIONS);
        self.seed.get_or_insert(0);
        self.key_mode.get_or_insert(KeyMode::DoctypeOnly);
        self.universe.get_or_insert(Universe::Pooled);
        self.out.get_or_insert_with(|| "bibuq-out".into());
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ExerciseArgs {
    /// Exercise name: 1, 2, 3, 4, A1, A2, A3 or A4.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Random seed for training, scenario data and simulation. [default: 0]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Monte Carlo iterations (draws per publication for exercise 1). [default: 2000]
    #[arg(long, visible_alias = "draws")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    /// Omitted-citation training CSV; synthesized from the embedded sample if absent.
    #[arg(long, value_name = "CSV")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub citation_sample: Option<PathBuf>,
    /// Document-type confusion CSV; a built-in table is used if absent.
    #[arg(long, value_name = "CSV")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doctype_confusion: Option<PathBuf>,
    /// Number of MCMC chains. [default: 4]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chains: Option<usize>,
    /// Warmup iterations per chain. [default: 1000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warmup: Option<usize>,
    /// Kept draws per chain. [default: 1000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keep: Option<usize>,
    /// Dirichlet pseudo-count. [default: 1]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pseudocount: Option<f64>,
    /// Worker threads; results do not depend on it. [default: all cores]
    #[arg(long, env = "BIBUQ_WORKERS")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Output format on stdout. [default: text]
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Directory for exercise.json, report files and the run manifest.
    #[arg(long, value_name = "DIR")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Also write the generated scenario data to <out>/publications.csv.
    #[arg(long, requires = "out")]
    #[serde(skip_serializing_if = "is_false")]
    pub export_data: bool,
    /// JSON config file or run manifest supplying defaults for these flags.
    #[arg(long, value_name = "JSON")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Configurable for ExerciseArgs {
    fn config_file(&self) -> Option<&Path> {
        self.config.as_deref()
    }

    fn fill_defaults(&mut self) {
        self.seed.get_or_insert(0);
        self.iterations.get_or_insert(bibuq::simulation::DEFAULT_ITERATIONS);
        self.chains.get_or_insert(4);
        self.warmup.get_or_insert(1000);
        self.keep.get_or_insert(1000);
        self.pseudocount.get_or_insert(1.0);
        self.format.get_or_insert(Format::Text);
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ReportArgs {
    /// report.json from propagate/inject, or exercise.json from exercise.
    #[arg(long, value_name = "JSON")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// text (aligned table), json, or csv (interval rows). [default: text]
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Directory to write the rendered report and a run manifest to.
    #[arg(long, value_name = "DIR")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// JSON config file or run manifest supplying defaults for these flags.
    #[arg(long, value_name = "JSON")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Configurable for ReportArgs {
    fn config_file(&self) -> Option<&Path> {
        self.config.as_deref()
    }

    fn fill_defaults(&mut self) {
        self.format.get_or_insert(Format::Text);
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct StatsArgs {
    /// Omitted-citation sample CSV (observed_citations,omitted_citations).
    #[arg(long, value_name = "CSV", conflicts_with = "embedded")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<PathBuf>,
    /// Use the embedded 372-record missed-citation histogram.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub embedded: bool,
    /// Observed citation total paired with --embedded. [default: 6120]
    #[arg(long, requires = "embedded")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub citation_total: Option<u64>,
    /// Output format on stdout (text or json). [default: text]
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Directory to write stats.json and a run manifest to.
    #[arg(long, value_name = "DIR")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// JSON config file or run manifest supplying defaults for these flags.
    #[arg(long, value_name = "JSON")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Configurable for StatsArgs {
    fn config_file(&self) -> Option<&Path> {
        self.config.as_deref()
    }

    fn fill_defaults(&mut self) {
        if self.embedded {
            self.citation_total.get_or_insert(bibuq::simulation::EMBEDDED_CITATION_TOTAL);
        }
        self.format.get_or_insert(Format::Text);
    }
}
