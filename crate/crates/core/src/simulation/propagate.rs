use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::summary::{summarize, DistributionSummary};
use crate::data::{DocType, PublicationSet};
use crate::error::{Error, Result};
use crate::indicators::{ncs_from, IndicatorResult, KeyMode, Ncs, Universe};
use crate::models::ModelKind;
use crate::predictive::{Channels, ErrorModels, PredictiveEngine};
use crate::rng::item_key;

pub const DEFAULT_ITERATIONS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub iterations: usize,
    pub seed: u64,
    pub channels: Channels,
    pub kind: ModelKind,
    pub key_mode: KeyMode,
    pub universe: Universe,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
    pub shared_parameters: bool,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            channels: Channels::BOTH,
            kind: ModelKind::SecondKind,
            key_mode: KeyMode::DoctypeOnly,
            universe: Universe::Pooled,
            workers: None,
            shared_parameters: true,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Usage("iterations must be at least 1".into()));
        }
        if !self.channels.any() {
            return Err(Error::Usage("at least one error channel must be enabled".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Usage("workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Indicator {
    P,
    C,
    #[serde(rename = "MNCS")]
    Mncs,
}

impl Indicator {
    pub const ALL: [Indicator; 3] = [Indicator::P, Indicator::C, Indicator::Mncs];

    pub fn label(self) -> &'static str {
        match self {
            Indicator::P => "P",
            Indicator::C => "C",
            Indicator::Mncs => "MNCS",
        }
    }

    pub fn of(self, r: &IndicatorResult) -> Option<f64> {
        match self {
            Indicator::P => Some(r.p as f64),
            Indicator::C => Some(r.c as f64),
            Indicator::Mncs => r.mncs,
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorDistribution {
    pub unit: String,
    pub indicator: Indicator,
    pub observed: Option<f64>,
    /// One value per iteration; NaN where MNCS was undefined.
    pub replicates: Vec<f64>,
    pub undefined: usize,
    pub summary: Option<DistributionSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    pub config: PropagationConfig,
    pub observed: Vec<IndicatorResult>,
    pub distributions: Vec<IndicatorDistribution>,
}

impl PropagationResult {
    pub fn distribution(&self, unit: &str, indicator: Indicator) -> Option<&IndicatorDistribution> {
        self.distributions
            .iter()
            .find(|d| d.unit == unit && d.indicator == indicator)
    }
}

struct Item<'a> {
    id: &'a str,
    key: u64,
    doctype: DocType,
    citations: u64,
    group: Option<usize>,
    in_universe: bool,
}

/// Publications flattened to one entry per id with precomputed cell groups,
/// so an iteration needs only integer accumulation.
pub(crate) struct Prepared<'a> {
    items: Vec<Item<'a>>,
    units: Vec<(&'a str, Vec<usize>)>,
    groups: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct UnitValues {
    pub p: u64,
    pub c: u64,
    pub mncs: Option<f64>,
    pub excluded: usize,
    pub degenerate: usize,
}

impl<'a> Prepared<'a> {
    pub(crate) fn new(
        units: &'a [PublicationSet],
        reference: Option<&'a PublicationSet>,
        key_mode: KeyMode,
        universe: Universe,
    ) -> Result<Self> {
        if universe == Universe::ReferenceOnly && reference.is_none() {
            return Err(Error::Usage("reference-only normalization needs a reference set".into()));
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut group_ids: HashMap<(i32, &str), usize> = HashMap::new();
        let mut items: Vec<Item> = Vec::new();
        let sets = units.iter().map(|s| (s, false)).chain(reference.map(|r| (r, true)));
        let mut unit_members = Vec::with_capacity(units.len());
        for (set, is_reference) in sets {
            let counts = universe == Universe::Pooled || is_reference;
            let mut members = Vec::with_capacity(set.len());
            for p in set {
                let i = *index.entry(p.id.as_str()).or_insert_with(|| {
                    let group = match key_mode {
                        KeyMode::DoctypeOnly => Some(0),
                        KeyMode::DoctypeYearField => match (p.year, p.field.as_deref()) {
                            (Some(y), Some(f)) => {
                                let n = group_ids.len();
                                Some(*group_ids.entry((y, f)).or_insert(n))
                            }
                            _ => None,
                        },
                    };
                    items.push(Item {
                        id: p.id.as_str(),
                        key: item_key(&p.id),
                        doctype: p.doctype,
                        citations: p.citations,
                        group,
                        in_universe: false,
                    });
                    items.len() - 1
                });
                items[i].in_universe |= counts;
                members.push(i);
            }
            if !is_reference {
                unit_members.push((set.name.as_str(), members));
            }
        }
        let groups = match key_mode {
            KeyMode::DoctypeOnly => 1,
            KeyMode::DoctypeYearField => group_ids.len(),
        };
        Ok(Prepared {
            items,
            units: unit_members,
            groups,
        })
    }

    pub(crate) fn observed(&self) -> Vec<(DocType, u64)> {
        self.items.iter().map(|it| (it.doctype, it.citations)).collect()
    }

    /// Indicators of every unit given one (doctype, citations) per item.
    pub(crate) fn evaluate(&self, values: &[(DocType, u64)]) -> Vec<UnitValues> {
        let mut cells = vec![(0u64, 0u64); self.groups * 4];
        for (it, &(d, c)) in self.items.iter().zip(values) {
            if let (true, Some(g)) = (it.in_universe, it.group) {
                let cell = &mut cells[g * 4 + d.index()];
                cell.0 += 1;
                cell.1 += c;
            }
        }
        self.units
            .iter()
            .map(|(_, members)| {
                let mut v = UnitValues {
                    p: 0,
                    c: 0,
                    mncs: None,
                    excluded: 0,
                    degenerate: 0,
                };
                let mut sum = 0.0;
                let mut scored = 0usize;
                for &i in members {
                    let (d, c) = values[i];
                    if !d.is_core() {
                        continue;
                    }
                    v.p += 1;
                    v.c += c;
                    let expected = self.items[i].group.and_then(|g| {
                        let (n, total) = cells[g * 4 + d.index()];
                        (n > 0).then(|| total as f64 / n as f64)
                    });
                    let s = ncs_from(c, expected);
                    if s == Ncs::Degenerate {
                        v.degenerate += 1;
                    }
                    match s.value() {
                        Some(x) => {
                            sum += x;
                            scored += 1;
                        }
                        None => v.excluded += 1,
                    }
                }
                v.mncs = (scored > 0).then(|| sum / scored as f64);
                v
            })
            .collect()
    }

    fn result(&self, values: &[UnitValues]) -> Vec<IndicatorResult> {
        self.units
            .iter()
            .zip(values)
            .map(|((name, _), v)| IndicatorResult {
                unit: name.to_string(),
                p: v.p,
                c: v.c,
                mncs: v.mncs,
                excluded_count: v.excluded,
                degenerate_count: v.degenerate,
            })
            .collect()
    }
}

/// Observed indicators of every unit, normalized within the given universe.
pub fn observed_indicators(
    units: &[PublicationSet],
    reference: Option<&PublicationSet>,
    key_mode: KeyMode,
    universe: Universe,
) -> Result<Vec<IndicatorResult>> {
    let prep = Prepared::new(units, reference, key_mode, universe)?;
    Ok(prep.result(&prep.evaluate(&prep.observed())))
}

/// Iterations are computed in parallel in blocks of this size, then
/// assembled in order.
const BLOCK: usize = 256;

/// Monte Carlo propagation of data errors into unit indicators.
///
/// Each iteration draws predicted values for every publication of the units
/// and the reference set, rebuilds the normalization cells from the
/// predicted data, and recomputes P, C and MNCS for each unit.
pub fn propagate(
    units: &[PublicationSet],
    reference: Option<&PublicationSet>,
    models: &ErrorModels,
    cfg: &PropagationConfig,
) -> Result<PropagationResult> {
    propagate_with_dump(units, reference, models, cfg, None)
}

/// As [`propagate`], also writing every item draw as CSV
/// (`iteration,publication_id,citations,doctype`) when `dump` is given.
pub fn propagate_with_dump(
    units: &[PublicationSet],
    reference: Option<&PublicationSet>,
    models: &ErrorModels,
    cfg: &PropagationConfig,
    mut dump: Option<&mut dyn Write>,
) -> Result<PropagationResult> {
    cfg.validate()?;
    if units.is_empty() {
        return Err(Error::Usage("no assessed units given".into()));
    }
    let engine = PredictiveEngine::new(models, cfg.channels, cfg.kind, cfg.seed)?
        .shared_parameters(cfg.shared_parameters);
    let prep = Prepared::new(units, reference, cfg.key_mode, cfg.universe)?;
    let observed = prep.result(&prep.evaluate(&prep.observed()));

    let pool = match cfg.workers {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Validation(format!("cannot start worker pool: {e}")))?,
        ),
        None => None,
    };
    let keep_draws = dump.is_some();
    if let Some(w) = dump.as_deref_mut() {
        writeln!(w, "iteration,publication_id,citations,doctype").map_err(|e| Error::io("dump", e))?;
    }

    let iteration = |j: usize| {
        let world = engine.world(j);
        let draws: Vec<(DocType, u64)> = prep
            .items
            .iter()
            .map(|it| engine.draw(&world, j, it.key, it.doctype, it.citations))
            .collect();
        let values = prep.evaluate(&draws);
        (values, keep_draws.then_some(draws))
    };

    let n_units = prep.units.len();
    let mut replicates = vec![[const { Vec::new() }; 3]; n_units];
    for r in replicates.iter_mut().flatten() {
        r.reserve(cfg.iterations);
    }
    let mut start = 0;
    while start < cfg.iterations {
        let end = (start + BLOCK).min(cfg.iterations);
        let run = || (start..end).into_par_iter().map(iteration).collect::<Vec<_>>();
        let block = match &pool {
            Some(p) => p.install(run),
            None => run(),
        };
        for (offset, (values, draws)) in block.into_iter().enumerate() {
            for (u, v) in values.iter().enumerate() {
                replicates[u][0].push(v.p as f64);
                replicates[u][1].push(v.c as f64);
                replicates[u][2].push(v.mncs.unwrap_or(f64::NAN));
            }
            if let (Some(w), Some(draws)) = (dump.as_deref_mut(), draws) {
                let j = start + offset;
                for (it, (d, c)) in prep.items.iter().zip(draws) {
                    writeln!(w, "{j},{},{c},{d}", it.id).map_err(|e| Error::io("dump", e))?;
                }
            }
        }
        start = end;
    }

    let mut distributions = Vec::with_capacity(n_units * 3);
    for (obs, reps) in observed.iter().zip(replicates) {
        for (indicator, reps) in Indicator::ALL.into_iter().zip(reps) {
            distributions.push(IndicatorDistribution {
                unit: obs.unit.clone(),
                indicator,
                observed: indicator.of(obs),
                undefined: reps.iter().filter(|x| x.is_nan()).count(),
                summary: summarize(&reps),
                replicates: reps,
            });
        }
    }
    Ok(PropagationResult {
        config: cfg.clone(),
        observed,
        distributions,
    })
}
