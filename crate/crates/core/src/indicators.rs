//! Publication count (P), citation sum (C), and mean normalized citation
//! score (MNCS) of article and review publications.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{DocType, Publication, PublicationSet};

/// What defines a normalization cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeyMode {
    DoctypeOnly,
    DoctypeYearField,
}

impl fmt::Display for KeyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KeyMode::DoctypeOnly => "doctype",
            KeyMode::DoctypeYearField => "doctype-year-field",
        })
    }
}

impl FromStr for KeyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "doctype" | "doctype-only" => Ok(KeyMode::DoctypeOnly),
            "doctype-year-field" => Ok(KeyMode::DoctypeYearField),
            other => Err(format!("unknown key mode `{other}` (expected doctype or doctype-year-field)")),
        }
    }
}

/// Which publications feed the expected citation values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Universe {
    /// Reference set plus the assessed units' own publications.
    Pooled,
    ReferenceOnly,
}

impl FromStr for Universe {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pooled" => Ok(Universe::Pooled),
            "reference-only" => Ok(Universe::ReferenceOnly),
            other => Err(format!("unknown universe `{other}` (expected pooled or reference-only)")),
        }
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Universe::Pooled => "pooled",
            Universe::ReferenceOnly => "reference-only",
        })
    }
}

/// Cell key. Year and field are `None` (wildcards) in doctype-only mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub doctype: DocType,
    pub year: Option<i32>,
    pub field: Option<String>,
}

impl CellKey {
    /// The cell a publication falls into, or `None` when the mode needs a
    /// year or field the record lacks.
    pub fn for_publication(p: &Publication, mode: KeyMode) -> Option<CellKey> {
        key_parts(p.doctype, p.year, p.field.as_deref(), mode)
    }
}

fn key_parts(doctype: DocType, year: Option<i32>, field: Option<&str>, mode: KeyMode) -> Option<CellKey> {
    match mode {
        KeyMode::DoctypeOnly => Some(CellKey {
            doctype,
            year: None,
            field: None,
        }),
        KeyMode::DoctypeYearField => Some(CellKey {
            doctype,
            year: Some(year?),
            field: Some(field?.to_string()),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationCell {
    pub key: CellKey,
    pub publications: u64,
    pub total_citations: u64,
    /// Mean citations of the cell's publications.
    pub expected_citations: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationCells {
    pub mode: KeyMode,
    cells: HashMap<CellKey, NormalizationCell>,
}

impl NormalizationCells {
    pub fn get(&self, key: &CellKey) -> Option<&NormalizationCell> {
        self.cells.get(key)
    }

    pub fn for_publication(&self, p: &Publication) -> Option<&NormalizationCell> {
        self.get(&CellKey::for_publication(p, self.mode)?)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cells sorted by key.
    pub fn sorted(&self) -> Vec<&NormalizationCell> {
        let mut v: Vec<_> = self.cells.values().collect();
        v.sort_by(|a, b| a.key.cmp(&b.key));
        v
    }
}

/// Keep only articles and reviews, preserving order.
pub fn select_core(set: &PublicationSet) -> PublicationSet {
    let members = set.iter().filter(|p| p.doctype.is_core()).cloned().collect();
    PublicationSet::new(set.name.clone(), set.role, members).expect("subset of a valid set has unique ids")
}

/// The normalization universe: publications of all given sets, each id once
/// (first occurrence wins).
pub fn universe<'a>(sets: &[&'a PublicationSet]) -> Vec<&'a Publication> {
    let mut seen = HashSet::new();
    sets.iter()
        .flat_map(|s| s.iter())
        .filter(|p| seen.insert(p.id.as_str()))
        .collect()
}

/// Mean citations per occupied cell over the union of `sets`. Publications
/// without a key under `mode` are skipped.
pub fn build_normalization(sets: &[&PublicationSet], mode: KeyMode) -> NormalizationCells {
    let mut acc: HashMap<CellKey, (u64, u64)> = HashMap::new();
    for p in universe(sets) {
        if let Some(key) = CellKey::for_publication(p, mode) {
            let e = acc.entry(key).or_default();
            e.0 += 1;
            e.1 += p.citations;
        }
    }
    let cells = acc
        .into_iter()
        .map(|(key, (n, total))| {
            let cell = NormalizationCell {
                key: key.clone(),
                publications: n,
                total_citations: total,
                expected_citations: total as f64 / n as f64,
            };
            (key, cell)
        })
        .collect();
    NormalizationCells { mode, cells }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exclusion {
    /// No cell for the publication (unclassified, or absent from the universe).
    MissingCell,
    /// Cell mean is zero but the publication has citations.
    Inconsistent,
}

/// Item-level normalized citation score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Ncs {
    Score(f64),
    /// Zero citations in a zero-mean cell: scored 0 and flagged.
    Degenerate,
    Excluded(Exclusion),
}

impl Ncs {
    pub fn value(&self) -> Option<f64> {
        match self {
            Ncs::Score(v) => Some(*v),
            Ncs::Degenerate => Some(0.0),
            Ncs::Excluded(_) => None,
        }
    }
}

pub(crate) fn ncs_from(citations: u64, expected: Option<f64>) -> Ncs {
    match expected {
        None => Ncs::Excluded(Exclusion::MissingCell),
        Some(e) if e > 0.0 => Ncs::Score(citations as f64 / e),
        Some(_) if citations == 0 => Ncs::Degenerate,
        Some(_) => Ncs::Excluded(Exclusion::Inconsistent),
    }
}

/// Citations divided by the expected citations of the publication's cell.
pub fn ncs(p: &Publication, cells: &NormalizationCells) -> Ncs {
    ncs_from(p.citations, cells.for_publication(p).map(|c| c.expected_citations))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MncsResult {
    /// `None` when no member could be scored.
    pub value: Option<f64>,
    pub scored: usize,
    pub excluded: usize,
    pub degenerate: usize,
}

/// Arithmetic mean of member NCS values, skipping excluded members.
pub fn mncs(set: &PublicationSet, cells: &NormalizationCells) -> MncsResult {
    let mut sum = 0.0;
    let (mut scored, mut excluded, mut degenerate) = (0, 0, 0);
    for p in set {
        let s = ncs(p, cells);
        if matches!(s, Ncs::Degenerate) {
            degenerate += 1;
        }
        match s.value() {
            Some(v) => {
                sum += v;
                scored += 1;
            }
            None => excluded += 1,
        }
    }
    MncsResult {
        value: (scored > 0).then(|| sum / scored as f64),
        scored,
        excluded,
        degenerate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorResult {
    pub unit: String,
    pub p: u64,
    pub c: u64,
    pub mncs: Option<f64>,
    /// Selected publications left out of MNCS.
    pub excluded_count: usize,
    pub degenerate_count: usize,
}

/// P, C and MNCS of a unit's articles and reviews.
pub fn indicators_for(unit: &PublicationSet, cells: &NormalizationCells) -> IndicatorResult {
    let core = select_core(unit);
    let m = mncs(&core, cells);
    IndicatorResult {
        unit: unit.name.clone(),
        p: core.len() as u64,
        c: core.iter().map(|p| p.citations).sum(),
        mncs: m.value,
        excluded_count: m.excluded,
        degenerate_count: m.degenerate,
    }
}
