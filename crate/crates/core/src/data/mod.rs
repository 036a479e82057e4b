//! Publication records, error samples, and their file formats.

mod io;
pub(crate) mod stats;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{
    load_citation_sample, load_confusion_table, load_publications, load_reference_set,
    read_citation_sample, read_confusion_table, read_publications, write_citation_sample,
    write_confusion_table, write_publications, CONFUSION_HEADER, PUBLICATIONS_HEADER,
    SAMPLE_HEADER,
};
pub use stats::{
    embedded_missed_citation_sample, marginal_statistics, sample_statistics, Correlation, MarginalStatistics,
    SampleStatistics,
};

/// Document type, simplified to four categories. Any database label other
/// than article, review or letter is `Other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocType {
    Article,
    Review,
    Letter,
    Other,
}

impl DocType {
    pub const ALL: [DocType; 4] = [
        DocType::Article,
        DocType::Review,
        DocType::Letter,
        DocType::Other,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> DocType {
        Self::ALL[i]
    }

    pub fn label(self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::Letter => "letter",
            DocType::Other => "other",
        }
    }

    /// Map a free-form database label onto the four categories.
    pub fn from_label(label: &str) -> DocType {
        match label.trim().to_ascii_lowercase().as_str() {
            "article" => DocType::Article,
            "review" => DocType::Review,
            "letter" => DocType::Letter,
            _ => DocType::Other,
        }
    }

    /// Articles and reviews are the types counted by the indicators.
    pub fn is_core(self) -> bool {
        matches!(self, DocType::Article | DocType::Review)
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DocType {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(DocType::from_label(s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Publication {
    pub id: String,
    pub unit: String,
    pub doctype: DocType,
    pub year: Option<i32>,
    /// Field or classification label; absent for unclassified records.
    pub field: Option<String>,
    pub citations: u64,
}

impl Publication {
    pub fn new(id: impl Into<String>, unit: impl Into<String>, doctype: DocType, citations: u64) -> Self {
        Publication {
            id: id.into(),
            unit: unit.into(),
            doctype,
            year: None,
            field: None,
            citations,
        }
    }

    pub fn with_year(mut self, year: i32) -> Self {
        self.year = Some(year);
        self
    }

    pub fn with_field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetRole {
    AssessedUnit,
    ReferenceSet,
}

/// A named, ordered group of publications with unique ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicationSet {
    pub name: String,
    pub role: SetRole,
    members: Vec<Publication>,
}

impl PublicationSet {
    pub fn new(name: impl Into<String>, role: SetRole, members: Vec<Publication>) -> Result<Self> {
        let name = name.into();
        let mut seen = HashSet::with_capacity(members.len());
        for p in &members {
            if !seen.insert(p.id.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate publication id `{}` in set `{name}`",
                    p.id
                )));
            }
        }
        Ok(PublicationSet {
            name,
            role,
            members,
        })
    }

    pub fn unit(name: impl Into<String>, members: Vec<Publication>) -> Result<Self> {
        Self::new(name, SetRole::AssessedUnit, members)
    }

    pub fn reference(name: impl Into<String>, members: Vec<Publication>) -> Result<Self> {
        Self::new(name, SetRole::ReferenceSet, members)
    }

    pub fn members(&self) -> &[Publication] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Publication> {
        self.members.iter()
    }

    /// Records without a field label.
    pub fn unclassified_count(&self) -> usize {
        self.members.iter().filter(|p| p.field.is_none()).count()
    }

    pub fn into_members(self) -> Vec<Publication> {
        self.members
    }
}

impl<'a> IntoIterator for &'a PublicationSet {
    type Item = &'a Publication;
    type IntoIter = std::slice::Iter<'a, Publication>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// One (observed citations, omitted citations) observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorPair {
    pub observed: u64,
    pub omitted: u64,
}

impl ErrorPair {
    pub fn new(observed: u64, omitted: u64) -> Self {
        ErrorPair { observed, omitted }
    }

    /// Citation count once the omitted citations are restored.
    pub fn corrected(&self) -> u64 {
        self.observed + self.omitted
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CitationErrorSample {
    pub rows: Vec<ErrorPair>,
}

impl CitationErrorSample {
    pub fn new(rows: Vec<ErrorPair>) -> Self {
        CitationErrorSample { rows }
    }

    pub fn from_pairs(pairs: &[(u64, u64)]) -> Self {
        Self::new(pairs.iter().map(|&(c, o)| ErrorPair::new(c, o)).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Fitting needs at least two rows.
    pub fn validate_for_fit(&self) -> Result<()> {
        if self.rows.len() < 2 {
            return Err(Error::Validation(format!(
                "citation error sample needs at least 2 rows, got {}",
                self.rows.len()
            )));
        }
        Ok(())
    }
}

/// Counts of (true type, observed type) pairs, indexed `[true][observed]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocTypeConfusionTable {
    pub counts: [[u64; 4]; 4],
}

impl DocTypeConfusionTable {
    pub fn new(counts: [[u64; 4]; 4]) -> Self {
        DocTypeConfusionTable { counts }
    }

    pub fn count(&self, true_type: DocType, observed: DocType) -> u64 {
        self.counts[true_type.index()][observed.index()]
    }

    pub fn add(&mut self, true_type: DocType, observed: DocType, n: u64) {
        self.counts[true_type.index()][observed.index()] += n;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Histogram of missed citations per record.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissedCitationMarginal {
    pub histogram: BTreeMap<u64, u64>,
}

impl MissedCitationMarginal {
    pub fn new(histogram: BTreeMap<u64, u64>) -> Self {
        MissedCitationMarginal { histogram }
    }

    pub fn records(&self) -> u64 {
        self.histogram.values().sum()
    }

    pub fn total_missed(&self) -> u64 {
        self.histogram.iter().map(|(k, v)| k * v).sum()
    }

    pub fn records_with_missed(&self) -> u64 {
        self.histogram
            .iter()
            .filter(|(&k, _)| k > 0)
            .map(|(_, v)| v)
            .sum()
    }

    /// Share of records with at least one missed citation.
    pub fn share_with_missed(&self) -> Option<f64> {
        let n = self.records();
        (n > 0).then(|| self.records_with_missed() as f64 / n as f64)
    }

    /// One value per record, ascending.
    pub fn expand(&self) -> Vec<u64> {
        self.histogram
            .iter()
            .flat_map(|(&k, &v)| std::iter::repeat_n(k, v as usize))
            .collect()
    }
}
