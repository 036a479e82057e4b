use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};

use super::{
    CitationErrorSample, DocType, DocTypeConfusionTable, ErrorPair, Publication, PublicationSet,
    SetRole,
};
use crate::error::{Error, Result};

pub const PUBLICATIONS_HEADER: [&str; 6] = ["id", "unit", "doctype", "year", "field", "citations"];
pub const SAMPLE_HEADER: [&str; 2] = ["observed_citations", "omitted_citations"];
pub const CONFUSION_HEADER: [&str; 3] = ["true_type", "observed_type", "count"];

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::input(path, e))
}

fn file_name(path: &Path) -> String {
    path.display().to_string()
}

struct Table<R: Read> {
    name: String,
    reader: csv::Reader<R>,
}

impl<R: Read> Table<R> {
    fn new(name: &str, rdr: R, expected: &[&str]) -> Result<Self> {
        let mut reader = ReaderBuilder::new()
            .has_headers(true)
            .trim(Trim::All)
            .flexible(true)
            .from_reader(rdr);
        let header = reader.headers()?.clone();
        let found: Vec<String> = header.iter().map(|h| h.to_ascii_lowercase()).collect();
        if found != expected {
            return Err(Error::Schema {
                file: name.to_string(),
                expected: expected.join(","),
                found: header.iter().collect::<Vec<_>>().join(","),
            });
        }
        Ok(Table {
            name: name.to_string(),
            reader,
        })
    }

    /// Iterate records with their 1-based line numbers; checks the column count.
    fn records(&mut self, width: usize) -> impl Iterator<Item = Result<(u64, StringRecord)>> + '_ {
        let name = self.name.clone();
        self.reader.records().map(move |r| {
            let rec = r.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                Error::Parse {
                    file: name.clone(),
                    line,
                    message: e.to_string(),
                }
            })?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            if rec.len() != width {
                return Err(Error::Parse {
                    file: name.clone(),
                    line,
                    message: format!("expected {width} columns, found {}", rec.len()),
                });
            }
            Ok((line, rec))
        })
    }
}

fn parse_count(file: &str, line: u64, column: &str, raw: &str) -> Result<u64> {
    if let Ok(v) = raw.parse::<u64>() {
        return Ok(v);
    }
    let message = match raw.parse::<i64>() {
        Ok(v) if v < 0 => format!("{column} must be non-negative, got {v}"),
        _ => format!("{column}: cannot parse `{raw}` as a non-negative integer"),
    };
    Err(Error::Parse {
        file: file.to_string(),
        line,
        message,
    })
}

fn non_empty(s: &str) -> Option<&str> {
    (!s.is_empty()).then_some(s)
}

/// Read publications and group them by unit, in order of first appearance.
pub fn read_publications<R: Read>(name: &str, rdr: R) -> Result<Vec<PublicationSet>> {
    let pubs = read_publication_rows(name, rdr)?;
    let mut order: Vec<String> = Vec::new();
    let mut groups: std::collections::HashMap<String, Vec<Publication>> = Default::default();
    for p in pubs {
        if !groups.contains_key(&p.unit) {
            order.push(p.unit.clone());
        }
        groups.entry(p.unit.clone()).or_default().push(p);
    }
    order
        .into_iter()
        .map(|u| {
            let members = groups.remove(&u).unwrap_or_default();
            PublicationSet::new(u, SetRole::AssessedUnit, members)
        })
        .collect()
}

fn read_publication_rows<R: Read>(name: &str, rdr: R) -> Result<Vec<Publication>> {
    let mut table = Table::new(name, rdr, &PUBLICATIONS_HEADER)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for rec in table.records(PUBLICATIONS_HEADER.len()) {
        let (line, rec) = rec?;
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(Error::Parse {
                file: name.to_string(),
                line,
                message: "empty id".into(),
            });
        }
        if !seen.insert(id.clone()) {
            return Err(Error::Validation(format!(
                "{name}, line {line}: duplicate publication id `{id}`"
            )));
        }
        let year = match non_empty(&rec[3]) {
            None => None,
            Some(y) => Some(y.parse::<i32>().map_err(|_| Error::Parse {
                file: name.to_string(),
                line,
                message: format!("year: cannot parse `{y}` as an integer"),
            })?),
        };
        out.push(Publication {
            id,
            unit: rec[1].to_string(),
            doctype: DocType::from_label(&rec[2]),
            year,
            field: non_empty(&rec[4]).map(str::to_string),
            citations: parse_count(name, line, "citations", &rec[5])?,
        });
    }
    Ok(out)
}

/// Load `publications.csv` (header `id,unit,doctype,year,field,citations`),
/// one set per unit.
pub fn load_publications(path: impl AsRef<Path>) -> Result<Vec<PublicationSet>> {
    let path = path.as_ref();
    read_publications(&file_name(path), open(path)?)
}

/// Load a publications file as a single reference set; the unit column is kept
/// on each record but does not split the set.
pub fn load_reference_set(path: impl AsRef<Path>, name: &str) -> Result<PublicationSet> {
    let path = path.as_ref();
    let rows = read_publication_rows(&file_name(path), open(path)?)?;
    PublicationSet::new(name, SetRole::ReferenceSet, rows)
}

pub fn write_publications<W: Write>(w: W, sets: &[PublicationSet]) -> Result<()> {
    let mut wtr = WriterBuilder::new().from_writer(w);
    wtr.write_record(PUBLICATIONS_HEADER)?;
    for p in sets.iter().flat_map(|s| s.members()) {
        let year = p.year.map(|y| y.to_string()).unwrap_or_default();
        let citations = p.citations.to_string();
        wtr.write_record([
            p.id.as_str(),
            p.unit.as_str(),
            p.doctype.label(),
            year.as_str(),
            p.field.as_deref().unwrap_or(""),
            citations.as_str(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

pub fn read_citation_sample<R: Read>(name: &str, rdr: R) -> Result<CitationErrorSample> {
    let mut table = Table::new(name, rdr, &SAMPLE_HEADER)?;
    let mut rows = Vec::new();
    for rec in table.records(SAMPLE_HEADER.len()) {
        let (line, rec) = rec?;
        rows.push(ErrorPair::new(
            parse_count(name, line, "observed_citations", &rec[0])?,
            parse_count(name, line, "omitted_citations", &rec[1])?,
        ));
    }
    Ok(CitationErrorSample::new(rows))
}

/// Load `citation_error_sample.csv` (header `observed_citations,omitted_citations`).
pub fn load_citation_sample(path: impl AsRef<Path>) -> Result<CitationErrorSample> {
    let path = path.as_ref();
    read_citation_sample(&file_name(path), open(path)?)
}

pub fn write_citation_sample<W: Write>(w: W, sample: &CitationErrorSample) -> Result<()> {
    let mut wtr = WriterBuilder::new().from_writer(w);
    wtr.write_record(SAMPLE_HEADER)?;
    for r in &sample.rows {
        wtr.write_record([r.observed.to_string(), r.omitted.to_string()])?;
    }
    wtr.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

pub fn read_confusion_table<R: Read>(name: &str, rdr: R) -> Result<DocTypeConfusionTable> {
    let mut table = Table::new(name, rdr, &CONFUSION_HEADER)?;
    let mut out = DocTypeConfusionTable::default();
    for rec in table.records(CONFUSION_HEADER.len()) {
        let (line, rec) = rec?;
        let n = parse_count(name, line, "count", &rec[2]).map_err(|e| match e {
            Error::Parse { message, .. } if message.contains("non-negative, got") => {
                Error::Validation(format!("{name}, line {line}: {message}"))
            }
            other => other,
        })?;
        out.add(DocType::from_label(&rec[0]), DocType::from_label(&rec[1]), n);
    }
    Ok(out)
}

/// Load `doctype_confusion.csv` (header `true_type,observed_type,count`).
/// Repeated pairs are summed.
pub fn load_confusion_table(path: impl AsRef<Path>) -> Result<DocTypeConfusionTable> {
    let path = path.as_ref();
    read_confusion_table(&file_name(path), open(path)?)
}

pub fn write_confusion_table<W: Write>(w: W, table: &DocTypeConfusionTable) -> Result<()> {
    let mut wtr = WriterBuilder::new().from_writer(w);
    wtr.write_record(CONFUSION_HEADER)?;
    for t in DocType::ALL {
        for o in DocType::ALL {
            wtr.write_record([t.label(), o.label(), &table.count(t, o).to_string()])?;
        }
    }
    wtr.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}
