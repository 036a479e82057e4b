use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::exercise::{ExerciseOutput, ExerciseReport, FrequencyTables};
use super::propagate::{Indicator, PropagationConfig, PropagationResult};
use crate::data::DocType;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub observed: Option<f64>,
    pub median: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub relative_uncertainty_pct: Option<f64>,
    pub iterations: usize,
    pub seed: u64,
    /// Iterations where the indicator was undefined.
    pub undefined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitReport {
    pub unit: String,
    /// Publications without a normalization cell in the observed data.
    pub excluded_count: usize,
    #[serde(rename = "P")]
    pub p: ReportEntry,
    #[serde(rename = "C")]
    pub c: ReportEntry,
    #[serde(rename = "MNCS")]
    pub mncs: ReportEntry,
}

/// Serializable summary of a propagation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: PropagationConfig,
    pub units: Vec<UnitReport>,
}

impl Report {
    pub fn from_result(result: &PropagationResult) -> Report {
        let cfg = &result.config;
        let entry = |unit: &str, ind: Indicator| {
            let d = result.distribution(unit, ind).expect("every unit has all indicators");
            ReportEntry {
                observed: d.observed,
                median: d.summary.map(|s| s.median),
                ci_low: d.summary.map(|s| s.ci_low),
                ci_high: d.summary.map(|s| s.ci_high),
                relative_uncertainty_pct: d.summary.and_then(|s| s.relative_uncertainty_pct),
                iterations: cfg.iterations,
                seed: cfg.seed,
                undefined: d.undefined,
            }
        };
        let units = result
            .observed
            .iter()
            .map(|o| UnitReport {
                unit: o.unit.clone(),
                excluded_count: o.excluded_count,
                p: entry(&o.unit, Indicator::P),
                c: entry(&o.unit, Indicator::C),
                mncs: entry(&o.unit, Indicator::Mncs),
            })
            .collect();
        Report {
            config: cfg.clone(),
            units,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Report> {
        Ok(serde_json::from_str(text)?)
    }
}

fn csv_num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// `unit,indicator,observed,median,ci_low,ci_high`, one row per unit and
/// indicator.
pub fn write_interval_csv<W: Write>(w: W, report: &Report) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["unit", "indicator", "observed", "median", "ci_low", "ci_high"])?;
    for u in &report.units {
        for (ind, e) in [("P", &u.p), ("C", &u.c), ("MNCS", &u.mncs)] {
            out.write_record([
                u.unit.clone(),
                ind.to_string(),
                csv_num(e.observed),
                csv_num(e.median),
                csv_num(e.ci_low),
                csv_num(e.ci_high),
            ])?;
        }
    }
    out.flush().map_err(|e| crate::error::Error::io("csv", e))?;
    Ok(())
}

/// `unit,P_median,mncs_rel_uncertainty_pct`, one row per unit.
pub fn write_uncertainty_csv<W: Write>(w: W, report: &Report) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["unit", "P_median", "mncs_rel_uncertainty_pct"])?;
    for u in &report.units {
        out.write_record([u.unit.clone(), csv_num(u.p.median), csv_num(u.mncs.relative_uncertainty_pct)])?;
    }
    out.flush().map_err(|e| crate::error::Error::io("csv", e))?;
    Ok(())
}

/// Round to two decimals and drop trailing zeros: `1.0 -> "1"`,
/// `0.8 -> "0.8"`, `0.576 -> "0.58"`.
pub fn fmt2(x: f64) -> String {
    let s = format!("{:.2}", (x * 100.0).round() / 100.0);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn opt2(x: Option<f64>) -> String {
    x.map(fmt2).unwrap_or_else(|| "NA".into())
}

fn with_interval(e: &ReportEntry) -> String {
    match e.median {
        Some(m) => format!("{} ({}, {})", fmt2(m), opt2(e.ci_low), opt2(e.ci_high)),
        None => "NA".into(),
    }
}

fn render_rows(rows: &[Vec<String>], out: &mut String) {
    let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(i, s)| if i == 0 { format!("{s:<w$}", w = widths[i]) } else { format!("{s:>w$}", w = widths[i]) })
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
}

/// Observed values on the left, simulated medians with 95% intervals on the
/// right.
pub fn render_indicator_table(report: &Report, observed_label: &str, simulated_label: &str) -> String {
    let mut rows = vec![vec![
        "publication set".to_string(),
        "P".into(),
        "C".into(),
        "MNCS".into(),
        "P".into(),
        "C".into(),
        "MNCS".into(),
    ]];
    for u in &report.units {
        rows.push(vec![
            u.unit.clone(),
            opt2(u.p.observed),
            opt2(u.c.observed),
            opt2(u.mncs.observed),
            with_interval(&u.p),
            with_interval(&u.c),
            with_interval(&u.mncs),
        ]);
    }
    let mut out = String::new();
    let _ = writeln!(out, "[{observed_label}] | [{simulated_label}]");
    render_rows(&rows, &mut out);
    let _ = writeln!(out, "Simulated values are medians with 95% credible intervals in parentheses.");
    out
}

pub fn render_frequency_tables(t: &FrequencyTables) -> String {
    let mut out = String::new();
    // alphabetical column order
    let types = [DocType::Article, DocType::Letter, DocType::Other, DocType::Review];
    let mut rows = vec![std::iter::once("publication".to_string())
        .chain(types.iter().map(|d| {
            let l = d.label();
            l[..1].to_uppercase() + &l[1..]
        }))
        .collect::<Vec<_>>()];
    for (name, counts) in t.publications.iter().zip(&t.doctypes) {
        rows.push(
            std::iter::once(name.clone())
                .chain(types.iter().map(|d| counts.get(d).copied().unwrap_or(0).to_string()))
                .collect(),
        );
    }
    let _ = writeln!(out, "Predicted document types");
    render_rows(&rows, &mut out);

    let max = t.citations.iter().filter_map(|m| m.keys().next_back().copied()).max().unwrap_or(0);
    let mut rows = vec![std::iter::once("publication".to_string())
        .chain((0..=max).map(|v| v.to_string()))
        .collect::<Vec<_>>()];
    for (name, counts) in t.publications.iter().zip(&t.citations) {
        rows.push(
            std::iter::once(name.clone())
                .chain((0..=max).map(|v| counts.get(&v).copied().unwrap_or(0).to_string()))
                .collect(),
        );
    }
    let _ = writeln!(out, "\nPredicted citation counts");
    render_rows(&rows, &mut out);
    out
}

pub fn render_exercise(r: &ExerciseReport) -> String {
    let mut out = format!("Exercise {}. {}\n", r.exercise, r.exercise.title());
    match &r.output {
        ExerciseOutput::Frequencies(t) => out.push_str(&render_frequency_tables(t)),
        ExerciseOutput::Indicators(res) => {
            let (obs, sim) = r.exercise.column_groups();
            out.push_str(&render_indicator_table(&Report::from_result(res), obs, sim));
        }
    }
    for w in &r.training.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}
