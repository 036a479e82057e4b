use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use bibuq::data::{
    embedded_missed_citation_sample, load_citation_sample, load_confusion_table, load_publications,
    load_reference_set, marginal_statistics, sample_statistics, write_publications, PublicationSet,
};
use bibuq::models::{
    fit_citation_error_model, fit_doctype_error_model, DirichletPosterior, McmcConfig, ModelKind, NegBinModelSpec,
    NegBinPosterior, RHAT_THRESHOLD,
};
use bibuq::predictive::ErrorModels;
use bibuq::simulation::{
    exercise_data, fmt2, propagate_with_dump, render_exercise, render_indicator_table, run_exercise,
    write_interval_csv, write_uncertainty_csv, Exercise, ExerciseConfig, ExerciseOutput, ExerciseReport,
    PropagationConfig, Report, TrainingInputs,
};
use bibuq::{Error, Result};

use crate::args::{Configurable, ExerciseArgs, FitArgs, Format, PropagateArgs, ReportArgs, StatsArgs};
use crate::manifest::Run;

/// Exit code for a non-converged fit under `--strict`.
pub const EXIT_NOT_CONVERGED: u8 = 3;

fn required<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| Error::Usage(format!("missing required option {flag}")))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::input(path, e))
}

fn json_line(text: String) -> Vec<u8> {
    (text + "\n").into_bytes()
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn fit(args: FitArgs) -> Result<u8> {
    let a = args.resolve()?;
    if a.citation_sample.is_none() && a.doctype_confusion.is_none() {
        return Err(Error::Usage(
            "fit needs --citation-sample and/or --doctype-confusion".into(),
        ));
    }
    let kind = *required(&a.direction, "--direction")?;
    let mut run = Run::start("fit", a.seed, &a, a.out.as_deref())?;
    let mut code = 0;

    if let Some(path) = &a.citation_sample {
        run.input(path)?;
        let sample = load_citation_sample(path)?;
        let cfg = McmcConfig {
            chains: a.chains.unwrap_or(4),
            warmup: a.warmup.unwrap_or(1000),
            keep: a.keep.unwrap_or(1000),
            seed: a.seed.unwrap_or(0),
            ..Default::default()
        };
        let post = fit_citation_error_model(&sample, &NegBinModelSpec::new(kind), &cfg)?;
        run.write("citation_posterior.json", &json_line(post.to_json()?))?;
        print_diagnostics(&post);
        if !post.converged() {
            eprintln!("warning: citation model did not converge (R-hat at or above {RHAT_THRESHOLD})");
            if a.strict {
                code = EXIT_NOT_CONVERGED;
            }
        }
    }

    if let Some(path) = &a.doctype_confusion {
        run.input(path)?;
        let table = load_confusion_table(path)?;
        let post = fit_doctype_error_model(&table, a.pseudocount.unwrap_or(1.0), kind)?;
        run.write("doctype_posterior.json", &json_line(post.to_json()?))?;
        print_doctype_means(&post);
    }
    run.finish()?;
    Ok(code)
}

fn print_diagnostics(post: &NegBinPosterior) {
    println!("citation model ({}): {} draws", post.kind(), post.len());
    println!("{:<14} {:>10} {:>10} {:>8}", "parameter", "median", "R-hat", "ESS");
    for (i, d) in post.diagnostics.parameters.iter().enumerate() {
        let mut xs: Vec<f64> = post.draws.iter().map(|p| p.component(i)).collect();
        xs.sort_by(f64::total_cmp);
        let median = bibuq::simulation::quantile(&xs, 0.5);
        let rhat = d.rhat.map_or("-".to_string(), |r| format!("{r:.3}"));
        println!("{:<14} {:>10.4} {:>10} {:>8.0}", d.name, median, rhat, d.ess);
    }
    let acc: Vec<String> = post.diagnostics.acceptance.iter().map(|a| format!("{a:.2}")).collect();
    println!("acceptance per chain: {}", acc.join(" "));
}

fn print_doctype_means(post: &DirichletPosterior) {
    let (given, predicted) = match post.kind {
        ModelKind::SecondKind => ("observed", "true"),
        ModelKind::FirstKind => ("true", "observed"),
    };
    println!("document-type model ({}): mean P({predicted} | {given})", post.kind);
    print!("{:<10}", given);
    for d in bibuq::data::DocType::ALL {
        print!(" {:>8}", d.label());
    }
    println!();
    for g in bibuq::data::DocType::ALL {
        print!("{:<10}", g.label());
        for p in post.mean_probabilities(g) {
            print!(" {p:>8.4}");
        }
        println!();
    }
}

fn load_models(a: &PropagateArgs, run: &mut Run) -> Result<ErrorModels> {
    let mut models = ErrorModels::default();
    if let Some(path) = &a.citation_model {
        run.input(path)?;
        models.citation = Some(NegBinPosterior::from_json(&read_text(path)?)?);
    }
    if let Some(path) = &a.doctype_model {
        run.input(path)?;
        models.doctype = Some(DirichletPosterior::from_json(&read_text(path)?)?);
    }
    Ok(models)
}

fn split_reference(units: &mut Vec<PublicationSet>, name: &str) -> Result<PublicationSet> {
    let i = units
        .iter()
        .position(|u| u.name == name)
        .ok_or_else(|| Error::Usage(format!("reference unit `{name}` not found in publications")))?;
    let set = units.remove(i);
    PublicationSet::reference(set.name.clone(), set.into_members())
}

pub fn propagate(args: PropagateArgs, kind: ModelKind) -> Result<u8> {
    let a = args.resolve()?;
    let command = match kind {
        ModelKind::SecondKind => "propagate",
        ModelKind::FirstKind => "inject",
    };
    let pubs = required(&a.pubs, "--pubs")?;
    let mut run = Run::start(command, a.seed, &a, a.out.as_deref())?;
    run.input(pubs)?;
    let mut units = load_publications(pubs)?;
    let reference = match (&a.reference, &a.reference_unit) {
        (Some(_), Some(_)) => {
            return Err(Error::Usage("give either --reference or --reference-unit, not both".into()))
        }
        (Some(path), None) => {
            run.input(path)?;
            Some(load_reference_set(path, "reference")?)
        }
        (None, Some(name)) => Some(split_reference(&mut units, name)?),
        (None, None) => None,
    };
    let models = load_models(&a, &mut run)?;
    let cfg = PropagationConfig {
        iterations: *required(&a.iterations, "--iterations")?,
        seed: a.seed.unwrap_or(0),
        channels: *required(&a.channels, "--channels")?,
        kind,
        key_mode: *required(&a.key_mode, "--key-mode")?,
        universe: *required(&a.universe, "--universe")?,
        workers: a.workers,
        shared_parameters: !a.per_item_parameters,
    };

    let mut dump = match run.out_path("draws.csv").filter(|_| a.dump_draws) {
        Some(path) => Some(BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?)),
        None => None,
    };
    let result = propagate_with_dump(
        &units,
        reference.as_ref(),
        &models,
        &cfg,
        dump.as_mut().map(|w| w as &mut dyn Write),
    )?;
    if let Some(mut w) = dump {
        w.flush().map_err(|e| Error::io("draws.csv", e))?;
        drop(w);
        run.record("draws.csv")?;
    }

    let report = Report::from_result(&result);
    run.write("report.json", &json_line(report.to_json()?))?;
    run.write("intervals.csv", &csv_bytes(|b| write_interval_csv(b, &report))?)?;
    run.write("uncertainty.csv", &csv_bytes(|b| write_uncertainty_csv(b, &report))?)?;

    let (obs, sim) = match kind {
        ModelKind::SecondKind => ("observed error-affected values", "simulated error-free values"),
        ModelKind::FirstKind => ("error-free values", "simulated error-affected values"),
    };
    print!("{}", render_indicator_table(&report, obs, sim));
    for u in report.units.iter().filter(|u| u.excluded_count > 0) {
        println!("{}: {} publications without a normalization cell excluded from MNCS", u.unit, u.excluded_count);
    }
    run.finish()?;
    Ok(0)
}

pub fn exercise(args: ExerciseArgs) -> Result<u8> {
    let a = args.resolve()?;
    let name = a.name.as_deref().ok_or_else(|| {
        let names: Vec<&str> = Exercise::ALL.iter().map(|e| e.label()).collect();
        Error::Usage(format!("exercise name required; valid names: {}", names.join(", ")))
    })?;
    let exercise: Exercise = name.parse()?;
    let seed = a.seed.unwrap_or(0);
    let mut run = Run::start("exercise", Some(seed), &a, a.out.as_deref())?;
    let mut inputs = TrainingInputs::default();
    if let Some(path) = &a.citation_sample {
        run.input(path)?;
        inputs.citation_sample = Some(load_citation_sample(path)?);
    }
    if let Some(path) = &a.doctype_confusion {
        run.input(path)?;
        inputs.confusion = Some(load_confusion_table(path)?);
    }
    let cfg = ExerciseConfig {
        seed,
        iterations: *required(&a.iterations, "--iterations")?,
        mcmc: McmcConfig {
            chains: a.chains.unwrap_or(4),
            warmup: a.warmup.unwrap_or(1000),
            keep: a.keep.unwrap_or(1000),
            seed,
            ..Default::default()
        },
        pseudocount: a.pseudocount.unwrap_or(1.0),
        workers: a.workers,
    };
    let format = a.format.unwrap_or_default();
    if format == Format::Csv && exercise == Exercise::E1 {
        return Err(Error::Usage("csv output is available for indicator exercises only".into()));
    }
    let report = run_exercise(exercise, &inputs, &cfg)?;
    let text = render_exercise(&report);
    let json = serde_json::to_string_pretty(&report)?;
    run.write("exercise.json", &json_line(json.clone()))?;
    run.write("exercise.txt", text.as_bytes())?;
    let mut interval_csv = Vec::new();
    if let ExerciseOutput::Indicators(res) = &report.output {
        let r = Report::from_result(res);
        interval_csv = csv_bytes(|b| write_interval_csv(b, &r))?;
        run.write("report.json", &json_line(r.to_json()?))?;
        run.write("intervals.csv", &interval_csv)?;
        run.write("uncertainty.csv", &csv_bytes(|b| write_uncertainty_csv(b, &r))?)?;
    }
    if a.export_data {
        if let Some((mut units, reference)) = exercise_data(exercise, seed)? {
            units.push(reference);
            run.write("publications.csv", &csv_bytes(|b| write_publications(b, &units))?)?;
        }
    }
    match format {
        Format::Text => print!("{text}"),
        Format::Json => println!("{json}"),
        Format::Csv => print!("{}", String::from_utf8_lossy(&interval_csv)),
    }
    run.finish()?;
    Ok(0)
}

enum Saved {
    Report(Report),
    Exercise(Box<ExerciseReport>),
}

pub fn report(args: ReportArgs) -> Result<u8> {
    let a = args.resolve()?;
    let input = required(&a.input, "--input")?;
    let mut run = Run::start("report", None, &a, a.out.as_deref())?;
    run.input(input)?;
    let text = read_text(input)?;
    let saved = match Report::from_json(&text) {
        Ok(r) => Saved::Report(r),
        Err(_) => match serde_json::from_str::<ExerciseReport>(&text) {
            Ok(e) => Saved::Exercise(Box::new(e)),
            Err(_) => {
                return Err(Error::Usage(format!(
                    "{} is neither a report.json nor an exercise.json file",
                    input.display()
                )))
            }
        },
    };
    let report = match &saved {
        Saved::Report(r) => Some(r.clone()),
        Saved::Exercise(e) => match &e.output {
            ExerciseOutput::Indicators(res) => Some(Report::from_result(res)),
            ExerciseOutput::Frequencies(_) => None,
        },
    };
    let (name, rendered) = match a.format.unwrap_or_default() {
        Format::Text => (
            "report.txt",
            match &saved {
                Saved::Exercise(e) => render_exercise(e),
                Saved::Report(r) => {
                    let (obs, sim) = match r.config.kind {
                        ModelKind::SecondKind => ("observed error-affected values", "simulated error-free values"),
                        ModelKind::FirstKind => ("error-free values", "simulated error-affected values"),
                    };
                    render_indicator_table(r, obs, sim)
                }
            },
        ),
        Format::Json => (
            "report.json",
            match (&saved, &report) {
                (Saved::Exercise(e), None) => serde_json::to_string_pretty(e)? + "\n",
                (_, Some(r)) => r.to_json()? + "\n",
                (Saved::Report(_), None) => unreachable!("a saved report always converts"),
            },
        ),
        Format::Csv => {
            let r = report.ok_or_else(|| Error::Usage("csv output needs an indicator report".into()))?;
            ("intervals.csv", String::from_utf8_lossy(&csv_bytes(|b| write_interval_csv(b, &r))?).into_owned())
        }
    };
    print!("{rendered}");
    run.write(name, rendered.as_bytes())?;
    run.finish()?;
    Ok(0)
}

fn pct(x: Option<f64>) -> String {
    x.map_or("NA".into(), |v| format!("{:.2}%", 100.0 * v))
}

pub fn stats(args: StatsArgs) -> Result<u8> {
    let a = args.resolve()?;
    let mut run = Run::start("stats", None, &a, a.out.as_deref())?;
    let (json, text) = if let Some(path) = &a.sample {
        run.input(path)?;
        let s = sample_statistics(&load_citation_sample(path)?)?;
        let mut t = String::new();
        t += &format!("records: {}\n", s.records);
        t += &format!("observed citations: {}\n", s.total_observed);
        t += &format!("omitted citations: {}\n", s.total_omitted);
        t += &format!("omitted rate: {}\n", pct(s.omitted_rate));
        t += &format!("share with omitted citations: {}\n", pct(Some(s.share_with_omitted)));
        t += &format!(
            "mean citations: {} -> {} (shift {})\n",
            fmt2(s.mean_observed),
            fmt2(s.mean_corrected),
            fmt2(s.mean_shift)
        );
        t += &match &s.correlation {
            Some(c) => match (c.ci_low, c.ci_high) {
                (Some(lo), Some(hi)) => format!("pearson r: {} (95% CI {}, {})\n", fmt2(c.r), fmt2(lo), fmt2(hi)),
                _ => format!("pearson r: {}\n", fmt2(c.r)),
            },
            None => "pearson r: undefined (zero variance)\n".into(),
        };
        (serde_json::to_string_pretty(&s)?, t)
    } else if a.embedded {
        let s = marginal_statistics(&embedded_missed_citation_sample(), a.citation_total);
        let mut t = String::new();
        t += &format!("records: {}\n", s.records);
        t += &format!("omitted citations: {}\n", s.total_missed);
        if let Some(total) = s.total_observed {
            t += &format!("observed citations: {total}\n");
        }
        t += &format!("omitted rate: {}\n", pct(s.omitted_rate));
        t += &format!(
            "share with omitted citations: {} ({} of {})\n",
            pct(s.share_with_missed),
            s.records_with_missed,
            s.records
        );
        if let (Some(m0), Some(m1)) = (s.mean_observed, s.mean_corrected) {
            t += &format!("mean citations: {} -> {}\n", fmt2(m0), fmt2(m1));
        }
        (serde_json::to_string_pretty(&s)?, t)
    } else {
        return Err(Error::Usage("stats needs --sample <CSV> or --embedded".into()));
    };
    run.write("stats.json", &json_line(json.clone()))?;
    match a.format.unwrap_or_default() {
        Format::Json => println!("{json}"),
        Format::Text => print!("{text}"),
        Format::Csv => return Err(Error::Usage("stats supports text or json output".into())),
    }
    run.finish()?;
    Ok(0)
}
