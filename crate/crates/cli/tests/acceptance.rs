//! Acceptance checks. Prints one line per criterion and exits non-zero when
//! a criterion fails that is not listed in `KNOWN_FAILURES`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use bibuq::data::{
    embedded_missed_citation_sample, marginal_statistics, write_citation_sample, write_confusion_table,
    write_publications, CitationErrorSample, DocType, DocTypeConfusionTable, ErrorPair, Publication, PublicationSet,
};
use bibuq::indicators::{build_normalization, indicators_for, KeyMode};
use bibuq::models::{
    fit_citation_error_model, fit_doctype_error_model, prior_predictive_check, sample_negbin, McmcConfig, ModelKind,
    NegBinModelSpec, NegBinPosterior, ParamPrior, DEFAULT_PRIOR_GRID, RHAT_THRESHOLD,
};
use bibuq::predictive::{predict_error_affected_citations, Channels, ErrorModels};
use bibuq::rng::{stream, Domain, StreamRng};
use bibuq::simulation::{
    exercise_data, generate_scenario, propagate, quantile, run_exercise, synthesize_training_sample,
    synthetic_confusion_table, Exercise, ExerciseConfig, ExerciseOutput, Indicator, PropagationConfig, ScenarioConfig,
    TrainingInputs,
};
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

const BIN: &str = env!("CARGO_BIN_EXE_bibuq");

/// Criteria expected to fail, with the reason. See the project notes.
const KNOWN_FAILURES: &[(u32, &str)] = &[(
    1,
    "6120 / 372 = 16.452 is 0.052 from the rounded 16.4, just outside the 0.05 rounding allowance",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn main() {
    let criteria: Vec<(u32, &str, f64, fn() -> Outcome)> = vec![
        (1, "embedded sample statistics", 1.0, embedded_statistics),
        (2, "prior scale", 5.0, prior_scale),
        (3, "conjugacy oracle", f64::INFINITY, conjugacy),
        (4, "MCMC parameter recovery", 60.0, recovery),
        (5, "grid-oracle equivalence", f64::INFINITY, grid_oracle),
        (6, "channel isolation", f64::INFINITY, channel_isolation),
        (7, "exercise 2 direction", 120.0, exercise_2_direction),
        (8, "indicator algebra", f64::INFINITY, indicator_algebra),
        (9, "determinism", f64::INFINITY, determinism),
        (10, "desk-scale performance", f64::INFINITY, performance),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    for (id, name, budget, check) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let mut o = check();
        let secs = start.elapsed().as_secs_f64();
        if secs >= budget {
            o.pass = false;
            o.detail += &format!("; over the {budget} s budget");
        }
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id);
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status} {name}: {} [{secs:.2} s]", o.detail);
        match (o.pass, known) {
            (false, Some((_, why))) => println!("             known failure: {why}"),
            (false, None) => unexpected.push(id),
            _ => {}
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn embedded_statistics() -> Outcome {
    let s = marginal_statistics(&embedded_missed_citation_sample(), Some(6120));
    let rate = s.omitted_rate.unwrap() * 100.0;
    let share = s.share_with_missed.unwrap() * 100.0;
    let (before, after) = (s.mean_observed.unwrap(), s.mean_corrected.unwrap());
    let pass = s.records == 372
        && s.total_missed == 255
        && s.records_with_missed == 109
        && format!("{rate:.2}") == "4.17"
        && format!("{share:.2}") == "29.30"
        && within(before, 16.4, 0.05)
        && within(after, 17.1, 0.05);
    outcome(
        pass,
        format!(
            "records {} missed {} rate {rate:.2}% share {share:.2}% ({}/{}) mean {before:.3} -> {after:.3} (targets 16.4 -> 17.1 +-0.05)",
            s.records, s.total_missed, s.records_with_missed, s.records
        ),
    )
}

fn prior_scale() -> Outcome {
    let s = prior_predictive_check(&NegBinModelSpec::default(), &McmcConfig::with_seed(1), &DEFAULT_PRIOR_GRID).unwrap();
    let (lo, hi) = s.intercept_two_sigma.unwrap();
    let [q_lo, _, q_hi] = s.intercept_quantiles;
    outcome(
        within(lo, 0.2, 0.05) && within(hi, 4.95, 0.15),
        format!("exp(b0) 95% range {lo:.3}..{hi:.3} (two-sigma); Monte Carlo 2.5/97.5% quantiles {q_lo:.3}..{q_hi:.3}"),
    )
}

fn conjugacy() -> Outcome {
    let mut rng = stream(3, Domain::Synthetic, &[1]);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut counts = [[0u64; 4]; 4];
        for row in counts.iter_mut() {
            for c in row.iter_mut() {
                *c = if rng.random_bool(0.2) { 0 } else { rng.random_range(0..2000) };
            }
        }
        let table = DocTypeConfusionTable::new(counts);
        let a: f64 = [0.5, 1.0, 2.5][rng.random_range(0..3)];
        for kind in [ModelKind::FirstKind, ModelKind::SecondKind] {
            let post = fit_doctype_error_model(&table, a, kind).unwrap();
            for given in DocType::ALL {
                let cell = |other: DocType| match kind {
                    ModelKind::FirstKind => counts[given.index()][other.index()],
                    ModelKind::SecondKind => counts[other.index()][given.index()],
                } as f64;
                let total: f64 = DocType::ALL.iter().map(|&o| cell(o)).sum();
                let means = post.mean_probabilities(given);
                for o in DocType::ALL {
                    let expect = (cell(o) + a) / (total + 4.0 * a);
                    worst = worst.max((means[o.index()] - expect).abs());
                }
            }
        }
    }
    outcome(worst <= 1e-12, format!("max deviation {worst:.2e} over 100 tables, both directions"))
}

fn recovery() -> Outcome {
    let (b0, b1, theta) = (-0.5, 0.45, 1.0);
    let mut rng = stream(11, Domain::Synthetic, &[99]);
    let lognormal = Normal::new(2.0, 1.2).unwrap();
    let rows = (0..2000)
        .map(|_| {
            let z: f64 = lognormal.sample(&mut rng);
            let c = z.exp().floor() as u64;
            ErrorPair::new(c, sample_negbin(&mut rng, (b0 + b1 * ((c + 1) as f64).ln()).exp(), theta))
        })
        .collect();
    let sample = CitationErrorSample::new(rows);
    let post = fit_citation_error_model(&sample, &NegBinModelSpec::default(), &McmcConfig::with_seed(5)).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, truth) in [b0, b1, theta.ln()].into_iter().enumerate() {
        let mut xs: Vec<f64> = post.draws.iter().map(|p| p.component(i)).collect();
        xs.sort_by(f64::total_cmp);
        let (lo, hi) = (quantile(&xs, 0.025), quantile(&xs, 0.975));
        let rhat = post.diagnostics.parameters[i].rhat.unwrap_or(f64::NAN);
        pass &= lo <= truth && truth <= hi && rhat < RHAT_THRESHOLD;
        parts.push(format!("{} {truth:.2} in ({lo:.3}, {hi:.3}) R-hat {rhat:.3}", post.diagnostics.parameters[i].name));
    }
    outcome(pass, parts.join("; "))
}

fn grid_oracle() -> Outcome {
    const SLOPE: f64 = 0.2;
    const SD: f64 = 0.8;
    const BINS: usize = 200;
    let mut rng = stream(21, Domain::Synthetic, &[]);
    let data: Vec<(u64, u64)> = (0..60)
        .map(|_| {
            let c = rng.random_range(0..40u64);
            let mean = (0.3 + SLOPE * ((c + 1) as f64).ln()).exp();
            (c, Poisson::new(mean).unwrap().sample(&mut rng) as u64)
        })
        .collect();
    let ln_post = |b0: f64| -> f64 {
        -0.5 * (b0 / SD).powi(2)
            + data
                .iter()
                .map(|&(c, y)| {
                    let eta = b0 + SLOPE * ((c + 1) as f64).ln();
                    y as f64 * eta - eta.exp()
                })
                .sum::<f64>()
    };
    let grid = |lo: f64, hi: f64| -> Vec<f64> {
        let sub = 50;
        let w = (hi - lo) / (BINS * sub) as f64;
        let pts: Vec<f64> = (0..BINS * sub).map(|k| ln_post(lo + (k as f64 + 0.5) * w)).collect();
        let max = pts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mass: Vec<f64> = pts.chunks(sub).map(|c| c.iter().map(|v| (v - max).exp()).sum()).collect();
        let total: f64 = mass.iter().sum();
        mass.into_iter().map(|m| m / total).collect()
    };
    let coarse = grid(-5.0, 5.0);
    let mid = |i: usize| -5.0 + (i as f64 + 0.5) * 10.0 / BINS as f64;
    let mean: f64 = coarse.iter().enumerate().map(|(i, p)| p * mid(i)).sum();
    let sd = coarse.iter().enumerate().map(|(i, p)| p * (mid(i) - mean).powi(2)).sum::<f64>().sqrt();
    let (lo, hi) = (mean - 6.0 * sd, mean + 6.0 * sd);
    let oracle = grid(lo, hi);

    let spec = NegBinModelSpec {
        kind: ModelKind::SecondKind,
        intercept_prior: ParamPrior::normal(0.0, SD),
        slope_prior: ParamPrior::Fixed { value: SLOPE },
        dispersion_prior: ParamPrior::Fixed { value: 1e8f64.ln() },
    };
    let cfg = McmcConfig { chains: 4, warmup: 2000, keep: 50_000, seed: 8, target_acceptance: 0.3 };
    let sample = CitationErrorSample::new(data.iter().map(|&(c, y)| ErrorPair::new(c, y)).collect());
    let post = fit_citation_error_model(&sample, &spec, &cfg).unwrap();
    let n = post.draws.len() as f64;
    let mut hist = vec![0.0; BINS];
    let mut outside = 0.0;
    for d in &post.draws {
        let k = ((d.intercept - lo) / (hi - lo) * BINS as f64).floor();
        if (0.0..BINS as f64).contains(&k) {
            hist[k as usize] += 1.0 / n;
        } else {
            outside += 1.0 / n;
        }
    }
    let tv = 0.5 * (hist.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).sum::<f64>() + outside);
    outcome(tv < 0.05, format!("total variation {tv:.4} (limit 0.05), {BINS} bins"))
}

fn training_sample(kind: ModelKind, seed: u64) -> NegBinPosterior {
    let s = synthesize_training_sample(&embedded_missed_citation_sample(), 6120.0 / 372.0, 0.31, seed).unwrap();
    let cfg = McmcConfig { warmup: 500, keep: 500, ..McmcConfig::with_seed(seed) };
    fit_citation_error_model(&s.sample, &NegBinModelSpec::new(kind), &cfg).unwrap()
}

fn channel_isolation() -> Outcome {
    let second = ErrorModels { citation: Some(training_sample(ModelKind::SecondKind, 1)), doctype: None };
    let first = ErrorModels { citation: Some(training_sample(ModelKind::FirstKind, 1)), doctype: None };
    let mut checks = 0usize;
    let mut failures = Vec::new();
    for seed in 0..20u64 {
        let sets = generate_scenario(&ScenarioConfig::exercise_2(seed)).unwrap();
        let (reference, units): (Vec<_>, Vec<_>) = sets.into_iter().partition(|s| s.name == "ref");
        for (kind, models) in [(ModelKind::SecondKind, &second), (ModelKind::FirstKind, &first)] {
            let cfg = PropagationConfig {
                iterations: 200,
                seed,
                channels: Channels::CITATIONS,
                kind,
                ..Default::default()
            };
            let r = propagate(&units, reference.first(), models, &cfg).unwrap();
            for u in &units {
                let p = r.distribution(&u.name, Indicator::P).unwrap();
                let c = r.distribution(&u.name, Indicator::C).unwrap();
                let obs_c = c.observed.unwrap();
                checks += 1;
                if p.replicates.iter().any(|&x| Some(x) != p.observed) {
                    failures.push(format!("seed {seed} {kind} {}: P varies", u.name));
                }
                let ok = match kind {
                    ModelKind::SecondKind => c.replicates.iter().all(|&x| x >= obs_c),
                    ModelKind::FirstKind => c.replicates.iter().all(|&x| x <= obs_c),
                };
                if !ok {
                    failures.push(format!("seed {seed} {kind} {}: C bound broken", u.name));
                }
            }
        }
    }
    let post = first.citation.as_ref().unwrap();
    let mut rng = stream(4, Domain::Synthetic, &[]);
    for i in 0..200u64 {
        let c_star = rng.random_range(0..500u64);
        let draws = predict_error_affected_citations(post, c_star, 50, i).unwrap();
        checks += 1;
        if draws.iter().any(|&d| d > c_star) {
            failures.push(format!("first-kind draw above true count {c_star}"));
        }
    }
    outcome(
        failures.is_empty(),
        format!("{checks} randomized cases, {} violations{}", failures.len(), failures.first().map(|f| format!(": {f}")).unwrap_or_default()),
    )
}

fn exercise_2_direction() -> Outcome {
    let cfg = ExerciseConfig { iterations: 2000, ..ExerciseConfig::with_seed(1) };
    let report = run_exercise(Exercise::E2, &TrainingInputs::default(), &cfg).unwrap();
    let ExerciseOutput::Indicators(result) = report.output else {
        return outcome(false, "no indicator output");
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for unit in ["A", "B"] {
        let c = result.distribution(unit, Indicator::C).unwrap();
        let m = result.distribution(unit, Indicator::Mncs).unwrap();
        let (c_obs, c_med) = (c.observed.unwrap(), c.summary.as_ref().unwrap().median);
        let (m_obs, m_med) = (m.observed.unwrap(), m.summary.as_ref().unwrap().median);
        pass &= c_med > c_obs && within(m_med, m_obs, 0.15);
        parts.push(format!("{unit}: C {c_obs} -> {c_med}, MNCS {m_obs:.3} -> {m_med:.3}"));
    }
    outcome(pass, parts.join("; "))
}

fn indicator_algebra() -> Outcome {
    let mut rng = stream(8, Domain::Synthetic, &[2]);
    let mut worst_pooled: f64 = 0.0;
    let mut mismatches = 0;
    for _ in 0..100 {
        let n_units = rng.random_range(1..4);
        let pubs = |name: &str, n: usize, rng: &mut StreamRng| -> Vec<Publication> {
            (0..n)
                .map(|i| Publication::new(format!("{name}-{i}"), name, DocType::from_index(rng.random_range(0..4)), rng.random_range(0..25)))
                .collect()
        };
        let units: Vec<PublicationSet> = (0..n_units)
            .map(|u| {
                let n = rng.random_range(0..10);
                PublicationSet::unit(format!("U{u}"), pubs(&format!("U{u}"), n, &mut rng)).unwrap()
            })
            .collect();
        let n = rng.random_range(1..30);
        let reference = PublicationSet::reference("ref", pubs("ref", n, &mut rng)).unwrap();
        let mut sets: Vec<&PublicationSet> = vec![&reference];
        sets.extend(units.iter());
        let cells = build_normalization(&sets, KeyMode::DoctypeOnly);

        // brute force over the pooled universe
        let all: Vec<&Publication> = sets.iter().flat_map(|s| s.iter()).collect();
        for u in &units {
            let got = indicators_for(u, &cells);
            let core: Vec<&Publication> = u.iter().filter(|p| matches!(p.doctype, DocType::Article | DocType::Review)).collect();
            let (mut sum, mut scored) = (0.0, 0usize);
            for p in &core {
                let peers: Vec<&&Publication> = all.iter().filter(|q| q.doctype == p.doctype).collect();
                let total: u64 = peers.iter().map(|q| q.citations).sum();
                let expected = total as f64 / peers.len() as f64;
                if expected > 0.0 {
                    sum += p.citations as f64 / expected;
                    scored += 1;
                } else if p.citations == 0 {
                    scored += 1;
                }
            }
            let want = (core.len() as u64, core.iter().map(|p| p.citations).sum::<u64>(), (scored > 0).then(|| sum / scored as f64));
            if (got.p, got.c, got.mncs.map(f64::to_bits)) != (want.0, want.1, want.2.map(f64::to_bits)) {
                mismatches += 1;
            }
        }

        // the whole universe as one unit
        let everything = PublicationSet::unit("all", all.iter().map(|p| (*p).clone()).collect()).unwrap();
        let occupied = cells.sorted().iter().all(|c| c.total_citations > 0);
        if occupied && everything.iter().any(|p| p.doctype.is_core()) {
            let m = indicators_for(&everything, &cells).mncs.unwrap();
            worst_pooled = worst_pooled.max((m - 1.0).abs());
        }
    }
    outcome(
        worst_pooled <= 1e-12 && mismatches == 0,
        format!("pooled MNCS max |1 - x| {worst_pooled:.2e}; {mismatches} brute-force mismatches in 100 instances"),
    )
}

fn bibuq(dir: &Path, workers: usize, args: &[&str]) -> bool {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env("RAYON_NUM_THREADS", workers.to_string())
        .env("BIBUQ_WORKERS", workers.to_string())
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .into_iter()
        .flatten()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn write_training(dir: &Path, seed: u64) {
    let s = synthesize_training_sample(&embedded_missed_citation_sample(), 6120.0 / 372.0, 0.31, seed).unwrap();
    write_citation_sample(fs::File::create(dir.join("sample.csv")).unwrap(), &s.sample).unwrap();
    write_confusion_table(fs::File::create(dir.join("confusion.csv")).unwrap(), &synthetic_confusion_table()).unwrap();
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write_training(d, 2);
    let (units, reference) = exercise_data(Exercise::E2, 4).unwrap().unwrap();
    let mut all = units.clone();
    all.push(reference);
    write_publications(fs::File::create(d.join("pubs.csv")).unwrap(), &all).unwrap();

    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("fit", vec!["fit", "--citation-sample", "sample.csv", "--doctype-confusion", "confusion.csv", "--warmup", "300", "--keep", "300", "--seed", "4"]),
        ("fit1", vec!["fit", "--citation-sample", "sample.csv", "--doctype-confusion", "confusion.csv", "--direction", "first-kind", "--warmup", "300", "--keep", "300"]),
        ("propagate", vec!["propagate", "--pubs", "pubs.csv", "--reference-unit", "ref", "--citation-model", "fit-1/citation_posterior.json", "--doctype-model", "fit-1/doctype_posterior.json", "--iterations", "300", "--seed", "9", "--dump-draws"]),
        ("inject", vec!["inject", "--pubs", "pubs.csv", "--reference-unit", "ref", "--citation-model", "fit1-1/citation_posterior.json", "--doctype-model", "fit1-1/doctype_posterior.json", "--iterations", "300"]),
        ("exercise", vec!["exercise", "A3", "--iterations", "200", "--warmup", "300", "--keep", "300", "--export-data"]),
        ("exercise1", vec!["exercise", "1", "--iterations", "200", "--warmup", "300", "--keep", "300", "--seed", "6"]),
        ("stats", vec!["stats", "--embedded"]),
        ("report", vec!["report", "--input", "propagate-1/report.json", "--format", "csv"]),
    ];
    let mut failures = Vec::new();
    let mut compared = 0;
    for (label, args) in &commands {
        let mut runs = Vec::new();
        for w in [1usize, 2, 8] {
            let out = format!("{label}-{w}");
            let mut a = args.clone();
            a.extend(["--out", &out]);
            if !bibuq(d, w, &a) {
                failures.push(format!("{label} failed with {w} workers"));
            }
            runs.push(outputs(&d.join(&out)));
        }
        let replay = format!("{label}-replay");
        let config = format!("{label}-1/manifest.json");
        if !bibuq(d, 8, &[args[0], "--config", &config, "--out", &replay]) {
            failures.push(format!("{label} replay failed"));
        }
        runs.push(outputs(&d.join(&replay)));
        if runs[0].is_empty() {
            failures.push(format!("{label} wrote nothing"));
        }
        compared += runs[0].len();
        if runs.iter().any(|r| r != &runs[0]) {
            failures.push(format!("{label} outputs differ"));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} commands x workers 1/2/8 + manifest replay, {compared} files compared{}",
            commands.len(),
            failures.first().map(|f| format!("; {f}")).unwrap_or_default()
        ),
    )
}

fn field_scale_publications(seed: u64) -> Vec<PublicationSet> {
    let mut rng = stream(seed, Domain::Synthetic, &[43]);
    let lognormal = Normal::new(2.0, 1.1).unwrap();
    let mix = [0.68, 0.04, 0.03, 0.25];
    let make = |name: &str, n: usize, rng: &mut StreamRng| -> Vec<Publication> {
        (0..n)
            .map(|i| {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let d = mix.iter().position(|&m| {
                    acc += m;
                    u < acc
                });
                let z: f64 = lognormal.sample(rng);
                Publication::new(format!("{name}-{i}"), name, DocType::from_index(d.unwrap_or(3)), z.exp().floor() as u64)
                    .with_year(rng.random_range(2008..2013))
                    .with_field(format!("F{}", rng.random_range(0..10)))
            })
            .collect()
    };
    let mut sets: Vec<PublicationSet> = (0..8).map(|u| PublicationSet::unit(format!("U{u}"), make(&format!("U{u}"), 500, &mut rng)).unwrap()).collect();
    sets.push(PublicationSet::reference("ref", make("ref", 20_000, &mut rng)).unwrap());
    sets
}

fn performance() -> Outcome {
    const BUDGET: f64 = 600.0;
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write_training(d, 3);
    let fits = bibuq(d, 4, &["fit", "--citation-sample", "sample.csv", "--doctype-confusion", "confusion.csv", "--direction", "first-kind", "--out", "m1"])
        && bibuq(d, 4, &["fit", "--citation-sample", "sample.csv", "--doctype-confusion", "confusion.csv", "--out", "m2"]);
    if !fits {
        return outcome(false, "model fits failed");
    }

    let (units, reference) = exercise_data(Exercise::A4, 0).unwrap().unwrap();
    let mut a4 = units;
    a4.push(reference);
    let n_a4: usize = a4.iter().map(|s| s.len()).sum();
    write_publications(fs::File::create(d.join("a4.csv")).unwrap(), &a4).unwrap();
    let start = Instant::now();
    let inject = bibuq(d, 4, &["inject", "--pubs", "a4.csv", "--reference-unit", "ref", "--citation-model", "m1/citation_posterior.json", "--doctype-model", "m1/doctype_posterior.json", "--iterations", "2000", "--out", "inject"]);
    let t_inject = start.elapsed().as_secs_f64();

    let field = field_scale_publications(0);
    let n_units: usize = field.iter().filter(|s| s.name != "ref").map(|s| s.len()).sum();
    let n_ref = field.last().unwrap().len();
    write_publications(fs::File::create(d.join("field.csv")).unwrap(), &field).unwrap();
    let start = Instant::now();
    let prop = bibuq(d, 4, &["propagate", "--pubs", "field.csv", "--reference-unit", "ref", "--citation-model", "m2/citation_posterior.json", "--doctype-model", "m2/doctype_posterior.json", "--key-mode", "doctype-year-field", "--universe", "reference-only", "--iterations", "1000", "--out", "prop"]);
    let t_prop = start.elapsed().as_secs_f64();

    outcome(
        inject && prop && t_inject < BUDGET && t_prop < BUDGET,
        format!(
            "inject {n_a4} publications x 2000 in {t_inject:.1} s; propagate {n_units} unit + {n_ref} reference publications x 1000 in {t_prop:.1} s (limit {BUDGET} s each; CPUs available: {})",
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        ),
    )
}
