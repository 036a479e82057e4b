use std::collections::HashSet;
use std::io::Write;

use bibuq::data::{load_publications, DocType, Publication, PublicationSet};
use bibuq::indicators::{build_normalization, indicators_for, ncs, KeyMode, Universe};
use bibuq::simulation::observed_indicators;
use proptest::prelude::*;

fn publication() -> impl Strategy<Value = (usize, u64, Option<i32>, Option<u8>)> {
    (0usize..4, 0u64..30, prop::option::weighted(0.9, 2000i32..2003), prop::option::weighted(0.9, 0u8..3))
}

fn sets() -> impl Strategy<Value = (Vec<PublicationSet>, PublicationSet)> {
    (prop::collection::vec(prop::collection::vec(publication(), 0..12), 1..4), prop::collection::vec(publication(), 1..30)).prop_map(
        |(units, reference)| {
            let build = |name: String, items: Vec<(usize, u64, Option<i32>, Option<u8>)>| {
                items
                    .into_iter()
                    .enumerate()
                    .map(|(i, (d, c, y, f))| Publication {
                        id: format!("{name}-{i}"),
                        unit: name.clone(),
                        doctype: DocType::from_index(d),
                        year: y,
                        field: f.map(|f| format!("F{f}")),
                        citations: c,
                    })
                    .collect::<Vec<_>>()
            };
            let units = units
                .into_iter()
                .enumerate()
                .map(|(u, items)| PublicationSet::unit(format!("U{u}"), build(format!("U{u}"), items)).unwrap())
                .collect();
            let reference = PublicationSet::reference("ref", build("ref".into(), reference)).unwrap();
            (units, reference)
        },
    )
}

/// Naive recomputation: for every selected publication scan the whole
/// universe for same-cell publications.
fn naive(unit: &PublicationSet, universe: &[&Publication], mode: KeyMode) -> (u64, u64, Option<f64>, usize) {
    let same_cell = |a: &Publication, b: &Publication| match mode {
        KeyMode::DoctypeOnly => a.doctype == b.doctype,
        KeyMode::DoctypeYearField => {
            a.doctype == b.doctype && a.year.is_some() && a.field.is_some() && a.year == b.year && a.field == b.field
        }
    };
    let (mut p, mut c, mut sum, mut scored, mut excluded) = (0, 0, 0.0, 0usize, 0);
    for x in unit.iter() {
        if !(x.doctype == DocType::Article || x.doctype == DocType::Review) {
            continue;
        }
        p += 1;
        c += x.citations;
        let peers: Vec<&&Publication> = universe.iter().filter(|u| same_cell(u, x)).collect();
        if peers.is_empty() {
            excluded += 1;
            continue;
        }
        let mut total = 0u64;
        for q in &peers {
            total += q.citations;
        }
        let expected = total as f64 / peers.len() as f64;
        if expected > 0.0 {
            sum += x.citations as f64 / expected;
            scored += 1;
        } else if x.citations == 0 {
            scored += 1;
        } else {
            excluded += 1;
        }
    }
    (p, c, (scored > 0).then(|| sum / scored as f64), excluded)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn indicators_match_naive_loops((units, reference) in sets(), by_field in any::<bool>()) {
        let mode = if by_field { KeyMode::DoctypeYearField } else { KeyMode::DoctypeOnly };
        let mut all: Vec<&PublicationSet> = units.iter().collect();
        all.push(&reference);
        let universe: Vec<&Publication> = all.iter().flat_map(|s| s.iter()).collect();
        let cells = build_normalization(&all, mode);
        let fast = observed_indicators(&units, Some(&reference), mode, Universe::Pooled).unwrap();
        for (u, f) in units.iter().zip(&fast) {
            let r = indicators_for(u, &cells);
            let (p, c, m, excluded) = naive(u, &universe, mode);
            prop_assert_eq!((r.p, r.c, r.excluded_count), (p, c, excluded));
            prop_assert_eq!(r.mncs.map(f64::to_bits), m.map(f64::to_bits));
            prop_assert_eq!(&r, f);
        }
    }

    #[test]
    fn pooled_universe_mncs_is_one(
        (units, reference) in sets().prop_filter("positive cell totals", |(u, r)| {
            u.iter().chain([r]).flat_map(|s| s.iter()).any(|p| p.citations > 0)
        })
    ) {
        let mut all: Vec<&PublicationSet> = units.iter().collect();
        all.push(&reference);
        let cells = build_normalization(&all, KeyMode::DoctypeOnly);
        let mut sum = 0.0;
        let mut n = 0usize;
        for p in all.iter().flat_map(|s| s.iter()) {
            if cells.for_publication(p).unwrap().expected_citations > 0.0 {
                sum += ncs(p, &cells).value().unwrap();
                n += 1;
            }
        }
        if n > 0 {
            prop_assert!((sum / n as f64 - 1.0).abs() < 1e-12, "{}", sum / n as f64);
        }
    }

    #[test]
    fn cell_scaling_leaves_ncs_unchanged((units, reference) in sets(), k in 2u64..10, which in 0usize..4) {
        let target = DocType::from_index(which);
        let scale = |s: &PublicationSet| {
            let members = s
                .iter()
                .map(|p| Publication { citations: if p.doctype == target { p.citations * k } else { p.citations }, ..p.clone() })
                .collect();
            PublicationSet::new(s.name.clone(), s.role, members).unwrap()
        };
        let scaled_units: Vec<_> = units.iter().map(scale).collect();
        let scaled_ref = scale(&reference);
        let mut a: Vec<&PublicationSet> = units.iter().collect();
        a.push(&reference);
        let mut b: Vec<&PublicationSet> = scaled_units.iter().collect();
        b.push(&scaled_ref);
        let (ca, cb) = (build_normalization(&a, KeyMode::DoctypeOnly), build_normalization(&b, KeyMode::DoctypeOnly));
        for (x, y) in a.iter().flat_map(|s| s.iter()).zip(b.iter().flat_map(|s| s.iter())) {
            if x.doctype == target {
                let (nx, ny) = (ncs(x, &ca).value(), ncs(y, &cb).value());
                match (nx, ny) {
                    (Some(u), Some(v)) => prop_assert!((u - v).abs() <= 1e-12 * u.max(1.0)),
                    _ => prop_assert_eq!(nx, ny),
                }
            }
        }
    }

    #[test]
    fn p_and_c_ignore_non_selected_citations((units, reference) in sets(), bump in 1u64..100) {
        let cells = build_normalization(&[&reference], KeyMode::DoctypeOnly);
        for u in &units {
            let changed: Vec<Publication> = u
                .iter()
                .map(|p| Publication { citations: if p.doctype.is_core() { p.citations } else { p.citations + bump }, ..p.clone() })
                .collect();
            let changed = PublicationSet::unit(u.name.clone(), changed).unwrap();
            let (a, b) = (indicators_for(u, &cells), indicators_for(&changed, &cells));
            prop_assert_eq!((a.p, a.c), (b.p, b.c));
        }
    }
}

#[test]
fn unclassified_records_are_counted_as_exclusions() {
    // 3818 publications of one unit, 79 without a field
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "id,unit,doctype,year,field,citations").unwrap();
    for i in 0..3818 {
        let doctype = if i % 5 == 0 { "review" } else { "article" };
        let field = if i < 79 { String::new() } else { format!("F{}", i % 7) };
        writeln!(file, "p{i},chem,{doctype},2010,{field},{}", i % 13).unwrap();
    }
    file.flush().unwrap();
    let sets = load_publications(file.path()).unwrap();
    assert_eq!(sets.len(), 1);
    assert_eq!(sets[0].unclassified_count(), 79);
    let fast = observed_indicators(&sets, None, KeyMode::DoctypeYearField, Universe::Pooled).unwrap();
    assert_eq!(fast[0].p, 3818);
    assert_eq!(fast[0].excluded_count, 79);
    let ids: HashSet<&str> = sets[0].iter().map(|p| p.id.as_str()).collect();
    assert_eq!(ids.len(), 3818);
}
