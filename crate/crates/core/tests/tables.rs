use nambu::invfields::{all_orderings, derive_frame, frames_equal, DeriveOptions, Frame};
use nambu::liealg::registry::Registry;
use nambu::tables::errata::cases_disjoint;
use nambu::tables::{
    algebra_bindings, check_all_errata, default_values, emit_report, entries, parse_report, run_all, ReportFormat,
    RunOptions, Status, TableId,
};

#[test]
fn registry_covers_both_tables() {
    let reg = Registry::bundled();
    let all = entries(&reg);
    assert_eq!(all.iter().filter(|e| e.table == TableId::I).count(), 30);
    assert_eq!(all.iter().filter(|e| e.table == TableId::II).count(), 87);
    assert!(reg.rejected.is_empty());
}

#[test]
fn default_sweep_has_no_unexplained_failures() {
    let report = run_all(&Registry::bundled(), &RunOptions::default());
    let failing: Vec<String> = report
        .entries
        .iter()
        .filter(|e| e.failures() > 0)
        .map(|e| e.id.clone())
        .collect();
    assert!(failing.is_empty(), "{failing:?}");
    assert_eq!(report.unexplained_failures(), 0);
}

#[test]
fn every_erratum_is_sound() {
    let verdicts = check_all_errata(&Registry::bundled(), 2024);
    assert!(!verdicts.is_empty());
    for v in verdicts {
        assert!(v.sound(), "{}: {}", v.id, v.detail);
    }
}

#[test]
fn case_branches_are_disjoint() {
    for a in Registry::bundled().algebras() {
        let rec = a.with_errata(&[]).unwrap();
        cases_disjoint(&rec, &default_values()).unwrap_or_else(|e| panic!("{}: {e}", a.name));
    }
}

#[test]
fn stored_frames_match_a_derived_frame() {
    let reg = Registry::bundled();
    for a in reg.algebras() {
        let rec = a.with_errata(&[]).unwrap();
        let (envs, _) = algebra_bindings(&rec, &default_values()).unwrap();
        let env = &envs[0];
        let sc = rec.spec().unwrap().constants_at(env).unwrap();
        let stored = Frame::parse(&rec.frame, env).unwrap();
        let found = all_orderings(sc.dim).into_iter().any(|o| {
            let opts = DeriveOptions {
                ordering: Some(o),
                allow_denominators: true,
            };
            derive_frame(&sc, &opts).is_ok_and(|f| frames_equal(&f, &stored))
        });
        assert!(found, "{} at {env}: no ordering reproduces the stored frame", a.name);
    }
}

#[test]
fn report_is_deterministic() {
    let reg = Registry::bundled();
    let opts = RunOptions {
        tables: Some(vec![TableId::II]),
        ..RunOptions::default()
    };
    let a = run_all(&reg, &opts);
    let b = run_all(&reg, &opts);
    assert_eq!(a, b);
    let json = emit_report(&a, ReportFormat::Json);
    assert_eq!(parse_report(&json).unwrap(), a);
}

#[test]
fn worked_example_rows_pass() {
    let opts = RunOptions {
        only: Some(vec!["A4_8".into()]),
        ..RunOptions::default()
    };
    let report = run_all(&Registry::bundled(), &opts);
    assert_eq!(report.entries.len(), 4);
    for e in &report.entries {
        for b in &e.bindings {
            assert_eq!(b.membership.status, Status::Pass, "{} {}", e.id, b.binding);
        }
    }
}

#[test]
fn parameterized_rows_can_be_skipped() {
    let opts = RunOptions {
        skip_parameterized: true,
        ..RunOptions::default()
    };
    let report = run_all(&Registry::bundled(), &opts);
    assert!(!report.skipped.is_empty());
    assert_eq!(report.entries.len() + report.skipped.len(), 117);
}

#[test]
fn empty_registry_gives_empty_report() {
    let report = run_all(&Registry::default(), &RunOptions::default());
    assert!(report.entries.is_empty());
}

#[test]
fn golden_summary() {
    let report = run_all(&Registry::bundled(), &RunOptions::default());
    let text = emit_report(&report, ReportFormat::Text);
    let summary: String = text
        .lines()
        .filter(|l| l.starts_with("Table") || l.starts_with("unexplained"))
        .map(|l| format!("{l}\n"))
        .collect();
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/summary.txt");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &summary).unwrap();
    }
    let expected = std::fs::read_to_string(&path).expect("golden file; run with UPDATE_GOLDEN=1 to create it");
    assert_eq!(summary, expected);
}
