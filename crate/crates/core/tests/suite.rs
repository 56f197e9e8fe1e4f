use gencontact::gallery::{fixture, run_entry, ENTRIES};
use gencontact::suite::{collect_flags, default_tolerance, run_check, run_checks, RunOptions, SuiteError, CHECKS};

fn opts(seed: u64) -> RunOptions {
    RunOptions { seed, samples: 15, cone_samples: 8, ..RunOptions::default() }
}

#[test]
fn reports_are_byte_identical_for_one_seed() {
    for e in ENTRIES {
        let a = serde_json::to_string(&run_entry(e, &opts(3)).unwrap()).unwrap();
        let b = serde_json::to_string(&run_entry(e, &opts(3)).unwrap()).unwrap();
        assert_eq!(a, b, "{}", e.name);
        assert!(!a.contains("wall_time"));
    }
}

#[test]
fn seeds_move_the_sample() {
    let fx = fixture("heisenberg_sasakian").unwrap();
    let a = run_check(&fx, "acms", &opts(1)).unwrap();
    let b = run_check(&fx, "acms", &opts(2)).unwrap();
    assert_ne!(a.entries[0].argmax_point, b.entries[0].argmax_point);
}

#[test]
fn timings_are_opt_in() {
    let fx = fixture("darboux").unwrap();
    let o = RunOptions { timings: true, ..opts(0) };
    let rep = run_checks("darboux", &fx, &["gacs".to_string()], &o).unwrap();
    assert!(rep.checks[0].wall_time_ms.is_some());
    assert!(serde_json::to_string(&rep).unwrap().contains("wall_time_ms"));
}

#[test]
fn unknown_and_missing_checks() {
    let fx = fixture("darboux").unwrap();
    assert!(matches!(run_check(&fx, "bogus", &opts(0)), Err(SuiteError::UnknownCheck(_))));
    for check in ["acms", "sasakian_pair", "gacm", "fgacs", "f_sasakian", "thm510"] {
        assert!(matches!(run_check(&fx, check, &opts(0)), Err(SuiteError::Missing { .. })), "{check}");
    }
    let empty = gencontact::suite::Fixture::default();
    assert!(matches!(run_check(&empty, "gacs", &opts(0)), Err(SuiteError::Missing { .. })));
}

#[test]
fn tolerance_override_applies_everywhere() {
    let fx = fixture("heisenberg_sasakian").unwrap();
    let o = RunOptions { tol: Some(1e-30), ..opts(0) };
    let rep = run_check(&fx, "acms", &o).unwrap();
    assert!(rep.entries.iter().all(|e| e.tolerance == 1e-30));
    assert_eq!(default_tolerance("thm48"), 1e-7);
    assert_eq!(default_tolerance("gacs"), 1e-9);
}

#[test]
fn every_check_is_known() {
    let fx = fixture("heisenberg_sasakian").unwrap();
    for c in CHECKS {
        if let Err(e) = run_check(&fx, c, &opts(0)) {
            assert!(matches!(e, SuiteError::Missing { .. }), "{c}: {e}");
        }
    }
}

#[test]
fn flags_are_keyed_by_check() {
    let fx = fixture("darboux").unwrap();
    let rep = run_checks("darboux", &fx, &["involutivity".to_string(), "thm48".to_string()], &opts(0)).unwrap();
    let flags = collect_flags(&rep);
    assert_eq!(flags["involutivity.class"], "contact(-)");
    assert_eq!(flags["thm48.integrable"], "fail");
}

#[test]
fn per_check_tolerance_wins() {
    let mut o = RunOptions { tol: Some(1e-3), ..opts(0) };
    o.overrides.insert("acms".into(), 1e-12);
    assert_eq!(o.tolerance("acms"), 1e-12);
    assert_eq!(o.tolerance("gacs"), 1e-3);
    assert_eq!(RunOptions::default().tolerance("thm48"), default_tolerance("thm48"));
}
