use gencontact::gallery::{fixture, mismatches, ENTRIES};
use gencontact::suite::{run_checks, RunOptions};
use gencontact_cli::{load_config, parse_config, read_structure, write_structure, CliError, StructureJson};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gencontact"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn verify(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let cfg = write(dir, "config.json", config);
    bin().arg("verify").arg(&cfg).args(extra).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn heisenberg_classical_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = verify(dir.path(), r#"{"gallery":"heisenberg_sasakian","checks":["acms","normality","sasakian"]}"#, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rep: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep["pass"], true);
    assert_eq!(rep["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn kahler_pair_is_not_sasakian() {
    let dir = tempfile::tempdir().unwrap();
    let o = verify(dir.path(), r#"{"gallery":"kahler_interval","checks":["sasakian_pair"]}"#, &[]);
    assert_eq!(code(&o), 1);
    let o = verify(dir.path(), r#"{"gallery":"kahler_interval","checks":["gacm","generalized_sasakian"]}"#, &["--samples", "40"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = verify(dir.path(), "{\"gallery\": \"darboux\",\n  \"checks\": [gacs]}", &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 2, column"), "{}", stderr(&o));
    let o = verify(dir.path(), r#"{"gallery":"darboux","checks":["gacs"],"colour":1}"#, &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("colour"));
    let o = verify(dir.path(), r#"{"gallery":"darboux","checks":["gacz"]}"#, &[]);
    assert_eq!(code(&o), 2);
    let o = verify(dir.path(), r#"{"gallery":"darboux","checks":["acms"]}"#, &[]);
    assert_eq!(code(&o), 2, "missing structure for a check is a usage error");
    let o = bin().args(["verify", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(code(&o), 2);
    let o = bin().args(["gallery", "run", "nope"]).output().unwrap();
    assert_eq!(code(&o), 2);
    let o = bin().arg("frobnicate").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn expression_errors_name_the_identifier() {
    let text = r#"{"structure":{"chart":{"domain":[[-1,1],[-1,1],[-1,1]]},
        "phi":{"builder":"from_contact","eta":["-y","0","sin(2*w)"]}},"checks":["gacs"]}"#;
    let err = load_config(text).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("phi.eta[2]") && msg.contains("'w'") && msg.contains("offset 6"), "{msg}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn config_validation() {
    assert!(parse_config(r#"{"gallery":"kahler_interval","checks":["gacm","generalized_sasakian"]}"#).is_ok());
    let cases = [
        r#"{"checks":["gacs"]}"#,
        r#"{"gallery":"darboux","structure":{"chart":{"domain":[[0,1]]}},"checks":["gacs"]}"#,
        r#"{"gallery":"darboux","checks":["gacs"],"tol":-1}"#,
        r#"{"gallery":"darboux","checks":["gacs"],"tol":{"gacz":1e-3}}"#,
        r#"{"gallery":"darboux","checks":["gacs"],"samples":0}"#,
        r#"{"structure":{"chart":{"dim":3,"domain":[[0,1],[0,1]]},"phi":{"builder":"from_contact","eta":["0","1"]}},"checks":["gacs"]}"#,
        r#"{"structure":{"chart":{"domain":[[-1,1],[-1,1]]},"phi":{"builder":"from_contact","eta":["0","1"]}},"checks":["gacs"]}"#,
        r#"{"structure":{"chart":{"domain":[[-1,1],[-1,1],[-1,1]]},"phi":{"builder":"from_contact","eta":["0","0","1"]}},"checks":["gacs"]}"#,
        r#"{"structure":{"chart":{"domain":[[-1,1],[-1,1],[-1,1]]},"phi":{"builder":"from_magic"}},"checks":["gacs"]}"#,
        r#"{"structure":{"chart":{"domain":[[-1,1],[-1,1],[-1,1]]},"phi":[["0"]]},"checks":["gacs"]}"#,
    ];
    for c in cases {
        let e = load_config(c).unwrap_err();
        assert!(matches!(e, CliError::Invalid { .. } | CliError::Json { .. }), "{c}: {e}");
    }
    // gallery configs without checks use the entry's table
    let job = load_config(r#"{"gallery":"darboux"}"#).unwrap();
    assert!(job.checks.contains(&"thm48".to_string()));
    let job = load_config(r#"{"gallery":"darboux","checks":["gacs"],"tol":{"gacs":1e-4}}"#).unwrap();
    assert_eq!(job.options.tolerance("gacs"), 1e-4);
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"gallery":"darboux","checks":["gacs","thm48","cone_crosscheck"],"samples":30}"#);
    let run = |out: &str, threads: Option<&str>| {
        let p = dir.path().join(out);
        let mut cmd = bin();
        cmd.arg("verify").arg(&cfg).args(["--seed", "5", "--out"]).arg(&p);
        if let Some(t) = threads {
            cmd.env("GENCONTACT_THREADS", t);
        }
        let o = cmd.output().unwrap();
        assert_eq!(code(&o), 1, "thm48 fails on Darboux");
        std::fs::read(p).unwrap()
    };
    let a = run("out_a.json", None);
    let b = run("out_b.json", None);
    let c = run("out_c.json", Some("1"));
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert!(!String::from_utf8_lossy(&a).contains("wall_time_ms"));
    let o = bin().arg("verify").arg(&cfg).arg("--timings").output().unwrap();
    assert!(String::from_utf8_lossy(&o.stdout).contains("wall_time_ms"));
    let o = bin().arg("gallery").arg("list").env("GENCONTACT_THREADS", "many").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn gallery_commands() {
    let o = bin().args(["gallery", "list"]).output().unwrap();
    let listing = String::from_utf8_lossy(&o.stdout);
    for e in ENTRIES {
        assert!(listing.contains(e.name));
    }
    let o = bin().args(["gallery", "run", "darboux_k_plus", "--samples", "20", "--cone-samples", "8"]).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = bin().args(["gallery", "export", "darboux"]).output().unwrap();
    let s: StructureJson = serde_json::from_slice(&o.stdout).unwrap();
    assert!(s.phi.is_some() && s.eplus.is_some());
}

#[test]
fn gallery_structures_survive_a_json_round_trip() {
    let opts = RunOptions { samples: 20, cone_samples: 8, ..RunOptions::default() };
    for e in ENTRIES {
        let fx = fixture(e.name).unwrap();
        let text = serde_json::to_string(&write_structure(&fx).unwrap()).unwrap();
        let back = read_structure(&serde_json::from_str(&text).unwrap()).unwrap();
        let checks: Vec<String> = e.expected.iter().map(|(c, _)| c.to_string()).collect();
        let rep = run_checks(e.name, &back, &checks, &opts).unwrap();
        assert!(mismatches(e, &rep).is_empty(), "{}: {:?}", e.name, mismatches(e, &rep));
    }
}

#[test]
fn deform_writes_a_structure_that_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "d.json",
        r#"{"gallery":"darboux","pipeline":[{"k_minus":["0","0","1"]},{"b_field":[["0","z","0"],["-z","0","0"],["0","0","0"]]},{"k_plus":["x","0","0.5"]}]}"#,
    );
    let out = dir.path().join("s.json");
    let o = bin().arg("deform").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert!(s.get("f").is_some());
    let config = serde_json::json!({"structure": s, "checks": ["fgacs", "f_cone_algebra"], "samples": 30, "cone_samples": 10});
    let o = verify(dir.path(), &config.to_string(), &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    // normalize ends with an f = 0 structure
    let cfg = write(dir.path(), "n.json", r#"{"gallery":"darboux","pipeline":[{"k_minus":["0","0","1"]},"normalize"],"checks":["gacs","phi_kernel"]}"#);
    let o = bin().arg("verify").arg(&cfg).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cfg = write(dir.path(), "e.json", r#"{"gallery":"darboux","checks":["gacs"]}"#);
    assert_eq!(code(&bin().arg("deform").arg(&cfg).output().unwrap()), 2);
}
