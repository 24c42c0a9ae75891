use nambu::cli::run_args;

fn run(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_args(std::iter::once("nambu").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn status(out: &str) -> &str {
    out.lines().last().unwrap_or("")
}

#[test]
fn solve_worked_example() {
    let (code, out, _) = run(&["solve", "--algebra", "A_4_8"]);
    assert_eq!(code, 0);
    assert!(out.contains("f = q4*x4"), "{out}");
    assert!(out.contains("forced to 0: q1, q2, q3"), "{out}");
    assert!(status(&out).starts_with("status=ok"));
}

#[test]
fn solve_abelian_has_four_directions() {
    let (code, out, _) = run(&["solve", "--algebra", "4A_1"]);
    assert_eq!(code, 0);
    assert!(status(&out).contains("particular=4"), "{out}");
}

#[test]
fn parameters_must_be_exact() {
    let (code, out, err) = run(&["solve", "--algebra", "A_a_4_2", "--param", "a=0.5"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
    assert!(status(&out).starts_with("status=error kind=usage"), "{out}");
}

#[test]
fn missing_parameter_is_a_usage_error() {
    let (code, out, err) = run(&["solve", "--algebra", "A_a_4_2"]);
    assert_eq!(code, 2);
    assert!(err.contains("--param"), "{err}");
    assert!(status(&out).starts_with("status=error"));
}

#[test]
fn unknown_algebra() {
    let (code, out, _) = run(&["solve", "--algebra", "A_9_9"]);
    assert_eq!(code, 2);
    assert!(status(&out).contains("kind=unknown-algebra") || status(&out).starts_with("status=error"), "{out}");
}

#[test]
fn verify_single_algebra() {
    let (code, out, _) = run(&["verify", "--table", "II", "--algebra", "A_4_8"]);
    assert_eq!(code, 0, "{out}");
    assert!(status(&out).contains("unexplained_failures=0"));
}

#[test]
fn verify_is_deterministic() {
    let args = ["--format", "json", "verify", "--table", "I", "--param-sweep", "none"];
    assert_eq!(run(&args).1, run(&args).1);
}

#[test]
fn bracket_of_coordinates() {
    let (code, out, _) = run(&["bracket", "--algebra", "A_4_8", "x1", "x2", "x3", "x4"]);
    assert_eq!(code, 0, "{out}");
    assert!(status(&out).starts_with("status=ok"));
}

#[test]
fn dynamics_check() {
    let (code, out, _) = run(&["dynamics", "check"]);
    assert_eq!(code, 0, "{out}");
    let s = status(&out);
    assert!(s.contains("closure=6/6") && s.contains("casimir=-2"), "{s}");
}

#[test]
fn evolve_writes_csv_and_rejects_bad_steps() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flow.csv");
    let p = path.to_str().unwrap();
    let (code, out, _) = run(&["--output", p, "dynamics", "evolve", "--t-end", "1", "--dt", "0.01"]);
    assert_eq!(code, 0, "{out}");
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().count(), 102);
    let (code, _, _) = run(&["dynamics", "evolve", "--dt", "0"]);
    assert_eq!(code, 2);
}

#[test]
fn derive_frame_matches_stored() {
    let (code, out, _) = run(&["derive-frame", "--algebra", "A_4_8"]);
    assert_eq!(code, 0);
    assert!(out.contains("verify_frame: pass") && out.contains("equals stored frame: yes"), "{out}");
}

#[test]
fn missing_registry_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("none.toml");
    let (code, out, err) = run(&["--registry", p.to_str().unwrap(), "list"]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
    assert!(status(&out).starts_with("status=error"));
}

#[test]
fn list_shows_brackets() {
    let (code, out, _) = run(&["list", "--algebra", "A_4_8"]);
    assert_eq!(code, 0);
    assert!(out.contains("[T2,T3]=T1"), "{out}");
}
