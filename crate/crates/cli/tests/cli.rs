use std::path::Path;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("zsfell").chain(args.iter().copied());
    let code = zsfell_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn save(dir: &Path, name: &str, args: &[&str]) -> String {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    let p = dir.join(name);
    std::fs::write(&p, out).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn exported_pair_validates() {
    let dir = tempfile::tempdir().unwrap();
    let p = save(dir.path(), "pair.json", &["corpus", "s3_factorized"]);
    let (code, out, _) = run(&["validate", &p]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("ZS13"));
    let (code, out, _) = run(&["zs-groupoid", &p, "--format", "machine"]);
    assert_eq!(code, 0);
    assert!(out.contains("zs_arrows=6"));
}

#[test]
fn blend_reports_rank_and_dimension() {
    let (code, out, _) = run(&["blend", "corpus:line_canonical:z2z2_trivial", "--format", "machine"]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "rank=4"));
    assert!(out.lines().any(|l| l == "dim=4"));
}

#[test]
fn every_builtin_prints_and_reparses() {
    let dir = tempfile::tempdir().unwrap();
    for name in zsfell::corpus::BUILTIN_NAMES {
        let p = save(dir.path(), "entry.json", &["corpus", name]);
        let (code, out, err) = run(&["validate", &p]);
        assert_eq!(code, 0, "{name}: {out}{err}");
    }
}

#[test]
fn malformed_input_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"kind\": \"groupoid\",\n  \"units\": [").unwrap();
    let (code, _, err) = run(&["validate", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line"), "{err}");
    let (code, _, _) = run(&["no-such-command"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["validate", "corpus:no_such_entry"]);
    assert_eq!(code, 1);
}

#[test]
fn failing_checks_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = save(dir.path(), "pair.json", &["corpus", "z2z2_trivial"]);
    // redirect one non-identity h·a1 to the identity of G
    let text = std::fs::read_to_string(&p).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let table = doc["table"].as_array_mut().unwrap();
    let row = table.iter_mut().find(|r| r[0] != r[1] && r[1] == "a1").unwrap();
    row[2] = serde_json::Value::String("a0".into());
    std::fs::write(&p, serde_json::to_string(&doc).unwrap()).unwrap();
    let (code, out, err) = run(&["validate", &p]);
    assert_eq!(code, 1, "{out}{err}");
}

#[test]
fn disintegrate_round_trips_and_exports() {
    let dir = tempfile::tempdir().unwrap();
    let rep = save(dir.path(), "rep.json", &["corpus", "random_strict_rep", "--seed", "6"]);
    let cov = dir.path().join("cov.json");
    let (code, out, _) = run(&["disintegrate", &rep, "--export", cov.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("ROUNDTRIP"));
    let (code, out, _) = run(&["validate", cov.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn non_uniform_measure_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    // seed 6 is the pair groupoid with a flip
    let rep = save(dir.path(), "rep.json", &["corpus", "random_strict_rep", "--seed", "6"]);
    let mu = dir.path().join("mu.json");
    std::fs::write(&mu, r#"{"kind": "measure", "weights": {"0": "1.0", "1": "4.5"}}"#).unwrap();
    let (code, out, err) = run(&["disintegrate", &rep, "--mu", mu.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}{err}");
}

#[test]
fn integrate_uses_exported_representation() {
    let dir = tempfile::tempdir().unwrap();
    let rep = save(dir.path(), "rep.json", &["corpus", "random_strict_rep", "--seed", "2"]);
    let cov = dir.path().join("cov.json");
    assert_eq!(run(&["disintegrate", &rep, "--export", cov.to_str().unwrap()]).0, 0);
    // random sections live over the line product of s3_factorized, as does seed 2
    let sec = save(dir.path(), "sec.json", &["corpus", "random_section", "--seed", "1"]);
    let (code, out, err) = run(&["integrate", cov.to_str().unwrap(), &sec]);
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.contains("L.MUL") && out.contains("L.INORM"));
}

#[test]
fn norms_amplify_and_inject() {
    let dir = tempfile::tempdir().unwrap();
    let sec = save(dir.path(), "sec.json", &["corpus", "random_section", "--seed", "4"]);
    let (code, out, _) = run(&["norms", &sec]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("cstar_norm"));
    assert_eq!(run(&["amplify", "corpus:semidirect_matrix"]).0, 0);
    let (code, out, _) = run(&["inject", "corpus:line_canonical:z2z2_trivial", "--samples", "5"]);
    assert_eq!(code, 0, "{out}");
    // amplification is only defined for groups
    assert_eq!(run(&["amplify", "corpus:line_canonical:h_units"]).0, 1);
}

#[test]
fn random_entries_depend_on_seed_only() {
    let a = run(&["corpus", "random_unitary_family", "--seed", "7"]).1;
    let b = run(&["corpus", "random_unitary_family", "--seed", "7"]).1;
    let c = run(&["corpus", "random_unitary_family", "--seed", "8"]).1;
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn machine_reports_are_stable_and_out_writes_a_file() {
    let args = ["zs-bundle", "corpus:semidirect_matrix", "--format", "machine", "--seed", "3"];
    let (c1, o1, _) = run(&args);
    let (c2, o2, _) = run(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(o1, o2);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.txt");
    let mut with_out = args.to_vec();
    with_out.extend(["--out", out.to_str().unwrap()]);
    let (code, stdout, _) = run(&with_out);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    assert_eq!(std::fs::read_to_string(out).unwrap(), o1);
}

#[test]
fn oracle_command_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let fam = save(dir.path(), "fam.json", &["corpus", "random_unitary_family", "--seed", "2"]);
    let (code, out, _) = run(&["oracle", &fam]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = run(&["oracle", "corpus:line_canonical:s3_factorized", "--format", "machine"]);
    assert_eq!(code, 0);
    assert!(out.contains("oracle_blend_rank_ij=6"));
}
