use std::process::Command;

fn ceres(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ceres")).args(args).env_remove("CERES_BUDGET").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn clauseset_tptp_lines() {
    let (code, out, _) = ceres(&["clauseset", "--n", "2", "--fmt", "tptp"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.starts_with("cnf(")).count(), 7);
}

#[test]
fn negative_n_is_a_usage_error() {
    assert_eq!(ceres(&["clauseset", "--n", "-1"]).0, 2);
}

#[test]
fn extract_reports_diffs() {
    let (code, out, _) = ceres(&["extract", "--n", "1"]);
    assert_eq!(code, 0);
    assert!(out.ends_with("diff: empty\n"));
    // C2 and C3 are not reachable from the base case of the proof schema
    let (code, out, _) = ceres(&["extract", "--n", "0"]);
    assert_eq!(code, 3);
    assert_eq!(out.lines().filter(|l| l.starts_with("- ")).count(), 2);
}

#[test]
fn corrupted_fixture_is_a_load_error() {
    let dir = std::env::temp_dir().join(format!("ceres-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{\"schema\": ").unwrap();
    let (code, _, err) = ceres(&["extract", "--n", "1", "--fixture", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("fixture"));
}

#[test]
fn refute_exit_codes() {
    assert_eq!(ceres(&["refute", "--n", "2", "--mode", "schema"]).0, 0);
    assert_eq!(ceres(&["refute", "--n", "2", "--mode", "math"]).0, 0);
    assert_eq!(ceres(&["refute", "--n", "2", "--mode", "saturate", "--depth", "1"]).0, 3);
}

#[test]
fn budget_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_ceres"))
        .args(["refute", "--n", "2"])
        .env("CERES_BUDGET", "50")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget of 50"));
}

#[test]
fn refute_writes_a_parsable_tree() {
    let dir = std::env::temp_dir().join(format!("ceres-tree-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("n1.txt");
    let (code, _, _) = ceres(&["refute", "--n", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let tree = ceres_core::resolution::parse_tree(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(ceres_core::resolution::check_tree(&tree, &ceres_core::clause_sets::nia_clause_set(1)).passes());
}

#[test]
fn herbrand_verdicts() {
    assert_eq!(ceres(&["herbrand", "--n", "0"]).0, 0);
    assert_eq!(ceres(&["herbrand", "--n", "4"]).0, 0);
    let (code, out, _) = ceres(&["herbrand", "--no-order-axioms", "--n", "0"]);
    assert_eq!(code, 3);
    assert!(out.contains("countermodel"));
}

#[test]
fn identical_invocations_give_identical_bytes() {
    for args in [
        &["clauseset", "--n-range", "0..3", "--fmt", "json"][..],
        &["refute", "--n-range", "0..2", "--mode", "saturate", "--fmt", "json"][..],
        &["herbrand", "--n", "2", "--fmt", "dimacs", "--out", "/dev/stdout"][..],
    ] {
        assert_eq!(ceres(args), ceres(args), "{:?}", args);
    }
}
