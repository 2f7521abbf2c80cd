#![cfg(feature = "cli")]

use std::process::Command;

use proptest::prelude::*;

fn gkl(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gkl")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn verify_writes_reproducible_json() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |out: &str| {
        vec![
            "verify", "--k", "1", "--N", "2", "--r", "0,1,2", "--checks", "weight,vanish,bianchi", "--points", "20",
            "--seed", "42", "--out",
        ]
        .into_iter()
        .map(String::from)
        .chain([out.to_string()])
        .collect::<Vec<_>>()
    };
    for path in [&a, &b] {
        let argv = args(path.to_str().unwrap());
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        assert_eq!(gkl(&argv).0, 0);
    }
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(v["config"]["N"], 2);
}

#[test]
fn exit_codes() {
    assert_eq!(gkl(&["verify", "--k", "1", "--N", "2", "--checks", "bogus"]).0, 2);
    assert_eq!(gkl(&["verify", "--k", "1", "--N"]).0, 2);
    assert_eq!(gkl(&["verify", "--k", "6", "--N", "12", "--checks", "weight"]).0, 2);
    assert_eq!(gkl(&["verify", "--k", "1", "--N", "2", "--checks", ""]).0, 0);
    let (code, out) = gkl(&["verify", "--k", "1", "--N", "2", "--checks", "weight", "--tol", "0", "--points", "3"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("FAIL"));
}

#[test]
fn negative_r_list_parses() {
    let (code, out) = gkl(&["verify", "--k", "1", "--N", "2", "--r", "-2,-1", "--checks", "vanish", "--points", "5"]);
    assert_eq!(code, 0);
    assert!(out.contains("vanish-d") && out.contains("vanish-e"));
}

#[test]
fn bergman_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let sections = dir.path().join("sections.json");
    std::fs::write(
        &sections,
        r#"[{"kind":"monomial","exponents":[]},{"kind":"monomial","exponents":[[1,1,1]],"coefficient":[0,2]}]"#,
    )
    .unwrap();
    let (code, out) = gkl(&[
        "bergman", "--k", "1", "--N", "2", "--r", "1", "--sections", sections.to_str().unwrap(), "--scheme", "gauss",
        "--nodes", "200", "--zeta", "0.3+0.1i",
    ]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.matches("PASS").count(), 2);
    let (code, _) = gkl(&[
        "bergman", "--k", "1", "--N", "2", "--r", "1", "--sections", sections.to_str().unwrap(), "--zeta", "0.3+",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn vanish_subcommand() {
    let (code, out) = gkl(&["vanish", "--k", "2", "--N", "4", "--r", "1", "--points", "3", "--seed", "7"]);
    assert_eq!(code, 0);
    assert!(out.contains("b ") && out.contains("c "));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn exit_code_follows_tolerance(exp in -24i32..-8) {
        let tol = format!("1e{exp}");
        let (code, out) = gkl(&["verify", "--k", "1", "--N", "2", "--r", "1", "--checks", "dbar-k,nabla-u", "--points", "3", "--tol", &tol]);
        let any_fail = out.lines().any(|l| l.starts_with("FAIL"));
        prop_assert_eq!(code, if any_fail { 1 } else { 0 });
    }
}
