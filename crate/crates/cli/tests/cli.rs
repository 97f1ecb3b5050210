//! End-to-end tests of the binary: exit codes, report determinism, and the
//! documented input formats.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn hcell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcell"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn profile_of_nested_copies_prints_partition_counts() {
    let out = hcell(&["profile", "--expr", &fixture("e2.sexp"), "--n", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // os column: 1, 2, 3, 5.
    for row in [
        "1        1        1",
        "3        2        2",
        "12        5        3",
    ] {
        assert!(text.contains(row), "missing row in:\n{text}");
    }
}

#[test]
fn rank_of_three_level_expression_is_three() {
    let out = hcell(&["rank", "--expr", &fixture("en3.sexp")]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "rank_upper: 3\n");
}

#[test]
fn homog_exit_codes_separate_pass_and_counterexample() {
    let pass = hcell(&[
        "homog",
        "--struct",
        &fixture("eq4.json"),
        "--m",
        "2",
        "--n",
        "4",
    ]);
    assert_eq!(pass.status.code(), Some(0));

    let fail = hcell(&[
        "homog",
        "--struct",
        &fixture("t7.json"),
        "--m",
        "2",
        "--n",
        "3",
    ]);
    assert_eq!(fail.status.code(), Some(1));
    let text = String::from_utf8(fail.stdout).unwrap();
    assert!(text.contains("counterexample at n = 3"), "{text}");
}

#[test]
fn parse_errors_exit_two_with_json_error_object() {
    let dir = std::env::temp_dir().join("hcell-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.sexp");
    std::fs::write(&bad, "(wr").unwrap();
    let out = hcell(&["rank", "--expr", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    let value: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert!(value["error"].as_str().unwrap().contains("parse error"));
}

#[test]
fn membership_reports_verdicts_and_exit_codes() {
    // Identity on the 4-point truncation is a member.
    let ok = hcell(&[
        "membership",
        "--expr",
        &fixture("cons_sym2.sexp"),
        "--t",
        "2",
        "--perm",
        "[0,1,2,3]",
    ]);
    assert_eq!(ok.status.code(), Some(0));

    // A one-sided base swap fails the agreement condition.
    let bad = hcell(&[
        "membership",
        "--expr",
        &fixture("cons_sym2.sexp"),
        "--t",
        "2",
        "--perm",
        "[1,0,2,3]",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    let text = String::from_utf8(bad.stdout).unwrap();
    assert!(text.contains("member: false"), "{text}");
}

#[test]
fn lattice_dot_output_renders_a_digraph() {
    let out = hcell(&[
        "lattice",
        "--group",
        &fixture("triv3.json"),
        "--output",
        "dot",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("digraph lattice {"));
    assert!(text.contains("->"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = [
        "truncate",
        "--expr",
        &fixture("e2.sexp"),
        "--t",
        "3",
        "--output",
        "json",
    ];
    let a = hcell(&args);
    let b = hcell(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let args = [
        "lattice",
        "--group",
        &fixture("w22.json"),
        "--output",
        "json",
    ];
    let a = hcell(&args);
    let b = hcell(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn structure_json_roundtrips_through_the_cli() {
    let text = std::fs::read_to_string(fixture("eq4.json")).unwrap();
    let parsed: hcell_core::structures::RelStruct = serde_json::from_str(&text).unwrap();
    let reprinted = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
    assert_eq!(text, reprinted);
}

#[test]
fn verify_filter_runs_a_subset() {
    let out = hcell(&["verify", "--filter", "reducts."]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("reducts.lattice_members_closed"));
    assert!(!text.contains("permcore."));
}

#[test]
fn omega_partition_check_and_find_agree_on_canonical_candidates() {
    let check = hcell(&[
        "omega-partition",
        "--expr",
        &fixture("pure.sexp"),
        "--t",
        "3",
    ]);
    assert!(check.status.success());
    let find = hcell(&[
        "omega-partition",
        "--expr",
        &fixture("pure.sexp"),
        "--t",
        "3",
        "--find",
    ]);
    assert!(find.status.success());
    let text = String::from_utf8(find.stdout).unwrap();
    assert!(text.contains("passing candidates"));
}

#[test]
fn width_congruences_and_recover_subcommands() {
    let out = hcell(&["width", "--expr", &fixture("pure.sexp"), "--t", "3"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("width: 2"));

    let out = hcell(&["congruences", "--group", &fixture("w22.json")]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("3 congruences"), "{text}");

    let out = hcell(&["recover", "--expr", &fixture("cons_sym2.sexp"), "--t", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("order 2 on 2 points"), "{text}");
}

#[test]
fn delta_m_and_reducts_subcommands() {
    let out = hcell(&["delta-m", "--struct", &fixture("eq4.json"), "--m", "2"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("3 orbit relations"));

    let out = hcell(&["reducts", "--struct", &fixture("eq4.json")]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("reducts: "), "{text}");

    let out = hcell(&["reducts", "--expr", &fixture("pure.sexp"), "--t", "2"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("raw counts per truncation"));
}

#[test]
fn merge_subcommand_agrees_on_shipped_probe() {
    let out = hcell(&[
        "merge",
        "--reduct",
        &fixture("eq4.json"),
        "--full",
        &fixture("marked_eq4.json"),
        "--probe",
        &fixture("probe_2plus2.json"),
        "--marked",
        "q0,q1,q2,q3",
        "--s",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("direct true / merged true / agree true"),
        "{text}"
    );
}

#[test]
fn budget_overruns_exit_two() {
    let out = hcell(&[
        "profile",
        "--group",
        &fixture("w22.json"),
        "--n",
        "8",
        "--tuple-cap",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("budget exceeded"), "{err}");
}

#[test]
fn bounds_and_forb_subcommands_work_together() {
    let out = hcell(&["bounds", "--struct", &fixture("pure5.json"), "--s", "6"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("b = 6"), "{text}");

    // Round-trip: feed the scanned obstructions back through forb.
    let json = hcell(&[
        "bounds",
        "--struct",
        &fixture("pure5.json"),
        "--s",
        "6",
        "--output",
        "json",
    ]);
    let report: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    let dir = std::env::temp_dir().join("hcell-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let forb_path = dir.join("forb.json");
    std::fs::write(
        &forb_path,
        serde_json::to_string(&report["minimal_obstructions"]).unwrap(),
    )
    .unwrap();
    let out = hcell(&[
        "forb",
        "--struct",
        &fixture("pure5.json"),
        "--forbidden",
        forb_path.to_str().unwrap(),
        "--s",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(0));
}
