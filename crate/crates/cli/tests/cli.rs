//! CLI behavior: exit codes, report determinism, flags, and the Moufang
//! JSON file interface.

use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moufang"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

/// The report with its timing field removed, for byte comparison.
fn stable_part(out: &Output) -> String {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    text.lines()
        .filter(|l| !l.trim_start().starts_with("\"timing_ms\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["jp-verify", "zmod:5:1"]).status.code(), Some(0));
    assert_eq!(run(&["roundtrip", "zmod:4:1"]).status.code(), Some(1));
    let bad = run(&["jp-verify", "zmod:6:1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
    assert!(bad.stdout.is_empty());
    assert_eq!(run(&["jp-verify"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command", "x"]).status.code(), Some(2));
}

#[test]
fn reports_are_deterministic() {
    for args in [
        &["jp-verify", "zmod:5:1"][..],
        &["ms-verify", "zmod:4:1"][..],
        &["roundtrip", "zmod:5:1", "--deep"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(stable_part(&a), stable_part(&b), "{args:?}");
    }
}

#[test]
fn ring_info_normalizes_prime_powers() {
    let out = run(&["ring-info", "zmod:4:1"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["extras"]["size"], 4);
    assert_eq!(report["extras"]["p"], 2);
    assert_eq!(report["extras"]["k"], 2);
    assert_eq!(run(&["ring-info", "poly:4:1"]).status.code(), Some(2));
}

#[test]
fn ring_cap_flag() {
    assert_eq!(run(&["ring-info", "zmod:5:6"]).status.code(), Some(2));
    assert_eq!(
        run(&["ring-info", "zmod:5:6", "--ring-cap", "20000"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn jp_radical_lists_elements() {
    let out = run(&["jp-radical", "zmod:5:2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let plus: Vec<String> = report["extras"]["radical_plus"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(plus, ["0", "5", "10", "15", "20"]);
    assert_eq!(report["extras"]["radical_minus"], report["extras"]["radical_plus"]);
}

#[test]
fn moufang_file_flow() {
    let out = run(&["ms-build", "zmod:5:1"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let moufang = &report["extras"]["moufang"];
    assert_eq!(moufang["points"].as_array().unwrap().len(), 6);

    let dir = tempfile::tempdir().unwrap();

    // bare data object
    let bare = dir.path().join("m5.json");
    std::fs::File::create(&bare)
        .unwrap()
        .write_all(serde_json::to_string_pretty(moufang).unwrap().as_bytes())
        .unwrap();
    let verify = run(&["ms-verify", bare.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(0));
    let vr = stdout_json(&verify);
    assert_eq!(vr["extras"]["special"], true);
    assert_eq!(vr["extras"]["abelian"], true);

    // whole ms-build report as the input file
    let wrapped = dir.path().join("report.json");
    std::fs::File::create(&wrapped)
        .unwrap()
        .write_all(&out.stdout)
        .unwrap();
    assert_eq!(
        run(&["ms-verify", wrapped.to_str().unwrap()]).status.code(),
        Some(0)
    );

    // extraction from the file agrees with extraction from the ring spec
    let from_file = run(&["ms-extract", bare.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0));
    let fr = stdout_json(&from_file);
    assert_eq!(fr["extras"]["jordan_extractable"], true);
    assert_eq!(fr["extras"]["vplus_size"], 5);

    // malformed inputs are rejected with location information
    let garbled = dir.path().join("bad.json");
    std::fs::write(&garbled, "{\"points\": 3}").unwrap();
    let bad = run(&["ms-verify", garbled.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));

    // non-bijective tau
    let mut data: serde_json::Value = moufang.clone();
    data["tau"] = serde_json::json!([0, 0, 1, 2, 3, 4]);
    let badtau = dir.path().join("badtau.json");
    std::fs::write(&badtau, serde_json::to_string(&data).unwrap()).unwrap();
    let out = run(&["ms-verify", badtau.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bijection"));

    // two classes only
    let mut data: serde_json::Value = moufang.clone();
    data["classes"] = serde_json::json!([[0, 1, 2, 3, 4], [5]]);
    let twoclass = dir.path().join("twoclass.json");
    std::fs::write(&twoclass, serde_json::to_string(&data).unwrap()).unwrap();
    let out = run(&["ms-verify", twoclass.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("more than 2"));
}

#[test]
fn e_flag() {
    // a different invertible element works, a radical one is rejected
    assert_eq!(
        run(&["ms-build", "zmod:5:2", "--e", "2"]).status.code(),
        Some(0)
    );
    assert_eq!(
        run(&["ms-build", "zmod:5:2", "--e", "5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["roundtrip", "zmod:7:1", "--e", "3"]).status.code(),
        Some(0)
    );
    // poly elements parse as packed index or coefficient list
    assert_eq!(
        run(&["ms-build", "poly:5:2", "--e", "1,2"]).status.code(),
        Some(0)
    );
}

#[test]
fn ms_extract_rejects_z4_with_note() {
    let out = run(&["ms-extract", "zmod:4:1"]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["extras"]["jordan_extractable"], false);
    let notes = report["notes"].as_array().unwrap();
    assert!(notes
        .iter()
        .any(|n| n["name"] == "extraction" && n["value"]
            .as_str()
            .unwrap()
            .contains("not Jordan-extractable")));
}

#[test]
fn ms_group_cap_exceeded() {
    let out = run(&["ms-group", "zmod:5:1", "--cap", "10"]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    let cap_check = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "closure_within_cap")
        .unwrap();
    assert_eq!(cap_check["pass"], false);
}

#[test]
fn seedless_flag_is_accepted() {
    let out = run(&["jp-verify", "zmod:5:1", "--seedless"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["seedless"], true);
}

#[test]
fn deep_flag_adds_operator_identities() {
    let out = run(&["ms-extract", "zmod:5:1", "--deep"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let names: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"identities.qj_e_anchored_double"));
    assert!(names.contains(&"identities.qj_e_anchored_symmetry"));

    let shallow = run(&["ms-extract", "zmod:5:1"]);
    let report = stdout_json(&shallow);
    assert!(!report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["name"].as_str().unwrap().contains("qj_e_anchored")));
}
