use std::io::Write;
use std::process::Command;

use circhad::cli::{run, Report};
use serde_json::Value;

const COUNTEREXAMPLE: &str = "++,+-,--,+-,--,+-";

fn circhad(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_circhad"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> (i32, Report) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let (code, stdout, stderr) = circhad(&full);
    let report = serde_json::from_str(&stdout)
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {stdout}\nstderr: {stderr}"));
    (code, report)
}

fn temp_file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn verify() {
    let (code, r) = json(&["verify", "-+++"]);
    assert_eq!(code, 0);
    assert!(r.ok);
    assert_eq!(r.result["paf"], serde_json::json!([4, 0, 0, 0]));
    assert_eq!(r.result["row_sum"], 2);

    let (code, r) = json(&["verify", "++++"]);
    assert_eq!(code, 1);
    assert!(!r.ok);

    let (code, stdout, stderr) = circhad(&["verify", "+*+-"]);
    assert_eq!(code, 2);
    assert!(stdout.is_empty());
    assert!(stderr.contains("invalid sign"));
}

#[test]
fn verify_file_corpus() {
    let f = temp_file("-+++\n\n# comment\n++++\n");
    let (code, r) = json(&["verify", "--file", f.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(!r.ok);
    assert_eq!(r.inputs, serde_json::json!(["-+++", "++++"]));
    assert_eq!(r.result.as_array().unwrap().len(), 2);
}

#[test]
fn paf() {
    let (code, r) = json(&["paf", "-+++", "--lag", "1"]);
    assert_eq!(code, 0);
    assert_eq!(r.result["paf"], 0);
    let (_, r) = json(&["paf", "+-"]);
    assert_eq!(r.result["paf"], serde_json::json!([2, -2]));
    assert_eq!(circhad(&["paf", "+-", "--lag", "2"]).0, 2);
}

#[test]
fn decompose() {
    let (code, r) = json(&["decompose", "-+++"]);
    assert_eq!(code, 0);
    assert_eq!(r.result["blocks"], "-+,++");
    assert_eq!(r.result["parities"], serde_json::json!(["Odd", "Even"]));
    assert_eq!(r.result["even_count"], 1);

    let (_, r) = json(&["decompose", "++++"]);
    assert_eq!(r.result["blocks"], "++,++");
    assert_eq!(r.result["even_count"], 2);

    assert_eq!(circhad(&["decompose", "+-+"]).0, 2);
}

#[test]
fn eqn1() {
    let (code, r) = json(&["eqn1", COUNTEREXAMPLE, "--lag", "2"]);
    assert_eq!(code, 1);
    assert!(!r.ok);
    assert_eq!(r.result["residual"], serde_json::json!([[-2, -2], [-2, -2]]));

    let (code, r) = json(&["eqn1", "-+,++"]);
    assert_eq!(code, 0);
    assert!(r.ok);

    let (code, r) = json(&["eqn1", COUNTEREXAMPLE]);
    assert_eq!(code, 1);
    assert_eq!(r.result["holds"], false);
    assert_eq!(r.result["lags"].as_array().unwrap().len(), 5);

    assert_eq!(circhad(&["eqn1", COUNTEREXAMPLE, "--lag", "6"]).0, 2);
    assert_eq!(circhad(&["eqn1", "++,--,+-"]).0, 2);
}

#[test]
fn match_output_feeds_chase() {
    let (code, stdout, _) = circhad(&["match", COUNTEREXAMPLE]);
    assert_eq!(code, 0);
    assert!(stdout.contains("u=2: (0,2)~(2,4)"));
    assert!(stdout.contains("u=4: (0,4)~(4,2)"));

    let f = temp_file(&stdout);
    let (code, r) = json(&[
        "chase",
        COUNTEREXAMPLE,
        "--matchings",
        f.path().to_str().unwrap(),
        "--start",
        "0,2",
    ]);
    assert_eq!(code, 0);
    assert_eq!(r.result["outcome"], "Cycle");
}

#[test]
fn chase_counterexample() {
    let f = temp_file("u=2: (0,2)~(2,4)\nu=4: (0,4)~(4,2)\n");
    let path = f.path().to_str().unwrap();
    let (code, stdout, _) = circhad(&["chase", COUNTEREXAMPLE, "--matchings", path, "--start", "0,2"]);
    assert_eq!(code, 0);
    assert_eq!(
        stdout,
        "(0,2) ~ (2,4)\n(0,4) ~ (4,2)\n(0,2) already visited: Cycle\n"
    );
    let (_, r) = json(&["chase", COUNTEREXAMPLE, "--matchings", path, "--start", "0,2"]);
    assert_eq!(r.result["terminal"], serde_json::json!({"first": 0, "second": 2}));
    assert_eq!(r.result["steps"].as_array().unwrap().len(), 2);
}

#[test]
fn chase_with_empty_matching_file() {
    let f = temp_file("");
    let (code, r) = json(&[
        "chase",
        COUNTEREXAMPLE,
        "--matchings",
        f.path().to_str().unwrap(),
        "--start",
        "0,2",
    ]);
    assert_eq!(code, 1);
    assert!(!r.ok);
    assert_eq!(r.result["outcome"], "MatchingUnavailable");
}

#[test]
fn chase_rejects_bad_matchings() {
    let f = temp_file("u=2: (0,2)~(4,0)\nu=4 (0,4)~(4,2)\n");
    let (code, _, stderr) = circhad(&[
        "chase",
        COUNTEREXAMPLE,
        "--matchings",
        f.path().to_str().unwrap(),
        "--start",
        "0,2",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("line 1") && stderr.contains("do not negate"), "{stderr}");
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn chase_rejects_bad_start() {
    let f = temp_file("u=2: (0,2)~(2,4)\n");
    let path = f.path().to_str().unwrap();
    assert_eq!(circhad(&["chase", COUNTEREXAMPLE, "--matchings", path, "--start", "0,1"]).0, 2);
    assert_eq!(circhad(&["chase", COUNTEREXAMPLE, "--matchings", path, "--start", "zero"]).0, 2);
    assert_eq!(circhad(&["chase", COUNTEREXAMPLE, "--matchings", "/nonexistent", "--start", "0,2"]).0, 2);
}

#[test]
fn counterexample() {
    let (code, r) = json(&["counterexample"]);
    assert_eq!(code, 0);
    assert!(r.ok);
    assert_eq!(r.result["even_blocks"], serde_json::json!([0, 2, 4]));
    let checks = r.result["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 4);
    assert!(checks.iter().all(|c| c["pass"] == true));
    assert_eq!(r.result["trace"]["steps"].as_array().unwrap().len(), 2);

    let (_, text, _) = circhad(&["counterexample"]);
    assert_eq!(text.matches("[pass]").count(), 4);
}

#[test]
fn search() {
    let (code, r) = json(&["search", "--order", "4"]);
    assert_eq!(code, 0);
    assert_eq!(r.result["solutions"].as_array().unwrap().len(), 8);

    let (code, r) = json(&["search", "--order", "12"]);
    assert_eq!(code, 0);
    assert_eq!(r.result["solutions"].as_array().unwrap().len(), 0);
    assert_eq!(r.result["prune_statistics"]["order_rejected"], true);

    let (code, r) = json(&["search", "--order", "16", "--workers", "2", "--prune", "none"]);
    assert_eq!(code, 0);
    assert_eq!(r.result["sequences_examined"], 1 << 15);
    assert_eq!(r.result["solutions"].as_array().unwrap().len(), 0);

    let (code, r) = json(&["search", "--order", "4", "--canonical"]);
    assert_eq!(code, 0);
    assert_eq!(r.result["canonical"], serde_json::json!(["+++-"]));

    assert_eq!(circhad(&["search", "--order", "10"]).0, 2);
    assert_eq!(circhad(&["search", "--order", "8", "--workers", "0"]).0, 2);
}

#[test]
fn search_budget_truncation_exits_one() {
    let (code, r) = json(&["search", "--order", "16", "--prune", "none", "--budget-seconds", "0"]);
    assert_eq!(code, 1);
    assert!(!r.ok);
    assert_eq!(r.result["incomplete"], true);
}

#[test]
fn search_ledger_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("order16.ledger");
    let path = ledger.to_str().unwrap();

    let (code, first) = json(&["search", "--order", "16", "--ledger", path]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&ledger).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "# circhad-ledger order=16 shard-bits=10 prunes=row-sum,prefix-paf"
    );
    assert_eq!(lines.filter(|l| l.split_whitespace().nth(1) == Some("done")).count(), 1024);

    // Rerun: everything is read back, nothing appended.
    let (code, second) = json(&["search", "--order", "16", "--ledger", path]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&ledger).unwrap(), text);
    let strip = |r: &Report| {
        let mut v = r.result.clone();
        v["elapsed_ms"] = Value::from(0);
        v
    };
    assert_eq!(strip(&first), strip(&second));

    // A ledger for a different search is refused.
    let (code, _, stderr) = circhad(&["search", "--order", "16", "--prune", "none", "--ledger", path]);
    assert_eq!(code, 2);
    assert!(stderr.contains("different search"));
}

#[test]
fn search_ledger_partial_resume() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("order4.ledger");
    let path = ledger.to_str().unwrap();
    let (_, full) = json(&["search", "--order", "4", "--ledger", path]);
    // Drop the last finished shard and mark one as incomplete; both rerun.
    let text = std::fs::read_to_string(&ledger).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines.pop();
    lines[1] = lines[1].replace(" done ", " incomplete ");
    std::fs::write(&ledger, lines.join("\n") + "\n").unwrap();
    let (code, resumed) = json(&["search", "--order", "4", "--ledger", path]);
    assert_eq!(code, 0);
    assert_eq!(resumed.result["solutions"], full.result["solutions"]);
    assert_eq!(resumed.result["sequences_examined"], full.result["sequences_examined"]);
}

#[test]
fn json_reports_round_trip() {
    let f = temp_file("u=2: (0,2)~(2,4)\nu=4: (0,4)~(4,2)\n");
    let path = f.path().to_str().unwrap().to_string();
    let invocations: Vec<Vec<&str>> = vec![
        vec!["verify", "-+++"],
        vec!["paf", "+--+"],
        vec!["decompose", "+-+-+-+-"],
        vec!["eqn1", COUNTEREXAMPLE],
        vec!["match", COUNTEREXAMPLE, "--lag", "2"],
        vec!["chase", COUNTEREXAMPLE, "--matchings", &path, "--start", "0,2"],
        vec!["counterexample"],
        vec!["search", "--order", "8", "--canonical"],
    ];
    for args in invocations {
        let out = run(["circhad", "--format", "json"].into_iter().chain(args.iter().copied()));
        let report: Report = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(report.to_json() + "\n", out.stdout, "{args:?}");
        let again: Report = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(again, report);
    }
}

#[test]
fn text_output_is_default() {
    let (code, stdout, _) = circhad(&["eqn1", COUNTEREXAMPLE, "--lag", "2"]);
    assert_eq!(code, 1);
    assert_eq!(stdout, "lag 2 residual\n  [ -2 -2 ]\n  [ -2 -2 ]\n");
}
