use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_atlas-forge"));
    cmd.env("RUST_LOG", "warn");
    cmd
}

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_two_domains_with_the_mock() {
    let dir = tempfile::tempdir().unwrap();
    let domains = dir.path().join("domains.txt");
    std::fs::write(&domains, "# two domains\nFinance\n\nEducation\n").unwrap();
    let out = dir.path().join("atlas.json");
    let o = run(&["generate", "--technology", "drones", "--domains-file", s(&domains), "--mock-seed", "2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let atlas = read_json(&out);
    assert_eq!(atlas["uses"].as_array().unwrap().len(), 6);
    assert_eq!(atlas["cards"].as_array().unwrap().len(), 6);
    assert_eq!(atlas["coords"].as_object().unwrap().len(), 6);

    let o = run(&["validate", "--atlas", s(&out), "--require-layout"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn generate_is_deterministic_under_a_mock_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = run(&["generate", "--technology", "facial recognition", "--mock-seed", "1", "--iters", "300", "--out", s(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn usage_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["generate", "--technology", "x", "--mock-seed", "1"],
        &["generate", "--technology", "x", "--out", "/tmp/never.json"],
        &["generate", "--technology", "x", "--mock-seed", "1", "--provider-config", "p.toml", "--out", "/tmp/never.json"],
        &["generate", "--technology", "x", "--mock-seed", "1", "--perplexity", "0.5", "--out", "/tmp/never.json"],
        &["ingest", "--incidents", "x.csv", "--mock-seed", "1", "--threshold", "1.5", "--out", "/tmp/never.json"],
        &["stats"],
        &[],
    ];
    for args in cases {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn stats_on_the_sample() {
    let o = run(&["stats", "--atlas", s(&repo("data/sample/facial-recognition.atlas.json"))]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("uses: 138\n"), "{text}");
    for line in ["unacceptable     10  (7%)", "high             66  (48%)", "limited-low      62  (45%)"] {
        assert!(text.contains(line), "missing `{line}` in\n{text}");
    }
    for line in ["existing         91  (66%)", "upcoming         39  (28%)", "unlikely          8  (6%)"] {
        assert!(text.contains(line), "missing `{line}` in\n{text}");
    }
}

#[test]
fn validate_flags_a_tampered_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut atlas = read_json(&repo("data/sample/facial-recognition.atlas.json"));
    atlas["uses"][0]["purpose"] = Value::from("something else entirely");
    let path = dir.path().join("tampered.json");
    std::fs::write(&path, serde_json::to_vec(&atlas).unwrap()).unwrap();
    let o = run(&["validate", "--atlas", s(&path)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("id"), "{}", stdout(&o));

    std::fs::write(&path, "{\"schema_version\": 9}").unwrap();
    assert_eq!(run(&["validate", "--atlas", s(&path)]).status.code(), Some(1));
    assert_eq!(run(&["validate", "--atlas", "/nonexistent.json"]).status.code(), Some(1));
}

#[test]
fn layout_twice_with_the_same_seed_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let src = repo("data/sample/facial-recognition.atlas.json");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::copy(&src, &a).unwrap();
    for _ in 0..2 {
        let o = run(&["layout", "--atlas", s(&a), "--seed", "7", "--iters", "400"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let o = run(&["layout", "--atlas", s(&src), "--out", s(&b), "--seed", "7", "--iters", "400"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let o = run(&["layout", "--atlas", s(&src), "--out", s(&b), "--seed", "8", "--iters", "400"]);
    assert!(o.status.success());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

fn incident_groups(report: &Value) -> BTreeSet<BTreeSet<u64>> {
    report["clusters"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["member_incident_ids"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect())
        .collect()
}

#[test]
fn ingest_sample_incidents() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("multi.atlas.json");
    let o = run(&["ingest", "--incidents", s(&repo("data/sample/incidents.csv")), "--mock-seed", "1", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let atlas = read_json(&out);
    assert_eq!(atlas["technology"], "multi");
    assert!(atlas["uses"].as_array().unwrap().len() <= 10);

    let report = read_json(&dir.path().join("multi.merge-report.json"));
    let covered: BTreeSet<u64> = incident_groups(&report).into_iter().flatten().collect();
    assert_eq!(covered, (1..=10).collect());
    let from_uses: BTreeSet<u64> = atlas["uses"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|u| u["source_incident_ids"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()))
        .collect();
    assert_eq!(from_uses, covered);
}

#[test]
fn ingest_planted_duplicates() {
    // Four groups of three rewordings; incident ids encode the group as
    // id / 100. The mock maps each group to one component tuple and the
    // largest cross-group cosine of the fallback embeddings is 0.4623
    // (checked with the independent embedder in tools/fixtures.py), so at
    // 0.92 the clusters are exactly the groups.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("planted.json");
    let report_path = dir.path().join("report.json");
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/planted_incidents.csv");
    let o = run(&[
        "ingest", "--incidents", s(&fixture), "--mock-seed", "5", "--threshold", "0.92", "--out", s(&out), "--report", s(&report_path),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let groups = incident_groups(&read_json(&report_path));
    let expected: BTreeSet<BTreeSet<u64>> = (1..=4).map(|g| (1..=3).map(|k| g * 100 + k).collect()).collect();
    assert_eq!(groups, expected);
    assert_eq!(read_json(&out)["uses"].as_array().unwrap().len(), 4);
}

#[test]
fn bad_incident_csv_reports_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "incident_id,title,description,date\n1,a,b,2020-01-01\nseven,c,d,\n").unwrap();
    let o = run(&["ingest", "--incidents", s(&path), "--mock-seed", "1", "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("row 2"), "{}", stderr(&o));
}

#[test]
fn eval_prints_a_stable_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("responses.csv");
    let mut csv = String::from("participant,instrument,item,value\n");
    for (p, base) in [("p1", 4), ("p2", 5)] {
        for item in 1..=10 {
            let v = if item % 2 == 1 { base } else { 6 - base };
            csv.push_str(&format!("{p},sus,{item},{v}\n"));
        }
    }
    for (rater, scores) in [("r1", [1, 2, 3]), ("r2", [1, 2, 3])] {
        for (s, v) in ["u1", "u2", "u3"].iter().zip(scores) {
            csv.push_str(&format!("{rater},rating:risks,{s},{v}\n"));
        }
    }
    std::fs::write(&path, csv).unwrap();
    let o = run(&["eval", "--responses", s(&path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    // p1: (4-1)*5 + (5-2)*5 = 30 -> 75; p2: 100
    assert_eq!(stdout(&o), "sus: participants=2 mean=87.50\nicc[risks]: subjects=3 raters=2 icc2_1=1.0000\n");

    std::fs::write(&path, "participant,instrument,item,value\np1,sus,1,9\n").unwrap();
    assert_eq!(run(&["eval", "--responses", s(&path)]).status.code(), Some(1));
}

#[test]
fn serve_refuses_an_invalid_atlas() {
    let o = run(&["serve", "--atlas", "/nonexistent.json", "--port", "0"]);
    assert_eq!(o.status.code(), Some(1));
}
