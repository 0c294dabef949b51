use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden").join(name)
}

fn pseudosum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudosum")).args(args).env("RUST_LOG", "off").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_corpus(dir: &Path, name: &str, records: &[Value]) -> PathBuf {
    let path = dir.join(name);
    let text: String = records.iter().map(|r| format!("{r}\n")).collect();
    fs::write(&path, text).unwrap();
    path
}

fn body(lines: usize, tag: &str) -> String {
    let mut s = format!("int {tag}(int a)\n{{\n");
    for i in 0..lines.saturating_sub(3) {
        s.push_str(&format!("  a += {i};\n"));
    }
    s.push_str("}\n");
    s
}

#[test]
fn resort_chain_prints_callees_first() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    fs::write(&g, r#"{"vertices": ["main", "f", "g"], "edges": [["main", "f"], ["f", "g"]]}"#).unwrap();
    let o = pseudosum(&["resort", p(&g)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "g\nf\nmain\n");

    let o = pseudosum(&["resort", p(&g), "--json"]);
    assert_eq!(stdout(&o), "[\"g\",\"f\",\"main\"]\n");
}

#[test]
fn resort_empty_and_malformed() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.dot");
    fs::write(&empty, "").unwrap();
    let o = pseudosum(&["resort", p(&empty)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");

    let bad = dir.path().join("bad.dot");
    fs::write(&bad, "digraph g {\n  a -> b;\n  c -> ;\n}\n").unwrap();
    let o = pseudosum(&["resort", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = pseudosum(&["resort", p(&dir.path().join("missing.dot"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn summarize_golden_and_echo() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = pseudosum(&["summarize", "--config", p(&fixture("run.toml")), "--output-dir", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("7 function(s), 0 failed"));
    assert_eq!(fs::read(out.join("transcript.jsonl")).unwrap(), fs::read(fixture("transcript.golden.jsonl")).unwrap());

    let summaries: Value = serde_json::from_str(&fs::read_to_string(out.join("summaries.json")).unwrap()).unwrap();
    assert_eq!(summaries.as_object().unwrap().len(), 7);
    let echo = fs::read_to_string(out.join("config.echo.toml")).unwrap();
    assert!(echo.contains("kind = \"mock\"") && echo.contains("budget_words = 40"));
}

#[test]
fn summarize_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(
        dir.path(),
        "c.jsonl",
        &[serde_json::json!({"id": "a", "name": "a", "body": "int a() { return 0; }"})],
    );
    let cfg = dir.path().join("bad_kind.toml");
    fs::write(&cfg, format!("corpus = {:?}\n[backend]\nkind = \"gpt5\"\n", p(&corpus))).unwrap();
    assert_eq!(pseudosum(&["summarize", "--config", p(&cfg)]).status.code(), Some(2));

    let graph = dir.path().join("g.dot");
    fs::write(&graph, "digraph { a -> ghost; }\n").unwrap();
    let cfg = dir.path().join("dangling.toml");
    fs::write(&cfg, format!("corpus = {:?}\ngraph = {:?}\n", p(&corpus), p(&graph))).unwrap();
    let o = pseudosum(&["summarize", "--config", p(&cfg), "--output-dir", p(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ghost"));
}

#[test]
fn summarize_http_backend_down_still_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(
        dir.path(),
        "c.jsonl",
        &[serde_json::json!({"id": "a", "name": "a", "body": "int a() { return 0; }"})],
    );
    // nothing listens on the discard port
    let cfg = dir.path().join("http.toml");
    fs::write(
        &cfg,
        format!(
            "corpus = {:?}\noutput_dir = \"o\"\n[backend]\nkind = \"http\"\nurl = \"http://127.0.0.1:9/x\"\nmodel = \"m\"\nretries = 0\n",
            p(&corpus)
        ),
    )
    .unwrap();
    let o = pseudosum(&["summarize", "--config", p(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("1 failed"));
    let t = fs::read_to_string(dir.path().join("o/transcript.jsonl")).unwrap();
    assert!(t.contains("\"status\":\"failed\"") && t.contains("summary unavailable"));
}

#[test]
fn evaluate_perfect_and_probe() {
    let dir = tempfile::tempdir().unwrap();
    let refs = fixture("references.json");
    let report = dir.path().join("report.json");
    let o = pseudosum(&["evaluate", "--transcript", p(&refs), "--references", p(&refs), "--out", p(&report)]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["mean"]["rouge_l"], 1.0);
    assert_eq!(v["per_function"].as_array().unwrap().len(), 7);
    assert!(v["avg_summary_words"].as_f64().unwrap() > 0.0);

    let csv = dir.path().join("probe.csv");
    let o = pseudosum(&["evaluate", "--bias-probe", "30", "--probe-out", p(&csv)]);
    assert!(o.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 31);
    assert!(rows.iter().all(|r| r.split(',').count() == 31));
}

#[test]
fn evaluate_missing_reference_file() {
    let o = pseudosum(&["evaluate", "--transcript", p(&fixture("transcript.golden.jsonl")), "--references", "/no/such/refs.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn evaluate_transcript_with_normalized_struc() {
    let o = pseudosum(&[
        "evaluate",
        "--transcript",
        p(&fixture("transcript.golden.jsonl")),
        "--references",
        p(&fixture("references.json")),
        "--normalize-struc",
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for row in v["per_function"].as_array().unwrap() {
        let s = row["struc_normalized"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&s));
    }
}

#[test]
fn dataset_filter_logs_too_short() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_corpus(
        dir.path(),
        "c.jsonl",
        &[
            serde_json::json!({"id": "short", "name": "short", "body": body(4, "short")}),
            serde_json::json!({"id": "ok", "name": "ok", "body": body(5, "ok")}),
        ],
    );
    let (kept, rejects) = (dir.path().join("kept.jsonl"), dir.path().join("rejects.jsonl"));
    let o = pseudosum(&["dataset", "filter", "--input", p(&input), "--out", p(&kept), "--rejects", p(&rejects)]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&kept).unwrap().lines().count(), 1);
    let log: Value = serde_json::from_str(fs::read_to_string(&rejects).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(log["id"], "short");
    assert_eq!(log["reason"], "TooShort");
}

#[test]
fn dataset_strip_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("corpus.jsonl");
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    for out in [&a, &b] {
        let o = pseudosum(&["dataset", "strip", "--input", p(&input), "--out", p(out), "--level", "demi", "--seed", "7"]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let first: Value = serde_json::from_str(fs::read_to_string(&a).unwrap().lines().next().unwrap()).unwrap();
    assert!(first["name"].as_str().unwrap().starts_with("sub_"));
    assert_eq!(first["strip_level"], "demi_stripped");

    let o = pseudosum(&["dataset", "strip", "--input", p(&input), "--out", p(&a), "--level", "half"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dataset_csl_and_evas() {
    let dir = tempfile::tempdir().unwrap();
    let csl = dir.path().join("csl.jsonl");
    let o = pseudosum(&[
        "dataset", "csl", "--input", p(&fixture("corpus.jsonl")), "--out", p(&csl), "--apis", p(&fixture("apis.txt")),
    ]);
    assert!(o.status.success());
    let line: Value = serde_json::from_str(fs::read_to_string(&csl).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(line["tokens"].as_array().unwrap().len(), line["labels"].as_array().unwrap().len());

    let refs: Value = serde_json::from_str(&fs::read_to_string(fixture("references.json")).unwrap()).unwrap();
    let records: Vec<Value> = refs
        .as_object()
        .unwrap()
        .iter()
        .map(|(id, s)| serde_json::json!({"id": id, "name": id, "body": "x", "summary": s}))
        .collect();
    let input = write_corpus(dir.path(), "s.jsonl", &records);
    let pairs = dir.path().join("evas.jsonl");
    let o = pseudosum(&["dataset", "evas", "--input", p(&input), "--out", p(&pairs), "--ratio", "1:1", "--total", "10"]);
    assert!(o.status.success());
    let lines: Vec<Value> =
        fs::read_to_string(&pairs).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 10);
    assert_eq!(lines.iter().filter(|l| l["polarity"] == "pos").count(), 5);

    let o = pseudosum(&["dataset", "evas", "--input", p(&input), "--out", p(&pairs), "--ratio", "oops"]);
    assert_eq!(o.status.code(), Some(2));
}
