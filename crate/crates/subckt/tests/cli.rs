use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use subckt_core::benchmark::{load_labels, TaxonomyMap};

const REFERENCE_CM: &str = include_str!("fixtures/reference_cm.py");
const HL2_INSTRUCTION: &str = include_str!("fixtures/hl2_instruction.md");

fn demos() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/demos")
}

fn subckt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subckt")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identify_hl1_matches_golden() {
    let o = subckt(&["identify", s(&demos().join("demo1.sp")), "--levels", "hl1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let tax = TaxonomyMap::default();
    let got = load_labels(&stdout(&o), &tax).unwrap();
    let want = load_labels(&fs::read_to_string(demos().join("demo1.hl1")).unwrap(), &tax).unwrap();
    assert_eq!(got.canonical_form(), want.canonical_form());
}

#[test]
fn malformed_netlist_exits_2_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.sp");
    fs::write(&p, "m1 a b c c nmos\nm2 a b\n").unwrap();
    let o = subckt(&["identify", s(&p)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn overrides_change_roles() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("n.sp");
    fs::write(&p, "c1 x y\n").unwrap();
    let o = subckt(&["identify", s(&p), "--levels", "hl1", "--outputs", "x", "--ground", "y"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("load_cap"));
}

#[test]
fn identify_all_levels_then_evaluate() {
    let out = tempfile::tempdir().unwrap();
    let o = subckt(&["identify", s(&demos()), "--levels", "hl1,hl2,hl3", "--out", s(out.path()), "--workers", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for ext in ["hl1", "hl2", "hl3"] {
        assert!(out.path().join(format!("demo1.{ext}")).exists());
    }
    let o = subckt(&["evaluate", s(out.path()), s(&demos())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = stdout(&o);
    for level in ["HL1", "HL2", "HL3"] {
        let line = report.lines().find(|l| l.starts_with(level)).unwrap();
        assert!(line.split_whitespace().skip(2).all(|v| v == "1.0000"), "{line}");
    }
}

#[test]
fn evaluate_empty_predictions_scores_zero() {
    let empty = tempfile::tempdir().unwrap();
    let report = empty.path().join("report.json");
    let o = subckt(&["evaluate", s(empty.path()), s(&demos()), "--json", "--out", s(&report)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    for level in v["levels"].as_array().unwrap() {
        assert_eq!(level["strict"]["f1"], 0.0);
        assert_eq!(level["node"]["recall"], 0.0);
    }
}

#[test]
fn evaluate_orphan_prediction_exits_3() {
    let pred = tempfile::tempdir().unwrap();
    fs::write(pred.path().join("nosuch.hl2"), "[]\n").unwrap();
    let o = subckt(&["evaluate", s(pred.path()), s(&demos())]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("nosuch"));
}

#[test]
fn unknown_flag_is_rejected() {
    let o = subckt(&["identify", s(&demos().join("demo1.sp")), "--frobnicate"]);
    assert_ne!(code(&o), 0);
}

#[test]
fn prepare_and_stats() {
    let out = tempfile::tempdir().unwrap();
    let o = subckt(&["prepare", s(&demos()), "--out", s(out.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let netlist = fs::read_to_string(out.path().join("demo4.sp")).unwrap();
    assert!(netlist.contains("ibias"));
    let map: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("demo4.map.json")).unwrap()).unwrap();
    assert!(map["forward"].as_object().unwrap().len() > 5);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.as_array().unwrap().len(), 6);

    let o = subckt(&["stats", s(out.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("CM"));
    let bundled = subckt(&["stats"]);
    assert_eq!(stdout(&o), stdout(&bundled));
}

fn write_pipeline_config(dir: &Path, replies: &[String]) -> PathBuf {
    fs::write(dir.join("replies.json"), serde_json::to_string(replies).unwrap()).unwrap();
    let cfg = dir.join("pipeline.toml");
    fs::write(&cfg, "retry_limit = 5\nseed = 3\n\n[provider]\nkind = \"scripted\"\nreplies = \"replies.json\"\n").unwrap();
    cfg
}

fn universal_reply(script: &str) -> String {
    format!("<instruction>\n{HL2_INSTRUCTION}\n</instruction>\n```python\n{script}```\n")
}

#[test]
fn pipeline_all_pass_prints_retry_summary_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let trivial = "def findSubCircuit(netlist: str):\n    return []\n";
    let cfg = write_pipeline_config(dir.path(), &vec![universal_reply(trivial); 40]);
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = subckt(&["pipeline", "--config", s(&cfg), "--targets", "HL1,CM", "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(stdout(&o).contains("HL1 0/5"), "{}", stdout(&o));
        assert!(stdout(&o).contains("CM 0/5"));
        outputs.push((
            fs::read_to_string(out.join("runlog.jsonl")).unwrap(),
            fs::read_to_string(out.join("codebase/manifest.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert!(outputs[0].1.contains("accepted"));
}

#[test]
fn pipeline_then_infer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_pipeline_config(dir.path(), &vec![universal_reply(REFERENCE_CM); 12]);
    let out = dir.path().join("run");
    let o = subckt(&["pipeline", "--config", s(&cfg), "--targets", "CM", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let pred = dir.path().join("pred");
    let o = subckt(&[
        "infer",
        s(&demos().join("demo1.sp")),
        "--codebase",
        s(&out.join("codebase")),
        "--levels",
        "hl2",
        "--out",
        s(&pred),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc = fs::read_to_string(pred.join("demo1.hl2")).unwrap();
    assert_eq!(doc.matches("\"CM\"").count(), 3, "{doc}");
}

#[test]
fn unreachable_provider_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pipeline.toml");
    fs::write(
        &cfg,
        "[provider]\nkind = \"openai\"\nurl = \"http://127.0.0.1:9/v1/chat/completions\"\nmodel = \"m\"\nrequest_timeout_secs = 5\n",
    )
    .unwrap();
    let o = subckt(&["pipeline", "--config", s(&cfg), "--targets", "CM", "--out", s(&dir.path().join("o"))]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    let manifest = fs::read_to_string(dir.path().join("o/codebase/manifest.json")).unwrap();
    assert!(manifest.contains("empty"));
}

#[test]
fn bad_config_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pipeline.toml");
    fs::write(&cfg, "[provider]\nkind = \"carrier-pigeon\"\n").unwrap();
    let o = subckt(&["pipeline", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(code(&o), 4);
    let o = subckt(&["pipeline", "--config", s(&dir.path().join("missing.toml")), "--out", s(dir.path())]);
    assert_eq!(code(&o), 4);
}
