use std::fs;

use subckt::config::{PipelineFile, ProviderKind};
use subckt::store::{load_codebase, load_run_log, save_codebase, save_run_log};
use subckt_core::pipeline::{Codebase, CodebaseEntry, ExecStatus, IdentifierScript, LogRecord, RunLog, Step};

#[test]
fn codebase_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut cb = Codebase::default();
    let script = |t: &str| IdentifierScript { target: t.into(), source: format!("# {t}\n") };
    cb.entries.insert("CM".into(), CodebaseEntry::Accepted { script: script("CM") });
    cb.entries.insert("HL3".into(), CodebaseEntry::Cautious { script: script("HL3") });
    cb.entries.insert("Inverter".into(), CodebaseEntry::Empty);
    save_codebase(dir.path(), &cb).unwrap();
    assert!(dir.path().join("CM.py").exists());
    assert!(!dir.path().join("Inverter.py").exists());
    assert_eq!(load_codebase(dir.path()).unwrap(), cb);
}

#[test]
fn run_log_is_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let log = RunLog {
        records: vec![
            LogRecord::Call {
                target: "CM".into(),
                step: Step::CodeGen,
                prompt: "p".into(),
                reply: Some("r".into()),
                error: None,
            },
            LogRecord::Execution {
                target: "CM".into(),
                attempt: 0,
                status: ExecStatus::Pass,
                message: String::new(),
                parsed_output: true,
            },
        ],
    };
    let path = dir.path().join("log.jsonl");
    save_run_log(&path, &log).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().next().unwrap().contains("\"record\":\"call\""));
    assert_eq!(load_run_log(&path).unwrap(), log);
}

#[test]
fn config_defaults_and_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.toml");
    fs::write(&p, "demos = \"corpus\"\n[provider]\nkind = \"scripted\"\nreplies = \"r.json\"\n").unwrap();
    let cfg = PipelineFile::load(&p).unwrap();
    assert_eq!(cfg.retry_limit, 5);
    assert_eq!(cfg.timeout_secs, 30);
    assert_eq!(cfg.interpreter, "python3 {script}");
    assert_eq!(cfg.provider.kind, ProviderKind::Scripted);
    assert_eq!(cfg.demos.unwrap(), dir.path().join("corpus"));
    assert_eq!(cfg.provider.replies.unwrap(), dir.path().join("r.json"));

    fs::write(&p, "retries = 3\n[provider]\nkind = \"scripted\"\n").unwrap();
    assert!(PipelineFile::load(&p).is_err());
}

#[test]
fn openai_provider_requires_credential_variable() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.toml");
    fs::write(
        &p,
        "[provider]\nkind = \"openai\"\nurl = \"http://127.0.0.1:9\"\nmodel = \"m\"\ncredential_env = \"SUBCKT_TEST_UNSET_CREDENTIAL\"\n",
    )
    .unwrap();
    let cfg = PipelineFile::load(&p).unwrap();
    let err = cfg.provider.build().err().unwrap();
    assert!(err.to_string().contains("SUBCKT_TEST_UNSET_CREDENTIAL"));
}
