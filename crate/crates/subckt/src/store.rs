//! Codebase and run-log persistence. A codebase directory holds one script
//! per target plus `manifest.json`; run logs are JSON lines.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use subckt_core::pipeline::{Codebase, CodebaseEntry, IdentifierScript, Outcome, RunLog};

use crate::corpus::{write_atomic, CorpusError};

pub const MANIFEST: &str = "manifest.json";
pub const RUN_LOG: &str = "runlog.jsonl";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ManifestEntry {
    outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    script: Option<String>,
}

fn script_file(target: &str) -> String {
    let safe: String = target.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect();
    format!("{safe}.py")
}

pub fn save_codebase(dir: &Path, codebase: &Codebase) -> Result<(), StoreError> {
    let mut manifest = BTreeMap::new();
    for (target, entry) in &codebase.entries {
        let script = entry.script().map(|s| {
            let file = script_file(target);
            (file, s.source.clone())
        });
        if let Some((file, source)) = &script {
            write_atomic(&dir.join(file), source)?;
        }
        manifest.insert(target.clone(), ManifestEntry { outcome: entry.kind(), script: script.map(|(f, _)| f) });
    }
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&dir.join(MANIFEST), &(json + "\n"))?;
    Ok(())
}

pub fn load_codebase(dir: &Path) -> Result<Codebase, StoreError> {
    let path = dir.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|source| StoreError::Io { path: path.clone(), source })?;
    let manifest: BTreeMap<String, ManifestEntry> =
        serde_json::from_str(&text).map_err(|source| StoreError::Json { path: path.clone(), source })?;
    let mut codebase = Codebase::default();
    for (target, m) in manifest {
        let script = match &m.script {
            Some(file) => {
                let p = dir.join(file);
                let source = std::fs::read_to_string(&p).map_err(|source| StoreError::Io { path: p, source })?;
                Some(IdentifierScript { target: target.clone(), source })
            }
            None => None,
        };
        let entry = match (m.outcome, script) {
            (Outcome::Accepted, Some(script)) => CodebaseEntry::Accepted { script },
            (Outcome::Cautious, Some(script)) => CodebaseEntry::Cautious { script },
            _ => CodebaseEntry::Empty,
        };
        codebase.entries.insert(target, entry);
    }
    Ok(codebase)
}

pub fn save_run_log(path: &Path, log: &RunLog) -> Result<(), StoreError> {
    let mut out = String::new();
    for r in &log.records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    write_atomic(path, &out)?;
    Ok(())
}

pub fn load_run_log(path: &Path) -> Result<RunLog, StoreError> {
    let text = std::fs::read_to_string(path).map_err(|source| StoreError::Io { path: path.into(), source })?;
    let records = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(|source| StoreError::Json { path: path.into(), source }))
        .collect::<Result<_, _>>()?;
    Ok(RunLog { records })
}
