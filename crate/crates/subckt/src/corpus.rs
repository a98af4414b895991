//! On-disk corpus layout: `<id>.sp` netlists next to `<id>.hl1`, `<id>.hl2`
//! and `<id>.hl3` label documents.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use subckt_core::annotation::natural_cmp;
use subckt_core::benchmark::{load_labels, BenchmarkEntry, LabelError, TaxonomyMap};
use subckt_core::pipeline::Demo;
use subckt_core::{AnnotationSet, Level, Netlist, NetlistError};

pub const NETLIST_EXT: &str = "sp";

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Netlist { path: PathBuf, source: NetlistError },
    #[error("{path}: {source}")]
    Labels { path: PathBuf, source: LabelError },
}

impl CorpusError {
    /// Malformed input, as opposed to an I/O failure.
    pub fn is_parse(&self) -> bool {
        !matches!(self, CorpusError::Io { .. })
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

pub fn read_netlist(path: &Path) -> Result<Netlist, CorpusError> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    Netlist::parse(&text).map_err(|source| CorpusError::Netlist { path: path.to_path_buf(), source })
}

pub fn read_labels(path: &Path, taxonomy: &TaxonomyMap) -> Result<AnnotationSet, CorpusError> {
    let text = fs::read_to_string(path).map_err(io(path))?;
    load_labels(&text, taxonomy).map_err(|source| CorpusError::Labels { path: path.to_path_buf(), source })
}

/// Sorted ids of files with extension `ext` directly inside `dir`.
pub fn ids_with_ext(dir: &Path, ext: &str) -> Result<Vec<String>, CorpusError> {
    let mut ids = Vec::new();
    for entry in fs::read_dir(dir).map_err(io(dir))? {
        let path = entry.map_err(io(dir))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == ext) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.push(stem.to_string());
            }
        }
    }
    ids.sort_by(|a, b| natural_cmp(a, b));
    Ok(ids)
}

/// Every label document `<id>.<level ext>` that exists, unioned.
pub fn read_truth(dir: &Path, id: &str, levels: &[Level], taxonomy: &TaxonomyMap) -> Result<AnnotationSet, CorpusError> {
    let mut set = AnnotationSet::new();
    for level in levels {
        let path = dir.join(format!("{id}.{}", level.extension()));
        if path.exists() {
            set.union(&read_labels(&path, taxonomy)?.restrict(&[*level]));
        }
    }
    Ok(set)
}

pub fn read_corpus(dir: &Path, taxonomy: &TaxonomyMap) -> Result<Vec<BenchmarkEntry>, CorpusError> {
    ids_with_ext(dir, NETLIST_EXT)?
        .into_iter()
        .map(|id| {
            let netlist = read_netlist(&dir.join(format!("{id}.{NETLIST_EXT}")))?;
            let truth = read_truth(dir, &id, &Level::ALL, taxonomy)?;
            Ok(BenchmarkEntry::new(id, netlist, truth))
        })
        .collect()
}

pub fn read_demos(dir: &Path, taxonomy: &TaxonomyMap) -> Result<Vec<Demo>, CorpusError> {
    Ok(read_corpus(dir, taxonomy)?
        .into_iter()
        .map(|e| Demo { id: e.id, netlist: e.netlist, truth: e.truth })
        .collect())
}

/// Netlist files to process: `path` itself, or every netlist inside it.
pub fn netlist_paths(path: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    if path.is_dir() {
        Ok(ids_with_ext(path, NETLIST_EXT)?
            .into_iter()
            .map(|id| path.join(format!("{id}.{NETLIST_EXT}")))
            .collect())
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

pub fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "netlist".into())
}

/// Write-then-rename within the destination directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CorpusError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(dir))?;
    tmp.write_all(contents.as_bytes()).map_err(io(path))?;
    tmp.persist(path).map_err(|e| CorpusError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

/// Writes one document per level in `levels` as `<dir>/<id>.<ext>`.
pub fn write_levels(dir: &Path, id: &str, set: &AnnotationSet, levels: &[Level]) -> Result<Vec<PathBuf>, CorpusError> {
    let mut written = Vec::new();
    for level in levels {
        let path = dir.join(format!("{id}.{}", level.extension()));
        write_atomic(&path, &set.to_document(Some(*level)))?;
        written.push(path);
    }
    Ok(written)
}

/// Device names of a netlist, the universe for node-level scores.
pub fn universe(netlist: &Netlist) -> BTreeSet<String> {
    netlist.devices().iter().map(|d| d.name.clone()).collect()
}
