//! File plumbing shared by the subcommands.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use triplekit::formats::{read_corpus_jsonl, read_jsonl, read_release_json, read_xml};
use triplekit::CorpusEntry;

/// An error that carries a structured payload for the error report.
#[derive(Debug)]
pub struct Reported {
    pub message: String,
    pub details: Value,
}

impl std::fmt::Display for Reported {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Reported {}

pub fn error_report(command: &str, err: &anyhow::Error) -> String {
    let mut report = json!({
        "status": "error",
        "command": command,
        "error": err.to_string(),
        "causes": err.chain().skip(1).map(|c| c.to_string()).collect::<Vec<_>>(),
    });
    if let Some(r) = err.downcast_ref::<Reported>() {
        report["details"] = r.details.clone();
    }
    report.to_string()
}

pub fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_records<T: DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<T>> {
    read_jsonl(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// Reads a corpus by extension: `.xml` entries documents, `.json` arrays in
/// the distributed layout, anything else the JSONL corpus format.
pub fn read_corpus(path: &Path) -> anyhow::Result<Vec<CorpusEntry>> {
    let text = read_text(path)?;
    let parsed = match path.extension().and_then(|e| e.to_str()) {
        Some("xml") => read_xml(&text),
        Some("json") => read_release_json(&text),
        _ => read_corpus_jsonl(&text),
    };
    parsed.with_context(|| format!("parsing {}", path.display()))
}

pub fn read_corpora(paths: &[std::path::PathBuf]) -> anyhow::Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(read_corpus(p)?);
    }
    Ok(out)
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn summary(value: Value) {
    println!("{value}");
}
