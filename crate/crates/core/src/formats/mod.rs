//! Serialization: WebNLG-style XML entries, the JSONL corpus format and
//! linearized model inputs.

mod jsonl;
mod linearize;
mod release;
mod xml;

pub use jsonl::{read_corpus_jsonl, read_jsonl, write_corpus_jsonl, write_jsonl, SCHEMA_VERSION};
pub use linearize::linearize;
pub use release::{classify_source, read_release_json};
pub use xml::{escape_field, read_xml, split_mtriple, write_xml};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed entry{} at byte {position}: {message}", eid.as_ref().map(|e| format!(" {e}")).unwrap_or_default())]
    MalformedEntry {
        eid: Option<String>,
        position: u64,
        message: String,
    },
    #[error("line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("element {index}: {message}")]
    InvalidEntry { index: usize, message: String },
    #[error("line {line}: unsupported schema version {version}")]
    UnsupportedSchema { line: usize, version: u32 },
}
