//! Function records and the datasets built from them.

mod csl;
mod evas;
mod filter;
mod strip;

use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fcg::FunctionId;
use crate::lexer::{self, LexError};

pub use csl::{build_csl, CslEntry};
pub use evas::{build_evas_pairs, perturb, EvasConfig, EvasError, EvasPair, Perturbation, Ratio};
pub use filter::{filter_corpus, FilterOutcome, RejectReason, Rejected, MIN_LINES};
pub use strip::{stripped_name, StripError, StripLevel, Stripper};

/// One decompiled function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub id: FunctionId,
    pub name: String,
    pub body: String,
    #[serde(default)]
    pub callees: Vec<FunctionId>,
    #[serde(default)]
    pub summary: Option<String>,
    #[serde(default, skip_serializing_if = "StripLevel::is_not_stripped")]
    pub strip_level: StripLevel,
}

impl FunctionRecord {
    pub fn new(id: impl Into<FunctionId>, name: impl Into<String>, body: impl Into<String>) -> Self {
        FunctionRecord {
            id: id.into(),
            name: name.into(),
            body: body.into(),
            callees: Vec::new(),
            summary: None,
            strip_level: StripLevel::NotStripped,
        }
    }

    pub fn with_callees<I, S>(mut self, callees: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<FunctionId>,
    {
        self.callees = callees.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_summary(mut self, summary: impl Into<String>) -> Self {
        self.summary = Some(summary.into());
        self
    }
}

/// Token class assigned by a sequence labeler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "N")]
    Normal,
    #[serde(rename = "A")]
    ApiCall,
    #[serde(rename = "S")]
    StringLit,
}

impl Label {
    pub fn code(self) -> &'static str {
        match self {
            Label::Normal => "N",
            Label::ApiCall => "A",
            Label::StringLit => "S",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledToken {
    pub text: String,
    pub label: Label,
}

/// C-like tokenization of a function body. Comments and whitespace are
/// dropped; string and char literals stay whole.
pub fn tokenize_pseudocode(body: &str) -> Result<Vec<String>, LexError> {
    Ok(lexer::lex(body)?.into_iter().map(|t| t.text.to_owned()).collect())
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read corpus: {0}")]
    Io(#[from] io::Error),
    #[error("failed to serialize record: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    /// Line is not a valid record; skipped.
    Malformed(String),
    InvalidUtf8,
    /// A record with this id was already loaded; skipped.
    DuplicateId(FunctionId),
    /// Record loaded, but a callee is not in the corpus.
    DanglingCallee { id: FunctionId, callee: FunctionId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based line number in the input.
    pub line: usize,
    pub kind: DiagnosticKind,
}

impl Diagnostic {
    /// True when the record on this line was dropped.
    pub fn skipped(&self) -> bool {
        !matches!(self.kind, DiagnosticKind::DanglingCallee { .. })
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DiagnosticKind::Malformed(msg) => write!(f, "line {}: skipped malformed record: {msg}", self.line),
            DiagnosticKind::InvalidUtf8 => write!(f, "line {}: skipped record with invalid UTF-8", self.line),
            DiagnosticKind::DuplicateId(id) => write!(f, "line {}: skipped duplicate id `{id}`", self.line),
            DiagnosticKind::DanglingCallee { id, callee } => {
                write!(f, "line {}: warning: `{id}` calls `{callee}`, which is not in the corpus", self.line)
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub records: Vec<FunctionRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Loads a JSON-lines corpus. Bad lines are skipped with a diagnostic; only
/// I/O failure is fatal.
pub fn ingest_corpus(mut reader: impl BufRead) -> Result<Ingested, CorpusError> {
    let mut out = Ingested::default();
    let mut lines_of = Vec::new();
    let mut buf = Vec::new();
    let mut line_no = 0usize;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let raw = buf.strip_suffix(b"\n").unwrap_or(&buf);
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        let Ok(text) = std::str::from_utf8(raw) else {
            out.diagnostics.push(Diagnostic { line: line_no, kind: DiagnosticKind::InvalidUtf8 });
            continue;
        };
        if text.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<FunctionRecord>(text) {
            Ok(rec) if out.records.iter().any(|r| r.id == rec.id) => {
                out.diagnostics.push(Diagnostic { line: line_no, kind: DiagnosticKind::DuplicateId(rec.id) });
            }
            Ok(rec) => {
                out.records.push(rec);
                lines_of.push(line_no);
            }
            Err(e) => out.diagnostics.push(Diagnostic { line: line_no, kind: DiagnosticKind::Malformed(e.to_string()) }),
        }
    }

    let known: std::collections::BTreeSet<&FunctionId> = out.records.iter().map(|r| &r.id).collect();
    let mut dangling = Vec::new();
    for (rec, &line) in out.records.iter().zip(&lines_of) {
        for callee in rec.callees.iter().filter(|c| !known.contains(c)) {
            dangling.push(Diagnostic {
                line,
                kind: DiagnosticKind::DanglingCallee { id: rec.id.clone(), callee: callee.clone() },
            });
        }
    }
    out.diagnostics.extend(dangling);
    out.diagnostics.sort_by_key(|d| d.line);
    Ok(out)
}

/// Writes one JSON document per line.
pub fn write_jsonl<T: Serialize>(items: impl IntoIterator<Item = T>, mut w: impl Write) -> Result<(), CorpusError> {
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
