//! Static and dynamic annotation of pseudocode functions.
//!
//! Static annotation labels API calls and significant strings, then pulls
//! related code context from an offline retrieval index. Dynamic annotation
//! attaches the summaries of already-processed callees. [`annotate`] renders
//! both as a comment block appended to the body.

mod knowledge;
mod labeler;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::corpus::{tokenize_pseudocode, FunctionRecord, Label, LabeledToken};
use crate::fcg::FunctionId;
use crate::lexer::{self, LexError};

pub use knowledge::{ApiDocs, ApiSet, KnowledgeError, RankedSnippet, RetrievalKb};
pub use labeler::{label_tokens, string_significance, RuleLabeler, SequenceLabeler, StringKind, MIN_STRING_CHARS};

/// Retrieved snippets kept per query and per function.
pub const MAX_RETRIEVED: usize = 3;
/// Snippets with fewer tokens are dropped.
pub const MIN_SNIPPET_TOKENS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotateError {
    #[error("cannot tokenize body of `{id}`: {source}")]
    Lex { id: FunctionId, source: LexError },
    #[error("labels for `{id}` do not align with its tokens ({labels} labels, {tokens} tokens)")]
    Alignment { id: FunctionId, labels: usize, tokens: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiNote {
    pub api: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringNote {
    /// The literal as written, quotes included.
    pub literal: String,
    pub kind: StringKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StaticAnnotation {
    pub api_notes: Vec<ApiNote>,
    pub string_notes: Vec<StringNote>,
    /// At most [`MAX_RETRIEVED`] snippets.
    pub retrieved: Vec<String>,
}

impl StaticAnnotation {
    pub fn is_empty(&self) -> bool {
        self.api_notes.is_empty() && self.string_notes.is_empty() && self.retrieved.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DynamicAnnotation {
    pub callee_summaries: Vec<(FunctionId, String)>,
}

impl DynamicAnnotation {
    pub fn is_empty(&self) -> bool {
        self.callee_summaries.is_empty()
    }
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Drops short, unbalanced and repeated snippets, keeping order.
pub fn filter_snippets<S: AsRef<str>>(snippets: &[S]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    snippets
        .iter()
        .map(AsRef::as_ref)
        .filter(|s| match lexer::lex(s) {
            Ok(tokens) => tokens.len() >= MIN_SNIPPET_TOKENS && lexer::delimiters_balanced(&tokens),
            Err(_) => false,
        })
        .filter(|s| seen.insert(s.to_string()))
        .map(str::to_owned)
        .collect()
}

/// Top [`MAX_RETRIEVED`] snippets for `identifier` by rank, filtered.
pub fn retrieve(identifier: &str, kb: &RetrievalKb) -> Vec<String> {
    let top: Vec<&str> = kb.get(identifier).iter().take(MAX_RETRIEVED).map(|s| s.snippet.as_str()).collect();
    filter_snippets(&top)
}

/// Builds the static annotation from labels aligned with the body's tokens.
pub fn compose_static(
    record: &FunctionRecord,
    labels: &[LabeledToken],
    kb: &RetrievalKb,
    docs: &ApiDocs,
) -> Result<StaticAnnotation, AnnotateError> {
    let tokens = tokenize_pseudocode(&record.body).map_err(|source| AnnotateError::Lex { id: record.id.clone(), source })?;
    if tokens.len() != labels.len() || tokens.iter().zip(labels).any(|(t, l)| *t != l.text) {
        return Err(AnnotateError::Alignment { id: record.id.clone(), labels: labels.len(), tokens: tokens.len() });
    }

    let mut out = StaticAnnotation::default();
    let mut apis_seen = BTreeSet::new();
    let mut strings_seen = BTreeSet::new();
    for t in labels {
        match t.label {
            Label::ApiCall if apis_seen.insert(t.text.as_str()) => out.api_notes.push(ApiNote {
                api: t.text.clone(),
                description: docs.get(&t.text).unwrap_or(&t.text).to_owned(),
            }),
            Label::StringLit if strings_seen.insert(t.text.as_str()) => out.string_notes.push(StringNote {
                literal: t.text.clone(),
                kind: string_significance(&t.text).unwrap_or(StringKind::Text),
            }),
            _ => {}
        }
    }

    let body_key = normalize_ws(&record.body);
    for note in &out.api_notes {
        for snippet in retrieve(&note.api, kb) {
            if out.retrieved.len() == MAX_RETRIEVED {
                break;
            }
            if !out.retrieved.contains(&snippet) && normalize_ws(&snippet) != body_key {
                out.retrieved.push(snippet);
            }
        }
    }
    Ok(out)
}

/// Summaries of the record's callees that are already known, in callee order.
pub fn compose_dynamic(record: &FunctionRecord, summaries: &BTreeMap<FunctionId, String>) -> DynamicAnnotation {
    let mut seen = BTreeSet::new();
    let callee_summaries = record
        .callees
        .iter()
        .filter(|c| seen.insert(*c))
        .filter_map(|c| summaries.get(c).map(|s| (c.clone(), s.clone())))
        .collect();
    DynamicAnnotation { callee_summaries }
}

pub const API_PREFIX: &str = "/* API: ";
pub const STR_PREFIX: &str = "/* STR: ";
pub const CTX_PREFIX: &str = "/* CTX: ";
pub const CALLEE_PREFIX: &str = "/* CALLEE ";
const LINE_END: &str = " */";

/// Collapses whitespace to single spaces and defuses comment terminators.
fn one_line(text: &str) -> String {
    normalize_ws(text).replace("*/", "* /")
}

/// Body followed by a blank line and one comment line per note, in the
/// order API, STR, CTX, CALLEE. Empty annotations return the body as is.
pub fn annotate(record: &FunctionRecord, static_ann: &StaticAnnotation, dynamic_ann: &DynamicAnnotation) -> String {
    if static_ann.is_empty() && dynamic_ann.is_empty() {
        return record.body.clone();
    }
    let mut out = record.body.trim_end_matches(['\n', '\r']).to_owned();
    out.push_str("\n\n");
    for n in &static_ann.api_notes {
        let line = if n.description == n.api {
            format!("{API_PREFIX}{}{LINE_END}\n", n.api)
        } else {
            format!("{API_PREFIX}{}: {}{LINE_END}\n", n.api, one_line(&n.description))
        };
        out.push_str(&line);
    }
    for n in &static_ann.string_notes {
        out.push_str(&format!("{STR_PREFIX}{} ({}){LINE_END}\n", one_line(&n.literal), n.kind.describe()));
    }
    for s in &static_ann.retrieved {
        out.push_str(&format!("{CTX_PREFIX}{}{LINE_END}\n", one_line(s)));
    }
    for (id, s) in &dynamic_ann.callee_summaries {
        out.push_str(&format!("{CALLEE_PREFIX}{id}: {}{LINE_END}\n", one_line(s)));
    }
    out
}

/// Notes recovered from a rendered annotation block.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedBlock {
    pub apis: Vec<String>,
    pub strings: Vec<String>,
    pub contexts: Vec<String>,
    pub callees: Vec<(String, String)>,
}

impl ParsedBlock {
    pub fn is_empty(&self) -> bool {
        self.apis.is_empty() && self.strings.is_empty() && self.contexts.is_empty() && self.callees.is_empty()
    }
}

fn is_note_line(line: &str) -> bool {
    line.ends_with(LINE_END) && [API_PREFIX, STR_PREFIX, CTX_PREFIX, CALLEE_PREFIX].iter().any(|p| line.starts_with(p))
}

/// Reads back the block produced by [`annotate`]. Only the trailing block
/// after the last blank line is considered, so comments inside the body are
/// never mistaken for notes.
pub fn parse_annotation_block(annotated: &str) -> ParsedBlock {
    let mut out = ParsedBlock::default();
    let Some(split) = annotated.rfind("\n\n") else {
        return out;
    };
    let block = &annotated[split + 2..];
    let lines: Vec<&str> = block.lines().collect();
    if lines.is_empty() || !lines.iter().all(|l| is_note_line(l)) {
        return out;
    }
    for line in lines {
        let inner = |prefix: &str| line[prefix.len()..line.len() - LINE_END.len()].to_owned();
        if line.starts_with(API_PREFIX) {
            let rest = inner(API_PREFIX);
            let name = rest.split_once(": ").map_or(rest.as_str(), |(n, _)| n);
            out.apis.push(name.to_owned());
        } else if line.starts_with(STR_PREFIX) {
            let rest = inner(STR_PREFIX);
            let literal = rest.rsplit_once(" (").map_or(rest.as_str(), |(l, _)| l);
            out.strings.push(literal.to_owned());
        } else if line.starts_with(CTX_PREFIX) {
            out.contexts.push(inner(CTX_PREFIX));
        } else {
            let rest = inner(CALLEE_PREFIX);
            if let Some((id, summary)) = rest.split_once(": ") {
                out.callees.push((id.to_owned(), summary.to_owned()));
            }
        }
    }
    out
}
