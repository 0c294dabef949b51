//! Summarizer backends and the iterative pipeline driver.

mod http;
mod pipeline;

use thiserror::Error;

use crate::annotator::parse_annotation_block;

pub use http::{HttpBackend, HttpConfig, DEFAULT_BACKOFF, INSTRUCTION};
pub use pipeline::{
    graph_from_corpus, run_pipeline, PipelineConfig, PipelineError, PipelineRun, Status, TranscriptEntry,
    PLACEHOLDER_SUMMARY,
};

/// Default summary budget in words.
pub const DEFAULT_BUDGET: usize = 40;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("protocol error: {0}")]
    Protocol(String),
}

/// Something that turns annotated pseudocode into one summary sentence.
///
/// Implementations return a single non-empty line of at most `budget` words.
pub trait SummarizerBackend {
    fn summarize(&mut self, annotated: &str, budget: usize) -> Result<String, BackendError>;

    /// True when output depends only on the input. Pipelines record zero
    /// elapsed time for such backends so transcripts are reproducible.
    fn deterministic(&self) -> bool {
        false
    }
}

impl<B: SummarizerBackend + ?Sized> SummarizerBackend for Box<B> {
    fn summarize(&mut self, annotated: &str, budget: usize) -> Result<String, BackendError> {
        (**self).summarize(annotated, budget)
    }

    fn deterministic(&self) -> bool {
        (**self).deterministic()
    }
}

/// Keeps the first `budget` words (at least one) on a single line.
pub fn truncate_words(text: &str, budget: usize) -> String {
    text.split_whitespace().take(budget.max(1)).collect::<Vec<_>>().join(" ")
}

pub const FALLBACK_SUMMARY: &str = "performs internal computation";

/// Extractive summary built from the annotation block alone.
pub fn mock_summarize(annotated: &str, budget: usize) -> String {
    let block = parse_annotation_block(annotated);
    let mut parts = Vec::new();
    if !block.apis.is_empty() {
        parts.push(format!("calls {}", block.apis.join(", ")));
    }
    if !block.strings.is_empty() {
        parts.push(format!("uses {}", block.strings.join(", ")));
    }
    if !block.callees.is_empty() {
        let heads: Vec<String> = block.callees.iter().map(|(_, s)| truncate_words(s, 4)).collect();
        parts.push(format!("relies on callees: {}", heads.join(", ")));
    }
    if parts.is_empty() {
        return truncate_words(FALLBACK_SUMMARY, budget);
    }
    truncate_words(&parts.join("; "), budget)
}

/// Deterministic stand-in for a summarization model.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockBackend;

impl SummarizerBackend for MockBackend {
    fn summarize(&mut self, annotated: &str, budget: usize) -> Result<String, BackendError> {
        Ok(mock_summarize(annotated, budget))
    }

    fn deterministic(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_mentions_api() {
        let s = mock_summarize("h = CreateFileA(p);\n\n/* API: CreateFileA: Creates a file. */\n", 40);
        assert_eq!(s, "calls CreateFileA");
    }

    #[test]
    fn mock_fallback_and_purity() {
        let body = "int f() {\n  return 1;\n}\n";
        assert_eq!(mock_summarize(body, 40), FALLBACK_SUMMARY);
        assert_eq!(mock_summarize(body, 40), mock_summarize(body, 40));
        assert_eq!(mock_summarize(body, 2), "performs internal");
    }

    #[test]
    fn mock_full_template() {
        let text = "x\n\n/* API: Sleep */\n/* API: ExitProcess */\n/* STR: \"cmd.exe\" (path) */\n\
                    /* CALLEE g: opens the config file for reading */\n/* CALLEE h: exits */\n";
        assert_eq!(
            mock_summarize(text, 40),
            "calls Sleep, ExitProcess; uses \"cmd.exe\"; relies on callees: opens the config file, exits"
        );
        assert_eq!(mock_summarize(text, 3), "calls Sleep, ExitProcess;");
    }

    #[test]
    fn truncation_is_single_line() {
        assert_eq!(truncate_words("a\r\nb\n c", 10), "a b c");
        assert_eq!(truncate_words("a b", 0), "a");
    }
}
