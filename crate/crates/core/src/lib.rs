//! Call-graph ordered summarization of decompiled pseudocode.
//!
//! The crate is split along the pipeline:
//!
//! * [`fcg`] parses function call graphs and computes the callee-first
//!   processing order.
//! * [`corpus`] loads function records, filters and strips them, and builds
//!   the token-label and sentence-pair datasets.
//! * [`annotator`] derives static annotations (API calls, significant strings,
//!   retrieved context) and dynamic annotations (callee summaries).
//! * [`summarize`] drives the iterative pipeline over a pluggable backend.
//! * [`evalkit`] holds the similarity metrics and the score-label mathematics.
//!
//! Metric code is generic over the floating point type (see [`num::Scalar`]);
//! the aliases at the crate root fix it to `f64`.

pub mod annotator;
pub mod corpus;
pub mod evalkit;
pub mod fcg;
pub mod lexer;
pub mod num;
pub mod summarize;

pub use fcg::{CallGraph, FunctionId, ProcessingList};
pub use num::Scalar;

/// Metric parameters over `f64`.
pub type MetricParams = evalkit::MetricParams<f64>;
/// Per-pair metric report over `f64`.
pub type MetricReport = evalkit::MetricReport<f64>;
/// Corpus-level evaluation report over `f64`.
pub type CorpusReport = evalkit::CorpusReport<f64>;
/// Sentence pair with an `f64` score label.
pub type EvasPair = corpus::EvasPair<f64>;
