use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotator::{
    annotate, compose_dynamic, compose_static, label_tokens, ApiDocs, ApiSet, RetrievalKb, StaticAnnotation,
};
use crate::corpus::{tokenize_pseudocode, FunctionRecord};
use crate::fcg::{resort, CallGraph, FunctionId, GraphError, ProcessingList};

use super::{SummarizerBackend, DEFAULT_BUDGET};

/// Stored for functions whose backend call failed.
pub const PLACEHOLDER_SUMMARY: &str = "summary unavailable";

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub budget: usize,
    pub apis: ApiSet,
    pub kb: RetrievalKb,
    pub docs: ApiDocs,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            budget: DEFAULT_BUDGET,
            apis: ApiSet::default(),
            kb: RetrievalKb::default(),
            docs: ApiDocs::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("graph vertices missing from the corpus: {}", join_ids(.0))]
    DanglingVertices(Vec<FunctionId>),
    #[error("summary budget must be at least one word")]
    ZeroBudget,
}

fn join_ids(ids: &[FunctionId]) -> String {
    ids.iter().map(FunctionId::as_str).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

/// One line of the exported transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub id: FunctionId,
    pub input: String,
    pub summary: String,
    pub elapsed_ms: u64,
    pub status: Status,
    /// Length of the body in lexer tokens; long functions are passed whole.
    pub input_tokens: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub order: ProcessingList,
    /// Every processed function, placeholders included.
    pub summaries: BTreeMap<FunctionId, String>,
    pub transcript: Vec<TranscriptEntry>,
}

impl PipelineRun {
    pub fn failed(&self) -> usize {
        self.transcript.iter().filter(|e| e.status == Status::Failed).count()
    }
}

/// Call graph over the corpus's own functions. Calls to ids outside the
/// corpus are external and left out.
pub fn graph_from_corpus(records: &[FunctionRecord]) -> Result<CallGraph, GraphError> {
    let ids: BTreeSet<&FunctionId> = records.iter().map(|r| &r.id).collect();
    let edges = records
        .iter()
        .flat_map(|r| r.callees.iter().filter(|c| ids.contains(c)).map(|c| (r.id.clone(), c.clone())));
    CallGraph::new(ids.iter().map(|&id| id.clone()), edges.collect::<Vec<_>>(), None)
}

/// Summarizes every graph vertex callee-first.
///
/// A function's callees are its record's list followed by any further graph
/// successors. Failed backend calls leave a placeholder in `summaries` that is
/// never shown to callers.
pub fn run_pipeline(
    records: &[FunctionRecord],
    graph: &CallGraph,
    backend: &mut dyn SummarizerBackend,
    config: &PipelineConfig,
) -> Result<PipelineRun, PipelineError> {
    if config.budget == 0 {
        return Err(PipelineError::ZeroBudget);
    }
    let mut by_id: BTreeMap<&FunctionId, &FunctionRecord> = BTreeMap::new();
    for r in records {
        by_id.entry(&r.id).or_insert(r);
    }
    let missing: Vec<FunctionId> = graph.vertices().iter().filter(|v| !by_id.contains_key(v)).cloned().collect();
    if !missing.is_empty() {
        return Err(PipelineError::DanglingVertices(missing));
    }

    let order = resort(graph);
    let timed = !backend.deterministic();
    let mut committed: BTreeMap<FunctionId, String> = BTreeMap::new();
    let mut summaries = BTreeMap::new();
    let mut transcript = Vec::with_capacity(order.len());

    for id in order.iter() {
        let mut record = by_id[id].clone();
        for c in graph.callees(id.as_str()) {
            if !record.callees.contains(c) {
                record.callees.push(c.clone());
            }
        }

        let (static_ann, input_tokens) = match tokenize_pseudocode(&record.body) {
            Ok(tokens) => {
                let labels = label_tokens(&tokens, &config.apis);
                let ann = compose_static(&record, &labels, &config.kb, &config.docs).unwrap_or_else(|e| {
                    log::warn!("{e}");
                    StaticAnnotation::default()
                });
                (ann, tokens.len())
            }
            Err(e) => {
                log::warn!("cannot tokenize `{id}`: {e}; static annotation skipped");
                (StaticAnnotation::default(), record.body.split_whitespace().count())
            }
        };
        let dynamic_ann = compose_dynamic(&record, &committed);
        let input = annotate(&record, &static_ann, &dynamic_ann);

        let start = Instant::now();
        let result = backend.summarize(&input, config.budget);
        let elapsed_ms = if timed { start.elapsed().as_millis() as u64 } else { 0 };

        let (summary, status, error) = match result {
            Ok(s) if !s.trim().is_empty() => {
                committed.insert(id.clone(), s.clone());
                (s, Status::Ok, None)
            }
            Ok(_) => (PLACEHOLDER_SUMMARY.to_owned(), Status::Failed, Some("backend returned an empty summary".into())),
            Err(e) => {
                log::warn!("summarizing `{id}` failed: {e}");
                (PLACEHOLDER_SUMMARY.to_owned(), Status::Failed, Some(e.to_string()))
            }
        };
        summaries.insert(id.clone(), summary.clone());
        transcript.push(TranscriptEntry { id: id.clone(), input, summary, elapsed_ms, status, input_tokens, error });
    }

    Ok(PipelineRun { order, summaries, transcript })
}

#[cfg(test)]
mod tests {
    use super::super::{BackendError, MockBackend};
    use super::*;

    struct Failing;

    impl SummarizerBackend for Failing {
        fn summarize(&mut self, _: &str, _: usize) -> Result<String, BackendError> {
            Err(BackendError::Transport("down".into()))
        }
    }

    fn chain() -> (Vec<FunctionRecord>, CallGraph) {
        let records = vec![
            FunctionRecord::new("main", "main", "int main() {\n  f();\n}\n").with_callees(["f"]),
            FunctionRecord::new("f", "f", "void f() {\n  g();\n  Sleep(5);\n}\n").with_callees(["g"]),
            FunctionRecord::new("g", "g", "void g() {\n  puts(\"hello there\");\n}\n"),
        ];
        let g = graph_from_corpus(&records).unwrap();
        (records, g)
    }

    #[test]
    fn chain_is_callee_first() {
        let (records, g) = chain();
        let cfg = PipelineConfig { apis: ApiSet::from_names(["Sleep"]), ..Default::default() };
        let run = run_pipeline(&records, &g, &mut MockBackend, &cfg).unwrap();
        let ids: Vec<&str> = run.transcript.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["g", "f", "main"]);
        assert!(run.transcript[1].input.contains("/* CALLEE g: "));
        assert!(run.transcript[2].input.contains("/* CALLEE f: "));
        assert!(!run.transcript[0].input.contains("CALLEE"));
        assert_eq!(run.transcript[0].summary, "uses \"hello there\"");
        assert_eq!(run.transcript[1].summary, "calls Sleep; relies on callees: uses \"hello there\"");
        assert!(run.transcript.iter().all(|e| e.elapsed_ms == 0 && e.status == Status::Ok));
    }

    #[test]
    fn single_function() {
        let records = vec![FunctionRecord::new("solo", "solo", "int solo() {\n  return 0;\n}\n")];
        let g = graph_from_corpus(&records).unwrap();
        let run = run_pipeline(&records, &g, &mut MockBackend, &PipelineConfig::default()).unwrap();
        assert_eq!(run.transcript.len(), 1);
        assert_eq!(run.transcript[0].input, records[0].body);
        assert_eq!(run.transcript[0].input_tokens, 9);
    }

    #[test]
    fn failures_degrade() {
        let (records, g) = chain();
        let run = run_pipeline(&records, &g, &mut Failing, &PipelineConfig::default()).unwrap();
        assert_eq!(run.failed(), 3);
        assert!(run.summaries.values().all(|s| s == PLACEHOLDER_SUMMARY));
        assert!(run.transcript.iter().all(|e| !e.input.contains("CALLEE")));
    }

    #[test]
    fn dangling_vertex_rejected() {
        let (records, _) = chain();
        let g = CallGraph::new(["main".into(), "ghost".into()], [("main".into(), "ghost".into())], None).unwrap();
        let err = run_pipeline(&records, &g, &mut MockBackend, &PipelineConfig::default()).unwrap_err();
        assert!(matches!(&err, PipelineError::DanglingVertices(v) if v == &[FunctionId::from("ghost")]));
        assert!(err.to_string().contains("ghost"));
    }

    #[test]
    fn graph_edges_count_as_callees() {
        let records = vec![
            FunctionRecord::new("a", "a", "void a() { b(); }"),
            FunctionRecord::new("b", "b", "void b() { }"),
        ];
        let g = CallGraph::new(["a".into(), "b".into()], [("a".into(), "b".into())], None).unwrap();
        let run = run_pipeline(&records, &g, &mut MockBackend, &PipelineConfig::default()).unwrap();
        assert!(run.transcript[1].input.contains("/* CALLEE b: performs internal computation */"));
    }

    #[test]
    fn two_cycle_omits_unfinished_callee() {
        let records = vec![
            FunctionRecord::new("x", "x", "void x() { y(); }").with_callees(["y"]),
            FunctionRecord::new("y", "y", "void y() { x(); }").with_callees(["x"]),
        ];
        let g = graph_from_corpus(&records).unwrap();
        let run = run_pipeline(&records, &g, &mut MockBackend, &PipelineConfig::default()).unwrap();
        assert_eq!(run.transcript.len(), 2);
        assert!(!run.transcript[0].input.contains("CALLEE"));
        assert!(run.transcript[1].input.contains("CALLEE"));
    }
}
