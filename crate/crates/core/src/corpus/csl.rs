use serde::{Deserialize, Serialize};

use crate::annotator::SequenceLabeler;
use crate::fcg::FunctionId;
use crate::lexer::LexError;

use super::{tokenize_pseudocode, FunctionRecord, Label};

/// One function of the token-label corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CslEntry {
    pub tokens: Vec<String>,
    pub labels: Vec<Label>,
}

/// Tokenizes and labels every record. Records whose body does not lex are
/// returned separately.
pub fn build_csl(
    records: &[FunctionRecord],
    labeler: &dyn SequenceLabeler,
) -> (Vec<CslEntry>, Vec<(FunctionId, LexError)>) {
    let mut entries = Vec::with_capacity(records.len());
    let mut failures = Vec::new();
    for r in records {
        match tokenize_pseudocode(&r.body) {
            Ok(tokens) => {
                let labels = labeler.label(&tokens).into_iter().map(|t| t.label).collect();
                entries.push(CslEntry { tokens, labels });
            }
            Err(e) => failures.push((r.id.clone(), e)),
        }
    }
    (entries, failures)
}
