use std::collections::HashMap;
use std::fmt;

use crate::fcg::FunctionId;
use crate::lexer;

use super::FunctionRecord;

/// Bodies with fewer lines than this are dropped.
pub const MIN_LINES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    TooShort { lines: usize },
    /// Unbalanced delimiters or an unterminated literal.
    Malformed(String),
    /// Same body, up to whitespace, as an earlier kept record.
    Duplicate { of: FunctionId },
}

impl RejectReason {
    pub fn name(&self) -> &'static str {
        match self {
            RejectReason::TooShort { .. } => "TooShort",
            RejectReason::Malformed(_) => "Malformed",
            RejectReason::Duplicate { .. } => "Duplicate",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::TooShort { lines } => write!(f, "{lines} line(s), need at least {MIN_LINES}"),
            RejectReason::Malformed(why) => f.write_str(why),
            RejectReason::Duplicate { of } => write!(f, "duplicate of `{of}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejected {
    pub record: FunctionRecord,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterOutcome {
    pub kept: Vec<FunctionRecord>,
    pub rejected: Vec<Rejected>,
}

fn normalize_ws(body: &str) -> String {
    body.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn check_format(body: &str) -> Option<String> {
    match lexer::lex(body) {
        Err(e) => Some(e.to_string()),
        Ok(tokens) if !lexer::delimiters_balanced(&tokens) => Some("unbalanced delimiters".to_owned()),
        Ok(_) => None,
    }
}

/// Drops short, malformed and repeated functions. Checks run in that order;
/// the first copy of a duplicated body is the one kept.
pub fn filter_corpus(records: Vec<FunctionRecord>) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    let mut seen: HashMap<String, FunctionId> = HashMap::new();
    for record in records {
        let lines = record.body.lines().count();
        let reason = if lines < MIN_LINES {
            Some(RejectReason::TooShort { lines })
        } else if let Some(why) = check_format(&record.body) {
            Some(RejectReason::Malformed(why))
        } else {
            let key = normalize_ws(&record.body);
            match seen.get(&key) {
                Some(first) => Some(RejectReason::Duplicate { of: first.clone() }),
                None => {
                    seen.insert(key, record.id.clone());
                    None
                }
            }
        };
        match reason {
            Some(reason) => out.rejected.push(Rejected { record, reason }),
            None => out.kept.push(record),
        }
    }
    out
}
