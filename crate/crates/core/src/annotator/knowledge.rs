use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KnowledgeError {
    #[error("invalid knowledge-base JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("`{key}` has two snippets with rank {rank}")]
    DuplicateRank { key: String, rank: i64 },
    #[error("`{key}` has an empty snippet")]
    EmptySnippet { key: String },
}

/// Names of known external APIs, one identifier per line in its file form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ApiSet {
    names: BTreeSet<String>,
}

impl ApiSet {
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ApiSet { names: names.into_iter().map(Into::into).collect() }
    }

    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        Self::from_names(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_owned),
        )
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct RankedSnippet {
    pub snippet: String,
    pub rank: i64,
}

/// Offline code-search index: identifier → snippets ordered by rank.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RetrievalKb {
    entries: BTreeMap<String, Vec<RankedSnippet>>,
}

impl RetrievalKb {
    /// Sorts each key's snippets by rank; repeated ranks and empty snippets
    /// are rejected.
    pub fn new(entries: BTreeMap<String, Vec<RankedSnippet>>) -> Result<Self, KnowledgeError> {
        let mut entries = entries;
        for (key, list) in &mut entries {
            list.sort_by_key(|s| s.rank);
            if let Some(w) = list.windows(2).find(|w| w[0].rank == w[1].rank) {
                return Err(KnowledgeError::DuplicateRank { key: key.clone(), rank: w[0].rank });
            }
            if list.iter().any(|s| s.snippet.trim().is_empty()) {
                return Err(KnowledgeError::EmptySnippet { key: key.clone() });
            }
        }
        Ok(RetrievalKb { entries })
    }

    /// Parses `{identifier: [{"snippet": ..., "rank": ...}]}`.
    pub fn from_json(text: &str) -> Result<Self, KnowledgeError> {
        Self::new(serde_json::from_str(text)?)
    }

    /// Snippets for `key` in ascending rank order.
    pub fn get(&self, key: &str) -> &[RankedSnippet] {
        self.entries.get(key).map_or(&[], Vec::as_slice)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DocEntry {
    Text(String),
    Ranked(Vec<RankedSnippet>),
}

/// API descriptions. The file uses the knowledge-base layout and the
/// best-ranked snippet is the description; a bare string is also accepted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ApiDocs {
    docs: BTreeMap<String, String>,
}

impl ApiDocs {
    pub fn from_json(text: &str) -> Result<Self, KnowledgeError> {
        let raw: BTreeMap<String, DocEntry> = serde_json::from_str(text)?;
        let mut docs = BTreeMap::new();
        for (key, entry) in raw {
            let text = match entry {
                DocEntry::Text(t) => Some(t),
                DocEntry::Ranked(list) => list.into_iter().min_by_key(|s| s.rank).map(|s| s.snippet),
            };
            if let Some(t) = text.filter(|t| !t.trim().is_empty()) {
                docs.insert(key, t);
            }
        }
        Ok(ApiDocs { docs })
    }

    pub fn from_pairs<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        ApiDocs { docs: pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect() }
    }

    pub fn get(&self, api: &str) -> Option<&str> {
        self.docs.get(api).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn api_set_file() {
        let set = ApiSet::parse("# winapi\nCreateFileA\n\n  WriteFile  \n");
        assert_eq!(set.len(), 2);
        assert!(set.contains("WriteFile"));
        assert!(!set.contains("# winapi"));
    }

    #[test]
    fn kb_sorted_and_validated() {
        let kb = RetrievalKb::from_json(r#"{"f": [{"snippet": "b", "rank": 2}, {"snippet": "a", "rank": 1}]}"#).unwrap();
        assert_eq!(kb.get("f")[0].snippet, "a");
        assert!(kb.get("missing").is_empty());

        let dup = RetrievalKb::from_json(r#"{"f": [{"snippet": "b", "rank": 1}, {"snippet": "a", "rank": 1}]}"#);
        assert!(matches!(dup, Err(KnowledgeError::DuplicateRank { rank: 1, .. })));
        let empty = RetrievalKb::from_json(r#"{"f": [{"snippet": " ", "rank": 1}]}"#);
        assert!(matches!(empty, Err(KnowledgeError::EmptySnippet { .. })));
        assert!(matches!(RetrievalKb::from_json("[]"), Err(KnowledgeError::Json(_))));
    }

    #[test]
    fn docs_both_shapes() {
        let docs = ApiDocs::from_json(
            r#"{"CreateFileA": [{"snippet": "second", "rank": 5}, {"snippet": "Creates or opens a file.", "rank": 0}],
                "Sleep": "Suspends the thread."}"#,
        )
        .unwrap();
        assert_eq!(docs.get("CreateFileA"), Some("Creates or opens a file."));
        assert_eq!(docs.get("Sleep"), Some("Suspends the thread."));
        assert_eq!(docs.get("nope"), None);
    }
}
