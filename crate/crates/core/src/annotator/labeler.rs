use std::sync::LazyLock;

use regex::Regex;

use crate::corpus::{Label, LabeledToken};
use crate::lexer::literal_contents;

use super::ApiSet;

/// Assigns one label per token. Output length always equals input length.
pub trait SequenceLabeler {
    fn label(&self, tokens: &[String]) -> Vec<LabeledToken>;
}

/// Why a string literal counts as significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StringKind {
    Url,
    RegistryKey,
    Path,
    FormatString,
    Text,
}

impl StringKind {
    pub fn describe(self) -> &'static str {
        match self {
            StringKind::Url => "url",
            StringKind::RegistryKey => "registry key",
            StringKind::Path => "path",
            StringKind::FormatString => "format string",
            StringKind::Text => "string",
        }
    }
}

/// Shortest literal (in characters, escapes as written) kept without a
/// special pattern.
pub const MIN_STRING_CHARS: usize = 4;

static DRIVE_PATH: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Za-z]:[\\/]").unwrap());
static FORMAT_SPEC: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"%[-+ #0]*(\d+|\*)?(\.(\d+|\*))?(hh|h|ll|l|L|z|j|t|I64|I32)?[diouxXeEfgGcspSn]").unwrap()
});
static FILE_NAME: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[\w.-]+\.(exe|dll|sys|bat|cmd|ps1|vbs|js|tmp|dat|ini|log|txt)$").unwrap());

fn is_string_token(token: &str) -> bool {
    token.ends_with('"') && ["\"", "L\"", "u8\"", "u\"", "U\""].iter().any(|p| token.starts_with(p)) && token.len() >= 2
}

/// Classifies a string-literal token; `None` for non-strings and for short
/// literals matching no special pattern.
pub fn string_significance(token: &str) -> Option<StringKind> {
    if !is_string_token(token) {
        return None;
    }
    let body = literal_contents(token);
    let lower = body.to_ascii_lowercase();
    let kind = if lower.contains("://") || lower.starts_with("www.") {
        StringKind::Url
    } else if ["hkey_", "hklm", "hkcu", "software\\", "system\\currentcontrolset"].iter().any(|p| lower.starts_with(p)) {
        StringKind::RegistryKey
    } else if DRIVE_PATH.is_match(body) || body.starts_with('\\') || body.starts_with('/') || body.contains("\\\\") || FILE_NAME.is_match(&lower) {
        StringKind::Path
    } else if FORMAT_SPEC.is_match(body) {
        StringKind::FormatString
    } else if body.chars().count() >= MIN_STRING_CHARS {
        StringKind::Text
    } else {
        return None;
    };
    Some(kind)
}

fn is_identifier(token: &str) -> bool {
    let mut c = token.chars();
    c.next().is_some_and(|f| f.is_ascii_alphabetic() || f == '_' || f == '$')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '$')
}

/// Rule-based labeling against an API knowledge set.
pub fn label_tokens(tokens: &[String], apis: &ApiSet) -> Vec<LabeledToken> {
    tokens
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let called = tokens.get(i + 1).is_some_and(|n| n == "(");
            let label = if called && is_identifier(t) && apis.contains(t) {
                Label::ApiCall
            } else if string_significance(t).is_some() {
                Label::StringLit
            } else {
                Label::Normal
            };
            LabeledToken { text: t.clone(), label }
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct RuleLabeler {
    apis: ApiSet,
}

impl RuleLabeler {
    pub fn new(apis: ApiSet) -> Self {
        RuleLabeler { apis }
    }

    pub fn apis(&self) -> &ApiSet {
        &self.apis
    }
}

impl SequenceLabeler for RuleLabeler {
    fn label(&self, tokens: &[String]) -> Vec<LabeledToken> {
        label_tokens(tokens, &self.apis)
    }
}
