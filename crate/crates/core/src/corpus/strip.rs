use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::annotator::ApiSet;
use crate::fcg::FunctionId;
use crate::lexer::{self, LexError, TokenKind};

use super::FunctionRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripLevel {
    #[default]
    NotStripped,
    /// Only the function's own name is replaced.
    DemiStripped,
    /// Function names and every local identifier are replaced.
    AllStripped,
}

impl StripLevel {
    pub fn is_not_stripped(&self) -> bool {
        *self == StripLevel::NotStripped
    }
}

impl std::str::FromStr for StripLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" | "not" | "not_stripped" => Ok(StripLevel::NotStripped),
            "demi" | "demi_stripped" => Ok(StripLevel::DemiStripped),
            "all" | "all_stripped" => Ok(StripLevel::AllStripped),
            other => Err(format!("unknown strip level `{other}` (expected demi or all)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StripError {
    #[error("`{id}` is already {level:?}")]
    AlreadyStripped { id: FunctionId, level: StripLevel },
    #[error("requested strip level must be demi or all")]
    NoOpLevel,
    #[error("cannot lex body of `{id}`: {source}")]
    Lex { id: FunctionId, source: LexError },
}

/// Decompiler-style placeholder name `sub_XXXXXX` derived from `(seed, id)`.
pub fn stripped_name(seed: u64, id: &FunctionId) -> String {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(id.as_str().as_bytes());
    let d = h.finalize();
    format!("sub_{:02X}{:02X}{:02X}", d[0], d[1], d[2])
}

// Keywords, builtin and decompiler types, and helper macros: never renamed.
const RESERVED: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum", "extern",
    "float", "for", "goto", "if", "inline", "int", "long", "register", "restrict", "return", "short", "signed",
    "sizeof", "static", "struct", "switch", "typedef", "union", "unsigned", "void", "volatile", "while", "bool",
    "_Bool", "true", "false", "NULL", "nullptr", "this", "class", "new", "delete", "__fastcall", "__cdecl",
    "__stdcall", "__thiscall", "__usercall", "__userpurge", "__noreturn", "__int8", "__int16", "__int32",
    "__int64", "__int128", "_BYTE", "_WORD", "_DWORD", "_QWORD", "_OWORD", "_BOOL1", "_BOOL2", "_BOOL4",
    "_BOOL8", "_UNKNOWN", "BYTE", "WORD", "DWORD", "QWORD", "BOOL", "BOOLEAN", "CHAR", "WCHAR", "UCHAR", "INT",
    "UINT", "LONG", "ULONG", "LONGLONG", "ULONGLONG", "SHORT", "USHORT", "HANDLE", "HMODULE", "HINSTANCE",
    "HKEY", "HWND", "HINTERNET", "LPVOID", "LPCVOID", "PVOID", "LPSTR", "LPCSTR", "LPWSTR", "LPCWSTR",
    "LPDWORD", "LPBYTE", "SIZE_T", "SOCKET", "HRESULT", "NTSTATUS", "FARPROC", "size_t", "ssize_t",
    "uint8_t", "uint16_t", "uint32_t", "uint64_t", "int8_t", "int16_t", "int32_t", "int64_t", "uintptr_t",
    "intptr_t", "wchar_t", "char16_t", "char32_t", "LOBYTE", "HIBYTE", "LOWORD", "HIWORD", "LODWORD",
    "HIDWORD", "BYTE1", "BYTE2", "BYTE3", "SLOBYTE", "SHIBYTE", "SLOWORD", "SHIWORD", "SLODWORD", "SHIDWORD",
    "__readfsdword", "__readgsqword", "__ROL4__", "__ROR4__", "__ROL8__", "__ROR8__", "__PAIR64__",
    "__CFADD__", "__OFADD__", "__OFSUB__", "__SETP__", "qmemcpy", "JUMPOUT", "__debugbreak",
];

pub(crate) fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

/// Applies demi- or all-stripping with names derived from one seed.
///
/// Corpus function names (other than the record's own) are only rewritten by
/// all-stripping, using the callee's own `sub_` name so call sites stay
/// consistent across records.
#[derive(Debug, Clone)]
pub struct Stripper<'a> {
    seed: u64,
    apis: &'a ApiSet,
    functions: HashMap<String, FunctionId>,
}

impl<'a> Stripper<'a> {
    pub fn new(seed: u64, apis: &'a ApiSet, corpus: &[FunctionRecord]) -> Self {
        let mut functions = HashMap::new();
        for r in corpus {
            functions.entry(r.name.clone()).or_insert_with(|| r.id.clone());
        }
        Stripper { seed, apis, functions }
    }

    pub fn strip(&self, record: &FunctionRecord, level: StripLevel) -> Result<FunctionRecord, StripError> {
        if record.strip_level != StripLevel::NotStripped {
            return Err(StripError::AlreadyStripped { id: record.id.clone(), level: record.strip_level });
        }
        if level == StripLevel::NotStripped {
            return Err(StripError::NoOpLevel);
        }
        let tokens = lexer::lex(&record.body).map_err(|source| StripError::Lex { id: record.id.clone(), source })?;
        let own = stripped_name(self.seed, &record.id);
        let mut locals: BTreeMap<&str, String> = BTreeMap::new();
        let mut body = String::with_capacity(record.body.len() + 16);
        let mut last = 0;

        for t in tokens.iter().filter(|t| t.kind == TokenKind::Ident) {
            let replacement = if t.text == record.name {
                Some(own.clone())
            } else if level == StripLevel::DemiStripped || is_reserved(t.text) || self.apis.contains(t.text) {
                None
            } else if let Some(callee) = self.functions.get(t.text) {
                Some(stripped_name(self.seed, callee))
            } else {
                let next = locals.len() + 1;
                Some(locals.entry(t.text).or_insert_with(|| format!("v{next}")).clone())
            };
            if let Some(new) = replacement {
                body.push_str(&record.body[last..t.offset]);
                body.push_str(&new);
                last = t.end();
            }
        }
        body.push_str(&record.body[last..]);

        Ok(FunctionRecord {
            id: record.id.clone(),
            name: own,
            body,
            callees: record.callees.clone(),
            summary: record.summary.clone(),
            strip_level: level,
        })
    }
}
