//! C-like lexer for decompiler pseudocode.
//!
//! Produces identifiers, pp-numbers, string and char literals (quotes and
//! encoding prefix included), and operators/punctuation. Comments and
//! whitespace are dropped. Every token keeps its byte offset so callers can
//! rewrite the source in place.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Char,
    Punct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    /// Byte offset of the first character in the source.
    pub offset: usize,
}

impl Token<'_> {
    pub fn end(&self) -> usize {
        self.offset + self.text.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unterminated string literal starting at byte offset {offset}")]
    UnterminatedString { offset: usize },
    #[error("unterminated character literal starting at byte offset {offset}")]
    UnterminatedChar { offset: usize },
}

impl LexError {
    pub fn offset(&self) -> usize {
        match *self {
            LexError::UnterminatedString { offset } | LexError::UnterminatedChar { offset } => offset,
        }
    }
}

const PUNCT3: &[&str] = &["<<=", ">>=", "...", "->*"];
const PUNCT2: &[&str] = &[
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=",
    "&=", "|=", "^=", "::", "##",
];

const STRING_PREFIXES: &[&str] = &["L", "u8", "u", "U"];

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_nth(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat_while(&mut self, mut pred: impl FnMut(char) -> bool) {
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    /// Consumes a quoted literal whose opening quote is at the cursor.
    /// Returns false when the literal runs into a newline or the end of input.
    fn quoted(&mut self, quote: char) -> bool {
        self.bump();
        while let Some(c) = self.bump() {
            match c {
                '\\' => {
                    if self.bump().is_none() {
                        return false;
                    }
                }
                '\n' => return false,
                c if c == quote => return true,
                _ => {}
            }
        }
        false
    }
}

/// Splits `src` into tokens.
pub fn lex(src: &str) -> Result<Vec<Token<'_>>, LexError> {
    let mut cur = Cursor { src, pos: 0 };
    let mut out = Vec::new();

    while let Some(c) = cur.peek() {
        let start = cur.pos;
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let rest = cur.rest();
        if rest.starts_with("//") {
            cur.eat_while(|c| c != '\n');
            continue;
        }
        if let Some(body) = rest.strip_prefix("/*") {
            match body.find("*/") {
                Some(i) => cur.pos += 2 + i + 2,
                None => cur.pos = src.len(),
            }
            continue;
        }

        let kind = if c == '"' || c == '\'' {
            lex_quoted(&mut cur, c, start)?
        } else if is_ident_start(c) {
            cur.eat_while(is_ident_continue);
            let word = &src[start..cur.pos];
            match cur.peek() {
                Some(q @ ('"' | '\'')) if STRING_PREFIXES.contains(&word) => lex_quoted(&mut cur, q, start)?,
                _ => TokenKind::Ident,
            }
        } else if c.is_ascii_digit() || (c == '.' && cur.peek_nth(1).is_some_and(|d| d.is_ascii_digit())) {
            lex_number(&mut cur);
            TokenKind::Number
        } else {
            let len = PUNCT3
                .iter()
                .chain(PUNCT2)
                .find(|p| rest.starts_with(**p))
                .map_or(c.len_utf8(), |p| p.len());
            cur.pos += len;
            TokenKind::Punct
        };
        out.push(Token { kind, text: &src[start..cur.pos], offset: start });
    }
    Ok(out)
}

fn lex_quoted(cur: &mut Cursor<'_>, quote: char, start: usize) -> Result<TokenKind, LexError> {
    if cur.quoted(quote) {
        Ok(if quote == '"' { TokenKind::Str } else { TokenKind::Char })
    } else if quote == '"' {
        Err(LexError::UnterminatedString { offset: start })
    } else {
        Err(LexError::UnterminatedChar { offset: start })
    }
}

fn lex_number(cur: &mut Cursor<'_>) {
    let mut prev = '\0';
    while let Some(c) = cur.peek() {
        let exponent_sign = (c == '+' || c == '-') && matches!(prev, 'e' | 'E' | 'p' | 'P');
        if c.is_ascii_alphanumeric() || c == '_' || c == '.' || exponent_sign {
            cur.bump();
            prev = c;
        } else {
            break;
        }
    }
}

/// Strips the encoding prefix and surrounding quotes of a string or char
/// literal. Escapes are left as written.
pub fn literal_contents(text: &str) -> &str {
    let Some(open) = text.find(['"', '\'']) else {
        return text;
    };
    let inner = &text[open + 1..];
    inner.strip_suffix(['"', '\'']).unwrap_or(inner)
}

/// True when `{}`, `()` and `[]` nest properly across the token stream.
pub fn delimiters_balanced(tokens: &[Token<'_>]) -> bool {
    let mut stack = Vec::new();
    for t in tokens.iter().filter(|t| t.kind == TokenKind::Punct) {
        match t.text {
            "{" | "(" | "[" => stack.push(t.text),
            "}" | ")" | "]" => {
                let want = match t.text {
                    "}" => "{",
                    ")" => "(",
                    _ => "[",
                };
                if stack.pop() != Some(want) {
                    return false;
                }
            }
            _ => {}
        }
    }
    stack.is_empty()
}
