use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use super::{CallGraph, FunctionId, GraphError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Dot,
    Json,
}

impl GraphFormat {
    /// Guesses the format from a file extension (`.dot`/`.gv` or `.json`).
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "dot" | "gv" => Some(GraphFormat::Dot),
            "json" => Some(GraphFormat::Json),
            _ => None,
        }
    }
}

impl FromStr for GraphFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dot" => Ok(GraphFormat::Dot),
            "json" => Ok(GraphFormat::Json),
            other => Err(format!("unknown graph format `{other}` (expected dot or json)")),
        }
    }
}

/// Parses a call-graph document. A blank document is an empty graph.
pub fn parse_call_graph(input: &str, format: GraphFormat) -> Result<CallGraph, GraphError> {
    if input.trim().is_empty() {
        return CallGraph::new(Vec::new(), Vec::new(), None);
    }
    match format {
        GraphFormat::Json => parse_json(input),
        GraphFormat::Dot => parse_dot(input),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonGraph {
    vertices: Vec<FunctionId>,
    edges: Vec<(FunctionId, FunctionId)>,
    #[serde(default)]
    entries: Option<Vec<FunctionId>>,
}

fn parse_json(input: &str) -> Result<CallGraph, GraphError> {
    let doc: JsonGraph = serde_json::from_str(input).map_err(|e| GraphError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    CallGraph::new(doc.vertices, doc.edges, doc.entries)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Id(String),
    Arrow,
    UndirectedEdge,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Semi,
    Comma,
    Colon,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn dot_error(line: usize, column: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse { line, column, message: message.into() }
}

fn lex_dot(input: &str) -> Result<Vec<Spanned>, GraphError> {
    let chars: Vec<char> = input.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut at_line_start = true;

    macro_rules! advance {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
                at_line_start = true;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        if c.is_whitespace() {
            advance!();
            continue;
        }
        if (c == '#' && at_line_start) || (c == '/' && next == Some('/')) {
            while i < chars.len() && chars[i] != '\n' {
                advance!();
            }
            continue;
        }
        at_line_start = false;
        if c == '/' && next == Some('*') {
            let (l0, c0) = (line, col);
            advance!();
            advance!();
            loop {
                if i >= chars.len() {
                    return Err(dot_error(l0, c0, "unterminated comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance!();
                    advance!();
                    break;
                }
                advance!();
            }
            continue;
        }

        let (l0, c0) = (line, col);
        let simple = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '=' => Some(Tok::Eq),
            ';' => Some(Tok::Semi),
            ',' => Some(Tok::Comma),
            ':' => Some(Tok::Colon),
            _ => None,
        };
        if let Some(tok) = simple {
            advance!();
            out.push(Spanned { tok, line: l0, column: c0 });
            continue;
        }
        if c == '-' && next == Some('>') {
            advance!();
            advance!();
            out.push(Spanned { tok: Tok::Arrow, line: l0, column: c0 });
            continue;
        }
        if c == '-' && next == Some('-') {
            advance!();
            advance!();
            out.push(Spanned { tok: Tok::UndirectedEdge, line: l0, column: c0 });
            continue;
        }
        if c == '"' {
            advance!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(dot_error(l0, c0, "unterminated quoted identifier"));
                }
                let ch = chars[i];
                if ch == '"' {
                    advance!();
                    break;
                }
                if ch == '\\' && chars.get(i + 1) == Some(&'"') {
                    advance!();
                    s.push('"');
                    advance!();
                    continue;
                }
                if ch == '\\' && chars.get(i + 1) == Some(&'\n') {
                    advance!();
                    advance!();
                    continue;
                }
                s.push(ch);
                advance!();
            }
            out.push(Spanned { tok: Tok::Id(s), line: l0, column: c0 });
            continue;
        }
        if c.is_alphanumeric() || c == '_' || c == '.' || (c == '-' && next.is_some_and(|d| d.is_ascii_digit() || d == '.')) {
            let mut s = String::new();
            s.push(c);
            advance!();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                s.push(chars[i]);
                advance!();
            }
            out.push(Spanned { tok: Tok::Id(s), line: l0, column: c0 });
            continue;
        }
        return Err(dot_error(l0, c0, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

struct DotParser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
    vertices: Vec<FunctionId>,
    edges: Vec<(FunctionId, FunctionId)>,
    entries: Vec<FunctionId>,
}

fn keyword(tok: &Tok, kw: &str) -> bool {
    matches!(tok, Tok::Id(s) if s.eq_ignore_ascii_case(kw))
}

impl DotParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |s| (s.line, s.column))
    }

    fn err(&self, message: impl Into<String>) -> GraphError {
        let (line, column) = self.here();
        dot_error(line, column, message)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), GraphError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn id(&mut self, what: &str) -> Result<String, GraphError> {
        match self.peek() {
            Some(Tok::Id(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn graph(&mut self) -> Result<(), GraphError> {
        if self.peek().is_some_and(|t| keyword(t, "strict")) {
            self.pos += 1;
        }
        match self.peek() {
            Some(t) if keyword(t, "digraph") => self.pos += 1,
            Some(t) if keyword(t, "graph") => return Err(self.err("undirected graphs are not supported; use `digraph`")),
            _ => return Err(self.err("expected `digraph`")),
        }
        if matches!(self.peek(), Some(Tok::Id(_))) {
            self.pos += 1;
        }
        self.expect(Tok::LBrace, "`{`")?;
        loop {
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Semi) | Some(Tok::Comma) => self.pos += 1,
                None => return Err(self.err("expected `}` before end of input")),
                _ => self.statement()?,
            }
        }
        if self.pos < self.toks.len() {
            return Err(self.err("unexpected content after closing `}`"));
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), GraphError> {
        let head = self.peek().cloned();
        match head {
            Some(ref t) if keyword(t, "subgraph") => Err(self.err("subgraphs are not supported")),
            Some(ref t) if keyword(t, "graph") && self.peek_at(1) == Some(&Tok::LBracket) => {
                self.pos += 1;
                let attrs = self.attr_list()?;
                self.graph_attrs(attrs);
                Ok(())
            }
            Some(ref t) if (keyword(t, "node") || keyword(t, "edge")) && self.peek_at(1) == Some(&Tok::LBracket) => {
                self.pos += 1;
                self.attr_list()?;
                Ok(())
            }
            Some(Tok::Id(_)) if self.peek_at(1) == Some(&Tok::Eq) => {
                let key = self.id("attribute name")?;
                self.pos += 1;
                let value = self.id("attribute value")?;
                self.graph_attrs(vec![(key, value)]);
                Ok(())
            }
            Some(Tok::Id(_)) => {
                let mut chain = vec![self.node_id()?];
                loop {
                    match self.peek() {
                        Some(Tok::Arrow) => {
                            self.pos += 1;
                            chain.push(self.node_id()?);
                        }
                        Some(Tok::UndirectedEdge) => return Err(self.err("`--` is not allowed in a digraph")),
                        _ => break,
                    }
                }
                if self.peek() == Some(&Tok::LBracket) {
                    self.attr_list()?;
                }
                for w in chain.windows(2) {
                    self.edges.push((w[0].clone(), w[1].clone()));
                }
                self.vertices.extend(chain);
                Ok(())
            }
            _ => Err(self.err("expected a statement")),
        }
    }

    fn node_id(&mut self) -> Result<FunctionId, GraphError> {
        let id = self.id("node identifier")?;
        // ports (`a:p`, `a:p:n`) are accepted and ignored
        while self.peek() == Some(&Tok::Colon) {
            self.pos += 1;
            self.id("port")?;
        }
        Ok(FunctionId::new(id))
    }

    fn attr_list(&mut self) -> Result<Vec<(String, String)>, GraphError> {
        let mut attrs = Vec::new();
        while self.peek() == Some(&Tok::LBracket) {
            self.pos += 1;
            loop {
                match self.peek() {
                    Some(Tok::RBracket) => {
                        self.pos += 1;
                        break;
                    }
                    Some(Tok::Comma) | Some(Tok::Semi) => self.pos += 1,
                    Some(Tok::Id(_)) => {
                        let key = self.id("attribute name")?;
                        self.expect(Tok::Eq, "`=`")?;
                        let value = self.id("attribute value")?;
                        attrs.push((key, value));
                    }
                    _ => return Err(self.err("expected attribute or `]`")),
                }
            }
        }
        Ok(attrs)
    }

    fn graph_attrs(&mut self, attrs: Vec<(String, String)>) {
        for (k, v) in attrs {
            if k == "entry" {
                self.entries.push(FunctionId::new(v));
            }
        }
    }
}

fn parse_dot(input: &str) -> Result<CallGraph, GraphError> {
    let toks = lex_dot(input)?;
    let end = toks.last().map_or((1, 1), |t| (t.line, t.column + 1));
    let mut p = DotParser { toks, pos: 0, end, vertices: Vec::new(), edges: Vec::new(), entries: Vec::new() };
    p.graph()?;
    let entries = (!p.entries.is_empty()).then_some(p.entries);
    CallGraph::new(p.vertices, p.edges, entries)
}
