//! Lexer and recursive-descent parser for the plan-literal grammar.
//!
//! The grammar is a closed subset of Python literals: lists of tuples,
//! tuples, string-keyed dicts of tuples, ints, floats, strings and
//! `True`/`False`. The only identifiers are the assignment targets
//! `task_plan` / `evaluation_plan`. `#` starts a comment to end-of-line.

use std::fmt;

use super::PlanError;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// A literal value with Python-compatible equality and rendering.
#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Tuple(Vec<Literal>),
    Dict(Vec<(String, Literal)>),
}

impl fmt::Display for Literal {
    /// Renders the value the way Python's `repr` does.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(v) => write!(f, "{v}"),
            Literal::Float(v) => f.write_str(&py_float_repr(*v)),
            Literal::Str(s) => f.write_str(&py_str_repr(s)),
            Literal::Bool(true) => f.write_str("True"),
            Literal::Bool(false) => f.write_str("False"),
            Literal::Tuple(items) => f.write_str(&py_tuple_repr(items)),
            Literal::Dict(entries) => {
                f.write_str("{")?;
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}: {}", py_str_repr(k), v)?;
                }
                f.write_str("}")
            }
        }
    }
}

/// Python `repr` of a tuple: `()`, `(x,)`, `(x, y)`.
pub fn py_tuple_repr(items: &[Literal]) -> String {
    match items {
        [] => "()".to_string(),
        [one] => format!("({one},)"),
        _ => {
            let parts: Vec<String> = items.iter().map(ToString::to_string).collect();
            format!("({})", parts.join(", "))
        }
    }
}

/// Python `repr` of a string: single quotes unless the text contains a
/// single quote and no double quote.
pub fn py_str_repr(s: &str) -> String {
    let quote = if s.contains('\'') && !s.contains('"') { '"' } else { '\'' };
    let mut out = String::with_capacity(s.len() + 2);
    out.push(quote);
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if c == quote => {
                out.push('\\');
                out.push(c);
            }
            c => out.push(c),
        }
    }
    out.push(quote);
    out
}

/// Python `repr` of a float (shortest round-trip digits, Python's switch
/// to exponent form below 1e-4 and at or above 1e16).
pub fn py_float_repr(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0" } else { "0.0" }.to_string();
    }
    // `{:e}` yields the shortest round-trip mantissa, e.g. "1.5802350054063646e-2".
    let sci = format!("{v:e}");
    let (mantissa, exp) = sci.split_once('e').expect("LowerExp always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };

    if (-4..16).contains(&exp) {
        let n = digits.len() as i32;
        let body = if exp >= 0 {
            let int_len = exp + 1;
            if n <= int_len {
                format!("{}{}.0", digits, "0".repeat((int_len - n) as usize))
            } else {
                let (a, b) = digits.split_at(int_len as usize);
                format!("{a}.{b}")
            }
        } else {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        };
        format!("{sign}{body}")
    } else {
        let (first, rest) = digits.split_at(1);
        let mant = if rest.is_empty() { first.to_string() } else { format!("{first}.{rest}") };
        let esign = if exp < 0 { '-' } else { '+' };
        format!("{sign}{mant}e{esign}{:02}", exp.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Float(f64),
    Str(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Equals,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer {v}"),
            Tok::Float(v) => format!("number {v}"),
            Tok::Str(s) => format!("string {}", py_str_repr(s)),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, PlanError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    let syntax = |pos: Pos, message: String| PlanError::Syntax { line: pos.line, column: pos.column, message };

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '[' | ']' | '(' | ')' | '{' | '}' | ',' | ':' | '=' => {
                let tok = match c {
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    _ => Tok::Equals,
                };
                out.push((tok, pos));
                i += 1;
                col += 1;
            }
            '\'' | '"' => {
                let quote = c;
                let mut s = String::new();
                i += 1;
                col += 1;
                loop {
                    let Some(&ch) = chars.get(i) else {
                        return Err(syntax(pos, "unterminated string".into()));
                    };
                    match ch {
                        '\n' => return Err(syntax(pos, "unterminated string".into())),
                        '\\' => {
                            let next = chars.get(i + 1).copied();
                            match next {
                                Some(n @ ('\'' | '"' | '\\')) => {
                                    s.push(n);
                                    i += 2;
                                    col += 2;
                                }
                                _ => {
                                    return Err(syntax(
                                        Pos { line, column: col },
                                        "unsupported escape sequence (only \\' \\\" \\\\ are allowed)".into(),
                                    ))
                                }
                            }
                        }
                        ch if ch == quote => {
                            i += 1;
                            col += 1;
                            break;
                        }
                        ch => {
                            s.push(ch);
                            i += 1;
                            col += 1;
                        }
                    }
                }
                out.push((Tok::Str(s), pos));
            }
            c if c.is_ascii_digit()
                || ((c == '-' || c == '+' || c == '.') && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit() || *n == '.')) =>
            {
                let start = i;
                if c == '-' || c == '+' {
                    i += 1;
                }
                let mut is_float = false;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    is_float = true;
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        is_float = true;
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                col += i - start;
                let tok = if is_float {
                    match text.parse::<f64>() {
                        Ok(v) if v.is_finite() => Tok::Float(v),
                        _ => return Err(syntax(pos, format!("malformed number `{text}`"))),
                    }
                } else {
                    match text.parse::<i64>() {
                        Ok(v) => Tok::Int(v),
                        Err(_) => return Err(syntax(pos, format!("malformed integer `{text}`"))),
                    }
                };
                if chars.get(i).is_some_and(|n| n.is_alphanumeric() || *n == '_' || *n == '.') {
                    return Err(syntax(Pos { line, column: col }, format!("unexpected character `{}` after number", chars[i])));
                }
                out.push((tok, pos));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                col += i - start;
                out.push((Tok::Ident(word), pos));
            }
            other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
        }
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

/// A parsed value that remembers where it started.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Node {
    pub pos: Pos,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum NodeKind {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Tuple(Vec<Node>),
    Dict(Vec<(String, Pos, Node)>),
}

impl Node {
    pub fn to_literal(&self) -> Literal {
        match &self.kind {
            NodeKind::Int(v) => Literal::Int(*v),
            NodeKind::Float(v) => Literal::Float(*v),
            NodeKind::Str(s) => Literal::Str(s.clone()),
            NodeKind::Bool(b) => Literal::Bool(*b),
            NodeKind::Tuple(items) => Literal::Tuple(items.iter().map(Node::to_literal).collect()),
            NodeKind::Dict(entries) => {
                Literal::Dict(entries.iter().map(|(k, _, v)| (k.clone(), v.to_literal())).collect())
            }
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self.kind {
            NodeKind::Int(_) => "integer",
            NodeKind::Float(_) => "float",
            NodeKind::Str(_) => "string",
            NodeKind::Bool(_) => "boolean",
            NodeKind::Tuple(_) => "tuple",
            NodeKind::Dict(_) => "dict",
        }
    }
}

/// Top-level statement.
#[derive(Debug)]
pub(crate) enum Assignment {
    List { target: String, target_pos: Pos, items: Vec<Node> },
    Indexed { target_pos: Pos, index: i64, index_pos: Pos, value: Node },
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &(Tok, Pos) {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error_at(pos: Pos, message: impl Into<String>) -> PlanError {
        PlanError::Syntax { line: pos.line, column: pos.column, message: message.into() }
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, PlanError> {
        let (tok, pos) = self.bump();
        if tok == want {
            Ok(pos)
        } else {
            Err(Self::error_at(pos, format!("expected {}, found {}", want.describe(), tok.describe())))
        }
    }

    fn assignment(&mut self) -> Result<Assignment, PlanError> {
        let (tok, target_pos) = self.bump();
        let target = match tok {
            Tok::Ident(name) if name == "task_plan" || name == "evaluation_plan" => name,
            Tok::Ident(name) => {
                return Err(PlanError::Format {
                    line: target_pos.line,
                    column: target_pos.column,
                    message: format!("unknown assignment target `{name}` (expected `task_plan` or `evaluation_plan`)"),
                })
            }
            Tok::Eof => {
                return Err(PlanError::Format {
                    line: target_pos.line,
                    column: target_pos.column,
                    message: "no assignment found".into(),
                })
            }
            other => {
                return Err(Self::error_at(target_pos, format!("expected an assignment target, found {}", other.describe())))
            }
        };

        let stmt = if self.peek().0 == Tok::LBracket && target == "task_plan" {
            // Either `task_plan[<k>] = (...)` or a syntax error; `task_plan [` is never a list.
            self.bump();
            let (tok, index_pos) = self.bump();
            let Tok::Int(index) = tok else {
                return Err(Self::error_at(index_pos, format!("expected an integer index, found {}", tok.describe())));
            };
            self.expect(Tok::RBracket)?;
            self.expect(Tok::Equals)?;
            let value = self.value()?;
            Assignment::Indexed { target_pos, index, index_pos, value }
        } else {
            self.expect(Tok::Equals)?;
            let (tok, pos) = self.peek().clone();
            if tok != Tok::LBracket {
                return Err(PlanError::Format {
                    line: pos.line,
                    column: pos.column,
                    message: format!("`{target}` must be assigned a list of tuples, found {}", tok.describe()),
                });
            }
            let items = self.list()?;
            Assignment::List { target, target_pos, items }
        };

        let (tok, pos) = self.peek().clone();
        if tok != Tok::Eof {
            return Err(match tok {
                Tok::Ident(ref name) if name == "task_plan" || name == "evaluation_plan" => PlanError::Format {
                    line: pos.line,
                    column: pos.column,
                    message: "expected exactly one assignment statement".into(),
                },
                _ => Self::error_at(pos, format!("unexpected {} after the assignment", tok.describe())),
            });
        }
        Ok(stmt)
    }

    fn list(&mut self) -> Result<Vec<Node>, PlanError> {
        self.expect(Tok::LBracket)?;
        let mut items = Vec::new();
        loop {
            if self.peek().0 == Tok::RBracket {
                self.bump();
                return Ok(items);
            }
            let (tok, pos) = self.peek().clone();
            if tok != Tok::LParen {
                return Err(Self::error_at(pos, format!("expected a tuple or `]`, found {}", tok.describe())));
            }
            items.push(self.value()?);
            let (tok, pos) = self.bump();
            match tok {
                Tok::Comma => continue,
                Tok::RBracket => return Ok(items),
                other => return Err(Self::error_at(pos, format!("expected `,` or `]`, found {}", other.describe()))),
            }
        }
    }

    fn value(&mut self) -> Result<Node, PlanError> {
        let (tok, pos) = self.bump();
        let kind = match tok {
            Tok::Int(v) => NodeKind::Int(v),
            Tok::Float(v) => NodeKind::Float(v),
            Tok::Str(s) => NodeKind::Str(s),
            Tok::Ident(ref w) if w == "True" => NodeKind::Bool(true),
            Tok::Ident(ref w) if w == "False" => NodeKind::Bool(false),
            Tok::LParen => {
                let mut items = Vec::new();
                loop {
                    if self.peek().0 == Tok::RParen {
                        self.bump();
                        break;
                    }
                    items.push(self.value()?);
                    let (tok, p) = self.bump();
                    match tok {
                        Tok::Comma => continue,
                        Tok::RParen => break,
                        other => {
                            return Err(Self::error_at(p, format!("expected `,` or `)`, found {}", other.describe())))
                        }
                    }
                }
                NodeKind::Tuple(items)
            }
            Tok::LBrace => {
                let mut entries = Vec::new();
                loop {
                    let (tok, kpos) = self.bump();
                    let key = match tok {
                        Tok::RBrace => break,
                        Tok::Str(s) => s,
                        other => {
                            return Err(Self::error_at(kpos, format!("expected a string key or `}}`, found {}", other.describe())))
                        }
                    };
                    self.expect(Tok::Colon)?;
                    let (tok, vpos) = self.peek().clone();
                    if tok != Tok::LParen {
                        return Err(Self::error_at(vpos, format!("dict values must be tuples, found {}", tok.describe())));
                    }
                    let v = self.value()?;
                    entries.push((key, kpos, v));
                    let (tok, p) = self.bump();
                    match tok {
                        Tok::Comma => continue,
                        Tok::RBrace => break,
                        other => {
                            return Err(Self::error_at(p, format!("expected `,` or `}}`, found {}", other.describe())))
                        }
                    }
                }
                NodeKind::Dict(entries)
            }
            Tok::Ident(w) => return Err(Self::error_at(pos, format!("identifier `{w}` is not a literal"))),
            other => return Err(Self::error_at(pos, format!("expected a value, found {}", other.describe()))),
        };
        Ok(Node { pos, kind })
    }
}

pub(crate) fn parse_assignment(text: &str) -> Result<Assignment, PlanError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };
    p.assignment()
}

/// Parses a single bare value such as `('large red trash can', 0.2, 0.5)`.
pub fn parse_literal(text: &str) -> Result<Literal, PlanError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };
    let node = p.value()?;
    let (tok, pos) = p.peek().clone();
    if tok != Tok::Eof {
        return Err(Parser::error_at(pos, format!("unexpected {} after the value", tok.describe())));
    }
    Ok(node.to_literal())
}
