//! Text grammar for terms and systems.
//!
//! ```text
//! term     := join
//! join     := meet ("+" meet)*
//! meet     := diff ("*" diff)*
//! diff     := primary ("\" primary)*
//! primary  := "0" | variable | constant | "(" term ")"
//! variable := "x" digits            (index >= 1)
//! constant := identifier not of the form "x" digit...
//! ```
//!
//! `∨ ∧ ∖ ≤` are accepted as aliases of `+ * \ <=`. A system has one
//! `term = term` or `term <= term` per line; `#` starts a comment.

use std::fmt;

use thiserror::Error;

use crate::terms::{EqSystem, Equation, Relation, Term};

/// 1-based position of a token.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

/// All per-line errors of a system file.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub struct ParseErrors(pub Vec<ParseError>);

impl fmt::Display for ParseErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Zero,
    Var(u32),
    Ident(String),
    Plus,
    Star,
    Backslash,
    LParen,
    RParen,
    Eq,
    Le,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Zero => f.write_str("`0`"),
            Tok::Var(i) => write!(f, "`x{i}`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Backslash => f.write_str("`\\`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Le => f.write_str("`<=`"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str, line: usize) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |column: usize, length: usize, message: String| ParseError {
        span: SourceSpan { line, column: column + 1, length },
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let single = match c {
            ' ' | '\t' | '\r' => {
                i += 1;
                continue;
            }
            '+' | '∨' => Some(Tok::Plus),
            '*' | '∧' => Some(Tok::Star),
            '\\' | '∖' => Some(Tok::Backslash),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '=' => Some(Tok::Eq),
            '≤' => Some(Tok::Le),
            _ => None,
        };
        if let Some(tok) = single {
            i += 1;
            out.push((tok, SourceSpan { line, column: start + 1, length: 1 }));
            continue;
        }
        if c == '<' {
            if chars.get(i + 1) == Some(&'=') {
                i += 2;
                out.push((Tok::Le, SourceSpan { line, column: start + 1, length: 2 }));
                continue;
            }
            return Err(err(start, 1, "expected `<=`".into()));
        }
        if c == '{' {
            let len = chars[i..].iter().position(|&c| c == '}').map_or(1, |p| p + 1);
            return Err(err(start, len, "element literals are not allowed in input terms; name the constant".into()));
        }
        if c.is_ascii_digit() {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word != "0" {
                return Err(err(start, i - start, format!("unexpected number `{word}`; only `0` is a literal")));
            }
            out.push((Tok::Zero, SourceSpan { line, column: start + 1, length: 1 }));
            continue;
        }
        if is_ident_start(c) {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let span = SourceSpan { line, column: start + 1, length: i - start };
            let mut rest = word.chars().skip(1);
            let reserved = word.starts_with('x') && word[1..].starts_with(|c: char| c.is_ascii_digit());
            if reserved {
                if !rest.all(|c| c.is_ascii_digit()) {
                    return Err(err(start, i - start, format!("`{word}`: names starting with `x` and a digit are reserved for variables")));
                }
                match word[1..].parse::<u32>() {
                    Ok(n) if n >= 1 => out.push((Tok::Var(n), span)),
                    _ => return Err(err(start, i - start, format!("`{word}`: variable indices start at 1"))),
                }
            } else {
                out.push((Tok::Ident(word), span));
            }
            continue;
        }
        return Err(err(start, 1, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    end: SourceSpan,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn span(&self) -> SourceSpan {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn error<T>(&self, message: String) -> Result<T, ParseError> {
        Err(ParseError { span: self.span(), message })
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn join(&mut self) -> Result<Term, ParseError> {
        let mut t = self.meet()?;
        while self.eat(&Tok::Plus) {
            t = Term::join(t, self.meet()?);
        }
        Ok(t)
    }

    fn meet(&mut self) -> Result<Term, ParseError> {
        let mut t = self.diff()?;
        while self.eat(&Tok::Star) {
            t = Term::meet(t, self.diff()?);
        }
        Ok(t)
    }

    fn diff(&mut self) -> Result<Term, ParseError> {
        let mut t = self.primary()?;
        while self.eat(&Tok::Backslash) {
            t = Term::diff(t, self.primary()?);
        }
        Ok(t)
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return self.error("expected a term, found end of input".into());
        };
        match tok {
            Tok::Zero => {
                self.pos += 1;
                Ok(Term::Zero)
            }
            Tok::Var(i) => {
                self.pos += 1;
                Ok(Term::var(i))
            }
            Tok::Ident(name) => {
                self.pos += 1;
                Ok(Term::constant(&name))
            }
            Tok::LParen => {
                self.pos += 1;
                let t = self.join()?;
                if !self.eat(&Tok::RParen) {
                    return self.error("expected `)`".into());
                }
                Ok(t)
            }
            other => self.error(format!("expected a term, found {other}")),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(tok) => self.error(format!("unexpected {tok}")),
        }
    }
}

fn parser_for(text: &str, line: usize) -> Result<Parser, ParseError> {
    let toks = lex(text, line)?;
    let end = SourceSpan { line, column: text.chars().count() + 1, length: 0 };
    Ok(Parser { toks, pos: 0, end })
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = parser_for(text.trim_end_matches(['\n', '\r']), 1)?;
    let t = p.join()?;
    p.finish()?;
    Ok(t)
}

fn parse_statement(text: &str, line: usize) -> Result<Equation, ParseError> {
    let mut p = parser_for(text, line)?;
    let lhs = p.join()?;
    let relation = if p.eat(&Tok::Eq) {
        Relation::Equal
    } else if p.eat(&Tok::Le) {
        Relation::LessOrEqual
    } else {
        return p.error("expected `=` or `<=`".into());
    };
    let rhs = p.join()?;
    p.finish()?;
    Ok(Equation { lhs, rhs, relation })
}

pub fn parse_equation(text: &str) -> Result<Equation, ParseError> {
    parse_statement(text.trim_end_matches(['\n', '\r']), 1)
}

pub fn parse_system(text: &str) -> Result<EqSystem, ParseErrors> {
    let mut equations = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let code = line.split('#').next().unwrap_or("");
        if code.trim().is_empty() {
            continue;
        }
        match parse_statement(code, i + 1) {
            Ok(e) => equations.push(e),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(EqSystem::new(equations))
    } else {
        Err(ParseErrors(errors))
    }
}
