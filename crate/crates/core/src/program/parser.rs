//! Recursive-descent parser for the declaration language.
//!
//! ```text
//! program   := decl*
//! decl      := classdecl | instdecl | querydecl
//! classdecl := "class" IDENT "/" NAT "."
//! instdecl  := "instance" IDENT binders? ":" (term "->")* term "."
//! binders   := "{" IDENT ("," IDENT)* "}"
//! querydecl := "query" term "."
//! term      := IDENT | IDENT "(" term ("," term)* ")" | "?" IDENT | NAT
//! ```
//!
//! `#` starts a line comment. Inside an instance, binder names are written
//! bare; `?X` is only legal in queries. Numerals desugar to `s(...s(z)...)`.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::{Program, ProgramError};
use crate::term::{MetaId, Symbol, Term};

/// Numerals beyond this are almost certainly typos and would build huge terms.
const MAX_NUMERAL: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Slash,
    Dot,
    Colon,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Question,
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Nat(n) => write!(f, "numeral `{n}`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Question => f.write_str("`?`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn err(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError { line: pos.line, column: pos.column, message: message.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut pos = Pos { line: 1, column: 1 };
    let advance = |c: char, pos: &mut Pos| {
        if c == '\n' {
            pos.line += 1;
            pos.column = 1;
        } else {
            pos.column += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        let start = pos;
        if c.is_whitespace() {
            chars.next();
            advance(c, &mut pos);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                advance(c, &mut pos);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    s.push(c);
                    chars.next();
                    advance(c, &mut pos);
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(s), start));
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    chars.next();
                    advance(c, &mut pos);
                } else {
                    break;
                }
            }
            let n: u64 = s
                .parse()
                .ok()
                .filter(|n| *n <= MAX_NUMERAL)
                .ok_or_else(|| err(start, format!("numeral {s} exceeds {MAX_NUMERAL}")))?;
            out.push((Tok::Nat(n), start));
            continue;
        }
        chars.next();
        advance(c, &mut pos);
        let tok = match c {
            '/' => Tok::Slash,
            '.' => Tok::Dot,
            ':' => Tok::Colon,
            ',' => Tok::Comma,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '?' => Tok::Question,
            '-' if chars.peek() == Some(&'>') => {
                chars.next();
                advance('>', &mut pos);
                Tok::Arrow
            }
            'θ' => return Err(err(start, "`θ` names are reserved for normalized terms")),
            other => return Err(err(start, format!("unexpected character `{other}`"))),
        };
        out.push((tok, start));
    }
    out.push((Tok::Eof, pos));
    Ok(out)
}

/// How bare identifiers and `?X` are interpreted inside the current
/// declaration.
enum Scope {
    Instance { binders: Vec<String> },
    Query { vars: Vec<String> },
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    program: Program,
    symbols: HashMap<String, Symbol>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, ParseError> {
        let (tok, pos) = self.bump();
        if tok == want {
            Ok(pos)
        } else {
            Err(err(pos, format!("expected {want}, found {tok}")))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        match self.bump() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (tok, pos) => Err(err(pos, format!("expected identifier, found {tok}"))),
        }
    }

    fn symbol(&mut self, name: &str) -> Symbol {
        self.symbols
            .entry(name.to_string())
            .or_insert_with(|| Symbol::new(name))
            .clone()
    }

    fn program(mut self) -> Result<Program, ParseError> {
        loop {
            let (tok, pos) = self.bump();
            match tok {
                Tok::Eof => return Ok(self.program),
                Tok::Ident(kw) if kw == "class" => self.class_decl()?,
                Tok::Ident(kw) if kw == "instance" => self.instance_decl()?,
                Tok::Ident(kw) if kw == "query" => self.query_decl()?,
                other => {
                    return Err(err(pos, format!("expected `class`, `instance` or `query`, found {other}")))
                }
            }
        }
    }

    fn class_decl(&mut self) -> Result<(), ParseError> {
        let (name, pos) = self.ident()?;
        self.expect(Tok::Slash)?;
        let arity = match self.bump() {
            (Tok::Nat(n), _) => n as usize,
            (tok, p) => return Err(err(p, format!("expected arity, found {tok}"))),
        };
        self.expect(Tok::Dot)?;
        let sym = self.symbol(&name);
        self.program.add_class(sym, arity).map_err(|e| err(pos, e.to_string()))
    }

    fn instance_decl(&mut self) -> Result<(), ParseError> {
        let (name, name_pos) = self.ident()?;
        let mut binders = Vec::new();
        if *self.peek() == Tok::LBrace {
            self.bump();
            loop {
                let (b, p) = self.ident()?;
                if binders.contains(&b) {
                    return Err(err(p, format!("binder {b} listed twice")));
                }
                binders.push(b);
                match self.bump() {
                    (Tok::Comma, _) => continue,
                    (Tok::RBrace, _) => break,
                    (tok, p) => return Err(err(p, format!("expected `,` or `}}`, found {tok}"))),
                }
            }
        }
        self.expect(Tok::Colon)?;
        let mut scope = Scope::Instance { binders };
        let mut goals = vec![self.goal(&mut scope)?];
        loop {
            match self.bump() {
                (Tok::Arrow, _) => goals.push(self.goal(&mut scope)?),
                (Tok::Dot, _) => break,
                (tok, p) => return Err(err(p, format!("expected `->` or `.`, found {tok}"))),
            }
        }
        let (conclusion, _) = goals.pop().expect("at least one goal");
        let hypotheses = goals.into_iter().map(|(t, _)| t).collect();
        let Scope::Instance { binders } = scope else { unreachable!() };
        let sym = self.symbol(&name);
        self.program
            .add_instance(sym, binders, hypotheses, conclusion)
            .map_err(|e| err(name_pos, e.to_string()))
    }

    fn query_decl(&mut self) -> Result<(), ParseError> {
        let mut scope = Scope::Query { vars: Vec::new() };
        let (goal, pos) = self.goal(&mut scope)?;
        self.expect(Tok::Dot)?;
        let Scope::Query { vars } = scope else { unreachable!() };
        self.program.add_query(goal, vars).map_err(|e| err(pos, e.to_string()))
    }

    /// A class application. Checked against the registry right away so the
    /// error points at the offending goal.
    fn goal(&mut self, scope: &mut Scope) -> Result<(Term, Pos), ParseError> {
        let pos = self.pos();
        let (name, _) = self.ident()?;
        let args = self.args(scope)?;
        let sym = self.symbol(&name);
        let t = Term::app(sym, args);
        match self.program.check_goal(&t) {
            Ok(()) => Ok((t, pos)),
            Err(ProgramError::UndeclaredClass(c)) => Err(err(pos, format!("undeclared class {c}"))),
            Err(e) => Err(err(pos, e.to_string())),
        }
    }

    fn args(&mut self, scope: &mut Scope) -> Result<Vec<Term>, ParseError> {
        let mut args = Vec::new();
        if *self.peek() != Tok::LParen {
            return Ok(args);
        }
        self.bump();
        loop {
            args.push(self.term(scope)?);
            match self.bump() {
                (Tok::Comma, _) => continue,
                (Tok::RParen, _) => return Ok(args),
                (tok, p) => return Err(err(p, format!("expected `,` or `)`, found {tok}"))),
            }
        }
    }

    fn term(&mut self, scope: &mut Scope) -> Result<Term, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Nat(n) => Ok(Term::nat(n)),
            Tok::Question => {
                let (name, _) = self.ident()?;
                match scope {
                    Scope::Query { vars } => {
                        let id = match vars.iter().position(|v| *v == name) {
                            Some(i) => i,
                            None => {
                                vars.push(name);
                                vars.len() - 1
                            }
                        };
                        Ok(Term::meta(MetaId::goal(id as u32)))
                    }
                    Scope::Instance { .. } => Err(err(
                        pos,
                        format!("`?{name}` is only allowed in queries; list {name} as a binder instead"),
                    )),
                }
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let args = self.args(scope)?;
                    let sym = self.symbol(&name);
                    return Ok(Term::app(sym, args));
                }
                if let Scope::Instance { binders } = scope {
                    if let Some(i) = binders.iter().position(|b| *b == name) {
                        return Ok(Term::meta(MetaId::goal(i as u32)));
                    }
                }
                if name.starts_with(|c: char| c.is_ascii_uppercase()) {
                    let hint = match scope {
                        Scope::Instance { .. } => format!("declare {name} as a binder"),
                        Scope::Query { .. } => format!("write ?{name} for a query variable"),
                    };
                    return Err(err(pos, format!("free variable {name}; {hint}")));
                }
                Ok(Term::constant(self.symbol(&name)))
            }
            other => Err(err(pos, format!("expected term, found {other}"))),
        }
    }
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let toks = lex(text)?;
    Parser { toks, at: 0, program: Program::new(), symbols: HashMap::new() }.program()
}
