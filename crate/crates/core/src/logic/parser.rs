//! Reader for the Prolog-style clause syntax used in tests and theory files.
//!
//! Supported: facts `p(a).`, rules `h :- b1, b2.`, integrity constraints
//! `false :- b1, b2.`, lists `[a,b|T]`, uppercase/underscore variables,
//! symbolic atoms such as `+` and `=`, quoted atoms, `%` comments, and the
//! directives `:- abducible(name/arity, ...).` and `:- universe([...]).`

use super::term::{Clause, Signature, Term};
use super::LogicError;

const SYMBOL_CHARS: &str = "+-*/\\^<>=~:?@#&$";

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Var(String),
    Int(i64),
    Neck,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bar,
    End,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.char_indices().peekable(),
            line: 1,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, LogicError> {
        let mut out = Vec::new();
        while let Some(tok) = self.next_token()? {
            out.push((tok, self.line));
        }
        Ok(out)
    }

    fn err(&self, message: impl Into<String>) -> LogicError {
        LogicError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn next_token(&mut self) -> Result<Option<Tok>, LogicError> {
        loop {
            match self.chars.peek().copied() {
                None => return Ok(None),
                Some((_, '\n')) => {
                    self.line += 1;
                    self.chars.next();
                }
                Some((_, c)) if c.is_whitespace() => {
                    self.chars.next();
                }
                Some((_, '%')) => {
                    while let Some((_, c)) = self.chars.peek().copied() {
                        if c == '\n' {
                            break;
                        }
                        self.chars.next();
                    }
                }
                Some(_) => break,
            }
        }
        let (_, c) = self.chars.next().expect("peeked");
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '|' => Tok::Bar,
            '.' => Tok::End,
            '\'' => {
                let mut name = String::new();
                loop {
                    match self.chars.next() {
                        None => return Err(self.err("unterminated quoted atom")),
                        Some((_, '\\')) => {
                            if let Some((_, esc)) = self.chars.next() {
                                name.push(esc);
                            }
                        }
                        Some((_, '\'')) => break,
                        Some((_, ch)) => name.push(ch),
                    }
                }
                Tok::Name(name)
            }
            c if c.is_ascii_digit() => {
                let mut text = c.to_string();
                while let Some((_, d)) = self.chars.peek().copied() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    text.push(d);
                    self.chars.next();
                }
                Tok::Int(text.parse().map_err(|_| self.err("integer out of range"))?)
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut text = c.to_string();
                while let Some((_, d)) = self.chars.peek().copied() {
                    if !(d.is_alphanumeric() || d == '_') {
                        break;
                    }
                    text.push(d);
                    self.chars.next();
                }
                if c.is_uppercase() || c == '_' {
                    Tok::Var(text)
                } else {
                    Tok::Name(text)
                }
            }
            c if SYMBOL_CHARS.contains(c) => {
                let mut text = c.to_string();
                while let Some((_, d)) = self.chars.peek().copied() {
                    if !SYMBOL_CHARS.contains(d) {
                        break;
                    }
                    text.push(d);
                    self.chars.next();
                }
                if text == ":-" {
                    Tok::Neck
                } else {
                    Tok::Name(text)
                }
            }
            other => return Err(self.err(format!("unexpected character {other:?}"))),
        };
        Ok(Some(tok))
    }
}

/// Parsed program text: clauses plus declarations from directives.
#[derive(Debug, Clone, Default)]
pub struct Program {
    pub clauses: Vec<Clause>,
    pub abducibles: Vec<Signature>,
    pub universe: Vec<Term>,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    fresh: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, LogicError> {
        Ok(Parser {
            toks: Lexer::new(src).tokens()?,
            pos: 0,
            fresh: 0,
        })
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |(_, l)| *l)
    }

    fn err(&self, message: impl Into<String>) -> LogicError {
        LogicError::Syntax {
            line: self.line(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let tok = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        tok
    }

    fn expect(&mut self, want: Tok) -> Result<(), LogicError> {
        match self.bump() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(self.err(format!("expected {want:?}, found {t:?}"))),
            None => Err(self.err(format!("expected {want:?}, found end of input"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        match self.bump() {
            Some(Tok::Var(name)) => {
                if name == "_" {
                    self.fresh += 1;
                    Ok(Term::var(&format!("_G{}", self.fresh)))
                } else {
                    Ok(Term::var(&name))
                }
            }
            Some(Tok::Int(i)) => Ok(Term::int(i)),
            Some(Tok::Name(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.bump();
                    let args = self.sequence(Tok::RParen)?;
                    if args.is_empty() {
                        return Err(self.err("empty argument list"));
                    }
                    Ok(Term::compound(&name, args))
                } else {
                    Ok(Term::atom(&name))
                }
            }
            Some(Tok::LBracket) => {
                if self.peek() == Some(&Tok::RBracket) {
                    self.bump();
                    return Ok(Term::Nil);
                }
                let mut items = vec![self.term()?];
                loop {
                    match self.bump() {
                        Some(Tok::Comma) => items.push(self.term()?),
                        Some(Tok::Bar) => {
                            let tail = self.term()?;
                            self.expect(Tok::RBracket)?;
                            return Ok(Term::list_with_tail(items, tail));
                        }
                        Some(Tok::RBracket) => return Ok(Term::list(items)),
                        other => return Err(self.err(format!("bad list syntax near {other:?}"))),
                    }
                }
            }
            other => Err(self.err(format!("expected a term, found {other:?}"))),
        }
    }

    /// Comma-separated terms up to (and consuming) `close`.
    fn sequence(&mut self, close: Tok) -> Result<Vec<Term>, LogicError> {
        let mut items = Vec::new();
        if self.peek() == Some(&close) {
            self.bump();
            return Ok(items);
        }
        loop {
            items.push(self.term()?);
            match self.bump() {
                Some(Tok::Comma) => continue,
                Some(t) if t == close => return Ok(items),
                other => return Err(self.err(format!("expected , or {close:?}, found {other:?}"))),
            }
        }
    }

    fn body(&mut self) -> Result<Vec<Term>, LogicError> {
        let mut goals = vec![self.term()?];
        loop {
            match self.bump() {
                Some(Tok::Comma) => goals.push(self.term()?),
                Some(Tok::End) => return Ok(goals),
                other => return Err(self.err(format!("expected , or ., found {other:?}"))),
            }
        }
    }

    fn directive(&mut self, program: &mut Program) -> Result<(), LogicError> {
        let name = match self.bump() {
            Some(Tok::Name(n)) => n,
            other => return Err(self.err(format!("bad directive {other:?}"))),
        };
        self.expect(Tok::LParen)?;
        match name.as_str() {
            "abducible" => loop {
                let pred = match self.bump() {
                    Some(Tok::Name(n)) => n,
                    other => return Err(self.err(format!("expected predicate name, found {other:?}"))),
                };
                match self.bump() {
                    Some(Tok::Name(slash)) if slash == "/" => {}
                    other => return Err(self.err(format!("expected /, found {other:?}"))),
                }
                let arity = match self.bump() {
                    Some(Tok::Int(a)) if a >= 0 => a as usize,
                    other => return Err(self.err(format!("expected arity, found {other:?}"))),
                };
                program.abducibles.push(Signature::new(&pred, arity));
                match self.bump() {
                    Some(Tok::Comma) => continue,
                    Some(Tok::RParen) => break,
                    other => return Err(self.err(format!("expected , or ), found {other:?}"))),
                }
            },
            "universe" => {
                let list = self.term()?;
                let items = list
                    .list_items()
                    .ok_or_else(|| self.err("universe expects a proper list"))?;
                program.universe.extend(items.into_iter().cloned());
                self.expect(Tok::RParen)?;
            }
            other => return Err(self.err(format!("unknown directive {other}"))),
        }
        self.expect(Tok::End)
    }

    fn program(&mut self) -> Result<Program, LogicError> {
        let mut program = Program::default();
        while !self.at_end() {
            if self.peek() == Some(&Tok::Neck) {
                self.bump();
                self.directive(&mut program)?;
                continue;
            }
            let head = self.term()?;
            if head.signature().is_none() {
                return Err(self.err(format!("clause head {head} is not callable")));
            }
            match self.bump() {
                Some(Tok::End) => program.clauses.push(Clause::fact(head)),
                Some(Tok::Neck) => {
                    let body = self.body()?;
                    program.clauses.push(Clause::rule(head, body));
                }
                other => return Err(self.err(format!("expected :- or ., found {other:?}"))),
            }
        }
        Ok(program)
    }
}

/// Parses a whole program.
pub fn parse_program(src: &str) -> Result<Program, LogicError> {
    Parser::new(src)?.program()
}

/// Parses a single term (no trailing period).
pub fn parse_term(src: &str) -> Result<Term, LogicError> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    if !p.at_end() {
        return Err(p.err("trailing input after term"));
    }
    Ok(t)
}

/// Parses a comma-separated query such as `parent(X, bob), male(X)`.
/// A trailing period is accepted.
pub fn parse_query(src: &str) -> Result<Vec<Term>, LogicError> {
    let mut p = Parser::new(src)?;
    let mut goals = Vec::new();
    if p.at_end() {
        return Ok(goals);
    }
    loop {
        goals.push(p.term()?);
        match p.bump() {
            None | Some(Tok::End) => break,
            Some(Tok::Comma) => continue,
            other => return Err(p.err(format!("expected , found {other:?}"))),
        }
    }
    if !p.at_end() {
        return Err(p.err("trailing input after query"));
    }
    Ok(goals)
}
