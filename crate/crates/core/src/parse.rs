//! Surface syntax for terms.
//!
//! ```text
//! term    := factor ( '.' factor )*
//! factor  := 'eps' | const | var | 'h' '(' term ')'
//!          | ('f' | 'g') '(' term ',' term ',' term ',' term ')'
//!          | '(' term ')'
//! const   := [a-z][a-z0-9_]*            (other than eps, h, f, g before '(')
//! var     := ('?' | '!') [a-z][a-z0-9_]* ('#' [0-9]+)*
//! ```
//!
//! `?` variables are in the signature-0 partition, `!` variables in the
//! signature-1 partition. The `#n` suffix is reserved for machine-generated
//! names and only accepted so that printed terms parse back.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{ParseError, ParseErrorKind};
use crate::term::{Fun, Partition, Term, Var};

/// Parses a single term; the whole input must be consumed.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text);
    let t = p.term()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.error(ParseErrorKind::Unexpected(c)));
    }
    Ok(t)
}

/// Parses a comma-separated list of terms (commas inside parentheses are
/// argument separators and do not split the list).
pub fn parse_term_list(text: &str) -> Result<Vec<Term>, ParseError> {
    let mut p = Parser::new(text);
    let mut out = Vec::new();
    p.skip_ws();
    if p.peek().is_none() {
        return Ok(out);
    }
    loop {
        out.push(p.term()?);
        p.skip_ws();
        match p.peek() {
            None => break,
            Some(',') => {
                p.bump();
            }
            Some(c) => return Err(p.error(ParseErrorKind::Unexpected(c))),
        }
    }
    Ok(out)
}

pub(crate) struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn location(&self) -> (usize, usize) {
        let before = &self.src[..self.pos];
        let line = before.matches('\n').count() + 1;
        let col = match before.rfind('\n') {
            Some(i) => before[i + 1..].chars().count() + 1,
            None => before.chars().count() + 1,
        };
        (line, col)
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        let (line, column) = self.location();
        ParseError { line, column, kind }
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.error(ParseErrorKind::Expected(want, Some(c)))),
            None => Err(self.error(ParseErrorKind::Expected(want, None))),
        }
    }

    pub(crate) fn term(&mut self) -> Result<Term, ParseError> {
        let mut parts = alloc::vec![self.factor()?];
        loop {
            self.skip_ws();
            if self.peek() == Some('.') {
                self.bump();
                parts.push(self.factor()?);
            } else {
                break;
            }
        }
        Ok(Term::concat(parts))
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' {
                self.bump();
            } else {
                break;
            }
        }
        self.src[start..self.pos].to_string()
    }

    fn factor(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        let (line, column) = self.location();
        match self.peek() {
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
            Some('(') => {
                self.bump();
                let t = self.term()?;
                self.expect(')')?;
                Ok(t)
            }
            Some(sigil @ ('?' | '!')) => {
                self.bump();
                match self.peek() {
                    Some(c) if c.is_ascii_lowercase() => {}
                    other => {
                        return Err(self.error(match other {
                            Some(c) => ParseErrorKind::Unexpected(c),
                            None => ParseErrorKind::UnexpectedEnd,
                        }))
                    }
                }
                let mut name = self.ident();
                while self.peek() == Some('#') {
                    self.bump();
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        self.bump();
                    }
                    if start == self.pos {
                        return Err(self.error(ParseErrorKind::BadName));
                    }
                    name.push('#');
                    name.push_str(&self.src[start..self.pos]);
                }
                let part = if sigil == '?' {
                    Partition::X0
                } else {
                    Partition::X1
                };
                Ok(Term::Var(Var::with_partition(&name, part)))
            }
            Some(c) if c.is_ascii_lowercase() => {
                let name = self.ident();
                let save = self.pos;
                self.skip_ws();
                let called = self.peek() == Some('(');
                if !called {
                    self.pos = save;
                    return Ok(if name == "eps" {
                        Term::Eps
                    } else {
                        Term::cst(&name)
                    });
                }
                self.bump();
                let mut args = Vec::new();
                self.skip_ws();
                if self.peek() != Some(')') {
                    loop {
                        args.push(self.term()?);
                        self.skip_ws();
                        if self.peek() == Some(',') {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(')')?;
                let arity = |want: usize, args: &Vec<Term>| {
                    if args.len() == want {
                        Ok(())
                    } else {
                        Err(ParseError {
                            line,
                            column,
                            kind: ParseErrorKind::Arity {
                                symbol: name.clone(),
                                expected: want,
                                found: args.len(),
                            },
                        })
                    }
                };
                match name.as_str() {
                    "h" => {
                        arity(1, &args)?;
                        Ok(Term::hash(args.pop().unwrap()))
                    }
                    "f" | "g" => {
                        arity(4, &args)?;
                        let fun = if name == "f" { Fun::F } else { Fun::G };
                        let mut it = args.into_iter();
                        let a = [
                            it.next().unwrap(),
                            it.next().unwrap(),
                            it.next().unwrap(),
                            it.next().unwrap(),
                        ];
                        Ok(Term::app(fun, a))
                    }
                    _ => Err(ParseError {
                        line,
                        column,
                        kind: ParseErrorKind::UnknownSymbol(name),
                    }),
                }
            }
            Some(c) => Err(self.error(ParseErrorKind::Unexpected(c))),
        }
    }
}
