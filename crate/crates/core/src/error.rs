use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::term::Term;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Unexpected(char),
    UnexpectedEnd,
    Expected(char, Option<char>),
    UnknownSymbol(String),
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    BadName,
}

/// A syntax error in the term grammar, with a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Unexpected(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::Expected(want, Some(got)) => {
                write!(f, "expected {want:?}, found {got:?}")
            }
            ParseErrorKind::Expected(want, None) => write!(f, "expected {want:?}, found end of input"),
            ParseErrorKind::UnknownSymbol(s) => write!(f, "unknown function symbol `{s}`"),
            ParseErrorKind::Arity {
                symbol,
                expected,
                found,
            } => write!(f, "`{symbol}` takes {expected} argument(s), found {found}"),
            ParseErrorKind::BadName => f.write_str("malformed variable name"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("term `{0}` is not ground")]
    NotGround(Term),
    #[error("term `{0}` is not a word over constants and variables")]
    NotWord(Term),
    #[error("term `{0}` contains the hash symbol")]
    ContainsHash(Term),
    #[error("term `{0}` uses a symbol outside this intruder's signature")]
    ForeignSymbol(Term),
    #[error("ordering constraint has a cycle through `{0}`")]
    CyclicOrdering(String),
    #[error("constraint system is not deterministic: {}", .0.join("; "))]
    NotDeterministic(Vec<String>),
    #[error("term `{0}` is rooted by f or g, which the hash reduction does not accept")]
    FgRooted(Term),
    #[error("equation {0} = {1} is not regular (variable sets differ)")]
    Irregular(Term, Term),
    #[error("equation {0} = {1} contains a free constant")]
    ConstantInAxiom(Term, Term),
}
