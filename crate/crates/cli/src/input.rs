//! Line-based input formats. Blank lines and lines starting with `#` are
//! skipped everywhere.
//!
//! Constraint files:
//!
//! ```text
//! knows: a, b . c      # extends the current knowledge
//! deduce: ?v           # E |> ?v with everything known so far
//! eq: ?v = b . a
//! order: ?v < a        # a may not occur in the value of ?v
//! ```
//!
//! Unification files use `lhs = rhs` and `restrict ?x < c`; derivation
//! files use `knows:` and a single `goal: t`.

use hashcol_core::csolve::ConstraintSystem;
use hashcol_core::unify::{OrderingConstraint, UnificationSystem};
use hashcol_core::{parse_term, parse_term_list, Term, Var};

use crate::error::CliError;

/// `(line number, content)` for every meaningful line.
pub(crate) fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub(crate) fn term(line: usize, s: &str) -> Result<Term, CliError> {
    parse_term(s.trim()).map_err(|e| CliError::syntax(line, format!("`{}`: {}", s.trim(), e.kind)))
}

pub(crate) fn term_list(line: usize, s: &str) -> Result<Vec<Term>, CliError> {
    parse_term_list(s).map_err(|e| CliError::syntax(line, format!("`{}`: {}", s.trim(), e.kind)))
}

pub(crate) fn equation(line: usize, s: &str) -> Result<(Term, Term), CliError> {
    let mut parts = s.split('=');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(l), Some(r), None) => Ok((term(line, l)?, term(line, r)?)),
        _ => Err(CliError::syntax(line, "expected exactly one `=`")),
    }
}

fn var(line: usize, s: &str) -> Result<Var, CliError> {
    let s = s.trim();
    let s = if s.starts_with('?') || s.starts_with('!') {
        s.to_string()
    } else {
        format!("?{s}")
    };
    match term(line, &s)? {
        Term::Var(v) => Ok(v),
        t => Err(CliError::syntax(line, format!("`{t}` is not a variable"))),
    }
}

/// `?x < c`: the variable and the constant name.
fn restriction(line: usize, s: &str) -> Result<(Var, String), CliError> {
    let (x, c) = s
        .split_once('<')
        .ok_or_else(|| CliError::syntax(line, "expected `?x < c`"))?;
    let x = var(line, x)?;
    match term(line, c)? {
        Term::Const(c) => Ok((x, c.to_string())),
        t => Err(CliError::syntax(line, format!("`{t}` is not a constant"))),
    }
}

fn keyed(line: usize, l: &str) -> Result<(String, &str), CliError> {
    let (k, rest) = l
        .split_once(':')
        .ok_or_else(|| CliError::syntax(line, format!("expected `key: value`, found `{l}`")))?;
    Ok((k.trim().to_ascii_lowercase(), rest))
}

pub fn parse_constraints(text: &str) -> Result<ConstraintSystem, CliError> {
    let mut c = ConstraintSystem::new();
    let mut known: Vec<Term> = Vec::new();
    for (n, l) in lines(text) {
        let (key, rest) = keyed(n, l)?;
        match key.as_str() {
            "knows" => {
                for t in term_list(n, rest)? {
                    if !known.contains(&t) {
                        known.push(t);
                    }
                }
            }
            "deduce" => c.push(known.clone(), var(n, rest)?),
            "eq" => {
                let (a, b) = equation(n, rest)?;
                c.equate(a, b);
            }
            "order" => {
                let (x, k) = restriction(n, rest)?;
                c.order.restrict(x, &k);
            }
            other => return Err(CliError::syntax(n, format!("unknown directive `{other}`"))),
        }
    }
    if c.constraints.is_empty() {
        return Err(CliError::syntax(0, "no `deduce:` line"));
    }
    Ok(c)
}

pub fn parse_unification(text: &str) -> Result<(UnificationSystem, OrderingConstraint), CliError> {
    let mut s = UnificationSystem::new();
    let mut ord = OrderingConstraint::new();
    for (n, l) in lines(text) {
        if let Some(rest) = l.strip_prefix("restrict") {
            let (x, k) = restriction(n, rest)?;
            ord.restrict(x, &k);
        } else {
            let (a, b) = equation(n, l)?;
            s.push(a, b);
        }
    }
    Ok((s, ord))
}

pub fn parse_derivation(text: &str) -> Result<(Vec<Term>, Term), CliError> {
    let mut known: Vec<Term> = Vec::new();
    let mut goal = None;
    for (n, l) in lines(text) {
        let (key, rest) = keyed(n, l)?;
        match key.as_str() {
            "knows" => known.extend(term_list(n, rest)?),
            "goal" if goal.is_none() => goal = Some(term(n, rest)?),
            "goal" => return Err(CliError::syntax(n, "second `goal:` line")),
            other => return Err(CliError::syntax(n, format!("unknown directive `{other}`"))),
        }
    }
    let goal = goal.ok_or_else(|| CliError::syntax(0, "no `goal:` line"))?;
    Ok((known, goal))
}
