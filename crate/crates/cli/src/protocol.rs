//! Protocol narrations and their bounded-session encoding.
//!
//! ```text
//! role A
//! role B
//! init pay, evil
//! msg A -> B : pay . ?m . h(h(pay . ?m) . ka)
//! goal forge ?fake = evil . ?z . h(h(evil . ?z) . ka)
//! ```
//!
//! The intruder is the role `I`; every message passes through it. A
//! variable is chosen by the intruder the first time it appears in a
//! message, which becomes a constraint `E |> ?x` at that point. Messages
//! sent by honest roles are added to the knowledge; a message sent by `I`
//! must itself be derivable. Variables that only appear in the goal are
//! existential.

use std::collections::BTreeSet;

use hashcol_core::csolve::{check_deterministic, ConstraintSystem};
use hashcol_core::{Term, Var};

use crate::error::CliError;
use crate::input::{equation, lines, term, term_list};

pub const INTRUDER: &str = "I";
pub const MAX_SESSIONS: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub from: String,
    pub to: String,
    pub term: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Goal {
    /// The intruder must produce the term.
    Secret(Term),
    /// The intruder must produce a value making the two sides equal.
    Forge(Term, Term),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProtocolSpec {
    pub roles: Vec<String>,
    pub init: Vec<Term>,
    pub messages: Vec<Message>,
    pub goal: Option<Goal>,
}

fn role_name(line: usize, s: &str) -> Result<String, CliError> {
    let s = s.trim();
    let ok = s.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(s.to_string())
    } else {
        Err(CliError::syntax(line, format!("bad role name `{s}`")))
    }
}

pub fn parse_protocol(text: &str) -> Result<ProtocolSpec, CliError> {
    let mut p = ProtocolSpec::default();
    for (n, l) in lines(text) {
        let (kw, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        match kw {
            "role" => {
                let r = role_name(n, rest)?;
                if r == INTRUDER {
                    return Err(CliError::syntax(n, "`I` is the intruder, not an honest role"));
                }
                if !p.roles.contains(&r) {
                    p.roles.push(r);
                }
            }
            "init" => p.init.extend(term_list(n, rest)?),
            "msg" => {
                let (hdr, body) = rest
                    .split_once(':')
                    .ok_or_else(|| CliError::syntax(n, "expected `msg A -> B : term`"))?;
                let (from, to) = hdr
                    .split_once("->")
                    .ok_or_else(|| CliError::syntax(n, "expected `A -> B`"))?;
                let (from, to) = (role_name(n, from)?, role_name(n, to)?);
                for r in [&from, &to] {
                    if r != INTRUDER && !p.roles.contains(r) {
                        return Err(CliError::syntax(n, format!("role `{r}` is not declared")));
                    }
                }
                if from == INTRUDER && to == INTRUDER {
                    return Err(CliError::syntax(n, "the intruder cannot message itself"));
                }
                p.messages.push(Message {
                    from,
                    to,
                    term: term(n, body)?,
                });
            }
            "goal" => {
                if p.goal.is_some() {
                    return Err(CliError::syntax(n, "second goal"));
                }
                let (kind, body) = rest.trim().split_once(char::is_whitespace).unwrap_or((rest.trim(), ""));
                p.goal = Some(match kind {
                    "secret" => Goal::Secret(term(n, body)?),
                    "forge" => {
                        let (a, b) = equation(n, body)?;
                        Goal::Forge(a, b)
                    }
                    other => return Err(CliError::syntax(n, format!("unknown goal kind `{other}`"))),
                });
            }
            other => return Err(CliError::syntax(n, format!("unknown directive `{other}`"))),
        }
    }
    Ok(p)
}

/// Variables of `t` in order of first occurrence.
fn vars_in_order(t: &Term) -> Vec<Var> {
    let mut out: Vec<Var> = Vec::new();
    for (_, s) in t.positions() {
        if let Term::Var(v) = s {
            if !out.contains(v) {
                out.push(v.clone());
            }
        }
    }
    out
}

/// Session `s > 0` gets its own copy of every variable.
fn rename(t: &Term, s: usize) -> Term {
    if s == 0 {
        return t.clone();
    }
    t.map_bottom_up(&mut |u| match u {
        Term::Var(v) => Term::Var(v.fresh(0).fresh(s)),
        other => other,
    })
}

fn internal(name: &str, n: usize) -> Var {
    Var::new(&format!("{name}#{n}"))
}

pub fn protocol_to_constraints(p: &ProtocolSpec, sessions: usize) -> Result<ConstraintSystem, CliError> {
    if sessions == 0 || sessions > MAX_SESSIONS {
        return Err(CliError::Protocol(format!(
            "sessions must be between 1 and {MAX_SESSIONS}, got {sessions}"
        )));
    }
    let goal = p
        .goal
        .as_ref()
        .ok_or_else(|| CliError::Protocol("no goal".into()))?;
    let mut c = ConstraintSystem::new();
    let mut known: Vec<Term> = Vec::new();
    let learn = |known: &mut Vec<Term>, t: Term| {
        let t = t.canonical();
        if !known.contains(&t) {
            known.push(t);
        }
    };
    for t in &p.init {
        learn(&mut known, t.clone());
    }
    let mut bound: BTreeSet<Var> = BTreeSet::new();
    let mut inputs = 0;
    for s in 0..sessions {
        for m in &p.messages {
            let t = rename(&m.term, s);
            for x in vars_in_order(&t) {
                if bound.insert(x.clone()) {
                    c.push(known.clone(), x);
                }
            }
            if m.from == INTRUDER {
                let v = internal("in", inputs);
                inputs += 1;
                c.push(known.clone(), v.clone());
                c.equate(Term::Var(v), t);
            } else {
                learn(&mut known, t);
            }
        }
    }
    match goal {
        Goal::Secret(t) => {
            let v = internal("goal", 0);
            c.push(known, v.clone());
            c.equate(Term::Var(v), t.clone());
        }
        Goal::Forge(l, r) => match l {
            Term::Var(x) if !bound.contains(x) => {
                c.push(known, x.clone());
                c.equate(l.clone(), r.clone());
            }
            _ => {
                let v = internal("goal", 0);
                c.push(known, v.clone());
                c.equate(Term::Var(v), l.clone());
                c.equate(l.clone(), r.clone());
            }
        },
    }
    let (ok, problems) = check_deterministic(&c);
    if !ok {
        return Err(CliError::Protocol(problems.join("; ")));
    }
    Ok(c)
}
