//! Terms over the hash signature: concatenation, the empty word, the two
//! collision-algorithm symbols `f`/`g` and the hash `h`, plus free constants
//! and variables.
//!
//! Every constructor keeps concatenations in the canonical AU form: argument
//! lists are flat, never contain `Eps`, and always have at least two elements.
//! Two terms are equal modulo associativity and unit exactly when their
//! canonical forms are structurally equal.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

/// Partition tag of a variable. `X0` variables have signature 0, `X1` have 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Partition {
    X0,
    X1,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: Arc<str>,
    pub part: Partition,
}

impl Var {
    pub fn new(name: &str) -> Self {
        Var {
            name: Arc::from(name),
            part: Partition::X0,
        }
    }

    pub fn with_partition(name: &str, part: Partition) -> Self {
        Var {
            name: Arc::from(name),
            part,
        }
    }

    /// A variable derived from this one, outside the user namespace
    /// (user names never contain `#`).
    pub fn fresh(&self, counter: usize) -> Self {
        Var {
            name: Arc::from(alloc::format!("{}#{}", self.name, counter).as_str()),
            part: self.part,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.part {
            Partition::X0 => write!(f, "?{}", self.name),
            Partition::X1 => write!(f, "!{}", self.name),
        }
    }
}

/// The two free symbols of arity 4 produced by the collision-finding algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fun {
    F,
    G,
}

impl Fun {
    pub fn name(self) -> &'static str {
        match self {
            Fun::F => "f",
            Fun::G => "g",
        }
    }

    pub fn other(self) -> Fun {
        match self {
            Fun::F => Fun::G,
            Fun::G => Fun::F,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Const(Arc<str>),
    Eps,
    /// Flat, `Eps`-free, at least two elements, none of them a `Concat`.
    Concat(Vec<Term>),
    Hash(Box<Term>),
    App(Fun, Box<[Term; 4]>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn cst(name: &str) -> Term {
        Term::Const(Arc::from(name))
    }

    pub fn hash(t: Term) -> Term {
        Term::Hash(Box::new(t))
    }

    pub fn app(fun: Fun, args: [Term; 4]) -> Term {
        Term::App(fun, Box::new(args))
    }

    pub fn f(a: Term, b: Term, c: Term, d: Term) -> Term {
        Term::app(Fun::F, [a, b, c, d])
    }

    pub fn g(a: Term, b: Term, c: Term, d: Term) -> Term {
        Term::app(Fun::G, [a, b, c, d])
    }

    /// Concatenation in canonical form: nested concatenations are spliced,
    /// `Eps` elements dropped, and 0/1-element results collapse.
    pub fn concat<I: IntoIterator<Item = Term>>(parts: I) -> Term {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Term::Eps => {}
                Term::Concat(items) => out.extend(items),
                other => out.push(other),
            }
        }
        Term::from_letters(out)
    }

    /// Builds a word from letters that are already non-`Eps`, non-`Concat`.
    pub fn from_letters(mut letters: Vec<Term>) -> Term {
        match letters.len() {
            0 => Term::Eps,
            1 => letters.pop().unwrap(),
            _ => Term::Concat(letters),
        }
    }

    /// The top-level letters of this term read as a word.
    pub fn letters(&self) -> &[Term] {
        match self {
            Term::Eps => &[],
            Term::Concat(items) => items,
            other => core::slice::from_ref(other),
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Term::Var(_) | Term::Const(_) | Term::Eps)
    }

    /// Immediate syntactic arguments.
    pub fn args(&self) -> &[Term] {
        match self {
            Term::Concat(items) => items,
            Term::Hash(t) => core::slice::from_ref(&**t),
            Term::App(_, args) => &args[..],
            _ => &[],
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            _ => self.args().iter().all(Term::is_ground),
        }
    }

    pub fn contains_hash(&self) -> bool {
        match self {
            Term::Hash(_) => true,
            _ => self.args().iter().any(Term::contains_hash),
        }
    }

    pub fn contains_app(&self) -> bool {
        match self {
            Term::App(..) => true,
            _ => self.args().iter().any(Term::contains_app),
        }
    }

    pub fn contains_fun(&self, fun: Fun) -> bool {
        match self {
            Term::App(g, _) if *g == fun => true,
            _ => self.args().iter().any(|a| a.contains_fun(fun)),
        }
    }

    /// True for terms built only from constants, variables, `Eps` and `.`.
    pub fn is_word(&self) -> bool {
        self.letters()
            .iter()
            .all(|l| matches!(l, Term::Var(_) | Term::Const(_)))
    }

    /// Symbol count; concatenation nodes are free so a word's size is its length.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) | Term::Eps => 1,
            Term::Concat(items) => items.iter().map(Term::size).sum(),
            Term::Hash(t) => 1 + t.size(),
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.args().iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            _ => self.args().iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn has_var(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            _ => self.args().iter().any(|a| a.has_var(v)),
        }
    }

    pub fn consts(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_consts(&mut out);
        out
    }

    pub fn collect_consts(&self, out: &mut BTreeSet<Arc<str>>) {
        match self {
            Term::Const(c) => {
                out.insert(c.clone());
            }
            _ => self.args().iter().for_each(|a| a.collect_consts(out)),
        }
    }

    /// All syntactic subterms (including `self`), in pre-order.
    pub fn syntactic_subterms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![self];
        while let Some(t) = stack.pop() {
            out.push(t);
            for a in t.args().iter().rev() {
                stack.push(a);
            }
        }
        out
    }

    pub fn has_subterm(&self, needle: &Term) -> bool {
        self == needle || self.args().iter().any(|a| a.has_subterm(needle))
    }

    /// Rebuilds the term through the canonical constructors.
    pub fn canonical(&self) -> Term {
        match self {
            Term::Var(_) | Term::Const(_) | Term::Eps => self.clone(),
            Term::Concat(items) => Term::concat(items.iter().map(Term::canonical)),
            Term::Hash(t) => Term::hash(t.canonical()),
            Term::App(fun, args) => Term::app(*fun, args.clone().map(|a| a.canonical())),
        }
    }

    /// Bottom-up map over every node; the result is re-canonicalized.
    pub fn map_bottom_up(&self, f: &mut dyn FnMut(Term) -> Term) -> Term {
        let rebuilt = match self {
            Term::Var(_) | Term::Const(_) | Term::Eps => self.clone(),
            Term::Concat(items) => Term::concat(items.iter().map(|t| t.map_bottom_up(f))),
            Term::Hash(t) => Term::hash(t.map_bottom_up(f)),
            Term::App(fun, args) => {
                let [a, b, c, d] = &**args;
                Term::app(
                    *fun,
                    [
                        a.map_bottom_up(f),
                        b.map_bottom_up(f),
                        c.map_bottom_up(f),
                        d.map_bottom_up(f),
                    ],
                )
            }
        };
        f(rebuilt)
    }

    /// Replaces every occurrence of `from` (top-down, outermost first) by `to`.
    pub fn replace(&self, from: &Term, to: &Term) -> Term {
        if self == from {
            return to.clone();
        }
        match self {
            Term::Var(_) | Term::Const(_) | Term::Eps => self.clone(),
            Term::Concat(items) => {
                // a contiguous run of letters may spell `from` when it is a word
                let needle = from.letters();
                if needle.len() >= 2 {
                    let mut out = Vec::new();
                    let mut i = 0;
                    while i < items.len() {
                        if items[i..].starts_with(needle) {
                            out.push(to.clone());
                            i += needle.len();
                        } else {
                            out.push(items[i].replace(from, to));
                            i += 1;
                        }
                    }
                    Term::concat(out)
                } else {
                    Term::concat(items.iter().map(|t| t.replace(from, to)))
                }
            }
            Term::Hash(t) => Term::hash(t.replace(from, to)),
            Term::App(fun, args) => Term::app(*fun, args.clone().map(|a| a.replace(from, to))),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Eps => f.write_str("eps"),
            Term::Concat(items) => {
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" . ")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
            Term::Hash(t) => write!(f, "h({t})"),
            Term::App(fun, args) => write!(
                f,
                "{}({}, {}, {}, {})",
                fun.name(),
                args[0],
                args[1],
                args[2],
                args[3]
            ),
        }
    }
}

/// A position in a canonical term: a path of 1-based argument indices.
/// The empty path is the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, index: usize) -> Position {
        let mut p = self.0.clone();
        p.push(index);
        Position(p)
    }

    pub fn parent(&self) -> Option<(Position, usize)> {
        let (last, rest) = self.0.split_last()?;
        Some((Position(rest.to_vec()), *last))
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl Term {
    /// Every position of the term in pre-order, paired with its subterm.
    pub fn positions(&self) -> Vec<(Position, &Term)> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![(Position::root(), self)];
        while let Some((p, t)) = stack.pop() {
            for (i, a) in t.args().iter().enumerate().rev() {
                stack.push((p.child(i + 1), a));
            }
            out.push((p, t));
        }
        out
    }

    pub fn at(&self, p: &Position) -> Option<&Term> {
        let mut t = self;
        for &i in &p.0 {
            t = t.args().get(i.checked_sub(1)?)?;
        }
        Some(t)
    }
}

/// Collects the free constants of a set of terms.
pub fn consts_of<'a, I: IntoIterator<Item = &'a Term>>(terms: I) -> BTreeSet<Arc<str>> {
    let mut out = BTreeSet::new();
    for t in terms {
        t.collect_consts(&mut out);
    }
    out
}

pub fn vars_of<'a, I: IntoIterator<Item = &'a Term>>(terms: I) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    for t in terms {
        t.collect_vars(&mut out);
    }
    out
}
