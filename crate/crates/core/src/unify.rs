//! Unification systems with linear constant restrictions.
//!
//! A restriction `x < c` forbids the constant `c` from occurring in the value
//! of `x`. Word equations are solved by the bounded search in the `nielsen`
//! module; f/g terms by syntactic unification.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::nielsen::{self, Limits, Outcome, Problem};
use crate::subst::Substitution;
use crate::term::{Term, Var};

/// Result of a bounded solver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat(Substitution),
    Unsat,
    /// The search hit a bound before it could conclude.
    Unknown(usize),
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, Verdict::Unsat)
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn witness(&self) -> Option<&Substitution> {
        match self {
            Verdict::Sat(s) => Some(s),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "SAT",
            Verdict::Unsat => "UNSAT",
            Verdict::Unknown(_) => "UNKNOWN",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Sat(s) => write!(f, "SAT {s}"),
            Verdict::Unsat => f.write_str("UNSAT"),
            Verdict::Unknown(b) => write!(f, "UNKNOWN (bound {b})"),
        }
    }
}

/// Bounds for the word-equation search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// How many letters may be peeled off any single variable.
    pub bound: usize,
    /// Total number of search states.
    pub max_states: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            bound: 8,
            max_states: 100_000,
        }
    }
}

impl SearchLimits {
    pub fn with_bound(bound: usize) -> Self {
        SearchLimits {
            bound,
            ..SearchLimits::default()
        }
    }

    pub(crate) fn engine(self) -> Limits {
        Limits {
            bound: self.bound.max(1),
            max_states: self.max_states,
        }
    }
}

/// A variable or a free constant, as ordered by an [`OrderingConstraint`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(Var),
    Const(Arc<str>),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Var(v) => write!(f, "{v}"),
            Atom::Const(c) => f.write_str(c),
        }
    }
}

impl Atom {
    pub fn cst(name: &str) -> Atom {
        Atom::Const(Arc::from(name))
    }
}

/// A strict order on atoms given by generating pairs `a < b`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrderingConstraint {
    pairs: BTreeSet<(Atom, Atom)>,
}

impl OrderingConstraint {
    pub fn new() -> Self {
        OrderingConstraint::default()
    }

    pub fn add(&mut self, lo: Atom, hi: Atom) {
        self.pairs.insert((lo, hi));
    }

    /// `x < c`: `c` may not occur in the value of `x`.
    pub fn restrict(&mut self, x: Var, c: &str) {
        self.add(Atom::Var(x), Atom::cst(c));
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(Atom, Atom)> {
        self.pairs.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn union(&self, other: &OrderingConstraint) -> OrderingConstraint {
        OrderingConstraint {
            pairs: self.pairs.union(&other.pairs).cloned().collect(),
        }
    }

    /// Transitive closure of the generating pairs.
    pub fn closure(&self) -> BTreeSet<(Atom, Atom)> {
        let mut succ: BTreeMap<&Atom, BTreeSet<&Atom>> = BTreeMap::new();
        for (a, b) in &self.pairs {
            succ.entry(a).or_default().insert(b);
        }
        let mut out = BTreeSet::new();
        for start in succ.keys() {
            let mut seen: BTreeSet<&Atom> = BTreeSet::new();
            let mut stack: Vec<&Atom> = succ[start].iter().copied().collect();
            while let Some(n) = stack.pop() {
                if seen.insert(n) {
                    if let Some(next) = succ.get(n) {
                        stack.extend(next.iter().copied());
                    }
                }
            }
            for n in seen {
                out.insert(((*start).clone(), n.clone()));
            }
        }
        out
    }

    /// Errors when the closure relates an atom to itself.
    pub fn check(&self) -> Result<(), Error> {
        match self.closure().into_iter().find(|(a, b)| a == b) {
            Some((a, _)) => Err(Error::CyclicOrdering(a.to_string())),
            None => Ok(()),
        }
    }

    /// For each variable, the constants it must not contain.
    pub fn forbidden(&self) -> BTreeMap<Var, BTreeSet<Arc<str>>> {
        let mut out: BTreeMap<Var, BTreeSet<Arc<str>>> = BTreeMap::new();
        for (a, b) in self.closure() {
            if let (Atom::Var(x), Atom::Const(c)) = (a, b) {
                out.entry(x).or_default().insert(c);
            }
        }
        out
    }

    /// `c` does not occur in `x sigma` for every derived `x < c`.
    pub fn satisfied_by(&self, s: &Substitution) -> bool {
        self.forbidden().iter().all(|(x, cs)| {
            let v = s.apply(&Term::Var(x.clone()));
            let present = v.consts();
            cs.iter().all(|c| !present.contains(c))
        })
    }
}

impl fmt::Display for OrderingConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a} < {b}")?;
        }
        Ok(())
    }
}

/// A finite set of equations `u =? v`, stored canonically.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnificationSystem {
    equations: Vec<(Term, Term)>,
}

impl UnificationSystem {
    pub fn new() -> Self {
        UnificationSystem::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Term, Term)>>(pairs: I) -> Self {
        let mut s = UnificationSystem::new();
        for (l, r) in pairs {
            s.push(l, r);
        }
        s
    }

    pub fn push(&mut self, l: Term, r: Term) {
        let eq = (l.canonical(), r.canonical());
        if !self.equations.contains(&eq) {
            self.equations.push(eq);
        }
    }

    pub fn equations(&self) -> &[(Term, Term)] {
        &self.equations
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for (l, r) in &self.equations {
            l.collect_vars(&mut out);
            r.collect_vars(&mut out);
        }
        out
    }

    /// Every equation holds modulo AU under `s`.
    pub fn satisfied_by(&self, s: &Substitution) -> bool {
        self.equations.iter().all(|(l, r)| s.apply(l) == s.apply(r))
    }
}

/// Word unification with linear constant restrictions.
pub fn solve_au_lcr(
    s: &UnificationSystem,
    ord: &OrderingConstraint,
    limits: &SearchLimits,
) -> Result<Verdict, Error> {
    for (l, r) in s.equations() {
        for t in [l, r] {
            if !t.is_word() {
                return Err(Error::NotWord(t.clone()));
            }
        }
    }
    ord.check()?;
    let problem = Problem {
        equations: s.equations().to_vec(),
        forbidden: ord.forbidden(),
        ..Problem::default()
    };
    Ok(finish(nielsen::solve(&problem, limits.engine()), s, limits.bound))
}

pub(crate) fn finish(outcome: Outcome, s: &UnificationSystem, bound: usize) -> Verdict {
    match outcome {
        Outcome::Sat(w) => {
            let mut full = Substitution::new();
            for v in s.vars() {
                let t = w.get(&v).cloned().unwrap_or(Term::Eps);
                full.insert(v, t);
            }
            Verdict::Sat(full)
        }
        Outcome::Unsat => Verdict::Unsat,
        Outcome::Unknown => Verdict::Unknown(bound),
    }
}

/// Most general unifier for free symbols (concatenation, if present, is
/// compared as an ordinary symbol of its arity), with occurs check.
pub fn mgu(equations: &[(Term, Term)]) -> Option<Substitution> {
    let mut s = Substitution::new();
    let mut todo: Vec<(Term, Term)> = equations.to_vec();
    while let Some((a, b)) = todo.pop() {
        let (a, b) = (s.apply(&a), s.apply(&b));
        if a == b {
            continue;
        }
        match (&a, &b) {
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if t.has_var(x) {
                    return None;
                }
                let one = Substitution::singleton(x.clone(), t.clone());
                s = s.then(&one);
                s.insert(x.clone(), t.clone());
            }
            (Term::Concat(xs), Term::Concat(ys)) if xs.len() == ys.len() => {
                todo.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
            (Term::Hash(x), Term::Hash(y)) => todo.push(((**x).clone(), (**y).clone())),
            (Term::App(f, xs), Term::App(g, ys)) if f == g => {
                todo.extend(xs.iter().cloned().zip(ys.iter().cloned()));
            }
            _ => return None,
        }
    }
    Some(s)
}

/// Syntactic unification followed by a restriction check on the mgu. Never
/// returns `Unknown`.
pub fn solve_syntactic_lcr(s: &UnificationSystem, ord: &OrderingConstraint) -> Result<Verdict, Error> {
    ord.check()?;
    Ok(match mgu(s.equations()) {
        Some(sigma) if ord.satisfied_by(&sigma) => Verdict::Sat(sigma),
        _ => Verdict::Unsat,
    })
}

/// All words over `alphabet` of length at most `maxlen`, shortest first.
pub fn words_up_to(alphabet: &[Term], maxlen: usize) -> Vec<Term> {
    let mut out = alloc::vec![Term::Eps];
    let mut layer: Vec<Vec<Term>> = alloc::vec![Vec::new()];
    for _ in 0..maxlen {
        let mut next = Vec::new();
        for w in &layer {
            for a in alphabet {
                let mut w2 = w.clone();
                w2.push(a.clone());
                out.push(Term::from_letters(w2.clone()));
                next.push(w2);
            }
        }
        layer = next;
    }
    out
}

/// Exhaustive search over all substitutions mapping each variable to a word
/// of length at most `maxlen` over `alphabet`. `Unsat` means no witness in
/// that range.
pub fn brute_force_unify(
    s: &UnificationSystem,
    ord: &OrderingConstraint,
    alphabet: &[Term],
    maxlen: usize,
) -> Verdict {
    let vars: Vec<Var> = s.vars().into_iter().collect();
    let words = words_up_to(alphabet, maxlen);
    let mut idx = alloc::vec![0usize; vars.len()];
    loop {
        let sigma: Substitution = vars
            .iter()
            .cloned()
            .zip(idx.iter().map(|&i| words[i].clone()))
            .collect();
        if s.satisfied_by(&sigma) && ord.satisfied_by(&sigma) {
            return Verdict::Sat(sigma);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return Verdict::Unsat;
            }
            idx[k] += 1;
            if idx[k] < words.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
