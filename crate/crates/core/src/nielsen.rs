//! Bounded search over word equations whose letters are constants, variables
//! and opaque `f`/`g` blocks, optionally with derivability goals.
//!
//! Branching follows Levi's lemma on the leftmost letters of the selected
//! equation. A binding `x -> a.x` reuses the name `x` for the remainder, and
//! the witness is rebuilt backwards from the trail of bindings. Each variable
//! can be peeled at most `bound` times; hitting that cap, or the global state
//! budget, turns an exhausted search into `Unknown` rather than `Unsat`.
//!
//! Goals `(i, t)` ask for `t` to be derivable by the free intruder from the
//! `i`-th knowledge set. Under the word rules a term is derivable exactly when
//! each of its letters is, so goals are tracked letter by letter.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::subst::Substitution;
use crate::term::{Term, Var};

type Word = Vec<Term>;

#[derive(Clone, Debug, Default)]
pub(crate) struct Problem {
    pub equations: Vec<(Term, Term)>,
    pub knowledge: Vec<Vec<Term>>,
    pub goals: Vec<(usize, Term)>,
    pub forbidden: BTreeMap<Var, BTreeSet<Arc<str>>>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Limits {
    pub bound: usize,
    pub max_states: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Sat(Substitution),
    Unsat,
    Unknown,
}

#[derive(Clone, Debug)]
struct State {
    eqs: Vec<(Word, Word)>,
    goals: Vec<(usize, Term)>,
    know: Vec<Vec<Term>>,
    forbidden: BTreeMap<Var, BTreeSet<Arc<str>>>,
    peels: BTreeMap<Var, usize>,
    trail: Vec<(Var, Term)>,
}

type Key = (
    Vec<(Word, Word)>,
    Vec<(usize, Term)>,
    Vec<Vec<Term>>,
    Vec<(Var, BTreeSet<Arc<str>>)>,
);

struct Search {
    limits: Limits,
    states: usize,
    visited: BTreeSet<Key>,
    capped: bool,
}

pub(crate) fn solve(problem: &Problem, limits: Limits) -> Outcome {
    let state = State {
        eqs: problem
            .equations
            .iter()
            .map(|(l, r)| (l.canonical().letters().to_vec(), r.canonical().letters().to_vec()))
            .collect(),
        goals: problem.goals.iter().map(|(i, t)| (*i, t.canonical())).collect(),
        know: problem
            .knowledge
            .iter()
            .map(|e| e.iter().map(Term::canonical).collect())
            .collect(),
        forbidden: problem.forbidden.clone(),
        peels: BTreeMap::new(),
        trail: Vec::new(),
    };
    let mut search = Search {
        limits,
        states: 0,
        visited: BTreeSet::new(),
        capped: false,
    };
    match search.run(state) {
        Some(s) => Outcome::Sat(s),
        None if search.capped => Outcome::Unknown,
        None => Outcome::Unsat,
    }
}

fn subst_var(t: &Term, x: &Var, w: &Term) -> Term {
    if !t.has_var(x) {
        return t.clone();
    }
    t.map_bottom_up(&mut |n| match &n {
        Term::Var(v) if v == x => w.clone(),
        _ => n,
    })
}

fn subst_word(word: &[Term], x: &Var, w: &Term) -> Word {
    Term::concat(word.iter().map(|l| subst_var(l, x, w)))
        .letters()
        .to_vec()
}

fn is_block(t: &Term) -> bool {
    !t.is_var()
}

fn occurs_deep(x: &Var, letters: &[Term]) -> bool {
    letters.iter().any(|l| !l.is_var() && l.has_var(x))
}

fn top_letters(know: &[Term]) -> impl Iterator<Item = &Term> {
    know.iter().flat_map(|e| e.letters().iter())
}

enum Step {
    Nothing,
    Fail,
    Changed,
    Bind(Var, Term),
}

impl State {
    /// Applies `x -> w`; `false` when the binding violates a restriction.
    fn bind(&mut self, x: &Var, w: Term) -> bool {
        let forb = self.forbidden.get(x).cloned().unwrap_or_default();
        if !forb.is_empty() {
            let cs = w.consts();
            if cs.iter().any(|c| forb.contains(c)) {
                return false;
            }
            for y in w.vars() {
                if &y != x {
                    self.forbidden.entry(y).or_default().extend(forb.iter().cloned());
                }
            }
        }
        if !w.has_var(x) {
            self.forbidden.remove(x);
            self.peels.remove(x);
        }
        for (l, r) in &mut self.eqs {
            *l = subst_word(l, x, &w);
            *r = subst_word(r, x, &w);
        }
        for (_, g) in &mut self.goals {
            *g = subst_var(g, x, &w);
        }
        for e in &mut self.know {
            for t in e.iter_mut() {
                *t = subst_var(t, x, &w);
            }
        }
        self.trail.push((x.clone(), w));
        true
    }

    fn simplify(&mut self) -> bool {
        loop {
            let mut changed = false;
            let mut i = 0;
            while i < self.eqs.len() {
                match self.simplify_eq(i) {
                    Step::Fail => return false,
                    Step::Nothing => i += 1,
                    Step::Changed => changed = true,
                    Step::Bind(x, w) => {
                        if !self.bind(&x, w) {
                            return false;
                        }
                        changed = true;
                    }
                }
            }
            match self.simplify_goals() {
                None => return false,
                Some(c) => changed |= c,
            }
            if !changed {
                return true;
            }
        }
    }

    fn simplify_eq(&mut self, i: usize) -> Step {
        let (mut l, mut r) = self.eqs[i].clone();
        let pre = l.iter().zip(r.iter()).take_while(|(a, b)| a == b).count();
        l.drain(..pre);
        r.drain(..pre);
        let suf = l
            .iter()
            .rev()
            .zip(r.iter().rev())
            .take_while(|(a, b)| a == b)
            .count();
        l.truncate(l.len() - suf);
        r.truncate(r.len() - suf);
        let trimmed = pre + suf > 0;
        if l.is_empty() && r.is_empty() {
            self.eqs.remove(i);
            return Step::Changed;
        }
        if l.is_empty() || r.is_empty() {
            let other = if l.is_empty() { &r } else { &l };
            return match other.iter().find(|t| !t.is_var()) {
                Some(_) => Step::Fail,
                None => Step::Bind(other[0].as_var().unwrap().clone(), Term::Eps),
            };
        }
        // constant/block clashes and same-symbol decomposition at both ends
        for end in [0usize, 1] {
            let (a, b) = if end == 0 {
                (&l[0], &r[0])
            } else {
                (l.last().unwrap(), r.last().unwrap())
            };
            if is_block(a) && is_block(b) {
                let (Term::App(f, xs), Term::App(g, ys)) = (a, b) else {
                    return Step::Fail;
                };
                if f != g {
                    return Step::Fail;
                }
                let new: Vec<(Word, Word)> = xs
                    .iter()
                    .zip(ys.iter())
                    .map(|(x, y)| (x.letters().to_vec(), y.letters().to_vec()))
                    .collect();
                if end == 0 {
                    l.remove(0);
                    r.remove(0);
                } else {
                    l.pop();
                    r.pop();
                }
                self.eqs[i] = (l, r);
                self.eqs.extend(new);
                return Step::Changed;
            }
        }
        for (side, other) in [(&l, &r), (&r, &l)] {
            if let [Term::Var(x)] = side.as_slice() {
                if !other.iter().any(|t| t.has_var(x)) {
                    return Step::Bind(x.clone(), Term::from_letters(other.clone()));
                }
                if occurs_deep(x, other) {
                    return Step::Fail;
                }
            }
        }
        if !parikh_ok(&l, &r) || !parikh_ok(&r, &l) {
            return Step::Fail;
        }
        self.eqs[i] = (l, r);
        if trimmed {
            Step::Changed
        } else {
            Step::Nothing
        }
    }

    /// `None` on a goal that can never be met; otherwise whether anything
    /// changed.
    fn simplify_goals(&mut self) -> Option<bool> {
        let mut changed = false;
        let mut out: Vec<(usize, Term)> = Vec::new();
        for (i, g) in core::mem::take(&mut self.goals) {
            let letters = g.letters();
            if letters.len() != 1 {
                changed = true;
                for l in letters {
                    out.push((i, l.clone()));
                }
                continue;
            }
            out.push((i, g));
        }
        let mut kept = Vec::new();
        for (i, g) in out {
            if kept.contains(&(i, g.clone())) {
                changed = true;
                continue;
            }
            let know = &self.know[i];
            let present = top_letters(know).any(|l| *l == g);
            if present {
                changed = true;
                continue;
            }
            if !matches!(g, Term::Var(_) | Term::App(..)) {
                return None;
            }
            kept.push((i, g));
        }
        self.goals = kept;
        Some(changed)
    }

    fn key(&self) -> Key {
        let mut eqs = self.eqs.clone();
        for (l, r) in &mut eqs {
            if r < l {
                core::mem::swap(l, r);
            }
        }
        eqs.sort();
        eqs.dedup();
        let mut goals = self.goals.clone();
        goals.sort();
        (
            eqs,
            goals,
            self.know.clone(),
            self.forbidden
                .iter()
                .filter(|(_, s)| !s.is_empty())
                .map(|(v, s)| (v.clone(), s.clone()))
                .collect(),
        )
    }

    fn witness(&self) -> Substitution {
        let mut map: BTreeMap<Var, Term> = BTreeMap::new();
        for (x, w) in self.trail.iter().rev() {
            let v = w.map_bottom_up(&mut |n| match &n {
                Term::Var(y) => map.get(y).cloned().unwrap_or(Term::Eps),
                _ => n,
            });
            map.insert(x.clone(), v);
        }
        map.into_iter().collect()
    }
}

/// With one side variable-free, the other side's non-variable letters must
/// fit into it, letter by letter.
fn parikh_ok(fixed: &[Term], other: &[Term]) -> bool {
    if fixed.iter().any(Term::is_var) {
        return true;
    }
    let nonvar: Vec<&Term> = other.iter().filter(|t| !t.is_var()).collect();
    if nonvar.len() > fixed.len() {
        return false;
    }
    let mut counts: BTreeMap<&Term, isize> = BTreeMap::new();
    for t in fixed.iter().filter(|t| !matches!(t, Term::App(..))) {
        *counts.entry(t).or_default() += 1;
    }
    for t in nonvar.iter().filter(|t| !matches!(t, Term::App(..))) {
        let c = counts.entry(t).or_default();
        *c -= 1;
        if *c < 0 {
            return false;
        }
    }
    true
}

impl Search {
    fn run(&mut self, mut state: State) -> Option<Substitution> {
        if !state.simplify() {
            return None;
        }
        if self.states >= self.limits.max_states {
            self.capped = true;
            return None;
        }
        self.states += 1;
        if !self.visited.insert(state.key()) {
            return None;
        }
        if !state.eqs.is_empty() {
            let idx = (0..state.eqs.len())
                .min_by(|&a, &b| {
                    let (la, ra) = &state.eqs[a];
                    let (lb, rb) = &state.eqs[b];
                    (la.len() + ra.len(), la, ra).cmp(&(lb.len() + rb.len(), lb, rb))
                })
                .unwrap();
            let (l, r) = state.eqs[idx].clone();
            for (x, w) in self.branches(&state, &l[0], &r[0]) {
                let mut next = state.clone();
                if w.has_var(&x) {
                    *next.peels.entry(x.clone()).or_default() += 1;
                }
                if next.bind(&x, w) {
                    if let Some(s) = self.run(next) {
                        return Some(s);
                    }
                }
            }
            return None;
        }
        if let Some(pos) = state.goals.iter().position(|(_, g)| !g.is_var()) {
            let (i, g) = state.goals[pos].clone();
            let Term::App(fun, args) = &g else {
                return None;
            };
            let mut candidates: Vec<Term> = top_letters(&state.know[i])
                .filter(|l| matches!(l, Term::App(f, _) if f == fun))
                .cloned()
                .collect();
            candidates.sort();
            candidates.dedup();
            for e in candidates {
                let mut next = state.clone();
                next.goals.remove(pos);
                next.eqs.push((alloc::vec![g.clone()], alloc::vec![e]));
                if let Some(s) = self.run(next) {
                    return Some(s);
                }
            }
            let mut next = state.clone();
            next.goals.remove(pos);
            for a in args.iter() {
                next.goals.push((i, a.clone()));
            }
            return self.run(next);
        }
        Some(state.witness())
    }

    fn branches(&mut self, state: &State, a: &Term, b: &Term) -> Vec<(Var, Term)> {
        let mut out = Vec::new();
        let mut peel = |x: &Var, head: &Term, out: &mut Vec<(Var, Term)>| {
            if head.has_var(x) {
                return;
            }
            if state.peels.get(x).copied().unwrap_or(0) >= self.limits.bound {
                self.capped = true;
                return;
            }
            out.push((x.clone(), Term::concat([head.clone(), Term::Var(x.clone())])));
        };
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                out.push((x.clone(), Term::Eps));
                out.push((y.clone(), Term::Eps));
                peel(x, b, &mut out);
                peel(y, a, &mut out);
            }
            (Term::Var(x), _) => {
                out.push((x.clone(), Term::Eps));
                peel(x, b, &mut out);
            }
            (_, Term::Var(y)) => {
                out.push((y.clone(), Term::Eps));
                peel(y, a, &mut out);
            }
            _ => unreachable!("simplify resolves non-variable heads"),
        }
        out
    }
}
