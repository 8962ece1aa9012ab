//! Ground derivability for the five intruders, with replayable derivations.
//!
//! * `AU`: words only; `x,y -> x.y`, `x.y -> x`, `x.y -> y`, `-> eps`.
//! * `F`, `G`: composition `x1,x2,y1,y2 -> f(x1,x2,y1,y2)` (resp. `g`).
//! * `FREE`: the disjoint union of the three.
//! * `H`: `FREE` plus `x -> h(x)`, everything taken modulo `E_h`.
//!
//! For the word rules, the closure of `E` is every word whose letters are
//! letters of some element of `E`, plus `eps`: any single letter can be cut
//! out with a suffix step followed by a prefix step. The deciders below run a
//! segment DP over the goal's letters, where `f`/`g`/`h` blocks are letters
//! that may also be composed from their own derivable arguments.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::theory::{collision_partner, eq_h, words_eq_h};
use crate::term::{Fun, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IntruderSystem {
    Au,
    F,
    G,
    Free,
    H,
}

impl IntruderSystem {
    pub fn name(self) -> &'static str {
        match self {
            IntruderSystem::Au => "au",
            IntruderSystem::F => "f",
            IntruderSystem::G => "g",
            IntruderSystem::Free => "free",
            IntruderSystem::H => "h",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "au" => IntruderSystem::Au,
            "f" => IntruderSystem::F,
            "g" => IntruderSystem::G,
            "free" => IntruderSystem::Free,
            "h" => IntruderSystem::H,
            _ => return None,
        })
    }

    fn has_words(self) -> bool {
        matches!(self, IntruderSystem::Au | IntruderSystem::Free | IntruderSystem::H)
    }

    fn composes(self, fun: Fun) -> bool {
        match self {
            IntruderSystem::Au => false,
            IntruderSystem::F => fun == Fun::F,
            IntruderSystem::G => fun == Fun::G,
            IntruderSystem::Free | IntruderSystem::H => true,
        }
    }

    fn hashes(self) -> bool {
        self == IntruderSystem::H
    }

    pub fn allows(self, rule: Rule) -> bool {
        match rule {
            Rule::Empty | Rule::Concat | Rule::Prefix | Rule::Suffix => self.has_words(),
            Rule::ComposeF => self.composes(Fun::F),
            Rule::ComposeG => self.composes(Fun::G),
            Rule::Hash | Rule::HashHc | Rule::EqHc => self.hashes(),
        }
    }

    fn same(self, a: &Term, b: &Term) -> bool {
        if self.hashes() {
            eq_h(a, b)
        } else {
            a == b
        }
    }

    fn same_word(self, a: &[Term], b: &[Term]) -> bool {
        if self.hashes() {
            words_eq_h(a, b)
        } else {
            a == b
        }
    }
}

impl fmt::Display for IntruderSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// `-> eps`
    Empty,
    /// `x, y -> x.y`
    Concat,
    /// `x.y -> x`
    Prefix,
    /// `x.y -> y`
    Suffix,
    ComposeF,
    ComposeG,
    /// `x -> h(x)`
    Hash,
    /// `x -> h(x)`, recorded with the collision-equal form of the result.
    HashHc,
    /// Rewrites a known term into an `E_h`-equal one; not an intruder step.
    EqHc,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Empty => "empty",
            Rule::Concat => "concat",
            Rule::Prefix => "prefix",
            Rule::Suffix => "suffix",
            Rule::ComposeF => "compose-f",
            Rule::ComposeG => "compose-g",
            Rule::Hash => "hash",
            Rule::HashHc => "hash-hc",
            Rule::EqHc => "eq-hc",
        }
    }

    pub fn compose(fun: Fun) -> Rule {
        match fun {
            Fun::F => Rule::ComposeF,
            Fun::G => Rule::ComposeG,
        }
    }

    /// True for steps whose justification needs the collision equation.
    pub fn uses_collision(self) -> bool {
        matches!(self, Rule::HashHc | Rule::EqHc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule: Rule,
    pub premises: Vec<Term>,
    pub derived: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub system: IntruderSystem,
    pub initial: Vec<Term>,
    pub goal: Term,
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayError {
    /// Index of the failing step, or `steps.len()` when the goal is missing.
    pub step: usize,
    pub reason: String,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.step, self.reason)
    }
}

impl Derivation {
    pub fn uses_collision(&self) -> bool {
        self.steps.iter().any(|s| s.rule.uses_collision())
    }

    /// Re-executes the derivation from its initial set.
    pub fn replay(&self) -> Result<(), ReplayError> {
        let mut known: BTreeSet<Term> = self.initial.iter().map(Term::canonical).collect();
        for (i, step) in self.steps.iter().enumerate() {
            let fail = |reason: &str| ReplayError {
                step: i,
                reason: String::from(reason),
            };
            if !self.system.allows(step.rule) {
                return Err(fail("rule not available to this intruder"));
            }
            for p in &step.premises {
                if !known.contains(&p.canonical()) {
                    return Err(ReplayError {
                        step: i,
                        reason: alloc::format!("premise {p} is not known"),
                    });
                }
            }
            let d = step.derived.canonical();
            let ok = match (step.rule, step.premises.as_slice()) {
                (Rule::Empty, []) => d == Term::Eps,
                (Rule::Concat, [a, b]) => d == Term::concat([a.clone(), b.clone()]).canonical(),
                (Rule::Prefix, [w]) => w.canonical().letters().starts_with(d.letters()),
                (Rule::Suffix, [w]) => w.canonical().letters().ends_with(d.letters()),
                (Rule::ComposeF | Rule::ComposeG, [a, b, c, e]) => {
                    let fun = if step.rule == Rule::ComposeF { Fun::F } else { Fun::G };
                    d == Term::app(fun, [a.clone(), b.clone(), c.clone(), e.clone()]).canonical()
                }
                (Rule::Hash, [m]) => d == Term::hash(m.canonical()),
                (Rule::HashHc, [m]) => {
                    matches!(d, Term::Hash(_)) && eq_h(&Term::hash(m.canonical()), &d)
                }
                (Rule::EqHc, [m]) => eq_h(&m.canonical(), &d),
                _ => false,
            };
            if !ok {
                return Err(fail("conclusion does not follow from the premises"));
            }
            known.insert(d);
        }
        if known.contains(&self.goal.canonical()) {
            Ok(())
        } else {
            Err(ReplayError {
                step: self.steps.len(),
                reason: alloc::format!("goal {} was not derived", self.goal),
            })
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            write!(f, "{:>3}. {:<9} ", i + 1, s.rule.name())?;
            for (j, p) in s.premises.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{p}")?;
            }
            writeln!(f, "  =>  {}", s.derived)?;
        }
        Ok(())
    }
}

/// One segment of a goal word: either cut out of a known word, or a single
/// block built by composition or hashing.
#[derive(Clone, Debug)]
enum Segment {
    /// Letters `start..end` of element `elem`.
    Factor { elem: usize, start: usize, end: usize },
    Block,
}

struct Engine {
    system: IntruderSystem,
    elems: Vec<Term>,
    memo: BTreeMap<Term, bool>,
    known: BTreeSet<Term>,
    steps: Vec<Step>,
}

impl Engine {
    fn new(system: IntruderSystem, e: &[Term]) -> Self {
        let mut elems: Vec<Term> = Vec::new();
        for t in e {
            let t = t.canonical();
            if !elems.contains(&t) {
                elems.push(t);
            }
        }
        let known = elems.iter().cloned().collect();
        Engine {
            system,
            elems,
            memo: BTreeMap::new(),
            known,
            steps: Vec::new(),
        }
    }

    fn in_elems(&self, t: &Term) -> Option<usize> {
        self.elems.iter().position(|e| self.system.same(e, t))
    }

    /// Earliest occurrence of `word` as a contiguous factor of an element.
    fn find_factor(&self, word: &[Term]) -> Option<(usize, usize)> {
        for (ei, e) in self.elems.iter().enumerate() {
            let letters = e.letters();
            if word.len() > letters.len() {
                continue;
            }
            for s in 0..=letters.len() - word.len() {
                if self.system.same_word(&letters[s..s + word.len()], word) {
                    return Some((ei, s));
                }
            }
        }
        None
    }

    fn derivable(&mut self, t: &Term) -> bool {
        if let Some(&b) = self.memo.get(t) {
            return b;
        }
        let b = if self.in_elems(t).is_some() {
            true
        } else if self.system.has_words() {
            self.segments(t).is_some()
        } else {
            self.block_derivable(t)
        };
        self.memo.insert(t.clone(), b);
        b
    }

    fn block_derivable(&mut self, t: &Term) -> bool {
        match t {
            Term::App(fun, args) if self.system.composes(*fun) => {
                args.iter().all(|a| self.derivable(a))
            }
            Term::Hash(m) if self.system.hashes() => {
                self.derivable(m)
                    || collision_partner(m).is_some_and(|p| self.derivable(&p))
            }
            _ => false,
        }
    }

    /// Fewest-segment factorization of a word goal, leftmost on ties.
    fn segments(&mut self, t: &Term) -> Option<Vec<(usize, usize, Segment)>> {
        let letters: Vec<Term> = t.letters().to_vec();
        let n = letters.len();
        let mut best: Vec<Option<(usize, usize, Segment)>> = alloc::vec![None; n + 1];
        let mut cost: Vec<usize> = alloc::vec![usize::MAX; n + 1];
        cost[0] = 0;
        for j in 1..=n {
            for i in 0..j {
                if cost[i] == usize::MAX || cost[i] + 1 >= cost[j] {
                    continue;
                }
                let seg = if let Some((elem, start)) = self.find_factor(&letters[i..j]) {
                    Some(Segment::Factor {
                        elem,
                        start,
                        end: start + (j - i),
                    })
                } else if j == i + 1 && self.block_derivable(&letters[i]) {
                    Some(Segment::Block)
                } else {
                    None
                };
                if let Some(seg) = seg {
                    cost[j] = cost[i] + 1;
                    best[j] = Some((i, j, seg));
                }
            }
        }
        if cost[n] == usize::MAX {
            return None;
        }
        let mut out = Vec::new();
        let mut j = n;
        while j > 0 {
            let (i, jj, seg) = best[j].clone().expect("reachable");
            out.push((i, jj, seg));
            j = i;
        }
        out.reverse();
        Some(out)
    }

    fn push(&mut self, rule: Rule, premises: Vec<Term>, derived: Term) -> Term {
        if !self.known.contains(&derived) {
            self.known.insert(derived.clone());
            self.steps.push(Step {
                rule,
                premises,
                derived: derived.clone(),
            });
        }
        derived
    }

    /// Emits steps for `t` (assumed derivable) and returns the term actually
    /// produced, which equals `t` modulo the intruder's theory.
    fn build(&mut self, t: &Term) -> Term {
        if self.known.contains(t) {
            return t.clone();
        }
        if let Some(i) = self.in_elems(t) {
            return self.elems[i].clone();
        }
        if *t == Term::Eps && self.system.has_words() {
            return self.push(Rule::Empty, Vec::new(), Term::Eps);
        }
        if !self.system.has_words() {
            return self.build_block(t);
        }
        let segs = self.segments(t).expect("build called on a derivable goal");
        let letters = t.letters().to_vec();
        let mut acc: Option<Term> = None;
        for (i, _, seg) in segs {
            let piece = match seg {
                Segment::Block => self.build_block(&letters[i]),
                Segment::Factor { elem, start, end } => self.extract(elem, start, end),
            };
            acc = Some(match acc {
                None => piece,
                Some(prev) => {
                    let joined = Term::concat([prev.clone(), piece.clone()]);
                    self.push(Rule::Concat, alloc::vec![prev, piece], joined)
                }
            });
        }
        acc.unwrap_or(Term::Eps)
    }

    fn extract(&mut self, elem: usize, start: usize, end: usize) -> Term {
        let e = self.elems[elem].clone();
        let letters = e.letters().to_vec();
        if start == 0 && end == letters.len() {
            return e;
        }
        let word = Term::from_letters(letters[start..end].to_vec());
        if self.known.contains(&word) {
            return word;
        }
        if start == 0 {
            return self.push(Rule::Prefix, alloc::vec![e], word);
        }
        let suffix = Term::from_letters(letters[start..].to_vec());
        let suffix = self.push(Rule::Suffix, alloc::vec![e], suffix);
        if end == letters.len() {
            return suffix;
        }
        self.push(Rule::Prefix, alloc::vec![suffix], word)
    }

    fn build_block(&mut self, t: &Term) -> Term {
        match t {
            Term::App(fun, args) => {
                let built: Vec<Term> = args.iter().map(|a| self.build(a)).collect();
                let arr: [Term; 4] = built.clone().try_into().expect("four arguments");
                self.push(Rule::compose(*fun), built, Term::app(*fun, arr))
            }
            Term::Hash(m) => {
                if self.derivable(m) {
                    let mm = self.build(m);
                    self.push(Rule::Hash, alloc::vec![mm.clone()], Term::hash(mm))
                } else {
                    let p = collision_partner(m).expect("derivable through a collision");
                    let pp = self.build(&p);
                    self.push(Rule::HashHc, alloc::vec![pp], t.clone())
                }
            }
            _ => unreachable!("only blocks are composed"),
        }
    }

    fn derivation(mut self, goal: &Term) -> Option<Derivation> {
        if !self.derivable(goal) {
            return None;
        }
        let got = self.build(goal);
        if got != *goal {
            self.push(Rule::EqHc, alloc::vec![got], goal.clone());
        }
        Some(Derivation {
            system: self.system,
            initial: self.elems,
            goal: goal.clone(),
            steps: self.steps,
        })
    }
}

fn check_ground(terms: &[Term], goal: &Term) -> Result<(), Error> {
    for t in terms.iter().chain([goal]) {
        if !t.is_ground() {
            return Err(Error::NotGround(t.clone()));
        }
    }
    Ok(())
}

/// Derivability for the word intruder.
pub fn derivable_au(e: &[Term], t: &Term) -> Result<Option<Derivation>, Error> {
    check_ground(e, t)?;
    for x in e.iter().chain([t]) {
        if !x.is_word() {
            return Err(Error::NotWord(x.clone()));
        }
    }
    Ok(Engine::new(IntruderSystem::Au, e).derivation(&t.canonical()))
}

/// Derivability for the `f`-only or `g`-only composition intruder. Terms
/// built from other symbols are opaque and only available when known.
pub fn derivable_compose(e: &[Term], t: &Term, sym: Fun) -> Result<Option<Derivation>, Error> {
    check_ground(e, t)?;
    let system = match sym {
        Fun::F => IntruderSystem::F,
        Fun::G => IntruderSystem::G,
    };
    Ok(Engine::new(system, e).derivation(&t.canonical()))
}

pub fn derivable_free(e: &[Term], t: &Term) -> Result<Option<Derivation>, Error> {
    check_ground(e, t)?;
    for x in e.iter().chain([t]) {
        if x.contains_hash() {
            return Err(Error::ContainsHash(x.clone()));
        }
    }
    Ok(Engine::new(IntruderSystem::Free, e).derivation(&t.canonical()))
}

/// Derivability for the hash-colliding intruder, modulo `E_h`.
pub fn derivable_h(e: &[Term], t: &Term) -> Result<Option<Derivation>, Error> {
    check_ground(e, t)?;
    Ok(Engine::new(IntruderSystem::H, e).derivation(&t.canonical()))
}

/// Dispatches on the intruder.
pub fn derivable(system: IntruderSystem, e: &[Term], t: &Term) -> Result<Option<Derivation>, Error> {
    match system {
        IntruderSystem::Au => derivable_au(e, t),
        IntruderSystem::F => derivable_compose(e, t, Fun::F),
        IntruderSystem::G => derivable_compose(e, t, Fun::G),
        IntruderSystem::Free => derivable_free(e, t),
        IntruderSystem::H => derivable_h(e, t),
    }
}

/// Bounds for [`closure_bfs`].
#[derive(Clone, Debug)]
pub struct BfsLimits {
    /// Number of saturation rounds.
    pub depth: usize,
    /// Derived terms larger than this are dropped.
    pub max_size: usize,
    /// When set, only these terms are ever derived; rule applications are
    /// then checked per candidate instead of enumerated.
    pub universe: Option<BTreeSet<Term>>,
}

impl BfsLimits {
    pub fn new(depth: usize, max_size: usize) -> Self {
        BfsLimits {
            depth,
            max_size,
            universe: None,
        }
    }
}

/// Everything derivable from `e` within `depth` rounds, where each round
/// applies every rule to the terms known after the previous one.
pub fn closure_bfs(e: &[Term], system: IntruderSystem, limits: &BfsLimits) -> BTreeSet<Term> {
    let mut known: BTreeSet<Term> = e.iter().map(Term::canonical).collect();
    for _ in 0..limits.depth {
        let new = match &limits.universe {
            Some(u) => round_candidates(&known, system, u, limits.max_size),
            None => round_enumerate(&known, system, limits.max_size),
        };
        let before = known.len();
        known.extend(new);
        if known.len() == before {
            break;
        }
    }
    known
}

/// Membership in a closure, modulo `E_h` for the hash intruder.
pub fn closure_contains(closure: &BTreeSet<Term>, system: IntruderSystem, t: &Term) -> bool {
    let t = t.canonical();
    if closure.contains(&t) {
        return true;
    }
    system.hashes() && closure.iter().any(|k| eq_h(k, &t))
}

fn round_enumerate(known: &BTreeSet<Term>, system: IntruderSystem, max_size: usize) -> Vec<Term> {
    let mut out = Vec::new();
    let k: Vec<&Term> = known.iter().collect();
    if system.has_words() {
        out.push(Term::Eps);
        for a in &k {
            for b in &k {
                if a.size() + b.size() <= max_size {
                    out.push(Term::concat([(*a).clone(), (*b).clone()]));
                }
            }
            let ls = a.letters();
            for i in 0..=ls.len() {
                out.push(Term::from_letters(ls[..i].to_vec()));
                out.push(Term::from_letters(ls[i..].to_vec()));
            }
        }
    }
    for fun in [Fun::F, Fun::G] {
        if !system.composes(fun) {
            continue;
        }
        for a in &k {
            for b in &k {
                for c in &k {
                    for d in &k {
                        let s = 1 + a.size() + b.size() + c.size() + d.size();
                        if s <= max_size {
                            out.push(Term::app(
                                fun,
                                [(*a).clone(), (*b).clone(), (*c).clone(), (*d).clone()],
                            ));
                        }
                    }
                }
            }
        }
    }
    if system.hashes() {
        for a in &k {
            if a.size() < max_size {
                out.push(Term::hash((*a).clone()));
            }
        }
    }
    out
}

fn round_candidates(
    known: &BTreeSet<Term>,
    system: IntruderSystem,
    universe: &BTreeSet<Term>,
    max_size: usize,
) -> Vec<Term> {
    let has = |t: &Term| closure_contains(known, system, t);
    let mut out = Vec::new();
    for c in universe {
        if c.size() > max_size || known.contains(c) {
            continue;
        }
        let ls = c.letters();
        let mut ok = false;
        if system.has_words() {
            ok = *c == Term::Eps
                || (1..ls.len()).any(|i| {
                    has(&Term::from_letters(ls[..i].to_vec()))
                        && has(&Term::from_letters(ls[i..].to_vec()))
                })
                || known.iter().any(|k| {
                    let kl = k.letters();
                    kl.len() > ls.len()
                        && (system.same_word(&kl[..ls.len()], ls)
                            || system.same_word(&kl[kl.len() - ls.len()..], ls))
                });
        }
        if !ok {
            ok = match c {
                Term::App(fun, args) if system.composes(*fun) => args.iter().all(has),
                Term::Hash(m) if system.hashes() => {
                    has(m) || collision_partner(m).is_some_and(|p| has(&p))
                }
                _ => false,
            };
        }
        if ok {
            out.push(c.clone());
        }
    }
    out
}
