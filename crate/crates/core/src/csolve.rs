//! Deterministic constraint systems `(E_1 |> v_1, ..., E_n |> v_n, S)` and
//! their ordered satisfiability for the word, composition and free intruders.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::deduce::{derivable, Derivation, IntruderSystem};
use crate::error::Error;
use crate::nielsen::{self, Outcome, Problem};
use crate::subst::Substitution;
use crate::term::{Fun, Term, Var};
use crate::theory::{eq_h, eq_modulo_au};
use crate::unify::{mgu, solve_au_lcr, Atom, OrderingConstraint, SearchLimits, UnificationSystem, Verdict};

/// One deduction constraint `E |> v`; `knowledge` is the whole set `E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub knowledge: Vec<Term>,
    pub target: Var,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub constraints: Vec<Constraint>,
    pub equations: UnificationSystem,
    pub order: OrderingConstraint,
}

impl ConstraintSystem {
    pub fn new() -> Self {
        ConstraintSystem::default()
    }

    /// Appends `E |> v`; duplicate knowledge elements are dropped.
    pub fn push(&mut self, knowledge: Vec<Term>, target: Var) {
        let mut k: Vec<Term> = Vec::new();
        for t in knowledge {
            let t = t.canonical();
            if !k.contains(&t) {
                k.push(t);
            }
        }
        self.constraints.push(Constraint { knowledge: k, target });
    }

    pub fn equate(&mut self, l: Term, r: Term) {
        self.equations.push(l, r);
    }

    /// Every term occurring in the system: knowledge, targets and both sides
    /// of each equation.
    pub fn terms(&self) -> Vec<Term> {
        let mut out = Vec::new();
        for c in &self.constraints {
            out.extend(c.knowledge.iter().cloned());
            out.push(Term::Var(c.target.clone()));
        }
        for (l, r) in self.equations.equations() {
            out.push(l.clone());
            out.push(r.clone());
        }
        out
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for t in self.terms() {
            t.collect_vars(&mut out);
        }
        for (a, b) in self.order.pairs() {
            for x in [a, b] {
                if let Atom::Var(v) = x {
                    out.insert(v.clone());
                }
            }
        }
        out
    }

    pub fn consts(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        for t in self.terms() {
            t.collect_consts(&mut out);
        }
        out
    }

    pub fn targets(&self) -> Vec<Var> {
        self.constraints.iter().map(|c| c.target.clone()).collect()
    }

    fn any_term(&self, p: impl Fn(&Term) -> bool) -> Option<Term> {
        self.terms().into_iter().find(|t| p(t))
    }
}

impl fmt::Display for ConstraintSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            f.write_str("{")?;
            for (i, t) in c.knowledge.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{t}")?;
            }
            writeln!(f, "}} |> {}", c.target)?;
        }
        for (l, r) in self.equations.equations() {
            writeln!(f, "{l} =? {r}")?;
        }
        if !self.order.is_empty() {
            writeln!(f, "order: {}", self.order)?;
        }
        Ok(())
    }
}

/// Checks `Var(E_i) ⊆ {v_1..v_{i-1}}` and `E_{i-1} ⊆ E_i`.
pub fn check_deterministic(c: &ConstraintSystem) -> (bool, Vec<String>) {
    let mut problems = Vec::new();
    let mut earlier: BTreeSet<Var> = BTreeSet::new();
    for (i, con) in c.constraints.iter().enumerate() {
        for t in &con.knowledge {
            for v in t.vars() {
                if !earlier.contains(&v) {
                    problems.push(alloc::format!(
                        "constraint {}: knowledge mentions {v}, which is not an earlier target",
                        i + 1
                    ));
                }
            }
        }
        if i > 0 {
            let prev = &c.constraints[i - 1].knowledge;
            for t in prev {
                if !con.knowledge.contains(t) {
                    problems.push(alloc::format!(
                        "constraint {}: knowledge drops {t} from constraint {}",
                        i + 1,
                        i
                    ));
                }
            }
        }
        if earlier.contains(&con.target) {
            problems.push(alloc::format!(
                "constraint {}: target {} is already the target of an earlier constraint",
                i + 1,
                con.target
            ));
        }
        earlier.insert(con.target.clone());
    }
    (problems.is_empty(), problems)
}

fn require_deterministic(c: &ConstraintSystem) -> Result<(), Error> {
    let (ok, problems) = check_deterministic(c);
    if ok {
        Ok(())
    } else {
        Err(Error::NotDeterministic(problems))
    }
}

/// A satisfying substitution together with one derivation per constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub substitution: Substitution,
    pub derivations: Vec<Derivation>,
}

/// Derivations of every `v_i sigma` from `E_i sigma`, if all exist.
pub fn witnesses(
    c: &ConstraintSystem,
    sigma: &Substitution,
    system: IntruderSystem,
) -> Option<Vec<Derivation>> {
    let mut out = Vec::new();
    for con in &c.constraints {
        let e: Vec<Term> = con.knowledge.iter().map(|t| sigma.apply(t)).collect();
        let goal = sigma.apply(&Term::Var(con.target.clone()));
        out.push(derivable(system, &e, &goal).ok()??);
    }
    Some(out)
}

/// Independent check of a candidate solution: `sigma` is ground on the
/// system's variables, satisfies every equation modulo the intruder's
/// theory, respects the ordering, and makes every target derivable.
pub fn verify_solution(c: &ConstraintSystem, sigma: &Substitution, system: IntruderSystem) -> bool {
    for v in c.vars() {
        match sigma.get(&v) {
            Some(t) if t.is_ground() => {}
            _ => return false,
        }
    }
    for (l, r) in c.equations.equations() {
        let (a, b) = (sigma.apply(l), sigma.apply(r));
        let ok = match system {
            IntruderSystem::H => eq_h(&a, &b),
            _ => eq_modulo_au(&a, &b),
        };
        if !ok {
            return false;
        }
    }
    if !c.order.satisfied_by(sigma) {
        return false;
    }
    witnesses(c, sigma, system).is_some_and(|ds| ds.iter().all(|d| d.replay().is_ok()))
}

fn complete(w: &Substitution, vars: &BTreeSet<Var>) -> Substitution {
    vars.iter()
        .map(|v| (v.clone(), w.get(v).cloned().unwrap_or(Term::Eps)))
        .collect()
}

/// Re-verifies a SAT verdict; a witness that fails is reported as `Unknown`.
fn checked(v: Verdict, c: &ConstraintSystem, system: IntruderSystem, bound: usize) -> Verdict {
    match v {
        Verdict::Sat(s) => {
            let s = complete(&s, &c.vars());
            if verify_solution(c, &s, system) {
                Verdict::Sat(s)
            } else {
                Verdict::Unknown(bound)
            }
        }
        other => other,
    }
}

/// Ordered satisfiability for the word intruder: each constraint `E_i |> v_i`
/// becomes `v_i < c` for every constant `c` of the system missing from
/// `E_i`, and the resulting ordered word-unification problem is solved.
pub fn solve_au(c: &ConstraintSystem, limits: &SearchLimits) -> Result<Verdict, Error> {
    require_deterministic(c)?;
    if let Some(t) = c.any_term(|t| !t.is_word()) {
        return Err(Error::NotWord(t));
    }
    c.order.check()?;
    let all = c.consts();
    let mut derived = OrderingConstraint::new();
    for con in &c.constraints {
        let present: BTreeSet<Arc<str>> = con.knowledge.iter().flat_map(|t| t.consts()).collect();
        for k in all.difference(&present) {
            derived.restrict(con.target.clone(), k);
        }
    }
    let combined = c.order.union(&derived);
    if combined.check().is_err() {
        return Ok(Verdict::Unsat);
    }
    let v = solve_au_lcr(&c.equations, &combined, limits)?;
    Ok(checked(v, c, IntruderSystem::Au, limits.bound))
}

/// Ordered satisfiability for the intruder that can only apply `sym`.
/// `fuel` caps the number of search nodes.
pub fn solve_compose(c: &ConstraintSystem, sym: Fun, fuel: usize) -> Result<Verdict, Error> {
    require_deterministic(c)?;
    c.order.check()?;
    let Some(sigma) = mgu(c.equations.equations()) else {
        return Ok(Verdict::Unsat);
    };
    let mut search = Compose {
        sym,
        fuel,
        exhausted: false,
        forbidden: c.order.forbidden(),
        know: c.constraints.iter().map(|k| k.knowledge.clone()).collect(),
    };
    let goals: Vec<(usize, Term)> = c
        .constraints
        .iter()
        .enumerate()
        .map(|(i, k)| (i, Term::Var(k.target.clone())))
        .collect();
    let system = match sym {
        Fun::F => IntruderSystem::F,
        Fun::G => IntruderSystem::G,
    };
    Ok(match search.run(sigma, goals) {
        Some(s) => checked(Verdict::Sat(s), c, system, fuel),
        None if search.exhausted => Verdict::Unknown(fuel),
        None => Verdict::Unsat,
    })
}

struct Compose {
    sym: Fun,
    fuel: usize,
    exhausted: bool,
    forbidden: BTreeMap<Var, BTreeSet<Arc<str>>>,
    know: Vec<Vec<Term>>,
}

impl Compose {
    fn respects_order(&self, s: &Substitution) -> bool {
        self.forbidden.iter().all(|(x, cs)| {
            let v = s.apply(&Term::Var(x.clone()));
            v.consts().iter().all(|c| !cs.contains(c))
        })
    }

    fn extend(s: &Substitution, a: &Term, b: &Term) -> Option<Substitution> {
        let m = mgu(&[(s.apply(a), s.apply(b))])?;
        Some(s.then(&m))
    }

    fn run(&mut self, s: Substitution, goals: Vec<(usize, Term)>) -> Option<Substitution> {
        if self.fuel == 0 {
            self.exhausted = true;
            return None;
        }
        self.fuel -= 1;
        if !self.respects_order(&s) {
            return None;
        }
        let mut open: Vec<(usize, Term)> = Vec::new();
        for (i, g) in goals {
            let g = s.apply(&g);
            let known = self.know[i].iter().any(|e| s.apply(e) == g);
            if !known && !open.contains(&(i, g.clone())) {
                open.push((i, g));
            }
        }
        if let Some(pos) = open.iter().position(|(_, g)| !g.is_var()) {
            let (i, g) = open.remove(pos);
            let mut cands: Vec<Term> = self.know[i]
                .iter()
                .map(|e| s.apply(e))
                .filter(|e| !e.is_var())
                .collect();
            cands.sort();
            cands.dedup();
            for e in cands {
                if let Some(s2) = Self::extend(&s, &g, &e) {
                    if let Some(r) = self.run(s2, open.clone()) {
                        return Some(r);
                    }
                }
            }
            if let Term::App(f, args) = &g {
                if *f == self.sym {
                    let mut next = open.clone();
                    next.extend(args.iter().map(|a| (i, a.clone())));
                    return self.run(s, next);
                }
            }
            return None;
        }
        if let Some((i, g)) = open.first().cloned() {
            let x = g.as_var().expect("only variable goals remain").clone();
            let i = open
                .iter()
                .filter(|(_, t)| *t == g)
                .map(|(j, _)| *j)
                .min()
                .unwrap_or(i);
            let mut cands: Vec<Term> = self.know[i].iter().map(|e| s.apply(e)).collect();
            cands.sort();
            cands.dedup();
            for e in cands {
                if e.has_var(&x) {
                    continue;
                }
                let mut s2 = s.then(&Substitution::singleton(x.clone(), e.clone()));
                s2.insert(x.clone(), e);
                if let Some(r) = self.run(s2, open.clone()) {
                    return Some(r);
                }
            }
            return None;
        }
        Some(s)
    }
}

/// Ordered satisfiability for the free intruder (words plus `f` and `g`).
/// Systems without `f`/`g` go through [`solve_au`]; the rest through the
/// word-equation search with derivability goals, where blocks are letters
/// that can be matched against known blocks or composed from their
/// arguments.
pub fn solve_free(c: &ConstraintSystem, limits: &SearchLimits) -> Result<Verdict, Error> {
    require_deterministic(c)?;
    if let Some(t) = c.any_term(Term::contains_hash) {
        return Err(Error::ContainsHash(t));
    }
    if c.any_term(Term::contains_app).is_none() {
        return solve_au(c, limits).map(|v| match v {
            Verdict::Sat(s) => checked(Verdict::Sat(s), c, IntruderSystem::Free, limits.bound),
            other => other,
        });
    }
    c.order.check()?;
    let problem = Problem {
        equations: c.equations.equations().to_vec(),
        knowledge: c.constraints.iter().map(|k| k.knowledge.clone()).collect(),
        goals: c
            .constraints
            .iter()
            .enumerate()
            .map(|(i, k)| (i, Term::Var(k.target.clone())))
            .collect(),
        forbidden: c.order.forbidden(),
    };
    let v = match nielsen::solve(&problem, limits.engine()) {
        Outcome::Sat(s) => Verdict::Sat(s),
        Outcome::Unsat => Verdict::Unsat,
        Outcome::Unknown => Verdict::Unknown(limits.bound),
    };
    Ok(checked(v, c, IntruderSystem::Free, limits.bound))
}

/// Dispatches to the solver for `system`. The hash intruder is handled by
/// [`crate::reduce::solve_h`].
pub fn solve(c: &ConstraintSystem, system: IntruderSystem, limits: &SearchLimits) -> Result<Verdict, Error> {
    match system {
        IntruderSystem::Au => solve_au(c, limits),
        IntruderSystem::F => solve_compose(c, Fun::F, limits.max_states),
        IntruderSystem::G => solve_compose(c, Fun::G, limits.max_states),
        IntruderSystem::Free => solve_free(c, limits),
        IntruderSystem::H => crate::reduce::solve_h(c, &crate::reduce::ReduceLimits::default(), limits)
            .map(|r| r.verdict),
    }
}
