//! Reduction of the hash-colliding intruder to the free one.
//!
//! Every `h`-rooted subterm of the system is abstracted by a constant naming
//! its equivalence class. A branch of the reduction fixes
//!
//! * a partition of the hashed subterms into classes,
//! * which classes the intruder computes himself, and where: class `j` placed
//!   at slot `s` adds a constraint `E_s |> c#j` just before the `s`-th
//!   constraint, after which `hash#j` is known,
//! * for each member of a class, whether its argument equals the class
//!   representative or collides with it (in either orientation).
//!
//! Each branch is a free constraint system. A solution is mapped back by
//! replacing `hash#j` with `h(rep)` and then checked against the original
//! system, so every reported attack is verified independently of the search.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;
use core::ops::ControlFlow;

use crate::csolve::{check_deterministic, solve_free, verify_solution, witnesses, ConstraintSystem};
use crate::deduce::{Derivation, IntruderSystem};
use crate::error::Error;
use crate::mode::{subterm_values_of, ModeTable};
use crate::subst::Substitution;
use crate::term::{Fun, Partition, Term, Var};
use crate::theory::{justify, Justification};
use crate::unify::{SearchLimits, Verdict};

const HASH_PREFIX: &str = "hash#";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReduceLimits {
    /// Largest number of classes tried; `None` means all of them.
    pub max_k: Option<usize>,
    pub max_branches: usize,
    /// When false only the "equal arguments" case is generated.
    pub collisions: bool,
}

impl Default for ReduceLimits {
    fn default() -> Self {
        ReduceLimits {
            max_k: None,
            max_branches: 100_000,
            collisions: true,
        }
    }
}

/// How a class member's argument relates to the representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PairCase {
    Equal,
    /// representative `x1.f(..).x2`, member `y1.g(..).y2`
    Collision,
    /// representative `y1.g(..).y2`, member `x1.f(..).x2`
    Symmetric,
}

impl PairCase {
    fn letter(self) -> char {
        match self {
            PairCase::Equal => 'E',
            PairCase::Collision => 'C',
            PairCase::Symmetric => 'S',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionBranch {
    /// Hashed subterms of each class.
    pub classes: Vec<Vec<Term>>,
    /// `(class, slot)` for the classes the intruder hashes, in the order the
    /// extra constraints appear.
    pub placement: Vec<(usize, usize)>,
    pub cases: Vec<PairCase>,
    /// Representative argument of each class, over the abstracted vocabulary.
    pub reps: Vec<Term>,
    pub system: ConstraintSystem,
}

impl ReductionBranch {
    pub fn k(&self) -> usize {
        self.classes.len()
    }

    /// A stable textual identity of the branch.
    pub fn fingerprint(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "k={};", self.k());
        for (j, cls) in self.classes.iter().enumerate() {
            let _ = write!(s, "{j}:{{");
            for (i, t) in cls.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                let _ = write!(s, "{t}");
            }
            s.push_str("};");
        }
        s.push_str("H=");
        for (j, slot) in &self.placement {
            let _ = write!(s, "{j}@{slot},");
        }
        s.push_str(";cases=");
        s.extend(self.cases.iter().map(|c| c.letter()));
        s
    }

    /// Replaces every `hash#j` by `h(rep_j)` under `sigma`, restricted to
    /// `vars`. `None` if the class values depend on each other cyclically.
    pub fn map_back(&self, sigma: &Substitution, vars: &BTreeSet<Var>) -> Option<Substitution> {
        let mut back = Back {
            reps: &self.reps,
            sigma,
            memo: BTreeMap::new(),
            stack: Vec::new(),
        };
        let mut out = Substitution::new();
        for v in vars {
            let t = sigma.get(v).cloned().unwrap_or(Term::Eps);
            out.insert(v.clone(), back.resolve(&t)?);
        }
        Some(out)
    }
}

pub fn hash_constant(j: usize) -> Term {
    Term::cst(&alloc::format!("{HASH_PREFIX}{j}"))
}

fn class_of_constant(name: &str) -> Option<usize> {
    name.strip_prefix(HASH_PREFIX)?.parse().ok()
}

struct Back<'a> {
    reps: &'a [Term],
    sigma: &'a Substitution,
    memo: BTreeMap<usize, Term>,
    stack: Vec<usize>,
}

impl Back<'_> {
    fn class_value(&mut self, j: usize) -> Option<Term> {
        if let Some(t) = self.memo.get(&j) {
            return Some(t.clone());
        }
        if self.stack.contains(&j) {
            return None;
        }
        self.stack.push(j);
        let arg = self.sigma.apply(self.reps.get(j)?);
        let v = Term::hash(self.resolve(&arg)?);
        self.stack.pop();
        self.memo.insert(j, v.clone());
        Some(v)
    }

    fn resolve(&mut self, t: &Term) -> Option<Term> {
        Some(match t {
            Term::Const(c) => match class_of_constant(c) {
                Some(j) => self.class_value(j)?,
                None => t.clone(),
            },
            Term::Concat(xs) => {
                let mut parts = Vec::with_capacity(xs.len());
                for x in xs {
                    parts.push(self.resolve(x)?);
                }
                Term::concat(parts)
            }
            Term::Hash(m) => Term::hash(self.resolve(m)?),
            Term::App(f, args) => {
                let [a, b, c, d] = &**args;
                Term::app(*f, [self.resolve(a)?, self.resolve(b)?, self.resolve(c)?, self.resolve(d)?])
            }
            Term::Var(_) | Term::Eps => t.clone(),
        })
    }
}

/// The distinct `h`-rooted subterms of the system, smallest first.
pub fn hashed_subterms(c: &ConstraintSystem) -> Vec<Term> {
    let mut set = BTreeSet::new();
    for t in c.terms() {
        for s in t.syntactic_subterms() {
            if matches!(s, Term::Hash(_)) {
                set.insert(s.clone());
            }
        }
    }
    let mut v: Vec<Term> = set.into_iter().collect();
    v.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.cmp(b)));
    v
}

/// Upper bound on the number of classes worth trying: the subterm values
/// that are hashes or variables.
pub fn proposition_shadok_filter(c: &ConstraintSystem, k: usize) -> bool {
    let table = ModeTable::hash_theory();
    let terms = c.terms();
    let slots = subterm_values_of(terms.iter(), &table)
        .into_iter()
        .filter(|t| t.is_var() || table.sig(t) == 1)
        .count();
    k <= slots
}

fn abstract_term(t: &Term, class: &BTreeMap<Term, usize>) -> Term {
    match t {
        Term::Hash(_) => match class.get(t) {
            Some(j) => hash_constant(*j),
            None => t.clone(),
        },
        Term::Concat(xs) => Term::concat(xs.iter().map(|x| abstract_term(x, class))),
        Term::App(f, args) => {
            let [a, b, c, d] = &**args;
            Term::app(
                *f,
                [
                    abstract_term(a, class),
                    abstract_term(b, class),
                    abstract_term(c, class),
                    abstract_term(d, class),
                ],
            )
        }
        _ => t.clone(),
    }
}

fn hash_arg(t: &Term) -> &Term {
    match t {
        Term::Hash(m) => m,
        _ => unreachable!("class members are hashes"),
    }
}

/// Restricted growth strings: every partition of `n` items into exactly `k`
/// blocks.
fn partitions(n: usize, k: usize, visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>) -> ControlFlow<()> {
    fn go(
        a: &mut Vec<usize>,
        n: usize,
        k: usize,
        used: usize,
        visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if a.len() == n {
            return if used == k { visit(a) } else { ControlFlow::Continue(()) };
        }
        if k - used > n - a.len() {
            return ControlFlow::Continue(());
        }
        for b in 0..=used.min(k - 1) {
            a.push(b);
            go(a, n, k, used.max(b + 1), visit)?;
            a.pop();
        }
        ControlFlow::Continue(())
    }
    if k == 0 {
        return if n == 0 { visit(&[]) } else { ControlFlow::Continue(()) };
    }
    go(&mut Vec::with_capacity(n), n, k, 0, visit)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return alloc::vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// All orders in which the hashed classes can be placed: each class is
/// unplaced or assigned a slot, and classes sharing a slot are permuted.
fn placements(k: usize, slots: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    let mut choice = alloc::vec![0usize; k];
    loop {
        let mut groups: Vec<Vec<Vec<usize>>> = Vec::new();
        for s in 0..slots {
            let members: Vec<usize> = (0..k).filter(|j| choice[*j] == s + 1).collect();
            groups.push(permutations(&members));
        }
        let mut idx = alloc::vec![0usize; slots];
        loop {
            let mut order = Vec::new();
            for s in 0..slots {
                for j in &groups[s][idx[s]] {
                    order.push((*j, s));
                }
            }
            out.push(order);
            let mut s = 0;
            while s < slots {
                idx[s] += 1;
                if idx[s] < groups[s].len() {
                    break;
                }
                idx[s] = 0;
                s += 1;
            }
            if s == slots {
                break;
            }
        }
        let mut j = 0;
        while j < k {
            choice[j] += 1;
            if choice[j] <= slots {
                break;
            }
            choice[j] = 0;
            j += 1;
        }
        if j == k {
            break;
        }
    }
    out
}

/// Counters reported by [`for_each_reduction`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Enumeration {
    pub branches: usize,
    /// Some branch was cut off by `max_k` or `max_branches`.
    pub truncated: bool,
}

fn validate(c: &ConstraintSystem) -> Result<(), Error> {
    let (ok, problems) = check_deterministic(c);
    if !ok {
        return Err(Error::NotDeterministic(problems));
    }
    c.order.check()?;
    let roots = c
        .constraints
        .iter()
        .flat_map(|k| k.knowledge.iter())
        .chain(c.equations.equations().iter().flat_map(|(l, r)| [l, r]));
    for t in roots {
        if matches!(t, Term::App(..)) {
            return Err(Error::FgRooted(t.clone()));
        }
    }
    Ok(())
}

/// Visits the branches in order of increasing number of classes.
pub fn for_each_reduction(
    c: &ConstraintSystem,
    limits: &ReduceLimits,
    visit: &mut dyn FnMut(ReductionBranch) -> ControlFlow<()>,
) -> Result<Enumeration, Error> {
    validate(c)?;
    let ht = hashed_subterms(c);
    let n = c.constraints.len();
    let mut stats = Enumeration::default();
    let top = match limits.max_k {
        Some(m) if m < ht.len() => {
            stats.truncated = true;
            m
        }
        _ => ht.len(),
    };
    let first = if ht.is_empty() { 0 } else { 1 };
    for k in first..=top {
        if !proposition_shadok_filter(c, k) {
            continue;
        }
        let flow = partitions(ht.len(), k, &mut |rgs| {
            let mut classes: Vec<Vec<Term>> = alloc::vec![Vec::new(); k];
            let mut class_of = BTreeMap::new();
            for (t, j) in ht.iter().zip(rgs) {
                classes[*j].push(t.clone());
                class_of.insert(t.clone(), *j);
            }
            for placement in placements(k, n) {
                let flow = cases_for(c, &classes, &class_of, &placement, limits, &mut stats, visit);
                flow?;
            }
            ControlFlow::Continue(())
        });
        if flow.is_break() {
            break;
        }
    }
    Ok(stats)
}

#[allow(clippy::too_many_arguments)]
fn cases_for(
    c: &ConstraintSystem,
    classes: &[Vec<Term>],
    class_of: &BTreeMap<Term, usize>,
    placement: &[(usize, usize)],
    limits: &ReduceLimits,
    stats: &mut Enumeration,
    visit: &mut dyn FnMut(ReductionBranch) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let abs = |t: &Term| abstract_term(t, class_of);
    let placed: BTreeSet<usize> = placement.iter().map(|(j, _)| *j).collect();
    let mut reps = Vec::new();
    let mut pairs: Vec<(Term, Term)> = Vec::new();
    for (j, cls) in classes.iter().enumerate() {
        let args: Vec<Term> = cls.iter().map(|t| abs(hash_arg(t))).collect();
        let (rep, rest) = if placed.contains(&j) {
            (Term::var(&alloc::format!("c#{j}")), &args[..])
        } else {
            (args[0].clone(), &args[1..])
        };
        for m in rest {
            pairs.push((rep.clone(), m.clone()));
        }
        reps.push(rep);
    }

    let mut base = ConstraintSystem::new();
    base.order = c.order.clone();
    let mut learned: Vec<Term> = Vec::new();
    let mut next = placement.iter().peekable();
    for (s, con) in c.constraints.iter().enumerate() {
        let know: Vec<Term> = con.knowledge.iter().map(abs).collect();
        while let Some((j, _)) = next.next_if(|(_, slot)| *slot == s) {
            let mut k = know.clone();
            k.extend(learned.iter().cloned());
            base.push(k, Var::new(&alloc::format!("c#{j}")));
            learned.push(hash_constant(*j));
        }
        let mut k = know;
        k.extend(learned.iter().cloned());
        base.push(k, con.target.clone());
    }
    for (l, r) in c.equations.equations() {
        base.equate(abs(l), abs(r));
    }

    let choices: &[PairCase] = if limits.collisions {
        &[PairCase::Equal, PairCase::Collision, PairCase::Symmetric]
    } else {
        &[PairCase::Equal]
    };
    let mut idx = alloc::vec![0usize; pairs.len()];
    loop {
        if stats.branches >= limits.max_branches {
            stats.truncated = true;
            return ControlFlow::Break(());
        }
        stats.branches += 1;
        let cases: Vec<PairCase> = idx.iter().map(|i| choices[*i]).collect();
        let mut system = base.clone();
        for (n, ((rep, m), case)) in pairs.iter().zip(&cases).enumerate() {
            match case {
                PairCase::Equal => system.equate(rep.clone(), m.clone()),
                PairCase::Collision | PairCase::Symmetric => {
                    let (fside, gside) = collision_sides(n);
                    let (l, r) = if *case == PairCase::Collision { (fside, gside) } else { (gside, fside) };
                    system.equate(rep.clone(), l);
                    system.equate(m.clone(), r);
                }
            }
        }
        visit(ReductionBranch {
            classes: classes.to_vec(),
            placement: placement.to_vec(),
            cases,
            reps: reps.clone(),
            system,
        })?;
        let mut i = 0;
        while i < idx.len() {
            idx[i] += 1;
            if idx[i] < choices.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == idx.len() {
            return ControlFlow::Continue(());
        }
    }
}

/// `(x1.f(x1,x2,y1,y2).x2, y1.g(x1,x2,y1,y2).y2)` over fresh variables.
fn collision_sides(n: usize) -> (Term, Term) {
    let v = |s: &str| Term::Var(Var::with_partition(&alloc::format!("{s}#{n}"), Partition::X0));
    let (x1, x2, y1, y2) = (v("x1"), v("x2"), v("y1"), v("y2"));
    let args = [x1.clone(), x2.clone(), y1.clone(), y2.clone()];
    let fs = Term::concat([x1, Term::app(Fun::F, args.clone()), x2]);
    let gs = Term::concat([y1, Term::app(Fun::G, args), y2]);
    (fs, gs)
}

/// Every branch, up to `max_branches`.
pub fn enumerate_reductions(
    c: &ConstraintSystem,
    limits: &ReduceLimits,
) -> Result<(Vec<ReductionBranch>, Enumeration), Error> {
    let mut out = Vec::new();
    let stats = for_each_reduction(c, limits, &mut |b| {
        out.push(b);
        ControlFlow::Continue(())
    })?;
    Ok((out, stats))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationWitness {
    pub left: Term,
    pub right: Term,
    pub justification: Justification,
}

/// A verified solution of the original system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackTrace {
    pub substitution: Substitution,
    pub derivations: Vec<Derivation>,
    pub equations: Vec<EquationWitness>,
    pub branch: String,
}

impl AttackTrace {
    pub fn uses_collision(&self) -> bool {
        self.derivations.iter().any(Derivation::uses_collision)
            || self.equations.iter().any(|e| e.justification == Justification::Hc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HReport {
    pub verdict: Verdict,
    pub trace: Option<AttackTrace>,
    pub stats: Enumeration,
}

/// Builds the trace for a substitution already known to satisfy `c`.
pub fn attack_trace(c: &ConstraintSystem, sigma: &Substitution, branch: String) -> Option<AttackTrace> {
    let derivations = witnesses(c, sigma, IntruderSystem::H)?;
    let mut equations = Vec::new();
    for (l, r) in c.equations.equations() {
        let (left, right) = (sigma.apply(l), sigma.apply(r));
        let justification = justify(&left, &right)?;
        equations.push(EquationWitness {
            left,
            right,
            justification,
        });
    }
    Some(AttackTrace {
        substitution: sigma.clone(),
        derivations,
        equations,
        branch,
    })
}

/// Ordered satisfiability for the hash-colliding intruder.
pub fn solve_h(c: &ConstraintSystem, limits: &ReduceLimits, search: &SearchLimits) -> Result<HReport, Error> {
    let vars = c.vars();
    let mut found: Option<(Substitution, String)> = None;
    let mut unknown = false;
    let mut failure: Option<Error> = None;
    let stats = for_each_reduction(c, limits, &mut |b| match solve_free(&b.system, search) {
        Ok(Verdict::Sat(s)) => match b.map_back(&s, &vars) {
            Some(sigma) if verify_solution(c, &sigma, IntruderSystem::H) => {
                found = Some((sigma, b.fingerprint()));
                ControlFlow::Break(())
            }
            _ => {
                unknown = true;
                ControlFlow::Continue(())
            }
        },
        Ok(Verdict::Unsat) => ControlFlow::Continue(()),
        Ok(Verdict::Unknown(_)) => {
            unknown = true;
            ControlFlow::Continue(())
        }
        Err(e) => {
            failure = Some(e);
            ControlFlow::Break(())
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if let Some((sigma, fp)) = found {
        let trace = attack_trace(c, &sigma, fp);
        return Ok(HReport {
            verdict: Verdict::Sat(sigma),
            trace,
            stats,
        });
    }
    let verdict = if unknown || stats.truncated {
        Verdict::Unknown(search.bound)
    } else {
        Verdict::Unsat
    };
    Ok(HReport {
        verdict,
        trace: None,
        stats,
    })
}
