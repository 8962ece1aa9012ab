//! Random generators and oracle-backed property checks shared by the
//! integration tests and the acceptance target.

#![allow(dead_code)]

use std::collections::BTreeSet;

use hashcol_core::csolve::{verify_solution, ConstraintSystem};
use hashcol_core::deduce::{
    closure_bfs, closure_contains, derivable, derivable_free, BfsLimits, IntruderSystem,
};
use hashcol_core::mode::{factors, subterm_values, ModeTable, Node};
use hashcol_core::theory::{collision_partner, eq_modulo_au, eq_modulo_h};
use hashcol_core::unify::{
    brute_force_unify, solve_au_lcr, OrderingConstraint, SearchLimits, UnificationSystem, Verdict,
};
use hashcol_core::{Fun, Position, Substitution, Term, Var};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0x5eed_2007;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Outcome of one randomized property.
#[derive(Debug, Default)]
pub struct Check {
    pub name: &'static str,
    pub instances: usize,
    pub violations: Vec<String>,
    pub note: String,
}

impl Check {
    pub fn new(name: &'static str) -> Self {
        Check {
            name,
            ..Check::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn fail(&mut self, msg: String) {
        if self.violations.len() < 20 {
            self.violations.push(msg);
        }
    }

    pub fn assert_ok(&self, min_instances: usize) {
        assert!(
            self.passed(),
            "{}: {} violation(s), first: {:?}",
            self.name,
            self.violations.len(),
            self.violations.first()
        );
        assert!(
            self.instances >= min_instances,
            "{}: only {} instances",
            self.name,
            self.instances
        );
    }
}

pub fn cst(c: &str) -> Term {
    Term::cst(c)
}

pub fn word(rng: &mut ChaCha8Rng, letters: &[Term], min: usize, max: usize) -> Term {
    let n = rng.gen_range(min..=max);
    Term::concat((0..n).map(|_| letters.choose(rng).unwrap().clone()))
}

/// A canonical ground term over `{a, b, c}` with every symbol of the
/// signature, of depth at most `depth`.
pub fn ground_term(rng: &mut ChaCha8Rng, depth: usize) -> Term {
    let atoms = [cst("a"), cst("b"), cst("c")];
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.1) {
            Term::Eps
        } else {
            atoms.choose(rng).unwrap().clone()
        };
    }
    match rng.gen_range(0..4) {
        0 => {
            let n = rng.gen_range(2..=3);
            Term::concat((0..n).map(|_| ground_term(rng, depth - 1)))
        }
        1 => Term::hash(ground_term(rng, depth - 1)),
        2 | 3 => {
            let fun = if rng.gen_bool(0.5) { Fun::F } else { Fun::G };
            Term::app(fun, std::array::from_fn(|_| ground_term(rng, depth - 1)))
        }
        _ => unreachable!(),
    }
}

/// A ground term that may violate the canonical AU form: nested
/// concatenations, `Eps` elements and singleton lists.
pub fn raw_term(rng: &mut ChaCha8Rng, depth: usize) -> Term {
    let atoms = [cst("a"), cst("b"), cst("c")];
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.15) {
            Term::Eps
        } else {
            atoms.choose(rng).unwrap().clone()
        };
    }
    match rng.gen_range(0..4) {
        0 | 1 => {
            let n = rng.gen_range(1..=3);
            Term::Concat((0..n).map(|_| raw_term(rng, depth - 1)).collect())
        }
        2 => Term::Hash(Box::new(raw_term(rng, depth - 1))),
        _ => {
            let fun = if rng.gen_bool(0.5) { Fun::F } else { Fun::G };
            Term::App(fun, Box::new(std::array::from_fn(|_| raw_term(rng, depth - 1))))
        }
    }
}

// ---------------------------------------------------------------------------
// subterm values against a position enumerator

fn strictly_inside(outer: &Term, inner: &Term) -> bool {
    outer
        .positions()
        .iter()
        .any(|(p, s)| !p.is_root() && *s == inner)
}

/// Sub and Fact recomputed from the list of all positions.
pub fn brute_values(t: &Term, table: &ModeTable) -> (BTreeSet<Term>, BTreeSet<Term>) {
    let mut sub = BTreeSet::new();
    for (p, s) in t.positions() {
        let keep = match p.parent() {
            None => true,
            Some((q, i)) => {
                let parent = t.at(&q).unwrap();
                s.is_atom() || table.mode(parent.head(), i - 1) != Some(table.sig(s))
            }
        };
        if keep {
            sub.insert(s.clone());
        }
    }
    let strict: Vec<Term> = sub.iter().filter(|s| *s != t).cloned().collect();
    let fact = strict
        .iter()
        .filter(|s| !strict.iter().any(|o| o != *s && strictly_inside(o, s)))
        .cloned()
        .collect();
    (sub, fact)
}

pub fn check_subterm_values(n: usize, seed: u64) -> Check {
    let mut ck = Check::new("subterm values vs position enumerator");
    let table = ModeTable::hash_theory();
    let mut r = rng(seed);
    for _ in 0..n {
        let t = ground_term(&mut r, 4);
        let (sub, fact) = brute_values(&t, &table);
        ck.instances += 1;
        if subterm_values(&t, &table) != sub {
            ck.fail(format!("Sub({t})"));
        }
        if factors(&t, &table) != fact {
            ck.fail(format!("Fact({t})"));
        }
    }
    ck
}

// ---------------------------------------------------------------------------
// derivability against bounded closures

fn atom_letters(t: &Term, out: &mut BTreeSet<Term>) {
    for s in t.syntactic_subterms() {
        if !matches!(s, Term::Concat(_) | Term::Eps) {
            out.insert(s.clone());
        }
    }
}

/// Candidate terms sufficient for deriving `goal` from `e`: every word over
/// the letters occurring anywhere in the instance (including collision
/// partners) up to the longest word in it, plus all syntactic subterms.
pub fn oracle_universe(e: &[Term], goal: &Term, hashes: bool) -> BTreeSet<Term> {
    let mut seeds: Vec<Term> = e.iter().chain([goal]).cloned().collect();
    if hashes {
        let extra: Vec<Term> = seeds
            .iter()
            .flat_map(|s| s.syntactic_subterms().into_iter().cloned().collect::<Vec<_>>())
            .filter_map(|s| match &s {
                Term::Hash(m) => collision_partner(m).map(Term::hash),
                _ => None,
            })
            .collect();
        seeds.extend(extra);
    }
    let mut letters = BTreeSet::new();
    let mut maxlen = 1;
    let mut universe = BTreeSet::new();
    for s in &seeds {
        atom_letters(s, &mut letters);
        for x in s.syntactic_subterms() {
            maxlen = maxlen.max(x.letters().len());
            universe.insert(x.clone());
        }
    }
    let letters: Vec<Term> = letters.into_iter().collect();
    let mut layer = vec![Term::Eps];
    universe.insert(Term::Eps);
    for _ in 0..maxlen {
        let mut next = Vec::new();
        for w in &layer {
            for l in &letters {
                next.push(Term::concat([w.clone(), l.clone()]));
            }
        }
        universe.extend(next.iter().cloned());
        layer = next;
    }
    universe
}

pub fn bfs_member(e: &[Term], goal: &Term, system: IntruderSystem) -> bool {
    let universe = oracle_universe(e, goal, system == IntruderSystem::H);
    let limits = BfsLimits {
        depth: 64,
        max_size: usize::MAX,
        universe: Some(universe),
    };
    closure_contains(&closure_bfs(e, system, &limits), system, goal)
}

fn word_instance(r: &mut ChaCha8Rng) -> (Vec<Term>, Term) {
    let all = [cst("a"), cst("b"), cst("c")];
    let k = r.gen_range(1..=3);
    let alphabet = &all[..k];
    let n = r.gen_range(0..=3);
    let e: Vec<Term> = (0..n).map(|_| word(r, alphabet, 1, 4)).collect();
    let goal_alpha: Vec<Term> = if r.gen_bool(0.2) { all.to_vec() } else { alphabet.to_vec() };
    (e, word(r, &goal_alpha, 0, 4))
}

fn block_instance(r: &mut ChaCha8Rng, hashes: bool) -> (Vec<Term>, Term) {
    let small = [cst("a"), cst("b"), Term::Eps];
    let args: [Term; 4] = std::array::from_fn(|_| small.choose(r).unwrap().clone());
    let fun = if r.gen_bool(0.5) { Fun::F } else { Fun::G };
    let block = Term::app(fun, args.clone());
    let mut letters = vec![cst("a"), cst("b")];
    let mut e: Vec<Term> = Vec::new();
    if r.gen_bool(0.5) {
        letters.push(block.clone());
    }
    for _ in 0..r.gen_range(1..=2) {
        e.push(word(r, &letters, 1, 3));
    }
    let mut goal_letters = vec![cst("a"), cst("b"), block.clone()];
    if hashes {
        let inner = word(r, &[cst("a"), cst("b")], 1, 2);
        goal_letters.push(Term::hash(inner));
        if r.gen_bool(0.4) {
            // a hashed collision pattern, derivable through its partner
            let [x1, x2, y1, y2] = args;
            let f = Term::app(Fun::F, [x1.clone(), x2.clone(), y1.clone(), y2.clone()]);
            let g = Term::app(Fun::G, [x1.clone(), x2.clone(), y1.clone(), y2.clone()]);
            let side = if r.gen_bool(0.5) {
                Term::concat([x1, f, x2])
            } else {
                Term::concat([y1, g, y2])
            };
            goal_letters.push(Term::hash(side));
        }
    }
    (e, word(r, &goal_letters, 1, 2))
}

/// Deciders against bounded closures. Word instances are checked under
/// the word, free and hash intruders; block instances under the latter two.
pub fn check_derivability(n: usize, seed: u64) -> Check {
    let mut ck = Check::new("derivability vs closure oracle");
    let mut r = rng(seed);
    for i in 0..n {
        let (systems, (e, goal)): (&[IntruderSystem], _) = match i % 4 {
            0 | 1 => (
                &[IntruderSystem::Au, IntruderSystem::Free, IntruderSystem::H],
                word_instance(&mut r),
            ),
            2 => (&[IntruderSystem::Free, IntruderSystem::H], block_instance(&mut r, false)),
            _ => (&[IntruderSystem::H], block_instance(&mut r, true)),
        };
        ck.instances += 1;
        for &sys in systems {
            let got = match derivable(sys, &e, &goal) {
                Ok(d) => d,
                Err(err) => {
                    ck.fail(format!("{sys}: {err}"));
                    continue;
                }
            };
            let want = bfs_member(&e, &goal, sys);
            if got.is_some() != want {
                ck.fail(format!("{sys}: E={e:?} goal={goal} decider={} oracle={want}", got.is_some()));
            }
            if let Some(d) = got {
                if let Err(err) = d.replay() {
                    ck.fail(format!("{sys}: replay of {goal}: {err}"));
                }
            }
        }
    }
    ck
}

// ---------------------------------------------------------------------------
// word unification against brute force

pub fn random_system(r: &mut ChaCha8Rng) -> (UnificationSystem, OrderingConstraint, Vec<Term>) {
    let nconst = r.gen_range(1..=3);
    let consts: Vec<Term> = ["a", "b", "c"][..nconst].iter().map(|c| cst(c)).collect();
    let nvar = r.gen_range(1..=3);
    let vars: Vec<Term> = ["x", "y", "z"][..nvar].iter().map(|v| Term::var(v)).collect();
    let mut letters = consts.clone();
    letters.extend(vars.iter().cloned());
    let mut s = UnificationSystem::new();
    for _ in 0..r.gen_range(1..=2) {
        let l = word(r, &letters, 1, 3);
        let rr = word(r, &letters, 0, 3);
        s.push(l, rr);
    }
    let mut ord = OrderingConstraint::new();
    if r.gen_bool(0.3) {
        let v = vars.choose(r).unwrap().as_var().unwrap().clone();
        let c = ["a", "b", "c"][r.gen_range(0..nconst)];
        ord.restrict(v, c);
    }
    (s, ord, consts)
}

fn within(sigma: &Substitution, maxlen: usize) -> bool {
    sigma.iter().all(|(_, t)| t.letters().len() <= maxlen)
}

/// Returns the check and the number of UNKNOWN verdicts.
pub fn check_unification(n: usize, seed: u64) -> (Check, usize) {
    let mut ck = Check::new("word unification vs brute force");
    let mut unknown = 0;
    let mut r = rng(seed);
    let limits = SearchLimits::default();
    for _ in 0..n {
        let (s, ord, alphabet) = random_system(&mut r);
        ck.instances += 1;
        let got = match solve_au_lcr(&s, &ord, &limits) {
            Ok(v) => v,
            Err(e) => {
                ck.fail(format!("{e}"));
                continue;
            }
        };
        let oracle = brute_force_unify(&s, &ord, &alphabet, 3);
        match (&got, &oracle) {
            (Verdict::Sat(w), _) => {
                let ok = s
                    .equations()
                    .iter()
                    .all(|(l, rr)| eq_modulo_au(&w.apply(l), &w.apply(rr)))
                    && ord.satisfied_by(w);
                if !ok {
                    ck.fail(format!("bad witness {w} for {s:?}"));
                }
                if oracle.is_unsat() && within(w, 3) {
                    ck.fail(format!("solver SAT {w}, oracle finds nothing within range: {s:?}"));
                }
            }
            (Verdict::Unsat, Verdict::Sat(w)) => {
                ck.fail(format!("solver UNSAT, oracle witness {w}: {s:?}"));
            }
            (Verdict::Unknown(_), _) => unknown += 1,
            _ => {}
        }
    }
    ck.note = format!("{unknown} unknown of {}", ck.instances);
    (ck, unknown)
}

// ---------------------------------------------------------------------------
// lemma suites

/// Signature 1 survives normalization, and signature-1 syntactic subterms
/// are subterm values.
pub fn check_lemma_normal(n: usize, seed: u64) -> Check {
    let mut ck = Check::new("lemma normal");
    let table = ModeTable::hash_theory();
    let mut r = rng(seed);
    while ck.instances < n {
        let t = Term::Hash(Box::new(raw_term(&mut r, 3)));
        ck.instances += 1;
        let norm = t.canonical();
        if table.sig(&norm) != 1 {
            ck.fail(format!("sig of normal form of {t:?}"));
        }
        let g = ground_term(&mut r, 4);
        let sub = subterm_values(&g, &table);
        for s in g.syntactic_subterms() {
            if table.sig(s) == 1 && !sub.contains(s) {
                ck.fail(format!("{s} is a signature-1 subterm of {g} but not a value"));
            }
        }
    }
    ck
}

/// `Sub(t) \ {eps, t}` is contained in `Sub` of the normal form whenever
/// the factors of `t` are normal.
pub fn check_lemma_preservation(n: usize, seed: u64) -> Check {
    let mut ck = Check::new("lemma preservation");
    let table = ModeTable::hash_theory();
    let mut r = rng(seed);
    let mut tries = 0;
    while ck.instances < n && tries < 100 * n {
        tries += 1;
        let t = raw_term(&mut r, 4);
        if !factors(&t, &table).iter().all(|f| f.canonical() == *f) {
            continue;
        }
        ck.instances += 1;
        let after = subterm_values(&t.canonical(), &table);
        for u in subterm_values(&t, &table) {
            if u != Term::Eps && u != t && !after.contains(&u) {
                ck.fail(format!("{u} lost when normalizing {t:?}"));
            }
        }
    }
    ck
}

/// Independent reading of the collision pattern: some top-level `fun`
/// letter of `m` whose arguments give `m = x1.fun(x1,x2,y1,y2).x2`
/// (sides swapped for `g`) and the other side for `m2`.
fn pattern(m: &Term, m2: &Term, fun: Fun) -> bool {
    m.letters().iter().any(|l| match l {
        Term::App(f, args) if *f == fun => {
            let [x1, x2, y1, y2] = (**args).clone();
            let f_blk = Term::app(Fun::F, [x1.clone(), x2.clone(), y1.clone(), y2.clone()]);
            let g_blk = Term::app(Fun::G, [x1.clone(), x2.clone(), y1.clone(), y2.clone()]);
            let fside = Term::concat([x1.clone(), f_blk, x2.clone()]);
            let gside = Term::concat([y1.clone(), g_blk, y2.clone()]);
            match fun {
                Fun::F => eq_modulo_au(m, &fside) && eq_modulo_au(m2, &gside),
                Fun::G => eq_modulo_au(m, &gside) && eq_modulo_au(m2, &fside),
            }
        }
        _ => false,
    })
}

fn pure_word(r: &mut ChaCha8Rng) -> Term {
    word(r, &[cst("a"), cst("b"), cst("c")], 0, 2)
}

/// Equal hashes of pure arguments: exactly one of the two cases holds.
pub fn check_lemma_reduce(n: usize, seed: u64) -> Check {
    let mut ck = Check::new("lemma reduce");
    let mut r = rng(seed);
    let mut equal_pairs = 0;
    while ck.instances < n {
        let args: [Term; 4] = std::array::from_fn(|_| pure_word(&mut r));
        let [x1, x2, y1, y2] = args.clone();
        let fside = Term::concat([x1, Term::app(Fun::F, args.clone()), x2]);
        let gside = Term::concat([y1, Term::app(Fun::G, args.clone()), y2]);
        let (m, m2) = match r.gen_range(0..5) {
            0 => (fside.clone(), gside),
            1 => (gside, fside.clone()),
            2 => (fside.clone(), fside),
            3 => (fside, pure_word(&mut r)),
            _ => {
                // near miss: the g-side suffix is perturbed
                let [_, _, y1, y2] = args.clone();
                let bent = Term::concat([y2, cst("a")]);
                (fside, Term::concat([y1, Term::app(Fun::G, args), bent]))
            }
        };
        ck.instances += 1;
        let eq = eq_modulo_h(&Term::hash(m.clone()), &Term::hash(m2.clone())).unwrap();
        let same = eq_modulo_au(&m, &m2);
        let coll = pattern(&m, &m2, Fun::F) || pattern(&m, &m2, Fun::G);
        if eq {
            equal_pairs += 1;
            if same == coll {
                ck.fail(format!("h({m}) = h({m2}) with equal={same} collision={coll}"));
            }
        } else if same || coll {
            ck.fail(format!("h({m}) != h({m2}) but a case holds"));
        }
    }
    ck.note = format!("{equal_pairs} equal pairs");
    ck
}

/// A composed block absent from the syntactic subterms of `E` has all four
/// arguments derivable.
pub fn check_lemma_fcons(n: usize, seed: u64) -> Check {
    let mut ck = Check::new("lemma fcons");
    let mut r = rng(seed);
    let mut tries = 0;
    let pieces = [cst("a"), cst("b"), cst("c"), Term::Eps, Term::concat([cst("a"), cst("b")])];
    while ck.instances < n && tries < 50 * n {
        tries += 1;
        let letters = vec![
            cst("a"),
            cst("b"),
            Term::app(Fun::F, std::array::from_fn(|_| pieces.choose(&mut r).unwrap().clone())),
        ];
        let e: Vec<Term> = (0..r.gen_range(1..=3)).map(|_| word(&mut r, &letters, 1, 3)).collect();
        let fun = if r.gen_bool(0.5) { Fun::F } else { Fun::G };
        let t = Term::app(fun, std::array::from_fn(|_| pieces.choose(&mut r).unwrap().clone()));
        let in_e = e.iter().any(|x| x.has_subterm(&t));
        if in_e || derivable_free(&e, &t).unwrap().is_none() {
            continue;
        }
        ck.instances += 1;
        for a in t.args() {
            if derivable_free(&e, a).unwrap().is_none() {
                ck.fail(format!("{t} derivable from {e:?} but {a} is not"));
            }
        }
        if !bfs_member(&e, &t, IntruderSystem::Free) {
            ck.fail(format!("{t} not in the closure of {e:?}"));
        }
    }
    ck.note = format!("({tries} generated)");
    ck
}

/// Two single hash steps `E -> E,r -> E,r,t` with `r` outside
/// `Sub(E,t) ∪ C_spe` can be replaced by word/f/g steps and one hash step.
pub fn check_criterion(n: usize, seed: u64) -> Check {
    let mut ck = Check::new("criterion (lemma hyp1)");
    let table = ModeTable::hash_theory();
    let mut r = rng(seed);
    let mut tries = 0;
    while ck.instances < n && tries < 50 * n {
        tries += 1;
        let letters = [cst("a"), cst("b"), Term::app(Fun::G, [cst("a"), Term::Eps, cst("b"), Term::Eps])];
        let e: Vec<Term> = (0..r.gen_range(1..=3)).map(|_| word(&mut r, &letters, 1, 3)).collect();
        let x = e.choose(&mut r).unwrap().clone();
        let rt = Term::hash(x);
        let mut pool = e.clone();
        pool.push(rt.clone());
        let x2 = pool.choose(&mut r).unwrap().clone();
        let t = Term::hash(x2.clone());
        let mut et: Vec<Term> = e.clone();
        et.push(t.clone());
        let sub: BTreeSet<Term> = et.iter().flat_map(|s| subterm_values(s, &table)).collect();
        if sub.contains(&rt) || table.is_special(&rt) {
            continue;
        }
        ck.instances += 1;
        let direct = derivable_free(&e, &x2).ok().flatten().is_some()
            || collision_partner(&x2).is_some_and(|p| derivable_free(&e, &p).ok().flatten().is_some());
        if !direct {
            ck.fail(format!("{t} needs {rt} from {e:?}"));
        }
    }
    ck.note = format!("({tries} generated)");
    ck
}

/// For systems with `h(m1) = h(m2)` and a verified solution, `m1 sigma`
/// and `m2 sigma` are derivable without hashing from exactly the same
/// knowledge sets.
pub fn check_lemma_hash1(n: usize, seed: u64) -> Check {
    let mut ck = Check::new("lemma hash1");
    let mut r = rng(seed);
    let mut tries = 0;
    let atoms = [cst("a"), cst("b"), cst("c")];
    while ck.instances < n && tries < 50 * n {
        tries += 1;
        let args: [Term; 4] = std::array::from_fn(|_| word(&mut r, &atoms, 0, 1));
        let [t1, t2, t3, t4] = args.clone();
        let (x, y) = (Var::new("x"), Var::new("y"));
        let collide = r.gen_bool(0.7);
        let mut sigma = Substitution::new();
        let (m1, m2) = if collide {
            sigma.insert(x.clone(), Term::app(Fun::F, args.clone()));
            sigma.insert(y.clone(), Term::app(Fun::G, args.clone()));
            (
                Term::concat([t1, Term::Var(x.clone()), t2]),
                Term::concat([t3, Term::Var(y.clone()), t4]),
            )
        } else {
            let w = word(&mut r, &atoms, 1, 2);
            sigma.insert(x.clone(), w.clone());
            sigma.insert(y.clone(), w);
            (
                Term::concat([t1.clone(), Term::Var(x.clone())]),
                Term::concat([t1, Term::Var(y.clone())]),
            )
        };
        let e1: Vec<Term> = (0..r.gen_range(1..=3)).map(|_| word(&mut r, &atoms, 1, 2)).collect();
        let mut e2 = e1.clone();
        e2.push(Term::Var(x.clone()));
        let mut c = ConstraintSystem::new();
        c.push(e1, x);
        c.push(e2, y);
        c.equate(Term::hash(m1.clone()), Term::hash(m2.clone()));
        if !verify_solution(&c, &sigma, IntruderSystem::H) {
            continue;
        }
        ck.instances += 1;
        for con in &c.constraints {
            let e: Vec<Term> = con.knowledge.iter().map(|t| sigma.apply(t)).collect();
            let d1 = derivable_free(&e, &sigma.apply(&m1)).unwrap().is_some();
            let d2 = derivable_free(&e, &sigma.apply(&m2)).unwrap().is_some();
            if d1 != d2 {
                ck.fail(format!("{c} under {sigma}: {d1} vs {d2}"));
            }
        }
    }
    ck
}

/// `1.2`-style position of every occurrence of `needle` in `t`.
pub fn occurrences(t: &Term, needle: &Term) -> Vec<Position> {
    t.positions()
        .into_iter()
        .filter(|(_, s)| *s == needle)
        .map(|(p, _)| p)
        .collect()
}
