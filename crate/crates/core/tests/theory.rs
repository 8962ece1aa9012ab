mod common;

use std::collections::BTreeSet;

use common::*;
use hashcol_core::mode::ModeTable;
use hashcol_core::theory::{
    check_well_moded, eq_modulo_au, eq_modulo_h, is_regular, normalize, EquationalPresentation,
};
use hashcol_core::{Fun, Term};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn sides(args: &[Term; 4]) -> (Term, Term) {
    let [x1, x2, y1, y2] = args.clone();
    (
        Term::concat([x1, Term::app(Fun::F, args.clone()), x2]),
        Term::concat([y1, Term::app(Fun::G, args.clone()), y2]),
    )
}

/// Arguments `m'` with `h(m) -> h(m')` by one collision step at the root.
fn root_steps(m: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    for l in m.letters() {
        if let Term::App(_, args) = l {
            let (fs, gs) = sides(args);
            if *m == fs {
                out.push(gs);
            } else if *m == gs {
                out.push(fs);
            }
        }
    }
    out
}

/// Every term reachable from `t` by one collision step at any position.
fn one_step(t: &Term) -> Vec<Term> {
    match t {
        Term::Var(_) | Term::Const(_) | Term::Eps => vec![],
        Term::Hash(m) => {
            let mut out: Vec<Term> = root_steps(m).into_iter().map(Term::hash).collect();
            out.extend(one_step(m).into_iter().map(Term::hash));
            out
        }
        Term::Concat(ls) => {
            let mut out = Vec::new();
            for (i, l) in ls.iter().enumerate() {
                for r in one_step(l) {
                    let mut v = ls.clone();
                    v[i] = r;
                    out.push(Term::concat(v));
                }
            }
            out
        }
        Term::App(f, args) => {
            let mut out = Vec::new();
            for i in 0..4 {
                for r in one_step(&args[i]) {
                    let mut a = (**args).clone();
                    a[i] = r;
                    out.push(Term::app(*f, a));
                }
            }
            out
        }
    }
}

fn class(t: &Term) -> BTreeSet<Term> {
    let mut seen = BTreeSet::from([t.clone()]);
    let mut todo = vec![t.clone()];
    while let Some(u) = todo.pop() {
        for v in one_step(&u) {
            if seen.len() < 4096 && seen.insert(v.clone()) {
                todo.push(v);
            }
        }
    }
    seen
}

fn small_word(r: &mut ChaCha8Rng) -> Term {
    word(r, &[cst("a"), cst("b")], 0, 2)
}

/// Ground terms rich in collision redexes.
fn colliding(r: &mut ChaCha8Rng, depth: usize) -> Term {
    if depth == 0 {
        return small_word(r);
    }
    match r.gen_range(0..5) {
        0 | 1 => {
            let args: [Term; 4] = std::array::from_fn(|_| {
                if r.gen_bool(0.3) {
                    colliding(r, depth - 1)
                } else {
                    small_word(r)
                }
            });
            let (fs, gs) = sides(&args);
            Term::hash(if r.gen_bool(0.5) { fs } else { gs })
        }
        2 => Term::hash(colliding(r, depth - 1)),
        3 => Term::concat([colliding(r, depth - 1), small_word(r), colliding(r, depth - 1)]),
        _ => {
            let fun = if r.gen_bool(0.5) { Fun::F } else { Fun::G };
            Term::app(fun, std::array::from_fn(|_| colliding(r, depth - 1)))
        }
    }
}

fn mutate(r: &mut ChaCha8Rng, t: &Term) -> Term {
    let ps = t.positions();
    let (_, s) = ps.choose(r).unwrap();
    let to = [cst("a"), cst("b"), cst("c"), Term::Eps].choose(r).unwrap().clone();
    t.replace(s, &to)
}

#[test]
fn eq_h_matches_rewriting_oracle() {
    let mut ck = Check::new("E_h equality vs one-step rewriting");
    let mut r = rng(SEED);
    let mut equal = 0;
    while ck.instances < 400 {
        let t1 = colliding(&mut r, 2);
        let t2 = match r.gen_range(0..3) {
            0 => mutate(&mut r, &t1),
            1 => colliding(&mut r, 2),
            _ => {
                let mut t = t1.clone();
                for _ in 0..r.gen_range(1..=3) {
                    if let Some(n) = one_step(&t).choose(&mut r) {
                        t = n.clone();
                    }
                }
                t
            }
        };
        let cl = class(&t1);
        if cl.len() >= 4096 {
            continue;
        }
        ck.instances += 1;
        let oracle = cl.contains(&t2);
        equal += oracle as usize;
        if eq_modulo_h(&t1, &t2).unwrap() != oracle {
            ck.fail(format!("{t1} vs {t2}: oracle says {oracle}"));
        }
    }
    ck.note = format!("{equal} equal pairs");
    ck.assert_ok(400);
    assert!(equal > 100);
}

#[test]
fn known_collision_instances() {
    let [a, b, c, d] = ["a", "b", "c", "d"].map(cst);
    let args = [a, b, c.clone(), d];
    let (fs, gs) = sides(&args);
    assert!(eq_modulo_h(&Term::hash(fs.clone()), &Term::hash(gs.clone())).unwrap());
    // the g-side must use y1 and y2 as its context
    let wrong = Term::concat([c.clone(), Term::app(Fun::G, args), c]);
    assert!(!eq_modulo_h(&Term::hash(fs.clone()), &Term::hash(wrong.clone())).unwrap());
    assert!(!class(&Term::hash(fs.clone())).contains(&Term::hash(wrong)));
    // no collision without the hash
    assert!(!eq_modulo_h(&fs, &gs).unwrap());
    assert!(eq_modulo_h(&Term::var("x"), &Term::var("x")).is_err());
}

#[test]
fn no_iteration() {
    // pairwise distinct hash-free words, no three of which share an E_h class
    // under the hash
    let mut r = rng(SEED + 1);
    let mut words: BTreeSet<Term> = BTreeSet::new();
    while words.len() < 36 {
        let args: [Term; 4] = std::array::from_fn(|_| word(&mut r, &[cst("a"), cst("b")], 0, 1));
        let (fs, gs) = sides(&args);
        words.insert(fs);
        words.insert(gs);
        words.insert(word(&mut r, &[cst("a"), cst("b"), Term::app(Fun::F, args)], 1, 3));
    }
    let ws: Vec<Term> = words.into_iter().collect();
    let eqh = |a: &Term, b: &Term| eq_modulo_h(&Term::hash(a.clone()), &Term::hash(b.clone())).unwrap();
    let mut pairs = 0;
    for i in 0..ws.len() {
        for j in i + 1..ws.len() {
            if !eqh(&ws[i], &ws[j]) {
                continue;
            }
            pairs += 1;
            for k in j + 1..ws.len() {
                assert!(
                    !(eqh(&ws[i], &ws[k]) && eqh(&ws[j], &ws[k])),
                    "{} {} {}",
                    ws[i],
                    ws[j],
                    ws[k]
                );
            }
        }
    }
    assert!(pairs > 0);
    for w in &ws {
        assert!(class(&Term::hash(w.clone())).len() <= 2);
    }
}

#[test]
fn hash_free_equality_is_au() {
    let mut r = rng(SEED + 2);
    let strip = |t: &Term| {
        t.map_bottom_up(&mut |u| match u {
            Term::Hash(m) => *m,
            other => other,
        })
    };
    for _ in 0..300 {
        let t1 = strip(&raw_term(&mut r, 4));
        let t2 = if r.gen_bool(0.5) {
            strip(&raw_term(&mut r, 4))
        } else {
            Term::Concat(vec![Term::Eps, t1.clone(), Term::Concat(vec![])])
        };
        assert_eq!(eq_modulo_h(&t1, &t2).unwrap(), eq_modulo_au(&t1, &t2), "{t1:?} {t2:?}");
    }
}

#[test]
fn normalization_is_idempotent_and_congruent() {
    let mut r = rng(SEED + 3);
    for _ in 0..300 {
        let t = raw_term(&mut r, 4);
        let n = normalize(&t);
        assert_eq!(normalize(&n), n);
        assert!(eq_modulo_au(&t, &n));
        let u = colliding(&mut r, 1);
        for s in one_step(&u) {
            assert!(eq_modulo_h(&u, &s).unwrap());
            let ctx = |x: &Term| Term::app(Fun::G, [cst("a"), Term::hash(x.clone()), Term::Eps, cst("b")]);
            assert!(eq_modulo_h(&ctx(&u), &ctx(&s)).unwrap());
            let cat = |x: &Term| Term::concat([cst("c"), x.clone(), cst("c")]);
            assert!(eq_modulo_h(&cat(&u), &cat(&s)).unwrap());
        }
    }
}

#[test]
fn presentations() {
    let table = ModeTable::hash_theory();
    for p in [EquationalPresentation::au(), EquationalPresentation::e_h()] {
        assert!(is_regular(&p));
        let (ok, v) = check_well_moded(&p, &table);
        assert!(ok, "{v:?}");
    }
}
