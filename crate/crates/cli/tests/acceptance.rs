//! The acceptance gate. Each criterion prints one PASS/FAIL line (written
//! straight to stderr so it shows without `--nocapture`); the test fails if
//! any criterion does.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;

use hashcol::input::parse_constraints;
use hashcol::protocol::{parse_protocol, protocol_to_constraints};
use hashcol_core::csolve::{verify_solution, ConstraintSystem};
use hashcol_core::deduce::{derivable_h, IntruderSystem};
use hashcol_core::mode::{factors, subterm_values, ArgModes, ModeTable, Symbol, Tree, DEFAULT_C_MIN};
use hashcol_core::reduce::{enumerate_reductions, hashed_subterms, PairCase, ReduceLimits, ReductionBranch};
use hashcol_core::theory::{check_well_moded, EquationalPresentation};
use hashcol_core::{parse_term, Substitution, Term, Var};
use serde_json::Value;

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn criterion(n: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(msg)
    });
    let (tag, detail, ok) = match r {
        Ok(d) => ("PASS", d, true),
        Err(d) => ("FAIL", d, false),
    };
    let _ = writeln!(std::io::stderr(), "{tag} criterion {n}: {name} -- {detail}");
    ok
}

fn from_check(ck: &Check, min: usize) -> Outcome {
    ensure(ck.passed(), format!("{} violation(s), first: {:?}", ck.violations.len(), ck.violations.first()))?;
    ensure(ck.instances >= min, format!("only {} instances", ck.instances))?;
    Ok(format!("{}: {} instances, 0 violations {}", ck.name, ck.instances, ck.note))
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn corpus_files(ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(corpus())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .collect();
    v.sort();
    v
}

fn hashcol(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hashcol"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

// 1 -------------------------------------------------------------------------

fn well_modedness() -> Outcome {
    let table = ModeTable::hash_theory();
    let eh = EquationalPresentation::e_h();
    let (ok, v) = check_well_moded(&eh, &table);
    ensure(ok, format!("E_h rejected: {v:?}"))?;
    let mut mutated = table.clone();
    mutated.set_modes(Symbol::Hash, ArgModes::PerArg(vec![1]));
    let (ok2, v2) = check_well_moded(&eh, &mutated);
    ensure(!ok2, "mutated table with mode(h,1)=1 accepted")?;
    Ok(format!("accepted under the hash table; mutated table rejected with {} violation(s)", v2.len()))
}

// 2 -------------------------------------------------------------------------

fn moded_tree() -> Outcome {
    let mut m = ModeTable::empty(DEFAULT_C_MIN);
    for s in ["f", "g"] {
        m.set_sig(Symbol::Fun(s.into()), 1);
        m.set_modes(Symbol::Fun(s.into()), ArgModes::PerArg(vec![1, 0]));
    }
    let (a, b, c, d) = (Tree::cst("a"), Tree::cst("b"), Tree::cst("c"), Tree::cst("d"));
    let fcc = Tree::app("f", vec![c.clone(), c.clone()]);
    let t = Tree::app(
        "f",
        vec![Tree::app("f", vec![Tree::app("g", vec![a.clone(), b.clone()]), fcc.clone()]), d.clone()],
    );
    let want: BTreeSet<Tree> = [t.clone(), a.clone(), b.clone(), fcc.clone(), c, d.clone()].into();
    let want_f: BTreeSet<Tree> = [a, b, fcc, d].into();
    let sub = subterm_values(&t, &m);
    let fac = factors(&t, &m);
    ensure(sub == want, format!("Sub = {sub:?}"))?;
    ensure(fac == want_f, format!("Fact = {fac:?}"))?;
    Ok("Sub and Fact match".into())
}

// 6 -------------------------------------------------------------------------

fn intro_differential() -> Outcome {
    let intro = corpus().join("intro.proto");
    let path = intro.to_str().unwrap();
    let (code, out) = hashcol(&["analyze", path, "--format", "json"]);
    ensure(code == 1, format!("default run exited {code}"))?;
    let v: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let trace = &v["trace"];
    let hc_step = trace["derivations"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|d| d["steps"].as_array().unwrap().iter())
        .any(|s| matches!(s["rule"].as_str(), Some("eq-hc" | "hash-hc")));
    let hc_eq = trace["equations"]
        .as_array()
        .unwrap()
        .iter()
        .any(|e| e["justification"] == "HC");
    ensure(hc_step || hc_eq, "no collision-justified step in the trace")?;

    // re-verify the printed witness independently of the binary
    let spec = parse_protocol(&std::fs::read_to_string(&intro).unwrap()).map_err(|e| e.to_string())?;
    let c = protocol_to_constraints(&spec, 1).map_err(|e| e.to_string())?;
    let sigma: Substitution = v["substitution"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, t)| {
            (
                Var::new(k.trim_start_matches('?')),
                parse_term(t.as_str().unwrap()).unwrap(),
            )
        })
        .collect();
    ensure(verify_solution(&c, &sigma, IntruderSystem::H), "witness does not verify")?;
    for con in &c.constraints {
        let e: Vec<Term> = con.knowledge.iter().map(|t| sigma.apply(t)).collect();
        let goal = sigma.apply(&Term::Var(con.target.clone()));
        ensure(derivable_h(&e, &goal).unwrap().is_some(), format!("{goal} not derivable"))?;
        ensure(bfs_member(&e, &goal, IntruderSystem::H), format!("{goal} outside the closure oracle"))?;
    }

    let (code2, out2) = hashcol(&["analyze", path, "--format", "json", "--no-collisions"]);
    ensure(code2 == 0, format!("--no-collisions run exited {code2}"))?;
    let v2: Value = serde_json::from_str(&out2).map_err(|e| e.to_string())?;
    ensure(v2["stats"]["truncated"] == false, "branch space truncated")?;
    let (code3, _) = hashcol(&["analyze", corpus().join("swap.eq").to_str().unwrap()]);
    ensure(code3 == 3, format!("garbage input exited {code3}"))?;
    Ok(format!(
        "exit 1 with witness ?m = {}, exit 0 over {} branches without collisions",
        v["substitution"]["?m"], v2["stats"]["branches"]
    ))
}

// 7 -------------------------------------------------------------------------

/// Index into `cases` of the pair `(class representative, member)`.
fn pair_index(b: &ReductionBranch, class: usize, member: usize) -> Option<usize> {
    let placed: BTreeSet<usize> = b.placement.iter().map(|(j, _)| *j).collect();
    let mut idx = 0;
    for (j, cls) in b.classes.iter().enumerate() {
        let own = if placed.contains(&j) { cls.len() } else { cls.len() - 1 };
        if j == class {
            let skip = if placed.contains(&j) { 0 } else { 1 };
            return member.checked_sub(skip).map(|i| idx + i);
        }
        idx += own;
    }
    None
}

fn structural(c: &ConstraintSystem, name: &str) -> Result<usize, String> {
    let (bs, stats) = enumerate_reductions(c, &ReduceLimits::default()).map_err(|e| format!("{name}: {e}"))?;
    ensure(!stats.truncated, format!("{name}: truncated"))?;
    if hashed_subterms(c).is_empty() {
        ensure(bs.len() == 1 && bs[0].k() == 0 && bs[0].system == *c, format!("{name}: k=0 branch differs"))?;
    }
    for b in &bs {
        ensure(
            b.system.terms().iter().all(|t| !t.contains_hash()),
            format!("{name}: {} keeps an h", b.fingerprint()),
        )?;
    }
    for (l, r) in c.equations.equations() {
        if !(matches!(l, Term::Hash(_)) && matches!(r, Term::Hash(_))) || l == r {
            continue;
        }
        let mut seen = BTreeSet::new();
        for b in &bs {
            let Some(j) = b.classes.iter().position(|cl| cl.contains(l) && cl.contains(r)) else {
                continue;
            };
            let cl = &b.classes[j];
            let (pl, pr) = (cl.iter().position(|t| t == l).unwrap(), cl.iter().position(|t| t == r).unwrap());
            // the pair between the two sides exists when one of them is the representative
            let member = match (pl, pr) {
                (0, m) | (m, 0) if !b.placement.iter().any(|(k, _)| *k == j) => m,
                _ => continue,
            };
            if let Some(i) = pair_index(b, j, member) {
                seen.insert(b.cases[i]);
            }
        }
        ensure(
            seen.contains(&PairCase::Equal) && seen.contains(&PairCase::Collision),
            format!("{name}: {l} = {r} has cases {seen:?}"),
        )?;
    }
    Ok(bs.len())
}

fn corpus_structure() -> Outcome {
    let mut systems = Vec::new();
    for p in corpus_files("cs") {
        let c = parse_constraints(&std::fs::read_to_string(&p).unwrap()).map_err(|e| e.to_string())?;
        systems.push((p, c));
    }
    for p in corpus_files("proto") {
        let spec = parse_protocol(&std::fs::read_to_string(&p).unwrap()).map_err(|e| e.to_string())?;
        systems.push((p, protocol_to_constraints(&spec, 1).map_err(|e| e.to_string())?));
    }
    let mut total = 0;
    for (p, c) in &systems {
        total += structural(c, &p.file_name().unwrap().to_string_lossy())?;
    }
    // the expected verdicts written in each file
    let mut checked = 0;
    for (ext, cmd) in [("proto", "analyze"), ("cs", "solve"), ("eq", "unify"), ("der", "derive")] {
        for p in corpus_files(ext) {
            let text = std::fs::read_to_string(&p).unwrap();
            let want: i32 = text
                .lines()
                .find_map(|l| l.strip_prefix("# expect:"))
                .ok_or(format!("{} has no expectation", p.display()))?
                .trim()
                .parse()
                .unwrap();
            let (got, _) = hashcol(&[cmd, p.to_str().unwrap()]);
            ensure(got == want, format!("{}: exit {got}, expected {want}", p.display()))?;
            checked += 1;
        }
    }
    Ok(format!(
        "{} systems, {total} branches, all h-free; {checked} corpus verdicts as expected",
        systems.len()
    ))
}

// 8 -------------------------------------------------------------------------

fn determinism() -> Outcome {
    let run = || {
        let mut all = String::new();
        for (ext, cmd) in [("proto", "analyze"), ("cs", "solve"), ("eq", "unify"), ("der", "derive"), ("cs", "reduce")] {
            for p in corpus_files(ext) {
                let (code, out) = hashcol(&[cmd, p.to_str().unwrap(), "--format", "json", "--seed", "2007"]);
                all.push_str(&format!("{code}\n{out}"));
            }
        }
        all
    };
    let (a, b) = (run(), run());
    ensure(a == b, "outputs differ between runs")?;
    ensure(!a.contains("time_ms"), "timing leaked into default output")?;
    Ok(format!("{} bytes of JSON identical across two runs", a.len()))
}

#[test]
fn acceptance() {
    let mut ok = true;
    ok &= criterion(1, "well-modedness", well_modedness);
    ok &= criterion(2, "subterm values and factors of a moded tree", moded_tree);
    ok &= criterion(3, "derivability oracle agreement", || {
        from_check(&check_derivability(520, SEED), 500)
    });
    ok &= criterion(4, "word-unification oracle agreement", || {
        let (ck, unknown) = check_unification(320, SEED + 1);
        ensure(unknown * 5 < ck.instances, format!("unknown rate {unknown}/{}", ck.instances))?;
        from_check(&ck, 300).map(|s| format!("{s}, unknown {unknown}/{}", ck.instances))
    });
    ok &= criterion(5, "lemma suite", || {
        let checks = [
            check_lemma_normal(250, SEED + 2),
            check_lemma_preservation(250, SEED + 3),
            check_lemma_reduce(300, SEED + 4),
            check_lemma_fcons(250, SEED + 5),
            check_lemma_hash1(250, SEED + 6),
            check_criterion(250, SEED + 7),
        ];
        let mut parts = Vec::new();
        for ck in &checks {
            parts.push(from_check(ck, 200)?);
        }
        Ok(parts.join("; "))
    });
    ok &= criterion(6, "intro attack differential", intro_differential);
    ok &= criterion(7, "reduction structure over the corpus", corpus_structure);
    ok &= criterion(8, "determinism", determinism);
    assert!(ok, "some acceptance criteria failed");
}
