//! JSON and text renderings. JSON objects keep insertion order, and every
//! collection is emitted in a fixed order, so equal inputs give byte-equal
//! output. Wall-clock time is only included on request.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use hashcol_core::csolve::ConstraintSystem;
use hashcol_core::deduce::Derivation;
use hashcol_core::reduce::{AttackTrace, Enumeration, ReductionBranch};
use hashcol_core::{Substitution, Term, Verdict};

use crate::config::Settings;

pub const EXIT_NONE: i32 = 0;
pub const EXIT_FOUND: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

/// A finished command: exit code plus both renderings.
#[derive(Clone, Debug)]
pub struct Report {
    pub code: i32,
    pub json: Value,
    pub text: String,
}

pub fn exit_code(v: &Verdict) -> i32 {
    match v {
        Verdict::Sat(_) => EXIT_FOUND,
        Verdict::Unsat => EXIT_NONE,
        Verdict::Unknown(_) => EXIT_UNKNOWN,
    }
}

fn s(t: &Term) -> Value {
    Value::String(t.to_string())
}

pub fn substitution(sigma: &Substitution) -> Value {
    let mut m = Map::new();
    for (v, t) in sigma.iter() {
        m.insert(v.to_string(), s(t));
    }
    Value::Object(m)
}

pub fn derivation(d: &Derivation) -> Value {
    json!({
        "goal": s(&d.goal),
        "steps": d.steps.iter().map(|st| json!({
            "rule": st.rule.name(),
            "premises": st.premises.iter().map(s).collect::<Vec<_>>(),
            "derived": s(&st.derived),
        })).collect::<Vec<_>>(),
    })
}

pub fn system(c: &ConstraintSystem) -> Value {
    json!({
        "constraints": c.constraints.iter().map(|k| json!({
            "knows": k.knowledge.iter().map(s).collect::<Vec<_>>(),
            "deduce": k.target.to_string(),
        })).collect::<Vec<_>>(),
        "equations": c.equations.equations().iter().map(|(l, r)| json!([s(l), s(r)])).collect::<Vec<_>>(),
        "order": c.order.pairs().map(|(a, b)| json!([a.to_string(), b.to_string()])).collect::<Vec<_>>(),
    })
}

pub fn limits(st: &Settings) -> Value {
    json!({
        "max_word_len": st.search.bound,
        "max_states": st.search.max_states,
        "max_branches": st.reduce.max_branches,
        "max_k": st.reduce.max_k,
        "collisions": st.reduce.collisions,
        "sessions": st.sessions,
    })
}

/// Verdict fields shared by the solver reports.
pub fn verdict_fields(m: &mut Map<String, Value>, v: &Verdict) {
    m.insert("verdict".into(), v.label().into());
    match v {
        Verdict::Sat(w) => {
            m.insert("witness".into(), substitution(w));
        }
        Verdict::Unknown(b) => {
            m.insert("bound".into(), (*b).into());
        }
        Verdict::Unsat => {}
    }
}

/// Appends seed, limits and (if enabled) timing.
pub fn finish(mut m: Map<String, Value>, st: &Settings, elapsed_ms: u128) -> Value {
    m.insert("limits".into(), limits(st));
    if let Some(seed) = st.seed {
        m.insert("seed".into(), seed.into());
    }
    if st.timing {
        m.insert("time_ms".into(), Value::from(elapsed_ms as u64));
    }
    Value::Object(m)
}

pub fn trace(t: &AttackTrace, c: &ConstraintSystem) -> Value {
    json!({
        "derivations": t.derivations.iter().zip(&c.constraints).map(|(d, k)| {
            let mut v = derivation(d);
            v.as_object_mut().unwrap().insert("target".into(), k.target.to_string().into());
            v
        }).collect::<Vec<_>>(),
        "equations": t.equations.iter().map(|e| json!({
            "left": s(&e.left),
            "right": s(&e.right),
            "justification": e.justification.name(),
        })).collect::<Vec<_>>(),
        "uses_collision": t.uses_collision(),
    })
}

pub fn stats(e: &Enumeration) -> Value {
    json!({ "branches": e.branches, "truncated": e.truncated })
}

pub fn branch(i: usize, b: &ReductionBranch) -> Value {
    json!({
        "index": i,
        "fingerprint": b.fingerprint(),
        "k": b.k(),
        "classes": b.classes.iter().map(|cl| cl.iter().map(s).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "placement": b.placement.iter().map(|(j, slot)| json!({"class": j, "slot": slot})).collect::<Vec<_>>(),
        "cases": b.cases.iter().map(|c| format!("{c:?}").to_ascii_lowercase()).collect::<Vec<_>>(),
        "system": system(&b.system),
    })
}

// ---------------------------------------------------------------------------
// text

pub fn text_substitution(out: &mut String, sigma: &Substitution) {
    for (v, t) in sigma.iter() {
        let _ = writeln!(out, "  {v} = {t}");
    }
}

pub fn text_verdict(out: &mut String, v: &Verdict) {
    let _ = writeln!(out, "verdict: {v}");
    if let Verdict::Sat(w) = v {
        text_substitution(out, w);
    }
}

pub fn text_trace(out: &mut String, t: &AttackTrace, c: &ConstraintSystem) {
    for (d, k) in t.derivations.iter().zip(&c.constraints) {
        let _ = writeln!(out, "derivation of {} = {}:", k.target, d.goal);
        if d.steps.is_empty() {
            out.push_str("    (known)\n");
        }
        for line in d.to_string().lines() {
            let _ = writeln!(out, "  {line}");
        }
    }
    if !t.equations.is_empty() {
        out.push_str("equations:\n");
    }
    for e in &t.equations {
        let _ = writeln!(out, "  {} = {}  [{}]", e.left, e.right, e.justification.name());
    }
}

pub fn text_footer(out: &mut String, st: &Settings, elapsed_ms: u128) {
    if let Some(seed) = st.seed {
        let _ = writeln!(out, "seed: {seed}");
    }
    if st.timing {
        let _ = writeln!(out, "time: {elapsed_ms} ms");
    }
}
