use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde_json::{Map, Value};

use hashcol_core::csolve::{solve, verify_solution, ConstraintSystem};
use hashcol_core::deduce::{derivable, IntruderSystem};
use hashcol_core::reduce::{enumerate_reductions, solve_h, HReport};
use hashcol_core::unify::solve_au_lcr;
use hashcol_core::Verdict;

use crate::args::{Cli, Command, Format, Theory};
use crate::config::Settings;
use crate::error::CliError;
use crate::input::{parse_constraints, parse_derivation, parse_unification};
use crate::protocol::{parse_protocol, protocol_to_constraints};
use crate::report::*;

/// What the binary prints and returns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn system_of(t: Theory) -> IntruderSystem {
    match t {
        Theory::Au => IntruderSystem::Au,
        Theory::F => IntruderSystem::F,
        Theory::G => IntruderSystem::G,
        Theory::Free => IntruderSystem::Free,
        Theory::H => IntruderSystem::H,
    }
}

pub fn settings(cli: &Cli) -> Result<Settings, CliError> {
    let mut st = Settings::default();
    if let Some(p) = &cli.global.config {
        st.apply_config(&read(p)?)?;
    }
    st.apply_flags(&cli.global);
    Ok(st)
}

pub fn run(cli: &Cli) -> Outcome {
    let result = settings(cli).and_then(|st| {
        let start = Instant::now();
        let r = dispatch(&cli.command, &st)?;
        Ok((r, st, start.elapsed().as_millis()))
    });
    match result {
        Ok((mut r, st, ms)) => {
            let stdout = match st.format {
                Format::Json => {
                    if let Value::Object(m) = r.json {
                        r.json = finish(m, &st, ms);
                    }
                    let mut s = serde_json::to_string_pretty(&r.json).expect("serializable");
                    s.push('\n');
                    s
                }
                Format::Text => {
                    text_footer(&mut r.text, &st, ms);
                    r.text
                }
            };
            Outcome {
                code: r.code,
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => Outcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn dispatch(cmd: &Command, st: &Settings) -> Result<Report, CliError> {
    match cmd {
        Command::Analyze { file } => {
            let spec = parse_protocol(&read(file)?)?;
            let c = protocol_to_constraints(&spec, st.sessions)?;
            hash_report("analyze", &c, st)
        }
        Command::Solve { file, theory } => {
            let c = parse_constraints(&read(file)?)?;
            if *theory == Theory::H {
                return hash_report("solve", &c, st);
            }
            let system = system_of(*theory);
            let v = solve(&c, system, &st.search)?;
            let mut m = Map::new();
            m.insert("command".into(), "solve".into());
            m.insert("theory".into(), system.name().into());
            verdict_fields(&mut m, &v);
            let mut text = format!("theory: {system}\n");
            text_verdict(&mut text, &v);
            Ok(Report {
                code: exit_code(&v),
                json: Value::Object(m),
                text,
            })
        }
        Command::Derive { file, theory } => {
            let (e, goal) = parse_derivation(&read(file)?)?;
            let system = system_of(*theory);
            let d = derivable(system, &e, &goal)?;
            let mut m = Map::new();
            m.insert("command".into(), "derive".into());
            m.insert("theory".into(), system.name().into());
            m.insert("derivable".into(), d.is_some().into());
            let mut text = format!("theory: {system}\n");
            match &d {
                Some(d) => {
                    if let Value::Object(dm) = derivation(d) {
                        m.extend(dm);
                    }
                    let _ = writeln!(text, "{goal} is derivable");
                    text.push_str(&d.to_string());
                }
                None => {
                    m.insert("goal".into(), goal.to_string().into());
                    let _ = writeln!(text, "{goal} is not derivable");
                }
            }
            Ok(Report {
                code: if d.is_some() { EXIT_FOUND } else { EXIT_NONE },
                json: Value::Object(m),
                text,
            })
        }
        Command::Unify { file } => {
            let (s, ord) = parse_unification(&read(file)?)?;
            let v = solve_au_lcr(&s, &ord, &st.search)?;
            let mut m = Map::new();
            m.insert("command".into(), "unify".into());
            verdict_fields(&mut m, &v);
            let mut text = String::new();
            text_verdict(&mut text, &v);
            Ok(Report {
                code: exit_code(&v),
                json: Value::Object(m),
                text,
            })
        }
        Command::Reduce { file } => {
            let c = parse_constraints(&read(file)?)?;
            let (bs, stats) = enumerate_reductions(&c, &st.reduce)?;
            let mut m = Map::new();
            m.insert("command".into(), "reduce".into());
            m.insert("hashed_subterms".into(), hashcol_core::reduce::hashed_subterms(&c).len().into());
            m.insert("stats".into(), crate::report::stats(&stats));
            m.insert(
                "branches".into(),
                bs.iter().enumerate().map(|(i, b)| branch(i, b)).collect::<Vec<_>>().into(),
            );
            let mut text = format!("{} branch(es){}\n", bs.len(), if stats.truncated { ", truncated" } else { "" });
            for (i, b) in bs.iter().enumerate() {
                let _ = writeln!(text, "#{i} {}", b.fingerprint());
                for l in b.system.to_string().lines() {
                    let _ = writeln!(text, "    {l}");
                }
            }
            Ok(Report {
                code: if stats.truncated { EXIT_UNKNOWN } else { EXIT_NONE },
                json: Value::Object(m),
                text,
            })
        }
    }
}

/// Runs the hash-intruder search and re-checks any attack before reporting it.
fn hash_report(command: &str, c: &ConstraintSystem, st: &Settings) -> Result<Report, CliError> {
    let HReport {
        mut verdict,
        trace,
        stats,
    } = solve_h(c, &st.reduce, &st.search)?;
    let replayed = trace
        .as_ref()
        .is_some_and(|t| t.derivations.iter().all(|d| d.replay().is_ok()));
    if let Verdict::Sat(s) = &verdict {
        if !replayed || !verify_solution(c, s, IntruderSystem::H) {
            verdict = Verdict::Unknown(st.search.bound);
        }
    }
    let mut m = Map::new();
    m.insert("command".into(), command.into());
    m.insert("verdict".into(), verdict.label().into());
    m.insert("attack".into(), verdict.is_sat().into());
    m.insert("system".into(), system(c));
    let mut text = String::new();
    let _ = write!(text, "constraint system:\n{c}");
    match (&verdict, &trace) {
        (Verdict::Sat(s), Some(t)) => {
            m.insert("branch".into(), t.branch.clone().into());
            m.insert("substitution".into(), substitution(s));
            m.insert("trace".into(), crate::report::trace(t, c));
            text.push_str("verdict: SAT (attack found)\n");
            let _ = writeln!(text, "branch: {}", t.branch);
            text.push_str("substitution:\n");
            text_substitution(&mut text, s);
            text_trace(&mut text, t, c);
            if t.uses_collision() {
                text.push_str("the attack uses a hash collision\n");
            }
        }
        (Verdict::Unknown(b), _) => {
            m.insert("bound".into(), (*b).into());
            let _ = writeln!(text, "verdict: UNKNOWN (search limits reached, bound {b})");
        }
        _ => text.push_str("verdict: UNSAT (no attack within the encoded sessions)\n"),
    }
    m.insert("stats".into(), crate::report::stats(&stats));
    let _ = writeln!(
        text,
        "branches explored: {}{}",
        stats.branches,
        if stats.truncated { " (truncated)" } else { "" }
    );
    Ok(Report {
        code: exit_code(&verdict),
        json: Value::Object(m),
        text,
    })
}
