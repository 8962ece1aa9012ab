//! Equality modulo `AU` (associativity and unit of concatenation) and modulo
//! `E_h = AU + (HC)`, where (HC) is the collision equation
//!
//! ```text
//! h(x1 . f(x1,x2,y1,y2) . x2) = h(y1 . g(x1,x2,y1,y2) . y2)
//! ```
//!
//! Because terms are stored in canonical AU form, AU-equality is structural
//! equality. (HC) only ever relates two `h`-rooted terms whose arguments match
//! the f/g pattern above, and a single application cannot be chained into a
//! third distinct value, so `E_h`-equality is decided by a recursive pattern
//! match instead of rewriting.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::Error;
use crate::mode::{well_moded_child, ModeTable};
use crate::term::{Fun, Position, Term, Var};

/// Normal form: for both theories, the canonical AU form.
pub fn normalize(t: &Term) -> Term {
    t.canonical()
}

pub fn eq_modulo_au(t1: &Term, t2: &Term) -> bool {
    t1.canonical() == t2.canonical()
}

/// Decides `t1 =_{E_h} t2` for ground terms.
pub fn eq_modulo_h(t1: &Term, t2: &Term) -> Result<bool, Error> {
    for t in [t1, t2] {
        if !t.is_ground() {
            return Err(Error::NotGround(t.clone()));
        }
    }
    Ok(eq_h(&t1.canonical(), &t2.canonical()))
}

/// `E_h`-equality on canonical terms. Variables are compared by name, which
/// is sound (never identifies terms that differ under some instance) but
/// only complete on ground input.
pub(crate) fn eq_h(a: &Term, b: &Term) -> bool {
    if a == b {
        return true;
    }
    words_eq_h(a.letters(), b.letters())
}

pub(crate) fn words_eq_h(a: &[Term], b: &[Term]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| letter_eq_h(x, y))
}

fn letter_eq_h(a: &Term, b: &Term) -> bool {
    match (a, b) {
        (Term::Hash(m), Term::Hash(n)) => eq_h(m, n) || is_collision(m, n),
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.iter().zip(ys.iter()).all(|(x, y)| eq_h(x, y))
        }
        _ => a == b,
    }
}

/// The split of a word `m` around a collision block: `m = pre . F(args) . post`
/// where the block's own arguments spell the surrounding context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollisionSplit {
    pub index: usize,
    pub fun: Fun,
    pub args: [Term; 4],
}

/// All indices at which `m` has the shape `x1 . f(x1,x2,y1,y2) . x2` or
/// `y1 . g(x1,x2,y1,y2) . y2` (modulo `E_h` for the context words).
pub fn collision_splits(m: &Term) -> Vec<CollisionSplit> {
    let letters = m.letters();
    let mut out = Vec::new();
    for (i, l) in letters.iter().enumerate() {
        if let Term::App(fun, args) = l {
            let (pre, post) = match fun {
                Fun::F => (&args[0], &args[1]),
                Fun::G => (&args[2], &args[3]),
            };
            if words_eq_h(&letters[..i], pre.letters())
                && words_eq_h(&letters[i + 1..], post.letters())
            {
                out.push(CollisionSplit {
                    index: i,
                    fun: *fun,
                    args: (**args).clone(),
                });
            }
        }
    }
    out
}

/// The other side of the collision: for `x1 . f(x1,x2,y1,y2) . x2` this is
/// `y1 . g(x1,x2,y1,y2) . y2`, and conversely.
pub fn collision_partner(m: &Term) -> Option<Term> {
    let split = collision_splits(m).into_iter().next()?;
    Some(partner_of(split.fun, &split.args))
}

pub(crate) fn partner_of(fun: Fun, args: &[Term; 4]) -> Term {
    let [x1, x2, y1, y2] = args;
    match fun {
        Fun::F => Term::concat([y1.clone(), Term::app(Fun::G, args.clone()), y2.clone()]),
        Fun::G => Term::concat([x1.clone(), Term::app(Fun::F, args.clone()), x2.clone()]),
    }
}

/// `h(m) =_{E_h} h(n)` through one top-level (HC) step.
fn is_collision(m: &Term, n: &Term) -> bool {
    let ns = n.letters();
    collision_splits(m).iter().any(|s| {
        let want = s.fun.other();
        let (pre, post) = match want {
            Fun::F => (&s.args[0], &s.args[1]),
            Fun::G => (&s.args[2], &s.args[3]),
        };
        ns.iter().enumerate().any(|(j, l)| match l {
            Term::App(g, ys) if *g == want => {
                ys.iter().zip(s.args.iter()).all(|(y, x)| eq_h(y, x))
                    && words_eq_h(&ns[..j], pre.letters())
                    && words_eq_h(&ns[j + 1..], post.letters())
            }
            _ => false,
        })
    })
}

/// Justification for a ground equation `l = r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Justification {
    /// Equal modulo associativity and unit.
    Au,
    /// Equal only with at least one collision step.
    Hc,
}

impl Justification {
    pub fn name(self) -> &'static str {
        match self {
            Justification::Au => "AU",
            Justification::Hc => "HC",
        }
    }
}

/// How a ground equation holds, if it does.
pub fn justify(l: &Term, r: &Term) -> Option<Justification> {
    if eq_modulo_au(l, r) {
        Some(Justification::Au)
    } else if eq_h(&l.canonical(), &r.canonical()) {
        Some(Justification::Hc)
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PresentationName {
    Au,
    Eh,
    Custom(String),
}

impl fmt::Display for PresentationName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PresentationName::Au => f.write_str("AU"),
            PresentationName::Eh => f.write_str("E_h"),
            PresentationName::Custom(s) => f.write_str(s),
        }
    }
}

/// A list of equations without free constants whose sides have equal
/// variable sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquationalPresentation {
    pub name: PresentationName,
    equations: Vec<(Term, Term)>,
}

impl EquationalPresentation {
    pub fn new(name: PresentationName, equations: Vec<(Term, Term)>) -> Result<Self, Error> {
        for (u, v) in &equations {
            if !u.consts().is_empty() || !v.consts().is_empty() {
                return Err(Error::ConstantInAxiom(u.clone(), v.clone()));
            }
            if u.vars() != v.vars() {
                return Err(Error::Irregular(u.clone(), v.clone()));
            }
        }
        Ok(EquationalPresentation { name, equations })
    }

    /// `x.(y.z) = (x.y).z`, `x.eps = x`, `eps.x = x`. Stored as written; the
    /// canonical constructors make each side collapse to the same term.
    pub fn au() -> Self {
        let (x, y, z) = (Term::var("x"), Term::var("y"), Term::var("z"));
        let cat = |a: Term, b: Term| Term::concat([a, b]);
        let eqs = alloc::vec![
            (
                cat(x.clone(), cat(y.clone(), z.clone())),
                cat(cat(x.clone(), y), z)
            ),
            (cat(x.clone(), Term::Eps), x.clone()),
            (cat(Term::Eps, x.clone()), x),
        ];
        EquationalPresentation::new(PresentationName::Au, eqs).expect("AU is regular")
    }

    /// `AU` plus the collision equation.
    pub fn e_h() -> Self {
        let mut eqs = EquationalPresentation::au().equations;
        eqs.push(hc_equation());
        EquationalPresentation::new(PresentationName::Eh, eqs).expect("E_h is regular")
    }

    pub fn equations(&self) -> &[(Term, Term)] {
        &self.equations
    }
}

/// `h(x1 . f(x1,x2,y1,y2) . x2) = h(y1 . g(x1,x2,y1,y2) . y2)`.
pub fn hc_equation() -> (Term, Term) {
    let [x1, x2, y1, y2] = ["x1", "x2", "y1", "y2"].map(Term::var);
    let args = [x1.clone(), x2.clone(), y1.clone(), y2.clone()];
    (
        Term::hash(Term::concat([x1, Term::app(Fun::F, args.clone()), x2])),
        Term::hash(Term::concat([y1, Term::app(Fun::G, args), y2])),
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// The subterm's signature differs from the mode of its slot.
    IllModed { mode: Option<u8>, sig: u8 },
    /// The two sides have different signatures.
    SideSignatures { left: u8, right: u8 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub equation: usize,
    /// 0 for the left side, 1 for the right side; ignored for side mismatches.
    pub side: usize,
    pub position: Position,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::IllModed { mode, sig } => write!(
                f,
                "equation {} side {} position {}: signature {} in a slot of mode {}",
                self.equation,
                if self.side == 0 { "left" } else { "right" },
                self.position,
                sig,
                match mode {
                    Some(m) => alloc::format!("{m}"),
                    None => String::from("(undeclared)"),
                }
            ),
            ViolationKind::SideSignatures { left, right } => write!(
                f,
                "equation {}: sides have signatures {} and {}",
                self.equation, left, right
            ),
        }
    }
}

/// Checks that every non-root position of every equation side is well-moded
/// and that both sides of each equation have the same signature.
pub fn check_well_moded(p: &EquationalPresentation, m: &ModeTable) -> (bool, Vec<Violation>) {
    let mut violations = Vec::new();
    for (ei, (u, v)) in p.equations.iter().enumerate() {
        for (side, t) in [u, v].into_iter().enumerate() {
            for (pos, sub) in t.positions() {
                let Some((parent_pos, index)) = pos.parent() else {
                    continue;
                };
                let parent = t.at(&parent_pos).expect("position exists");
                if !well_moded_child(m, parent, index - 1, sub) {
                    violations.push(Violation {
                        equation: ei,
                        side,
                        position: pos.clone(),
                        kind: ViolationKind::IllModed {
                            mode: m.mode(crate::mode::Node::head(parent), index - 1),
                            sig: m.sig(sub),
                        },
                    });
                }
            }
        }
        let (su, sv) = (m.sig(u), m.sig(v));
        if su != sv {
            violations.push(Violation {
                equation: ei,
                side: 0,
                position: Position::root(),
                kind: ViolationKind::SideSignatures {
                    left: su,
                    right: sv,
                },
            });
        }
    }
    (violations.is_empty(), violations)
}

/// `Var(u) = Var(v)` for every equation.
pub fn is_regular(p: &EquationalPresentation) -> bool {
    p.equations.iter().all(|(u, v)| u.vars() == v.vars())
}

/// The variables of a presentation, for diagnostics.
pub fn presentation_vars(p: &EquationalPresentation) -> Vec<Var> {
    let mut vs = alloc::collections::BTreeSet::new();
    for (u, v) in &p.equations {
        u.collect_vars(&mut vs);
        v.collect_vars(&mut vs);
    }
    vs.into_iter().collect()
}
