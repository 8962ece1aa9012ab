//! A total simplification ordering on ground terms.
//!
//! Lexicographic path ordering over the binary, right-nested reading of
//! concatenation (`a . b . c` is `.(a, .(b, c))`), with precedence
//!
//! ```text
//! h > g > f > . > free constants (by name) > eps > c_min
//! ```
//!
//! A total precedence makes the LPO total on ground terms, and every LPO has
//! the subterm property. `c_min` sits at the bottom of the precedence, so it
//! is the least ground term.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::Error;
use crate::mode::DEFAULT_C_MIN;
use crate::term::{Fun, Term};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Sym {
    CMin,
    Eps,
    Const(Arc<str>),
    Cat,
    F,
    G,
    H,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    sym: Sym,
    args: Vec<Node>,
}

fn lower(t: &Term, c_min: &str) -> Node {
    let leaf = |sym| Node {
        sym,
        args: Vec::new(),
    };
    match t {
        Term::Var(_) => unreachable!("checked ground"),
        Term::Eps => leaf(Sym::Eps),
        Term::Const(c) if **c == *c_min => leaf(Sym::CMin),
        Term::Const(c) => leaf(Sym::Const(c.clone())),
        Term::Hash(m) => Node {
            sym: Sym::H,
            args: alloc::vec![lower(m, c_min)],
        },
        Term::App(fun, args) => Node {
            sym: match fun {
                Fun::F => Sym::F,
                Fun::G => Sym::G,
            },
            args: args.iter().map(|a| lower(a, c_min)).collect(),
        },
        Term::Concat(items) => {
            let mut rev = items.iter().rev();
            let mut acc = lower(rev.next().unwrap(), c_min);
            for item in rev {
                acc = Node {
                    sym: Sym::Cat,
                    args: alloc::vec![lower(item, c_min), acc],
                };
            }
            acc
        }
    }
}

fn gt(s: &Node, t: &Node) -> bool {
    if s.args.iter().any(|si| si == t || gt(si, t)) {
        return true;
    }
    match s.sym.cmp(&t.sym) {
        Ordering::Greater => t.args.iter().all(|tj| gt(s, tj)),
        Ordering::Equal => {
            if !t.args.iter().all(|tj| gt(s, tj)) {
                return false;
            }
            for (a, b) in s.args.iter().zip(&t.args) {
                if a != b {
                    return gt(a, b);
                }
            }
            s.args.len() > t.args.len()
        }
        Ordering::Less => false,
    }
}

/// The ordering, parameterized by the name of the minimal constant.
#[derive(Clone, Debug)]
pub struct SimpOrder {
    c_min: Arc<str>,
}

impl Default for SimpOrder {
    fn default() -> Self {
        SimpOrder::new(DEFAULT_C_MIN)
    }
}

impl SimpOrder {
    pub fn new(c_min: &str) -> Self {
        SimpOrder {
            c_min: Arc::from(c_min),
        }
    }

    pub fn compare(&self, t1: &Term, t2: &Term) -> Result<Ordering, Error> {
        for t in [t1, t2] {
            if !t.is_ground() {
                return Err(Error::NotGround(t.clone()));
            }
        }
        let (a, b) = (t1.canonical(), t2.canonical());
        if a == b {
            return Ok(Ordering::Equal);
        }
        let (na, nb) = (lower(&a, &self.c_min), lower(&b, &self.c_min));
        Ok(if gt(&na, &nb) {
            Ordering::Greater
        } else {
            Ordering::Less
        })
    }
}

/// Compares two ground terms with the default minimal constant `cmin`.
pub fn compare_simp(t1: &Term, t2: &Term) -> Result<Ordering, Error> {
    SimpOrder::default().compare(t1, t2)
}
