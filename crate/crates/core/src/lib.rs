//! Symbolic analysis of protocols that use a hash function for which the
//! intruder can compute collisions.
//!
//! The crate is `no_std` (it needs `alloc`). It provides:
//!
//! * [`term`], [`parse`], [`mode`], [`order`], [`subst`]: terms over
//!   `{., eps, f, g, h}` kept in canonical flat form, modes and signatures,
//!   subterm values, a simplification ordering and substitutions;
//! * [`theory`]: equality modulo associativity/unit and modulo the
//!   hash-collision equation, and well-modedness of presentations;
//! * [`deduce`]: ground derivability with replayable derivations for the
//!   five intruders;
//! * [`unify`]: word unification with linear constant restrictions;
//! * [`csolve`]: deterministic constraint systems and their solvers;
//! * [`reduce`]: the reduction from the hash-colliding intruder to the free
//!   one, and the top-level solver built on it.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod csolve;
pub mod deduce;
pub mod error;
pub mod mode;
mod nielsen;
pub mod order;
pub mod parse;
pub mod reduce;
pub mod subst;
pub mod term;
pub mod theory;
pub mod unify;

pub use error::{Error, ParseError};
pub use parse::{parse_term, parse_term_list};
pub use subst::Substitution;
pub use term::{Fun, Partition, Position, Term, Var};
pub use unify::Verdict;
