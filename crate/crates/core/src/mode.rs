//! Signatures, modes, subterm values and factors.
//!
//! A [`ModeTable`] assigns each symbol a signature in {0, 1, 2} and each
//! argument position a mode. A position is *well-moded* when the mode of the
//! argument slot equals the signature of the subterm sitting in it; the root is
//! always ill-moded. Subterm values are the syntactic subterms that are atomic
//! or sit at an ill-moded position.
//!
//! The computations are generic over [`Node`] so that the same code runs on
//! hash-signature [`Term`]s and on plain first-order [`Tree`]s with arbitrary
//! symbols.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::term::{Fun, Partition, Term};

/// Signature / mode value.
pub type Sig = u8;

/// The head of a node, as far as modes are concerned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Head<'a> {
    Concat,
    Eps,
    Hash,
    App(Fun),
    Fun(&'a str),
    Const(&'a str),
    Var(Partition),
}

/// Owned key for non-atomic symbols in a [`ModeTable`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Symbol {
    Concat,
    Eps,
    Hash,
    App(Fun),
    Fun(Arc<str>),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Concat => f.write_str("."),
            Symbol::Eps => f.write_str("eps"),
            Symbol::Hash => f.write_str("h"),
            Symbol::App(fun) => f.write_str(fun.name()),
            Symbol::Fun(name) => f.write_str(name),
        }
    }
}

impl Head<'_> {
    fn symbol(&self) -> Option<Symbol> {
        match *self {
            Head::Concat => Some(Symbol::Concat),
            Head::Eps => Some(Symbol::Eps),
            Head::Hash => Some(Symbol::Hash),
            Head::App(f) => Some(Symbol::App(f)),
            Head::Fun(name) => Some(Symbol::Fun(Arc::from(name))),
            Head::Const(_) | Head::Var(_) => None,
        }
    }
}

/// A tree-shaped term whose subterm values can be computed.
pub trait Node: Clone + Ord {
    fn head(&self) -> Head<'_>;
    fn children(&self) -> &[Self];

    fn is_atomic(&self) -> bool {
        self.children().is_empty()
    }
}

impl Node for Term {
    fn head(&self) -> Head<'_> {
        match self {
            Term::Var(v) => Head::Var(v.part),
            Term::Const(c) => Head::Const(c),
            Term::Eps => Head::Eps,
            Term::Concat(_) => Head::Concat,
            Term::Hash(_) => Head::Hash,
            Term::App(f, _) => Head::App(*f),
        }
    }

    fn children(&self) -> &[Term] {
        self.args()
    }
}

/// A plain first-order term over named symbols, used for mode tables whose
/// symbols are not the fixed hash signature.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tree {
    Const(Arc<str>),
    App(Arc<str>, Vec<Tree>),
}

impl Tree {
    pub fn cst(name: &str) -> Tree {
        Tree::Const(Arc::from(name))
    }

    pub fn app(name: &str, args: Vec<Tree>) -> Tree {
        Tree::App(Arc::from(name), args)
    }
}

impl Node for Tree {
    fn head(&self) -> Head<'_> {
        match self {
            Tree::Const(c) => Head::Const(c),
            Tree::App(f, _) => Head::Fun(f),
        }
    }

    fn children(&self) -> &[Tree] {
        match self {
            Tree::Const(_) => &[],
            Tree::App(_, args) => args,
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Const(c) => f.write_str(c),
            Tree::App(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArgModes {
    /// Same mode for every argument (used for variadic concatenation).
    Uniform(Sig),
    PerArg(Vec<Sig>),
}

impl ArgModes {
    fn get(&self, index: usize) -> Option<Sig> {
        match self {
            ArgModes::Uniform(s) => Some(*s),
            ArgModes::PerArg(v) => v.get(index).copied(),
        }
    }
}

/// Signature and mode functions, the variable partition and the special
/// constants `c_min` and `eps`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeTable {
    sigs: BTreeMap<Symbol, Sig>,
    modes: BTreeMap<Symbol, ArgModes>,
    c_min: Arc<str>,
}

/// Default name of the minimal constant.
pub const DEFAULT_C_MIN: &str = "cmin";

impl ModeTable {
    pub fn empty(c_min: &str) -> Self {
        ModeTable {
            sigs: BTreeMap::new(),
            modes: BTreeMap::new(),
            c_min: Arc::from(c_min),
        }
    }

    /// The table under which `AU ∪ {(HC)}` is well-moded: every symbol but
    /// `h` has signature 0, `h` has signature 1, and all argument modes are 0.
    pub fn hash_theory() -> Self {
        let mut m = ModeTable::empty(DEFAULT_C_MIN);
        m.set_sig(Symbol::Concat, 0);
        m.set_sig(Symbol::Eps, 0);
        m.set_sig(Symbol::App(Fun::F), 0);
        m.set_sig(Symbol::App(Fun::G), 0);
        m.set_sig(Symbol::Hash, 1);
        m.set_modes(Symbol::Concat, ArgModes::Uniform(0));
        m.set_modes(Symbol::App(Fun::F), ArgModes::PerArg(alloc::vec![0; 4]));
        m.set_modes(Symbol::App(Fun::G), ArgModes::PerArg(alloc::vec![0; 4]));
        m.set_modes(Symbol::Hash, ArgModes::PerArg(alloc::vec![0]));
        m
    }

    pub fn set_sig(&mut self, sym: Symbol, sig: Sig) {
        self.sigs.insert(sym, sig);
    }

    pub fn set_modes(&mut self, sym: Symbol, modes: ArgModes) {
        self.modes.insert(sym, modes);
    }

    pub fn c_min(&self) -> &str {
        &self.c_min
    }

    /// `C_spe`: the minimal constant and the arity-0 theory symbol `eps`.
    pub fn is_special(&self, t: &Term) -> bool {
        match t {
            Term::Eps => true,
            Term::Const(c) => **c == *self.c_min,
            _ => false,
        }
    }

    pub fn head_sig(&self, head: Head<'_>) -> Sig {
        match head {
            Head::Const(_) => 2,
            Head::Var(Partition::X0) => 0,
            Head::Var(Partition::X1) => 1,
            other => {
                let sym = other.symbol().expect("non-atomic head");
                self.sigs.get(&sym).copied().unwrap_or(0)
            }
        }
    }

    /// Mode of argument `index` (0-based) of `head`; `None` when undeclared.
    pub fn mode(&self, head: Head<'_>, index: usize) -> Option<Sig> {
        let sym = head.symbol()?;
        self.modes.get(&sym).and_then(|m| m.get(index))
    }

    pub fn sig<N: Node>(&self, t: &N) -> Sig {
        self.head_sig(t.head())
    }

    /// Checks `mode(f, i) <= sig(f)` and that signature-0 symbols only have
    /// mode-0 arguments.
    pub fn is_consistent(&self) -> bool {
        self.modes.iter().all(|(sym, modes)| {
            let s = self.sigs.get(sym).copied().unwrap_or(0);
            let all = match modes {
                ArgModes::Uniform(m) => alloc::vec![*m],
                ArgModes::PerArg(v) => v.clone(),
            };
            all.iter().all(|m| *m <= s && (s != 0 || *m == 0))
        })
    }
}

impl Default for ModeTable {
    fn default() -> Self {
        ModeTable::hash_theory()
    }
}

/// Signature of a term: the signature of its top symbol.
pub fn sig_of<N: Node>(t: &N, table: &ModeTable) -> Sig {
    table.sig(t)
}

/// Whether the child at argument `index` of `parent` sits at a well-moded
/// position. Undeclared modes count as ill-moded.
pub fn well_moded_child<N: Node>(table: &ModeTable, parent: &N, index: usize, child: &N) -> bool {
    table.mode(parent.head(), index) == Some(table.sig(child))
}

/// `Sub(t)`: the root, every atomic subterm, and every subterm at an
/// ill-moded position.
pub fn subterm_values<N: Node>(t: &N, table: &ModeTable) -> BTreeSet<N> {
    let mut out = BTreeSet::new();
    out.insert(t.clone());
    collect_values(t, table, &mut out);
    out
}

fn collect_values<N: Node>(t: &N, table: &ModeTable, out: &mut BTreeSet<N>) {
    for (i, child) in t.children().iter().enumerate() {
        if child.is_atomic() || !well_moded_child(table, t, i, child) {
            out.insert(child.clone());
        }
        collect_values(child, table, out);
    }
}

/// `Sub(E)` for a set of terms.
pub fn subterm_values_of<'a, N: Node + 'a, I: IntoIterator<Item = &'a N>>(
    terms: I,
    table: &ModeTable,
) -> BTreeSet<N> {
    let mut out = BTreeSet::new();
    for t in terms {
        out.insert(t.clone());
        collect_values(t, table, &mut out);
    }
    out
}

/// `Fact(t)`: the strict subterm values that are not strictly inside another
/// strict subterm value.
pub fn factors<N: Node>(t: &N, table: &ModeTable) -> BTreeSet<N> {
    let mut strict = subterm_values(t, table);
    strict.remove(t);
    let all: Vec<N> = strict.iter().cloned().collect();
    strict
        .into_iter()
        .filter(|s| !all.iter().any(|o| o != s && strictly_contains(o, s)))
        .collect()
}

fn strictly_contains<N: Node>(outer: &N, inner: &N) -> bool {
    outer
        .children()
        .iter()
        .any(|c| c == inner || strictly_contains(c, inner))
}
