use alloc::collections::btree_map::{self, BTreeMap};
use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::term::{Term, Var};

/// A finite map from variables to terms. Range elements are stored in
/// canonical form, so application yields canonical terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    map: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn singleton(v: Var, t: Term) -> Self {
        let mut s = Substitution::new();
        s.insert(v, t);
        s
    }

    pub fn insert(&mut self, v: Var, t: Term) -> Option<Term> {
        self.map.insert(v, t.canonical())
    }

    pub fn remove(&mut self, v: &Var) -> Option<Term> {
        self.map.remove(v)
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.map.get(v)
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.map.contains_key(v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// The support: variables mapped to something other than themselves.
    pub fn support(&self) -> BTreeSet<Var> {
        self.map
            .iter()
            .filter(|(v, t)| t.as_var() != Some(v))
            .map(|(v, _)| v.clone())
            .collect()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, Var, Term> {
        self.map.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.map.is_empty() {
            return t.clone();
        }
        t.map_bottom_up(&mut |n| match &n {
            Term::Var(v) => self.map.get(v).cloned().unwrap_or(n),
            _ => n,
        })
    }

    /// `self` followed by `other`: `t (self ; other) = (t self) other`.
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut map: BTreeMap<Var, Term> = self
            .map
            .iter()
            .map(|(v, t)| (v.clone(), other.apply(t)))
            .collect();
        for (v, t) in &other.map {
            map.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Substitution { map }
    }

    /// Keeps only the given variables.
    pub fn restrict(&self, vars: &BTreeSet<Var>) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .filter(|(v, _)| vars.contains(*v))
                .map(|(v, t)| (v.clone(), t.clone()))
                .collect(),
        }
    }

    /// Every range element in canonical form.
    pub fn normalized(&self) -> Substitution {
        Substitution {
            map: self
                .map
                .iter()
                .map(|(v, t)| (v.clone(), t.canonical()))
                .collect(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.map.values().all(Term::is_ground)
    }

    pub fn into_pairs(self) -> Vec<(Var, Term)> {
        self.map.into_iter().collect()
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        Substitution {
            map: iter.into_iter().map(|(v, t)| (v, t.canonical())).collect(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        f.write_str("}")
    }
}

/// `t sigma`, in canonical form.
pub fn apply_subst(s: &Substitution, t: &Term) -> Term {
    s.apply(t)
}
