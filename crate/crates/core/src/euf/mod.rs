//! Ground terms over equality with uninterpreted functions.
//!
//! Terms are hash-consed in a [`TermStore`]: structurally equal terms share a
//! [`TermId`], and ids are handed out in first-interning order. Constants of
//! the signature are interned before any application, so the id order extends
//! the fixed constant order that the rest of the crate uses for tie-breaking.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

mod congruence;
pub mod closure;
pub mod ground;

pub use congruence::CongruenceState;

/// Index of a constant in the signature. Doubles as the fixed total order on
/// constants.
pub type ConstId = u32;
/// Index of a function symbol in the signature.
pub type FnId = u32;

/// Identity of an interned term. Ordered by interning time.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TermId(pub u32);

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum TermData {
    Const(ConstId),
    App(FnId, Vec<TermId>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EufError {
    #[error("function `{name}` applied to {got} arguments, expected {expected}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("name `{0}` is already a function symbol")]
    NameIsFunction(String),
    #[error("name `{0}` is already a constant")]
    NameIsConstant(String),
    #[error("function `{name}` redeclared with arity {got}, previously {expected}")]
    ArityConflict {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("function arity must be at least 1")]
    ZeroArity,
}

/// Store of interned terms together with the signature they live in.
#[derive(Clone, Debug, Default)]
pub struct TermStore {
    const_names: Vec<String>,
    const_by_name: HashMap<String, ConstId>,
    initial: Vec<ConstId>,
    fn_names: Vec<(String, usize)>,
    fn_by_name: HashMap<String, FnId>,
    terms: Vec<TermData>,
    depth: Vec<u32>,
    dedup: HashMap<TermData, TermId>,
    const_term: Vec<TermId>,
    fresh_counter: u32,
}

impl TermStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers (or looks up) a constant and interns its term.
    pub fn add_const(&mut self, name: &str) -> Result<ConstId, EufError> {
        if let Some(&c) = self.const_by_name.get(name) {
            return Ok(c);
        }
        if self.fn_by_name.contains_key(name) {
            return Err(EufError::NameIsFunction(name.to_string()));
        }
        let c = self.const_names.len() as ConstId;
        self.const_names.push(name.to_string());
        self.const_by_name.insert(name.to_string(), c);
        let t = self.intern(TermData::Const(c), 0);
        self.const_term.push(t);
        Ok(c)
    }

    /// Marks a constant as one of the initial constants (the `v0` of a
    /// program variable).
    pub fn mark_initial(&mut self, c: ConstId) {
        if !self.initial.contains(&c) {
            self.initial.push(c);
        }
    }

    pub fn initial_consts(&self) -> &[ConstId] {
        &self.initial
    }

    pub fn add_fn(&mut self, name: &str, arity: usize) -> Result<FnId, EufError> {
        if arity == 0 {
            return Err(EufError::ZeroArity);
        }
        if let Some(&f) = self.fn_by_name.get(name) {
            let expected = self.fn_names[f as usize].1;
            if expected != arity {
                return Err(EufError::ArityConflict {
                    name: name.to_string(),
                    expected,
                    got: arity,
                });
            }
            return Ok(f);
        }
        if self.const_by_name.contains_key(name) {
            return Err(EufError::NameIsConstant(name.to_string()));
        }
        let f = self.fn_names.len() as FnId;
        self.fn_names.push((name.to_string(), arity));
        self.fn_by_name.insert(name.to_string(), f);
        Ok(f)
    }

    /// Interns an application, checking the declared arity.
    pub fn app(&mut self, f: FnId, args: &[TermId]) -> Result<TermId, EufError> {
        let (name, arity) = &self.fn_names[f as usize];
        if *arity != args.len() {
            return Err(EufError::ArityMismatch {
                name: name.clone(),
                expected: *arity,
                got: args.len(),
            });
        }
        let depth = 1 + args.iter().map(|&a| self.depth(a)).max().unwrap_or(0);
        Ok(self.intern(TermData::App(f, args.to_vec()), depth))
    }

    fn intern(&mut self, data: TermData, depth: u32) -> TermId {
        if let Some(&t) = self.dedup.get(&data) {
            return t;
        }
        let t = TermId(self.terms.len() as u32);
        self.terms.push(data.clone());
        self.depth.push(depth);
        self.dedup.insert(data, t);
        t
    }

    /// Invents a constant not yet present in the signature. `base` is used as
    /// a name stem; the shared counter makes names unique across the run.
    pub fn fresh_const(&mut self, base: &str) -> ConstId {
        loop {
            self.fresh_counter += 1;
            let name = format!("{}#{}", base, self.fresh_counter);
            if !self.const_by_name.contains_key(&name) && !self.fn_by_name.contains_key(&name) {
                return self.add_const(&name).expect("fresh name is unused");
            }
        }
    }

    pub fn const_term(&self, c: ConstId) -> TermId {
        self.const_term[c as usize]
    }

    pub fn lookup_const(&self, name: &str) -> Option<ConstId> {
        self.const_by_name.get(name).copied()
    }

    pub fn lookup_fn(&self, name: &str) -> Option<FnId> {
        self.fn_by_name.get(name).copied()
    }

    pub fn const_name(&self, c: ConstId) -> &str {
        &self.const_names[c as usize]
    }

    pub fn fn_name(&self, f: FnId) -> &str {
        &self.fn_names[f as usize].0
    }

    pub fn fn_arity(&self, f: FnId) -> usize {
        self.fn_names[f as usize].1
    }

    pub fn fn_count(&self) -> usize {
        self.fn_names.len()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn data(&self, t: TermId) -> &TermData {
        &self.terms[t.0 as usize]
    }

    pub fn depth(&self, t: TermId) -> u32 {
        self.depth[t.0 as usize]
    }

    /// The constant id, if the term is a constant.
    pub fn as_const(&self, t: TermId) -> Option<ConstId> {
        match self.data(t) {
            TermData::Const(c) => Some(*c),
            TermData::App(..) => None,
        }
    }

    /// Collects `t` and all of its subterms into `out`.
    pub fn subterms_into(&self, t: TermId, out: &mut std::collections::BTreeSet<TermId>) {
        if out.insert(t) {
            if let TermData::App(_, args) = self.data(t) {
                for &a in args.clone().iter() {
                    self.subterms_into(a, out);
                }
            }
        }
    }

    /// Constants occurring in `t`.
    pub fn consts_of(&self, t: TermId, out: &mut std::collections::BTreeSet<ConstId>) {
        match self.data(t) {
            TermData::Const(c) => {
                out.insert(*c);
            }
            TermData::App(_, args) => {
                for &a in args.clone().iter() {
                    self.consts_of(a, out);
                }
            }
        }
    }

    /// Replaces every occurrence of the term `from` inside `t` with `to`.
    pub fn substitute(&mut self, t: TermId, from: TermId, to: TermId) -> TermId {
        if t == from {
            return to;
        }
        match self.data(t).clone() {
            TermData::Const(_) => t,
            TermData::App(f, args) => {
                let new_args: Vec<TermId> = args
                    .iter()
                    .map(|&a| self.substitute(a, from, to))
                    .collect();
                if new_args == args {
                    t
                } else {
                    self.app(f, &new_args).expect("arity preserved")
                }
            }
        }
    }

    pub fn display(&self, t: TermId) -> String {
        match self.data(t) {
            TermData::Const(c) => self.const_name(*c).to_string(),
            TermData::App(f, args) => {
                let inner: Vec<String> = args.iter().map(|&a| self.display(a)).collect();
                format!("{}({})", self.fn_name(*f), inner.join(","))
            }
        }
    }
}

/// Equality or disequality polarity of a literal.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Polarity {
    Eq,
    Neq,
}

/// A (dis)equality between two interned terms, stored with `lhs <= rhs` so
/// literal sets have a canonical form.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Literal {
    pub lhs: TermId,
    pub rhs: TermId,
    pub polarity: Polarity,
}

impl Literal {
    pub fn new(a: TermId, b: TermId, polarity: Polarity) -> Self {
        let (lhs, rhs) = if a <= b { (a, b) } else { (b, a) };
        Literal { lhs, rhs, polarity }
    }

    pub fn eq(a: TermId, b: TermId) -> Self {
        Literal::new(a, b, Polarity::Eq)
    }

    pub fn neq(a: TermId, b: TermId) -> Self {
        Literal::new(a, b, Polarity::Neq)
    }

    /// NNF negation: flip the polarity.
    pub fn negated(self) -> Self {
        let polarity = match self.polarity {
            Polarity::Eq => Polarity::Neq,
            Polarity::Neq => Polarity::Eq,
        };
        Literal { polarity, ..self }
    }

    pub fn is_eq(&self) -> bool {
        self.polarity == Polarity::Eq
    }

    pub fn display(&self, store: &TermStore) -> String {
        let op = match self.polarity {
            Polarity::Eq => "=",
            Polarity::Neq => "!=",
        };
        format!("{} {} {}", store.display(self.lhs), op, store.display(self.rhs))
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// All subterms of the terms mentioned in `lits`.
pub fn literal_subterms(
    store: &TermStore,
    lits: impl IntoIterator<Item = Literal>,
) -> std::collections::BTreeSet<TermId> {
    let mut out = std::collections::BTreeSet::new();
    for lit in lits {
        store.subterms_into(lit.lhs, &mut out);
        store.subterms_into(lit.rhs, &mut out);
    }
    out
}

/// Constants occurring in a set of literals.
pub fn literal_consts(
    store: &TermStore,
    lits: impl IntoIterator<Item = Literal>,
) -> std::collections::BTreeSet<ConstId> {
    let mut out = std::collections::BTreeSet::new();
    for lit in lits {
        store.consts_of(lit.lhs, &mut out);
        store.consts_of(lit.rhs, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (TermStore, ConstId, ConstId, FnId, FnId) {
        let mut st = TermStore::new();
        let a = st.add_const("a").unwrap();
        let b = st.add_const("b").unwrap();
        let f = st.add_fn("f", 2).unwrap();
        let g = st.add_fn("g", 1).unwrap();
        (st, a, b, f, g)
    }

    #[test]
    fn interning_is_idempotent() {
        let (mut st, a, b, f, _) = setup();
        let ta = st.const_term(a);
        let tb = st.const_term(b);
        let t1 = st.app(f, &[ta, tb]).unwrap();
        let t2 = st.app(f, &[ta, tb]).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn depth_of_constants_and_nesting() {
        let (mut st, a, b, f, g) = setup();
        let ta = st.const_term(a);
        let tb = st.const_term(b);
        assert_eq!(st.depth(ta), 0);
        let gb = st.app(g, &[tb]).unwrap();
        let t = st.app(f, &[ta, gb]).unwrap();
        assert_eq!(st.depth(t), 2);
    }

    #[test]
    fn arity_is_checked() {
        let (mut st, a, _, f, _) = setup();
        let ta = st.const_term(a);
        let err = st.app(f, &[ta]).unwrap_err();
        assert!(matches!(err, EufError::ArityMismatch { .. }));
        let err = st.add_fn("f", 3).unwrap_err();
        assert!(matches!(err, EufError::ArityConflict { .. }));
    }

    #[test]
    fn literals_are_orientation_normalized() {
        let (mut st, a, b, f, _) = setup();
        let ta = st.const_term(a);
        let tb = st.const_term(b);
        let app = st.app(f, &[ta, tb]).unwrap();
        assert_eq!(Literal::eq(app, ta), Literal::eq(ta, app));
        assert_eq!(Literal::eq(ta, app).lhs, ta);
        assert_eq!(Literal::neq(tb, ta).display(&st), "a != b");
    }

    #[test]
    fn substitute_rewrites_all_occurrences() {
        let (mut st, a, b, f, g) = setup();
        let ta = st.const_term(a);
        let tb = st.const_term(b);
        let ga = st.app(g, &[ta]).unwrap();
        let t = st.app(f, &[ta, ga]).unwrap();
        let r = st.substitute(t, ta, tb);
        assert_eq!(st.display(r), "f(b,g(b))");
    }
}
