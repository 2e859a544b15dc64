//! Store-independent ground terms and literals.
//!
//! Abstract configurations and reports carry these owned forms so that node
//! identity, hashing and serialization do not depend on any particular
//! interning order.

use std::fmt;

use serde::ser::{Serialize, SerializeSeq, Serializer};

use super::{EufError, Literal, Polarity, TermData, TermId, TermStore};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GroundTerm {
    Const(String),
    App(String, Vec<GroundTerm>),
}

impl GroundTerm {
    pub fn depth(&self) -> u32 {
        match self {
            GroundTerm::Const(_) => 0,
            GroundTerm::App(_, args) => 1 + args.iter().map(GroundTerm::depth).max().unwrap_or(0),
        }
    }

    pub fn consts_into(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            GroundTerm::Const(c) => {
                out.insert(c.clone());
            }
            GroundTerm::App(_, args) => args.iter().for_each(|a| a.consts_into(out)),
        }
    }
}

impl fmt::Display for GroundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundTerm::Const(c) => write!(f, "{c}"),
            GroundTerm::App(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

// Terms serialize as nested arrays: constants as strings, applications as
// ["f", arg, ...].
impl Serialize for GroundTerm {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            GroundTerm::Const(c) => serializer.serialize_str(c),
            GroundTerm::App(name, args) => {
                let mut seq = serializer.serialize_seq(Some(args.len() + 1))?;
                seq.serialize_element(name)?;
                for a in args {
                    seq.serialize_element(a)?;
                }
                seq.end()
            }
        }
    }
}

/// An owned literal with structural orientation (`lhs <= rhs`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GroundLit {
    pub lhs: GroundTerm,
    pub rhs: GroundTerm,
    pub polarity: Polarity,
}

impl GroundLit {
    pub fn new(a: GroundTerm, b: GroundTerm, polarity: Polarity) -> Self {
        let (lhs, rhs) = if a <= b { (a, b) } else { (b, a) };
        GroundLit { lhs, rhs, polarity }
    }

    pub fn eq(a: GroundTerm, b: GroundTerm) -> Self {
        GroundLit::new(a, b, Polarity::Eq)
    }

    pub fn neq(a: GroundTerm, b: GroundTerm) -> Self {
        GroundLit::new(a, b, Polarity::Neq)
    }
}

impl fmt::Display for GroundLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.polarity {
            Polarity::Eq => "=",
            Polarity::Neq => "!=",
        };
        write!(f, "{} {} {}", self.lhs, op, self.rhs)
    }
}

impl Serialize for GroundLit {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("GroundLit", 3)?;
        s.serialize_field("op", match self.polarity {
            Polarity::Eq => "=",
            Polarity::Neq => "!=",
        })?;
        s.serialize_field("lhs", &self.lhs)?;
        s.serialize_field("rhs", &self.rhs)?;
        s.end()
    }
}

pub fn to_ground(store: &TermStore, t: TermId) -> GroundTerm {
    match store.data(t) {
        TermData::Const(c) => GroundTerm::Const(store.const_name(*c).to_string()),
        TermData::App(f, args) => GroundTerm::App(
            store.fn_name(*f).to_string(),
            args.iter().map(|&a| to_ground(store, a)).collect(),
        ),
    }
}

pub fn lit_to_ground(store: &TermStore, lit: Literal) -> GroundLit {
    GroundLit::new(
        to_ground(store, lit.lhs),
        to_ground(store, lit.rhs),
        lit.polarity,
    )
}

/// Interns a ground term. Constants are created on demand; functions must
/// already exist with a matching arity.
pub fn intern_ground(store: &mut TermStore, t: &GroundTerm) -> Result<TermId, EufError> {
    match t {
        GroundTerm::Const(name) => {
            let c = store.add_const(name)?;
            Ok(store.const_term(c))
        }
        GroundTerm::App(name, args) => {
            let f = store
                .lookup_fn(name)
                .map(Ok)
                .unwrap_or_else(|| store.add_fn(name, args.len()))?;
            let mut ids = Vec::with_capacity(args.len());
            for a in args {
                ids.push(intern_ground(store, a)?);
            }
            store.app(f, &ids)
        }
    }
}

pub fn intern_ground_lit(store: &mut TermStore, lit: &GroundLit) -> Result<Literal, EufError> {
    let l = intern_ground(store, &lit.lhs)?;
    let r = intern_ground(store, &lit.rhs)?;
    Ok(Literal::new(l, r, lit.polarity))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_roundtrip_and_serialization() {
        let mut st = TermStore::new();
        let a = st.add_const("a0").unwrap();
        let w = st.add_const("w_Z1").unwrap();
        let g = st.add_fn("g", 1).unwrap();
        let f = st.add_fn("f", 2).unwrap();
        let gw = st.app(g, &[st.const_term(w)]).unwrap();
        let t = st.app(f, &[st.const_term(a), gw]).unwrap();
        let ground = to_ground(&st, t);
        assert_eq!(
            serde_json::to_string(&ground).unwrap(),
            r#"["f","a0",["g","w_Z1"]]"#
        );
        let back = intern_ground(&mut st, &ground).unwrap();
        assert_eq!(back, t);
    }
}
