//! Configuration-level abstraction.
//!
//! `alpha_brn` canonicalizes a configuration: the path condition is factored
//! to its depth-1 kept part over the stored constants, helper constants are
//! renamed from their contexts, every stored constant is renamed back to the
//! variable's initial constant, and the helpers are renamed once more so the
//! result only mentions initial constants and context constants. Two
//! configurations that agree on everything the program can still observe map
//! to the same abstract configuration.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::basis::{base_abstract, BasisError};
use crate::cover::{cover, CoverError, CoveredFormula, HornClause};
use crate::euf::ground::{lit_to_ground, GroundLit, GroundTerm};
use crate::euf::{literal_consts, ConstId, Literal, TermStore};
use crate::upl::semantics::{Configuration, ProgState};
use crate::upl::{Program, StmtId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AbstractionError {
    #[error("swap endpoints must differ")]
    EqualSwapEndpoints,
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Cover(#[from] CoverError),
}

/// `phi[a >-> b]`: occurrences of `b` move to a fresh constant, occurrences
/// of `a` become `b`.
pub fn rename_swap(
    store: &mut TermStore,
    phi: &BTreeSet<Literal>,
    a: ConstId,
    b: ConstId,
) -> Result<BTreeSet<Literal>, AbstractionError> {
    if a == b {
        return Err(AbstractionError::EqualSwapEndpoints);
    }
    let occurring = literal_consts(store, phi.iter().copied());
    let ta = store.const_term(a);
    let tb = store.const_term(b);
    let mut out: BTreeSet<Literal> = phi.clone();
    if occurring.contains(&b) {
        let fresh = store.fresh_const("x");
        let tf = store.const_term(fresh);
        out = out
            .iter()
            .map(|l| {
                let lhs = store.substitute(l.lhs, tb, tf);
                let rhs = store.substitute(l.rhs, tb, tf);
                Literal::new(lhs, rhs, l.polarity)
            })
            .collect();
    }
    Ok(out
        .iter()
        .map(|l| {
            let lhs = store.substitute(l.lhs, ta, tb);
            let rhs = store.substitute(l.rhs, ta, tb);
            Literal::new(lhs, rhs, l.polarity)
        })
        .collect())
}

/// Renaming abstraction: every stored constant goes back to the variable's
/// initial constant, the state becomes the initial state.
pub fn alpha_r(
    store: &mut TermStore,
    program: &Program,
    initial: &[ConstId],
    config: &Configuration,
) -> Result<Configuration, AbstractionError> {
    let mut pc: BTreeSet<Literal> = config.pc.iter().copied().collect();
    for v in 0..program.vars.len() {
        let cur = config.state.get(v);
        if cur != initial[v] {
            pc = rename_swap(store, &pc, cur, initial[v])?;
        }
    }
    Ok(Configuration {
        stmt: config.stmt,
        state: ProgState(initial.to_vec()),
        pc: pc.into_iter().collect(),
    })
}

/// Base abstraction: the path condition is replaced by its canonical depth-1
/// kept part over the constants currently stored in variables.
pub fn alpha_b(
    store: &mut TermStore,
    config: &Configuration,
) -> Result<Configuration, AbstractionError> {
    let v_set = config.state.consts();
    let pc = base_abstract(store, &config.pc, &v_set)?;
    Ok(Configuration {
        stmt: config.stmt,
        state: config.state.clone(),
        pc: pc.into_iter().collect(),
    })
}

/// A canonicalized configuration: a program point plus a sorted depth-1 path
/// condition over initial constants and context constants.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct AbstractConfig {
    pub loc: StmtId,
    pub pc: Vec<GroundLit>,
}

impl AbstractConfig {
    pub fn pc_text(&self) -> String {
        if self.pc.is_empty() {
            "true".to_string()
        } else {
            self.pc
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(" & ")
        }
    }
}

impl fmt::Display for AbstractConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {}", self.loc, self.pc_text())
    }
}

/// Full abstraction: factor over the stored constants, canonicalize helpers,
/// rename stored constants to initial ones, and canonicalize helpers again
/// in the renamed space.
pub fn alpha_brn(
    store: &mut TermStore,
    program: &Program,
    initial: &[ConstId],
    config: &Configuration,
) -> Result<AbstractConfig, AbstractionError> {
    let based = alpha_b(store, config)?;
    let renamed = alpha_r(store, program, initial, &based)?;
    let v0: BTreeSet<ConstId> = initial.iter().copied().collect();
    let pc_set: BTreeSet<Literal> = renamed.pc.iter().copied().collect();
    let normalized = crate::basis::normalize_w(store, &pc_set, &v0)?;
    let mut pc: Vec<GroundLit> = normalized
        .iter()
        .map(|&l| lit_to_ground(store, l))
        .collect();
    pc.sort();
    pc.dedup();
    Ok(AbstractConfig {
        loc: renamed.stmt,
        pc,
    })
}

/// Interns an abstract configuration's path condition back into a store.
pub fn abstract_pc_literals(
    store: &mut TermStore,
    acfg: &AbstractConfig,
) -> Vec<Literal> {
    acfg.pc
        .iter()
        .map(|gl| {
            crate::euf::ground::intern_ground_lit(store, gl)
                .expect("abstract pcs only use declared functions")
        })
        .collect()
}

/// Context constants of an abstract path condition (everything that is not
/// an initial constant).
pub fn helper_consts(
    store: &TermStore,
    initial: &[ConstId],
    lits: &[Literal],
) -> BTreeSet<ConstId> {
    let v0: BTreeSet<ConstId> = initial.iter().copied().collect();
    literal_consts(store, lits.iter().copied())
        .into_iter()
        .filter(|c| !v0.contains(c))
        .collect()
}

/// Cover projection for reporting: eliminates the context constants from an
/// abstract path condition.
pub fn alpha_cover(
    store: &mut TermStore,
    initial: &[ConstId],
    acfg: &AbstractConfig,
) -> Result<CoveredFormula, AbstractionError> {
    let lits = abstract_pc_literals(store, acfg);
    let helpers = helper_consts(store, initial, &lits);
    Ok(cover(store, &lits, &helpers)?)
}

/// Ground rendering of a covered formula, for reports.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, serde::Serialize)]
pub struct GroundCovered {
    pub literals: Vec<GroundLit>,
    pub horn: Vec<GroundHorn>,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, serde::Serialize)]
pub struct GroundHorn {
    #[serde(rename = "if")]
    pub antecedent: Vec<GroundLit>,
    #[serde(rename = "then")]
    pub consequent: GroundLit,
}

pub fn covered_to_ground(store: &TermStore, phi: &CoveredFormula) -> GroundCovered {
    GroundCovered {
        literals: phi.literals.iter().map(|&l| lit_to_ground(store, l)).collect(),
        horn: phi
            .horn
            .iter()
            .map(|h| GroundHorn {
                antecedent: h.antecedent.iter().map(|&l| lit_to_ground(store, l)).collect(),
                consequent: lit_to_ground(store, h.consequent),
            })
            .collect(),
    }
}

impl GroundCovered {
    pub fn text(&self) -> String {
        let mut parts: Vec<String> = self.literals.iter().map(|l| l.to_string()).collect();
        for h in &self.horn {
            let ants: Vec<String> = h.antecedent.iter().map(|l| l.to_string()).collect();
            parts.push(format!("{} -> {}", ants.join(" & "), h.consequent));
        }
        if parts.is_empty() {
            "true".to_string()
        } else {
            parts.join(" & ")
        }
    }

    pub fn to_store(&self, store: &mut TermStore) -> CoveredFormula {
        let literals: BTreeSet<Literal> = self
            .literals
            .iter()
            .map(|l| crate::euf::ground::intern_ground_lit(store, l).expect("declared symbols"))
            .collect();
        let horn: BTreeSet<HornClause> = self
            .horn
            .iter()
            .map(|h| HornClause {
                antecedent: h
                    .antecedent
                    .iter()
                    .map(|l| {
                        crate::euf::ground::intern_ground_lit(store, l).expect("declared symbols")
                    })
                    .collect(),
                consequent: crate::euf::ground::intern_ground_lit(store, &h.consequent)
                    .expect("declared symbols"),
            })
            .collect();
        CoveredFormula { literals, horn }
    }
}

/// Convenience: the ground terms of initial constants, for tests.
pub fn initial_ground(program: &Program) -> Vec<GroundTerm> {
    program
        .vars
        .iter()
        .map(|v| GroundTerm::Const(format!("{v}0")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::upl::semantics::{initial_config, step};
    use crate::upl::parse;

    #[test]
    fn swap_moves_old_occupant_to_fresh() {
        // (a = c & b = d)[a >-> b] becomes b = c & x = d.
        let mut st = TermStore::new();
        let a = st.add_const("a").unwrap();
        let b = st.add_const("b").unwrap();
        let c = st.add_const("c").unwrap();
        let d = st.add_const("d").unwrap();
        let phi: BTreeSet<Literal> = [
            Literal::eq(st.const_term(a), st.const_term(c)),
            Literal::eq(st.const_term(b), st.const_term(d)),
        ]
        .into();
        let out = rename_swap(&mut st, &phi, a, b).unwrap();
        let rendered: Vec<String> = out.iter().map(|l| l.display(&st)).collect();
        assert!(rendered.contains(&"b = c".to_string()), "{rendered:?}");
        assert!(
            rendered.iter().any(|s| s.contains("x#") && s.contains('d')),
            "{rendered:?}"
        );
        // {a = b}[a >-> b] = {b = x}
        let phi2: BTreeSet<Literal> = [Literal::eq(st.const_term(a), st.const_term(b))].into();
        let out2 = rename_swap(&mut st, &phi2, a, b).unwrap();
        assert_eq!(out2.len(), 1);
        let lit = out2.iter().next().unwrap();
        let shown = lit.display(&st);
        assert!(shown.contains('b') && shown.contains("x#"), "{shown}");
        // untouched formula only loses nothing
        let phi3: BTreeSet<Literal> = [Literal::eq(st.const_term(c), st.const_term(d))].into();
        let out3 = rename_swap(&mut st, &phi3, a, b).unwrap();
        assert_eq!(out3, phi3);
        assert!(rename_swap(&mut st, &phi3, a, a).is_err());
    }

    #[test]
    fn renaming_moves_state_back_to_initial() {
        let p = parse("x := t").unwrap();
        let (mut st, initial) = p.base_store();
        let c0 = initial_config(&p, &initial);
        let c1 = step(&p, &mut st, &c0).remove(0).config;
        let r = alpha_r(&mut st, &p, &initial, &c1).unwrap();
        assert_eq!(r.state.0, initial);
        assert_eq!(r.pc.len(), 1);
        assert_eq!(r.pc[0].display(&st), "x0 = t0");
        // idempotent once at the initial state
        let r2 = alpha_r(&mut st, &p, &initial, &r).unwrap();
        assert_eq!(r.pc, r2.pc);
    }

    #[test]
    fn full_abstraction_of_initial_config_is_empty() {
        let p = parse("x := t; y := t").unwrap();
        let (mut st, initial) = p.base_store();
        let c0 = initial_config(&p, &initial);
        let a = alpha_brn(&mut st, &p, &initial, &c0).unwrap();
        assert_eq!(a.loc, p.root);
        assert!(a.pc.is_empty());
    }

    #[test]
    fn abstraction_is_invariant_under_fresh_naming() {
        let p = parse("x := t; y := t; x := n(x)").unwrap();
        let (mut st1, init1) = p.base_store();
        let mut c = initial_config(&p, &init1);
        loop {
            let mut next = step(&p, &mut st1, &c);
            if next.is_empty() {
                break;
            }
            c = next.remove(0).config;
        }
        let a1 = alpha_brn(&mut st1, &p, &init1, &c).unwrap();

        // same run with extra fresh constants burned in between
        let (mut st2, init2) = p.base_store();
        for _ in 0..7 {
            st2.fresh_const("junk");
        }
        let mut c = initial_config(&p, &init2);
        loop {
            let mut next = step(&p, &mut st2, &c);
            if next.is_empty() {
                break;
            }
            c = next.remove(0).config;
        }
        let a2 = alpha_brn(&mut st2, &p, &init2, &c).unwrap();
        assert_eq!(a1, a2);
    }
}
