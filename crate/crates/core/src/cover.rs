//! Constant elimination for depth-1 conjunctions.
//!
//! `cover` removes a set of constants from a depth-1 conjunction while
//! keeping every consequence over the remaining constants. Direct
//! consequences become literals; consequences that only fire once more
//! equalities are assumed become definite Horn clauses. The result is the
//! uniform interpolant of the input for depth-1 shapes.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::euf::{
    literal_consts, literal_subterms, CongruenceState, ConstId, Literal, TermData, TermId,
    TermStore,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoverError {
    #[error("input conjunction is unsatisfiable")]
    UnsatInput,
    #[error("constant `{0}` outside the allowed set")]
    StrayConstant(String),
}

/// `antecedent ==> consequent`, all equalities between retained constants.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HornClause {
    pub antecedent: BTreeSet<Literal>,
    pub consequent: Literal,
}

impl HornClause {
    pub fn display(&self, store: &TermStore) -> String {
        let ants: Vec<String> = self.antecedent.iter().map(|l| l.display(store)).collect();
        format!("{} -> {}", ants.join(" & "), self.consequent.display(store))
    }
}

/// A conjunction of literals and definite Horn clauses with no eliminated
/// constant left.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct CoveredFormula {
    pub literals: BTreeSet<Literal>,
    pub horn: BTreeSet<HornClause>,
}

impl CoveredFormula {
    pub fn display(&self, store: &TermStore) -> String {
        let mut parts: Vec<String> = self.literals.iter().map(|l| l.display(store)).collect();
        parts.extend(self.horn.iter().map(|h| h.display(store)));
        if parts.is_empty() {
            "true".to_string()
        } else {
            parts.join(" & ")
        }
    }
}

/// Unit-propagates the Horn clauses over a congruence state seeded with
/// `lits`. Complete for definite clauses over ground equalities.
pub fn saturate(
    store: &TermStore,
    lits: impl IntoIterator<Item = Literal>,
    horn: &BTreeSet<HornClause>,
) -> CongruenceState {
    let mut state = CongruenceState::from_literals(store, lits);
    let mut fired = vec![false; horn.len()];
    loop {
        let mut progress = false;
        for (i, clause) in horn.iter().enumerate() {
            if fired[i] {
                continue;
            }
            if clause
                .antecedent
                .iter()
                .all(|&l| state.entails(store, l))
            {
                fired[i] = true;
                state.assert_literal(store, clause.consequent);
                progress = true;
            }
        }
        if !progress {
            return state;
        }
    }
}

/// Does the covered formula, together with `extra` literals, entail `lit`?
pub fn covered_entails(
    store: &TermStore,
    phi: &CoveredFormula,
    extra: &[Literal],
    lit: Literal,
) -> bool {
    let seed = phi.literals.iter().copied().chain(extra.iter().copied());
    saturate(store, seed, &phi.horn).entails(store, lit)
}

/// Does the covered formula entail another covered formula?
pub fn covered_entails_formula(
    store: &TermStore,
    phi: &CoveredFormula,
    psi: &CoveredFormula,
) -> bool {
    let base = saturate(store, phi.literals.iter().copied(), &phi.horn);
    if base.is_unsat() {
        return true;
    }
    for &lit in &psi.literals {
        if !base.entails(store, lit) {
            return false;
        }
    }
    for clause in &psi.horn {
        let ants: Vec<Literal> = clause.antecedent.iter().copied().collect();
        if !covered_entails(store, phi, &ants, clause.consequent) {
            return false;
        }
    }
    true
}

fn subsets<T: Copy>(pool: &[T]) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(1 << pool.len());
    for mask in 0..(1u32 << pool.len()) {
        let mut sub = Vec::new();
        for (i, &item) in pool.iter().enumerate() {
            if mask & (1 << i) != 0 {
                sub.push(item);
            }
        }
        out.push(sub);
    }
    out.sort_by_key(|s| s.len());
    out
}

/// Eliminates `eliminate` from a depth-1 conjunction.
pub fn cover(
    store: &mut TermStore,
    beta: &[Literal],
    eliminate: &BTreeSet<ConstId>,
) -> Result<CoveredFormula, CoverError> {
    let state = CongruenceState::from_literals(store, beta.iter().copied());
    if state.is_unsat() {
        return Err(CoverError::UnsatInput);
    }
    let all_terms = literal_subterms(store, beta.iter().copied());
    let retained: BTreeSet<TermId> = all_terms
        .iter()
        .copied()
        .filter(|&t| {
            let mut cs = BTreeSet::new();
            store.consts_of(t, &mut cs);
            cs.iter().all(|c| !eliminate.contains(c))
        })
        .collect();
    let literals = state.entailed_literals_over(store, &retained);

    // Candidate consequents and antecedent pool come from pairs of function
    // facts that share an eliminated constant in the same position.
    let mut facts: Vec<(TermId, u32, Vec<TermId>)> = Vec::new();
    for lit in beta.iter().filter(|l| l.is_eq()) {
        for (head, app) in [(lit.lhs, lit.rhs), (lit.rhs, lit.lhs)] {
            if store.as_const(head).is_none() {
                continue;
            }
            if let TermData::App(f, args) = store.data(app) {
                facts.push((head, *f, args.clone()));
            }
        }
    }
    let is_elim = |store: &TermStore, t: TermId| {
        store.as_const(t).is_some_and(|c| eliminate.contains(&c))
    };
    let mut pool: BTreeSet<Literal> = BTreeSet::new();
    let mut heads: BTreeSet<TermId> = BTreeSet::new();
    for (i, (h1, f1, args1)) in facts.iter().enumerate() {
        for (h2, f2, args2) in facts.iter().skip(i + 1) {
            if f1 != f2 || args1.len() != args2.len() {
                continue;
            }
            let mut shares_elim = false;
            let mut alive = true;
            let mut eqs: Vec<Literal> = Vec::new();
            for (&a, &b) in args1.iter().zip(args2) {
                match (is_elim(store, a), is_elim(store, b)) {
                    (true, true) => {
                        if a == b {
                            shares_elim = true;
                        } else {
                            alive = false;
                        }
                    }
                    (false, false) => {
                        if a != b {
                            eqs.push(Literal::eq(a, b));
                        }
                    }
                    _ => alive = false,
                }
            }
            if alive && shares_elim {
                pool.extend(eqs);
                if is_elim(store, *h1) || is_elim(store, *h2) {
                    continue;
                }
                heads.insert(*h1);
                heads.insert(*h2);
            }
        }
    }
    pool.retain(|l| !state.entails(store, *l));

    let mut horn: BTreeSet<HornClause> = BTreeSet::new();
    if !pool.is_empty() {
        let pool_vec: Vec<Literal> = pool.iter().copied().collect();
        let retained_consts: Vec<TermId> = heads.iter().copied().collect();
        let candidates = subsets(&pool_vec);
        for (i, &x) in retained_consts.iter().enumerate() {
            for &y in &retained_consts[i + 1..] {
                let goal = Literal::eq(x, y);
                if state.entails(store, goal) {
                    continue;
                }
                let mut minimal: Vec<BTreeSet<Literal>> = Vec::new();
                for sub in &candidates {
                    if sub.is_empty() {
                        continue;
                    }
                    let set: BTreeSet<Literal> = sub.iter().copied().collect();
                    if minimal.iter().any(|m| m.is_subset(&set)) {
                        continue;
                    }
                    let mut probe = state.clone();
                    for &l in sub {
                        probe.assert_literal(store, l);
                    }
                    if probe.entails(store, goal) {
                        minimal.push(set);
                    }
                }
                for antecedent in minimal {
                    horn.insert(HornClause {
                        antecedent,
                        consequent: goal,
                    });
                }
            }
        }
    }
    // Drop clauses that already follow from the literals and the remaining
    // clauses, widest antecedents first.
    let mut ordered: Vec<HornClause> = horn.iter().cloned().collect();
    ordered.sort_by_key(|h| std::cmp::Reverse(h.antecedent.len()));
    for clause in ordered {
        let mut without = CoveredFormula {
            literals: literals.clone(),
            horn: horn.clone(),
        };
        without.horn.remove(&clause);
        let ants: Vec<Literal> = clause.antecedent.iter().copied().collect();
        if covered_entails(store, &without, &ants, clause.consequent) {
            horn.remove(&clause);
        }
    }
    Ok(CoveredFormula { literals, horn })
}

/// Decides whether two covered formulas have the same consequences over
/// `v_set`, by mutual entailment with case splits on the Horn antecedents.
pub fn v_equivalent(
    store: &TermStore,
    phi1: &CoveredFormula,
    phi2: &CoveredFormula,
    v_set: &BTreeSet<ConstId>,
) -> Result<bool, CoverError> {
    for phi in [phi1, phi2] {
        let all = literal_consts(store, phi.literals.iter().copied());
        for c in all {
            if !v_set.contains(&c) {
                return Err(CoverError::StrayConstant(store.const_name(c).to_string()));
            }
        }
        for clause in &phi.horn {
            let mut cs = literal_consts(store, clause.antecedent.iter().copied());
            cs.extend(literal_consts(store, [clause.consequent]));
            for c in cs {
                if !v_set.contains(&c) {
                    return Err(CoverError::StrayConstant(store.const_name(c).to_string()));
                }
            }
        }
    }
    Ok(covered_entails_formula(store, phi1, phi2)
        && covered_entails_formula(store, phi2, phi1))
}

/// Mutual subsumption between two disjunctions of covered formulas: every
/// disjunct of one side must entail some disjunct of the other. Sound for
/// equivalence whenever it answers true.
pub fn disjunctions_equivalent(
    store: &TermStore,
    d1: &[CoveredFormula],
    d2: &[CoveredFormula],
) -> bool {
    d1.iter()
        .all(|a| d2.iter().any(|b| covered_entails_formula(store, a, b)))
        && d2
            .iter()
            .all(|b| d1.iter().any(|a| covered_entails_formula(store, b, a)))
}

/// Constant map of a covered formula (used by reporting).
pub fn covered_consts(store: &TermStore, phi: &CoveredFormula) -> BTreeSet<ConstId> {
    let mut out = literal_consts(store, phi.literals.iter().copied());
    for clause in &phi.horn {
        out.extend(literal_consts(store, clause.antecedent.iter().copied()));
        out.extend(literal_consts(store, [clause.consequent]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::base_abstract;

    fn consts(store: &mut TermStore, names: &[&str]) -> Vec<ConstId> {
        names.iter().map(|n| store.add_const(n).unwrap()).collect()
    }

    #[test]
    fn cover_produces_conditional_equality() {
        // x0 = f(a0,w), y0 = f(b0,w), c0 = d0, eliminating w.
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["x0", "y0", "a0", "b0", "c0", "d0", "w"]);
        let f = st.add_fn("f", 2).unwrap();
        let t: Vec<TermId> = ids.iter().map(|&c| st.const_term(c)).collect();
        let faw = st.app(f, &[t[2], t[6]]).unwrap();
        let fbw = st.app(f, &[t[3], t[6]]).unwrap();
        let beta = vec![
            Literal::eq(t[0], faw),
            Literal::eq(t[1], fbw),
            Literal::eq(t[4], t[5]),
        ];
        let elim: BTreeSet<ConstId> = [ids[6]].into();
        let got = cover(&mut st, &beta, &elim).unwrap();
        assert_eq!(got.literals, [Literal::eq(t[4], t[5])].into());
        let want_horn = HornClause {
            antecedent: [Literal::eq(t[2], t[3])].into(),
            consequent: Literal::eq(t[0], t[1]),
        };
        assert_eq!(got.horn, [want_horn].into());
    }

    #[test]
    fn cover_without_elimination_is_identity() {
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["a", "b"]);
        let (ta, tb) = (st.const_term(ids[0]), st.const_term(ids[1]));
        let beta = vec![Literal::eq(ta, tb)];
        let got = cover(&mut st, &beta, &BTreeSet::new()).unwrap();
        assert_eq!(got.literals, [Literal::eq(ta, tb)].into());
        assert!(got.horn.is_empty());
    }

    #[test]
    fn three_way_sharing_gives_three_clauses() {
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["u", "v", "s", "a", "b", "c", "w"]);
        let f = st.add_fn("f", 2).unwrap();
        let t: Vec<TermId> = ids.iter().map(|&c| st.const_term(c)).collect();
        let beta: Vec<Literal> = [(0usize, 3usize), (1, 4), (2, 5)]
            .iter()
            .map(|&(h, a)| {
                let app = st.app(f, &[t[a], t[6]]).unwrap();
                Literal::eq(t[h], app)
            })
            .collect();
        let elim: BTreeSet<ConstId> = [ids[6]].into();
        let got = cover(&mut st, &beta, &elim).unwrap();
        assert!(got.literals.is_empty());
        assert_eq!(got.horn.len(), 3);
        for (ha, hb, aa, ab) in [(0, 1, 3, 4), (0, 2, 3, 5), (1, 2, 4, 5)] {
            let clause = HornClause {
                antecedent: [Literal::eq(t[aa], t[ab])].into(),
                consequent: Literal::eq(t[ha], t[hb]),
            };
            assert!(got.horn.contains(&clause), "missing {:?}", clause);
        }
    }

    #[test]
    fn v_equivalence_of_abstracted_variants() {
        // x1 = f(p0,x0) & y1 = f(q0,y0) & x0 = y0 is V-equivalent to the
        // shared-helper form but not to the version without x0 = y0.
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["x1", "y1", "p0", "q0", "x0", "y0"]);
        let f = st.add_fn("f", 2).unwrap();
        let t: Vec<TermId> = ids.iter().map(|&c| st.const_term(c)).collect();
        let fpx = st.app(f, &[t[2], t[4]]).unwrap();
        let fqy = st.app(f, &[t[3], t[5]]).unwrap();
        let phi1 = vec![
            Literal::eq(t[0], fpx),
            Literal::eq(t[1], fqy),
            Literal::eq(t[4], t[5]),
        ];
        let phi3 = vec![Literal::eq(t[0], fpx), Literal::eq(t[1], fqy)];
        let v: BTreeSet<ConstId> = ids[0..4].iter().copied().collect();

        let cover_of = |st: &mut TermStore, gamma: &[Literal]| {
            let abs = base_abstract(st, gamma, &v).unwrap();
            let abs_vec: Vec<Literal> = abs.iter().copied().collect();
            let helpers: BTreeSet<ConstId> = literal_consts(st, abs.iter().copied())
                .into_iter()
                .filter(|c| !v.contains(c))
                .collect();
            cover(st, &abs_vec, &helpers).unwrap()
        };
        let c1 = cover_of(&mut st, &phi1);
        let c3 = cover_of(&mut st, &phi3);
        assert!(v_equivalent(&st, &c1, &c1, &v).unwrap());
        assert!(!v_equivalent(&st, &c1, &c3, &v).unwrap());
        // The shared-helper form covers to the same conditional equality.
        let w = st.add_const("wbar").unwrap();
        let tw = st.const_term(w);
        let fpw = st.app(f, &[t[2], tw]).unwrap();
        let fqw = st.app(f, &[t[3], tw]).unwrap();
        let phi2 = vec![Literal::eq(t[0], fpw), Literal::eq(t[1], fqw)];
        let c2 = {
            let elim: BTreeSet<ConstId> = [w].into();
            cover(&mut st, &phi2, &elim).unwrap()
        };
        assert!(v_equivalent(&st, &c1, &c2, &v).unwrap());
    }

    #[test]
    fn stray_constant_is_an_error() {
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["a", "b"]);
        let (ta, tb) = (st.const_term(ids[0]), st.const_term(ids[1]));
        let phi = CoveredFormula {
            literals: [Literal::eq(ta, tb)].into(),
            horn: BTreeSet::new(),
        };
        let v: BTreeSet<ConstId> = [ids[0]].into();
        assert_eq!(
            v_equivalent(&st, &phi, &phi, &v).unwrap_err(),
            CoverError::StrayConstant("b".to_string())
        );
    }
}
