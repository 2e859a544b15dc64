//! Rule-based deductive closure, used as an oracle by the test suites.
//!
//! This is a literal-set fixpoint under Refl/Symm/Trans/Cong/EqNeq/PMod,
//! restricted to a finite universe of terms. It shares nothing with
//! [`CongruenceState`](super::CongruenceState) beyond the term store, so the
//! two can check each other.

use std::collections::{BTreeSet, HashSet};

use super::{Literal, Polarity, TermData, TermId, TermStore};

/// Universe-restricted closure of a literal set. `bottom` is the falsum
/// marker raised by EqNeq.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    pub literals: BTreeSet<Literal>,
    pub bottom: bool,
}

impl Closure {
    pub fn contains(&self, lit: Literal) -> bool {
        self.literals.contains(&lit)
    }
}

/// Saturates `gamma` under the proof rules, keeping only literals whose two
/// sides stay inside `universe`. The universe is expected to be closed under
/// subterms of `gamma`; symmetry is implicit in literal orientation.
pub fn brute_force_closure(
    store: &mut TermStore,
    gamma: &[Literal],
    universe: &BTreeSet<TermId>,
) -> Closure {
    let in_universe: HashSet<TermId> = universe.iter().copied().collect();
    let mut lits: BTreeSet<Literal> = gamma.iter().copied().collect();
    // Refl over the universe terms.
    for &t in universe {
        lits.insert(Literal::eq(t, t));
    }
    let apps: Vec<(TermId, u32, Vec<TermId>)> = universe
        .iter()
        .filter_map(|&t| match store.data(t) {
            TermData::App(f, args) => Some((t, *f, args.clone())),
            TermData::Const(_) => None,
        })
        .collect();
    let mut bottom = false;
    loop {
        let mut fresh: Vec<Literal> = Vec::new();
        let eqs: Vec<Literal> = lits.iter().copied().filter(Literal::is_eq).collect();
        let has = |set: &BTreeSet<Literal>, l: Literal| set.contains(&l);

        // Trans
        for &l1 in &eqs {
            for &l2 in &eqs {
                let joined = if l1.rhs == l2.lhs {
                    Some((l1.lhs, l2.rhs))
                } else if l1.rhs == l2.rhs {
                    Some((l1.lhs, l2.lhs))
                } else if l1.lhs == l2.lhs {
                    Some((l1.rhs, l2.rhs))
                } else if l1.lhs == l2.rhs {
                    Some((l1.rhs, l2.lhs))
                } else {
                    None
                };
                if let Some((a, b)) = joined {
                    let lit = Literal::eq(a, b);
                    if !has(&lits, lit) {
                        fresh.push(lit);
                    }
                }
            }
        }
        // Cong over universe applications.
        for (i, (t1, f1, args1)) in apps.iter().enumerate() {
            for (t2, f2, args2) in apps.iter().skip(i + 1) {
                if f1 != f2 || args1.len() != args2.len() {
                    continue;
                }
                let all_eq = args1
                    .iter()
                    .zip(args2)
                    .all(|(&a, &b)| a == b || has(&lits, Literal::eq(a, b)));
                if all_eq {
                    let lit = Literal::eq(*t1, *t2);
                    if !has(&lits, lit) {
                        fresh.push(lit);
                    }
                }
            }
        }
        // PMod: rewrite either side of any literal with an equality.
        for &lit in &lits {
            for &eq in &eqs {
                for (from, to) in [(eq.lhs, eq.rhs), (eq.rhs, eq.lhs)] {
                    if from == to {
                        continue;
                    }
                    let l2 = store.substitute(lit.lhs, from, to);
                    let r2 = store.substitute(lit.rhs, from, to);
                    if (l2, r2) == (lit.lhs, lit.rhs) {
                        continue;
                    }
                    if in_universe.contains(&l2) && in_universe.contains(&r2) {
                        let derived = Literal::new(l2, r2, lit.polarity);
                        if !has(&lits, derived) {
                            fresh.push(derived);
                        }
                    }
                }
            }
        }
        let mut changed = false;
        for lit in fresh {
            changed |= lits.insert(lit);
        }
        // EqNeq
        for &lit in &lits {
            if lit.polarity == Polarity::Neq && has(&lits, Literal::eq(lit.lhs, lit.rhs)) {
                bottom = true;
            }
        }
        if bottom || !changed {
            break;
        }
    }
    Closure {
        literals: lits,
        bottom,
    }
}

/// Entailment by the closure route: equalities by membership, disequalities
/// by adding the equality and deriving falsum.
pub fn closure_entails(
    store: &mut TermStore,
    gamma: &[Literal],
    universe: &BTreeSet<TermId>,
    lit: Literal,
) -> bool {
    let mut full = universe.clone();
    store.subterms_into(lit.lhs, &mut full);
    store.subterms_into(lit.rhs, &mut full);
    match lit.polarity {
        Polarity::Eq => {
            let cl = brute_force_closure(store, gamma, &full);
            cl.bottom || cl.contains(lit)
        }
        Polarity::Neq => {
            let mut gamma2 = gamma.to_vec();
            gamma2.push(Literal::eq(lit.lhs, lit.rhs));
            brute_force_closure(store, &gamma2, &full).bottom
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euf::literal_subterms;

    #[test]
    fn transitive_closure_with_reflexivity() {
        let mut st = TermStore::new();
        let a = st.add_const("a").unwrap();
        let b = st.add_const("b").unwrap();
        let c = st.add_const("c").unwrap();
        let (ta, tb, tc) = (st.const_term(a), st.const_term(b), st.const_term(c));
        let gamma = vec![Literal::eq(ta, tb), Literal::eq(tb, tc)];
        let universe: BTreeSet<_> = [ta, tb, tc].into_iter().collect();
        let cl = brute_force_closure(&mut st, &gamma, &universe);
        assert!(!cl.bottom);
        assert!(cl.contains(Literal::eq(ta, tc)));
        assert!(cl.contains(Literal::eq(ta, ta)));
    }

    #[test]
    fn congruence_and_paramodulation() {
        // {c = f(a), a = b} over {a,b,c,f(a),f(b)} adds f(a) = f(b), c = f(b).
        let mut st = TermStore::new();
        let a = st.add_const("a").unwrap();
        let b = st.add_const("b").unwrap();
        let c = st.add_const("c").unwrap();
        let f = st.add_fn("f", 1).unwrap();
        let (ta, tb, tc) = (st.const_term(a), st.const_term(b), st.const_term(c));
        let fa = st.app(f, &[ta]).unwrap();
        let fb = st.app(f, &[tb]).unwrap();
        let gamma = vec![Literal::eq(tc, fa), Literal::eq(ta, tb)];
        let universe: BTreeSet<_> = [ta, tb, tc, fa, fb].into_iter().collect();
        let cl = brute_force_closure(&mut st, &gamma, &universe);
        assert!(cl.contains(Literal::eq(fa, fb)));
        assert!(cl.contains(Literal::eq(tc, fb)));
    }

    #[test]
    fn eqneq_raises_bottom() {
        let mut st = TermStore::new();
        let a = st.add_const("a").unwrap();
        let b = st.add_const("b").unwrap();
        let (ta, tb) = (st.const_term(a), st.const_term(b));
        let gamma = vec![Literal::eq(ta, tb), Literal::neq(ta, tb)];
        let universe = literal_subterms(&st, gamma.iter().copied());
        let cl = brute_force_closure(&mut st, &gamma, &universe);
        assert!(cl.bottom);
    }
}
