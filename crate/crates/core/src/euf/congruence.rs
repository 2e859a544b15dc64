//! Incremental congruence closure over interned terms.
//!
//! The state is value-semantic: asserting into a clone leaves the original
//! untouched, which is how disequality entailment (assert the equality, check
//! for unsat) and exploratory queries are implemented.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{FnId, Literal, Polarity, TermData, TermId, TermStore};

#[derive(Clone, Debug, Default)]
pub struct CongruenceState {
    parent: Vec<TermId>,
    size: Vec<u32>,
    known: Vec<bool>,
    /// root -> application terms with an argument in that class
    uses: HashMap<TermId, Vec<TermId>>,
    /// (function, canonical args) -> representative application
    sig_table: HashMap<(FnId, Vec<TermId>), TermId>,
    diseqs: Vec<(TermId, TermId)>,
    asserted: Vec<Literal>,
    unsat: bool,
}

impl CongruenceState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_literals(store: &TermStore, lits: impl IntoIterator<Item = Literal>) -> Self {
        let mut st = Self::new();
        for lit in lits {
            st.assert_literal(store, lit);
        }
        st
    }

    pub fn is_unsat(&self) -> bool {
        self.unsat
    }

    pub fn asserted(&self) -> &[Literal] {
        &self.asserted
    }

    fn grow(&mut self, t: TermId) {
        let need = t.0 as usize + 1;
        while self.parent.len() < need {
            let id = TermId(self.parent.len() as u32);
            self.parent.push(id);
            self.size.push(1);
            self.known.push(false);
        }
    }

    /// Canonical representative, without path compression so `&self` queries
    /// stay cheap to write.
    pub fn find(&self, t: TermId) -> TermId {
        if t.0 as usize >= self.parent.len() {
            return t;
        }
        let mut cur = t;
        while self.parent[cur.0 as usize] != cur {
            cur = self.parent[cur.0 as usize];
        }
        cur
    }

    fn is_known(&self, t: TermId) -> bool {
        (t.0 as usize) < self.known.len() && self.known[t.0 as usize]
    }

    /// Registers a term (and its subterms), linking it to congruent siblings.
    pub fn ensure_term(&mut self, store: &TermStore, t: TermId) {
        if self.is_known(t) {
            return;
        }
        self.grow(t);
        self.known[t.0 as usize] = true;
        if let TermData::App(f, args) = store.data(t).clone() {
            for &a in &args {
                self.ensure_term(store, a);
            }
            let key: Vec<TermId> = args.iter().map(|&a| self.find(a)).collect();
            for &a in &key {
                self.uses.entry(a).or_default().push(t);
            }
            if let Some(&prev) = self.sig_table.get(&(f, key.clone())) {
                self.merge(store, t, prev);
            } else {
                self.sig_table.insert((f, key), t);
            }
        }
    }

    fn merge(&mut self, store: &TermStore, a: TermId, b: TermId) {
        let mut queue = vec![(a, b)];
        while let Some((x, y)) = queue.pop() {
            let rx = self.find(x);
            let ry = self.find(y);
            if rx == ry {
                continue;
            }
            let (root, old) = if self.size[rx.0 as usize] >= self.size[ry.0 as usize] {
                (rx, ry)
            } else {
                (ry, rx)
            };
            self.parent[old.0 as usize] = root;
            self.size[root.0 as usize] += self.size[old.0 as usize];
            let moved = self.uses.remove(&old).unwrap_or_default();
            for &app in &moved {
                let (f, args) = match store.data(app) {
                    TermData::App(f, args) => (*f, args.clone()),
                    TermData::Const(_) => unreachable!("uses lists hold applications"),
                };
                let key: Vec<TermId> = args.iter().map(|&t| self.find(t)).collect();
                match self.sig_table.get(&(f, key.clone())) {
                    Some(&prev) if self.find(prev) != self.find(app) => {
                        queue.push((app, prev));
                    }
                    _ => {
                        self.sig_table.insert((f, key), app);
                    }
                }
            }
            self.uses.entry(root).or_default().extend(moved);
        }
        for &(l, r) in &self.diseqs {
            if self.find(l) == self.find(r) {
                self.unsat = true;
            }
        }
    }

    /// Asserts a literal. Unsatisfiability is a state, not an error.
    pub fn assert_literal(&mut self, store: &TermStore, lit: Literal) {
        self.ensure_term(store, lit.lhs);
        self.ensure_term(store, lit.rhs);
        self.asserted.push(lit);
        match lit.polarity {
            Polarity::Eq => self.merge(store, lit.lhs, lit.rhs),
            Polarity::Neq => {
                self.diseqs.push((lit.lhs, lit.rhs));
                if self.find(lit.lhs) == self.find(lit.rhs) {
                    self.unsat = true;
                }
            }
        }
    }

    /// Entailment of a single literal. On an unsat state everything is
    /// entailed. Disequalities reduce to assert-and-check-unsat.
    pub fn entails(&self, store: &TermStore, lit: Literal) -> bool {
        if self.unsat {
            return true;
        }
        match lit.polarity {
            Polarity::Eq => {
                if self.is_known(lit.lhs) && self.is_known(lit.rhs) {
                    if self.find(lit.lhs) == self.find(lit.rhs) {
                        return true;
                    }
                    // Registering new terms can still merge known ones only
                    // when the queried terms are new; both known means done.
                    return false;
                }
                let mut probe = self.clone();
                probe.ensure_term(store, lit.lhs);
                probe.ensure_term(store, lit.rhs);
                probe.find(lit.lhs) == probe.find(lit.rhs)
            }
            Polarity::Neq => {
                let mut probe = self.clone();
                probe.assert_literal(store, Literal::eq(lit.lhs, lit.rhs));
                probe.is_unsat()
            }
        }
    }

    pub fn same_class(&self, a: TermId, b: TermId) -> bool {
        self.find(a) == self.find(b)
    }

    /// All non-reflexive (dis)equalities among `universe` terms entailed by
    /// the state. On an unsat state every literal over the universe is
    /// entailed, so both polarities of every pair are returned.
    pub fn entailed_literals_over(
        &self,
        store: &TermStore,
        universe: &BTreeSet<TermId>,
    ) -> BTreeSet<Literal> {
        let mut base = self.clone();
        for &t in universe {
            base.ensure_term(store, t);
        }
        let mut out = BTreeSet::new();
        let terms: Vec<TermId> = universe.iter().copied().collect();
        if base.is_unsat() {
            for (i, &a) in terms.iter().enumerate() {
                for &b in &terms[i + 1..] {
                    out.insert(Literal::eq(a, b));
                    out.insert(Literal::neq(a, b));
                }
            }
            return out;
        }
        for (i, &a) in terms.iter().enumerate() {
            for &b in &terms[i + 1..] {
                if base.find(a) == base.find(b) {
                    out.insert(Literal::eq(a, b));
                } else if base.entails(store, Literal::neq(a, b)) {
                    out.insert(Literal::neq(a, b));
                }
            }
        }
        out
    }

    /// Groups the given terms by congruence class, keyed by the smallest
    /// member. Terms are registered first, so congruence is taken into
    /// account.
    pub fn classes_over(
        &mut self,
        store: &TermStore,
        universe: &BTreeSet<TermId>,
    ) -> BTreeMap<TermId, Vec<TermId>> {
        for &t in universe {
            self.ensure_term(store, t);
        }
        let mut by_root: BTreeMap<TermId, Vec<TermId>> = BTreeMap::new();
        for &t in universe {
            by_root.entry(self.find(t)).or_default().push(t);
        }
        let mut out = BTreeMap::new();
        for (_, mut members) in by_root {
            members.sort();
            out.insert(members[0], members);
        }
        out
    }
}
