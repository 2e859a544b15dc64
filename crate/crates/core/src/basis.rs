//! Depth-1 factored form of a literal conjunction.
//!
//! `compute_basis` splits the congruence classes of a satisfiable conjunction
//! into a kept part `beta` (facts expressible over a chosen constant set `V`,
//! with fresh helper constants for argument positions) and a remainder
//! `delta`. `normalize_w` then renames the helper constants canonically from
//! the set of literal shapes they occur in, which makes the kept part unique
//! and usable as a state abstraction.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::euf::{
    literal_consts, literal_subterms, CongruenceState, ConstId, Literal, TermData, TermId,
    TermStore,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BasisError {
    #[error("input conjunction is unsatisfiable")]
    UnsatInput,
    #[error("literal `{0}` exceeds depth 1")]
    DepthExceeded(String),
}

/// The factored form: helper constants, kept literals, remainder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VBasis {
    pub w_constants: Vec<ConstId>,
    pub beta: BTreeSet<Literal>,
    pub delta: BTreeSet<Literal>,
}

/// One congruence class of the input, with its chosen representative.
#[derive(Clone, Debug)]
pub struct ClassInfo {
    /// Sorted members (all interned subterms of the input in this class).
    pub members: Vec<TermId>,
    /// Representative term: a `V` constant when one is in the class,
    /// otherwise a fresh helper constant.
    pub rep: TermId,
    /// True when the representative is a fresh helper constant.
    pub w_rep: bool,
}

/// Basis plus the class structure it was computed from.
#[derive(Clone, Debug)]
pub struct BasisAnalysis {
    pub classes: Vec<ClassInfo>,
    pub class_of: HashMap<TermId, usize>,
    pub basis: VBasis,
}

impl BasisAnalysis {
    pub fn class_index(&self, t: TermId) -> Option<usize> {
        self.class_of.get(&t).copied()
    }
}

fn pick_fresh_w(
    store: &mut TermStore,
    avoid: &BTreeSet<ConstId>,
    counter: &mut u32,
) -> ConstId {
    loop {
        let name = format!("w!{}", *counter);
        *counter += 1;
        match store.lookup_const(&name) {
            Some(c) if avoid.contains(&c) => continue,
            Some(c) => return c,
            None => return store.add_const(&name).expect("helper name unused"),
        }
    }
}

/// Computes the class structure and the basis of `gamma` relative to `v_set`.
pub fn analyze(
    store: &mut TermStore,
    gamma: &[Literal],
    v_set: &BTreeSet<ConstId>,
) -> Result<BasisAnalysis, BasisError> {
    let mut state = CongruenceState::from_literals(store, gamma.iter().copied());
    if state.is_unsat() {
        return Err(BasisError::UnsatInput);
    }
    let universe = literal_subterms(store, gamma.iter().copied());
    let grouped = state.classes_over(store, &universe);

    // Helper constants must be fresh for the input and for V.
    let mut avoid: BTreeSet<ConstId> = literal_consts(store, gamma.iter().copied());
    avoid.extend(v_set.iter().copied());

    let mut classes: Vec<ClassInfo> = Vec::new();
    let mut class_of: HashMap<TermId, usize> = HashMap::new();
    let mut w_constants: Vec<ConstId> = Vec::new();
    let mut w_counter = 0u32;
    for (_, members) in grouped {
        let v_member: Option<ConstId> = members
            .iter()
            .filter_map(|&t| store.as_const(t))
            .filter(|c| v_set.contains(c))
            .min();
        let (rep, w_rep) = match v_member {
            Some(c) => (store.const_term(c), false),
            None => {
                let w = pick_fresh_w(store, &avoid, &mut w_counter);
                w_constants.push(w);
                (store.const_term(w), true)
            }
        };
        let idx = classes.len();
        for &m in &members {
            class_of.insert(m, idx);
        }
        classes.push(ClassInfo {
            members,
            rep,
            w_rep,
        });
    }

    let mut beta = BTreeSet::new();
    let mut delta = BTreeSet::new();

    for info in &classes {
        // All equalities among V constants of the class.
        let v_members: Vec<TermId> = info
            .members
            .iter()
            .copied()
            .filter(|&t| store.as_const(t).is_some_and(|c| v_set.contains(&c)))
            .collect();
        for (i, &a) in v_members.iter().enumerate() {
            for &b in &v_members[i + 1..] {
                beta.insert(Literal::eq(a, b));
            }
        }
        // Links from the representative to constants outside V.
        for &m in &info.members {
            if let Some(c) = store.as_const(m) {
                if !v_set.contains(&c) && m != info.rep {
                    delta.insert(Literal::eq(info.rep, m));
                }
            }
        }
    }

    // Function facts, rewritten to representatives.
    let apps: Vec<(usize, TermId)> = classes
        .iter()
        .enumerate()
        .flat_map(|(i, info)| info.members.iter().map(move |&m| (i, m)))
        .filter(|&(_, m)| matches!(store.data(m), TermData::App(..)))
        .collect();
    for (class_idx, app) in apps {
        let (f, args) = match store.data(app).clone() {
            TermData::App(f, args) => (f, args),
            TermData::Const(_) => unreachable!(),
        };
        let rep_args: Vec<TermId> = args.iter().map(|&a| classes[class_of[&a]].rep).collect();
        let rep_term = store.app(f, &rep_args).expect("arity preserved");
        let has_v_arg = rep_args
            .iter()
            .any(|&t| store.as_const(t).is_some_and(|c| v_set.contains(&c)));
        let info = &classes[class_idx];
        let v_heads: Vec<TermId> = info
            .members
            .iter()
            .copied()
            .filter(|&t| store.as_const(t).is_some_and(|c| v_set.contains(&c)))
            .collect();
        for v in v_heads {
            let lit = Literal::eq(v, rep_term);
            if has_v_arg {
                beta.insert(lit);
            } else {
                delta.insert(lit);
            }
        }
        if info.w_rep {
            delta.insert(Literal::eq(info.rep, rep_term));
        }
    }

    // Disequalities, mapped to representatives.
    for lit in gamma.iter().filter(|l| !l.is_eq()) {
        let r1 = classes[class_of[&lit.lhs]].rep;
        let r2 = classes[class_of[&lit.rhs]].rep;
        let both_v = [r1, r2].iter().all(|&t| {
            store.as_const(t).is_some_and(|c| v_set.contains(&c))
        });
        let mapped = Literal::neq(r1, r2);
        if both_v {
            beta.insert(mapped);
        } else {
            delta.insert(mapped);
        }
    }

    Ok(BasisAnalysis {
        classes,
        class_of,
        basis: VBasis {
            w_constants,
            beta,
            delta,
        },
    })
}

pub fn compute_basis(
    store: &mut TermStore,
    gamma: &[Literal],
    v_set: &BTreeSet<ConstId>,
) -> Result<VBasis, BasisError> {
    Ok(analyze(store, gamma, v_set)?.basis)
}

/// True when every term of `gamma` that is entailed equal to a (strict)
/// superterm of `a` is itself entailed equal to some constant in `v_set`.
pub fn purifies(
    store: &mut TermStore,
    gamma: &[Literal],
    v_set: &BTreeSet<ConstId>,
    a: ConstId,
) -> bool {
    if !v_set.contains(&a) {
        return false;
    }
    let mut state = CongruenceState::from_literals(store, gamma.iter().copied());
    let universe = literal_subterms(store, gamma.iter().copied());
    let grouped = state.classes_over(store, &universe);
    let classes: Vec<&Vec<TermId>> = grouped.values().collect();
    let mut class_of: HashMap<TermId, usize> = HashMap::new();
    for (i, members) in classes.iter().enumerate() {
        for &m in members.iter() {
            class_of.insert(m, i);
        }
    }
    let a_term = store.const_term(a);
    let Some(&a_class) = class_of.get(&a_term) else {
        return true; // no occurrence, no superterms
    };
    // One-level superterm edges between classes.
    let mut out_edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); classes.len()];
    for (i, members) in classes.iter().enumerate() {
        for &m in members.iter() {
            if let TermData::App(_, args) = store.data(m) {
                for &arg in args.clone().iter() {
                    out_edges[class_of[&arg]].insert(i);
                }
            }
        }
    }
    // Classes reachable through at least one application.
    let mut reachable: BTreeSet<usize> = BTreeSet::new();
    let mut stack: Vec<usize> = out_edges[a_class].iter().copied().collect();
    while let Some(c) = stack.pop() {
        if reachable.insert(c) {
            stack.extend(out_edges[c].iter().copied());
        }
    }
    reachable.into_iter().all(|c| {
        classes[c].iter().any(|&t| {
            store.as_const(t).is_some_and(|cn| v_set.contains(&cn))
        })
    })
}

type TemplateKey = (u32, Vec<Option<ConstId>>);

fn template_of(store: &TermStore, t: TermId, w: &BTreeSet<ConstId>) -> Option<TemplateKey> {
    match store.data(t) {
        TermData::Const(_) => None,
        TermData::App(f, args) => {
            let slots: Vec<Option<ConstId>> = args
                .iter()
                .map(|&a| store.as_const(a).filter(|c| w.contains(c)))
                .collect();
            if slots.iter().any(Option::is_some) {
                Some((*f, slots))
            } else {
                None
            }
        }
    }
}

fn matches_template(
    store: &TermStore,
    t: TermId,
    key: &TemplateKey,
    w: &BTreeSet<ConstId>,
) -> bool {
    match store.data(t) {
        TermData::Const(_) => false,
        TermData::App(f, args) => {
            *f == key.0
                && args.len() == key.1.len()
                && args.iter().zip(&key.1).all(|(&a, slot)| match slot {
                    Some(wc) => store.as_const(a) == Some(*wc),
                    None => !store.as_const(a).is_some_and(|c| w.contains(&c)),
                })
        }
    }
}

fn hole_render(store: &TermStore, t: TermId, w: &BTreeSet<ConstId>) -> String {
    match store.data(t) {
        TermData::Const(c) if w.contains(c) => "?".to_string(),
        TermData::Const(c) => store.const_name(*c).to_string(),
        TermData::App(f, args) => {
            let inner: Vec<String> = args.iter().map(|&a| hole_render(store, a, w)).collect();
            format!("{}({})", store.fn_name(*f), inner.join(","))
        }
    }
}

fn hole_render_lit(store: &TermStore, lit: Literal, w: &BTreeSet<ConstId>) -> String {
    let a = hole_render(store, lit.lhs, w);
    let b = hole_render(store, lit.rhs, w);
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let op = if lit.is_eq() { "=" } else { "!=" };
    format!("{a} {op} {b}")
}

/// The hole-abstracted context of one template: the shapes of all literals
/// whose application matches it.
fn context_of(
    store: &TermStore,
    lits: &BTreeSet<Literal>,
    key: &TemplateKey,
    w: &BTreeSet<ConstId>,
) -> BTreeSet<String> {
    lits.iter()
        .filter(|lit| {
            matches_template(store, lit.lhs, key, w) || matches_template(store, lit.rhs, key, w)
        })
        .map(|&lit| hole_render_lit(store, lit, w))
        .collect()
}

fn replace_w_in(
    store: &mut TermStore,
    t: TermId,
    w: &BTreeSet<ConstId>,
    target: TermId,
) -> TermId {
    match store.data(t).clone() {
        TermData::Const(c) if w.contains(&c) => target,
        TermData::Const(_) => t,
        TermData::App(f, args) => {
            let new_args: Vec<TermId> = args
                .iter()
                .map(|&a| replace_w_in(store, a, w, target))
                .collect();
            store.app(f, &new_args).expect("arity preserved")
        }
    }
}

/// Renames the non-`v_set` constants of a depth-1 literal set canonically.
/// Each helper constant occurrence is replaced by a constant named after the
/// context of its enclosing application shape, so the output no longer
/// depends on how the helpers were originally named.
pub fn normalize_w(
    store: &mut TermStore,
    beta: &BTreeSet<Literal>,
    v_set: &BTreeSet<ConstId>,
) -> Result<BTreeSet<Literal>, BasisError> {
    for lit in beta {
        if store.depth(lit.lhs) > 1 || store.depth(lit.rhs) > 1 {
            return Err(BasisError::DepthExceeded(lit.display(store)));
        }
    }
    let w: BTreeSet<ConstId> = literal_consts(store, beta.iter().copied())
        .into_iter()
        .filter(|c| !v_set.contains(c))
        .collect();
    if w.is_empty() {
        return Ok(beta.clone());
    }
    // Contexts of every template occurring in the set.
    let mut contexts: BTreeMap<TemplateKey, BTreeSet<String>> = BTreeMap::new();
    for &lit in beta.iter() {
        for side in [lit.lhs, lit.rhs] {
            if let Some(key) = template_of(store, side, &w) {
                if !contexts.contains_key(&key) {
                    let z = context_of(store, beta, &key, &w);
                    contexts.insert(key, z);
                }
            }
        }
    }
    // Canonical names: contexts sorted by their serialization.
    let mut distinct: Vec<BTreeSet<String>> = contexts.values().cloned().collect();
    distinct.sort();
    distinct.dedup();
    let mut name_of: BTreeMap<BTreeSet<String>, ConstId> = BTreeMap::new();
    for (i, z) in distinct.iter().enumerate() {
        let c = store
            .add_const(&format!("w_Z{}", i + 1))
            .expect("context constant name");
        name_of.insert(z.clone(), c);
    }
    let mut out = BTreeSet::new();
    for &lit in beta.iter() {
        let mut lhs = lit.lhs;
        let mut rhs = lit.rhs;
        for side in [lit.lhs, lit.rhs] {
            if let Some(key) = template_of(store, side, &w) {
                let target = store.const_term(name_of[&contexts[&key]]);
                let replaced = replace_w_in(store, side, &w, target);
                if side == lit.lhs {
                    lhs = replaced;
                } else {
                    rhs = replaced;
                }
            }
        }
        out.insert(Literal::new(lhs, rhs, lit.polarity));
    }
    Ok(out)
}

/// The canonical depth-1 abstraction of `gamma` relative to `v_set`.
pub fn base_abstract(
    store: &mut TermStore,
    gamma: &[Literal],
    v_set: &BTreeSet<ConstId>,
) -> Result<BTreeSet<Literal>, BasisError> {
    let basis = compute_basis(store, gamma, v_set)?;
    normalize_w(store, &basis.beta, v_set)
}

/// Structural checks on a computed basis: literal shapes, and that the kept
/// and remainder parts never identify a helper constant with anything.
pub fn check_shape(
    store: &TermStore,
    basis: &VBasis,
    v_set: &BTreeSet<ConstId>,
) -> Result<(), String> {
    let w: BTreeSet<ConstId> = basis.w_constants.iter().copied().collect();
    let is_v = |t: TermId| store.as_const(t).is_some_and(|c| v_set.contains(&c));
    let is_w = |t: TermId| store.as_const(t).is_some_and(|c| w.contains(&c));
    for lit in &basis.beta {
        if store.depth(lit.lhs) > 1 || store.depth(lit.rhs) > 1 {
            return Err(format!("beta literal too deep: {}", lit.display(store)));
        }
        let (c_side, app_side) = match (store.data(lit.lhs), store.data(lit.rhs)) {
            (TermData::Const(_), TermData::Const(_)) => {
                if !(is_v(lit.lhs) && is_v(lit.rhs)) {
                    return Err(format!("beta constants outside V: {}", lit.display(store)));
                }
                continue;
            }
            (TermData::Const(_), TermData::App(..)) => (lit.lhs, lit.rhs),
            (TermData::App(..), TermData::Const(_)) => (lit.rhs, lit.lhs),
            _ => return Err(format!("beta literal between applications: {}", lit.display(store))),
        };
        if !lit.is_eq() {
            return Err(format!("beta function disequality: {}", lit.display(store)));
        }
        if !is_v(c_side) {
            return Err(format!("beta head outside V: {}", lit.display(store)));
        }
        let TermData::App(_, args) = store.data(app_side) else {
            unreachable!()
        };
        if !args.iter().any(|&a| is_v(a)) {
            return Err(format!("beta fact without V argument: {}", lit.display(store)));
        }
        if !args.iter().all(|&a| is_v(a) || is_w(a)) {
            return Err(format!("beta argument outside V and W: {}", lit.display(store)));
        }
    }
    // Conditions (d) and (e): V constants never provably equal to helpers,
    // helpers never provably equal to each other.
    let all: Vec<Literal> = basis.beta.iter().chain(&basis.delta).copied().collect();
    let state = CongruenceState::from_literals(store, all.iter().copied());
    for &w1 in &basis.w_constants {
        let tw1 = store.const_term(w1);
        for &v in v_set {
            let tv = store.const_term(v);
            if state.same_class(tw1, tv) {
                return Err(format!(
                    "helper {} collapsed with {}",
                    store.const_name(w1),
                    store.const_name(v)
                ));
            }
        }
        for &w2 in &basis.w_constants {
            if w1 < w2 && state.same_class(tw1, store.const_term(w2)) {
                return Err(format!(
                    "helpers {} and {} collapsed",
                    store.const_name(w1),
                    store.const_name(w2)
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts(store: &mut TermStore, names: &[&str]) -> Vec<ConstId> {
        names.iter().map(|n| store.add_const(n).unwrap()).collect()
    }

    fn vset(ids: &[ConstId]) -> BTreeSet<ConstId> {
        ids.iter().copied().collect()
    }

    /// Literal-set comparison modulo a bijective renaming of helper constants.
    fn equal_up_to_w_renaming(
        store: &TermStore,
        got: &BTreeSet<Literal>,
        want: &BTreeSet<Literal>,
        got_w: &[ConstId],
        want_w: &[ConstId],
    ) -> bool {
        if got.len() != want.len() || got_w.len() != want_w.len() {
            return false;
        }
        fn render(store: &TermStore, t: TermId, map: &HashMap<ConstId, usize>) -> String {
            match store.data(t) {
                TermData::Const(c) => match map.get(c) {
                    Some(i) => format!("W{}", i),
                    None => store.const_name(*c).to_string(),
                },
                TermData::App(f, args) => {
                    let inner: Vec<String> =
                        args.iter().map(|&a| render(store, a, map)).collect();
                    format!("{}({})", store.fn_name(*f), inner.join(","))
                }
            }
        }
        // Try every W bijection; helper sets are tiny in tests.
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for i in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(i, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let as_set = |lits: &BTreeSet<Literal>, map: &HashMap<ConstId, usize>| -> BTreeSet<String> {
            lits.iter()
                .map(|l| {
                    let a = render(store, l.lhs, map);
                    let b = render(store, l.rhs, map);
                    let (a, b) = if a <= b { (a, b) } else { (b, a) };
                    format!("{} {} {}", a, if l.is_eq() { "=" } else { "!=" }, b)
                })
                .collect()
        };
        let want_map: HashMap<ConstId, usize> =
            want_w.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let want_set = as_set(want, &want_map);
        for perm in perms(got_w.len()) {
            let got_map: HashMap<ConstId, usize> = got_w
                .iter()
                .zip(&perm)
                .map(|(&c, &i)| (c, i))
                .collect();
            if as_set(got, &got_map) == want_set {
                return true;
            }
        }
        false
    }

    #[test]
    fn basis_with_shared_argument_class() {
        // x = f(a,v1), y = f(b,v2), v1 = v2 over V = {a,b,x,y}
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["a", "b", "x", "y", "v1", "v2"]);
        let f = st.add_fn("f", 2).unwrap();
        let t: Vec<TermId> = ids.iter().map(|&c| st.const_term(c)).collect();
        let fa = st.app(f, &[t[0], t[4]]).unwrap();
        let fb = st.app(f, &[t[1], t[5]]).unwrap();
        let gamma = vec![
            Literal::eq(t[2], fa),
            Literal::eq(t[3], fb),
            Literal::eq(t[4], t[5]),
        ];
        let v = vset(&ids[0..4]);
        let basis = compute_basis(&mut st, &gamma, &v).unwrap();
        assert_eq!(basis.w_constants.len(), 1);
        let w = st.const_term(basis.w_constants[0]);
        let faw = st.app(f, &[t[0], w]).unwrap();
        let fbw = st.app(f, &[t[1], w]).unwrap();
        let want_beta: BTreeSet<Literal> =
            [Literal::eq(t[2], faw), Literal::eq(t[3], fbw)].into();
        let want_delta: BTreeSet<Literal> =
            [Literal::eq(w, t[4]), Literal::eq(w, t[5])].into();
        assert_eq!(basis.beta, want_beta);
        assert_eq!(basis.delta, want_delta);
        check_shape(&st, &basis, &v).unwrap();
    }

    #[test]
    fn basis_with_two_helper_classes() {
        // x = f(a,p), x = f(a,n(p)), y = f(b,p), y = f(c,n(p)) over
        // V = {x,y,a,b,c}; expect two helpers with w1 = n(w0).
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["x", "y", "a", "b", "c", "p"]);
        let f = st.add_fn("f", 2).unwrap();
        let n = st.add_fn("n", 1).unwrap();
        let t: Vec<TermId> = ids.iter().map(|&c| st.const_term(c)).collect();
        let np = st.app(n, &[t[5]]).unwrap();
        let fap = st.app(f, &[t[2], t[5]]).unwrap();
        let fanp = st.app(f, &[t[2], np]).unwrap();
        let fbp = st.app(f, &[t[3], t[5]]).unwrap();
        let fcnp = st.app(f, &[t[4], np]).unwrap();
        let gamma = vec![
            Literal::eq(t[0], fap),
            Literal::eq(t[0], fanp),
            Literal::eq(t[1], fbp),
            Literal::eq(t[1], fcnp),
        ];
        let v = vset(&ids[0..5]);
        let basis = compute_basis(&mut st, &gamma, &v).unwrap();
        assert_eq!(basis.w_constants.len(), 2);
        // Reference basis with explicitly named helpers.
        let w0 = st.add_const("ref_w0").unwrap();
        let w1 = st.add_const("ref_w1").unwrap();
        let (tw0, tw1) = (st.const_term(w0), st.const_term(w1));
        let faw0 = st.app(f, &[t[2], tw0]).unwrap();
        let faw1 = st.app(f, &[t[2], tw1]).unwrap();
        let fbw0 = st.app(f, &[t[3], tw0]).unwrap();
        let fcw1 = st.app(f, &[t[4], tw1]).unwrap();
        let nw0 = st.app(n, &[tw0]).unwrap();
        let want_beta: BTreeSet<Literal> = [
            Literal::eq(t[0], faw0),
            Literal::eq(t[0], faw1),
            Literal::eq(t[1], fbw0),
            Literal::eq(t[1], fcw1),
        ]
        .into();
        let want_delta: BTreeSet<Literal> =
            [Literal::eq(tw0, t[5]), Literal::eq(tw1, nw0)].into();
        assert!(equal_up_to_w_renaming(
            &st,
            &basis.beta,
            &want_beta,
            &basis.w_constants,
            &[w0, w1]
        ));
        assert!(equal_up_to_w_renaming(
            &st,
            &basis.delta,
            &want_delta,
            &basis.w_constants,
            &[w0, w1]
        ));
        check_shape(&st, &basis, &v).unwrap();
    }

    #[test]
    fn basis_of_pure_constant_conjunction() {
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["a", "b"]);
        let (ta, tb) = (st.const_term(ids[0]), st.const_term(ids[1]));
        let gamma = vec![Literal::eq(ta, tb)];
        let v = vset(&ids);
        let basis = compute_basis(&mut st, &gamma, &v).unwrap();
        assert!(basis.w_constants.is_empty());
        assert_eq!(basis.beta, [Literal::eq(ta, tb)].into());
        assert!(basis.delta.is_empty());
    }

    #[test]
    fn unsat_input_is_rejected() {
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["a", "b"]);
        let (ta, tb) = (st.const_term(ids[0]), st.const_term(ids[1]));
        let gamma = vec![Literal::eq(ta, tb), Literal::neq(ta, tb)];
        assert_eq!(
            compute_basis(&mut st, &gamma, &vset(&ids)).unwrap_err(),
            BasisError::UnsatInput
        );
    }

    #[test]
    fn purifier_example() {
        // c = f(a), d = f(b), d != e: {a,b,c} purifies a but not b.
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["a", "b", "c", "d", "e"]);
        let f = st.add_fn("f", 1).unwrap();
        let t: Vec<TermId> = ids.iter().map(|&c| st.const_term(c)).collect();
        let fa = st.app(f, &[t[0]]).unwrap();
        let fb = st.app(f, &[t[1]]).unwrap();
        let gamma = vec![
            Literal::eq(t[2], fa),
            Literal::eq(t[3], fb),
            Literal::neq(t[3], t[4]),
        ];
        let v = vset(&ids[0..3]);
        assert!(purifies(&mut st, &gamma, &v, ids[0]));
        assert!(!purifies(&mut st, &gamma, &v, ids[1]));
        // no superterms at all
        assert!(purifies(&mut st, &[], &vset(&ids[0..1]), ids[0]));
    }

    #[test]
    fn normalization_renames_by_context() {
        // x = f(a,w99), y = f(b,w99): the helper gets the context name.
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["a", "b", "x", "y", "w99"]);
        let f = st.add_fn("f", 2).unwrap();
        let t: Vec<TermId> = ids.iter().map(|&c| st.const_term(c)).collect();
        let faw = st.app(f, &[t[0], t[4]]).unwrap();
        let fbw = st.app(f, &[t[1], t[4]]).unwrap();
        let beta: BTreeSet<Literal> = [Literal::eq(t[2], faw), Literal::eq(t[3], fbw)].into();
        let v = vset(&ids[0..4]);
        let out = normalize_w(&mut st, &beta, &v).unwrap();
        let wz = st.lookup_const("w_Z1").expect("context constant created");
        let twz = st.const_term(wz);
        let faz = st.app(f, &[t[0], twz]).unwrap();
        let fbz = st.app(f, &[t[1], twz]).unwrap();
        assert_eq!(out, [Literal::eq(t[2], faz), Literal::eq(t[3], fbz)].into());
    }

    #[test]
    fn normalization_without_helpers_is_identity() {
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["a", "b"]);
        let (ta, tb) = (st.const_term(ids[0]), st.const_term(ids[1]));
        let beta: BTreeSet<Literal> = [Literal::eq(ta, tb)].into();
        let out = normalize_w(&mut st, &beta, &vset(&ids)).unwrap();
        assert_eq!(out, beta);
    }

    #[test]
    fn context_extraction_filters_by_template() {
        // With the 4-ary template f(?,w1,w2,?), only the f-literals that
        // agree on w1,w2 contribute, and the g-literal is excluded.
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["v", "u", "w", "x", "a", "b", "c", "w1", "w2"]);
        let f = st.add_fn("f", 4).unwrap();
        let g = st.add_fn("g", 4).unwrap();
        let t: Vec<TermId> = ids.iter().map(|&c| st.const_term(c)).collect();
        let (v, u, wv, x, a, b, c, w1, w2) =
            (t[0], t[1], t[2], t[3], t[4], t[5], t[6], t[7], t[8]);
        let l1 = st.app(f, &[a, w1, w2, b]).unwrap();
        let l2 = st.app(f, &[c, w1, w2, a]).unwrap();
        let l3 = st.app(f, &[x, w1, w2, b]).unwrap();
        let l4 = st.app(g, &[x, w1, w2, b]).unwrap();
        let lits: BTreeSet<Literal> = [
            Literal::eq(v, l1),
            Literal::eq(u, l2),
            Literal::eq(wv, l3),
            Literal::eq(x, l4),
        ]
        .into();
        let wset: BTreeSet<ConstId> = [ids[7], ids[8]].into();
        let key = template_of(&st, l1, &wset).unwrap();
        let z = context_of(&st, &lits, &key, &wset);
        let want: BTreeSet<String> = [
            "f(a,?,?,b) = v".to_string(),
            "f(c,?,?,a) = u".to_string(),
            "f(x,?,?,b) = w".to_string(),
        ]
        .into();
        assert_eq!(z, want);
    }

    #[test]
    fn base_abstraction_is_idempotent_on_example() {
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["x1", "y1", "p0", "q0", "x0", "y0"]);
        let f = st.add_fn("f", 2).unwrap();
        let t: Vec<TermId> = ids.iter().map(|&c| st.const_term(c)).collect();
        let fpx = st.app(f, &[t[2], t[4]]).unwrap();
        let fqy = st.app(f, &[t[3], t[5]]).unwrap();
        let gamma = vec![
            Literal::eq(t[0], fpx),
            Literal::eq(t[1], fqy),
            Literal::eq(t[4], t[5]),
        ];
        let v = vset(&ids[0..4]);
        let abs = base_abstract(&mut st, &gamma, &v).unwrap();
        // shared helper between the two facts
        let wz = st.lookup_const("w_Z1").unwrap();
        let twz = st.const_term(wz);
        let fpz = st.app(f, &[t[2], twz]).unwrap();
        let fqz = st.app(f, &[t[3], twz]).unwrap();
        assert_eq!(abs, [Literal::eq(t[0], fpz), Literal::eq(t[1], fqz)].into());
        let gamma2: Vec<Literal> = abs.iter().copied().collect();
        let abs2 = base_abstract(&mut st, &gamma2, &v).unwrap();
        assert_eq!(abs, abs2);
    }

    #[test]
    fn unary_abstraction_has_no_helpers() {
        // With unary functions only, every kept fact is over V.
        let mut st = TermStore::new();
        let ids = consts(&mut st, &["x", "y", "p"]);
        let n = st.add_fn("n", 1).unwrap();
        let t: Vec<TermId> = ids.iter().map(|&c| st.const_term(c)).collect();
        let np = st.app(n, &[t[2]]).unwrap();
        let nnp = st.app(n, &[np]).unwrap();
        let gamma = vec![Literal::eq(t[0], nnp), Literal::eq(t[1], np)];
        let v = vset(&ids[0..2]);
        let abs = base_abstract(&mut st, &gamma, &v).unwrap();
        let cs = literal_consts(&st, abs.iter().copied());
        assert!(cs.iter().all(|c| v.contains(c)), "{:?}", abs);
    }
}
