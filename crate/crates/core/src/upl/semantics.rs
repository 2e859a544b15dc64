//! Small-step symbolic execution.
//!
//! Configurations pair a remaining statement form with a variable-to-constant
//! state and a path condition. Assignments bind a fresh constant, assume
//! steps are taken only when the extended path condition stays satisfiable,
//! and control steps rewrite the statement form without touching the state.

use std::collections::VecDeque;

use crate::euf::{CongruenceState, ConstId, Literal, TermStore};

use super::{Cond, Program, StepLabel, Stmt, StmtId};

/// Total map from program variables to constants.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ProgState(pub Vec<ConstId>);

impl ProgState {
    pub fn get(&self, v: usize) -> ConstId {
        self.0[v]
    }

    /// The store set: constants currently named by some variable.
    pub fn consts(&self) -> std::collections::BTreeSet<ConstId> {
        self.0.iter().copied().collect()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Configuration {
    pub stmt: StmtId,
    pub state: ProgState,
    pub pc: Vec<Literal>,
}

impl Configuration {
    pub fn is_terminal(&self, program: &Program) -> bool {
        self.stmt == program.skip
    }
}

/// `<P, q0, true>`: every variable maps to its initial constant.
pub fn initial_config(program: &Program, initial: &[ConstId]) -> Configuration {
    Configuration {
        stmt: program.root,
        state: ProgState(initial.to_vec()),
        pc: Vec::new(),
    }
}

fn cond_literal(store: &TermStore, state: &ProgState, cond: Cond) -> Literal {
    let l = store.const_term(state.get(cond.lhs));
    let r = store.const_term(state.get(cond.rhs));
    if cond.eq {
        Literal::eq(l, r)
    } else {
        Literal::neq(l, r)
    }
}

/// One labeled successor of a configuration.
#[derive(Clone, Debug)]
pub struct StepOut {
    pub label: StepLabel,
    pub config: Configuration,
}

/// All successors under the operational rules. A blocked assume contributes
/// no successor; a terminal configuration has none.
pub fn step(program: &Program, store: &mut TermStore, config: &Configuration) -> Vec<StepOut> {
    let mut out = Vec::new();
    let Some(edges) = program.cfg.get(&config.stmt) else {
        return out;
    };
    let mut sat_state: Option<CongruenceState> = None;
    for &(label, next) in edges {
        match label {
            StepLabel::Expand(_) => out.push(StepOut {
                label,
                config: Configuration {
                    stmt: next,
                    state: config.state.clone(),
                    pc: config.pc.clone(),
                },
            }),
            StepLabel::Exec(leaf) => match program.stmt(leaf).clone() {
                Stmt::Assume(c) => {
                    let lit = cond_literal(store, &config.state, c);
                    let base = sat_state.get_or_insert_with(|| {
                        CongruenceState::from_literals(store, config.pc.iter().copied())
                    });
                    let feasible = match lit.polarity {
                        crate::euf::Polarity::Eq => {
                            let mut probe = base.clone();
                            probe.assert_literal(store, lit);
                            !probe.is_unsat()
                        }
                        crate::euf::Polarity::Neq => !base.entails(store, lit.negated()),
                    };
                    if feasible {
                        let mut pc = config.pc.clone();
                        pc.push(lit);
                        out.push(StepOut {
                            label,
                            config: Configuration {
                                stmt: next,
                                state: config.state.clone(),
                                pc,
                            },
                        });
                    }
                }
                Stmt::Assign(x, y) => {
                    let fresh = store.fresh_const(program.var_name(x));
                    let lit = Literal::eq(
                        store.const_term(fresh),
                        store.const_term(config.state.get(y)),
                    );
                    let mut state = config.state.clone();
                    state.0[x] = fresh;
                    let mut pc = config.pc.clone();
                    pc.push(lit);
                    out.push(StepOut {
                        label,
                        config: Configuration {
                            stmt: next,
                            state,
                            pc,
                        },
                    });
                }
                Stmt::AssignFn(x, ref fname, ref args) => {
                    let f = store
                        .lookup_fn(fname)
                        .map(Ok)
                        .unwrap_or_else(|| store.add_fn(fname, args.len()))
                        .expect("arity fixed at parse time");
                    let arg_terms: Vec<_> = args
                        .iter()
                        .map(|&v| store.const_term(config.state.get(v)))
                        .collect();
                    let app = store.app(f, &arg_terms).expect("arity fixed at parse time");
                    let fresh = store.fresh_const(program.var_name(x));
                    let lit = Literal::eq(store.const_term(fresh), app);
                    let mut state = config.state.clone();
                    state.0[x] = fresh;
                    let mut pc = config.pc.clone();
                    pc.push(lit);
                    out.push(StepOut {
                        label,
                        config: Configuration {
                            stmt: next,
                            state,
                            pc,
                        },
                    });
                }
                Stmt::Skip | Stmt::Seq(..) | Stmt::If(..) | Stmt::While(..) => {
                    unreachable!("exec labels point at leaf statements")
                }
            },
        }
    }
    out
}

/// Result of a bounded breadth-first run of the concrete system.
#[derive(Clone, Debug)]
pub struct BoundedRun {
    pub configs: Vec<Configuration>,
    /// Indices into `configs` for every explored transition.
    pub edges: Vec<(usize, usize, StepLabel)>,
    /// Depth (number of steps from the start) of each configuration.
    pub depth: Vec<usize>,
    /// Whether the configuration's successors were all computed.
    pub expanded: Vec<bool>,
    pub truncated: bool,
}

/// Explores every configuration reachable within `step_bound` steps.
pub fn concrete_bounded(
    program: &Program,
    store: &mut TermStore,
    initial: &[ConstId],
    step_bound: usize,
    max_configs: usize,
) -> BoundedRun {
    let mut run = BoundedRun {
        configs: vec![initial_config(program, initial)],
        edges: Vec::new(),
        depth: vec![0],
        expanded: vec![false],
        truncated: false,
    };
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        if run.depth[i] >= step_bound {
            run.truncated = true;
            continue;
        }
        let here = run.configs[i].clone();
        let succs = step(program, store, &here);
        run.expanded[i] = true;
        for succ in succs {
            if run.configs.len() >= max_configs {
                run.truncated = true;
                run.expanded[i] = false;
                return run;
            }
            let j = run.configs.len();
            run.configs.push(succ.config);
            run.depth.push(run.depth[i] + 1);
            run.expanded.push(false);
            run.edges.push((i, j, succ.label));
            queue.push_back(j);
        }
    }
    run
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::upl::parse;

    const LOCKSTEP: &str = "\
x := t;
y := t;
while (c != d) {
  x := n(x);
  y := n(y);
  c := n(c);
};
x := f(a, x);
y := f(b, y);
assume(a == b);
assume(x != y);
";

    #[test]
    fn initial_configuration_is_empty_pc() {
        let p = parse(LOCKSTEP).unwrap();
        let (_, initial) = p.base_store();
        let c0 = initial_config(&p, &initial);
        assert!(c0.pc.is_empty());
        assert_eq!(c0.state.0.len(), p.vars.len());
    }

    #[test]
    fn skip_program_is_terminal() {
        let p = parse("skip").unwrap();
        let (mut st, initial) = p.base_store();
        let c0 = initial_config(&p, &initial);
        assert!(c0.is_terminal(&p));
        assert!(step(&p, &mut st, &c0).is_empty());
    }

    #[test]
    fn assignment_introduces_fresh_constant() {
        let p = parse(LOCKSTEP).unwrap();
        let (mut st, initial) = p.base_store();
        let c0 = initial_config(&p, &initial);
        let s1 = step(&p, &mut st, &c0);
        assert_eq!(s1.len(), 1);
        let c1 = &s1[0].config;
        let s2 = step(&p, &mut st, c1);
        let c2 = &s2[0].config;
        // pc after the two copies: x' = t0 and y' = t0
        assert_eq!(c2.pc.len(), 2);
        let t0 = st.const_term(st.lookup_const("t0").unwrap());
        let cs = CongruenceState::from_literals(&st, c2.pc.iter().copied());
        let x1 = st.const_term(c2.state.get(0));
        let y1 = st.const_term(c2.state.get(2));
        assert!(cs.entails(&st, Literal::eq(x1, t0)));
        assert!(cs.entails(&st, Literal::eq(y1, t0)));
        assert!(cs.entails(&st, Literal::eq(x1, y1)));
        // the assigned constants are fresh
        assert_ne!(c2.state.get(0), initial[0]);
    }

    #[test]
    fn blocked_assume_has_no_successor() {
        let p = parse("assume(x == y); assume(x != y)").unwrap();
        let (mut st, initial) = p.base_store();
        let c0 = initial_config(&p, &initial);
        let s1 = step(&p, &mut st, &c0);
        assert_eq!(s1.len(), 1);
        let s2 = step(&p, &mut st, &s1[0].config);
        assert!(s2.is_empty(), "contradicting assume must block");
    }

    #[test]
    fn if_statement_has_two_successors() {
        let p = parse("if (x == y) then { a := x } else { a := y }").unwrap();
        let (mut st, initial) = p.base_store();
        let c0 = initial_config(&p, &initial);
        let succs = step(&p, &mut st, &c0);
        assert_eq!(succs.len(), 2);
        assert!(succs
            .iter()
            .all(|s| matches!(s.label, StepLabel::Expand(_))));
    }

    #[test]
    fn bounded_run_visits_loop_exit() {
        let p = parse(LOCKSTEP).unwrap();
        let (mut st, initial) = p.base_store();
        let run = concrete_bounded(&p, &mut st, &initial, 12, 10_000);
        // Some configuration executed `y := f(b, y)` on the zero-iteration
        // path; its pc entails q(x) = f(a0, x_prev).
        let fid = st.lookup_fn("f").unwrap();
        let a0 = st.const_term(st.lookup_const("a0").unwrap());
        let mut hit = false;
        for &(i, j, label) in &run.edges {
            let StepLabel::Exec(leaf) = label else {
                continue;
            };
            let Stmt::AssignFn(x, f, _) = p.stmt(leaf) else {
                continue;
            };
            if f.as_str() != "f" || p.var_name(*x) != "x" {
                continue;
            }
            let prev = st.const_term(run.configs[i].state.get(0));
            let now = st.const_term(run.configs[j].state.get(0));
            let app = st.app(fid, &[a0, prev]).unwrap();
            let cs = CongruenceState::from_literals(&st, run.configs[j].pc.iter().copied());
            hit |= cs.entails(&st, Literal::eq(now, app));
        }
        assert!(hit);
        // every reachable pc stays satisfiable
        for cfg in &run.configs {
            let cs = CongruenceState::from_literals(&st, cfg.pc.iter().copied());
            assert!(!cs.is_unsat());
        }
    }

    #[test]
    fn bound_zero_is_just_the_initial_configuration() {
        let p = parse(LOCKSTEP).unwrap();
        let (mut st, initial) = p.base_store();
        let run = concrete_bounded(&p, &mut st, &initial, 0, 100);
        assert_eq!(run.configs.len(), 1);
        assert!(run.truncated);
    }
}
