//! Finite-state analysis of a program via its canonical abstraction.
//!
//! `explore` builds the induced abstract transition system by a worklist
//! fixpoint: every node is a canonicalized configuration, successors come
//! from running one concrete step out of the node and re-canonicalizing.
//! On top of the resulting graph sit reachability, invariant extraction,
//! coherence checking and validation against bounded concrete execution.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::abstraction::{
    abstract_pc_literals, alpha_brn, alpha_cover, covered_to_ground, AbstractConfig,
    AbstractionError, GroundCovered,
};
use crate::basis::{analyze, base_abstract};
use crate::cover::CoveredFormula;
use crate::euf::{CongruenceState, ConstId, Literal, TermData, TermId, TermStore};
use crate::upl::semantics::{concrete_bounded, initial_config, step, Configuration, ProgState};
use crate::upl::{Program, StepLabel, Stmt, StmtId, VarId};

#[derive(Clone, Copy, Debug)]
pub struct Budgets {
    pub max_nodes: usize,
    pub max_steps: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_nodes: 100_000,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExplorerError {
    #[error("budget exceeded after {nodes} nodes and {steps} steps")]
    BudgetExceeded { nodes: usize, steps: usize },
    #[error("transition system is truncated; rerun with larger budgets")]
    Truncated,
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
}

#[derive(Clone, Debug)]
pub struct TsEdge {
    pub src: usize,
    pub dst: usize,
    pub label: StepLabel,
}

/// The induced abstract transition system.
#[derive(Clone, Debug)]
pub struct AbstractTs {
    pub nodes: Vec<AbstractConfig>,
    pub edges: Vec<TsEdge>,
    pub initial: usize,
    pub steps: usize,
    pub truncated: bool,
}

impl AbstractTs {
    pub fn node_index(&self) -> HashMap<&AbstractConfig, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n, i)).collect()
    }

    pub fn edge_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|e| (e.src, e.dst)).collect()
    }

    pub fn terminals(&self, program: &Program) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.loc == program.skip)
            .map(|(i, _)| i)
            .collect()
    }

    /// Breadth-first path of node payloads from the initial node to `target`.
    pub fn trace_to(&self, target: usize) -> Vec<AbstractConfig> {
        let mut parent: Vec<Option<usize>> = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = std::collections::VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(i) = queue.pop_front() {
            if i == target {
                break;
            }
            for e in self.edges.iter().filter(|e| e.src == i) {
                if !seen[e.dst] {
                    seen[e.dst] = true;
                    parent[e.dst] = Some(i);
                    queue.push_back(e.dst);
                }
            }
        }
        let mut path = vec![target];
        let mut cur = target;
        while let Some(p) = parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path.into_iter().map(|i| self.nodes[i].clone()).collect()
    }
}

/// Reconstructs a node as a concrete configuration: the canonical state plus
/// the interned path condition.
fn node_as_config(
    store: &mut TermStore,
    initial: &[ConstId],
    node: &AbstractConfig,
) -> Configuration {
    Configuration {
        stmt: node.loc,
        state: ProgState(initial.to_vec()),
        pc: abstract_pc_literals(store, node),
    }
}

fn expand_node(
    program: &Program,
    store: &mut TermStore,
    initial: &[ConstId],
    node: &AbstractConfig,
) -> Result<Vec<(StepLabel, AbstractConfig)>, AbstractionError> {
    let config = node_as_config(store, initial, node);
    let mut out = Vec::new();
    for succ in step(program, store, &config) {
        let acfg = alpha_brn(store, program, initial, &succ.config)?;
        out.push((succ.label, acfg));
    }
    Ok(out)
}

/// Worklist fixpoint over canonical configurations. With `jobs > 1` each
/// breadth-first round is fanned out over worker threads holding their own
/// term stores; results are merged in frontier order, so the output does not
/// depend on scheduling.
pub fn explore(program: &Program, budgets: Budgets, jobs: usize) -> Result<AbstractTs, ExplorerError> {
    let (mut store, initial) = program.base_store();
    let c0 = initial_config(program, &initial);
    let root = alpha_brn(&mut store, program, &initial, &c0)?;
    let mut nodes: Vec<AbstractConfig> = vec![root.clone()];
    let mut ids: HashMap<AbstractConfig, usize> = HashMap::from([(root, 0)]);
    let mut edges: Vec<TsEdge> = Vec::new();
    let mut steps = 0usize;
    let mut truncated = false;
    let mut frontier: Vec<usize> = vec![0];

    while !frontier.is_empty() && !truncated {
        let batches: Vec<(usize, Vec<(StepLabel, AbstractConfig)>)> = if jobs <= 1
            || frontier.len() == 1
        {
            let mut acc = Vec::with_capacity(frontier.len());
            for &i in &frontier {
                acc.push((i, expand_node(program, &mut store, &initial, &nodes[i])?));
            }
            acc
        } else {
            let chunk = frontier.len().div_ceil(jobs);
            let chunks: Vec<&[usize]> = frontier.chunks(chunk).collect();
            let results: Vec<Result<Vec<_>, AbstractionError>> =
                std::thread::scope(|scope| {
                    let handles: Vec<_> = chunks
                        .iter()
                        .map(|chunk| {
                            let mut local = store.clone();
                            let nodes = &nodes;
                            let initial = &initial;
                            scope.spawn(move || {
                                let mut acc = Vec::with_capacity(chunk.len());
                                for &i in chunk.iter() {
                                    acc.push((
                                        i,
                                        expand_node(program, &mut local, initial, &nodes[i])?,
                                    ));
                                }
                                Ok(acc)
                            })
                        })
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("worker panicked"))
                        .collect()
                });
            let mut acc = Vec::with_capacity(frontier.len());
            for r in results {
                acc.extend(r?);
            }
            acc
        };

        let mut next_frontier = Vec::new();
        'merge: for (src, succs) in batches {
            for (label, acfg) in succs {
                steps += 1;
                if steps > budgets.max_steps {
                    truncated = true;
                    break 'merge;
                }
                let dst = match ids.get(&acfg) {
                    Some(&d) => d,
                    None => {
                        if nodes.len() >= budgets.max_nodes {
                            truncated = true;
                            break 'merge;
                        }
                        let d = nodes.len();
                        nodes.push(acfg.clone());
                        ids.insert(acfg, d);
                        next_frontier.push(d);
                        d
                    }
                };
                if !edges.iter().any(|e| e.src == src && e.dst == dst && e.label == label) {
                    edges.push(TsEdge { src, dst, label });
                }
            }
        }
        frontier = next_frontier;
    }

    Ok(AbstractTs {
        nodes,
        edges,
        initial: 0,
        steps,
        truncated,
    })
}

/// Per-location invariants plus the per-line view derived from edges.
#[derive(Clone, Debug)]
pub struct AssertionMap {
    /// Disjunction of covered path conditions per program point. An empty
    /// disjunction is falsum (the point is unreachable).
    pub per_location: BTreeMap<StmtId, Vec<GroundCovered>>,
    /// Disjunction of covered path conditions holding after the statement on
    /// each source line has executed.
    pub after_line: BTreeMap<u32, Vec<GroundCovered>>,
    /// Whether the consecution re-check succeeded on every edge.
    pub inductive: bool,
}

/// Extracts the assertion map from a complete transition system and
/// re-verifies consecution along every edge.
pub fn invariants(
    program: &Program,
    ts: &AbstractTs,
) -> Result<AssertionMap, ExplorerError> {
    if ts.truncated {
        return Err(ExplorerError::Truncated);
    }
    let (mut store, initial) = program.base_store();
    let mut covers: Vec<CoveredFormula> = Vec::with_capacity(ts.nodes.len());
    for node in &ts.nodes {
        covers.push(alpha_cover(&mut store, &initial, node)?);
    }
    let mut per_location: BTreeMap<StmtId, Vec<GroundCovered>> = BTreeMap::new();
    for loc in program.locations() {
        per_location.insert(loc, Vec::new());
    }
    for (node, phi) in ts.nodes.iter().zip(&covers) {
        let entry = per_location.entry(node.loc).or_default();
        let ground = covered_to_ground(&store, phi);
        if !entry.contains(&ground) {
            entry.push(ground);
        }
    }
    for disjuncts in per_location.values_mut() {
        disjuncts.sort();
    }
    let mut after_line: BTreeMap<u32, Vec<GroundCovered>> = BTreeMap::new();
    for line in program.statement_lines() {
        after_line.insert(line, Vec::new());
    }
    for edge in &ts.edges {
        let Some(line) = program.line(edge.label.source()) else {
            continue;
        };
        let entry = after_line.entry(line).or_default();
        let ground = covered_to_ground(&store, &covers[edge.dst]);
        if !entry.contains(&ground) {
            entry.push(ground);
        }
    }
    for disjuncts in after_line.values_mut() {
        disjuncts.sort();
    }

    // Consecution: for every edge, the raw successor condition entails the
    // target's invariant with initial constants renamed to the successor
    // state.
    let ids = ts.node_index();
    let mut inductive = true;
    for (i, node) in ts.nodes.iter().enumerate() {
        let config = node_as_config(&mut store, &initial, node);
        for succ in step(program, &mut store, &config) {
            let acfg = alpha_brn(&mut store, program, &initial, &succ.config)?;
            let Some(&dst) = ids.get(&acfg) else {
                inductive = false;
                continue;
            };
            let _ = i;
            let renamed = rename_cover_to_state(&mut store, &covers[dst], &initial, &succ.config.state);
            let state = CongruenceState::from_literals(&store, succ.config.pc.iter().copied());
            if !entails_covered(&store, &state, &renamed) {
                inductive = false;
            }
        }
    }
    Ok(AssertionMap {
        per_location,
        after_line,
        inductive,
    })
}

/// Substitutes each variable's initial constant by its current constant.
fn rename_cover_to_state(
    store: &mut TermStore,
    phi: &CoveredFormula,
    initial: &[ConstId],
    state: &ProgState,
) -> CoveredFormula {
    let map: Vec<(TermId, TermId)> = initial
        .iter()
        .zip(&state.0)
        .filter(|(a, b)| a != b)
        .map(|(&a, &b)| (store.const_term(a), store.const_term(b)))
        .collect();
    let subst = |store: &mut TermStore, lit: Literal| {
        let mut lhs = lit.lhs;
        let mut rhs = lit.rhs;
        for &(from, to) in &map {
            lhs = store.substitute(lhs, from, to);
            rhs = store.substitute(rhs, from, to);
        }
        Literal::new(lhs, rhs, lit.polarity)
    };
    CoveredFormula {
        literals: phi.literals.iter().map(|&l| subst(store, l)).collect(),
        horn: phi
            .horn
            .iter()
            .map(|h| crate::cover::HornClause {
                antecedent: h.antecedent.iter().map(|&l| subst(store, l)).collect(),
                consequent: subst(store, h.consequent),
            })
            .collect(),
    }
}

/// `state |= phi` for a covered formula: literals directly, clauses by
/// asserting their antecedents.
fn entails_covered(store: &TermStore, state: &CongruenceState, phi: &CoveredFormula) -> bool {
    if phi
        .literals
        .iter()
        .any(|&l| !state.entails(store, l))
    {
        return false;
    }
    phi.horn.iter().all(|clause| {
        let mut probe = state.clone();
        for &l in &clause.antecedent {
            probe.assert_literal(store, l);
        }
        probe.entails(store, clause.consequent)
    })
}

/// Outcome of a reachability analysis.
#[derive(Clone, Debug)]
pub enum Verdict {
    Reachable { trace: Vec<AbstractConfig> },
    Unreachable { assertions: AssertionMap },
}

pub fn decide_reachability(
    program: &Program,
    budgets: Budgets,
    jobs: usize,
) -> Result<(Verdict, AbstractTs), ExplorerError> {
    let ts = explore(program, budgets, jobs)?;
    if ts.truncated {
        return Err(ExplorerError::BudgetExceeded {
            nodes: ts.nodes.len(),
            steps: ts.steps,
        });
    }
    let verdict = match ts.terminals(program).first() {
        Some(&t) => Verdict::Reachable {
            trace: ts.trace_to(t),
        },
        None => Verdict::Unreachable {
            assertions: invariants(program, &ts)?,
        },
    };
    Ok((verdict, ts))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Memoizing,
    EarlyAssume,
}

#[derive(Clone, Debug)]
pub struct CoherenceViolation {
    pub kind: ViolationKind,
    pub location: StmtId,
    pub line: Option<u32>,
    pub statement: String,
    pub term: String,
    pub trace: Vec<AbstractConfig>,
}

#[derive(Clone, Debug)]
pub enum CoherenceReport {
    Coherent { nodes_checked: usize },
    Violation(CoherenceViolation),
}

impl CoherenceReport {
    pub fn is_coherent(&self) -> bool {
        matches!(self, CoherenceReport::Coherent { .. })
    }
}

/// Hazard bookkeeping for the coherence check. Keys are canonical variable
/// representatives (least variable of an equality class of stored values);
/// values are rendered witness terms.
type Hazards = BTreeMap<VarId, String>;
type DroppedApps = BTreeMap<(String, Vec<VarId>), String>;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
struct CoherenceKey {
    config: AbstractConfig,
    hazards: Vec<VarId>,
    dropped: Vec<(String, Vec<VarId>)>,
}

/// Variable classes of a node: for each variable, the least variable whose
/// stored value is provably equal.
fn var_reps(
    store: &TermStore,
    state: &CongruenceState,
    prog_state: &ProgState,
) -> Vec<VarId> {
    let n = prog_state.0.len();
    let mut reps = vec![0usize; n];
    for v in 0..n {
        let tv = store.const_term(prog_state.get(v));
        let mut rep = v;
        for u in 0..v {
            let tu = store.const_term(prog_state.get(u));
            if state.same_class(tu, tv) {
                rep = u;
                break;
            }
        }
        reps[v] = rep;
    }
    reps
}

/// Checks the two coherence conditions while exploring the abstraction.
/// Dropped function applications and dropped superterms are tracked per node
/// so that conditions phrased over the full execution history stay visible.
pub fn check_coherence(
    program: &Program,
    budgets: Budgets,
) -> Result<CoherenceReport, ExplorerError> {
    let (mut store, initial) = program.base_store();
    let c0 = initial_config(program, &initial);
    let root = alpha_brn(&mut store, program, &initial, &c0)?;
    let root_key = CoherenceKey {
        config: root.clone(),
        hazards: Vec::new(),
        dropped: Vec::new(),
    };
    struct NodeData {
        config: AbstractConfig,
        hazards: Hazards,
        dropped: DroppedApps,
        parent: Option<usize>,
    }
    let mut nodes: Vec<NodeData> = vec![NodeData {
        config: root,
        hazards: Hazards::new(),
        dropped: DroppedApps::new(),
        parent: None,
    }];
    let mut seen: BTreeSet<CoherenceKey> = BTreeSet::from([root_key]);
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut steps = 0usize;

    let trace_of = |nodes: &[NodeData], mut i: usize| {
        let mut out = vec![nodes[i].config.clone()];
        while let Some(p) = nodes[i].parent {
            out.push(nodes[p].config.clone());
            i = p;
        }
        out.reverse();
        out
    };

    while let Some(i) = queue.pop_front() {
        if nodes.len() > budgets.max_nodes || steps > budgets.max_steps {
            return Err(ExplorerError::BudgetExceeded {
                nodes: nodes.len(),
                steps,
            });
        }
        let config = node_as_config(&mut store, &initial, &nodes[i].config);
        let state = CongruenceState::from_literals(&store, config.pc.iter().copied());
        let reps = var_reps(&store, &state, &config.state);

        // Condition checks at this node, per outgoing statement.
        for (label, _) in program.cfg.get(&config.stmt).cloned().unwrap_or_default() {
            let StepLabel::Exec(leaf) = label else { continue };
            match program.stmt(leaf).clone() {
                Stmt::Assume(c) if c.eq => {
                    for side in [c.lhs, c.rhs] {
                        if let Some(term) = nodes[i].hazards.get(&reps[side]) {
                            return Ok(CoherenceReport::Violation(CoherenceViolation {
                                kind: ViolationKind::EarlyAssume,
                                location: leaf,
                                line: program.line(leaf),
                                statement: program.render(leaf),
                                term: term.clone(),
                                trace: trace_of(&nodes, i),
                            }));
                        }
                    }
                }
                Stmt::AssignFn(_, fname, args) => {
                    let key = (fname.clone(), args.iter().map(|&v| reps[v]).collect::<Vec<_>>());
                    if let Some(term) = nodes[i].dropped.get(&key) {
                        return Ok(CoherenceReport::Violation(CoherenceViolation {
                            kind: ViolationKind::Memoizing,
                            location: leaf,
                            line: program.line(leaf),
                            statement: program.render(leaf),
                            term: term.clone(),
                            trace: trace_of(&nodes, i),
                        }));
                    }
                }
                _ => {}
            }
        }

        // Successors with hazard propagation.
        for succ in step(program, &mut store, &config) {
            steps += 1;
            let acfg = alpha_brn(&mut store, program, &initial, &succ.config)?;
            let succ_state =
                CongruenceState::from_literals(&store, succ.config.pc.iter().copied());
            let succ_reps = var_reps(&store, &succ_state, &succ.config.state);
            // Map an old stored value (initial constant of the source node's
            // canonical state) to a variable of the successor still equal to
            // it.
            let map_old = |old_rep: VarId| -> Option<VarId> {
                let old_term = store.const_term(initial[old_rep]);
                (0..program.vars.len())
                    .find(|&u| {
                        let tu = store.const_term(succ.config.state.get(u));
                        succ_state.same_class(tu, old_term)
                    })
                    .map(|u| succ_reps[u])
            };
            let mut hazards: Hazards = Hazards::new();
            for (&old_rep, term) in &nodes[i].hazards {
                if let Some(new_rep) = map_old(old_rep) {
                    hazards.entry(new_rep).or_insert_with(|| term.clone());
                }
            }
            let mut dropped: DroppedApps = DroppedApps::new();
            for ((fname, old_args), term) in &nodes[i].dropped {
                let mapped: Option<Vec<VarId>> =
                    old_args.iter().map(|&r| map_old(r)).collect();
                if let Some(args) = mapped {
                    dropped
                        .entry((fname.clone(), args))
                        .or_insert_with(|| term.clone());
                }
            }
            // Newly dropped classes of this abstraction step.
            let v_set = succ.config.state.consts();
            let analysis = analyze(&mut store, &succ.config.pc, &v_set)
                .map_err(AbstractionError::Basis)?;
            for info in analysis.classes.iter().filter(|c| c.w_rep) {
                for &member in &info.members {
                    let TermData::App(f, args) = store.data(member).clone() else {
                        continue;
                    };
                    let mut arg_vars: Vec<Option<VarId>> = Vec::with_capacity(args.len());
                    for &a in &args {
                        let var = (0..program.vars.len())
                            .find(|&u| {
                                let tu = store.const_term(succ.config.state.get(u));
                                succ_state.same_class(tu, a)
                            })
                            .map(|u| succ_reps[u]);
                        arg_vars.push(var);
                    }
                    let witness = store.display(member);
                    for var in arg_vars.iter().flatten() {
                        hazards.entry(*var).or_insert_with(|| witness.clone());
                    }
                    if let Some(args) = arg_vars.into_iter().collect::<Option<Vec<_>>>() {
                        dropped
                            .entry((store.fn_name(f).to_string(), args))
                            .or_insert_with(|| witness.clone());
                    }
                }
            }
            let key = CoherenceKey {
                config: acfg.clone(),
                hazards: hazards.keys().copied().collect(),
                dropped: dropped.keys().cloned().collect(),
            };
            if seen.insert(key) {
                let idx = nodes.len();
                nodes.push(NodeData {
                    config: acfg,
                    hazards,
                    dropped,
                    parent: Some(i),
                });
                queue.push_back(idx);
            }
        }
    }
    Ok(CoherenceReport::Coherent {
        nodes_checked: nodes.len(),
    })
}

/// One discrepancy between the concrete system and the abstraction.
#[derive(Clone, Debug)]
pub struct BisimMismatch {
    pub description: String,
}

#[derive(Clone, Debug)]
pub struct BisimReport {
    pub configs_checked: usize,
    pub mismatches: Vec<BisimMismatch>,
    pub truncated: bool,
}

/// Validates the abstraction against a bounded run of the concrete system:
/// forth simulation, back simulation from fully expanded configurations, and
/// agreement of the stored-constant (dis)equalities.
pub fn bisim_validate(
    program: &Program,
    ts: &AbstractTs,
    step_bound: usize,
    max_configs: usize,
) -> Result<BisimReport, ExplorerError> {
    let (mut store, initial) = program.base_store();
    let run = concrete_bounded(program, &mut store, &initial, step_bound, max_configs);
    let ids = ts.node_index();
    let pairs = ts.edge_pairs();
    let mut mismatches = Vec::new();

    let mut images = Vec::with_capacity(run.configs.len());
    for (i, config) in run.configs.iter().enumerate() {
        let acfg = alpha_brn(&mut store, program, &initial, config)?;
        match ids.get(&acfg) {
            Some(&n) => images.push(Some(n)),
            None => {
                images.push(None);
                mismatches.push(BisimMismatch {
                    description: format!(
                        "concrete configuration {i} has no abstract node: {acfg}"
                    ),
                });
            }
        }
    }
    // (i) every concrete transition has an abstract counterpart
    for &(i, j, _) in &run.edges {
        if let (Some(a), Some(b)) = (images[i], images[j]) {
            if !pairs.contains(&(a, b)) {
                mismatches.push(BisimMismatch {
                    description: format!(
                        "concrete step {i}->{j} missing abstractly ({a}->{b})"
                    ),
                });
            }
        }
    }
    // (ii) every abstract transition out of a fully expanded configuration's
    // image is matched by some concrete step
    for (i, config) in run.configs.iter().enumerate() {
        if !run.expanded[i] {
            continue;
        }
        let Some(a) = images[i] else { continue };
        let _ = config;
        let concrete_targets: BTreeSet<usize> = run
            .edges
            .iter()
            .filter(|&&(s, _, _)| s == i)
            .filter_map(|&(_, j, _)| images[j])
            .collect();
        for &(src, dst) in pairs.iter().filter(|&&(s, _)| s == a) {
            let _ = src;
            if !concrete_targets.contains(&dst) {
                mismatches.push(BisimMismatch {
                    description: format!(
                        "abstract step {a}->{dst} has no concrete match from configuration {i}"
                    ),
                });
            }
        }
    }
    // (iii) stored-constant (dis)equalities agree between a configuration and
    // its image
    for (i, config) in run.configs.iter().enumerate() {
        let Some(a) = images[i] else { continue };
        let node = &ts.nodes[a];
        let cstate = CongruenceState::from_literals(&store, config.pc.iter().copied());
        let alits = abstract_pc_literals(&mut store, node);
        let astate = CongruenceState::from_literals(&store, alits.iter().copied());
        for u in 0..program.vars.len() {
            for v in (u + 1)..program.vars.len() {
                let cu = store.const_term(config.state.get(u));
                let cv = store.const_term(config.state.get(v));
                let au = store.const_term(initial[u]);
                let av = store.const_term(initial[v]);
                for (mk, name) in [
                    (Literal::eq as fn(TermId, TermId) -> Literal, "="),
                    (Literal::neq, "!="),
                ] {
                    let concrete = cstate.entails(&store, mk(cu, cv));
                    let abstracted = astate.entails(&store, mk(au, av));
                    if concrete != abstracted {
                        mismatches.push(BisimMismatch {
                            description: format!(
                                "configuration {i}: {} {} {} holds {}ly only",
                                program.var_name(u),
                                name,
                                program.var_name(v),
                                if concrete { "concrete" } else { "abstract" },
                            ),
                        });
                    }
                }
            }
        }
    }
    Ok(BisimReport {
        configs_checked: run.configs.len(),
        mismatches,
        truncated: run.truncated,
    })
}

/// Per-step preservation check of the base abstraction along a bounded
/// concrete run: enabledness of assumes must agree between a path condition
/// and its abstraction, and abstracting the extended condition must not
/// depend on whether the original or the abstracted condition was extended.
pub fn theorem_step_check(
    program: &Program,
    step_bound: usize,
    max_configs: usize,
) -> Result<Vec<String>, ExplorerError> {
    let (mut store, initial) = program.base_store();
    let run = concrete_bounded(program, &mut store, &initial, step_bound, max_configs);
    let mut failures = Vec::new();
    for (i, config) in run.configs.iter().enumerate() {
        if !run.expanded[i] {
            continue;
        }
        let v_set = config.state.consts();
        let abs_pc: Vec<Literal> = base_abstract(&mut store, &config.pc, &v_set)
            .map_err(AbstractionError::Basis)?
            .into_iter()
            .collect();
        let full = CongruenceState::from_literals(&store, config.pc.iter().copied());
        let abs = CongruenceState::from_literals(&store, abs_pc.iter().copied());
        for (label, _) in program.cfg.get(&config.stmt).cloned().unwrap_or_default() {
            let StepLabel::Exec(leaf) = label else { continue };
            match program.stmt(leaf).clone() {
                Stmt::Assume(c) => {
                    let l = store.const_term(config.state.get(c.lhs));
                    let r = store.const_term(config.state.get(c.rhs));
                    let lit = if c.eq {
                        Literal::eq(l, r)
                    } else {
                        Literal::neq(l, r)
                    };
                    let feasible = |st: &CongruenceState| {
                        let mut probe = st.clone();
                        probe.assert_literal(&store, lit);
                        !probe.is_unsat()
                    };
                    let on_full = feasible(&full);
                    let on_abs = feasible(&abs);
                    if on_full != on_abs {
                        failures.push(format!(
                            "configuration {i}: assume {} enabled {}ly only",
                            program.render_cond(c),
                            if on_full { "concrete" } else { "abstract" }
                        ));
                        continue;
                    }
                    if on_full {
                        let mut left_in = config.pc.clone();
                        left_in.push(lit);
                        let mut right_in = abs_pc.clone();
                        right_in.push(lit);
                        let left = base_abstract(&mut store, &left_in, &v_set)
                            .map_err(AbstractionError::Basis)?;
                        let right = base_abstract(&mut store, &right_in, &v_set)
                            .map_err(AbstractionError::Basis)?;
                        if left != right {
                            failures.push(format!(
                                "configuration {i}: abstraction differs after assume {}",
                                program.render_cond(c)
                            ));
                        }
                    }
                }
                Stmt::Assign(x, y) => {
                    let fresh = store.fresh_const(program.var_name(x));
                    let lit = Literal::eq(
                        store.const_term(fresh),
                        store.const_term(config.state.get(y)),
                    );
                    check_assign_case(
                        &mut store, program, config, &abs_pc, x, fresh, lit, i,
                        &mut failures,
                    )?;
                }
                Stmt::AssignFn(x, ref fname, ref args) => {
                    let f = store.lookup_fn(fname).expect("declared function");
                    let arg_terms: Vec<TermId> = args
                        .iter()
                        .map(|&v| store.const_term(config.state.get(v)))
                        .collect();
                    let app = store.app(f, &arg_terms).expect("parse-time arity");
                    let fresh = store.fresh_const(program.var_name(x));
                    let lit = Literal::eq(store.const_term(fresh), app);
                    check_assign_case(
                        &mut store, program, config, &abs_pc, x, fresh, lit, i,
                        &mut failures,
                    )?;
                }
                _ => {}
            }
        }
    }
    Ok(failures)
}

#[allow(clippy::too_many_arguments)]
fn check_assign_case(
    store: &mut TermStore,
    program: &Program,
    config: &Configuration,
    abs_pc: &[Literal],
    x: VarId,
    fresh: ConstId,
    lit: Literal,
    index: usize,
    failures: &mut Vec<String>,
) -> Result<(), ExplorerError> {
    let mut state = config.state.clone();
    state.0[x] = fresh;
    let v_set = state.consts();
    let mut left_in = config.pc.clone();
    left_in.push(lit);
    let mut right_in = abs_pc.to_vec();
    right_in.push(lit);
    let left = base_abstract(store, &left_in, &v_set).map_err(AbstractionError::Basis)?;
    let right = base_abstract(store, &right_in, &v_set).map_err(AbstractionError::Basis)?;
    if left != right {
        failures.push(format!(
            "configuration {index}: abstraction differs after {}",
            program.render(program.first_leaf(config.stmt))
        ));
    }
    Ok(())
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
    fn skip_program_is_one_node() {
        let p = parse("skip").unwrap();
        let ts = explore(&p, Budgets::default(), 1).unwrap();
        assert_eq!(ts.nodes.len(), 1);
        assert!(ts.edges.is_empty());
        assert!(!ts.truncated);
    }

    #[test]
    fn lockstep_loop_reaches_a_fixpoint_and_is_unreachable() {
        let p = parse(LOCKSTEP).unwrap();
        let ts = explore(&p, Budgets::default(), 1).unwrap();
        assert!(!ts.truncated, "loop must reach an abstract fixpoint");
        assert!(ts.terminals(&p).is_empty());
        let (verdict, _) = decide_reachability(&p, Budgets::default(), 1).unwrap();
        assert!(matches!(verdict, Verdict::Unreachable { .. }));
    }

    #[test]
    fn single_assume_is_reachable() {
        let p = parse("assume(x == y)").unwrap();
        let (verdict, _) = decide_reachability(&p, Budgets::default(), 1).unwrap();
        match verdict {
            Verdict::Reachable { trace } => assert_eq!(trace.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn contradictory_assumes_are_unreachable() {
        let p = parse("assume(x == y); assume(x != y)").unwrap();
        let (verdict, _) = decide_reachability(&p, Budgets::default(), 1).unwrap();
        assert!(matches!(verdict, Verdict::Unreachable { .. }));
    }

    #[test]
    fn parallel_exploration_matches_sequential() {
        let p = parse(LOCKSTEP).unwrap();
        let seq = explore(&p, Budgets::default(), 1).unwrap();
        let par = explore(&p, Budgets::default(), 4).unwrap();
        assert_eq!(seq.nodes, par.nodes);
        assert_eq!(seq.edge_pairs(), par.edge_pairs());
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let p = parse(LOCKSTEP).unwrap();
        let ts = explore(
            &p,
            Budgets {
                max_nodes: 3,
                max_steps: 1_000,
            },
            1,
        )
        .unwrap();
        assert!(ts.truncated);
        assert!(matches!(
            invariants(&p, &ts),
            Err(ExplorerError::Truncated)
        ));
    }

    #[test]
    fn lockstep_is_coherent() {
        let p = parse(LOCKSTEP).unwrap();
        let report = check_coherence(&p, Budgets::default()).unwrap();
        assert!(report.is_coherent(), "{report:?}");
    }

    #[test]
    fn recompute_after_drop_is_memoizing_violation() {
        let p = parse("y := f(x); y := x; z := f(x)").unwrap();
        let report = check_coherence(&p, Budgets::default()).unwrap();
        match report {
            CoherenceReport::Violation(v) => {
                assert_eq!(v.kind, ViolationKind::Memoizing);
                assert_eq!(v.line, Some(1)); // single-line program
                assert!(v.statement.contains("z := f(x)"), "{v:?}");
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn assume_after_drop_is_early_assume_violation() {
        let p = parse("a := f(x); a := x; assume(x == y)").unwrap();
        let report = check_coherence(&p, Budgets::default()).unwrap();
        match report {
            CoherenceReport::Violation(v) => {
                assert_eq!(v.kind, ViolationKind::EarlyAssume);
                assert!(v.statement.contains("assume(x == y)"), "{v:?}");
                assert!(v.term.contains("f("), "{v:?}");
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn bisimulation_holds_on_lockstep() {
        let p = parse(LOCKSTEP).unwrap();
        let ts = explore(&p, Budgets::default(), 1).unwrap();
        let report = bisim_validate(&p, &ts, 40, 100_000).unwrap();
        assert!(report.mismatches.is_empty(), "{:?}", report.mismatches);
    }

    #[test]
    fn incoherent_program_fails_back_simulation() {
        // Drop two function values and a disequality between them, then
        // recompute: the abstraction forgets the conflict and permits an
        // assume the concrete system blocks.
        let text = "\
t := f(x); s := f(y); assume(t != s);
t := x; s := x;
u := f(x); v := f(y);
assume(u == v)
";
        let p = parse(text).unwrap();
        let ts = explore(&p, Budgets::default(), 1).unwrap();
        let report = bisim_validate(&p, &ts, 30, 100_000).unwrap();
        assert!(
            !report.mismatches.is_empty(),
            "expected a back-simulation failure"
        );
        // and the coherence checker explains why the verdict is weak
        let coh = check_coherence(&p, Budgets::default()).unwrap();
        assert!(!coh.is_coherent());
    }

    #[test]
    fn theorem_step_check_passes_on_lockstep() {
        let p = parse(LOCKSTEP).unwrap();
        let failures = theorem_step_check(&p, 30, 50_000).unwrap();
        assert!(failures.is_empty(), "{failures:?}");
    }
}
