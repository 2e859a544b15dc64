//! Programs over uninterpreted functions: syntax and program structure.
//!
//! A parsed program is an arena of statements plus the closure of all
//! statement forms that can appear as the remaining program during
//! execution. Computing that closure up front keeps program points (and with
//! them the transition systems built later) finite and stable.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

mod parser;
pub mod semantics;

pub use parser::{parse, ParseError};

use crate::euf::{ConstId, TermStore};

/// Index of a program variable, in first-occurrence order.
pub type VarId = usize;

/// Identity of a statement node. Also serves as a program location.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct StmtId(pub u32);

/// A variable (dis)equality test.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Cond {
    pub lhs: VarId,
    pub rhs: VarId,
    pub eq: bool,
}

impl Cond {
    pub fn negated(self) -> Self {
        Cond {
            eq: !self.eq,
            ..self
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Stmt {
    Skip,
    /// `x := y`
    Assign(VarId, VarId),
    /// `x := f(y1, ..., yn)`
    AssignFn(VarId, String, Vec<VarId>),
    Assume(Cond),
    Seq(StmtId, StmtId),
    If(Cond, StmtId, StmtId),
    While(Cond, StmtId),
}

/// How a transition between two statement forms behaves.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StepLabel {
    /// Executes the given leaf statement (assignment or assume).
    Exec(StmtId),
    /// Pure control rewriting: loop unrolling or branch splitting.
    Expand(StmtId),
}

impl StepLabel {
    pub fn source(self) -> StmtId {
        match self {
            StepLabel::Exec(s) | StepLabel::Expand(s) => s,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Program {
    pub vars: Vec<String>,
    /// Function symbols with arities, in first-occurrence order.
    pub fns: Vec<(String, usize)>,
    nodes: Vec<Stmt>,
    lines: Vec<Option<u32>>,
    synthetic: Vec<bool>,
    seq_cons: HashMap<(StmtId, StmtId), StmtId>,
    if_cons: HashMap<(Cond, StmtId, StmtId), StmtId>,
    assume_cons: HashMap<(Cond, StmtId), StmtId>,
    pub root: StmtId,
    pub skip: StmtId,
    /// Reachable statement forms and their labeled successors.
    pub cfg: BTreeMap<StmtId, Vec<(StepLabel, StmtId)>>,
}

impl Program {
    pub(crate) fn new(vars: Vec<String>) -> Self {
        let mut p = Program {
            vars,
            fns: Vec::new(),
            nodes: Vec::new(),
            lines: Vec::new(),
            synthetic: Vec::new(),
            seq_cons: HashMap::new(),
            if_cons: HashMap::new(),
            assume_cons: HashMap::new(),
            root: StmtId(0),
            skip: StmtId(0),
            cfg: BTreeMap::new(),
        };
        p.skip = p.push_node(Stmt::Skip, None, true);
        p
    }

    fn push_node(&mut self, stmt: Stmt, line: Option<u32>, synthetic: bool) -> StmtId {
        let id = StmtId(self.nodes.len() as u32);
        self.nodes.push(stmt);
        self.lines.push(line);
        self.synthetic.push(synthetic);
        id
    }

    /// Adds a parse-time node. Source statements are never merged, so two
    /// textually equal statements keep distinct locations; sequences are
    /// registered for reuse so a loop body running out rejoins the original
    /// loop-head form.
    pub(crate) fn fresh_node(&mut self, stmt: Stmt, line: Option<u32>) -> StmtId {
        if stmt == Stmt::Skip {
            return self.skip;
        }
        let id = self.push_node(stmt.clone(), line, false);
        if let Stmt::Seq(a, b) = stmt {
            self.seq_cons.insert((a, b), id);
        }
        id
    }

    fn derived_seq(&mut self, s1: StmtId, s2: StmtId) -> StmtId {
        if s1 == self.skip {
            return s2;
        }
        if let Some(&id) = self.seq_cons.get(&(s1, s2)) {
            return id;
        }
        let id = self.push_node(Stmt::Seq(s1, s2), None, true);
        self.seq_cons.insert((s1, s2), id);
        id
    }

    fn derived_if(&mut self, c: Cond, t: StmtId, e: StmtId, line: Option<u32>) -> StmtId {
        if let Some(&id) = self.if_cons.get(&(c, t, e)) {
            return id;
        }
        let id = self.push_node(Stmt::If(c, t, e), line, true);
        self.if_cons.insert((c, t, e), id);
        id
    }

    /// Branch/loop guards keyed by their owning statement, so two tests with
    /// the same condition keep separate locations.
    fn derived_assume(&mut self, c: Cond, parent: StmtId) -> StmtId {
        if let Some(&id) = self.assume_cons.get(&(c, parent)) {
            return id;
        }
        let line = self.lines[parent.0 as usize];
        let id = self.push_node(Stmt::Assume(c), line, true);
        self.assume_cons.insert((c, parent), id);
        id
    }

    pub fn stmt(&self, id: StmtId) -> &Stmt {
        &self.nodes[id.0 as usize]
    }

    pub fn line(&self, id: StmtId) -> Option<u32> {
        self.lines[id.0 as usize]
    }

    pub fn is_synthetic(&self, id: StmtId) -> bool {
        self.synthetic[id.0 as usize]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v]
    }

    /// The statement that executes next from this form.
    pub fn first_leaf(&self, id: StmtId) -> StmtId {
        match self.stmt(id) {
            Stmt::Seq(s1, _) => self.first_leaf(*s1),
            _ => id,
        }
    }

    /// The source line at which this form resumes, if any.
    pub fn line_of_form(&self, id: StmtId) -> Option<u32> {
        self.line(self.first_leaf(id))
    }

    /// All reachable statement forms (program locations).
    pub fn locations(&self) -> Vec<StmtId> {
        self.cfg.keys().copied().collect()
    }

    /// Static successors of one statement form, following the operational
    /// rules with sequence-skip folded in.
    fn form_successors(&mut self, id: StmtId) -> Vec<(StepLabel, StmtId)> {
        match self.stmt(id).clone() {
            Stmt::Skip => Vec::new(),
            Stmt::Assign(..) | Stmt::AssignFn(..) | Stmt::Assume(_) => {
                vec![(StepLabel::Exec(id), self.skip)]
            }
            Stmt::Seq(s1, s2) => self
                .form_successors(s1)
                .into_iter()
                .map(|(label, s1next)| (label, self.derived_seq(s1next, s2)))
                .collect(),
            Stmt::If(c, then_s, else_s) => {
                let a_then = self.derived_assume(c, id);
                let a_else = self.derived_assume(c.negated(), id);
                let t = self.derived_seq(a_then, then_s);
                let e = self.derived_seq(a_else, else_s);
                vec![(StepLabel::Expand(id), t), (StepLabel::Expand(id), e)]
            }
            Stmt::While(c, body) => {
                let again = self.derived_seq(body, id);
                let unrolled = self.derived_if(c, again, self.skip, self.line(id));
                vec![(StepLabel::Expand(id), unrolled)]
            }
        }
    }

    /// Computes the closure of statement forms reachable from the root.
    pub(crate) fn close(&mut self) {
        let mut work = vec![self.root, self.skip];
        while let Some(id) = work.pop() {
            if self.cfg.contains_key(&id) {
                continue;
            }
            let succ = self.form_successors(id);
            for (_, next) in &succ {
                work.push(*next);
            }
            self.cfg.insert(id, succ);
        }
    }

    /// A term store holding the initial constant of every variable and the
    /// program's function symbols.
    pub fn base_store(&self) -> (TermStore, Vec<ConstId>) {
        let mut store = TermStore::new();
        let mut initial = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            let c = store
                .add_const(&format!("{v}0"))
                .expect("fresh initial constant");
            store.mark_initial(c);
            initial.push(c);
        }
        for (name, arity) in &self.fns {
            store.add_fn(name, *arity).expect("parse-time arity check");
        }
        (store, initial)
    }

    pub fn max_arity(&self) -> usize {
        self.fns.iter().map(|(_, a)| *a).max().unwrap_or(0)
    }

    pub fn render(&self, id: StmtId) -> String {
        match self.stmt(id) {
            Stmt::Skip => "skip".to_string(),
            Stmt::Assign(x, y) => format!("{} := {}", self.vars[*x], self.vars[*y]),
            Stmt::AssignFn(x, f, args) => {
                let a: Vec<&str> = args.iter().map(|&v| self.vars[v].as_str()).collect();
                format!("{} := {}({})", self.vars[*x], f, a.join(", "))
            }
            Stmt::Assume(c) => format!("assume({})", self.render_cond(*c)),
            Stmt::Seq(s1, s2) => format!("{}; {}", self.render(*s1), self.render(*s2)),
            Stmt::If(c, t, e) => format!(
                "if ({}) then {{ {} }} else {{ {} }}",
                self.render_cond(*c),
                self.render(*t),
                self.render(*e)
            ),
            Stmt::While(c, b) => {
                format!("while ({}) {{ {} }}", self.render_cond(*c), self.render(*b))
            }
        }
    }

    pub fn render_cond(&self, c: Cond) -> String {
        format!(
            "{} {} {}",
            self.vars[c.lhs],
            if c.eq { "==" } else { "!=" },
            self.vars[c.rhs]
        )
    }

    /// Short label for a program point: the next statement to execute.
    pub fn describe_form(&self, id: StmtId) -> String {
        let leaf = self.first_leaf(id);
        if leaf == self.skip {
            return "end".to_string();
        }
        match self.stmt(leaf) {
            Stmt::While(c, _) => format!("while ({})", self.render_cond(*c)),
            Stmt::If(c, ..) => format!("if ({})", self.render_cond(*c)),
            _ => self.render(leaf),
        }
    }

    /// Source-order leaf statements of the program text.
    pub fn leaf_statements(&self) -> Vec<StmtId> {
        (0..self.nodes.len() as u32)
            .map(StmtId)
            .filter(|&id| {
                !self.is_synthetic(id)
                    && matches!(
                        self.stmt(id),
                        Stmt::Assign(..) | Stmt::AssignFn(..) | Stmt::Assume(_)
                    )
            })
            .collect()
    }

    pub fn while_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|s| matches!(s, Stmt::While(..)))
            .count()
    }

    /// Source lines that carry an executable statement or a loop/branch head.
    pub fn statement_lines(&self) -> Vec<u32> {
        let mut lines: Vec<u32> = (0..self.nodes.len() as u32)
            .map(StmtId)
            .filter(|&id| !self.is_synthetic(id))
            .filter_map(|id| self.line(id))
            .collect();
        lines.sort_unstable();
        lines.dedup();
        lines
    }
}

impl fmt::Display for StmtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}
