//! Machine- and human-readable output.
//!
//! JSON reports are byte-stable on identical input: every collection is
//! emitted in a canonical order and all structures serialize with a fixed
//! field order.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::abstraction::{AbstractConfig, GroundCovered};
use crate::euf::ground::GroundLit;
use crate::explorer::{
    AbstractTs, AssertionMap, BisimReport, CoherenceReport, Verdict,
};
use crate::upl::{Program, StmtId};

#[derive(Serialize)]
pub struct StatsJson {
    pub nodes: usize,
    pub edges: usize,
    pub steps: usize,
    pub truncated: bool,
}

pub fn stats_json(ts: &AbstractTs) -> StatsJson {
    StatsJson {
        nodes: ts.nodes.len(),
        edges: ts.edges.len(),
        steps: ts.steps,
        truncated: ts.truncated,
    }
}

#[derive(Serialize)]
pub struct TraceEntryJson {
    pub location: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    pub at: String,
    pub pc: Vec<GroundLit>,
}

pub fn trace_json(program: &Program, trace: &[AbstractConfig]) -> Vec<TraceEntryJson> {
    trace
        .iter()
        .map(|c| TraceEntryJson {
            location: c.loc.0,
            line: program.line_of_form(c.loc),
            at: program.describe_form(c.loc),
            pc: c.pc.clone(),
        })
        .collect()
}

#[derive(Serialize)]
pub struct CoherenceJson {
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statement: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub term: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntryJson>>,
    pub checked_on: String,
}

pub fn coherence_json(program: &Program, report: &CoherenceReport) -> CoherenceJson {
    match report {
        CoherenceReport::Coherent { .. } => CoherenceJson {
            status: "coherent".to_string(),
            line: None,
            statement: None,
            term: None,
            trace: None,
            checked_on: "abstraction".to_string(),
        },
        CoherenceReport::Violation(v) => CoherenceJson {
            status: match v.kind {
                crate::explorer::ViolationKind::Memoizing => "memoizing_violation",
                crate::explorer::ViolationKind::EarlyAssume => "early_assume_violation",
            }
            .to_string(),
            line: v.line,
            statement: Some(v.statement.clone()),
            term: Some(v.term.clone()),
            trace: Some(trace_json(program, &v.trace)),
            checked_on: "abstraction".to_string(),
        },
    }
}

#[derive(Serialize)]
pub struct LocationInvariantJson {
    pub location: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    pub at: String,
    pub disjuncts: Vec<GroundCovered>,
}

#[derive(Serialize)]
pub struct LineInvariantJson {
    pub line: u32,
    pub disjuncts: Vec<GroundCovered>,
}

#[derive(Serialize)]
pub struct InvariantsJson {
    pub inductive: bool,
    pub locations: Vec<LocationInvariantJson>,
    pub after_line: Vec<LineInvariantJson>,
}

pub fn invariants_json(program: &Program, map: &AssertionMap) -> InvariantsJson {
    InvariantsJson {
        inductive: map.inductive,
        locations: map
            .per_location
            .iter()
            .map(|(loc, disjuncts)| LocationInvariantJson {
                location: loc.0,
                line: program.line_of_form(*loc),
                at: program.describe_form(*loc),
                disjuncts: disjuncts.clone(),
            })
            .collect(),
        after_line: map
            .after_line
            .iter()
            .map(|(line, disjuncts)| LineInvariantJson {
                line: *line,
                disjuncts: disjuncts.clone(),
            })
            .collect(),
    }
}

#[derive(Serialize)]
pub struct ReachJson {
    pub verdict: String,
    pub coherent: bool,
    pub conclusive: bool,
    pub stats: StatsJson,
    pub coherence: CoherenceJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntryJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariants: Option<InvariantsJson>,
}

pub fn reach_json(
    program: &Program,
    verdict: &Verdict,
    ts: &AbstractTs,
    coherence: &CoherenceReport,
) -> ReachJson {
    let coherent = coherence.is_coherent();
    match verdict {
        Verdict::Reachable { trace } => ReachJson {
            verdict: "reachable".to_string(),
            coherent,
            conclusive: coherent,
            stats: stats_json(ts),
            coherence: coherence_json(program, coherence),
            trace: Some(trace_json(program, trace)),
            invariants: None,
        },
        Verdict::Unreachable { assertions } => ReachJson {
            verdict: "unreachable".to_string(),
            coherent,
            conclusive: true,
            stats: stats_json(ts),
            coherence: coherence_json(program, coherence),
            trace: None,
            invariants: Some(invariants_json(program, assertions)),
        },
    }
}

#[derive(Serialize)]
pub struct ProgramJson {
    pub vars: Vec<String>,
    pub functions: Vec<FunctionJson>,
    pub statements: Vec<StatementJson>,
    pub locations: usize,
}

#[derive(Serialize)]
pub struct FunctionJson {
    pub name: String,
    pub arity: usize,
}

#[derive(Serialize)]
pub struct StatementJson {
    pub line: Option<u32>,
    pub text: String,
}

pub fn program_json(program: &Program) -> ProgramJson {
    ProgramJson {
        vars: program.vars.clone(),
        functions: program
            .fns
            .iter()
            .map(|(name, arity)| FunctionJson {
                name: name.clone(),
                arity: *arity,
            })
            .collect(),
        statements: program
            .leaf_statements()
            .iter()
            .map(|&s| StatementJson {
                line: program.line(s),
                text: program.render(s),
            })
            .collect(),
        locations: program.locations().len(),
    }
}

#[derive(Serialize)]
pub struct BisimJson {
    pub configs_checked: usize,
    pub truncated: bool,
    pub mismatches: Vec<String>,
    pub stats: StatsJson,
}

pub fn bisim_json(report: &BisimReport, ts: &AbstractTs) -> BisimJson {
    BisimJson {
        configs_checked: report.configs_checked,
        truncated: report.truncated,
        mismatches: report
            .mismatches
            .iter()
            .map(|m| m.description.clone())
            .collect(),
        stats: stats_json(ts),
    }
}

/// DOT rendering of the transition system. Node labels carry the resume
/// point and the abstract path condition.
pub fn dot(program: &Program, ts: &AbstractTs) -> String {
    let mut out = String::from("digraph ts {\n  rankdir=TB;\n  node [shape=box, fontname=\"monospace\"];\n");
    for (i, node) in ts.nodes.iter().enumerate() {
        let label = format!(
            "{}\\n{}",
            escape(&format!(
                "{} @ {}",
                node.loc,
                program.describe_form(node.loc)
            )),
            escape(&node.pc_text())
        );
        let shape = if node.loc == program.skip {
            ", peripheries=2"
        } else {
            ""
        };
        out.push_str(&format!("  n{i} [label=\"{label}\"{shape}];\n"));
    }
    let mut pairs: Vec<(usize, usize)> = ts.edge_pairs().into_iter().collect();
    pairs.sort_unstable();
    for (src, dst) in pairs {
        out.push_str(&format!("  n{src} -> n{dst};\n"));
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Text rendering of an assertion map.
pub fn invariants_text(program: &Program, map: &AssertionMap) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "inductive: {}\n\nper location:\n",
        map.inductive
    ));
    for (loc, disjuncts) in &map.per_location {
        out.push_str(&format!(
            "  {} ({})\n    {}\n",
            loc,
            program.describe_form(*loc),
            disjunction_text(disjuncts)
        ));
    }
    out.push_str("\nafter line:\n");
    for (line, disjuncts) in &map.after_line {
        out.push_str(&format!(
            "  line {:>3}: {}\n",
            line,
            disjunction_text(disjuncts)
        ));
    }
    out
}

pub fn disjunction_text(disjuncts: &[GroundCovered]) -> String {
    if disjuncts.is_empty() {
        return "false".to_string();
    }
    disjuncts
        .iter()
        .map(|d| {
            if disjuncts.len() > 1 {
                format!("({})", d.text())
            } else {
                d.text()
            }
        })
        .collect::<Vec<_>>()
        .join("  \\/  ")
}

/// Groups transition-system nodes per location for debugging output.
pub fn nodes_by_location(ts: &AbstractTs) -> BTreeMap<StmtId, Vec<usize>> {
    let mut out: BTreeMap<StmtId, Vec<usize>> = BTreeMap::new();
    for (i, node) in ts.nodes.iter().enumerate() {
        out.entry(node.loc).or_default().push(i);
    }
    out
}
