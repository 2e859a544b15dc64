//! Command-line interface.
//!
//! Exit codes: 0 analysis completed (the verdict is in the payload), 2 parse
//! error, 3 budget exceeded, 4 I/O error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::explorer::{
    bisim_validate, check_coherence, decide_reachability, explore, invariants, Budgets,
    CoherenceReport, ExplorerError, Verdict,
};
use crate::report;
use crate::upl::{parse, Program};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "cupverify",
    about = "Reachability, invariants and coherence checking for uninterpreted programs",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Program file (one program per file)
    pub input: PathBuf,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Node budget for the abstract exploration
    #[arg(long, default_value_t = 100_000)]
    pub max_nodes: usize,
    /// Step budget for the abstract exploration
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: usize,
    /// Worker threads for the exploration
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

impl Common {
    fn budgets(&self) -> Budgets {
        Budgets {
            max_nodes: self.max_nodes.max(1),
            max_steps: self.max_steps.max(1),
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a program and show its structure
    Parse(Common),
    /// Check the two coherence conditions
    Coherence(Common),
    /// Decide whether the program can run to completion
    Reach(Common),
    /// Extract the per-location inductive assertions
    Invariants(Common),
    /// Emit the abstract transition system
    Graph(Common),
    /// Validate the abstraction against bounded concrete execution
    BisimCheck {
        #[command(flatten)]
        common: Common,
        /// Concrete step bound
        #[arg(long, default_value_t = 40)]
        bound: usize,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Parse(c)
            | Command::Coherence(c)
            | Command::Reach(c)
            | Command::Invariants(c)
            | Command::Graph(c) => c,
            Command::BisimCheck { common, .. } => common,
        }
    }
}

fn load(common: &Common) -> Result<Program, i32> {
    let text = match std::fs::read_to_string(&common.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", common.input.display());
            return Err(EXIT_IO);
        }
    };
    match parse(&text) {
        Ok(p) => Ok(p),
        Err(e) => {
            eprintln!("{}: {e}", common.input.display());
            Err(EXIT_PARSE)
        }
    }
}

fn budget_exit(err: &ExplorerError) -> i32 {
    match err {
        ExplorerError::BudgetExceeded { .. } | ExplorerError::Truncated => EXIT_BUDGET,
        ExplorerError::Abstraction(_) => EXIT_IO,
    }
}

fn emit_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serialization")
    );
}

pub fn run(cli: Cli) -> i32 {
    let common = cli.command.common();
    let program = match load(common) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let budgets = common.budgets();
    let jobs = common.jobs.max(1);
    match &cli.command {
        Command::Parse(c) => {
            let json = report::program_json(&program);
            match c.format {
                Format::Json => emit_json(&json),
                _ => {
                    println!(
                        "variables: {}\nfunctions: {}",
                        program.vars.join(", "),
                        json.functions
                            .iter()
                            .map(|f| format!("{}/{}", f.name, f.arity))
                            .collect::<Vec<_>>()
                            .join(", ")
                    );
                    println!("statements:");
                    for s in &json.statements {
                        match s.line {
                            Some(l) => println!("  {l:>3}: {}", s.text),
                            None => println!("     : {}", s.text),
                        }
                    }
                    println!("locations: {}", json.locations);
                }
            }
            EXIT_OK
        }
        Command::Coherence(c) => {
            let coherence = match check_coherence(&program, budgets) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return budget_exit(&e);
                }
            };
            match c.format {
                Format::Json => emit_json(&report::coherence_json(&program, &coherence)),
                _ => match &coherence {
                    CoherenceReport::Coherent { nodes_checked } => {
                        println!("coherent ({nodes_checked} abstract nodes checked)");
                    }
                    CoherenceReport::Violation(v) => {
                        println!(
                            "{:?} violation at {} (line {}): {}\n  offending term: {}",
                            v.kind,
                            v.location,
                            v.line.map_or("?".to_string(), |l| l.to_string()),
                            v.statement,
                            v.term
                        );
                    }
                },
            }
            EXIT_OK
        }
        Command::Reach(c) => {
            let coherence = match check_coherence(&program, budgets) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return budget_exit(&e);
                }
            };
            let (verdict, ts) = match decide_reachability(&program, budgets, jobs) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("error: {e}");
                    return budget_exit(&e);
                }
            };
            let json = report::reach_json(&program, &verdict, &ts, &coherence);
            match c.format {
                Format::Json => emit_json(&json),
                _ => {
                    println!("verdict: {}", json.verdict);
                    if !json.conclusive {
                        println!("note: program is not coherent; a reachable verdict may be spurious");
                    }
                    if let Verdict::Reachable { trace } = &verdict {
                        println!("trace ({} configurations):", trace.len());
                        for entry in trace {
                            println!(
                                "  {} ({}): {}",
                                entry.loc,
                                program.describe_form(entry.loc),
                                entry.pc_text()
                            );
                        }
                    }
                    println!(
                        "nodes: {}, edges: {}",
                        json.stats.nodes, json.stats.edges
                    );
                }
            }
            EXIT_OK
        }
        Command::Invariants(c) => {
            let ts = match explore(&program, budgets, jobs) {
                Ok(ts) => ts,
                Err(e) => {
                    eprintln!("error: {e}");
                    return budget_exit(&e);
                }
            };
            if ts.truncated {
                eprintln!("error: exploration budget exceeded");
                return EXIT_BUDGET;
            }
            let map = match invariants(&program, &ts) {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("error: {e}");
                    return budget_exit(&e);
                }
            };
            match c.format {
                Format::Json => emit_json(&report::invariants_json(&program, &map)),
                _ => print!("{}", report::invariants_text(&program, &map)),
            }
            EXIT_OK
        }
        Command::Graph(c) => {
            let ts = match explore(&program, budgets, jobs) {
                Ok(ts) => ts,
                Err(e) => {
                    eprintln!("error: {e}");
                    return budget_exit(&e);
                }
            };
            if ts.truncated {
                eprintln!("error: exploration budget exceeded");
                return EXIT_BUDGET;
            }
            match c.format {
                Format::Json => {
                    emit_json(&report::stats_json(&ts));
                }
                _ => print!("{}", report::dot(&program, &ts)),
            }
            EXIT_OK
        }
        Command::BisimCheck { common, bound } => {
            let ts = match explore(&program, budgets, jobs) {
                Ok(ts) => ts,
                Err(e) => {
                    eprintln!("error: {e}");
                    return budget_exit(&e);
                }
            };
            if ts.truncated {
                eprintln!("error: exploration budget exceeded");
                return EXIT_BUDGET;
            }
            let max_configs = budgets.max_nodes;
            let bisim = match bisim_validate(&program, &ts, *bound, max_configs) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return budget_exit(&e);
                }
            };
            match common.format {
                Format::Json => emit_json(&report::bisim_json(&bisim, &ts)),
                _ => {
                    println!(
                        "configurations checked: {} (bound {bound}{})",
                        bisim.configs_checked,
                        if bisim.truncated { ", truncated" } else { "" }
                    );
                    if bisim.mismatches.is_empty() {
                        println!("no mismatches");
                    } else {
                        println!("mismatches:");
                        for m in &bisim.mismatches {
                            println!("  {}", m.description);
                        }
                    }
                }
            }
            EXIT_OK
        }
    }
}
