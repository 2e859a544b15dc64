//! Verification of uninterpreted programs.
//!
//! Programs whose only operations are uninterpreted function applications
//! and (dis)equality tests induce infinite symbolic state spaces, but every
//! configuration can be canonicalized to a depth-1 formula over the
//! variables' initial constants. For coherent programs the canonicalized
//! system is a finite bisimilar image of the concrete one, which makes
//! reachability decidable and yields inductive per-location invariants.
//!
//! Crate layout:
//! - [`euf`]: interned ground terms, congruence closure, a rule-based
//!   closure oracle used by the test suites;
//! - [`basis`]: the depth-1 factored form of a conjunction and its
//!   canonical helper-constant renaming;
//! - [`cover`]: constant elimination into literals plus Horn clauses, and
//!   equivalence of the covered forms;
//! - [`upl`]: program syntax, parser and small-step symbolic execution;
//! - [`abstraction`]: configuration canonicalization;
//! - [`explorer`]: the finite transition system, reachability, invariant
//!   extraction, coherence checking and bisimulation validation;
//! - [`cli`] and [`report`]: the command-line front end and its output
//!   formats.

pub mod abstraction;
pub mod basis;
pub mod cli;
pub mod cover;
pub mod euf;
pub mod explorer;
pub mod report;
pub mod upl;
