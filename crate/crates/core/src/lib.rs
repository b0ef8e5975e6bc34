//! Forward state-space planning for numeric tasks.
//!
//! The crate is organized as a pipeline:
//!
//! * [`frontend`] parses a PDDL subset (typed STRIPS plus numeric fluents) and
//!   grounds it into a [`model::NumericTask`];
//! * [`lnf`] folds task constants and rewrites the task into linear normal
//!   form, introducing inverted variables where a variable is used negatively;
//! * [`relaxation`] holds the relaxed transition function and the
//!   polynomial relaxed-solvability deciders;
//! * [`rpg`] builds relaxed planning graphs and extracts relaxed plans;
//! * [`search`] contains the heuristic, enforced hill-climbing, best-first
//!   search and the cost-optimizing weighted A*;
//! * [`validate`] replays plans under real and relaxed semantics.
//!
//! [`gen`] produces solvable benchmark instances together with witness plans.

pub mod frontend;
pub mod gen;
pub mod lnf;
pub mod model;
pub mod plan_io;
pub mod rational;
pub mod relaxation;
pub mod rpg;
pub mod search;
pub mod validate;

pub use lnf::{LnfTask, PipelineError};
pub use model::{ActionId, NumericTask, Plan, PropId, State, VarId};
pub use rational::{ExtRational, Rational};
pub use search::{solve, Mode, SearchConfig, SolveOutcome};
