//! Typeclass resolution over first-order terms.
//!
//! Two engines share one term language and one instance database:
//!
//! * [`sld`]: classical depth-first resolution, exponential on diamonds and
//!   divergent on cycles;
//! * [`tabled`]: tabled resolution with a table of α-normalized subgoals,
//!   generator and consumer nodes, and persistent environments.
//!
//! [`harness`] holds the command line and the benchmark families.

pub mod engine;
pub mod harness;
pub mod program;
pub mod replay;
pub mod sld;
pub mod tabled;
pub mod term;
pub mod unify;

pub use engine::{
    Answer, Engine, InstanceOrder, Mode, NodeId, Outcome, RunLimits, RunStats, SolveOptions,
    TableView, TraceEvent, Verdict,
};
pub use program::{parse_program, Instance, ParseError, Program, Query};
pub use term::{alpha_normalize, MetaAllocator, MetaId, MetaKind, NormalizedTerm, Symbol, Term};
pub use unify::{unify, Env, UnifyError};
