//! Robustness analyses for concurrent programs under TSO store buffers.
//!
//! The crate parses a small goto language over finite-domain shared
//! variables, executes it under both sequential consistency and TSO
//! (per-thread FIFO store buffers), builds happens-before traces, and
//! decides robustness three ways: direct trace comparison against SC,
//! happens-before acyclicity, and a sound mover-based write-atomicity
//! check. Non-robust programs can be relaxed by replacing reads with
//! predicate-constrained havoc instructions.
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! - **`parse_program`**: the input language, validation, canonical printing
//! - **`sc_vs_tso`**: enumerate executions under both memory models
//! - **`store_buffer_basics`**: issue/commit, buffer forwarding, fences
//! - **`robustness_check`**: trace robustness with witnesses
//! - **`wsq_double_pop`**: a work-stealing queue losing an element under TSO
//! - **`mover_analysis`**: left/right mover classification
//! - **`write_atomicity`**: the sound robustness check via movers
//! - **`read_abstraction`**: havoc rewriting and its soundness checks
//! - **`trace_dot`**: Graphviz export of a trace
//!
//! ```bash
//! cargo run -p tsorobust --example robustness_check
//! cargo run -p tsorobust --example wsq_double_pop
//! ```
//!
//! The `tsorobust` binary exposes the same analyses as subcommands
//! (`parse`, `explore`, `robust`, `atomic`, `abstract`, `compare-states`,
//! `trace-dot`); see the repository README.

pub mod abstraction;
pub mod cli;
pub mod corpus;
pub mod dot;
pub mod exec;
pub mod explore;
pub mod lang;
pub mod mover;
pub mod report;
pub mod robust;
pub mod sc;
pub mod trace;
pub mod tso;
pub mod violation;

pub use exec::{ActionKind, Execution, ReadSrc, Step, WriteRef};
pub use explore::{Bounds, ExploreStats, Visit};
pub use lang::{parse_program, print_program, Program};
pub use mover::{
    buffer_free_reachable, check_write_atomicity, classify_movers, moves_left, moves_right,
    AtomicityReport, MoverClass,
};
pub use robust::{
    check_robustness, reachable_valuations, MemModel, RobustStatus, RobustnessVerdict,
};
pub use sc::{sc_enabled, sc_executions, sc_initial, ScState};
pub use trace::{build_trace, hb_acyclic, Trace, TraceVariant};
pub use tso::{tso_enabled, tso_executions, tso_initial, TsoState};
pub use violation::{find_minimal_violation, MinimalViolation};
