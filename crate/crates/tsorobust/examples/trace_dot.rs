//! Export a trace as Graphviz DOT. Pipe into `dot -Tpng` to render.
//!
//!     cargo run -p tsorobust --example trace_dot

use tsorobust::corpus;
use tsorobust::dot::trace_to_dot;
use tsorobust::exec::ActionKind;
use tsorobust::trace::{build_trace, TraceVariant};
use tsorobust::tso_executions;

fn main() {
    let p = corpus::load("mp.prog");

    // Pick a complete message-passing run: recv sees the flag flip and
    // reads the payload.
    let (execs, _) = tso_executions(&p, 14, 2);
    let e = execs
        .iter()
        .filter(|e| {
            e.steps
                .iter()
                .any(|s| matches!(s.kind, ActionKind::Rd { var, val: 2 } if p.var_name(var) == "y"))
        })
        .max_by_key(|e| e.len())
        .expect("a complete run exists");

    eprintln!("execution: {}", e.render_line(&p));
    let trace = build_trace(&p, &e.steps, TraceVariant::Extended);
    eprintln!(
        "{} nodes, {} so, {} rf, {} fr edges (transitively reduced for display)",
        trace.n_nodes(),
        trace.so.len(),
        trace.rf.len(),
        trace.fr.len()
    );
    print!("{}", trace_to_dot(&p, &trace));
}
