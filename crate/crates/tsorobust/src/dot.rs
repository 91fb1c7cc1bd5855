//! Graphviz export of traces. Edges carry their relation name; for acyclic
//! traces the happens-before union is transitively reduced first, which is a
//! display choice only; equality and acyclicity always use the full edge
//! sets.

use std::fmt::Write;

use crate::lang::Program;
use crate::trace::{hb_acyclic, NodeId, NodeKind, Trace};

fn node_label(p: &Program, t: &Trace, id: NodeId) -> String {
    let thread = p.thread_name(crate::lang::Tid(id.tid));
    match t.node(id).kind {
        NodeKind::Write { var, val } => format!("{thread}:wr {}={val}", p.var_name(var)),
        NodeKind::Read { var, val } => format!("{thread}:rd {}={val}", p.var_name(var)),
        NodeKind::Havoc { var, pred } => format!(
            "{thread}:hvc {}={}",
            p.var_name(var),
            pred.render(&p.domain)
        ),
    }
}

pub fn trace_to_dot(p: &Program, t: &Trace) -> String {
    let ids: Vec<NodeId> = t.node_ids().collect();
    let index = |id: NodeId| ids.iter().position(|x| *x == id).unwrap();
    let n = ids.len();

    // Labeled edge list, po first.
    let mut edges: Vec<(NodeId, NodeId, &'static str)> = Vec::new();
    edges.extend(t.po_edges().map(|(a, b)| (a, b, "po")));
    edges.extend(t.so.iter().map(|&(a, b)| (a, b, "so")));
    edges.extend(t.rf.iter().map(|&(a, b)| (a, b, "rf")));
    edges.extend(t.fr.iter().map(|&(a, b)| (a, b, "fr")));

    // Transitive reduction for readability (acyclic traces only): drop an
    // edge when a longer path already implies the ordering.
    if hb_acyclic(t) && n <= 64 {
        let mut adj = vec![0u64; n];
        for &(a, b, _) in &edges {
            adj[index(a)] |= 1u64 << index(b);
        }
        // reach[i] = nodes reachable from i in >= 1 step.
        let mut reach = adj.clone();
        for _ in 0..n {
            for i in 0..n {
                let mut acc = reach[i];
                let mut next = reach[i];
                while next != 0 {
                    let j = next.trailing_zeros() as usize;
                    next &= next - 1;
                    acc |= reach[j];
                }
                reach[i] = acc;
            }
        }
        edges.retain(|&(a, b, _)| {
            let (ia, ib) = (index(a), index(b));
            // Keep unless some other successor of a already reaches b.
            let mut succ = adj[ia] & !(1u64 << ib);
            while succ != 0 {
                let j = succ.trailing_zeros() as usize;
                succ &= succ - 1;
                if reach[j] & (1u64 << ib) != 0 || j == ib {
                    return false;
                }
            }
            true
        });
    }

    let mut out = String::new();
    out.push_str("digraph trace {\n  rankdir=TB;\n  node [shape=box, fontname=\"monospace\"];\n");
    for &id in &ids {
        let _ = writeln!(
            out,
            "  n{}_{} [label=\"{}\"];",
            id.tid,
            id.pos,
            node_label(p, t, id)
        );
    }
    for (a, b, rel) in edges {
        let _ = writeln!(
            out,
            "  n{}_{} -> n{}_{} [label=\"{rel}\"];",
            a.tid, a.pos, b.tid, b.pos
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;
    use crate::sc::sc_executions;
    use crate::trace::{build_trace, TraceVariant};

    #[test]
    fn dot_output_names_relations() {
        let p = parse_program(
            "program d vars x;
             thread a regs; init l0; begin l0: x := 1; goto fin; end
             thread b regs r; init m0; begin m0: r := x; goto fin; end",
        )
        .unwrap();
        let (execs, _) = sc_executions(&p, 4);
        let e = execs
            .iter()
            .find(|e| {
                e.len() == 3 && matches!(e.steps[0].kind, crate::exec::ActionKind::Isu { .. })
            })
            .unwrap();
        let tr = build_trace(&p, &e.steps, TraceVariant::Extended);
        let dot = trace_to_dot(&p, &tr);
        assert!(dot.contains("a:wr x=1"));
        assert!(dot.contains("b:rd x=1"));
        assert!(dot.contains("label=\"rf\""));
    }
}
