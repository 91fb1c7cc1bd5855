//! Enumerate the executions of the message-passing program under both
//! memory models and show a TSO execution whose commits lag behind.
//!
//!     cargo run -p tsorobust --example sc_vs_tso

use tsorobust::exec::ActionKind;
use tsorobust::{corpus, sc_executions, tso_executions};

fn main() {
    let p = corpus::load("mp.prog");

    let (sc, sc_stats) = sc_executions(&p, 12);
    let (tso, tso_stats) = tso_executions(&p, 12, 2);
    println!(
        "SC executions up to 12 steps:  {} (truncated: {})",
        sc.len(),
        sc_stats.truncated
    );
    println!(
        "TSO executions up to 12 steps: {} (truncated: {})",
        tso.len(),
        tso_stats.truncated
    );

    // Every SC execution is also a TSO execution; the extra TSO ones buffer
    // writes. Find one where send issues both writes before anything
    // commits while recv still reads the flag as 0.
    let delayed = tso
        .iter()
        .find(|e| {
            let first_com = e
                .steps
                .iter()
                .position(|s| matches!(s.kind, ActionKind::Com { .. }));
            let second_isu = e
                .steps
                .iter()
                .enumerate()
                .filter(|(_, s)| matches!(s.kind, ActionKind::Isu { .. }))
                .nth(1)
                .map(|(i, _)| i);
            match (second_isu, first_com) {
                (Some(i), Some(c)) => {
                    i < c
                        && e.steps
                            .iter()
                            .any(|s| matches!(s.kind, ActionKind::Rd { val: 0, .. }))
                }
                _ => false,
            }
        })
        .expect("a doubly delayed execution exists");

    println!("\na TSO execution with both writes delayed:");
    for line in delayed.render(&p) {
        println!("  {line}");
    }
    println!(
        "\nis it SC-shaped (commit right after each issue)? {}",
        delayed.is_sc_shaped()
    );

    let sc_shaped = tso.iter().filter(|e| e.is_sc_shaped()).count();
    println!("TSO executions that are SC executions verbatim: {sc_shaped}");
}
