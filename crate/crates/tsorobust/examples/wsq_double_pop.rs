//! The work-stealing queue removes its last element twice under TSO: the
//! owner's tail update stays buffered while the stealer still sees the old
//! tail. The final shared valuation is unreachable under SC.
//!
//!     cargo run -p tsorobust --example wsq_double_pop

use std::collections::HashSet;

use tsorobust::corpus;
use tsorobust::exec::{ActionKind, Execution};
use tsorobust::explore::Bounds;
use tsorobust::robust::{
    check_robustness, find_violation_where, reachable_valuations, render_valuation, MemModel,
};
use tsorobust::trace::TraceVariant;

fn main() {
    let p = corpus::load("wsq.prog");
    let bounds = Bounds::new(19, 2);

    let verdict = check_robustness(&p, bounds, TraceVariant::Extended, 1);
    println!("robustness: {:?}\n", verdict.status);

    // Dig out the execution where both threads take the element in slot 1.
    let items1 = p.shared.iter().position(|n| n == "items_1").unwrap() as u16;
    let witness = find_violation_where(&p, bounds, TraceVariant::Extended, &|e: &Execution| {
        let readers: HashSet<u16> = e
            .steps
            .iter()
            .filter(|s| matches!(s.kind, ActionKind::Rd { var, val: 2 } if var.0 == items1))
            .map(|s| s.tid.0)
            .collect();
        readers.len() == 2
    })
    .expect("the double removal is reachable within bounds");

    println!("double removal ({} actions):", witness.len());
    for line in witness.render(&p) {
        println!("  {line}");
    }
    println!(
        "\nboth owner and stealer read items_1=2; the element was taken twice.\n\
         Note the owner's (owner,com,T,1) draining only at the end: the stealer's\n\
         (stealer,rd,T,2) observed the stale tail."
    );

    // The same effect, state-wise: TSO reaches a shared valuation SC cannot.
    let sc = reachable_valuations(&p, MemModel::Sc, bounds);
    let tso = reachable_valuations(&p, MemModel::Tso, bounds);
    println!(
        "\nreachable shared valuations: SC {} vs TSO {}",
        sc.set.len(),
        tso.set.len()
    );
    for v in tso.set.difference(&sc.set) {
        println!("  TSO-only: {}", render_valuation(&p, v));
    }
}
