//! Classify every instruction of the fenced store-buffering program as a
//! left/right mover by exhaustively swapping adjacent actions of SC
//! executions.
//!
//!     cargo run -p tsorobust --example mover_analysis

use tsorobust::corpus;
use tsorobust::lang::printer::instruction_text;
use tsorobust::mover::classify_movers;

fn main() {
    let p = corpus::load("sb.prog");
    let report = classify_movers(&p, 12, 1);
    println!(
        "mover classification over all SC executions (exhaustive: {}):\n",
        report.exhaustive
    );
    for class in &report.classes {
        let d = p.instr(class.instr);
        println!(
            "  {:<10} {:<12} -> {}",
            p.instr_display(class.instr),
            instruction_text(&p, &d.op),
            class.kind()
        );
        if let Some(w) = &class.right_witness {
            println!(
                "      does not move right past: {}",
                w.execution.steps[tsorobust::mover::units_of(&w.execution.steps)[w.unit + 1].start]
                    .render(&p)
            );
        }
        if let Some(w) = &class.left_witness {
            println!(
                "      does not move left past:  {}",
                w.execution.steps[tsorobust::mover::units_of(&w.execution.steps)[w.unit - 1].start]
                    .render(&p)
            );
        }
    }
    println!(
        "\nthe writes are not left movers (the other thread's read of the same\n\
         variable would change), but every read before a fence moves right,\n\
         which is what the write-atomicity check needs."
    );
}
