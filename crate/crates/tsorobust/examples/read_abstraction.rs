//! Replace reads by havoc instructions whose predicate is weaker than
//! equality, validate the weakening by enumeration, and check that the
//! abstracted program over-approximates the original under both models.
//!
//!     cargo run -p tsorobust --example read_abstraction

use tsorobust::abstraction::{
    apply_abstraction, check_abstraction_soundness, parse_spec_flag, validate_weakening,
    AbstractionSpec,
};
use tsorobust::corpus;
use tsorobust::explore::Bounds;
use tsorobust::mover::check_write_atomicity;
use tsorobust::robust::{reachable_valuations, MemModel};

fn main() {
    let wsq = corpus::load("wsq.prog");

    // The file annotates the head read with its abstraction.
    let spec = AbstractionSpec::from_annotation(&wsq.annotations[0]);
    validate_weakening(&wsq, &spec).expect("h <= H is weaker than h == H");
    println!("weakening h <= H validated over the whole domain");

    // Predicates that are not weaker than equality are rejected.
    let bad = parse_spec_flag(&wsq, "owner:t1:h == H + 1").unwrap();
    println!(
        "h == H + 1 rejected: {}",
        validate_weakening(&wsq, &bad).unwrap_err()
    );

    let wsq_abs = apply_abstraction(&wsq, &[spec]).expect("rewrite applies");
    println!(
        "\nrewritten read: {}",
        tsorobust::lang::printer::instruction_text(
            &wsq_abs,
            &wsq_abs
                .instr(wsq_abs.instructions_of("owner.t1").unwrap()[0])
                .op
        )
    );

    // Soundness: the abstraction only adds behaviors.
    let bounds = Bounds::new(19, 2);
    for model in [MemModel::Sc, MemModel::Tso] {
        let sound = check_abstraction_soundness(&wsq, &wsq_abs, model, bounds);
        let a = reachable_valuations(&wsq, model, bounds).set.len();
        let b = reachable_valuations(&wsq_abs, model, bounds).set.len();
        println!("{model}: {a} valuations grow to {b}, subset: {sound}");
    }

    // And the abstracted queue passes the write-atomicity check.
    let report = check_write_atomicity(&wsq_abs, 19, 1);
    println!(
        "\nabstracted queue write-atomic: {} (exhaustive: {}); robustness certified",
        report.program_atomic, report.exhaustive
    );

    // The handshake program needs the abstraction only to become provable;
    // its SC behaviors do not change at all.
    let fig6 = corpus::load("fig6.prog");
    let fig6_abs = corpus::load("fig6_abs.prog");
    let a = reachable_valuations(&fig6, MemModel::Sc, Bounds::new(12, 2));
    let b = reachable_valuations(&fig6_abs, MemModel::Sc, Bounds::new(12, 2));
    println!(
        "\nhandshake: SC valuations identical after abstraction: {}",
        a.set == b.set
    );
}
