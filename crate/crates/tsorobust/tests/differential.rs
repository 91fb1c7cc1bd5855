//! Differential tests on randomly generated programs: the production
//! algorithms against brute-force oracles at equal bounds.
//!
//! - The robustness checker (acyclicity prefilter + guided SC match search)
//!   against literal enumeration of all SC traces.
//! - The streamed executions against step-by-step re-execution through the
//!   one-step `enabled` interfaces.
//! - A found minimal violation against the robustness verdict (a shaped
//!   violation always refutes robustness).

use std::collections::HashSet;

use proptest::prelude::*;

use tsorobust::exec::Execution;
use tsorobust::explore::{Bounds, Visit};
use tsorobust::lang::{parse_program, Program};
use tsorobust::robust::{check_robustness, RobustStatus};
use tsorobust::trace::{build_trace, CanonicalTrace, TraceVariant};
use tsorobust::violation::find_minimal_violation;
use tsorobust::{sc_executions, tso_executions};

/// Two-thread programs over one or two variables with writes, reads, cas,
/// fences, assumes and havocs; every name is valid by construction.
fn arb_program() -> impl Strategy<Value = Program> {
    let instr = |t: usize, vars: usize| {
        let reg = move |r: usize| format!("q{t}{}", ["a", "b"][r]);
        prop_oneof![
            4 => (0..vars, 0i64..3).prop_map(move |(v, c)| format!("x{v} := {c}")),
            4 => (0..2usize, 0..vars).prop_map(move |(r, v)| format!("{} := x{v}", reg(r))),
            1 => (0..2usize, 0i64..3).prop_map(move |(r, c)| format!("{} := {c}", reg(r))),
            1 => Just("fence".to_string()),
            1 => (0..2usize, 0..vars, 0i64..2, 0i64..3)
                .prop_map(move |(r, v, a, b)| format!("{} := cas(x{v}, {a}, {b})", reg(r))),
            1 => (0..2usize, 0i64..2).prop_map(move |(r, c)| format!("assume {} >= {c}", reg(r))),
            1 => (0..2usize, 0..vars)
                .prop_map(move |(r, v)| format!("havoc({r}, {r} <= x{v})", r = reg(r))),
        ]
    };
    (2usize..=2).prop_flat_map(move |vars| {
        let thread = move |t: usize| {
            proptest::collection::vec((instr(t, vars), 0usize..8), 2..5).prop_map(move |body| {
                let mut s = format!("thread t{t}\n  regs q{t}a q{t}b;\n  init t{t}l0;\n  begin\n");
                for (i, (inst, goto)) in body.iter().enumerate() {
                    // Mostly straight-line so conflicts actually form within
                    // small step bounds; occasional jumps for loops/skips.
                    let target = if *goto < 6 { i + 1 } else { goto - 6 };
                    s.push_str(&format!("    t{t}l{i}: {inst}; goto t{t}l{target};\n"));
                }
                s.push_str("  end\n");
                s
            })
        };
        (thread(0), thread(1)).prop_map(move |(t0, t1)| {
            let mut s = String::from("program rand\ndomain 0..3;\nvars");
            for v in 0..vars {
                s.push_str(&format!(" x{v}"));
            }
            s.push_str(";\n");
            s.push_str(&t0);
            s.push_str(&t1);
            parse_program(&s).expect("generated program is well-formed")
        })
    })
}

/// Brute-force robustness at equal bounds: every TSO execution must have
/// its canonical trace in the set of all SC traces.
fn brute_force_robust(p: &Program, bounds: Bounds, variant: TraceVariant) -> bool {
    let mut sc_traces: HashSet<CanonicalTrace> = HashSet::new();
    tsorobust::sc::for_each_sc_execution(p, bounds.max_steps, &mut |steps, _| {
        sc_traces.insert(build_trace(p, steps, variant).canonical());
        Visit::Continue
    });
    let mut robust = true;
    tsorobust::tso::for_each_tso_execution(p, bounds, &mut |steps, _| {
        if !sc_traces.contains(&build_trace(p, steps, variant).canonical()) {
            robust = false;
            return Visit::Stop;
        }
        Visit::Continue
    });
    robust
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn robustness_checker_agrees_with_brute_force(p in arb_program()) {
        let bounds = Bounds::new(8, 2);
        for variant in [TraceVariant::Standard, TraceVariant::Extended] {
            let verdict = check_robustness(&p, bounds, variant, 1);
            let oracle = brute_force_robust(&p, bounds, variant);
            prop_assert_eq!(
                verdict.status == RobustStatus::Robust,
                oracle,
                "variant {} on\n{}",
                variant,
                tsorobust::print_program(&p)
            );
            // A witness, when present, must itself be refuted by the oracle.
            if let Some(w) = &verdict.witness {
                let tr = build_trace(&p, &w.steps, variant);
                let mut matched = false;
                tsorobust::sc::for_each_sc_execution(&p, bounds.max_steps, &mut |steps, _| {
                    if build_trace(&p, steps, variant).equal(&tr) == Ok(true) {
                        matched = true;
                        return Visit::Stop;
                    }
                    Visit::Continue
                });
                prop_assert!(!matched, "witness has an SC twin after all");
            }
        }
    }

    #[test]
    fn streamed_executions_replay_through_enabled(p in arb_program()) {
        let bounds = Bounds::new(8, 2);
        let (execs, _) = tso_executions(&p, bounds.max_steps, bounds.buf_cap);
        for e in &execs {
            replay_via_enabled(&p, e, bounds.buf_cap);
        }
        let (sc_execs, _) = sc_executions(&p, bounds.max_steps);
        for e in &sc_execs {
            replay_sc_via_enabled(&p, e);
        }
    }

    #[test]
    fn shaped_violation_refutes_robustness(p in arb_program()) {
        let bounds = Bounds::new(8, 2);
        if let Some(v) = find_minimal_violation(&p, bounds) {
            // The shaped execution is a genuine TSO execution and its
            // standard trace has no SC twin at the same bound.
            replay_via_enabled(&p, &v.execution, bounds.buf_cap);
            let tr = build_trace(&p, &v.execution.steps, TraceVariant::Standard);
            prop_assert!(
                !tsorobust::hb_acyclic(&tr),
                "a shaped violation closes a happens-before cycle:\n{}",
                tsorobust::print_program(&p)
            );
            let verdict = check_robustness(&p, Bounds::new(
                bounds.max_steps.max(v.execution.len() as u32), bounds.buf_cap,
            ), TraceVariant::Standard, 1);
            prop_assert_eq!(verdict.status, RobustStatus::NotRobust);
        }
    }
}

/// Re-execute a streamed TSO execution one packet at a time through
/// `tso_enabled`, asserting each emitted action block matches an enabled
/// successor and the walk consumes the whole execution.
fn replay_via_enabled(p: &Program, e: &Execution, buf_cap: u32) {
    let mut state = tsorobust::tso_initial(p);
    let mut at = 0;
    while at < e.steps.len() {
        let succs = tsorobust::tso_enabled(p, &state, buf_cap);
        let mut advanced = false;
        for (steps, next) in succs {
            let n = steps.len();
            if at + n <= e.steps.len()
                && steps
                    .iter()
                    .zip(&e.steps[at..at + n])
                    .all(|(a, b)| a.tid == b.tid && a.kind == b.kind)
            {
                state = next;
                at += n;
                advanced = true;
                break;
            }
        }
        assert!(
            advanced,
            "step {at} of {} not enabled: {}",
            e.len(),
            e.render_line(p)
        );
    }
    assert!(
        state.buffers_empty(),
        "yielded execution must drain buffers"
    );
}

fn replay_sc_via_enabled(p: &Program, e: &Execution) {
    let mut state = tsorobust::sc_initial(p);
    let mut at = 0;
    while at < e.steps.len() {
        let succs = tsorobust::sc_enabled(p, &state);
        let mut advanced = false;
        for (steps, next) in succs {
            let n = steps.len();
            if at + n <= e.steps.len()
                && steps
                    .iter()
                    .zip(&e.steps[at..at + n])
                    .all(|(a, b)| a.tid == b.tid && a.kind == b.kind)
            {
                state = next;
                at += n;
                advanced = true;
                break;
            }
        }
        assert!(
            advanced,
            "SC step {at} of {} not enabled: {}",
            e.len(),
            e.render_line(p)
        );
    }
}

/// Minimal-violation agreement over a fixed corpus of generated programs
/// (deterministic seed, so this is a regression corpus rather than a random
/// sample): the robustness verdict and the shaped-violation search agree at
/// equal bounds on every one of them.
#[test]
fn minimal_violation_agreement_on_generated_corpus() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    let mut runner = TestRunner::deterministic();
    let strat = arb_program();
    let bounds = Bounds::new(9, 2);
    let mut nonrobust = 0;
    for i in 0..400 {
        let p = strat.new_tree(&mut runner).unwrap().current();
        let robust =
            check_robustness(&p, bounds, TraceVariant::Standard, 1).status == RobustStatus::Robust;
        let violation = find_minimal_violation(&p, bounds);
        if !robust {
            nonrobust += 1;
        }
        assert_eq!(
            robust,
            violation.is_none(),
            "case {i} disagrees:\n{}",
            tsorobust::print_program(&p)
        );
    }
    assert!(nonrobust > 0, "the corpus must exercise the violating side");
}

/// The incremental mover sweep against the standalone swap test: classify
/// every instruction by brute force over all executions and all adjacent
/// cross-thread pairs, then compare with `classify_movers`.
#[test]
fn mover_classification_agrees_with_pairwise_brute_force() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    use tsorobust::mover::{classify_movers, moves_right, units_of};
    use tsorobust::sc_executions;

    let mut runner = TestRunner::deterministic();
    let strat = arb_program();
    let max_steps = 8;
    let mut refuted_somewhere = false;
    for case in 0..150 {
        let p = strat.new_tree(&mut runner).unwrap().current();
        let n = p.instrs.len();
        let mut right_ok = vec![true; n];
        let mut left_ok = vec![true; n];
        let (execs, _) = sc_executions(&p, max_steps);
        for e in &execs {
            let units = units_of(&e.steps);
            for i in 0..units.len().saturating_sub(1) {
                if units[i].tid == units[i + 1].tid {
                    continue;
                }
                if !moves_right(&p, e, i) {
                    right_ok[units[i].instr.0 as usize] = false;
                    left_ok[units[i + 1].instr.0 as usize] = false;
                }
            }
        }
        let report = classify_movers(&p, max_steps, 1);
        for (i, class) in report.classes.iter().enumerate() {
            assert_eq!(
                (class.right_mover, class.left_mover),
                (right_ok[i], left_ok[i]),
                "case {case}, instruction {}:\n{}",
                p.instr_display(class.instr),
                tsorobust::print_program(&p)
            );
            refuted_somewhere |= !class.right_mover || !class.left_mover;
        }
    }
    assert!(refuted_somewhere, "the corpus must refute some movers");
}

/// The reachability walk against the definition spelled out over whole
/// executions: occurrences of the write and the read with no same-thread
/// fence and no same-thread write to the read's variable strictly between.
#[test]
fn buffer_free_reachability_agrees_with_literal_scan() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::TestRunner;
    use tsorobust::exec::ActionKind;
    use tsorobust::lang::InstrId;
    use tsorobust::mover::{buffer_free_reachable, units_of};
    use tsorobust::sc_executions;

    let mut runner = TestRunner::deterministic();
    let strat = arb_program();
    let max_steps = 8;
    let mut reached_somewhere = false;
    for case in 0..120 {
        let p = strat.new_tree(&mut runner).unwrap().current();
        let mut oracle: HashSet<(InstrId, InstrId)> = HashSet::new();
        let (execs, _) = sc_executions(&p, max_steps);
        for e in &execs {
            let units = units_of(&e.steps);
            for j in 0..units.len() {
                let rstep = &e.steps[units[j].start];
                if !p.instr(rstep.instr).op.is_read_like() {
                    continue;
                }
                let rvar = match rstep.kind {
                    ActionKind::Rd { var, .. } | ActionKind::Hvc { var, .. } => var,
                    _ => continue,
                };
                for i in (0..j).rev() {
                    if units[i].tid != units[j].tid {
                        continue;
                    }
                    let istep = &e.steps[units[i].start];
                    if matches!(p.instr(istep.instr).op, tsorobust::lang::Instruction::Fence) {
                        break;
                    }
                    if let ActionKind::Isu { var, .. } = istep.kind {
                        if var == rvar {
                            break;
                        }
                        if p.instr(istep.instr).op.is_write() {
                            oracle.insert((istep.instr, rstep.instr));
                        }
                    }
                }
            }
        }
        for (wi, wd) in p.instrs.iter().enumerate() {
            if !wd.op.is_write() {
                continue;
            }
            for (ri, rd) in p.instrs.iter().enumerate() {
                if rd.tid != wd.tid || !rd.op.is_read_like() {
                    continue;
                }
                let (w, r) = (InstrId(wi as u32), InstrId(ri as u32));
                let got = buffer_free_reachable(&p, w, r, max_steps);
                let want = oracle.contains(&(w, r));
                assert_eq!(
                    got,
                    want,
                    "case {case}: {} -> {}:\n{}",
                    p.instr_display(w),
                    p.instr_display(r),
                    tsorobust::print_program(&p)
                );
                reached_somewhere |= want;
            }
        }
    }
    assert!(reached_somewhere, "the corpus must exhibit reachable pairs");
}
