//! Interpreter conformance suite: one targeted check per transition rule,
//! each asserting the exact action labels emitted and the successor state.
//! The final test runs the whole table and is the acceptance gate for the
//! interpreter (at least 30 single-rule checks, all green).

use tsorobust::exec::{ActionKind, Step};
use tsorobust::lang::{parse_program, Program, Tid, VarId};
use tsorobust::sc::{sc_enabled, sc_initial};
use tsorobust::tso::{tso_enabled, tso_initial, BufEntry, TsoState};
use tsorobust::{sc_executions, tso_executions, WriteRef};

type Check = fn() -> Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn prog(text: &str) -> Program {
    parse_program(text).expect("test program parses")
}

fn loc(p: &Program, name: &str) -> usize {
    if let Some(i) = p.shared.iter().position(|n| n == name) {
        return i;
    }
    p.shared.len()
        + p.regs
            .iter()
            .position(|(_, n)| n == name)
            .unwrap_or_else(|| panic!("no location named {name}"))
}

fn var(p: &Program, name: &str) -> VarId {
    VarId(p.shared.iter().position(|n| n == name).expect("shared var") as u16)
}

/// Build a TSO state: per-thread pc labels, memory values by name, buffer
/// contents by (variable, value).
fn state(p: &Program, pcs: &[&str], mem: &[(&str, i64)], bufs: &[&[(&str, i64)]]) -> TsoState {
    let mut s = tso_initial(p);
    for (ti, label) in pcs.iter().enumerate() {
        s.pc[ti] = p.threads[ti].label_named(label).expect("label");
    }
    for (name, v) in mem {
        s.mem[loc(p, name)] = *v;
    }
    for (ti, entries) in bufs.iter().enumerate() {
        for (k, (name, v)) in entries.iter().enumerate() {
            s.buf[ti].push_back(BufEntry {
                var: var(p, name),
                val: *v,
                instr: p.threads[ti].labels[0]
                    .instrs
                    .first()
                    .copied()
                    .unwrap_or(tsorobust::lang::InstrId(0)),
                wref: WriteRef {
                    tid: Tid(ti as u16),
                    k: k as u32,
                },
            });
        }
    }
    s
}

fn rendered(p: &Program, steps: &[Step]) -> Vec<String> {
    steps.iter().map(|s| s.render(p)).collect()
}

fn buf_proj(p: &Program, s: &TsoState, t: usize) -> Vec<(String, i64)> {
    s.buf[t]
        .iter()
        .map(|e| (p.var_name(e.var).to_string(), e.val))
        .collect()
}

fn pc_name(p: &Program, s: &TsoState, t: usize) -> String {
    p.threads[t].labels[s.pc[t].0 as usize].name.clone()
}

// ---------------------------------------------------------------------------
// TSO rules
// ---------------------------------------------------------------------------

fn issue_appends_and_advances() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs a; init l0;
         begin l0: x := a + 1; goto l1; l1: skip; goto l1; end",
    );
    let s = state(&p, &["l0"], &[("a", 1)], &[&[]]);
    let succs = tso_enabled(&p, &s, 4);
    ensure!(succs.len() == 1, "one successor, got {}", succs.len());
    let (steps, next) = &succs[0];
    ensure!(
        rendered(&p, steps) == ["(t,isu)"],
        "issue action, got {:?}",
        rendered(&p, steps)
    );
    ensure!(
        buf_proj(&p, next, 0) == [("x".to_string(), 2)],
        "buffered (x,2), got {:?}",
        buf_proj(&p, next, 0)
    );
    ensure!(next.mem[loc(&p, "x")] == 0, "memory untouched by issue");
    ensure!(pc_name(&p, next, 0) == "l1", "pc advances on issue");
    Ok(())
}

fn commit_pops_head_and_writes_memory() -> Result<(), String> {
    let p = prog("program m vars x y; thread t regs; init l0; begin l0: skip; goto l0; end");
    let s = state(&p, &["l0"], &[], &[&[("y", 2), ("x", 1)]]);
    let succs = tso_enabled(&p, &s, 4);
    let commit = succs
        .iter()
        .find(|(steps, _)| matches!(steps[0].kind, ActionKind::Com { .. }))
        .ok_or("no commit successor")?;
    ensure!(
        rendered(&p, &commit.0) == ["(t,com,y,2)"],
        "head commits first, got {:?}",
        rendered(&p, &commit.0)
    );
    ensure!(commit.1.mem[loc(&p, "y")] == 2, "commit writes memory");
    ensure!(
        buf_proj(&p, &commit.1, 0) == [("x".to_string(), 1)],
        "head popped"
    );
    ensure!(pc_name(&p, &commit.1, 0) == "l0", "commit leaves pc alone");
    Ok(())
}

fn commit_respects_fifo_order() -> Result<(), String> {
    let p = prog("program m vars x y; thread t regs; init l0; begin l0: skip; goto l0; end");
    let s = state(&p, &["l0"], &[], &[&[("y", 2), ("x", 1)]]);
    for (steps, _) in tso_enabled(&p, &s, 4) {
        ensure!(
            rendered(&p, &steps) != ["(t,com,x,1)"],
            "tail must not commit before head"
        );
    }
    Ok(())
}

fn local_assignment_is_tau() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs a; init l0;
         begin l0: a := 1 + 1; goto l1; l1: skip; goto l1; end",
    );
    let s = state(&p, &["l0"], &[], &[&[]]);
    let succs = tso_enabled(&p, &s, 4);
    ensure!(succs.len() == 1, "one successor");
    ensure!(rendered(&p, &succs[0].0) == ["(t,tau)"], "tau action");
    ensure!(succs[0].1.mem[loc(&p, "a")] == 2, "register updated");
    ensure!(pc_name(&p, &succs[0].1, 0) == "l1", "pc advances");
    Ok(())
}

fn read_from_memory_when_not_buffered() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs a; init l0;
         begin l0: a := x; goto l1; end",
    );
    let s = state(&p, &["l0"], &[("x", 3)], &[&[]]);
    let succs = tso_enabled(&p, &s, 4);
    ensure!(succs.len() == 1, "one successor");
    ensure!(
        rendered(&p, &succs[0].0) == ["(t,rd,x,3)"],
        "reads memory value, got {:?}",
        rendered(&p, &succs[0].0)
    );
    ensure!(succs[0].1.mem[loc(&p, "a")] == 3, "register gets value");
    Ok(())
}

fn read_from_memory_disabled_when_buffered() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs a; init l0;
         begin l0: a := x; goto l1; end",
    );
    let s = state(&p, &["l0"], &[("x", 3)], &[&[("x", 1)]]);
    let reads: Vec<_> = tso_enabled(&p, &s, 4)
        .into_iter()
        .filter(|(steps, _)| matches!(steps[0].kind, ActionKind::Rd { .. }))
        .collect();
    ensure!(reads.len() == 1, "exactly one read successor");
    ensure!(
        rendered(&p, &reads[0].0) == ["(t,rd,x,1)"],
        "memory read suppressed in favor of the buffer, got {:?}",
        rendered(&p, &reads[0].0)
    );
    Ok(())
}

fn read_forwards_latest_buffered_write() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs a; init l0;
         begin l0: a := x; goto l1; end",
    );
    let s = state(&p, &["l0"], &[], &[&[("x", 1), ("x", 2)]]);
    let reads: Vec<_> = tso_enabled(&p, &s, 4)
        .into_iter()
        .filter(|(steps, _)| matches!(steps[0].kind, ActionKind::Rd { .. }))
        .collect();
    ensure!(
        rendered(&p, &reads[0].0) == ["(t,rd,x,2)"],
        "latest buffered write forwards, got {:?}",
        rendered(&p, &reads[0].0)
    );
    Ok(())
}

fn read_forwarding_skips_other_variables() -> Result<(), String> {
    let p = prog(
        "program m vars x y; thread t regs a; init l0;
         begin l0: a := x; goto l1; end",
    );
    let s = state(&p, &["l0"], &[], &[&[("x", 1), ("y", 3)]]);
    let reads: Vec<_> = tso_enabled(&p, &s, 4)
        .into_iter()
        .filter(|(steps, _)| matches!(steps[0].kind, ActionKind::Rd { .. }))
        .collect();
    ensure!(
        rendered(&p, &reads[0].0) == ["(t,rd,x,1)"],
        "later write to another variable does not hide x, got {:?}",
        rendered(&p, &reads[0].0)
    );
    Ok(())
}

fn fence_is_tau_on_empty_buffer() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs; init l0;
         begin l0: fence; goto l1; end",
    );
    let s = state(&p, &["l0"], &[], &[&[]]);
    let succs = tso_enabled(&p, &s, 4);
    ensure!(succs.len() == 1, "one successor");
    ensure!(rendered(&p, &succs[0].0) == ["(t,tau)"], "fence is tau");
    ensure!(pc_name(&p, &succs[0].1, 0) == "l1", "pc advances");
    Ok(())
}

fn fence_blocks_on_nonempty_buffer() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs; init l0;
         begin l0: fence; goto l1; end",
    );
    let s = state(&p, &["l0"], &[], &[&[("x", 1)]]);
    for (steps, _) in tso_enabled(&p, &s, 4) {
        ensure!(
            !matches!(steps[0].kind, ActionKind::Tau),
            "fence must not fire over a nonempty buffer"
        );
    }
    Ok(())
}

fn cas_success_is_atomic_issue_commit() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs a; init l0;
         begin l0: a := cas(x, 0, 1); goto l1; end",
    );
    let s = state(&p, &["l0"], &[], &[&[]]);
    let succs = tso_enabled(&p, &s, 4);
    ensure!(succs.len() == 1, "one successor");
    ensure!(
        rendered(&p, &succs[0].0) == ["(t,isu)", "(t,com,x,1)"],
        "success emits the pair atomically, got {:?}",
        rendered(&p, &succs[0].0)
    );
    ensure!(succs[0].1.mem[loc(&p, "x")] == 1, "memory written");
    ensure!(succs[0].1.mem[loc(&p, "a")] == 1, "register set to 1");
    ensure!(succs[0].1.buf[0].is_empty(), "buffer stays empty");
    Ok(())
}

fn cas_failure_reads_current_value() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs a; init l0;
         begin l0: a := cas(x, 0, 1); goto l1; end",
    );
    let s = state(&p, &["l0"], &[("x", 2)], &[&[]]);
    let succs = tso_enabled(&p, &s, 4);
    ensure!(succs.len() == 1, "one successor");
    ensure!(
        rendered(&p, &succs[0].0) == ["(t,rd,x,2)"],
        "failure is a read of the current value, got {:?}",
        rendered(&p, &succs[0].0)
    );
    ensure!(succs[0].1.mem[loc(&p, "a")] == 0, "register set to 0");
    ensure!(succs[0].1.mem[loc(&p, "x")] == 2, "memory unchanged");
    Ok(())
}

fn cas_blocks_on_nonempty_buffer() -> Result<(), String> {
    let p = prog(
        "program m vars x y; thread t regs a; init l0;
         begin l0: a := cas(x, 0, 1); goto l1; end",
    );
    // Expected value matches and does not: blocked either way.
    for xv in [0, 2] {
        let s = state(&p, &["l0"], &[("x", xv)], &[&[("y", 1)]]);
        for (steps, _) in tso_enabled(&p, &s, 4) {
            ensure!(
                matches!(steps[0].kind, ActionKind::Com { .. }),
                "only the commit may fire while the buffer drains (x={xv})"
            );
        }
    }
    Ok(())
}

fn assume_true_is_tau() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs a; init l0;
         begin l0: assume a == 0; goto l1; end",
    );
    let s = state(&p, &["l0"], &[], &[&[]]);
    let succs = tso_enabled(&p, &s, 4);
    ensure!(
        succs.len() == 1 && rendered(&p, &succs[0].0) == ["(t,tau)"],
        "assume passes as tau"
    );
    Ok(())
}

fn assume_false_blocks() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs a; init l0;
         begin l0: assume a == 0; goto l1; end",
    );
    let s = state(&p, &["l0"], &[("a", 1)], &[&[]]);
    ensure!(
        tso_enabled(&p, &s, 4).is_empty(),
        "false assume contributes no successor"
    );
    Ok(())
}

fn havoc_enumerates_values_ascending() -> Result<(), String> {
    let p = prog(
        "program m vars H; thread t regs h; init l0;
         begin l0: havoc(h, h <= H); goto l1; end",
    );
    let s = state(&p, &["l0"], &[("H", 2)], &[&[]]);
    let succs = tso_enabled(&p, &s, 4);
    let actions: Vec<_> = succs.iter().map(|(st, _)| rendered(&p, st)).collect();
    ensure!(
        actions
            == vec![
                vec!["(t,hvc,H,{0,1,2,3})".to_string()],
                vec!["(t,hvc,H,{1,2,3})".to_string()],
                vec!["(t,hvc,H,{2,3})".to_string()],
            ],
        "three successors ascending with instantiated predicates, got {actions:?}"
    );
    let chosen: Vec<i64> = succs.iter().map(|(_, n)| n.mem[loc(&p, "h")]).collect();
    ensure!(chosen == [0, 1, 2], "register takes 0,1,2; got {chosen:?}");
    Ok(())
}

fn havoc_sees_buffer_forwarded_value() -> Result<(), String> {
    let p = prog(
        "program m vars H; thread t regs h; init l0;
         begin l0: havoc(h, h <= H); goto l1; end",
    );
    let s = state(&p, &["l0"], &[("H", 0)], &[&[("H", 1)]]);
    let succs = tso_enabled(&p, &s, 4);
    let havocs: Vec<i64> = succs
        .iter()
        .filter(|(st, _)| matches!(st[0].kind, ActionKind::Hvc { .. }))
        .map(|(_, n)| n.mem[loc(&p, "h")])
        .collect();
    ensure!(
        havocs == [0, 1],
        "the buffered H=1 is visible to the havoc, got {havocs:?}"
    );
    Ok(())
}

fn havoc_conditional_predicate_instantiation() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs r; init l0;
         begin l0: havoc(r, x != 0 ? r == x || r == 0 : r == 0); goto l1; end",
    );
    // x = 1: r may be the value of x or 0.
    let s = state(&p, &["l0"], &[("x", 1)], &[&[]]);
    let succs = tso_enabled(&p, &s, 4);
    let actions: Vec<_> = succs
        .iter()
        .map(|(st, _)| rendered(&p, st)[0].clone())
        .collect();
    ensure!(
        actions == ["(t,hvc,x,{0,1,2,3})", "(t,hvc,x,{1})"],
        "two successors r in {{0,1}} with their instantiated predicates, got {actions:?}"
    );
    // x = 0: only r = 0.
    let s0 = state(&p, &["l0"], &[], &[&[]]);
    let succs0 = tso_enabled(&p, &s0, 4);
    ensure!(succs0.len() == 1, "x=0 leaves only r=0");
    ensure!(succs0[0].1.mem[loc(&p, "r")] == 0, "r gets 0");
    Ok(())
}

fn issue_blocked_at_buffer_capacity() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs; init l0;
         begin l0: x := 1; goto l1; end",
    );
    let s = state(&p, &["l0"], &[], &[&[("x", 1)]]);
    for (steps, _) in tso_enabled(&p, &s, 1) {
        ensure!(
            !matches!(steps[0].kind, ActionKind::Isu { .. }),
            "capacity bound suppresses the issue"
        );
    }
    Ok(())
}

fn array_cell_read_resolves_register_index() -> Result<(), String> {
    let p = prog(
        "program m vars items[2]; thread t regs a i; init l0;
         begin l0: a := items[i]; goto l1; end",
    );
    let s = state(&p, &["l0"], &[("i", 1), ("items_1", 3)], &[&[]]);
    let succs = tso_enabled(&p, &s, 4);
    ensure!(
        rendered(&p, &succs[0].0) == ["(t,rd,items_1,3)"],
        "index register selects the cell, got {:?}",
        rendered(&p, &succs[0].0)
    );
    Ok(())
}

fn array_index_out_of_range_is_stuck() -> Result<(), String> {
    let p = prog(
        "program m vars items[2]; thread t regs a i; init l0;
         begin l0: i := 3; goto l1; l1: a := items[i]; goto l2; end",
    );
    let s = state(&p, &["l1"], &[("i", 3)], &[&[]]);
    ensure!(
        tso_enabled(&p, &s, 4).is_empty(),
        "out-of-range access has no successor"
    );
    let (execs, stats) = tso_executions(&p, 5, 2);
    ensure!(stats.stuck >= 1, "exploration flags the stuck access");
    ensure!(
        execs.len() == 2,
        "only the empty execution and the assignment remain, got {}",
        execs.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// SC rules
// ---------------------------------------------------------------------------

fn sc_initial_state_is_all_zero() -> Result<(), String> {
    let p = tsorobust::corpus::load("mp.prog");
    let s = sc_initial(&p);
    ensure!(
        s.mem.iter().all(|v| *v == 0),
        "shared variables and registers start at 0"
    );
    for (ti, t) in p.threads.iter().enumerate() {
        ensure!(s.pc[ti] == t.init, "thread {ti} starts at its init label");
    }
    Ok(())
}

fn sc_write_is_issue_commit_pair() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs a; init l0;
         begin l0: x := 2; goto l1; end",
    );
    let succs = sc_enabled(&p, &sc_initial(&p));
    ensure!(succs.len() == 1, "one successor");
    ensure!(
        rendered(&p, &succs[0].0) == ["(t,isu)", "(t,com,x,2)"],
        "write is the adjacent pair, got {:?}",
        rendered(&p, &succs[0].0)
    );
    ensure!(
        succs[0].1.mem[loc(&p, "x")] == 2,
        "memory written immediately"
    );
    Ok(())
}

fn sc_fence_is_always_tau() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs; init l0;
         begin l0: fence; goto l1; end",
    );
    let succs = sc_enabled(&p, &sc_initial(&p));
    ensure!(
        succs.len() == 1 && rendered(&p, &succs[0].0) == ["(t,tau)"],
        "fence has no effect under SC"
    );
    Ok(())
}

fn sc_cas_success_and_failure() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs a; init l0;
         begin l0: a := cas(x, 0, 3); goto l1; end",
    );
    let ok = sc_enabled(&p, &sc_initial(&p));
    ensure!(
        rendered(&p, &ok[0].0) == ["(t,isu)", "(t,com,x,3)"] && ok[0].1.mem[loc(&p, "a")] == 1,
        "success pair with register 1"
    );
    let mut failing = sc_initial(&p);
    failing.mem[loc(&p, "x")] = 2;
    let fail = sc_enabled(&p, &failing);
    ensure!(
        rendered(&p, &fail[0].0) == ["(t,rd,x,2)"] && fail[0].1.mem[loc(&p, "a")] == 0,
        "failure reads and returns 0"
    );
    Ok(())
}

fn sc_assume_blocks_when_false() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs a; init l0;
         begin l0: assume a != 0; goto l1; end",
    );
    ensure!(
        sc_enabled(&p, &sc_initial(&p)).is_empty(),
        "blocked assume yields nothing"
    );
    Ok(())
}

fn sc_havoc_reads_memory_directly() -> Result<(), String> {
    let p = prog(
        "program m vars H; thread t regs h; init l0;
         begin l0: havoc(h, h <= H); goto l1; end",
    );
    let mut s = sc_initial(&p);
    s.mem[loc(&p, "H")] = 1;
    let succs = sc_enabled(&p, &s);
    let chosen: Vec<i64> = succs.iter().map(|(_, n)| n.mem[loc(&p, "h")]).collect();
    ensure!(chosen == [0, 1], "h in 0..=H, got {chosen:?}");
    Ok(())
}

fn sc_read_takes_memory_value() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs a; init l0;
         begin l0: a := x; goto l1; end",
    );
    let mut s = sc_initial(&p);
    s.mem[loc(&p, "x")] = 3;
    let succs = sc_enabled(&p, &s);
    ensure!(
        rendered(&p, &succs[0].0) == ["(t,rd,x,3)"],
        "read takes memory value"
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Stream-level rules
// ---------------------------------------------------------------------------

fn sc_stream_keeps_issue_commit_adjacent() -> Result<(), String> {
    let p = tsorobust::corpus::load("mp.prog");
    let (execs, _) = sc_executions(&p, 10);
    for e in &execs {
        ensure!(
            e.is_sc_shaped(),
            "SC execution with detached commit: {}",
            e.render_line(&p)
        );
    }
    Ok(())
}

fn tso_stream_yields_balanced_buffers() -> Result<(), String> {
    let p = tsorobust::corpus::load("wsq.prog");
    let (execs, _) = tso_executions(&p, 12, 2);
    for e in &execs {
        for ti in 0..p.n_threads() {
            let isus: Vec<_> = e
                .steps
                .iter()
                .filter(|s| s.tid.0 as usize == ti && matches!(s.kind, ActionKind::Isu { .. }))
                .map(|s| s.wref)
                .collect();
            let coms: Vec<_> = e
                .steps
                .iter()
                .filter(|s| s.tid.0 as usize == ti && matches!(s.kind, ActionKind::Com { .. }))
                .map(|s| s.wref)
                .collect();
            ensure!(
                isus == coms,
                "k-th commit must pair the k-th issue; {} vs {} in {}",
                isus.len(),
                coms.len(),
                e.render_line(&p)
            );
        }
    }
    Ok(())
}

fn tso_enumeration_is_deterministic() -> Result<(), String> {
    let p = tsorobust::corpus::load("mp.prog");
    let (a, sa) = tso_executions(&p, 10, 2);
    let (b, sb) = tso_executions(&p, 10, 2);
    ensure!(a == b, "two runs enumerate identical executions");
    ensure!(
        sa.yielded == sb.yielded && sa.truncated == sb.truncated,
        "stats agree"
    );
    Ok(())
}

fn first_recv_read_sees_zero() -> Result<(), String> {
    let p = tsorobust::corpus::load("mp.prog");
    let succs = tso_enabled(&p, &tso_initial(&p), 2);
    let recv_read = succs
        .iter()
        .map(|(st, _)| rendered(&p, st))
        .find(|a| a[0].starts_with("(recv,"))
        .ok_or("recv has a successor")?;
    ensure!(
        recv_read == ["(recv,rd,x,0)"],
        "recv's first read returns the initial 0, got {recv_read:?}"
    );
    Ok(())
}

fn per_thread_actions_follow_program_order() -> Result<(), String> {
    let p = tsorobust::corpus::load("mp.prog");
    let (execs, _) = tso_executions(&p, 10, 2);
    for e in &execs {
        let send: Vec<_> = e
            .steps
            .iter()
            .filter(|s| s.tid.0 == 0 && !matches!(s.kind, ActionKind::Com { .. }))
            .map(|s| std::mem::discriminant(&s.kind))
            .collect();
        let expect = [
            std::mem::discriminant(&ActionKind::Tau),
            std::mem::discriminant(&ActionKind::Isu {
                var: VarId(0),
                val: 0,
            }),
            std::mem::discriminant(&ActionKind::Isu {
                var: VarId(0),
                val: 0,
            }),
        ];
        ensure!(
            send.as_slice() == &expect[..send.len()],
            "send actions out of program order in {}",
            e.render_line(&p)
        );
    }
    Ok(())
}

fn zero_bound_yields_exactly_the_empty_execution() -> Result<(), String> {
    let p = tsorobust::corpus::load("mp.prog");
    let (sc, _) = sc_executions(&p, 0);
    let (tso, _) = tso_executions(&p, 0, 2);
    ensure!(
        sc.len() == 1 && sc[0].is_empty(),
        "SC: empty execution only"
    );
    ensure!(
        tso.len() == 1 && tso[0].is_empty(),
        "TSO: empty execution only"
    );
    Ok(())
}

fn skip_program_has_one_step_execution() -> Result<(), String> {
    let p = prog(
        "program m vars x; thread t regs; init l0;
         begin l0: skip; goto fin; end",
    );
    let (execs, stats) = sc_executions(&p, 5);
    ensure!(execs.len() == 2, "the empty execution and the tau step");
    ensure!(
        rendered(&p, &execs[1].steps) == ["(t,tau)"],
        "single deterministic step"
    );
    ensure!(!stats.truncated, "nothing truncated");
    Ok(())
}

// ---------------------------------------------------------------------------

const CHECKS: &[(&str, Check)] = &[
    (
        "issue appends to the tail and advances pc",
        issue_appends_and_advances,
    ),
    (
        "commit pops the head and writes memory",
        commit_pops_head_and_writes_memory,
    ),
    ("commit respects FIFO order", commit_respects_fifo_order),
    ("local assignment is tau", local_assignment_is_tau),
    (
        "read from memory when not buffered",
        read_from_memory_when_not_buffered,
    ),
    (
        "read from memory disabled when buffered",
        read_from_memory_disabled_when_buffered,
    ),
    (
        "read forwards the latest buffered write",
        read_forwards_latest_buffered_write,
    ),
    (
        "read forwarding skips other variables",
        read_forwarding_skips_other_variables,
    ),
    (
        "fence is tau on an empty buffer",
        fence_is_tau_on_empty_buffer,
    ),
    (
        "fence blocks on a nonempty buffer",
        fence_blocks_on_nonempty_buffer,
    ),
    (
        "cas success is an atomic issue/commit",
        cas_success_is_atomic_issue_commit,
    ),
    (
        "cas failure reads the current value",
        cas_failure_reads_current_value,
    ),
    (
        "cas blocks on a nonempty buffer",
        cas_blocks_on_nonempty_buffer,
    ),
    ("assume true is tau", assume_true_is_tau),
    ("assume false blocks", assume_false_blocks),
    (
        "havoc enumerates satisfying values ascending",
        havoc_enumerates_values_ascending,
    ),
    (
        "havoc sees the buffer-forwarded value",
        havoc_sees_buffer_forwarded_value,
    ),
    (
        "havoc instantiates conditional predicates",
        havoc_conditional_predicate_instantiation,
    ),
    (
        "issue blocked at buffer capacity",
        issue_blocked_at_buffer_capacity,
    ),
    (
        "array cell read resolves its index register",
        array_cell_read_resolves_register_index,
    ),
    (
        "array index out of range is stuck",
        array_index_out_of_range_is_stuck,
    ),
    ("sc initial state is all zero", sc_initial_state_is_all_zero),
    (
        "sc write is an issue/commit pair",
        sc_write_is_issue_commit_pair,
    ),
    ("sc fence is always tau", sc_fence_is_always_tau),
    ("sc cas success and failure", sc_cas_success_and_failure),
    ("sc assume blocks when false", sc_assume_blocks_when_false),
    (
        "sc havoc reads memory directly",
        sc_havoc_reads_memory_directly,
    ),
    ("sc read takes the memory value", sc_read_takes_memory_value),
    (
        "sc stream keeps issue/commit adjacent",
        sc_stream_keeps_issue_commit_adjacent,
    ),
    (
        "tso stream yields balanced buffers",
        tso_stream_yields_balanced_buffers,
    ),
    (
        "tso enumeration is deterministic",
        tso_enumeration_is_deterministic,
    ),
    ("first recv read sees zero", first_recv_read_sees_zero),
    (
        "per-thread actions follow program order",
        per_thread_actions_follow_program_order,
    ),
    (
        "zero bound yields exactly the empty execution",
        zero_bound_yields_exactly_the_empty_execution,
    ),
    (
        "skip program has one one-step execution",
        skip_program_has_one_step_execution,
    ),
];

#[test]
fn acceptance_7_interpreter_conformance() {
    let mut failures = Vec::new();
    for (name, check) in CHECKS {
        match check() {
            Ok(()) => println!("  conformance: {name}: PASS"),
            Err(msg) => {
                println!("  conformance: {name}: FAIL ({msg})");
                failures.push(format!("{name}: {msg}"));
            }
        }
    }
    println!(
        "ACCEPTANCE 7 interpreter-conformance ({} single-rule checks): {}",
        CHECKS.len(),
        if failures.is_empty() { "PASS" } else { "FAIL" }
    );
    assert!(
        CHECKS.len() >= 30,
        "at least 30 single-rule checks required"
    );
    assert!(failures.is_empty(), "{failures:#?}");
}
