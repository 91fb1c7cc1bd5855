//! Left/right mover classification over SC executions, buffer-free
//! reachability, and the write-atomicity check.
//!
//! An action moves right when swapping it with the next action (of another
//! thread) leaves a valid SC execution with the same final state; moving
//! left is the mirror image, so one failed swap of an adjacent cross-thread
//! pair refutes both the left unit's right-moverness and the right unit's
//! left-moverness. Write/cas units swap as one issue/commit block.
//!
//! An instruction is a right (left) mover when every occurrence in every
//! bounded SC execution moves right (left). The sweep enumerates SC
//! executions once; because every prefix is itself yielded, checking only
//! the final adjacent pair of each yield covers every pair of every
//! execution without repetition.

use std::collections::HashSet;

use serde::Serialize;

use crate::exec::{ActionKind, Execution, Step};
use crate::explore::Model;
use crate::explore::{
    explore_subtree, root_packets, run_subtrees, Bounds, PacketFlags, StepCtx, Visit,
};
use crate::lang::{InstrId, Instruction, Program, Tid, VarRef};
use crate::sc::{sc_initial, ScModel, ScState};

// ---------------------------------------------------------------------------
// Units
// ---------------------------------------------------------------------------

/// One atomic block of an SC execution: a single action or an issue/commit
/// pair of the same write.
#[derive(Debug, Clone, Copy)]
pub struct Unit {
    pub start: usize,
    pub len: usize,
    pub tid: Tid,
    pub instr: InstrId,
}

pub fn units_of(steps: &[Step]) -> Vec<Unit> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < steps.len() {
        let s = &steps[i];
        let fused = matches!(s.kind, ActionKind::Isu { .. })
            && steps
                .get(i + 1)
                .is_some_and(|n| matches!(n.kind, ActionKind::Com { .. }) && n.wref == s.wref);
        let len = if fused { 2 } else { 1 };
        out.push(Unit {
            start: i,
            len,
            tid: s.tid,
            instr: s.instr,
        });
        i += len;
    }
    out
}

/// Fire the instruction of `unit_steps` at `state`, requiring it to emit
/// exactly the recorded action labels. Returns false when the instruction is
/// not enabled or its actions would differ.
fn match_and_apply(
    p: &Program,
    state: &mut ScState,
    ctx: &mut StepCtx,
    unit_steps: &[Step],
) -> bool {
    let instr = unit_steps[0].instr;
    let tid = unit_steps[0].tid;
    let d = p.instr(instr);
    if state.pc[tid.0 as usize] != d.label {
        return false;
    }
    let mut packets = Vec::new();
    let mut flags = PacketFlags::default();
    crate::sc::instruction_packets(p, state, ctx, tid, instr, &mut packets, &mut flags);
    for pk in &packets {
        let kinds_match = pk.a.kind == unit_steps[0].kind
            && pk.b.map(|b| b.kind) == unit_steps.get(1).map(|s| s.kind)
            && pk.len() == unit_steps.len();
        if kinds_match {
            ScModel::apply(p, state, ctx, pk);
            return true;
        }
    }
    false
}

/// States at every unit boundary of an SC execution (`n_units + 1` entries).
fn unit_boundaries(p: &Program, steps: &[Step], units: &[Unit]) -> Vec<ScState> {
    let mut state = sc_initial(p);
    let mut ctx = StepCtx::new(p);
    let mut out = Vec::with_capacity(units.len() + 1);
    out.push(state.clone());
    for u in units {
        let ok = match_and_apply(p, &mut state, &mut ctx, &steps[u.start..u.start + u.len]);
        debug_assert!(ok, "original execution must replay");
        out.push(state.clone());
    }
    out
}

/// Does swapping units `i` and `i+1` preserve validity and the final state?
/// Same-thread adjacency imposes no constraint and passes vacuously.
fn swap_ok(p: &Program, steps: &[Step], units: &[Unit], boundaries: &[ScState], i: usize) -> bool {
    let (a, b) = (&units[i], &units[i + 1]);
    if a.tid == b.tid {
        return true;
    }
    let mut state = boundaries[i].clone();
    let mut ctx = StepCtx::new(p);
    if !match_and_apply(p, &mut state, &mut ctx, &steps[b.start..b.start + b.len]) {
        return false;
    }
    if !match_and_apply(p, &mut state, &mut ctx, &steps[a.start..a.start + a.len]) {
        return false;
    }
    state.pc == boundaries[i + 2].pc && state.mem == boundaries[i + 2].mem
}

/// Does the action block at unit `i` move right (swap with unit `i+1`)?
pub fn moves_right(p: &Program, e: &Execution, i: usize) -> bool {
    let units = units_of(&e.steps);
    assert!(i + 1 < units.len(), "no successor unit to swap with");
    let boundaries = unit_boundaries(p, &e.steps, &units);
    swap_ok(p, &e.steps, &units, &boundaries, i)
}

/// Does the action block at unit `i` move left (swap with unit `i-1`)?
pub fn moves_left(p: &Program, e: &Execution, i: usize) -> bool {
    assert!(i >= 1, "no predecessor unit to swap with");
    let units = units_of(&e.steps);
    assert!(i < units.len());
    let boundaries = unit_boundaries(p, &e.steps, &units);
    swap_ok(p, &e.steps, &units, &boundaries, i - 1)
}

/// Swapped execution for property checks: units `i` and `i+1` exchanged.
pub fn swap_units(e: &Execution, i: usize) -> Execution {
    let units = units_of(&e.steps);
    let (a, b) = (units[i], units[i + 1]);
    let mut steps = Vec::with_capacity(e.steps.len());
    steps.extend_from_slice(&e.steps[..a.start]);
    steps.extend_from_slice(&e.steps[b.start..b.start + b.len]);
    steps.extend_from_slice(&e.steps[a.start..a.start + a.len]);
    steps.extend_from_slice(&e.steps[b.start + b.len..]);
    Execution::new(steps)
}

// ---------------------------------------------------------------------------
// Sweep: classification and buffer-free reachability in one enumeration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct MoverWitness {
    pub execution: Execution,
    /// Unit index whose swap failed.
    pub unit: usize,
}

#[derive(Debug, Clone)]
struct Refutation {
    order: (usize, u64),
    witness: MoverWitness,
}

#[derive(Debug)]
struct Sweep {
    right_refuted: Vec<Option<Refutation>>,
    left_refuted: Vec<Option<Refutation>>,
    /// Semantically observed buffer-free reachable (write, read) pairs.
    reached: HashSet<(InstrId, InstrId)>,
    truncated: bool,
}

impl Sweep {
    fn new(n: usize) -> Sweep {
        Sweep {
            right_refuted: vec![None; n],
            left_refuted: vec![None; n],
            reached: HashSet::new(),
            truncated: false,
        }
    }

    fn merge(&mut self, other: Sweep) {
        for (mine, theirs) in self.right_refuted.iter_mut().zip(other.right_refuted) {
            merge_refutation(mine, theirs);
        }
        for (mine, theirs) in self.left_refuted.iter_mut().zip(other.left_refuted) {
            merge_refutation(mine, theirs);
        }
        self.reached.extend(other.reached);
        self.truncated |= other.truncated;
    }
}

fn merge_refutation(mine: &mut Option<Refutation>, theirs: Option<Refutation>) {
    if let Some(t) = theirs {
        match mine {
            Some(m) if m.order <= t.order => {}
            _ => *mine = Some(t),
        }
    }
}

fn process_yield(
    p: &Program,
    steps: &[Step],
    final_state: &ScState,
    subtree: usize,
    seq: u64,
    sweep: &mut Sweep,
) {
    let units = units_of(steps);
    let n = units.len();
    if n == 0 {
        return;
    }

    // Buffer-free reachability ending at the newly appended unit: a read or
    // havoc instruction with no same-thread fence and no same-thread write
    // to its variable since the candidate write. A write to the read's own
    // variable (including the candidate itself) ends the walk: such reads
    // forward from the buffer under TSO.
    let last_step = &steps[units[n - 1].start];
    if p.instr(last_step.instr).op.is_read_like() {
        let read_var = match last_step.kind {
            ActionKind::Rd { var, .. } | ActionKind::Hvc { var, .. } => Some(var),
            _ => None,
        };
        if let Some(vr) = read_var {
            for k in (0..n - 1).rev() {
                let u = &units[k];
                if u.tid != last_step.tid {
                    continue;
                }
                if matches!(p.instr(u.instr).op, Instruction::Fence) {
                    break;
                }
                if let ActionKind::Isu { var, .. } = steps[u.start].kind {
                    if var == vr {
                        break;
                    }
                    if p.instr(u.instr).op.is_write() {
                        sweep.reached.insert((u.instr, last_step.instr));
                    }
                }
            }
        }
    }

    // Mover test for the newly formed adjacent pair. Earlier pairs were
    // covered when the shorter prefixes were yielded.
    if n >= 2 {
        let (a, b) = (&units[n - 2], &units[n - 1]);
        if a.tid != b.tid {
            let ai = a.instr.0 as usize;
            let bi = b.instr.0 as usize;
            if sweep.right_refuted[ai].is_none() || sweep.left_refuted[bi].is_none() {
                let boundaries = unit_boundaries(p, steps, &units);
                let mut state = boundaries[n - 2].clone();
                let mut ctx = StepCtx::new(p);
                let ok = match_and_apply(p, &mut state, &mut ctx, &steps[b.start..b.start + b.len])
                    && match_and_apply(p, &mut state, &mut ctx, &steps[a.start..a.start + a.len])
                    && state.pc == final_state.pc
                    && state.mem == final_state.mem;
                if !ok {
                    let exec = Execution::new(steps.to_vec());
                    merge_refutation(
                        &mut sweep.right_refuted[ai],
                        Some(Refutation {
                            order: (subtree, seq),
                            witness: MoverWitness {
                                execution: exec.clone(),
                                unit: n - 2,
                            },
                        }),
                    );
                    merge_refutation(
                        &mut sweep.left_refuted[bi],
                        Some(Refutation {
                            order: (subtree, seq),
                            witness: MoverWitness {
                                execution: exec,
                                unit: n - 1,
                            },
                        }),
                    );
                }
            }
        }
    }
}

fn run_sweep(p: &Program, max_steps: u32, jobs: usize) -> Sweep {
    let bounds = Bounds::new(max_steps, 0);
    let n = p.instrs.len();
    let (roots, root_flags) = root_packets::<ScModel>(p, bounds);
    let sweeps = run_subtrees(roots.len(), jobs, |i| {
        let mut sweep = Sweep::new(n);
        let mut seq = 0u64;
        let stats = explore_subtree::<ScModel>(p, bounds, &roots[i], &mut |steps, state| {
            seq += 1;
            process_yield(p, steps, state, i, seq, &mut sweep);
            Visit::Continue
        });
        sweep.truncated |= stats.truncated;
        sweep
    });
    let mut total = Sweep::new(n);
    for s in sweeps {
        total.merge(s);
    }
    total.truncated |= root_flags.cap_blocked;
    total
}

// ---------------------------------------------------------------------------
// Public classification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct MoverClass {
    pub instr: InstrId,
    pub right_mover: bool,
    pub left_mover: bool,
    pub right_witness: Option<MoverWitness>,
    pub left_witness: Option<MoverWitness>,
}

impl MoverClass {
    pub fn kind(&self) -> &'static str {
        match (self.left_mover, self.right_mover) {
            (true, true) => "both-mover",
            (true, false) => "left-mover",
            (false, true) => "right-mover",
            (false, false) => "non-mover",
        }
    }
}

#[derive(Debug, Clone)]
pub struct MoverReport {
    pub classes: Vec<MoverClass>,
    /// Mover checks enumerated every bounded SC execution without hitting
    /// the step bound; verdicts are then exhaustive rather than sampled.
    pub exhaustive: bool,
}

/// Classify every labeled instruction as right/left mover over all bounded
/// SC executions, with witnesses refuting each failed direction.
pub fn classify_movers(p: &Program, max_steps: u32, jobs: usize) -> MoverReport {
    let sweep = run_sweep(p, max_steps, jobs);
    let classes = assemble_classes(p, &sweep);
    MoverReport {
        classes,
        exhaustive: !sweep.truncated,
    }
}

fn assemble_classes(p: &Program, sweep: &Sweep) -> Vec<MoverClass> {
    (0..p.instrs.len())
        .map(|i| MoverClass {
            instr: InstrId(i as u32),
            right_mover: sweep.right_refuted[i].is_none(),
            left_mover: sweep.left_refuted[i].is_none(),
            right_witness: sweep.right_refuted[i].as_ref().map(|r| r.witness.clone()),
            left_witness: sweep.left_refuted[i].as_ref().map(|r| r.witness.clone()),
        })
        .collect()
}

/// Is some occurrence of `r` buffer-free reachable from an occurrence of `w`
/// within a bounded SC execution?
pub fn buffer_free_reachable(p: &Program, w: InstrId, r: InstrId, max_steps: u32) -> bool {
    if p.instr(w).tid != p.instr(r).tid {
        return false;
    }
    if !cfg_buffer_free_reachable(p, w, r) {
        return false;
    }
    let sweep = run_sweep(p, max_steps, 1);
    sweep.reached.contains(&(w, r))
}

/// Control-flow over-approximation of buffer-free reachability: a goto path
/// from the write to the read that crosses no fence and no write that must
/// target the read's variable. Array cells are compared conservatively.
pub fn cfg_buffer_free_reachable(p: &Program, w: InstrId, r: InstrId) -> bool {
    let wd = p.instr(w);
    let rd = p.instr(r);
    if wd.tid != rd.tid || !wd.op.is_write() || !rd.op.is_read_like() {
        return false;
    }
    let read_ref = match &rd.op {
        Instruction::Read { src, .. } => *src,
        Instruction::Havoc { var, .. } => VarRef::Plain(*var),
        _ => unreachable!(),
    };
    let write_ref = match &wd.op {
        Instruction::Write { dst, .. } => *dst,
        _ => unreachable!(),
    };
    if must_same_var(write_ref, read_ref) {
        return false;
    }
    let thread = &p.threads[wd.tid.0 as usize];
    let mut seen = vec![false; thread.labels.len()];
    let mut queue = vec![wd.goto];
    while let Some(l) = queue.pop() {
        if std::mem::replace(&mut seen[l.0 as usize], true) {
            continue;
        }
        for &id in &thread.labels[l.0 as usize].instrs {
            if id == r {
                return true;
            }
            let d = p.instr(id);
            let blocks = match &d.op {
                Instruction::Fence => true,
                Instruction::Write { dst, .. } => must_same_var(*dst, read_ref),
                Instruction::Cas { var, .. } => must_same_var(*var, read_ref),
                _ => false,
            };
            if !blocks {
                queue.push(d.goto);
            }
        }
    }
    false
}

fn must_same_var(a: VarRef, b: VarRef) -> bool {
    matches!((a, b), (VarRef::Plain(x), VarRef::Plain(y)) if x == y)
}

// ---------------------------------------------------------------------------
// Write atomicity
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AtomicVia {
    LeftMover,
    AllReadsRightMover,
    NotAtomic,
}

#[derive(Debug, Clone)]
pub struct WriteAtomicity {
    pub instr: InstrId,
    pub atomic: bool,
    pub via: AtomicVia,
    /// Buffer-free reachable reads/havocs that are not right movers.
    pub offending: Vec<InstrId>,
}

#[derive(Debug, Clone)]
pub struct AtomicityReport {
    pub writes: Vec<WriteAtomicity>,
    pub program_atomic: bool,
    /// All underlying mover checks ran to completion; a positive verdict is
    /// then a robustness certificate.
    pub exhaustive: bool,
    pub movers: Vec<MoverClass>,
}

/// Write atomicity: each write must be a left mover, or every read/havoc
/// buffer-free reachable from it must be a right mover. A fully atomic
/// program with exhaustive mover checks is robust.
pub fn check_write_atomicity(p: &Program, max_steps: u32, jobs: usize) -> AtomicityReport {
    let sweep = run_sweep(p, max_steps, jobs);
    let classes = assemble_classes(p, &sweep);
    let mut writes = Vec::new();
    for (i, d) in p.instrs.iter().enumerate() {
        if !d.op.is_write() {
            continue;
        }
        let w = InstrId(i as u32);
        if classes[i].left_mover {
            writes.push(WriteAtomicity {
                instr: w,
                atomic: true,
                via: AtomicVia::LeftMover,
                offending: Vec::new(),
            });
            continue;
        }
        let mut offending = Vec::new();
        for (j, rd) in p.instrs.iter().enumerate() {
            let r = InstrId(j as u32);
            if rd.tid != d.tid || !rd.op.is_read_like() {
                continue;
            }
            let reachable = cfg_buffer_free_reachable(p, w, r) && sweep.reached.contains(&(w, r));
            if reachable && !classes[j].right_mover {
                offending.push(r);
            }
        }
        let atomic = offending.is_empty();
        writes.push(WriteAtomicity {
            instr: w,
            atomic,
            via: if atomic {
                AtomicVia::AllReadsRightMover
            } else {
                AtomicVia::NotAtomic
            },
            offending,
        });
    }
    AtomicityReport {
        program_atomic: writes.iter().all(|w| w.atomic),
        exhaustive: !sweep.truncated,
        writes,
        movers: classes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;
    use crate::sc::sc_executions;

    fn sb() -> Program {
        parse_program(
            "program sb vars x y z;
             thread foo regs r1 r2; init f0;
             begin
               f0: x := 1; goto f1;
               f1: r1 := z; goto f2;
               f2: fence; goto f3;
               f3: r2 := y; goto fin;
             end
             thread bar regs r3; init g0;
             begin
               g0: y := 1; goto g1;
               g1: fence; goto g2;
               g2: r3 := x; goto fin;
             end",
        )
        .unwrap()
    }

    #[test]
    fn local_actions_commute() {
        let p = parse_program(
            "program loc vars x;
             thread a regs r1; init l0; begin l0: x := 1; goto fin; end
             thread b regs r2; init m0; begin m0: r2 := 0; goto fin; end",
        )
        .unwrap();
        let (execs, _) = sc_executions(&p, 6);
        // Find the execution where the write unit is directly followed by
        // the local assignment.
        let e = execs
            .iter()
            .find(|e| e.len() == 3 && matches!(e.steps[0].kind, ActionKind::Isu { .. }))
            .unwrap();
        assert!(moves_right(&p, e, 0));
        assert!(moves_left(&p, e, 1));
    }

    #[test]
    fn read_does_not_move_right_over_conflicting_write() {
        // (t2,rd,x,0) followed by t1's write of x: swapping changes the
        // read's value.
        let p = parse_program(
            "program c vars x;
             thread a regs; init l0; begin l0: x := 1; goto fin; end
             thread b regs r; init m0; begin m0: r := x; goto fin; end",
        )
        .unwrap();
        let (execs, _) = sc_executions(&p, 6);
        let e = execs
            .iter()
            .find(|e| e.len() == 3 && matches!(e.steps[0].kind, ActionKind::Rd { val: 0, .. }))
            .unwrap();
        assert!(!moves_right(&p, e, 0));
        // And the commit does not move left over that read.
        assert!(!moves_left(&p, e, 1));
    }

    #[test]
    fn reads_commute_with_reads() {
        let p = parse_program(
            "program rr vars x;
             thread a regs r1; init l0; begin l0: r1 := x; goto fin; end
             thread b regs r2; init m0; begin m0: r2 := x; goto fin; end",
        )
        .unwrap();
        let (execs, _) = sc_executions(&p, 6);
        let e = execs.iter().find(|e| e.len() == 2).unwrap();
        assert!(moves_right(&p, e, 0));
        assert!(moves_left(&p, e, 1));
    }

    #[test]
    fn single_thread_instructions_are_both_movers() {
        let p = parse_program(
            "program one vars x;
             thread t regs r; init l0;
             begin l0: x := 1; goto l1; l1: r := x; goto fin; end",
        )
        .unwrap();
        let report = classify_movers(&p, 8, 1);
        assert!(report.exhaustive);
        for c in &report.classes {
            assert!(c.right_mover && c.left_mover, "{:?}", c.instr);
        }
    }

    #[test]
    fn fence_excludes_later_reads_from_reachability() {
        let p = sb();
        let w = p.instructions_of("foo.f0").unwrap()[0]; // x := 1
        let rz = p.instructions_of("foo.f1").unwrap()[0]; // r1 := z
        let ry = p.instructions_of("foo.f3").unwrap()[0]; // r2 := y (behind fence)
        assert!(cfg_buffer_free_reachable(&p, w, rz));
        assert!(!cfg_buffer_free_reachable(&p, w, ry));
        assert!(buffer_free_reachable(&p, w, rz, 12));
        assert!(!buffer_free_reachable(&p, w, ry, 12));
    }

    #[test]
    fn read_after_same_variable_write_is_not_buffer_free() {
        let p = parse_program(
            "program own vars x;
             thread t regs r; init l0;
             begin l0: x := 1; goto l1; l1: r := x; goto fin; end
             thread u regs s; init m0; begin m0: s := x; goto fin; end",
        )
        .unwrap();
        let w = p.instructions_of("t.l0").unwrap()[0];
        let r = p.instructions_of("t.l1").unwrap()[0];
        assert!(!cfg_buffer_free_reachable(&p, w, r));
        assert!(!buffer_free_reachable(&p, w, r, 10));
    }

    #[test]
    fn store_buffering_with_fences_is_write_atomic() {
        let p = sb();
        let report = check_write_atomicity(&p, 12, 1);
        assert!(report.exhaustive);
        assert!(report.program_atomic);
        // x := 1 is not a left mover (bar reads x), so it must go through
        // the right-mover route.
        let wx = p.instructions_of("foo.f0").unwrap()[0];
        let wa = report.writes.iter().find(|w| w.instr == wx).unwrap();
        assert_eq!(wa.via, AtomicVia::AllReadsRightMover);
    }
}
