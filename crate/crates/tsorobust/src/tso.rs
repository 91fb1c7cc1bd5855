//! TSO small-step semantics with per-thread FIFO store buffers.
//!
//! Transition rules:
//!   issue:     a write appends `(x,v)` to the thread's buffer and emits
//!               `(t,isu)`; the program counter advances.
//!   commit:    the buffer head reaches memory as `(t,com,x,v)`; the
//!               program counter is untouched.
//!   read:      from memory only when the thread's buffer holds no write to
//!               `x`; otherwise the latest buffered write to `x` forwards its
//!               value.
//!   fence:     `(t,tau)`, enabled only on an empty buffer.
//!   cas:       enabled only on an empty buffer; success emits the
//!               issue/commit pair atomically and sets the register to 1,
//!               failure emits a read of the current value and sets it to 0.
//!   assume:    `(t,tau)` when the condition holds, otherwise blocks.
//!   havoc:     reads the thread-visible value of its variable (buffer
//!               forwarding included) and assigns any value satisfying the
//!               predicate.

use std::collections::VecDeque;

use crate::exec::{ActionKind, Execution, ReadSrc, Step, WriteRef};
use crate::explore::{
    Bounds, EffUndo, Effect, ExploreStats, Model, Packet, PacketFlags, StepCtx, Undo, Visit,
};
use crate::lang::{eval_bool, eval_expr, EvalCtx, Instruction, LabelId, Program, Tid, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BufEntry {
    pub var: VarId,
    pub val: i64,
    pub instr: crate::lang::InstrId,
    pub wref: WriteRef,
}

/// State identity modulo write bookkeeping: program counters, memory, and
/// buffered `(variable, value)` pairs per thread.
pub type SemanticKey = (Vec<LabelId>, Vec<i64>, Vec<Vec<(VarId, i64)>>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsoState {
    pub pc: Vec<LabelId>,
    pub mem: Vec<i64>,
    pub buf: Vec<VecDeque<BufEntry>>,
}

impl TsoState {
    pub fn regs<'a>(&'a self, p: &Program) -> &'a [i64] {
        &self.mem[p.n_shared()..]
    }

    pub fn shared<'a>(&'a self, p: &Program) -> &'a [i64] {
        &self.mem[..p.n_shared()]
    }

    pub fn buffers_empty(&self) -> bool {
        self.buf.iter().all(|b| b.is_empty())
    }

    /// State identity for reachability searches: write identities in the
    /// buffers are bookkeeping, only `(var, val)` matters semantically.
    pub fn semantic_key(&self) -> SemanticKey {
        (
            self.pc.clone(),
            self.mem.clone(),
            self.buf
                .iter()
                .map(|b| b.iter().map(|e| (e.var, e.val)).collect())
                .collect(),
        )
    }
}

pub fn tso_initial(p: &Program) -> TsoState {
    TsoState {
        pc: p.threads.iter().map(|t| t.init).collect(),
        mem: vec![0; p.mem_size()],
        buf: vec![VecDeque::new(); p.n_threads()],
    }
}

pub enum TsoModel {}

impl Model for TsoModel {
    type State = TsoState;

    fn initial(p: &Program) -> TsoState {
        tso_initial(p)
    }

    fn packets(
        p: &Program,
        s: &TsoState,
        ctx: &StepCtx,
        buf_cap: u32,
        out: &mut Vec<Packet>,
        flags: &mut PacketFlags,
    ) {
        for ti in 0..p.threads.len() {
            let tid = Tid(ti as u16);
            thread_packets(p, s, ctx, tid, buf_cap, false, out, flags);
            if let Some(pk) = commit_packet(s, tid) {
                out.push(pk);
            }
        }
    }

    fn yieldable(s: &TsoState) -> bool {
        s.buffers_empty()
    }

    fn apply(p: &Program, s: &mut TsoState, ctx: &mut StepCtx, pk: &Packet) -> Undo {
        let pc_old = pk.pc.map(|(t, _)| (t, s.pc[t.0 as usize]));
        if let Some((t, l)) = pk.pc {
            s.pc[t.0 as usize] = l;
        }
        let reg_old = pk.reg.map(|(r, v)| {
            let loc = p.reg_loc(r);
            let old = s.mem[loc];
            s.mem[loc] = v;
            (loc, old)
        });
        let eff = match pk.effect {
            Effect::None => EffUndo::None,
            Effect::WriteThrough { var, val, wref } => {
                let mem_old = s.mem[var.0 as usize];
                s.mem[var.0 as usize] = val;
                let lc_old = ctx.last_commit[var.0 as usize];
                ctx.last_commit[var.0 as usize] = Some(wref);
                ctx.isu_count[wref.tid.0 as usize] += 1;
                EffUndo::WriteThrough {
                    var,
                    mem_old,
                    lc_old,
                    tid: wref.tid,
                }
            }
            Effect::Issue {
                var,
                val,
                instr,
                wref,
            } => {
                s.buf[wref.tid.0 as usize].push_back(BufEntry {
                    var,
                    val,
                    instr,
                    wref,
                });
                ctx.isu_count[wref.tid.0 as usize] += 1;
                EffUndo::Issue { tid: wref.tid }
            }
            Effect::Commit { tid } => {
                let entry = s.buf[tid.0 as usize]
                    .pop_front()
                    .expect("commit on empty buffer");
                let mem_old = s.mem[entry.var.0 as usize];
                s.mem[entry.var.0 as usize] = entry.val;
                let lc_old = ctx.last_commit[entry.var.0 as usize];
                ctx.last_commit[entry.var.0 as usize] = Some(entry.wref);
                EffUndo::Commit {
                    tid,
                    entry,
                    mem_old,
                    lc_old,
                }
            }
        };
        Undo {
            pc_old,
            reg_old,
            eff,
        }
    }

    fn revert(_p: &Program, s: &mut TsoState, ctx: &mut StepCtx, undo: Undo) {
        match undo.eff {
            EffUndo::None => {}
            EffUndo::WriteThrough {
                var,
                mem_old,
                lc_old,
                tid,
            } => {
                s.mem[var.0 as usize] = mem_old;
                ctx.last_commit[var.0 as usize] = lc_old;
                ctx.isu_count[tid.0 as usize] -= 1;
            }
            EffUndo::Issue { tid } => {
                s.buf[tid.0 as usize].pop_back();
                ctx.isu_count[tid.0 as usize] -= 1;
            }
            EffUndo::Commit {
                tid,
                entry,
                mem_old,
                lc_old,
            } => {
                s.mem[entry.var.0 as usize] = mem_old;
                ctx.last_commit[entry.var.0 as usize] = lc_old;
                s.buf[tid.0 as usize].push_front(entry);
            }
        }
        if let Some((loc, old)) = undo.reg_old {
            s.mem[loc] = old;
        }
        if let Some((t, l)) = undo.pc_old {
            s.pc[t.0 as usize] = l;
        }
    }
}

/// Latest buffered write to `var` in `buf`, if any (the entry a read of
/// `var` forwards from).
fn forwarded(buf: &VecDeque<BufEntry>, var: VarId) -> Option<&BufEntry> {
    buf.iter().rev().find(|e| e.var == var)
}

/// Commit step for the head of a thread's buffer, if any.
pub(crate) fn commit_packet(s: &TsoState, tid: Tid) -> Option<Packet> {
    s.buf[tid.0 as usize].front().map(|head| Packet {
        a: Step {
            tid,
            kind: ActionKind::Com {
                var: head.var,
                val: head.val,
            },
            instr: head.instr,
            wref: Some(head.wref),
            src: None,
        },
        b: None,
        pc: None,
        reg: None,
        effect: Effect::Commit { tid },
    })
}

/// Instruction successors of one thread. With `fuse_writes`, write
/// instructions emit the issue/commit pair atomically (valid only while the
/// thread's buffer is empty); the SC-shaped stepping the minimal-violation
/// search uses for non-delaying threads.
#[allow(clippy::too_many_arguments)]
pub(crate) fn thread_packets(
    p: &Program,
    s: &TsoState,
    ctx: &StepCtx,
    tid: Tid,
    buf_cap: u32,
    fuse_writes: bool,
    out: &mut Vec<Packet>,
    flags: &mut PacketFlags,
) {
    let label = s.pc[tid.0 as usize];
    let ids = p.threads[tid.0 as usize].labels[label.0 as usize]
        .instrs
        .clone();
    for id in ids {
        instruction_packets(p, s, ctx, tid, id, buf_cap, fuse_writes, out, flags);
    }
}

#[allow(clippy::too_many_arguments)]
fn instruction_packets(
    p: &Program,
    s: &TsoState,
    ctx: &StepCtx,
    tid: Tid,
    id: crate::lang::InstrId,
    buf_cap: u32,
    fuse_writes: bool,
    out: &mut Vec<Packet>,
    flags: &mut PacketFlags,
) {
    let d = p.instr(id);
    let regs = s.regs(p);
    let ectx = EvalCtx {
        domain: &p.domain,
        regs,
        var: None,
    };
    let goto = Some((tid, d.goto));
    let own_buf = &s.buf[tid.0 as usize];
    match &d.op {
        Instruction::Write { dst, src } => {
            let Some(var) = p.resolve_ref(*dst, regs) else {
                flags.stuck += 1;
                return;
            };
            let val = eval_expr(src, &ectx);
            let wref = WriteRef {
                tid,
                k: ctx.isu_count[tid.0 as usize],
            };
            if fuse_writes {
                debug_assert!(own_buf.is_empty());
                out.push(Packet {
                    a: Step {
                        tid,
                        kind: ActionKind::Isu { var, val },
                        instr: id,
                        wref: Some(wref),
                        src: None,
                    },
                    b: Some(Step {
                        tid,
                        kind: ActionKind::Com { var, val },
                        instr: id,
                        wref: Some(wref),
                        src: None,
                    }),
                    pc: goto,
                    reg: None,
                    effect: Effect::WriteThrough { var, val, wref },
                });
                return;
            }
            if own_buf.len() >= buf_cap as usize {
                // Bounded modeling artifact, not program semantics.
                flags.cap_blocked = true;
                return;
            }
            out.push(Packet {
                a: Step {
                    tid,
                    kind: ActionKind::Isu { var, val },
                    instr: id,
                    wref: Some(wref),
                    src: None,
                },
                b: None,
                pc: goto,
                reg: None,
                effect: Effect::Issue {
                    var,
                    val,
                    instr: id,
                    wref,
                },
            });
        }
        Instruction::Local { dst, src } => {
            let val = eval_expr(src, &ectx);
            out.push(tau(tid, id, goto, Some((*dst, val))));
        }
        Instruction::Read { dst, src } => {
            let Some(var) = p.resolve_ref(*src, regs) else {
                flags.stuck += 1;
                return;
            };
            let (val, rsrc) = match forwarded(own_buf, var) {
                Some(e) => (e.val, ReadSrc::From(e.wref)),
                None => (
                    s.mem[var.0 as usize],
                    match ctx.last_commit[var.0 as usize] {
                        Some(w) => ReadSrc::From(w),
                        None => ReadSrc::Initial,
                    },
                ),
            };
            out.push(Packet {
                a: Step {
                    tid,
                    kind: ActionKind::Rd { var, val },
                    instr: id,
                    wref: None,
                    src: Some(rsrc),
                },
                b: None,
                pc: goto,
                reg: Some((*dst, val)),
                effect: Effect::None,
            });
        }
        Instruction::Fence => {
            if own_buf.is_empty() {
                out.push(tau(tid, id, goto, None));
            }
        }
        Instruction::Cas {
            dst,
            var,
            expected,
            new,
        } => {
            if !own_buf.is_empty() {
                return;
            }
            let Some(var) = p.resolve_ref(*var, regs) else {
                flags.stuck += 1;
                return;
            };
            let exp = eval_expr(expected, &ectx);
            if s.mem[var.0 as usize] == exp {
                let val = eval_expr(new, &ectx);
                let wref = WriteRef {
                    tid,
                    k: ctx.isu_count[tid.0 as usize],
                };
                out.push(Packet {
                    a: Step {
                        tid,
                        kind: ActionKind::Isu { var, val },
                        instr: id,
                        wref: Some(wref),
                        src: None,
                    },
                    b: Some(Step {
                        tid,
                        kind: ActionKind::Com { var, val },
                        instr: id,
                        wref: Some(wref),
                        src: None,
                    }),
                    pc: goto,
                    reg: Some((*dst, 1)),
                    effect: Effect::WriteThrough { var, val, wref },
                });
            } else {
                let val = s.mem[var.0 as usize];
                let rsrc = match ctx.last_commit[var.0 as usize] {
                    Some(w) => ReadSrc::From(w),
                    None => ReadSrc::Initial,
                };
                out.push(Packet {
                    a: Step {
                        tid,
                        kind: ActionKind::Rd { var, val },
                        instr: id,
                        wref: None,
                        src: Some(rsrc),
                    },
                    b: None,
                    pc: goto,
                    reg: Some((*dst, 0)),
                    effect: Effect::None,
                });
            }
        }
        Instruction::Skip => out.push(tau(tid, id, goto, None)),
        Instruction::Assume { cond } => {
            if eval_bool(cond, &ectx) {
                out.push(tau(tid, id, goto, None));
            }
        }
        Instruction::Havoc { dst, var, pred } => {
            let (visible, rsrc) = match forwarded(own_buf, *var) {
                Some(e) => (e.val, ReadSrc::From(e.wref)),
                None => (
                    s.mem[var.0 as usize],
                    match ctx.last_commit[var.0 as usize] {
                        Some(w) => ReadSrc::From(w),
                        None => ReadSrc::Initial,
                    },
                ),
            };
            crate::sc::havoc_packets(p, regs, tid, id, *dst, *var, pred, visible, rsrc, goto, out);
        }
    }
}

fn tau(
    tid: Tid,
    id: crate::lang::InstrId,
    pc: Option<(Tid, LabelId)>,
    reg: Option<(crate::lang::RegId, i64)>,
) -> Packet {
    Packet {
        a: Step {
            tid,
            kind: ActionKind::Tau,
            instr: id,
            wref: None,
            src: None,
        },
        b: None,
        pc,
        reg,
        effect: Effect::None,
    }
}

/// Enabled transitions of one TSO state with successor states; see
/// [`crate::sc::sc_enabled`] for the read-source caveat.
pub fn tso_enabled(p: &Program, s: &TsoState, buf_cap: u32) -> Vec<(Vec<Step>, TsoState)> {
    let mut ctx = StepCtx::new(p);
    // Issue counters must stay consistent with writes already buffered.
    for (ti, b) in s.buf.iter().enumerate() {
        ctx.isu_count[ti] = b.iter().map(|e| e.wref.k + 1).max().unwrap_or(0);
    }
    let mut packets = Vec::new();
    let mut flags = PacketFlags::default();
    TsoModel::packets(p, s, &ctx, buf_cap, &mut packets, &mut flags);
    packets
        .into_iter()
        .map(|pk| {
            let mut state = s.clone();
            let mut c = ctx.clone();
            TsoModel::apply(p, &mut state, &mut c, &pk);
            let mut steps = vec![pk.a];
            if let Some(b) = pk.b {
                steps.push(b);
            }
            (steps, state)
        })
        .collect()
}

/// All TSO executions of length at most `max_steps` whose final state has
/// empty buffers, depth-first. Prefixes cut by the bound while writes were
/// still buffered are counted in the stats, not yielded.
pub fn tso_executions(p: &Program, max_steps: u32, buf_cap: u32) -> (Vec<Execution>, ExploreStats) {
    crate::explore::collect_executions::<TsoModel>(p, Bounds::new(max_steps, buf_cap))
}

/// Streaming variant of [`tso_executions`].
pub fn for_each_tso_execution(
    p: &Program,
    bounds: Bounds,
    f: &mut dyn FnMut(&[Step], &TsoState) -> Visit,
) -> ExploreStats {
    crate::explore::explore_all::<TsoModel>(p, bounds, f)
}
