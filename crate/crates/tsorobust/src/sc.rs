//! Sequentially consistent small-step semantics.
//!
//! Writes hit memory immediately: each write instruction still emits an
//! issue/commit action pair, but the two happen back to back as one atomic
//! packet, which keeps SC and TSO executions directly comparable. Fences are
//! no-ops here.

use crate::exec::Execution;
use crate::exec::{ActionKind, ReadSrc, Step, WriteRef};
use crate::explore::{
    Bounds, EffUndo, Effect, ExploreStats, Model, Packet, PacketFlags, StepCtx, Undo, Visit,
};
use crate::lang::{eval_bool, eval_expr, EvalCtx, Instruction, LabelId, Program};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScState {
    pub pc: Vec<LabelId>,
    pub mem: Vec<i64>,
}

impl ScState {
    pub fn regs<'a>(&'a self, p: &Program) -> &'a [i64] {
        &self.mem[p.n_shared()..]
    }

    /// Shared-variable valuation.
    pub fn shared<'a>(&'a self, p: &Program) -> &'a [i64] {
        &self.mem[..p.n_shared()]
    }
}

/// Initial state: every thread at its init label, memory all zero.
pub fn sc_initial(p: &Program) -> ScState {
    ScState {
        pc: p.threads.iter().map(|t| t.init).collect(),
        mem: vec![0; p.mem_size()],
    }
}

pub enum ScModel {}

impl Model for ScModel {
    type State = ScState;

    fn initial(p: &Program) -> ScState {
        sc_initial(p)
    }

    fn packets(
        p: &Program,
        s: &ScState,
        ctx: &StepCtx,
        _buf_cap: u32,
        out: &mut Vec<Packet>,
        flags: &mut PacketFlags,
    ) {
        for (ti, thread) in p.threads.iter().enumerate() {
            let tid = crate::lang::Tid(ti as u16);
            let label = s.pc[ti];
            for &id in &thread.labels[label.0 as usize].instrs {
                instruction_packets(p, s, ctx, tid, id, out, flags);
            }
        }
    }

    fn yieldable(_s: &ScState) -> bool {
        true
    }

    fn apply(p: &Program, s: &mut ScState, ctx: &mut StepCtx, pk: &Packet) -> Undo {
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
            Effect::Issue { .. } | Effect::Commit { .. } => {
                unreachable!("store buffers do not exist under SC")
            }
        };
        Undo {
            pc_old,
            reg_old,
            eff,
        }
    }

    fn revert(_p: &Program, s: &mut ScState, ctx: &mut StepCtx, undo: Undo) {
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
            EffUndo::Issue { .. } | EffUndo::Commit { .. } => unreachable!(),
        }
        if let Some((loc, old)) = undo.reg_old {
            s.mem[loc] = old;
        }
        if let Some((t, l)) = undo.pc_old {
            s.pc[t.0 as usize] = l;
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn instruction_packets(
    p: &Program,
    s: &ScState,
    ctx: &StepCtx,
    tid: crate::lang::Tid,
    id: crate::lang::InstrId,
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
                reg: Some((*dst, val)),
                effect: Effect::None,
            });
        }
        Instruction::Fence => out.push(tau(tid, id, goto, None)),
        Instruction::Cas {
            dst,
            var,
            expected,
            new,
        } => {
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
            // Otherwise the instruction blocks: no successor.
        }
        Instruction::Havoc { dst, var, pred } => {
            let visible = s.mem[var.0 as usize];
            let rsrc = match ctx.last_commit[var.0 as usize] {
                Some(w) => ReadSrc::From(w),
                None => ReadSrc::Initial,
            };
            havoc_packets(p, regs, tid, id, *dst, *var, pred, visible, rsrc, goto, out);
        }
    }
}

fn tau(
    tid: crate::lang::Tid,
    id: crate::lang::InstrId,
    pc: Option<(crate::lang::Tid, LabelId)>,
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

/// Havoc successors, ascending in the chosen value: one per value of the
/// target register satisfying the predicate at the visible value of the
/// shared variable. The emitted action carries the predicate with all
/// registers (including the freshly chosen target) instantiated.
#[allow(clippy::too_many_arguments)]
pub(crate) fn havoc_packets(
    p: &Program,
    regs: &[i64],
    tid: crate::lang::Tid,
    id: crate::lang::InstrId,
    dst: crate::lang::RegId,
    var: crate::lang::VarId,
    pred: &crate::lang::BExpr,
    visible: i64,
    rsrc: ReadSrc,
    pc: Option<(crate::lang::Tid, LabelId)>,
    out: &mut Vec<Packet>,
) {
    let mut scratch: Vec<i64> = regs.to_vec();
    for chosen in p.domain.values().collect::<Vec<_>>() {
        scratch[dst.0 as usize] = chosen;
        let sat = eval_bool(
            pred,
            &EvalCtx {
                domain: &p.domain,
                regs: &scratch,
                var: Some((var, visible)),
            },
        );
        if !sat {
            continue;
        }
        let mut inst = crate::lang::PredSet::empty();
        for x in p.domain.values() {
            let holds = eval_bool(
                pred,
                &EvalCtx {
                    domain: &p.domain,
                    regs: &scratch,
                    var: Some((var, x)),
                },
            );
            if holds {
                inst.insert(&p.domain, x);
            }
        }
        out.push(Packet {
            a: Step {
                tid,
                kind: ActionKind::Hvc {
                    var,
                    pred: inst,
                    chosen,
                },
                instr: id,
                wref: None,
                src: Some(rsrc),
            },
            b: None,
            pc,
            reg: Some((dst, chosen)),
            effect: Effect::None,
        });
    }
}

/// Enabled transitions of one SC state, with their successor states. Read
/// sources are relative to a fresh context; the streaming explorer tracks
/// them across whole executions.
pub fn sc_enabled(p: &Program, s: &ScState) -> Vec<(Vec<Step>, ScState)> {
    let ctx = StepCtx::new(p);
    let mut packets = Vec::new();
    let mut flags = PacketFlags::default();
    ScModel::packets(p, s, &ctx, 0, &mut packets, &mut flags);
    packets
        .into_iter()
        .map(|pk| {
            let mut state = s.clone();
            let mut c = ctx.clone();
            ScModel::apply(p, &mut state, &mut c, &pk);
            let mut steps = vec![pk.a];
            if let Some(b) = pk.b {
                steps.push(b);
            }
            (steps, state)
        })
        .collect()
}

/// All SC executions of length at most `max_steps`, depth-first.
pub fn sc_executions(p: &Program, max_steps: u32) -> (Vec<Execution>, ExploreStats) {
    crate::explore::collect_executions::<ScModel>(p, Bounds::new(max_steps, 0))
}

/// Streaming variant of [`sc_executions`].
pub fn for_each_sc_execution(
    p: &Program,
    max_steps: u32,
    f: &mut dyn FnMut(&[Step], &ScState) -> Visit,
) -> ExploreStats {
    crate::explore::explore_all::<ScModel>(p, Bounds::new(max_steps, 0), f)
}
