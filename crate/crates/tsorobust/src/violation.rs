//! Search for minimal violations: canonically shaped non-robust TSO
//! executions in which exactly one thread delays its commits.
//!
//! A candidate has the form
//!
//! ```text
//!   pi1  (t,isu)  pi2  (t,rd,y,*)  pi3  (t,com,x,*)  pi4
//! ```
//!
//! where `pi1` is SC-shaped, from the marked issue on only `t` delays
//! commits, `pi2` holds no commit or fence of `t`, the pivot read (or havoc)
//! happens-before every visible action of `pi3` and the first delayed
//! commit, `pi3` has no `t` actions, and `pi4` is exactly the remaining
//! delayed commits, none of them (nor the first) touching `y`. The
//! happens-before check runs over the standard-variant trace. A program is
//! robust exactly when no such execution exists, which the acceptance suite
//! cross-checks against the trace-equivalence verdict.

use std::collections::HashMap;

use crate::exec::{ActionKind, Execution, Step, WriteRef};
use crate::explore::{Bounds, Effect, Model, PacketFlags, StepCtx};
use crate::lang::{Program, Tid};
use crate::trace::{build_trace, hb_reachable, NodeId, TraceVariant};
use crate::tso::{commit_packet, thread_packets, TsoModel, TsoState};

#[derive(Debug, Clone)]
pub struct MinimalViolation {
    pub execution: Execution,
    /// Index of the pivot read/havoc step.
    pub pivot: usize,
    /// Index of the first delayed commit step.
    pub first_commit: usize,
    /// Sum over all writes of same-thread actions between issue and commit.
    pub delay_metric: u32,
}

struct Search<'a> {
    p: &'a Program,
    bounds: Bounds,
    state: TsoState,
    ctx: StepCtx,
    steps: Vec<Step>,
    best: Option<MinimalViolation>,
    truncated: bool,
}

#[derive(Debug, Clone, Copy)]
enum Phase {
    /// `pi1`: every thread steps SC-shaped.
    Sc,
    /// `pi2`: thread `t` has issued without committing; no pivot chosen yet.
    Delayed(Tid),
    /// `pi3`: pivot chosen at step index; only other threads act.
    PostPivot(Tid, usize),
    /// `pi4`: only `t` commits until its buffer drains.
    Drain(Tid, usize),
}

impl Search<'_> {
    fn apply_and(&mut self, pk: &crate::explore::Packet, next: Phase) {
        if self.steps.len() + pk.len() > self.bounds.max_steps as usize {
            self.truncated = true;
            return;
        }
        let undo = TsoModel::apply(self.p, &mut self.state, &mut self.ctx, pk);
        self.steps.push(pk.a);
        if let Some(b) = pk.b {
            self.steps.push(b);
        }
        self.go(next);
        if pk.b.is_some() {
            self.steps.pop();
        }
        self.steps.pop();
        TsoModel::revert(self.p, &mut self.state, &mut self.ctx, undo);
    }

    fn go(&mut self, phase: Phase) {
        match phase {
            Phase::Sc => {
                let mut packets = Vec::new();
                let mut flags = PacketFlags::default();
                for ti in 0..self.p.n_threads() {
                    thread_packets(
                        self.p,
                        &self.state,
                        &self.ctx,
                        Tid(ti as u16),
                        self.bounds.buf_cap,
                        true,
                        &mut packets,
                        &mut flags,
                    );
                }
                for pk in &packets {
                    match pk.effect {
                        // A fused write can instead begin the delaying
                        // phase: issue without the commit.
                        Effect::WriteThrough { var, val, wref }
                            if matches!(pk.a.kind, ActionKind::Isu { .. })
                                && pk.b.is_some()
                                && !matches!(
                                    self.p.instr(pk.a.instr).op,
                                    crate::lang::Instruction::Cas { .. }
                                ) =>
                        {
                            // SC-shaped step.
                            self.apply_and(pk, Phase::Sc);
                            // Unfused issue, entering the delayed phase.
                            if self.bounds.buf_cap >= 1 {
                                let issue = crate::explore::Packet {
                                    a: pk.a,
                                    b: None,
                                    pc: pk.pc,
                                    reg: None,
                                    effect: Effect::Issue {
                                        var,
                                        val,
                                        instr: pk.a.instr,
                                        wref,
                                    },
                                };
                                self.apply_and(&issue, Phase::Delayed(pk.a.tid));
                            }
                        }
                        _ => self.apply_and(pk, Phase::Sc),
                    }
                }
            }
            Phase::Delayed(t) => {
                let mut packets = Vec::new();
                let mut flags = PacketFlags::default();
                for ti in 0..self.p.n_threads() {
                    let tid = Tid(ti as u16);
                    thread_packets(
                        self.p,
                        &self.state,
                        &self.ctx,
                        tid,
                        self.bounds.buf_cap,
                        tid != t,
                        &mut packets,
                        &mut flags,
                    );
                }
                if flags.cap_blocked {
                    self.truncated = true;
                }
                for pk in &packets {
                    self.apply_and(pk, Phase::Delayed(t));
                    let is_pivot_candidate = pk.a.tid == t
                        && matches!(pk.a.kind, ActionKind::Rd { .. } | ActionKind::Hvc { .. });
                    if is_pivot_candidate {
                        let pivot = self.steps.len();
                        self.apply_and(pk, Phase::PostPivot(t, pivot));
                    }
                }
            }
            Phase::PostPivot(t, pivot) => {
                let mut packets = Vec::new();
                let mut flags = PacketFlags::default();
                for ti in 0..self.p.n_threads() {
                    let tid = Tid(ti as u16);
                    if tid == t {
                        continue;
                    }
                    thread_packets(
                        self.p,
                        &self.state,
                        &self.ctx,
                        tid,
                        self.bounds.buf_cap,
                        true,
                        &mut packets,
                        &mut flags,
                    );
                }
                for pk in &packets {
                    self.apply_and(pk, Phase::PostPivot(t, pivot));
                }
                if let Some(pk) = commit_packet(&self.state, t) {
                    self.apply_and(&pk, Phase::Drain(t, pivot));
                }
            }
            Phase::Drain(t, pivot) => match commit_packet(&self.state, t) {
                Some(pk) => self.apply_and(&pk, Phase::Drain(t, pivot)),
                None => self.candidate(t, pivot),
            },
        }
    }

    /// Buffer drained: validate the shape conditions that are not structural
    /// and record the candidate if it beats the current best.
    fn candidate(&mut self, t: Tid, pivot: usize) {
        let steps = &self.steps;
        let pivot_var = match steps[pivot].kind {
            ActionKind::Rd { var, .. } | ActionKind::Hvc { var, .. } => var,
            _ => unreachable!("pivot is a read or havoc"),
        };
        let first_commit = match steps[pivot + 1..]
            .iter()
            .position(|s| s.tid == t && matches!(s.kind, ActionKind::Com { .. }))
        {
            Some(off) => pivot + 1 + off,
            None => return,
        };
        // The delayed commits must not touch the pivot variable.
        for s in &steps[first_commit..] {
            if let ActionKind::Com { var, .. } = s.kind {
                debug_assert_eq!(s.tid, t);
                if var == pivot_var {
                    return;
                }
            }
        }

        // Happens-before: the pivot must reach every visible action of pi3
        // and the first delayed commit, over the standard trace.
        let tr = build_trace(self.p, steps, TraceVariant::Standard);
        let node_at = step_nodes(steps);
        let pivot_node = node_at[pivot].expect("pivot forms a node");
        let reach = hb_reachable(&tr, pivot_node);
        for (i, s) in steps.iter().enumerate().take(first_commit).skip(pivot + 1) {
            // Commits of other threads share their issue's node.
            if matches!(s.kind, ActionKind::Com { .. } | ActionKind::Tau) {
                continue;
            }
            match node_at[i] {
                Some(n) if reach.contains(&n) => {}
                Some(_) => return,
                None => {}
            }
        }
        let first_commit_node = {
            let wref = steps[first_commit].wref.expect("commit carries identity");
            node_of_wref(steps, wref).expect("issue precedes its commit")
        };
        if !reach.contains(&first_commit_node) {
            return;
        }

        let metric = delay_metric(steps);
        let better = match &self.best {
            None => true,
            Some(b) => metric < b.delay_metric,
        };
        if better {
            self.best = Some(MinimalViolation {
                execution: Execution::new(steps.clone()),
                pivot,
                first_commit,
                delay_metric: metric,
            });
        }
    }
}

/// Trace node created by each step, if any (commits map to their issue's
/// node).
fn step_nodes(steps: &[Step]) -> Vec<Option<NodeId>> {
    let mut counts: HashMap<u16, u16> = HashMap::new();
    let mut wref_node: HashMap<WriteRef, NodeId> = HashMap::new();
    steps
        .iter()
        .map(|s| match s.kind {
            ActionKind::Isu { .. } => {
                let pos = counts.entry(s.tid.0).or_insert(0);
                let id = NodeId {
                    tid: s.tid.0,
                    pos: *pos,
                };
                *pos += 1;
                wref_node.insert(s.wref.unwrap(), id);
                Some(id)
            }
            ActionKind::Rd { .. } | ActionKind::Hvc { .. } => {
                let pos = counts.entry(s.tid.0).or_insert(0);
                let id = NodeId {
                    tid: s.tid.0,
                    pos: *pos,
                };
                *pos += 1;
                Some(id)
            }
            ActionKind::Com { .. } => s.wref.and_then(|w| wref_node.get(&w).copied()),
            ActionKind::Tau => None,
        })
        .collect()
}

fn node_of_wref(steps: &[Step], wref: WriteRef) -> Option<NodeId> {
    let nodes = step_nodes(steps);
    steps
        .iter()
        .zip(&nodes)
        .find(|(s, _)| matches!(s.kind, ActionKind::Isu { .. }) && s.wref == Some(wref))
        .and_then(|(_, n)| *n)
}

/// Sum over all writes of the number of same-thread actions strictly between
/// issue and commit.
fn delay_metric(steps: &[Step]) -> u32 {
    let mut isu_at: HashMap<WriteRef, usize> = HashMap::new();
    let mut metric = 0u32;
    for (i, s) in steps.iter().enumerate() {
        match s.kind {
            ActionKind::Isu { .. } => {
                isu_at.insert(s.wref.unwrap(), i);
            }
            ActionKind::Com { .. } => {
                let start = isu_at[&s.wref.unwrap()];
                metric += steps[start + 1..i]
                    .iter()
                    .filter(|m| m.tid == s.tid)
                    .count() as u32;
            }
            _ => {}
        }
    }
    metric
}

/// Search for a minimal violation within the bounds. Returns the candidate
/// with the smallest delay metric, first in exploration order among ties.
pub fn find_minimal_violation(p: &Program, bounds: Bounds) -> Option<MinimalViolation> {
    let mut s = Search {
        p,
        bounds,
        state: crate::tso::tso_initial(p),
        ctx: StepCtx::new(p),
        steps: Vec::new(),
        best: None,
        truncated: false,
    };
    s.go(Phase::Sc);
    s.best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    #[test]
    fn straight_line_single_thread_has_none() {
        let p = parse_program(
            "program one vars x y;
             thread t regs r; init l0;
             begin l0: x := 1; goto l1; l1: r := y; goto fin; end",
        )
        .unwrap();
        assert!(find_minimal_violation(&p, Bounds::new(10, 2)).is_none());
    }

    #[test]
    fn store_buffering_has_one() {
        let p = parse_program(
            "program sb vars x y;
             thread a regs r1; init l0; begin l0: x := 1; goto l1; l1: r1 := y; goto fin; end
             thread b regs r2; init m0; begin m0: y := 1; goto m1; m1: r2 := x; goto fin; end",
        )
        .unwrap();
        let v = find_minimal_violation(&p, Bounds::new(10, 2)).expect("violation");
        // One delayed write, one same-thread action (the pivot read) between
        // its issue and commit.
        assert_eq!(v.delay_metric, 1);
        assert!(matches!(
            v.execution.steps[v.pivot].kind,
            ActionKind::Rd { .. }
        ));
    }
}
