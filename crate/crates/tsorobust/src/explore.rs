//! Bounded depth-first enumeration of executions, shared by the SC and TSO
//! interpreters.
//!
//! Successor order is fixed so that every run (and every `--jobs` split)
//! yields executions in the same order: threads by index, instructions by
//! source order within their label, havoc values ascending, and the pending
//! commit of a thread after its instruction successors. Exploration applies
//! each packet in place and reverts it on backtrack.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::exec::{Execution, Step, WriteRef};
use crate::lang::{InstrId, LabelId, Program, RegId, Tid, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_steps: u32,
    pub buf_cap: u32,
}

impl Bounds {
    pub fn new(max_steps: u32, buf_cap: u32) -> Bounds {
        Bounds { max_steps, buf_cap }
    }
}

/// Exploration bookkeeping that is not part of the machine state: which
/// write last reached memory for each variable, and per-thread issue counts
/// used to mint `WriteRef`s.
#[derive(Debug, Clone)]
pub struct StepCtx {
    pub last_commit: Vec<Option<WriteRef>>,
    pub isu_count: Vec<u32>,
}

impl StepCtx {
    pub fn new(p: &Program) -> StepCtx {
        StepCtx {
            last_commit: vec![None; p.n_shared()],
            isu_count: vec![0; p.n_threads()],
        }
    }
}

/// One atomic transition: a single action, or an issue/commit pair for SC
/// writes and successful cas.
#[derive(Debug, Clone)]
pub struct Packet {
    pub a: Step,
    pub b: Option<Step>,
    /// Program-counter update of the acting thread; `None` for commits.
    pub pc: Option<(Tid, LabelId)>,
    pub reg: Option<(RegId, i64)>,
    pub effect: Effect,
}

impl Packet {
    pub fn len(&self) -> usize {
        1 + self.b.is_some() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn push_steps(&self, steps: &mut Vec<Step>) {
        steps.push(self.a);
        if let Some(b) = self.b {
            steps.push(b);
        }
    }

    fn pop_steps(&self, steps: &mut Vec<Step>) {
        steps.pop();
        if self.b.is_some() {
            steps.pop();
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Effect {
    None,
    /// Immediate memory write (SC writes, successful cas).
    WriteThrough {
        var: VarId,
        val: i64,
        wref: WriteRef,
    },
    /// Append to the acting thread's store buffer.
    Issue {
        var: VarId,
        val: i64,
        instr: InstrId,
        wref: WriteRef,
    },
    /// Drain the head of the acting thread's store buffer.
    Commit {
        tid: Tid,
    },
}

#[derive(Debug)]
pub struct Undo {
    pub pc_old: Option<(Tid, LabelId)>,
    pub reg_old: Option<(usize, i64)>,
    pub eff: EffUndo,
}

#[derive(Debug)]
pub enum EffUndo {
    None,
    WriteThrough {
        var: VarId,
        mem_old: i64,
        lc_old: Option<WriteRef>,
        tid: Tid,
    },
    Issue {
        tid: Tid,
    },
    Commit {
        tid: Tid,
        entry: crate::tso::BufEntry,
        mem_old: i64,
        lc_old: Option<WriteRef>,
    },
}

/// Per-node flags raised while computing successor packets.
#[derive(Debug, Default, Clone, Copy)]
pub struct PacketFlags {
    /// An issue was suppressed because the buffer capacity bound was hit.
    pub cap_blocked: bool,
    /// An instruction was stuck on an out-of-range array index.
    pub stuck: u32,
}

pub trait Model {
    type State: Clone;

    fn initial(p: &Program) -> Self::State;

    /// Deterministically ordered successor packets of `s`.
    fn packets(
        p: &Program,
        s: &Self::State,
        ctx: &StepCtx,
        buf_cap: u32,
        out: &mut Vec<Packet>,
        flags: &mut PacketFlags,
    );

    /// Whether the current prefix counts as an execution (TSO requires all
    /// buffers empty).
    fn yieldable(s: &Self::State) -> bool;

    fn apply(p: &Program, s: &mut Self::State, ctx: &mut StepCtx, pk: &Packet) -> Undo;

    fn revert(p: &Program, s: &mut Self::State, ctx: &mut StepCtx, undo: Undo);
}

#[derive(Debug, Default, Clone, Copy)]
pub struct ExploreStats {
    /// Number of executions yielded (including the empty one).
    pub yielded: u64,
    /// Some part of the tree was cut by `max_steps` or the buffer capacity.
    pub truncated: bool,
    /// Occurrences of stuck instructions (array index out of range).
    pub stuck: u64,
    /// Paths cut by the step bound while buffers were still non-empty.
    pub cut_nonempty: u64,
}

impl ExploreStats {
    pub fn merge(&mut self, other: &ExploreStats) {
        self.yielded += other.yielded;
        self.truncated |= other.truncated;
        self.stuck += other.stuck;
        self.cut_nonempty += other.cut_nonempty;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visit {
    Continue,
    Stop,
}

fn dfs<M: Model>(
    p: &Program,
    bounds: Bounds,
    state: &mut M::State,
    ctx: &mut StepCtx,
    steps: &mut Vec<Step>,
    f: &mut dyn FnMut(&[Step], &M::State) -> Visit,
    stats: &mut ExploreStats,
) -> Visit {
    let mut packets = Vec::new();
    let mut flags = PacketFlags::default();
    M::packets(p, state, ctx, bounds.buf_cap, &mut packets, &mut flags);
    stats.stuck += flags.stuck as u64;
    if flags.cap_blocked {
        stats.truncated = true;
    }
    let mut budget_blocked = false;
    let mut fired = 0u32;
    for pk in &packets {
        if steps.len() + pk.len() > bounds.max_steps as usize {
            budget_blocked = true;
            continue;
        }
        fired += 1;
        let undo = M::apply(p, state, ctx, pk);
        pk.push_steps(steps);
        let mut outcome = Visit::Continue;
        if M::yieldable(state) {
            stats.yielded += 1;
            outcome = f(steps, state);
        }
        if outcome == Visit::Continue {
            outcome = dfs::<M>(p, bounds, state, ctx, steps, f, stats);
        }
        pk.pop_steps(steps);
        M::revert(p, state, ctx, undo);
        if outcome == Visit::Stop {
            return Visit::Stop;
        }
    }
    if budget_blocked {
        stats.truncated = true;
        if fired == 0 && !M::yieldable(state) {
            stats.cut_nonempty += 1;
        }
    }
    Visit::Continue
}

/// Enumerate every bounded execution in deterministic depth-first order,
/// starting with the empty one.
pub fn explore_all<M: Model>(
    p: &Program,
    bounds: Bounds,
    f: &mut dyn FnMut(&[Step], &M::State) -> Visit,
) -> ExploreStats {
    let mut stats = ExploreStats::default();
    let mut state = M::initial(p);
    let mut ctx = StepCtx::new(p);
    let mut steps = Vec::new();
    if M::yieldable(&state) {
        stats.yielded += 1;
        if f(&steps, &state) == Visit::Stop {
            return stats;
        }
    }
    dfs::<M>(p, bounds, &mut state, &mut ctx, &mut steps, f, &mut stats);
    stats
}

/// Root successor packets, used to partition the tree across workers.
pub fn root_packets<M: Model>(p: &Program, bounds: Bounds) -> (Vec<Packet>, PacketFlags) {
    let state = M::initial(p);
    let ctx = StepCtx::new(p);
    let mut packets = Vec::new();
    let mut flags = PacketFlags::default();
    M::packets(p, &state, &ctx, bounds.buf_cap, &mut packets, &mut flags);
    (packets, flags)
}

/// Explore the subtree rooted at one root packet.
pub fn explore_subtree<M: Model>(
    p: &Program,
    bounds: Bounds,
    seed: &Packet,
    f: &mut dyn FnMut(&[Step], &M::State) -> Visit,
) -> ExploreStats {
    let mut stats = ExploreStats::default();
    if seed.len() > bounds.max_steps as usize {
        stats.truncated = true;
        return stats;
    }
    let mut state = M::initial(p);
    let mut ctx = StepCtx::new(p);
    let mut steps = Vec::new();
    let _undo = M::apply(p, &mut state, &mut ctx, seed);
    seed.push_steps(&mut steps);
    let mut outcome = Visit::Continue;
    if M::yieldable(&state) {
        stats.yielded += 1;
        outcome = f(&steps, &state);
    }
    if outcome == Visit::Continue {
        dfs::<M>(p, bounds, &mut state, &mut ctx, &mut steps, f, &mut stats);
    }
    stats
}

/// Run one closure per root subtree, spreading subtrees over `jobs` worker
/// threads. Results come back indexed by subtree, so folds that merge them
/// in order are independent of the worker count.
pub fn run_subtrees<R: Send>(
    n_subtrees: usize,
    jobs: usize,
    run: impl Fn(usize) -> R + Sync,
) -> Vec<R> {
    let jobs = jobs.max(1);
    if jobs == 1 || n_subtrees <= 1 {
        return (0..n_subtrees).map(run).collect();
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..n_subtrees).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(n_subtrees) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n_subtrees {
                    break;
                }
                let r = run(i);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("subtree result"))
        .collect()
}

/// Collect all executions of a model up to the bounds. Convenience for tests
/// and examples; analyses stream instead.
pub fn collect_executions<M: Model>(p: &Program, bounds: Bounds) -> (Vec<Execution>, ExploreStats) {
    let mut out = Vec::new();
    let stats = explore_all::<M>(p, bounds, &mut |steps, _| {
        out.push(Execution::new(steps.to_vec()));
        Visit::Continue
    });
    (out, stats)
}
