//! Trace robustness: does every TSO execution have an SC execution with the
//! same trace?
//!
//! The check streams bounded TSO executions. Executions that never buffer
//! (issue immediately followed by commit) are SC executions themselves and
//! match trivially. For the rest, acyclicity of the happens-before relation
//! is a necessary condition in both variants, and an explicit search for a
//! trace-equal SC execution decides the acyclic cases: an SC candidate must
//! replay each thread's node sequence with every read taking its value from
//! the write the trace's rf prescribes, so the search schedules threads
//! node by node, interleaving the tau instructions along the way, and
//! finally validates full trace equality.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::exec::{ActionKind, Execution, ReadSrc, Step, WriteRef};
use crate::explore::{
    explore_all, explore_subtree, root_packets, run_subtrees, Bounds, ExploreStats, Model,
    PacketFlags, StepCtx, Visit,
};
use crate::lang::{LabelId, Program, Tid};
use crate::sc::{ScModel, ScState};
use crate::trace::{
    build_trace, hb_acyclic, CanonicalTrace, NodeId, NodeKind, Trace, TraceVariant,
};
use crate::tso::TsoModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RobustStatus {
    Robust,
    NotRobust,
    /// Reserved for searches that cannot decide within bounds; the current
    /// SC match search is complete relative to the step bound, so verdicts
    /// come back Robust (possibly truncated) or NotRobust.
    Unknown,
}

#[derive(Debug, Clone)]
pub struct RobustnessVerdict {
    pub status: RobustStatus,
    pub variant: TraceVariant,
    pub bounds: Bounds,
    /// TSO execution without a trace-equal SC execution.
    pub witness: Option<Execution>,
    /// Exploration hit a bound (meaningful for Robust verdicts: the verdict
    /// holds up to the bounds).
    pub truncated: bool,
    /// Executions checked (populated for Robust verdicts only, where the
    /// enumeration ran to completion and the count is schedule-independent).
    pub tso_executions: Option<u64>,
}

impl RobustnessVerdict {
    pub fn is_robust(&self) -> bool {
        self.status == RobustStatus::Robust
    }
}

// ---------------------------------------------------------------------------
// SC match search
// ---------------------------------------------------------------------------

/// Search memo key: thread progress, program counters, memory, the full
/// per-variable commit orders, and the operational source of every havoc
/// scheduled so far. The commit orders matter because the final store-order
/// and from-read sets depend on them, not just on which writes happened;
/// havoc sources matter because a havoc's from-read edges hang off whichever
/// commit it observed (reads need no such entry: their source is pinned to
/// the target's rf when they are scheduled). Collapsing states that differ
/// in either would prune schedules whose traces differ.
type MatchKey = (
    Vec<usize>,
    Vec<LabelId>,
    Vec<i64>,
    Vec<Vec<NodeId>>,
    Vec<(NodeId, Option<NodeId>)>,
);

struct MatchSearch<'a> {
    p: &'a Program,
    target: &'a Trace,
    /// Required rf source per read node.
    req_src: HashMap<NodeId, NodeId>,
    /// Store-order predecessors of each write node in the target: a write
    /// may only be scheduled once all of them have committed and none of
    /// its successors has (the match's commit order must linearize the
    /// target's store order).
    so_preds: HashMap<NodeId, Vec<NodeId>>,
    so_succs: HashMap<NodeId, Vec<NodeId>>,
    state: ScState,
    ctx: StepCtx,
    progress: Vec<usize>,
    wref_node: HashMap<WriteRef, NodeId>,
    /// Scheduled write nodes, per variable, in commit order.
    committed: Vec<Vec<NodeId>>,
    /// Operational source of each scheduled havoc node.
    hvc_sources: std::collections::BTreeMap<NodeId, Option<NodeId>>,
    steps: Vec<Step>,
    /// Fewest steps used to reach each search state.
    memo: HashMap<MatchKey, usize>,
    max_steps: usize,
}

impl<'a> MatchSearch<'a> {
    fn new(p: &'a Program, target: &'a Trace, max_steps: u32) -> MatchSearch<'a> {
        let mut req_src = HashMap::new();
        for &(w, r) in &target.rf {
            req_src.insert(r, w);
        }
        let mut so_preds: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        let mut so_succs: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        for &(a, b) in &target.so {
            so_preds.entry(b).or_default().push(a);
            so_succs.entry(a).or_default().push(b);
        }
        MatchSearch {
            p,
            target,
            req_src,
            so_preds,
            so_succs,
            state: crate::sc::sc_initial(p),
            ctx: StepCtx::new(p),
            progress: vec![0; p.n_threads()],
            wref_node: HashMap::new(),
            committed: vec![Vec::new(); p.n_shared()],
            hvc_sources: std::collections::BTreeMap::new(),
            steps: Vec::new(),
            memo: HashMap::new(),
            max_steps: max_steps as usize,
        }
    }

    /// May the write node commit now without contradicting the target's
    /// store order?
    fn store_order_admits(&self, node: NodeId, var: crate::lang::VarId) -> bool {
        let done = &self.committed[var.0 as usize];
        if let Some(preds) = self.so_preds.get(&node) {
            if !preds.iter().all(|a| done.contains(a)) {
                return false;
            }
        }
        if let Some(succs) = self.so_succs.get(&node) {
            if succs.iter().any(|b| done.contains(b)) {
                return false;
            }
        }
        true
    }

    fn run(&mut self) -> bool {
        let done = self
            .progress
            .iter()
            .zip(&self.target.nodes)
            .all(|(&got, want)| got == want.len());
        if done {
            let tr = build_trace(self.p, &self.steps, self.target.variant);
            return tr.equal(self.target) == Ok(true);
        }
        let key = (
            self.progress.clone(),
            self.state.pc.clone(),
            self.state.mem.clone(),
            self.committed.clone(),
            self.hvc_sources.iter().map(|(k, v)| (*k, *v)).collect(),
        );
        match self.memo.get(&key) {
            Some(&best) if best <= self.steps.len() => return false,
            _ => {
                self.memo.insert(key, self.steps.len());
            }
        }
        for t in 0..self.p.n_threads() {
            if self.progress[t] < self.target.nodes[t].len() && self.advance(Tid(t as u16)) {
                return true;
            }
        }
        false
    }

    /// Drive thread `t` to its next trace node, exploring the tau paths in
    /// between. Each candidate that produces the required node recurses into
    /// the global search.
    fn advance(&mut self, t: Tid) -> bool {
        let label = self.state.pc[t.0 as usize];
        let instrs: Vec<crate::lang::InstrId> = self.p.threads[t.0 as usize].labels
            [label.0 as usize]
            .instrs
            .clone();
        let mut packets = Vec::new();
        let mut flags = PacketFlags::default();
        for id in instrs {
            crate::sc::instruction_packets(
                self.p,
                &self.state,
                &self.ctx,
                t,
                id,
                &mut packets,
                &mut flags,
            );
        }
        for pk in packets {
            if self.steps.len() + pk.len() > self.max_steps {
                continue;
            }
            let is_tau = matches!(pk.a.kind, ActionKind::Tau);
            if is_tau {
                let undo = ScModel::apply(self.p, &mut self.state, &mut self.ctx, &pk);
                self.steps.push(pk.a);
                let hit = self.advance(t);
                self.steps.pop();
                ScModel::revert(self.p, &mut self.state, &mut self.ctx, undo);
                if hit {
                    return true;
                }
                continue;
            }
            let want = self.target.nodes[t.0 as usize][self.progress[t.0 as usize]].kind;
            let node_id = NodeId {
                tid: t.0,
                pos: self.progress[t.0 as usize] as u16,
            };
            let matches = match pk.a.kind {
                ActionKind::Isu { var, val } => {
                    want == NodeKind::Write { var, val } && self.store_order_admits(node_id, var)
                }
                ActionKind::Rd { var, val } => {
                    want == NodeKind::Read { var, val } && {
                        let actual = match pk.a.src.expect("read without source") {
                            ReadSrc::Initial => None,
                            ReadSrc::From(w) => Some(self.wref_node[&w]),
                        };
                        actual == self.req_src.get(&node_id).copied()
                    }
                }
                ActionKind::Hvc { var, pred, .. } => want == NodeKind::Havoc { var, pred },
                ActionKind::Com { .. } | ActionKind::Tau => false,
            };
            if !matches {
                continue;
            }
            let undo = ScModel::apply(self.p, &mut self.state, &mut self.ctx, &pk);
            self.steps.push(pk.a);
            if let Some(b) = pk.b {
                self.steps.push(b);
            }
            let committed_var = match pk.a.kind {
                ActionKind::Isu { var, .. } => {
                    self.committed[var.0 as usize].push(node_id);
                    Some(var)
                }
                _ => None,
            };
            let recorded_hvc = if let ActionKind::Hvc { .. } = pk.a.kind {
                let src = match pk.a.src.expect("havoc without source") {
                    ReadSrc::Initial => None,
                    ReadSrc::From(w) => Some(self.wref_node[&w]),
                };
                self.hvc_sources.insert(node_id, src);
                true
            } else {
                false
            };
            if let Some(wref) = pk.a.wref {
                self.wref_node.insert(wref, node_id);
            }
            self.progress[t.0 as usize] += 1;
            let hit = self.run();
            self.progress[t.0 as usize] -= 1;
            if let Some(wref) = pk.a.wref {
                self.wref_node.remove(&wref);
            }
            if recorded_hvc {
                self.hvc_sources.remove(&node_id);
            }
            if let Some(var) = committed_var {
                self.committed[var.0 as usize].pop();
            }
            if pk.b.is_some() {
                self.steps.pop();
            }
            self.steps.pop();
            ScModel::revert(self.p, &mut self.state, &mut self.ctx, undo);
            if hit {
                return true;
            }
        }
        false
    }
}

/// Is there an SC execution of `p`, within `max_steps`, whose trace equals
/// `target`?
pub fn sc_trace_match_exists(p: &Program, target: &Trace, max_steps: u32) -> bool {
    MatchSearch::new(p, target, max_steps).run()
}

// ---------------------------------------------------------------------------
// Robustness
// ---------------------------------------------------------------------------

fn execution_matches_sc(
    p: &Program,
    steps: &[Step],
    variant: TraceVariant,
    max_steps: u32,
    cache: &Mutex<HashMap<CanonicalTrace, bool>>,
) -> bool {
    let e = Execution::new(steps.to_vec());
    if e.is_sc_shaped() {
        return true;
    }
    let tr = build_trace(p, steps, variant);
    if !hb_acyclic(&tr) {
        return false;
    }
    let key = tr.canonical();
    if let Some(&v) = cache.lock().unwrap().get(&key) {
        return v;
    }
    let v = sc_trace_match_exists(p, &tr, max_steps);
    cache.lock().unwrap().insert(key, v);
    v
}

/// Decide bounded trace robustness, returning the first violating TSO
/// execution in deterministic exploration order as witness.
pub fn check_robustness(
    p: &Program,
    bounds: Bounds,
    variant: TraceVariant,
    jobs: usize,
) -> RobustnessVerdict {
    let cache: Mutex<HashMap<CanonicalTrace, bool>> = Mutex::new(HashMap::new());
    let (roots, root_flags) = root_packets::<TsoModel>(p, bounds);
    let best = AtomicUsize::new(usize::MAX);

    struct SubtreeOutcome {
        violation: Option<Execution>,
        stats: ExploreStats,
    }

    let outcomes = run_subtrees(roots.len(), jobs, |i| {
        let mut violation = None;
        if best.load(Ordering::Relaxed) < i {
            return SubtreeOutcome {
                violation,
                stats: ExploreStats::default(),
            };
        }
        let stats = explore_subtree::<TsoModel>(p, bounds, &roots[i], &mut |steps, _| {
            if best.load(Ordering::Relaxed) < i {
                return Visit::Stop;
            }
            if !execution_matches_sc(p, steps, variant, bounds.max_steps, &cache) {
                violation = Some(Execution::new(steps.to_vec()));
                best.fetch_min(i, Ordering::Relaxed);
                return Visit::Stop;
            }
            Visit::Continue
        });
        SubtreeOutcome { violation, stats }
    });

    let mut total = ExploreStats {
        yielded: 1, // the empty execution
        truncated: root_flags.cap_blocked,
        stuck: root_flags.stuck as u64,
        cut_nonempty: 0,
    };
    for outcome in &outcomes {
        if let Some(w) = &outcome.violation {
            return RobustnessVerdict {
                status: RobustStatus::NotRobust,
                variant,
                bounds,
                witness: Some(w.clone()),
                truncated: false,
                tso_executions: None,
            };
        }
        total.merge(&outcome.stats);
    }
    RobustnessVerdict {
        status: RobustStatus::Robust,
        variant,
        bounds,
        witness: None,
        truncated: total.truncated,
        tso_executions: Some(total.yielded),
    }
}

/// First violating TSO execution (in exploration order) that also satisfies
/// `pred`. Used to dig out specific counterexample shapes.
pub fn find_violation_where(
    p: &Program,
    bounds: Bounds,
    variant: TraceVariant,
    pred: &dyn Fn(&Execution) -> bool,
) -> Option<Execution> {
    let cache: Mutex<HashMap<CanonicalTrace, bool>> = Mutex::new(HashMap::new());
    let mut found = None;
    explore_all::<TsoModel>(p, bounds, &mut |steps, _| {
        let e = Execution::new(steps.to_vec());
        if !pred(&e) {
            return Visit::Continue;
        }
        if !execution_matches_sc(p, steps, variant, bounds.max_steps, &cache) {
            found = Some(e);
            return Visit::Stop;
        }
        Visit::Continue
    });
    found
}

// ---------------------------------------------------------------------------
// Reachable shared valuations
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemModel {
    Sc,
    Tso,
}

impl std::fmt::Display for MemModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MemModel::Sc => write!(f, "sc"),
            MemModel::Tso => write!(f, "tso"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValuationSet {
    pub set: BTreeSet<Vec<i64>>,
    /// The state graph saturated below the bounds: no successor was cut off.
    pub complete: bool,
    pub stuck: u64,
    pub states: u64,
}

fn valuation_bfs<M: Model, K: std::hash::Hash + Eq>(
    p: &Program,
    bounds: Bounds,
    key: impl Fn(&M::State) -> K,
    record: impl Fn(&M::State) -> bool,
    shared: impl Fn(&M::State) -> Vec<i64>,
) -> ValuationSet {
    let mut out = ValuationSet {
        set: BTreeSet::new(),
        complete: true,
        stuck: 0,
        states: 0,
    };
    let max = bounds.max_steps as usize;
    let mut buckets: Vec<Vec<M::State>> = vec![Vec::new(); max + 1];
    let mut seen: std::collections::HashSet<K> = std::collections::HashSet::new();
    let init = M::initial(p);
    seen.insert(key(&init));
    buckets[0].push(init);

    for depth in 0..=max {
        let layer = std::mem::take(&mut buckets[depth]);
        for state in layer {
            out.states += 1;
            if record(&state) {
                out.set.insert(shared(&state));
            }
            let mut packets = Vec::new();
            let mut flags = PacketFlags::default();
            let ctx = StepCtx::new(p);
            M::packets(p, &state, &ctx, bounds.buf_cap, &mut packets, &mut flags);
            out.stuck += flags.stuck as u64;
            if flags.cap_blocked {
                out.complete = false;
            }
            for pk in &packets {
                let nd = depth + pk.len();
                if nd > max {
                    out.complete = false;
                    continue;
                }
                let mut next = state.clone();
                let mut c = ctx.clone();
                M::apply(p, &mut next, &mut c, pk);
                let k = key(&next);
                if seen.insert(k) {
                    buckets[nd].push(next);
                }
            }
        }
    }
    out
}

/// Shared-variable valuations reachable within the bounds. Under TSO only
/// states with all buffers drained count (initial and intermediate ones
/// included); exploration itself runs through buffered states.
pub fn reachable_valuations(p: &Program, model: MemModel, bounds: Bounds) -> ValuationSet {
    match model {
        MemModel::Sc => valuation_bfs::<ScModel, _>(
            p,
            bounds,
            |s| s.clone(),
            |_| true,
            |s| s.mem[..p.n_shared()].to_vec(),
        ),
        MemModel::Tso => valuation_bfs::<TsoModel, _>(
            p,
            bounds,
            |s| s.semantic_key(),
            |s| s.buffers_empty(),
            |s| s.mem[..p.n_shared()].to_vec(),
        ),
    }
}

/// Pretty valuation for reports: `x=0 y=1 ...`.
pub fn render_valuation(p: &Program, vals: &[i64]) -> String {
    vals.iter()
        .enumerate()
        .map(|(i, v)| format!("{}={}", p.shared[i], v))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    #[test]
    fn straight_line_single_thread_is_robust() {
        let p = parse_program(
            "program one vars x y;
             thread t regs r; init l0;
             begin l0: x := 1; goto l1; l1: y := 2; goto l2; l2: r := x; goto fin; end",
        )
        .unwrap();
        let v = check_robustness(&p, Bounds::new(10, 2), TraceVariant::Extended, 1);
        assert!(v.is_robust());
        assert!(!v.truncated);
    }

    #[test]
    fn classic_store_buffering_is_not_robust() {
        let p = parse_program(
            "program sb vars x y;
             thread a regs r1; init l0; begin l0: x := 1; goto l1; l1: r1 := y; goto fin; end
             thread b regs r2; init m0; begin m0: y := 1; goto m1; m1: r2 := x; goto fin; end",
        )
        .unwrap();
        for variant in [TraceVariant::Standard, TraceVariant::Extended] {
            let v = check_robustness(&p, Bounds::new(8, 2), variant, 1);
            assert_eq!(v.status, RobustStatus::NotRobust, "{variant}");
            let w = v.witness.unwrap();
            assert!(!w.is_sc_shaped());
        }
    }

    #[test]
    fn sc_and_tso_valuations_agree_on_single_thread() {
        let p = parse_program(
            "program one vars x;
             thread t regs; init l0; begin l0: x := 1; goto l1; l1: x := 2; goto fin; end",
        )
        .unwrap();
        let sc = reachable_valuations(&p, MemModel::Sc, Bounds::new(8, 2));
        let tso = reachable_valuations(&p, MemModel::Tso, Bounds::new(8, 2));
        assert_eq!(sc.set, tso.set);
        assert!(sc.complete && tso.complete);
        let expected: BTreeSet<Vec<i64>> = [vec![0], vec![1], vec![2]].into_iter().collect();
        assert_eq!(sc.set, expected);
    }

    #[test]
    fn parallel_and_sequential_verdicts_agree() {
        let p = parse_program(
            "program sb vars x y;
             thread a regs r1; init l0; begin l0: x := 1; goto l1; l1: r1 := y; goto fin; end
             thread b regs r2; init m0; begin m0: y := 1; goto m1; m1: r2 := x; goto fin; end",
        )
        .unwrap();
        let v1 = check_robustness(&p, Bounds::new(8, 2), TraceVariant::Extended, 1);
        let v4 = check_robustness(&p, Bounds::new(8, 2), TraceVariant::Extended, 4);
        assert_eq!(v1.status, v4.status);
        assert_eq!(v1.witness, v4.witness);
    }
}
