//! Traces: happens-before graphs over the shared-memory actions of an
//! execution.
//!
//! Nodes are the non-tau actions with each write's issue and commit unified
//! into a single node (positioned at the issue, which is where program order
//! sees it). Edges:
//!
//!   po: per-thread order of nodes (commit placement excluded by
//!        construction, since the write node sits at its issue);
//!   so: store order over commits to the same variable. The standard
//!        variant orders all of them; the extended variant keeps only pairs
//!        that wrote different values;
//!   rf: from a write node to each read that took its value, resolved
//!        operationally (buffer forwarding points at the same thread's
//!        pending write node). Reads of the initial zeroed memory have no
//!        incoming rf edge;
//!   fr: from a read to every commit that overwrites the value it read:
//!        the composition of rf (inverted) with so of the chosen variant,
//!        with the initial memory acting as a virtual zero-valued store that
//!        precedes every commit. A havoc node gets an fr edge to a commit
//!        only when that commit falsifies its instantiated predicate, or
//!        when it follows such a commit in store order.
//!
//! Havoc nodes carry no rf edge: the predicate, not the observed value, is
//! what later commits can invalidate, so their ordering constraints live
//! entirely in fr. The operational source still seeds the fr computation.

use std::collections::BTreeSet;

use crate::exec::{ActionKind, ReadSrc, Step, WriteRef};
use crate::lang::{InstrId, PredSet, Program, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceVariant {
    Standard,
    Extended,
}

impl std::fmt::Display for TraceVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceVariant::Standard => write!(f, "standard"),
            TraceVariant::Extended => write!(f, "extended"),
        }
    }
}

/// Node identity: thread index and program-order position within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub tid: u16,
    pub pos: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Write { var: VarId, val: i64 },
    Read { var: VarId, val: i64 },
    Havoc { var: VarId, pred: PredSet },
}

impl NodeKind {
    pub fn var(&self) -> VarId {
        match self {
            NodeKind::Write { var, .. }
            | NodeKind::Read { var, .. }
            | NodeKind::Havoc { var, .. } => *var,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    /// Generating instruction and its per-instruction occurrence index;
    /// reporting metadata, not part of trace equality.
    pub origin: (InstrId, u32),
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub variant: TraceVariant,
    /// Per-thread node lists in program order.
    pub nodes: Vec<Vec<Node>>,
    pub so: BTreeSet<(NodeId, NodeId)>,
    pub rf: BTreeSet<(NodeId, NodeId)>,
    pub fr: BTreeSet<(NodeId, NodeId)>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("cannot compare traces built with different variants")]
    VariantMismatch,
}

impl Trace {
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.tid as usize][id.pos as usize]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.iter().map(|t| t.len()).sum()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().enumerate().flat_map(|(t, list)| {
            (0..list.len()).map(move |i| NodeId {
                tid: t as u16,
                pos: i as u16,
            })
        })
    }

    /// Consecutive program-order edges (their transitive closure is po).
    pub fn po_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes.iter().enumerate().flat_map(|(t, list)| {
            (1..list.len()).map(move |i| {
                (
                    NodeId {
                        tid: t as u16,
                        pos: (i - 1) as u16,
                    },
                    NodeId {
                        tid: t as u16,
                        pos: i as u16,
                    },
                )
            })
        })
    }

    pub fn hb_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.po_edges()
            .chain(self.so.iter().copied())
            .chain(self.rf.iter().copied())
            .chain(self.fr.iter().copied())
    }

    /// Required rf source of each read node, if any.
    pub fn rf_source(&self, read: NodeId) -> Option<NodeId> {
        self.rf.iter().find(|(_, r)| *r == read).map(|(w, _)| *w)
    }

    /// Structural equality of the comparable content; origins are ignored.
    pub fn equal(&self, other: &Trace) -> Result<bool, TraceError> {
        if self.variant != other.variant {
            return Err(TraceError::VariantMismatch);
        }
        if self.nodes.len() != other.nodes.len() {
            return Ok(false);
        }
        for (a, b) in self.nodes.iter().zip(&other.nodes) {
            if a.len() != b.len() {
                return Ok(false);
            }
            if a.iter().zip(b).any(|(x, y)| x.kind != y.kind) {
                return Ok(false);
            }
        }
        Ok(self.so == other.so && self.rf == other.rf && self.fr == other.fr)
    }

    pub fn canonical(&self) -> CanonicalTrace {
        CanonicalTrace {
            variant: self.variant,
            nodes: self
                .nodes
                .iter()
                .map(|l| l.iter().map(|n| n.kind).collect())
                .collect(),
            so: self.so.iter().copied().collect(),
            rf: self.rf.iter().copied().collect(),
            fr: self.fr.iter().copied().collect(),
        }
    }
}

/// Hashable comparable projection of a trace, used as a set/cache key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalTrace {
    pub variant: TraceVariant,
    pub nodes: Vec<Vec<NodeKind>>,
    pub so: Vec<(NodeId, NodeId)>,
    pub rf: Vec<(NodeId, NodeId)>,
    pub fr: Vec<(NodeId, NodeId)>,
}

/// Build the trace of an execution. The execution must be complete in the
/// sense that every issued write has committed (both interpreters only yield
/// such executions).
pub fn build_trace(p: &Program, steps: &[Step], variant: TraceVariant) -> Trace {
    let n_threads = p.n_threads();
    let mut nodes: Vec<Vec<Node>> = vec![Vec::new(); n_threads];
    // Write identity -> node.
    let mut write_node: std::collections::HashMap<WriteRef, NodeId> =
        std::collections::HashMap::new();
    // Per-variable commit list in commit order: (node, value).
    let mut commits: Vec<Vec<(NodeId, i64)>> = vec![Vec::new(); p.n_shared()];
    // Read and havoc nodes wanting rf/fr resolution.
    struct PendingRead {
        node: NodeId,
        var: VarId,
        val: i64,
        src: ReadSrc,
        havoc_pred: Option<PredSet>,
    }
    let mut pending: Vec<PendingRead> = Vec::new();
    let mut occurrence: std::collections::HashMap<InstrId, u32> = std::collections::HashMap::new();

    let push_node = |nodes: &mut Vec<Vec<Node>>,
                     occurrence: &mut std::collections::HashMap<InstrId, u32>,
                     tid: u16,
                     kind: NodeKind,
                     instr: InstrId|
     -> NodeId {
        let occ = occurrence.entry(instr).or_insert(0);
        let id = NodeId {
            tid,
            pos: nodes[tid as usize].len() as u16,
        };
        nodes[tid as usize].push(Node {
            kind,
            origin: (instr, *occ),
        });
        *occ += 1;
        id
    };

    for step in steps {
        let tid = step.tid.0;
        match step.kind {
            ActionKind::Isu { var, val } => {
                let id = push_node(
                    &mut nodes,
                    &mut occurrence,
                    tid,
                    NodeKind::Write { var, val },
                    step.instr,
                );
                write_node.insert(step.wref.expect("issue without write identity"), id);
            }
            ActionKind::Com { var, val } => {
                let wref = step.wref.expect("commit without write identity");
                let id = write_node[&wref];
                commits[var.0 as usize].push((id, val));
            }
            ActionKind::Rd { var, val } => {
                let id = push_node(
                    &mut nodes,
                    &mut occurrence,
                    tid,
                    NodeKind::Read { var, val },
                    step.instr,
                );
                pending.push(PendingRead {
                    node: id,
                    var,
                    val,
                    src: step.src.expect("read without source"),
                    havoc_pred: None,
                });
            }
            ActionKind::Hvc { var, pred, .. } => {
                let id = push_node(
                    &mut nodes,
                    &mut occurrence,
                    tid,
                    NodeKind::Havoc { var, pred },
                    step.instr,
                );
                pending.push(PendingRead {
                    node: id,
                    var,
                    val: 0,
                    src: step.src.expect("havoc without source"),
                    havoc_pred: Some(pred),
                });
            }
            ActionKind::Tau => {}
        }
    }

    // Store order.
    let mut so = BTreeSet::new();
    for list in &commits {
        for i in 0..list.len() {
            for j in i + 1..list.len() {
                if variant == TraceVariant::Standard || list[i].1 != list[j].1 {
                    so.insert((list[i].0, list[j].0));
                }
            }
        }
    }

    // Read-from and from-read.
    let mut rf = BTreeSet::new();
    let mut fr = BTreeSet::new();
    for r in &pending {
        let list = &commits[r.var.0 as usize];
        // Position after which commits overwrite what was read: the source's
        // commit index, or before everything for the initial memory.
        let (start, src_val) = match r.src {
            ReadSrc::Initial => (0usize, 0i64),
            ReadSrc::From(w) => {
                let wnode = write_node[&w];
                let at = list
                    .iter()
                    .position(|(n, _)| *n == wnode)
                    .expect("read source never committed");
                (at + 1, list[at].1)
            }
        };
        match r.havoc_pred {
            None => {
                if let ReadSrc::From(w) = r.src {
                    rf.insert((write_node[&w], r.node));
                }
                for &(c, v) in &list[start..] {
                    if variant == TraceVariant::Standard || v != r.val {
                        fr.insert((r.node, c));
                    }
                }
            }
            Some(pred) => {
                // fr reaches a commit if it falsifies the instantiated
                // predicate, or follows (in the variant's store order) a
                // commit already reached.
                let mut hit_vals: Vec<i64> = Vec::new();
                for &(c, v) in &list[start..] {
                    let so_from_src = variant == TraceVariant::Standard || v != src_val;
                    let direct = so_from_src && !pred.holds(&p.domain, v);
                    let chained = hit_vals
                        .iter()
                        .any(|&hv| variant == TraceVariant::Standard || hv != v);
                    if direct || chained {
                        fr.insert((r.node, c));
                        hit_vals.push(v);
                    }
                }
            }
        }
    }

    Trace {
        variant,
        nodes,
        so,
        rf,
        fr,
    }
}

/// True iff po ∪ so ∪ rf ∪ fr is acyclic.
pub fn hb_acyclic(tr: &Trace) -> bool {
    let n_per: Vec<usize> = tr.nodes.iter().map(|l| l.len()).collect();
    let offset: Vec<usize> = n_per
        .iter()
        .scan(0, |acc, n| {
            let o = *acc;
            *acc += n;
            Some(o)
        })
        .collect();
    let total: usize = n_per.iter().sum();
    let flat = |id: NodeId| offset[id.tid as usize] + id.pos as usize;

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    let mut indeg = vec![0usize; total];
    for (a, b) in tr.hb_edges() {
        adj[flat(a)].push(flat(b));
        indeg[flat(b)] += 1;
    }
    let mut queue: Vec<usize> = (0..total).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = queue.pop() {
        seen += 1;
        for &j in &adj[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                queue.push(j);
            }
        }
    }
    seen == total
}

/// Nodes reachable from `from` by a non-empty hb path.
pub fn hb_reachable(tr: &Trace, from: NodeId) -> BTreeSet<NodeId> {
    let mut adj: std::collections::HashMap<NodeId, Vec<NodeId>> = std::collections::HashMap::new();
    for (a, b) in tr.hb_edges() {
        adj.entry(a).or_default().push(b);
    }
    let mut out = BTreeSet::new();
    let mut stack: Vec<NodeId> = adj.get(&from).cloned().unwrap_or_default();
    while let Some(n) = stack.pop() {
        if out.insert(n) {
            if let Some(next) = adj.get(&n) {
                stack.extend(next.iter().copied());
            }
        }
    }
    out
}
