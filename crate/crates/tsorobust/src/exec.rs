//! Actions, steps and executions shared by the SC and TSO interpreters.
//!
//! An execution is the sequence of transition labels of one run. Steps carry
//! bookkeeping beyond the action label itself: the generating instruction and
//! the operational source of each read, which trace construction consumes.

use crate::lang::{InstrId, PredSet, Program, Tid, VarId};

/// Identity of one write: the `k`-th issued write of a thread. Its issue and
/// commit belong to the same identity (and later to the same trace node).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WriteRef {
    pub tid: Tid,
    pub k: u32,
}

/// Where a read (or havoc) obtained its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReadSrc {
    /// The initial zero-valued memory.
    Initial,
    /// A specific write, possibly still buffered (own-buffer forwarding).
    From(WriteRef),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionKind {
    /// Write enters the store buffer. The pair written is recorded here for
    /// bookkeeping but is not part of the printed label `(t,isu)`.
    Isu {
        var: VarId,
        val: i64,
    },
    Com {
        var: VarId,
        val: i64,
    },
    Rd {
        var: VarId,
        val: i64,
    },
    Tau,
    Hvc {
        var: VarId,
        pred: PredSet,
        /// Value assigned to the destination register.
        chosen: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub tid: Tid,
    pub kind: ActionKind,
    pub instr: InstrId,
    /// For `Isu`/`Com`: the write identity.
    pub wref: Option<WriteRef>,
    /// For `Rd`/`Hvc`: the operational source.
    pub src: Option<ReadSrc>,
}

impl Step {
    /// Action label as the reports print it.
    pub fn render(&self, p: &Program) -> String {
        let t = p.thread_name(self.tid);
        match self.kind {
            ActionKind::Isu { .. } => format!("({t},isu)"),
            ActionKind::Com { var, val } => format!("({t},com,{},{val})", p.var_name(var)),
            ActionKind::Rd { var, val } => format!("({t},rd,{},{val})", p.var_name(var)),
            ActionKind::Tau => format!("({t},tau)"),
            ActionKind::Hvc { var, pred, .. } => {
                format!("({t},hvc,{},{})", p.var_name(var), pred.render(&p.domain))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Execution {
    pub steps: Vec<Step>,
}

impl Execution {
    pub fn new(steps: Vec<Step>) -> Execution {
        Execution { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// True when every issue is immediately followed by its own commit, i.e.
    /// the execution uses no buffering and is also an SC execution.
    pub fn is_sc_shaped(&self) -> bool {
        let mut i = 0;
        while i < self.steps.len() {
            if let ActionKind::Isu { .. } = self.steps[i].kind {
                match self.steps.get(i + 1) {
                    Some(next)
                        if next.tid == self.steps[i].tid
                            && matches!(next.kind, ActionKind::Com { .. })
                            && next.wref == self.steps[i].wref => {}
                    _ => return false,
                }
                i += 2;
            } else {
                i += 1;
            }
        }
        true
    }

    pub fn render(&self, p: &Program) -> Vec<String> {
        self.steps.iter().map(|s| s.render(p)).collect()
    }

    pub fn render_line(&self, p: &Program) -> String {
        self.render(p).join(" ")
    }
}
