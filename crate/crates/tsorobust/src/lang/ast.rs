//! Program representation: threads of labeled, goto-linked instructions over
//! a finite set of shared variables and per-thread registers.
//!
//! Names are resolved to dense indices at parse time; the tables here keep
//! the original spellings for printing and reports. A memory valuation is a
//! flat `Vec<i64>` laid out as shared variables followed by all registers.

use std::fmt;

use super::expr::{BExpr, Domain, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tid(pub u16);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u16);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegId(pub u16);

/// Label index within its owning thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelId(pub u16);

/// Index into `Program::instrs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InstrId(pub u32);

impl fmt::Display for Tid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Reference to a shared location: either a variable or an array cell
/// selected by a register at execution time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRef {
    Plain(VarId),
    /// `base[index]` where `base` names a declared array and `index` is a
    /// register of the owning thread. Out-of-range indices make the
    /// instruction stuck.
    Cell {
        array: u16,
        index: RegId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    /// `var := expr`; a write instruction.
    Write {
        dst: VarRef,
        src: Expr,
    },
    /// `reg := expr`; register-local assignment.
    Local {
        dst: RegId,
        src: Expr,
    },
    /// `reg := var`; a read instruction.
    Read {
        dst: RegId,
        src: VarRef,
    },
    Fence,
    /// `reg := cas(var, expected, new)`.
    Cas {
        dst: RegId,
        var: VarRef,
        expected: Expr,
        new: Expr,
    },
    Skip,
    Assume {
        cond: BExpr,
    },
    /// `havoc(reg, phi)`; assigns `reg` any value satisfying `phi`, where
    /// `phi` mentions the thread's registers and exactly one shared variable.
    Havoc {
        dst: RegId,
        var: VarId,
        pred: BExpr,
    },
}

impl Instruction {
    pub fn is_write(&self) -> bool {
        matches!(self, Instruction::Write { .. })
    }

    pub fn is_read_like(&self) -> bool {
        matches!(self, Instruction::Read { .. } | Instruction::Havoc { .. })
    }
}

/// One labeled instruction together with its control-flow successor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstrData {
    pub tid: Tid,
    pub label: LabelId,
    /// Position among the instructions sharing this label (source order).
    pub slot: u16,
    pub op: Instruction,
    pub goto: LabelId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelInfo {
    pub name: String,
    /// Instructions assigned to this label; empty for halt labels that only
    /// ever appear as goto targets.
    pub instrs: Vec<InstrId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thread {
    pub name: String,
    /// Global register ids owned by this thread, in declaration order.
    pub regs: Vec<RegId>,
    pub init: LabelId,
    pub labels: Vec<LabelInfo>,
}

impl Thread {
    pub fn label_named(&self, name: &str) -> Option<LabelId> {
        self.labels
            .iter()
            .position(|l| l.name == name)
            .map(|i| LabelId(i as u16))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayDecl {
    pub name: String,
    /// Shared variable ids of the cells `name_0 .. name_{len-1}`.
    pub cells: Vec<VarId>,
}

/// An abstraction annotation carried in the source file:
/// `abstract l: havoc(r, phi);` inside a thread body. Inert until applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub tid: Tid,
    pub label: LabelId,
    pub reg: RegId,
    pub var: VarId,
    pub pred: BExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub name: String,
    pub domain: Domain,
    /// Shared variable names; array cells appear here under their flattened
    /// names (`items_0`, ...).
    pub shared: Vec<String>,
    pub arrays: Vec<ArrayDecl>,
    /// Global register table: (owning thread, name).
    pub regs: Vec<(Tid, String)>,
    pub threads: Vec<Thread>,
    pub instrs: Vec<InstrData>,
    pub annotations: Vec<Annotation>,
}

impl Program {
    pub fn n_threads(&self) -> usize {
        self.threads.len()
    }

    pub fn n_shared(&self) -> usize {
        self.shared.len()
    }

    /// Size of a memory valuation: shared variables then all registers.
    pub fn mem_size(&self) -> usize {
        self.shared.len() + self.regs.len()
    }

    pub fn reg_loc(&self, r: RegId) -> usize {
        self.shared.len() + r.0 as usize
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.shared[v.0 as usize]
    }

    pub fn reg_name(&self, r: RegId) -> &str {
        &self.regs[r.0 as usize].1
    }

    pub fn thread_name(&self, t: Tid) -> &str {
        &self.threads[t.0 as usize].name
    }

    pub fn thread_named(&self, name: &str) -> Option<Tid> {
        self.threads
            .iter()
            .position(|t| t.name == name)
            .map(|i| Tid(i as u16))
    }

    pub fn instr(&self, id: InstrId) -> &InstrData {
        &self.instrs[id.0 as usize]
    }

    pub fn label_name(&self, t: Tid, l: LabelId) -> &str {
        &self.threads[t.0 as usize].labels[l.0 as usize].name
    }

    /// Instructions assigned to a label. Accepts `label` or `thread.label`;
    /// a bare label that occurs in several threads is rejected as ambiguous.
    pub fn instructions_of(&self, spec: &str) -> Result<&[InstrId], LookupError> {
        if let Some((tname, lname)) = spec.split_once('.') {
            let tid = self
                .thread_named(tname)
                .ok_or_else(|| LookupError::UnknownThread(tname.to_string()))?;
            let thread = &self.threads[tid.0 as usize];
            let label = thread
                .label_named(lname)
                .ok_or_else(|| LookupError::UnknownLabel(spec.to_string()))?;
            return Ok(&thread.labels[label.0 as usize].instrs);
        }
        let mut found: Option<(Tid, LabelId)> = None;
        for (i, thread) in self.threads.iter().enumerate() {
            if let Some(l) = thread.label_named(spec) {
                if found.is_some() {
                    return Err(LookupError::AmbiguousLabel(spec.to_string()));
                }
                found = Some((Tid(i as u16), l));
            }
        }
        match found {
            Some((t, l)) => Ok(&self.threads[t.0 as usize].labels[l.0 as usize].instrs),
            None => Err(LookupError::UnknownLabel(spec.to_string())),
        }
    }

    /// Display name of a shared reference as written in the source.
    pub fn var_ref_name(&self, r: VarRef) -> String {
        match r {
            VarRef::Plain(v) => self.shared[v.0 as usize].clone(),
            VarRef::Cell { array, index } => {
                format!(
                    "{}[{}]",
                    self.arrays[array as usize].name,
                    self.reg_name(index)
                )
            }
        }
    }

    /// Resolve a shared reference against a register file; `None` when the
    /// index register is out of the array's range.
    pub fn resolve_ref(&self, r: VarRef, regs: &[i64]) -> Option<VarId> {
        match r {
            VarRef::Plain(v) => Some(v),
            VarRef::Cell { array, index } => {
                let idx = regs[index.0 as usize];
                let cells = &self.arrays[array as usize].cells;
                if idx < 0 || idx as usize >= cells.len() {
                    None
                } else {
                    Some(cells[idx as usize])
                }
            }
        }
    }

    /// Human-readable identity of an instruction: `thread.label[slot]`.
    pub fn instr_display(&self, id: InstrId) -> String {
        let d = self.instr(id);
        let slot = if d.slot == 0 {
            String::new()
        } else {
            format!("#{}", d.slot)
        };
        format!(
            "{}.{}{}",
            self.thread_name(d.tid),
            self.label_name(d.tid, d.label),
            slot
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LookupError {
    #[error("unknown thread '{0}'")]
    UnknownThread(String),
    #[error("unknown label '{0}'")]
    UnknownLabel(String),
    #[error("label '{0}' occurs in more than one thread; qualify as thread.label")]
    AmbiguousLabel(String),
}
