//! Read abstraction: replacing `reg := var` with `havoc(reg, phi)` for a
//! predicate weaker than `reg == var`.
//!
//! The weakening condition (whenever the register equals the variable, the
//! predicate holds) is validated by brute-force enumeration over the
//! domain, which guarantees the abstracted program can always reproduce the
//! original read. The abstracted program then reaches at least the shared
//! valuations of the original under both SC and TSO; `check_abstraction_
//! soundness` verifies that inclusion at bounded depth.

use thiserror::Error;

use crate::explore::Bounds;
use crate::lang::expr::{bexpr_regs, bexpr_vars, eval_bool, EvalCtx};
use crate::lang::{Annotation, BExpr, Instruction, LabelId, Program, RegId, Tid, VarId};
use crate::robust::{reachable_valuations, MemModel};

/// One read-to-havoc rewrite: the targeted read instruction and the
/// replacement predicate over the thread's registers and the read variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractionSpec {
    pub tid: Tid,
    pub label: LabelId,
    pub reg: RegId,
    pub var: VarId,
    pub pred: BExpr,
}

impl AbstractionSpec {
    pub fn from_annotation(a: &Annotation) -> AbstractionSpec {
        AbstractionSpec {
            tid: a.tid,
            label: a.label,
            reg: a.reg,
            var: a.var,
            pred: a.pred.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum AbstractionError {
    #[error("target {thread}.{label} is not a single read instruction")]
    NotARead { thread: String, label: String },
    #[error("predicate mentions shared variable '{found}' but the read targets '{expect}'")]
    VariableMismatch { expect: String, found: String },
    #[error("predicate constrains register '{found}' but the read assigns '{expect}'")]
    RegisterMismatch { expect: String, found: String },
    #[error(
        "predicate is not weaker than equality: reg={reg_val} var={var_val} regs {regs:?} falsifies it"
    )]
    NotWeaker {
        reg_val: i64,
        var_val: i64,
        regs: Vec<(String, i64)>,
    },
    #[error("two abstraction specs target {thread}.{label}")]
    Overlap { thread: String, label: String },
}

/// The single read instruction at the spec's target, if it is one.
fn target_read(p: &Program, spec: &AbstractionSpec) -> Option<crate::lang::InstrId> {
    let thread = &p.threads[spec.tid.0 as usize];
    let instrs = &thread.labels[spec.label.0 as usize].instrs;
    match instrs.as_slice() {
        [only] if matches!(p.instr(*only).op, Instruction::Read { .. }) => Some(*only),
        _ => None,
    }
}

/// Check the weakening condition: for every domain value `v` (as both the
/// variable's and the register's value) and every valuation of the other
/// registers occurring in the predicate, `reg == var` implies the predicate.
pub fn validate_weakening(p: &Program, spec: &AbstractionSpec) -> Result<(), AbstractionError> {
    let thread_name = p.thread_name(spec.tid).to_string();
    let label_name = p.label_name(spec.tid, spec.label).to_string();
    let target = target_read(p, spec).ok_or_else(|| AbstractionError::NotARead {
        thread: thread_name.clone(),
        label: label_name.clone(),
    })?;
    match &p.instr(target).op {
        Instruction::Read { dst, src } => {
            let src_var = match src {
                crate::lang::VarRef::Plain(v) => *v,
                _ => {
                    return Err(AbstractionError::NotARead {
                        thread: thread_name,
                        label: label_name,
                    })
                }
            };
            if src_var != spec.var {
                return Err(AbstractionError::VariableMismatch {
                    expect: p.var_name(src_var).to_string(),
                    found: p.var_name(spec.var).to_string(),
                });
            }
            if *dst != spec.reg {
                return Err(AbstractionError::RegisterMismatch {
                    expect: p.reg_name(*dst).to_string(),
                    found: p.reg_name(spec.reg).to_string(),
                });
            }
        }
        _ => unreachable!("target_read only returns reads"),
    }
    let mut vars = Vec::new();
    bexpr_vars(&spec.pred, &mut vars);
    if let Some(v) = vars.iter().find(|v| **v != spec.var) {
        return Err(AbstractionError::VariableMismatch {
            expect: p.var_name(spec.var).to_string(),
            found: p.var_name(*v).to_string(),
        });
    }

    // Registers the predicate actually mentions, minus the target register.
    let mut pred_regs = Vec::new();
    bexpr_regs(&spec.pred, &mut pred_regs);
    pred_regs.retain(|r| *r != spec.reg);

    let dom_vals: Vec<i64> = p.domain.values().collect();
    let mut regs = vec![0i64; p.regs.len()];
    // Enumerate assignments to the other registers by counting in base |D|.
    let combos = dom_vals.len().pow(pred_regs.len() as u32);
    for combo in 0..combos {
        let mut c = combo;
        for r in &pred_regs {
            regs[r.0 as usize] = dom_vals[c % dom_vals.len()];
            c /= dom_vals.len();
        }
        for &v in &dom_vals {
            regs[spec.reg.0 as usize] = v;
            let holds = eval_bool(
                &spec.pred,
                &EvalCtx {
                    domain: &p.domain,
                    regs: &regs,
                    var: Some((spec.var, v)),
                },
            );
            if !holds {
                return Err(AbstractionError::NotWeaker {
                    reg_val: v,
                    var_val: v,
                    regs: pred_regs
                        .iter()
                        .map(|r| (p.reg_name(*r).to_string(), regs[r.0 as usize]))
                        .collect(),
                });
            }
        }
    }
    Ok(())
}

/// Replace the targeted reads by havoc instructions. All specs must
/// validate; a label may be targeted at most once.
pub fn apply_abstraction(
    p: &Program,
    specs: &[AbstractionSpec],
) -> Result<Program, AbstractionError> {
    for (i, s) in specs.iter().enumerate() {
        if specs[..i]
            .iter()
            .any(|o| o.tid == s.tid && o.label == s.label)
        {
            return Err(AbstractionError::Overlap {
                thread: p.thread_name(s.tid).to_string(),
                label: p.label_name(s.tid, s.label).to_string(),
            });
        }
        validate_weakening(p, s)?;
    }
    let mut out = p.clone();
    for s in specs {
        let target = target_read(p, s).expect("validated above");
        out.instrs[target.0 as usize].op = Instruction::Havoc {
            dst: s.reg,
            var: s.var,
            pred: s.pred.clone(),
        };
    }
    // The rewritten reads are havocs now; stale annotations for them would
    // no longer validate.
    out.annotations
        .retain(|a| !specs.iter().any(|s| s.tid == a.tid && s.label == a.label));
    Ok(out)
}

/// Bounded abstraction soundness: every shared valuation of `p` is one of
/// `abstracted` under the given model.
pub fn check_abstraction_soundness(
    p: &Program,
    abstracted: &Program,
    model: MemModel,
    bounds: Bounds,
) -> bool {
    let a = reachable_valuations(p, model, bounds);
    let b = reachable_valuations(abstracted, model, bounds);
    a.set.is_subset(&b.set)
}

/// Parse a `--abstract thread:label:predicate` specification against a
/// program. The predicate grammar is the havoc varbexpr grammar.
pub fn parse_spec_flag(p: &Program, flag: &str) -> Result<AbstractionSpec, String> {
    let mut parts = flag.splitn(3, ':');
    let (Some(tname), Some(lname), Some(pred_text)) = (parts.next(), parts.next(), parts.next())
    else {
        return Err(format!("expected thread:label:predicate, got '{flag}'"));
    };
    let tid = p
        .thread_named(tname)
        .ok_or_else(|| format!("unknown thread '{tname}'"))?;
    let label = p.threads[tid.0 as usize]
        .label_named(lname)
        .ok_or_else(|| format!("unknown label '{lname}' in thread '{tname}'"))?;
    let instrs = &p.threads[tid.0 as usize].labels[label.0 as usize].instrs;
    let (reg, var) = match instrs
        .iter()
        .map(|&i| &p.instr(i).op)
        .collect::<Vec<_>>()
        .as_slice()
    {
        [Instruction::Read {
            dst,
            src: crate::lang::VarRef::Plain(v),
        }] => (*dst, *v),
        _ => {
            return Err(format!(
                "{tname}.{lname} is not a single plain read instruction"
            ))
        }
    };
    // Reuse the program parser on a synthetic havoc to parse the predicate
    // in the right scope.
    let pred = parse_pred_in_scope(p, tid, reg, pred_text)?;
    Ok(AbstractionSpec {
        tid,
        label,
        reg,
        var,
        pred,
    })
}

/// Parse a predicate in the scope of one thread by round-tripping through a
/// one-instruction program that shares the declarations of `p`.
fn parse_pred_in_scope(
    p: &Program,
    tid: Tid,
    reg: RegId,
    pred_text: &str,
) -> Result<BExpr, String> {
    use std::fmt::Write;
    let mut src = String::new();
    let _ = write!(src, "program scope\ndomain {};\nvars", p.domain);
    let mut skip_until = 0usize;
    for (i, name) in p.shared.iter().enumerate() {
        if i < skip_until {
            continue;
        }
        if let Some(arr) = p
            .arrays
            .iter()
            .find(|a| a.cells.first() == Some(&VarId(i as u16)))
        {
            let _ = write!(src, " {}[{}]", arr.name, arr.cells.len());
            skip_until = i + arr.cells.len();
        } else {
            let _ = write!(src, " {name}");
        }
    }
    src.push_str(";\n");
    for (ti, thread) in p.threads.iter().enumerate() {
        let _ = write!(src, "thread {}\n  regs", thread.name);
        for r in &thread.regs {
            let _ = write!(src, " {}", p.reg_name(*r));
        }
        src.push_str(";\n  init l0;\n  begin\n");
        if ti == tid.0 as usize {
            let _ = writeln!(
                src,
                "    l0: havoc({}, {pred_text}); goto l0;",
                p.reg_name(reg)
            );
        } else {
            src.push_str("    l0: skip; goto l0;\n");
        }
        src.push_str("  end\n");
    }
    let parsed = crate::lang::parse_program(&src).map_err(|e| e.to_string())?;
    let havoc = parsed
        .instrs
        .iter()
        .find(|d| matches!(d.op, Instruction::Havoc { .. }))
        .expect("synthetic havoc");
    match &havoc.op {
        Instruction::Havoc { pred, .. } => Ok(pred.clone()),
        _ => unreachable!(),
    }
}
