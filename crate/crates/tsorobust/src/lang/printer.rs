//! Canonical pretty-printer. `parse_program(print_program(p)) == p` for every
//! valid program; the property suite leans on this.

use std::fmt::Write;

use super::ast::*;
use super::expr::{BExpr, BinOp, Expr};

fn expr_level(e: &Expr) -> u8 {
    match e {
        Expr::Lit(_) | Expr::Reg(_) | Expr::Var(_) => 3,
        Expr::Bin(BinOp::Mul, _, _) => 2,
        Expr::Bin(_, _, _) => 1,
    }
}

fn write_expr(out: &mut String, p: &Program, e: &Expr) {
    match e {
        Expr::Lit(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Reg(r) => out.push_str(p.reg_name(*r)),
        Expr::Var(v) => out.push_str(p.var_name(*v)),
        Expr::Bin(op, a, b) => {
            let my = expr_level(e);
            if expr_level(a) < my {
                out.push('(');
                write_expr(out, p, a);
                out.push(')');
            } else {
                write_expr(out, p, a);
            }
            let _ = write!(out, " {} ", op.symbol());
            if expr_level(b) <= my {
                out.push('(');
                write_expr(out, p, b);
                out.push(')');
            } else {
                write_expr(out, p, b);
            }
        }
    }
}

fn bexpr_level(b: &BExpr) -> u8 {
    match b {
        BExpr::Cond(..) => 0,
        BExpr::Or(..) => 1,
        BExpr::And(..) => 2,
        BExpr::Not(..) => 3,
        BExpr::Cmp(..) => 4,
        BExpr::Lit(_) => 5,
    }
}

fn write_bexpr(out: &mut String, p: &Program, b: &BExpr) {
    match b {
        BExpr::Lit(v) => out.push_str(if *v { "true" } else { "false" }),
        BExpr::Cmp(op, a, c) => {
            write_expr(out, p, a);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, p, c);
        }
        BExpr::Not(inner) => {
            out.push('!');
            if bexpr_level(inner) >= 5 || matches!(**inner, BExpr::Not(_)) {
                write_bexpr(out, p, inner);
            } else {
                out.push('(');
                write_bexpr(out, p, inner);
                out.push(')');
            }
        }
        BExpr::And(a, c) => {
            let paren_l = bexpr_level(a) < 2;
            let paren_r = bexpr_level(c) <= 2;
            if paren_l {
                out.push('(');
            }
            write_bexpr(out, p, a);
            if paren_l {
                out.push(')');
            }
            out.push_str(" && ");
            if paren_r {
                out.push('(');
            }
            write_bexpr(out, p, c);
            if paren_r {
                out.push(')');
            }
        }
        BExpr::Or(a, c) => {
            let paren_l = bexpr_level(a) < 1;
            let paren_r = bexpr_level(c) <= 1;
            if paren_l {
                out.push('(');
            }
            write_bexpr(out, p, a);
            if paren_l {
                out.push(')');
            }
            out.push_str(" || ");
            if paren_r {
                out.push('(');
            }
            write_bexpr(out, p, c);
            if paren_r {
                out.push(')');
            }
        }
        BExpr::Cond(cnd, t, e) => {
            if bexpr_level(cnd) == 0 {
                out.push('(');
                write_bexpr(out, p, cnd);
                out.push(')');
            } else {
                write_bexpr(out, p, cnd);
            }
            out.push_str(" ? ");
            if bexpr_level(t) == 0 {
                out.push('(');
                write_bexpr(out, p, t);
                out.push(')');
            } else {
                write_bexpr(out, p, t);
            }
            out.push_str(" : ");
            write_bexpr(out, p, e);
        }
    }
}

fn write_ref(out: &mut String, p: &Program, r: VarRef) {
    match r {
        VarRef::Plain(v) => out.push_str(p.var_name(v)),
        VarRef::Cell { array, index } => {
            let _ = write!(
                out,
                "{}[{}]",
                p.arrays[array as usize].name,
                p.reg_name(index)
            );
        }
    }
}

fn write_instruction(out: &mut String, p: &Program, op: &Instruction) {
    match op {
        Instruction::Write { dst, src } => {
            write_ref(out, p, *dst);
            out.push_str(" := ");
            write_expr(out, p, src);
        }
        Instruction::Local { dst, src } => {
            out.push_str(p.reg_name(*dst));
            out.push_str(" := ");
            write_expr(out, p, src);
        }
        Instruction::Read { dst, src } => {
            out.push_str(p.reg_name(*dst));
            out.push_str(" := ");
            write_ref(out, p, *src);
        }
        Instruction::Fence => out.push_str("fence"),
        Instruction::Cas {
            dst,
            var,
            expected,
            new,
        } => {
            out.push_str(p.reg_name(*dst));
            out.push_str(" := cas(");
            write_ref(out, p, *var);
            out.push_str(", ");
            write_expr(out, p, expected);
            out.push_str(", ");
            write_expr(out, p, new);
            out.push(')');
        }
        Instruction::Skip => out.push_str("skip"),
        Instruction::Assume { cond } => {
            out.push_str("assume ");
            write_bexpr(out, p, cond);
        }
        Instruction::Havoc { dst, pred, .. } => {
            out.push_str("havoc(");
            out.push_str(p.reg_name(*dst));
            out.push_str(", ");
            write_bexpr(out, p, pred);
            out.push(')');
        }
    }
}

/// Render one instruction as it appears in the source.
pub fn instruction_text(p: &Program, op: &Instruction) -> String {
    let mut out = String::new();
    write_instruction(&mut out, p, op);
    out
}

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "program {}", p.name);
    let _ = writeln!(out, "domain {};", p.domain);

    out.push_str("vars");
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
            let _ = write!(out, " {}[{}]", arr.name, arr.cells.len());
            skip_until = i + arr.cells.len();
        } else {
            let _ = write!(out, " {name}");
        }
    }
    out.push_str(";\n");

    for (ti, thread) in p.threads.iter().enumerate() {
        let tid = Tid(ti as u16);
        let _ = write!(out, "\nthread {}\n  regs", thread.name);
        for r in &thread.regs {
            let _ = write!(out, " {}", p.reg_name(*r));
        }
        out.push_str(";\n");
        let _ = writeln!(
            out,
            "  init {};",
            thread.labels[thread.init.0 as usize].name
        );
        out.push_str("  begin\n");
        for d in p.instrs.iter().filter(|d| d.tid == tid) {
            let _ = write!(out, "    {}: ", thread.labels[d.label.0 as usize].name);
            write_instruction(&mut out, p, &d.op);
            let _ = writeln!(out, "; goto {};", thread.labels[d.goto.0 as usize].name);
        }
        for a in p.annotations.iter().filter(|a| a.tid == tid) {
            let _ = write!(
                out,
                "    abstract {}: havoc({}, ",
                thread.labels[a.label.0 as usize].name,
                p.reg_name(a.reg)
            );
            write_bexpr(&mut out, p, &a.pred);
            out.push_str(");\n");
        }
        out.push_str("  end\n");
    }
    out
}
