//! Expressions, the finite value domain, and evaluation.
//!
//! Arithmetic is total: `+ - *` wrap around into the domain, comparisons and
//! boolean connectives are defined everywhere. A `varbexpr` (used by `havoc`
//! and by abstraction predicates) may additionally mention one shared
//! variable; plain arithmetic and boolean expressions range over registers
//! and literals only.

use std::fmt;

use serde::Serialize;

use super::ast::{RegId, VarId};

/// Finite integer domain of all variables and registers. Always contains 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Domain {
    pub lo: i64,
    pub hi: i64,
}

impl Domain {
    pub const DEFAULT: Domain = Domain { lo: 0, hi: 3 };

    pub fn size(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Wrap an arbitrary integer into the domain.
    pub fn wrap(&self, v: i64) -> i64 {
        let n = self.hi - self.lo + 1;
        self.lo + (v - self.lo).rem_euclid(n)
    }

    pub fn index(&self, v: i64) -> usize {
        debug_assert!(self.contains(v));
        (v - self.lo) as usize
    }

    pub fn value(&self, idx: usize) -> i64 {
        self.lo + idx as i64
    }

    pub fn values(&self) -> impl Iterator<Item = i64> + '_ {
        self.lo..=self.hi
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

/// A closed predicate over the domain, stored extensionally as the set of
/// satisfying values. This is what a havoc action carries once the registers
/// have been instantiated: only the shared variable stays free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredSet(pub u64);

impl PredSet {
    pub fn empty() -> PredSet {
        PredSet(0)
    }

    pub fn insert(&mut self, dom: &Domain, v: i64) {
        self.0 |= 1u64 << dom.index(v);
    }

    pub fn holds(&self, dom: &Domain, v: i64) -> bool {
        dom.contains(v) && self.0 & (1u64 << dom.index(v)) != 0
    }

    pub fn values<'a>(&'a self, dom: &'a Domain) -> impl Iterator<Item = i64> + 'a {
        dom.values().filter(move |&v| self.holds(dom, v))
    }

    pub fn render(&self, dom: &Domain) -> String {
        let vals: Vec<String> = self.values(dom).map(|v| v.to_string()).collect();
        format!("{{{}}}", vals.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn apply(&self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// Arithmetic expression over registers, literals and (in varbexpr position
/// only) a single shared variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(i64),
    Reg(RegId),
    Var(VarId),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

/// Boolean expression. The conditional form `c ? a : b` selects between two
/// boolean branches.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BExpr {
    Lit(bool),
    Cmp(CmpOp, Expr, Expr),
    Not(Box<BExpr>),
    And(Box<BExpr>, Box<BExpr>),
    Or(Box<BExpr>, Box<BExpr>),
    Cond(Box<BExpr>, Box<BExpr>, Box<BExpr>),
}

/// Evaluation context: the register file plus an optional binding for the one
/// shared variable a varbexpr may mention.
pub struct EvalCtx<'a> {
    pub domain: &'a Domain,
    pub regs: &'a [i64],
    pub var: Option<(VarId, i64)>,
}

impl EvalCtx<'_> {
    fn var_value(&self, v: VarId) -> i64 {
        match self.var {
            Some((bound, val)) if bound == v => val,
            _ => panic!("unbound shared variable in expression (validator bug)"),
        }
    }
}

/// Total evaluation; arithmetic wraps into the domain at every node.
pub fn eval_expr(e: &Expr, ctx: &EvalCtx) -> i64 {
    match e {
        Expr::Lit(v) => ctx.domain.wrap(*v),
        Expr::Reg(r) => ctx.regs[r.0 as usize],
        Expr::Var(v) => ctx.var_value(*v),
        Expr::Bin(op, a, b) => {
            let a = eval_expr(a, ctx);
            let b = eval_expr(b, ctx);
            let raw = match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
            };
            ctx.domain.wrap(raw)
        }
    }
}

pub fn eval_bool(b: &BExpr, ctx: &EvalCtx) -> bool {
    match b {
        BExpr::Lit(v) => *v,
        BExpr::Cmp(op, a, b) => op.apply(eval_expr(a, ctx), eval_expr(b, ctx)),
        BExpr::Not(inner) => !eval_bool(inner, ctx),
        BExpr::And(a, b) => eval_bool(a, ctx) && eval_bool(b, ctx),
        BExpr::Or(a, b) => eval_bool(a, ctx) || eval_bool(b, ctx),
        BExpr::Cond(c, t, e) => {
            if eval_bool(c, ctx) {
                eval_bool(t, ctx)
            } else {
                eval_bool(e, ctx)
            }
        }
    }
}

pub fn expr_regs(e: &Expr, out: &mut Vec<RegId>) {
    match e {
        Expr::Lit(_) => {}
        Expr::Reg(r) => {
            if !out.contains(r) {
                out.push(*r);
            }
        }
        Expr::Var(_) => {}
        Expr::Bin(_, a, b) => {
            expr_regs(a, out);
            expr_regs(b, out);
        }
    }
}

pub fn bexpr_regs(b: &BExpr, out: &mut Vec<RegId>) {
    match b {
        BExpr::Lit(_) => {}
        BExpr::Cmp(_, a, c) => {
            expr_regs(a, out);
            expr_regs(c, out);
        }
        BExpr::Not(inner) => bexpr_regs(inner, out),
        BExpr::And(a, c) | BExpr::Or(a, c) => {
            bexpr_regs(a, out);
            bexpr_regs(c, out);
        }
        BExpr::Cond(c, t, e) => {
            bexpr_regs(c, out);
            bexpr_regs(t, out);
            bexpr_regs(e, out);
        }
    }
}

pub fn expr_vars(e: &Expr, out: &mut Vec<VarId>) {
    match e {
        Expr::Var(v) => {
            if !out.contains(v) {
                out.push(*v);
            }
        }
        Expr::Bin(_, a, b) => {
            expr_vars(a, out);
            expr_vars(b, out);
        }
        _ => {}
    }
}

pub fn bexpr_vars(b: &BExpr, out: &mut Vec<VarId>) {
    match b {
        BExpr::Lit(_) => {}
        BExpr::Cmp(_, a, c) => {
            expr_vars(a, out);
            expr_vars(c, out);
        }
        BExpr::Not(inner) => bexpr_vars(inner, out),
        BExpr::And(a, c) | BExpr::Or(a, c) => {
            bexpr_vars(a, out);
            bexpr_vars(c, out);
        }
        BExpr::Cond(c, t, e) => {
            bexpr_vars(c, out);
            bexpr_vars(t, out);
            bexpr_vars(e, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx<'a>(dom: &'a Domain, regs: &'a [i64]) -> EvalCtx<'a> {
        EvalCtx {
            domain: dom,
            regs,
            var: None,
        }
    }

    #[test]
    fn literal_evaluates_to_itself() {
        let dom = Domain::DEFAULT;
        assert_eq!(eval_expr(&Expr::Lit(0), &ctx(&dom, &[])), 0);
    }

    #[test]
    fn register_arithmetic() {
        // r0 + 1 with r0 = 41 wraps 42 into 0..3.
        let dom = Domain::DEFAULT;
        let e = Expr::Bin(
            BinOp::Add,
            Box::new(Expr::Reg(RegId(0))),
            Box::new(Expr::Lit(1)),
        );
        assert_eq!(eval_expr(&e, &ctx(&dom, &[41])), 2);
        // Without wrapping: 1 + 1 = 2.
        assert_eq!(eval_expr(&e, &ctx(&dom, &[1])), 2);
    }

    #[test]
    fn wraparound_is_total() {
        let dom = Domain::DEFAULT;
        let e = Expr::Bin(BinOp::Sub, Box::new(Expr::Lit(0)), Box::new(Expr::Lit(1)));
        assert_eq!(eval_expr(&e, &ctx(&dom, &[])), 3);
    }

    #[test]
    fn varbexpr_le_against_bound_variable() {
        // (h <= H) with h = 1 and H bound to 2.
        let dom = Domain::DEFAULT;
        let b = BExpr::Cmp(CmpOp::Le, Expr::Reg(RegId(0)), Expr::Var(VarId(0)));
        let c = EvalCtx {
            domain: &dom,
            regs: &[1],
            var: Some((VarId(0), 2)),
        };
        assert!(eval_bool(&b, &c));
    }

    #[test]
    fn conditional_selects_branch() {
        let dom = Domain::DEFAULT;
        // (r0 != 0) ? r0 == 1 : true
        let b = BExpr::Cond(
            Box::new(BExpr::Cmp(CmpOp::Ne, Expr::Reg(RegId(0)), Expr::Lit(0))),
            Box::new(BExpr::Cmp(CmpOp::Eq, Expr::Reg(RegId(0)), Expr::Lit(1))),
            Box::new(BExpr::Lit(true)),
        );
        assert!(eval_bool(&b, &ctx(&dom, &[1])));
        assert!(!eval_bool(&b, &ctx(&dom, &[2])));
        assert!(eval_bool(&b, &ctx(&dom, &[0])));
    }

    #[test]
    fn predset_roundtrip() {
        let dom = Domain::DEFAULT;
        let mut s = PredSet::empty();
        s.insert(&dom, 0);
        s.insert(&dom, 2);
        assert!(s.holds(&dom, 0));
        assert!(!s.holds(&dom, 1));
        assert_eq!(s.render(&dom), "{0,2}");
    }
}
