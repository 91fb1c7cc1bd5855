//! The input language: labeled goto programs over shared variables and
//! per-thread registers, with `fence`, `cas`, `assume` and `havoc`.

pub mod ast;
pub mod expr;
pub mod parser;
pub mod printer;

pub use ast::{
    Annotation, ArrayDecl, InstrData, InstrId, Instruction, LabelId, LabelInfo, LookupError,
    Program, RegId, Thread, Tid, VarId, VarRef,
};
pub use expr::{eval_bool, eval_expr, BExpr, BinOp, CmpOp, Domain, EvalCtx, Expr, PredSet};
pub use parser::{parse_program, ParseError};
pub use printer::print_program;
