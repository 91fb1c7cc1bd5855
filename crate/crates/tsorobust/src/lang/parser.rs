//! Parser for the program text format.
//!
//! ```text
//! program <name>
//! domain 0..3;            // optional, default 0..3
//! vars x y items[2];
//!
//! thread <name>
//!   regs r1 r2;
//!   init l0;
//!   begin
//!     l0: x := 1; goto l1;
//!     l1: r1 := cas(y, 0, 1); goto l2;
//!     abstract l2: havoc(r2, r2 <= x);
//!     l2: r2 := x; goto done;
//!   end
//! ```
//!
//! Line comments start with `//`. A label may carry several instructions
//! (nondeterministic choice); a goto target with no instructions halts the
//! thread. `vars items[2]` declares the cells `items_0` and `items_1`, which
//! are addressed either directly or as `items[r]` with a register index.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::ast::*;
use super::expr::{BExpr, BinOp, CmpOp, Domain, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("validation error at {pos}: {msg}")]
    Validation { pos: Pos, msg: String },
}

impl ParseError {
    fn syntax(pos: Pos, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            pos,
            msg: msg.into(),
        }
    }

    fn invalid(pos: Pos, msg: impl Into<String>) -> ParseError {
        ParseError::Validation {
            pos,
            msg: msg.into(),
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Assign, // :=
    Colon,
    Semi,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    DotDot,
    Plus,
    Minus,
    Star,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Not,
    AndAnd,
    OrOr,
    Question,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Int(v) => write!(f, "'{v}'"),
            Tok::Assign => write!(f, "':='"),
            Tok::Colon => write!(f, "':'"),
            Tok::Semi => write!(f, "';'"),
            Tok::Comma => write!(f, "','"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::LBracket => write!(f, "'['"),
            Tok::RBracket => write!(f, "']'"),
            Tok::DotDot => write!(f, "'..'"),
            Tok::Plus => write!(f, "'+'"),
            Tok::Minus => write!(f, "'-'"),
            Tok::Star => write!(f, "'*'"),
            Tok::EqEq => write!(f, "'=='"),
            Tok::Ne => write!(f, "'!='"),
            Tok::Lt => write!(f, "'<'"),
            Tok::Le => write!(f, "'<='"),
            Tok::Gt => write!(f, "'>'"),
            Tok::Ge => write!(f, "'>='"),
            Tok::Not => write!(f, "'!'"),
            Tok::AndAnd => write!(f, "'&&'"),
            Tok::OrOr => write!(f, "'||'"),
            Tok::Question => write!(f, "'?'"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut toks = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i];
        let pos = Pos { line, col };
        let advance = |n: usize, i: &mut usize, col: &mut u32| {
            *i += n;
            *col += n as u32;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '/' if bytes.get(i + 1) == Some(&'/') => {
                while i < bytes.len() && bytes[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                let word: String = bytes[start..i].iter().collect();
                col += (i - start) as u32;
                toks.push((Tok::Ident(word), pos));
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let word: String = bytes[start..i].iter().collect();
                col += (i - start) as u32;
                let v: i64 = word.parse().map_err(|_| {
                    ParseError::syntax(pos, format!("integer '{word}' out of range"))
                })?;
                toks.push((Tok::Int(v), pos));
            }
            ':' if bytes.get(i + 1) == Some(&'=') => {
                advance(2, &mut i, &mut col);
                toks.push((Tok::Assign, pos));
            }
            ':' => {
                advance(1, &mut i, &mut col);
                toks.push((Tok::Colon, pos));
            }
            ';' => {
                advance(1, &mut i, &mut col);
                toks.push((Tok::Semi, pos));
            }
            ',' => {
                advance(1, &mut i, &mut col);
                toks.push((Tok::Comma, pos));
            }
            '(' => {
                advance(1, &mut i, &mut col);
                toks.push((Tok::LParen, pos));
            }
            ')' => {
                advance(1, &mut i, &mut col);
                toks.push((Tok::RParen, pos));
            }
            '[' => {
                advance(1, &mut i, &mut col);
                toks.push((Tok::LBracket, pos));
            }
            ']' => {
                advance(1, &mut i, &mut col);
                toks.push((Tok::RBracket, pos));
            }
            '.' if bytes.get(i + 1) == Some(&'.') => {
                advance(2, &mut i, &mut col);
                toks.push((Tok::DotDot, pos));
            }
            '+' => {
                advance(1, &mut i, &mut col);
                toks.push((Tok::Plus, pos));
            }
            '-' => {
                advance(1, &mut i, &mut col);
                toks.push((Tok::Minus, pos));
            }
            '*' => {
                advance(1, &mut i, &mut col);
                toks.push((Tok::Star, pos));
            }
            '=' if bytes.get(i + 1) == Some(&'=') => {
                advance(2, &mut i, &mut col);
                toks.push((Tok::EqEq, pos));
            }
            '!' if bytes.get(i + 1) == Some(&'=') => {
                advance(2, &mut i, &mut col);
                toks.push((Tok::Ne, pos));
            }
            '!' => {
                advance(1, &mut i, &mut col);
                toks.push((Tok::Not, pos));
            }
            '<' if bytes.get(i + 1) == Some(&'=') => {
                advance(2, &mut i, &mut col);
                toks.push((Tok::Le, pos));
            }
            '<' => {
                advance(1, &mut i, &mut col);
                toks.push((Tok::Lt, pos));
            }
            '>' if bytes.get(i + 1) == Some(&'=') => {
                advance(2, &mut i, &mut col);
                toks.push((Tok::Ge, pos));
            }
            '>' => {
                advance(1, &mut i, &mut col);
                toks.push((Tok::Gt, pos));
            }
            '&' if bytes.get(i + 1) == Some(&'&') => {
                advance(2, &mut i, &mut col);
                toks.push((Tok::AndAnd, pos));
            }
            '|' if bytes.get(i + 1) == Some(&'|') => {
                advance(2, &mut i, &mut col);
                toks.push((Tok::OrOr, pos));
            }
            '?' => {
                advance(1, &mut i, &mut col);
                toks.push((Tok::Question, pos));
            }
            other => {
                return Err(ParseError::syntax(
                    pos,
                    format!("unexpected character '{other}'"),
                ));
            }
        }
    }
    toks.push((Tok::Eof, Pos { line, col }));
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Untyped expression tree (names unresolved, arith/bool not yet separated)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum UExpr {
    Int(i64),
    Bool(bool),
    Name(String, Pos),
    Index(String, String, Pos), // base[reg]
    Bin(BinOp, Box<UExpr>, Box<UExpr>),
    Cmp(CmpOp, Box<UExpr>, Box<UExpr>),
    Not(Box<UExpr>, Pos),
    And(Box<UExpr>, Box<UExpr>),
    Or(Box<UExpr>, Box<UExpr>),
    Cond(Box<UExpr>, Box<UExpr>, Box<UExpr>),
}

impl UExpr {
    fn pos(&self) -> Pos {
        match self {
            UExpr::Name(_, p) | UExpr::Index(_, _, p) | UExpr::Not(_, p) => *p,
            UExpr::Bin(_, a, _)
            | UExpr::Cmp(_, a, _)
            | UExpr::And(a, _)
            | UExpr::Or(a, _)
            | UExpr::Cond(a, _, _) => a.pos(),
            _ => Pos { line: 0, col: 0 },
        }
    }
}

// ---------------------------------------------------------------------------
// Raw program items
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum RawRhs {
    Expr(UExpr),
    Cas {
        var: (String, Option<String>),
        expected: UExpr,
        new: UExpr,
        pos: Pos,
    },
}

#[derive(Debug)]
enum RawInst {
    Assign {
        dst: (String, Option<String>),
        dst_pos: Pos,
        rhs: RawRhs,
    },
    Fence,
    Skip,
    Assume(UExpr),
    Havoc {
        reg: String,
        pred: UExpr,
        pos: Pos,
    },
}

#[derive(Debug)]
struct RawLinst {
    label: String,
    inst: RawInst,
    goto: String,
    goto_pos: Pos,
}

#[derive(Debug)]
struct RawAnnot {
    label: String,
    reg: String,
    pred: UExpr,
    pos: Pos,
}

#[derive(Debug)]
struct RawThread {
    name: String,
    pos: Pos,
    regs: Vec<(String, Pos)>,
    init: String,
    init_pos: Pos,
    items: Vec<RawLinst>,
    annots: Vec<RawAnnot>,
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError::syntax(
                self.pos(),
                format!("expected {want}, found {}", self.peek()),
            ))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(s) => Ok((s, pos)),
            other => Err(ParseError::syntax(
                pos,
                format!("expected {what}, found {other}"),
            )),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Ident(s) if s == kw => Ok(()),
            other => Err(ParseError::syntax(
                pos,
                format!("expected keyword '{kw}', found {other}"),
            )),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let pos = self.pos();
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            Tok::Int(v) => Ok(if neg { -v } else { v }),
            other => Err(ParseError::syntax(
                pos,
                format!("expected integer, found {other}"),
            )),
        }
    }

    // Expressions, lowest precedence first: ?: < || < && < ! < cmp < +- < *.
    fn expr(&mut self) -> Result<UExpr, ParseError> {
        let cond = self.expr_or()?;
        if *self.peek() == Tok::Question {
            self.bump();
            let then = self.expr()?;
            self.expect(Tok::Colon)?;
            let els = self.expr()?;
            Ok(UExpr::Cond(Box::new(cond), Box::new(then), Box::new(els)))
        } else {
            Ok(cond)
        }
    }

    fn expr_or(&mut self) -> Result<UExpr, ParseError> {
        let mut lhs = self.expr_and()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            let rhs = self.expr_and()?;
            lhs = UExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn expr_and(&mut self) -> Result<UExpr, ParseError> {
        let mut lhs = self.expr_not()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            let rhs = self.expr_not()?;
            lhs = UExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn expr_not(&mut self) -> Result<UExpr, ParseError> {
        if *self.peek() == Tok::Not {
            let pos = self.pos();
            self.bump();
            let inner = self.expr_not()?;
            Ok(UExpr::Not(Box::new(inner), pos))
        } else {
            self.expr_cmp()
        }
    }

    fn expr_cmp(&mut self) -> Result<UExpr, ParseError> {
        let lhs = self.expr_add()?;
        let op = match self.peek() {
            Tok::EqEq => Some(CmpOp::Eq),
            Tok::Ne => Some(CmpOp::Ne),
            Tok::Lt => Some(CmpOp::Lt),
            Tok::Le => Some(CmpOp::Le),
            Tok::Gt => Some(CmpOp::Gt),
            Tok::Ge => Some(CmpOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let rhs = self.expr_add()?;
            Ok(UExpr::Cmp(op, Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn expr_add(&mut self) -> Result<UExpr, ParseError> {
        let mut lhs = self.expr_mul()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.expr_mul()?;
            lhs = UExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn expr_mul(&mut self) -> Result<UExpr, ParseError> {
        let mut lhs = self.expr_atom()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let rhs = self.expr_atom()?;
            lhs = UExpr::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn expr_atom(&mut self) -> Result<UExpr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(v) => Ok(UExpr::Int(v)),
            Tok::Ident(s) if s == "true" => Ok(UExpr::Bool(true)),
            Tok::Ident(s) if s == "false" => Ok(UExpr::Bool(false)),
            Tok::Ident(s) => {
                if *self.peek() == Tok::LBracket {
                    self.bump();
                    let (idx, _) = self.ident("index register")?;
                    self.expect(Tok::RBracket)?;
                    Ok(UExpr::Index(s, idx, pos))
                } else {
                    Ok(UExpr::Name(s, pos))
                }
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => Err(ParseError::syntax(
                pos,
                format!("expected expression, found {other}"),
            )),
        }
    }

    fn lval(&mut self) -> Result<((String, Option<String>), Pos), ParseError> {
        let (name, pos) = self.ident("variable or register")?;
        if *self.peek() == Tok::LBracket {
            self.bump();
            let (idx, _) = self.ident("index register")?;
            self.expect(Tok::RBracket)?;
            Ok(((name, Some(idx)), pos))
        } else {
            Ok(((name, None), pos))
        }
    }

    fn instruction(&mut self) -> Result<RawInst, ParseError> {
        if self.at_keyword("fence") {
            self.bump();
            return Ok(RawInst::Fence);
        }
        if self.at_keyword("skip") {
            self.bump();
            return Ok(RawInst::Skip);
        }
        if self.at_keyword("assume") {
            self.bump();
            return Ok(RawInst::Assume(self.expr()?));
        }
        if self.at_keyword("havoc") {
            let pos = self.pos();
            self.bump();
            self.expect(Tok::LParen)?;
            let (reg, _) = self.ident("register")?;
            self.expect(Tok::Comma)?;
            let pred = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(RawInst::Havoc { reg, pred, pos });
        }
        let (dst, dst_pos) = self.lval()?;
        self.expect(Tok::Assign)?;
        if self.at_keyword("cas") {
            let pos = self.pos();
            self.bump();
            self.expect(Tok::LParen)?;
            let (var, _) = self.lval()?;
            self.expect(Tok::Comma)?;
            let expected = self.expr()?;
            self.expect(Tok::Comma)?;
            let new = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(RawInst::Assign {
                dst,
                dst_pos,
                rhs: RawRhs::Cas {
                    var,
                    expected,
                    new,
                    pos,
                },
            });
        }
        let rhs = self.expr()?;
        Ok(RawInst::Assign {
            dst,
            dst_pos,
            rhs: RawRhs::Expr(rhs),
        })
    }

    fn thread(&mut self) -> Result<RawThread, ParseError> {
        self.keyword("thread")?;
        let (name, pos) = self.ident("thread name")?;
        self.keyword("regs")?;
        let mut regs = Vec::new();
        while !matches!(self.peek(), Tok::Semi) {
            regs.push(self.ident("register name")?);
        }
        self.expect(Tok::Semi)?;
        self.keyword("init")?;
        let (init, init_pos) = self.ident("initial label")?;
        self.expect(Tok::Semi)?;
        self.keyword("begin")?;
        let mut items = Vec::new();
        let mut annots = Vec::new();
        while !self.at_keyword("end") {
            if self.at_keyword("abstract") {
                let pos = self.pos();
                self.bump();
                let (label, _) = self.ident("label")?;
                self.expect(Tok::Colon)?;
                self.keyword("havoc")?;
                self.expect(Tok::LParen)?;
                let (reg, _) = self.ident("register")?;
                self.expect(Tok::Comma)?;
                let pred = self.expr()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                annots.push(RawAnnot {
                    label,
                    reg,
                    pred,
                    pos,
                });
                continue;
            }
            let (label, _) = self.ident("label")?;
            self.expect(Tok::Colon)?;
            let inst = self.instruction()?;
            self.expect(Tok::Semi)?;
            self.keyword("goto")?;
            let (goto, goto_pos) = self.ident("label")?;
            self.expect(Tok::Semi)?;
            items.push(RawLinst {
                label,
                inst,
                goto,
                goto_pos,
            });
        }
        self.keyword("end")?;
        Ok(RawThread {
            name,
            pos,
            regs,
            init,
            init_pos,
            items,
            annots,
        })
    }
}

// ---------------------------------------------------------------------------
// Resolution and validation
// ---------------------------------------------------------------------------

struct Scope<'a> {
    shared: &'a HashMap<String, VarId>,
    arrays: &'a HashMap<String, u16>,
    regs: &'a HashMap<String, (RegId, Tid)>,
    tid: Tid,
    domain: Domain,
}

impl Scope<'_> {
    fn resolve_reg(&self, name: &str, pos: Pos) -> Result<RegId, ParseError> {
        match self.regs.get(name) {
            Some((r, owner)) if *owner == self.tid => Ok(*r),
            Some((_, owner)) => Err(ParseError::invalid(
                pos,
                format!(
                    "cross-thread register: '{name}' belongs to thread index {}",
                    owner.0
                ),
            )),
            None => Err(ParseError::invalid(
                pos,
                format!("unknown register '{name}'"),
            )),
        }
    }

    /// Arithmetic expression over this thread's registers; shared variables
    /// are admitted only when `allow_var` is set (varbexpr position).
    fn to_expr(&self, u: &UExpr, allow_var: bool) -> Result<Expr, ParseError> {
        match u {
            UExpr::Int(v) => Ok(Expr::Lit(*v)),
            UExpr::Bool(_) => Err(ParseError::invalid(
                u.pos(),
                "boolean literal in arithmetic position",
            )),
            UExpr::Name(name, pos) => {
                if let Some((r, owner)) = self.regs.get(name) {
                    if *owner != self.tid {
                        return Err(ParseError::invalid(
                            *pos,
                            format!("cross-thread register: '{name}' belongs to another thread"),
                        ));
                    }
                    return Ok(Expr::Reg(*r));
                }
                if let Some(v) = self.shared.get(name) {
                    if allow_var {
                        return Ok(Expr::Var(*v));
                    }
                    return Err(ParseError::invalid(
                        *pos,
                        format!("shared variable '{name}' not allowed in this expression"),
                    ));
                }
                Err(ParseError::invalid(*pos, format!("unknown name '{name}'")))
            }
            UExpr::Index(base, _, pos) => Err(ParseError::invalid(
                *pos,
                format!("array access '{base}[..]' not allowed inside expressions"),
            )),
            UExpr::Bin(op, a, b) => Ok(Expr::Bin(
                *op,
                Box::new(self.to_expr(a, allow_var)?),
                Box::new(self.to_expr(b, allow_var)?),
            )),
            _ => Err(ParseError::invalid(
                u.pos(),
                "boolean expression in arithmetic position",
            )),
        }
    }

    fn to_bexpr(&self, u: &UExpr, allow_var: bool) -> Result<BExpr, ParseError> {
        match u {
            UExpr::Bool(v) => Ok(BExpr::Lit(*v)),
            UExpr::Cmp(op, a, b) => Ok(BExpr::Cmp(
                *op,
                self.to_expr(a, allow_var)?,
                self.to_expr(b, allow_var)?,
            )),
            UExpr::Not(inner, _) => Ok(BExpr::Not(Box::new(self.to_bexpr(inner, allow_var)?))),
            UExpr::And(a, b) => Ok(BExpr::And(
                Box::new(self.to_bexpr(a, allow_var)?),
                Box::new(self.to_bexpr(b, allow_var)?),
            )),
            UExpr::Or(a, b) => Ok(BExpr::Or(
                Box::new(self.to_bexpr(a, allow_var)?),
                Box::new(self.to_bexpr(b, allow_var)?),
            )),
            UExpr::Cond(c, t, e) => Ok(BExpr::Cond(
                Box::new(self.to_bexpr(c, allow_var)?),
                Box::new(self.to_bexpr(t, allow_var)?),
                Box::new(self.to_bexpr(e, allow_var)?),
            )),
            _ => Err(ParseError::invalid(
                u.pos(),
                "arithmetic expression in boolean position",
            )),
        }
    }

    /// A varbexpr must mention exactly one shared variable.
    fn to_varbexpr(&self, u: &UExpr, pos: Pos) -> Result<(BExpr, VarId), ParseError> {
        let b = self.to_bexpr(u, true)?;
        let mut vars = Vec::new();
        super::expr::bexpr_vars(&b, &mut vars);
        match vars.len() {
            1 => Ok((b, vars[0])),
            0 => Err(ParseError::invalid(
                pos,
                "havoc predicate mentions no shared variable (exactly one required)",
            )),
            _ => Err(ParseError::invalid(
                pos,
                "havoc predicate mentions two shared variables (exactly one allowed)",
            )),
        }
    }

    fn resolve_lval(&self, lv: &(String, Option<String>), pos: Pos) -> Result<VarRef, ParseError> {
        match lv {
            (name, None) => match self.shared.get(name) {
                Some(v) => Ok(VarRef::Plain(*v)),
                None => Err(ParseError::invalid(
                    pos,
                    format!("unknown shared variable '{name}'"),
                )),
            },
            (base, Some(idx)) => {
                let array = self
                    .arrays
                    .get(base)
                    .ok_or_else(|| ParseError::invalid(pos, format!("unknown array '{base}'")))?;
                let index = self.resolve_reg(idx, pos)?;
                Ok(VarRef::Cell {
                    array: *array,
                    index,
                })
            }
        }
    }
}

/// Parse and validate a program.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };

    p.keyword("program")?;
    let (prog_name, _) = p.ident("program name")?;

    let mut domain = Domain::DEFAULT;
    if p.at_keyword("domain") {
        let pos = p.pos();
        p.bump();
        let lo = p.int()?;
        p.expect(Tok::DotDot)?;
        let hi = p.int()?;
        p.expect(Tok::Semi)?;
        if lo > hi {
            return Err(ParseError::invalid(pos, "empty domain"));
        }
        domain = Domain { lo, hi };
        if !domain.contains(0) {
            return Err(ParseError::invalid(pos, "domain must contain 0"));
        }
        if domain.size() > 64 {
            return Err(ParseError::invalid(pos, "domain larger than 64 values"));
        }
    }

    p.keyword("vars")?;
    let mut shared: Vec<String> = Vec::new();
    let mut shared_map: HashMap<String, VarId> = HashMap::new();
    let mut arrays: Vec<ArrayDecl> = Vec::new();
    let mut array_map: HashMap<String, u16> = HashMap::new();
    let declare_var = |name: String,
                       pos: Pos,
                       shared: &mut Vec<String>,
                       shared_map: &mut HashMap<String, VarId>|
     -> Result<VarId, ParseError> {
        if shared_map.contains_key(&name) {
            return Err(ParseError::invalid(
                pos,
                format!("shared variable '{name}' declared twice"),
            ));
        }
        let id = VarId(shared.len() as u16);
        shared_map.insert(name.clone(), id);
        shared.push(name);
        Ok(id)
    };
    while !matches!(p.peek(), Tok::Semi) {
        let (name, pos) = p.ident("variable name")?;
        if *p.peek() == Tok::LBracket {
            p.bump();
            let len = p.int()?;
            p.expect(Tok::RBracket)?;
            if len <= 0 || len > 64 {
                return Err(ParseError::invalid(pos, "array length must be in 1..=64"));
            }
            let mut cells = Vec::new();
            for i in 0..len {
                let cell = declare_var(format!("{name}_{i}"), pos, &mut shared, &mut shared_map)?;
                cells.push(cell);
            }
            if array_map.contains_key(&name) {
                return Err(ParseError::invalid(
                    pos,
                    format!("array '{name}' declared twice"),
                ));
            }
            array_map.insert(name.clone(), arrays.len() as u16);
            arrays.push(ArrayDecl { name, cells });
        } else {
            declare_var(name, pos, &mut shared, &mut shared_map)?;
        }
    }
    p.expect(Tok::Semi)?;

    let mut raw_threads = Vec::new();
    while p.at_keyword("thread") {
        raw_threads.push(p.thread()?);
    }
    if !matches!(p.peek(), Tok::Eof) {
        return Err(ParseError::syntax(
            p.pos(),
            format!("expected 'thread' or end of input, found {}", p.peek()),
        ));
    }
    if raw_threads.is_empty() {
        return Err(ParseError::invalid(
            Pos { line: 1, col: 1 },
            "program has no threads",
        ));
    }

    // Register table: names must be globally unique (disjoint across threads
    // and from shared variables).
    let mut regs: Vec<(Tid, String)> = Vec::new();
    let mut reg_map: HashMap<String, (RegId, Tid)> = HashMap::new();
    for (ti, rt) in raw_threads.iter().enumerate() {
        let tid = Tid(ti as u16);
        for (rname, rpos) in &rt.regs {
            if shared_map.contains_key(rname) {
                return Err(ParseError::invalid(
                    *rpos,
                    format!("register '{rname}' clashes with a shared variable"),
                ));
            }
            if let Some((_, owner)) = reg_map.get(rname) {
                return Err(ParseError::invalid(
                    *rpos,
                    format!(
                        "register '{rname}' already declared in thread '{}' (register names are disjoint across threads)",
                        raw_threads[owner.0 as usize].name
                    ),
                ));
            }
            let id = RegId(regs.len() as u16);
            reg_map.insert(rname.clone(), (id, tid));
            regs.push((tid, rname.clone()));
        }
    }

    // Duplicate thread names.
    for (i, rt) in raw_threads.iter().enumerate() {
        if raw_threads[..i].iter().any(|o| o.name == rt.name) {
            return Err(ParseError::invalid(
                rt.pos,
                format!("thread '{}' declared twice", rt.name),
            ));
        }
    }

    // Per-thread label tables: labels that carry instructions plus goto-only
    // (halt) targets, in order of first appearance.
    let mut threads = Vec::new();
    let mut instrs: Vec<InstrData> = Vec::new();
    let mut annotations = Vec::new();

    for (ti, rt) in raw_threads.iter().enumerate() {
        let tid = Tid(ti as u16);
        let mut labels: Vec<LabelInfo> = Vec::new();
        let mut label_map: HashMap<String, LabelId> = HashMap::new();
        let intern = |name: &str,
                      labels: &mut Vec<LabelInfo>,
                      label_map: &mut HashMap<String, LabelId>|
         -> LabelId {
            if let Some(l) = label_map.get(name) {
                return *l;
            }
            let id = LabelId(labels.len() as u16);
            label_map.insert(name.to_string(), id);
            labels.push(LabelInfo {
                name: name.to_string(),
                instrs: Vec::new(),
            });
            id
        };
        for item in &rt.items {
            intern(&item.label, &mut labels, &mut label_map);
        }
        // Goto targets must not name labels of other threads.
        for item in &rt.items {
            if !label_map.contains_key(&item.goto) {
                if let Some(other) = raw_threads
                    .iter()
                    .find(|o| o.name != rt.name && o.items.iter().any(|li| li.label == item.goto))
                {
                    return Err(ParseError::invalid(
                        item.goto_pos,
                        format!(
                            "dangling label: goto target '{}' is not a label of thread '{}' (it is defined in thread '{}')",
                            item.goto, rt.name, other.name
                        ),
                    ));
                }
                // A never-defined target is a halt label.
                intern(&item.goto, &mut labels, &mut label_map);
            }
        }
        let init = match label_map.get(&rt.init) {
            Some(l) => *l,
            None => {
                return Err(ParseError::invalid(
                    rt.init_pos,
                    format!(
                        "init label '{}' is not defined in thread '{}'",
                        rt.init, rt.name
                    ),
                ))
            }
        };

        let scope = Scope {
            shared: &shared_map,
            arrays: &array_map,
            regs: &reg_map,
            tid,
            domain,
        };
        let _ = scope.domain;

        for item in &rt.items {
            let label = label_map[&item.label];
            let goto = label_map[&item.goto];
            let op = match &item.inst {
                RawInst::Fence => Instruction::Fence,
                RawInst::Skip => Instruction::Skip,
                RawInst::Assume(u) => Instruction::Assume {
                    cond: scope.to_bexpr(u, false)?,
                },
                RawInst::Havoc { reg, pred, pos } => {
                    let dst = scope.resolve_reg(reg, *pos)?;
                    let (pred, var) = scope.to_varbexpr(pred, *pos)?;
                    Instruction::Havoc { dst, var, pred }
                }
                RawInst::Assign { dst, dst_pos, rhs } => {
                    let dst_is_reg = dst.1.is_none() && reg_map.contains_key(&dst.0);
                    match rhs {
                        RawRhs::Cas {
                            var,
                            expected,
                            new,
                            pos,
                        } => {
                            if !dst_is_reg {
                                return Err(ParseError::invalid(
                                    *dst_pos,
                                    "cas result must be assigned to a register",
                                ));
                            }
                            Instruction::Cas {
                                dst: scope.resolve_reg(&dst.0, *dst_pos)?,
                                var: scope.resolve_lval(var, *pos)?,
                                expected: scope.to_expr(expected, false)?,
                                new: scope.to_expr(new, false)?,
                            }
                        }
                        RawRhs::Expr(u) => {
                            if dst_is_reg {
                                let dreg = scope.resolve_reg(&dst.0, *dst_pos)?;
                                // `reg := var` and `reg := arr[idx]` are reads;
                                // anything else is a register-local assignment.
                                match u {
                                    UExpr::Name(n, pos) if shared_map.contains_key(n) => {
                                        Instruction::Read {
                                            dst: dreg,
                                            src: scope.resolve_lval(&(n.clone(), None), *pos)?,
                                        }
                                    }
                                    UExpr::Index(base, idx, pos) => Instruction::Read {
                                        dst: dreg,
                                        src: scope.resolve_lval(
                                            &(base.clone(), Some(idx.clone())),
                                            *pos,
                                        )?,
                                    },
                                    _ => Instruction::Local {
                                        dst: dreg,
                                        src: scope.to_expr(u, false)?,
                                    },
                                }
                            } else {
                                Instruction::Write {
                                    dst: scope.resolve_lval(dst, *dst_pos)?,
                                    src: scope.to_expr(u, false)?,
                                }
                            }
                        }
                    }
                }
            };
            let slot = labels[label.0 as usize].instrs.len() as u16;
            let id = InstrId(instrs.len() as u32);
            instrs.push(InstrData {
                tid,
                label,
                slot,
                op,
                goto,
            });
            labels[label.0 as usize].instrs.push(id);
        }

        for a in &rt.annots {
            let label = *label_map.get(&a.label).ok_or_else(|| {
                ParseError::invalid(
                    a.pos,
                    format!("abstract annotation targets unknown label '{}'", a.label),
                )
            })?;
            let reg = scope.resolve_reg(&a.reg, a.pos)?;
            let (pred, var) = scope.to_varbexpr(&a.pred, a.pos)?;
            annotations.push(Annotation {
                tid,
                label,
                reg,
                var,
                pred,
            });
        }

        threads.push(Thread {
            name: rt.name.clone(),
            regs: rt.regs.iter().map(|(n, _)| reg_map[n].0).collect(),
            init,
            labels,
        });
    }

    Ok(Program {
        name: prog_name,
        domain,
        shared,
        arrays,
        regs,
        threads,
        instrs,
        annotations,
    })
}
