//! Front end for the modeling language: AST, lexer, parser, pretty-printer
//! and desugaring.
//!
//! A model is a set of global declarations, macro/inline definitions, one
//! `init` process plus optional proctypes, and named LTL properties. Sketches
//! additionally contain `??` holes; families contain compile-time `#if`
//! statements guarded by feature expressions.

mod desugar;
mod lexer;
mod parser;
mod render;

pub use desugar::desugar;
pub use parser::parse;
pub use render::render;

use std::collections::BTreeMap;
use std::fmt;

use crate::featexp::{FeatExp, FeatureDecl};
use thiserror::Error;

/// Stable statement identifier. Parser-assigned sids are small and
/// sequential; transformations derive fresh sids as `(sid << 16) | offset`,
/// which never collides with parser sids or sibling derivations.
pub type Sid = u64;

/// Allocates a sid derived from an existing one. `offset` must fit 16 bits.
pub fn derive_sid(sid: Sid, offset: u64) -> Sid {
    debug_assert!(offset <= 0xFFFF, "sid derivation offset too large");
    debug_assert!(sid < (1 << 48), "sid derivation depth exhausted");
    (sid << 16) | (offset & 0xFFFF)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

impl ParseError {
    pub fn new(line: u32, col: u32, msg: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarType {
    Byte,
    Int,
    Bool,
}

impl fmt::Display for VarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarType::Byte => write!(f, "byte"),
            VarType::Int => write!(f, "int"),
            VarType::Bool => write!(f, "bool"),
        }
    }
}

/// A scalar or fixed-size array variable. All variables live in one global
/// store; declarations written inside a process body are hoisted.
#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub ty: VarType,
    /// Array length; `None` for scalars.
    pub len: Option<u32>,
    /// Constant initializer (scalars only); zero when absent.
    pub init: Option<i64>,
}

/// A bounded FIFO channel. Send blocks when full, receive blocks when empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ChanDecl {
    pub name: String,
    pub capacity: u32,
    pub elem: VarType,
}

/// A textual macro recorded at parse time. Expansion happens during parsing;
/// the definition is kept for reference only.
#[derive(Debug, Clone, PartialEq)]
pub struct Define {
    pub name: String,
    pub params: Option<Vec<String>>,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inline {
    pub name: String,
    pub params: Vec<String>,
    pub body: Stmt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Process {
    pub name: String,
    pub is_init: bool,
    pub body: Stmt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtlProp {
    pub name: String,
    pub formula: Ltl,
}

/// Linear temporal logic over comparisons of global expressions.
#[derive(Debug, Clone, PartialEq)]
pub enum Ltl {
    Atom(Expr),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    Eventually(Box<Ltl>),
    Always(Box<Ltl>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChanPred {
    Len,
    Empty,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(i64),
    Var(String),
    Index(String, Box<Expr>),
    /// An integer hole. Ids are 1..m in source order; the domain is either
    /// written inline as `??[lo,hi]` or resolved later from a default width.
    Hole {
        id: u32,
        lo: Option<i64>,
        hi: Option<i64>,
    },
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Chan(ChanPred, String),
}

impl Expr {
    pub fn lit(v: i64) -> Expr {
        Expr::Lit(v)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    /// True when the expression is the literal `0` or a nonzero literal.
    pub fn as_literal_bool(&self) -> Option<bool> {
        match self {
            Expr::Lit(v) => Some(*v != 0),
            _ => None,
        }
    }

    pub fn has_hole(&self) -> bool {
        self.count_holes() > 0
    }

    pub fn count_holes(&self) -> usize {
        match self {
            Expr::Hole { .. } => 1,
            Expr::Lit(_) | Expr::Var(_) | Expr::Chan(_, _) => 0,
            Expr::Index(_, e) | Expr::Unary(_, e) => e.count_holes(),
            Expr::Binary(_, a, b) => a.count_holes() + b.count_holes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LValue {
    pub name: String,
    pub index: Option<Box<Expr>>,
}

/// Guard of an `if`/`do` option. `Else` is enabled exactly when no sibling
/// condition is.
#[derive(Debug, Clone, PartialEq)]
pub enum Guard {
    Cond(Expr),
    Else,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuardedStmt {
    pub guard: Guard,
    pub body: Stmt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub sid: Sid,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Skip,
    Break,
    Assign(LValue, Expr),
    Send(String, Expr),
    Recv(String, LValue),
    Seq(Vec<Stmt>),
    If(Vec<GuardedStmt>),
    Do(Vec<GuardedStmt>),
    Assert(Expr),
    /// Compile-time variability: branches guarded by feature expressions.
    IfDef(Vec<(FeatExp, Stmt)>),
    /// `select (v : lo..hi)`; removed by desugaring.
    Select { var: String, lo: Expr, hi: Expr },
    /// Call of an inline definition; removed by desugaring.
    Call { name: String, args: Vec<Expr> },
}

impl Stmt {
    pub fn new(sid: Sid, kind: StmtKind) -> Self {
        Stmt { sid, kind }
    }

    /// Basic statements compile to a single transition.
    pub fn is_basic(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::Skip
                | StmtKind::Break
                | StmtKind::Assign(_, _)
                | StmtKind::Send(_, _)
                | StmtKind::Recv(_, _)
                | StmtKind::Assert(_)
        )
    }

    /// Visits this statement and all nested statements, outer first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::Seq(ss) => ss.iter().for_each(|s| s.walk(f)),
            StmtKind::If(opts) | StmtKind::Do(opts) => {
                opts.iter().for_each(|o| o.body.walk(f))
            }
            StmtKind::IfDef(branches) => branches.iter().for_each(|(_, s)| s.walk(f)),
            _ => {}
        }
    }

    /// All hole ids reachable from this statement, in syntactic order.
    pub fn holes(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.walk(&mut |s| {
            s.exprs(&mut |e| collect_holes(e, &mut out));
        });
        out
    }

    /// Visits every expression directly contained in this statement (not in
    /// nested statements).
    pub fn exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        match &self.kind {
            StmtKind::Skip | StmtKind::Break => {}
            StmtKind::Assign(lv, e) => {
                if let Some(ix) = &lv.index {
                    f(ix);
                }
                f(e);
            }
            StmtKind::Send(_, e) => f(e),
            StmtKind::Recv(_, lv) => {
                if let Some(ix) = &lv.index {
                    f(ix);
                }
            }
            StmtKind::Assert(e) => f(e),
            StmtKind::If(opts) | StmtKind::Do(opts) => {
                for o in opts {
                    if let Guard::Cond(e) = &o.guard {
                        f(e);
                    }
                }
            }
            StmtKind::Select { lo, hi, .. } => {
                f(lo);
                f(hi);
            }
            StmtKind::Call { args, .. } => args.iter().for_each(&mut *f),
            StmtKind::Seq(_) | StmtKind::IfDef(_) => {}
        }
    }
}

fn collect_holes(e: &Expr, out: &mut Vec<u32>) {
    match e {
        Expr::Hole { id, .. } => out.push(*id),
        Expr::Lit(_) | Expr::Var(_) | Expr::Chan(_, _) => {}
        Expr::Index(_, inner) | Expr::Unary(_, inner) => collect_holes(inner, out),
        Expr::Binary(_, a, b) => {
            collect_holes(a, out);
            collect_holes(b, out);
        }
    }
}

/// A parsed model. Immutable after construction; transformations produce new
/// values.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub defines: Vec<Define>,
    /// Explicitly declared features (hand-written families).
    pub features: Vec<FeatureDecl>,
    pub globals: Vec<VarDecl>,
    pub channels: Vec<ChanDecl>,
    pub inlines: Vec<Inline>,
    pub procs: Vec<Process>,
    pub props: Vec<LtlProp>,
    /// Presence conditions of abstract `if` branches, keyed by the branch
    /// body's sid. Populated by the join abstraction; empty otherwise.
    pub branch_deltas: BTreeMap<Sid, FeatExp>,
    /// Watermark for parser-assigned sids.
    pub next_sid: Sid,
}

impl Model {
    /// Total number of holes in all processes.
    pub fn hole_count(&self) -> usize {
        self.hole_ids().len()
    }

    /// All hole ids in source order.
    pub fn hole_ids(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for p in &self.procs {
            out.extend(p.body.holes());
        }
        out
    }

    pub fn has_ifdef(&self) -> bool {
        let mut found = false;
        for p in &self.procs {
            p.body.walk(&mut |s| {
                if matches!(s.kind, StmtKind::IfDef(_)) {
                    found = true;
                }
            });
        }
        found
    }

    pub fn prop(&self, name: &str) -> Option<&LtlProp> {
        self.props.iter().find(|p| p.name == name)
    }

    /// All sids in the model, for uniqueness checks.
    pub fn all_sids(&self) -> Vec<Sid> {
        let mut out = Vec::new();
        for p in &self.procs {
            p.body.walk(&mut |s| out.push(s.sid));
        }
        for i in &self.inlines {
            i.body.walk(&mut |s| out.push(s.sid));
        }
        out
    }
}
