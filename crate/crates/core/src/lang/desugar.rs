//! Desugaring: inline expansion and `select` rewriting. Macro substitution
//! already happened during parsing, so after this pass a model contains none
//! of the three front-end conveniences.

use std::collections::BTreeMap;

use super::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DesugarError {
    #[error("unknown inline '{0}'")]
    UnknownInline(String),
    #[error("recursive inline '{0}'")]
    RecursiveInline(String),
    #[error("inline '{name}' expects {expected} arguments, got {got}")]
    InlineArity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("parameter '{0}' is written to but the argument is not assignable")]
    UnassignableParameter(String),
    #[error("unbound inline parameter '{0}'")]
    UnboundParameter(String),
    #[error("'select' bounds must be constant, got '{0}'")]
    NonConstSelectBound(String),
    #[error("'select' over an empty range")]
    EmptySelectRange,
}

/// Expands inline calls and rewrites `select` statements into
/// nondeterministic assignments. Inline definitions are consumed.
pub fn desugar(model: &Model) -> Result<Model, DesugarError> {
    let inlines: BTreeMap<String, &Inline> =
        model.inlines.iter().map(|i| (i.name.clone(), i)).collect();
    let mut out = model.clone();
    let mut procs = Vec::new();
    for p in &model.procs {
        let mut active = Vec::new();
        let body = expand_stmt(&p.body, &inlines, &mut active)?;
        let body = rewrite_selects(&body)?;
        procs.push(Process {
            name: p.name.clone(),
            is_init: p.is_init,
            body,
        });
    }
    out.procs = procs;
    out.inlines = Vec::new();
    out.defines = Vec::new();
    Ok(out)
}

fn expand_stmt(
    s: &Stmt,
    inlines: &BTreeMap<String, &Inline>,
    active: &mut Vec<String>,
) -> Result<Stmt, DesugarError> {
    let kind = match &s.kind {
        StmtKind::Call { name, args } => {
            let inline = inlines
                .get(name)
                .ok_or_else(|| DesugarError::UnknownInline(name.clone()))?;
            if active.contains(name) {
                return Err(DesugarError::RecursiveInline(name.clone()));
            }
            if inline.params.len() != args.len() {
                return Err(DesugarError::InlineArity {
                    name: name.clone(),
                    expected: inline.params.len(),
                    got: args.len(),
                });
            }
            let subst: BTreeMap<&str, &Expr> = inline
                .params
                .iter()
                .map(|p| p.as_str())
                .zip(args.iter())
                .collect();
            let mut ordinal = 0u64;
            let body = instantiate(&inline.body, &subst, s.sid, &mut ordinal)?;
            active.push(name.clone());
            let body = expand_stmt(&body, inlines, active)?;
            active.pop();
            return Ok(body);
        }
        StmtKind::Seq(ss) => StmtKind::Seq(
            ss.iter()
                .map(|s| expand_stmt(s, inlines, active))
                .collect::<Result<_, _>>()?,
        ),
        StmtKind::If(opts) => StmtKind::If(expand_options(opts, inlines, active)?),
        StmtKind::Do(opts) => StmtKind::Do(expand_options(opts, inlines, active)?),
        StmtKind::IfDef(branches) => StmtKind::IfDef(
            branches
                .iter()
                .map(|(psi, body)| Ok((psi.clone(), expand_stmt(body, inlines, active)?)))
                .collect::<Result<_, DesugarError>>()?,
        ),
        other => other.clone(),
    };
    Ok(Stmt::new(s.sid, kind))
}

fn expand_options(
    opts: &[GuardedStmt],
    inlines: &BTreeMap<String, &Inline>,
    active: &mut Vec<String>,
) -> Result<Vec<GuardedStmt>, DesugarError> {
    opts.iter()
        .map(|o| {
            Ok(GuardedStmt {
                guard: o.guard.clone(),
                body: expand_stmt(&o.body, inlines, active)?,
            })
        })
        .collect()
}

/// Copies an inline body, substituting parameters and assigning sids derived
/// from the call site.
fn instantiate(
    s: &Stmt,
    subst: &BTreeMap<&str, &Expr>,
    call_sid: Sid,
    ordinal: &mut u64,
) -> Result<Stmt, DesugarError> {
    let sid = derive_sid(call_sid, *ordinal);
    *ordinal += 1;
    let kind = match &s.kind {
        StmtKind::Skip => StmtKind::Skip,
        StmtKind::Break => StmtKind::Break,
        StmtKind::Assign(lv, e) => {
            StmtKind::Assign(subst_lvalue(lv, subst)?, subst_expr(e, subst))
        }
        StmtKind::Send(c, e) => StmtKind::Send(c.clone(), subst_expr(e, subst)),
        StmtKind::Recv(c, lv) => StmtKind::Recv(c.clone(), subst_lvalue(lv, subst)?),
        StmtKind::Assert(e) => StmtKind::Assert(subst_expr(e, subst)),
        StmtKind::Seq(ss) => StmtKind::Seq(
            ss.iter()
                .map(|s| instantiate(s, subst, call_sid, ordinal))
                .collect::<Result<_, _>>()?,
        ),
        StmtKind::If(opts) => StmtKind::If(subst_options(opts, subst, call_sid, ordinal)?),
        StmtKind::Do(opts) => StmtKind::Do(subst_options(opts, subst, call_sid, ordinal)?),
        StmtKind::IfDef(branches) => StmtKind::IfDef(
            branches
                .iter()
                .map(|(psi, body)| {
                    Ok((psi.clone(), instantiate(body, subst, call_sid, ordinal)?))
                })
                .collect::<Result<_, DesugarError>>()?,
        ),
        StmtKind::Select { var, lo, hi } => {
            let var = match subst.get(var.as_str()) {
                None => var.clone(),
                Some(Expr::Var(n)) => n.clone(),
                Some(_) => return Err(DesugarError::UnassignableParameter(var.clone())),
            };
            StmtKind::Select {
                var,
                lo: subst_expr(lo, subst),
                hi: subst_expr(hi, subst),
            }
        }
        StmtKind::Call { name, args } => StmtKind::Call {
            name: name.clone(),
            args: args.iter().map(|a| subst_expr(a, subst)).collect(),
        },
    };
    Ok(Stmt::new(sid, kind))
}

fn subst_options(
    opts: &[GuardedStmt],
    subst: &BTreeMap<&str, &Expr>,
    call_sid: Sid,
    ordinal: &mut u64,
) -> Result<Vec<GuardedStmt>, DesugarError> {
    opts.iter()
        .map(|o| {
            let guard = match &o.guard {
                Guard::Else => Guard::Else,
                Guard::Cond(e) => Guard::Cond(subst_expr(e, subst)),
            };
            Ok(GuardedStmt {
                guard,
                body: instantiate(&o.body, subst, call_sid, ordinal)?,
            })
        })
        .collect()
}

fn subst_lvalue(lv: &LValue, subst: &BTreeMap<&str, &Expr>) -> Result<LValue, DesugarError> {
    let index = lv
        .index
        .as_ref()
        .map(|ix| Box::new(subst_expr(ix, subst)));
    match subst.get(lv.name.as_str()) {
        None => Ok(LValue {
            name: lv.name.clone(),
            index,
        }),
        Some(Expr::Var(n)) => Ok(LValue {
            name: n.clone(),
            index,
        }),
        Some(Expr::Index(n, ix)) if index.is_none() => Ok(LValue {
            name: n.clone(),
            index: Some(ix.clone()),
        }),
        Some(_) => Err(DesugarError::UnassignableParameter(lv.name.clone())),
    }
}

fn subst_expr(e: &Expr, subst: &BTreeMap<&str, &Expr>) -> Expr {
    match e {
        Expr::Var(n) => match subst.get(n.as_str()) {
            Some(arg) => (*arg).clone(),
            None => e.clone(),
        },
        Expr::Index(n, ix) => {
            let ix = Box::new(subst_expr(ix, subst));
            match subst.get(n.as_str()) {
                Some(Expr::Var(m)) => Expr::Index(m.clone(), ix),
                _ => Expr::Index(n.clone(), ix),
            }
        }
        Expr::Unary(op, a) => Expr::Unary(*op, Box::new(subst_expr(a, subst))),
        Expr::Binary(op, a, b) => Expr::bin(*op, subst_expr(a, subst), subst_expr(b, subst)),
        Expr::Lit(_) | Expr::Hole { .. } | Expr::Chan(_, _) => e.clone(),
    }
}

fn rewrite_selects(s: &Stmt) -> Result<Stmt, DesugarError> {
    let kind = match &s.kind {
        StmtKind::Select { var, lo, hi } => {
            let lo = const_eval(lo)
                .ok_or_else(|| DesugarError::NonConstSelectBound(super::render::expr_str(lo)))?;
            let hi = const_eval(hi)
                .ok_or_else(|| DesugarError::NonConstSelectBound(super::render::expr_str(hi)))?;
            if lo > hi {
                return Err(DesugarError::EmptySelectRange);
            }
            let opts = (lo..=hi)
                .enumerate()
                .map(|(i, v)| GuardedStmt {
                    guard: Guard::Cond(Expr::lit(1)),
                    body: Stmt::new(
                        derive_sid(s.sid, i as u64),
                        StmtKind::Assign(
                            LValue {
                                name: var.clone(),
                                index: None,
                            },
                            Expr::lit(v),
                        ),
                    ),
                })
                .collect();
            StmtKind::If(opts)
        }
        StmtKind::Seq(ss) => StmtKind::Seq(
            ss.iter().map(rewrite_selects).collect::<Result<_, _>>()?,
        ),
        StmtKind::If(opts) => StmtKind::If(rewrite_select_options(opts)?),
        StmtKind::Do(opts) => StmtKind::Do(rewrite_select_options(opts)?),
        StmtKind::IfDef(branches) => StmtKind::IfDef(
            branches
                .iter()
                .map(|(psi, body)| Ok((psi.clone(), rewrite_selects(body)?)))
                .collect::<Result<_, DesugarError>>()?,
        ),
        other => other.clone(),
    };
    Ok(Stmt::new(s.sid, kind))
}

fn rewrite_select_options(opts: &[GuardedStmt]) -> Result<Vec<GuardedStmt>, DesugarError> {
    opts.iter()
        .map(|o| {
            Ok(GuardedStmt {
                guard: o.guard.clone(),
                body: rewrite_selects(&o.body)?,
            })
        })
        .collect()
}

/// Evaluates a closed integer expression.
pub fn const_eval(e: &Expr) -> Option<i64> {
    match e {
        Expr::Lit(v) => Some(*v),
        Expr::Unary(UnOp::Neg, a) => Some(-const_eval(a)?),
        Expr::Unary(UnOp::Not, a) => Some((const_eval(a)? == 0) as i64),
        Expr::Binary(op, a, b) => {
            let a = const_eval(a)?;
            let b = const_eval(b)?;
            Some(match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0 {
                        return None;
                    }
                    a / b
                }
                BinOp::Mod => {
                    if b == 0 {
                        return None;
                    }
                    a % b
                }
                BinOp::Eq => (a == b) as i64,
                BinOp::Ne => (a != b) as i64,
                BinOp::Lt => (a < b) as i64,
                BinOp::Le => (a <= b) as i64,
                BinOp::Gt => (a > b) as i64,
                BinOp::Ge => (a >= b) as i64,
                BinOp::And => ((a != 0) && (b != 0)) as i64,
                BinOp::Or => ((a != 0) || (b != 0)) as i64,
            })
        }
        _ => None,
    }
}
