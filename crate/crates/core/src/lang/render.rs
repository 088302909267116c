//! Deterministic pretty-printer. `parse(render(m))` is structurally equal to
//! `m` modulo statement ids; macro definitions are already expanded at parse
//! time and are not re-emitted.

use std::fmt::Write;

use super::*;

pub fn render(model: &Model) -> String {
    let mut out = String::new();
    for f in &model.features {
        let _ = writeln!(out, "feature {} : [{}, {}];", f.name, f.lo, f.hi);
    }
    for v in &model.globals {
        match (v.len, v.init) {
            (Some(n), _) => {
                let _ = writeln!(out, "{} {}[{}];", v.ty, v.name, n);
            }
            (None, Some(init)) => {
                let _ = writeln!(out, "{} {} := {};", v.ty, v.name, init);
            }
            (None, None) => {
                let _ = writeln!(out, "{} {};", v.ty, v.name);
            }
        }
    }
    for c in &model.channels {
        let _ = writeln!(out, "chan {} = [{}] of {{ {} }};", c.name, c.capacity, c.elem);
    }
    for i in &model.inlines {
        let _ = writeln!(out, "inline {}({}) {{", i.name, i.params.join(", "));
        render_stmt(&mut out, &i.body, 1);
        let _ = writeln!(out, "\n}}");
    }
    for p in &model.procs {
        if p.is_init {
            let _ = writeln!(out, "init {{");
        } else {
            let _ = writeln!(out, "proctype {}() {{", p.name);
        }
        render_stmt(&mut out, &p.body, 1);
        let _ = writeln!(out, "\n}}");
    }
    for p in &model.props {
        let _ = writeln!(out, "ltl {} {{ {} }}", p.name, ltl_str(&p.formula));
    }
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn render_stmt(out: &mut String, s: &Stmt, level: usize) {
    match &s.kind {
        StmtKind::Seq(ss) => {
            for (i, item) in ss.iter().enumerate() {
                if i > 0 {
                    out.push_str(";\n");
                }
                render_stmt(out, item, level);
            }
        }
        StmtKind::Skip => {
            indent(out, level);
            out.push_str("skip");
        }
        StmtKind::Break => {
            indent(out, level);
            out.push_str("break");
        }
        StmtKind::Assign(lv, e) => {
            indent(out, level);
            let _ = write!(out, "{} := {}", lvalue_str(lv), expr_str(e));
        }
        StmtKind::Send(c, e) => {
            indent(out, level);
            let _ = write!(out, "{}!{}", c, expr_str(e));
        }
        StmtKind::Recv(c, lv) => {
            indent(out, level);
            let _ = write!(out, "{}?{}", c, lvalue_str(lv));
        }
        StmtKind::Assert(e) => {
            indent(out, level);
            let _ = write!(out, "assert({})", expr_str(e));
        }
        StmtKind::If(opts) => {
            indent(out, level);
            out.push_str("if\n");
            render_options(out, opts, level);
            indent(out, level);
            out.push_str("fi");
        }
        StmtKind::Do(opts) => {
            indent(out, level);
            out.push_str("do\n");
            render_options(out, opts, level);
            indent(out, level);
            out.push_str("od");
        }
        StmtKind::IfDef(branches) => {
            indent(out, level);
            out.push_str("#if\n");
            for (psi, body) in branches {
                indent(out, level);
                let _ = writeln!(out, ":: ({psi}) ->");
                render_stmt(out, body, level + 1);
                out.push('\n');
            }
            indent(out, level);
            out.push_str("#endif");
        }
        StmtKind::Select { var, lo, hi } => {
            indent(out, level);
            let _ = write!(out, "select ({} : {} .. {})", var, expr_str(lo), expr_str(hi));
        }
        StmtKind::Call { name, args } => {
            indent(out, level);
            let args: Vec<String> = args.iter().map(expr_str).collect();
            let _ = write!(out, "{}({})", name, args.join(", "));
        }
    }
}

fn render_options(out: &mut String, opts: &[GuardedStmt], level: usize) {
    for o in opts {
        indent(out, level);
        match &o.guard {
            Guard::Else => out.push_str(":: else ->\n"),
            Guard::Cond(e) if e.as_literal_bool() == Some(true) => out.push_str("::\n"),
            Guard::Cond(e) => {
                let _ = writeln!(out, ":: ({}) ->", expr_str(e));
            }
        }
        render_stmt(out, &o.body, level + 1);
        out.push('\n');
    }
}

fn lvalue_str(lv: &LValue) -> String {
    match &lv.index {
        None => lv.name.clone(),
        Some(ix) => format!("{}[{}]", lv.name, expr_str(ix)),
    }
}

/// Precedence-aware expression printer.
pub fn expr_str(e: &Expr) -> String {
    fn prec(e: &Expr) -> u8 {
        match e {
            Expr::Binary(BinOp::Or, _, _) => 1,
            Expr::Binary(BinOp::And, _, _) => 2,
            Expr::Binary(
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge,
                _,
                _,
            ) => 3,
            Expr::Binary(BinOp::Add | BinOp::Sub, _, _) => 4,
            Expr::Binary(BinOp::Mul | BinOp::Div | BinOp::Mod, _, _) => 5,
            Expr::Unary(_, _) => 6,
            _ => 7,
        }
    }
    fn op_str(op: BinOp) -> &'static str {
        match op {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
    fn go(e: &Expr, min: u8) -> String {
        let p = prec(e);
        let s = match e {
            Expr::Lit(v) => format!("{v}"),
            Expr::Var(n) => n.clone(),
            Expr::Index(n, ix) => format!("{}[{}]", n, go(ix, 0)),
            Expr::Hole { lo, hi, .. } => match (lo, hi) {
                (Some(l), Some(h)) => format!("??[{l},{h}]"),
                _ => "??".to_string(),
            },
            Expr::Unary(UnOp::Neg, a) => format!("-{}", go(a, 6)),
            Expr::Unary(UnOp::Not, a) => format!("!{}", go(a, 6)),
            Expr::Binary(op, a, b) => {
                // relational operators are non-associative
                let (lp, rp) = match op {
                    BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        (p + 1, p + 1)
                    }
                    _ => (p, p + 1),
                };
                format!("{} {} {}", go(a, lp), op_str(*op), go(b, rp))
            }
            Expr::Chan(pred, c) => {
                let name = match pred {
                    ChanPred::Len => "len",
                    ChanPred::Empty => "empty",
                    ChanPred::Full => "full",
                };
                format!("{name}({c})")
            }
        };
        if p < min {
            format!("({s})")
        } else {
            s
        }
    }
    go(e, 0)
}

pub fn ltl_str(l: &Ltl) -> String {
    fn prec(l: &Ltl) -> u8 {
        match l {
            Ltl::Or(_, _) => 1,
            Ltl::And(_, _) => 2,
            Ltl::Until(_, _) => 3,
            Ltl::Not(_) | Ltl::Next(_) | Ltl::Eventually(_) | Ltl::Always(_) => 4,
            Ltl::Atom(_) => 5,
        }
    }
    fn go(l: &Ltl, min: u8) -> String {
        let p = prec(l);
        let s = match l {
            Ltl::Atom(e) => {
                let es = expr_str(e);
                if matches!(e, Expr::Binary(_, _, _)) {
                    format!("({es})")
                } else {
                    es
                }
            }
            Ltl::Not(a) => format!("!{}", go(a, 4)),
            Ltl::Next(a) => format!("X {}", go(a, 4)),
            Ltl::Eventually(a) => format!("<> {}", go(a, 4)),
            Ltl::Always(a) => format!("[] {}", go(a, 4)),
            Ltl::And(a, b) => format!("{} && {}", go(a, 2), go(b, 2)),
            Ltl::Or(a, b) => format!("{} || {}", go(a, 1), go(b, 1)),
            Ltl::Until(a, b) => format!("{} U {}", go(a, 4), go(b, 3)),
        };
        if p < min {
            format!("({s})")
        } else {
            s
        }
    }
    go(l, 0)
}
