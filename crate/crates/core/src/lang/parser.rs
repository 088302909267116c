//! Recursive-descent parser. Macro (`#define`) invocations are expanded on
//! the token stream before parsing, so the rest of the grammar never sees
//! them; the definitions are kept on the model for reference.

use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{lex, Tok, Token};
use super::*;
use crate::featexp::{FeatExp, FeatureDecl};

const MAX_DEFINE_DEPTH: usize = 64;
/// Hole domains wider than this cannot be encoded in derived sids.
const MAX_HOLE_WIDTH: i64 = 1 << 16;

/// Parses a model from source text.
pub fn parse(src: &str) -> Result<Model, ParseError> {
    let raw = lex(src)?;
    let (toks, defines) = preprocess(raw)?;
    let mut p = Parser {
        toks,
        pos: 0,
        next_sid: 1,
        next_hole: 1,
    };
    let mut model = p.model()?;
    model.defines = defines;
    validate(&model)?;
    Ok(model)
}

struct DefineDef {
    name: String,
    params: Option<Vec<String>>,
    body: Vec<Token>,
}

/// Expands `#define` invocations. Definitions must precede their uses;
/// expansion is recursive with a depth cap, so self-referential macros are
/// reported instead of looping.
fn preprocess(input: Vec<Token>) -> Result<(Vec<Token>, Vec<Define>), ParseError> {
    let mut defs: Vec<DefineDef> = Vec::new();
    let mut out: Vec<Token> = Vec::new();
    let mut i = 0;
    while i < input.len() {
        let t = &input[i];
        if t.tok == Tok::HashDefine {
            let line = t.line;
            i += 1;
            let name = match input.get(i) {
                Some(Token {
                    tok: Tok::Ident(n), ..
                }) => n.clone(),
                _ => return Err(ParseError::new(t.line, t.col, "expected macro name")),
            };
            let name_tok = &input[i];
            i += 1;
            // a parameter list requires '(' directly after the name
            let mut params = None;
            if let Some(Token {
                tok: Tok::LParen,
                offset,
                ..
            }) = input.get(i)
            {
                if *offset == name_tok.offset + name.len() {
                    i += 1;
                    let mut ps = Vec::new();
                    loop {
                        match &input[i].tok {
                            Tok::Ident(p) => {
                                ps.push(p.clone());
                                i += 1;
                                match &input[i].tok {
                                    Tok::Comma => i += 1,
                                    Tok::RParen => {
                                        i += 1;
                                        break;
                                    }
                                    _ => {
                                        return Err(ParseError::new(
                                            input[i].line,
                                            input[i].col,
                                            "expected ',' or ')' in macro parameters",
                                        ))
                                    }
                                }
                            }
                            Tok::RParen => {
                                i += 1;
                                break;
                            }
                            _ => {
                                return Err(ParseError::new(
                                    input[i].line,
                                    input[i].col,
                                    "expected macro parameter",
                                ))
                            }
                        }
                    }
                    params = Some(ps);
                }
            }
            let mut body = Vec::new();
            while i < input.len() && input[i].line == line && input[i].tok != Tok::Eof {
                body.push(input[i].clone());
                i += 1;
            }
            if defs.iter().any(|d| d.name == name) {
                return Err(ParseError::new(
                    t.line,
                    t.col,
                    format!("duplicate macro '{name}'"),
                ));
            }
            defs.push(DefineDef { name, params, body });
            continue;
        }
        out.push(t.clone());
        i += 1;
    }

    let expanded = expand_all(&out, &defs, 0)?;
    let defines = defs
        .iter()
        .map(|d| Define {
            name: d.name.clone(),
            params: d.params.clone(),
            body: d
                .body
                .iter()
                .map(|t| t.tok.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        })
        .collect();
    Ok((expanded, defines))
}

fn expand_all(
    toks: &[Token],
    defs: &[DefineDef],
    depth: usize,
) -> Result<Vec<Token>, ParseError> {
    if depth > MAX_DEFINE_DEPTH {
        let t = toks.first();
        return Err(ParseError::new(
            t.map_or(0, |t| t.line),
            t.map_or(0, |t| t.col),
            "recursive macro expansion",
        ));
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let t = &toks[i];
        let def = match &t.tok {
            Tok::Ident(n) => defs.iter().find(|d| &d.name == n),
            _ => None,
        };
        let Some(def) = def else {
            out.push(t.clone());
            i += 1;
            continue;
        };
        let mut replacement: Vec<Token> = Vec::new();
        match &def.params {
            None => replacement.extend(def.body.iter().cloned()),
            Some(params) => {
                if toks.get(i + 1).map(|t| &t.tok) != Some(&Tok::LParen) {
                    return Err(ParseError::new(
                        t.line,
                        t.col,
                        format!("macro '{}' expects arguments", def.name),
                    ));
                }
                i += 2;
                let mut args: Vec<Vec<Token>> = vec![Vec::new()];
                let mut nesting = 0usize;
                loop {
                    let a = toks.get(i).ok_or_else(|| {
                        ParseError::new(t.line, t.col, "unterminated macro arguments")
                    })?;
                    match &a.tok {
                        Tok::LParen | Tok::LBracket => {
                            nesting += 1;
                            args.last_mut().unwrap().push(a.clone());
                        }
                        Tok::RParen if nesting == 0 => break,
                        Tok::RParen | Tok::RBracket => {
                            nesting -= 1;
                            args.last_mut().unwrap().push(a.clone());
                        }
                        Tok::Comma if nesting == 0 => args.push(Vec::new()),
                        _ => args.last_mut().unwrap().push(a.clone()),
                    }
                    i += 1;
                }
                if args.len() != params.len() {
                    return Err(ParseError::new(
                        t.line,
                        t.col,
                        format!(
                            "macro '{}' expects {} arguments, got {}",
                            def.name,
                            params.len(),
                            args.len()
                        ),
                    ));
                }
                for b in &def.body {
                    match &b.tok {
                        Tok::Ident(n) => {
                            if let Some(pi) = params.iter().position(|p| p == n) {
                                replacement.extend(args[pi].iter().cloned());
                            } else {
                                replacement.push(b.clone());
                            }
                        }
                        _ => replacement.push(b.clone()),
                    }
                }
            }
        }
        // expanded text keeps the invocation position for diagnostics
        let mut replacement: Vec<Token> = replacement;
        for r in &mut replacement {
            r.line = t.line;
            r.col = t.col;
        }
        let expanded = expand_all(&replacement, defs, depth + 1)?;
        out.extend(expanded);
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    next_sid: Sid,
    next_hole: u32,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (u32, u32) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::new(line, col, msg)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}', found '{}'", tok, self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(n) => {
                self.bump();
                Ok(n)
            }
            other => Err(self.err(format!("expected identifier, found '{other}'"))),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(n) if n == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn sid(&mut self) -> Sid {
        let s = self.next_sid;
        self.next_sid += 1;
        s
    }

    fn model(&mut self) -> Result<Model, ParseError> {
        let mut model = Model {
            defines: Vec::new(),
            features: Vec::new(),
            globals: Vec::new(),
            channels: Vec::new(),
            inlines: Vec::new(),
            procs: Vec::new(),
            props: Vec::new(),
            branch_deltas: BTreeMap::new(),
            next_sid: 0,
        };
        loop {
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(kw) => match kw.as_str() {
                    "feature" => {
                        self.bump();
                        let name = self.ident()?;
                        self.expect(&Tok::Colon)?;
                        self.expect(&Tok::LBracket)?;
                        let lo = self.const_int()?;
                        self.expect(&Tok::Comma)?;
                        let hi = self.const_int()?;
                        self.expect(&Tok::RBracket)?;
                        self.expect(&Tok::Semi)?;
                        model.features.push(FeatureDecl::new(name, lo, hi));
                    }
                    "byte" | "int" | "bool" => {
                        let decls = self.var_decls()?;
                        self.expect(&Tok::Semi)?;
                        model.globals.extend(decls);
                    }
                    "chan" => {
                        self.bump();
                        let name = self.ident()?;
                        self.expect(&Tok::Eq)?;
                        self.expect(&Tok::LBracket)?;
                        let cap = self.const_int()?;
                        self.expect(&Tok::RBracket)?;
                        if !self.eat_kw("of") {
                            return Err(self.err("expected 'of'"));
                        }
                        self.expect(&Tok::LBrace)?;
                        let elem = self.var_type()?;
                        self.expect(&Tok::RBrace)?;
                        self.expect(&Tok::Semi)?;
                        if cap <= 0 {
                            return Err(self.err("channel capacity must be positive"));
                        }
                        model.channels.push(ChanDecl {
                            name,
                            capacity: cap as u32,
                            elem,
                        });
                    }
                    "inline" => {
                        self.bump();
                        let name = self.ident()?;
                        self.expect(&Tok::LParen)?;
                        let mut params = Vec::new();
                        if self.peek() != &Tok::RParen {
                            loop {
                                params.push(self.ident()?);
                                if !self.eat(&Tok::Comma) {
                                    break;
                                }
                            }
                        }
                        self.expect(&Tok::RParen)?;
                        self.expect(&Tok::LBrace)?;
                        let body = self.stmts()?;
                        self.expect(&Tok::RBrace)?;
                        model.inlines.push(Inline { name, params, body });
                    }
                    "init" => {
                        self.bump();
                        let (decls, body) = self.process_body()?;
                        model.globals.extend(decls);
                        model.procs.push(Process {
                            name: "init".to_string(),
                            is_init: true,
                            body,
                        });
                    }
                    "proctype" => {
                        self.bump();
                        let name = self.ident()?;
                        self.expect(&Tok::LParen)?;
                        self.expect(&Tok::RParen)?;
                        let (decls, body) = self.process_body()?;
                        model.globals.extend(decls);
                        model.procs.push(Process {
                            name,
                            is_init: false,
                            body,
                        });
                    }
                    "ltl" => {
                        self.bump();
                        let name = self.ident()?;
                        self.expect(&Tok::LBrace)?;
                        let formula = self.ltl()?;
                        self.expect(&Tok::RBrace)?;
                        model.props.push(LtlProp { name, formula });
                    }
                    other => {
                        return Err(self.err(format!("unexpected top-level item '{other}'")))
                    }
                },
                other => return Err(self.err(format!("unexpected token '{other}'"))),
            }
        }
        model.next_sid = self.next_sid;
        Ok(model)
    }

    fn var_type(&mut self) -> Result<VarType, ParseError> {
        if self.eat_kw("byte") {
            Ok(VarType::Byte)
        } else if self.eat_kw("int") {
            Ok(VarType::Int)
        } else if self.eat_kw("bool") {
            Ok(VarType::Bool)
        } else {
            Err(self.err("expected type"))
        }
    }

    fn var_decls(&mut self) -> Result<Vec<VarDecl>, ParseError> {
        let ty = self.var_type()?;
        let mut out = Vec::new();
        loop {
            let name = self.ident()?;
            let mut len = None;
            if self.eat(&Tok::LBracket) {
                let n = self.const_int()?;
                if n <= 0 {
                    return Err(self.err("array size must be positive"));
                }
                len = Some(n as u32);
                self.expect(&Tok::RBracket)?;
            }
            let mut init = None;
            if self.eat(&Tok::Assign) || self.eat(&Tok::Eq) {
                if len.is_some() {
                    return Err(self.err("array declarations cannot have initializers"));
                }
                init = Some(self.const_int()?);
            }
            out.push(VarDecl {
                name,
                ty,
                len,
                init,
            });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(out)
    }

    fn const_int(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.err("expected integer constant")),
        }
    }

    fn process_body(&mut self) -> Result<(Vec<VarDecl>, Stmt), ParseError> {
        self.expect(&Tok::LBrace)?;
        let mut decls = Vec::new();
        while matches!(self.peek(), Tok::Ident(n) if (n == "byte" || n == "int" || n == "bool"))
        {
            decls.extend(self.var_decls()?);
            self.expect(&Tok::Semi)?;
        }
        let body = self.stmts()?;
        self.expect(&Tok::RBrace)?;
        Ok((decls, body))
    }

    /// A statement sequence. `;` and `->` are interchangeable separators.
    fn stmts(&mut self) -> Result<Stmt, ParseError> {
        let seq_sid = self.sid();
        let mut items = vec![self.stmt()?];
        loop {
            let had_sep = self.eat(&Tok::Semi) || self.eat(&Tok::Arrow);
            if self.stmt_follows() {
                if !had_sep {
                    return Err(self.err(format!(
                        "expected ';' or '->' before '{}'",
                        self.peek()
                    )));
                }
                items.push(self.stmt()?);
            } else {
                break;
            }
        }
        if items.len() == 1 {
            Ok(items.pop().unwrap())
        } else {
            Ok(Stmt::new(seq_sid, StmtKind::Seq(items)))
        }
    }

    fn stmt_follows(&self) -> bool {
        !matches!(
            self.peek(),
            Tok::RBrace | Tok::ColonColon | Tok::HashEndif | Tok::Eof
        ) && !self.is_kw("od")
            && !self.is_kw("fi")
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        match self.peek().clone() {
            Tok::Ident(kw) => match kw.as_str() {
                "skip" => {
                    self.bump();
                    Ok(Stmt::new(self.sid(), StmtKind::Skip))
                }
                "break" => {
                    self.bump();
                    Ok(Stmt::new(self.sid(), StmtKind::Break))
                }
                "assert" => {
                    self.bump();
                    self.expect(&Tok::LParen)?;
                    let e = self.expr()?;
                    self.expect(&Tok::RParen)?;
                    Ok(Stmt::new(self.sid(), StmtKind::Assert(e)))
                }
                "if" => {
                    self.bump();
                    let opts = self.options("fi")?;
                    Ok(Stmt::new(self.sid(), StmtKind::If(opts)))
                }
                "do" => {
                    self.bump();
                    let opts = self.options("od")?;
                    Ok(Stmt::new(self.sid(), StmtKind::Do(opts)))
                }
                "select" => {
                    self.bump();
                    self.expect(&Tok::LParen)?;
                    let var = self.ident()?;
                    self.expect(&Tok::Colon)?;
                    let lo = self.expr()?;
                    self.expect(&Tok::DotDot)?;
                    let hi = self.expr()?;
                    self.expect(&Tok::RParen)?;
                    Ok(Stmt::new(self.sid(), StmtKind::Select { var, lo, hi }))
                }
                "else" => Err(self.err("'else' is only allowed as an option guard")),
                _ => self.simple_stmt(),
            },
            Tok::HashIf => {
                self.bump();
                let mut branches = Vec::new();
                while self.eat(&Tok::ColonColon) {
                    let psi = self.featexp()?;
                    self.expect(&Tok::Arrow)?;
                    let body = self.stmts()?;
                    branches.push((psi, body));
                }
                self.expect(&Tok::HashEndif)?;
                if branches.is_empty() {
                    return Err(self.err("'#if' requires at least one branch"));
                }
                Ok(Stmt::new(self.sid(), StmtKind::IfDef(branches)))
            }
            Tok::LParen => {
                // expression statement: blocks until the condition holds
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                let skip = Stmt::new(self.sid(), StmtKind::Skip);
                Ok(Stmt::new(
                    self.sid(),
                    StmtKind::If(vec![GuardedStmt {
                        guard: Guard::Cond(e),
                        body: skip,
                    }]),
                ))
            }
            other => Err(self.err(format!("expected statement, found '{other}'"))),
        }
    }

    /// Assignment, increment, send, receive or inline call.
    fn simple_stmt(&mut self) -> Result<Stmt, ParseError> {
        let name = self.ident()?;
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let mut args = Vec::new();
                if self.peek() != &Tok::RParen {
                    loop {
                        args.push(self.expr()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.expect(&Tok::RParen)?;
                Ok(Stmt::new(self.sid(), StmtKind::Call { name, args }))
            }
            Tok::Bang => {
                self.bump();
                let e = self.expr()?;
                Ok(Stmt::new(self.sid(), StmtKind::Send(name, e)))
            }
            Tok::Question => {
                self.bump();
                let lv = self.lvalue()?;
                Ok(Stmt::new(self.sid(), StmtKind::Recv(name, lv)))
            }
            _ => {
                let mut index = None;
                if self.eat(&Tok::LBracket) {
                    index = Some(Box::new(self.expr()?));
                    self.expect(&Tok::RBracket)?;
                }
                let lv = LValue { name, index };
                match self.peek().clone() {
                    Tok::Assign | Tok::Eq => {
                        self.bump();
                        let e = self.expr()?;
                        Ok(Stmt::new(self.sid(), StmtKind::Assign(lv, e)))
                    }
                    Tok::PlusPlus | Tok::MinusMinus => {
                        let op = if self.bump() == Tok::PlusPlus {
                            BinOp::Add
                        } else {
                            BinOp::Sub
                        };
                        let read = match &lv.index {
                            None => Expr::var(lv.name.clone()),
                            Some(ix) => Expr::Index(lv.name.clone(), ix.clone()),
                        };
                        let e = Expr::bin(op, read, Expr::lit(1));
                        Ok(Stmt::new(self.sid(), StmtKind::Assign(lv, e)))
                    }
                    other => Err(self.err(format!(
                        "expected ':=', '++', '--', '!' or '?', found '{other}'"
                    ))),
                }
            }
        }
    }

    fn lvalue(&mut self) -> Result<LValue, ParseError> {
        let name = self.ident()?;
        let mut index = None;
        if self.eat(&Tok::LBracket) {
            index = Some(Box::new(self.expr()?));
            self.expect(&Tok::RBracket)?;
        }
        Ok(LValue { name, index })
    }

    fn options(&mut self, closer: &str) -> Result<Vec<GuardedStmt>, ParseError> {
        let mut opts = Vec::new();
        while self.eat(&Tok::ColonColon) {
            if self.eat_kw("else") {
                self.expect(&Tok::Arrow)?;
                let body = self.stmts()?;
                opts.push(GuardedStmt {
                    guard: Guard::Else,
                    body,
                });
                continue;
            }
            // try `expr -> stmts`; on failure reparse as a bare statement list
            let mark = (self.pos, self.next_sid, self.next_hole);
            let guard_attempt = self.expr().ok().and_then(|e| {
                if self.eat(&Tok::Arrow) {
                    Some(e)
                } else {
                    None
                }
            });
            match guard_attempt {
                Some(e) => {
                    let body = self.stmts()?;
                    opts.push(GuardedStmt {
                        guard: Guard::Cond(e),
                        body,
                    });
                }
                None => {
                    (self.pos, self.next_sid, self.next_hole) = mark;
                    let body = self.stmts()?;
                    opts.push(GuardedStmt {
                        guard: Guard::Cond(Expr::lit(1)),
                        body,
                    });
                }
            }
        }
        if !self.eat_kw(closer) {
            return Err(self.err(format!("expected '::' or '{closer}'")));
        }
        if opts.is_empty() {
            return Err(self.err(format!("'{closer}' requires at least one option")));
        }
        if opts.iter().filter(|o| matches!(o.guard, Guard::Else)).count() > 1 {
            return Err(self.err("at most one 'else' option is allowed"));
        }
        Ok(opts)
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.and_expr()?;
        while self.eat(&Tok::OrOr) {
            let r = self.and_expr()?;
            e = Expr::bin(BinOp::Or, e, r);
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.rel_expr()?;
        while self.eat(&Tok::AndAnd) {
            let r = self.rel_expr()?;
            e = Expr::bin(BinOp::And, e, r);
        }
        Ok(e)
    }

    fn rel_expr(&mut self) -> Result<Expr, ParseError> {
        let e = self.add_expr()?;
        let op = match self.peek() {
            Tok::EqEq => Some(BinOp::Eq),
            Tok::Ne => Some(BinOp::Ne),
            Tok::Lt => Some(BinOp::Lt),
            Tok::Le => Some(BinOp::Le),
            Tok::Gt => Some(BinOp::Gt),
            Tok::Ge => Some(BinOp::Ge),
            _ => None,
        };
        match op {
            Some(op) => {
                self.bump();
                let r = self.add_expr()?;
                Ok(Expr::bin(op, e, r))
            }
            None => Ok(e),
        }
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let r = self.mul_expr()?;
            e = Expr::bin(op, e, r);
        }
        Ok(e)
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Mod,
                _ => break,
            };
            self.bump();
            let r = self.unary_expr()?;
            e = Expr::bin(op, e, r);
        }
        Ok(e)
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            let e = self.unary_expr()?;
            return Ok(Expr::Unary(UnOp::Neg, Box::new(e)));
        }
        if self.eat(&Tok::Bang) {
            let e = self.unary_expr()?;
            return Ok(Expr::Unary(UnOp::Not, Box::new(e)));
        }
        self.primary_expr()
    }

    fn primary_expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Lit(n))
            }
            Tok::Hole => {
                self.bump();
                let id = self.next_hole;
                self.next_hole += 1;
                let mut lo = None;
                let mut hi = None;
                if self.eat(&Tok::LBracket) {
                    let l = self.const_int()?;
                    self.expect(&Tok::Comma)?;
                    let h = self.const_int()?;
                    self.expect(&Tok::RBracket)?;
                    if l > h {
                        return Err(self.err("empty hole domain"));
                    }
                    if h - l >= MAX_HOLE_WIDTH {
                        return Err(self.err("hole domain too large"));
                    }
                    lo = Some(l);
                    hi = Some(h);
                }
                Ok(Expr::Hole { id, lo, hi })
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "true" => return Ok(Expr::Lit(1)),
                    "false" => return Ok(Expr::Lit(0)),
                    "len" | "empty" | "full" => {
                        if self.eat(&Tok::LParen) {
                            let chan = self.ident()?;
                            self.expect(&Tok::RParen)?;
                            let pred = match name.as_str() {
                                "len" => ChanPred::Len,
                                "empty" => ChanPred::Empty,
                                _ => ChanPred::Full,
                            };
                            return Ok(Expr::Chan(pred, chan));
                        }
                    }
                    _ => {}
                }
                if self.eat(&Tok::LBracket) {
                    let ix = self.expr()?;
                    self.expect(&Tok::RBracket)?;
                    Ok(Expr::Index(name, Box::new(ix)))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            other => Err(self.err(format!("expected expression, found '{other}'"))),
        }
    }

    // ---- feature expressions (#if guards) ----

    fn featexp(&mut self) -> Result<FeatExp, ParseError> {
        let mut e = self.featexp_and()?;
        while self.eat(&Tok::OrOr) {
            let r = self.featexp_and()?;
            e = e.or(r);
        }
        Ok(e)
    }

    fn featexp_and(&mut self) -> Result<FeatExp, ParseError> {
        let mut e = self.featexp_not()?;
        while self.eat(&Tok::AndAnd) {
            let r = self.featexp_not()?;
            e = e.and(r);
        }
        Ok(e)
    }

    fn featexp_not(&mut self) -> Result<FeatExp, ParseError> {
        if self.eat(&Tok::Bang) {
            return Ok(self.featexp_not()?.not());
        }
        if self.eat(&Tok::LParen) {
            let e = self.featexp()?;
            self.expect(&Tok::RParen)?;
            return Ok(e);
        }
        if self.eat_kw("true") {
            return Ok(FeatExp::True);
        }
        if self.eat_kw("false") {
            return Ok(FeatExp::False);
        }
        let name = self.ident()?;
        let tok = self.bump();
        let value = self.const_int()?;
        let e = match tok {
            Tok::Eq | Tok::EqEq => FeatExp::eq(name, value),
            Tok::Lt => FeatExp::lt(name, value),
            Tok::Le => FeatExp::le(name, value),
            Tok::Gt => FeatExp::gt(name, value),
            Tok::Ge => FeatExp::ge(name, value),
            Tok::Ne => FeatExp::eq(name, value).not(),
            other => {
                return Err(self.err(format!(
                    "expected feature comparison operator, found '{other}'"
                )))
            }
        };
        Ok(e)
    }

    // ---- LTL ----

    fn ltl(&mut self) -> Result<Ltl, ParseError> {
        let mut e = self.ltl_and()?;
        while self.eat(&Tok::OrOr) {
            let r = self.ltl_and()?;
            e = Ltl::Or(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn ltl_and(&mut self) -> Result<Ltl, ParseError> {
        let mut e = self.ltl_until()?;
        while self.eat(&Tok::AndAnd) {
            let r = self.ltl_until()?;
            e = Ltl::And(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn ltl_until(&mut self) -> Result<Ltl, ParseError> {
        let e = self.ltl_unary()?;
        if self.is_kw("U") {
            self.bump();
            let r = self.ltl_until()?;
            return Ok(Ltl::Until(Box::new(e), Box::new(r)));
        }
        Ok(e)
    }

    fn ltl_unary(&mut self) -> Result<Ltl, ParseError> {
        if self.eat(&Tok::Bang) {
            return Ok(Ltl::Not(Box::new(self.ltl_unary()?)));
        }
        if self.peek() == &Tok::LBracket && self.peek2() == &Tok::RBracket {
            self.bump();
            self.bump();
            return Ok(Ltl::Always(Box::new(self.ltl_unary()?)));
        }
        if self.peek() == &Tok::Lt && self.peek2() == &Tok::Gt {
            self.bump();
            self.bump();
            return Ok(Ltl::Eventually(Box::new(self.ltl_unary()?)));
        }
        if self.is_kw("X") {
            self.bump();
            return Ok(Ltl::Next(Box::new(self.ltl_unary()?)));
        }
        if self.peek() == &Tok::LParen {
            self.bump();
            let e = self.ltl()?;
            self.expect(&Tok::RParen)?;
            return Ok(e);
        }
        let e = self.expr()?;
        if e.has_hole() {
            return Err(self.err("holes are not allowed inside LTL properties"));
        }
        Ok(Ltl::Atom(e))
    }
}

// ---- validation ----

struct Scope {
    vars: BTreeMap<String, (VarType, Option<u32>)>,
    chans: BTreeSet<String>,
    features: BTreeSet<String>,
    inlines: BTreeMap<String, usize>,
}

/// Structural validation: declarations unique, identifiers known, arrays
/// indexed, channels used as channels, `break` inside loops, `#if` guards
/// over declared features, holes absent from properties.
pub(super) fn validate(model: &Model) -> Result<(), ParseError> {
    let e0 = |msg: String| ParseError::new(0, 0, msg);
    let mut scope = Scope {
        vars: BTreeMap::new(),
        chans: BTreeSet::new(),
        features: BTreeSet::new(),
        inlines: BTreeMap::new(),
    };
    for f in &model.features {
        if f.lo > f.hi {
            return Err(e0(format!("feature '{}' has empty domain", f.name)));
        }
        if !scope.features.insert(f.name.clone()) {
            return Err(e0(format!("duplicate feature '{}'", f.name)));
        }
    }
    for v in &model.globals {
        if scope
            .vars
            .insert(v.name.clone(), (v.ty, v.len))
            .is_some()
        {
            return Err(e0(format!("duplicate variable '{}'", v.name)));
        }
    }
    for c in &model.channels {
        if scope.vars.contains_key(&c.name) || !scope.chans.insert(c.name.clone()) {
            return Err(e0(format!("duplicate channel '{}'", c.name)));
        }
    }
    for i in &model.inlines {
        if scope.inlines.insert(i.name.clone(), i.params.len()).is_some() {
            return Err(e0(format!("duplicate inline '{}'", i.name)));
        }
    }
    if model.procs.iter().filter(|p| p.is_init).count() > 1 {
        return Err(e0("at most one 'init' process is allowed".into()));
    }
    let mut prop_names = BTreeSet::new();
    for p in &model.props {
        if !prop_names.insert(p.name.clone()) {
            return Err(e0(format!("duplicate property '{}'", p.name)));
        }
        check_ltl(&p.formula, &scope).map_err(e0)?;
    }
    for i in &model.inlines {
        let mut inline_scope = Scope {
            vars: scope.vars.clone(),
            chans: scope.chans.clone(),
            features: scope.features.clone(),
            inlines: scope.inlines.clone(),
        };
        // parameters act as scalars inside the body
        for p in &i.params {
            inline_scope.vars.entry(p.clone()).or_insert((VarType::Int, None));
        }
        check_stmt(&i.body, &inline_scope, true).map_err(e0)?;
    }
    for p in &model.procs {
        check_stmt(&p.body, &scope, false).map_err(e0)?;
    }
    // hole ids must be 1..m in source order
    let ids = model.hole_ids();
    for (i, id) in ids.iter().enumerate() {
        if *id as usize != i + 1 {
            return Err(e0("hole ids are not sequential".into()));
        }
    }
    Ok(())
}

fn check_stmt(s: &Stmt, scope: &Scope, in_loop: bool) -> Result<(), String> {
    match &s.kind {
        StmtKind::Skip => Ok(()),
        StmtKind::Break => {
            if in_loop {
                Ok(())
            } else {
                Err("'break' outside of a 'do' loop".into())
            }
        }
        StmtKind::Assign(lv, e) => {
            check_lvalue(lv, scope)?;
            check_expr(e, scope)
        }
        StmtKind::Send(c, e) => {
            if !scope.chans.contains(c) {
                return Err(format!("unknown channel '{c}'"));
            }
            check_expr(e, scope)
        }
        StmtKind::Recv(c, lv) => {
            if !scope.chans.contains(c) {
                return Err(format!("unknown channel '{c}'"));
            }
            check_lvalue(lv, scope)
        }
        StmtKind::Assert(e) => check_expr(e, scope),
        StmtKind::Seq(ss) => ss.iter().try_for_each(|s| check_stmt(s, scope, in_loop)),
        StmtKind::If(opts) => {
            for o in opts {
                if let Guard::Cond(e) = &o.guard {
                    check_expr(e, scope)?;
                }
                check_stmt(&o.body, scope, in_loop)?;
            }
            Ok(())
        }
        StmtKind::Do(opts) => {
            for o in opts {
                if let Guard::Cond(e) = &o.guard {
                    check_expr(e, scope)?;
                }
                check_stmt(&o.body, scope, true)?;
            }
            Ok(())
        }
        StmtKind::IfDef(branches) => {
            for (psi, body) in branches {
                for f in psi.features() {
                    if !scope.features.contains(&f) {
                        return Err(format!("'#if' guard references undeclared feature '{f}'"));
                    }
                }
                check_stmt(body, scope, in_loop)?;
            }
            Ok(())
        }
        StmtKind::Select { var, lo, hi } => {
            check_lvalue(
                &LValue {
                    name: var.clone(),
                    index: None,
                },
                scope,
            )?;
            check_expr(lo, scope)?;
            check_expr(hi, scope)
        }
        StmtKind::Call { name, args } => {
            match scope.inlines.get(name) {
                None => Err(format!("unknown inline '{name}'")),
                Some(arity) if *arity != args.len() => Err(format!(
                    "inline '{name}' expects {arity} arguments, got {}",
                    args.len()
                )),
                Some(_) => args.iter().try_for_each(|a| check_expr(a, scope)),
            }
        }
    }
}

fn check_lvalue(lv: &LValue, scope: &Scope) -> Result<(), String> {
    match scope.vars.get(&lv.name) {
        None => Err(format!("unknown variable '{}'", lv.name)),
        Some((_, len)) => {
            match (len, &lv.index) {
                (Some(_), None) => Err(format!("array '{}' used without index", lv.name)),
                (None, Some(_)) => Err(format!("scalar '{}' used with index", lv.name)),
                (_, Some(ix)) => check_expr(ix, scope),
                (None, None) => Ok(()),
            }
        }
    }
}

fn check_expr(e: &Expr, scope: &Scope) -> Result<(), String> {
    match e {
        Expr::Lit(_) | Expr::Hole { .. } => Ok(()),
        Expr::Var(n) => match scope.vars.get(n) {
            None => Err(format!("unknown variable '{n}'")),
            Some((_, Some(_))) => Err(format!("array '{n}' used without index")),
            Some((_, None)) => Ok(()),
        },
        Expr::Index(n, ix) => match scope.vars.get(n) {
            None => Err(format!("unknown variable '{n}'")),
            Some((_, None)) => Err(format!("scalar '{n}' used with index")),
            Some((_, Some(_))) => check_expr(ix, scope),
        },
        Expr::Unary(_, a) => check_expr(a, scope),
        Expr::Binary(_, a, b) => {
            check_expr(a, scope)?;
            check_expr(b, scope)
        }
        Expr::Chan(_, c) => {
            if scope.chans.contains(c) {
                Ok(())
            } else {
                Err(format!("unknown channel '{c}'"))
            }
        }
    }
}

fn check_ltl(l: &Ltl, scope: &Scope) -> Result<(), String> {
    match l {
        Ltl::Atom(e) => {
            if e.has_hole() {
                return Err("holes are not allowed inside LTL properties".into());
            }
            check_expr(e, scope)
        }
        Ltl::Not(a) | Ltl::Next(a) | Ltl::Eventually(a) | Ltl::Always(a) => check_ltl(a, scope),
        Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Until(a, b) => {
            check_ltl(a, scope)?;
            check_ltl(b, scope)
        }
    }
}
