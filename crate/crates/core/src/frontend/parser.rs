//! Recursive-descent parser for formulas and the guarded-command program
//! language.

use super::lexer::{tokenize, Tok, Token};
use super::program::{Assign, Command, Decl, ProgramAst, Scope as DeclScope};
use crate::error::ParseError;
use crate::logic::formula::{CmpOp, Expr, Signature, Sort, Var};

const KEYWORDS: &[&str] = &["shared", "local", "locations", "init", "mutex", "true", "false", "max", "int", "bool", "pc"];

/// What identifiers may resolve to while parsing a formula.
pub(crate) struct Scope<'a> {
    pub sig: &'a Signature,
    pub allow_passive: bool,
    pub allow_primed: bool,
}

enum Term {
    Plain(Expr),
    Max(Vec<Expr>),
}

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(src)?, pos: 0 })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek().tok, Tok::Sym(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == kw)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError::Syntax { line: t.line, col: t.col, msg: msg.into() })
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", Self::describe(&self.peek().tok)))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Ident(name) => {
                self.bump();
                Ok((name, t.line, t.col))
            }
            other => self.err(format!("expected identifier, found {}", Self::describe(&other))),
        }
    }

    fn expect_name(&mut self) -> Result<String, ParseError> {
        let (name, line, col) = self.expect_ident()?;
        if KEYWORDS.contains(&name.as_str()) {
            return Err(ParseError::Syntax { line, col, msg: format!("`{name}` is a reserved word") });
        }
        Ok(name)
    }

    pub fn position(&self) -> (usize, usize) {
        (self.peek().line, self.peek().col)
    }

    pub fn eat_separator(&mut self) -> bool {
        self.eat_sym(";")
    }

    /// Is the next token the first one on its line?
    pub fn at_line_start(&self) -> bool {
        self.pos == 0 || self.toks[self.pos - 1].line < self.peek().line
    }

    pub fn unexpected<T>(&self) -> Result<T, ParseError> {
        self.err(format!("unexpected {}", Self::describe(&self.peek().tok)))
    }

    // ---- formulas -------------------------------------------------------

    pub fn formula(&mut self, scope: &Scope) -> Result<Expr, ParseError> {
        let mut lhs = self.implies(scope)?;
        while self.eat_sym("<=>") {
            let rhs = self.implies(scope)?;
            lhs = Expr::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self, scope: &Scope) -> Result<Expr, ParseError> {
        let lhs = self.disjunction(scope)?;
        if self.eat_sym("=>") {
            let rhs = self.implies(scope)?;
            return Ok(Expr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self, scope: &Scope) -> Result<Expr, ParseError> {
        let mut items = vec![self.conjunction(scope)?];
        while self.eat_sym("||") {
            items.push(self.conjunction(scope)?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::Or(items) })
    }

    fn conjunction(&mut self, scope: &Scope) -> Result<Expr, ParseError> {
        let mut items = vec![self.unary(scope)?];
        while self.eat_sym("&&") {
            items.push(self.unary(scope)?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Expr::And(items) })
    }

    fn unary(&mut self, scope: &Scope) -> Result<Expr, ParseError> {
        if self.eat_sym("!") {
            let inner = self.unary(scope)?;
            return Ok(Expr::Not(Box::new(inner)));
        }
        self.comparison(scope)
    }

    fn comparison(&mut self, scope: &Scope) -> Result<Expr, ParseError> {
        let lhs = self.sum(scope)?;
        let op = match self.peek().tok {
            Tok::Sym("==") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => {
                return match lhs {
                    Term::Plain(e) => Ok(e),
                    Term::Max(_) => self.err("`max` may only appear as an operand of a comparison"),
                }
            }
        };
        self.bump();
        let rhs = self.sum(scope)?;
        match (lhs, rhs) {
            (Term::Plain(a), Term::Plain(b)) => Ok(Expr::cmp(op, a, b)),
            (Term::Plain(a), Term::Max(args)) => Ok(lower_max(op, a, args)),
            (Term::Max(args), Term::Plain(b)) => Ok(lower_max(flip(op), b, args)),
            (Term::Max(_), Term::Max(_)) => self.err("comparison between two `max` terms is not supported"),
        }
    }

    fn sum(&mut self, scope: &Scope) -> Result<Term, ParseError> {
        let first = self.product(scope)?;
        if !(self.is_sym("+") || self.is_sym("-")) {
            return Ok(first);
        }
        let mut acc = self.plain(first)?;
        loop {
            if self.eat_sym("+") {
                let rhs = self.product(scope)?;
                acc = Expr::Add(Box::new(acc), Box::new(self.plain(rhs)?));
            } else if self.eat_sym("-") {
                let rhs = self.product(scope)?;
                acc = Expr::Sub(Box::new(acc), Box::new(self.plain(rhs)?));
            } else {
                return Ok(Term::Plain(acc));
            }
        }
    }

    fn plain(&self, t: Term) -> Result<Expr, ParseError> {
        match t {
            Term::Plain(e) => Ok(e),
            Term::Max(_) => self.err("`max` may only appear as an operand of a comparison"),
        }
    }

    fn product(&mut self, scope: &Scope) -> Result<Term, ParseError> {
        let first = self.atom(scope)?;
        if !self.is_sym("*") {
            return Ok(first);
        }
        let mut acc = self.plain(first)?;
        while self.eat_sym("*") {
            let rhs = self.atom(scope)?;
            let rhs = self.plain(rhs)?;
            acc = match (acc, rhs) {
                (Expr::Int(k), e) | (e, Expr::Int(k)) => Expr::Scale(k, Box::new(e)),
                _ => return self.err("non-linear multiplication: one factor must be an integer literal"),
            };
        }
        Ok(Term::Plain(acc))
    }

    fn atom(&mut self, scope: &Scope) -> Result<Term, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Int(i) => {
                self.bump();
                Ok(Term::Plain(Expr::Int(i)))
            }
            Tok::Sym("-") => {
                self.bump();
                let inner = self.atom(scope)?;
                Ok(Term::Plain(match self.plain(inner)? {
                    Expr::Int(i) => Expr::Int(-i),
                    e => Expr::Scale(-1, Box::new(e)),
                }))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.formula(scope)?;
                self.expect_sym(")")?;
                Ok(Term::Plain(e))
            }
            Tok::Ident(ref name) if name == "true" || name == "false" => {
                self.bump();
                Ok(Term::Plain(Expr::Bool(name == "true")))
            }
            Tok::Ident(ref name) if name == "max" && *self.peek_at(1) == Tok::Sym("(") => {
                self.bump();
                self.bump();
                let mut args = Vec::new();
                loop {
                    let a = self.sum(scope)?;
                    args.push(self.plain(a)?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(")")?;
                if args.len() < 2 {
                    return Err(ParseError::Syntax {
                        line: t.line,
                        col: t.col,
                        msg: "`max` needs at least two arguments".into(),
                    });
                }
                Ok(Term::Max(args))
            }
            Tok::Ident(name) => {
                self.bump();
                let passive = if self.eat_sym("@") {
                    match self.peek().tok.clone() {
                        Tok::Ident(p) if p == "P" => {
                            self.bump();
                            true
                        }
                        other => return self.err(format!("expected `P` after `@`, found {}", Self::describe(&other))),
                    }
                } else {
                    false
                };
                let primed = self.eat_sym("'");
                self.resolve(scope, name, passive, primed, t.line, t.col).map(Term::Plain)
            }
            other => self.err(format!("expected a term, found {}", Self::describe(&other))),
        }
    }

    fn resolve(
        &self,
        scope: &Scope,
        name: String,
        passive: bool,
        primed: bool,
        line: usize,
        col: usize,
    ) -> Result<Expr, ParseError> {
        if primed && !scope.allow_primed {
            return Err(ParseError::Primed { name, line, col });
        }
        if scope.sig.sort_of(&name).is_some() {
            if passive {
                if !scope.allow_passive {
                    return Err(ParseError::Passive { name, line, col });
                }
                if !scope.sig.is_local(&name) {
                    return Err(ParseError::Undeclared { name: format!("{name}@P"), line, col });
                }
            }
            let mut v = if passive { Var::passive(name) } else { Var::base(name) };
            v.primed = primed;
            return Ok(Expr::Var(v));
        }
        if !passive && !primed && scope.sig.location_index(&name).is_some() {
            return Ok(Expr::Loc(name));
        }
        Err(ParseError::Undeclared { name, line, col })
    }

    /// Parse a formula and check that it is Boolean-sorted.
    pub fn checked_formula(&mut self, scope: &Scope) -> Result<Expr, ParseError> {
        let (line, col) = self.position();
        let e = self.formula(scope)?;
        match sort_of(&e, scope.sig) {
            Ok(Sort::Bool) => Ok(e),
            Ok(s) => Err(ParseError::Sort { line, col, msg: format!("expected a formula, found a {s} term") }),
            Err(msg) => Err(ParseError::Sort { line, col, msg }),
        }
    }

    // ---- programs -------------------------------------------------------

    /// Parse a whole program. Declarations are collected in a first pass so
    /// that guards may mention variables declared later in the file.
    pub fn program(&mut self) -> Result<ProgramAst, ParseError> {
        let mut ast = ProgramAst::default();
        let mut sig = Signature::default();
        sig.locals.push(("pc".to_string(), Sort::Loc));

        let start = self.pos;
        while !self.at_eof() {
            if self.is_kw("shared") || self.is_kw("local") {
                let scope = if self.is_kw("shared") { DeclScope::Shared } else { DeclScope::Local };
                self.bump();
                let name = self.expect_name()?;
                self.expect_sym(":")?;
                let (sort_name, line, col) = self.expect_ident()?;
                let sort = match sort_name.as_str() {
                    "int" => Sort::Int,
                    "bool" => Sort::Bool,
                    _ => return Err(ParseError::Syntax { line, col, msg: format!("unknown sort `{sort_name}`") }),
                };
                if sig.sort_of(&name).is_some() || ast.decls.iter().any(|d| d.name == name) {
                    return Err(ParseError::Duplicate(name));
                }
                match scope {
                    DeclScope::Shared => sig.shared.push((name.clone(), sort)),
                    DeclScope::Local => sig.locals.push((name.clone(), sort)),
                }
                ast.decls.push(Decl { scope, name, sort, init: None });
                // initial value is parsed in the second pass
                self.skip_statement();
            } else if self.is_kw("locations") {
                self.bump();
                loop {
                    let name = self.expect_name()?;
                    if ast.locations.contains(&name) || sig.sort_of(&name).is_some() {
                        return Err(ParseError::Duplicate(name));
                    }
                    ast.locations.push(name);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(";")?;
            } else {
                self.skip_statement();
            }
        }
        for (name, _) in sig.shared.iter().chain(sig.locals.iter()) {
            if ast.locations.contains(name) {
                return Err(ParseError::Duplicate(name.clone()));
            }
        }
        sig.locations = ast.locations.clone();

        self.pos = start;
        let guard_scope = Scope { sig: &sig, allow_passive: true, allow_primed: false };
        let mut decl_idx = 0;
        while !self.at_eof() {
            if self.is_kw("shared") || self.is_kw("local") {
                // name : sort
                for _ in 0..4 {
                    self.bump();
                }
                if self.eat_sym("=") {
                    let (line, col) = self.position();
                    let e = self.formula(&guard_scope)?;
                    let want = ast.decls[decl_idx].sort;
                    match sort_of(&e, &sig) {
                        Ok(s) if s == want => {}
                        Ok(s) => {
                            return Err(ParseError::Sort {
                                line,
                                col,
                                msg: format!("initial value of sort {s} for a {want} variable"),
                            })
                        }
                        Err(msg) => return Err(ParseError::Sort { line, col, msg }),
                    }
                    ast.decls[decl_idx].init = Some(e);
                }
                self.expect_sym(";")?;
                decl_idx += 1;
            } else if self.is_kw("locations") {
                self.skip_statement();
            } else if self.is_kw("init") {
                self.bump();
                let e = self.checked_formula(&guard_scope)?;
                self.expect_sym(";")?;
                ast.init.push(e);
            } else if self.is_kw("mutex") {
                self.bump();
                let name = self.expect_name()?;
                if !ast.locations.contains(&name) {
                    return Err(ParseError::UnknownLocation(name));
                }
                if ast.mutex.is_some() {
                    return self.err("at most one `mutex` directive is allowed");
                }
                self.expect_sym(";")?;
                ast.mutex = Some(name);
            } else {
                let cmd = self.command(&sig, &guard_scope)?;
                ast.commands.push(cmd);
            }
        }
        Ok(ast)
    }

    fn skip_statement(&mut self) {
        while !self.at_eof() && !self.is_sym(";") {
            self.bump();
        }
        self.eat_sym(";");
    }

    fn location_name(&mut self, sig: &Signature) -> Result<String, ParseError> {
        let (name, line, col) = self.expect_ident()?;
        if sig.location_index(&name).is_none() {
            return Err(ParseError::Syntax { line, col, msg: format!("unknown location `{name}`") });
        }
        Ok(name)
    }

    fn command(&mut self, sig: &Signature, scope: &Scope) -> Result<Command, ParseError> {
        let from = self.location_name(sig)?;
        self.expect_sym(":")?;
        let guard = if self.eat_sym("[") {
            let g = self.checked_formula(scope)?;
            self.expect_sym("]")?;
            g
        } else {
            Expr::tt()
        };
        let mut assigns: Vec<Assign> = Vec::new();
        if !self.is_sym("->") {
            loop {
                let (name, line, col) = self.expect_ident()?;
                let passive = if self.eat_sym("@") {
                    let (p, pl, pcol) = self.expect_ident()?;
                    if p != "P" {
                        return Err(ParseError::Syntax { line: pl, col: pcol, msg: "expected `P` after `@`".into() });
                    }
                    true
                } else {
                    false
                };
                let want = match sig.sort_of(&name) {
                    Some(_) if name == "pc" => {
                        return Err(ParseError::Syntax {
                            line,
                            col,
                            msg: "`pc` is assigned by the command's target location".into(),
                        })
                    }
                    Some(s) => s,
                    None => return Err(ParseError::Undeclared { name, line, col }),
                };
                if passive && !sig.is_local(&name) {
                    return Err(ParseError::Undeclared { name: format!("{name}@P"), line, col });
                }
                let target = if passive { Var::passive(name) } else { Var::base(name) };
                if assigns.iter().any(|a| a.target == target) {
                    return Err(ParseError::Syntax { line, col, msg: format!("`{target}` assigned twice") });
                }
                self.expect_sym(":=")?;
                let (line, col) = self.position();
                let value = self.formula(scope)?;
                match sort_of(&value, sig) {
                    Ok(s) if s == want => {}
                    Ok(s) => {
                        return Err(ParseError::Sort {
                            line,
                            col,
                            msg: format!("assigning a {s} value to {want} variable `{target}`"),
                        })
                    }
                    Err(msg) => return Err(ParseError::Sort { line, col, msg }),
                }
                assigns.push(Assign { target, value });
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym("->")?;
        let to = self.location_name(sig)?;
        self.expect_sym(";")?;
        Ok(Command { from, guard, assigns, to })
    }
}

fn flip(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Lt => CmpOp::Gt,
        CmpOp::Le => CmpOp::Ge,
        CmpOp::Gt => CmpOp::Lt,
        CmpOp::Ge => CmpOp::Le,
        o => o,
    }
}

/// `x op max(args)` as a Boolean combination of plain comparisons.
fn lower_max(op: CmpOp, x: Expr, args: Vec<Expr>) -> Expr {
    let each = |o: CmpOp| args.iter().map(|a| Expr::cmp(o, x.clone(), a.clone())).collect::<Vec<_>>();
    match op {
        CmpOp::Gt | CmpOp::Ge => Expr::and(each(op)),
        CmpOp::Lt | CmpOp::Le => Expr::or(each(op)),
        CmpOp::Eq => Expr::and([Expr::and(each(CmpOp::Ge)), Expr::or(each(CmpOp::Eq))]),
        CmpOp::Ne => Expr::not(lower_max(CmpOp::Eq, x, args)),
    }
}

/// Sort of a term, or a message describing the first ill-sorted subterm.
pub fn sort_of(e: &Expr, sig: &Signature) -> Result<Sort, String> {
    let want = |x: &Expr, s: Sort| -> Result<(), String> {
        let got = sort_of(x, sig)?;
        if got == s {
            Ok(())
        } else {
            Err(format!("`{x}` has sort {got}, expected {s}"))
        }
    };
    match e {
        Expr::Bool(_) => Ok(Sort::Bool),
        Expr::Int(_) => Ok(Sort::Int),
        Expr::Loc(_) => Ok(Sort::Loc),
        Expr::Var(v) => sig.sort_of(&v.name).ok_or_else(|| format!("undeclared variable `{v}`")),
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            want(a, Sort::Int)?;
            want(b, Sort::Int)?;
            Ok(Sort::Int)
        }
        Expr::Scale(_, a) => {
            want(a, Sort::Int)?;
            Ok(Sort::Int)
        }
        Expr::Cmp(op, a, b) => {
            let (sa, sb) = (sort_of(a, sig)?, sort_of(b, sig)?);
            if sa != sb {
                return Err(format!("cannot compare `{a}` ({sa}) with `{b}` ({sb})"));
            }
            if !matches!(op, CmpOp::Eq | CmpOp::Ne) && sa != Sort::Int {
                return Err(format!("`{}` needs integer operands in `{e}`", op.symbol()));
            }
            Ok(Sort::Bool)
        }
        Expr::Not(a) => {
            want(a, Sort::Bool)?;
            Ok(Sort::Bool)
        }
        Expr::And(xs) | Expr::Or(xs) => {
            for x in xs {
                want(x, Sort::Bool)?;
            }
            Ok(Sort::Bool)
        }
        Expr::Implies(a, b) | Expr::Iff(a, b) => {
            want(a, Sort::Bool)?;
            want(b, Sort::Bool)?;
            Ok(Sort::Bool)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature {
            shared: vec![("s".into(), Sort::Int), ("t".into(), Sort::Int)],
            locals: vec![("pc".into(), Sort::Loc), ("l".into(), Sort::Int)],
            locations: vec!["l1".into(), "l2".into()],
            ..Default::default()
        }
    }

    fn parse(src: &str) -> Result<Expr, ParseError> {
        let s = sig();
        let scope = Scope { sig: &s, allow_passive: true, allow_primed: false };
        let mut p = Parser::new(src)?;
        p.checked_formula(&scope)
    }

    #[test]
    fn max_lowering() {
        assert_eq!(parse("t > max(l, l@P)").unwrap().to_string(), "t > l && t > l@P");
        assert_eq!(parse("max(l, l@P) < t").unwrap().to_string(), "t > l && t > l@P");
        assert_eq!(parse("t <= max(l, s)").unwrap().to_string(), "t <= l || t <= s");
    }

    #[test]
    fn precedence() {
        let e = parse("l == 1 || l == 2 && !(s < t)").unwrap();
        assert!(matches!(e, Expr::Or(_)));
        assert_eq!(parse("s - 2 * t >= l").unwrap().to_string(), "s - 2 * t >= l");
    }

    #[test]
    fn errors() {
        assert!(matches!(parse("l' == 1"), Err(ParseError::Primed { .. })));
        assert!(matches!(parse("u == 1"), Err(ParseError::Undeclared { line: 1, col: 1, .. })));
        assert!(matches!(parse("s@P == 1"), Err(ParseError::Undeclared { .. })));
        assert!(matches!(parse("pc < 1"), Err(ParseError::Sort { .. })));
        assert!(matches!(parse("l + 1"), Err(ParseError::Sort { .. })));
        assert!(matches!(parse("max(l, s)"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("pc == l1 &&"), Err(ParseError::Syntax { .. })));
    }
}
