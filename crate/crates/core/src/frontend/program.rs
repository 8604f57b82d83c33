//! Program model: the parsed syntax tree and the compiled transition system.

use std::collections::BTreeSet;

use super::parser::Parser;
use crate::error::ParseError;
use crate::logic::formula::{Expr, Index, Signature, Sort, Var};

pub const MUTEX_SEM: &str = "mutex_sem";
pub const ERROR_LOCATION: &str = "error";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    Shared,
    Local,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decl {
    pub scope: Scope,
    pub name: String,
    pub sort: Sort,
    pub init: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assign {
    pub target: Var,
    pub value: Expr,
}

/// `from: [guard] x := e, ... -> to;`
#[derive(Clone, Debug, PartialEq)]
pub struct Command {
    pub from: String,
    pub guard: Expr,
    pub assigns: Vec<Assign>,
    pub to: String,
}

impl Command {
    /// Does the command read or write another thread's locals?
    pub fn is_dual_reference(&self) -> bool {
        let passive = |e: &Expr| e.vars().iter().any(|v| v.index == Index::Passive);
        passive(&self.guard) || self.assigns.iter().any(|a| a.target.index == Index::Passive || passive(&a.value))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProgramAst {
    pub decls: Vec<Decl>,
    pub locations: Vec<String>,
    pub init: Vec<Expr>,
    pub mutex: Option<String>,
    pub commands: Vec<Command>,
}

/// A template program over shared variables S and locals L (including
/// `pc`), with transition formula over V and V' and an initial formula
/// over V. A program is dual-reference when some command or the initial
/// condition mentions passive copies `x@P`.
#[derive(Clone, Debug)]
pub struct AsyncProgram {
    pub ast: ProgramAst,
    pub sig: Signature,
    /// Commands after mutex instrumentation.
    pub commands: Vec<Command>,
    pub transition: Expr,
    pub initial: Expr,
    pub entry: String,
    pub error: Option<String>,
    pub dual_reference: bool,
}

pub fn parse_program(text: &str) -> Result<AsyncProgram, ParseError> {
    let ast = Parser::new(text)?.program()?;
    AsyncProgram::from_ast(ast)
}

impl AsyncProgram {
    pub fn from_ast(ast: ProgramAst) -> Result<Self, ParseError> {
        if ast.locations.is_empty() {
            return Err(ParseError::NoLocations);
        }
        let mut sig = Signature::default();
        sig.locals.push(("pc".into(), Sort::Loc));
        for d in &ast.decls {
            match d.scope {
                Scope::Shared => sig.shared.push((d.name.clone(), d.sort)),
                Scope::Local => sig.locals.push((d.name.clone(), d.sort)),
            }
        }
        sig.locations = ast.locations.clone();
        let mut commands = ast.commands.clone();
        if let Some(crit) = &ast.mutex {
            if sig.sort_of(MUTEX_SEM).is_some() {
                return Err(ParseError::Duplicate(MUTEX_SEM.into()));
            }
            sig.shared.push((MUTEX_SEM.into(), Sort::Bool));
            if !sig.locations.iter().any(|l| l == ERROR_LOCATION) {
                sig.locations.push(ERROR_LOCATION.into());
            }
            commands = instrument_mutex(commands, crit);
        }
        let error = sig.locations.iter().find(|l| *l == ERROR_LOCATION).cloned();
        let entry = sig.locations[0].clone();
        let dual_reference = commands.iter().any(Command::is_dual_reference)
            || ast.init.iter().any(|e| e.vars().iter().any(|v| v.index == Index::Passive));

        let mut init = vec![Expr::eq(Expr::var(Var::base("pc")), Expr::Loc(entry.clone()))];
        for d in &ast.decls {
            if let Some(v) = &d.init {
                init.push(Expr::eq(Expr::var(Var::base(&d.name)), v.clone()));
            }
        }
        if ast.mutex.is_some() {
            init.push(Expr::not(Expr::var(Var::base(MUTEX_SEM))));
        }
        init.extend(ast.init.iter().cloned());
        if dual_reference {
            // every passive thread starts at the entry as well
            init.insert(1, Expr::eq(Expr::var(Var::passive("pc")), Expr::Loc(entry.clone())));
        }

        let mut p =
            AsyncProgram { ast, sig, commands, transition: Expr::ff(), initial: Expr::and(init), entry, error, dual_reference };
        p.transition = Expr::or(p.commands.iter().map(|c| p.command_formula(c)));
        Ok(p)
    }

    /// Transition formula of a single command. Variables not assigned are
    /// framed; passive locals are framed only for dual-reference programs.
    pub fn command_formula(&self, c: &Command) -> Expr {
        let pc = Var::base("pc");
        let mut parts = vec![Expr::eq(Expr::var(pc.clone()), Expr::Loc(c.from.clone()))];
        if c.guard != Expr::tt() {
            parts.push(c.guard.clone());
        }
        let mut targets: Vec<Var> = self.sig.shared.iter().map(|(n, _)| Var::base(n)).collect();
        targets.extend(self.sig.locals.iter().filter(|(n, _)| n != "pc").map(|(n, _)| Var::base(n)));
        if self.dual_reference {
            targets.extend(self.sig.locals.iter().filter(|(n, _)| n != "pc").map(|(n, _)| Var::passive(n)));
        }
        for v in targets {
            let value = c.assigns.iter().find(|a| a.target == v).map(|a| a.value.clone()).unwrap_or_else(|| Expr::var(v.clone()));
            parts.push(Expr::eq(Expr::var(v.clone().primed()), value));
        }
        parts.push(Expr::eq(Expr::var(pc.primed()), Expr::Loc(c.to.clone())));
        if self.dual_reference {
            let ppc = Var::passive("pc");
            parts.push(Expr::eq(Expr::var(ppc.clone().primed()), Expr::var(ppc)));
        }
        Expr::and(parts)
    }

    pub fn command_formulas(&self) -> Vec<Expr> {
        self.commands.iter().map(|c| self.command_formula(c)).collect()
    }

    /// Initial condition of a dual-reference reading of this program: the
    /// pair (active, passive) must satisfy it.
    pub fn dr_initial(&self) -> Expr {
        if self.dual_reference {
            return self.initial.clone();
        }
        let locals = self.sig.local_names();
        let passive_copy = self.initial.map_vars(&mut |v| {
            if v.index == Index::Base && locals.contains(&v.name) {
                v.clone().with_index(Index::Passive)
            } else {
                v.clone()
            }
        });
        Expr::and([self.initial.clone(), passive_copy])
    }

    pub fn shared_names(&self) -> BTreeSet<String> {
        self.sig.shared_names()
    }

    /// Largest absolute integer literal in the program text.
    pub fn max_constant(&self) -> i64 {
        let mut m = 0i64;
        let mut visit = |e: &Expr| walk_ints(e, &mut |i| m = m.max(i.abs()));
        visit(&self.transition);
        visit(&self.initial);
        m
    }
}

fn walk_ints(e: &Expr, f: &mut impl FnMut(i64)) {
    match e {
        Expr::Int(i) => f(*i),
        Expr::Scale(k, a) => {
            f(*k);
            walk_ints(a, f)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Cmp(_, a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
            walk_ints(a, f);
            walk_ints(b, f)
        }
        Expr::Not(a) => walk_ints(a, f),
        Expr::And(xs) | Expr::Or(xs) => xs.iter().for_each(|x| walk_ints(x, f)),
        Expr::Bool(_) | Expr::Loc(_) | Expr::Var(_) => {}
    }
}

/// Ghost semaphore: entering `crit` while the semaphore is held leads to
/// the error location; leaving it releases the semaphore.
fn instrument_mutex(commands: Vec<Command>, crit: &str) -> Vec<Command> {
    let sem = || Expr::var(Var::base(MUTEX_SEM));
    let set = |b: bool| Assign { target: Var::base(MUTEX_SEM), value: Expr::Bool(b) };
    let mut out = Vec::new();
    for c in commands {
        let enters = c.to == crit && c.from != crit;
        let leaves = c.from == crit && c.to != crit;
        if enters {
            let mut ok = c.clone();
            ok.guard = Expr::and([c.guard.clone(), Expr::not(sem())]);
            ok.assigns.push(set(true));
            out.push(ok);
            out.push(Command {
                from: c.from.clone(),
                guard: Expr::and([c.guard.clone(), sem()]),
                assigns: vec![],
                to: ERROR_LOCATION.into(),
            });
        } else if leaves {
            let mut c = c;
            c.assigns.push(set(false));
            out.push(c);
        } else {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_body_has_false_transition() {
        let p = parse_program("local b: bool; locations l1;").unwrap();
        assert_eq!(p.transition, Expr::ff());
        assert_eq!(p.sig.locals.len(), 2);
    }

    #[test]
    fn decrement_command() {
        let p = parse_program("local l: int; locations l1; l1: l := l - 1 -> l1;").unwrap();
        assert_eq!(p.transition.to_string(), "pc == l1 && l' == l - 1 && pc' == l1");
        assert!(!p.dual_reference);
    }

    #[test]
    fn ticket_program_shape() {
        let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/programs/ticket.prog")).unwrap();
        let p = parse_program(&src).unwrap();
        assert_eq!(p.sig.shared_names().into_iter().collect::<Vec<_>>(), ["s", "t"]);
        assert_eq!(p.sig.local_names().into_iter().collect::<Vec<_>>(), ["l", "pc"]);
        assert_eq!(p.sig.locations, ["l1", "l2", "l3"]);
        assert_eq!(p.entry, "l1");
    }

    #[test]
    fn swap_is_dual_reference() {
        let p = parse_program("local l: bool; locations a; a: l := l@P, l@P := l -> a;").unwrap();
        assert!(p.dual_reference);
        assert!(p.transition.to_string().contains("l@P' == l"));
    }

    #[test]
    fn mutex_instrumentation() {
        let p = parse_program("locations a, cs; mutex cs; a: -> cs; cs: -> a;").unwrap();
        assert_eq!(p.commands.len(), 3);
        assert_eq!(p.error.as_deref(), Some("error"));
        assert!(p.sig.is_shared(MUTEX_SEM));
        assert_eq!(p.commands[1].to, "error");
    }

    #[test]
    fn diagnostics() {
        assert_eq!(parse_program("local x: int;").unwrap_err(), ParseError::NoLocations);
        let e = parse_program("locations a;\na: [y > 0] -> a;").unwrap_err();
        assert_eq!(e, ParseError::Undeclared { name: "y".into(), line: 2, col: 5 });
        let e = parse_program("locations a;\na: -> b;").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { line: 2, .. }));
    }
}
