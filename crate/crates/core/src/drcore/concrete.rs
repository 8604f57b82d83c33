//! Concrete dual-reference programs: shared-variable elimination, explicit
//! compilation over a bounded domain, bounded state exploration and a
//! symbolic monotonicity check.

use std::collections::{BTreeSet, VecDeque};

use super::program::{DrProgram, LocalState, Quad, StatePattern};
use crate::error::{Error, ParseError, Result};
use crate::frontend::{Assign, AsyncProgram, Decl, ProgramAst, Scope, MUTEX_SEM};
use crate::logic::{eval_formula, eval_term, CmpOp, Expr, Index, Model, SatResult, Solver, Sort, Value, Var};

/// Replace every shared variable by a thread-local copy. Writes update the
/// active and the passive copy together; initially all copies agree.
pub fn eliminate_shared(p: &AsyncProgram) -> Result<AsyncProgram, ParseError> {
    if p.sig.shared.is_empty() {
        return Ok(p.clone());
    }
    let shared = p.shared_names();
    let mut decls: Vec<Decl> = p.ast.decls.iter().map(|d| Decl { scope: Scope::Local, init: None, ..d.clone() }).collect();
    if p.ast.mutex.is_some() {
        decls.push(Decl { scope: Scope::Local, name: MUTEX_SEM.into(), sort: Sort::Bool, init: None });
    }
    let mut commands = p.commands.clone();
    for c in &mut commands {
        let mirrored: Vec<Assign> = c
            .assigns
            .iter()
            .filter(|a| a.target.index == Index::Base && shared.contains(&a.target.name))
            .map(|a| Assign { target: Var::passive(&a.target.name), value: a.value.clone() })
            .collect();
        c.assigns.extend(mirrored);
    }
    let mut init = vec![p.dr_initial()];
    for s in &shared {
        init.push(Expr::eq(Expr::var(Var::base(s)), Expr::var(Var::passive(s))));
    }
    let ast = ProgramAst { decls, locations: p.sig.locations.clone(), init, mutex: None, commands };
    AsyncProgram::from_ast(ast)
}

/// Values of one thread's locals (in signature order, `pc` included) or of
/// the shared variables.
pub type Valuation = Vec<Value>;

fn domain(sort: Sort, locations: &[String], bound: i64) -> Vec<Value> {
    match sort {
        Sort::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Sort::Int => (0..=bound).map(Value::Int).collect(),
        Sort::Loc => locations.iter().cloned().map(Value::Loc).collect(),
    }
}

fn valuations(vars: &[(String, Sort)], locations: &[String], bound: i64) -> Vec<Valuation> {
    let mut out = vec![vec![]];
    for (_, sort) in vars {
        let dom = domain(*sort, locations, bound);
        out = out
            .into_iter()
            .flat_map(|v: Valuation| {
                dom.iter().map(move |x| {
                    let mut v = v.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect();
    }
    out
}

fn in_range(v: &Value, bound: i64) -> bool {
    !matches!(v, Value::Int(i) if *i < 0 || *i > bound)
}

/// Model binding shared values, the active thread's locals as base
/// variables and, optionally, a partner's locals as passive variables.
fn bind(p: &AsyncProgram, shared: &[Value], active: &[Value], passive: Option<&[Value]>) -> Model {
    let mut m = Model::new();
    for ((name, _), v) in p.sig.shared.iter().zip(shared) {
        m.insert(Var::base(name), v.clone());
    }
    for ((name, _), v) in p.sig.locals.iter().zip(active) {
        m.insert(Var::base(name), v.clone());
    }
    if let Some(q) = passive {
        for ((name, _), v) in p.sig.locals.iter().zip(q) {
            m.insert(Var::passive(name), v.clone());
        }
    }
    m
}

type Effect = (Valuation, Valuation, Option<Valuation>);

/// Effect of command `ci` for the given active thread and partner, or None
/// when the guard fails or a value leaves `[0, bound]`.
fn fire(
    p: &AsyncProgram,
    ci: usize,
    shared: &[Value],
    active: &[Value],
    passive: Option<&[Value]>,
    bound: i64,
) -> Result<Option<Effect>> {
    let c = &p.commands[ci];
    if active[0] != Value::Loc(c.from.clone()) {
        return Ok(None);
    }
    let m = bind(p, shared, active, passive);
    if !eval_formula(&c.guard, &m)? {
        return Ok(None);
    }
    let value_of = |v: Var, old: &Value| -> Result<Value> {
        match c.assigns.iter().find(|a| a.target == v) {
            Some(a) => Ok(eval_term(&a.value, &m)?),
            None => Ok(old.clone()),
        }
    };
    let mut s2 = Vec::with_capacity(shared.len());
    for ((name, _), old) in p.sig.shared.iter().zip(shared) {
        s2.push(value_of(Var::base(name), old)?);
    }
    let mut a2 = Vec::with_capacity(active.len());
    for ((name, _), old) in p.sig.locals.iter().zip(active) {
        a2.push(if name == "pc" { Value::Loc(c.to.clone()) } else { value_of(Var::base(name), old)? });
    }
    let p2 = match passive {
        Some(q) => {
            let mut out = Vec::with_capacity(q.len());
            for ((name, _), old) in p.sig.locals.iter().zip(q) {
                out.push(if name == "pc" { old.clone() } else { value_of(Var::passive(name), old)? });
            }
            Some(out)
        }
        None => None,
    };
    let ok = s2.iter().chain(&a2).chain(p2.iter().flatten()).all(|v| in_range(v, bound));
    Ok(ok.then_some((s2, a2, p2)))
}

fn bits_for(sort: Sort, bound: i64) -> usize {
    match sort {
        Sort::Bool => 1,
        Sort::Int => (64 - (bound as u64).leading_zeros()) as usize,
        Sort::Loc => unreachable!("only pc ranges over locations"),
    }
}

/// Explicit Boolean DR program of a concrete program without shared
/// variables, with integers restricted to `[0, bound]`. Each local gets a
/// binary field in the bits; out-of-range results disable the move.
pub fn compile_explicit(p: &AsyncProgram, bound: i64) -> Result<DrProgram> {
    if !p.sig.shared.is_empty() {
        return Err(Error::Invalid("shared variables must be eliminated before explicit compilation".into()));
    }
    if bound < 1 {
        return Err(Error::Invalid("bound must be at least 1".into()));
    }
    let fields: Vec<(String, Sort)> = p.sig.locals.iter().filter(|(n, _)| n != "pc").cloned().collect();
    let mut bit_names = Vec::new();
    for (name, sort) in &fields {
        let w = bits_for(*sort, bound);
        if w == 1 {
            bit_names.push(name.clone());
        } else {
            bit_names.extend((0..w).map(|i| format!("{name}#{i}")));
        }
    }
    if bit_names.len() > 16 {
        return Err(Error::Invalid(format!("{} state bits are too many for explicit compilation", bit_names.len())));
    }
    let encode = |v: &[Value]| -> LocalState {
        let pc = match &v[0] {
            Value::Loc(l) => p.sig.location_index(l).unwrap() as u16,
            _ => unreachable!(),
        };
        let mut bits = 0u32;
        let mut off = 0;
        for ((_, sort), x) in fields.iter().zip(&v[1..]) {
            let raw = match x {
                Value::Bool(b) => *b as u32,
                Value::Int(i) => *i as u32,
                Value::Loc(_) => unreachable!(),
            };
            bits |= raw << off;
            off += bits_for(*sort, bound);
        }
        LocalState { pc, bits }
    };
    let mut d = DrProgram::new(p.sig.locations.clone(), bit_names);
    let vals = valuations(&p.sig.locals, &p.sig.locations, bound);
    let codes: BTreeSet<u32> = vals.iter().map(|v| encode(v).bits).collect();
    d.codes = codes.into_iter().collect();
    for ci in 0..p.commands.len() {
        for a in &vals {
            for q in &vals {
                if let Some((_, a2, Some(q2))) = fire(p, ci, &[], a, Some(q), bound)? {
                    d.trans.insert(Quad::new(encode(a), encode(q), encode(&a2), encode(&q2)));
                }
            }
        }
    }
    let init = p.dr_initial();
    for a in &vals {
        for q in &vals {
            if eval_formula(&init, &bind(p, &[], a, Some(q)))? {
                d.init.insert((encode(a), encode(q)));
            }
        }
    }
    if let Some(e) = &p.error {
        d.error.push(StatePattern { pc: d.location(e).unwrap(), mask: 0, value: 0 });
    }
    Ok(d)
}

/// A global state of the n-thread instance.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConcreteState {
    pub shared: Valuation,
    pub locals: Vec<Valuation>,
}

impl ConcreteState {
    /// Shared variables unindexed, the locals of thread `t` at index `t + 1`.
    pub fn to_model(&self, p: &AsyncProgram) -> Model {
        let mut m = Model::new();
        for ((name, _), v) in p.sig.shared.iter().zip(&self.shared) {
            m.insert(Var::base(name), v.clone());
        }
        for (t, locals) in self.locals.iter().enumerate() {
            for ((name, _), v) in p.sig.locals.iter().zip(locals) {
                m.insert(Var::thread(name, t as u32 + 1), v.clone());
            }
        }
        m
    }
}

/// Every state of the n-thread instance with integers in `[0, bound]`.
pub fn concrete_states(p: &AsyncProgram, n: usize, bound: i64) -> Vec<ConcreteState> {
    let lvals = valuations(&p.sig.locals, &p.sig.locations, bound);
    let mut out = Vec::new();
    for sv in valuations(&p.sig.shared, &p.sig.locations, bound) {
        for locals in tuples(&lvals, n) {
            out.push(ConcreteState { shared: sv.clone(), locals });
        }
    }
    out
}

/// Initial states of the n-thread instance with integers in `[0, bound]`.
pub fn concrete_initial_states(p: &AsyncProgram, n: usize, bound: i64) -> Result<Vec<ConcreteState>> {
    if p.dual_reference && n < 2 {
        return Err(Error::Invalid("dual-reference programs need at least two threads".into()));
    }
    let svals = valuations(&p.sig.shared, &p.sig.locations, bound);
    let lvals = valuations(&p.sig.locals, &p.sig.locations, bound);
    let mut out = BTreeSet::new();
    for sv in &svals {
        if !p.dual_reference {
            let mut ok = Vec::new();
            for l in &lvals {
                if eval_formula(&p.initial, &bind(p, sv, l, None))? {
                    ok.push(l.clone());
                }
            }
            for t in tuples(&ok, n) {
                out.insert(ConcreteState { shared: sv.clone(), locals: t });
            }
            continue;
        }
        for x in &lvals {
            let mut partners = Vec::new();
            for y in &lvals {
                if eval_formula(&p.initial, &bind(p, sv, x, Some(y)))? {
                    partners.push(y.clone());
                }
            }
            if partners.is_empty() {
                continue;
            }
            for rest in tuples(&partners, n - 1) {
                for i in 0..n {
                    let mut locals = rest.clone();
                    locals.insert(i, x.clone());
                    out.insert(ConcreteState { shared: sv.clone(), locals });
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

fn tuples<T: Clone>(xs: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t: Vec<T>| {
                xs.iter().map(move |x| {
                    let mut t = t.clone();
                    t.push(x.clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// Successors in the n-thread instance. For dual-reference programs the
/// active thread's effect must agree across all partners.
pub fn concrete_successors(p: &AsyncProgram, s: &ConcreteState, bound: i64) -> Result<Vec<ConcreteState>> {
    let n = s.locals.len();
    let mut out = BTreeSet::new();
    for a in 0..n {
        'cmd: for ci in 0..p.commands.len() {
            if !p.dual_reference {
                if let Some((s2, a2, _)) = fire(p, ci, &s.shared, &s.locals[a], None, bound)? {
                    let mut locals = s.locals.clone();
                    locals[a] = a2;
                    out.insert(ConcreteState { shared: s2, locals });
                }
                continue;
            }
            if n < 2 {
                continue;
            }
            let mut common: Option<(Valuation, Valuation)> = None;
            let mut locals = s.locals.clone();
            for q in (0..n).filter(|&q| q != a) {
                let Some((s2, a2, Some(q2))) = fire(p, ci, &s.shared, &s.locals[a], Some(&s.locals[q]), bound)? else {
                    continue 'cmd;
                };
                match &common {
                    Some(c) if *c != (s2.clone(), a2.clone()) => continue 'cmd,
                    _ => common = Some((s2, a2)),
                }
                locals[q] = q2;
            }
            let (s2, a2) = common.unwrap();
            locals[a] = a2;
            out.insert(ConcreteState { shared: s2, locals });
        }
    }
    Ok(out.into_iter().collect())
}

/// All states of the n-thread instance reachable within `[0, bound]`.
/// Fails when more than `limit` states are found.
pub fn explore_concrete(p: &AsyncProgram, n: usize, bound: i64, limit: usize) -> Result<BTreeSet<ConcreteState>> {
    let mut seen: BTreeSet<ConcreteState> = concrete_initial_states(p, n, bound)?.into_iter().collect();
    let mut queue: VecDeque<ConcreteState> = seen.iter().cloned().collect();
    while let Some(s) = queue.pop_front() {
        for t in concrete_successors(p, &s, bound)? {
            if seen.insert(t.clone()) {
                if seen.len() > limit {
                    return Err(Error::Invalid(format!("more than {limit} reachable states")));
                }
                queue.push_back(t);
            }
        }
    }
    Ok(seen)
}

/// Eliminate the primed passive variables of a command formula, each of
/// which is defined by an equation `x@P' == e`.
fn eliminate_passive_next(f: &Expr) -> Result<Expr> {
    let mut defs = Vec::new();
    let mut rest = Vec::new();
    for c in f.conjuncts() {
        match c {
            Expr::Cmp(CmpOp::Eq, lhs, rhs) => match lhs.as_ref() {
                Expr::Var(v) if v.primed && v.index == Index::Passive => defs.push((v.clone(), (**rhs).clone())),
                _ => rest.push(c.clone()),
            },
            _ => rest.push(c.clone()),
        }
    }
    let body = Expr::and(rest);
    let out = body.substitute(&mut |v| defs.iter().find(|(w, _)| w == v).map(|(_, e)| e.clone()));
    if out.vars().iter().any(|v| v.primed && v.index == Index::Passive) {
        return Err(Error::Invalid("passive next state is not defined by the command".into()));
    }
    Ok(out)
}

/// Formula whose models are violations of the local monotonicity condition:
/// the active move is possible with partner 1 but not with partner 2.
/// With `naturals`, pre-state integers are non-negative.
pub fn monotone_violation_formula(p: &AsyncProgram, naturals: bool) -> Result<Expr> {
    let mut moves = Vec::new();
    for c in p.command_formulas() {
        moves.push(eliminate_passive_next(&c)?);
    }
    let reindex = |i: u32| {
        let moves = &moves;
        Expr::or(moves.iter().map(move |m| {
            m.map_vars(&mut |v| if v.index == Index::Passive { v.clone().with_index(Index::Thread(i)) } else { v.clone() })
        }))
    };
    let mut parts = vec![reindex(1), Expr::not(reindex(2))];
    if naturals {
        let f = Expr::and(parts.clone());
        for v in f.vars() {
            if !v.primed && p.sig.sort_of(&v.name) == Some(Sort::Int) {
                parts.push(Expr::cmp(CmpOp::Ge, Expr::var(v), Expr::Int(0)));
            }
        }
    }
    Ok(Expr::and(parts))
}

#[derive(Clone, Debug, PartialEq)]
pub enum SymbolicMonotonicity {
    Monotone,
    /// Active pre/post state with partner `@1` completing the move and
    /// partner `@2` blocking it.
    Violation(Model),
    Unknown,
}

/// Decide the local monotonicity condition of a concrete program with a
/// solver. Asynchronous programs are monotone without a query.
pub fn check_monotone_symbolic(p: &AsyncProgram, solver: &Solver, naturals: bool) -> Result<SymbolicMonotonicity> {
    if !p.dual_reference {
        return Ok(SymbolicMonotonicity::Monotone);
    }
    let f = monotone_violation_formula(p, naturals)?;
    Ok(match solver.check_sat(&f, &p.sig)? {
        SatResult::Sat(m) => SymbolicMonotonicity::Violation(m),
        SatResult::Unsat => SymbolicMonotonicity::Monotone,
        SatResult::Unknown => SymbolicMonotonicity::Unknown,
    })
}
