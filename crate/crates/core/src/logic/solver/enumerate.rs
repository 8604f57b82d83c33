//! Exhaustive bounded model search with partial evaluation for pruning.

use std::collections::BTreeSet;

use super::{Projection, SatResult};
use crate::error::SolverError;
use crate::logic::eval::{Model, Value};
use crate::logic::formula::{CmpOp, Expr, Index, Signature, Sort, Var};

const MAX_LEAVES_LOG2: f64 = 40.0;

enum Node {
    Const(i64),
    Slot(usize),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Scale(i64, Box<Node>),
    Cmp(CmpOp, Box<Node>, Box<Node>),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
}

impl Node {
    fn eval(&self, a: &[Option<i64>]) -> Option<i64> {
        match self {
            Node::Const(c) => Some(*c),
            Node::Slot(i) => a[*i],
            Node::Add(x, y) => Some(x.eval(a)? + y.eval(a)?),
            Node::Sub(x, y) => Some(x.eval(a)? - y.eval(a)?),
            Node::Scale(k, x) => Some(k * x.eval(a)?),
            Node::Cmp(op, x, y) => Some(op.holds(x.eval(a)?, y.eval(a)?) as i64),
            Node::Not(x) => x.eval(a).map(|v| 1 - v),
            Node::And(xs) => {
                let mut all = true;
                for x in xs {
                    match x.eval(a) {
                        Some(0) => return Some(0),
                        Some(_) => {}
                        None => all = false,
                    }
                }
                all.then_some(1)
            }
            Node::Or(xs) => {
                let mut all = true;
                for x in xs {
                    match x.eval(a) {
                        Some(0) => {}
                        Some(_) => return Some(1),
                        None => all = false,
                    }
                }
                all.then_some(0)
            }
            Node::Implies(x, y) => match (x.eval(a), y.eval(a)) {
                (Some(0), _) | (_, Some(1)) => Some(1),
                (Some(1), Some(0)) => Some(0),
                _ => None,
            },
            Node::Iff(x, y) => Some((x.eval(a)? == y.eval(a)?) as i64),
        }
    }
}

pub struct Enumerator {
    vars: Vec<(Var, Sort)>,
    domains: Vec<i64>,
    formula: Node,
    locations: Vec<String>,
}

impl Enumerator {
    pub fn new(f: &Expr, sig: &Signature, bound: i64) -> Result<Self, SolverError> {
        Self::with_extra(f, &[], sig, bound).map(|(e, _)| e)
    }

    fn with_extra(f: &Expr, extra: &[Expr], sig: &Signature, bound: i64) -> Result<(Self, Vec<Node>), SolverError> {
        let mut set: BTreeSet<Var> = f.vars();
        for e in extra {
            set.extend(e.vars());
        }
        let mut vars = set
            .into_iter()
            .map(|v| {
                let s = sig.sort_of(&v.name).ok_or_else(|| SolverError::Protocol(format!("no sort for variable `{v}`")))?;
                Ok((v, s))
            })
            .collect::<Result<Vec<_>, SolverError>>()?;
        vars.sort_by_key(|(v, _)| {
            let aux = sig.aux.contains_key(&v.name);
            let shared = sig.is_shared(&v.name);
            let thread = match v.index {
                Index::Base => 0,
                Index::Passive => 1,
                Index::Thread(i) => 1 + i,
            };
            (aux, !shared, thread, v.primed, v.name.clone())
        });
        let domains: Vec<i64> = vars
            .iter()
            .map(|(_, s)| match s {
                Sort::Bool => 2,
                Sort::Int => bound + 1,
                Sort::Loc => sig.locations.len() as i64,
            })
            .collect();
        let log2: f64 = domains.iter().map(|d| (*d.max(&1) as f64).log2()).sum();
        if log2 > MAX_LEAVES_LOG2 {
            return Err(SolverError::DomainTooLarge(format!("{} variables, about 2^{log2:.0} assignments", vars.len())));
        }
        let e = Enumerator { formula: Node::Const(1), vars, domains, locations: sig.locations.clone() };
        let formula = e.compile(f, sig)?;
        let extra = extra.iter().map(|x| e.compile(x, sig)).collect::<Result<Vec<_>, _>>()?;
        Ok((Enumerator { formula, ..e }, extra))
    }

    fn compile(&self, e: &Expr, sig: &Signature) -> Result<Node, SolverError> {
        let b = |x: &Expr| self.compile(x, sig).map(Box::new);
        Ok(match e {
            Expr::Bool(v) => Node::Const(*v as i64),
            Expr::Int(i) => Node::Const(*i),
            Expr::Loc(l) => {
                Node::Const(sig.location_index(l).ok_or_else(|| SolverError::Protocol(format!("unknown location `{l}`")))? as i64)
            }
            Expr::Var(v) => Node::Slot(self.vars.iter().position(|(w, _)| w == v).unwrap()),
            Expr::Add(x, y) => Node::Add(b(x)?, b(y)?),
            Expr::Sub(x, y) => Node::Sub(b(x)?, b(y)?),
            Expr::Scale(k, x) => Node::Scale(*k, b(x)?),
            Expr::Cmp(op, x, y) => Node::Cmp(*op, b(x)?, b(y)?),
            Expr::Not(x) => Node::Not(b(x)?),
            Expr::And(xs) => Node::And(xs.iter().map(|x| self.compile(x, sig)).collect::<Result<_, _>>()?),
            Expr::Or(xs) => Node::Or(xs.iter().map(|x| self.compile(x, sig)).collect::<Result<_, _>>()?),
            Expr::Implies(x, y) => Node::Implies(b(x)?, b(y)?),
            Expr::Iff(x, y) => Node::Iff(b(x)?, b(y)?),
        })
    }

    fn model(&self, a: &[Option<i64>]) -> Model {
        self.vars
            .iter()
            .zip(a)
            .map(|((v, s), x)| {
                let x = x.unwrap_or(0);
                let val = match s {
                    Sort::Bool => Value::Bool(x != 0),
                    Sort::Int => Value::Int(x),
                    Sort::Loc => Value::Loc(self.locations[x as usize].clone()),
                };
                (v.clone(), val)
            })
            .collect()
    }

    pub fn check(&self) -> Result<SatResult, SolverError> {
        let mut a = vec![None; self.vars.len()];
        Ok(match self.first(&mut a, 0) {
            true => SatResult::Sat(self.model(&a)),
            false => SatResult::Unsat,
        })
    }

    fn first(&self, a: &mut Vec<Option<i64>>, depth: usize) -> bool {
        match self.formula.eval(a) {
            Some(0) => return false,
            Some(_) => return true,
            None => {}
        }
        if depth == a.len() {
            return false;
        }
        for x in 0..self.domains[depth] {
            a[depth] = Some(x);
            if self.first(a, depth + 1) {
                return true;
            }
        }
        a[depth] = None;
        false
    }
}

/// Projected enumeration over a bounded domain.
pub fn project(f: &Expr, sig: &Signature, bound: i64, proj: &[Expr]) -> Result<Projection, SolverError> {
    let (e, nodes) = Enumerator::with_extra(f, proj, sig, bound)?;
    let mut seen: BTreeSet<Vec<bool>> = BTreeSet::new();
    let mut out = Projection { solutions: vec![], complete: true };
    let mut a = vec![None; e.vars.len()];
    walk(&e, &nodes, &mut a, 0, &mut seen, &mut out);
    Ok(out)
}

fn walk(
    e: &Enumerator,
    proj: &[Node],
    a: &mut Vec<Option<i64>>,
    depth: usize,
    seen: &mut BTreeSet<Vec<bool>>,
    out: &mut Projection,
) {
    let f = e.formula.eval(a);
    if f == Some(0) {
        return;
    }
    if f.is_some() {
        let vals: Option<Vec<bool>> = proj.iter().map(|p| p.eval(a).map(|v| v != 0)).collect();
        if let Some(vals) = vals {
            if seen.insert(vals.clone()) {
                let full: Vec<Option<i64>> = a.iter().map(|x| Some(x.unwrap_or(0))).collect();
                out.solutions.push((vals, e.model(&full)));
            }
            return;
        }
    }
    if depth == a.len() {
        return;
    }
    for x in 0..e.domains[depth] {
        a[depth] = Some(x);
        walk(e, proj, a, depth + 1, seen, out);
    }
    a[depth] = None;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::eval::eval_formula;

    fn sig() -> Signature {
        Signature {
            locals: vec![("l".into(), Sort::Int), ("b".into(), Sort::Bool), ("pc".into(), Sort::Loc)],
            locations: vec!["x".into(), "y".into()],
            ..Default::default()
        }
    }

    fn l(i: u32) -> Expr {
        Expr::var(Var::thread("l", i))
    }

    #[test]
    fn antisymmetry_unsat() {
        let f = Expr::and([Expr::cmp(CmpOp::Lt, l(1), l(2)), Expr::cmp(CmpOp::Lt, l(2), l(1))]);
        assert_eq!(Enumerator::new(&f, &sig(), 4).unwrap().check().unwrap(), SatResult::Unsat);
    }

    #[test]
    fn models_satisfy() {
        let f = Expr::and([
            Expr::cmp(CmpOp::Lt, l(1), l(2)),
            Expr::eq(Expr::var(Var::base("pc")), Expr::Loc("y".into())),
            Expr::var(Var::base("b")),
        ]);
        let SatResult::Sat(m) = Enumerator::new(&f, &sig(), 3).unwrap().check().unwrap() else { panic!() };
        assert!(eval_formula(&f, &m).unwrap());
    }

    #[test]
    fn projection_is_exhaustive() {
        let f = Expr::cmp(CmpOp::Le, l(1), l(2));
        let proj = [Expr::eq(l(1), l(2)), Expr::cmp(CmpOp::Lt, l(2), Expr::Int(1))];
        let p = project(&f, &sig(), 2, &proj).unwrap();
        let got: BTreeSet<Vec<bool>> = p.solutions.iter().map(|(v, _)| v.clone()).collect();
        // l1 <= l2 over [0,2]: (eq, l2<1) in {TT (0,0), FF, TF (1,1),(2,2)}; l2<1 forces l1=l2=0
        let want: BTreeSet<Vec<bool>> = [vec![true, true], vec![true, false], vec![false, false]].into_iter().collect();
        assert_eq!(got, want);
        for (bits, m) in &p.solutions {
            assert!(eval_formula(&f, m).unwrap());
            for (q, b) in proj.iter().zip(bits) {
                assert_eq!(eval_formula(q, m).unwrap(), *b);
            }
        }
    }
}
