//! Existential predicate abstraction and the parametric DR template.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::drcore::{DrProgram, LocalState, Quad, StatePattern};
use crate::error::{Error, EvalError, Result, SolverError};
use crate::frontend::{AsyncProgram, Predicate};
use crate::logic::formula::{Expr, Var};
use crate::logic::instantiate::{active_transition, initial_instance, predicate_semantics};
use crate::logic::solver::{Projection, SatResult, Solver};
use crate::logic::{eval_formula, Model};

/// `m x n` truth values: row `c` is predicate `c+1`, column `a` is thread `a+1`.
pub type BitMatrix = Vec<Vec<bool>>;

/// Abstract image of a concrete n-thread state.
pub fn alpha(state: &Model, p: &AsyncProgram, preds: &[Predicate], n: u32) -> Result<BitMatrix, EvalError> {
    preds.iter().map(|pr| (1..=n).map(|a| eval_formula(&predicate_semantics(pr, p, a, n), state)).collect()).collect()
}

fn pc_is(thread: u32, primed: bool, loc: &str) -> Expr {
    let mut v = Var::thread("pc", thread);
    v.primed = primed;
    Expr::eq(Expr::var(v), Expr::Loc(loc.to_string()))
}

fn bit_exprs(p: &AsyncProgram, preds: &[Predicate], n: u32, threads: &[u32], primed: bool) -> Vec<Expr> {
    let mut out = Vec::new();
    for &t in threads {
        for pr in preds {
            let e = predicate_semantics(pr, p, t, n);
            out.push(if primed { e.prime() } else { e });
        }
    }
    out
}

/// Projected enumeration; if the solver gives up, every valuation not yet
/// found is checked on its own and kept unless proven infeasible.
fn project_conservative(solver: &Solver, f: &Expr, p: &AsyncProgram, proj: &[Expr]) -> Result<(Projection, bool)> {
    let first = solver.project(f, &p.sig, proj)?;
    if first.complete {
        return Ok((first, true));
    }
    log::warn!("projection incomplete after {} solutions; checking remaining valuations one by one", first.solutions.len());
    if proj.len() > 24 {
        return Err(SolverError::DomainTooLarge(format!("{} projection bits", proj.len())).into());
    }
    let found: BTreeSet<Vec<bool>> = first.solutions.iter().map(|(v, _)| v.clone()).collect();
    let mut out = first;
    for code in 0u64..1 << proj.len() {
        let vals: Vec<bool> = (0..proj.len()).map(|i| code >> i & 1 == 1).collect();
        if found.contains(&vals) {
            continue;
        }
        let fixed = Expr::and(std::iter::once(f.clone()).chain(proj.iter().zip(&vals).map(|(e, v)| {
            if *v {
                e.clone()
            } else {
                Expr::not(e.clone())
            }
        })));
        match solver.check_sat(&fixed, &p.sig)? {
            SatResult::Sat(m) => out.solutions.push((vals, m)),
            SatResult::Unknown => out.solutions.push((vals, Model::new())),
            SatResult::Unsat => {}
        }
    }
    Ok((out, false))
}

fn matrix(vals: &[bool], m: usize, n: usize) -> BitMatrix {
    (0..m).map(|c| (0..n).map(|t| vals[t * m + c]).collect()).collect()
}

/// Abstract n-thread transitions with active thread `a`, each with a
/// concrete witness (empty when only kept because the solver gave up).
pub fn exabs_transitions(
    p: &AsyncProgram,
    preds: &[Predicate],
    n: u32,
    a: u32,
    solver: &Solver,
) -> Result<BTreeMap<(BitMatrix, BitMatrix), Model>> {
    let threads: Vec<u32> = (1..=n).collect();
    let mut proj = bit_exprs(p, preds, n, &threads, false);
    proj.extend(bit_exprs(p, preds, n, &threads, true));
    let per = preds.len() * n as usize;
    let mut out = BTreeMap::new();
    for r in p.command_formulas() {
        let f = active_transition(p, &r, n, a);
        let (sols, _) = project_conservative(solver, &f, p, &proj)?;
        for (vals, model) in sols.solutions {
            let key = (matrix(&vals[..per], preds.len(), n as usize), matrix(&vals[per..], preds.len(), n as usize));
            out.entry(key).or_insert(model);
        }
    }
    Ok(out)
}

/// Abstract initial n-thread states.
pub fn exabs_initial(p: &AsyncProgram, preds: &[Predicate], n: u32, solver: &Solver) -> Result<BTreeMap<BitMatrix, Model>> {
    let threads: Vec<u32> = (1..=n).collect();
    let proj = bit_exprs(p, preds, n, &threads, false);
    let (sols, _) = project_conservative(solver, &initial_instance(p, n), p, &proj)?;
    Ok(sols.solutions.into_iter().map(|(v, m)| (matrix(&v, preds.len(), n as usize), m)).collect())
}

fn pack(vals: &[bool]) -> u32 {
    vals.iter().enumerate().fold(0, |acc, (i, b)| acc | (*b as u32) << i)
}

fn location_of(vals: &[bool]) -> Option<u16> {
    let mut it = vals.iter().enumerate().filter(|(_, b)| **b);
    match (it.next(), it.next()) {
        (Some((i, _)), None) => Some(i as u16),
        _ => None,
    }
}

/// Template contributions of one thread count.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TemplateStep {
    pub trans: BTreeSet<Quad>,
    pub init: BTreeSet<(LocalState, LocalState)>,
    /// False if some query was answered conservatively.
    pub exact: bool,
}

fn step_command(p: &AsyncProgram, preds: &[Predicate], n: u32, r: &Expr, solver: &Solver) -> Result<(BTreeSet<Quad>, bool)> {
    let m = preds.len();
    let k = p.sig.locations.len();
    let mut proj = bit_exprs(p, preds, n, &[1, 2], false);
    proj.extend(bit_exprs(p, preds, n, &[1, 2], true));
    for (t, primed) in [(1, false), (2, false), (1, true), (2, true)] {
        proj.extend(p.sig.locations.iter().map(|l| pc_is(t, primed, l)));
    }
    let f = active_transition(p, r, n, 1);
    let (sols, exact) = project_conservative(solver, &f, p, &proj)?;
    let mut out = BTreeSet::new();
    for (vals, _) in sols.solutions {
        let pcs: Vec<Option<u16>> = (0..4).map(|i| location_of(&vals[4 * m + i * k..4 * m + (i + 1) * k])).collect();
        let [Some(pa), Some(pp), Some(pa2), Some(pp2)] = [pcs[0], pcs[1], pcs[2], pcs[3]] else { continue };
        let bits = |i: usize| pack(&vals[i * m..(i + 1) * m]);
        out.insert(Quad::new(
            LocalState::new(pa, bits(0)),
            LocalState::new(pp, bits(1)),
            LocalState::new(pa2, bits(2)),
            LocalState::new(pp2, bits(3)),
        ));
    }
    Ok((out, exact))
}

fn step_initial(
    p: &AsyncProgram,
    preds: &[Predicate],
    n: u32,
    solver: &Solver,
) -> Result<(BTreeSet<(LocalState, LocalState)>, bool)> {
    let m = preds.len();
    let k = p.sig.locations.len();
    let mut proj = bit_exprs(p, preds, n, &[1, 2], false);
    for t in [1, 2] {
        proj.extend(p.sig.locations.iter().map(|l| pc_is(t, false, l)));
    }
    let (sols, exact) = project_conservative(solver, &initial_instance(p, n), p, &proj)?;
    let mut out = BTreeSet::new();
    for (vals, _) in sols.solutions {
        let (Some(pa), Some(pp)) = (location_of(&vals[2 * m..2 * m + k]), location_of(&vals[2 * m + k..])) else { continue };
        out.insert((LocalState::new(pa, pack(&vals[..m])), LocalState::new(pp, pack(&vals[m..2 * m]))));
    }
    Ok((out, exact))
}

/// Transitions and initial pairs of the n-thread abstraction, projected
/// onto active thread 1 and passive thread 2.
pub fn template_step(p: &AsyncProgram, preds: &[Predicate], n: u32, solver: &Solver) -> Result<TemplateStep> {
    if n < 2 {
        return Err(Error::Invalid("template steps need at least two threads".into()));
    }
    let mut step = TemplateStep { exact: true, ..Default::default() };
    for r in p.command_formulas() {
        let (t, exact) = step_command(p, preds, n, &r, solver)?;
        step.trans.extend(t);
        step.exact &= exact;
    }
    let (i, exact) = step_initial(p, preds, n, solver)?;
    step.init = i;
    step.exact &= exact;
    Ok(step)
}

/// Thread count after which the template sequence no longer grows.
pub fn saturation_bound(preds: &[Predicate]) -> u32 {
    4 * preds.iter().filter(|p| p.is_inter_thread()).count() as u32 + 2
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct TemplateBuildReport {
    pub inter_thread: usize,
    pub saturation_bound: u32,
    /// `(n, cumulative transitions, cumulative initial pairs)`.
    pub per_n: Vec<(u32, usize, usize)>,
    /// `(n, transitions or initial pairs not already in the template)`.
    pub probe: Vec<(u32, usize)>,
    pub probe_added: bool,
    pub exact: bool,
}

enum Task {
    Command(u32, usize),
    Initial(u32),
}

/// Cumulative template over `n = 2..=b`, plus `probe` further thread
/// counts that are only checked for growth.
pub fn build_template(
    p: &AsyncProgram,
    preds: &[Predicate],
    probe: u32,
    solver: &Solver,
) -> Result<(DrProgram, TemplateBuildReport)> {
    if preds.is_empty() {
        return Err(Error::Invalid("at least one predicate is required".into()));
    }
    if preds.len() > 31 {
        return Err(Error::Invalid("at most 31 predicates are supported".into()));
    }
    let b = saturation_bound(preds);
    let top = b + probe;
    let commands = p.command_formulas();
    let mut tasks = Vec::new();
    for n in 2..=top {
        tasks.push(Task::Initial(n));
        tasks.extend((0..commands.len()).map(|c| Task::Command(n, c)));
    }
    // larger instances first, they take longest
    tasks.reverse();
    type Part = (u32, BTreeSet<Quad>, BTreeSet<(LocalState, LocalState)>, bool);
    let parts: Vec<Part> = tasks
        .par_iter()
        .map(|t| -> Result<Part> {
            Ok(match t {
                Task::Command(n, c) => {
                    let (q, e) = step_command(p, preds, *n, &commands[*c], solver)?;
                    (*n, q, BTreeSet::new(), e)
                }
                Task::Initial(n) => {
                    let (i, e) = step_initial(p, preds, *n, solver)?;
                    (*n, BTreeSet::new(), i, e)
                }
            })
        })
        .collect::<Result<_>>()?;

    let mut by_n: BTreeMap<u32, (BTreeSet<Quad>, BTreeSet<(LocalState, LocalState)>)> = BTreeMap::new();
    let mut exact = true;
    for (n, q, i, e) in parts {
        let slot = by_n.entry(n).or_default();
        slot.0.extend(q);
        slot.1.extend(i);
        exact &= e;
    }

    let mut d = DrProgram::new(p.sig.locations.clone(), preds.iter().map(|pr| pr.formula.to_string()).collect());
    if let Some(err) = &p.error {
        d.error.push(StatePattern::location(d.location(err).unwrap()));
    }
    let mut report = TemplateBuildReport {
        inter_thread: preds.iter().filter(|p| p.is_inter_thread()).count(),
        saturation_bound: b,
        exact,
        ..Default::default()
    };
    for (n, (q, i)) in by_n {
        if n <= b {
            d.trans.extend(q);
            d.init.extend(i);
            report.per_n.push((n, d.trans.len(), d.init.len()));
        } else {
            let added = q.difference(&d.trans).count() + i.difference(&d.init).count();
            report.probe.push((n, added));
            report.probe_added |= added > 0;
        }
    }
    d.provenance.predicates = d.bit_names.clone();
    d.provenance.saturation_bound = Some(b);
    d.provenance.per_n = report.per_n.iter().map(|(n, t, _)| (*n, *t)).collect();
    if probe > 0 {
        d.provenance.probe_added = Some(report.probe.iter().map(|(_, a)| a).sum());
    }
    d.validate()?;
    Ok((d, report))
}
