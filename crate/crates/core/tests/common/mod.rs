#![allow(dead_code)]

pub mod gen;
pub mod props;

use std::path::PathBuf;

use drcheck::frontend::{parse_predicates, parse_program, AsyncProgram, Predicate};
use drcheck::logic::solver::{solver_available, Solver, SolverBackend};

pub fn corpus(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(corpus(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn load(prog: &str, preds: &str) -> (AsyncProgram, Vec<Predicate>) {
    let p = parse_program(&read(prog)).unwrap();
    let ps = parse_predicates(&read(preds), &p.sig).unwrap();
    (p, ps)
}

pub fn solver_path() -> String {
    std::env::var("DRCHECK_SOLVER").unwrap_or_else(|_| "z3".into())
}

/// External solver if one is installed, otherwise `None`.
pub fn smt() -> Option<Solver> {
    let path = solver_path();
    if solver_available(&path) {
        Some(Solver::new(SolverBackend::smt(path)).unwrap())
    } else {
        eprintln!("no SMT solver at `{path}`");
        None
    }
}

/// Compares the two backends on `f`. Returns `Some(sat)` on agreement,
/// `None` when the external solver answers unknown.
pub fn backends_agree(smt: &Solver, bounded: &Solver, f: &drcheck::logic::Expr) -> Result<Option<bool>, String> {
    use drcheck::logic::{eval_formula, SatResult};
    let sig = gen::query_signature();
    let a = smt.check_sat(f, &sig).map_err(|e| format!("smt: {e}"))?;
    let b = bounded.check_sat(f, &sig).map_err(|e| format!("enum: {e}"))?;
    for r in [&a, &b] {
        if let SatResult::Sat(m) = r {
            if !eval_formula(f, m).map_err(|e| format!("{f}: {e}"))? {
                return Err(format!("model {m:?} does not satisfy {f}"));
            }
        }
    }
    match (a.is_sat(), &a, b.is_sat()) {
        (_, SatResult::Unknown, _) => Ok(None),
        (x, _, y) if x == y => Ok(Some(x)),
        _ => Err(format!("smt {} vs enum {} on {f}", a.is_sat(), b.is_sat())),
    }
}

pub fn bounded_smt(bound: i64) -> Option<Solver> {
    let path = solver_path();
    if !solver_available(&path) {
        eprintln!("no SMT solver at `{path}`");
        return None;
    }
    Some(Solver::new(SolverBackend::Smt { path: path.into(), timeout_ms: 60_000, int_bound: Some(bound) }).unwrap())
}
