//! Satisfiability checking: an external SMT-LIB2 process or an exhaustive
//! bounded enumerator.

pub mod enumerate;
mod smt;

use std::path::PathBuf;
use std::sync::Mutex;
use std::time::Duration;

use super::eval::Model;
use super::formula::{Expr, Signature};
use crate::error::SolverError;

pub use enumerate::Enumerator;
pub use smt::{SmtProcess, DEFAULT_SOLVER};

#[derive(Clone, Debug, PartialEq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
    Unknown,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverBackend {
    /// External solver speaking SMT-LIB2 on stdin/stdout. With `int_bound`,
    /// integer variables are restricted to `[0, bound]`.
    Smt { path: PathBuf, timeout_ms: u64, int_bound: Option<i64> },
    /// Exhaustive search; integers range over `[0, bound]`.
    Enumerate { bound: i64 },
}

impl SolverBackend {
    pub fn smt(path: impl Into<PathBuf>) -> Self {
        SolverBackend::Smt { path: path.into(), timeout_ms: 60_000, int_bound: None }
    }

    pub fn enumerate(bound: i64) -> Self {
        SolverBackend::Enumerate { bound }
    }

    /// Solver path from `DRCHECK_SOLVER`, falling back to `z3` on PATH.
    pub fn default_smt() -> Self {
        Self::smt(std::env::var("DRCHECK_SOLVER").unwrap_or_else(|_| DEFAULT_SOLVER.to_string()))
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        match self {
            SolverBackend::Enumerate { bound } if *bound < 1 => Err(SolverError::Protocol("bound must be at least 1".into())),
            SolverBackend::Smt { timeout_ms: 0, .. } => Err(SolverError::Protocol("timeout must be positive".into())),
            SolverBackend::Smt { int_bound: Some(b), .. } if *b < 1 => {
                Err(SolverError::Protocol("bound must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Result of projected model enumeration.
#[derive(Clone, Debug, Default)]
pub struct Projection {
    /// Distinct valuations of the projection formulas, each with a model.
    pub solutions: Vec<(Vec<bool>, Model)>,
    /// False if the solver gave up before the enumeration was exhaustive.
    pub complete: bool,
}

/// A solver handle. SMT processes are pooled and reused; the handle may be
/// shared between worker threads.
pub struct Solver {
    backend: SolverBackend,
    pool: Mutex<Vec<SmtProcess>>,
}

impl Solver {
    pub fn new(backend: SolverBackend) -> Result<Self, SolverError> {
        backend.validate()?;
        Ok(Solver { backend, pool: Mutex::new(Vec::new()) })
    }

    pub fn backend(&self) -> &SolverBackend {
        &self.backend
    }

    fn with_process<T>(&self, f: impl FnOnce(&mut SmtProcess) -> Result<T, SolverError>) -> Result<T, SolverError> {
        let SolverBackend::Smt { path, timeout_ms, .. } = &self.backend else { unreachable!() };
        let pooled = self.pool.lock().unwrap().pop();
        let mut proc = match pooled {
            Some(p) => p,
            None => SmtProcess::spawn(path, Duration::from_millis(*timeout_ms))?,
        };
        let out = f(&mut proc);
        if proc.is_alive() {
            self.pool.lock().unwrap().push(proc);
        }
        out
    }

    pub fn check_sat(&self, f: &Expr, sig: &Signature) -> Result<SatResult, SolverError> {
        match &self.backend {
            SolverBackend::Enumerate { bound } => Enumerator::new(f, sig, *bound)?.check(),
            SolverBackend::Smt { int_bound, .. } => self.with_process(|p| p.check_sat(f, sig, *int_bound)),
        }
    }

    /// All valuations of `proj` realizable by models of `f`.
    pub fn project(&self, f: &Expr, sig: &Signature, proj: &[Expr]) -> Result<Projection, SolverError> {
        match &self.backend {
            SolverBackend::Enumerate { bound } => enumerate::project(f, sig, *bound, proj),
            SolverBackend::Smt { int_bound, .. } => self.with_process(|p| p.project(f, sig, proj, *int_bound)),
        }
    }
}

/// One-shot satisfiability check.
pub fn check_sat(f: &Expr, sig: &Signature, backend: &SolverBackend) -> Result<SatResult, SolverError> {
    Solver::new(backend.clone())?.check_sat(f, sig)
}

/// Is an SMT solver runnable at `path`?
pub fn solver_available(path: &str) -> bool {
    std::process::Command::new(path)
        .arg("-version")
        .stdout(std::process::Stdio::null())
        .stderr(std::process::Stdio::null())
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}
