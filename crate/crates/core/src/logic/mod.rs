//! Formulas, instantiation and satisfiability.

pub mod eval;
pub mod formula;
pub mod instantiate;
pub mod solver;

pub use eval::{eval_formula, eval_term, Model, Value};
pub use formula::{rename, CmpOp, Expr, Index, Signature, Sort, UniformSet, Var};
pub use instantiate::{instantiate_async, predicate_semantics};
pub use solver::{check_sat, SatResult, Solver, SolverBackend};
