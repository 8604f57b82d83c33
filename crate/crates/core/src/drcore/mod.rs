//! Boolean dual-reference programs: semantics, monotonicity and closure.

mod concrete;
mod monotone;
mod program;
mod semantics;

pub use concrete::{
    check_monotone_symbolic, compile_explicit, concrete_initial_states, concrete_states, concrete_successors, eliminate_shared,
    explore_concrete, monotone_violation_formula, ConcreteState, SymbolicMonotonicity, Valuation,
};
pub use monotone::{
    check_monotone_sufficient, find_monotonicity_violation, monotone_closure, nmf, require_monotone, Monotonicity,
    MonotonicityWitness, NmfSet,
};
pub use program::{
    bits_string, parse_bits, parse_pattern, DrProgram, LocalState, Provenance, Quad, StatePattern, DEFAULT_SINK, TEMPLATE_FORMAT,
};
pub use semantics::{all_tuples, instantiate_dr, is_initial, step, step_active, Instance, MoveIndex};
