//! Coverability for unboundedly many threads: counter states, the covering
//! order, backward reachability over minimal bases and a bounded forward
//! explorer.

mod backward;
mod counter;
mod forward;
mod query;
mod trace;

pub use backward::{backward_reach, initial_intersect, pred_basis, BackwardResult, BackwardStats, PredIndex, StepInfo};
pub use counter::{covers, minimize, CounterState};
pub use forward::{forward_explore, reachable_states, ForwardResult};
pub use query::{error_target, expand_target, EngineOptions, Query, TargetEntry};
pub use trace::{Trace, Verdict};
