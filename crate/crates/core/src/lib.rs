//! Parameterized safety checking of asynchronous shared-variable programs
//! through predicate abstraction into Boolean dual-reference programs.

pub mod error;
pub mod frontend;
pub mod logic;

pub use error::{Error, Result};
pub mod abstraction;
pub mod coverability;
pub mod drcore;
pub mod minsky;
