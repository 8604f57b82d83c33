//! Surface syntax: programs and predicate files.

pub(crate) mod lexer;
pub(crate) mod parser;
mod predicate;
mod pretty;
mod program;

pub use lexer::{tokenize, Tok};
pub use parser::sort_of;
pub use predicate::{classify_predicate, parse_predicates, Predicate, PredicateClass};
pub use pretty::{pretty_command, pretty_program};
pub use program::{parse_program, Assign, AsyncProgram, Command, Decl, ProgramAst, Scope, ERROR_LOCATION, MUTEX_SEM};
