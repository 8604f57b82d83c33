//! Predicate files and the four predicate classes.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::parser::{Parser, Scope};
use crate::error::ParseError;
use crate::logic::formula::{Expr, Index, Signature};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredicateClass {
    Shared,
    Local,
    SingleThread,
    InterThread,
}

impl fmt::Display for PredicateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredicateClass::Shared => "shared",
            PredicateClass::Local => "local",
            PredicateClass::SingleThread => "single-thread",
            PredicateClass::InterThread => "inter-thread",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Predicate {
    /// 1-based position in the predicate file.
    pub id: usize,
    pub formula: Expr,
    pub class: PredicateClass,
}

impl Predicate {
    pub fn new(id: usize, formula: Expr, sig: &Signature) -> Result<Self, ParseError> {
        let class = classify_predicate(&formula, sig)?;
        Ok(Predicate { id, formula, class })
    }

    pub fn is_inter_thread(&self) -> bool {
        self.class == PredicateClass::InterThread
    }
}

/// Class of a state formula over S, L and L_P. A formula without any
/// variable counts as shared; one that reads L_P but not L is rejected.
pub fn classify_predicate(f: &Expr, sig: &Signature) -> Result<PredicateClass, ParseError> {
    let vars = f.vars();
    let local = vars.iter().any(|v| v.index == Index::Base && sig.is_local(&v.name));
    let passive = vars.iter().any(|v| v.index == Index::Passive);
    let shared = vars.iter().any(|v| sig.is_shared(&v.name));
    Ok(match (local, passive) {
        (false, true) => return Err(ParseError::PassiveOnly(f.to_string())),
        (true, true) => PredicateClass::InterThread,
        (true, false) if shared => PredicateClass::SingleThread,
        (true, false) => PredicateClass::Local,
        (false, false) => PredicateClass::Shared,
    })
}

/// One predicate per line (or `;`-separated), `#` starts a comment.
pub fn parse_predicates(text: &str, sig: &Signature) -> Result<Vec<Predicate>, ParseError> {
    let scope = Scope { sig, allow_passive: true, allow_primed: false };
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    loop {
        while p.eat_separator() {}
        if p.at_eof() {
            break;
        }
        let f = p.checked_formula(&scope)?;
        out.push(Predicate::new(out.len() + 1, f, sig)?);
        if !p.at_eof() && !p.at_line_start() && !p.eat_separator() {
            return p.unexpected();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;

    fn ticket_sig() -> Signature {
        parse_program("shared s: int; shared t: int; shared u: int; local l: int; locations l1;").unwrap().sig
    }

    fn classes(src: &str) -> Vec<PredicateClass> {
        parse_predicates(src, &ticket_sig()).unwrap().into_iter().map(|p| p.class).collect()
    }

    #[test]
    fn ticket_predicates() {
        use PredicateClass::*;
        assert_eq!(classes("l != l@P; t > max(l, l@P); s == l"), [InterThread, InterThread, SingleThread]);
        assert_eq!(classes("l != l@P\nt > max(l, l@P)\n# c\ns == l\n"), [InterThread, InterThread, SingleThread]);
    }

    #[test]
    fn single_classes() {
        use PredicateClass::*;
        assert_eq!(classes("s == t"), [Shared]);
        assert_eq!(classes("u == t"), [Shared]);
        assert_eq!(classes("l == 5"), [Local]);
        assert_eq!(classes("u == l"), [SingleThread]);
        assert_eq!(classes("l <= l@P"), [InterThread]);
        assert_eq!(classes("true"), [Shared]);
    }

    #[test]
    fn rejections() {
        let sig = ticket_sig();
        assert!(matches!(parse_predicates("l@P == 1", &sig), Err(ParseError::PassiveOnly(_))));
        assert!(matches!(parse_predicates("l' == 1", &sig), Err(ParseError::Primed { .. })));
        assert!(matches!(parse_predicates("k == 1", &sig), Err(ParseError::Undeclared { .. })));
        assert!(matches!(parse_predicates("l == 1 l == 2", &sig), Err(ParseError::Syntax { .. })));
    }
}
