//! n-thread instantiations of template programs and predicates.

use super::formula::{rename, Expr, Index, UniformSet, Var};
use crate::frontend::{AsyncProgram, Predicate, PredicateClass};

fn locals(p: &AsyncProgram) -> UniformSet {
    UniformSet::new(p.sig.local_names(), Index::Base)
}

/// `L_p' = L_p` for thread `p`.
pub fn frame_thread(p: &AsyncProgram, thread: u32) -> Expr {
    Expr::and(
        p.sig
            .local_names()
            .into_iter()
            .map(|n| Expr::eq(Expr::var(Var::thread(&n, thread).primed()), Expr::var(Var::thread(n, thread)))),
    )
}

/// Instantiate a template formula for active thread `a` and passive `q`.
pub fn pair_instance(f: &Expr, p: &AsyncProgram, a: u32, q: Option<u32>) -> Expr {
    let base = locals(p);
    let g = rename(f, &base, &base.reindexed(Index::Thread(a)), true);
    match q {
        Some(q) => rename(&g, &base.reindexed(Index::Passive), &base.reindexed(Index::Thread(q)), true),
        None => g,
    }
}

/// `R^n_a`, the moves of active thread `a` in the n-thread instantiation,
/// for a given template transition formula `r` of program `p`.
pub fn active_transition(p: &AsyncProgram, r: &Expr, n: u32, a: u32) -> Expr {
    if p.dual_reference {
        if n < 2 {
            return Expr::ff();
        }
        Expr::and((1..=n).filter(|&q| q != a).map(|q| pair_instance(r, p, a, Some(q))))
    } else {
        let mut parts = vec![pair_instance(r, p, a, None)];
        parts.extend((1..=n).filter(|&q| q != a).map(|q| frame_thread(p, q)));
        Expr::and(parts)
    }
}

/// `I^n`.
pub fn initial_instance(p: &AsyncProgram, n: u32) -> Expr {
    if p.dual_reference {
        if n < 2 {
            return Expr::ff();
        }
        let init = &p.initial;
        Expr::or((1..=n).map(|a| Expr::and((1..=n).filter(|&q| q != a).map(|q| pair_instance(init, p, a, Some(q))))))
    } else {
        Expr::and((1..=n).map(|a| pair_instance(&p.initial, p, a, None)))
    }
}

/// `(R^n, I^n)`: some thread moves while all others keep their locals
/// (for dual-reference programs: the move holds against every other
/// thread as passive partner).
pub fn instantiate_async(p: &AsyncProgram, n: u32) -> (Expr, Expr) {
    let r = Expr::or((1..=n).map(|a| active_transition(p, &p.transition, n, a)));
    (r, initial_instance(p, n))
}

/// `φ[a]` in an n-thread state: inter-thread predicates must hold against
/// every other thread.
pub fn predicate_semantics(pred: &Predicate, p: &AsyncProgram, a: u32, n: u32) -> Expr {
    match pred.class {
        PredicateClass::Shared => pred.formula.clone(),
        PredicateClass::Local | PredicateClass::SingleThread => pair_instance(&pred.formula, p, a, None),
        PredicateClass::InterThread => {
            Expr::and((1..=n).filter(|&q| q != a).map(|q| pair_instance(&pred.formula, p, a, Some(q))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_predicates, parse_program};
    use crate::logic::eval::{eval_formula, Model, Value};

    fn dec() -> AsyncProgram {
        parse_program("local l: int; locations l1; l1: l := l - 1 -> l1;").unwrap()
    }

    fn state(vals: &[i64]) -> Model {
        vals.iter().enumerate().map(|(i, v)| (Var::thread("l", i as u32 + 1), Value::Int(*v))).collect()
    }

    #[test]
    fn one_thread_has_no_frame() {
        let p = dec();
        let (r, _) = instantiate_async(&p, 1);
        assert_eq!(r.to_string(), "pc@1 == l1 && l@1' == l@1 - 1 && pc@1' == l1");
    }

    #[test]
    fn two_thread_decrement_witness() {
        let p = dec();
        let (r, _) = instantiate_async(&p, 2);
        let mut m = state(&[1, 1]);
        for (k, v) in [("l", 1, 0), ("l", 2, 1)].map(|(n, i, v)| ((n, i), v)) {
            m.insert(Var::thread(k.0, k.1).primed(), Value::Int(v));
        }
        for i in 1..=2 {
            m.insert(Var::thread("pc", i), Value::Loc("l1".into()));
            m.insert(Var::thread("pc", i).primed(), Value::Loc("l1".into()));
        }
        assert!(eval_formula(&r, &m).unwrap());
        m.insert(Var::thread("l", 2).primed(), Value::Int(0));
        assert!(!eval_formula(&r, &m).unwrap());
    }

    #[test]
    fn unique_maximum() {
        let p = dec();
        let preds = parse_predicates("l <= l@P; l > l@P", &p.sig).unwrap();
        let m = state(&[4, 4, 5, 6]);
        let holds = |k: usize, a| eval_formula(&predicate_semantics(&preds[k], &p, a, 4), &m).unwrap();
        assert!(holds(0, 1));
        assert!(holds(1, 4));
        assert!(!holds(1, 3));
    }

    #[test]
    fn conjunct_counts() {
        let p = dec();
        let preds = parse_predicates("l != l@P", &p.sig).unwrap();
        assert_eq!(predicate_semantics(&preds[0], &p, 1, 2).conjuncts().len(), 1);
        assert_eq!(predicate_semantics(&preds[0], &p, 2, 5).conjuncts().len(), 4);
    }
}
